//! Seeded noise injection for robustness experiments.
//!
//! All generators draw from a ChaCha8 stream seeded with [`NoiseSpec::seed`],
//! so `(image, spec)` fully determines the output. Results are clamped to
//! `[0, 1]`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Photon-count scale used for Poisson noise on normalized 8-bit images.
pub const POISSON_SCALE: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    SaltPepper,
    Poisson,
    Speckle,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::SaltPepper => "salt_pepper",
            NoiseKind::Poisson => "poisson",
            NoiseKind::Speckle => "speckle",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "salt_pepper" | "salt-pepper" => Ok(NoiseKind::SaltPepper),
            "poisson" => Ok(NoiseKind::Poisson),
            "speckle" => Ok(NoiseKind::Speckle),
            other => Err(Error::param("kind", format!("unknown noise kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Gaussian only.
    #[serde(default)]
    pub mean: f64,
    /// Gaussian and speckle.
    #[serde(default)]
    pub variance: f64,
    /// Salt-and-pepper only; fraction of pixels replaced.
    #[serde(default)]
    pub density: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(mean: f64, variance: f64, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::Gaussian, mean, variance, density: 0.0, seed }
    }

    pub fn salt_pepper(density: f64, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::SaltPepper, mean: 0.0, variance: 0.0, density, seed }
    }

    pub fn poisson(seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::Poisson, mean: 0.0, variance: 0.0, density: 0.0, seed }
    }

    pub fn speckle(variance: f64, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::Speckle, mean: 0.0, variance, density: 0.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::param("mean", "must be finite"));
        }
        if !(self.variance.is_finite() && self.variance >= 0.0) {
            return Err(Error::param("variance", format!("must be >= 0, got {}", self.variance)));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::param("density", format!("must lie in [0, 1], got {}", self.density)));
        }
        Ok(())
    }
}

pub fn add_noise(image: &ScalarField, spec: &NoiseSpec) -> Result<ScalarField> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut values = image.values().to_vec();
    match spec.kind {
        NoiseKind::Gaussian => {
            if spec.variance > 0.0 || spec.mean != 0.0 {
                let normal = normal(spec.mean, spec.variance)?;
                for v in &mut values {
                    *v += normal.sample(&mut rng);
                }
            }
        }
        NoiseKind::SaltPepper => {
            let count = (spec.density * values.len() as f64).round() as usize;
            let count = count.min(values.len());
            for i in index::sample(&mut rng, values.len(), count) {
                values[i] = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
            }
        }
        NoiseKind::Poisson => {
            for v in &mut values {
                let lambda = v.clamp(0.0, 1.0) * POISSON_SCALE;
                *v = if lambda > 0.0 {
                    let poisson = Poisson::new(lambda).expect("lambda is positive and finite");
                    let k: f64 = poisson.sample(&mut rng);
                    k / POISSON_SCALE
                } else {
                    0.0
                };
            }
        }
        NoiseKind::Speckle => {
            if spec.variance > 0.0 {
                let normal = normal(0.0, spec.variance)?;
                for v in &mut values {
                    *v += *v * normal.sample(&mut rng);
                }
            }
        }
    }
    for v in &mut values {
        *v = v.clamp(0.0, 1.0);
    }
    ScalarField::new(image.width(), image.height(), values)
}

fn normal(mean: f64, variance: f64) -> Result<Normal<f64>> {
    Normal::new(mean, variance.sqrt()).map_err(|e| Error::param("variance", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> ScalarField {
        ScalarField::from_fn(32, 24, |x, y| ((x + 2 * y) % 17) as f64 / 16.0).unwrap()
    }

    #[test]
    fn zero_variance_gaussian_is_identity() {
        let img = ramp();
        assert_eq!(add_noise(&img, &NoiseSpec::gaussian(0.0, 0.0, 9)).unwrap(), img);
        assert_eq!(add_noise(&img, &NoiseSpec::speckle(0.0, 9)).unwrap(), img);
    }

    #[test]
    fn zero_density_salt_pepper_is_identity() {
        let img = ramp();
        assert_eq!(add_noise(&img, &NoiseSpec::salt_pepper(0.0, 3)).unwrap(), img);
    }

    #[test]
    fn gaussian_moments_on_constant_field() {
        let img = ScalarField::filled(64, 64, 0.5).unwrap();
        let out = add_noise(&img, &NoiseSpec::gaussian(0.0, 0.01, 42)).unwrap();
        let n = out.len() as f64;
        let mean = out.mean();
        let var = out.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
        assert!((var - 0.01).abs() < 0.3 * 0.01, "variance {var}");
    }

    #[test]
    fn salt_pepper_touches_at_most_ceil_density_pixels() {
        let img = ScalarField::filled(40, 25, 0.5).unwrap();
        for density in [0.01, 0.05, 0.333, 1.0] {
            let out = add_noise(&img, &NoiseSpec::salt_pepper(density, 7)).unwrap();
            let changed = out.values().iter().filter(|&&v| v != 0.5).count();
            assert!(changed <= (density * 1000.0).ceil() as usize);
            assert!(out.values().iter().all(|&v| v == 0.5 || v == 0.0 || v == 1.0));
        }
    }

    #[test]
    fn poisson_mean_tracks_intensity() {
        let img = ScalarField::filled(64, 64, 0.4).unwrap();
        let out = add_noise(&img, &NoiseSpec::poisson(1)).unwrap();
        // std of k/255 with k ~ Poisson(102) is ~0.04; standard error of the mean ~6e-4.
        assert!((out.mean() - 0.4).abs() < 0.005);
        let black = ScalarField::filled(8, 8, 0.0).unwrap();
        assert_eq!(add_noise(&black, &NoiseSpec::poisson(1)).unwrap(), black);
    }

    #[test]
    fn invalid_specs_rejected() {
        let img = ramp();
        assert!(add_noise(&img, &NoiseSpec::gaussian(0.0, -0.1, 0)).is_err());
        assert!(add_noise(&img, &NoiseSpec::salt_pepper(1.5, 0)).is_err());
        assert!(add_noise(&img, &NoiseSpec::salt_pepper(-0.1, 0)).is_err());
    }

    #[test]
    fn seeds_matter_and_repeat() {
        let img = ramp();
        for spec in [
            NoiseSpec::gaussian(0.0, 0.02, 5),
            NoiseSpec::salt_pepper(0.1, 5),
            NoiseSpec::poisson(5),
            NoiseSpec::speckle(0.03, 5),
        ] {
            let a = add_noise(&img, &spec).unwrap();
            let b = add_noise(&img, &spec).unwrap();
            let bits = |f: &ScalarField| f.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a), bits(&b));
            let c = add_noise(&img, &NoiseSpec { seed: 6, ..spec }).unwrap();
            assert_ne!(a, c, "{:?}", spec.kind);
            assert!(a.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
