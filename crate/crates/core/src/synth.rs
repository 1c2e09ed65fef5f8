//! Ground-truthed synthetic scenes: piecewise-constant shapes on a background,
//! an additive bias field for intensity inhomogeneity, and optional noise.
//!
//! The ground truth is the union of the shape supports and never depends on
//! the bias or the noise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::grid::{ScalarField, SegMask, MIN_DIM};
use crate::noise::{add_noise, NoiseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SynthShape {
    Disk { cx: f64, cy: f64, radius: f64, intensity: f64 },
    Rectangle { x0: f64, y0: f64, x1: f64, y1: f64, intensity: f64 },
}

impl SynthShape {
    pub fn shape(&self) -> Shape {
        match *self {
            SynthShape::Disk { cx, cy, radius, .. } => Shape::Disk { cx, cy, radius },
            SynthShape::Rectangle { x0, y0, x1, y1, .. } => Shape::Rectangle { x0, y0, x1, y1 },
        }
    }

    pub fn intensity(&self) -> f64 {
        match *self {
            SynthShape::Disk { intensity, .. } | SynthShape::Rectangle { intensity, .. } => intensity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasKind {
    #[default]
    None,
    /// `amplitude * 2 (x / W - 1/2)`: dark on the left, bright on the right.
    Linear,
    /// `amplitude * (1 - r / r_max)` around the image center.
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bias {
    pub kind: BiasKind,
    #[serde(default)]
    pub amplitude: f64,
}

impl Bias {
    /// Additive offset at pixel `(x, y)`, evaluated at the pixel center.
    pub fn at(&self, x: usize, y: usize, width: usize, height: usize) -> f64 {
        let (w, h) = (width as f64, height as f64);
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        match self.kind {
            BiasKind::None => 0.0,
            BiasKind::Linear => self.amplitude * 2.0 * (px / w - 0.5),
            BiasKind::Radial => {
                let r_max = 0.5 * w.hypot(h);
                let r = (px - 0.5 * w).hypot(py - 0.5 * h);
                self.amplitude * (1.0 - r / r_max)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub shapes: Vec<SynthShape>,
    pub background_intensity: f64,
    #[serde(default)]
    pub bias: Bias,
    /// Applied after the bias. Its own `seed` is ignored in favour of [`SynthSpec::seed`].
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: SynthSpec = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("synth specs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < MIN_DIM || self.height < MIN_DIM {
            return Err(Error::TooSmall { width: self.width, height: self.height });
        }
        if self.width.checked_mul(self.height).is_none_or(|n| n > crate::pnm::MAX_PIXELS) {
            return Err(Error::param("width", "image is too large"));
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.background_intensity) {
            return Err(Error::param(
                "background_intensity",
                format!("must lie in [0, 1], got {}", self.background_intensity),
            ));
        }
        for (i, s) in self.shapes.iter().enumerate() {
            if !unit(s.intensity()) {
                return Err(Error::param("intensity", format!("shape {i}: must lie in [0, 1], got {}", s.intensity())));
            }
            if !s.shape().is_finite() {
                return Err(Error::param("shapes", format!("shape {i}: non-finite geometry")));
            }
        }
        if !(self.bias.amplitude.is_finite() && self.bias.amplitude.abs() <= 1.0) {
            return Err(Error::param("amplitude", format!("must lie in [-1, 1], got {}", self.bias.amplitude)));
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        Ok(())
    }

    /// Same scene with noise attached.
    pub fn with_noise(&self, noise: NoiseSpec) -> SynthSpec {
        SynthSpec { noise: Some(noise), ..self.clone() }
    }
}

pub fn generate(spec: &SynthSpec) -> Result<(ScalarField, SegMask)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut values = vec![spec.background_intensity; w * h];
    let mut truth = vec![false; w * h];
    for s in &spec.shapes {
        let shape = s.shape();
        let (x0, y0, x1, y1) = shape.bounds();
        let xr = x0.floor().max(0.0) as usize..(x1.ceil().max(0.0) as usize).min(w);
        let yr = y0.floor().max(0.0) as usize..(y1.ceil().max(0.0) as usize).min(h);
        for y in yr {
            for x in xr.clone() {
                if shape.contains(x, y) {
                    values[y * w + x] = s.intensity();
                    truth[y * w + x] = true;
                }
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            let v = &mut values[y * w + x];
            *v = (*v + spec.bias.at(x, y, w, h)).clamp(0.0, 1.0);
        }
    }
    let mut image = ScalarField::new(w, h, values)?;
    if let Some(noise) = spec.noise {
        image = add_noise(&image, &NoiseSpec { seed: spec.seed, ..noise })?;
    }
    Ok((image, SegMask::new(w, h, truth)?))
}

/// Named benchmark scenes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// One disk, object 0.75 on background 0.25, linear bias 0.15.
    SingleBias,
    /// Three objects of different brightness under a radial bias.
    Multi3Bias,
    /// The single-bias scene under Gaussian noise of variance 0.01 to 0.04.
    NoiseSweep,
    /// The single-bias scene under Gaussian, salt-and-pepper, Poisson and speckle noise.
    NoiseTypes,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::SingleBias, Suite::Multi3Bias, Suite::NoiseSweep, Suite::NoiseTypes];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SingleBias => "single-bias",
            Suite::Multi3Bias => "multi3-bias",
            Suite::NoiseSweep => "noise-sweep",
            Suite::NoiseTypes => "noise-types",
        }
    }

    /// `(case name, scene)` pairs; case `i` uses seed `seed + i`.
    pub fn cases(self, seed: u64) -> Vec<(String, SynthSpec)> {
        let seeded = |i: u64, spec: SynthSpec| SynthSpec { seed: seed.wrapping_add(i), ..spec };
        match self {
            Suite::SingleBias => vec![("single-bias".to_string(), seeded(0, single_bias_scene()))],
            Suite::Multi3Bias => vec![("multi3-bias".to_string(), seeded(0, multi3_bias_scene()))],
            Suite::NoiseSweep => [0.01, 0.02, 0.03, 0.04]
                .iter()
                .enumerate()
                .map(|(i, &var)| {
                    let spec = single_bias_scene().with_noise(NoiseSpec::gaussian(0.0, var, 0));
                    (format!("gaussian-{var:.2}"), seeded(i as u64, spec))
                })
                .collect(),
            Suite::NoiseTypes => [
                ("gaussian", NoiseSpec::gaussian(0.0, 0.01, 0)),
                ("salt_pepper", NoiseSpec::salt_pepper(0.01, 0)),
                ("poisson", NoiseSpec::poisson(0)),
                ("speckle", NoiseSpec::speckle(0.01, 0)),
            ]
            .into_iter()
            .enumerate()
            .map(|(i, (name, noise))| (name.to_string(), seeded(i as u64, single_bias_scene().with_noise(noise))))
            .collect(),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s.trim())
            .ok_or_else(|| {
                Error::param(
                    "suite",
                    format!("unknown suite `{s}` (expected single-bias, multi3-bias, noise-sweep or noise-types)"),
                )
            })
    }
}

pub const SCENE_SIZE: usize = 128;

pub fn single_bias_scene() -> SynthSpec {
    SynthSpec {
        width: SCENE_SIZE,
        height: SCENE_SIZE,
        shapes: vec![SynthShape::Disk { cx: 58.0, cy: 62.0, radius: 34.0, intensity: 0.75 }],
        background_intensity: 0.25,
        bias: Bias { kind: BiasKind::Linear, amplitude: 0.15 },
        noise: None,
        seed: 0,
    }
}

pub fn multi3_bias_scene() -> SynthSpec {
    SynthSpec {
        width: SCENE_SIZE,
        height: SCENE_SIZE,
        shapes: vec![
            SynthShape::Disk { cx: 40.0, cy: 42.0, radius: 18.0, intensity: 0.80 },
            SynthShape::Disk { cx: 88.0, cy: 46.0, radius: 16.0, intensity: 0.70 },
            SynthShape::Rectangle { x0: 30.0, y0: 78.0, x1: 98.0, y1: 104.0, intensity: 0.60 },
        ],
        background_intensity: 0.20,
        bias: Bias { kind: BiasKind::Radial, amplitude: 0.15 },
        noise: None,
        seed: 0,
    }
}
