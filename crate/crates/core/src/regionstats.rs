//! Region statistics: the smoothed Heaviside/Dirac pair, global region means
//! and inside median, Gaussian kernels, and the Gaussian-windowed local fits
//! and energies that drive the local pressure term.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Floor for local-fit denominators. `H` lies strictly in `(0, 1)`, so the
/// weighted sums are positive; the floor only matters after underflow.
pub const DENOM_FLOOR: f64 = 1e-12;

/// Arctangent-regularized Heaviside step and its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothStep {
    epsilon: f64,
}

impl SmoothStep {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::param("epsilon", format!("must be > 0, got {epsilon}")));
        }
        Ok(SmoothStep { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `0.5 * (1 + (2/pi) * atan(phi / eps))`
    #[inline]
    pub fn heaviside(&self, phi: f64) -> f64 {
        0.5 * (1.0 + (2.0 / PI) * (phi / self.epsilon).atan())
    }

    /// `(1/pi) * eps / (eps^2 + phi^2)`, the exact derivative of [`Self::heaviside`].
    #[inline]
    pub fn dirac(&self, phi: f64) -> f64 {
        (1.0 / PI) * self.epsilon / (self.epsilon * self.epsilon + phi * phi)
    }
}

pub fn heaviside(phi: f64, epsilon: f64) -> Result<f64> {
    Ok(SmoothStep::new(epsilon)?.heaviside(phi))
}

pub fn dirac(phi: f64, epsilon: f64) -> Result<f64> {
    Ok(SmoothStep::new(epsilon)?.dirac(phi))
}

/// Crisp global statistics of the two phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    /// Mean intensity where `phi >= 0`.
    pub c1: f64,
    /// Mean intensity where `phi < 0`.
    pub c2: f64,
    /// Median intensity where `phi >= 0`.
    pub m: f64,
    /// No pixel had `phi >= 0`; `c1` and `m` hold the global mean.
    pub inside_empty: bool,
    /// No pixel had `phi < 0`; `c2` holds the global mean.
    pub outside_empty: bool,
}

impl RegionStats {
    pub fn is_degenerate(&self) -> bool {
        self.inside_empty || self.outside_empty
    }

    /// Name of the empty side, if any.
    pub fn empty_side(&self) -> Option<&'static str> {
        if self.inside_empty {
            Some("inside")
        } else if self.outside_empty {
            Some("outside")
        } else {
            None
        }
    }
}

pub fn region_stats(image: &ScalarField, phi: &ScalarField) -> Result<RegionStats> {
    image.ensure_same_dims(phi)?;
    let mut inside = Vec::with_capacity(image.len());
    let (mut sum_out, mut n_out) = (0.0, 0usize);
    for (&i, &p) in image.values().iter().zip(phi.values()) {
        if p >= 0.0 {
            inside.push(i);
        } else {
            sum_out += i;
            n_out += 1;
        }
    }
    let global = image.mean();
    let inside_empty = inside.is_empty();
    let outside_empty = n_out == 0;
    let (c1, m) = if inside_empty {
        (global, global)
    } else {
        let c1 = inside.iter().sum::<f64>() / inside.len() as f64;
        (c1, median(&mut inside))
    };
    let c2 = if outside_empty { global } else { sum_out / n_out as f64 };
    Ok(RegionStats {
        c1,
        c2,
        m,
        inside_empty,
        outside_empty,
    })
}

/// Median of a non-empty slice; even counts average the two middle values.
/// Reorders `values`.
fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (lower, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_max + upper)
    }
}

/// Normalized, symmetric 1-D Gaussian taps applied separably along both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    sigma: f64,
    radius: usize,
    taps: Vec<f64>,
}

impl GaussianKernel {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Weight of the 2-D kernel at offset `(dx, dy)`, or 0 outside the support.
    pub fn weight_2d(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        if dx.abs() > r || dy.abs() > r {
            return 0.0;
        }
        self.taps[(dx + r) as usize] * self.taps[(dy + r) as usize]
    }
}

/// Truncation radius used when only sigma is given: `round(3 sigma)`, at least 1.
pub fn default_radius(sigma: f64) -> usize {
    ((3.0 * sigma).round() as usize).max(1)
}

pub fn make_kernel(sigma: f64, radius: usize) -> Result<GaussianKernel> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param("sigma", format!("must be > 0, got {sigma}")));
    }
    if radius == 0 {
        return Err(Error::param("radius", "must be >= 1"));
    }
    let r = radius as isize;
    let mut taps: Vec<f64> = (-r..=r)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= total;
    }
    // Pairwise averaging makes the taps bit-exactly symmetric.
    for i in 0..radius {
        let j = 2 * radius - i;
        let avg = 0.5 * (taps[i] + taps[j]);
        taps[i] = avg;
        taps[j] = avg;
    }
    Ok(GaussianKernel { sigma, radius, taps })
}

/// Separable convolution (rows, then columns) with replicate padding.
///
/// Each output pixel sums its taps in a fixed order, so results do not depend
/// on how rows are scheduled.
pub fn convolve(field: &ScalarField, kernel: &GaussianKernel) -> ScalarField {
    let (w, h) = field.dims();
    let r = kernel.radius as isize;
    let taps = kernel.taps();
    let src = field.values();

    let mut horizontal = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let out = &mut horizontal[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let xx = (x as isize + k as isize - r).clamp(0, w as isize - 1) as usize;
                acc += t * row[xx];
            }
            *o = acc;
        }
    }

    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for (k, &t) in taps.iter().enumerate() {
            let yy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
            let src_row = &horizontal[yy * w..(yy + 1) * w];
            let dst_row = &mut out[y * w..(y + 1) * w];
            for (d, &s) in dst_row.iter_mut().zip(src_row) {
                *d += t * s;
            }
        }
    }
    ScalarField::from_parts_unchecked(w, h, out)
}

/// Local inside/outside fitting means.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    pub f1: ScalarField,
    pub f2: ScalarField,
}

/// Local fits together with the pointwise local energies.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFields {
    pub f1: ScalarField,
    pub f2: ScalarField,
    pub e1: ScalarField,
    pub e2: ScalarField,
}

/// Windowed moments `conv(M), conv(M I), conv(M I^2)` for one phase weight `M`.
struct Moments {
    mass: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl Moments {
    fn new(image: &ScalarField, weight: &ScalarField, kernel: &GaussianKernel, with_second: bool) -> Moments {
        let (w, h) = image.dims();
        let weighted = |f: &dyn Fn(f64, f64) -> f64| {
            let vals = image.values().iter().zip(weight.values()).map(|(&i, &m)| f(i, m)).collect();
            convolve(&ScalarField::from_parts_unchecked(w, h, vals), kernel).into_values()
        };
        Moments {
            mass: convolve(weight, kernel).into_values(),
            first: weighted(&|i, m| m * i),
            second: if with_second { weighted(&|i, m| m * i * i) } else { Vec::new() },
        }
    }

    fn fit(&self) -> Vec<f64> {
        self.first
            .iter()
            .zip(&self.mass)
            .map(|(&b, &c)| b / c.max(DENOM_FLOOR))
            .collect()
    }

    /// `A - 2 f B + f^2 C`, clamped at zero.
    fn energy(&self, fit: &[f64]) -> Vec<f64> {
        self.second
            .iter()
            .zip(&self.first)
            .zip(&self.mass)
            .zip(fit)
            .map(|(((&a, &b), &c), &f)| (a - 2.0 * f * b + f * f * c).max(0.0))
            .collect()
    }
}

fn phase_weights(phi: &ScalarField, epsilon: f64) -> Result<(ScalarField, ScalarField)> {
    let step = SmoothStep::new(epsilon)?;
    let inside = phi.map(|p| step.heaviside(p));
    let outside = inside.map(|hv| 1.0 - hv);
    Ok((inside, outside))
}

pub fn local_fit(image: &ScalarField, phi: &ScalarField, kernel: &GaussianKernel, epsilon: f64) -> Result<LocalFit> {
    image.ensure_same_dims(phi)?;
    let (hin, hout) = phase_weights(phi, epsilon)?;
    let (w, h) = image.dims();
    let f1 = Moments::new(image, &hin, kernel, false).fit();
    let f2 = Moments::new(image, &hout, kernel, false).fit();
    Ok(LocalFit {
        f1: ScalarField::from_parts_unchecked(w, h, f1),
        f2: ScalarField::from_parts_unchecked(w, h, f2),
    })
}

/// Pointwise energies `e_i(x) = sum_y k(x - y) (I(y) - f_i(x))^2 M_i(phi(y))`
/// for previously computed fits.
pub fn local_energies(
    image: &ScalarField,
    phi: &ScalarField,
    fit: &LocalFit,
    kernel: &GaussianKernel,
    epsilon: f64,
) -> Result<LocalFields> {
    image.ensure_same_dims(phi)?;
    image.ensure_same_dims(&fit.f1)?;
    image.ensure_same_dims(&fit.f2)?;
    let (hin, hout) = phase_weights(phi, epsilon)?;
    let (w, h) = image.dims();
    let e1 = Moments::new(image, &hin, kernel, true).energy(fit.f1.values());
    let e2 = Moments::new(image, &hout, kernel, true).energy(fit.f2.values());
    Ok(LocalFields {
        f1: fit.f1.clone(),
        f2: fit.f2.clone(),
        e1: ScalarField::from_parts_unchecked(w, h, e1),
        e2: ScalarField::from_parts_unchecked(w, h, e2),
    })
}

/// Fits and energies in one pass, sharing the windowed moments.
pub fn local_fields(image: &ScalarField, phi: &ScalarField, kernel: &GaussianKernel, epsilon: f64) -> Result<LocalFields> {
    image.ensure_same_dims(phi)?;
    let (hin, hout) = phase_weights(phi, epsilon)?;
    let (w, h) = image.dims();
    let inside = Moments::new(image, &hin, kernel, true);
    let outside = Moments::new(image, &hout, kernel, true);
    let f1 = inside.fit();
    let f2 = outside.fit();
    let e1 = inside.energy(&f1);
    let e2 = outside.energy(&f2);
    let field = |v| ScalarField::from_parts_unchecked(w, h, v);
    Ok(LocalFields {
        f1: field(f1),
        f2: field(f2),
        e1: field(e1),
        e2: field(e2),
    })
}

/// Factored energy gap `2 (f1 - f2) sum_y k(x - y) (I(y) - (f1 + f2)/2)`.
///
/// This equals `e2 - e1` exactly when the energies are taken over the whole
/// window without phase weights. With the phase-weighted energies of
/// [`local_energies`] the two differ in general.
pub fn energy_gap_factored(image: &ScalarField, fit: &LocalFit, kernel: &GaussianKernel) -> Result<ScalarField> {
    image.ensure_same_dims(&fit.f1)?;
    image.ensure_same_dims(&fit.f2)?;
    let local_mean = convolve(image, kernel);
    let vals = local_mean
        .values()
        .iter()
        .zip(fit.f1.values())
        .zip(fit.f2.values())
        .map(|((&mu, &f1), &f2)| 2.0 * (f1 - f2) * (mu - 0.5 * (f1 + f2)))
        .collect();
    Ok(ScalarField::from_parts_unchecked(image.width(), image.height(), vals))
}
