//! Level-set time stepping.
//!
//! The SPF-driven models (HZSPF and SBGFRLS) share one explicit loop:
//!
//! 1. crisp region statistics `c1, c2, m`;
//! 2. local fits and energies (HZSPF only);
//! 3. the pressure field;
//! 4. forward Euler `phi += dt * alpha * spf * |grad phi|`;
//! 5. optional binary snap and Gaussian smoothing;
//! 6. relative-change convergence test.
//!
//! The CV baseline steps its own curvature-regularized equation with
//! Heaviside-weighted means.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::grid::ScalarField;
use crate::regionstats::{self, default_radius, local_fields, make_kernel, region_stats, RegionStats, SmoothStep};
use crate::spf::{self, SpfField};

/// Floor on `|grad phi|` inside the CV curvature term.
pub const CURVATURE_GRAD_FLOOR: f64 = 1e-8;

/// Floor on `max |phi|` in the relative convergence residual.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

/// Initial contour geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitShape {
    /// Rectangle centered in the image spanning `fraction` of each dimension.
    Centered { fraction: f64 },
    Explicit(Shape),
}

impl InitShape {
    pub fn resolve(&self, width: usize, height: usize) -> Result<Shape> {
        let shape = match *self {
            InitShape::Centered { fraction } => {
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return Err(Error::param("init", format!("centered fraction must lie in (0, 1], got {fraction}")));
                }
                let (w, h) = (width as f64, height as f64);
                let (mx, my) = (0.5 * (1.0 - fraction) * w, 0.5 * (1.0 - fraction) * h);
                Shape::Rectangle { x0: mx, y0: my, x1: w - mx, y1: h - my }
            }
            InitShape::Explicit(shape) => shape,
        };
        if !shape.fits_within(width, height) {
            return Err(Error::param(
                "init",
                format!("{self} does not fit inside a {width}x{height} image"),
            ));
        }
        Ok(shape)
    }
}

impl fmt::Display for InitShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InitShape::Centered { fraction } => write!(f, "centered:{fraction}"),
            InitShape::Explicit(Shape::Rectangle { x0, y0, x1, y1 }) => write!(f, "rect:{x0},{y0},{x1},{y1}"),
            InitShape::Explicit(Shape::Disk { cx, cy, radius }) => write!(f, "circle:{cx},{cy},{radius}"),
        }
    }
}

impl FromStr for InitShape {
    type Err = Error;

    /// `centered:<fraction>`, `rect:<x0>,<y0>,<x1>,<y1>` or `circle:<cx>,<cy>,<r>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param("init", format!("cannot parse `{s}`; expected centered:F, rect:X0,Y0,X1,Y1 or circle:CX,CY,R"));
        let (kind, args) = s.trim().split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(bad());
        }
        match (kind.trim(), nums.as_slice()) {
            ("centered", &[fraction]) => Ok(InitShape::Centered { fraction }),
            ("rect", &[x0, y0, x1, y1]) => Ok(InitShape::Explicit(Shape::Rectangle { x0, y0, x1, y1 })),
            ("circle", &[cx, cy, radius]) => Ok(InitShape::Explicit(Shape::Disk { cx, cy, radius })),
            _ => Err(bad()),
        }
    }
}

impl Serialize for InitShape {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InitShape {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every solver knob. Field names double as config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Speed of the pressure-driven motion.
    pub alpha: f64,
    /// Weight of the global SPF in the hybrid; `1 - w` goes to the local SPF.
    pub w: f64,
    /// Width of the smoothed Heaviside.
    pub epsilon: f64,
    pub sigma_fit: f64,
    pub radius_fit: usize,
    /// Gaussian regularization of `phi` after each step; 0 disables it.
    pub sigma_reg: f64,
    pub dt: f64,
    /// Added under the square root of the gradient magnitude.
    pub eta: f64,
    /// Convergence threshold on the relative change of `phi`.
    pub conv_t: f64,
    pub max_iter: usize,
    /// Snap `phi` to `+-c0` before smoothing.
    pub binary_step: bool,
    pub init: InitShape,
    pub c0: f64,
    /// CV data weights and curvature weight.
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu_cv: f64,
    /// Accepted and validated, but no model uses them.
    pub mu: f64,
    pub nu: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha: 10.0,
            w: 0.5,
            epsilon: 1.0,
            sigma_fit: 3.0,
            radius_fit: 9,
            sigma_reg: 1.0,
            dt: 1.0,
            eta: 1e-8,
            conv_t: 0.01,
            max_iter: 300,
            binary_step: true,
            init: InitShape::Centered { fraction: 0.6 },
            c0: 1.0,
            lambda1: 1.0,
            lambda2: 1.0,
            mu_cv: 0.1,
            mu: 0.0,
            nu: 0.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be > 0, got {v}")))
            }
        }
        fn non_negative(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be >= 0, got {v}")))
            }
        }
        positive("alpha", self.alpha)?;
        if !(0.0..=1.0).contains(&self.w) {
            return Err(Error::param("w", format!("must lie in [0, 1], got {}", self.w)));
        }
        positive("epsilon", self.epsilon)?;
        positive("sigma_fit", self.sigma_fit)?;
        if self.radius_fit == 0 {
            return Err(Error::param("radius_fit", "must be >= 1"));
        }
        non_negative("sigma_reg", self.sigma_reg)?;
        positive("dt", self.dt)?;
        non_negative("eta", self.eta)?;
        positive("conv_t", self.conv_t)?;
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be >= 1"));
        }
        positive("c0", self.c0)?;
        non_negative("lambda1", self.lambda1)?;
        non_negative("lambda2", self.lambda2)?;
        non_negative("mu_cv", self.mu_cv)?;
        if !(self.mu.is_finite() && self.nu.is_finite()) {
            return Err(Error::param("mu", "mu and nu must be finite"));
        }
        if let InitShape::Centered { fraction } = self.init {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::param("init", format!("centered fraction must lie in (0, 1], got {fraction}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Hzspf,
    Cv,
    Sbgfrls,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Hzspf, Model::Cv, Model::Sbgfrls];

    pub fn name(self) -> &'static str {
        match self {
            Model::Hzspf => "hzspf",
            Model::Cv => "cv",
            Model::Sbgfrls => "sbgfrls",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hzspf" => Ok(Model::Hzspf),
            "cv" => Ok(Model::Cv),
            "sbgfrls" => Ok(Model::Sbgfrls),
            other => Err(Error::param("model", format!("unknown model `{other}` (expected hzspf, cv or sbgfrls)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub model: Model,
    pub iterations: usize,
    /// One convergence residual per iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub wall_time: f64,
    pub seed: Option<u64>,
    pub params: ModelParams,
}

/// Observation and injection points inside the evolution loop.
pub trait EvolutionHooks {
    /// Called with freshly computed region statistics before they are used.
    fn adjust_stats(&mut self, _iteration: usize, stats: RegionStats) -> RegionStats {
        stats
    }

    /// Called with `phi` at the end of each iteration.
    fn observe(&mut self, _iteration: usize, _phi: &ScalarField) {}
}

pub struct NoHooks;

impl EvolutionHooks for NoHooks {}

/// `+c0` inside the shape, `-c0` outside.
pub fn init_phi(width: usize, height: usize, init: &InitShape, c0: f64) -> Result<ScalarField> {
    let shape = init.resolve(width, height)?;
    ScalarField::from_fn(width, height, |x, y| if shape.contains(x, y) { c0 } else { -c0 })
}

#[inline]
fn central_diffs(phi: &ScalarField, x: usize, y: usize) -> (f64, f64) {
    let (xi, yi) = (x as isize, y as isize);
    let dx = 0.5 * (phi.get_clamped(xi + 1, yi) - phi.get_clamped(xi - 1, yi));
    let dy = 0.5 * (phi.get_clamped(xi, yi + 1) - phi.get_clamped(xi, yi - 1));
    (dx, dy)
}

/// `sqrt(dx^2 + dy^2 + eta)` with unit-spacing central differences and
/// replicate padding.
pub fn grad_mag(phi: &ScalarField, eta: f64) -> ScalarField {
    let (w, h) = phi.dims();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = central_diffs(phi, x, y);
            out.push((dx * dx + dy * dy + eta).sqrt());
        }
    }
    ScalarField::from_parts_unchecked(w, h, out)
}

/// One forward Euler step of `phi_t = alpha * spf * |grad phi|`.
pub fn step(phi: &ScalarField, spf: &SpfField, params: &ModelParams) -> Result<ScalarField> {
    phi.ensure_same_dims(&spf.values)?;
    let grad = grad_mag(phi, params.eta);
    let k = params.dt * params.alpha;
    let vals = phi
        .values()
        .iter()
        .zip(spf.values.values())
        .zip(grad.values())
        .map(|((&p, &s), &g)| p + k * s * g)
        .collect();
    Ok(ScalarField::from_parts_unchecked(phi.width(), phi.height(), vals))
}

/// Optional binary snap to `+-c0` (zero maps to `+c0`) followed by optional
/// Gaussian smoothing with radius `round(3 sigma_reg)`.
pub fn regularize(phi: &ScalarField, params: &ModelParams) -> ScalarField {
    let mut out = if params.binary_step {
        let c0 = params.c0;
        phi.map(|p| if p >= 0.0 { c0 } else { -c0 })
    } else {
        phi.clone()
    };
    if params.sigma_reg > 0.0 {
        let kernel = make_kernel(params.sigma_reg, default_radius(params.sigma_reg))
            .expect("sigma_reg validated positive");
        out = regionstats::convolve(&out, &kernel);
    }
    out
}

/// Relative change `max |new - old| / max(max |old|, floor)` and whether it is below `t`.
pub fn converged(phi_new: &ScalarField, phi_old: &ScalarField, t: f64) -> Result<(bool, f64)> {
    phi_new.ensure_same_dims(phi_old)?;
    let change = phi_new
        .values()
        .iter()
        .zip(phi_old.values())
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let residual = change / phi_old.max_abs().max(RESIDUAL_FLOOR);
    Ok((residual < t, residual))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pressure {
    Hybrid,
    Sbgfrls,
}

pub fn run_hzspf(image: &ScalarField, params: &ModelParams) -> Result<(ScalarField, RunReport)> {
    run_hzspf_with(image, params, &mut NoHooks)
}

pub fn run_hzspf_with(
    image: &ScalarField,
    params: &ModelParams,
    hooks: &mut dyn EvolutionHooks,
) -> Result<(ScalarField, RunReport)> {
    run_pressure_model(image, params, Pressure::Hybrid, hooks)
}

pub fn run_sbgfrls(image: &ScalarField, params: &ModelParams) -> Result<(ScalarField, RunReport)> {
    run_sbgfrls_with(image, params, &mut NoHooks)
}

pub fn run_sbgfrls_with(
    image: &ScalarField,
    params: &ModelParams,
    hooks: &mut dyn EvolutionHooks,
) -> Result<(ScalarField, RunReport)> {
    run_pressure_model(image, params, Pressure::Sbgfrls, hooks)
}

/// Region statistics for iteration `iteration`; an empty phase is tolerated
/// only on the initial contour.
fn checked_stats(image: &ScalarField, phi: &ScalarField, iteration: usize) -> Result<RegionStats> {
    let stats = region_stats(image, phi)?;
    if iteration > 1 {
        if let Some(side) = stats.empty_side() {
            return Err(Error::DegenerateRegion { iteration, side });
        }
    }
    Ok(stats)
}

fn run_pressure_model(
    image: &ScalarField,
    params: &ModelParams,
    pressure: Pressure,
    hooks: &mut dyn EvolutionHooks,
) -> Result<(ScalarField, RunReport)> {
    params.validate()?;
    let start = Instant::now();
    let (w, h) = image.dims();
    let mut phi = init_phi(w, h, &params.init, params.c0)?;
    let fit_kernel = match pressure {
        Pressure::Hybrid => Some(make_kernel(params.sigma_fit, params.radius_fit)?),
        Pressure::Sbgfrls => None,
    };

    let mut residuals = Vec::new();
    let mut is_converged = false;
    for iteration in 1..=params.max_iter {
        let stats = checked_stats(image, &phi, iteration)?;
        let stats = hooks.adjust_stats(iteration, stats);
        let pressure_field = match &fit_kernel {
            Some(kernel) => {
                let fields = local_fields(image, &phi, kernel, params.epsilon)?;
                let global = spf::spf_global(image, &stats);
                let local = spf::spf_local(&fields.e1, &fields.e2)?;
                spf::spf_hybrid(&global, &local, params.w)?
            }
            None => spf::spf_sbgfrls(image, &stats),
        };

        // A zero pressure field is a fixed point of the evolution.
        let next = if pressure_field.is_zero() {
            phi.clone()
        } else {
            regularize(&step(&phi, &pressure_field, params)?, params)
        };
        let (done, residual) = converged(&next, &phi, params.conv_t)?;
        residuals.push(residual);
        phi = next;
        hooks.observe(iteration, &phi);
        if done {
            is_converged = true;
            break;
        }
    }

    let model = match pressure {
        Pressure::Hybrid => Model::Hzspf,
        Pressure::Sbgfrls => Model::Sbgfrls,
    };
    Ok((
        phi,
        RunReport {
            model,
            iterations: residuals.len(),
            residuals,
            converged: is_converged,
            wall_time: start.elapsed().as_secs_f64(),
            seed: None,
            params: params.clone(),
        },
    ))
}

/// Heaviside-weighted region means `(c1, c2)`.
pub fn cv_means(image: &ScalarField, phi: &ScalarField, step: &SmoothStep) -> Result<(f64, f64)> {
    image.ensure_same_dims(phi)?;
    let (mut num_in, mut den_in, mut num_out, mut den_out) = (0.0, 0.0, 0.0, 0.0);
    for (&i, &p) in image.values().iter().zip(phi.values()) {
        let hv = step.heaviside(p);
        num_in += hv * i;
        den_in += hv;
        num_out += (1.0 - hv) * i;
        den_out += 1.0 - hv;
    }
    Ok((num_in / den_in.max(regionstats::DENOM_FLOOR), num_out / den_out.max(regionstats::DENOM_FLOOR)))
}

/// Data term of the CV flow: `-delta(phi) (l1 (I - c1)^2 - l2 (I - c2)^2)`.
pub fn cv_data_force(
    image: &ScalarField,
    phi: &ScalarField,
    (c1, c2): (f64, f64),
    params: &ModelParams,
) -> Result<ScalarField> {
    let step = SmoothStep::new(params.epsilon)?;
    let (l1, l2) = (params.lambda1, params.lambda2);
    image.zip_map(phi, |i, p| {
        -step.dirac(p) * (l1 * (i - c1) * (i - c1) - l2 * (i - c2) * (i - c2))
    })
}

/// `div(grad phi / |grad phi|)` with central differences; `|grad phi|` floored.
pub fn curvature(phi: &ScalarField) -> ScalarField {
    let (w, h) = phi.dims();
    let mut nx = Vec::with_capacity(w * h);
    let mut ny = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = central_diffs(phi, x, y);
            let norm = (dx * dx + dy * dy).sqrt().max(CURVATURE_GRAD_FLOOR);
            nx.push(dx / norm);
            ny.push(dy / norm);
        }
    }
    let nx = ScalarField::from_parts_unchecked(w, h, nx);
    let ny = ScalarField::from_parts_unchecked(w, h, ny);
    ScalarField::from_fn(w, h, |x, y| {
        let (xi, yi) = (x as isize, y as isize);
        0.5 * (nx.get_clamped(xi + 1, yi) - nx.get_clamped(xi - 1, yi))
            + 0.5 * (ny.get_clamped(xi, yi + 1) - ny.get_clamped(xi, yi - 1))
    })
    .expect("dimensions already valid")
}

pub fn run_cv(image: &ScalarField, params: &ModelParams) -> Result<(ScalarField, RunReport)> {
    run_cv_with(image, params, &mut NoHooks)
}

pub fn run_cv_with(
    image: &ScalarField,
    params: &ModelParams,
    hooks: &mut dyn EvolutionHooks,
) -> Result<(ScalarField, RunReport)> {
    params.validate()?;
    let start = Instant::now();
    let smooth = SmoothStep::new(params.epsilon)?;
    let (w, h) = image.dims();
    let mut phi = init_phi(w, h, &params.init, params.c0)?;

    let mut residuals = Vec::new();
    let mut is_converged = false;
    for iteration in 1..=params.max_iter {
        checked_stats(image, &phi, iteration)?;
        let means = cv_means(image, &phi, &smooth)?;
        let data = cv_data_force(image, &phi, means, params)?;
        let velocity = if params.mu_cv > 0.0 {
            let kappa = curvature(&phi);
            let mu = params.mu_cv;
            let vals = data
                .values()
                .iter()
                .zip(kappa.values())
                .zip(phi.values())
                .map(|((&d, &k), &p)| d + mu * smooth.dirac(p) * k)
                .collect();
            ScalarField::from_parts_unchecked(w, h, vals)
        } else {
            data
        };
        let next = phi.zip_map(&velocity, |p, v| p + params.dt * v)?;
        let (done, residual) = converged(&next, &phi, params.conv_t)?;
        residuals.push(residual);
        phi = next;
        hooks.observe(iteration, &phi);
        if done {
            is_converged = true;
            break;
        }
    }

    Ok((
        phi,
        RunReport {
            model: Model::Cv,
            iterations: residuals.len(),
            residuals,
            converged: is_converged,
            wall_time: start.elapsed().as_secs_f64(),
            seed: None,
            params: params.clone(),
        },
    ))
}

pub fn run_model(model: Model, image: &ScalarField, params: &ModelParams) -> Result<(ScalarField, RunReport)> {
    match model {
        Model::Hzspf => run_hzspf(image, params),
        Model::Cv => run_cv(image, params),
        Model::Sbgfrls => run_sbgfrls(image, params),
    }
}
