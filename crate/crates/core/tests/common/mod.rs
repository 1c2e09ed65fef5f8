//! Slow, direct reference implementations shared by the integration tests.
#![allow(dead_code)]

use hzspf::ScalarField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(rng: &mut ChaCha8Rng, w: usize, h: usize, lo: f64, hi: f64) -> ScalarField {
    ScalarField::from_fn(w, h, |_, _| rng.random_range(lo..hi)).unwrap()
}

/// Random level set with both phases present.
pub fn random_phi(rng: &mut ChaCha8Rng, w: usize, h: usize) -> ScalarField {
    loop {
        let phi = random_field(rng, w, h, -3.0, 3.0);
        let inside = phi.values().iter().filter(|&&v| v >= 0.0).count();
        if inside > 0 && inside < w * h {
            return phi;
        }
    }
}

pub fn heaviside(phi: f64, eps: f64) -> f64 {
    0.5 * (1.0 + (2.0 / std::f64::consts::PI) * (phi / eps).atan())
}

/// Unnormalized Gaussian weights `exp(-d^2 / (2 sigma^2))` over `[-r, r]`,
/// then divided by their sum.
pub fn gauss_taps(sigma: f64, r: usize) -> Vec<f64> {
    let raw: Vec<f64> = (-(r as i64)..=r as i64)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn at(f: &ScalarField, x: i64, y: i64) -> f64 {
    let (w, h) = (f.width() as i64, f.height() as i64);
    f.get(x.clamp(0, w - 1) as usize, y.clamp(0, h - 1) as usize)
}

/// `sum_{dx,dy} k(dx) k(dy) f(x+dx, y+dy)` with replicate padding.
pub fn conv2d(f: &ScalarField, taps: &[f64]) -> ScalarField {
    let r = (taps.len() / 2) as i64;
    ScalarField::from_fn(f.width(), f.height(), |x, y| {
        let mut acc = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                acc += taps[(dx + r) as usize] * taps[(dy + r) as usize] * at(f, x as i64 + dx, y as i64 + dy);
            }
        }
        acc
    })
    .unwrap()
}

/// Crisp `(c1, c2, m)` by sorting.
pub fn region_stats(image: &ScalarField, phi: &ScalarField) -> (f64, f64, f64) {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (&i, &p) in image.values().iter().zip(phi.values()) {
        if p >= 0.0 {
            inside.push(i);
        } else {
            outside.push(i);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    inside.sort_by(f64::total_cmp);
    let n = inside.len();
    let m = if n % 2 == 1 { inside[n / 2] } else { 0.5 * (inside[n / 2 - 1] + inside[n / 2]) };
    (mean(&inside), mean(&outside), m)
}

pub struct Local {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    /// Unweighted window energies.
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    /// `2 (f1 - f2) sum_y k(x - y) (I(y) - (f1 + f2) / 2)`.
    pub factored: Vec<f64>,
}

/// Window sums evaluated pixel by pixel.
pub fn local(image: &ScalarField, phi: &ScalarField, taps: &[f64], eps: f64) -> Local {
    let (w, h) = image.dims();
    let r = (taps.len() / 2) as i64;
    let mut out = Local { f1: vec![], f2: vec![], e1: vec![], e2: vec![], u1: vec![], u2: vec![], factored: vec![] };
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let window = || {
                (-r..=r).flat_map(move |dy| (-r..=r).map(move |dx| (dx, dy))).map(move |(dx, dy)| {
                    let k = taps[(dx + r) as usize] * taps[(dy + r) as usize];
                    let i = at(image, x + dx, y + dy);
                    let hv = heaviside(at(phi, x + dx, y + dy), eps);
                    (k, i, hv)
                })
            };
            let (mut n1, mut d1, mut n2, mut d2) = (0.0, 0.0, 0.0, 0.0);
            for (k, i, hv) in window() {
                n1 += k * hv * i;
                d1 += k * hv;
                n2 += k * (1.0 - hv) * i;
                d2 += k * (1.0 - hv);
            }
            let f1 = n1 / d1.max(1e-12);
            let f2 = n2 / d2.max(1e-12);
            let (mut e1, mut e2, mut u1, mut u2, mut fac) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (k, i, hv) in window() {
                e1 += k * (i - f1).powi(2) * hv;
                e2 += k * (i - f2).powi(2) * (1.0 - hv);
                u1 += k * (i - f1).powi(2);
                u2 += k * (i - f2).powi(2);
                fac += k * (i - 0.5 * (f1 + f2));
            }
            out.f1.push(f1);
            out.f2.push(f2);
            out.e1.push(e1);
            out.e2.push(e2);
            out.u1.push(u1);
            out.u2.push(u2);
            out.factored.push(2.0 * (f1 - f2) * fac);
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
