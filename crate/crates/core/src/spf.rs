//! Signed pressure functions.
//!
//! Every SPF is a field in `[-1, 1]` whose sign says whether the contour
//! expands (positive) or shrinks (negative) at a pixel. The global, local and
//! SBGFRLS forms are normalized by their maximum absolute value; the hybrid is
//! a convex combination and is not renormalized.

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::regionstats::RegionStats;

/// Below this, a normalization denominator is treated as zero and the SPF
/// collapses to the zero field.
pub const NORM_FLOOR: f64 = 1e-12;

/// Minimum `|c1 - c2|` for the median-corrected threshold to be defined.
pub const CONTRAST_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpfKind {
    Global,
    Local,
    Hybrid,
    Sbgfrls,
}

impl SpfKind {
    pub fn name(self) -> &'static str {
        match self {
            SpfKind::Global => "global",
            SpfKind::Local => "local",
            SpfKind::Hybrid => "hybrid",
            SpfKind::Sbgfrls => "sbgfrls",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpfField {
    pub values: ScalarField,
    pub kind: SpfKind,
}

impl SpfField {
    pub fn is_zero(&self) -> bool {
        self.values.values().iter().all(|&v| v == 0.0)
    }
}

/// Divides by the max absolute value, or returns zeros when that is below [`NORM_FLOOR`].
fn normalize(numerator: ScalarField, kind: SpfKind) -> SpfField {
    let denom = numerator.max_abs();
    let values = if denom < NORM_FLOOR {
        numerator.map(|_| 0.0)
    } else {
        numerator.map(|v| (v / denom).clamp(-1.0, 1.0))
    };
    SpfField { values, kind }
}

/// SBGFRLS pressure: `I - (c1 + c2)/2`, normalized.
pub fn spf_sbgfrls(image: &ScalarField, stats: &RegionStats) -> SpfField {
    let mid = 0.5 * (stats.c1 + stats.c2);
    normalize(image.map(|i| i - mid), SpfKind::Sbgfrls)
}

/// Median-corrected global threshold `((c1 - 2m)^2 - c2^2) / (2 (c1 - c2))`.
///
/// Fails with [`Error::CollapsedContrast`] when `c1` and `c2` coincide; callers
/// fall back to `(c1 + c2) / 2`, which is the value the threshold takes when
/// `m = c1`.
pub fn global_threshold(stats: &RegionStats) -> Result<f64> {
    let RegionStats { c1, c2, m, .. } = *stats;
    let gap = c1 - c2;
    if gap.abs() <= CONTRAST_FLOOR {
        return Err(Error::CollapsedContrast(c1));
    }
    let a = c1 - 2.0 * m;
    Ok((a * a - c2 * c2) / (2.0 * gap))
}

/// Global pressure `I - threshold`, normalized.
pub fn spf_global(image: &ScalarField, stats: &RegionStats) -> SpfField {
    let threshold = global_threshold(stats).unwrap_or(0.5 * (stats.c1 + stats.c2));
    normalize(image.map(|i| i - threshold), SpfKind::Global)
}

/// Local pressure `e2 - e1`, normalized by `max |e2 - e1|`.
pub fn spf_local(e1: &ScalarField, e2: &ScalarField) -> Result<SpfField> {
    let gap = e2.zip_map(e1, |b, a| b - a)?;
    Ok(normalize(gap, SpfKind::Local))
}

/// `w * global + (1 - w) * local`.
pub fn spf_hybrid(global: &SpfField, local: &SpfField, w: f64) -> Result<SpfField> {
    if global.kind != SpfKind::Global {
        return Err(Error::SpfKindMismatch {
            expected: SpfKind::Global.name(),
            actual: global.kind.name(),
        });
    }
    if local.kind != SpfKind::Local {
        return Err(Error::SpfKindMismatch {
            expected: SpfKind::Local.name(),
            actual: local.kind.name(),
        });
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::param("w", format!("must lie in [0, 1], got {w}")));
    }
    let values = global.values.zip_map(&local.values, |g, l| w * g + (1.0 - w) * l)?;
    Ok(SpfField {
        values,
        kind: SpfKind::Hybrid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(c1: f64, c2: f64, m: f64) -> RegionStats {
        RegionStats {
            c1,
            c2,
            m,
            inside_empty: false,
            outside_empty: false,
        }
    }

    fn field(values: Vec<f64>) -> ScalarField {
        ScalarField::new(3, 3, values).unwrap()
    }

    #[test]
    fn threshold_hand_value() {
        let t = global_threshold(&stats(0.8, 0.2, 0.8)).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn threshold_collapses_when_means_coincide() {
        assert!(matches!(
            global_threshold(&stats(0.4, 0.4, 0.1)),
            Err(Error::CollapsedContrast(_))
        ));
        let img = ScalarField::filled(4, 4, 0.4).unwrap();
        assert!(spf_global(&img, &stats(0.4, 0.4, 0.1)).is_zero());
    }

    #[test]
    fn constant_image_gives_zero_sbgfrls() {
        let img = ScalarField::filled(5, 5, 0.6).unwrap();
        assert!(spf_sbgfrls(&img, &stats(0.6, 0.6, 0.6)).is_zero());
    }

    #[test]
    fn binary_image_sbgfrls_is_plus_minus_one() {
        let bits = [1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let img = field(bits.to_vec());
        let s = spf_sbgfrls(&img, &stats(1.0, 0.0, 1.0));
        for (v, b) in s.values.values().iter().zip(bits) {
            assert_eq!(*v, if b == 1.0 { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn local_normalization_arithmetic() {
        let e1 = field(vec![0.0; 9]);
        let e2 = field(vec![2.0, -1.0, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let s = spf_local(&e1, &e2).unwrap();
        assert_eq!(&s.values.values()[..5], &[1.0, -0.5, 0.0, 0.25, 0.5]);
        assert!(spf_local(&e2, &e2).unwrap().is_zero());
    }

    #[test]
    fn hybrid_endpoints_and_midpoint() {
        let g = SpfField {
            values: field(vec![1.0, -1.0, 0.5, 0.0, 0.2, -0.3, 1.0, 0.0, 0.1]),
            kind: SpfKind::Global,
        };
        let l = SpfField {
            values: field(vec![-1.0, 1.0, 0.25, 1.0, -0.2, 0.3, 0.0, 0.0, 0.9]),
            kind: SpfKind::Local,
        };
        assert_eq!(spf_hybrid(&g, &l, 1.0).unwrap().values, g.values);
        assert_eq!(spf_hybrid(&g, &l, 0.0).unwrap().values, l.values);
        let mid = spf_hybrid(&g, &l, 0.5).unwrap();
        assert_eq!(mid.kind, SpfKind::Hybrid);
        assert_eq!(mid.values.get(0, 0), 0.0);
        assert!(spf_hybrid(&g, &l, 1.5).is_err());
        assert!(spf_hybrid(&l, &g, 0.5).is_err());
    }
}
