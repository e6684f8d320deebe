use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::wrap_360;
use crate::measurements::Scale;

/// Relative tolerance of interval tests, so values computed from
/// translated or rescaled coordinates cannot flip a verdict by rounding.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

fn tol(bound: f64) -> f64 {
    MEMBERSHIP_TOLERANCE * bound.abs().max(1.0)
}

/// Closed range of one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Interval {
    Linear { lo: f64, hi: f64 },
    /// Arc of the circle from `start` counter-clockwise by `width` degrees,
    /// `0 <= width < 360`.
    Circular { start: f64, width: f64 },
    /// Allowed connection quarters as bits `1 << q`, `q` in 0..=4.
    Quarters { mask: u8 },
    /// No constraint (a measurement too spread out to be informative).
    Any,
}

#[derive(Debug, Error, PartialEq)]
pub enum IntervalError {
    #[error("no samples")]
    Empty,
    #[error("circular samples spread over {0:.3} degrees (at least 180)")]
    SpreadTooWide(f64),
    #[error("non-finite sample")]
    NonFinite,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        match *self {
            Interval::Linear { lo, hi } => v >= lo - tol(lo) && v <= hi + tol(hi),
            Interval::Circular { start, width } => {
                let d = wrap_360(v - start);
                d <= width + tol(360.0) || d >= 360.0 - tol(360.0)
            }
            Interval::Quarters { mask } => {
                let q = v.round();
                (0.0..=4.0).contains(&q) && mask & (1 << q as u8) != 0
            }
            Interval::Any => true,
        }
    }

    /// Smallest interval of the given scale holding every sample.
    pub fn fit(scale: Scale, samples: &[f64]) -> Result<Interval, IntervalError> {
        if samples.is_empty() {
            return Err(IntervalError::Empty);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(IntervalError::NonFinite);
        }
        Ok(match scale {
            Scale::Linear => Interval::Linear {
                lo: samples.iter().copied().fold(f64::INFINITY, f64::min),
                hi: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            },
            Scale::Circular => {
                let mut s: Vec<f64> = samples.iter().map(|&v| wrap_360(v)).collect();
                s.sort_by(f64::total_cmp);
                // the covering arc is the complement of the largest gap
                let n = s.len();
                let (gap_at, gap) = (0..n)
                    .map(|i| {
                        let next = if i + 1 < n { s[i + 1] } else { s[0] + 360.0 };
                        (i, next - s[i])
                    })
                    .fold((0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
                let width = (360.0 - gap).max(0.0);
                if width >= 180.0 {
                    return Err(IntervalError::SpreadTooWide(width));
                }
                Interval::Circular {
                    start: s[(gap_at + 1) % n],
                    width,
                }
            }
            Scale::Quarter => Interval::Quarters {
                mask: samples.iter().fold(0u8, |m, &v| m | 1 << (v.round().clamp(0.0, 4.0) as u8)),
            },
        })
    }

    /// Widens by `below` and `above` (same units as the measurement).
    /// Circular widening stops short of the full circle; quarter sets and
    /// `Any` are unchanged.
    pub fn widened(&self, below: f64, above: f64) -> Interval {
        match *self {
            Interval::Linear { lo, hi } => Interval::Linear {
                lo: lo - below,
                hi: hi + above,
            },
            Interval::Circular { start, width } => {
                let grown = (width + below + above).min(359.0);
                let below = below * (grown - width) / (below + above).max(f64::MIN_POSITIVE);
                Interval::Circular {
                    start: wrap_360(start - below),
                    width: grown,
                }
            }
            other => other,
        }
    }

    /// Width in measurement units (`None` for quarter sets and `Any`).
    pub fn span(&self) -> Option<f64> {
        match *self {
            Interval::Linear { lo, hi } => Some(hi - lo),
            Interval::Circular { width, .. } => Some(width),
            _ => None,
        }
    }

    /// Midpoint (`None` for quarter sets and `Any`).
    pub fn center(&self) -> Option<f64> {
        match *self {
            Interval::Linear { lo, hi } => Some(0.5 * (lo + hi)),
            Interval::Circular { start, width } => Some(wrap_360(start + 0.5 * width)),
            _ => None,
        }
    }

    /// True if every value of `self` is in `other`.
    pub fn within(&self, other: &Interval) -> bool {
        match (*self, *other) {
            (_, Interval::Any) => true,
            (Interval::Linear { lo, hi }, Interval::Linear { .. }) => other.contains(lo) && other.contains(hi),
            (Interval::Circular { start, width }, Interval::Circular { start: s2, width: w2 }) => {
                let d = wrap_360(start - s2);
                d + width <= w2 + tol(360.0) || (width == 0.0 && other.contains(start))
            }
            (Interval::Quarters { mask }, Interval::Quarters { mask: m2 }) => mask & !m2 == 0,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_slack_fit_is_min_max() {
        let i = Interval::fit(Scale::Linear, &[170.0, 180.0, 190.0]).unwrap();
        assert_eq!(i, Interval::Linear { lo: 170.0, hi: 190.0 });
        assert_eq!(i.widened(10.0, 10.0), Interval::Linear { lo: 160.0, hi: 200.0 });
    }

    #[test]
    fn symmetric_slack_on_single_example() {
        let i = Interval::fit(Scale::Linear, &[180.0]).unwrap().widened(70.0, 70.0);
        assert!(i.contains(120.0) && i.contains(240.0));
        let narrow = Interval::fit(Scale::Linear, &[180.0]).unwrap().widened(50.0, 50.0);
        assert!(!narrow.contains(120.0) && !narrow.contains(240.0));
        assert!(narrow.contains(130.0) && narrow.contains(230.0));
    }

    #[test]
    fn circular_fit_wraps_zero() {
        let i = Interval::fit(Scale::Circular, &[350.0, 10.0, 5.0]).unwrap();
        assert_eq!(i, Interval::Circular { start: 350.0, width: 20.0 });
        assert!(i.contains(0.0) && i.contains(359.0) && i.contains(10.0));
        assert!(!i.contains(11.0) && !i.contains(349.0));
        assert!(i.contains(-5.0));
    }

    #[test]
    fn circular_spread_limit() {
        assert_eq!(
            Interval::fit(Scale::Circular, &[0.0, 90.0, 180.0]),
            Err(IntervalError::SpreadTooWide(180.0))
        );
        assert!(Interval::fit(Scale::Circular, &[0.0, 179.0]).is_ok());
    }

    #[test]
    fn circular_widening_is_asymmetric() {
        let i = Interval::fit(Scale::Circular, &[10.0, 30.0]).unwrap().widened(5.0, 15.0);
        assert_eq!(i, Interval::Circular { start: 5.0, width: 40.0 });
    }

    #[test]
    fn quarter_sets() {
        let i = Interval::fit(Scale::Quarter, &[1.0, 3.0]).unwrap();
        assert!(i.contains(1.0) && i.contains(3.0) && !i.contains(2.0) && !i.contains(0.0));
    }

    #[test]
    fn boundary_tolerance() {
        let i = Interval::Linear { lo: 0.5, hi: 2.0 };
        assert!(i.contains(2.0 + 1e-12));
        assert!(!i.contains(2.0 + 1e-6));
    }

    #[test]
    fn interval_json() {
        let s = serde_json::to_string(&Interval::Circular { start: 350.0, width: 20.0 }).unwrap();
        assert_eq!(s, r#"{"type":"circular","start":350.0,"width":20.0}"#);
    }
}
