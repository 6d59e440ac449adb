//! Extended real line with the lattice conventions used throughout the
//! library: by default `inf - inf := -inf` and `0 * (+-inf) := 0`, which keeps
//! concave expressions well defined. An alternate "hypograph" convention with
//! `inf - inf := +inf` is selectable where the dual of a convex expression is
//! needed.

use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

/// Which value `inf - inf` resolves to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Convention {
    /// `inf - inf := -inf` (default).
    #[default]
    Concave,
    /// `inf - inf := +inf`.
    Hypograph,
}

pub use ExtReal::{Finite, NegInf, PosInf};

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Finite value or +-(a large sentinel); only for display/CSV paths.
    pub fn to_f64_lossy(self) -> f64 {
        match self {
            NegInf => f64::NEG_INFINITY,
            Finite(v) => v,
            PosInf => f64::INFINITY,
        }
    }

    pub fn neg(self) -> ExtReal {
        match self {
            NegInf => PosInf,
            Finite(v) => Finite(-v),
            PosInf => NegInf,
        }
    }

    /// Addition under the given convention for `(+inf) + (-inf)`.
    pub fn add_with(self, other: ExtReal, conv: Convention) -> ExtReal {
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (PosInf, NegInf) | (NegInf, PosInf) => match conv {
                Convention::Concave => NegInf,
                Convention::Hypograph => PosInf,
            },
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
        }
    }

    pub fn add(self, other: ExtReal) -> ExtReal {
        self.add_with(other, Convention::Concave)
    }

    pub fn sub(self, other: ExtReal) -> ExtReal {
        self.add(other.neg())
    }

    /// Multiplication with `0 * (+-inf) := 0`.
    pub fn mul(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a * b),
            (Finite(a), inf) | (inf, Finite(a)) => {
                if a == 0.0 {
                    Finite(0.0)
                } else if a > 0.0 {
                    inf
                } else {
                    inf.neg()
                }
            }
            (PosInf, PosInf) | (NegInf, NegInf) => PosInf,
            _ => NegInf,
        }
    }

    /// Scale by a finite nonzero-or-zero scalar, same `0 * inf = 0` rule.
    pub fn scale(self, a: f64) -> ExtReal {
        self.mul(Finite(a))
    }

    pub fn total_cmp(&self, other: &ExtReal) -> Ordering {
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) => Ordering::Less,
            (_, NegInf) => Ordering::Greater,
            (PosInf, _) => Ordering::Greater,
            (_, PosInf) => Ordering::Less,
            (Finite(a), Finite(b)) => a.total_cmp(b),
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self.total_cmp(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// Equality up to `tol` on the finite part; infinities must match exactly.
    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (Finite(a), Finite(b)) => (a - b).abs() <= tol,
            (a, b) => a == b,
        }
    }

    /// Signed gap `self - other` for reporting: 0 when both are the same
    /// infinity, +-inf when the variants disagree.
    pub fn gap(self, other: ExtReal) -> f64 {
        match (self, other) {
            (Finite(a), Finite(b)) => a - b,
            (a, b) if a == b => 0.0,
            (a, b) => {
                if a.total_cmp(&b) == Ordering::Greater {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> ExtReal {
        if v == f64::INFINITY {
            PosInf
        } else if v == f64::NEG_INFINITY {
            NegInf
        } else {
            Finite(v)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => write!(f, "-inf"),
            Finite(v) => write!(f, "{v}"),
            PosInf => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_convention_resolves_inf_minus_inf_to_neg_inf() {
        assert_eq!(PosInf.add(NegInf), NegInf);
        assert_eq!(NegInf.add(PosInf), NegInf);
        assert_eq!(PosInf.sub(PosInf), NegInf);
    }

    #[test]
    fn hypograph_convention_resolves_to_pos_inf() {
        assert_eq!(PosInf.add_with(NegInf, Convention::Hypograph), PosInf);
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(Finite(0.0).mul(PosInf), Finite(0.0));
        assert_eq!(NegInf.mul(Finite(0.0)), Finite(0.0));
        assert_eq!(Finite(-2.0).mul(PosInf), NegInf);
    }

    #[test]
    fn ordering_is_total() {
        assert!(NegInf < Finite(-1e300));
        assert!(Finite(1e300) < PosInf);
        assert!(Finite(1.0) < Finite(2.0));
        assert_eq!(Finite(1.0).max(PosInf), PosInf);
        assert_eq!(Finite(1.0).min(NegInf), NegInf);
    }
}
