//! Holes: finite unions of closed intervals, and the symmetric-difference
//! pseudometric between them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};

/// A normalized hole. Pieces are sorted, closed, pairwise disjoint and not
/// touching; degenerate pieces `[x, x]` are kept.
#[derive(Clone, Debug, PartialEq, Serialize, Default)]
pub struct Hole {
    pieces: Vec<(Scalar, Scalar)>,
}

impl Hole {
    pub fn empty() -> Hole {
        Hole { pieces: Vec::new() }
    }

    pub fn new(pieces: Vec<(Scalar, Scalar)>) -> Result<Hole> {
        let mut mode: Option<Mode> = None;
        for (lo, hi) in &pieces {
            let m = lo.mode().join(hi.mode())?;
            mode = Some(match mode {
                Some(prev) => prev.join(m)?,
                None => m,
            });
            if lo.gt(hi) {
                return Err(Error::InvalidParameter(format!("hole piece [{lo}, {hi}] has lo > hi")));
            }
        }
        Ok(Hole { pieces }.normalized())
    }

    /// A single closed interval.
    pub fn interval(lo: Scalar, hi: Scalar) -> Result<Hole> {
        Hole::new(vec![(lo, hi)])
    }

    fn normalized(mut self) -> Hole {
        self.pieces.sort_by(|a, b| a.0.cmp_same(&b.0).then(a.1.cmp_same(&b.1)));
        let mut merged: Vec<(Scalar, Scalar)> = Vec::with_capacity(self.pieces.len());
        for (lo, hi) in self.pieces {
            match merged.last_mut() {
                Some(last) if lo.le(&last.1) => {
                    if hi.gt(&last.1) {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        Hole { pieces: merged }
    }

    /// Re-normalize (identity on an already normalized hole).
    pub fn normalize(&self) -> Hole {
        self.clone().normalized()
    }

    pub fn pieces(&self) -> &[(Scalar, Scalar)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// `None` for the empty hole, which is compatible with every mode.
    pub fn mode(&self) -> Option<Mode> {
        self.pieces.first().map(|(lo, _)| lo.mode())
    }

    pub fn measure(&self, mode: Mode) -> Scalar {
        self.pieces.iter().fold(Scalar::int_in(mode, 0), |acc, (lo, hi)| &acc + &(hi - lo))
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        self.pieces.iter().any(|(lo, hi)| lo.le(x) && x.le(hi))
    }

    /// Whether the open interval `(lo, hi)` lies inside the hole.
    pub fn covers(&self, lo: &Scalar, hi: &Scalar) -> bool {
        self.pieces.iter().any(|(a, b)| a.le(lo) && hi.le(b))
    }

    /// Positive-length components of the open interval `(lo, hi)` with the
    /// hole removed, left to right.
    pub fn subtract(&self, lo: &Scalar, hi: &Scalar) -> Vec<(Scalar, Scalar)> {
        let mut out = Vec::new();
        let mut cur = lo.clone();
        for (a, b) in &self.pieces {
            if b.le(&cur) {
                continue;
            }
            if a.ge(hi) {
                break;
            }
            if a.gt(&cur) {
                out.push((cur.clone(), a.clone()));
            }
            cur = b.clone();
            if cur.ge(hi) {
                return out;
            }
        }
        if cur.lt(hi) {
            out.push((cur, hi.clone()));
        }
        out
    }

    fn intersection_measure(&self, other: &Hole, mode: Mode) -> Scalar {
        let mut total = Scalar::int_in(mode, 0);
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a0, a1) = &self.pieces[i];
            let (b0, b1) = &other.pieces[j];
            let lo = a0.max_of(b0);
            let hi = a1.min_of(b1);
            if lo.lt(&hi) {
                total = &total + &(&hi - &lo);
            }
            if a1.lt(b1) {
                i += 1;
            } else {
                j += 1;
            }
        }
        total
    }
}

/// Lebesgue measure of the symmetric difference of two holes.
pub fn hole_dist(h1: &Hole, h2: &Hole) -> Result<Scalar> {
    let mode = match (h1.mode(), h2.mode()) {
        (Some(a), Some(b)) => a.join(b)?,
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => Mode::Exact,
    };
    let both = h1.intersection_measure(h2, mode);
    let sum = &h1.measure(mode) + &h2.measure(mode);
    Ok(&sum - &(&both + &both))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn hole(p: &[(i64, i64, i64, i64)]) -> Hole {
        Hole::new(p.iter().map(|&(a, b, c, d)| (q(a, b), q(c, d))).collect()).unwrap()
    }

    #[test]
    fn dist_examples() {
        let a = hole(&[(1, 5, 2, 5)]);
        let b = hole(&[(3, 10, 1, 2)]);
        assert_eq!(hole_dist(&a, &b).unwrap(), q(1, 5));
        assert_eq!(hole_dist(&a, &a).unwrap(), q(0, 1));
        let c = hole(&[(0, 1, 1, 4)]);
        let d = hole(&[(1, 2, 3, 4)]);
        assert_eq!(hole_dist(&c, &d).unwrap(), q(1, 2));
    }

    #[test]
    fn dist_float() {
        let e = 1e-12;
        let a = Hole::interval(Scalar::float(0.2, e), Scalar::float(0.4, e)).unwrap();
        let b = Hole::interval(Scalar::float(0.3, e), Scalar::float(0.5, e)).unwrap();
        assert!((hole_dist(&a, &b).unwrap().to_f64() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn dist_mode_mismatch() {
        let a = hole(&[(0, 1, 1, 2)]);
        let b = Hole::interval(Scalar::float(0.3, 1e-12), Scalar::float(0.5, 1e-12)).unwrap();
        assert!(matches!(hole_dist(&a, &b), Err(Error::ModeMismatch(_))));
    }

    #[test]
    fn normalization_merges_touching() {
        let h = hole(&[(1, 2, 3, 4), (0, 1, 1, 4), (1, 4, 1, 3), (3, 4, 5, 6)]);
        assert_eq!(h.pieces(), &[(q(0, 1), q(1, 3)), (q(1, 2), q(5, 6))]);
    }

    #[test]
    fn degenerate_piece_kept() {
        let h = hole(&[(1, 2, 1, 2)]);
        assert_eq!(h.pieces().len(), 1);
        assert_eq!(h.measure(Mode::Exact), q(0, 1));
        let parts = h.subtract(&q(0, 1), &q(1, 1));
        assert_eq!(parts, vec![(q(0, 1), q(1, 2)), (q(1, 2), q(1, 1))]);
    }

    #[test]
    fn subtract_cases() {
        let h = hole(&[(3, 4, 5, 6)]);
        assert_eq!(h.subtract(&q(1, 2), &q(1, 1)), vec![(q(1, 2), q(3, 4)), (q(5, 6), q(1, 1))]);
        assert_eq!(h.subtract(&q(0, 1), &q(1, 2)), vec![(q(0, 1), q(1, 2))]);
        assert!(h.subtract(&q(3, 4), &q(4, 5)).is_empty());
        assert!(h.covers(&q(3, 4), &q(4, 5)));
    }

    fn arb_hole() -> impl Strategy<Value = Hole> {
        prop::collection::vec((0i64..=64, 0i64..=16), 0..4)
            .prop_map(|v| Hole::new(v.into_iter().map(|(a, w)| (q(a, 64), q((a + w).min(64), 64))).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn pseudometric(a in arb_hole(), b in arb_hole(), c in arb_hole()) {
            let ab = hole_dist(&a, &b).unwrap();
            prop_assert_eq!(&ab, &hole_dist(&b, &a).unwrap());
            prop_assert!(ab.signum() >= 0);
            prop_assert!(hole_dist(&a, &a).unwrap().is_zero());
            let ac = hole_dist(&a, &c).unwrap();
            let cb = hole_dist(&c, &b).unwrap();
            prop_assert!(ab.le(&(&ac + &cb)));
        }

        #[test]
        fn normalize_idempotent(a in arb_hole()) {
            prop_assert_eq!(a.normalize(), a.normalize().normalize());
        }
    }
}
