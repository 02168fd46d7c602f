//! Piecewise monotonic interval maps.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hole::Hole;
use crate::scalar::{Mode, Scalar};

/// The open interval `(lo, hi)` with `lo < hi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalOpen {
    lo: Scalar,
    hi: Scalar,
}

impl IntervalOpen {
    pub fn new(lo: Scalar, hi: Scalar) -> Result<IntervalOpen> {
        match lo.compare(&hi)? {
            Ordering::Less => Ok(IntervalOpen { lo, hi }),
            _ => Err(Error::InvalidParameter(format!("empty interval ({lo}, {hi})"))),
        }
    }

    pub fn lo(&self) -> &Scalar {
        &self.lo
    }

    pub fn hi(&self) -> &Scalar {
        &self.hi
    }

    pub fn mode(&self) -> Mode {
        self.lo.mode()
    }

    pub fn length(&self) -> Scalar {
        &self.hi - &self.lo
    }

    /// Whether `x` lies in the closure `[lo, hi]`.
    pub fn closure_contains(&self, x: &Scalar) -> bool {
        self.lo.le(x) && x.le(&self.hi)
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        self.lo.lt(x) && x.lt(&self.hi)
    }
}

/// A linear fractional map `x ↦ (p·x + q) / (r·x + s)`. Affine maps are the
/// case `r = 0, s = 1`; compositions of branches stay in this family.
#[derive(Clone, Debug, Serialize)]
pub struct Moebius {
    pub p: Scalar,
    pub q: Scalar,
    pub r: Scalar,
    pub s: Scalar,
}

impl Moebius {
    pub fn identity(mode: Mode) -> Moebius {
        Moebius {
            p: Scalar::int_in(mode, 1),
            q: Scalar::int_in(mode, 0),
            r: Scalar::int_in(mode, 0),
            s: Scalar::int_in(mode, 1),
        }
    }

    pub fn affine(slope: Scalar, offset: Scalar) -> Moebius {
        let mode = slope.mode();
        Moebius { p: slope, q: offset, r: Scalar::int_in(mode, 0), s: Scalar::int_in(mode, 1) }
    }

    pub fn det(&self) -> Scalar {
        &(&self.p * &self.s) - &(&self.q * &self.r)
    }

    fn is_affine(&self) -> bool {
        self.r.is_exact_zero()
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        if self.is_affine() {
            return &(&(&self.p * x) + &self.q) / &self.s;
        }
        let num = &(&self.p * x) + &self.q;
        let den = &(&self.r * x) + &self.s;
        &num / &den
    }

    pub fn derivative(&self, x: &Scalar) -> Scalar {
        if self.is_affine() {
            return &self.p / &self.s;
        }
        let den = &(&self.r * x) + &self.s;
        &self.det() / &(&den * &den)
    }

    pub fn inverse_eval(&self, y: &Scalar) -> Scalar {
        if self.is_affine() {
            return &(&(&self.s * y) - &self.q) / &self.p;
        }
        let num = &(&self.s * y) - &self.q;
        let den = &self.p - &(&self.r * y);
        &num / &den
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Moebius) -> Moebius {
        if self.is_affine() && inner.is_affine() {
            return Moebius {
                p: &self.p * &inner.p,
                q: &(&self.p * &inner.q) + &(&self.q * &inner.s),
                r: self.r.clone(),
                s: &self.s * &inner.s,
            };
        }
        Moebius {
            p: &(&self.p * &inner.p) + &(&self.q * &inner.r),
            q: &(&self.p * &inner.q) + &(&self.q * &inner.s),
            r: &(&self.r * &inner.p) + &(&self.s * &inner.r),
            s: &(&self.r * &inner.q) + &(&self.s * &inner.s),
        }
    }

    /// The pole `-s/r`, if any.
    pub fn pole(&self) -> Option<Scalar> {
        if self.r.is_zero() {
            None
        } else {
            Some(-(&self.s / &self.r))
        }
    }

    fn proportional_to(&self, other: &Moebius) -> bool {
        let a = [&self.p, &self.q, &self.r, &self.s];
        let b = [&other.p, &other.q, &other.r, &other.s];
        if a[0].mode().join(b[0].mode()).is_err() {
            return false;
        }
        (0..4).all(|i| (i + 1..4).all(|j| (a[i] * b[j]).approx_eq(&(a[j] * b[i]))))
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BranchKind {
    Affine { slope: Scalar, offset: Scalar },
    Moebius { p: Scalar, q: Scalar, r: Scalar, s: Scalar },
}

impl BranchKind {
    pub fn to_moebius(&self) -> Moebius {
        match self {
            BranchKind::Affine { slope, offset } => Moebius::affine(slope.clone(), offset.clone()),
            BranchKind::Moebius { p, q, r, s } => Moebius { p: p.clone(), q: q.clone(), r: r.clone(), s: s.clone() },
        }
    }

    pub fn coeffs(&self) -> Vec<Scalar> {
        match self {
            BranchKind::Affine { slope, offset } => vec![slope.clone(), offset.clone()],
            BranchKind::Moebius { p, q, r, s } => vec![p.clone(), q.clone(), r.clone(), s.clone()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

/// One monotone piece of the map, extended continuously to the closure of
/// its domain.
#[derive(Clone, Debug, Serialize)]
pub struct Branch {
    domain: IntervalOpen,
    kind: BranchKind,
    orientation: Orientation,
    #[serde(skip)]
    mobius: Moebius,
    #[serde(skip)]
    image: (Scalar, Scalar),
}

impl Branch {
    pub fn new(domain: IntervalOpen, kind: BranchKind) -> Result<Branch> {
        let mode = domain.mode();
        for c in kind.coeffs() {
            mode.join(c.mode())?;
        }
        let mobius = kind.to_moebius();
        let det = mobius.det();
        let orientation = match det.signum() {
            1 => Orientation::Increasing,
            -1 => Orientation::Decreasing,
            _ => {
                return Err(Error::InvalidParameter(match kind {
                    BranchKind::Affine { .. } => "affine branch with zero slope".into(),
                    BranchKind::Moebius { .. } => "degenerate Möbius branch (ps - qr = 0)".into(),
                }))
            }
        };
        if let Some(pole) = mobius.pole() {
            if domain.closure_contains(&pole) {
                return Err(Error::InvalidParameter(format!(
                    "Möbius pole {pole} lies in the closure of ({}, {})",
                    domain.lo, domain.hi
                )));
            }
        }
        let a = mobius.eval(&domain.lo);
        let b = mobius.eval(&domain.hi);
        let image = match orientation {
            Orientation::Increasing => (a, b),
            Orientation::Decreasing => (b, a),
        };
        Ok(Branch { domain, kind, orientation, mobius, image })
    }

    pub fn domain(&self) -> &IntervalOpen {
        &self.domain
    }

    pub fn kind(&self) -> &BranchKind {
        &self.kind
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn mobius(&self) -> &Moebius {
        &self.mobius
    }

    /// Value of the continuous extension at `x` in the closure of the domain.
    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.mobius.eval(x)
    }

    pub fn inverse(&self, y: &Scalar) -> Scalar {
        self.mobius.inverse_eval(y)
    }

    pub fn derivative(&self, x: &Scalar) -> Scalar {
        self.mobius.derivative(x)
    }

    /// Closure of the image as `(min, max)`.
    pub fn image(&self) -> &(Scalar, Scalar) {
        &self.image
    }
}

impl PartialEq for Branch {
    fn eq(&self, other: &Branch) -> bool {
        self.domain == other.domain && self.mobius.proportional_to(&other.mobius)
    }
}

/// A piecewise monotonic C¹ map of the interval `codomain` with finitely many
/// branches over disjoint open subintervals, listed left to right.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseMap {
    codomain: IntervalOpen,
    branches: Vec<Branch>,
}

impl PiecewiseMap {
    pub fn new(codomain: IntervalOpen, branches: Vec<Branch>) -> Result<PiecewiseMap> {
        if branches.is_empty() {
            return Err(Error::InvalidParameter("map needs at least one branch".into()));
        }
        let mode = codomain.mode();
        for b in &branches {
            mode.join(b.domain.mode())?;
        }
        for (i, b) in branches.iter().enumerate() {
            if !codomain.closure_contains(&b.domain.lo) || !codomain.closure_contains(&b.domain.hi) {
                return Err(Error::InvalidParameter(format!("branch {i} domain leaves the interval")));
            }
            let (lo, hi) = b.image();
            if !codomain.closure_contains(lo) || !codomain.closure_contains(hi) {
                return Err(Error::InvalidParameter(format!("branch {i} image [{lo}, {hi}] leaves the interval")));
            }
        }
        for (i, w) in branches.windows(2).enumerate() {
            if w[1].domain.lo.lt(&w[0].domain.hi) {
                return Err(Error::InvalidParameter(format!(
                    "branch domains {i} and {} overlap or are out of order",
                    i + 1
                )));
            }
        }
        Ok(PiecewiseMap { codomain, branches })
    }

    pub fn codomain(&self) -> &IntervalOpen {
        &self.codomain
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn mode(&self) -> Mode {
        self.codomain.mode()
    }

    /// Check that `hole` shares the map's mode and lies in the closed interval.
    pub fn check_hole(&self, hole: &Hole) -> Result<()> {
        if let Some(m) = hole.mode() {
            self.mode().join(m)?;
        }
        for (lo, hi) in hole.pieces() {
            if !self.codomain.closure_contains(lo) || !self.codomain.closure_contains(hi) {
                return Err(Error::InvalidParameter(format!("hole piece [{lo}, {hi}] leaves the interval")));
            }
        }
        Ok(())
    }

    /// Level-1 survivor pieces: positive-length components of each branch
    /// domain with the hole removed.
    pub fn restrict_partition(&self, hole: &Hole) -> Result<Vec<IntervalOpen>> {
        self.check_hole(hole)?;
        let mut out = Vec::new();
        for b in &self.branches {
            for (lo, hi) in hole.subtract(&b.domain.lo, &b.domain.hi) {
                out.push(IntervalOpen { lo, hi });
            }
        }
        Ok(out)
    }

    /// Whether this is the doubling map `2x mod 1` on `(0, 1)` in exact mode.
    pub fn is_doubling(&self) -> bool {
        self.mode().is_exact() && build_d_adic(2).map(|d| &d == self).unwrap_or(false)
    }
}

/// `x ↦ d·x mod 1` on `(0, 1)`.
pub fn build_d_adic(d: u32) -> Result<PiecewiseMap> {
    build_d_adic_in(d, Mode::Exact)
}

/// [`build_d_adic`] with coefficients in the given mode.
pub fn build_d_adic_in(d: u32, mode: Mode) -> Result<PiecewiseMap> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d-adic map needs d >= 2, got {d}")));
    }
    let d = i64::from(d);
    let branches = (0..d)
        .map(|k| {
            let domain = IntervalOpen::new(Scalar::ratio_in(mode, k, d), Scalar::ratio_in(mode, k + 1, d))?;
            Branch::new(domain, BranchKind::Affine { slope: Scalar::int_in(mode, d), offset: Scalar::int_in(mode, -k) })
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewiseMap::new(IntervalOpen::new(Scalar::int_in(mode, 0), Scalar::int_in(mode, 1))?, branches)
}

/// The scaled Farey map: `a·x/(1−x)` on `(0, 1/2)` and `a·(1−x)/x` on `(1/2, 1)`.
pub fn build_scaled_farey(a: Scalar) -> Result<PiecewiseMap> {
    let mode = a.mode();
    let zero = Scalar::int_in(mode, 0);
    let one = Scalar::int_in(mode, 1);
    if !(a.gt(&zero) && a.le(&one)) {
        return Err(Error::InvalidParameter(format!("Farey parameter must lie in (0, 1], got {a}")));
    }
    let half = Scalar::ratio_in(mode, 1, 2);
    let left = Branch::new(
        IntervalOpen::new(zero.clone(), half.clone())?,
        BranchKind::Moebius { p: a.clone(), q: zero.clone(), r: -&one, s: one.clone() },
    )?;
    let right = Branch::new(
        IntervalOpen::new(half, one.clone())?,
        BranchKind::Moebius { p: -&a, q: a.clone(), r: one.clone(), s: zero.clone() },
    )?;
    PiecewiseMap::new(IntervalOpen::new(zero, one)?, vec![left, right])
}
