//! The doubling map with left hole `[a, 1]`: boundary orbit, Hofbauer
//! determinant and its leading zero.
//!
//! The orbit is `a_0 = a`, `a_{k+1} = T(min(a, a_k)⁻)` with the left limit
//! `T(x⁻) = 2x` for `x ≤ 1/2` and `2x − 1` above. The determinant is
//! `d(z) = 1 − Σ_{k∈A} z^{k+1}` over `A = {k : a_k ≥ 1/2}` and its smallest
//! zero `r` in `(0, 1)` gives the entropy `−log r`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{Mode, Scalar};

pub const DEFAULT_K: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Termination {
    /// No classification within `k` steps (always the case in float mode).
    Capped { k: usize },
    /// `a_{n+1} = a_j` with `1 ≤ j ≤ n`.
    PrePeriodic { n: usize, j: usize },
    /// `a_n > a`, so `a_{n+1} = T(a⁻) = a_1`.
    Escape { n: usize },
    /// `a_n = 1/2` exactly; the orbit stops there and `A ⊆ {0, …, n}`.
    Terminal { n: usize },
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Capped { k } => write!(f, "Capped({k})"),
            Termination::PrePeriodic { n, j } => write!(f, "PrePeriodic({n},{j})"),
            Termination::Escape { n } => write!(f, "Escape({n})"),
            Termination::Terminal { n } => write!(f, "Terminal({n})"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerOrbit {
    pub a: Scalar,
    /// `a_0, a_1, …`; for finite orbits this ends at the repeated value.
    pub points: Vec<Scalar>,
    pub termination: Termination,
    /// Indices `k` of recorded points with `a_k ≥ 1/2`.
    pub index_set_a: Vec<usize>,
    /// Float-mode orbits are not classified and carry rounding.
    pub approximate: bool,
}

impl TowerOrbit {
    /// `(N, j)` of the eventually periodic coefficient sequence, if any.
    fn period_data(&self) -> Option<(usize, usize)> {
        match self.termination {
            Termination::PrePeriodic { n, j } => Some((n, j)),
            Termination::Escape { n } => Some((n, 1)),
            _ => None,
        }
    }
}

fn left_limit(x: &Scalar, half: &Scalar, one: &Scalar) -> Scalar {
    let two_x = x + x;
    if x.le(half) {
        two_x
    } else {
        &two_x - one
    }
}

/// Iterate the boundary recurrence for `1/2 < a < 1`.
pub fn build_orbit(a: &Scalar, k_cap: usize) -> Result<TowerOrbit> {
    let mode = a.mode();
    let half = Scalar::ratio_in(mode, 1, 2);
    let one = Scalar::int_in(mode, 1);
    if !(a.gt(&half) && a.lt(&one)) {
        return Err(Error::InvalidParameter(format!("left-hole parameter a = {a} must lie in (1/2, 1)")));
    }
    if k_cap < 2 {
        return Err(Error::InvalidParameter(format!("orbit cap {k_cap} must be at least 2")));
    }
    let mut points = vec![a.clone()];
    let mut seen: HashMap<BigRational, usize> = HashMap::new();
    let mut termination = Termination::Capped { k: k_cap };
    for k in 1..=k_cap {
        let prev = &points[k - 1];
        let arg = if prev.lt(a) { prev.clone() } else { a.clone() };
        let x = left_limit(&arg, &half, &one);
        if let Mode::Float { eps } = mode {
            if (x.to_f64() - 0.5).abs() < eps {
                return Err(Error::Ambiguity(format!("a_{k} = {} is within {eps:e} of 1/2", x.to_f64())));
            }
            points.push(x);
            continue;
        }
        let q = x.as_rational().expect("exact").clone();
        if let Some(&j) = seen.get(&q) {
            points.push(x);
            termination = Termination::PrePeriodic { n: k - 1, j };
            break;
        }
        let stop = if x == half {
            Some(Termination::Terminal { n: k })
        } else if x == *a {
            Some(Termination::PrePeriodic { n: k, j: 1 })
        } else if x.gt(a) {
            Some(Termination::Escape { n: k })
        } else {
            None
        };
        seen.insert(q, k);
        points.push(x);
        if let Some(t) = stop {
            termination = t;
            if !matches!(t, Termination::Terminal { .. }) {
                points.push(points[1].clone());
            }
            break;
        }
    }
    let last = match termination {
        Termination::Capped { k } => k,
        Termination::PrePeriodic { n, .. } | Termination::Escape { n } | Termination::Terminal { n } => n,
    };
    let index_set_a = (0..=last).filter(|&k| points[k].ge(&half)).collect();
    Ok(TowerOrbit { a: a.clone(), points, termination, index_set_a, approximate: !mode.is_exact() })
}

/// Eventually periodic closed form: `d(z) = numerator(z) / (1 − z^L)` with
/// `L = N − j + 1`, or a polynomial when `period` is `None`.
#[derive(Clone, Debug, Serialize)]
pub struct ClosedForm {
    pub n: usize,
    pub j: usize,
    pub period: Option<usize>,
    /// `M̃_{k,0}` for `k < j + L` (then periodic with period `L`), or the
    /// finite coefficient list.
    pub tilde: Vec<u8>,
    pub numerator: Poly,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeterminantSeries {
    /// `m_k = [k ∈ A]` for `k = 0..=K`.
    pub coefficients: Vec<u8>,
    pub k: usize,
    pub closed_form: Option<ClosedForm>,
    /// Whether coefficients beyond `K` are unknown (capped orbit).
    pub truncated: bool,
}

impl DeterminantSeries {
    /// `d(x)` for `0 ≤ x < 1`: closed form when available, else the
    /// truncated series.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.closed_form {
            Some(cf) => cf.eval(x),
            None => 1.0 - horner_tail(&self.coefficients, x),
        }
    }

    /// `d'(x)`.
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.closed_form {
            Some(cf) => cf.derivative(x),
            None => -horner_tail_derivative(&self.coefficients, x),
        }
    }

    /// Upper bound on the omitted tail `Σ_{k>K} m_k x^{k+1}`.
    pub fn tail_bound(&self, x: f64) -> f64 {
        if self.truncated {
            x.powi(self.k as i32 + 2) / (1.0 - x)
        } else {
            0.0
        }
    }
}

/// `Σ c_k x^{k+1}`.
fn horner_tail(c: &[u8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &m| acc * x + f64::from(m)) * x
}

/// `d/dx Σ c_k x^{k+1}`.
fn horner_tail_derivative(c: &[u8], x: f64) -> f64 {
    c.iter().enumerate().rev().fold(0.0, |acc, (k, &m)| acc * x + (k + 1) as f64 * f64::from(m))
}

impl ClosedForm {
    fn parts(&self, x: f64) -> (f64, f64, f64, f64) {
        let pre = &self.tilde[..self.j.min(self.tilde.len())];
        let per = &self.tilde[self.j.min(self.tilde.len())..];
        let shift = x.powi(self.j as i32);
        let p = horner_tail(pre, x);
        let dp = horner_tail_derivative(pre, x);
        let s = shift * horner_tail(per, x);
        let ds =
            self.j as f64 * x.powi(self.j as i32 - 1) * horner_tail(per, x) + shift * horner_tail_derivative(per, x);
        (p, dp, s, ds)
    }

    fn eval(&self, x: f64) -> f64 {
        let (p, _, s, _) = self.parts(x);
        match self.period {
            Some(l) => 1.0 - p - s / (1.0 - x.powi(l as i32)),
            None => 1.0 - p - s,
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        let (_, dp, s, ds) = self.parts(x);
        match self.period {
            Some(l) => {
                let g = 1.0 - x.powi(l as i32);
                let dg = -(l as f64) * x.powi(l as i32 - 1);
                -dp - (ds * g - s * dg) / (g * g)
            }
            None => -dp - ds,
        }
    }

    /// Coefficient `M̃_{k,0}` of the expanded series.
    pub fn coefficient(&self, k: usize) -> u8 {
        match self.period {
            Some(l) if k >= self.j => self.tilde[self.j + (k - self.j) % l],
            _ => self.tilde.get(k).copied().unwrap_or(0),
        }
    }
}

/// Coefficients `m_0..=m_K` and, for finite orbits, the closed form.
pub fn determinant(orbit: &TowerOrbit, k: usize) -> Result<DeterminantSeries> {
    let m: Vec<u8> = {
        let mut v = vec![0u8; orbit.points.len()];
        for &i in &orbit.index_set_a {
            v[i] = 1;
        }
        v
    };
    let closed_form = match (orbit.termination, orbit.period_data()) {
        (_, Some((n, j))) => {
            let l = n - j + 1;
            let tilde = m[..=n].to_vec();
            Some(ClosedForm { n, j, period: Some(l), numerator: periodic_numerator(&tilde, j, l), tilde })
        }
        (Termination::Terminal { n }, None) => {
            let tilde = m[..=n].to_vec();
            Some(ClosedForm { n, j: n + 1, period: None, numerator: polynomial_numerator(&tilde), tilde })
        }
        _ => None,
    };
    let coefficients = match &closed_form {
        Some(cf) => (0..=k).map(|i| cf.coefficient(i)).collect(),
        None => {
            let available = orbit.points.len() - 1;
            if k > available {
                return Err(Error::Truncation { requested: k, available });
            }
            m[..=k].to_vec()
        }
    };
    Ok(DeterminantSeries { coefficients, k, truncated: closed_form.is_none(), closed_form })
}

fn monomial(k: usize, c: i64) -> Poly {
    let mut v = vec![BigInt::from(0); k + 1];
    v[k] = BigInt::from(c);
    Poly::new(v)
}

/// `1 − Σ m_k z^{k+1}`.
fn polynomial_numerator(m: &[u8]) -> Poly {
    m.iter().enumerate().filter(|(_, &c)| c == 1).fold(Poly::one(), |acc, (k, _)| acc.sub(&monomial(k + 1, 1)))
}

/// `(1 − z^L)(1 − Σ_{k<j} m_k z^{k+1}) − Σ_{k=j}^{N} m_k z^{k+1}`.
fn periodic_numerator(m: &[u8], j: usize, l: usize) -> Poly {
    let pre = polynomial_numerator(&m[..j]);
    let factor = Poly::one().sub(&monomial(l, 1));
    m.iter()
        .enumerate()
        .skip(j)
        .filter(|(_, &c)| c == 1)
        .fold(factor.mul(&pre), |acc, (k, _)| acc.sub(&monomial(k + 1, 1)))
}

#[derive(Clone, Debug, Serialize)]
pub struct RootResult {
    pub r: f64,
    /// `|d(r)|` at the returned root.
    pub residual: f64,
    pub entropy: f64,
    /// Bound on `|entropy − log(1/r_true)|` from bisection width and, for
    /// truncated series, the omitted tail.
    pub error_bound: f64,
}

fn bisect<F: Fn(f64) -> f64>(f: F, tol: f64) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // f(0) = 1 > 0; find a point with f ≤ 0 below 1.
    let mut probe = 1.0 - tol;
    if f(probe) > 0.0 {
        return None;
    }
    hi = hi.min(probe);
    probe = 0.5;
    if f(probe) > 0.0 {
        lo = probe;
    } else {
        hi = probe;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo, hi))
}

/// Smallest zero of `d` in `(0, 1)` by bisection on the decreasing function.
pub fn leading_root(series: &DeterminantSeries, tol: f64) -> Result<RootResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let (lo, hi) = bisect(|x| series.eval(x), tol).ok_or(Error::NoRoot)?;
    let r = 0.5 * (lo + hi);
    let mut error_bound = (hi - lo) / lo.max(f64::MIN_POSITIVE);
    if series.truncated {
        // The full series lies between d_K − tail and d_K, so its root lies
        // between the root of d_K − tail and r.
        let shifted = bisect(|x| series.eval(x) - series.tail_bound(x), tol).map_or(0.0, |(l, _)| l);
        if shifted > 0.0 {
            error_bound += (r / shifted).ln();
        } else {
            error_bound = f64::INFINITY;
        }
    }
    Ok(RootResult { r, residual: series.eval(r).abs(), entropy: -r.ln(), error_bound })
}

#[derive(Clone, Debug, Serialize)]
pub struct LeftHoleEntropy {
    pub a: Scalar,
    pub entropy: f64,
    pub r: f64,
    pub p: usize,
    pub termination: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub error_bound: f64,
    #[serde(skip)]
    pub residual: f64,
}

/// Entropy of the doubling map with hole `[a, 1]`. The leading eigenvalue is
/// simple for this family, so `p = 1`.
pub fn entropy_left_hole(a: &Scalar, k: usize, tol: f64) -> Result<LeftHoleEntropy> {
    let orbit = build_orbit(a, k.max(2))?;
    let series = determinant(&orbit, k)?;
    let root = leading_root(&series, tol)?;
    Ok(LeftHoleEntropy {
        a: a.clone(),
        entropy: root.entropy,
        r: root.r,
        p: 1,
        termination: orbit.termination.to_string(),
        k,
        error_bound: root.error_bound,
        residual: root.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn log_gamma() -> f64 {
        ((1.0 + 5f64.sqrt()) / 2.0).ln()
    }

    #[test]
    fn orbit_three_quarters() {
        let o = build_orbit(&q(3, 4), 100).unwrap();
        assert_eq!(o.points, vec![q(3, 4), q(1, 2)]);
        assert_eq!(o.termination, Termination::Terminal { n: 1 });
        assert_eq!(o.index_set_a, vec![0, 1]);
        let d = determinant(&o, 50).unwrap();
        assert_eq!(d.closed_form.as_ref().unwrap().numerator, Poly::from_i64(&[1, -1, -1]));
        let r = leading_root(&d, 1e-14).unwrap();
        assert!((r.r - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-14);
        assert!((r.entropy - log_gamma()).abs() < 1e-13);
    }

    #[test]
    fn orbit_two_thirds() {
        let o = build_orbit(&q(2, 3), 100).unwrap();
        assert_eq!(o.points, vec![q(2, 3), q(1, 3), q(2, 3), q(1, 3)]);
        assert_eq!(o.termination, Termination::PrePeriodic { n: 2, j: 1 });
        assert_eq!(o.index_set_a, vec![0, 2]);
        let d = determinant(&o, 20).unwrap();
        let cf = d.closed_form.as_ref().unwrap();
        assert_eq!(cf.period, Some(2));
        // (1 − z²)(1 − z) − z³ = 1 − z − z² + z³ − z³
        assert_eq!(cf.numerator, Poly::from_i64(&[1, -1, -1]));
        let expected: Vec<u8> = (0..=20).map(|k| u8::from(k % 2 == 0)).collect();
        assert_eq!(d.coefficients, expected);
        let r = leading_root(&d, 1e-14).unwrap();
        assert!((r.entropy - log_gamma()).abs() < 1e-12);
    }

    #[test]
    fn escape_three_fifths() {
        let o = build_orbit(&q(3, 5), 100).unwrap();
        assert_eq!(o.termination, Termination::Escape { n: 3 });
        assert_eq!(o.points[..4], [q(3, 5), q(1, 5), q(2, 5), q(4, 5)]);
        let d = determinant(&o, 30).unwrap();
        assert_eq!(d.closed_form.unwrap().numerator, Poly::from_i64(&[1, -1, 0, -1]));
    }

    #[test]
    fn tribonacci_at_seven_eighths() {
        let o = build_orbit(&q(7, 8), 100).unwrap();
        assert_eq!(o.termination, Termination::Terminal { n: 2 });
        let d = determinant(&o, 10).unwrap();
        assert_eq!(d.closed_form.unwrap().numerator, Poly::from_i64(&[1, -1, -1, -1]));
    }

    #[test]
    fn closed_form_expands_to_coefficients() {
        for (n, den) in [(2, 3), (3, 5), (5, 7), (7, 9), (9, 11), (17, 23), (200, 201)] {
            let o = build_orbit(&q(n, den), 1000).unwrap();
            let d = determinant(&o, 400).unwrap();
            let cf = d.closed_form.as_ref().unwrap();
            // numerator / (1 − z^L) as a power series must reproduce 1 − Σ m_k z^{k+1}.
            let l = cf.period.unwrap_or(usize::MAX);
            let num = cf.numerator.coeffs();
            let mut series = vec![BigInt::from(0); 402];
            for (i, s) in series.iter_mut().enumerate() {
                let mut k = i;
                loop {
                    if let Some(c) = num.get(k) {
                        *s += c;
                    }
                    if l == usize::MAX || k < l {
                        break;
                    }
                    k -= l;
                }
            }
            assert_eq!(series[0], BigInt::from(1));
            for k in 0..=400 {
                assert_eq!(series[k + 1], BigInt::from(-i64::from(d.coefficients[k])), "a={n}/{den} k={k}");
            }
        }
    }

    #[test]
    fn truncation_error() {
        let o = build_orbit(&Scalar::float(0.55, 1e-12), 200).unwrap();
        assert_eq!(o.termination, Termination::Capped { k: 200 });
        assert!(o.approximate);
        assert!(matches!(determinant(&o, 201), Err(Error::Truncation { requested: 201, available: 200 })));
        let d = determinant(&o, 200).unwrap();
        assert!(d.truncated);
    }

    #[test]
    fn float_cap_and_ambiguity() {
        let o = build_orbit(&Scalar::float(0.51, 1e-12), 200).unwrap();
        assert_eq!(o.points.len(), 201);
        assert!(!o.index_set_a.is_empty());
        assert!(matches!(build_orbit(&Scalar::float(0.75, 1e-12), 50), Err(Error::Ambiguity(_))));
        let r = entropy_left_hole(&Scalar::float(0.55, 1e-12), DEFAULT_K, DEFAULT_TOL).unwrap();
        assert!(r.entropy > 0.0 && r.entropy < 2f64.ln());
        assert!(r.error_bound.is_finite());
    }

    #[test]
    fn parameter_checks() {
        assert!(build_orbit(&q(1, 2), 10).is_err());
        assert!(build_orbit(&q(1, 1), 10).is_err());
        assert!(build_orbit(&q(3, 4), 1).is_err());
        let one_minus_z = DeterminantSeries {
            coefficients: vec![1],
            k: 0,
            closed_form: Some(ClosedForm {
                n: 0,
                j: 1,
                period: None,
                tilde: vec![1],
                numerator: Poly::from_i64(&[1, -1]),
            }),
            truncated: false,
        };
        assert!(matches!(leading_root(&one_minus_z, 1e-14), Err(Error::NoRoot)));
    }

    #[test]
    fn near_one_approaches_log_two() {
        let a = Scalar::from_rational(BigRational::new(BigInt::from((1 << 20) - 1), BigInt::from(1 << 20)));
        let r = entropy_left_hole(&a, DEFAULT_K, DEFAULT_TOL).unwrap();
        assert!((r.entropy - 2f64.ln()).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn simple_root_and_monotone(n1 in 513u32..1023, n2 in 513u32..1023) {
            let (lo, hi) = (n1.min(n2), n1.max(n2));
            let a1 = q(i64::from(lo), 1024);
            let a2 = q(i64::from(hi), 1024);
            let e1 = entropy_left_hole(&a1, DEFAULT_K, DEFAULT_TOL).unwrap();
            let e2 = entropy_left_hole(&a2, DEFAULT_K, DEFAULT_TOL).unwrap();
            prop_assert!(e1.entropy <= e2.entropy + 1e-10);
            let o = build_orbit(&a1, DEFAULT_K).unwrap();
            let d = determinant(&o, DEFAULT_K).unwrap();
            let r = leading_root(&d, DEFAULT_TOL).unwrap();
            prop_assert!(d.derivative(r.r) < 0.0);
        }

        #[test]
        fn truncation_is_stable(num in 1u32..1000, den in 1001u32..4000) {
            let a = Scalar::from_rational(BigRational::new(
                BigInt::from(den + num), BigInt::from(2 * den)));
            let one = entropy_left_hole(&a, 512, DEFAULT_TOL).unwrap();
            let two = entropy_left_hole(&a, 1024, DEFAULT_TOL).unwrap();
            prop_assert!((one.entropy - two.entropy).abs() <= one.error_bound + 1e-12);
        }
    }
}
