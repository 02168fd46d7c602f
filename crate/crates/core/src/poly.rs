//! Univariate polynomials with integer coefficients: exact gcd, square-free
//! decomposition, Sturm sequences and real root isolation.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::scalar::rational_to_f64;

/// Coefficients in ascending order, no trailing zeros. The zero polynomial
/// has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<BigInt>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Poly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Poly {
        Poly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::from_i64(&[1])
    }

    /// `x`.
    pub fn x() -> Poly {
        Poly::from_i64(&[0, 1])
    }

    /// `den·x − num`, whose root is `num/den`.
    pub fn linear_root(q: &BigRational) -> Poly {
        Poly::new(vec![-q.numer().clone(), q.denom().clone()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.lc().is_one()
    }

    pub fn neg(&self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = BigInt::zero();
        Poly::new((0..n).map(|i| self.coeffs.get(i).unwrap_or(&z) + other.coeffs.get(i).unwrap_or(&z)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::one(), |acc, _| acc.mul(self))
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divide out the content and make the leading coefficient positive.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut g = self.content();
        if self.lc().is_negative() {
            g = -g;
        }
        Poly { coeffs: self.coeffs.iter().map(|c| c / &g).collect() }
    }

    /// Like [`Poly::primitive`] but only ever divides by a positive number,
    /// preserving signs of values.
    fn positive_primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let g = self.content();
        Poly { coeffs: self.coeffs.iter().map(|c| c / &g).collect() }
    }

    /// Pseudo-remainder of `self` by `d`, scaled by a positive factor so that
    /// signs of values are preserved.
    pub fn pseudo_rem(&self, d: &Poly) -> Poly {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.deg();
        if self.is_zero() || self.deg() < dd {
            return self.clone();
        }
        let lc = d.lc();
        let mut r = self.coeffs.clone();
        let steps = self.deg() - dd + 1;
        for k in (dd..=self.deg()).rev() {
            let top = r[k].clone();
            for c in r.iter_mut().take(k + 1) {
                *c *= &lc;
            }
            if !top.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k - dd + j] -= &top * dc;
                }
            }
            r.truncate(k);
        }
        let out = Poly::new(r);
        if lc.is_negative() && steps % 2 == 1 {
            out.neg()
        } else {
            out
        }
    }

    /// Exact quotient, assuming `d` divides `self` over the integers.
    pub fn div_exact(&self, d: &Poly) -> Poly {
        let (q, r) = self.div_rem_int(d).expect("inexact polynomial division");
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Integer long division; `None` when a step is not exact.
    pub fn div_rem_int(&self, d: &Poly) -> Option<(Poly, Poly)> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.deg() < d.deg() || self.is_zero() {
            return Some((Poly::zero(), self.clone()));
        }
        let dd = d.deg();
        let lc = d.lc();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); self.deg() - dd + 1];
        for k in (dd..r.len()).rev() {
            if r[k].is_zero() {
                continue;
            }
            let (t, rem) = r[k].div_rem(&lc);
            if !rem.is_zero() {
                return None;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k - dd + j] -= &t * dc;
            }
            q[k - dd] = t;
        }
        Some((Poly::new(q), Poly::new(r)))
    }

    /// Primitive gcd with positive leading coefficient.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.primitive();
        let mut b = other.primitive();
        if a.deg() < b.deg() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive();
        }
        a.primitive()
    }

    /// Value at `x`.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }

    /// Sign of the value at `x`, computed without fractions.
    pub fn sign_at(&self, x: &BigRational) -> i32 {
        if self.is_zero() {
            return 0;
        }
        let (n, d) = (x.numer(), x.denom());
        let mut acc = BigInt::zero();
        let mut dpow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * n + c * &dpow;
            dpow *= d;
        }
        // acc = d^deg · p(n/d) and d > 0.
        match acc.sign() {
            num_bigint::Sign::Plus => 1,
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Square-free decomposition (Yun): `(factor, multiplicity)` pairs with
    /// primitive non-constant factors, so that `self` equals their product up
    /// to a constant.
    pub fn square_free(&self) -> Vec<(Poly, usize)> {
        let a = self.primitive();
        if a.deg() == 0 {
            return Vec::new();
        }
        let b = a.derivative();
        let c = a.gcd(&b);
        let mut w = a.div_exact(&c);
        let mut y = b.primitive_quotient(&c);
        let mut z = y.sub(&w.derivative());
        let mut out = Vec::new();
        let mut i = 1;
        while w.deg() > 0 {
            let g = w.gcd(&z);
            if g.deg() > 0 {
                out.push((g.clone(), i));
            }
            w = w.div_exact(&g);
            y = z.primitive_quotient(&g);
            z = y.sub(&w.derivative());
            i += 1;
        }
        out
    }

    /// `self / d` where `d` is primitive and divides `self` over the rationals.
    fn primitive_quotient(&self, d: &Poly) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.div_exact(d)
    }

    /// Multiplicity of `x` as a root (0 when not a root).
    pub fn root_multiplicity_rational(&self, x: &BigRational) -> usize {
        // `lin` is primitive, so when it divides over Q the quotient is integral.
        let lin = Poly::linear_root(x);
        let mut p = self.clone();
        let mut k = 0;
        while !p.is_zero() {
            match p.div_rem_int(&lin) {
                Some((q, r)) if r.is_zero() => {
                    p = q;
                    k += 1;
                }
                _ => break,
            }
        }
        k
    }

    /// Sturm sequence `p, p', -rem, ...` with sign-preserving pseudo-remainders.
    pub fn sturm(&self) -> SturmSequence {
        let mut seq = vec![self.positive_primitive(), self.derivative().positive_primitive()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].pseudo_rem(&seq[n - 1]).neg().positive_primitive();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        SturmSequence { seq }
    }

    /// Cauchy bound: every real root has absolute value below this integer.
    pub fn root_bound(&self) -> BigInt {
        let lc = self.lc().abs();
        let max = self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero);
        max.div_ceil(&lc) + BigInt::one()
    }

    /// The largest real root, isolated and refined. `None` when there is no
    /// real root.
    pub fn largest_real_root(&self) -> Option<RealAlgebraic> {
        let sf = self.square_free();
        let f = sf.iter().fold(Poly::one(), |acc, (g, _)| acc.mul(g));
        RealAlgebraic::largest_root_of_squarefree(&f)
    }

    /// Numerical roots of a square-free polynomial (Aberth iteration).
    pub fn complex_roots(&self) -> Vec<Complex64> {
        let n = self.deg();
        if n == 0 {
            return Vec::new();
        }
        let lc = self.lc().to_f64().unwrap_or(1.0);
        let monic: Vec<f64> = self.coeffs.iter().map(|c| c.to_f64().unwrap_or(0.0) / lc).collect();
        if n == 1 {
            return vec![Complex64::new(-monic[0], 0.0)];
        }
        let eval = |z: Complex64| -> (Complex64, Complex64) {
            let mut p = Complex64::new(1.0, 0.0);
            let mut dp = Complex64::new(0.0, 0.0);
            for c in monic[..n].iter().rev() {
                dp = dp * z + p;
                p = p * z + c;
            }
            (p, dp)
        };
        let radius = monic[..n].iter().map(|c| c.abs()).fold(0.0f64, f64::max) + 1.0;
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64;
                Complex64::from_polar(radius.clamp(0.5, 2.0), theta)
            })
            .collect();
        for _ in 0..500 {
            let mut max_step: f64 = 0.0;
            for i in 0..n {
                let (p, dp) = eval(z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / dp;
                let sum: Complex64 = (0..n).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
                let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
            if max_step < 1e-15 {
                break;
            }
        }
        z
    }
}

/// Ascending coefficients; integers beyond `i64` are written as strings.
impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            match c.to_i64() {
                Some(v) => seq.serialize_element(&v)?,
                None => seq.serialize_element(&c.to_string())?,
            }
        }
        seq.end()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => f.write_str("x")?,
                (1, false) => write!(f, "{mag}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{mag}x^{i}")?,
            }
        }
        Ok(())
    }
}

pub struct SturmSequence {
    seq: Vec<Poly>,
}

impl SturmSequence {
    fn variations<I: Iterator<Item = i32>>(signs: I) -> usize {
        let mut last = 0;
        let mut v = 0;
        for s in signs.filter(|&s| s != 0) {
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
        v
    }

    pub fn variations_at(&self, x: &BigRational) -> usize {
        Self::variations(self.seq.iter().map(|p| p.sign_at(x)))
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations_at(a).saturating_sub(self.variations_at(b))
    }
}

/// A real algebraic number: the unique root of a square-free integer
/// polynomial in the isolating interval `(lo, hi)`, or an exact rational.
#[derive(Clone, Debug)]
pub struct RealAlgebraic {
    pub poly: Poly,
    pub lo: BigRational,
    pub hi: BigRational,
    pub exact: Option<BigRational>,
}

fn half(a: &BigRational, b: &BigRational) -> BigRational {
    (a + b) / BigRational::from_integer(2.into())
}

impl RealAlgebraic {
    pub fn rational(q: BigRational) -> RealAlgebraic {
        RealAlgebraic { poly: Poly::linear_root(&q), lo: q.clone(), hi: q.clone(), exact: Some(q) }
    }

    /// Largest real root of a square-free polynomial.
    pub fn largest_root_of_squarefree(f: &Poly) -> Option<RealAlgebraic> {
        if f.deg() == 0 {
            return None;
        }
        let f = f.primitive();
        let sturm = f.sturm();
        let b = BigRational::from_integer(f.root_bound());
        let mut lo = -b.clone();
        let mut hi = b;
        if sturm.count(&lo, &hi) == 0 {
            return None;
        }
        while sturm.count(&lo, &hi) > 1 {
            let mid = half(&lo, &hi);
            if sturm.count(&mid, &hi) >= 1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if f.sign_at(&hi) == 0 {
            return Some(RealAlgebraic::rational(hi));
        }
        // Make sure `lo` is not itself a (smaller) root.
        while f.sign_at(&lo) == 0 {
            let mid = half(&lo, &hi);
            if sturm.count(&mid, &hi) == 1 {
                lo = mid;
            } else {
                hi = mid;
                if f.sign_at(&hi) == 0 {
                    return Some(RealAlgebraic::rational(hi));
                }
            }
        }
        let mut r = RealAlgebraic { poly: f, lo, hi, exact: None };
        r.refine(60);
        r.snap_rational();
        Some(r)
    }

    /// A rational root of an integer polynomial has the form `k / lc`; once
    /// the interval is narrow only a few such `k` remain to test.
    fn snap_rational(&mut self) {
        if self.exact.is_some() {
            return;
        }
        let lc = BigRational::from_integer(self.poly.lc().abs());
        let k_lo = (&self.lo * &lc).ceil().to_integer();
        let k_hi = (&self.hi * &lc).floor().to_integer();
        if k_hi < k_lo || &k_hi - &k_lo > BigInt::from(4) {
            return;
        }
        let mut k = k_lo;
        while k <= k_hi {
            let cand = BigRational::from_integer(k.clone()) / &lc;
            if cand > self.lo && self.poly.sign_at(&cand) == 0 {
                *self = RealAlgebraic::rational(cand);
                return;
            }
            k += 1;
        }
    }

    /// Bisect until the interval is narrower than `2^-bits · max(1, |hi|)`.
    pub fn refine(&mut self, bits: u32) {
        if self.exact.is_some() {
            return;
        }
        let scale = BigRational::from_integer(BigInt::one() << bits);
        let one = BigRational::one();
        let s_hi = self.poly.sign_at(&self.hi);
        loop {
            let width = &self.hi - &self.lo;
            let mag = self.hi.abs().max(one.clone());
            if width * &scale <= mag {
                break;
            }
            let mid = half(&self.lo, &self.hi);
            match self.poly.sign_at(&mid) {
                0 => {
                    self.lo = mid.clone();
                    self.hi = mid.clone();
                    self.exact = Some(mid);
                    return;
                }
                s if s == s_hi => self.hi = mid,
                _ => self.lo = mid,
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some(q) => rational_to_f64(q),
            None => rational_to_f64(&half(&self.lo, &self.hi)),
        }
    }

    /// Whether `g` vanishes at this number.
    pub fn is_root_of(&self, g: &Poly) -> bool {
        if g.is_zero() {
            return true;
        }
        if let Some(q) = &self.exact {
            return g.sign_at(q) == 0;
        }
        let h = g.gcd(&self.poly);
        h.deg() > 0 && h.sign_at(&self.lo) != h.sign_at(&self.hi)
    }

    /// Replace the defining polynomial by a factor of it that still vanishes
    /// here.
    pub fn restrict_to_factor(&mut self, factor: &Poly) {
        debug_assert!(self.is_root_of(factor));
        if self.exact.is_none() {
            self.poly = factor.primitive();
        }
    }

    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        if let Some(e) = &self.exact {
            return e.cmp(q);
        }
        if q <= &self.lo {
            return Ordering::Greater;
        }
        if q >= &self.hi {
            return Ordering::Less;
        }
        let s = self.poly.sign_at(q);
        if s == 0 {
            Ordering::Equal
        } else if s == self.poly.sign_at(&self.hi) {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// Exact equality with another algebraic number.
    pub fn same_as(&self, other: &RealAlgebraic) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), _) => other.cmp_rational(a) == Ordering::Equal,
            (None, Some(b)) => self.cmp_rational(b) == Ordering::Equal,
            (None, None) => {
                if self.hi <= other.lo || other.hi <= self.lo {
                    return false;
                }
                let g = self.poly.gcd(&other.poly);
                if g.deg() == 0 {
                    return false;
                }
                let lo = (&self.lo).max(&other.lo).clone();
                let hi = (&self.hi).min(&other.hi).clone();
                g.sturm().count(&lo, &hi) > 0 && self.is_root_of(&g) && other.is_root_of(&g)
            }
        }
    }

    /// Strict ordering between two algebraic numbers.
    pub fn cmp_algebraic(&self, other: &RealAlgebraic) -> Ordering {
        if self.same_as(other) {
            return Ordering::Equal;
        }
        let mut a = self.clone();
        let mut b = other.clone();
        let mut bits = 64;
        loop {
            if a.hi < b.lo || (a.exact.is_some() && a.hi <= b.lo) {
                return Ordering::Less;
            }
            if b.hi < a.lo || (b.exact.is_some() && b.hi <= a.lo) {
                return Ordering::Greater;
            }
            if let Some(q) = &a.exact {
                return b.cmp_rational(q).reverse();
            }
            if let Some(q) = &b.exact {
                return a.cmp_rational(q);
            }
            bits += 32;
            a.refine(bits);
            b.refine(bits);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_i64(c)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn arithmetic_and_display() {
        let a = p(&[-1, -1, 1]);
        assert_eq!(a.to_string(), "x^2 - x - 1");
        assert_eq!(a.mul(&a), p(&[1, 2, -1, -2, 1]));
        assert_eq!(a.derivative(), p(&[-1, 2]));
        assert_eq!(p(&[0, 0]).degree(), None);
    }

    #[test]
    fn gcd_and_division() {
        let a = p(&[-1, -1, 1]);
        let b = p(&[0, 1]);
        let prod = a.mul(&a).mul(&b);
        assert_eq!(prod.gcd(&a), a);
        assert_eq!(prod.div_exact(&a), a.mul(&b));
        assert_eq!(p(&[2, 4]).gcd(&p(&[3, 6])), p(&[1, 2]));
    }

    #[test]
    fn yun_decomposition() {
        // x (x^2 - x - 1)^2 (x - 1)^3
        let g = p(&[-1, -1, 1]);
        let l = p(&[-1, 1]);
        let f = p(&[0, 1]).mul(&g.pow(2)).mul(&l.pow(3));
        let sf = f.square_free();
        assert_eq!(sf, vec![(p(&[0, 1]), 1), (g, 2), (l, 3)]);
    }

    #[test]
    fn sturm_counts() {
        // (x-1)(x-2)(x+3)
        let f = p(&[-1, 1]).mul(&p(&[-2, 1])).mul(&p(&[3, 1]));
        let s = f.sturm();
        assert_eq!(s.count(&q(-10, 1), &q(10, 1)), 3);
        assert_eq!(s.count(&q(0, 1), &q(10, 1)), 2);
        assert_eq!(s.count(&q(1, 1), &q(2, 1)), 1);
        assert_eq!(s.count(&q(5, 2), &q(10, 1)), 0);
    }

    #[test]
    fn golden_root() {
        let r = p(&[-1, -1, 1]).largest_real_root().unwrap();
        let gamma = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((r.to_f64() - gamma).abs() < 1e-15);
        assert!(r.exact.is_none());
        assert!(r.is_root_of(&p(&[-1, -1, 1]).mul(&p(&[0, 1]))));
        assert!(!r.is_root_of(&p(&[1, -1, -1])));
    }

    #[test]
    fn rational_roots_found_exactly() {
        let r = p(&[-2, 1]).mul(&p(&[1, 1])).largest_real_root().unwrap();
        assert_eq!(r.exact, Some(q(2, 1)));
        let r = p(&[0, 1]).largest_real_root().unwrap();
        assert_eq!(r.exact, Some(q(0, 1)));
        assert!(p(&[1, 0, 1]).largest_real_root().is_none());
        assert_eq!(p(&[-1, 1]).pow(3).root_multiplicity_rational(&q(1, 1)), 3);
    }

    #[test]
    fn algebraic_comparison() {
        let g = p(&[-1, -1, 1]).largest_real_root().unwrap();
        let g2 = p(&[-1, -1, 1]).mul(&p(&[-5, 1])).largest_real_root().unwrap();
        assert_eq!(g2.exact, Some(q(5, 1)));
        let s2 = p(&[-2, 0, 1]).largest_real_root().unwrap();
        assert_eq!(g.cmp_algebraic(&s2), Ordering::Greater);
        let g3 = p(&[0, -1, -1, 1]).largest_real_root().unwrap();
        assert!(g.same_as(&g3));
        assert_eq!(g.cmp_rational(&q(8, 5)), Ordering::Greater);
    }

    #[test]
    fn aberth_roots() {
        let f = p(&[-1, -1, 1]).mul(&p(&[1, 0, 1]));
        let mut mods: Vec<f64> = f.complex_roots().iter().map(|z| z.norm()).collect();
        mods.sort_by(f64::total_cmp);
        let gamma = (1.0 + 5f64.sqrt()) / 2.0;
        let want = [1.0 / gamma, 1.0, 1.0, gamma];
        for (a, b) in mods.iter().zip(want) {
            assert!((a - b).abs() < 1e-10, "{mods:?}");
        }
    }
}
