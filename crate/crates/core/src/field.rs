//! Exact linear algebra over `Q(ρ)` for a real algebraic `ρ`.
//!
//! Elements are rational polynomials reduced modulo the defining polynomial
//! of `ρ`. That polynomial is only known to be square-free, not irreducible,
//! so zero tests are decided at `ρ` itself: a nontrivial common factor with
//! the modulus splits it and the factor vanishing at `ρ` is kept (dynamic
//! evaluation). All ranks are therefore ranks of matrices evaluated at `ρ`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::{Poly, RealAlgebraic};

type Elem = Vec<BigRational>;

fn trim(mut e: Elem) -> Elem {
    while e.last().is_some_and(|c| c.is_zero()) {
        e.pop();
    }
    e
}

fn to_rational_poly(p: &Poly) -> Elem {
    p.coeffs().iter().map(|c| BigRational::from_integer(c.clone())).collect()
}

/// Clear denominators of a rational polynomial.
fn to_integer_poly(e: &Elem) -> Poly {
    let l = e.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    Poly::new(e.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect())
}

fn add(a: &Elem, b: &Elem) -> Elem {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
}

fn neg(a: &Elem) -> Elem {
    a.iter().map(|c| -c).collect()
}

fn sub(a: &Elem, b: &Elem) -> Elem {
    add(a, &neg(b))
}

fn mul_raw(a: &Elem, b: &Elem) -> Elem {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn div_rem(a: &Elem, d: &Elem) -> (Elem, Elem) {
    let d = trim(d.clone());
    assert!(!d.is_empty(), "division by zero");
    let mut r = trim(a.clone());
    if r.len() < d.len() {
        return (Vec::new(), r);
    }
    let dd = d.len() - 1;
    let lc = d[dd].clone();
    let mut q = vec![BigRational::zero(); r.len() - dd];
    while r.len() > dd && !r.is_empty() {
        let k = r.len() - 1;
        let t = &r[k] / &lc;
        for (j, dc) in d.iter().enumerate() {
            r[k - dd + j] -= &t * dc;
        }
        q[k - dd] = t;
        r.pop();
        r = trim(r);
    }
    (trim(q), r)
}

pub(crate) struct AlgebraicField {
    rho: RealAlgebraic,
    modulus: Elem,
}

impl AlgebraicField {
    pub(crate) fn new(rho: RealAlgebraic) -> AlgebraicField {
        let modulus = to_rational_poly(&rho.poly);
        AlgebraicField { rho, modulus }
    }

    #[cfg(test)]
    pub(crate) fn rho(&self) -> &RealAlgebraic {
        &self.rho
    }

    pub(crate) fn constant(&self, q: BigRational) -> Elem {
        self.reduce(&trim(vec![q]))
    }

    /// The generator `ρ` itself.
    pub(crate) fn generator(&self) -> Elem {
        self.reduce(&vec![BigRational::zero(), BigRational::one()])
    }

    pub(crate) fn reduce(&self, e: &Elem) -> Elem {
        div_rem(e, &self.modulus).1
    }

    pub(crate) fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.reduce(&mul_raw(a, b))
    }

    /// Decide `e(ρ) = 0`, shrinking the modulus when `e` shares a factor with it.
    pub(crate) fn is_zero(&mut self, e: &Elem) -> bool {
        let e = self.reduce(e);
        if e.is_empty() {
            return true;
        }
        let ei = to_integer_poly(&e);
        let f = to_integer_poly(&self.modulus);
        let g = ei.gcd(&f);
        if g.deg() == 0 {
            return false;
        }
        if self.rho.is_root_of(&g) {
            self.set_modulus(&g);
            true
        } else {
            let cofactor = f.primitive().div_exact(&g);
            self.set_modulus(&cofactor);
            false
        }
    }

    fn set_modulus(&mut self, p: &Poly) {
        self.rho.restrict_to_factor(p);
        self.modulus = to_rational_poly(&p.primitive());
    }

    /// Inverse of an element already known to be nonzero at `ρ`.
    pub(crate) fn inv(&self, e: &Elem) -> Elem {
        // Extended Euclid on (e, modulus): s·e + t·m = g, g constant.
        let (mut r0, mut r1) = (self.modulus.clone(), self.reduce(e));
        let (mut s0, mut s1): (Elem, Elem) = (Vec::new(), vec![BigRational::one()]);
        while !r1.is_empty() {
            let (q, r) = div_rem(&r0, &r1);
            let s = sub(&s0, &mul_raw(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        assert!(r0.len() == 1, "element is not invertible modulo the defining polynomial");
        let c = r0[0].clone();
        self.reduce(&s0.iter().map(|x| x / &c).collect())
    }

    /// Rank of a matrix over `Q(ρ)`, destroying it.
    pub(crate) fn rank(&mut self, mut m: Vec<Vec<Elem>>) -> usize {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in 0..cols {
            let mut pivot = None;
            for r in rank..rows {
                let before = self.modulus.len();
                let zero = self.is_zero(&m[r][col]);
                if self.modulus.len() != before {
                    for row in m.iter_mut() {
                        for x in row.iter_mut() {
                            *x = self.reduce(x);
                        }
                    }
                }
                if !zero {
                    pivot = Some(r);
                    break;
                }
                m[r][col] = Vec::new();
            }
            let Some(p) = pivot else { continue };
            m.swap(rank, p);
            let inv = self.inv(&m[rank][col]);
            let pivot_row: Vec<Elem> = m[rank].iter().map(|x| self.mul(x, &inv)).collect();
            for (r, row) in m.iter_mut().enumerate() {
                if r == rank || row[col].is_empty() {
                    continue;
                }
                let factor = row[col].clone();
                for c in col..cols {
                    let t = self.mul(&factor, &pivot_row[c]);
                    row[c] = sub(&row[c], &t);
                }
            }
            m[rank] = pivot_row;
            rank += 1;
        }
        rank
    }

    pub(crate) fn matmul(&self, a: &[Vec<Elem>], b: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
        let n = a.len();
        let k = b.len();
        let cols = b.first().map_or(0, Vec::len);
        (0..n)
            .map(|i| {
                (0..cols)
                    .map(|j| {
                        let mut acc = Vec::new();
                        for l in 0..k {
                            if a[i][l].is_empty() || b[l][j].is_empty() {
                                continue;
                            }
                            acc = add(&acc, &mul_raw(&a[i][l], &b[l][j]));
                        }
                        self.reduce(&acc)
                    })
                    .collect()
            })
            .collect()
    }

    /// `M − ρ·I` for an integer matrix.
    pub(crate) fn shifted(&self, m: &[Vec<i64>]) -> Vec<Vec<Elem>> {
        let rho = self.generator();
        m.iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let c = self.constant(BigRational::from_integer(v.into()));
                        if i == j {
                            sub(&c, &rho)
                        } else {
                            c
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub(crate) fn into_rho(self) -> RealAlgebraic {
        self.rho
    }
}

/// `rank((M − ρI)^q)` for `q = 1..=max_power`, stopping early once the rank
/// stabilizes (later entries repeat the last value).
pub(crate) fn shifted_power_ranks(m: &[Vec<i64>], rho: RealAlgebraic, max_power: usize) -> (Vec<usize>, RealAlgebraic) {
    let mut field = AlgebraicField::new(rho);
    let base = field.shifted(m);
    let mut power = base.clone();
    let mut ranks: Vec<usize> = Vec::new();
    for q in 1..=max_power.max(1) {
        if q > 1 {
            power = field.matmul(&power, &base);
        }
        let r = field.rank(power.clone());
        let stable = ranks.last() == Some(&r);
        ranks.push(r);
        if stable {
            break;
        }
    }
    (ranks, field.into_rho())
}
