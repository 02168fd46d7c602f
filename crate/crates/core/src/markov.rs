//! Finite Markov refinements for holes with finite boundary orbits, their
//! 0/1 transition matrices, and the exact spectral data of the leading
//! eigenvalue.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::shifted_power_ranks;
use crate::hole::Hole;
use crate::map::PiecewiseMap;
use crate::poly::{Poly, RealAlgebraic};
use crate::scalar::{format_rational, serialize_rational, serialize_rationals, Scalar};

pub const DEFAULT_ORBIT_CAP: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Above this estimated cost the rank computation switches to floating point.
const EXACT_RANK_BUDGET: f64 = 2e9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkovState {
    #[serde(serialize_with = "serialize_rational")]
    pub lo: BigRational,
    #[serde(serialize_with = "serialize_rational")]
    pub hi: BigRational,
    pub branch: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovRefinement {
    #[serde(serialize_with = "serialize_rationals")]
    pub breakpoints: Vec<BigRational>,
    pub states: Vec<MarkovState>,
    /// For every state, the breakpoint indices bounding its image.
    #[serde(skip)]
    image_span: Vec<(usize, usize)>,
}

fn exact(s: &Scalar, what: &str) -> Result<BigRational> {
    s.as_rational()
        .cloned()
        .ok_or_else(|| Error::NotFinitelyMarkov(format!("{what} is a float; the Markov engine needs exact input")))
}

/// Breakpoints closed under both one-sided branch extensions, and the
/// elementary intervals between them that lie in a branch and avoid the hole.
pub fn refine_markov(map: &PiecewiseMap, hole: &Hole, orbit_cap: usize) -> Result<MarkovRefinement> {
    map.check_hole(hole)?;
    let codomain = (exact(map.codomain().lo(), "interval")?, exact(map.codomain().hi(), "interval")?);
    let mut branches = Vec::new();
    for b in map.branches() {
        let m = b.mobius();
        let coeffs = [exact(&m.p, "branch")?, exact(&m.q, "branch")?, exact(&m.r, "branch")?, exact(&m.s, "branch")?];
        branches.push((exact(b.domain().lo(), "branch")?, exact(b.domain().hi(), "branch")?, coeffs));
    }
    let mut pieces = Vec::new();
    for (lo, hi) in hole.pieces() {
        pieces.push((exact(lo, "hole")?, exact(hi, "hole")?));
    }
    let eval = |c: &[BigRational; 4], x: &BigRational| (&c[0] * x + &c[1]) / (&c[2] * x + &c[3]);
    let inside_hole = |x: &BigRational| pieces.iter().any(|(lo, hi)| lo < x && x < hi);

    let mut points: BTreeSet<BigRational> = BTreeSet::new();
    let mut queue: VecDeque<BigRational> = VecDeque::new();
    let push = |x: BigRational, points: &mut BTreeSet<BigRational>, queue: &mut VecDeque<BigRational>| {
        if points.insert(x.clone()) {
            queue.push_back(x);
        }
    };
    push(codomain.0.clone(), &mut points, &mut queue);
    push(codomain.1.clone(), &mut points, &mut queue);
    for (lo, hi, _) in &branches {
        push(lo.clone(), &mut points, &mut queue);
        push(hi.clone(), &mut points, &mut queue);
    }
    for (lo, hi) in &pieces {
        push(lo.clone(), &mut points, &mut queue);
        push(hi.clone(), &mut points, &mut queue);
    }
    while let Some(x) = queue.pop_front() {
        if points.len() > orbit_cap {
            return Err(Error::NotFinitelyMarkov(format!("boundary orbits did not close within {orbit_cap} points")));
        }
        // Points strictly inside the hole never bound a state.
        if inside_hole(&x) {
            continue;
        }
        for (lo, hi, c) in &branches {
            if lo <= &x && &x <= hi {
                push(eval(c, &x), &mut points, &mut queue);
            }
        }
    }
    let breakpoints: Vec<BigRational> = points.into_iter().collect();
    let index_of = |x: &BigRational| breakpoints.binary_search(x).ok();

    let mut states = Vec::new();
    let mut image_span = Vec::new();
    for w in breakpoints.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        if hole_covers(&pieces, lo, hi) {
            continue;
        }
        let Some(b) = branches.iter().position(|(dlo, dhi, _)| dlo <= lo && hi <= dhi) else { continue };
        let c = &branches[b].2;
        let (ya, yb) = (eval(c, lo), eval(c, hi));
        let (ylo, yhi) = if ya < yb { (ya, yb) } else { (yb, ya) };
        match (index_of(&ylo), index_of(&yhi)) {
            (Some(i), Some(j)) => image_span.push((i, j)),
            _ => {
                return Err(Error::NotFinitelyMarkov(format!(
                    "image of ({}, {}) does not end on breakpoints",
                    format_rational(lo),
                    format_rational(hi)
                )))
            }
        }
        states.push(MarkovState { lo: lo.clone(), hi: hi.clone(), branch: b });
    }
    Ok(MarkovRefinement { breakpoints, states, image_span })
}

fn hole_covers(pieces: &[(BigRational, BigRational)], lo: &BigRational, hi: &BigRational) -> bool {
    pieces.iter().any(|(a, b)| a <= lo && hi <= b)
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionMatrix {
    pub size: usize,
    pub entries: Vec<Vec<i64>>,
    /// Monic `det(λI − M)`, ascending.
    pub char_poly: Poly,
    /// Strongly connected classes, each in ascending state order; listed so
    /// that edges only go from earlier to later classes.
    #[serde(skip)]
    classes: Vec<Vec<usize>>,
    #[serde(skip)]
    class_polys: Vec<Poly>,
}

/// `M[i][j] = 1` iff state `j` lies in the image of state `i`.
pub fn transition_matrix(refinement: &MarkovRefinement) -> TransitionMatrix {
    let n = refinement.states.len();
    // Elementary interval index → state index.
    let mut state_at = vec![None; refinement.breakpoints.len()];
    for (s, st) in refinement.states.iter().enumerate() {
        let k = refinement.breakpoints.binary_search(&st.lo).expect("state endpoint is a breakpoint");
        state_at[k] = Some(s);
    }
    let mut entries = vec![vec![0i64; n]; n];
    for (i, &(a, b)) in refinement.image_span.iter().enumerate() {
        for s in state_at[a..b].iter().flatten() {
            entries[i][*s] = 1;
        }
    }
    from_entries(entries)
}

/// Build from explicit nonnegative integer entries.
pub fn matrix_from_entries(entries: Vec<Vec<i64>>) -> Result<TransitionMatrix> {
    let n = entries.len();
    if entries.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("transition matrix must be square".into()));
    }
    if entries.iter().flatten().any(|&v| v < 0) {
        return Err(Error::InvalidParameter("transition matrix entries must be nonnegative".into()));
    }
    Ok(from_entries(entries))
}

fn from_entries(entries: Vec<Vec<i64>>) -> TransitionMatrix {
    let n = entries.len();
    let classes = classes_in_order(&entries);
    let class_polys: Vec<Poly> = classes.iter().map(|c| char_poly(&submatrix(&entries, c))).collect();
    let char_poly = class_polys.iter().fold(Poly::one(), |acc, p| acc.mul(p));
    TransitionMatrix { size: n, entries, char_poly, classes, class_polys }
}

fn submatrix(m: &[Vec<i64>], idx: &[usize]) -> Vec<Vec<i64>> {
    idx.iter().map(|&i| idx.iter().map(|&j| m[i][j]).collect()).collect()
}

/// Strongly connected components in topological order of the condensation.
fn classes_in_order(m: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let n = m.len();
    let mut g = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] != 0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    // tarjan_scc lists components in reverse topological order.
    tarjan_scc(&g)
        .into_iter()
        .rev()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

trait Ring: Clone + Zero + One + CheckedAdd + CheckedSub + CheckedMul + From<i64> {}
impl<T: Clone + Zero + One + CheckedAdd + CheckedSub + CheckedMul + From<i64>> Ring for T {}

/// Berkowitz's division-free characteristic polynomial, descending
/// coefficients of `det(λI − A)`. `None` on overflow.
fn berkowitz<T: Ring>(a: &[Vec<i64>]) -> Option<Vec<T>> {
    let n = a.len();
    if n == 0 {
        return Some(vec![T::one()]);
    }
    let at = |i: usize, j: usize| T::from(a[i][j]);
    let neg = |x: &T| T::zero().checked_sub(x);
    let mut v: Vec<T> = vec![T::one(), neg(&at(0, 0))?];
    for r in 1..n {
        let mut col: Vec<T> = Vec::with_capacity(r + 2);
        col.push(T::one());
        col.push(neg(&at(r, r))?);
        let mut x: Vec<T> = (0..r).map(|i| at(i, r)).collect();
        for k in 0..r {
            let mut dot = T::zero();
            for (i, xi) in x.iter().enumerate() {
                if a[r][i] != 0 {
                    dot = dot.checked_add(&at(r, i).checked_mul(xi)?)?;
                }
            }
            col.push(neg(&dot)?);
            if k + 1 < r {
                let mut y = vec![T::zero(); r];
                for (i, yi) in y.iter_mut().enumerate() {
                    for (j, xj) in x.iter().enumerate() {
                        if a[i][j] != 0 {
                            *yi = yi.checked_add(&at(i, j).checked_mul(xj)?)?;
                        }
                    }
                }
                x = y;
            }
        }
        let mut next = vec![T::zero(); r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for (j, vj) in v.iter().enumerate().take(i + 1) {
                *slot = slot.checked_add(&col[i - j].checked_mul(vj)?)?;
            }
        }
        v = next;
    }
    Some(v)
}

/// Monic `det(λI − A)` over the integers.
pub fn char_poly(a: &[Vec<i64>]) -> Poly {
    let desc: Vec<BigInt> = match berkowitz::<i128>(a) {
        Some(v) => v.into_iter().map(BigInt::from).collect(),
        None => berkowitz::<BigInt>(a).expect("big integers do not overflow"),
    };
    Poly::new(desc.into_iter().rev().collect())
}

impl TransitionMatrix {
    /// Ascending coefficients of `det(M − λI) = (−1)^n det(λI − M)`.
    pub fn char_poly_coeffs(&self) -> Vec<BigInt> {
        let sign = if self.size.is_multiple_of(2) { 1 } else { -1 };
        self.char_poly.coeffs().iter().map(|c| c * sign).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub rho: f64,
    /// A square-free integer polynomial with `rho` as a root, isolated in
    /// `[rho_lo, rho_hi]` (a linear factor when `rho` is rational).
    pub rho_poly: Poly,
    pub rho_lo: String,
    pub rho_hi: String,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    pub pole_order_p: usize,
    pub second_eigenvalue_modulus: f64,
    /// Whether multiplicities came from exact arithmetic.
    pub exact: bool,
}

impl SpectralReport {
    fn empty() -> SpectralReport {
        SpectralReport {
            rho: 0.0,
            rho_poly: Poly::x(),
            rho_lo: "0".into(),
            rho_hi: "0".into(),
            algebraic_multiplicity: 0,
            geometric_multiplicity: 0,
            pole_order_p: 0,
            second_eigenvalue_modulus: 0.0,
            exact: true,
        }
    }
}

fn class_is_trivial(m: &[Vec<i64>], class: &[usize]) -> bool {
    class.len() == 1 && m[class[0]][class[0]] == 0
}

/// Perron root, multiplicities and pole order of the leading eigenvalue.
pub fn spectral_report(m: &TransitionMatrix, tol: f64) -> Result<SpectralReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    if m.size == 0 {
        return Ok(SpectralReport::empty());
    }
    let mut rho: Option<RealAlgebraic> = None;
    let mut roots: Vec<Option<RealAlgebraic>> = Vec::new();
    for (class, poly) in m.classes.iter().zip(&m.class_polys) {
        if class_is_trivial(&m.entries, class) {
            roots.push(None);
            continue;
        }
        let sf = poly.square_free().iter().fold(Poly::one(), |acc, (g, _)| acc.mul(g));
        let r = RealAlgebraic::largest_root_of_squarefree(&sf);
        if let Some(r) = &r {
            let bigger = match &rho {
                None => true,
                Some(cur) => r.cmp_algebraic(cur) == std::cmp::Ordering::Greater,
            };
            if bigger {
                rho = Some(r.clone());
            }
        }
        roots.push(r);
    }
    let mut rho = match rho {
        Some(r) if r.cmp_rational(&BigRational::zero()) == std::cmp::Ordering::Greater => r,
        _ => RealAlgebraic::rational(BigRational::zero()),
    };
    let rho_is_zero = rho.exact.as_ref().is_some_and(|q| q.is_zero());

    // Basic classes: those whose Perron root equals rho. For rho = 0 every
    // state carries the eigenvalue.
    let basic: Vec<usize> = if rho_is_zero {
        (0..m.classes.len()).collect()
    } else {
        roots.iter().enumerate().filter(|(_, r)| r.as_ref().is_some_and(|r| r.same_as(&rho))).map(|(i, _)| i).collect()
    };
    let alg = if rho_is_zero { m.size } else { basic.len() };

    let (geo, p, exact_ranks) = if alg == 1 {
        (1, 1, true)
    } else {
        let relevant = relevant_states(m, &basic);
        let sub = submatrix(&m.entries, &relevant);
        let degree = rho.poly.deg().max(1) as f64;
        let size = relevant.len() as f64;
        let cost = size.powi(3) * degree * degree * (alg as f64 + 1.0);
        if cost <= EXACT_RANK_BUDGET {
            let (ranks, narrowed) = shifted_power_ranks(&sub, rho, alg + 1);
            rho = narrowed;
            let (geo, p) = jordan_from_ranks(relevant.len(), &ranks);
            (geo, p, true)
        } else {
            let (geo, p) = float_jordan(&sub, rho.to_f64(), alg, tol)?;
            (geo, p, false)
        }
    };

    rho.refine(60);
    let rho_f = rho.to_f64();
    Ok(SpectralReport {
        rho: rho_f,
        rho_poly: rho.poly.clone(),
        rho_lo: format_rational(&rho.lo),
        rho_hi: format_rational(&rho.hi),
        algebraic_multiplicity: alg,
        geometric_multiplicity: geo,
        pole_order_p: p,
        second_eigenvalue_modulus: second_modulus(m, rho_f, alg),
        exact: exact_ranks,
    })
}

/// States lying on a path that starts and ends in basic classes. The Jordan
/// structure of the leading eigenvalue only depends on this principal
/// submatrix.
fn relevant_states(m: &TransitionMatrix, basic: &[usize]) -> Vec<usize> {
    let n = m.size;
    let mut seeds = vec![false; n];
    for &c in basic {
        for &s in &m.classes[c] {
            seeds[s] = true;
        }
    }
    let reach = |forward: bool| {
        let mut seen = seeds.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&i| seeds[i]).collect();
        while let Some(i) = stack.pop() {
            for (j, s) in seen.iter_mut().enumerate() {
                let edge = if forward { m.entries[i][j] } else { m.entries[j][i] };
                if edge != 0 && !*s {
                    *s = true;
                    stack.push(j);
                }
            }
        }
        seen
    };
    let from_basic = reach(true);
    let to_basic = reach(false);
    (0..n).filter(|&i| from_basic[i] && to_basic[i]).collect()
}

/// Geometric multiplicity and index from `rank((M − ρI)^q)`, `q = 1, 2, …`.
fn jordan_from_ranks(size: usize, ranks: &[usize]) -> (usize, usize) {
    let geo = size - ranks[0];
    let mut p = ranks.len();
    for q in 1..ranks.len() {
        if ranks[q] == ranks[q - 1] {
            p = q;
            break;
        }
    }
    (geo, p)
}

fn float_jordan(sub: &[Vec<i64>], rho: f64, alg: usize, tol: f64) -> Result<(usize, usize)> {
    let n = sub.len();
    let base = DMatrix::from_fn(n, n, |i, j| sub[i][j] as f64 - if i == j { rho } else { 0.0 });
    let mut power = base.clone();
    let mut ranks: Vec<usize> = Vec::new();
    for q in 1..=alg + 1 {
        if q > 1 {
            power = &power * &base;
        }
        let sv = power.clone().singular_values();
        let scale = sv.max().max(1.0);
        let cut = tol * scale;
        let low = sv.iter().filter(|&&s| s > cut * 100.0).count();
        let high = sv.iter().filter(|&&s| s > cut / 100.0).count();
        if low != high {
            return Err(Error::AmbiguousMultiplicity { low: n - high, high: n - low });
        }
        let r = low;
        let stable = ranks.last() == Some(&r);
        ranks.push(r);
        if stable {
            break;
        }
    }
    Ok(jordan_from_ranks(n, &ranks))
}

/// Largest modulus among eigenvalues once `alg` copies of `rho` are removed.
fn second_modulus(m: &TransitionMatrix, rho: f64, alg: usize) -> f64 {
    let mut eigen: Vec<num_complex::Complex64> = Vec::new();
    for poly in &m.class_polys {
        for (g, mult) in poly.square_free() {
            let roots = g.complex_roots();
            for _ in 0..mult {
                eigen.extend(roots.iter().copied());
            }
        }
    }
    let mut to_remove = alg;
    eigen.sort_by(|a, b| (a - rho).norm().total_cmp(&(b - rho).norm()));
    let rest: Vec<_> = eigen
        .into_iter()
        .filter(|z| {
            if to_remove > 0 && (z - rho).norm() < 1e-6 * rho.max(1.0) {
                to_remove -= 1;
                false
            } else {
                true
            }
        })
        .collect();
    rest.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovEntropy {
    pub entropy: f64,
    pub report: SpectralReport,
    pub refinement: MarkovRefinement,
    pub matrix: TransitionMatrix,
}

/// `max(log ρ, 0)` from the exact Markov refinement.
pub fn entropy_markov(map: &PiecewiseMap, hole: &Hole, orbit_cap: usize, tol: f64) -> Result<MarkovEntropy> {
    let refinement = refine_markov(map, hole, orbit_cap)?;
    let matrix = transition_matrix(&refinement);
    let report = spectral_report(&matrix, tol)?;
    let entropy = if report.rho > 0.0 { report.rho.ln().max(0.0) } else { 0.0 };
    Ok(MarkovEntropy { entropy, report, refinement, matrix })
}

#[derive(Serialize)]
struct JsonReport<'a> {
    states: Vec<[String; 2]>,
    matrix: &'a [Vec<i64>],
    char_poly_coeffs: Vec<serde_json::Value>,
    rho: f64,
    alg_mult: usize,
    geo_mult: usize,
    p: usize,
    entropy: f64,
}

impl MarkovEntropy {
    /// `{states, matrix, char_poly_coeffs, rho, alg_mult, geo_mult, p, entropy}`.
    pub fn to_json(&self) -> serde_json::Value {
        let states = self.refinement.states.iter().map(|s| [format_rational(&s.lo), format_rational(&s.hi)]).collect();
        let char_poly_coeffs = self
            .matrix
            .char_poly_coeffs()
            .iter()
            .map(|c| match c.to_i64() {
                Some(v) => serde_json::Value::from(v),
                None => serde_json::Value::from(c.to_string()),
            })
            .collect();
        serde_json::to_value(JsonReport {
            states,
            matrix: &self.matrix.entries,
            char_poly_coeffs,
            rho: self.report.rho,
            alg_mult: self.report.algebraic_multiplicity,
            geo_mult: self.report.geometric_multiplicity,
            p: self.report.pole_order_p,
            entropy: self.entropy,
        })
        .expect("report serializes")
    }

    /// Transition graph in DOT format.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph transitions {\n  rankdir=LR;\n");
        for (i, s) in self.refinement.states.iter().enumerate() {
            let _ = writeln!(out, "  s{} [label=\"({}, {})\"];", i + 1, format_rational(&s.lo), format_rational(&s.hi));
        }
        for (i, row) in self.matrix.entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    let _ = writeln!(out, "  s{} -> s{};", i + 1, j + 1);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
