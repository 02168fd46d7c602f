//! Surviving cylinder sets: exact refinement, counting, and the direct
//! entropy, pressure and expansion estimators built on them.
//!
//! Level `k+1` components come from pulling level `k` components back through
//! each branch inverse and removing the hole; only positive-length pieces are
//! kept. Components are listed left to right at every level.

use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hole::Hole;
use crate::kneading;
use crate::map::{Branch, IntervalOpen, Moebius, Orientation, PiecewiseMap};
use crate::markov;
use crate::par::{map_slice, Execution};
use crate::scalar::{Mode, Scalar};

pub const DEFAULT_CAP: u64 = 10_000_000;

/// Frontier size at which depth-first work is handed to the pool.
const SPLIT_TARGET: usize = 64;

#[derive(Clone, Copy, Debug)]
pub struct RefineOptions {
    /// Maximum number of components allowed at any one level.
    pub cap: u64,
    /// Keep every level's cylinders, not just the counts.
    pub keep_levels: bool,
    pub execution: Execution,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { cap: DEFAULT_CAP, keep_levels: false, execution: Execution::default() }
    }
}

/// Survivor components sharing one itinerary.
#[derive(Clone, Debug, Serialize)]
pub struct Cylinder {
    /// Branch indices `b_0 … b_{n-1}` with `T^k x` in branch `b_k`.
    pub itinerary: Vec<u32>,
    pub hull: IntervalOpen,
    pub components: Vec<IntervalOpen>,
}

impl Cylinder {
    pub fn level(&self) -> usize {
        self.itinerary.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementTree {
    pub map: PiecewiseMap,
    pub hole: Hole,
    pub depth: usize,
    /// `counts[k-1]` is the number of level-`k` components; stops at the
    /// first zero.
    pub counts: Vec<u64>,
    /// Per-level cylinders, only with [`RefineOptions::keep_levels`].
    pub levels: Vec<Vec<Cylinder>>,
}

impl RefinementTree {
    /// Number of level-`n` components (0 past the first empty level).
    pub fn count(&self, n: usize) -> u64 {
        assert!(n >= 1 && n <= self.depth, "level {n} outside 1..={}", self.depth);
        self.counts.get(n - 1).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
struct Piece {
    lo: Scalar,
    hi: Scalar,
}

/// Pull `(lo, hi)` back through `branch` and clip to the domain. `None` when
/// the image misses the interval.
fn preimage(branch: &Branch, lo: &Scalar, hi: &Scalar) -> Option<(Scalar, Scalar)> {
    let (ilo, ihi) = branch.image();
    let lo = lo.max_of(ilo);
    let hi = hi.min_of(ihi);
    if !lo.lt(&hi) {
        return None;
    }
    let (a, b) = match branch.orientation() {
        Orientation::Increasing => (branch.inverse(&lo), branch.inverse(&hi)),
        Orientation::Decreasing => (branch.inverse(&hi), branch.inverse(&lo)),
    };
    let dom = branch.domain();
    Some((a.max_of(dom.lo()), b.min_of(dom.hi())))
}

fn pull_back(branch: &Branch, hole: &Hole, lo: &Scalar, hi: &Scalar) -> Vec<(Scalar, Scalar)> {
    match preimage(branch, lo, hi) {
        Some((a, b)) => hole.subtract(&a, &b),
        None => Vec::new(),
    }
}

fn validate(map: &PiecewiseMap, hole: &Hole, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("refinement depth must be at least 1".into()));
    }
    map.check_hole(hole)
}

fn root(map: &PiecewiseMap) -> Piece {
    Piece { lo: map.codomain().lo().clone(), hi: map.codomain().hi().clone() }
}

/// Refine to depth `n_max`, counting survivor components at each level.
pub fn refine(map: &PiecewiseMap, hole: &Hole, n_max: usize, opts: RefineOptions) -> Result<RefinementTree> {
    validate(map, hole, n_max)?;
    let (counts, levels) = if opts.keep_levels {
        refine_levels(map, hole, n_max, opts.cap)?
    } else {
        let stats = depth_first(map, hole, n_max, None, opts.cap, opts.execution)?;
        (stats.counts, Vec::new())
    };
    let mut counts = counts;
    if let Some(z) = counts.iter().position(|&c| c == 0) {
        counts.truncate(z + 1);
    }
    Ok(RefinementTree { map: map.clone(), hole: hole.clone(), depth: n_max, counts, levels })
}

/// Breadth-first refinement keeping every level.
fn refine_levels(map: &PiecewiseMap, hole: &Hole, n_max: usize, cap: u64) -> Result<(Vec<u64>, Vec<Vec<Cylinder>>)> {
    let mut frontier: Vec<(Piece, Vec<u32>)> = vec![(root(map), Vec::new())];
    let mut counts = Vec::with_capacity(n_max);
    let mut levels = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let mut next = Vec::new();
        for (b, branch) in map.branches().iter().enumerate() {
            let mut children = Vec::new();
            // A decreasing branch reverses the order of the parents.
            let parents: Box<dyn Iterator<Item = &(Piece, Vec<u32>)>> = match branch.orientation() {
                Orientation::Increasing => Box::new(frontier.iter()),
                Orientation::Decreasing => Box::new(frontier.iter().rev()),
            };
            for (piece, word) in parents {
                let parts = pull_back(branch, hole, &piece.lo, &piece.hi);
                if parts.is_empty() {
                    continue;
                }
                let mut itinerary = Vec::with_capacity(word.len() + 1);
                itinerary.push(b as u32);
                itinerary.extend_from_slice(word);
                for (lo, hi) in parts {
                    children.push((Piece { lo, hi }, itinerary.clone()));
                }
            }
            next.extend(children);
            if next.len() as u64 > cap {
                return Err(Error::ResourceLimit(format!("more than {cap} components at level {}", counts.len() + 1)));
            }
        }
        counts.push(next.len() as u64);
        levels.push(group(&next));
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    while levels.len() < n_max {
        levels.push(Vec::new());
    }
    Ok((counts, levels))
}

fn group(pieces: &[(Piece, Vec<u32>)]) -> Vec<Cylinder> {
    let mut out: Vec<Cylinder> = Vec::new();
    for (p, word) in pieces {
        let comp = IntervalOpen::new(p.lo.clone(), p.hi.clone()).expect("positive-length component");
        match out.last_mut() {
            Some(c) if &c.itinerary == word => {
                c.hull = IntervalOpen::new(c.hull.lo().clone(), p.hi.clone()).expect("ordered");
                c.components.push(comp);
            }
            _ => out.push(Cylinder { itinerary: word.clone(), hull: comp.clone(), components: vec![comp] }),
        }
    }
    out
}

struct DepthStats {
    counts: Vec<u64>,
    weights: Option<Vec<Scalar>>,
}

/// Depth-first enumeration of all survivor components to depth `n`,
/// optionally accumulating itinerary products of per-branch weights.
fn depth_first(
    map: &PiecewiseMap,
    hole: &Hole,
    n: usize,
    weights: Option<&[Scalar]>,
    cap: u64,
    exec: Execution,
) -> Result<DepthStats> {
    let counters: Vec<AtomicU64> = (0..n).map(|_| AtomicU64::new(0)).collect();
    let zero = Scalar::int_in(map.mode(), 0);
    let one = Scalar::int_in(map.mode(), 1);

    // Breadth-first until the frontier is wide enough to split.
    let mut frontier = vec![(root(map), one.clone())];
    let mut level = 0;
    let mut sums: Vec<Scalar> = vec![zero.clone(); n];
    while level < n && frontier.len() < SPLIT_TARGET && !frontier.is_empty() {
        let mut next = Vec::new();
        for (b, branch) in map.branches().iter().enumerate() {
            for (p, w) in &frontier {
                let w2 = weights.map(|ws| &ws[b] * w);
                for (lo, hi) in pull_back(branch, hole, &p.lo, &p.hi) {
                    next.push((Piece { lo, hi }, w2.clone().unwrap_or_else(|| one.clone())));
                }
            }
        }
        counters[level].fetch_add(next.len() as u64, AtomicOrdering::Relaxed);
        if next.len() as u64 > cap {
            return Err(cap_error(cap, level + 1));
        }
        if weights.is_some() {
            sums[level] = next.iter().fold(zero.clone(), |acc, (_, w)| &acc + w);
        }
        frontier = next;
        level += 1;
    }

    let start = level;
    let results = map_slice(exec, &frontier, |(p, w)| {
        let mut local = vec![zero.clone(); n];
        walk(map, hole, p, w, start, n, weights, &counters, cap, &mut local)?;
        Ok::<_, Error>(local)
    });
    for r in results {
        let local = r?;
        if weights.is_some() {
            for (k, s) in local.into_iter().enumerate().skip(start) {
                sums[k] = &sums[k] + &s;
            }
        }
    }
    let counts = counters.iter().map(|c| c.load(AtomicOrdering::Relaxed)).collect();
    Ok(DepthStats { counts, weights: weights.map(|_| sums) })
}

fn cap_error(cap: u64, level: usize) -> Error {
    Error::ResourceLimit(format!("more than {cap} components at level {level}"))
}

#[allow(clippy::too_many_arguments)]
fn walk(
    map: &PiecewiseMap,
    hole: &Hole,
    piece: &Piece,
    w: &Scalar,
    level: usize,
    n: usize,
    weights: Option<&[Scalar]>,
    counters: &[AtomicU64],
    cap: u64,
    sums: &mut [Scalar],
) -> Result<()> {
    if level == n {
        return Ok(());
    }
    for (b, branch) in map.branches().iter().enumerate() {
        let parts = pull_back(branch, hole, &piece.lo, &piece.hi);
        if parts.is_empty() {
            continue;
        }
        let seen = counters[level].fetch_add(parts.len() as u64, AtomicOrdering::Relaxed);
        if seen + parts.len() as u64 > cap {
            return Err(cap_error(cap, level + 1));
        }
        let w2 = match weights {
            Some(ws) => {
                let w2 = &ws[b] * w;
                for _ in 0..parts.len() {
                    sums[level] = &sums[level] + &w2;
                }
                w2
            }
            None => w.clone(),
        };
        for (lo, hi) in parts {
            walk(map, hole, &Piece { lo, hi }, &w2, level + 1, n, weights, counters, cap, sums)?;
        }
    }
    Ok(())
}

/// `(1/n)·log⁺ Card` of the level-`n` survivors; 0 when everything escapes.
pub fn entropy_estimate(tree: &RefinementTree, n: usize) -> f64 {
    let c = tree.count(n);
    if c == 0 {
        0.0
    } else {
        (c as f64).ln() / n as f64
    }
}

/// One nonnegative value per branch.
#[derive(Clone, Debug, Serialize)]
pub struct LocallyConstantWeight {
    values: Vec<Scalar>,
}

impl LocallyConstantWeight {
    pub fn new(values: Vec<Scalar>) -> Result<LocallyConstantWeight> {
        if let Some(v) = values.iter().find(|v| v.signum() < 0) {
            return Err(Error::InvalidParameter(format!("negative weight {v}")));
        }
        Ok(LocallyConstantWeight { values })
    }

    pub fn constant(map: &PiecewiseMap, c: Scalar) -> Result<LocallyConstantWeight> {
        LocallyConstantWeight::new(vec![c; map.branches().len()])
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }
}

/// `(1/n)·log Σ_Z sup_Z g_n` over surviving level-`n` components; `-inf`
/// when the sum vanishes.
pub fn pressure_estimate(map: &PiecewiseMap, weight: &LocallyConstantWeight, hole: &Hole, n: usize) -> Result<f64> {
    pressure_estimate_with(map, weight, hole, n, RefineOptions::default())
}

pub fn pressure_estimate_with(
    map: &PiecewiseMap,
    weight: &LocallyConstantWeight,
    hole: &Hole,
    n: usize,
    opts: RefineOptions,
) -> Result<f64> {
    validate(map, hole, n)?;
    if weight.values.len() != map.branches().len() {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {} branches",
            weight.values.len(),
            map.branches().len()
        )));
    }
    for v in &weight.values {
        map.mode().join(v.mode())?;
    }
    let stats = depth_first(map, hole, n, Some(&weight.values), opts.cap, opts.execution)?;
    let total = &stats.weights.expect("weighted walk")[n - 1];
    Ok(total.ln() / n as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionDiagnostics {
    pub n: usize,
    /// Θ_n of the hole's indicator weight; `-inf` when nothing survives.
    pub theta_n: f64,
    pub lambda_n: f64,
    pub xi_n: f64,
    pub a_n: f64,
    #[serde(rename = "A_n")]
    pub big_a_n: f64,
    /// `max_Z (2·components + 2)` over cylinders with survivors.
    pub var_bound: u64,
    /// `sup_Z sup|D(T^n)|`, exact in exact mode.
    pub sup_derivative: Scalar,
    /// `sup_Z sup|D(T^n)| / m(T^n Z)`.
    pub sup_ratio: Scalar,
}

#[derive(Clone)]
struct DiagNode {
    lo: Scalar,
    hi: Scalar,
    comp: Moebius,
    survivors: Vec<(Scalar, Scalar)>,
}

#[derive(Clone)]
struct LevelDiag {
    cylinders: u64,
    sup_d: Scalar,
    sup_ratio: Scalar,
    any_survivor: bool,
    a: u64,
    big_a: Scalar,
    var_bound: u64,
}

impl LevelDiag {
    fn new(mode: Mode) -> LevelDiag {
        let z = Scalar::int_in(mode, 0);
        LevelDiag {
            cylinders: 0,
            sup_d: z.clone(),
            sup_ratio: z.clone(),
            any_survivor: false,
            a: 0,
            big_a: z,
            var_bound: 0,
        }
    }

    fn merge(&mut self, o: &LevelDiag) {
        self.cylinders += o.cylinders;
        self.sup_d = self.sup_d.max_of(&o.sup_d);
        self.sup_ratio = self.sup_ratio.max_of(&o.sup_ratio);
        self.any_survivor |= o.any_survivor;
        self.a = self.a.max(o.a);
        self.big_a = self.big_a.max_of(&o.big_a);
        self.var_bound = self.var_bound.max(o.var_bound);
    }

    fn record(&mut self, node: &DiagNode) {
        let mode = node.lo.mode();
        let d_lo = node.comp.derivative(&node.lo).abs();
        let d_hi = node.comp.derivative(&node.hi).abs();
        let sup_d = d_lo.max_of(&d_hi);
        let image = (&node.comp.eval(&node.hi) - &node.comp.eval(&node.lo)).abs();
        let ratio = &sup_d / &image;
        let norm: u64 = u64::from(!node.survivors.is_empty());
        let jumps: u64 =
            node.survivors.iter().map(|(lo, hi)| u64::from(lo.gt(&node.lo)) + u64::from(hi.lt(&node.hi))).sum();
        let a = 3 * norm + jumps;
        let a1 = &Scalar::int_in(mode, (2 * norm + jumps) as i64) * &ratio;
        let a2 = &Scalar::int_in(mode, norm as i64) * &sup_d;
        self.cylinders += 1;
        self.sup_d = self.sup_d.max_of(&sup_d);
        self.sup_ratio = self.sup_ratio.max_of(&ratio);
        if norm == 1 {
            self.any_survivor = true;
            self.var_bound = self.var_bound.max(2 * node.survivors.len() as u64 + 2);
        }
        self.a = self.a.max(a);
        self.big_a = self.big_a.max_of(&(&a1 + &a2));
    }
}

fn diag_children(map: &PiecewiseMap, hole: &Hole, node: &DiagNode) -> Vec<DiagNode> {
    let mut out = Vec::new();
    for branch in map.branches() {
        let Some((lo, hi)) = preimage(branch, &node.lo, &node.hi) else { continue };
        if !lo.lt(&hi) {
            continue;
        }
        let mut survivors: Vec<(Scalar, Scalar)> = Vec::new();
        let parents: Box<dyn Iterator<Item = &(Scalar, Scalar)>> = match branch.orientation() {
            Orientation::Increasing => Box::new(node.survivors.iter()),
            Orientation::Decreasing => Box::new(node.survivors.iter().rev()),
        };
        for (slo, shi) in parents {
            survivors.extend(pull_back(branch, hole, slo, shi));
        }
        out.push(DiagNode { lo, hi, comp: node.comp.compose(branch.mobius()), survivors });
    }
    out
}

fn diag_walk(map: &PiecewiseMap, hole: &Hole, node: &DiagNode, level: usize, n: usize, stats: &mut [LevelDiag]) {
    stats[level - 1].record(node);
    if level == n {
        return;
    }
    for child in diag_children(map, hole, node) {
        diag_walk(map, hole, &child, level + 1, n, stats);
    }
}

/// Expansion and Lasota–Yorke diagnostics for levels `1..=n` in one pass
/// over the unrestricted cylinders. Without a hole the weight is `g ≡ 1`.
pub fn expansion_diagnostics_upto(
    map: &PiecewiseMap,
    hole: Option<&Hole>,
    n: usize,
    exec: Execution,
) -> Result<Vec<ExpansionDiagnostics>> {
    let empty = Hole::empty();
    let hole = hole.unwrap_or(&empty);
    validate(map, hole, n)?;
    let mode = map.mode();
    let top = DiagNode {
        lo: map.codomain().lo().clone(),
        hi: map.codomain().hi().clone(),
        comp: Moebius::identity(mode),
        survivors: vec![(map.codomain().lo().clone(), map.codomain().hi().clone())],
    };
    let mut stats: Vec<LevelDiag> = vec![LevelDiag::new(mode); n];
    let mut frontier = diag_children(map, hole, &top);
    let mut level = 1;
    while level < n && frontier.len() < SPLIT_TARGET {
        for node in &frontier {
            stats[level - 1].record(node);
        }
        frontier = frontier.iter().flat_map(|node| diag_children(map, hole, node)).collect();
        level += 1;
    }
    let start = level;
    let partial = map_slice(exec, &frontier, |node| {
        let mut local = vec![LevelDiag::new(mode); n];
        diag_walk(map, hole, node, start, n, &mut local);
        local
    });
    for local in partial {
        for (s, l) in stats.iter_mut().zip(&local) {
            s.merge(l);
        }
    }
    stats
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let k = i + 1;
            if s.cylinders == 0 {
                return Err(Error::EmptyPartition(k));
            }
            let kf = k as f64;
            Ok(ExpansionDiagnostics {
                n: k,
                theta_n: if s.any_survivor { 0.0 } else { f64::NEG_INFINITY },
                lambda_n: s.sup_d.ln() / kf,
                xi_n: s.sup_ratio.ln() / kf,
                a_n: s.a as f64,
                big_a_n: s.big_a.to_f64(),
                var_bound: s.var_bound,
                sup_derivative: s.sup_d,
                sup_ratio: s.sup_ratio,
            })
        })
        .collect()
}

/// Diagnostics at level `n`.
pub fn expansion_diagnostics(map: &PiecewiseMap, hole: Option<&Hole>, n: usize) -> Result<ExpansionDiagnostics> {
    let mut all = expansion_diagnostics_upto(map, hole, n, Execution::default())?;
    Ok(all.pop().expect("n >= 1"))
}

#[derive(Clone, Debug, Serialize)]
pub struct EngineValue {
    pub engine: String,
    pub entropy: f64,
    pub abs_diff_from_oracle: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EngineComparison {
    pub n: usize,
    pub oracle: f64,
    pub others: Vec<EngineValue>,
}

impl EngineComparison {
    /// Number of engines that produced a value, the oracle included.
    pub fn engine_count(&self) -> usize {
        1 + self.others.len()
    }

    pub fn get(&self, engine: &str) -> Option<f64> {
        if engine == "oracle" {
            return Some(self.oracle);
        }
        self.others.iter().find(|e| e.engine == engine).map(|e| e.entropy)
    }
}

/// The left endpoint `a` when the hole is `[a, 1]` for the doubling map.
pub(crate) fn left_hole_parameter(map: &PiecewiseMap, hole: &Hole) -> Option<Scalar> {
    if !map.is_doubling() || hole.pieces().len() != 1 {
        return None;
    }
    let (lo, hi) = &hole.pieces()[0];
    let half = Scalar::ratio(1, 2);
    (hi == &Scalar::int(1) && lo.gt(&half) && lo.lt(&Scalar::int(1))).then(|| lo.clone())
}

/// Oracle estimate at level `n` beside every other engine that applies.
pub fn compare_engines(map: &PiecewiseMap, hole: &Hole, n: usize) -> Result<EngineComparison> {
    let tree = refine(map, hole, n, RefineOptions::default())?;
    let oracle = entropy_estimate(&tree, n);
    let mut others = Vec::new();
    let mut push = |engine: &str, entropy: f64| {
        others.push(EngineValue { engine: engine.into(), entropy, abs_diff_from_oracle: (entropy - oracle).abs() });
    };
    if let Some(a) = left_hole_parameter(map, hole) {
        if let Ok(r) = kneading::entropy_left_hole(&a, kneading::DEFAULT_K, kneading::DEFAULT_TOL) {
            push("kneading", r.entropy);
        }
    }
    if map.mode().is_exact() {
        if let Ok(m) = markov::entropy_markov(map, hole, markov::DEFAULT_ORBIT_CAP, markov::DEFAULT_TOL) {
            push("markov", m.entropy);
        }
    }
    Ok(EngineComparison { n, oracle, others })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{build_d_adic, build_scaled_farey};

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn fib(n: usize) -> u64 {
        let (mut a, mut b) = (0u64, 1u64);
        for _ in 0..n {
            (a, b) = (b, a + b);
        }
        a
    }

    /// Binary words of length `n` without the factor "11".
    fn words_avoiding_11(n: usize) -> u64 {
        (0u32..1 << n).filter(|w| w & (w >> 1) == 0).count() as u64
    }

    #[test]
    fn fibonacci_counts() {
        let d = build_d_adic(2).unwrap();
        let h = Hole::interval(q(3, 4), q(1, 1)).unwrap();
        let t = refine(&d, &h, 16, RefineOptions::default()).unwrap();
        for n in 1..=16 {
            assert_eq!(t.count(n), fib(n + 2));
            assert_eq!(t.count(n), words_avoiding_11(n));
        }
        assert!((entropy_estimate(&t, 6) - (21f64).ln() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn full_shift_and_total_escape() {
        let d = build_d_adic(2).unwrap();
        let t = refine(&d, &Hole::empty(), 10, RefineOptions::default()).unwrap();
        for n in 1..=10 {
            assert_eq!(t.count(n), 1 << n);
            assert!((entropy_estimate(&t, n) - 2f64.ln()).abs() < 1e-12);
        }
        let all = Hole::interval(q(0, 1), q(1, 1)).unwrap();
        let t = refine(&d, &all, 5, RefineOptions::default()).unwrap();
        assert_eq!(t.counts, vec![0]);
        assert_eq!(t.count(5), 0);
        assert_eq!(entropy_estimate(&t, 5), 0.0);
    }

    #[test]
    fn kept_levels_match_counts_and_order() {
        let d = build_d_adic(2).unwrap();
        let h = Hole::interval(q(3, 4), q(5, 6)).unwrap();
        let kept = refine(&d, &h, 8, RefineOptions { keep_levels: true, ..Default::default() }).unwrap();
        let counted = refine(&d, &h, 8, RefineOptions::default()).unwrap();
        assert_eq!(kept.counts, counted.counts);
        for (k, level) in kept.levels.iter().enumerate() {
            let comps: Vec<&IntervalOpen> = level.iter().flat_map(|c| &c.components).collect();
            assert_eq!(comps.len() as u64, kept.counts[k]);
            for w in comps.windows(2) {
                assert!(w[0].hi().le(w[1].lo()));
            }
            for c in level {
                assert_eq!(c.level(), k + 1);
            }
        }
        // Level 1: (0,1/2) alone, then (1/2,3/4) and (5/6,1) share itinerary 1.
        assert_eq!(kept.levels[0].len(), 2);
        assert_eq!(kept.levels[0][1].components.len(), 2);
    }

    #[test]
    fn decreasing_branch_order() {
        let f = build_scaled_farey(q(1, 1)).unwrap();
        let t = refine(&f, &Hole::empty(), 6, RefineOptions { keep_levels: true, ..Default::default() }).unwrap();
        for level in &t.levels {
            let comps: Vec<&IntervalOpen> = level.iter().flat_map(|c| &c.components).collect();
            for w in comps.windows(2) {
                assert!(w[0].hi().le(w[1].lo()));
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let d = build_d_adic(2).unwrap();
        let opts = RefineOptions { cap: 100, ..Default::default() };
        assert!(matches!(refine(&d, &Hole::empty(), 10, opts), Err(Error::ResourceLimit(_))));
        let opts = RefineOptions { cap: 100, keep_levels: true, ..Default::default() };
        assert!(matches!(refine(&d, &Hole::empty(), 10, opts), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn pressure_examples() {
        let d = build_d_adic(2).unwrap();
        let h = Hole::interval(q(3, 4), q(1, 1)).unwrap();
        let one = LocallyConstantWeight::constant(&d, q(1, 1)).unwrap();
        let p = pressure_estimate(&d, &one, &h, 6).unwrap();
        assert!((p - 21f64.ln() / 6.0).abs() < 1e-15);
        let c = LocallyConstantWeight::constant(&d, q(3, 7)).unwrap();
        let p = pressure_estimate(&d, &c, &Hole::empty(), 7).unwrap();
        assert!((p - (2f64.ln() + (3.0f64 / 7.0).ln())).abs() < 1e-12);
        let z = LocallyConstantWeight::constant(&d, q(0, 1)).unwrap();
        assert_eq!(pressure_estimate(&d, &z, &Hole::empty(), 3).unwrap(), f64::NEG_INFINITY);
        assert!(LocallyConstantWeight::new(vec![q(-1, 2)]).is_err());
    }

    #[test]
    fn doubling_diagnostics() {
        let d = build_d_adic(2).unwrap();
        let diags = expansion_diagnostics_upto(&d, None, 8, Execution::Sequential).unwrap();
        for g in &diags {
            let two_n = Scalar::int(1 << g.n);
            assert_eq!(g.sup_derivative, two_n);
            assert_eq!(g.sup_ratio, two_n);
            assert!((g.lambda_n - 2f64.ln()).abs() < 1e-15);
            assert!((g.xi_n - 2f64.ln()).abs() < 1e-15);
            assert_eq!(g.theta_n, 0.0);
        }
        let h = Hole::interval(q(3, 4), q(1, 1)).unwrap();
        let g1 = expansion_diagnostics(&d, Some(&h), 1).unwrap();
        assert_eq!(g1.theta_n, 0.0);
        // Z = (1/2,1) keeps (1/2,3/4): one interior jump at 3/4.
        assert_eq!(g1.a_n, 4.0);
        assert_eq!(g1.var_bound, 4);
        assert!((g1.big_a_n - 8.0).abs() < 1e-12);
    }

    #[test]
    fn farey_expansion_at_level_one() {
        let f = build_scaled_farey(q(1, 1)).unwrap();
        let g = expansion_diagnostics(&f, None, 1).unwrap();
        assert_eq!(g.sup_derivative, q(4, 1));
        assert!((g.lambda_n - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn total_escape_theta() {
        let d = build_d_adic(2).unwrap();
        let all = Hole::interval(q(0, 1), q(1, 1)).unwrap();
        let g = expansion_diagnostics(&d, Some(&all), 2).unwrap();
        assert_eq!(g.theta_n, f64::NEG_INFINITY);
        assert_eq!(g.a_n, 0.0);
    }

    #[test]
    fn float_matches_exact_counts() {
        let d = build_d_adic(2).unwrap();
        let h = Hole::interval(q(3, 4), q(5, 6)).unwrap();
        let exact = refine(&d, &h, 12, RefineOptions::default()).unwrap();
        let df = crate::map::build_d_adic_in(2, Mode::float()).unwrap();
        let hf = Hole::interval(Scalar::float(0.75, 1e-12), Scalar::float(5.0 / 6.0, 1e-12)).unwrap();
        let float = refine(&df, &hf, 12, RefineOptions::default()).unwrap();
        assert_eq!(exact.counts, float.counts);
    }
}
