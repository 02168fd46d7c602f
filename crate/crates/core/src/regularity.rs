//! Entropy sweeps over one-parameter hole families and empirical Hölder
//! checks at a parameter.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cylinder::{entropy_estimate, refine, RefineOptions};
use crate::error::{Error, Result};
use crate::hole::Hole;
use crate::kneading;
use crate::map::{build_d_adic, PiecewiseMap};
use crate::markov;
use crate::par::{map_slice, Execution};
use crate::scalar::{format_rational, rational_to_f64, round_dyadic, serialize_rational, Scalar};

/// Grid points are snapped to multiples of `2^-DEFAULT_SNAP_BITS`.
pub const DEFAULT_SNAP_BITS: u32 = 20;
/// Mesh-to-mesh growth of the Hölder constant tolerated by the check.
pub const STABILITY_FACTOR: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `s ↦ [s, 1]`.
    LeftHole,
    /// `s ↦ [s, s + width]`.
    SlidingHole {
        #[serde(serialize_with = "serialize_rational")]
        width: BigRational,
    },
    /// Explicit holes indexed by parameter value.
    Custom {
        #[serde(skip)]
        holes: Vec<(BigRational, Hole)>,
    },
}

impl Family {
    pub fn sliding(width: BigRational) -> Family {
        Family::SlidingHole { width }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::LeftHole => "left-hole",
            Family::SlidingHole { .. } => "sliding-hole",
            Family::Custom { .. } => "custom",
        }
    }

    pub fn hole_at(&self, s: &BigRational) -> Result<Hole> {
        let exact = |q: &BigRational| Scalar::from_rational(q.clone());
        match self {
            Family::LeftHole => Hole::interval(exact(s), Scalar::int(1)),
            Family::SlidingHole { width } => Hole::interval(exact(s), exact(&(s + width))),
            Family::Custom { holes } => holes
                .iter()
                .find(|(t, _)| t == s)
                .map(|(_, h)| h.clone())
                .ok_or_else(|| Error::InvalidParameter(format!("no custom hole at s = {}", format_rational(s)))),
        }
    }

    /// Admissible open parameter range, when the family has one.
    pub fn range(&self) -> Option<(BigRational, BigRational)> {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        match self {
            Family::LeftHole => Some((q(1, 2), q(1, 1))),
            Family::SlidingHole { width } => Some((q(0, 1), q(1, 1) - width)),
            Family::Custom { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "engine", rename_all = "lowercase")]
pub enum Engine {
    Kneading { k: usize, tol: f64 },
    Markov { orbit_cap: usize, tol: f64 },
    Oracle { n: usize },
}

impl Engine {
    pub fn kneading() -> Engine {
        Engine::Kneading { k: kneading::DEFAULT_K, tol: kneading::DEFAULT_TOL }
    }

    pub fn markov() -> Engine {
        Engine::Markov { orbit_cap: markov::DEFAULT_ORBIT_CAP, tol: markov::DEFAULT_TOL }
    }

    pub fn oracle(n: usize) -> Engine {
        Engine::Oracle { n }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Kneading { .. } => "kneading",
            Engine::Markov { .. } => "markov",
            Engine::Oracle { .. } => "oracle",
        }
    }

    /// Entropy of `map` with `hole`.
    pub fn evaluate(&self, map: &PiecewiseMap, hole: &Hole) -> Result<Evaluation> {
        match *self {
            Engine::Kneading { k, tol } => {
                let a = crate::cylinder::left_hole_parameter(map, hole).ok_or_else(|| {
                    Error::InvalidParameter(
                        "kneading engine needs the doubling map with a hole [a, 1], 1/2 < a < 1".into(),
                    )
                })?;
                let r = kneading::entropy_left_hole(&a, k, tol)?;
                Ok(Evaluation { entropy: r.entropy, p: Some(r.p), error_bound: r.error_bound })
            }
            Engine::Markov { orbit_cap, tol } => {
                let r = markov::entropy_markov(map, hole, orbit_cap, tol)?;
                Ok(Evaluation { entropy: r.entropy, p: Some(r.report.pole_order_p), error_bound: 0.0 })
            }
            Engine::Oracle { n } => {
                if n < 2 {
                    return Err(Error::InvalidParameter("oracle depth must be at least 2".into()));
                }
                let tree =
                    refine(map, hole, n, RefineOptions { execution: Execution::Sequential, ..Default::default() })?;
                let h = entropy_estimate(&tree, n);
                let prev = entropy_estimate(&tree, n - 1);
                Ok(Evaluation { entropy: h, p: None, error_bound: (h - prev).abs() })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub entropy: f64,
    pub p: Option<usize>,
    /// Engine-specific: root bracket plus truncation for kneading, 0 for the
    /// exact Markov spectrum, and the last level-to-level change for the
    /// oracle.
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    #[serde(serialize_with = "serialize_rational")]
    pub start: BigRational,
    #[serde(serialize_with = "serialize_rational")]
    pub end: BigRational,
    pub count: usize,
    /// Snap interior points to dyadic rationals with this many bits.
    pub snap_bits: Option<u32>,
    /// Extra points merged into the grid.
    #[serde(skip)]
    pub extra: Vec<BigRational>,
}

impl Grid {
    pub fn uniform(start: BigRational, end: BigRational, count: usize) -> Grid {
        Grid { start, end, count, snap_bits: Some(DEFAULT_SNAP_BITS), extra: Vec::new() }
    }

    pub fn with_point(mut self, s: BigRational) -> Grid {
        self.extra.push(s);
        self
    }

    /// Sorted, deduplicated parameter values.
    pub fn points(&self) -> Result<Vec<BigRational>> {
        if self.count < 2 {
            return Err(Error::InvalidParameter(format!("grid needs at least 2 points, got {}", self.count)));
        }
        if self.start >= self.end {
            return Err(Error::InvalidParameter("grid start must be below its end".into()));
        }
        let steps = BigRational::from_integer((self.count - 1).into());
        let span = &self.end - &self.start;
        let mut pts: Vec<BigRational> = (0..self.count)
            .map(|i| {
                let s = &self.start + &span * BigRational::from_integer(i.into()) / &steps;
                match self.snap_bits {
                    Some(bits) => round_dyadic(&s, bits),
                    None => s,
                }
            })
            .collect();
        pts.extend(self.extra.iter().cloned());
        pts.sort();
        pts.dedup();
        Ok(pts)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    #[serde(skip)]
    pub map: PiecewiseMap,
    pub family: Family,
    pub grid: Grid,
    pub engine: Engine,
    /// Tried at points where `engine` fails.
    pub fallback: Option<Engine>,
    #[serde(skip)]
    pub execution: Execution,
}

impl SweepSpec {
    /// Doubling map sweep.
    pub fn doubling(family: Family, grid: Grid, engine: Engine) -> SweepSpec {
        SweepSpec {
            map: build_d_adic(2).expect("doubling map"),
            family,
            grid,
            engine,
            fallback: None,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(serialize_with = "serialize_rational")]
    pub s: BigRational,
    pub entropy: Option<f64>,
    pub p: Option<usize>,
    pub engine: String,
    pub error_bound: Option<f64>,
    /// `ok`, or the failure that flagged this row.
    pub status: String,
}

impl SweepRow {
    pub fn s_f64(&self) -> f64 {
        rational_to_f64(&self.s)
    }

    pub fn is_ok(&self) -> bool {
        self.entropy.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub family: Family,
    pub engine: Engine,
    pub fallback: Option<Engine>,
    pub grid: Grid,
    /// Left empty for reproducible output.
    pub timestamp: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn entropies(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.entropy).collect()
    }

    pub fn row_at(&self, s: &BigRational) -> Option<&SweepRow> {
        self.rows.iter().find(|r| &r.s == s)
    }
}

fn evaluate_point(spec: &SweepSpec, s: &BigRational) -> SweepRow {
    let hole = match spec.family.hole_at(s) {
        Ok(h) => h,
        Err(e) => return flagged(s, spec.engine.name(), &e),
    };
    let mut result = spec.engine.evaluate(&spec.map, &hole).map(|v| (spec.engine.name(), v));
    if let (Err(_), Some(fb)) = (&result, &spec.fallback) {
        if let Ok(v) = fb.evaluate(&spec.map, &hole) {
            result = Ok((fb.name(), v));
        }
    }
    match result {
        Ok((engine, v)) => SweepRow {
            s: s.clone(),
            entropy: Some(v.entropy),
            p: v.p,
            engine: engine.into(),
            error_bound: Some(v.error_bound),
            status: "ok".into(),
        },
        Err(e) => flagged(s, spec.engine.name(), &e),
    }
}

fn flagged(s: &BigRational, engine: &str, e: &Error) -> SweepRow {
    SweepRow { s: s.clone(), entropy: None, p: None, engine: engine.into(), error_bound: None, status: e.to_string() }
}

/// Evaluate the engine on every grid point. Failing points are flagged and
/// the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let points = match &spec.family {
        Family::Custom { holes } => {
            let mut pts: Vec<BigRational> = holes.iter().map(|(s, _)| s.clone()).collect();
            pts.sort();
            pts.dedup();
            pts
        }
        family => {
            let pts = spec.grid.points()?;
            if let Some((lo, hi)) = family.range() {
                if pts.first().is_some_and(|s| s <= &lo) || pts.last().is_some_and(|s| s >= &hi) {
                    return Err(Error::InvalidParameter(format!(
                        "{} grid must lie in ({}, {})",
                        family.name(),
                        format_rational(&lo),
                        format_rational(&hi)
                    )));
                }
            }
            pts
        }
    };
    if points.is_empty() {
        return Err(Error::InvalidParameter("sweep has no points".into()));
    }
    let rows = map_slice(spec.execution, &points, |s| evaluate_point(spec, s));
    Ok(SweepResult {
        metadata: SweepMetadata {
            family: spec.family.clone(),
            engine: spec.engine.clone(),
            fallback: spec.fallback.clone(),
            grid: spec.grid.clone(),
            timestamp: None,
        },
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct HolderProblem {
    pub map: PiecewiseMap,
    pub family: Family,
    pub engine: Engine,
    pub t: BigRational,
    pub p: usize,
    pub xi: f64,
    /// Offsets `|s − t|`, strictly decreasing.
    pub scales: Vec<BigRational>,
    pub execution: Execution,
}

impl HolderProblem {
    /// Doubling map (`Ξ = log 2`) with offsets `2^-lo, …, 2^-hi`.
    pub fn doubling(family: Family, engine: Engine, t: BigRational, p: usize, lo: u32, hi: u32) -> HolderProblem {
        HolderProblem {
            map: build_d_adic(2).expect("doubling map"),
            family,
            engine,
            t,
            p,
            xi: std::f64::consts::LN_2,
            scales: dyadic_scales(lo, hi),
            execution: Execution::default(),
        }
    }
}

/// `2^-lo, 2^-(lo+1), …, 2^-hi`.
pub fn dyadic_scales(lo: u32, hi: u32) -> Vec<BigRational> {
    (lo..=hi).map(|k| BigRational::new(BigRational::one().to_integer(), num_bigint::BigInt::one() << k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderSample {
    pub delta: f64,
    pub h_minus: Option<f64>,
    pub h_plus: Option<f64>,
    pub max_diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderEstimate {
    #[serde(serialize_with = "serialize_rational")]
    pub t: BigRational,
    pub h_t: f64,
    pub alpha_target: f64,
    /// Exponent used for the constants (the target unless overridden).
    pub alpha_used: f64,
    pub fitted_exponent: Option<f64>,
    pub fit_residual: Option<f64>,
    #[serde(rename = "constant_C")]
    pub constant_c: f64,
    pub mesh_sizes: Vec<f64>,
    #[serde(rename = "C_per_mesh")]
    pub c_per_mesh: Vec<f64>,
    pub samples: Vec<HolderSample>,
    /// `h(t) = 0`: the exponent is 0 and nothing was sampled.
    pub skipped: bool,
    pub locally_constant: bool,
    pub note: Option<String>,
}

fn check_problem(pr: &HolderProblem) -> Result<()> {
    if pr.scales.len() < 2 {
        return Err(Error::InvalidParameter("need at least two scales".into()));
    }
    if pr.scales.iter().any(|d| !d.is_positive()) || pr.scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("scales must be positive and strictly decreasing".into()));
    }
    if pr.p == 0 {
        return Err(Error::InvalidParameter("pole order p must be at least 1".into()));
    }
    if pr.xi.is_nan() || pr.xi <= 0.0 {
        return Err(Error::InvalidParameter("expansion rate must be positive".into()));
    }
    Ok(())
}

/// Samples `h(t ± δ)` over all scales and reports per-mesh constants for
/// the exponent `h(t)/(p·Ξ)`.
pub fn holder_estimate(pr: &HolderProblem) -> Result<HolderEstimate> {
    estimate(pr, None)
}

/// As [`holder_estimate`] but with the constants computed for `alpha`.
pub fn holder_estimate_with_exponent(pr: &HolderProblem, alpha: f64) -> Result<HolderEstimate> {
    estimate(pr, Some(alpha))
}

fn estimate(pr: &HolderProblem, alpha: Option<f64>) -> Result<HolderEstimate> {
    check_problem(pr)?;
    let h_t = pr.engine.evaluate(&pr.map, &pr.family.hole_at(&pr.t)?)?.entropy;
    let alpha_target = h_t / (pr.p as f64 * pr.xi);
    let mesh_sizes: Vec<f64> = pr.scales.iter().map(rational_to_f64).collect();
    if h_t <= 0.0 {
        return Ok(HolderEstimate {
            t: pr.t.clone(),
            h_t,
            alpha_target: 0.0,
            alpha_used: alpha.unwrap_or(0.0),
            fitted_exponent: None,
            fit_residual: None,
            constant_c: 0.0,
            mesh_sizes,
            c_per_mesh: Vec::new(),
            samples: Vec::new(),
            skipped: true,
            locally_constant: false,
            note: Some("h(t) = 0: Hölder exponent is 0".into()),
        });
    }
    let alpha_used = alpha.unwrap_or(alpha_target);
    let range = pr.family.range();
    let offsets: Vec<BigRational> = pr.scales.iter().flat_map(|d| [&pr.t - d, &pr.t + d]).collect();
    let values = map_slice(pr.execution, &offsets, |s| {
        if range.as_ref().is_some_and(|(lo, hi)| s <= lo || s >= hi) {
            return None;
        }
        let hole = pr.family.hole_at(s).ok()?;
        pr.engine.evaluate(&pr.map, &hole).ok().map(|v| v.entropy)
    });
    let mut samples = Vec::new();
    let mut c_per_mesh = Vec::new();
    for (i, &delta) in mesh_sizes.iter().enumerate() {
        let (h_minus, h_plus) = (values[2 * i], values[2 * i + 1]);
        if h_minus.is_none() && h_plus.is_none() {
            return Err(Error::InvalidParameter(format!("no admissible sample at offset {delta}")));
        }
        let max_diff = [h_minus, h_plus].iter().flatten().map(|h| (h - h_t).abs()).fold(0.0, f64::max);
        c_per_mesh.push(max_diff / delta.powf(alpha_used));
        samples.push(HolderSample { delta, h_minus, h_plus, max_diff });
    }
    let locally_constant = samples.iter().all(|s| s.max_diff <= 1e-14);
    let (fitted_exponent, fit_residual) = match fit_loglog(&samples) {
        Some((slope, res)) if !locally_constant => (Some(slope), Some(res)),
        _ => (None, None),
    };
    Ok(HolderEstimate {
        t: pr.t.clone(),
        h_t,
        alpha_target,
        alpha_used,
        fitted_exponent,
        fit_residual,
        constant_c: c_per_mesh.iter().copied().fold(0.0, f64::max),
        mesh_sizes,
        c_per_mesh,
        samples,
        skipped: false,
        locally_constant,
        note: locally_constant.then(|| "locally constant: exponent undefined".into()),
    })
}

/// Least-squares slope of `log max_diff` against `log δ`, with the RMS
/// residual. Samples with zero difference are left out.
fn fit_loglog(samples: &[HolderSample]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        samples.iter().filter(|s| s.max_diff > 0.0).map(|s| (s.delta.ln(), s.max_diff.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Some((slope, rms))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderVerdict {
    pub passed: bool,
    pub reason: String,
    /// Largest `C(finer) / C(coarser)` over all pairs of meshes.
    pub max_growth: f64,
    pub estimate: HolderEstimate,
}

/// Pass iff every per-mesh constant is finite, some is positive, and no
/// finer mesh exceeds a coarser one by more than [`STABILITY_FACTOR`].
pub fn verify_holder_bound(pr: &HolderProblem) -> Result<HolderVerdict> {
    Ok(judge(holder_estimate(pr)?))
}

pub fn verify_holder_bound_with_exponent(pr: &HolderProblem, alpha: f64) -> Result<HolderVerdict> {
    Ok(judge(holder_estimate_with_exponent(pr, alpha)?))
}

fn judge(estimate: HolderEstimate) -> HolderVerdict {
    let verdict = |passed: bool, reason: &str, max_growth: f64, estimate: HolderEstimate| HolderVerdict {
        passed,
        reason: reason.into(),
        max_growth,
        estimate,
    };
    if estimate.skipped {
        return verdict(false, "h(t) = 0, nothing to check", f64::NAN, estimate);
    }
    if estimate.locally_constant {
        return verdict(false, "locally constant: exponent undefined", f64::NAN, estimate);
    }
    let c = &estimate.c_per_mesh;
    if c.iter().any(|x| !x.is_finite()) {
        return verdict(false, "non-finite constant", f64::INFINITY, estimate);
    }
    let mut growth: f64 = 0.0;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            let g = if c[j] == 0.0 {
                0.0
            } else if c[i] == 0.0 {
                f64::INFINITY
            } else {
                c[j] / c[i]
            };
            growth = growth.max(g);
        }
    }
    if growth <= STABILITY_FACTOR {
        verdict(true, "constant stable under mesh refinement", growth, estimate)
    } else {
        verdict(false, "constant grows under mesh refinement", growth, estimate)
    }
}

/// `max |h(s) − h(t)| / |s − t|^alpha` over the rows of a sweep.
pub fn sweep_constant(result: &SweepResult, t: &BigRational, alpha: f64) -> Option<f64> {
    let h_t = result.row_at(t)?.entropy?;
    result
        .rows
        .iter()
        .filter(|r| &r.s != t)
        .filter_map(|r| {
            let d = rational_to_f64(&(&r.s - t).abs());
            r.entropy.map(|h| (h - h_t).abs() / d.powf(alpha))
        })
        .reduce(f64::max)
}

/// Whether `h` is non-decreasing along the sweep within `tol`, ignoring
/// flagged rows.
pub fn is_monotone(result: &SweepResult, tol: f64) -> bool {
    let hs: Vec<f64> = result.rows.iter().filter_map(|r| r.entropy).collect();
    hs.windows(2).all(|w| w[1] >= w[0] - tol)
}

/// `hole_dist(H_s1, H_s2)`: `|s1 − s2|` for left holes and
/// `min(2|s1 − s2|, 2w)` for sliding holes of width `w`.
pub fn family_dist(family: &Family, s1: &BigRational, s2: &BigRational) -> Result<BigRational> {
    let d = crate::hole::hole_dist(&family.hole_at(s1)?, &family.hole_at(s2)?)?;
    Ok(d.as_rational().cloned().unwrap_or_else(BigRational::zero))
}
