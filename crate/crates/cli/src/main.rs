//! `holed-entropy`: entropy of interval maps with holes from the command line.

mod input;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use holed_entropy::cylinder::{compare_engines, expansion_diagnostics_upto, refine, RefineOptions, DEFAULT_CAP};
use holed_entropy::emit::{counts_csv, sweep_csv, sweep_svg, write_text, PlotStyle};
use holed_entropy::regularity::{
    dyadic_scales, holder_estimate, holder_estimate_with_exponent, run_sweep, verify_holder_bound,
    verify_holder_bound_with_exponent, Engine, Family, Grid, HolderProblem, SweepSpec,
};
use holed_entropy::scalar::DEFAULT_EPS;
use holed_entropy::{build_d_adic, config, kneading, markov, par, Error, Execution, Scalar};

use input::{build_problem, exact, Problem};

#[derive(Parser, Debug)]
#[command(name = "holed-entropy", version, about = "Topological entropy of interval maps with holes")]
struct Cli {
    /// Worker threads for the parallel engines.
    #[arg(long, global = true, env = "HOLED_ENTROPY_THREADS")]
    threads: Option<usize>,

    /// Run every engine on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropy of one map and hole.
    Entropy(EntropyArgs),
    /// Entropy over a one-parameter family of holes.
    Sweep(SweepArgs),
    /// Boundary orbit and determinant for the doubling map with hole [a, 1].
    Tower(TowerArgs),
    /// Markov partition, transition matrix and leading-eigenvalue report.
    Spectrum(SpectrumArgs),
    /// Exact survivor-cylinder counts per level.
    Oracle(OracleArgs),
    /// Empirical Hölder check of the entropy at a parameter.
    Holder(HolderArgs),
    /// Expansion and Lasota–Yorke diagnostics, or the map configuration.
    Diag(DiagArgs),
}

#[derive(Args, Debug, Clone)]
struct MapArgs {
    /// `doubling`, `dadic`, `farey`, or a JSON configuration file.
    #[arg(long, default_value = "doubling")]
    map: String,
    /// `d` for `dadic`, `a` for `farey`.
    #[arg(long, allow_hyphen_values = true)]
    param: Option<String>,
    /// Closed pieces `lo,hi;lo,hi`. Overrides a hole in the configuration.
    #[arg(long, allow_hyphen_values = true)]
    hole: Option<String>,
    /// Float-mode comparison tolerance.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

impl MapArgs {
    fn problem(&self) -> Result<Problem, Error> {
        build_problem(&self.map, self.param.as_deref(), self.hole.as_deref(), self.eps)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EngineName {
    Auto,
    Kneading,
    Markov,
    Oracle,
}

#[derive(Args, Debug, Clone)]
struct EngineArgs {
    #[arg(long, value_enum, default_value = "auto")]
    engine: EngineName,
    /// Oracle depth.
    #[arg(long, default_value_t = 20)]
    depth: usize,
    /// Determinant truncation.
    #[arg(long = "k", default_value_t = kneading::DEFAULT_K)]
    k: usize,
    /// Root-finding tolerance for kneading, rank tolerance for markov.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = markov::DEFAULT_ORBIT_CAP)]
    orbit_cap: usize,
}

impl EngineArgs {
    fn engine(&self, which: EngineName) -> Engine {
        match which {
            EngineName::Kneading => Engine::Kneading { k: self.k, tol: self.tol.unwrap_or(kneading::DEFAULT_TOL) },
            EngineName::Markov | EngineName::Auto => {
                Engine::Markov { orbit_cap: self.orbit_cap, tol: self.tol.unwrap_or(markov::DEFAULT_TOL) }
            }
            EngineName::Oracle => Engine::Oracle { n: self.depth },
        }
    }
}

#[derive(Args, Debug)]
struct EntropyArgs {
    #[command(flatten)]
    map: MapArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Print a JSON object instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FamilyName {
    Left,
    Sliding,
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value = "left")]
    family: FamilyName,
    /// Width of the sliding hole.
    #[arg(long, default_value = "1/12")]
    width: String,
}

impl FamilyArgs {
    fn family(&self) -> Result<Family, Error> {
        Ok(match self.family {
            FamilyName::Left => Family::LeftHole,
            FamilyName::Sliding => Family::sliding(exact(&self.width)?),
        })
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Grid start (decimals are read exactly).
    #[arg(long)]
    start: String,
    #[arg(long)]
    end: String,
    #[arg(long, default_value_t = 129)]
    count: usize,
    /// Dyadic snapping of grid points; 0 keeps them exact.
    #[arg(long, default_value_t = holed_entropy::regularity::DEFAULT_SNAP_BITS)]
    snap_bits: u32,
    /// Extra exact grid points.
    #[arg(long = "include")]
    include: Vec<String>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Engine tried where the main one fails.
    #[arg(long, value_enum)]
    fallback: Option<EngineName>,
    /// CSV output; stdout when neither this nor --json is given.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Add an `s_exact` column with `num/den` values.
    #[arg(long)]
    exact_column: bool,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Leave the timestamp out of the JSON metadata.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args, Debug)]
struct TowerArgs {
    /// Left endpoint of the hole `[a, 1]`, 1/2 < a < 1.
    #[arg(long)]
    a: String,
    #[arg(long, default_value_t = kneading::DEFAULT_K)]
    k_cap: usize,
    #[arg(long = "k")]
    k: Option<usize>,
    #[arg(long, default_value_t = kneading::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Number of orbit points to print.
    #[arg(long, default_value_t = 64)]
    show: usize,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, default_value_t = markov::DEFAULT_ORBIT_CAP)]
    orbit_cap: usize,
    #[arg(long, default_value_t = markov::DEFAULT_TOL)]
    tol: f64,
    /// Write the transition graph in DOT format.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// JSON output path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, default_value_t = 12)]
    depth: usize,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// CSV output path instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the oracle beside the other applicable engines as JSON.
    #[arg(long)]
    compare: bool,
}

#[derive(Args, Debug)]
struct HolderArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value = "3/4")]
    t: String,
    /// Pole order; read off the engine at `t` when omitted.
    #[arg(long)]
    p: Option<usize>,
    /// Expansion rate Ξ; log 2 by default.
    #[arg(long)]
    xi: Option<f64>,
    /// Offsets run from 2^-from down to 2^-to.
    #[arg(long, default_value_t = 6)]
    from: u32,
    #[arg(long, default_value_t = 16)]
    to: u32,
    #[command(flatten)]
    engine: EngineArgs,
    /// Added to the target exponent.
    #[arg(long, allow_hyphen_values = true)]
    exponent_offset: Option<f64>,
    /// Report pass/fail of the per-mesh stability check.
    #[arg(long)]
    verify: bool,
}

#[derive(Args, Debug)]
struct DiagArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Print the map and hole as a JSON configuration instead.
    #[arg(long)]
    dump_config: bool,
}

/// Exit 2 for bad input, 3 for engine failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_input_error() => 2,
        Some(Error::Io { .. } | Error::Format(_)) => 2,
        Some(_) => 3,
        None => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        par::init_threads(n);
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(write_text(p, text)?),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).context("writing to stdout")?;
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn run(command: Command, exec: Execution) -> Result<()> {
    match command {
        Command::Entropy(a) => entropy(a),
        Command::Sweep(a) => sweep(a, exec),
        Command::Tower(a) => tower(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Oracle(a) => oracle(a, exec),
        Command::Holder(a) => holder(a, exec),
        Command::Diag(a) => diag(a, exec),
    }
}

fn entropy(args: EntropyArgs) -> Result<()> {
    let pr = args.map.problem()?;
    let e = &args.engine;
    let which = match e.engine {
        EngineName::Auto if pr.left_hole_a().is_some() => EngineName::Kneading,
        EngineName::Auto if !pr.is_float() => EngineName::Markov,
        EngineName::Auto => EngineName::Oracle,
        other => other,
    };
    let (entropy, p, error_bound, detail) = match which {
        EngineName::Kneading => {
            let a = pr.left_hole_a().ok_or_else(|| {
                Error::InvalidParameter("kneading engine needs --map doubling with --hole a,1 and 1/2 < a < 1".into())
            })?;
            let r = kneading::entropy_left_hole(&a, e.k, e.tol.unwrap_or(kneading::DEFAULT_TOL))?;
            (r.entropy, Some(r.p), r.error_bound, json!({ "termination": r.termination, "r": r.r }))
        }
        _ => {
            let v = e.engine(which).evaluate(&pr.map, &pr.hole)?;
            (v.entropy, v.p, v.error_bound, serde_json::Value::Null)
        }
    };
    let name = e.engine(which).name();
    if args.json {
        let v = json!({ "engine": name, "entropy": entropy, "p": p, "error_bound": error_bound, "detail": detail });
        emit(None, &pretty(&v))
    } else {
        let mut s = format!("entropy = {entropy}\n");
        match p {
            Some(p) => s.push_str(&format!("p = {p}\n")),
            None => s.push_str("p = unknown\n"),
        }
        let bound = if error_bound == 0.0 { "0".to_string() } else { format!("{error_bound:.3e}") };
        s.push_str(&format!("engine = {name}\nerror_bound = {bound}\n"));
        emit(None, &s)
    }
}

fn sweep(args: SweepArgs, exec: Execution) -> Result<()> {
    let family = args.family.family()?;
    let mut grid = Grid::uniform(exact(&args.start)?, exact(&args.end)?, args.count);
    grid.snap_bits = (args.snap_bits > 0).then_some(args.snap_bits);
    for s in &args.include {
        grid = grid.with_point(exact(s)?);
    }
    let engine = match args.engine.engine {
        EngineName::Auto if family == Family::LeftHole => args.engine.engine(EngineName::Kneading),
        other => args.engine.engine(other),
    };
    let spec = SweepSpec {
        fallback: args.fallback.map(|f| args.engine.engine(f)),
        execution: exec,
        ..SweepSpec::doubling(family, grid, engine)
    };
    let mut result = run_sweep(&spec)?;
    if !args.deterministic {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        result.metadata.timestamp = Some(format!("{secs}"));
    }
    let flagged = result.rows.iter().filter(|r| !r.is_ok()).count();
    if flagged > 0 {
        eprintln!("warning: {flagged} of {} grid points flagged", result.rows.len());
    }
    let csv = sweep_csv(&result, args.exact_column)?;
    if let Some(p) = &args.csv {
        write_text(p, &csv)?;
    }
    if let Some(p) = &args.svg {
        let style = PlotStyle {
            title: format!("Doubling map, {} family", spec.family.name()),
            x_label: "hole parameter s".into(),
            ..PlotStyle::default()
        };
        write_text(p, &sweep_svg(&result, &style)?)?;
    }
    if let Some(p) = &args.json {
        write_text(p, &pretty(&result))?;
    }
    if args.csv.is_none() && args.json.is_none() {
        emit(None, &csv)?;
    }
    Ok(())
}

fn tower(args: TowerArgs) -> Result<()> {
    let a = Scalar::parse(&args.a, args.eps)?;
    if !a.mode().is_exact() {
        eprintln!("warning: decimal a implies float mode (eps = {:e}); the orbit is not classified", args.eps);
    }
    let orbit = kneading::build_orbit(&a, args.k_cap)?;
    let k = args.k.unwrap_or(args.k_cap);
    let series = kneading::determinant(&orbit, k)?;
    let root = kneading::leading_root(&series, args.tol)?;
    let shown: Vec<String> = orbit.points.iter().take(args.show).map(|p| p.to_string()).collect();
    let v = json!({
        "a": orbit.a,
        "termination": orbit.termination.to_string(),
        "approximate": orbit.approximate,
        "points": shown,
        "points_total": orbit.points.len(),
        "index_set_A": orbit.index_set_a.iter().take(args.show).collect::<Vec<_>>(),
        "closed_form": series.closed_form,
        "truncated": series.truncated,
        "K": series.k,
        "r": root.r,
        "entropy": root.entropy,
        "error_bound": root.error_bound,
        "residual": root.residual,
        "p": 1,
    });
    emit(None, &pretty(&v))
}

fn spectrum(args: SpectrumArgs) -> Result<()> {
    let pr = args.map.problem()?;
    let m = markov::entropy_markov(&pr.map, &pr.hole, args.orbit_cap, args.tol)?;
    if let Some(p) = &args.dot {
        write_text(p, &m.to_dot())?;
    }
    let mut v = m.to_json();
    v["second_eigenvalue_modulus"] = json!(m.report.second_eigenvalue_modulus);
    v["rho_poly"] = json!(m.report.rho_poly);
    v["rank_method"] = json!(if m.report.exact { "exact" } else { "numerical" });
    emit(args.out.as_ref(), &pretty(&v))
}

fn oracle(args: OracleArgs, exec: Execution) -> Result<()> {
    let pr = args.map.problem()?;
    if args.compare {
        let c = compare_engines(&pr.map, &pr.hole, args.depth)?;
        return emit(args.csv.as_ref(), &pretty(&c));
    }
    let opts = RefineOptions { cap: args.cap, keep_levels: false, execution: exec };
    let tree = refine(&pr.map, &pr.hole, args.depth, opts)?;
    emit(args.csv.as_ref(), &counts_csv(&tree)?)
}

fn holder(args: HolderArgs, exec: Execution) -> Result<()> {
    let family = args.family.family()?;
    let t = exact(&args.t)?;
    let which = match args.engine.engine {
        EngineName::Auto if family == Family::LeftHole => EngineName::Kneading,
        other => other,
    };
    let engine = args.engine.engine(which);
    let map = build_d_adic(2)?;
    let p = match args.p {
        Some(p) => p,
        None => engine.evaluate(&map, &family.hole_at(&t)?)?.p.unwrap_or(1),
    };
    if args.from >= args.to {
        return Err(Error::InvalidParameter("--from must be below --to".into()).into());
    }
    let pr = HolderProblem {
        map,
        family,
        engine,
        t,
        p,
        xi: args.xi.unwrap_or(std::f64::consts::LN_2),
        scales: dyadic_scales(args.from, args.to),
        execution: exec,
    };
    let base = holder_estimate(&pr)?;
    let alpha = args.exponent_offset.map(|d| base.alpha_target + d);
    let text = match (args.verify, alpha) {
        (true, Some(a)) => pretty(&verify_holder_bound_with_exponent(&pr, a)?),
        (true, None) => pretty(&verify_holder_bound(&pr)?),
        (false, Some(a)) => pretty(&holder_estimate_with_exponent(&pr, a)?),
        (false, None) => pretty(&base),
    };
    emit(None, &text)
}

fn diag(args: DiagArgs, exec: Execution) -> Result<()> {
    let pr = args.map.problem()?;
    if args.dump_config {
        return emit(None, &config::dump_config(&pr.map, &pr.hole));
    }
    let hole = (!pr.hole.is_empty()).then_some(&pr.hole);
    let d = expansion_diagnostics_upto(&pr.map, hole, args.depth, exec)?;
    emit(None, &pretty(&d))
}
