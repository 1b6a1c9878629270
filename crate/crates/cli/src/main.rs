//! `mrisr` command-line driver.
//!
//! Exit codes: 0 when every run completed, 2 when some rows failed (or a
//! verified method missed its stated order), 1 on usage or configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mrisr::harness::{
    run_adaptive, run_convergence, run_efficiency, run_stability_export, run_verify, verification_table,
};
use mrisr::problems::{parse_overrides, problem_names};
use mrisr::stability::{RegionScan, ScanKind, SectorSampling, SectorSpec};
use mrisr::tableau::{builtin_names, default_inner, inner_names, load_builtin, load_inner};
use mrisr::{ExperimentConfig, ExperimentKind, ExperimentRecord};

#[derive(Parser, Debug)]
#[command(name = "mrisr", version, about = "IMEX multirate stage-restart integrators and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the order conditions of builtin methods or tableau files.
    Verify(VerifyArgs),
    /// Fixed-step convergence study (default: kpr, H = π·2^-k).
    Converge(FixedArgs),
    /// Fixed-step efficiency study (default: brusselator-201, H = 0.1·2^-k).
    Efficiency(FixedArgs),
    /// Linear stability region scan written as CSV plus JSON.
    Stability(StabilityArgs),
    /// Adaptive tolerance sweep with per-step logs.
    Adaptive(AdaptiveArgs),
    /// List builtin methods, inner methods and problems.
    ListMethods(ListArgs),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Method name; repeat for several (default: all applicable builtins).
    #[arg(long = "method")]
    methods: Vec<String>,
    /// Inner method, either NAME for every method or METHOD=NAME.
    #[arg(long = "inner")]
    inner: Vec<String>,
    /// Write CSV and JSON outputs into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Recorded in the config echo; every experiment is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON experiment config; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Tableau JSON file to check; repeat for several.
    #[arg(long = "tableau")]
    tableaux: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Registered problem name.
    #[arg(long)]
    problem: Option<String>,
    /// Problem parameter override KEY=VALUE; repeat for several.
    #[arg(long = "set")]
    overrides: Vec<String>,
    /// Fast substep ratio M (initial M for adaptive runs).
    #[arg(long)]
    m: Option<usize>,
    /// Number of equally spaced measurement times.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug)]
struct FixedArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Base slow step; steps are H0·2^-k.
    #[arg(long = "H0")]
    h0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kmin: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    kmax: Option<i32>,
}

#[derive(Args, Debug)]
struct AdaptiveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Tolerances; repeat or separate with commas.
    #[arg(long = "tol", value_delimiter = ',')]
    tols: Vec<f64>,
    /// Controller exponents, e.g. k1=0.42,k2=0.44.
    #[arg(long)]
    controller: Option<String>,
    /// Initial slow step.
    #[arg(long = "H0")]
    h0: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Joint,
    Explicit,
    Implicit,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Fast sector ANGLE,RADIUS with the angle in degrees; repeat for several.
    #[arg(long = "fast")]
    fast: Vec<String>,
    /// Implicit sector ANGLE,RADIUS for joint scans; repeat for several.
    #[arg(long = "implicit")]
    implicit: Vec<String>,
    /// Window RE_MIN,RE_MAX,IM_MIN,IM_MAX.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Grid resolution N or NRE,NIM.
    #[arg(long)]
    resolution: Option<String>,
    /// Use the sparse sector sampling.
    #[arg(long)]
    coarse: bool,
}

#[derive(Args, Debug)]
struct ListArgs {
    #[arg(long)]
    json: bool,
}

fn floats(text: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("{what} `{text}` is not a list of numbers"))?;
    if v.len() != n {
        bail!("{what} `{text}` needs {n} comma-separated numbers");
    }
    Ok(v)
}

fn sector(text: &str) -> Result<SectorSpec> {
    let v = floats(text, 2, "sector")?;
    Ok(SectorSpec::new(v[0], v[1])?)
}

fn base_config(kind: ExperimentKind, common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.kind = kind;
    if !common.methods.is_empty() {
        cfg.methods = common.methods.clone();
    }
    for item in &common.inner {
        match item.split_once('=') {
            Some((m, i)) => {
                cfg.inner.insert(m.to_string(), i.to_string());
            }
            None => {
                let methods = if cfg.methods.is_empty() {
                    builtin_names().iter().map(|s| s.to_string()).collect()
                } else {
                    cfg.methods.clone()
                };
                for m in methods {
                    cfg.inner.insert(m, item.clone());
                }
            }
        }
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn apply_problem(cfg: &mut ExperimentConfig, p: &ProblemArgs) -> Result<()> {
    if p.problem.is_some() {
        cfg.problem = p.problem.clone();
    }
    for (k, v) in parse_overrides(&p.overrides)? {
        cfg.overrides.insert(k, v);
    }
    if let Some(m) = p.m {
        cfg.m = m;
    }
    if let Some(s) = p.samples {
        cfg.samples = s;
    }
    Ok(())
}

fn parse_controller(cfg: &mut ExperimentConfig, text: &str) -> Result<()> {
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| anyhow!("controller setting `{part}` is not key=value"))?;
        let v: f64 = v.trim().parse().with_context(|| format!("controller value `{v}`"))?;
        match k.trim() {
            "k1" => cfg.controller_k1 = Some(v),
            "k2" => cfg.controller_k2 = Some(v),
            other => bail!("unknown controller setting `{other}` (expected k1 or k2)"),
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"))
}

fn print_records(recs: &[ExperimentRecord], json: bool) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(recs)?);
        return Ok(());
    }
    for r in recs {
        println!("{} on {} (inner {})", r.method, r.problem, r.inner);
        let adaptive = r.kind == ExperimentKind::Adaptive;
        println!(
            "  {:>10} {:>11} {:>9} {:>12} {:>10} {:>8} {:>8}  fit",
            if adaptive { "tol" } else { "H" },
            "maxError",
            "runtime",
            "fastFEvals",
            "implicit",
            "accepted",
            "rejected"
        );
        for row in &r.rows {
            let x = if adaptive { row.tol } else { row.h };
            println!(
                "  {:>10} {:>11} {:>8.3}s {:>12} {:>10} {:>8} {:>8}  {}",
                fmt_opt(x),
                fmt_opt(row.max_error),
                row.runtime_seconds,
                row.fast_f_evals,
                row.implicit_solves,
                row.accepted,
                row.rejected,
                match (&row.failure, row.in_fit) {
                    (Some(f), _) => format!("failed: {f}"),
                    (None, true) => "yes".to_string(),
                    (None, false) => "no".to_string(),
                }
            );
        }
        let floor = if r.floor > 0.0 { format!(" (rows at or below {:.1e} excluded)", r.floor) } else { String::new() };
        println!("  slope: {}{floor}\n", r.slope.map_or_else(|| "-".to_string(), |s| format!("{s:.3}")));
    }
    Ok(())
}

fn print_scans(scans: &[RegionScan], json: bool) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(scans)?);
        return Ok(());
    }
    for s in scans {
        let implicit = s.implicit.map_or(String::new(), |i| format!(" implicit ({}°, {:e})", i.angle, i.radius));
        println!(
            "{} {:?} fast ({}°, {:e}){implicit}: {}/{} cells stable",
            s.method, s.kind, s.fast.angle, s.fast.radius, s.stable_cells, s.total_cells
        );
    }
    Ok(())
}

fn code(failed: bool) -> ExitCode {
    if failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn list_methods(json: bool) -> Result<ExitCode> {
    let mut methods = Vec::new();
    for name in builtin_names() {
        let t = load_builtin(name)?;
        methods.push(serde_json::json!({
            "name": name,
            "stages": t.stages(),
            "nOmega": t.n_omega(),
            "implicit": !t.is_explicit(),
            "embedding": t.has_embedding(),
            "defaultInner": default_inner(name),
        }));
    }
    let mut inner = Vec::new();
    for name in inner_names() {
        let b = load_inner(name)?;
        inner.push(serde_json::json!({ "name": name, "stages": b.stages(), "order": b.order, "embeddedOrder": b.emb_order }));
    }
    if json {
        let v = serde_json::json!({ "methods": methods, "inner": inner, "problems": problem_names() });
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!("methods:");
    for m in &methods {
        println!(
            "  {:<16} s={:<2} nΩ={} implicit={:<5} embedding={:<5} inner={}",
            m["name"].as_str().unwrap_or_default(),
            m["stages"],
            m["nOmega"],
            m["implicit"],
            m["embedding"],
            m["defaultInner"].as_str().unwrap_or("-")
        );
    }
    println!("inner methods:");
    for i in &inner {
        println!(
            "  {:<16} s={:<2} order={} embedded={}",
            i["name"].as_str().unwrap_or_default(),
            i["stages"],
            i["order"],
            i["embeddedOrder"]
        );
    }
    println!("problems:");
    for p in problem_names() {
        println!("  {p}");
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::ListMethods(a) => list_methods(a.json),
        Command::Verify(a) => {
            let mut cfg = base_config(ExperimentKind::Verify, &a.common)?;
            if !a.tableaux.is_empty() {
                cfg.tableau_files = a.tableaux.clone();
            }
            let rows = run_verify(&cfg)?;
            if a.common.json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                print!("{}", verification_table(&rows));
            }
            Ok(code(rows.iter().any(|r| !r.pass())))
        }
        Command::Converge(a) => fixed(ExperimentKind::Convergence, a),
        Command::Efficiency(a) => fixed(ExperimentKind::Efficiency, a),
        Command::Adaptive(a) => {
            let mut cfg = base_config(ExperimentKind::Adaptive, &a.common)?;
            apply_problem(&mut cfg, &a.problem)?;
            if !a.tols.is_empty() {
                cfg.tols = a.tols.clone();
            }
            if let Some(h0) = a.h0 {
                cfg.h0 = Some(h0);
            }
            if let Some(c) = &a.controller {
                parse_controller(&mut cfg, c)?;
            }
            let recs = run_adaptive(&cfg)?;
            print_records(&recs, a.common.json)?;
            Ok(code(recs.iter().any(ExperimentRecord::any_failed)))
        }
        Command::Stability(a) => {
            let mut cfg = base_config(ExperimentKind::Stability, &a.common)?;
            let st = &mut cfg.stability;
            if let Some(k) = a.kind {
                st.kind = match k {
                    KindArg::Joint => ScanKind::Joint,
                    KindArg::Explicit => ScanKind::Explicit,
                    KindArg::Implicit => ScanKind::Implicit,
                };
            }
            if !a.fast.is_empty() {
                st.fast = a.fast.iter().map(|s| sector(s)).collect::<Result<_>>()?;
            }
            if !a.implicit.is_empty() {
                st.implicit = a.implicit.iter().map(|s| sector(s)).collect::<Result<_>>()?;
            }
            if let Some(w) = &a.window {
                let v = floats(w, 4, "window")?;
                (st.window.re_min, st.window.re_max, st.window.im_min, st.window.im_max) = (v[0], v[1], v[2], v[3]);
            }
            if let Some(r) = &a.resolution {
                let v: Vec<usize> = r
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .with_context(|| format!("resolution `{r}`"))?;
                match v.as_slice() {
                    [n] => (st.window.n_re, st.window.n_im) = (*n, *n),
                    [a, b] => (st.window.n_re, st.window.n_im) = (*a, *b),
                    _ => bail!("resolution `{r}` must be N or NRE,NIM"),
                }
            }
            if a.coarse {
                st.sampling = SectorSampling::coarse();
            }
            let scans = run_stability_export(&cfg)?;
            print_scans(&scans, a.common.json)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn fixed(kind: ExperimentKind, a: FixedArgs) -> Result<ExitCode> {
    let mut cfg = base_config(kind, &a.common)?;
    apply_problem(&mut cfg, &a.problem)?;
    if a.h0.is_some() {
        cfg.h0 = a.h0;
    }
    if a.kmin.is_some() {
        cfg.kmin = a.kmin;
    }
    if a.kmax.is_some() {
        cfg.kmax = a.kmax;
    }
    let recs = match kind {
        ExperimentKind::Efficiency => run_efficiency(&cfg)?,
        _ => run_convergence(&cfg)?,
    };
    print_records(&recs, a.common.json)?;
    Ok(code(recs.iter().any(ExperimentRecord::any_failed)))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
