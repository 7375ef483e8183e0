// SPDX-License-Identifier: MIT OR Apache-2.0

//! `cohom`: solve coboundary equations and verify estimates from the command line.
//!
//! Exit codes: 0 on success, 1 on invalid input or usage, 2 when a tolerance
//! gate fails (precondition defect, residual, closedness, or a failing verify suite).

use clap::{Args, Parser, Subcommand, ValueEnum};
use cohom_core::distributions::{max_kernel_defect, DEFAULT_DEFECT_TOL};
use cohom_core::forms::{
    exterior_derivative, index_sets, primitive_residual, solve_primitive, DifferentialForm, PrimitiveOptions,
    PrimitiveStrategy, FORM_SCHEMA,
};
use cohom_core::lemma_lab::{report_csv, verify_suites, DEFAULT_MAX_K, SUITES};
use cohom_core::random::{coboundary, interior_tensor};
use cohom_core::rep_core::TENSOR_SCHEMA;
use cohom_core::solver1d::{backend_disagreement, solve_1d, Backend};
use cohom_core::solver_nd::{residual, sobolev_index, solve_top, top_report, top_report_csv, TopOptions};
use cohom_core::tensor_ops::{split_with_report, verify_split_kernels, SplitWeight};
use cohom_core::{classify, CoeffTensor, CohomError, IrrepParams, SeriesHint, TensorParams, Window};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "cohom",
    version,
    about = "Coboundary solvers for products of SL(2,R) representations"
)]
struct Cli {
    /// Seed for every randomly generated instance.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker thread cap; output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Representation parameters and basis data.
    Rep {
        #[command(subcommand)]
        cmd: RepCmd,
    },
    /// Solve X g = f on one factor.
    Solve1d(Solve1dArgs),
    /// Independent reference solvers.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Split f into its bold-slice part f1 and remainder f_mu.
    Split(SplitArgs),
    /// Solve X_1 g_1 + ... + X_d g_d = f.
    SolveTop(SolveTopArgs),
    /// Solve d eta = omega for a closed form.
    Primitive(PrimitiveArgs),
    /// Grid verification of the lemma suites.
    Verify(VerifyArgs),
    /// Write random test inputs (seeded).
    Generate {
        #[command(subcommand)]
        cmd: GenerateCmd,
    },
    /// Time the core kernels and print CSV.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum RepCmd {
    /// Classify (mu, epsilon) and print the derived parameters as JSON.
    Info {
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value_t = 0)]
        epsilon: u8,
        /// Needed only for mu = 0, epsilon = 0.
        #[arg(long, value_enum)]
        series: Option<SeriesArg>,
        /// Print b+, b-, |Pi_|k|| and D values for i_nu <= k <= this.
        #[arg(long, default_value_t = 4)]
        max_k: i64,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Least-squares solve of X g = f, compared against the formula backend.
    Solve1d(Solve1dArgs),
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// A random f = sum X_i h_i (in the kernel of every invariant distribution).
    Coboundary(GenArgs),
    /// A random closed form omega = d xi.
    Form {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        degree: usize,
    },
}

#[derive(Args)]
struct GenArgs {
    /// Factor as series:value (t for principal, nu for complementary, n for discrete); repeat per factor.
    #[arg(long = "factor", required = true)]
    factors: Vec<String>,
    #[arg(long, default_value_t = 12)]
    radius: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesArg {
    FirstPrincipal,
    SecondPrincipal,
    Complementary,
    FirstDiscrete,
    SecondDiscrete,
}

impl SeriesArg {
    fn hint(self) -> SeriesHint {
        let name = match self {
            SeriesArg::FirstPrincipal => "first_principal",
            SeriesArg::SecondPrincipal => "second_principal",
            SeriesArg::Complementary => "complementary",
            SeriesArg::FirstDiscrete => "first_discrete",
            SeriesArg::SecondDiscrete => "second_discrete",
        };
        SeriesHint::from_name(name).expect("known series name")
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Formula,
    Lsq,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Formula => Backend::Formula,
            BackendArg::Lsq => Backend::Lsq,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Sequential,
    Averaged,
}

#[derive(Args)]
struct Solve1dArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "formula")]
    backend: BackendArg,
    #[arg(long, default_value_t = DEFAULT_DEFECT_TOL)]
    tol: f64,
    /// Solve on `lo,hi` instead of the input window (zero-padded or cut).
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "f1.json")]
    out_f1: PathBuf,
    #[arg(long, default_value = "fmu.json")]
    out_fmu: PathBuf,
    /// Geometric ratio of the slice weights.
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    #[arg(long, default_value_t = DEFAULT_DEFECT_TOL)]
    tol: f64,
    /// CSV of per-slice kernel defects.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SolveTopArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "g_")]
    out_prefix: String,
    #[arg(long, default_value_t = 2.0)]
    s: f64,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, default_value_t = DEFAULT_DEFECT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value = "formula")]
    backend: BackendArg,
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    /// Comma-separated 1-based axis order, e.g. 2,1,3.
    #[arg(long)]
    axis_order: Option<String>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PrimitiveArgs {
    #[arg(long)]
    form: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DEFECT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value = "sequential")]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "formula")]
    backend: BackendArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// `all` or one of the suite ids.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = DEFAULT_MAX_K)]
    grid_max_k: i64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Window radii for the solve-top timing.
    #[arg(long, value_delimiter = ',', default_values_t = vec![32i64, 64, 128])]
    radii: Vec<i64>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Tolerance(String),
}

impl From<CohomError> for Failure {
    fn from(e: CohomError) -> Self {
        if e.is_tolerance_failure() {
            Failure::Tolerance(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// `println!` that stays quiet when stdout is closed early (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            eprintln!("\ntensor input: {TENSOR_SCHEMA}\nform input: {FORM_SCHEMA}");
            return ExitCode::from(1);
        }
    };
    match std::env::var("COHOM_PRECISION").as_deref() {
        Err(_) | Ok("double") => {}
        Ok("extended") => eprintln!("note: extended precision is not available in this build; using double"),
        Ok(other) => {
            eprintln!("error: COHOM_PRECISION must be 'double' or 'extended', got '{other}'");
            return ExitCode::from(1);
        }
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.cmd, cli.seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Tolerance(m)) => {
            eprintln!("tolerance failure: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd, seed: u64) -> Outcome {
    match cmd {
        Cmd::Rep {
            cmd:
                RepCmd::Info {
                    mu,
                    epsilon,
                    series,
                    max_k,
                },
        } => rep_info(mu, epsilon, series, max_k),
        Cmd::Solve1d(a) => solve1d(&a, false),
        Cmd::Oracle {
            cmd: OracleCmd::Solve1d(a),
        } => solve1d(&a, true),
        Cmd::Split(a) => split_cmd(&a),
        Cmd::SolveTop(a) => solve_top_cmd(&a),
        Cmd::Primitive(a) => primitive_cmd(&a),
        Cmd::Verify(a) => verify_cmd(&a),
        Cmd::Generate { cmd } => generate(cmd, seed),
        Cmd::Bench(a) => bench(&a, seed),
    }
}

fn read_input(path: &Path, schema: &str) -> std::result::Result<String, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(Failure::Usage(format!(
            "{} is empty; expected {schema}",
            path.display()
        )));
    }
    Ok(text)
}

fn read_tensor(path: &Path) -> std::result::Result<CoeffTensor, Failure> {
    let text = read_input(path, TENSOR_SCHEMA)?;
    CoeffTensor::from_json(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}\nexpected {TENSOR_SCHEMA}", path.display())))
}

fn read_form(path: &Path) -> std::result::Result<DifferentialForm, Failure> {
    let text = read_input(path, FORM_SCHEMA)?;
    DifferentialForm::from_json(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}\nexpected {FORM_SCHEMA}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            say!("{text}");
            Ok(())
        }
    }
}

fn rep_info(mu: f64, epsilon: u8, series: Option<SeriesArg>, max_k: i64) -> Outcome {
    let p = classify(mu, epsilon, series.map(SeriesArg::hint))?;
    let hi = max_k.max(p.i_nu);
    let basis: Vec<_> = (p.i_nu..=hi)
        .map(|k| {
            let dist = |s: u8| {
                cohom_core::distributions::d_value(&p, s, k)
                    .map(|v| v.to_complex())
                    .ok()
                    .map(|z| json!([z.re, z.im]))
            };
            json!({
                "k": k,
                "b_plus": [p.b_plus(k).re, p.b_plus(k).im],
                "b_minus": [p.b_minus(k).re, p.b_minus(k).im],
                "norm_sq": p.basis_norm_sq(k).ok(),
                "d0": dist(0),
                "d1": dist(1),
            })
        })
        .collect();
    let index_set = match p.index_set {
        cohom_core::IndexSet::AllIntegers => json!("all integers"),
        cohom_core::IndexSet::FromN(n) => json!(format!("k >= {n}")),
    };
    let out = json!({
        "series": p.series.name(),
        "mu": p.mu,
        "epsilon": p.epsilon,
        "nu": [p.nu.re, p.nu.im],
        "i_nu": p.i_nu,
        "index_set": index_set,
        "spectral_gap_note": spectral_note(&p),
        "basis": basis,
    });
    say!("{}", serde_json::to_string_pretty(&out).expect("json values"));
    Ok(())
}

/// The tame estimates assume a spectral gap `mu > mu_0 > 0`; discrete factors have
/// `mu <= 0` but are still solvable, so they are flagged rather than rejected.
fn spectral_note(p: &IrrepParams) -> Option<&'static str> {
    (p.mu <= 0.0).then_some("mu <= 0: outside the stated spectral-gap hypothesis; solvers still apply")
}

fn solve1d(a: &Solve1dArgs, oracle: bool) -> Outcome {
    let mut f = read_tensor(&a.input)?;
    if let Some(spec) = &a.window {
        let bad = || Failure::Usage(format!("--window expects lo,hi, got '{spec}'"));
        let (lo, hi) = spec.split_once(',').ok_or_else(bad)?;
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
        if f.dim() != 1 {
            return Err(Failure::Usage("--window applies to one-factor inputs".into()));
        }
        f = f.embed(&Window::new(vec![(lo, hi)])?)?;
    }
    let backend = if oracle { Backend::Lsq } else { a.backend.into() };
    let g = solve_1d(&f, backend, a.tol)?;
    let r = residual(&f, std::slice::from_ref(&g))?;
    eprintln!(
        "backend {}: residual {:.3e} (||f||_0 = {:.3e})",
        backend.name(),
        r,
        f.norm0()
    );
    if oracle {
        let other = solve_1d(&f, Backend::Formula, a.tol)?;
        eprintln!(
            "disagreement with formula backend after homogeneous projection: {:.3e}",
            backend_disagreement(&g, &other)?
        );
    }
    write_out(a.out.as_deref(), &g.to_json())
}

fn split_cmd(a: &SplitArgs) -> Outcome {
    let f = read_tensor(&a.input)?;
    let weight = SplitWeight::new(a.ratio)?;
    let (f1, fmu, rep) = split_with_report(&f, &weight)?;
    std::fs::write(&a.out_f1, f1.to_json())?;
    std::fs::write(&a.out_fmu, fmu.to_json())?;
    let kernels = verify_split_kernels(&f1, &fmu, a.tol)?;
    if let Some(p) = &a.report {
        std::fs::write(p, kernels.to_csv())?;
    }
    eprintln!(
        "mass deficit {:.3e}, max f1 defect {:.3e}, max f_mu defect {:.3e}, bound {:.3e}",
        rep.mass_deficit, kernels.max_f1_defect, kernels.max_fmu_defect, kernels.bound
    );
    if kernels.pass {
        Ok(())
    } else {
        Err(Failure::Tolerance("slice kernel defects exceed the bound".into()))
    }
}

fn parse_axis_order(s: &str, d: usize) -> std::result::Result<Vec<usize>, Failure> {
    let order: Vec<usize> = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .ok()
                .filter(|&a| a >= 1 && a <= d)
                .map(|a| a - 1)
        })
        .collect::<Option<_>>()
        .ok_or_else(|| Failure::Usage(format!("--axis-order must list 1..={d} separated by commas")))?;
    Ok(order)
}

fn solve_top_cmd(a: &SolveTopArgs) -> Outcome {
    let f = read_tensor(&a.input)?;
    let d = f.dim();
    let opts = TopOptions {
        backend: a.backend.into(),
        tol: a.tol,
        split: SplitWeight::new(a.ratio)?,
        axis_order: a.axis_order.as_deref().map(|s| parse_axis_order(s, d)).transpose()?,
    };
    let gs = solve_top(&f, &opts)?;
    for (i, g) in gs.iter().enumerate() {
        std::fs::write(format!("{}{}.json", a.out_prefix, i + 1), g.to_json())?;
    }
    let rows = top_report(&f, &gs, a.s, a.t)?;
    if let Some(p) = &a.report {
        std::fs::write(p, top_report_csv(&rows, d))?;
    }
    let all = rows.last().expect("report has a total row");
    eprintln!(
        "d = {d}, s_d = {}, residual {:.3e}, ratios ||g_i||_{}/||f||_s_d: {:?}",
        sobolev_index(a.s, d),
        all.residual,
        a.t,
        all.ratios
    );
    Ok(())
}

fn primitive_cmd(a: &PrimitiveArgs) -> Outcome {
    let om = read_form(&a.form)?;
    let opts = PrimitiveOptions {
        tol: a.tol,
        strategy: match a.strategy {
            StrategyArg::Sequential => PrimitiveStrategy::Sequential,
            StrategyArg::Averaged => PrimitiveStrategy::Averaged,
        },
        backend: a.backend.into(),
        split: SplitWeight::default(),
    };
    let eta = solve_primitive(&om, &opts)?;
    eprintln!(
        "degree {} primitive of a degree {} form, residual {:.3e} (||omega||_0 = {:.3e})",
        eta.degree(),
        om.degree(),
        primitive_residual(&om, &eta)?,
        om.norm0()
    );
    write_out(a.out.as_deref(), &eta.to_json())
}

fn verify_cmd(a: &VerifyArgs) -> Outcome {
    if a.suite != "all" && !SUITES.contains(&a.suite.as_str()) {
        return Err(Failure::Usage(format!(
            "unknown suite '{}'; expected all or one of {}",
            a.suite,
            SUITES.join(", ")
        )));
    }
    let reports = verify_suites(&a.suite, a.grid_max_k)?;
    for r in &reports {
        say!("{}", r.summary());
        for e in r.excluded.iter().take(5) {
            say!("  excluded {e}");
        }
        if r.excluded.len() > 5 {
            say!("  ... {} more excluded points", r.excluded.len() - 5);
        }
    }
    if let Some(p) = &a.report {
        std::fs::write(p, report_csv(&reports))?;
    }
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::Tolerance("at least one suite failed".into()))
    }
}

fn parse_factor(spec: &str) -> std::result::Result<IrrepParams, Failure> {
    let bad = || {
        Failure::Usage(format!(
            "bad factor '{spec}'; expected series:value, e.g. first_principal:1.5 or first_discrete:2"
        ))
    };
    let (name, value) = spec.split_once(':').ok_or_else(bad)?;
    let p = match name {
        "first_principal" | "second_principal" => {
            let t: f64 = value.parse().map_err(|_| bad())?;
            let eps = u8::from(name == "second_principal");
            if !t.is_finite() || (eps == 1 && t == 0.0) {
                return Err(bad());
            }
            IrrepParams::principal(eps, t)
        }
        "complementary" => IrrepParams::complementary(value.parse().map_err(|_| bad())?)?,
        "first_discrete" | "second_discrete" => {
            let n: u32 = value.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            if name == "first_discrete" {
                IrrepParams::first_discrete(n)
            } else {
                IrrepParams::second_discrete(n)
            }
        }
        _ => return Err(bad()),
    };
    Ok(p)
}

fn gen_setup(g: &GenArgs) -> std::result::Result<(TensorParams, Window), Failure> {
    let factors = g
        .factors
        .iter()
        .map(|s| parse_factor(s))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let params = TensorParams::new(factors)?;
    if g.radius < 3 {
        return Err(Failure::Usage("--radius must be at least 3".into()));
    }
    let w = Window::symmetric(&params, g.radius);
    Ok((params, w))
}

fn generate(cmd: GenerateCmd, seed: u64) -> Outcome {
    match cmd {
        GenerateCmd::Coboundary(g) => {
            let (params, w) = gen_setup(&g)?;
            let f = coboundary(&params, &w, seed, 0);
            eprintln!("max kernel defect {:.3e}", max_kernel_defect(&f));
            write_out(g.out.as_deref(), &f.to_json())
        }
        GenerateCmd::Form { gen, degree } => {
            let (params, w) = gen_setup(&gen)?;
            if degree == 0 || degree > params.dim() {
                return Err(Failure::Usage(format!("--degree must be in 1..={}", params.dim())));
            }
            let comps = index_sets(params.dim(), degree - 1)
                .into_iter()
                .enumerate()
                .map(|(i, idx)| (idx, interior_tensor(&params, &w, seed, i as u64)));
            let xi = DifferentialForm::from_components(params.clone(), degree - 1, w.clone(), comps)?;
            let om = exterior_derivative(&xi)?.embed(&w)?;
            write_out(gen.out.as_deref(), &om.to_json())
        }
    }
}

fn bench(a: &BenchArgs, seed: u64) -> Outcome {
    if a.radii.iter().any(|&r| r < 3) || a.repeats == 0 {
        return Err(Failure::Usage("radii must be at least 3 and repeats at least 1".into()));
    }
    let time = |f: &mut dyn FnMut()| {
        let mut best = f64::INFINITY;
        for _ in 0..a.repeats {
            let t = Instant::now();
            f();
            best = best.min(t.elapsed().as_secs_f64());
        }
        best
    };
    let mut csv = String::from("kernel,radius,size,seconds\n");
    let p = IrrepParams::principal(0, 1.5);
    let pair = TensorParams::new(vec![p, IrrepParams::complementary(0.4)?])?;
    for &r in &a.radii {
        let w = Window::symmetric(&pair, r);
        let f = interior_tensor(&pair, &w, seed, 0);
        let secs = time(&mut || {
            std::hint::black_box(f.apply_x(0).expect("axis 0"));
        });
        csv += &format!("apply_x,{r},{},{secs:.6e}\n", f.coeffs().len());
        let secs = time(&mut || {
            std::hint::black_box(p.pi_product(r * 64).expect("k >= i_nu"));
        });
        csv += &format!("pi_product,{r},{},{secs:.6e}\n", r * 64);
        let g = coboundary(&pair, &w, seed, 1);
        let secs = time(&mut || {
            std::hint::black_box(solve_top(&g, &TopOptions::default()).expect("coboundary input"));
        });
        csv += &format!("solve_top,{r},{},{secs:.6e}\n", g.coeffs().len());
    }
    write_out(a.out.as_deref(), csv.trim_end())
}
