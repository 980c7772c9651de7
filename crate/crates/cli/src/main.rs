//! `equidist`: build ensembles of conjugate sets, run the radial, angular and
//! test-function checks on them, and write a JSON report.
//!
//! Exit status is 0 when every check holds, 1 when a bound is violated or a
//! computation fails, and 2 on usage errors.

mod expr;
mod report;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use equidist_core::auxpoly::{self, default_lattice_degree, short_multiple};
use equidist_core::discrepancy::{
    angular_mean_stat, erdos_turan_check, et_fuzz, radial_mean_stat, AnnulusSpec, EtFuzzConfig,
    SectorSpec,
};
use equidist_core::ensembles::{self, HeightMode, OrbitEnsemble};
use equidist_core::equidist::{
    cell_breakdown, choose_offset, default_partition_count, mean_deviation_check,
    select_embeddings, test_function_library, PartitionSpec,
};
use equidist_core::heights::{self, siegel_bound};
use equidist_core::rootfind::{self, ComplexPolynomial, RootOptions, RootSet};
use equidist_core::zpoly::{self, IntPolynomial};
use equidist_core::{par, Error};
use serde::Serialize;
use serde_json::json;

use report::{Report, WrittenCsv};

#[derive(Parser, Debug)]
#[command(
    name = "equidist",
    version,
    about = "Equidistribution checks for sets of algebraic numbers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radial, angular and test-function checks on one ensemble.
    Analyze(RunArgs),
    /// Erdős–Turán checks on seeded random ±1 polynomials.
    EtFuzz(RunArgs),
    /// Erdős–Turán checks on the roots of one polynomial, with its heights.
    BoundCheck(RunArgs),
    /// Keep the sets that pass the radial and angular thresholds.
    Select(RunArgs),
    /// Sector discrepancy through a short multiple found by lattice reduction.
    Auxpoly(RunArgs),
    /// Build a kummer or galois ensemble and run the selection on it.
    Family {
        kind: FamilyKind,
        #[command(flatten)]
        args: RunArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::EtFuzz(_) => "et-fuzz",
            Command::BoundCheck(_) => "bound-check",
            Command::Select(_) => "select",
            Command::Auxpoly(_) => "auxpoly",
            Command::Family { .. } => "family",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum FamilyKind {
    Kummer,
    Galois,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Exact,
    Bound,
}

/// Number of partition cells: a fixed count or `auto` for
/// `max(2, floor(h_S^{-1/4}))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cells {
    Auto,
    Fixed(usize),
}

impl FromStr for Cells {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Cells::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 2 => Ok(Cells::Fixed(n)),
            _ => Err(format!("expected an integer >= 2 or 'auto', got '{s}'")),
        }
    }
}

impl fmt::Display for Cells {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cells::Auto => f.write_str("auto"),
            Cells::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Cells {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cells::Auto => s.serialize_str("auto"),
            Cells::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct RunArgs {
    /// Polynomial literal, e.g. `x^64-2`, `Phi(105)`, `compose1m(Phi(7),3)`.
    #[arg(long)]
    poly: Option<String>,
    /// Ensemble family when no polynomial or ensemble file is given.
    #[arg(long, value_enum)]
    family: Option<FamilyKind>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    /// Ensemble JSON file.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    /// How kummer mean heights are obtained.
    #[arg(long, value_enum, default_value = "exact")]
    height_mode: ModeArg,
    /// Annulus parameter, r > 1.
    #[arg(long, default_value_t = 1.2)]
    r: f64,
    /// Partition cells, an integer >= 2 or `auto`.
    #[arg(long = "N", default_value = "auto")]
    #[serde(rename = "N")]
    cells: Cells,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Degree of the base field.
    #[arg(long = "degK", default_value_t = 1)]
    #[serde(rename = "degK")]
    deg_k: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Report path; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Directory for point and per-cell CSV files.
    #[arg(long)]
    #[serde(skip)]
    csv_dir: Option<PathBuf>,
    /// Write the ensemble JSON here.
    #[arg(long)]
    #[serde(skip)]
    save: Option<PathBuf>,
    /// Quadrature nodes on the circle.
    #[arg(long, default_value_t = 4096)]
    nodes: usize,
    /// Relative root-finding tolerance.
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    /// Polynomials drawn by et-fuzz.
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Degree of et-fuzz polynomials.
    #[arg(long, default_value_t = 100)]
    degree: usize,
    /// Equally spaced sector starts for the Erdős–Turán checks.
    #[arg(long, default_value_t = 16)]
    starts: usize,
    /// Sector start angle in radians.
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    /// Sector opening angle in radians.
    #[arg(long, default_value_t = PI / 2.0)]
    theta: f64,
}

#[derive(Debug)]
enum AppError {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "usage error: {m}"),
            AppError::Core(e) => write!(f, "{e}"),
            AppError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::NotPrimitive(_)
            | Error::NotSquarefree
            | Error::ZeroIsRoot
            | Error::ZeroPolynomial
            | Error::ConstantPolynomial
            | Error::DegreeTooSmall { .. }
            | Error::BadWindow(_)
            | Error::Schema(_)
            | Error::Io(_) => AppError::Usage(e.to_string()),
            other => AppError::Core(other),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Io(std::io::Error::other(e))
    }
}

type AppResult<T> = Result<T, AppError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("EQ_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                par::configure_threads(n);
            }
            _ => {
                eprintln!("usage error: EQ_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(2);
            }
        }
    }
    match run(&cli.command) {
        Ok(report) => {
            for v in &report.violations {
                eprintln!("violated: {v}");
            }
            if report.all_hold {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            match e {
                AppError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cmd: &Command) -> AppResult<Report> {
    let (args, report) = match cmd {
        Command::Analyze(a) => (a, analyze(a)?),
        Command::EtFuzz(a) => (a, fuzz(a)?),
        Command::BoundCheck(a) => (a, bound_check(a)?),
        Command::Select(a) => (a, select(a)?),
        Command::Auxpoly(a) => (a, auxiliary(a)?),
        Command::Family { kind, args } => (args, family(*kind, args)?),
    };
    let mut report = report;
    report.command = cmd.name().to_string();
    report.params = params_echo(cmd)?;
    report.finish();
    let text = report.to_json();
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(report)
}

fn params_echo(cmd: &Command) -> AppResult<serde_json::Map<String, serde_json::Value>> {
    let (args, kind) = match cmd {
        Command::Family { kind, args } => (args, Some(*kind)),
        Command::Analyze(a)
        | Command::EtFuzz(a)
        | Command::BoundCheck(a)
        | Command::Select(a)
        | Command::Auxpoly(a) => (a, None),
    };
    let mut v = serde_json::to_value(args).map_err(|e| AppError::Usage(e.to_string()))?;
    let map = v.as_object_mut().expect("arguments serialize to an object");
    if let Some(k) = kind {
        map.insert("kind".into(), json!(k));
    }
    let mut sorted: Vec<_> = std::mem::take(map).into_iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(sorted.into_iter().collect())
}

fn root_options(args: &RunArgs) -> AppResult<RootOptions> {
    if !(args.tol > 0.0 && args.tol < 1e-3) {
        return Err(AppError::Usage(format!(
            "--tol must be in (0, 1e-3), got {}",
            args.tol
        )));
    }
    Ok(RootOptions {
        tol: args.tol,
        ..RootOptions::default()
    })
}

fn parse_poly(args: &RunArgs) -> AppResult<Option<IntPolynomial>> {
    args.poly
        .as_deref()
        .map(|s| expr::parse(s).map_err(|e| AppError::Usage(format!("--poly: {e}"))))
        .transpose()
}

fn require_poly(args: &RunArgs) -> AppResult<IntPolynomial> {
    parse_poly(args)?.ok_or_else(|| AppError::Usage("--poly is required".into()))
}

fn height_mode(args: &RunArgs) -> HeightMode {
    match args.height_mode {
        ModeArg::Exact => HeightMode::Exact,
        ModeArg::Bound => HeightMode::Bound,
    }
}

fn build_family(kind: FamilyKind, args: &RunArgs) -> AppResult<OrbitEnsemble> {
    let opts = root_options(args)?;
    match kind {
        FamilyKind::Kummer => {
            let m = args
                .m
                .ok_or_else(|| AppError::Usage("kummer needs --m".into()))?;
            let n = args
                .n
                .ok_or_else(|| AppError::Usage("kummer needs --n".into()))?;
            Ok(ensembles::kummer_ensemble_with(m, n, height_mode(args))?)
        }
        FamilyKind::Galois => {
            let p = require_poly(args)?;
            Ok(ensembles::galois_stable_ensemble_with(&p, &opts)?)
        }
    }
}

/// The ensemble named by `--ensemble`, `--family` or `--poly`, in that order.
fn build_ensemble(args: &RunArgs) -> AppResult<OrbitEnsemble> {
    let ens = if let Some(path) = &args.ensemble {
        ensembles::load_ensemble(path)?
    } else if let Some(kind) = args.family {
        build_family(kind, args)?
    } else if args.poly.is_some() {
        build_family(FamilyKind::Galois, args)?
    } else {
        return Err(AppError::Usage(
            "give --poly, --family or --ensemble".into(),
        ));
    };
    if let Some(path) = &args.save {
        ens.save(path)?;
    }
    Ok(ens)
}

fn resolve_cells(args: &RunArgs, ens: &OrbitEnsemble) -> usize {
    match args.cells {
        Cells::Auto => default_partition_count(ens.h_s()),
        Cells::Fixed(n) => n,
    }
}

fn check_r(args: &RunArgs) -> AppResult<AnnulusSpec> {
    AnnulusSpec::new(args.r)
        .map_err(|_| AppError::Usage(format!("--r must exceed 1, got {}", args.r)))
}

fn check_eps(args: &RunArgs) -> AppResult<()> {
    if args.eps > 0.0 && args.eps < 1.0 {
        Ok(())
    } else {
        Err(AppError::Usage(format!(
            "--eps must be in (0, 1), got {}",
            args.eps
        )))
    }
}

fn sector(args: &RunArgs) -> AppResult<SectorSpec> {
    SectorSpec::new(args.start, args.theta).map_err(|e| AppError::Usage(e.to_string()))
}

fn write_csvs(
    args: &RunArgs,
    report: &mut Report,
    ens: &OrbitEnsemble,
    partition: Option<&PartitionSpec>,
) -> AppResult<()> {
    let Some(dir) = &args.csv_dir else {
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    let points = dir.join("points.csv");
    write_points(&points, ens)?;
    report.csv.push(WrittenCsv::new("points", &points));
    if let Some(part) = partition {
        let cells = dir.join("cells.csv");
        let mut w = csv::Writer::from_path(&cells)?;
        for row in cell_breakdown(ens, part) {
            w.serialize(row)?;
        }
        w.flush()?;
        report.csv.push(WrittenCsv::new("cells", &cells));
    }
    Ok(())
}

fn write_points(path: &Path, ens: &OrbitEnsemble) -> AppResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["set", "re", "im", "radius"])?;
    for (k, set) in ens.conjugate_sets().iter().enumerate() {
        let radii = ens.radii().get(k);
        for (i, z) in set.iter().enumerate() {
            let r = radii.and_then(|r| r.get(i)).copied().unwrap_or(0.0);
            w.write_record(&[
                ens.set_ids()[k].to_string(),
                format!("{:e}", z.re),
                format!("{:e}", z.im),
                format!("{r:e}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_roots(args: &RunArgs, report: &mut Report, name: &str, roots: &RootSet) -> AppResult<()> {
    let Some(dir) = &args.csv_dir else {
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.csv"));
    roots.write_csv(std::fs::File::create(&path)?)?;
    report.csv.push(WrittenCsv::new(name, &path));
    Ok(())
}

fn analyze(args: &RunArgs) -> AppResult<Report> {
    let annulus = check_r(args)?;
    if args.nodes < 16 {
        return Err(AppError::Usage(format!(
            "--nodes must be at least 16, got {}",
            args.nodes
        )));
    }
    let ens = build_ensemble(args)?;
    let n = resolve_cells(args, &ens);
    let partition = choose_offset(&ens, n)?;
    let mut report = Report::for_ensemble(&ens);
    report.push("radial", radial_mean_stat(&ens, &annulus));
    for j in 0..n {
        report.push(
            format!("angular[{j}]"),
            angular_mean_stat(&ens, &partition.cell(j)),
        );
    }
    let library = test_function_library(args.r);
    let checks = par::map(&library, |f| {
        mean_deviation_check(&ens, f, args.r, n, args.nodes)
    });
    for (f, rep) in library.iter().zip(checks) {
        report.push(format!("mean_deviation[{}]", f.label), rep?);
    }
    report.details = json!({ "N": n, "offset_x": partition.offset() });
    write_csvs(args, &mut report, &ens, Some(&partition))?;
    Ok(report)
}

fn fuzz(args: &RunArgs) -> AppResult<Report> {
    if args.count == 0 || args.degree == 0 || args.starts == 0 {
        return Err(AppError::Usage(
            "--count, --degree and --starts must be positive".into(),
        ));
    }
    let cfg = EtFuzzConfig {
        count: args.count,
        degree: args.degree,
        seed: args.seed,
        starts: args.starts,
        theta: sector(args)?.theta(),
        roots: root_options(args)?,
    };
    let summary = et_fuzz(&cfg)?;
    let mut report = Report::default();
    let rep = equidist_core::discrepancy::DiscrepancyReport::new(summary.violations as f64, 0.0)
        .with_warnings(summary.boundary_warnings)
        .with_param("checks", summary.checks)
        .with_param("worst_ratio", summary.worst_ratio);
    report.push("erdos_turan_fuzz", rep);
    report.details = serde_json::to_value(&summary).expect("summary serializes");
    Ok(report)
}

fn bound_check(args: &RunArgs) -> AppResult<Report> {
    let p = require_poly(args)?;
    if args.starts == 0 {
        return Err(AppError::Usage("--starts must be positive".into()));
    }
    let opts = root_options(args)?;
    let roots = rootfind::int_roots_with_multiplicity(&p, &opts)?;
    let q = ComplexPolynomial::from_int(&p)?;
    let mut report = Report::default();
    for k in 0..args.starts {
        let start = args.start + TAU * k as f64 / args.starts as f64;
        let s = SectorSpec::new(start, args.theta).map_err(|e| AppError::Usage(e.to_string()))?;
        report.push(
            format!("erdos_turan[{k}]"),
            erdos_turan_check(&q, &s, Some(&roots))?,
        );
    }
    let degree = p.degree().expect("nonconstant");
    let mahler = heights::mahler_measure(&p)?;
    let jensen = heights::mahler_jensen(&p, args.nodes.max(1))?;
    let mut details = json!({
        "polynomial": p.to_string(),
        "degree": degree,
        "mahler_measure": mahler,
        "mahler_jensen": jensen,
        "jensen_nodes": args.nodes.max(1),
    });
    let (content, _) = zpoly::content_primitive(&p)?;
    if num_traits::One::is_one(&content) && zpoly::is_squarefree(&p) {
        let h = heights::mean_height_with_options(&p, &opts)?.1;
        let l = default_lattice_degree(degree, h.h_s);
        details["heights"] = serde_json::to_value(&h).expect("heights serialize");
        details["siegel"] = json!({ "L": l, "bound": siegel_bound(degree, h.m_s, l)? });
    }
    report.details = details;
    write_roots(args, &mut report, "roots", &roots)?;
    Ok(report)
}

fn select(args: &RunArgs) -> AppResult<Report> {
    check_r(args)?;
    check_eps(args)?;
    let ens = build_ensemble(args)?;
    selection_report(args, &ens, Report::for_ensemble(&ens))
}

fn family(kind: FamilyKind, args: &RunArgs) -> AppResult<Report> {
    let annulus = check_r(args)?;
    check_eps(args)?;
    let ens = build_family(kind, args)?;
    if let Some(path) = &args.save {
        ens.save(path)?;
    }
    let mut report = Report::for_ensemble(&ens);
    report.push("radial", radial_mean_stat(&ens, &annulus));
    selection_report(args, &ens, report)
}

fn selection_report(args: &RunArgs, ens: &OrbitEnsemble, mut report: Report) -> AppResult<Report> {
    if args.deg_k == 0 {
        return Err(AppError::Usage("--degK must be positive".into()));
    }
    let n = resolve_cells(args, ens);
    let sel = select_embeddings(ens, args.r, n, args.eps, args.deg_k)?;
    report.push("select_embeddings", sel.report.clone());
    report.details = json!({
        "N": n,
        "offset_x": sel.partition.offset(),
        "selected": sel.selected.iter().map(|&k| ens.set_ids()[k]).collect::<Vec<_>>(),
        "failing_radial": sel.failing_radial,
        "failing_angular": sel.failing_angular,
        "outside_annulus": sel.outside_annulus,
        "radial_threshold": sel.radial_threshold,
        "angular_threshold": sel.angular_threshold,
    });
    write_csvs(args, &mut report, ens, Some(&sel.partition))?;
    Ok(report)
}

fn auxiliary(args: &RunArgs) -> AppResult<Report> {
    let p = require_poly(args)?;
    let s = sector(args)?;
    let rep = auxpoly::angular_via_auxpoly(&p, &s)?;
    let l = rep
        .param("L")
        .and_then(|v| v.as_u64())
        .expect("L is recorded") as usize;
    let sm = short_multiple(&p, l)?;
    let mut report = Report::default();
    report.push("angular_via_auxpoly", rep);
    report.details = json!({
        "polynomial": p.to_string(),
        "auxiliary": sm.f,
        "auxiliary_text": sm.f.to_string(),
        "achieved_height": sm.achieved_height,
        "siegel_rhs": sm.siegel_rhs,
        "L": l,
    });
    if args.csv_dir.is_some() {
        let roots = rootfind::int_roots_with_multiplicity(&sm.f, &root_options(args)?)?;
        write_roots(args, &mut report, "auxiliary_roots", &roots)?;
    }
    Ok(report)
}
