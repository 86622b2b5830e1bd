use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavelet_telegraph::basis::{project_1d, QuadratureRule};
use wavelet_telegraph::expr::Expr;
use wavelet_telegraph::harness::{self, BenchmarkRecord, Precision, ProblemSource, RunConfig};
use wavelet_telegraph::telegraph::grid_coords;
use wavelet_telegraph::{Error, WaveletBasis};

#[derive(Parser)]
#[command(
    name = "wavelet-telegraph",
    version,
    about = "Legendre wavelet solver for the 2D telegraph equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem at a single (k, M).
    Solve(RunArgs),
    /// Solve for every M in a list.
    Sweep(RunArgs),
    /// Reproduce the error tables of all three benchmark problems.
    Tables(TablesArgs),
    /// Projection self-test: orthonormality and approximation error of an expression.
    Approx(ApproxArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Registry id (example1..example3) or path to a problem file.
    #[arg(long, default_value = "example1")]
    problem: String,
    /// Problem definition file (TOML); overrides --problem.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Polynomial order; a comma-separated list for `sweep`.
    #[arg(long = "M", alias = "m", value_delimiter = ',', default_value = "4")]
    orders: Vec<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long = "t-eval", default_value_t = 1.0)]
    t_eval: f64,
    /// Points per side of the reporting grid.
    #[arg(long, default_value_t = 11)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Arithmetic for the solve: f64 or dd (double-double).
    #[arg(long, default_value = "dd")]
    precision: Precision,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(
        long = "M",
        alias = "m",
        value_delimiter = ',',
        default_value = "4,5,6,7"
    )]
    orders: Vec<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long = "t-eval", default_value_t = 1.0)]
    t_eval: f64,
    #[arg(long, default_value_t = 11)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "dd")]
    precision: Precision,
}

#[derive(Args)]
struct ApproxArgs {
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long = "M", alias = "m", default_value_t = 5)]
    order: usize,
    /// Function of `eta` to project.
    #[arg(long, default_value = "exp(eta)")]
    expr: String,
    #[arg(long, default_value_t = 101)]
    grid: usize,
}

fn run_config(a: &RunArgs) -> RunConfig {
    let source = match &a.config {
        Some(p) => ProblemSource::File(p.clone()),
        None => ProblemSource::parse(&a.problem),
    };
    let mut cfg = RunConfig::new(source, a.k, a.orders.clone());
    cfg.tol = a.tol;
    cfg.max_iter = a.max_iter;
    cfg.t_eval = a.t_eval;
    cfg.grid = a.grid;
    cfg.out_dir = a.out.clone();
    cfg.precision = a.precision;
    cfg
}

fn exit_for(records: &[BenchmarkRecord]) -> ExitCode {
    if records.iter().all(|r| r.ok()) {
        ExitCode::SUCCESS
    } else {
        for r in records.iter().filter(|r| !r.ok()) {
            eprintln!("{} k={} M={}: {}", r.problem, r.k, r.order, r.status);
        }
        ExitCode::from(1)
    }
}

fn report_error(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Solver(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn warn_compatibility(cfg: &RunConfig) {
    if let Ok(p) = cfg.problem.load::<f64>() {
        for issue in p.compatibility_issues(1e-10) {
            eprintln!(
                "warning: initial and boundary data disagree on edge {} at {:.1} (by {:.3e})",
                issue.edge, issue.coordinate, issue.mismatch
            );
        }
    }
}

fn sweep(args: &RunArgs, single: bool) -> ExitCode {
    if single && args.orders.len() != 1 {
        eprintln!("error: solve takes a single --M; use sweep for a list");
        return ExitCode::from(2);
    }
    let cfg = run_config(args);
    warn_compatibility(&cfg);
    match harness::run(&cfg) {
        Ok(records) => {
            print!("{}", harness::format_tables(&records));
            exit_for(&records)
        }
        Err(e) => report_error(&e),
    }
}

fn tables(a: &TablesArgs) -> ExitCode {
    let mut all = Vec::new();
    for id in 1..=3 {
        let mut cfg = RunConfig::new(
            ProblemSource::Registry(format!("example{id}")),
            a.k,
            a.orders.clone(),
        );
        cfg.tol = a.tol;
        cfg.max_iter = a.max_iter;
        cfg.t_eval = a.t_eval;
        cfg.grid = a.grid;
        cfg.out_dir = a.out.clone();
        cfg.precision = a.precision;
        match harness::run(&cfg) {
            Ok(records) => {
                println!("{}", harness::format_tables(&records));
                all.extend(records);
            }
            Err(e) => return report_error(&e),
        }
    }
    exit_for(&all)
}

fn approx(a: &ApproxArgs) -> ExitCode {
    let basis = match WaveletBasis::new(a.k, a.order) {
        Ok(b) => b,
        Err(e) => return report_error(&e),
    };
    let f = match Expr::<f64>::parse(&a.expr) {
        Ok(f) => f,
        Err(e) => return report_error(&e.into()),
    };
    let quad = QuadratureRule::for_basis(&basis);
    // Gram matrix through the projection of each basis function
    let mut gram_dev = 0.0f64;
    for i in 0..basis.size() {
        let (n, m) = basis.split(i);
        let proj = project_1d(
            |x| wavelet_telegraph::basis::wavelet_eval(&basis, n, m, x).unwrap_or(f64::NAN),
            &basis,
            &quad,
        );
        match proj {
            Ok(c) => {
                for (j, v) in c.to_flat().into_iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    gram_dev = gram_dev.max((v - target).abs());
                }
            }
            Err(e) => return report_error(&e),
        }
    }
    let c = match project_1d(|x| f.eval(x, 0.0, 0.0), &basis, &quad) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    let mut max_err = 0.0f64;
    for x in grid_coords(a.grid) {
        let v = c.eval(&[x]).unwrap_or(f64::NAN);
        max_err = max_err.max((v - f.eval(x, 0.0, 0.0)).abs());
    }
    println!("basis k={} M={} size={}", a.k, a.order, basis.size());
    println!("gram deviation  {}", harness::sci(gram_dev));
    println!(
        "max error of {} on {} points  {}",
        a.expr,
        a.grid,
        harness::sci(max_err)
    );
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(a) => sweep(a, true),
        Command::Sweep(a) => sweep(a, false),
        Command::Tables(a) => tables(a),
        Command::Approx(a) => approx(a),
    }
}
