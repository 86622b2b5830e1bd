//! Benchmark problems, sweeps over `M`, CSV output and problem files.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::basis::SliceEvaluator;
use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::krylov::SolverConfig;
use crate::scalar::Real;
use crate::telegraph::{
    self, diagonal_probes, grid_coords, interior_samples, pde_residual, Discretization, Fn2, Fn3,
    TelegraphProblem,
};

/// The three benchmark problems, numbered 1 to 3.
pub fn example<T: Real>(id: usize) -> Option<TelegraphProblem<T>> {
    let sinh2 = |a: T, b: T| a.sinh() * b.sinh();
    let sin2 = |a: T, b: T| a.sin() * b.sin();
    let p = match id {
        1 => {
            let (l1, l2) = (T::lit(10.0), T::lit(5.0));
            let amp = -T::lit(2.0) * l1 + l2 * l2 - T::one();
            let forcing: Fn3<T> = Arc::new(move |a, b, t| amp * (-t).exp() * sinh2(a, b));
            let exact: Fn3<T> = Arc::new(move |a, b, t| (-t).exp() * sinh2(a, b));
            let velocity: Fn2<T> = Arc::new(move |a, b| -sinh2(a, b));
            TelegraphProblem::from_exact("example1", l1, l2, forcing, exact, velocity)
        }
        2 => {
            let two = T::lit(2.0);
            let forcing: Fn3<T> =
                Arc::new(move |a, b, t| (two * t.cos() - two * t.sin()) * sin2(a, b));
            let exact: Fn3<T> = Arc::new(move |a, b, t| t.cos() * sin2(a, b));
            let velocity: Fn2<T> = Arc::new(|_, _| T::zero());
            TelegraphProblem::from_exact("example2", T::one(), T::one(), forcing, exact, velocity)
        }
        3 => {
            let (c22, c20) = (T::lit(22.0), T::lit(20.0));
            let forcing: Fn3<T> =
                Arc::new(move |a, b, t| (c22 * t.cos() - c20 * t.sin()) * sinh2(a, b));
            let exact: Fn3<T> = Arc::new(move |a, b, t| t.cos() * sinh2(a, b));
            let velocity: Fn2<T> = Arc::new(|_, _| T::zero());
            TelegraphProblem::from_exact(
                "example3",
                T::lit(10.0),
                T::lit(5.0),
                forcing,
                exact,
                velocity,
            )
        }
        _ => return None,
    };
    Some(p)
}

pub fn registry<T: Real>() -> Vec<TelegraphProblem<T>> {
    (1..=3).filter_map(example).collect()
}

/// Accepts `example1`, `ex1` or `1`.
pub fn lookup<T: Real>(id: &str) -> Option<TelegraphProblem<T>> {
    let digits = id
        .strip_prefix("example")
        .or_else(|| id.strip_prefix("ex"))
        .unwrap_or(id);
    digits.parse().ok().and_then(example)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F64,
    Dd,
}

impl Precision {
    /// Default BiCGSTAB tolerance for the precision.
    pub fn default_tol(self) -> f64 {
        match self {
            Precision::F64 => 1e-10,
            Precision::Dd => 1e-26,
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "f64" | "double" => Ok(Precision::F64),
            "dd" | "double-double" => Ok(Precision::Dd),
            other => Err(format!("unknown precision '{other}' (use f64 or dd)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemSource {
    Registry(String),
    File(PathBuf),
}

impl ProblemSource {
    /// A registry id, or a path if no such id exists.
    pub fn parse(s: &str) -> Self {
        if lookup::<f64>(s).is_some() {
            ProblemSource::Registry(s.to_string())
        } else {
            ProblemSource::File(PathBuf::from(s))
        }
    }

    pub fn load<T: Real>(&self) -> Result<TelegraphProblem<T>> {
        match self {
            ProblemSource::Registry(id) => {
                lookup(id).ok_or_else(|| Error::Config(format!("unknown problem '{id}'")))
            }
            ProblemSource::File(p) => parse_problem_file(p),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub k: u32,
    pub orders: Vec<usize>,
    /// `None` picks the precision's default.
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub t_eval: f64,
    /// Points per side of the reporting grid.
    pub grid: usize,
    /// Points per side of the error-surface dump.
    pub surface_grid: usize,
    pub precision: Precision,
}

impl RunConfig {
    pub fn new(problem: ProblemSource, k: u32, orders: Vec<usize>) -> Self {
        RunConfig {
            problem,
            k,
            orders,
            tol: None,
            max_iter: None,
            out_dir: None,
            t_eval: 1.0,
            grid: 11,
            surface_grid: 41,
            precision: Precision::Dd,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if self.orders.is_empty() {
            return Err(Error::Config("at least one M is required".into()));
        }
        if let Some(&m) = self.orders.iter().find(|&&m| m < 2) {
            return Err(Error::Config(format!("M must be >= 2, got {m}")));
        }
        if !(0.0..=1.0).contains(&self.t_eval) {
            return Err(Error::Config(format!(
                "t_eval must lie in [0, 1], got {}",
                self.t_eval
            )));
        }
        if self.grid < 1 {
            return Err(Error::Config("grid must be >= 1".into()));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(Error::Config(format!("tol must be > 0, got {tol}")));
            }
        }
        if self.max_iter == Some(0) {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol.unwrap_or(self.precision.default_tol()),
            max_iter: self.max_iter,
            restart_on_breakdown: true,
        }
    }
}

/// One solve in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub problem: String,
    pub k: u32,
    pub order: usize,
    pub status: String,
    /// `(η, ξ, |error|)` at the diagonal probes.
    pub probes: Vec<(f64, f64, f64)>,
    pub l2: f64,
    pub linf: f64,
    pub iterations: usize,
    pub linear_residual: f64,
    pub pde_residual: f64,
    pub wall_time_s: f64,
}

impl BenchmarkRecord {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Row of `norms_<problem>_<k>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormsRow {
    pub problem: String,
    pub k: u32,
    #[serde(rename = "M")]
    pub order: usize,
    pub status: String,
    pub t_eval: f64,
    pub grid_points: usize,
    /// Root of the sum of squared grid errors (not normalized).
    pub l2_rss: f64,
    pub linf: f64,
    pub iterations: usize,
    pub linear_residual: f64,
    pub pde_residual: f64,
    pub wall_time_s: f64,
}

/// Row of `table_<problem>_<k>_<M>.csv` and `errsurface_*.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub eta: f64,
    pub xi: f64,
    pub abs_error: f64,
}

struct SolveOutcome {
    record: BenchmarkRecord,
    surface: Vec<PointError>,
}

fn solve_one<T: Real>(
    problem: &TelegraphProblem<T>,
    cfg: &RunConfig,
    order: usize,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    let disc = Discretization::<T>::uniform(cfg.k, order)?;
    let system = telegraph::assemble(problem, &disc)?;
    let report = telegraph::solve_system(problem, &disc, &system, &cfg.solver_config())?;
    let samples = interior_samples(&disc, 5);
    let pde = pde_residual(&report.phi, problem, &disc, &samples)?.approx_f64();
    let (probes, l2, linf, surface) = match &problem.exact {
        Some(exact) => {
            let table = telegraph::error_table(
                &report.phi,
                exact.as_ref(),
                &diagonal_probes(),
                cfg.t_eval,
                cfg.grid,
            )?;
            let ev = SliceEvaluator::new(&report.phi, T::lit(cfg.t_eval))?;
            let t = T::lit(cfg.t_eval);
            let coords = grid_coords(cfg.surface_grid);
            let mut surface = Vec::with_capacity(coords.len() * coords.len());
            for &a in &coords {
                for &b in &coords {
                    let (ta, tb) = (T::lit(a), T::lit(b));
                    let e = (exact(ta, tb, t) - ev.eval(ta, tb)).abs().approx_f64();
                    surface.push(PointError {
                        eta: a,
                        xi: b,
                        abs_error: e,
                    });
                }
            }
            (table.probes, table.l2, table.linf, surface)
        }
        None => (Vec::new(), f64::NAN, f64::NAN, Vec::new()),
    };
    Ok(SolveOutcome {
        record: BenchmarkRecord {
            problem: problem.name.clone(),
            k: cfg.k,
            order,
            status: "ok".into(),
            probes,
            l2,
            linf,
            iterations: report.iterations,
            linear_residual: report.linear_residual,
            pde_residual: pde,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
        surface,
    })
}

fn run_generic<T: Real>(cfg: &RunConfig) -> Result<Vec<BenchmarkRecord>> {
    let problem = cfg.problem.load::<T>()?;
    let mut records = Vec::with_capacity(cfg.orders.len());
    for &order in &cfg.orders {
        let start = Instant::now();
        match solve_one(&problem, cfg, order) {
            Ok(out) => {
                if let Some(dir) = &cfg.out_dir {
                    write_points(
                        dir.join(format!("table_{}_{}_{}.csv", problem.name, cfg.k, order)),
                        &out.record
                            .probes
                            .iter()
                            .map(|&(eta, xi, abs_error)| PointError { eta, xi, abs_error })
                            .collect::<Vec<_>>(),
                    )?;
                    write_points(
                        dir.join(format!(
                            "errsurface_{}_{}_{}.csv",
                            problem.name, cfg.k, order
                        )),
                        &out.surface,
                    )?;
                }
                records.push(out.record);
            }
            // configuration problems abort; numerical failures are recorded
            Err(e @ (Error::Config(_) | Error::Io(_) | Error::Csv(_) | Error::Expr(_))) => {
                return Err(e)
            }
            Err(e) => records.push(BenchmarkRecord {
                problem: problem.name.clone(),
                k: cfg.k,
                order,
                status: format!("failed: {e}"),
                probes: Vec::new(),
                l2: f64::NAN,
                linf: f64::NAN,
                iterations: e_iterations(&e),
                linear_residual: e_last_residual(&e),
                pde_residual: f64::NAN,
                wall_time_s: start.elapsed().as_secs_f64(),
            }),
        }
    }
    if let Some(dir) = &cfg.out_dir {
        let rows: Vec<NormsRow> = records.iter().map(|r| norms_row(r, cfg)).collect();
        write_csv(
            dir.join(format!("norms_{}_{}.csv", problem.name, cfg.k)),
            &rows,
        )?;
    }
    Ok(records)
}

fn e_iterations(e: &Error) -> usize {
    match e {
        Error::Solver(s) => s.history().map_or(0, |h| h.len()),
        _ => 0,
    }
}

fn e_last_residual(e: &Error) -> f64 {
    match e {
        Error::Solver(s) => s
            .history()
            .and_then(|h| h.last().copied())
            .unwrap_or(f64::NAN),
        _ => f64::NAN,
    }
}

pub fn norms_row(r: &BenchmarkRecord, cfg: &RunConfig) -> NormsRow {
    NormsRow {
        problem: r.problem.clone(),
        k: r.k,
        order: r.order,
        status: r.status.clone(),
        t_eval: cfg.t_eval,
        grid_points: grid_coords(cfg.grid).len(),
        l2_rss: r.l2,
        linf: r.linf,
        iterations: r.iterations,
        linear_residual: r.linear_residual,
        pde_residual: r.pde_residual,
        wall_time_s: r.wall_time_s,
    }
}

/// Solves every `M` of the sweep. With an output directory set, writes
/// `table_*`, `errsurface_*` and `norms_*` CSV files.
pub fn run(cfg: &RunConfig) -> Result<Vec<BenchmarkRecord>> {
    cfg.validate()?;
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir)?;
    }
    match cfg.precision {
        Precision::F64 => run_generic::<f64>(cfg),
        Precision::Dd => run_generic::<DoubleDouble>(cfg),
    }
}

pub fn write_csv<R: Serialize>(path: impl AsRef<Path>, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<R>> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for r in rd.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

fn write_points(path: PathBuf, rows: &[PointError]) -> Result<()> {
    write_csv(path, rows)
}

/// Six significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.5e}")
}

/// Text rendering of a sweep: probe errors per `M`, then the norms.
pub fn format_tables(records: &[BenchmarkRecord]) -> String {
    let mut s = String::new();
    let Some(first) = records.first() else {
        return s;
    };
    s.push_str(&format!("{} (k = {})\n", first.problem, first.k));
    s.push_str(&format!("{:<12}", "(eta, xi)"));
    for r in records {
        s.push_str(&format!("{:>14}", format!("M={}", r.order)));
    }
    s.push('\n');
    for (i, &(a, b)) in diagonal_probes().iter().enumerate() {
        s.push_str(&format!("{:<12}", format!("({a:.1},{b:.1})")));
        for r in records {
            let v = r.probes.get(i).map_or(f64::NAN, |p| p.2);
            s.push_str(&format!("{:>14}", sci(v)));
        }
        s.push('\n');
    }
    for (label, f) in [
        (
            "l2",
            (|r: &BenchmarkRecord| r.l2) as fn(&BenchmarkRecord) -> f64,
        ),
        ("linf", |r| r.linf),
        ("iterations", |r| r.iterations as f64),
    ] {
        s.push_str(&format!("{label:<12}"));
        for r in records {
            let v = f(r);
            let cell = if label == "iterations" {
                format!("{v}")
            } else {
                sci(v)
            };
            s.push_str(&format!("{cell:>14}"));
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    name: Option<String>,
    lambda1: toml::Spanned<toml::Value>,
    lambda2: toml::Spanned<toml::Value>,
    forcing: toml::Spanned<String>,
    f1: toml::Spanned<String>,
    f2: toml::Spanned<String>,
    f3: toml::Spanned<String>,
    f4: toml::Spanned<String>,
    f5: toml::Spanned<String>,
    f6: toml::Spanned<String>,
    exact: Option<toml::Spanned<String>>,
}

fn line_col(src: &str, byte: usize) -> (usize, usize) {
    let before = &src[..byte.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before
        .rfind('\n')
        .map_or(before.len(), |p| before.len() - p - 1)
        + 1;
    (line, col)
}

fn compile<T: Real>(src: &str, key: &str, s: &toml::Spanned<String>) -> Result<Arc<Expr<T>>> {
    Expr::parse(s.get_ref()).map(Arc::new).map_err(|e| {
        // +1 skips the opening quote of a basic string
        let (line, col) = line_col(src, s.span().start + 1 + e.offset);
        Error::Config(format!("{key}: {} (line {line}, column {col})", e.kind))
    })
}

fn constant<T: Real>(src: &str, key: &str, v: &toml::Spanned<toml::Value>) -> Result<T> {
    match v.get_ref() {
        toml::Value::Float(x) => Ok(T::lit(*x)),
        toml::Value::Integer(n) => Ok(T::lit(*n as f64)),
        toml::Value::String(s) => {
            let spanned = toml::Spanned::new(v.span(), s.clone());
            let e = compile::<T>(src, key, &spanned)?;
            let z = T::zero();
            Ok(e.eval(z, z, z))
        }
        other => {
            let (line, col) = line_col(src, v.span().start);
            Err(Error::Config(format!(
                "{key}: expected a number or expression, found {} (line {line}, column {col})",
                other.type_str()
            )))
        }
    }
}

/// Parses a problem definition from TOML text.
///
/// Every function is an expression in `eta`, `xi` and `t`. Boundary and
/// initial data are evaluated on their face, e.g. `f3` at `eta = 0` and
/// `f1` at `t = 0`, so an exact-solution formula can be reused verbatim.
pub fn parse_problem_str<T: Real>(src: &str) -> Result<TelegraphProblem<T>> {
    let file: ProblemFile =
        toml::from_str(src).map_err(|e| Error::Config(format!("problem file: {e}")))?;
    let z = T::zero;
    let o = T::one;
    let f1 = compile::<T>(src, "f1", &file.f1)?;
    let f2 = compile::<T>(src, "f2", &file.f2)?;
    let f3 = compile::<T>(src, "f3", &file.f3)?;
    let f4 = compile::<T>(src, "f4", &file.f4)?;
    let f5 = compile::<T>(src, "f5", &file.f5)?;
    let f6 = compile::<T>(src, "f6", &file.f6)?;
    let forcing = compile::<T>(src, "forcing", &file.forcing)?;
    let exact = file
        .exact
        .as_ref()
        .map(|s| compile::<T>(src, "exact", s))
        .transpose()?;
    Ok(TelegraphProblem {
        name: file.name.unwrap_or_else(|| "custom".into()),
        damping: constant(src, "lambda1", &file.lambda1)?,
        reaction: constant(src, "lambda2", &file.lambda2)?,
        forcing: Arc::new(move |a, b, t| forcing.eval(a, b, t)),
        initial_value: Arc::new(move |a, b| f1.eval(a, b, z())),
        initial_velocity: Arc::new(move |a, b| f2.eval(a, b, z())),
        at_eta0: Arc::new(move |x, t| f3.eval(z(), x, t)),
        at_eta1: Arc::new(move |x, t| f4.eval(o(), x, t)),
        at_xi0: Arc::new(move |a, t| f5.eval(a, z(), t)),
        at_xi1: Arc::new(move |a, t| f6.eval(a, o(), t)),
        exact: exact.map(|e| -> Fn3<T> { Arc::new(move |a, b, t| e.eval(a, b, t)) }),
    })
}

pub fn parse_problem_file<T: Real>(path: impl AsRef<Path>) -> Result<TelegraphProblem<T>> {
    let path = path.as_ref();
    let src = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_problem_str(&src)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids() {
        assert!(lookup::<f64>("example1").is_some());
        assert!(lookup::<f64>("ex2").is_some());
        assert!(lookup::<f64>("3").is_some());
        assert!(lookup::<f64>("example4").is_none());
        assert_eq!(registry::<f64>().len(), 3);
    }

    #[test]
    fn example3_forcing_value() {
        let p = example::<f64>(3).unwrap();
        let v = (p.forcing)(1.0, 1.0, 0.0);
        assert!((v - 22.0 * 1f64.sinh().powi(2)).abs() < 1e-12);
        assert!((v - 30.385).abs() < 1e-3);
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::new(ProblemSource::Registry("1".into()), 1, vec![3]);
        assert!(cfg.validate().is_ok());
        cfg.orders = vec![1];
        assert!(cfg.validate().is_err());
        cfg.orders = vec![3];
        cfg.t_eval = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn expression_error_position() {
        let src = "lambda1 = 1\nlambda2 = 1\nforcing = \"0\"\nf1 = \"sin(\"\nf2 = \"0\"\nf3 = \"0\"\nf4 = \"0\"\nf5 = \"0\"\nf6 = \"0\"\n";
        let err = parse_problem_str::<f64>(src).unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
        assert!(err.contains("column 11"), "{err}");
    }
}
