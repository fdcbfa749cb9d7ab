//! One function per experiment type. Each returns the files to write as
//! `(name, contents)` pairs; nothing touches the filesystem here.

use penif::diagnostics::{asv, mse, mse_hat, sensitivity_curve};
use penif::estimators::FitOptions;
use penif::influence::{default_grid, square_grid, surface, ContaminationPoint};
use penif::model::{child_seed, domain, sample};
use penif::verify::{self, Report, Settings};
use penif::{Control, EstimatorSpec, FunctionalSpec, MCConfig, Method, Population};

use crate::config::{Config, Experiment};
use crate::output::{curve_csv, quoted, surface_csv};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl From<penif::Error> for Failure {
    fn from(e: penif::Error) -> Self {
        match e {
            penif::Error::InvalidInput(m) => Failure::Config(m),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

pub struct Outcome {
    pub files: Vec<(String, String)>,
    /// False when a verification check failed.
    pub passed: bool,
}

fn control() -> Control {
    Control { tol: 1e-10, max_iter: 100_000, max_outer: 1000 }
}

fn population(cfg: &Config) -> Result<Population, Failure> {
    let model = cfg.model().map_err(Failure::Config)?;
    Ok(Population::new(model, MCConfig::new(cfg.n_draws, cfg.seed)?))
}

fn contamination_grid(cfg: &Config) -> Vec<ContaminationPoint> {
    match &cfg.grid.contamination {
        Some(sq) => square_grid(sq.lo, sq.hi, sq.points),
        None => default_grid(),
    }
}

fn range(r: &Option<crate::config::Range>, what: &str) -> Result<Vec<f64>, Failure> {
    r.as_ref()
        .ok_or_else(|| Failure::Config(format!("missing grid.{what}")))?
        .values()
        .map_err(Failure::Config)
}

fn sizes(cfg: &Config) -> Result<Vec<usize>, Failure> {
    cfg.grid.n.clone().ok_or_else(|| Failure::Config("missing grid.n".into()))
}

fn estimator(cfg: &Config, spec: FunctionalSpec) -> EstimatorSpec {
    EstimatorSpec::with_options(spec, FitOptions { seed: cfg.seed, ..FitOptions::default() })
}

pub fn run(cfg: &Config) -> Result<Outcome, Failure> {
    let files = match cfg.experiment {
        Experiment::BiasCurve => bias_curve(cfg)?,
        Experiment::IfSurface => if_surface(cfg)?,
        Experiment::ScSurface => sc_surface(cfg)?,
        Experiment::AsvCurve => asv_curve(cfg)?,
        Experiment::MseCurve => mse_curve(cfg)?,
        Experiment::MseConvergence => mse_convergence(cfg)?,
        Experiment::Verify => return verify_suite(cfg),
    };
    Ok(Outcome { files, passed: true })
}

/// Bias of the first coefficient as its true value moves over `grid.beta0`.
/// Closed-form values carry a zero standard error; values solved on the
/// Monte-Carlo draws have none reported.
fn bias_curve(cfg: &Config) -> Result<Vec<(String, String)>, Failure> {
    let base = population(cfg)?;
    let grid = range(&cfg.grid.beta0, "beta0")?;
    let specs = cfg.specs().map_err(Failure::Config)?;
    let mut files = Vec::new();
    for spec in &specs {
        let mut rows = Vec::new();
        for &b in &grid {
            let mut beta0 = cfg.model.beta0.clone();
            beta0[0] = b;
            let pop = base.with_beta0(beta0)?;
            let (fr, _) = spec.evaluate(&pop, &control())?;
            let se = (fr.method == Method::ClosedForm).then_some(0.0);
            rows.push((b, fr.bias[0], se));
        }
        files.push((format!("bias_{}.csv", spec.label()), curve_csv(&rows)));
    }
    Ok(files)
}

fn if_surface(cfg: &Config) -> Result<Vec<(String, String)>, Failure> {
    let pop = population(cfg)?;
    let grid = contamination_grid(cfg);
    let mut files = Vec::new();
    for spec in cfg.specs().map_err(Failure::Config)? {
        let (_, inf) = spec.evaluate(&pop, &control())?;
        let s = surface(inf.as_ref(), &grid, spec.label())?;
        let rows: Vec<_> = s.grid.iter().zip(&s.values).map(|(p, v)| (p.x0[0], p.y0, Some(v[0]))).collect();
        files.push((format!("if_{}.csv", spec.label()), surface_csv(&rows)));
    }
    Ok(files)
}

/// One base sample per size, shared by all estimators.
fn sc_surface(cfg: &Config) -> Result<Vec<(String, String)>, Failure> {
    let model = cfg.model().map_err(Failure::Config)?;
    let grid = contamination_grid(cfg);
    let specs = cfg.specs().map_err(Failure::Config)?;
    let mut files = Vec::new();
    for n in sizes(cfg)? {
        let base = sample(&model, n, child_seed(cfg.seed, domain::SAMPLE, n as u64))?;
        for spec in &specs {
            let sc = sensitivity_curve(&base, &estimator(cfg, spec.clone()), &grid)?;
            let rows: Vec<_> =
                sc.grid.iter().zip(&sc.values).map(|(p, v)| (p.x0[0], p.y0, v.as_ref().map(|v| v[0]))).collect();
            files.push((format!("sc_{}_n{n}.csv", spec.label()), surface_csv(&rows)));
        }
    }
    Ok(files)
}

/// ASV over `grid.lambda`; the trace when there are several predictors.
fn asv_curve(cfg: &Config) -> Result<Vec<(String, String)>, Failure> {
    let pop = population(cfg)?;
    let lambdas = range(&cfg.grid.lambda, "lambda")?;
    let mut files = Vec::new();
    for spec in cfg.specs().map_err(Failure::Config)? {
        let mut rows = Vec::new();
        for &l in &lambdas {
            let r = asv(&pop, &spec.with_lambda(l)?, &control())?;
            rows.push((l, r.trace(), Some(r.trace_stderr())));
        }
        files.push((format!("asv_{}.csv", spec.label()), curve_csv(&rows)));
    }
    Ok(files)
}

/// MSE over `grid.lambda` at the single sample size in `grid.n`.
fn mse_curve(cfg: &Config) -> Result<Vec<(String, String)>, Failure> {
    let pop = population(cfg)?;
    let lambdas = range(&cfg.grid.lambda, "lambda")?;
    let n = sizes(cfg)?[0];
    let mut files = Vec::new();
    for spec in cfg.specs().map_err(Failure::Config)? {
        let mut rows = Vec::new();
        for &l in &lambdas {
            let m = mse(&pop, &spec.with_lambda(l)?, n, &control())?;
            rows.push((l, m.value, Some(m.stderr)));
        }
        files.push((format!("mse_{}.csv", spec.label()), curve_csv(&rows)));
    }
    Ok(files)
}

/// `n·MSE` from the influence function and `n·MSE-hat` from replicate fits,
/// over the sample sizes in `grid.n`.
fn mse_convergence(cfg: &Config) -> Result<Vec<(String, String)>, Failure> {
    let pop = population(cfg)?;
    let ns = sizes(cfg)?;
    let mut files = Vec::new();
    for spec in cfg.specs().map_err(Failure::Config)? {
        let est = estimator(cfg, spec.clone());
        let mut theory = Vec::new();
        let mut empirical = Vec::new();
        for (k, &n) in ns.iter().enumerate() {
            let nf = n as f64;
            let m = mse(&pop, &spec, n, &control())?;
            theory.push((nf, nf * m.value, Some(nf * m.stderr)));
            let seed = child_seed(cfg.seed, domain::REPLICATE, k as u64);
            let h = mse_hat(pop.model(), &est, n, cfg.replicates, seed)?;
            empirical.push((nf, nf * h.value, Some(nf * h.stderr)));
        }
        files.push((format!("nmse_{}.csv", spec.label()), curve_csv(&theory)));
        files.push((format!("nmse_hat_{}.csv", spec.label()), curve_csv(&empirical)));
    }
    Ok(files)
}

pub fn verify_settings(cfg: &Config) -> Settings {
    let d = Settings::default();
    let mut s = Settings {
        n_draws: cfg.n_draws,
        seed: cfg.seed,
        lambda: cfg.lambda,
        lambda_robust: cfg.lambda_robust.unwrap_or(d.lambda_robust),
        mse_replicates: cfg.replicates,
        ..d
    };
    if let Some(n) = &cfg.grid.n {
        if let [a, b] = n.as_slice() {
            s.sc_sizes = [*a, *b];
        }
        s.mse_n = *n.last().expect("validated non-empty");
    }
    if let Some(sq) = &cfg.grid.contamination {
        s.sc_grid_points = sq.points;
    }
    s
}

pub fn verify_suite(cfg: &Config) -> Result<Outcome, Failure> {
    let ids: Vec<usize> = cfg.checks.clone().unwrap_or_else(|| (1..=10).collect());
    let reports: Vec<Report> = verify::run(&verify_settings(cfg), &ids)?;
    // Timings are left out so that reruns reproduce the file exactly.
    let mut csv = String::from("check,passed,title,detail\n");
    for r in &reports {
        println!("{} {:>2} [{:.1}s] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.seconds, r.title, r.detail);
        csv.push_str(&format!("{},{},{},{}\n", r.id, r.passed, quoted(r.title), quoted(&r.detail)));
    }
    Ok(Outcome { passed: reports.iter().all(|r| r.passed), files: vec![("verify.csv".into(), csv)] })
}
