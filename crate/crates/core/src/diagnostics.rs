//! Sensitivity curves, asymptotic variance, mean squared error and its
//! empirical counterpart.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::functionals::Control;
use crate::influence::{ContaminationPoint, Influence};
use crate::model::{child_seed, domain, mean_over, sample, Population, RegressionModel};
use crate::spec::{EstimatorSpec, FunctionalSpec};
use crate::Dataset;

/// `(n+1)(β̂(X ∪ x0, y ∪ y0) − β̂(X, y))` over a grid. Entries whose refit
/// failed or did not converge are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivitySurface {
    pub grid: Vec<ContaminationPoint>,
    pub values: Vec<Option<Vec<f64>>>,
    pub n: usize,
    /// Seed of the base sample, when it was drawn here.
    pub seed: Option<u64>,
}

impl SensitivitySurface {
    pub fn missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

pub fn sensitivity_curve(
    base: &Dataset,
    estimator: &EstimatorSpec,
    grid: &[ContaminationPoint],
) -> Result<SensitivitySurface> {
    let fit = estimator.fit(base)?;
    if !fit.converged {
        return Err(Error::NotConverged("base fit of the sensitivity curve".into()));
    }
    let scale = (base.n() + 1) as f64;
    let values = grid
        .par_iter()
        .map(|pt| {
            let data = base.with_row(&pt.x0, pt.y0)?;
            Ok(match estimator.fit(&data) {
                Ok(f) if f.converged => Some(
                    f.beta_hat.iter().zip(&fit.beta_hat).map(|(a, b)| scale * (a - b)).collect(),
                ),
                _ => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivitySurface { grid: grid.to_vec(), values, n: base.n(), seed: None })
}

/// Sensitivity curve on a base sample of size `n` drawn with `seed`.
pub fn sensitivity_study(
    model: &RegressionModel,
    n: usize,
    seed: u64,
    estimator: &EstimatorSpec,
    grid: &[ContaminationPoint],
) -> Result<SensitivitySurface> {
    let base = sample(model, n, seed)?;
    let mut s = sensitivity_curve(&base, estimator, grid)?;
    s.seed = Some(seed);
    Ok(s)
}

/// Median and maximum over the grid of `‖SC − IF‖∞`, skipping missing
/// sensitivity values. Also returns how many points were compared.
pub fn sc_if_discrepancy(sc: &SensitivitySurface, inf: &dyn Influence) -> Result<(f64, f64, usize)> {
    let mut d = Vec::with_capacity(sc.grid.len());
    for (pt, v) in sc.grid.iter().zip(&sc.values) {
        if let Some(v) = v {
            let i = inf.at(&pt.x0, pt.y0)?;
            d.push(v.iter().zip(&i).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }
    if d.is_empty() {
        return Err(Error::NotConverged("no sensitivity value available".into()));
    }
    d.sort_by(f64::total_cmp);
    let k = d.len();
    let med = if k % 2 == 1 { d[k / 2] } else { 0.5 * (d[k / 2 - 1] + d[k / 2]) };
    Ok((med, d[k - 1], k))
}

/// `E[IF · IF']` with elementwise Monte-Carlo standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ASVReport {
    pub asv: DMatrix<f64>,
    pub mc_stderr: DMatrix<f64>,
    pub n_draws: usize,
}

impl ASVReport {
    /// Top-left entry, the scalar ASV in simple regression.
    pub fn scalar(&self) -> f64 {
        self.asv[(0, 0)]
    }

    pub fn trace(&self) -> f64 {
        self.asv.trace()
    }

    pub fn trace_stderr(&self) -> f64 {
        self.mc_stderr.diagonal().iter().map(|s| s * s).sum::<f64>().sqrt()
    }
}

/// Averages `IF · IF'` over the population's outer draws. The influence
/// function's own moments come from the inner draws, so the two integrals
/// use independent samples.
pub fn asv_of(pop: &Population, inf: &dyn Influence) -> Result<ASVReport> {
    let p = pop.p();
    let outer = pop.outer_draws();
    let e = mean_over(&outer, |x, y| match inf.at(x, y) {
        Ok(v) => {
            let mut out = Vec::with_capacity(p * p);
            for a in &v {
                for b in &v {
                    out.push(a * b);
                }
            }
            out
        }
        Err(_) => vec![f64::NAN; p * p],
    })?;
    Ok(ASVReport {
        asv: DMatrix::from_row_slice(p, p, &e.mean),
        mc_stderr: DMatrix::from_row_slice(p, p, &e.stderr),
        n_draws: outer.n(),
    })
}

pub fn asv(pop: &Population, spec: &FunctionalSpec, control: &Control) -> Result<ASVReport> {
    let (_, inf) = spec.evaluate(pop, control)?;
    asv_of(pop, inf.as_ref())
}

/// `tr(ASV)/n + ‖bias‖²`, the trace of the mean squared error matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseReport {
    pub value: f64,
    pub stderr: f64,
    pub squared_bias: f64,
    pub asv_trace: f64,
}

pub fn mse(pop: &Population, spec: &FunctionalSpec, n: usize, control: &Control) -> Result<MseReport> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let (fr, inf) = spec.evaluate(pop, control)?;
    let a = asv_of(pop, inf.as_ref())?;
    let squared_bias: f64 = fr.bias.iter().map(|b| b * b).sum();
    Ok(MseReport {
        value: a.trace() / n as f64 + squared_bias,
        stderr: a.trace_stderr() / n as f64,
        squared_bias,
        asv_trace: a.trace(),
    })
}

/// `(1/R)Σ‖β̂_r − β0‖²` over replicate samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseHat {
    pub value: f64,
    pub stderr: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Replicate `r` is drawn with `child_seed(seed, REPLICATE, r)`.
pub fn mse_hat(
    model: &RegressionModel,
    estimator: &EstimatorSpec,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<MseHat> {
    if replicates < 2 {
        return invalid("at least two replicates are needed");
    }
    let seeds: Vec<u64> = (0..replicates as u64).map(|r| child_seed(seed, domain::REPLICATE, r)).collect();
    mse_hat_with_seeds(model, estimator, n, &seeds)
}

/// Empirical MSE with explicit per-replicate sample seeds. Replicates whose
/// fit fails or does not converge are excluded; more than 10% exclusions is
/// an error.
pub fn mse_hat_with_seeds(
    model: &RegressionModel,
    estimator: &EstimatorSpec,
    n: usize,
    seeds: &[u64],
) -> Result<MseHat> {
    let beta0 = model.beta0();
    let dev: Vec<Option<f64>> = seeds
        .par_iter()
        .map(|&s| {
            let data = sample(model, n, s)?;
            Ok(match estimator.fit(&data) {
                Ok(f) if f.converged => {
                    Some(f.beta_hat.iter().zip(beta0).map(|(b, t)| (b - t) * (b - t)).sum())
                }
                _ => None,
            })
        })
        .collect::<Result<_>>()?;
    let used: Vec<f64> = dev.iter().flatten().copied().collect();
    let excluded = dev.len() - used.len();
    if excluded * 10 > dev.len() {
        return Err(Error::TooManyFailures { failed: excluded, total: dev.len() });
    }
    let k = used.len() as f64;
    let value = used.iter().sum::<f64>() / k;
    let var = if used.len() > 1 {
        used.iter().map(|d| (d - value).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(MseHat { value, stderr: (var / k).sqrt(), used: used.len(), excluded })
}
