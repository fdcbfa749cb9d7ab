//! Brute-force reference computations, deliberately independent of the
//! coordinate-descent solvers and of the closed-form influence functions.
//!
//! * [`oracle_minimize`] minimises a population objective over a refining
//!   grid with common random numbers.
//! * `finite_eps_*` recompute the functional at `(1−ε)H0 + εδ_(x0,y0)` and
//!   return the Richardson-extrapolated slope, the quantity an influence
//!   function must match.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::functionals::{
    cd_on_moments, weighted_moments, FunctionalResult, Method, PointMass, SparseLTSParams,
};
use crate::losses::LossSpec;
use crate::model::{Dataset, Population, RegressionModel, CHUNK};
use crate::normal;
use crate::penalties::{PenaltyKind, PenaltySpec};

/// Contamination sizes used for the finite-ε slopes.
pub const EPS: [f64; 2] = [1e-2, 1e-3];

/// Number of batches for batch-means standard errors.
pub const BATCHES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleObjective {
    /// `E[ρ(y − x'β)] + 2λΣJ(β_j)`.
    PenalizedM { loss: LossSpec, penalty: PenaltySpec },
    /// Mean of `r²` over the lowest α mass of `|r|`, plus `αλ‖β‖₁`.
    SparseLts(SparseLTSParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub center: Vec<f64>,
    pub half_width: f64,
    pub points: usize,
    /// Final grid spacing.
    pub resolution: f64,
}

impl GridSpec {
    pub fn around(center: Vec<f64>) -> Self {
        Self { center, half_width: 3.0, points: 41, resolution: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub beta: Vec<f64>,
    /// Batch-means standard error of the minimiser.
    pub stderr: Vec<f64>,
    pub resolution: f64,
}

impl OracleResult {
    pub fn into_functional(self, model: &RegressionModel, pop: &Population) -> FunctionalResult {
        let bias = self.beta.iter().zip(model.beta0()).map(|(b, b0)| b - b0).collect();
        FunctionalResult {
            beta: self.beta,
            bias,
            method: Method::Oracle,
            iterations: 0,
            converged: true,
            mc: Some(*pop.cfg()),
        }
    }
}

/// Population objective evaluated on the empirical distribution of `data`.
pub fn objective_value(data: &Dataset, obj: &OracleObjective, beta: &[f64]) -> f64 {
    let n = data.n();
    let p = data.p();
    let resid = |i: usize| data.y[i] - (0..p).map(|j| data.x[(i, j)] * beta[j]).sum::<f64>();
    match obj {
        OracleObjective::PenalizedM { loss, penalty } => {
            let total: f64 = (0..n).map(|i| loss.rho(resid(i))).sum();
            total / n as f64
                + 2.0 * penalty.lambda * beta.iter().map(|b| penalty.j(*b)).sum::<f64>()
        }
        OracleObjective::SparseLts(params) => {
            let mut r2: Vec<f64> = (0..n).map(|i| resid(i).powi(2)).collect();
            let mass = params.alpha * n as f64;
            lowest_mass_sum(&mut r2, mass) / n as f64
                + params.alpha * params.lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
        }
    }
}

// Sum of the smallest values carrying total count `mass`, the boundary
// value entering with its fractional share.
fn lowest_mass_sum(v: &mut [f64], mass: f64) -> f64 {
    let whole = mass.floor() as usize;
    let frac = mass - whole as f64;
    if whole >= v.len() {
        return v.iter().sum();
    }
    let (lower, nth, _) = v.select_nth_unstable_by(whole, f64::total_cmp);
    lower.iter().sum::<f64>() + frac * *nth
}

fn grid_axis(center: f64, half: f64, points: usize) -> Vec<f64> {
    let mut axis: Vec<f64> = (0..points)
        .map(|i| center - half + 2.0 * half * i as f64 / (points - 1) as f64)
        .collect();
    if center - half < 0.0 && center + half > 0.0 {
        axis.push(0.0);
    }
    axis
}

fn argmin_on(data: &Dataset, obj: &OracleObjective, grid: &GridSpec) -> Result<(Vec<f64>, f64)> {
    let mut center = grid.center.clone();
    let mut half = grid.half_width;
    let mut first = true;
    loop {
        let axes: Vec<Vec<f64>> = center.iter().map(|c| grid_axis(*c, half, grid.points)).collect();
        let mut cands: Vec<(Vec<f64>, Vec<usize>)> = vec![(Vec::new(), Vec::new())];
        for axis in &axes {
            cands = cands
                .into_iter()
                .flat_map(|(b, idx)| {
                    axis.iter().enumerate().map(move |(k, v)| {
                        let mut b = b.clone();
                        let mut idx = idx.clone();
                        b.push(*v);
                        idx.push(k);
                        (b, idx)
                    })
                })
                .collect();
        }
        let vals: Vec<f64> = cands.par_iter().map(|(b, _)| objective_value(data, obj, b)).collect();
        let mut best = 0;
        for (i, v) in vals.iter().enumerate() {
            if *v < vals[best] {
                best = i;
            }
        }
        let (beta, idx) = &cands[best];
        if first && idx.iter().any(|k| *k == 0 || *k == grid.points - 1) {
            return Err(Error::GridBoundary { at: beta.clone() });
        }
        first = false;
        let spacing = 2.0 * half / (grid.points - 1) as f64;
        if spacing <= grid.resolution {
            return Ok((beta.clone(), spacing));
        }
        center = beta.clone();
        half = 2.0 * spacing;
    }
}

fn batches(data: &Dataset) -> Vec<Dataset> {
    let n = data.n();
    (0..BATCHES)
        .map(|b| data.rows(b * n / BATCHES, (b + 1) * n / BATCHES))
        .collect()
}

fn batch_stderr(values: &[Vec<f64>]) -> Vec<f64> {
    let b = values.len() as f64;
    let p = values[0].len();
    (0..p)
        .map(|j| {
            let mean = values.iter().map(|v| v[j]).sum::<f64>() / b;
            let var = values.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / (b - 1.0);
            (var / b).sqrt()
        })
        .collect()
}

/// Grid minimiser of the population objective over the draws of `pop`.
/// Fails when the first-level minimum sits on the grid boundary.
pub fn oracle_minimize(
    pop: &Population,
    obj: &OracleObjective,
    grid: &GridSpec,
) -> Result<OracleResult> {
    let p = pop.p();
    if p > 2 {
        return Err(Error::Unsupported("grid oracle handles p <= 2 only".into()));
    }
    if grid.center.len() != p || grid.points < 3 || !(grid.half_width > 0.0) || !(grid.resolution > 0.0) {
        return invalid("malformed oracle grid");
    }
    let (beta, resolution) = argmin_on(pop.draws(), obj, grid)?;
    let per_batch: Vec<Vec<f64>> = batches(pop.draws())
        .iter()
        .map(|d| argmin_on(d, obj, grid).map(|(b, _)| b))
        .collect::<Result<_>>()?;
    Ok(OracleResult { beta, stderr: batch_stderr(&per_batch), resolution })
}

/// A finite-ε influence estimate and its batch-means standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteEpsIF {
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Richardson extrapolation of two difference quotients `s(ε) = IF + cε + …`.
pub fn richardson(e1: f64, s1: f64, e2: f64, s2: f64) -> f64 {
    (e1 * s2 - e2 * s1) / (e1 - e2)
}

fn slope_from(b0: &[f64], be: &[[f64; 2]]) -> Vec<f64> {
    b0.iter()
        .enumerate()
        .map(|(j, b)| {
            let s1 = (be[j][0] - b) / EPS[0];
            let s2 = (be[j][1] - b) / EPS[1];
            richardson(EPS[0], s1, EPS[1], s2)
        })
        .collect()
}

// E_ε[ψ(y − xβ) x] in simple regression.
fn score_1d(data: &Dataset, loss: &LossSpec, beta: f64, point: Option<&PointMass>) -> f64 {
    let n = data.n();
    let sums: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut s = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let x = data.x[(i, 0)];
                s += loss.psi(data.y[i] - x * beta) * x;
            }
            s
        })
        .collect();
    let mean = sums.iter().sum::<f64>() / n as f64;
    match point {
        None => mean,
        Some(pm) => {
            let x0 = pm.x0[0];
            (1.0 - pm.eps) * mean + pm.eps * loss.psi(pm.y0 - x0 * beta) * x0
        }
    }
}

// Root of an increasing-through-zero function g, bracketed by walking from
// `start`. The walk never crosses `barrier` (exclusive) when given.
fn root_near<G: Fn(f64) -> f64>(g: G, start: f64, barrier: Option<f64>) -> Option<f64> {
    let g0 = g(start);
    if g0 == 0.0 {
        return Some(start);
    }
    let dir = if g0 > 0.0 { -1.0 } else { 1.0 };
    let mut step = 1e-3 * (1.0 + start.abs());
    let (mut a, mut ga) = (start, g0);
    let (mut b, mut gb);
    loop {
        b = start + dir * step;
        if let Some(z) = barrier {
            if (b - z) * (start - z) <= 0.0 {
                return None;
            }
        }
        gb = g(b);
        if gb == 0.0 {
            return Some(b);
        }
        if (gb > 0.0) != (ga > 0.0) {
            break;
        }
        a = b;
        ga = gb;
        step *= 2.0;
        if step > 1e6 {
            return None;
        }
    }
    // Illinois regula falsi.
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * gb - b * ga) / (gb - ga);
        let gc = g(c);
        if gc == 0.0 || (b - a).abs() <= 1e-15 * (1.0 + c.abs()) {
            return Some(c);
        }
        if (gc > 0.0) == (gb > 0.0) {
            b = c;
            gb = gc;
            if side == -1 {
                ga /= 2.0;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb /= 2.0;
            }
            side = 1;
        }
    }
    Some(0.5 * (a + b))
}

// Penalised M-functional in simple regression on `data` (+ point mass),
// found from its stationarity condition near `reference`.
fn m_functional_1d(
    data: &Dataset,
    loss: &LossSpec,
    penalty: &PenaltySpec,
    point: Option<&PointMass>,
    reference: f64,
) -> Result<f64> {
    let lam = penalty.lambda;
    let kinked = penalty.is_sparse();
    let jp = |b: f64| penalty.j_prime(b).unwrap_or(0.0);
    let g = |b: f64| -score_1d(data, loss, b, point) + 2.0 * lam * jp(b);
    if kinked {
        let zero_ok = score_1d(data, loss, 0.0, point).abs() <= 2.0 * lam;
        if reference == 0.0 {
            if zero_ok {
                return Ok(0.0);
            }
            return Err(Error::NotConverged("functional leaves zero under contamination".into()));
        }
        return match root_near(g, reference, Some(0.0)) {
            Some(b) => Ok(b),
            None if zero_ok => Ok(0.0),
            None => Err(Error::NotConverged("no stationary point on the reference side".into())),
        };
    }
    root_near(g, reference, None)
        .ok_or_else(|| Error::NotConverged("no stationary point found".into()))
}

fn require_p1(pop: &Population) -> Result<()> {
    if pop.p() != 1 {
        return Err(Error::Unsupported("this oracle handles simple regression only".into()));
    }
    Ok(())
}

/// Finite-ε slope for a penalised M-functional in simple regression.
///
/// The functional is located from its (sub)gradient condition. For kinked
/// penalties the side of zero of the uncontaminated value is kept and the
/// zero condition is checked explicitly.
pub fn finite_eps_if_m(
    pop: &Population,
    loss: &LossSpec,
    penalty: &PenaltySpec,
    x0: f64,
    y0: f64,
) -> Result<FiniteEpsIF> {
    require_p1(pop)?;
    let slope = |data: &Dataset| -> Result<f64> {
        let b0 = m_functional_1d(data, loss, penalty, None, pop.model().beta0()[0])?;
        let mut be = [0.0; 2];
        for (k, eps) in EPS.iter().enumerate() {
            let pm = PointMass { eps: *eps, x0: vec![x0], y0 };
            be[k] = m_functional_1d(data, loss, penalty, Some(&pm), b0)?;
        }
        Ok(slope_from(&[b0], &[be])[0])
    };
    let value = slope(pop.draws())?;
    let per_batch: Vec<Vec<f64>> = batches(pop.draws())
        .iter()
        .map(|d| slope(d).map(|s| vec![s]))
        .collect::<Result<_>>()?;
    Ok(FiniteEpsIF { value: vec![value], stderr: batch_stderr(&per_batch) })
}

/// Finite-ε slope for a quadratic-loss functional in multiple regression,
/// each contaminated functional solved by coordinate descent to 1e-14.
pub fn finite_eps_if_cd(
    pop: &Population,
    penalty: &PenaltySpec,
    x0: &[f64],
    y0: f64,
) -> Result<FiniteEpsIF> {
    if x0.len() != pop.p() {
        return invalid("contamination point has the wrong dimension");
    }
    if matches!(penalty.kind, PenaltyKind::TanhK { .. }) {
        return Err(Error::Unsupported("finite-ε oracle for tanh penalties".into()));
    }
    let slope = |data: &Dataset| -> Result<Vec<f64>> {
        let solve = |point: Option<&PointMass>| -> Result<Vec<f64>> {
            let mom = weighted_moments(data, &vec![0.0; x0.len()], |_| 1.0, point);
            let mut beta = pop.model().beta0().to_vec();
            let (_, ok) = cd_on_moments(&mom, penalty, &mut beta, 1e-14, 100_000)?;
            if !ok {
                return Err(Error::NotConverged("oracle coordinate descent".into()));
            }
            Ok(beta)
        };
        let b0 = solve(None)?;
        let mut be = vec![[0.0; 2]; x0.len()];
        for (k, eps) in EPS.iter().enumerate() {
            let pm = PointMass { eps: *eps, x0: x0.to_vec(), y0 };
            for (j, v) in solve(Some(&pm))?.into_iter().enumerate() {
                be[j][k] = v;
            }
        }
        Ok(slope_from(&b0, &be))
    };
    let value = slope(pop.draws())?;
    let per_batch: Vec<Vec<f64>> = batches(pop.draws()).iter().map(slope).collect::<Result<_>>()?;
    Ok(FiniteEpsIF { value, stderr: batch_stderr(&per_batch) })
}

/// Sparse LTS objective at `(1−ε)H0 + εδ_(x0,y0)` for normal simple
/// regression, evaluated exactly. Under H0 the residual `y − xβ` is
/// `N(0, σ² + (β0−β)²E[x²])`; the trimmed term integrates `r²` over the
/// lowest α mass of `|r|`, splitting the atom if it straddles the cut.
pub fn sparse_lts_contaminated_objective(
    model: &RegressionModel,
    params: &SparseLTSParams,
    point: Option<&PointMass>,
    beta: f64,
) -> f64 {
    let alpha = params.alpha;
    let e2 = model.second_moments()[0];
    let b0 = model.beta0()[0];
    let s = (model.sigma().powi(2) + (b0 - beta).powi(2) * e2).sqrt();
    let pen = alpha * params.lambda * beta.abs();
    let trunc = |c: f64| s * s * normal::truncated_second_moment(c);
    let (eps, r0) = match point {
        None => (0.0, 0.0),
        Some(pm) => (pm.eps, (pm.y0 - pm.x0[0] * beta).abs()),
    };
    if eps == 0.0 {
        let c = normal::quantile((1.0 + alpha) / 2.0);
        return trunc(c) + pen;
    }
    let w = 1.0 - eps;
    // Cut if the atom is excluded: the continuous part alone carries α.
    let excluded_cut = if alpha / w < 1.0 {
        s * normal::quantile((1.0 + alpha / w) / 2.0)
    } else {
        f64::INFINITY
    };
    if r0 > excluded_cut {
        return w * trunc(excluded_cut / s) + pen;
    }
    let included_cut = if alpha > eps {
        s * normal::quantile((1.0 + (alpha - eps) / w) / 2.0)
    } else {
        0.0
    };
    if r0 <= included_cut {
        return w * trunc(included_cut / s) + eps * r0 * r0 + pen;
    }
    let below = w * (2.0 * normal::cdf(r0 / s) - 1.0);
    w * trunc(r0 / s) + (alpha - below) * r0 * r0 + pen
}

// Golden-section minimum of f on [a, b].
fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn sparse_lts_exact(
    model: &RegressionModel,
    params: &SparseLTSParams,
    point: Option<&PointMass>,
) -> f64 {
    let f = |b: f64| sparse_lts_contaminated_objective(model, params, point, b);
    let b0 = model.beta0()[0];
    let reach = 2.0 * (1.0 + b0.abs());
    let side = |lo: f64, hi: f64| {
        let b = golden(f, lo, hi);
        (b, f(b))
    };
    let (bp, fp) = side(0.0, reach);
    let (bn, fn_) = side(-reach, 0.0);
    let f0 = f(0.0);
    if f0 <= fp && f0 <= fn_ {
        0.0
    } else if fp <= fn_ {
        bp
    } else {
        bn
    }
}

/// Finite-ε slope for the sparse LTS functional in normal simple
/// regression, using the exact contaminated objective (no Monte Carlo, so
/// the standard error is zero).
pub fn finite_eps_if_sparse_lts(
    model: &RegressionModel,
    params: &SparseLTSParams,
    x0: f64,
    y0: f64,
) -> Result<FiniteEpsIF> {
    if model.p() != 1 || !model.is_normal() {
        return Err(Error::Unsupported("sparse LTS oracle needs normal simple regression".into()));
    }
    let b0 = sparse_lts_exact(model, params, None);
    let mut be = [0.0; 2];
    for (k, eps) in EPS.iter().enumerate() {
        let pm = PointMass { eps: *eps, x0: vec![x0], y0 };
        be[k] = sparse_lts_exact(model, params, Some(&pm));
    }
    Ok(FiniteEpsIF { value: slope_from(&[b0], &[be]), stderr: vec![0.0] })
}

/// Sparse LTS functional value from the exact objective.
pub fn sparse_lts_exact_value(model: &RegressionModel, params: &SparseLTSParams) -> Result<f64> {
    if model.p() != 1 || !model.is_normal() {
        return Err(Error::Unsupported("sparse LTS oracle needs normal simple regression".into()));
    }
    Ok(sparse_lts_exact(model, params, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MCConfig;

    fn pop(beta0: Vec<f64>, n: usize) -> Population {
        Population::new(RegressionModel::new(beta0, 1.0).unwrap(), MCConfig::new(n, 17).unwrap())
    }

    #[test]
    fn lowest_mass_sum_fractional() {
        let mut v = vec![4.0, 1.0, 3.0, 2.0];
        assert_eq!(lowest_mass_sum(&mut v, 2.5), 1.0 + 2.0 + 0.5 * 3.0);
        let mut v = vec![4.0, 1.0];
        assert_eq!(lowest_mass_sum(&mut v, 2.0), 5.0);
    }

    #[test]
    fn richardson_removes_linear_term() {
        let s = |e: f64| 3.0 + 7.0 * e;
        assert!((richardson(1e-2, s(1e-2), 1e-3, s(1e-3)) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lasso_oracle_matches_closed_form() {
        let pp = pop(vec![1.5], 100_000);
        let obj = OracleObjective::PenalizedM {
            loss: LossSpec::quadratic(),
            penalty: PenaltySpec::l1(0.1).unwrap(),
        };
        let r = oracle_minimize(&pp, &obj, &GridSpec::around(vec![1.5])).unwrap();
        assert!(r.resolution <= 1e-4);
        assert!((r.beta[0] - 1.4).abs() < 1e-3 + 3.0 * r.stderr[0] + 0.01, "{r:?}");
    }

    #[test]
    fn oracle_keeps_exact_zero() {
        let pp = pop(vec![0.05], 20_000);
        let obj = OracleObjective::PenalizedM {
            loss: LossSpec::quadratic(),
            penalty: PenaltySpec::l1(0.1).unwrap(),
        };
        let r = oracle_minimize(&pp, &obj, &GridSpec::around(vec![0.05])).unwrap();
        assert_eq!(r.beta[0], 0.0);
    }

    #[test]
    fn grid_boundary_is_reported() {
        let pp = pop(vec![5.0], 10_000);
        let obj = OracleObjective::PenalizedM { loss: LossSpec::quadratic(), penalty: PenaltySpec::none() };
        let g = GridSpec { center: vec![0.0], half_width: 1.0, points: 41, resolution: 1e-4 };
        assert!(matches!(oracle_minimize(&pp, &obj, &g), Err(Error::GridBoundary { .. })));
    }

    #[test]
    fn unpenalized_oracle_is_consistent_for_all_losses() {
        let pp = pop(vec![1.5], 50_000);
        for loss in [LossSpec::quadratic(), LossSpec::huber(), LossSpec::biweight()] {
            let obj = OracleObjective::PenalizedM { loss, penalty: PenaltySpec::none() };
            let r = oracle_minimize(&pp, &obj, &GridSpec::around(vec![1.0])).unwrap();
            assert!((r.beta[0] - 1.5).abs() < 1e-4 + 4.0 * r.stderr[0], "{:?} {r:?}", loss.kind);
        }
    }

    #[test]
    fn two_dimensional_oracle() {
        let pp = pop(vec![1.5, 0.0], 20_000);
        let obj = OracleObjective::PenalizedM {
            loss: LossSpec::quadratic(),
            penalty: PenaltySpec::l1(0.1).unwrap(),
        };
        let r = oracle_minimize(&pp, &obj, &GridSpec::around(vec![1.0, 0.5])).unwrap();
        assert!((r.beta[0] - 1.4).abs() < 0.03);
        assert_eq!(r.beta[1], 0.0);
    }

    #[test]
    fn exact_sparse_lts_objective_matches_monte_carlo() {
        let model = RegressionModel::new(vec![1.5], 1.0).unwrap();
        let params = SparseLTSParams::with_lambda(0.1).unwrap();
        let pp = pop(vec![1.5], 200_000);
        let pm = PointMass { eps: 0.05, x0: vec![2.0], y0: 1.0 };
        // Contaminated empirical distribution: replace a 5% block by the point.
        let n = pp.draws().n();
        let k = (pm.eps * n as f64) as usize;
        let mut d = pp.draws().clone();
        for i in 0..k {
            d.x[(i, 0)] = 2.0;
            d.y[i] = 1.0;
        }
        for beta in [0.9, 1.2, 1.5] {
            let exact = sparse_lts_contaminated_objective(&model, &params, Some(&pm), beta);
            let mc = objective_value(&d, &OracleObjective::SparseLts(params), &[beta]);
            assert!((exact - mc).abs() < 0.01, "beta {beta}: {exact} vs {mc}");
        }
    }

    #[test]
    fn exact_sparse_lts_value_matches_closed_form() {
        let model = RegressionModel::new(vec![1.5], 1.0).unwrap();
        let params = SparseLTSParams::with_lambda(0.1).unwrap();
        let b = sparse_lts_exact_value(&model, &params).unwrap();
        assert!((b - 1.364323).abs() < 1e-6, "{b}");
    }

    #[test]
    fn least_squares_finite_eps_slope() {
        let pp = pop(vec![1.5], 100_000);
        let r = finite_eps_if_m(&pp, &LossSpec::quadratic(), &PenaltySpec::none(), 2.0, 0.0).unwrap();
        // x0 (y0 − x0 β0) / E[x²] = −6 up to Monte-Carlo error in the moments.
        assert!((r.value[0] + 6.0).abs() < 0.1, "{r:?}");
    }
}
