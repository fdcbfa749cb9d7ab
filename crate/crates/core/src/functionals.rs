//! Population-level functionals: closed forms for simple regression,
//! coordinate descent and IRLS on Monte-Carlo moments, and bias.
//!
//! All iterative solvers work on (weighted) second moments
//! `M = E[w xx']`, `m = E[w xy]`. The coordinate update for the objective
//! `β'Mβ − 2m'β + 2λΣJ(β_j)` is [`PenaltySpec::coordinate_argmin`] applied to
//! the partial-residual score `m_j − Σ_{k≠j} M_jk β_k`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::losses::LossSpec;
use crate::model::{Dataset, MCConfig, Population, RegressionModel, CHUNK};
use crate::normal;
use crate::penalties::{soft, PenaltyKind, PenaltySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    CoordDescent,
    Irls,
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalResult {
    pub beta: Vec<f64>,
    pub bias: Vec<f64>,
    pub method: Method,
    pub iterations: usize,
    /// When false the solver stopped at its iteration limit and `beta` is
    /// the last iterate.
    pub converged: bool,
    pub mc: Option<MCConfig>,
}

impl FunctionalResult {
    fn new(model: &RegressionModel, beta: Vec<f64>, method: Method) -> Self {
        let bias = bias_of(&beta, model);
        Self { beta, bias, method, iterations: 0, converged: true, mc: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseLTSParams {
    pub alpha: f64,
    pub lambda: f64,
}

impl SparseLTSParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha > 0.5 && alpha <= 1.0) {
            return invalid("alpha must lie in (0.5, 1]");
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return invalid("lambda must be nonnegative");
        }
        Ok(Self { alpha, lambda })
    }

    pub fn with_lambda(lambda: f64) -> Result<Self> {
        Self::new(0.75, lambda)
    }

    /// `(q_α, c₁)` with `q_α` the `(α+1)/2` normal quantile and
    /// `c₁ = α − 2 q_α φ(q_α)`.
    pub fn constants(&self) -> (f64, f64) {
        let q = normal::quantile((self.alpha + 1.0) / 2.0);
        (q, self.alpha - 2.0 * q * normal::pdf(q))
    }

    /// `αλ / (2 c₁ E[x²])`: below this `|β0|` the functional is zero.
    pub fn threshold(&self, second_moment: f64) -> f64 {
        let (_, c1) = self.constants();
        self.alpha * self.lambda / (2.0 * c1 * second_moment)
    }
}

/// Iteration limits. `tol` bounds the maximal coordinate change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control {
    pub tol: f64,
    pub max_iter: usize,
    pub max_outer: usize,
}

impl Default for Control {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 1000, max_outer: 100 }
    }
}

impl Control {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn inner_tol(&self) -> f64 {
        (self.tol * 1e-3).max(1e-15)
    }
}

/// Point mass `ε δ_(x0, y0)` mixed into a distribution as `(1−ε)H + ε δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    pub eps: f64,
    pub x0: Vec<f64>,
    pub y0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Moments {
    pub xx: DMatrix<f64>,
    pub xy: DVector<f64>,
}

/// `E[w(r) xx']`, `E[w(r) xy]` over the rows of `data` (plus an optional
/// point mass) with `r = y − x'β`. Chunked and reduced in chunk order.
pub(crate) fn weighted_moments<W>(
    data: &Dataset,
    beta: &[f64],
    w: W,
    point: Option<&PointMass>,
) -> Moments
where
    W: Fn(f64) -> f64 + Sync,
{
    let n = data.n();
    let p = data.p();
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut xx = vec![0.0; p * p];
            let mut xy = vec![0.0; p];
            let mut row = vec![0.0; p];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let mut fit = 0.0;
                for j in 0..p {
                    row[j] = data.x[(i, j)];
                    fit += row[j] * beta[j];
                }
                let y = data.y[i];
                let wi = w(y - fit);
                for j in 0..p {
                    let wx = wi * row[j];
                    xy[j] += wx * y;
                    for k in j..p {
                        xx[j * p + k] += wx * row[k];
                    }
                }
            }
            (xx, xy)
        })
        .collect();
    let mut xx = DMatrix::zeros(p, p);
    let mut xy = DVector::zeros(p);
    for (pxx, pxy) in parts {
        for j in 0..p {
            xy[j] += pxy[j];
            for k in j..p {
                xx[(j, k)] += pxx[j * p + k];
            }
        }
    }
    let nf = n as f64;
    for j in 0..p {
        xy[j] /= nf;
        for k in j..p {
            xx[(j, k)] /= nf;
            xx[(k, j)] = xx[(j, k)];
        }
    }
    if let Some(pm) = point {
        let fit: f64 = pm.x0.iter().zip(beta).map(|(a, b)| a * b).sum();
        let w0 = w(pm.y0 - fit);
        let x0 = DVector::from_column_slice(&pm.x0);
        xx = xx * (1.0 - pm.eps) + &x0 * x0.transpose() * (pm.eps * w0);
        xy = xy * (1.0 - pm.eps) + x0 * (pm.eps * w0 * pm.y0);
    }
    Moments { xx, xy }
}

/// Cyclic coordinate descent on `β'Mβ − 2m'β + 2λΣJ(β_j)`, in place.
/// Returns the number of sweeps and whether the tolerance was met.
pub(crate) fn cd_on_moments(
    mom: &Moments,
    penalty: &PenaltySpec,
    beta: &mut [f64],
    tol: f64,
    max_sweeps: usize,
) -> Result<(usize, bool)> {
    let p = beta.len();
    for j in 0..p {
        if !(mom.xx[(j, j)] > 0.0) {
            return Err(Error::Singular { rcond: 0.0 });
        }
    }
    for sweep in 1..=max_sweeps {
        let mut delta: f64 = 0.0;
        for j in 0..p {
            let mut c = mom.xy[j];
            for k in 0..p {
                if k != j {
                    c -= mom.xx[(j, k)] * beta[k];
                }
            }
            let new = penalty.coordinate_argmin(mom.xx[(j, j)], c);
            delta = delta.max((new - beta[j]).abs());
            beta[j] = new;
        }
        if delta < tol {
            return Ok((sweep, true));
        }
    }
    Ok((max_sweeps, false))
}

/// Minimiser of the quadratic model with a smooth quadratic penalty,
/// solved directly.
fn direct_solve(mom: &Moments, penalty: &PenaltySpec) -> Result<Vec<f64>> {
    let p = mom.xy.len();
    let mut a = mom.xx.clone();
    if penalty.kind == PenaltyKind::L2 {
        a += DMatrix::identity(p, p) * (2.0 * penalty.lambda);
    }
    Ok(linalg::solve(&a, &mom.xy)?.iter().copied().collect())
}

fn has_direct_solution(penalty: &PenaltySpec) -> bool {
    matches!(penalty.kind, PenaltyKind::None | PenaltyKind::L2)
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Solved {
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `E[ρ(y − x'β)] + 2λΣJ(β_j)` over the empirical distribution of
/// `data`, optionally mixed with a point mass. Quadratic losses take one
/// pass; other losses iterate reweighting with `w = ψ(r)/(2r)`.
pub(crate) fn minimize_penalized(
    data: &Dataset,
    point: Option<&PointMass>,
    loss: &LossSpec,
    penalty: &PenaltySpec,
    start: &[f64],
    control: &Control,
) -> Result<Solved> {
    if start.len() != data.p() {
        return invalid("start vector has the wrong length");
    }
    if start.iter().any(|b| !b.is_finite()) {
        return invalid("start vector must be finite");
    }
    if !(control.tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let mut beta = start.to_vec();
    let mut iterations = 0;
    let outer_max = if loss.is_quadratic() { 1 } else { control.max_outer };
    for _ in 0..outer_max {
        let mom = weighted_moments(data, &beta, |r| loss.weight(r), point);
        let mut next = beta.clone();
        let inner_ok = if has_direct_solution(penalty) {
            next = direct_solve(&mom, penalty)?;
            iterations += 1;
            true
        } else {
            let (sweeps, ok) =
                cd_on_moments(&mom, penalty, &mut next, control.inner_tol(), control.max_iter)?;
            iterations += sweeps;
            ok
        };
        let change = next
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        beta = next;
        if loss.is_quadratic() {
            return Ok(Solved { beta, iterations, converged: inner_ok });
        }
        if inner_ok && change < control.tol {
            return Ok(Solved { beta, iterations, converged: true });
        }
    }
    Ok(Solved { beta, iterations, converged: false })
}

fn require_simple(model: &RegressionModel) -> Result<f64> {
    if model.p() != 1 {
        return Err(Error::Unsupported(format!(
            "closed form needs simple regression (p = 1), got p = {}",
            model.p()
        )));
    }
    Ok(model.second_moments()[0])
}

/// Least squares at the model: Fisher consistent, so exactly β0.
pub fn least_squares(model: &RegressionModel) -> FunctionalResult {
    FunctionalResult::new(model, model.beta0().to_vec(), Method::ClosedForm)
}

/// Ridge functional `(E[xx'] + 2λI)⁻¹ E[xy]` with independent predictors.
pub fn ridge(model: &RegressionModel, lambda: f64) -> Result<FunctionalResult> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return invalid("lambda must be nonnegative");
    }
    let beta = model
        .beta0()
        .iter()
        .zip(model.second_moments())
        .map(|(b, e)| b * e / (e + 2.0 * lambda))
        .collect();
    Ok(FunctionalResult::new(model, beta, Method::ClosedForm))
}

/// Lasso functional in simple regression: `sign(β_LS)(|β_LS| − λ/E[x²])₊`.
pub fn lasso_simple(model: &RegressionModel, lambda: f64) -> Result<FunctionalResult> {
    let e2 = require_simple(model)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return invalid("lambda must be nonnegative");
    }
    let beta = soft(model.beta0()[0], lambda / e2);
    Ok(FunctionalResult::new(model, vec![beta], Method::ClosedForm))
}

/// SCAD functional in simple regression (three-branch closed form).
pub fn scad_simple(model: &RegressionModel, lambda: f64, a: f64) -> Result<FunctionalResult> {
    let e2 = require_simple(model)?;
    PenaltySpec::new(PenaltyKind::Scad { a }, lambda)?;
    if !(e2 > 1.0 / (a - 1.0)) {
        return Err(Error::MomentCondition(format!(
            "E[x²] = {e2} must exceed 1/(a−1) = {}",
            1.0 / (a - 1.0)
        )));
    }
    let bls = model.beta0()[0];
    let t = bls.abs();
    let s = bls.signum();
    let beta = if t <= lambda + lambda / e2 {
        soft(bls, lambda / e2)
    } else if t <= a * lambda {
        ((a - 1.0) * e2 * bls - a * lambda * s) / ((a - 1.0) * e2 - 1.0)
    } else {
        bls
    };
    Ok(FunctionalResult::new(model, vec![beta], Method::ClosedForm))
}

/// Sparse LTS functional in simple regression with normal predictor and
/// error: `sign(β0)(|β0| − αλ/(2c₁E[x²]))₊`.
pub fn sparse_lts_simple(
    model: &RegressionModel,
    params: &SparseLTSParams,
) -> Result<FunctionalResult> {
    let e2 = require_simple(model)?;
    if !model.is_normal() {
        return Err(Error::Unsupported(
            "sparse LTS closed form needs normal predictor and error".into(),
        ));
    }
    let beta = soft(model.beta0()[0], params.threshold(e2));
    Ok(FunctionalResult::new(model, vec![beta], Method::ClosedForm))
}

/// Quadratic-loss functional with a general penalty by coordinate descent on
/// the Monte-Carlo moments. The start defaults to β0.
pub fn coord_descent(
    pop: &Population,
    penalty: &PenaltySpec,
    start: Option<&[f64]>,
    control: &Control,
) -> Result<FunctionalResult> {
    solve_population(pop, &LossSpec::quadratic(), penalty, start, control, Method::CoordDescent)
}

/// Penalised M-functional with a non-quadratic loss by IRLS, each weighted
/// problem solved by coordinate descent or directly for smooth quadratic
/// penalties. The start defaults to β0.
pub fn irls(
    pop: &Population,
    loss: &LossSpec,
    penalty: &PenaltySpec,
    start: Option<&[f64]>,
    control: &Control,
) -> Result<FunctionalResult> {
    if loss.is_quadratic() {
        return Err(Error::Contract("IRLS expects a non-quadratic loss".into()));
    }
    solve_population(pop, loss, penalty, start, control, Method::Irls)
}

/// Dispatches to [`coord_descent`] or [`irls`] by loss kind.
pub fn penalized_m(
    pop: &Population,
    loss: &LossSpec,
    penalty: &PenaltySpec,
    control: &Control,
) -> Result<FunctionalResult> {
    if loss.is_quadratic() {
        coord_descent(pop, penalty, None, control)
    } else {
        irls(pop, loss, penalty, None, control)
    }
}

fn solve_population(
    pop: &Population,
    loss: &LossSpec,
    penalty: &PenaltySpec,
    start: Option<&[f64]>,
    control: &Control,
    method: Method,
) -> Result<FunctionalResult> {
    let model = pop.model();
    let start = start.unwrap_or(model.beta0());
    let s = minimize_penalized(pop.draws(), None, loss, penalty, start, control)?;
    Ok(FunctionalResult {
        bias: bias_of(&s.beta, model),
        beta: s.beta,
        method,
        iterations: s.iterations,
        converged: s.converged,
        mc: Some(*pop.cfg()),
    })
}

fn bias_of(beta: &[f64], model: &RegressionModel) -> Vec<f64> {
    beta.iter().zip(model.beta0()).map(|(b, b0)| b - b0).collect()
}

/// `β(H0) − β0`.
pub fn bias(fr: &FunctionalResult, model: &RegressionModel) -> Vec<f64> {
    bias_of(&fr.beta, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MCConfig;
    use proptest::prelude::*;

    fn simple(beta0: f64) -> RegressionModel {
        RegressionModel::new(vec![beta0], 1.0).unwrap()
    }

    #[test]
    fn lasso_closed_form_examples() {
        assert!((lasso_simple(&simple(1.5), 0.1).unwrap().beta[0] - 1.4).abs() < 1e-15);
        assert!((lasso_simple(&simple(1.5), 0.1).unwrap().bias[0] + 0.1).abs() < 1e-15);
        assert_eq!(lasso_simple(&simple(0.05), 0.1).unwrap().beta[0], 0.0);
        assert!((lasso_simple(&simple(-1.5), 0.1).unwrap().beta[0] + 1.4).abs() < 1e-15);
        let m2 = RegressionModel::new(vec![1.0, 1.0], 1.0).unwrap();
        assert!(matches!(lasso_simple(&m2, 0.1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn scad_closed_form_examples() {
        let a = 3.7;
        assert_eq!(scad_simple(&simple(1.5), 0.1, a).unwrap().beta[0], 1.5);
        assert_eq!(scad_simple(&simple(1.5), 0.1, a).unwrap().bias[0], 0.0);
        assert_eq!(scad_simple(&simple(0.05), 0.1, a).unwrap().beta[0], 0.0);
        let mid = scad_simple(&simple(0.3), 0.1, a).unwrap().beta[0];
        assert!((mid - 0.258824).abs() < 1e-6);
        let narrow = RegressionModel::with_predictor_sd(vec![1.0], vec![0.5], 1.0).unwrap();
        assert!(matches!(scad_simple(&narrow, 0.1, a), Err(Error::MomentCondition(_))));
    }

    #[test]
    fn scad_closed_form_agrees_with_coordinate_step() {
        let p = PenaltySpec::scad(0.1).unwrap();
        for sd in [0.8, 1.0, 1.7] {
            for b0 in [-2.0, -0.3, -0.15, 0.0, 0.12, 0.2, 0.3, 0.36, 0.5] {
                let m = RegressionModel::with_predictor_sd(vec![b0], vec![sd], 1.0).unwrap();
                let e2 = sd * sd;
                let closed = scad_simple(&m, 0.1, 3.7).unwrap().beta[0];
                let step = p.coordinate_argmin(e2, e2 * b0);
                assert!((closed - step).abs() < 1e-12, "sd {sd} b0 {b0}: {closed} vs {step}");
            }
        }
    }

    #[test]
    fn sparse_lts_constants() {
        let p = SparseLTSParams::with_lambda(0.1).unwrap();
        let (q, c1) = p.constants();
        assert!((q - 1.150349380376).abs() < 1e-9);
        assert!((c1 - 0.276393).abs() < 1e-6);
        assert!((p.threshold(1.0) - 0.135677).abs() < 1e-6);
        let b = sparse_lts_simple(&simple(1.5), &p).unwrap().beta[0];
        assert!((b - 1.364323).abs() < 1e-6);
        assert_eq!(sparse_lts_simple(&simple(0.1), &p).unwrap().beta[0], 0.0);
    }

    #[test]
    fn sparse_lts_params_validation() {
        assert!(SparseLTSParams::new(0.5, 0.1).is_err());
        assert!(SparseLTSParams::new(1.0, 0.1).is_ok());
        assert!(SparseLTSParams::new(0.75, -1.0).is_err());
    }

    #[test]
    fn ridge_closed_form() {
        let r = ridge(&simple(1.5), 0.1).unwrap();
        assert!((r.beta[0] - 1.25).abs() < 1e-15);
    }

    #[test]
    fn bias_examples() {
        let m = simple(1.5);
        assert_eq!(bias(&least_squares(&m), &m), vec![0.0]);
        assert!((bias(&lasso_simple(&m, 0.1).unwrap(), &m)[0] + 0.1).abs() < 1e-15);
        assert_eq!(bias(&scad_simple(&m, 0.1, 3.7).unwrap(), &m), vec![0.0]);
    }

    fn pop(beta0: Vec<f64>, seed: u64) -> Population {
        Population::new(
            RegressionModel::new(beta0, 1.0).unwrap(),
            MCConfig::new(100_000, seed).unwrap(),
        )
    }

    #[test]
    fn coord_descent_simple_matches_closed_form() {
        let pp = pop(vec![1.5], 3);
        let l1 = PenaltySpec::l1(0.1).unwrap();
        let cd = coord_descent(&pp, &l1, None, &Control::default()).unwrap();
        assert!(cd.converged);
        assert_eq!(cd.method, Method::CoordDescent);
        // β = (E_n[xy] − λ)/E_n[x²]: MC error of order 1/√n.
        assert!((cd.beta[0] - 1.4).abs() < 0.02, "{:?}", cd.beta);
        let d = pp.draws();
        let exy = d.x.column(0).dot(&d.y) / d.n() as f64;
        let exx = d.x.column(0).norm_squared() / d.n() as f64;
        assert!((cd.beta[0] - (exy - 0.1) / exx).abs() < 1e-9);
    }

    #[test]
    fn coord_descent_unpenalized_is_consistent() {
        let pp = pop(vec![1.5, -0.5], 4);
        let cd = coord_descent(&pp, &PenaltySpec::l1(0.0).unwrap(), None, &Control::default())
            .unwrap();
        for (b, b0) in cd.beta.iter().zip([1.5, -0.5]) {
            // sd of the LS coefficient with unit design and error is 1/√n.
            assert!((b - b0).abs() < 3.0 * 1e-5f64.sqrt() * 1.5);
        }
    }

    #[test]
    fn coord_descent_orthogonal_design_decouples() {
        let pp = pop(vec![1.5, 0.0], 5);
        let cd = coord_descent(&pp, &PenaltySpec::l1(0.1).unwrap(), None, &Control::default())
            .unwrap();
        assert!((cd.beta[0] - 1.4).abs() < 0.02);
        assert_eq!(cd.beta[1], 0.0);
    }

    #[test]
    fn coord_descent_kkt() {
        let pp = pop(vec![1.5, 0.05, -0.8], 6);
        let lam = 0.1;
        let cd = coord_descent(&pp, &PenaltySpec::l1(lam).unwrap(), None, &Control::with_tol(1e-10))
            .unwrap();
        let beta = cd.beta.clone();
        let score = pp
            .expect(|x, y| {
                let r = y - x.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
                x.iter().map(|xj| xj * r).collect()
            })
            .unwrap();
        for j in 0..3 {
            let se = score.stderr[j];
            if beta[j] != 0.0 {
                let g = -score.mean[j] + lam * beta[j].signum();
                assert!(g.abs() <= 5.0 * se, "coordinate {j}: {g}");
            } else {
                assert!(score.mean[j].abs() <= lam + 5.0 * se);
            }
        }
    }

    #[test]
    fn irls_huber_unpenalized_is_consistent() {
        let pp = pop(vec![1.5], 7);
        let r = irls(&pp, &LossSpec::huber(), &PenaltySpec::none(), None, &Control::default())
            .unwrap();
        assert!(r.converged);
        assert!((r.beta[0] - 1.5).abs() < 0.01);
    }

    #[test]
    fn irls_biweight_zero_stays_zero() {
        let pp = pop(vec![0.0], 8);
        let r = irls(&pp, &LossSpec::biweight(), &PenaltySpec::l1(0.04).unwrap(), None, &Control::default())
            .unwrap();
        assert_eq!(r.beta[0], 0.0);
    }

    #[test]
    fn irls_stationarity() {
        let pp = pop(vec![1.5], 9);
        let lam = 0.04;
        for loss in [LossSpec::huber(), LossSpec::biweight()] {
            let r = irls(&pp, &loss, &PenaltySpec::l1(lam).unwrap(), None, &Control::with_tol(1e-10))
                .unwrap();
            let b = r.beta[0];
            let score = pp.expect(|x, y| vec![loss.psi(y - x[0] * b) * x[0]]).unwrap();
            assert!((-score.mean[0] + 2.0 * lam * b.signum()).abs() < 1e-8);
        }
    }

    #[test]
    fn irls_rejects_quadratic() {
        let pp = pop(vec![1.5], 1);
        let r = irls(&pp, &LossSpec::quadratic(), &PenaltySpec::none(), None, &Control::default());
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn non_convergence_is_flagged() {
        let pp = pop(vec![1.5], 2);
        let c = Control { tol: 1e-14, max_iter: 1000, max_outer: 2 };
        let r = irls(&pp, &LossSpec::biweight(), &PenaltySpec::l1(0.04).unwrap(), None, &c).unwrap();
        assert!(!r.converged);
        assert!(r.beta[0].is_finite());
    }

    #[test]
    fn contaminated_moments_mix_point_mass() {
        let d = Dataset::new(
            DMatrix::from_row_slice(2, 1, &[1.0, -1.0]),
            DVector::from_vec(vec![2.0, 0.0]),
        )
        .unwrap();
        let pm = PointMass { eps: 0.5, x0: vec![3.0], y0: 1.0 };
        let m = weighted_moments(&d, &[0.0], |_| 1.0, Some(&pm));
        assert!((m.xx[(0, 0)] - (0.5 * 1.0 + 0.5 * 9.0)).abs() < 1e-15);
        assert!((m.xy[0] - (0.5 * 1.0 + 0.5 * 3.0)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn lasso_monotone_shrinkage(b0 in -3.0f64..3.0, l1 in 0.0f64..1.0, dl in 0.0f64..1.0) {
            let m = simple(b0);
            let a = lasso_simple(&m, l1).unwrap().beta[0];
            let b = lasso_simple(&m, l1 + dl).unwrap().beta[0];
            prop_assert!(a.abs() >= b.abs());
        }

        #[test]
        fn lasso_constant_bias_when_unshrunk(b0 in -3.0f64..3.0, lam in 0.0f64..1.0, sd in 0.5f64..2.0) {
            let m = RegressionModel::with_predictor_sd(vec![b0], vec![sd], 1.0).unwrap();
            let e2 = sd * sd;
            prop_assume!(b0.abs() > lam / e2);
            let r = lasso_simple(&m, lam).unwrap();
            prop_assert!((r.bias[0] + lam / e2 * b0.signum()).abs() < 1e-12);
        }
    }
}
