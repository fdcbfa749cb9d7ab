//! Closed-form influence functions.
//!
//! Each functional gets an evaluator that precomputes the model moments once
//! and then answers `IF((x0, y0))` for any contamination point. Evaluators
//! built from a [`Population`] take their expectations over its Monte-Carlo
//! draws; the others are fully analytic.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::functionals::{
    coord_descent, weighted_moments, Control, FunctionalResult, SparseLTSParams,
};
use crate::linalg;
use crate::losses::LossSpec;
use crate::model::{Population, RegressionModel};
use crate::penalties::{sign, PenaltyKind, PenaltySpec};

/// Coefficients with `|β_j|` at or below this are treated as inactive.
pub const ACTIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ContaminationPoint {
    pub x0: Vec<f64>,
    pub y0: f64,
}

impl ContaminationPoint {
    pub fn new(x0: Vec<f64>, y0: f64) -> Result<Self> {
        if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) || !y0.is_finite() {
            return invalid("contamination point must be finite and non-empty");
        }
        Ok(Self { x0, y0 })
    }
}

/// An influence function `(x0, y0) ↦ IF ∈ R^p`.
pub trait Influence: Sync {
    fn at(&self, x0: &[f64], y0: f64) -> Result<Vec<f64>>;
}

/// Influence function values over a grid of contamination points.
#[derive(Debug, Clone, PartialEq)]
pub struct IFSurface {
    pub grid: Vec<ContaminationPoint>,
    pub values: Vec<Vec<f64>>,
    pub functional_id: String,
}

/// `m × m` grid over `[lo, hi]²` of simple-regression points, `x0` outer.
pub fn square_grid(lo: f64, hi: f64, m: usize) -> Vec<ContaminationPoint> {
    let axis: Vec<f64> = if m == 1 {
        vec![lo]
    } else {
        (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect()
    };
    axis.iter()
        .flat_map(|x| axis.iter().map(move |y| ContaminationPoint { x0: vec![*x], y0: *y }))
        .collect()
}

/// The default 41 × 41 grid over `[−10, 10]²`.
pub fn default_grid() -> Vec<ContaminationPoint> {
    square_grid(-10.0, 10.0, 41)
}

/// Evaluates `inf` on every grid point in parallel. Non-finite values are
/// reported as errors.
pub fn surface(
    inf: &dyn Influence,
    grid: &[ContaminationPoint],
    functional_id: impl Into<String>,
) -> Result<IFSurface> {
    let values: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|pt| inf.at(&pt.x0, pt.y0))
        .collect::<Result<_>>()?;
    for (i, v) in values.iter().enumerate() {
        if v.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
    }
    Ok(IFSurface { grid: grid.to_vec(), values, functional_id: functional_id.into() })
}

fn check_dim(x0: &[f64], p: usize) -> Result<()> {
    if x0.len() != p {
        return invalid(format!("contamination point has dimension {} but p = {p}", x0.len()));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn active_set(beta: &[f64]) -> Vec<usize> {
    (0..beta.len()).filter(|&j| beta[j].abs() > ACTIVE_TOL).collect()
}

/// Influence function of a penalised M-functional with twice differentiable
/// loss and penalty:
/// `(E[ψ'(r)xx'] + 2λ diag J''(β))⁻¹ (ψ(r0)x0 − E[ψ(r)x])`.
///
/// For kinked penalties (l1, SCAD) the formula is applied on the active set
/// only and inactive coordinates get influence exactly zero.
///
/// `E[ψ(r)x_j]` is taken from the first-order condition as `2λJ'(β_j)`, so
/// a closed-form `β` combined with Monte-Carlo curvature adds no noise to
/// the constant term.
#[derive(Debug, Clone)]
pub struct PenalizedMIF {
    loss: LossSpec,
    beta: Vec<f64>,
    active: Vec<usize>,
    inverse: DMatrix<f64>,
    mean_score: DVector<f64>,
}

impl PenalizedMIF {
    pub fn new(
        pop: &Population,
        loss: &LossSpec,
        penalty: &PenaltySpec,
        fr: &FunctionalResult,
    ) -> Result<Self> {
        let p = pop.p();
        if fr.beta.len() != p {
            return invalid("functional value has the wrong dimension");
        }
        let beta = fr.beta.clone();
        let active: Vec<usize> = if penalty.is_smooth() {
            (0..p).collect()
        } else {
            active_set(&beta)
        };
        let k = active.len();
        if k == 0 {
            return Ok(Self {
                loss: *loss,
                beta,
                active,
                inverse: DMatrix::zeros(0, 0),
                mean_score: DVector::zeros(0),
            });
        }
        let curv = weighted_moments(pop.draws(), &beta, |r| loss.psi_prime(r), None).xx;
        let mut a = DMatrix::zeros(k, k);
        for (ai, &i) in active.iter().enumerate() {
            for (aj, &j) in active.iter().enumerate() {
                a[(ai, aj)] = curv[(i, j)];
            }
            if penalty.lambda > 0.0 {
                a[(ai, ai)] += 2.0 * penalty.lambda * penalty.j_second(beta[i])?;
            }
        }
        let rc = linalg::rcond(&a);
        if !(rc >= linalg::RCOND_MIN) {
            return Err(Error::Singular { rcond: rc });
        }
        let inverse = a.try_inverse().ok_or(Error::Singular { rcond: rc })?;
        let mut mean_score = DVector::zeros(k);
        for (ai, &i) in active.iter().enumerate() {
            if penalty.lambda > 0.0 {
                mean_score[ai] = 2.0 * penalty.lambda * penalty.j_prime(beta[i])?;
            }
        }
        Ok(Self { loss: *loss, beta, active, inverse, mean_score })
    }
}

impl Influence for PenalizedMIF {
    fn at(&self, x0: &[f64], y0: f64) -> Result<Vec<f64>> {
        check_dim(x0, self.beta.len())?;
        let mut out = vec![0.0; self.beta.len()];
        if self.active.is_empty() {
            return Ok(out);
        }
        let s0 = self.loss.psi(y0 - dot(x0, &self.beta));
        let rhs = DVector::from_iterator(
            self.active.len(),
            self.active.iter().enumerate().map(|(a, &i)| s0 * x0[i] - self.mean_score[a]),
        );
        let v = &self.inverse * rhs;
        for (a, &i) in self.active.iter().enumerate() {
            out[i] = v[a];
        }
        Ok(out)
    }
}

/// Convenience wrapper evaluating [`PenalizedMIF`] at one point.
pub fn if_penalized_m(
    pop: &Population,
    loss: &LossSpec,
    penalty: &PenaltySpec,
    fr: &FunctionalResult,
    pt: &ContaminationPoint,
) -> Result<Vec<f64>> {
    PenalizedMIF::new(pop, loss, penalty, fr)?.at(&pt.x0, pt.y0)
}

/// Ridge influence function with analytic moments of independent
/// predictors: `(E[xx'] + 2λI)⁻¹((y0 − x0'β_R)x0 + E[xx'] Bias)`.
/// With `λ = 0` this is the least-squares influence function.
#[derive(Debug, Clone)]
pub struct RidgeIF {
    second: Vec<f64>,
    lambda: f64,
    beta: Vec<f64>,
    bias: Vec<f64>,
}

impl RidgeIF {
    pub fn new(model: &RegressionModel, fr: &FunctionalResult, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return invalid("lambda must be nonnegative");
        }
        if fr.beta.len() != model.p() {
            return invalid("functional value has the wrong dimension");
        }
        Ok(Self {
            second: model.second_moments(),
            lambda,
            beta: fr.beta.clone(),
            bias: fr.bias.clone(),
        })
    }
}

impl Influence for RidgeIF {
    fn at(&self, x0: &[f64], y0: f64) -> Result<Vec<f64>> {
        check_dim(x0, self.beta.len())?;
        let r0 = y0 - dot(x0, &self.beta);
        Ok((0..self.beta.len())
            .map(|j| (r0 * x0[j] + self.second[j] * self.bias[j]) / (self.second[j] + 2.0 * self.lambda))
            .collect())
    }
}

pub fn if_ridge(
    model: &RegressionModel,
    fr: &FunctionalResult,
    lambda: f64,
    pt: &ContaminationPoint,
) -> Result<Vec<f64>> {
    RidgeIF::new(model, fr, lambda)?.at(&pt.x0, pt.y0)
}

/// Lasso influence function in simple regression (analytic):
/// zero when `−λ/E[x²] ≤ β0 < λ/E[x²]`, else
/// `x0(y0 − β0x0)/E[x²] − λ(E[x²] − x0²)/E[x²]² · sign(β0)`.
#[derive(Debug, Clone)]
pub struct LassoSimpleIF {
    beta0: f64,
    e2: f64,
    lambda: f64,
}

impl LassoSimpleIF {
    pub fn new(model: &RegressionModel, lambda: f64) -> Result<Self> {
        if model.p() != 1 {
            return Err(Error::Unsupported("simple-regression lasso influence needs p = 1".into()));
        }
        Ok(Self { beta0: model.beta0()[0], e2: model.second_moments()[0], lambda })
    }

    pub fn is_zero_branch(&self) -> bool {
        let t = self.lambda / self.e2;
        -t <= self.beta0 && self.beta0 < t
    }
}

impl Influence for LassoSimpleIF {
    fn at(&self, x0: &[f64], y0: f64) -> Result<Vec<f64>> {
        check_dim(x0, 1)?;
        if self.is_zero_branch() {
            return Ok(vec![0.0]);
        }
        let (x, e) = (x0[0], self.e2);
        Ok(vec![x * (y0 - self.beta0 * x) / e - self.lambda * (e - x * x) / (e * e) * sign(self.beta0)])
    }
}

pub fn if_lasso_simple(model: &RegressionModel, lambda: f64, pt: &ContaminationPoint) -> Result<Vec<f64>> {
    LassoSimpleIF::new(model, lambda)?.at(&pt.x0, pt.y0)
}

/// Lasso influence function in multiple regression:
/// `E[x_A x_A']⁻¹ ((x0)_A (y0 − x0'β) − E[x_A (y − x'β)])` on the active set
/// `A`, exactly zero elsewhere. Moments from the Monte-Carlo draws.
#[derive(Debug, Clone)]
pub struct LassoMultiIF {
    beta: Vec<f64>,
    active: Vec<usize>,
    inverse: DMatrix<f64>,
    mean_score: DVector<f64>,
}

impl LassoMultiIF {
    pub fn new(pop: &Population, fr: &FunctionalResult) -> Result<Self> {
        if fr.beta.len() != pop.p() {
            return invalid("functional value has the wrong dimension");
        }
        let beta = fr.beta.clone();
        let active = active_set(&beta);
        let mom = weighted_moments(pop.draws(), &beta, |_| 1.0, None);
        let k = active.len();
        let mut a = DMatrix::zeros(k, k);
        let mut g = DVector::zeros(k);
        for (ai, &i) in active.iter().enumerate() {
            for (aj, &j) in active.iter().enumerate() {
                a[(ai, aj)] = mom.xx[(i, j)];
            }
            // E[x_i (y − x'β)] = m_i − Σ_k M_ik β_k.
            g[ai] = mom.xy[i] - (0..beta.len()).map(|j| mom.xx[(i, j)] * beta[j]).sum::<f64>();
        }
        let inverse = if k == 0 {
            a
        } else {
            let rc = linalg::rcond(&a);
            if !(rc >= linalg::RCOND_MIN) {
                return Err(Error::Singular { rcond: rc });
            }
            a.try_inverse().ok_or(Error::Singular { rcond: rc })?
        };
        Ok(Self { beta, active, inverse, mean_score: g })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }
}

impl Influence for LassoMultiIF {
    fn at(&self, x0: &[f64], y0: f64) -> Result<Vec<f64>> {
        check_dim(x0, self.beta.len())?;
        let mut out = vec![0.0; self.beta.len()];
        if self.active.is_empty() {
            return Ok(out);
        }
        let r0 = y0 - dot(x0, &self.beta);
        let rhs = DVector::from_iterator(
            self.active.len(),
            self.active.iter().enumerate().map(|(a, &i)| x0[i] * r0 - self.mean_score[a]),
        );
        let v = &self.inverse * rhs;
        for (a, &i) in self.active.iter().enumerate() {
            out[i] = v[a];
        }
        Ok(out)
    }
}

pub fn if_lasso_multi(pop: &Population, fr: &FunctionalResult, pt: &ContaminationPoint) -> Result<Vec<f64>> {
    LassoMultiIF::new(pop, fr)?.at(&pt.x0, pt.y0)
}

/// Influence function of the lasso computed through the coordinate-descent
/// recursion: each coordinate's influence is the simple-regression lasso
/// influence on partial residuals, given the other coordinates' influence.
/// [`Influence::at`] iterates the recursion Gauss-Seidel style to its fixed
/// point.
#[derive(Debug, Clone)]
pub struct LassoCdIF {
    beta: Vec<f64>,
    lambda: f64,
    xx: DMatrix<f64>,
    xy: DVector<f64>,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl LassoCdIF {
    pub fn new(pop: &Population, fr: &FunctionalResult, lambda: f64) -> Result<Self> {
        if fr.beta.len() != pop.p() {
            return invalid("functional value has the wrong dimension");
        }
        let mom = weighted_moments(pop.draws(), &fr.beta, |_| 1.0, None);
        Ok(Self {
            beta: fr.beta.clone(),
            lambda,
            xx: mom.xx,
            xy: mom.xy,
            tol: 1e-12,
            max_sweeps: 10_000,
        })
    }

    /// One application of the recursion for coordinate `j`, given the
    /// previous influence vector and previous coefficient vector (their
    /// `j`-th entries are ignored).
    pub fn step(&self, j: usize, x0: &[f64], y0: f64, prev_if: &[f64], prev_beta: &[f64]) -> f64 {
        let p = self.beta.len();
        let ejj = self.xx[(j, j)];
        // E[x_j ỹ^(j)] with ỹ^(j) = y − Σ_{k≠j} x_k β*_k.
        let mut score = self.xy[j];
        let mut cross = 0.0;
        let mut partial = y0;
        for k in (0..p).filter(|&k| k != j) {
            score -= self.xx[(j, k)] * prev_beta[k];
            cross += self.xx[(j, k)] * prev_if[k];
            partial -= x0[k] * prev_beta[k];
        }
        if score.abs() < self.lambda {
            return 0.0;
        }
        let xj = x0[j];
        (-cross + partial * xj) / ejj
            - score * xj * xj / (ejj * ejj)
            - self.lambda * (ejj - xj * xj) / (ejj * ejj) * sign(score)
    }
}

impl Influence for LassoCdIF {
    fn at(&self, x0: &[f64], y0: f64) -> Result<Vec<f64>> {
        let p = self.beta.len();
        check_dim(x0, p)?;
        let mut inf = vec![0.0; p];
        for _ in 0..self.max_sweeps {
            let mut delta: f64 = 0.0;
            for j in 0..p {
                let v = self.step(j, x0, y0, &inf, &self.beta);
                delta = delta.max((v - inf[j]).abs());
                inf[j] = v;
            }
            if delta <= self.tol * (1.0 + inf.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
                return Ok(inf);
            }
        }
        Err(Error::NotConverged(format!(
            "coordinate-descent influence recursion after {} sweeps",
            self.max_sweeps
        )))
    }
}

/// One member of the tanh-approximation sequence.
#[derive(Debug, Clone)]
pub struct TanhStep {
    pub k: f64,
    pub functional: FunctionalResult,
    pub influence: PenalizedMIF,
}

/// Functionals `β_K` with the smooth penalty `β tanh(Kβ)` and their
/// influence functions, for an increasing sequence of `K`. As `K` grows the
/// influence functions approach [`LassoMultiIF`].
pub fn if_lasso_tanh_limit(pop: &Population, lambda: f64, ks: &[f64]) -> Result<Vec<TanhStep>> {
    if ks.is_empty() || ks.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("K sequence must be non-empty and increasing");
    }
    let control = Control { tol: 1e-13, max_iter: 100_000, max_outer: 1 };
    ks.iter()
        .map(|&k| {
            let pen = PenaltySpec::new(PenaltyKind::TanhK { k }, lambda)?;
            let fr = coord_descent(pop, &pen, None, &control)?;
            if !fr.converged {
                return Err(Error::NotConverged(format!("tanh functional at K = {k}")));
            }
            let influence = PenalizedMIF::new(pop, &LossSpec::quadratic(), &pen, &fr)?;
            Ok(TanhStep { k, functional: fr, influence })
        })
        .collect()
}

/// Sparse LTS influence function in normal simple regression.
#[derive(Debug, Clone)]
pub struct SparseLtsIF {
    beta0: f64,
    beta: f64,
    e2: f64,
    alpha: f64,
    q: f64,
    c1: f64,
    threshold: f64,
    resid_sd: f64,
}

impl SparseLtsIF {
    pub fn new(model: &RegressionModel, fr: &FunctionalResult, params: &SparseLTSParams) -> Result<Self> {
        if model.p() != 1 || !model.is_normal() {
            return Err(Error::Unsupported(
                "sparse LTS influence needs normal simple regression".into(),
            ));
        }
        let e2 = model.second_moments()[0];
        let (q, c1) = params.constants();
        let beta0 = model.beta0()[0];
        let beta = fr.beta[0];
        Ok(Self {
            beta0,
            beta,
            e2,
            alpha: params.alpha,
            q,
            c1,
            threshold: params.threshold(e2),
            resid_sd: (model.sigma().powi(2) + (beta0 - beta).powi(2) * e2).sqrt(),
        })
    }

    pub fn is_zero_branch(&self) -> bool {
        -self.threshold < self.beta0 && self.beta0 <= self.threshold
    }

    /// Standardised residual of the contamination point.
    pub fn r0(&self, x0: f64, y0: f64) -> f64 {
        (y0 - x0 * self.beta) / self.resid_sd
    }
}

impl Influence for SparseLtsIF {
    fn at(&self, x0: &[f64], y0: f64) -> Result<Vec<f64>> {
        check_dim(x0, 1)?;
        if self.is_zero_branch() {
            return Ok(vec![0.0]);
        }
        let x = x0[0];
        let inside = if self.r0(x, y0).abs() <= self.q { 1.0 } else { 0.0 };
        let shift = self.beta0 - self.beta;
        Ok(vec![
            -shift - self.q * self.q * (inside - self.alpha) * shift / self.c1
                + x * (y0 - x * self.beta) * inside / (self.c1 * self.e2),
        ])
    }
}

pub fn if_sparse_lts(
    model: &RegressionModel,
    fr: &FunctionalResult,
    params: &SparseLTSParams,
    pt: &ContaminationPoint,
) -> Result<Vec<f64>> {
    SparseLtsIF::new(model, fr, params)?.at(&pt.x0, pt.y0)
}
