//! Sample-level estimators: penalised M-estimators by IRLS with coordinate
//! descent, sparse LTS by concentration steps, and the MAD scale.
//!
//! The sparse LTS objective is the mean of the squared residuals over the
//! lowest `αn` of them plus `λ‖β‖₁`. When `αn` is not an integer the
//! boundary observation enters with weight `αn − ⌊αn⌋`, so the subset has
//! `h = ⌈αn⌉` members and the objective changes continuously with `n`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::functionals::{cd_on_moments, minimize_penalized, Control, Moments, SparseLTSParams};
use crate::linalg;
use crate::losses::LossSpec;
use crate::model::{domain, substream, Dataset};
use crate::penalties::PenaltySpec;

/// Consistency factor of the MAD at the normal distribution.
pub const MAD_FACTOR: f64 = 1.4826;

/// Multi-start schedule for the sparse LTS concentration search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtsSchedule {
    pub starts: usize,
    pub keep: usize,
    pub initial_steps: usize,
    pub max_steps: usize,
}

impl Default for LtsSchedule {
    fn default() -> Self {
        Self { starts: 50, keep: 10, initial_steps: 2, max_steps: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub control: Control,
    pub lts: LtsSchedule,
    /// Seed for the elemental starts of sparse LTS.
    pub seed: u64,
    /// Trimming proportion of the sparse LTS start used by robust losses.
    pub init_alpha: f64,
    /// Known error scale for robust losses. When absent the MAD of the
    /// sparse LTS start's residuals is used.
    pub scale: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            control: Control { tol: 1e-10, max_iter: 10_000, max_outer: 500 },
            lts: LtsSchedule::default(),
            seed: 0,
            init_alpha: 0.75,
            scale: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    pub scale_hat: f64,
    /// Sparse LTS subset in original row indices, sorted.
    pub subset: Option<Vec<usize>>,
    pub objective: f64,
    pub converged: bool,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `1.4826 · median|r − median(r)|`.
pub fn mad_scale(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return invalid("MAD needs at least two residuals");
    }
    if residuals.iter().any(|r| !r.is_finite()) {
        return invalid("residuals must be finite");
    }
    let mut v = residuals.to_vec();
    let med = median(&mut v);
    let mut dev: Vec<f64> = residuals.iter().map(|r| (r - med).abs()).collect();
    let mad = MAD_FACTOR * median(&mut dev);
    if !(mad > 0.0) {
        return Err(Error::DegenerateScale(
            "MAD of the initial residuals is zero; use a different initial fit".into(),
        ));
    }
    Ok(mad)
}

/// `(1/n)Σρ(r_i) + 2λΣJ(β_j)` with the loss already carrying its scale.
pub fn penalized_m_objective(data: &Dataset, loss: &LossSpec, penalty: &PenaltySpec, beta: &[f64]) -> f64 {
    let r = data.residuals(beta);
    r.iter().map(|v| loss.rho(*v)).sum::<f64>() / data.n() as f64
        + 2.0 * penalty.lambda * beta.iter().map(|b| penalty.j(*b)).sum::<f64>()
}

/// Sparse LTS objective: trimmed mean of squared residuals plus `λ‖β‖₁`.
pub fn sparse_lts_objective(data: &Dataset, params: &SparseLTSParams, beta: &[f64]) -> f64 {
    let mut r2: Vec<f64> = data.residuals(beta).iter().map(|v| v * v).collect();
    r2.sort_by(f64::total_cmp);
    let mass = params.alpha * data.n() as f64;
    let whole = mass.floor() as usize;
    let mut sum: f64 = r2[..whole.min(r2.len())].iter().sum();
    if whole < r2.len() {
        sum += (mass - whole as f64) * r2[whole];
    }
    sum / mass + params.lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

fn least_squares_start(data: &Dataset) -> Vec<f64> {
    let xtx = data.x.transpose() * &data.x;
    let xty = data.x.transpose() * &data.y;
    match linalg::solve(&xtx, &xty) {
        Ok(b) => b.iter().copied().collect(),
        Err(_) => vec![0.0; data.p()],
    }
}

/// Penalised M-estimator `argmin (1/n)Σρ(r_i/σ̂) + 2λΣJ(β_j)`.
///
/// The quadratic loss is used unscaled (σ̂ = 1) and started from least
/// squares. Huber and biweight losses start from sparse LTS with the same λ
/// and take σ̂ as the MAD of its residuals, unless a known scale is given.
pub fn fit_penalized_m(
    data: &Dataset,
    loss: &LossSpec,
    penalty: &PenaltySpec,
    options: &FitOptions,
) -> Result<FitResult> {
    if loss.is_quadratic() {
        let start = least_squares_start(data);
        let loss = LossSpec::quadratic();
        let s = minimize_penalized(data, None, &loss, penalty, &start, &options.control)?;
        return Ok(FitResult {
            objective: penalized_m_objective(data, &loss, penalty, &s.beta),
            beta_hat: s.beta,
            scale_hat: 1.0,
            subset: None,
            converged: s.converged,
        });
    }
    let params = SparseLTSParams::new(options.init_alpha, penalty.lambda)?;
    let init = fit_sparse_lts(data, &params, options)?;
    let scale = match options.scale {
        Some(s) if s > 0.0 && s.is_finite() => s,
        Some(_) => return invalid("known scale must be positive and finite"),
        None => {
            let resid: Vec<f64> = data.residuals(&init.beta_hat).iter().copied().collect();
            mad_scale(&resid)?
        }
    };
    let loss = loss.with_scale(scale)?;
    let s = minimize_penalized(data, None, &loss, penalty, &init.beta_hat, &options.control)?;
    Ok(FitResult {
        objective: penalized_m_objective(data, &loss, penalty, &s.beta),
        beta_hat: s.beta,
        scale_hat: scale,
        subset: None,
        converged: s.converged && init.converged,
    })
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn row_key(data: &Dataset, i: usize) -> (u64, Vec<u64>) {
    let mut bits: Vec<u64> = (0..data.p()).map(|j| data.x[(i, j)].to_bits()).collect();
    bits.push(data.y[i].to_bits());
    let mut h = FNV_OFFSET;
    for b in &bits {
        for byte in b.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    (h, bits)
}

/// Rows sorted by a hash of their content: position `k` holds the original
/// index of the row with canonical rank `k`. Independent of input order.
fn canonical_order(data: &Dataset) -> Vec<usize> {
    let keys: Vec<(u64, Vec<u64>)> = (0..data.n()).map(|i| row_key(data, i)).collect();
    let mut order: Vec<usize> = (0..data.n()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
    order
}

// Working copy of the data in canonical row order.
struct Canonical {
    x: DMatrix<f64>,
    y: DVector<f64>,
    original: Vec<usize>,
}

impl Canonical {
    fn new(data: &Dataset) -> Self {
        let original = canonical_order(data);
        let n = data.n();
        let p = data.p();
        let x = DMatrix::from_fn(n, p, |i, j| data.x[(original[i], j)]);
        let y = DVector::from_fn(n, |i, _| data.y[original[i]]);
        Self { x, y, original }
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    fn p(&self) -> usize {
        self.x.ncols()
    }

    fn resid2(&self, beta: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(beta);
        (&self.y - &self.x * b).iter().map(|r| r * r).collect()
    }

    // Weighted moments over `rows`, normalised by `mass`.
    fn moments(&self, rows: &[(usize, f64)], mass: f64) -> Moments {
        let p = self.p();
        let mut xx = DMatrix::zeros(p, p);
        let mut xy = DVector::zeros(p);
        for &(i, w) in rows {
            for j in 0..p {
                let wx = w * self.x[(i, j)];
                xy[j] += wx * self.y[i];
                for k in j..p {
                    xx[(j, k)] += wx * self.x[(i, k)];
                }
            }
        }
        for j in 0..p {
            xy[j] /= mass;
            for k in j..p {
                xx[(j, k)] /= mass;
                xx[(k, j)] = xx[(j, k)];
            }
        }
        Moments { xx, xy }
    }
}

struct LtsSearch<'a> {
    data: Canonical,
    params: &'a SparseLTSParams,
    mass: f64,
    h: usize,
    // The objective is (1/mass)Σ w r² + λ‖β‖₁, i.e. half the λ of the
    // coordinate solver's 2λΣJ convention.
    inner_penalty: PenaltySpec,
    control: Control,
    seed: u64,
}

#[derive(Debug, Clone)]
struct Candidate {
    beta: Vec<f64>,
    subset: Vec<usize>,
    objective: f64,
    converged: bool,
}

impl<'a> LtsSearch<'a> {
    /// Lowest-mass selection for `beta`: the `h` rows with the smallest
    /// squared residuals (ties by canonical rank), the last one carrying the
    /// fractional weight. Returns weighted rows and the objective.
    fn select(&self, beta: &[f64]) -> (Vec<(usize, f64)>, f64) {
        let r2 = self.data.resid2(beta);
        let mut idx: Vec<usize> = (0..self.data.n()).collect();
        let cmp = |a: &usize, b: &usize| r2[*a].total_cmp(&r2[*b]).then(a.cmp(b));
        if self.h < idx.len() {
            idx.select_nth_unstable_by(self.h - 1, cmp);
            idx.truncate(self.h);
        }
        idx.sort_by(cmp);
        let whole = self.mass.floor() as usize;
        let mut sum = 0.0;
        let rows: Vec<(usize, f64)> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let w = if k < whole { 1.0 } else { self.mass - whole as f64 };
                sum += w * r2[i];
                (i, w)
            })
            .filter(|(_, w)| *w > 0.0)
            .collect();
        let pen: f64 = beta.iter().map(|b| b.abs()).sum();
        (rows, sum / self.mass + self.params.lambda * pen)
    }

    fn refit(&self, rows: &[(usize, f64)], mass: f64, start: &[f64]) -> Result<Vec<f64>> {
        let mom = self.moments_checked(rows, mass)?;
        let mut beta = start.to_vec();
        let (_, ok) = cd_on_moments(&mom, &self.inner_penalty, &mut beta, 1e-13, self.control.max_iter)?;
        if !ok {
            return Err(Error::NotConverged("subset lasso".into()));
        }
        Ok(beta)
    }

    fn moments_checked(&self, rows: &[(usize, f64)], mass: f64) -> Result<Moments> {
        let mom = self.data.moments(rows, mass);
        if self.params.lambda == 0.0 {
            let rc = linalg::rcond(&mom.xx);
            if !(rc >= linalg::RCOND_MIN) {
                return Err(Error::Singular { rcond: rc });
            }
        }
        Ok(mom)
    }

    fn subset_of(rows: &[(usize, f64)]) -> Vec<usize> {
        let mut s: Vec<usize> = rows.iter().map(|r| r.0).collect();
        s.sort_unstable();
        s
    }

    /// Concentration steps from `beta` until the subset repeats or
    /// `max_steps` is reached.
    fn concentrate(&self, mut beta: Vec<f64>, max_steps: usize) -> Result<Candidate> {
        let (mut rows, mut obj) = self.select(&beta);
        let mut subset = Self::subset_of(&rows);
        for _ in 0..max_steps {
            let next = self.refit(&rows, self.mass, &beta)?;
            let (next_rows, next_obj) = self.select(&next);
            let next_subset = Self::subset_of(&next_rows);
            let same = next_subset == subset;
            beta = next;
            rows = next_rows;
            obj = next_obj;
            subset = next_subset;
            if same {
                return Ok(Candidate { beta, subset, objective: obj, converged: true });
            }
        }
        Ok(Candidate { beta, subset, objective: obj, converged: false })
    }

    fn elemental_start(&self, start: usize) -> Result<Vec<f64>> {
        let n = self.data.n();
        let size = if self.params.lambda == 0.0 { (self.data.p() + 1).max(3) } else { 3 }.min(n);
        let mut last = Error::Singular { rcond: 0.0 };
        for attempt in 0..20u64 {
            let mut rng = substream(self.seed_for(start), domain::LTS_START, attempt);
            let rows: Vec<(usize, f64)> = index::sample(&mut rng, n, size).iter().map(|i| (i, 1.0)).collect();
            match self.refit(&rows, size as f64, &vec![0.0; self.data.p()]) {
                Ok(b) => return Ok(b),
                Err(e @ Error::Singular { .. }) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    fn seed_for(&self, start: usize) -> u64 {
        crate::model::child_seed(self.seed, domain::LTS_START, start as u64)
    }
}

fn better(a: &Candidate, b: &Candidate) -> Ordering {
    a.objective.total_cmp(&b.objective).then_with(|| a.subset.cmp(&b.subset))
}

/// Sparse LTS estimator by multi-start concentration steps.
///
/// Each of `starts` elemental subsets (size 3, or `max(3, p+1)` without
/// penalty) seeds a lasso fit, followed by `initial_steps` C-steps. The
/// `keep` best are iterated until their subset repeats. Starts are drawn on
/// a content-hashed row order, so the result does not depend on row order.
pub fn fit_sparse_lts(data: &Dataset, params: &SparseLTSParams, options: &FitOptions) -> Result<FitResult> {
    let n = data.n();
    let mass = params.alpha * n as f64;
    let h = mass.ceil() as usize;
    if h > n || h == 0 {
        return invalid("subset size exceeds the number of rows");
    }
    let search = LtsSearch {
        data: Canonical::new(data),
        params,
        mass,
        h,
        inner_penalty: PenaltySpec::l1(params.lambda / 2.0)?,
        control: options.control,
        seed: options.seed,
    };
    let sched = options.lts;
    let mut firsts: Vec<Candidate> = (0..sched.starts)
        .into_par_iter()
        .filter_map(|s| {
            let beta = search.elemental_start(s).ok()?;
            search.concentrate(beta, sched.initial_steps).ok()
        })
        .collect();
    if firsts.is_empty() {
        return Err(Error::Singular { rcond: 0.0 });
    }
    firsts.sort_by(better);
    firsts.truncate(sched.keep);
    let finals: Vec<Candidate> = firsts
        .into_par_iter()
        .map(|c| search.concentrate(c.beta, sched.max_steps))
        .collect::<Result<_>>()?;
    let best = finals.into_iter().min_by(better).expect("at least one candidate");
    let mut subset: Vec<usize> = best.subset.iter().map(|&k| search.data.original[k]).collect();
    subset.sort_unstable();
    Ok(FitResult {
        objective: sparse_lts_objective(data, params, &best.beta),
        beta_hat: best.beta,
        scale_hat: 1.0,
        subset: Some(subset),
        converged: best.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample, RegressionModel};
    use proptest::prelude::*;

    fn data(beta0: Vec<f64>, n: usize, seed: u64) -> Dataset {
        sample(&RegressionModel::new(beta0, 1.0).unwrap(), n, seed).unwrap()
    }

    fn ols(d: &Dataset) -> Vec<f64> {
        let xtx = d.x.transpose() * &d.x;
        let xty = d.x.transpose() * &d.y;
        xtx.lu().solve(&xty).unwrap().iter().copied().collect()
    }

    #[test]
    fn mad_examples() {
        assert!((mad_scale(&[-1.0, -1.0, 1.0, 1.0]).unwrap() - 1.4826).abs() < 1e-12);
        assert!(matches!(mad_scale(&[2.0, 2.0, 2.0]), Err(Error::DegenerateScale(_))));
        let d = data(vec![0.0], 100_000, 1);
        let r: Vec<f64> = d.y.iter().copied().collect();
        assert!((mad_scale(&r).unwrap() - 1.0).abs() < 0.02);
    }

    #[test]
    fn quadratic_unpenalized_is_ols() {
        let d = data(vec![1.5, -2.0, 0.3], 200, 2);
        let f = fit_penalized_m(&d, &LossSpec::quadratic(), &PenaltySpec::none(), &FitOptions::default()).unwrap();
        for (a, b) in f.beta_hat.iter().zip(ols(&d)) {
            assert!((a - b).abs() < 1e-8);
        }
        assert_eq!(f.scale_hat, 1.0);
        let f = fit_penalized_m(&d, &LossSpec::quadratic(), &PenaltySpec::l1(0.0).unwrap(), &FitOptions::default()).unwrap();
        for (a, b) in f.beta_hat.iter().zip(ols(&d)) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn quadratic_ridge_matches_linear_solve() {
        let d = data(vec![1.5, -2.0], 150, 3);
        let lam = 0.3;
        let f = fit_penalized_m(&d, &LossSpec::quadratic(), &PenaltySpec::l2(lam).unwrap(), &FitOptions::default()).unwrap();
        let n = d.n() as f64;
        let a = d.x.transpose() * &d.x / n + DMatrix::identity(2, 2) * (2.0 * lam);
        let b = d.x.transpose() * &d.y / n;
        let expect = a.lu().solve(&b).unwrap();
        for j in 0..2 {
            assert!((f.beta_hat[j] - expect[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn objective_certificate() {
        let d = data(vec![1.5, 0.0], 120, 4);
        let opts = FitOptions::default();
        let pen = PenaltySpec::l1(0.04).unwrap();
        for loss in [LossSpec::quadratic(), LossSpec::huber(), LossSpec::biweight()] {
            let f = fit_penalized_m(&d, &loss, &pen, &opts).unwrap();
            let l = loss.with_scale(f.scale_hat).unwrap();
            let again = penalized_m_objective(&d, &l, &pen, &f.beta_hat);
            assert!((f.objective - again).abs() < 1e-10);
        }
        let params = SparseLTSParams::with_lambda(0.1).unwrap();
        let f = fit_sparse_lts(&d, &params, &opts).unwrap();
        // Independent evaluation: sort residuals and trim by hand.
        let mut r2: Vec<f64> = d.residuals(&f.beta_hat).iter().map(|r| r * r).collect();
        r2.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = (0.75 * 120.0) as usize;
        let direct = r2[..h].iter().sum::<f64>() / h as f64 + 0.1 * f.beta_hat.iter().map(|b| b.abs()).sum::<f64>();
        assert!((f.objective - direct).abs() < 1e-10);
        assert_eq!(f.subset.as_ref().unwrap().len(), 90);
    }

    #[test]
    fn sample_kkt_for_l1() {
        let d = data(vec![1.5, 0.0, 0.0], 200, 5);
        let lam = 0.04;
        let pen = PenaltySpec::l1(lam).unwrap();
        for loss in [LossSpec::quadratic(), LossSpec::huber(), LossSpec::biweight()] {
            let f = fit_penalized_m(&d, &loss, &pen, &FitOptions::default()).unwrap();
            let l = loss.with_scale(f.scale_hat).unwrap();
            let r = d.residuals(&f.beta_hat);
            for j in 0..3 {
                let score: f64 = (0..d.n()).map(|i| d.x[(i, j)] * l.psi(r[i])).sum::<f64>() / d.n() as f64;
                if f.beta_hat[j] == 0.0 {
                    assert!(score.abs() <= 2.0 * lam + 1e-6, "{:?} coord {j}: {score}", loss.kind);
                } else {
                    assert!((score - 2.0 * lam * f.beta_hat[j].signum()).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn huber_lasso_near_population_value() {
        use crate::functionals::{irls, Control};
        use crate::model::{MCConfig, Population};
        let m = RegressionModel::new(vec![1.5], 1.0).unwrap();
        let pop = Population::new(m.clone(), MCConfig::new(100_000, 6).unwrap());
        let pen = PenaltySpec::l1(0.04).unwrap();
        let target = irls(&pop, &LossSpec::huber(), &pen, None, &Control::default()).unwrap().beta[0];
        let d = sample(&m, 200, 7).unwrap();
        let f = fit_penalized_m(&d, &LossSpec::huber(), &pen, &FitOptions::default()).unwrap();
        // Asymptotic sd of the Huber slope is about 1.05/√n.
        assert!((f.beta_hat[0] - target).abs() < 3.0 * 1.05 / 200f64.sqrt());
    }

    #[test]
    fn sparse_lts_without_trimming_is_ols() {
        let d = data(vec![1.5, -0.5], 100, 8);
        let params = SparseLTSParams::new(1.0, 0.0).unwrap();
        let f = fit_sparse_lts(&d, &params, &FitOptions::default()).unwrap();
        for (a, b) in f.beta_hat.iter().zip(ols(&d)) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn sparse_lts_resists_vertical_outliers() {
        let mut d = data(vec![1.5], 200, 9);
        let clean = d.clone();
        d.shift_responses_at_largest_x(40, 100.0);
        let opts = FitOptions::default();
        let params = SparseLTSParams::with_lambda(0.1).unwrap();
        let lts = fit_sparse_lts(&d, &params, &opts).unwrap();
        assert!((lts.beta_hat[0] - 1.5).abs() < 0.2, "{:?}", lts.beta_hat);
        let lts_clean = fit_sparse_lts(&clean, &params, &opts).unwrap();
        assert!((lts.beta_hat[0] - lts_clean.beta_hat[0]).abs() < 0.2);
        let lasso = fit_penalized_m(&d, &LossSpec::quadratic(), &PenaltySpec::l1(0.1).unwrap(), &opts).unwrap();
        assert!((lasso.beta_hat[0] - 1.5).abs() > 1.0);
    }

    #[test]
    fn concentration_never_increases_objective() {
        let mut d = data(vec![1.5, -1.0], 150, 10);
        d.shift_responses_at_largest_x(20, 30.0);
        let params = SparseLTSParams::with_lambda(0.05).unwrap();
        let search = LtsSearch {
            data: Canonical::new(&d),
            params: &params,
            mass: 0.75 * 150.0,
            h: 113,
            inner_penalty: PenaltySpec::l1(0.025).unwrap(),
            control: FitOptions::default().control,
            seed: 3,
        };
        for s in 0..5 {
            let mut beta = search.elemental_start(s).unwrap();
            let (mut rows, mut prev) = search.select(&beta);
            for _ in 0..30 {
                beta = search.refit(&rows, search.mass, &beta).unwrap();
                let (next_rows, obj) = search.select(&beta);
                assert!(obj <= prev + 1e-12, "{obj} > {prev}");
                prev = obj;
                rows = next_rows;
            }
        }
    }

    #[test]
    fn sparse_lts_is_permutation_invariant() {
        let d = data(vec![1.5, 0.5], 80, 11);
        let n = d.n();
        let perm: Vec<usize> = (0..n).map(|i| (i * 37 + 11) % n).collect();
        let shuffled = Dataset::new(
            DMatrix::from_fn(n, 2, |i, j| d.x[(perm[i], j)]),
            DVector::from_fn(n, |i, _| d.y[perm[i]]),
        )
        .unwrap();
        let params = SparseLTSParams::with_lambda(0.1).unwrap();
        let a = fit_sparse_lts(&d, &params, &FitOptions::default()).unwrap();
        let b = fit_sparse_lts(&shuffled, &params, &FitOptions::default()).unwrap();
        assert_eq!(a.beta_hat, b.beta_hat);
        let mapped: Vec<usize> = {
            let mut s: Vec<usize> = b.subset.unwrap().iter().map(|&i| perm[i]).collect();
            s.sort_unstable();
            s
        };
        assert_eq!(a.subset.unwrap(), mapped);
    }

    #[test]
    fn sparse_lts_deterministic_across_thread_counts() {
        let d = data(vec![1.5], 100, 12);
        let params = SparseLTSParams::with_lambda(0.1).unwrap();
        let a = fit_sparse_lts(&d, &params, &FitOptions::default()).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| fit_sparse_lts(&d, &params, &FitOptions::default()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn consistency_in_n() {
        // Penalised functional value at β0 = 1.5, λ = 0.1 is 1.4.
        let m = RegressionModel::new(vec![1.5], 1.0).unwrap();
        let pen = PenaltySpec::l1(0.1).unwrap();
        let mut wins = 0;
        for seed in 0..7 {
            let err: Vec<f64> = [100, 1000, 10_000]
                .iter()
                .map(|&n| {
                    let d = sample(&m, n, 100 + seed).unwrap();
                    let f = fit_penalized_m(&d, &LossSpec::quadratic(), &pen, &FitOptions::default()).unwrap();
                    (f.beta_hat[0] - 1.4).abs()
                })
                .collect();
            if err[2] < err[0] {
                wins += 1;
            }
        }
        assert!(wins >= 4, "{wins}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn mad_is_positive_and_shift_invariant(v in proptest::collection::vec(-100.0f64..100.0, 3..40), c in -10.0f64..10.0) {
            prop_assume!(v.iter().any(|a| (a - v[0]).abs() > 1e-3));
            if let Ok(s) = mad_scale(&v) {
                let shifted: Vec<f64> = v.iter().map(|a| a + c).collect();
                let t = mad_scale(&shifted).unwrap();
                prop_assert!(s > 0.0);
                prop_assert!((s - t).abs() <= 1e-9 * (1.0 + s));
            }
        }
    }
}
