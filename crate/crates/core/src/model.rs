//! Population regression model `y = x'β0 + e`, seeded sampling and the
//! Monte-Carlo expectation engine shared by every population-level solver.
//!
//! Randomness is organised in substreams: a ChaCha8 generator keyed by the
//! user seed, with the stream number derived from a domain tag and a chunk
//! index. Draws are produced in fixed-size chunks, each chunk owning its own
//! substream, so the generated sequence does not depend on how many worker
//! threads participate. Reductions always run in chunk order.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Number of rows generated from one substream.
pub const CHUNK: usize = 4096;

/// Default number of Monte-Carlo draws for population expectations.
pub const DEFAULT_DRAWS: usize = 100_000;

/// Substream domains. A stream id is `domain << 40 | index`.
pub mod domain {
    pub const DRAWS: u64 = 1;
    pub const OUTER: u64 = 2;
    pub const SAMPLE: u64 = 3;
    pub const REPLICATE: u64 = 4;
    pub const LTS_START: u64 = 5;
}

/// Generator for substream `(domain, index)` of `seed`.
pub fn substream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 40) | index);
    rng
}

/// Derives a child seed, e.g. one per replicate of a simulation study.
pub fn child_seed(seed: u64, domain: u64, index: u64) -> u64 {
    substream(seed, domain, index).random()
}

/// Marginal distribution of a predictor coordinate or of the error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Normal { sd: f64 },
}

impl Distribution {
    pub fn standard_normal() -> Self {
        Distribution::Normal { sd: 1.0 }
    }

    pub fn sd(&self) -> f64 {
        match *self {
            Distribution::Normal { sd } => sd,
        }
    }

    pub fn second_moment(&self) -> f64 {
        let sd = self.sd();
        sd * sd
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, Distribution::Normal { .. })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Normal { sd } => {
                let z: f64 = rng.sample(StandardNormal);
                sd * z
            }
        }
    }
}

/// The model distribution H0 of `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    beta0: Vec<f64>,
    predictors: Vec<Distribution>,
    error: Distribution,
}

impl RegressionModel {
    /// Independent standard normal predictors and `N(0, sigma²)` errors.
    pub fn new(beta0: Vec<f64>, sigma: f64) -> Result<Self> {
        let sd = vec![1.0; beta0.len()];
        Self::with_predictor_sd(beta0, sd, sigma)
    }

    pub fn with_predictor_sd(beta0: Vec<f64>, predictor_sd: Vec<f64>, sigma: f64) -> Result<Self> {
        if beta0.is_empty() {
            return invalid("model needs p >= 1 coefficients");
        }
        if predictor_sd.len() != beta0.len() {
            return invalid(format!(
                "predictor_sd has length {} but beta0 has length {}",
                predictor_sd.len(),
                beta0.len()
            ));
        }
        if beta0.iter().any(|b| !b.is_finite()) {
            return invalid("beta0 must be finite");
        }
        if predictor_sd.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return invalid("predictor standard deviations must be positive");
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return invalid("sigma must be positive");
        }
        Ok(Self {
            beta0,
            predictors: predictor_sd
                .into_iter()
                .map(|sd| Distribution::Normal { sd })
                .collect(),
            error: Distribution::Normal { sd: sigma },
        })
    }

    pub fn p(&self) -> usize {
        self.beta0.len()
    }

    pub fn beta0(&self) -> &[f64] {
        &self.beta0
    }

    pub fn sigma(&self) -> f64 {
        self.error.sd()
    }

    pub fn predictors(&self) -> &[Distribution] {
        &self.predictors
    }

    pub fn error(&self) -> Distribution {
        self.error
    }

    /// Analytic `E[x_j²]` per coordinate.
    pub fn second_moments(&self) -> Vec<f64> {
        self.predictors.iter().map(|d| d.second_moment()).collect()
    }

    /// True when predictors and error are all normal.
    pub fn is_normal(&self) -> bool {
        self.error.is_normal() && self.predictors.iter().all(|d| d.is_normal())
    }

    /// Same model with a different coefficient vector.
    pub fn with_beta0(&self, beta0: Vec<f64>) -> Result<Self> {
        let sd = self.predictors.iter().map(|d| d.sd()).collect();
        Self::with_predictor_sd(beta0, sd, self.sigma())
    }

    fn fill_row<R: Rng + ?Sized>(&self, rng: &mut R, x: &mut [f64]) -> f64 {
        let mut fit = 0.0;
        for (j, dist) in self.predictors.iter().enumerate() {
            x[j] = dist.draw(rng);
            fit += x[j] * self.beta0[j];
        }
        fit + self.error.draw(rng)
    }

    /// `n` rows from substream domain `dom`, generated chunk-parallel.
    pub(crate) fn generate(&self, n: usize, seed: u64, dom: u64) -> Dataset {
        let p = self.p();
        let n_chunks = n.div_ceil(CHUNK);
        let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let rows = CHUNK.min(n - c * CHUNK);
                let mut rng = substream(seed, dom, c as u64);
                let mut xs = vec![0.0; rows * p];
                let mut ys = vec![0.0; rows];
                for i in 0..rows {
                    ys[i] = self.fill_row(&mut rng, &mut xs[i * p..(i + 1) * p]);
                }
                (xs, ys)
            })
            .collect();
        let mut x = DMatrix::zeros(n, p);
        let mut y = DVector::zeros(n);
        let mut offset = 0;
        for (xs, ys) in chunks {
            for (i, yi) in ys.iter().enumerate() {
                y[offset + i] = *yi;
                for j in 0..p {
                    x[(offset + i, j)] = xs[i * p + j];
                }
            }
            offset += ys.len();
        }
        Dataset { x, y }
    }
}

/// Draw `n` rows `(x_i, y_i)` from the model.
pub fn sample(model: &RegressionModel, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return invalid("sample size must be positive");
    }
    Ok(model.generate(n, seed, domain::SAMPLE))
}

/// Monte-Carlo configuration: the same `(seed, n_draws)` yields bit-identical draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MCConfig {
    pub n_draws: usize,
    pub seed: u64,
}

impl MCConfig {
    pub fn new(n_draws: usize, seed: u64) -> Result<Self> {
        if n_draws == 0 {
            return invalid("n_draws must be at least 1");
        }
        Ok(Self { n_draws, seed })
    }
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            n_draws: DEFAULT_DRAWS,
            seed: 0,
        }
    }
}

/// Design matrix and response, intercept-free.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return invalid(format!("X has {} rows but y has {}", x.nrows(), y.len()));
        }
        if x.ncols() == 0 {
            return invalid("X needs at least one column");
        }
        if x.nrows() < 2 {
            return invalid("a dataset needs at least two rows");
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return invalid("dataset contains non-finite entries");
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    /// Residuals `y - Xβ`.
    pub fn residuals(&self, beta: &[f64]) -> DVector<f64> {
        let b = DVector::from_column_slice(beta);
        &self.y - &self.x * b
    }

    /// Copy with one extra row appended.
    pub fn with_row(&self, x0: &[f64], y0: f64) -> Result<Self> {
        if x0.len() != self.p() {
            return invalid("appended row has the wrong dimension");
        }
        let n = self.n();
        let mut x = self.x.clone().resize_vertically(n + 1, 0.0);
        for (j, v) in x0.iter().enumerate() {
            x[(n, j)] = *v;
        }
        let mut y = self.y.clone().resize_vertically(n + 1, 0.0);
        y[n] = y0;
        Dataset::new(x, y)
    }

    /// Rows `start..end` as a new dataset.
    pub fn rows(&self, start: usize, end: usize) -> Dataset {
        Dataset {
            x: self.x.rows(start, end - start).into_owned(),
            y: self.y.rows(start, end - start).into_owned(),
        }
    }

    /// Adds `shift` to the response of the `count` rows with the largest
    /// first predictor value (ties by row index). Returns the affected rows.
    pub fn shift_responses_at_largest_x(&mut self, count: usize, shift: f64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| self.x[(b, 0)].total_cmp(&self.x[(a, 0)]).then(a.cmp(&b)));
        order.truncate(count.min(self.n()));
        for &i in &order {
            self.y[i] += shift;
        }
        order.sort_unstable();
        order
    }
}

/// Monte-Carlo mean and its standard error, per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Mean and standard error of `f(x_i, y_i)` over the rows of `data`.
///
/// Non-finite integrand values are reported with the smallest offending row.
pub fn mean_over<F>(data: &Dataset, f: F) -> Result<Expectation>
where
    F: Fn(&[f64], f64) -> Vec<f64> + Sync,
{
    let n = data.n();
    let p = data.p();
    let n_chunks = n.div_ceil(CHUNK);
    let partial: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            let mut row = vec![0.0; p];
            let mut sum: Vec<f64> = Vec::new();
            let mut sq: Vec<f64> = Vec::new();
            for i in start..end {
                for (j, r) in row.iter_mut().enumerate() {
                    *r = data.x[(i, j)];
                }
                let v = f(&row, data.y[i]);
                if v.iter().any(|t| !t.is_finite()) {
                    return Err(Error::NonFinite { index: i });
                }
                if sum.is_empty() {
                    sum = vec![0.0; v.len()];
                    sq = vec![0.0; v.len()];
                }
                for (k, t) in v.iter().enumerate() {
                    sum[k] += t;
                    sq[k] += t * t;
                }
            }
            Ok((sum, sq))
        })
        .collect();
    let mut sum: Vec<f64> = Vec::new();
    let mut sq: Vec<f64> = Vec::new();
    for part in partial {
        let (s, q) = part?;
        if sum.is_empty() {
            sum = s;
            sq = q;
        } else {
            for k in 0..sum.len() {
                sum[k] += s[k];
                sq[k] += q[k];
            }
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let stderr = mean
        .iter()
        .zip(&sq)
        .map(|(m, q)| {
            if n < 2 {
                return 0.0;
            }
            let var = ((q / nf - m * m) * nf / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        })
        .collect();
    Ok(Expectation { mean, stderr })
}

/// `E_H0[f(x, y)]` by Monte Carlo, with standard error.
pub fn expect<F>(model: &RegressionModel, f: F, cfg: &MCConfig) -> Result<Expectation>
where
    F: Fn(&[f64], f64) -> Vec<f64> + Sync,
{
    let draws = model.generate(cfg.n_draws, cfg.seed, domain::DRAWS);
    mean_over(&draws, f)
}

/// A model together with one fixed set of Monte-Carlo draws.
///
/// Every expectation taken through the same `Population` reuses the same
/// draws (common random numbers).
#[derive(Debug, Clone)]
pub struct Population {
    model: RegressionModel,
    cfg: MCConfig,
    draws: Dataset,
}

impl Population {
    pub fn new(model: RegressionModel, cfg: MCConfig) -> Self {
        let draws = model.generate(cfg.n_draws, cfg.seed, domain::DRAWS);
        Self { model, cfg, draws }
    }

    pub fn model(&self) -> &RegressionModel {
        &self.model
    }

    pub fn cfg(&self) -> &MCConfig {
        &self.cfg
    }

    pub fn draws(&self) -> &Dataset {
        &self.draws
    }

    pub fn p(&self) -> usize {
        self.model.p()
    }

    /// Same draws under a different coefficient vector. The predictor and
    /// error draws are shared; only the response is rebuilt.
    pub fn with_beta0(&self, beta0: Vec<f64>) -> Result<Self> {
        let model = self.model.with_beta0(beta0)?;
        let old = DVector::from_column_slice(self.model.beta0());
        let new = DVector::from_column_slice(model.beta0());
        let y = &self.draws.y + &self.draws.x * (new - old);
        Ok(Self {
            model,
            cfg: self.cfg,
            draws: Dataset {
                x: self.draws.x.clone(),
                y,
            },
        })
    }

    /// Fresh draws from an independent substream, for outer integrals.
    pub fn outer_draws(&self) -> Dataset {
        self.model
            .generate(self.cfg.n_draws, self.cfg.seed, domain::OUTER)
    }

    pub fn expect<F>(&self, f: F) -> Result<Expectation>
    where
        F: Fn(&[f64], f64) -> Vec<f64> + Sync,
    {
        mean_over(&self.draws, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_is_deterministic() {
        let m = RegressionModel::new(vec![1.5, -0.5], 1.0).unwrap();
        let a = sample(&m, 5000, 7).unwrap();
        let b = sample(&m, 5000, 7).unwrap();
        assert_eq!(a, b);
        let c = sample(&m, 5000, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_rejects_zero_rows() {
        let m = RegressionModel::new(vec![1.0], 1.0).unwrap();
        assert!(matches!(sample(&m, 0, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn model_validation() {
        assert!(RegressionModel::new(vec![], 1.0).is_err());
        assert!(RegressionModel::new(vec![1.0], 0.0).is_err());
        assert!(RegressionModel::with_predictor_sd(vec![1.0], vec![1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn response_mean_is_zero_under_symmetry() {
        let m = RegressionModel::new(vec![0.0], 1.0).unwrap();
        let d = sample(&m, 100_000, 3).unwrap();
        let mean = d.y.mean();
        assert!(mean.abs() < 4e-2, "mean {mean}");
    }

    #[test]
    fn covariance_matches_beta0() {
        let m = RegressionModel::new(vec![1.5], 1.0).unwrap();
        let d = sample(&m, 100_000, 11).unwrap();
        let n = d.n() as f64;
        let (mx, my) = (d.x.column(0).mean(), d.y.mean());
        let cov = d.x.column(0).iter().zip(d.y.iter()).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
        assert!((cov - 1.5).abs() / 1.5 < 0.02, "cov {cov}");
    }

    #[test]
    fn predictors_and_error_uncorrelated() {
        let m = RegressionModel::new(vec![2.0, 0.0], 1.0).unwrap();
        let cov_at = |n: usize| {
            let d = sample(&m, n, 5).unwrap();
            let e = d.residuals(m.beta0());
            let c = d.x.column(0).dot(&e) / n as f64;
            c.abs()
        };
        // Shrinks like 1/sqrt(n); allow generous slack at the large size.
        assert!(cov_at(200_000) < 0.02);
    }

    #[test]
    fn expectations_of_known_moments() {
        let m = RegressionModel::new(vec![1.5], 1.0).unwrap();
        let cfg = MCConfig::new(100_000, 21).unwrap();
        let e2 = expect(&m, |x, _| vec![x[0] * x[0]], &cfg).unwrap();
        assert!((e2.mean[0] - 1.0).abs() <= 3.0 * e2.stderr[0]);
        let exy = expect(&m, |x, y| vec![x[0] * y], &cfg).unwrap();
        assert!((exy.mean[0] - 1.5).abs() <= 3.0 * exy.stderr[0]);
        let c = expect(&m, |_, _| vec![7.0], &cfg).unwrap();
        assert_eq!(c.mean[0], 7.0);
        assert_eq!(c.stderr[0], 0.0);
    }

    #[test]
    fn expect_reports_offending_draw() {
        let m = RegressionModel::new(vec![1.0], 1.0).unwrap();
        let cfg = MCConfig::new(10_000, 2).unwrap();
        let err = expect(&m, |x, _| vec![if x[0] > 3.0 { f64::NAN } else { 0.0 }], &cfg).unwrap_err();
        let draws = m.generate(10_000, 2, domain::DRAWS);
        let first = (0..10_000).find(|&i| draws.x[(i, 0)] > 3.0).unwrap();
        assert_eq!(err, Error::NonFinite { index: first });
    }

    #[test]
    fn expect_is_bit_identical_and_thread_independent() {
        let m = RegressionModel::new(vec![1.0, 2.0], 1.0).unwrap();
        let cfg = MCConfig::new(30_000, 9).unwrap();
        let f = |x: &[f64], y: f64| vec![x[0] * y, (x[1] * y).sin()];
        let a = expect(&m, f, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| expect(&m, f, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn stderr_scales_with_inverse_root_draws() {
        let m = RegressionModel::new(vec![1.0], 1.0).unwrap();
        let se = |n: usize| {
            let cfg = MCConfig::new(n, 4).unwrap();
            expect(&m, |x, _| vec![x[0].tanh()], &cfg).unwrap().stderr[0]
        };
        let (s3, s4, s5) = (se(1_000), se(10_000), se(100_000));
        for (a, b) in [(s3, s4), (s4, s5)] {
            let ratio = a / b / 10f64.sqrt();
            assert!((0.5..2.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn population_reuses_predictor_draws_across_beta0() {
        let m = RegressionModel::new(vec![1.0], 1.0).unwrap();
        let pop = Population::new(m, MCConfig::new(1000, 1).unwrap());
        let other = pop.with_beta0(vec![-2.0]).unwrap();
        assert_eq!(pop.draws().x, other.draws().x);
        let e_old = pop.draws().residuals(&[1.0]);
        let e_new = other.draws().residuals(&[-2.0]);
        assert!((e_old - e_new).amax() < 1e-12);
    }
}
