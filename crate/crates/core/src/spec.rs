//! Named functional and estimator choices, pairing each population
//! functional with its influence function and its sample estimator.

use crate::error::{invalid, Error, Result};
use crate::estimators::{fit_penalized_m, fit_sparse_lts, FitOptions, FitResult};
use crate::functionals::{
    coord_descent, lasso_simple, least_squares, penalized_m, ridge, scad_simple, sparse_lts_simple,
    Control, FunctionalResult, SparseLTSParams,
};
use crate::influence::{Influence, LassoMultiIF, PenalizedMIF, RidgeIF, SparseLtsIF};
use crate::losses::LossSpec;
use crate::model::{Dataset, Population};
use crate::penalties::{PenaltySpec, SCAD_A};

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalSpec {
    LeastSquares,
    Ridge { lambda: f64 },
    Lasso { lambda: f64 },
    Scad { lambda: f64 },
    PenalizedM { loss: LossSpec, penalty: PenaltySpec },
    SparseLts(SparseLTSParams),
}

/// Names accepted by [`FunctionalSpec::from_name`], in the canonical order.
pub const NAMES: [&str; 7] = ["ls", "ridge", "lasso", "scad", "huber_l1", "biweight_l1", "sparse_lts"];

impl FunctionalSpec {
    pub fn huber_l1(lambda: f64) -> Result<Self> {
        Ok(Self::PenalizedM { loss: LossSpec::huber(), penalty: PenaltySpec::l1(lambda)? })
    }

    pub fn biweight_l1(lambda: f64) -> Result<Self> {
        Ok(Self::PenalizedM { loss: LossSpec::biweight(), penalty: PenaltySpec::l1(lambda)? })
    }

    /// `alpha` only matters for sparse LTS.
    pub fn from_name(name: &str, lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return invalid("lambda must be nonnegative");
        }
        Ok(match name {
            "ls" => Self::LeastSquares,
            "ridge" => Self::Ridge { lambda },
            "lasso" => Self::Lasso { lambda },
            "scad" => Self::Scad { lambda },
            "huber_l1" => Self::huber_l1(lambda)?,
            "biweight_l1" => Self::biweight_l1(lambda)?,
            "sparse_lts" => Self::SparseLts(SparseLTSParams::new(alpha, lambda)?),
            other => return invalid(format!("unknown functional '{other}'")),
        })
    }

    /// The seven standard functionals. `lambda_robust` is used for the
    /// Huber, biweight and sparse LTS entries.
    pub fn standard_set(lambda: f64, lambda_robust: f64) -> Result<Vec<Self>> {
        NAMES
            .iter()
            .map(|n| {
                let robust = matches!(*n, "huber_l1" | "biweight_l1" | "sparse_lts");
                Self::from_name(n, if robust { lambda_robust } else { lambda }, 0.75)
            })
            .collect()
    }

    pub fn label(&self) -> String {
        match self {
            Self::LeastSquares => "ls".into(),
            Self::Ridge { .. } => "ridge".into(),
            Self::Lasso { .. } => "lasso".into(),
            Self::Scad { .. } => "scad".into(),
            Self::PenalizedM { loss, penalty } => format!("{}_{}", loss.kind.label(), penalty.label()),
            Self::SparseLts(_) => "sparse_lts".into(),
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            Self::LeastSquares => 0.0,
            Self::Ridge { lambda } | Self::Lasso { lambda } | Self::Scad { lambda } => *lambda,
            Self::PenalizedM { penalty, .. } => penalty.lambda,
            Self::SparseLts(p) => p.lambda,
        }
    }

    /// Same functional with a different λ.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Ok(match self {
            Self::LeastSquares => Self::LeastSquares,
            Self::Ridge { .. } => Self::Ridge { lambda },
            Self::Lasso { .. } => Self::Lasso { lambda },
            Self::Scad { .. } => Self::Scad { lambda },
            Self::PenalizedM { loss, penalty } => {
                Self::PenalizedM { loss: *loss, penalty: PenaltySpec::new(penalty.kind, lambda)? }
            }
            Self::SparseLts(p) => Self::SparseLts(SparseLTSParams::new(p.alpha, lambda)?),
        })
    }

    /// Loss and penalty of the penalised M form, if the functional has one.
    pub fn as_penalized_m(&self) -> Option<(LossSpec, PenaltySpec)> {
        let q = LossSpec::quadratic();
        match self {
            Self::LeastSquares => Some((q, PenaltySpec::none())),
            Self::Ridge { lambda } => PenaltySpec::l2(*lambda).ok().map(|p| (q, p)),
            Self::Lasso { lambda } => PenaltySpec::l1(*lambda).ok().map(|p| (q, p)),
            Self::Scad { lambda } => PenaltySpec::scad(*lambda).ok().map(|p| (q, p)),
            Self::PenalizedM { loss, penalty } => Some((*loss, *penalty)),
            Self::SparseLts(_) => None,
        }
    }

    /// Functional value at the model and its influence function. Closed
    /// forms are used where they exist (simple regression); otherwise the
    /// functional is solved on the population draws with `control`.
    pub fn evaluate(
        &self,
        pop: &Population,
        control: &Control,
    ) -> Result<(FunctionalResult, Box<dyn Influence>)> {
        let model = pop.model();
        let simple = model.p() == 1;
        match self {
            Self::LeastSquares => {
                let fr = least_squares(model);
                let inf = RidgeIF::new(model, &fr, 0.0)?;
                Ok((fr, Box::new(inf)))
            }
            Self::Ridge { lambda } => {
                let fr = ridge(model, *lambda)?;
                let inf = RidgeIF::new(model, &fr, *lambda)?;
                Ok((fr, Box::new(inf)))
            }
            Self::Lasso { lambda } => {
                let fr = if simple {
                    lasso_simple(model, *lambda)?
                } else {
                    coord_descent(pop, &PenaltySpec::l1(*lambda)?, None, control)?
                };
                let inf = LassoMultiIF::new(pop, &fr)?;
                Ok((fr, Box::new(inf)))
            }
            Self::Scad { lambda } => {
                let pen = PenaltySpec::scad(*lambda)?;
                let fr = if simple {
                    scad_simple(model, *lambda, SCAD_A)?
                } else {
                    coord_descent(pop, &pen, None, control)?
                };
                let inf = PenalizedMIF::new(pop, &LossSpec::quadratic(), &pen, &fr)?;
                Ok((fr, Box::new(inf)))
            }
            Self::PenalizedM { loss, penalty } => {
                let fr = penalized_m(pop, loss, penalty, control)?;
                let inf = PenalizedMIF::new(pop, loss, penalty, &fr)?;
                Ok((fr, Box::new(inf)))
            }
            Self::SparseLts(params) => {
                if !simple {
                    return Err(Error::Unsupported(
                        "sparse LTS functional is available for simple regression only".into(),
                    ));
                }
                let fr = sparse_lts_simple(model, params)?;
                let inf = SparseLtsIF::new(model, &fr, params)?;
                Ok((fr, Box::new(inf)))
            }
        }
    }
}

/// A sample estimator: the functional's empirical counterpart together with
/// all fitting options, including the sparse LTS start seed.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec {
    pub functional: FunctionalSpec,
    pub options: FitOptions,
}

impl EstimatorSpec {
    pub fn new(functional: FunctionalSpec) -> Self {
        Self { functional, options: FitOptions::default() }
    }

    pub fn with_options(functional: FunctionalSpec, options: FitOptions) -> Self {
        Self { functional, options }
    }

    pub fn label(&self) -> String {
        self.functional.label()
    }

    pub fn fit(&self, data: &Dataset) -> Result<FitResult> {
        match (&self.functional, self.functional.as_penalized_m()) {
            (FunctionalSpec::SparseLts(params), _) => fit_sparse_lts(data, params, &self.options),
            (_, Some((loss, penalty))) => fit_penalized_m(data, &loss, &penalty, &self.options),
            (_, None) => unreachable!("every non-LTS functional has a penalised M form"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MCConfig, RegressionModel};

    fn pop(beta0: f64) -> Population {
        Population::new(RegressionModel::new(vec![beta0], 1.0).unwrap(), MCConfig::new(20_000, 1).unwrap())
    }

    #[test]
    fn names_round_trip() {
        for spec in FunctionalSpec::standard_set(0.1, 0.04).unwrap() {
            let again = FunctionalSpec::from_name(&spec.label(), spec.lambda(), 0.75).unwrap();
            assert_eq!(again, spec);
        }
        assert!(FunctionalSpec::from_name("lad", 0.1, 0.75).is_err());
    }

    #[test]
    fn evaluates_all_standard_functionals() {
        let p = pop(1.5);
        for spec in FunctionalSpec::standard_set(0.1, 0.04).unwrap() {
            let (fr, inf) = spec.evaluate(&p, &Control::with_tol(1e-10)).unwrap();
            assert_eq!(fr.beta.len(), 1);
            assert!(inf.at(&[1.0], 2.0).unwrap()[0].is_finite(), "{}", spec.label());
        }
    }

    #[test]
    fn sparse_functionals_vanish_below_threshold() {
        let p = pop(0.05);
        for name in ["lasso", "scad", "sparse_lts"] {
            let spec = FunctionalSpec::from_name(name, 0.1, 0.75).unwrap();
            let (fr, inf) = spec.evaluate(&p, &Control::default()).unwrap();
            assert_eq!(fr.beta, vec![0.0]);
            assert_eq!(inf.at(&[3.0], -7.0).unwrap(), vec![0.0]);
        }
    }

    #[test]
    fn sparse_lts_needs_simple_regression() {
        let p = Population::new(RegressionModel::new(vec![1.0, 0.0], 1.0).unwrap(), MCConfig::new(1000, 1).unwrap());
        let spec = FunctionalSpec::from_name("sparse_lts", 0.1, 0.75).unwrap();
        assert!(matches!(spec.evaluate(&p, &Control::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn estimator_fits_dispatch() {
        let d = crate::model::sample(&RegressionModel::new(vec![1.5], 1.0).unwrap(), 100, 2).unwrap();
        for spec in FunctionalSpec::standard_set(0.1, 0.04).unwrap() {
            let f = EstimatorSpec::new(spec.clone()).fit(&d).unwrap();
            assert!((f.beta_hat[0] - 1.5).abs() < 0.6, "{}: {:?}", spec.label(), f.beta_hat);
            assert_eq!(f.subset.is_some(), matches!(spec, FunctionalSpec::SparseLts(_)));
        }
    }
}
