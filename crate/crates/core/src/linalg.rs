//! Small dense solves with condition-number reporting.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Reciprocal condition numbers below this are treated as singular.
pub const RCOND_MIN: f64 = 1e-12;

/// Reciprocal 2-norm condition number `σ_min / σ_max`.
pub fn rcond(a: &DMatrix<f64>) -> f64 {
    let sv = a.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

/// Solves `a x = b`, failing with the condition estimate when `a` is
/// numerically singular.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let rc = rcond(a);
    if !(rc >= RCOND_MIN) {
        return Err(Error::Singular { rcond: rc });
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or(Error::Singular { rcond: rc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_well_conditioned() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![3.0, 5.0]);
        let x = solve(&a, &b).unwrap();
        assert!((&a * x - b).amax() < 1e-14);
    }

    #[test]
    fn reports_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let err = solve(&a, &DVector::from_vec(vec![1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::Singular { rcond } if rcond < 1e-12));
    }
}
