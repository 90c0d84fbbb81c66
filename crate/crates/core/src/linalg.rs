use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Systems with a 2-norm condition number above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Dense LU solve with partial pivoting, refusing ill-conditioned systems.
pub fn solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let condition = condition_number(&a);
    if condition > SINGULAR_CONDITION || !condition.is_finite() {
        return Err(Error::SingularHessian { condition });
    }
    a.lu().solve(&b).ok_or(Error::SingularHessian { condition: f64::INFINITY })
}
