//! Small dense linear-algebra helpers over nalgebra.

use nalgebra::{ComplexField, DMatrix, DVector};

/// Ratio of extreme eigenvalues of a Hermitian matrix; infinite when the
/// smallest is not positive.
pub fn hermitian_condition<T>(m: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64>,
{
    let eig = m.clone().symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `m x = b` for Hermitian positive definite `m`.
pub fn hermitian_solve<T>(m: DMatrix<T>, b: &DVector<T>) -> Option<DVector<T>>
where
    T: ComplexField<RealField = f64>,
{
    m.cholesky().map(|c| c.solve(b))
}
