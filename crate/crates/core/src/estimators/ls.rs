use crate::linalg::{lstsq, shape_of};
use crate::{Error, Matrix, Result};

/// `argmin_B ||Y - Z B||^2`, minimum-norm when `Z` is rank deficient.
pub fn fit_ls(z: &Matrix, y: &Matrix) -> Result<Matrix> {
    if z.nrows() != y.nrows() {
        return Err(Error::shape(
            "fit_ls",
            format!("{} rows", z.nrows()),
            shape_of(y),
        ));
    }
    Ok(lstsq(z, y)?.coefficients)
}

/// `(Z^T Z + lambda I)^{-1} Z^T y`; `y` may have several columns.
pub fn fit_ridge(z: &Matrix, y: &Matrix, lambda: f64) -> Result<Matrix> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param(
            "lambda",
            format!("must be positive, got {lambda}"),
        ));
    }
    if z.nrows() != y.nrows() {
        return Err(Error::shape(
            "fit_ridge",
            format!("{} rows", z.nrows()),
            shape_of(y),
        ));
    }
    let m = z.ncols();
    let a = z.transpose() * z + Matrix::identity(m, m) * lambda;
    let chol = a
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("Z^T Z + lambda I"))?;
    Ok(chol.solve(&(z.transpose() * y)))
}
