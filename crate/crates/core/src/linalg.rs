use nalgebra::DMatrix;

/// Residuals of the least-squares fit of every column of `data` on the
/// columns of `design`. `design` must have full column rank.
///
/// Projection is applied twice against the thin Q factor; the second pass
/// brings the residual's inner products with the design down to rounding
/// level even when the first pass loses a few digits.
pub(crate) fn ols_residuals(design: &DMatrix<f64>, data: &DMatrix<f64>) -> DMatrix<f64> {
    let q = design.clone().qr().q();
    let mut resid = data.clone();
    for _ in 0..2 {
        let coef = q.transpose() * &resid;
        resid -= &q * coef;
    }
    resid
}

/// Ratio of smallest to largest singular value; 0 for an all-zero matrix.
pub(crate) fn inverse_condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    if max <= 0.0 {
        return 0.0;
    }
    sv.min() / max
}
