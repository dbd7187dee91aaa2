//! Dense symmetric eigensolve for small operators.

use nalgebra::DMatrix;

use super::{fix_sign, residual_norm, EigenPairs, SymmetricOp};

/// Full dense eigendecomposition; returns the `l` smallest pairs.
pub(super) fn dense_bottom(op: &dyn SymmetricOp, l: usize) -> EigenPairs {
    let n = op.dim();
    let rows = op.to_dense_rows();
    let mut mat = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            // Average the off-diagonal mirror entries so the solver sees an
            // exactly symmetric matrix.
            let avg = 0.5 * (rows[i][j] + rows[j][i]);
            mat[(i, j)] = avg;
            mat[(j, i)] = avg;
        }
        mat[(i, i)] = rows[i][i];
    }
    let decomp = mat.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));

    let mut values = Vec::with_capacity(l);
    let mut vectors = Vec::with_capacity(l);
    let mut residuals = Vec::with_capacity(l);
    for &idx in order.iter().take(l) {
        let mut v: Vec<f64> = decomp.eigenvectors.column(idx).iter().copied().collect();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        fix_sign(&mut v);
        let value = decomp.eigenvalues[idx];
        residuals.push(residual_norm(op, value, &v));
        values.push(value);
        vectors.push(v);
    }
    EigenPairs { values, vectors, residuals }
}
