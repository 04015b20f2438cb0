//! Small dense linear algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Relative cutoff used when inverting near-zero singular values.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

/// Eigendecomposition of a symmetric positive semidefinite matrix with
/// eigenvalues sorted ascending and eigenvector columns permuted to match.
///
/// The QL iteration behind `symmetric_eigen` can fail to converge on
/// degenerate spectra and report non-finite eigenvalues; in that case the
/// decomposition falls back to an SVD, whose singular triplets are the
/// eigenpairs of a PSD input.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let (raw_values, raw_vectors) = if eig.eigenvalues.iter().all(|l| l.is_finite()) {
        (eig.eigenvalues, eig.eigenvectors)
    } else {
        let svd = m.clone().svd(true, false);
        (svd.singular_values, svd.u.expect("left singular vectors requested"))
    };
    let n = raw_values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let values = DVector::from_fn(n, |i, _| raw_values[order[i]]);
    let vectors = DMatrix::from_fn(m.nrows(), n, |r, c| raw_vectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a symmetric positive semidefinite matrix, sorted
/// ascending, with the same SVD fallback as [`sym_eigen_sorted`].
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let eigs = m.clone().symmetric_eigen().eigenvalues;
    let mut v: Vec<f64> = if eigs.iter().all(|l| l.is_finite()) {
        eigs.iter().copied().collect()
    } else {
        m.clone().svd(false, false).singular_values.iter().copied().collect()
    };
    v.sort_by(f64::total_cmp);
    v
}

/// Moore-Penrose pseudoinverse of a symmetric positive semidefinite matrix.
///
/// Eigenvalues below `PINV_RELATIVE_CUTOFF` times the largest eigenvalue are
/// treated as zero; if every eigenvalue is zero the cutoff is applied against
/// 1, so the pseudoinverse of the zero matrix is the zero matrix.
pub fn pinv_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen_sorted(m);
    let largest = values.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let cutoff = PINV_RELATIVE_CUTOFF * if largest > 0.0 { largest } else { 1.0 };
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..values.len() {
        if values[i] > cutoff {
            let v = vectors.column(i);
            out += (&v * v.transpose()) / values[i];
        }
    }
    out
}

/// Moore-Penrose pseudoinverse of an arbitrary rectangular matrix via SVD,
/// with the same relative cutoff rule as [`pinv_psd`].
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let largest = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let cutoff = PINV_RELATIVE_CUTOFF * if largest > 0.0 { largest } else { 1.0 };
    svd.pseudo_inverse(cutoff)
        .expect("svd was computed with both sets of vectors")
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Lifts a real matrix into the complex field.
pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Frobenius distance from `u` being unitary, `||u* u - I||_F`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.ncols();
    let mut g = u.adjoint() * u;
    for i in 0..n {
        g[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    g.norm()
}
