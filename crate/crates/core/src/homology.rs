//! Boundary operators, Hodge Laplacians, Betti numbers, and the exact Hodge
//! projectors.
//!
//! All matrices are indexed by the lexicographic simplex lists of the
//! underlying [`CliqueComplex`]. Boundary matrices are kept as exact integer
//! sign patterns so that structural identities (like the boundary of a
//! boundary vanishing) can be checked without floating point.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex::CliqueComplex;
use crate::linalg;

/// Absolute threshold below which a Laplacian eigenvalue counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Sparse matrix with entries in `{-1, 0, +1}` stored as triplets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    /// `(row, col, sign)`, sorted by `(col, row)`, one entry per cell.
    entries: Vec<(usize, usize, i8)>,
}

impl SignMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, i8)] {
        &self.entries
    }

    /// Dense floating point copy.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, s) in &self.entries {
            m[(r, c)] = s as f64;
        }
        m
    }

    /// Exact integer product, returned as the list of nonzero entries.
    ///
    /// Runs entirely in integer arithmetic, so a structurally zero product
    /// comes back as an empty list rather than as floating point dust.
    pub fn mul_exact(&self, rhs: &SignMatrix) -> Vec<(usize, usize, i64)> {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut acc = vec![0i64; self.rows * rhs.cols];
        // index lhs entries by column for the join
        let mut by_col: Vec<Vec<(usize, i8)>> = vec![Vec::new(); self.cols];
        for &(r, c, s) in &self.entries {
            by_col[c].push((r, s));
        }
        for &(k, c, s_rhs) in &rhs.entries {
            for &(r, s_lhs) in &by_col[k] {
                acc[r * rhs.cols + c] += (s_lhs as i64) * (s_rhs as i64);
            }
        }
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..rhs.cols {
                let v = acc[r * rhs.cols + c];
                if v != 0 {
                    out.push((r, c, v));
                }
            }
        }
        out
    }
}

/// The boundary matrix `B_k`, mapping `k`-chains to `(k-1)`-chains.
///
/// Column `c` holds the boundary of the `c`-th `k`-simplex: the face with
/// vertex at position `j` removed appears with sign `(-1)^j`. For `k = 0`
/// the matrix has zero rows, matching the empty list of `(-1)`-simplices.
pub fn boundary_matrix(complex: &CliqueComplex, k: usize) -> SignMatrix {
    let cols = complex.num_simplices(k);
    if k == 0 {
        return SignMatrix { rows: 0, cols, entries: Vec::new() };
    }
    let rows = complex.num_simplices(k - 1);
    let mut entries = Vec::new();
    for (c, s) in complex.simplices(k).iter().enumerate() {
        for (pos, face) in s.faces() {
            let r = complex
                .index_of(&face)
                .expect("complexes are downward closed");
            let sign = if pos % 2 == 0 { 1 } else { -1 };
            entries.push((r, c, sign));
        }
    }
    entries.sort_by_key(|&(r, c, _)| (c, r));
    SignMatrix { rows, cols, entries }
}

/// Lower Hodge Laplacian `B_k^T B_k` on `k`-chains. Zero for `k = 0`.
pub fn lower_laplacian(complex: &CliqueComplex, k: usize) -> DMatrix<f64> {
    let b = boundary_matrix(complex, k).to_dense();
    b.transpose() * b
}

/// Upper Hodge Laplacian `B_{k+1} B_{k+1}^T` on `k`-chains.
///
/// Zero when the complex has no `(k+1)`-simplices, in particular at `k_max`.
pub fn upper_laplacian(complex: &CliqueComplex, k: usize) -> DMatrix<f64> {
    let n_k = complex.num_simplices(k);
    if complex.num_simplices(k + 1) == 0 {
        return DMatrix::zeros(n_k, n_k);
    }
    let b = boundary_matrix(complex, k + 1).to_dense();
    &b * b.transpose()
}

/// Full Hodge Laplacian, the sum of the lower and upper parts.
pub fn hodge_laplacian(complex: &CliqueComplex, k: usize) -> DMatrix<f64> {
    lower_laplacian(complex, k) + upper_laplacian(complex, k)
}

/// Dimension of the kernel of the Hodge Laplacian, the `k`-th Betti number.
pub fn betti_number(complex: &CliqueComplex, k: usize) -> usize {
    if complex.num_simplices(k) == 0 {
        return 0;
    }
    linalg::symmetric_eigenvalues(&hodge_laplacian(complex, k))
        .iter()
        .filter(|l| l.abs() < ZERO_TOL)
        .count()
}

/// Orthonormal basis of harmonic `k`-chains, one column per kernel vector.
pub fn harmonic_basis(complex: &CliqueComplex, k: usize) -> DMatrix<f64> {
    let l = hodge_laplacian(complex, k);
    let (values, vectors) = linalg::sym_eigen_sorted(&l);
    let kernel_dim = values.iter().filter(|l| l.abs() < ZERO_TOL).count();
    vectors.columns(0, kernel_dim).into_owned()
}

/// The three orthogonal pieces a `k`-chain splits into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Gradient,
    Curl,
    Harmonic,
}

/// Exact orthogonal projector onto one Hodge component of `k`-chains.
///
/// The gradient projector is `B_k^T (B_k B_k^T)^+ B_k`, the curl projector
/// is `B_{k+1} (B_{k+1}^T B_{k+1})^+ B_{k+1}^T`, and the harmonic projector
/// is the identity minus both.
pub fn projector(complex: &CliqueComplex, k: usize, component: Component) -> DMatrix<f64> {
    let n_k = complex.num_simplices(k);
    match component {
        Component::Gradient => {
            let b = boundary_matrix(complex, k).to_dense();
            if b.nrows() == 0 {
                return DMatrix::zeros(n_k, n_k);
            }
            let gram = &b * b.transpose();
            b.transpose() * linalg::pinv_psd(&gram) * b
        }
        Component::Curl => {
            if complex.num_simplices(k + 1) == 0 {
                return DMatrix::zeros(n_k, n_k);
            }
            let b = boundary_matrix(complex, k + 1).to_dense();
            let gram = b.transpose() * &b;
            &b * linalg::pinv_psd(&gram) * b.transpose()
        }
        Component::Harmonic => {
            DMatrix::identity(n_k, n_k)
                - projector(complex, k, Component::Gradient)
                - projector(complex, k, Component::Curl)
        }
    }
}

/// A `k`-chain split into its gradient, curl, and harmonic parts.
#[derive(Clone, Debug)]
pub struct HodgeDecomposition {
    pub gradient: DVector<f64>,
    pub curl: DVector<f64>,
    pub harmonic: DVector<f64>,
}

/// Splits `signal` into its three Hodge components.
pub fn decompose(complex: &CliqueComplex, k: usize, signal: &DVector<f64>) -> HodgeDecomposition {
    let g = projector(complex, k, Component::Gradient) * signal;
    let c = projector(complex, k, Component::Curl) * signal;
    let h = signal - &g - &c;
    HodgeDecomposition { gradient: g, curl: c, harmonic: h }
}

/// Minimum-norm potential: the shortest `(k-1)`-chain whose coboundary is
/// the gradient part of `signal`, computed as `(B_k^T)^+ signal`.
pub fn min_norm_potential(
    complex: &CliqueComplex,
    k: usize,
    signal: &DVector<f64>,
) -> DVector<f64> {
    let bt = boundary_matrix(complex, k).to_dense().transpose();
    linalg::pinv(&bt) * signal
}

/// Smallest nonzero singular value of a boundary matrix, if any.
pub fn min_nonzero_singular_value(b: &SignMatrix) -> Option<f64> {
    if b.rows() == 0 || b.cols() == 0 {
        return None;
    }
    let svd = b.to_dense().svd(false, false);
    svd.singular_values
        .iter()
        .copied()
        .filter(|s| *s > ZERO_TOL)
        .min_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Graph;
    use approx::assert_abs_diff_eq;
    use itertools::Itertools;

    fn complete_graph(n: usize) -> Graph {
        let edges: Vec<(u32, u32)> =
            (1..=n as u32).array_combinations().map(|[a, b]| (a, b)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn triangle() -> CliqueComplex {
        CliqueComplex::build(complete_graph(3), 3)
    }

    fn four_cycle() -> CliqueComplex {
        let g = Graph::from_edges(4, &[(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        CliqueComplex::build(g, 3)
    }

    #[test]
    fn triangle_boundary_matrices_are_frozen() {
        let k = triangle();
        let b1 = boundary_matrix(&k, 1).to_dense();
        // rows [1],[2],[3]; cols [1,2],[1,3],[2,3]
        let expected1 = DMatrix::from_row_slice(3, 3, &[
            -1.0, -1.0, 0.0,
            1.0, 0.0, -1.0,
            0.0, 1.0, 1.0,
        ]);
        assert_eq!(b1, expected1);
        let b2 = boundary_matrix(&k, 2).to_dense();
        let expected2 = DMatrix::from_column_slice(3, 1, &[1.0, -1.0, 1.0]);
        assert_eq!(b2, expected2);
    }

    #[test]
    fn boundary_of_vertices_has_no_rows() {
        let k = triangle();
        let b0 = boundary_matrix(&k, 0);
        assert_eq!((b0.rows(), b0.cols()), (0, 3));
        assert!(lower_laplacian(&k, 0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn each_boundary_column_has_simplex_size_many_entries() {
        let k = CliqueComplex::build(complete_graph(5), 3);
        for dim in 1..=3usize {
            let b = boundary_matrix(&k, dim);
            let mut per_col = vec![0usize; b.cols()];
            for &(_, c, _) in b.entries() {
                per_col[c] += 1;
            }
            assert!(per_col.iter().all(|&c| c == dim + 1),
                "a {dim}-simplex has {} faces", dim + 1);
        }
    }

    #[test]
    fn boundary_of_boundary_vanishes_exactly() {
        for (graph, k_max) in [
            (complete_graph(5), 3),
            (complete_graph(6), 4),
            (Graph::from_edges(6, &[(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 6), (6, 4)]).unwrap(), 3),
        ] {
            let k = CliqueComplex::build(graph, k_max);
            for dim in 1..k_max {
                let b_k = boundary_matrix(&k, dim);
                let b_k1 = boundary_matrix(&k, dim + 1);
                assert!(b_k.mul_exact(&b_k1).is_empty(),
                    "integer product B_{dim} B_{} must vanish", dim + 1);
            }
        }
    }

    #[test]
    fn triangle_laplacians_match_hand_computation() {
        let k = triangle();
        let lower = lower_laplacian(&k, 1);
        let upper = upper_laplacian(&k, 1);
        let expected_lower = DMatrix::from_row_slice(3, 3, &[
            2.0, 1.0, -1.0,
            1.0, 2.0, 1.0,
            -1.0, 1.0, 2.0,
        ]);
        let expected_upper = DMatrix::from_row_slice(3, 3, &[
            1.0, -1.0, 1.0,
            -1.0, 1.0, -1.0,
            1.0, -1.0, 1.0,
        ]);
        assert_eq!(lower, expected_lower);
        assert_eq!(upper, expected_upper);
        assert_eq!(hodge_laplacian(&k, 1), DMatrix::from_diagonal_element(3, 3, 3.0));
    }

    #[test]
    fn betti_numbers_of_reference_spaces() {
        // filled triangle: contractible
        assert_eq!(betti_number(&triangle(), 0), 1);
        assert_eq!(betti_number(&triangle(), 1), 0);
        // circle
        let c4 = four_cycle();
        assert_eq!(betti_number(&c4, 0), 1);
        assert_eq!(betti_number(&c4, 1), 1);
        // hollow tetrahedron boundary: a 2-sphere
        let sphere = CliqueComplex::build(complete_graph(4), 2);
        assert_eq!(betti_number(&sphere, 0), 1);
        assert_eq!(betti_number(&sphere, 1), 0);
        assert_eq!(betti_number(&sphere, 2), 1);
        // two components
        let two = CliqueComplex::build(
            Graph::from_edges(4, &[(1, 2), (3, 4)]).unwrap(), 1);
        assert_eq!(betti_number(&two, 0), 2);
    }

    #[test]
    fn four_cycle_harmonic_edge_flow_circulates() {
        let k = four_cycle();
        let h = harmonic_basis(&k, 1);
        assert_eq!(h.ncols(), 1);
        // canonical edge order [1,2],[1,4],[2,3],[3,4]; the circulation
        // 1->2->3->4->1 runs against the orientation of [1,4]
        let expected = DVector::from_vec(vec![1.0, -1.0, 1.0, 1.0]) / 2.0;
        let got = h.column(0).into_owned();
        let aligned = if got[0] < 0.0 { -got } else { got };
        assert_abs_diff_eq!((aligned - expected).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn triangle_component_dimensions() {
        let k = triangle();
        let tr = |m: &DMatrix<f64>| m.diagonal().sum();
        assert_abs_diff_eq!(tr(&projector(&k, 1, Component::Gradient)), 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(tr(&projector(&k, 1, Component::Curl)), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(tr(&projector(&k, 1, Component::Harmonic)), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn projectors_are_idempotent_orthogonal_and_sum_to_identity() {
        for (k, dim) in [(four_cycle(), 1), (CliqueComplex::build(complete_graph(5), 3), 1),
                         (CliqueComplex::build(complete_graph(5), 3), 2)] {
            let g = projector(&k, dim, Component::Gradient);
            let c = projector(&k, dim, Component::Curl);
            let h = projector(&k, dim, Component::Harmonic);
            let n = g.nrows();
            for (name, p) in [("gradient", &g), ("curl", &c), ("harmonic", &h)] {
                assert!((p * p - p).norm() <= 1e-10, "{name} projector not idempotent");
                assert!((p.transpose() - p).norm() <= 1e-10, "{name} projector not symmetric");
            }
            assert!((&g * &c).norm() <= 1e-10, "gradient and curl ranges must be orthogonal");
            assert!((&g + &c + &h - DMatrix::identity(n, n)).norm() <= 1e-10);
        }
    }

    #[test]
    fn decomposition_reconstructs_the_signal() {
        let k = CliqueComplex::build(complete_graph(5), 3);
        let n1 = k.num_simplices(1);
        let s = DVector::from_fn(n1, |i, _| ((i * 7 + 3) % 11) as f64 - 5.0);
        let d = decompose(&k, 1, &s);
        assert_abs_diff_eq!((&d.gradient + &d.curl + &d.harmonic - &s).norm(), 0.0, epsilon = 1e-10);
        assert!(d.gradient.dot(&d.curl).abs() <= 1e-9);
        assert!(d.gradient.dot(&d.harmonic).abs() <= 1e-9);
        assert!(d.curl.dot(&d.harmonic).abs() <= 1e-9);
    }

    #[test]
    fn lower_and_upper_spectra_share_nonzero_eigenvalues() {
        let k = CliqueComplex::build(complete_graph(5), 3);
        for dim in 1..=2usize {
            let lower_of_k = linalg::symmetric_eigenvalues(&lower_laplacian(&k, dim));
            let upper_below = linalg::symmetric_eigenvalues(&upper_laplacian(&k, dim - 1));
            let nz = |v: &[f64]| -> Vec<f64> {
                v.iter().copied().filter(|x| *x > ZERO_TOL).collect()
            };
            let (a, b) = (nz(&lower_of_k), nz(&upper_below));
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn laplacian_eigenvalues_do_not_exceed_vertex_count() {
        for n in [4usize, 5, 6] {
            let k = CliqueComplex::build(complete_graph(n), 3);
            for dim in 0..=3usize {
                if k.num_simplices(dim) == 0 {
                    continue;
                }
                let max = linalg::symmetric_eigenvalues(&hodge_laplacian(&k, dim))
                    .last()
                    .copied()
                    .unwrap();
                assert!(max <= n as f64 + 1e-9, "n={n} dim={dim} max={max}");
            }
        }
    }

    #[test]
    fn min_norm_potential_solves_the_gradient_part() {
        let k = CliqueComplex::build(complete_graph(4), 3);
        let n1 = k.num_simplices(1);
        let s = DVector::from_fn(n1, |i, _| (i as f64) - 2.0);
        let pot = min_norm_potential(&k, 1, &s);
        let bt = boundary_matrix(&k, 1).to_dense().transpose();
        let grad = projector(&k, 1, Component::Gradient) * &s;
        assert_abs_diff_eq!((&bt * &pot - grad).norm(), 0.0, epsilon = 1e-9);
        // minimum norm puts the potential orthogonal to the constants
        assert_abs_diff_eq!(pot.sum(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn xi_min_of_triangle_boundary_is_sqrt_3() {
        let k = triangle();
        let b1 = boundary_matrix(&k, 1);
        // nonzero eigenvalues of L_1 are all 3, so xi_min = sqrt(3)
        assert_abs_diff_eq!(
            min_nonzero_singular_value(&b1).unwrap(),
            3.0_f64.sqrt(),
            epsilon = 1e-9
        );
        let b0 = boundary_matrix(&k, 0);
        assert_eq!(min_nonzero_singular_value(&b0), None);
    }
}
