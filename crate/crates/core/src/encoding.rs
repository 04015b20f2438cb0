//! Simplicial basis encodings and projected unitary encodings of boundary
//! operators.
//!
//! Two basis encodings are supported. The direct encoding writes a simplex
//! as its characteristic bit vector over `n` qubits (vertex `i` occupies bit
//! `n - i`, so vertex 1 is the most significant bit). The compact encoding
//! writes the sorted vertex word `(q_0, .., q_k)` in base `n + 1` with `q_0`
//! most significant and 0 reserved for "no vertex"; when an upper-boundary
//! path needs it, one extra base-`(n+1)` register is appended last and held
//! at 0 for the encoded states.
//!
//! A [`Pue`] carries a unitary together with left/right projectors, a scale
//! `alpha`, an ancilla count, and a measured error: the projected block
//! `Pi' U Pi` times `alpha` reproduces the encoded operator. The direct
//! encoding uses the Dirac operator `D/sqrt(n)` which is already unitary;
//! the compact encoding completes the exact boundary block to a unitary by
//! dilation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::complex::{CliqueComplex, Simplex, Vertex};
use crate::{homology, linalg, Error, Result};

/// Hard cap on rows of any materialized state-space matrix.
pub const DIM_CAP: usize = 1 << 14;

/// Which basis encoding a state space uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodingKind {
    Direct,
    Compact,
}

impl std::fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EncodingKind::Direct => write!(f, "direct"),
            EncodingKind::Compact => write!(f, "compact"),
        }
    }
}

/// A concrete state space for `k`-simplices of an `n`-vertex complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisEncoding {
    pub kind: EncodingKind,
    pub n: usize,
    pub k: usize,
    /// Compact only: one extra vertex register appended last, held at 0.
    pub extended: bool,
    dim: usize,
}

impl BasisEncoding {
    pub fn direct(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k >= n {
            return Err(Error::Encoding(format!("direct encoding needs 0 <= k < n, got n={n}, k={k}")));
        }
        let dim = check_dim(1usize.checked_shl(n as u32).unwrap_or(usize::MAX))?;
        Ok(BasisEncoding { kind: EncodingKind::Direct, n, k, extended: false, dim })
    }

    pub fn compact(n: usize, k: usize, extended: bool) -> Result<Self> {
        if n == 0 || k >= n {
            return Err(Error::Encoding(format!("compact encoding needs 0 <= k < n, got n={n}, k={k}")));
        }
        let registers = k + 1 + usize::from(extended);
        let dim = (n + 1)
            .checked_pow(registers as u32)
            .ok_or(Error::StateSpaceTooLarge { dim: usize::MAX, cap: DIM_CAP })?;
        let dim = check_dim(dim)?;
        Ok(BasisEncoding { kind: EncodingKind::Compact, n, k, extended, dim })
    }

    /// Full state-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Basis index of a `k`-simplex, if it has the right dimension.
    pub fn index_of(&self, simplex: &Simplex) -> Option<usize> {
        if simplex.dim() != self.k {
            return None;
        }
        match self.kind {
            EncodingKind::Direct => {
                let mut idx = 0usize;
                for &v in simplex.vertices() {
                    idx |= 1 << (self.n - v as usize);
                }
                Some(idx)
            }
            EncodingKind::Compact => {
                let mut idx = 0usize;
                for &v in simplex.vertices() {
                    idx = idx * (self.n + 1) + v as usize;
                }
                if self.extended {
                    idx *= self.n + 1;
                }
                Some(idx)
            }
        }
    }

    /// Decodes a basis index into the candidate vertex tuple it spells.
    ///
    /// Direct indices decode to the set bits (ascending by construction);
    /// compact indices decode to the stored word, which may be malformed.
    /// `None` means the index cannot spell a `k`-simplex at all (wrong
    /// popcount, nonzero extension register, or a 0 vertex slot).
    pub fn decode(&self, index: usize) -> Option<Vec<Vertex>> {
        debug_assert!(index < self.dim);
        match self.kind {
            EncodingKind::Direct => {
                if index.count_ones() as usize != self.k + 1 {
                    return None;
                }
                let mut vertices = Vec::with_capacity(self.k + 1);
                for i in 1..=self.n {
                    if index & (1 << (self.n - i)) != 0 {
                        vertices.push(i as Vertex);
                    }
                }
                Some(vertices)
            }
            EncodingKind::Compact => {
                let mut digits = vec![0usize; self.registers()];
                let mut rest = index;
                for d in digits.iter_mut().rev() {
                    *d = rest % (self.n + 1);
                    rest /= self.n + 1;
                }
                if self.extended {
                    if digits[self.k + 1] != 0 {
                        return None;
                    }
                    digits.truncate(self.k + 1);
                }
                if digits.iter().any(|&d| d == 0) {
                    return None;
                }
                Some(digits.into_iter().map(|d| d as Vertex).collect())
            }
        }
    }

    fn registers(&self) -> usize {
        self.k + 1 + usize::from(self.extended)
    }
}

fn check_dim(dim: usize) -> Result<usize> {
    if dim > DIM_CAP {
        Err(Error::StateSpaceTooLarge { dim, cap: DIM_CAP })
    } else {
        Ok(dim)
    }
}

/// Diagonal 0/1 mask of the simplex projector `Pi_k` on the encoding's
/// state space: 1 exactly where the decoded tuple is a `k`-simplex of the
/// complex (and the extension register reads 0, for extended encodings).
pub fn simplex_projector_mask(complex: &CliqueComplex, enc: &BasisEncoding) -> Vec<bool> {
    let k = enc.k;
    (0..enc.dim())
        .map(|idx| match enc.decode(idx) {
            Some(vertices) => vertices.len() == k + 1 && complex.is_member(&vertices),
            None => false,
        })
        .collect()
}

/// The projector as a dense diagonal matrix.
pub fn simplex_projector(complex: &CliqueComplex, enc: &BasisEncoding) -> DMatrix<f64> {
    let mask = simplex_projector_mask(complex, enc);
    DMatrix::from_diagonal(&DVector::from_iterator(
        mask.len(),
        mask.iter().map(|&b| if b { 1.0 } else { 0.0 }),
    ))
}

/// `C_Pi NOT = Pi (x) X + (I - Pi) (x) I` on system-then-flag ordering
/// (basis index `2*system + flag`).
pub fn cpinot(projector: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = projector.nrows();
    if projector.ncols() != n {
        return Err(Error::Dimension { expected: n, got: projector.ncols() });
    }
    check_dim(2 * n)?;
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let p = projector[(r, c)];
            let delta = if r == c { 1.0 } else { 0.0 };
            // flag-preserving part (I - Pi) and flag-flipping part Pi
            out[(2 * r, 2 * c)] = delta - p;
            out[(2 * r + 1, 2 * c + 1)] = delta - p;
            out[(2 * r + 1, 2 * c)] = p;
            out[(2 * r, 2 * c + 1)] = p;
        }
    }
    Ok(out)
}

/// The fermionic Dirac operator `D = sum_i Z^(i-1) (x) X (x) I^(n-i)` on
/// `n` qubits. Hermitian with `D^2 = n I` exactly.
pub fn dirac_operator(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::Encoding("dirac operator needs n >= 1".into()));
    }
    let dim = check_dim(1usize.checked_shl(n as u32).unwrap_or(usize::MAX))?;
    let mut d = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        for i in 1..=n {
            let bit = n - i; // vertex i sits at bit n - i
            let row = col ^ (1 << bit);
            // Z factors act on vertices 1..i-1, i.e. bits above `bit`
            let prefix = col >> (bit + 1);
            let sign = if (prefix.count_ones() & 1) == 0 { 1.0 } else { -1.0 };
            d[(row, col)] += sign;
        }
    }
    Ok(d)
}

/// Normalized signal state: amplitude `s_i / ||s||` at the basis index of
/// the `i`-th `k`-simplex, zero elsewhere.
pub fn encode_signal(
    complex: &CliqueComplex,
    enc: &BasisEncoding,
    values: &DVector<f64>,
) -> Result<DVector<Complex64>> {
    let simplices = complex.simplices(enc.k);
    if values.len() != simplices.len() {
        return Err(Error::Dimension { expected: simplices.len(), got: values.len() });
    }
    let norm = values.norm();
    if norm < 1e-300 {
        return Err(Error::Signal("zero-norm signal cannot be encoded".into()));
    }
    let mut state = DVector::from_element(enc.dim(), Complex64::new(0.0, 0.0));
    for (i, s) in simplices.iter().enumerate() {
        let idx = enc.index_of(s).expect("simplex dimension matches encoding");
        state[idx] = Complex64::new(values[i] / norm, 0.0);
    }
    Ok(state)
}

/// Reads the simplex-indexed amplitudes back out of a state vector.
pub fn decode_state(
    complex: &CliqueComplex,
    enc: &BasisEncoding,
    state: &DVector<Complex64>,
) -> Result<DVector<f64>> {
    if state.len() != enc.dim() {
        return Err(Error::Dimension { expected: enc.dim(), got: state.len() });
    }
    let simplices = complex.simplices(enc.k);
    let mut out = DVector::zeros(simplices.len());
    for (i, s) in simplices.iter().enumerate() {
        let idx = enc.index_of(s).expect("simplex dimension matches encoding");
        let amp = state[idx];
        if amp.im.abs() > 1e-9 {
            return Err(Error::Signal(format!(
                "amplitude at simplex {i} has imaginary part {:.3e}",
                amp.im
            )));
        }
        out[i] = amp.re;
    }
    Ok(out)
}

/// How a PUE's unitary is stored and applied.
#[derive(Clone, Debug)]
pub enum PueKernel {
    /// `D / sqrt(n)` applied sparsely (direct encoding).
    Dirac { n: usize },
    /// An explicit dense unitary (compact dilations, small composites).
    Dense(DMatrix<Complex64>),
}

/// A projected unitary encoding: `alpha * (Pi' U Pi)` reproduces the
/// encoded operator within `error`.
#[derive(Clone, Debug)]
pub struct Pue {
    pub kernel: PueKernel,
    /// Left projector `Pi'` as a diagonal mask.
    pub left_mask: Vec<bool>,
    /// Right projector `Pi` as a diagonal mask.
    pub right_mask: Vec<bool>,
    pub alpha: f64,
    /// Ancilla count as the cost model book-keeps it (the simulator may
    /// realize the same block with a different physical register count).
    pub ancillas: usize,
    pub error: f64,
    dim: usize,
}

impl Pue {
    pub fn new(
        kernel: PueKernel,
        left_mask: Vec<bool>,
        right_mask: Vec<bool>,
        alpha: f64,
        ancillas: usize,
        error: f64,
    ) -> Result<Self> {
        let dim = match &kernel {
            PueKernel::Dirac { n } => 1usize << n,
            PueKernel::Dense(m) => {
                if m.nrows() != m.ncols() {
                    return Err(Error::Dimension { expected: m.nrows(), got: m.ncols() });
                }
                m.nrows()
            }
        };
        if left_mask.len() != dim || right_mask.len() != dim {
            return Err(Error::Dimension { expected: dim, got: left_mask.len() });
        }
        Ok(Pue { kernel, left_mask, right_mask, alpha, ancillas, error, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Applies the unitary to a state vector.
    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        match &self.kernel {
            PueKernel::Dirac { n } => apply_dirac_scaled(*n, v, false),
            PueKernel::Dense(m) => m * v,
        }
    }

    /// Applies the adjoint unitary.
    pub fn apply_adjoint(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        match &self.kernel {
            PueKernel::Dirac { n } => apply_dirac_scaled(*n, v, false), // Hermitian
            PueKernel::Dense(m) => m.adjoint() * v,
        }
    }

    /// The adjoint encoding `U_A^dagger = U_A^dagger` with swapped
    /// projectors, encoding the conjugate transpose of the block.
    pub fn adjoint_pue(&self) -> Pue {
        let kernel = match &self.kernel {
            PueKernel::Dirac { n } => PueKernel::Dirac { n: *n },
            PueKernel::Dense(m) => PueKernel::Dense(m.adjoint()),
        };
        Pue {
            kernel,
            left_mask: self.right_mask.clone(),
            right_mask: self.left_mask.clone(),
            alpha: self.alpha,
            ancillas: self.ancillas,
            error: self.error,
            dim: self.dim,
        }
    }

    /// Materializes the unitary (test-scale dimensions only).
    pub fn unitary_matrix(&self) -> DMatrix<Complex64> {
        match &self.kernel {
            PueKernel::Dirac { n } => {
                let d = dirac_operator(*n).expect("dimension already validated");
                linalg::to_complex(&d) / Complex64::new((*n as f64).sqrt(), 0.0)
            }
            PueKernel::Dense(m) => m.clone(),
        }
    }

    /// The projected block `Pi' U Pi` on the full state space.
    pub fn block(&self) -> DMatrix<Complex64> {
        let mut u = self.unitary_matrix();
        for (c, &keep) in self.right_mask.iter().enumerate() {
            if !keep {
                u.column_mut(c).fill(Complex64::new(0.0, 0.0));
            }
        }
        for (r, &keep) in self.left_mask.iter().enumerate() {
            if !keep {
                u.row_mut(r).fill(Complex64::new(0.0, 0.0));
            }
        }
        u
    }
}

fn apply_dirac_scaled(n: usize, v: &DVector<Complex64>, _adjoint: bool) -> DVector<Complex64> {
    let dim = 1usize << n;
    debug_assert_eq!(v.len(), dim);
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    for col in 0..dim {
        let amp = v[col];
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        for i in 1..=n {
            let bit = n - i;
            let row = col ^ (1 << bit);
            let prefix = col >> (bit + 1);
            let sign = if (prefix.count_ones() & 1) == 0 { scale } else { -scale };
            out[row] += amp * sign;
        }
    }
    out
}

/// Builds the projected unitary encoding of the boundary operator `B_k`.
///
/// Direct: the unitary is `D/sqrt(n)` on `n` qubits with `Pi_(k-1)` on the
/// left and `Pi_k` on the right; `alpha = sqrt(n)`, no ancillas.
///
/// Compact: the exact block `B_k/alpha` (face words padded with a trailing
/// 0 register, so source and target share one space of dimension
/// `(n+1)^(k+1)`) is completed to a unitary by the dilation
/// `[[A, sqrt(I-AA^T)], [sqrt(I-A^T A), -A^T]]`; `alpha =
/// sqrt((n+1)(k+1))`, ancilla count `ceil(log2(k+1))` as the cost model
/// states it. The dilation block index is the most significant, so the
/// encoded space is the first `N` rows.
pub fn boundary_pue(complex: &CliqueComplex, k: usize, kind: EncodingKind) -> Result<Pue> {
    let n = complex.graph().n();
    if k == 0 || k > complex.k_max() {
        return Err(Error::Encoding(format!(
            "boundary encoding needs 1 <= k <= k_max = {}, got {k}",
            complex.k_max()
        )));
    }
    match kind {
        EncodingKind::Direct => {
            let enc_k = BasisEncoding::direct(n, k)?;
            let enc_km1 = BasisEncoding::direct(n, k - 1)?;
            let right_mask = simplex_projector_mask(complex, &enc_k);
            let left_mask = simplex_projector_mask(complex, &enc_km1);
            Pue::new(
                PueKernel::Dirac { n },
                left_mask,
                right_mask,
                (n as f64).sqrt(),
                0,
                0.0,
            )
        }
        EncodingKind::Compact => {
            let enc_k = BasisEncoding::compact(n, k, false)?;
            let enc_km1 = BasisEncoding::compact(n, k - 1, true)?;
            debug_assert_eq!(enc_k.dim(), enc_km1.dim());
            let dim = enc_k.dim();
            check_dim(2 * dim)?;
            let alpha = (((n + 1) * (k + 1)) as f64).sqrt();

            // exact block on the shared word space
            let b = homology::boundary_matrix(complex, k);
            let faces = complex.simplices(k - 1);
            let simplices = complex.simplices(k);
            let mut a = DMatrix::zeros(dim, dim);
            for &(r, c, sign) in b.entries() {
                let row = enc_km1.index_of(&faces[r]).expect("face dimension matches");
                let col = enc_k.index_of(&simplices[c]).expect("simplex dimension matches");
                a[(row, col)] = sign as f64 / alpha;
            }

            let u = dilate_contraction(&a)?;
            let defect = linalg::unitarity_defect(&u);
            let mut right_mask = simplex_projector_mask(complex, &enc_k);
            let mut left_mask = simplex_projector_mask(complex, &enc_km1);
            right_mask.extend(std::iter::repeat(false).take(dim));
            left_mask.extend(std::iter::repeat(false).take(dim));
            let ancillas = (usize::BITS - k.leading_zeros()) as usize; // ceil(log2(k+1))
            Pue::new(PueKernel::Dense(u), left_mask, right_mask, alpha, ancillas, defect)
        }
    }
}

/// Completes a contraction `A` (`||A|| <= 1`) to the unitary
/// `[[A, sqrt(I-AA^T)], [sqrt(I-A^T A), -A^T]]`.
///
/// The square roots are assembled from the eigenpairs of the small-rank
/// Gram matrices: `sqrt(I - G) = I - sum_i (1 - sqrt(1 - g_i)) u_i u_i^T`
/// over the nonzero eigenpairs of `G`, costing `O(N^2 r)` instead of a
/// dense matrix square root.
fn dilate_contraction(a: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    let sqrt_complement = |gram: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let (eigs, vecs) = linalg::sym_eigen_sorted(gram);
        let mut s = DMatrix::identity(n, n);
        for (i, &g) in eigs.iter().enumerate() {
            if g.abs() < 1e-14 {
                continue;
            }
            if g > 1.0 + 1e-9 {
                return Err(Error::Encoding(format!(
                    "block has singular value above 1 (gram eigenvalue {g:.6}); not a contraction"
                )));
            }
            let coef = 1.0 - (1.0 - g.min(1.0)).sqrt();
            let u = vecs.column(i);
            // s -= coef * u u^T
            s.ger(-coef, &u, &u, 1.0);
        }
        Ok(s)
    };
    let upper_right = sqrt_complement(&(a * a.transpose()))?;
    let lower_left = sqrt_complement(&(a.transpose() * a))?;
    let mut u = DMatrix::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(a);
    u.view_mut((0, n), (n, n)).copy_from(&upper_right);
    u.view_mut((n, 0), (n, n)).copy_from(&lower_left);
    u.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    Ok(linalg::to_complex(&u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Graph;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn k3() -> CliqueComplex {
        CliqueComplex::build(Graph::from_edges(3, &[(1, 2), (1, 3), (2, 3)]).unwrap(), 2)
    }

    fn simplex(v: &[Vertex]) -> Simplex {
        Simplex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn direct_indices_are_characteristic_bit_vectors() {
        let enc = BasisEncoding::direct(3, 1).unwrap();
        assert_eq!(enc.dim(), 8);
        assert_eq!(enc.index_of(&simplex(&[1, 2])), Some(0b110));
        assert_eq!(enc.index_of(&simplex(&[1, 3])), Some(0b101));
        assert_eq!(enc.index_of(&simplex(&[2, 3])), Some(0b011));
        assert_eq!(enc.index_of(&simplex(&[1])), None, "wrong dimension");
        assert_eq!(enc.decode(0b110), Some(vec![1, 2]));
        assert_eq!(enc.decode(0b111), None, "popcount 3 is not an edge");
    }

    #[test]
    fn compact_indices_are_sorted_vertex_words() {
        let enc = BasisEncoding::compact(3, 1, false).unwrap();
        assert_eq!(enc.dim(), 16);
        assert_eq!(enc.index_of(&simplex(&[1, 2])), Some(6));
        assert_eq!(enc.index_of(&simplex(&[1, 3])), Some(7));
        assert_eq!(enc.index_of(&simplex(&[2, 3])), Some(11));
        assert_eq!(enc.decode(6), Some(vec![1, 2]));
        assert_eq!(enc.decode(4), None, "word (1,0) has a zero slot");
        // malformed but decodable words are handed to membership checking
        assert_eq!(enc.decode(9), Some(vec![2, 1]));
    }

    #[test]
    fn extended_compact_appends_a_zero_register_last() {
        let enc = BasisEncoding::compact(3, 1, true).unwrap();
        assert_eq!(enc.dim(), 64);
        assert_eq!(enc.index_of(&simplex(&[1, 2])), Some(24));
        assert_eq!(enc.decode(24), Some(vec![1, 2]));
        assert_eq!(enc.decode(25), None, "extension register must read 0");
    }

    #[test]
    fn state_space_cap_is_enforced() {
        assert!(matches!(
            BasisEncoding::direct(15, 1),
            Err(Error::StateSpaceTooLarge { .. })
        ));
        assert!(matches!(
            BasisEncoding::compact(13, 3, false),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn projector_diagonal_counts_simplices() {
        let complex = k3();
        for k in 0..=2 {
            for kind in [EncodingKind::Direct, EncodingKind::Compact] {
                let enc = match kind {
                    EncodingKind::Direct => BasisEncoding::direct(3, k).unwrap(),
                    EncodingKind::Compact => BasisEncoding::compact(3, k, false).unwrap(),
                };
                let mask = simplex_projector_mask(&complex, &enc);
                let count = mask.iter().filter(|&&b| b).count();
                assert_eq!(count, complex.num_simplices(k), "k={k} {kind}");
                let p = simplex_projector(&complex, &enc);
                assert_abs_diff_eq!(p.trace(), count as f64, epsilon = 0.0);
            }
        }
    }

    #[test]
    fn projector_excludes_non_edges() {
        let path = CliqueComplex::build(Graph::from_edges(3, &[(1, 2), (2, 3)]).unwrap(), 2);
        let enc = BasisEncoding::compact(3, 1, false).unwrap();
        let mask = simplex_projector_mask(&path, &enc);
        assert!(mask[6], "(1,2) is an edge");
        assert!(mask[11], "(2,3) is an edge");
        assert!(!mask[7], "(1,3) is not an edge");
        assert!(!mask[9], "(2,1) is not ascending");
    }

    #[test]
    fn cpinot_on_trivial_projectors() {
        let c_full = cpinot(&DMatrix::identity(2, 2)).unwrap();
        for (r, c, want) in [(0usize, 1usize, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)] {
            assert_eq!(c_full[(r, c)], want, "Pi = I flips every flag");
        }
        assert_eq!(c_full.iter().filter(|&&v| v != 0.0).count(), 4);

        let c_zero = cpinot(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(c_zero, DMatrix::identity(6, 6), "Pi = 0 leaves the flag alone");
    }

    #[test]
    fn cpinot_is_an_involution() {
        let complex = k3();
        let enc = BasisEncoding::direct(3, 1).unwrap();
        let p = simplex_projector(&complex, &enc);
        let c = cpinot(&p).unwrap();
        assert_abs_diff_eq!((&c * &c - DMatrix::identity(16, 16)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn dirac_operator_small_cases() {
        let d1 = dirac_operator(1).unwrap();
        assert_eq!(d1, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let d2 = dirac_operator(2).unwrap();
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 1.0, 0.0,
                1.0, 0.0, 0.0, 1.0,
                1.0, 0.0, 0.0, -1.0,
                0.0, 1.0, -1.0, 0.0,
            ],
        );
        assert_eq!(d2, want, "X(x)I + Z(x)X");
    }

    #[test]
    fn dirac_squares_to_n_times_identity() {
        for n in 1..=5 {
            let d = dirac_operator(n).unwrap();
            let dim = 1 << n;
            let ident = DMatrix::identity(dim, dim) * n as f64;
            assert_eq!(&d * &d, ident, "D^2 = {n} I exactly");
            assert_eq!(d.transpose(), d, "Hermitian");
        }
    }

    #[test]
    fn encode_normalizes_and_places_amplitudes() {
        let complex = k3();
        let enc = BasisEncoding::direct(3, 1).unwrap();
        let state =
            encode_signal(&complex, &enc, &DVector::from_row_slice(&[3.0, 0.0, 4.0])).unwrap();
        assert_abs_diff_eq!(state[0b110].re, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(state[0b011].re, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(state.norm(), 1.0, epsilon = 1e-15);
        let back = decode_state(&complex, &enc, &state).unwrap();
        assert_abs_diff_eq!((back * 5.0 - DVector::from_row_slice(&[3.0, 0.0, 4.0])).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn uniform_edge_signal_hits_the_documented_states() {
        let complex = k3();
        let uniform = DVector::from_element(3, 1.0);
        let direct = BasisEncoding::direct(3, 1).unwrap();
        let s = encode_signal(&complex, &direct, &uniform).unwrap();
        for idx in [0b110, 0b101, 0b011] {
            assert_abs_diff_eq!(s[idx].re, 1.0 / 3.0_f64.sqrt(), epsilon = 1e-15);
        }
        let compact = BasisEncoding::compact(3, 1, false).unwrap();
        let s = encode_signal(&complex, &compact, &uniform).unwrap();
        for idx in [6, 7, 11] {
            assert_abs_diff_eq!(s[idx].re, 1.0 / 3.0_f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_signal_is_rejected() {
        let complex = k3();
        let enc = BasisEncoding::direct(3, 1).unwrap();
        assert!(encode_signal(&complex, &enc, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn direct_boundary_block_is_b1_over_sqrt_n() {
        let complex = k3();
        let pue = boundary_pue(&complex, 1, EncodingKind::Direct).unwrap();
        assert_eq!(pue.alpha, 3.0_f64.sqrt());
        assert_eq!(pue.ancillas, 0);
        let block = pue.block();
        let b1 = homology::boundary_matrix(&complex, 1).to_dense();
        let enc1 = BasisEncoding::direct(3, 1).unwrap();
        let enc0 = BasisEncoding::direct(3, 0).unwrap();
        for (c, s) in complex.simplices(1).iter().enumerate() {
            for (r, f) in complex.simplices(0).iter().enumerate() {
                let got = block[(enc0.index_of(f).unwrap(), enc1.index_of(s).unwrap())];
                assert_abs_diff_eq!(got.re, b1[(r, c)] / pue.alpha, epsilon = 1e-12);
                assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-15);
            }
        }
        // nothing outside the projected block survives
        let mut stripped = block.clone();
        for s in complex.simplices(1) {
            for f in complex.simplices(0) {
                stripped[(enc0.index_of(f).unwrap(), enc1.index_of(s).unwrap())] =
                    Complex64::new(0.0, 0.0);
            }
        }
        assert_abs_diff_eq!(stripped.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn compact_boundary_block_matches_b2_column() {
        let complex = k3();
        let pue = boundary_pue(&complex, 2, EncodingKind::Compact).unwrap();
        assert_abs_diff_eq!(pue.alpha, 12.0_f64.sqrt(), epsilon = 1e-15);
        assert_eq!(pue.ancillas, 2, "ceil(log2(3))");
        assert!(pue.error < 1e-12, "dilation unitarity defect {}", pue.error);
        let block = pue.block();
        let enc2 = BasisEncoding::compact(3, 2, false).unwrap();
        let enc1 = BasisEncoding::compact(3, 1, true).unwrap();
        let tri = enc2.index_of(&simplex(&[1, 2, 3])).unwrap();
        let want = [([2u32, 3u32], 1.0), ([1, 3], -1.0), ([1, 2], 1.0)];
        for (face, sign) in want {
            let idx = enc1.index_of(&simplex(&face)).unwrap();
            assert_abs_diff_eq!(block[(idx, tri)].re, sign / pue.alpha, epsilon = 1e-12);
        }
    }

    #[test]
    fn compact_dilation_is_unitary() {
        let complex = k3();
        for k in [1, 2] {
            let pue = boundary_pue(&complex, k, EncodingKind::Compact).unwrap();
            let u = pue.unitary_matrix();
            assert!(
                linalg::unitarity_defect(&u) < 1e-12,
                "k={k} defect {}",
                linalg::unitarity_defect(&u)
            );
        }
    }

    #[test]
    fn adjoint_pue_encodes_the_transpose() {
        let complex = k3();
        for kind in [EncodingKind::Direct, EncodingKind::Compact] {
            let pue = boundary_pue(&complex, 1, kind).unwrap();
            let adj = pue.adjoint_pue();
            let block = pue.block();
            let adj_block = adj.block();
            assert_abs_diff_eq!((adj_block - block.adjoint()).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dirac_apply_matches_the_materialized_matrix() {
        let n = 4;
        let d = dirac_operator(n).unwrap();
        let dim = 1 << n;
        let v = DVector::from_fn(dim, |i, _| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()));
        let direct = linalg::to_complex(&d) * &v / Complex64::new((n as f64).sqrt(), 0.0);
        let sparse = apply_dirac_scaled(n, &v, false);
        assert_abs_diff_eq!((direct - sparse).norm(), 0.0, epsilon = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn projector_agrees_with_membership_exhaustively(
            n in 3usize..6,
            k in 1usize..3,
            seed in 0u64..500,
        ) {
            prop_assume!(k < n);
            // deterministic pseudo-random graph from the seed
            let mut edges = Vec::new();
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            for a in 1..=n as Vertex {
                for b in (a + 1)..=n as Vertex {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if state >> 63 == 1 {
                        edges.push((a, b));
                    }
                }
            }
            let complex = CliqueComplex::build(Graph::from_edges(n, &edges).unwrap(), 3);
            for kind in [EncodingKind::Direct, EncodingKind::Compact] {
                let enc = match kind {
                    EncodingKind::Direct => BasisEncoding::direct(n, k).unwrap(),
                    EncodingKind::Compact => BasisEncoding::compact(n, k, false).unwrap(),
                };
                let mask = simplex_projector_mask(&complex, &enc);
                for idx in 0..enc.dim() {
                    let accepted = match enc.decode(idx) {
                        Some(v) => v.len() == k + 1 && complex.is_member(&v),
                        None => false,
                    };
                    prop_assert_eq!(mask[idx], accepted);
                }
                let on_diagonal = mask.iter().filter(|&&b| b).count();
                prop_assert_eq!(on_diagonal, complex.num_simplices(k));
            }
        }

        #[test]
        fn boundary_blocks_match_the_sign_matrix(
            n in 3usize..6,
            seed in 0u64..200,
        ) {
            let mut edges = Vec::new();
            let mut state = seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(7);
            for a in 1..=n as Vertex {
                for b in (a + 1)..=n as Vertex {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if state % 3 != 0 {
                        edges.push((a, b));
                    }
                }
            }
            let complex = CliqueComplex::build(Graph::from_edges(n, &edges).unwrap(), 2);
            for k in [1usize, 2] {
                if complex.num_simplices(k) == 0 {
                    continue;
                }
                for kind in [EncodingKind::Direct, EncodingKind::Compact] {
                    let pue = boundary_pue(&complex, k, kind).unwrap();
                    let block = pue.block();
                    let b = homology::boundary_matrix(&complex, k).to_dense();
                    let (enc_from, enc_to): (BasisEncoding, BasisEncoding) = match kind {
                        EncodingKind::Direct => (
                            BasisEncoding::direct(n, k).unwrap(),
                            BasisEncoding::direct(n, k - 1).unwrap(),
                        ),
                        EncodingKind::Compact => (
                            BasisEncoding::compact(n, k, false).unwrap(),
                            BasisEncoding::compact(n, k - 1, true).unwrap(),
                        ),
                    };
                    let mut worst = 0.0_f64;
                    for (c, s) in complex.simplices(k).iter().enumerate() {
                        for (r, f) in complex.simplices(k - 1).iter().enumerate() {
                            let got = block[(enc_to.index_of(f).unwrap(), enc_from.index_of(s).unwrap())];
                            worst = worst.max((got.re - b[(r, c)] / pue.alpha).abs()).max(got.im.abs());
                        }
                    }
                    prop_assert!(worst < 1e-10, "k={} {} worst {}", k, kind, worst);
                }
            }
        }
    }
}
