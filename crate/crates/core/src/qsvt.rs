//! Singular value transformation sequences on projected unitary encodings,
//! their combination into simplicial filters, and the end-to-end
//! encode/filter/postselect pipeline.
//!
//! The filter `H = h0 + sum_i l_i y^i + sum_i u_i z^i` (rescaled convention,
//! `y`/`z` the rescaled lower/upper Laplacians) is assembled as a linear
//! combination of three encoded operators: the even boundary polynomial
//! `f_l(x) = h0 + sum l_i x^(2i)` of `B_k/alpha_k`, the matching `f_u` of
//! `B_(k+1)^T/alpha_(k+1)`, and `-I` which cancels the doubled constant.
//! With weights `(1, 1, h0)` the combination normalizes to `beta = 2 + h0`
//! and the encoded block is `H/beta` on the simplex subspace.
//!
//! Query accounting follows the source cost model: the boundary oracle is
//! charged as the conjugate pair, so every application of `U` or `U^dagger`
//! advances both counters, and every reflection phase books its two-call
//! `C_PiNOT` sandwich against both projector flavors. A real target of
//! boundary degree `2d` therefore books `4d` queries each to `U` and
//! `U^dagger` and `8d` each to the two `C_PiNOT` kinds, which is what the
//! cost formulas predict.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::complex::CliqueComplex;
use crate::encoding::{self, BasisEncoding, EncodingKind, Pue};
use crate::homology::{self, Component};
use crate::qsp_poly::{self, Parity, ParityPolynomial, PhaseSolution};
use crate::spectral_filter::{self, FilterSpec};
use crate::{resources, Error, Result};

/// Which boundary operator a sequence queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Booked oracle queries for one pipeline run.
///
/// Counters advance in conjugate pairs (see the module docs): `u_lower` and
/// `u_lower_adjoint` always agree, as do the two `cpinot` flavors per side.
/// `rotations` counts the reflection phases actually applied; a degree-0
/// branch realized as a pure phase books `constant_phases` instead.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CallCounter {
    pub u_lower: usize,
    pub u_lower_adjoint: usize,
    pub u_upper: usize,
    pub u_upper_adjoint: usize,
    pub cpinot_lower: usize,
    pub cpinot_prime_lower: usize,
    pub cpinot_upper: usize,
    pub cpinot_prime_upper: usize,
    pub rotations: usize,
    pub constant_phases: usize,
}

impl CallCounter {
    fn record_u(&mut self, side: Side) {
        match side {
            Side::Lower => {
                self.u_lower += 1;
                self.u_lower_adjoint += 1;
            }
            Side::Upper => {
                self.u_upper += 1;
                self.u_upper_adjoint += 1;
            }
        }
    }

    fn record_phase(&mut self, side: Side) {
        match side {
            Side::Lower => {
                self.cpinot_lower += 2;
                self.cpinot_prime_lower += 2;
            }
            Side::Upper => {
                self.cpinot_upper += 2;
                self.cpinot_prime_upper += 2;
            }
        }
        self.rotations += 1;
    }

    fn record_constant_phase(&mut self) {
        self.constant_phases += 1;
    }
}

/// How a sequence's unitary embeds into the working register.
///
/// `rel_slices` partitions one system plane into copies of the PUE's native
/// space: `plane_offset + rel_slices[s][i]` addresses native index `i` of
/// copy `s`. A PUE acting on the full plane has the single identity slice.
#[derive(Clone, Debug)]
struct Embedding {
    rel_slices: Vec<Vec<usize>>,
}

impl Embedding {
    fn trivial(dim: usize) -> Self {
        Embedding { rel_slices: vec![(0..dim).collect()] }
    }
}

fn apply_u_embedded(
    pue: &Pue,
    emb: &Embedding,
    planes: &[usize],
    state: &mut DVector<Complex64>,
    adjoint: bool,
    side: Side,
    counter: &mut CallCounter,
) {
    for &po in planes {
        for rel in &emb.rel_slices {
            let sub = DVector::from_fn(rel.len(), |i, _| state[po + rel[i]]);
            let out = if adjoint { pue.apply_adjoint(&sub) } else { pue.apply(&sub) };
            for (i, &r) in rel.iter().enumerate() {
                state[po + r] = out[i];
            }
        }
    }
    counter.record_u(side);
}

fn apply_phase_embedded(
    pue: &Pue,
    emb: &Embedding,
    planes: &[usize],
    state: &mut DVector<Complex64>,
    phi: f64,
    right: bool,
    side: Side,
    counter: &mut CallCounter,
) {
    let mask = if right { &pue.right_mask } else { &pue.left_mask };
    let plus = Complex64::from_polar(1.0, phi);
    let minus = Complex64::from_polar(1.0, -phi);
    for &po in planes {
        for rel in &emb.rel_slices {
            for (i, &r) in rel.iter().enumerate() {
                state[po + r] *= if mask[i] { plus } else { minus };
            }
        }
    }
    counter.record_phase(side);
}

/// Applies the phased alternating sequence for `phases` (negated when
/// `negate` is set) to the given planes of `state`, charging `counter`.
///
/// Application order is right-to-left through the product: the innermost
/// `U` goes first and `phi_1` last; even length ends phased by the right
/// projector, odd length by the left one.
#[allow(clippy::too_many_arguments)]
fn apply_sequence(
    pue: &Pue,
    emb: &Embedding,
    planes: &[usize],
    phases: &[f64],
    negate: bool,
    state: &mut DVector<Complex64>,
    side: Side,
    counter: &mut CallCounter,
) {
    let d = phases.len();
    let sgn = if negate { -1.0 } else { 1.0 };
    let phi = |i: usize| sgn * phases[i - 1];
    if d % 2 == 0 {
        for i in (1..=d / 2).rev() {
            apply_u_embedded(pue, emb, planes, state, false, side, counter);
            apply_phase_embedded(pue, emb, planes, state, phi(2 * i), false, side, counter);
            apply_u_embedded(pue, emb, planes, state, true, side, counter);
            apply_phase_embedded(pue, emb, planes, state, phi(2 * i - 1), true, side, counter);
        }
    } else {
        for i in (1..=(d - 1) / 2).rev() {
            apply_u_embedded(pue, emb, planes, state, false, side, counter);
            apply_phase_embedded(pue, emb, planes, state, phi(2 * i + 1), false, side, counter);
            apply_u_embedded(pue, emb, planes, state, true, side, counter);
            apply_phase_embedded(pue, emb, planes, state, phi(2 * i), true, side, counter);
        }
        apply_u_embedded(pue, emb, planes, state, false, side, counter);
        apply_phase_embedded(pue, emb, planes, state, phi(1), false, side, counter);
    }
}

/// Materializes the phased alternating sequence as a matrix on the PUE's
/// native space (test-scale dimensions only).
pub fn qsvt_sequence(pue: &Pue, phases: &[f64]) -> DMatrix<Complex64> {
    let dim = pue.dim();
    let emb = Embedding::trivial(dim);
    let mut scratch = CallCounter::default();
    let cols: Vec<DVector<Complex64>> = (0..dim)
        .map(|j| {
            let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
            v[j] = Complex64::new(1.0, 0.0);
            apply_sequence(pue, &emb, &[0], phases, false, &mut v, Side::Lower, &mut scratch);
            v
        })
        .collect();
    DMatrix::from_columns(&cols)
}

/// A real-polynomial block built from the two sequences `+Phi` and `-Phi`.
///
/// The physical construction selects between them with one extra ancilla
/// prepared and unprepared in `|+>`, so the averaged block is the real part
/// of the realized polynomial; the struct keeps the `(1, ancillas+1,
/// error)` encoding bookkeeping and applies the average arithmetically.
#[derive(Clone, Debug)]
pub struct RealPolyPue {
    pub pue: Pue,
    pub solution: PhaseSolution,
    pub parity: Parity,
    /// Combined scale of the encoded polynomial block (always 1).
    pub alpha: f64,
    pub ancillas: usize,
    /// Base encoding error plus the measured phase residual.
    pub error: f64,
}

/// Solves phases for `target` and wraps them over `pue`.
pub fn real_poly_block(pue: Pue, target: &ParityPolynomial) -> Result<RealPolyPue> {
    let solution = qsp_poly::solve_phases(target)?;
    let ancillas = pue.ancillas + 1;
    let error = pue.error + solution.residual;
    Ok(RealPolyPue { pue, solution, parity: target.parity(), alpha: 1.0, ancillas, error })
}

impl RealPolyPue {
    /// `(S_+ + S_-)/2` applied to `v`: the real-part block, unmasked.
    pub fn apply_real(
        &self,
        v: &DVector<Complex64>,
        side: Side,
        counter: &mut CallCounter,
    ) -> DVector<Complex64> {
        let emb = Embedding::trivial(self.pue.dim());
        let mut plus = v.clone();
        apply_sequence(&self.pue, &emb, &[0], &self.solution.phases, false, &mut plus, side, counter);
        let mut minus = v.clone();
        apply_sequence(&self.pue, &emb, &[0], &self.solution.phases, true, &mut minus, side, counter);
        (plus + minus) * Complex64::new(0.5, 0.0)
    }

    /// `(S_+ - S_-)/2` applied to `v`: the `i Im` block obtained by a `Z`
    /// on the selection ancilla.
    pub fn apply_imaginary(
        &self,
        v: &DVector<Complex64>,
        side: Side,
        counter: &mut CallCounter,
    ) -> DVector<Complex64> {
        let emb = Embedding::trivial(self.pue.dim());
        let mut plus = v.clone();
        apply_sequence(&self.pue, &emb, &[0], &self.solution.phases, false, &mut plus, side, counter);
        let mut minus = v.clone();
        apply_sequence(&self.pue, &emb, &[0], &self.solution.phases, true, &mut minus, side, counter);
        (plus - minus) * Complex64::new(0.5, 0.0)
    }

    /// The projected real block: output mask on the parity's output side,
    /// input mask on the right projector.
    pub fn block(&self) -> DMatrix<Complex64> {
        let dim = self.pue.dim();
        let mut scratch = CallCounter::default();
        let cols: Vec<DVector<Complex64>> = (0..dim)
            .map(|j| {
                if !self.pue.right_mask[j] {
                    return DVector::from_element(dim, Complex64::new(0.0, 0.0));
                }
                let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
                v[j] = Complex64::new(1.0, 0.0);
                self.apply_real(&v, Side::Lower, &mut scratch)
            })
            .collect();
        let mut m = DMatrix::from_columns(&cols);
        let out_mask = match self.parity {
            Parity::Even => &self.pue.right_mask,
            Parity::Odd => &self.pue.left_mask,
        };
        for (r, &keep) in out_mask.iter().enumerate() {
            if !keep {
                m.row_mut(r).fill(Complex64::new(0.0, 0.0));
            }
        }
        m
    }
}

/// One operator in a linear combination: a nonnegative weight, a unimodular
/// phase folding signs into the unitary, and the unitary itself.
#[derive(Clone, Debug)]
pub struct LcuTerm {
    pub coeff: f64,
    pub phase: Complex64,
    pub unitary: DMatrix<Complex64>,
}

/// A prepared linear combination over a shared system space.
#[derive(Clone, Debug)]
pub struct LcuPlan {
    pub terms: Vec<LcuTerm>,
    pub left_mask: Vec<bool>,
    pub right_mask: Vec<bool>,
    /// Ancillas already inside the shared system space.
    pub system_ancillas: usize,
}

impl LcuPlan {
    /// `beta = sum of coefficients`.
    pub fn beta(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff).sum()
    }
}

/// Builds the prepare/select/unprepare encoding of `sum_i c_i phase_i U_i`.
///
/// The combined block is `(1/beta) sum c_i phase_i (Pi' U_i Pi)` with the
/// prepare register most significant; ancillas book as
/// `a + ceil(log2(2m)) + 3` on top of the shared system space.
pub fn lcu_combine(plan: &LcuPlan) -> Result<Pue> {
    let m = plan.terms.len();
    if m == 0 {
        return Err(Error::Encoding("empty linear combination".into()));
    }
    let n = plan.terms[0].unitary.nrows();
    for t in &plan.terms {
        if t.unitary.nrows() != n || t.unitary.ncols() != n {
            return Err(Error::Dimension { expected: n, got: t.unitary.nrows() });
        }
        if !t.coeff.is_finite() || t.coeff < 0.0 {
            return Err(Error::Encoding(format!("coefficient {} is not in R+", t.coeff)));
        }
        if (t.phase.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Encoding("term phases must be unimodular".into()));
        }
    }
    let beta = plan.beta();
    if beta <= 0.0 {
        return Err(Error::Encoding("all coefficients are zero".into()));
    }
    let w = DVector::from_iterator(m, plan.terms.iter().map(|t| (t.coeff / beta).sqrt()));
    let prep = householder_completion(&w);

    let mut full = DMatrix::from_element(m * n, m * n, Complex64::new(0.0, 0.0));
    // (P^T (x) I) Select (P (x) I) built directly: entry ((i,r),(j,c)) =
    // sum_t P[t,i] phase_t U_t[r,c] P[t,j]
    for t in 0..m {
        let scaled = &plan.terms[t].unitary * plan.terms[t].phase;
        for i in 0..m {
            let pi = prep[(t, i)];
            if pi == 0.0 {
                continue;
            }
            for j in 0..m {
                let pj = prep[(t, j)];
                if pj == 0.0 {
                    continue;
                }
                let weight = pi * pj;
                for r in 0..n {
                    for c in 0..n {
                        full[(i * n + r, j * n + c)] += scaled[(r, c)] * weight;
                    }
                }
            }
        }
    }
    let lift = |mask: &[bool]| -> Vec<bool> {
        let mut out = vec![false; m * n];
        out[..n].copy_from_slice(&mask[..n]);
        out
    };
    let ancillas =
        plan.system_ancillas + (usize::BITS - (2 * m - 1).leading_zeros()) as usize + 3;
    Pue::new(
        encoding::PueKernel::Dense(full),
        lift(&plan.left_mask),
        lift(&plan.right_mask),
        beta,
        ancillas,
        0.0,
    )
}

/// Real orthogonal completion with `P e_0 = w` (Householder reflection).
fn householder_completion(w: &DVector<f64>) -> DMatrix<f64> {
    let m = w.len();
    let mut u = w.clone();
    u[0] -= 1.0;
    let nsq = u.norm_squared();
    if nsq < 1e-28 {
        return DMatrix::identity(m, m);
    }
    let mut p = DMatrix::identity(m, m);
    p.ger(-2.0 / nsq, &u, &u, 1.0);
    p
}

fn effective_degree(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1)
}

// h0 + sum tail[i] x^(2(i+1)) as monomial coefficients
fn even_response_monomial(h0: f64, tail: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; 2 * tail.len() + 1];
    m[0] = h0;
    for (i, &c) in tail.iter().enumerate() {
        m[2 * (i + 1)] = c;
    }
    m
}

/// One filter path: a phased sequence over a boundary PUE, or the pure
/// phase pair realizing the constant response when the series is empty.
#[derive(Clone, Debug)]
enum Piece {
    Constant { theta: f64 },
    Sequence { pue: Pue, solution: PhaseSolution, embedding: Embedding, side: Side },
}

impl Piece {
    fn residual(&self) -> f64 {
        match self {
            Piece::Constant { .. } => 0.0,
            Piece::Sequence { solution, pue, .. } => solution.residual + pue.error,
        }
    }

    fn prescaled(&self) -> bool {
        matches!(self, Piece::Sequence { solution, .. } if solution.prescaled)
    }
}

/// The common working register for one filter instance.
#[derive(Clone, Debug)]
struct SystemLayout {
    n_sys: usize,
    simplex_mask: Vec<bool>,
    signal_index: Vec<usize>,
}

fn build_layout(
    complex: &CliqueComplex,
    k: usize,
    kind: EncodingKind,
    need_lower: bool,
    need_upper: bool,
) -> Result<(SystemLayout, Option<Embedding>)> {
    let n = complex.graph().n();
    match kind {
        EncodingKind::Direct => {
            let enc = BasisEncoding::direct(n, k)?;
            let mask = encoding::simplex_projector_mask(complex, &enc);
            let signal_index: Vec<usize> = complex
                .simplices(k)
                .iter()
                .map(|s| enc.index_of(s).expect("dimension matches"))
                .collect();
            let emb = need_lower.then(|| Embedding::trivial(enc.dim()));
            Ok((SystemLayout { n_sys: enc.dim(), simplex_mask: mask, signal_index }, emb))
        }
        EncodingKind::Compact => {
            let enc = BasisEncoding::compact(n, k, need_upper)?;
            let word_dim = BasisEncoding::compact(n, k, false)?.dim();
            let ext_dim = enc.dim() / word_dim;
            let dilated = need_lower || need_upper;
            let n_sys = enc.dim() * if dilated { 2 } else { 1 };
            if n_sys > 2 * encoding::DIM_CAP {
                return Err(Error::StateSpaceTooLarge { dim: n_sys, cap: 2 * encoding::DIM_CAP });
            }
            let mut mask = encoding::simplex_projector_mask(complex, &enc);
            mask.resize(n_sys, false);
            let signal_index: Vec<usize> = complex
                .simplices(k)
                .iter()
                .map(|s| enc.index_of(s).expect("dimension matches"))
                .collect();
            // the lower PUE lives on (dilation x words); each value of the
            // trailing register is one embedded copy
            let emb = need_lower.then(|| {
                let blocks = if dilated { 2 } else { 1 };
                let rel_slices: Vec<Vec<usize>> = (0..ext_dim)
                    .map(|e| {
                        (0..blocks * word_dim)
                            .map(|sub| {
                                let d = sub / word_dim;
                                let w = sub % word_dim;
                                d * (word_dim * ext_dim) + w * ext_dim + e
                            })
                            .collect()
                    })
                    .collect();
                Embedding { rel_slices }
            });
            Ok((SystemLayout { n_sys, simplex_mask: mask, signal_index }, emb))
        }
    }
}

/// A fully constructed quantum simplicial filter.
#[derive(Clone, Debug)]
pub struct QuantumFilter {
    pub beta: f64,
    pub degrees: (usize, usize),
    pub ancillas: usize,
    pub kind: EncodingKind,
    pub k: usize,
    /// Summed phase residuals and encoding errors over both paths.
    pub residual: f64,
    /// Whether any path target retreated from the unit bound.
    pub prescaled: bool,
    spec: FilterSpec,
    h0: f64,
    layout: SystemLayout,
    lower: Piece,
    upper: Piece,
    l_lower: DMatrix<f64>,
    l_upper: DMatrix<f64>,
    alphas: (f64, f64),
}

/// Rescaling factors `(alpha_k, alpha_(k+1))` tying raw Laplacians to the
/// encoded, spectrum-in-`[0,1]` ones.
pub fn rescale_alphas(kind: EncodingKind, n: usize, k: usize) -> (f64, f64) {
    match kind {
        EncodingKind::Direct => ((n as f64).sqrt(), (n as f64).sqrt()),
        EncodingKind::Compact => (
            (((n + 1) * (k + 1)) as f64).sqrt(),
            (((n + 1) * (k + 2)) as f64).sqrt(),
        ),
    }
}

/// Builds the linear-combination encoding of a rescaled filter.
///
/// The spec must pass the rescaled admissibility check; `k = 0` is allowed
/// only when the lower series is empty (there is no `B_0`), and an upper
/// series requires the complex to be enumerated at dimension `k + 1`.
pub fn build_quantum_filter(
    complex: &CliqueComplex,
    k: usize,
    kind: EncodingKind,
    spec: &FilterSpec,
) -> Result<QuantumFilter> {
    spec.check_rescaled()?;
    let n_k = complex.num_simplices(k);
    if n_k == 0 {
        return Err(Error::Signal(format!("the complex has no {k}-simplices to filter")));
    }
    let d_l = effective_degree(&spec.lower);
    let d_u = effective_degree(&spec.upper);
    if k == 0 && d_l > 0 {
        return Err(Error::FilterSpec(
            "k = 0 admits upper-only filters: there is no boundary operator below vertices".into(),
        ));
    }
    if d_u > 0 && complex.k_max() < k + 1 {
        return Err(Error::FilterSpec(format!(
            "upper series needs simplices of dimension {}, but the complex was enumerated to k_max = {}",
            k + 1,
            complex.k_max()
        )));
    }

    let (layout, lower_emb) = build_layout(complex, k, kind, d_l > 0, d_u > 0)?;
    let h0 = spec.h0;
    let constant = |_: ()| Piece::Constant { theta: h0.clamp(-1.0, 1.0).acos() };

    let lower = if d_l == 0 {
        constant(())
    } else {
        let target = ParityPolynomial::from_monomial(
            Parity::Even,
            even_response_monomial(h0, &spec.lower[..d_l]),
        )?;
        let solution = qsp_poly::solve_phases(&target)?;
        let pue = encoding::boundary_pue(complex, k, kind)?;
        Piece::Sequence {
            pue,
            solution,
            embedding: lower_emb.expect("layout provides the lower embedding"),
            side: Side::Lower,
        }
    };
    let upper = if d_u == 0 {
        constant(())
    } else {
        let target = ParityPolynomial::from_monomial(
            Parity::Even,
            even_response_monomial(h0, &spec.upper[..d_u]),
        )?;
        let solution = qsp_poly::solve_phases(&target)?;
        let pue = encoding::boundary_pue(complex, k + 1, kind)?.adjoint_pue();
        debug_assert_eq!(pue.dim(), layout.n_sys, "upper PUE spans the working register");
        Piece::Sequence {
            pue,
            solution,
            embedding: Embedding::trivial(layout.n_sys),
            side: Side::Upper,
        }
    };

    let n = complex.graph().n();
    let ancillas = resources::filter_ancillas(kind, n, k, d_l, d_u);
    let residual = lower.residual() + upper.residual();
    let prescaled = lower.prescaled() || upper.prescaled();
    let alphas = rescale_alphas(kind, n, k);
    Ok(QuantumFilter {
        beta: 2.0 + h0,
        degrees: (d_l, d_u),
        ancillas,
        kind,
        k,
        residual,
        prescaled,
        spec: spec.clone(),
        h0,
        layout,
        lower,
        upper,
        l_lower: homology::lower_laplacian(complex, k),
        l_upper: homology::upper_laplacian(complex, k),
        alphas,
    })
}

/// Everything a pipeline run reports.
#[derive(Clone, Debug, Serialize)]
pub struct FilterRunReport {
    pub encoding: String,
    pub k: usize,
    pub beta: f64,
    pub degrees: (usize, usize),
    pub ancillas: usize,
    /// Probability that every ancilla reads zero and the system state passes
    /// the membership check.
    pub p_success: f64,
    /// `beta * sqrt(p)`: the realized norm of the filtered signal.
    pub norm_filtered: f64,
    /// Norm of the classically filtered signal.
    pub norm_classical: f64,
    /// Normalized filtered amplitudes, simplex-indexed.
    pub amplitudes: Vec<f64>,
    /// Normalized classical reference, simplex-indexed.
    pub classical: Vec<f64>,
    pub l2_distance: f64,
    pub linf_distance: f64,
    pub residual: f64,
    pub prescaled: bool,
    pub counter: CallCounter,
}

impl QuantumFilter {
    /// Offsets of the four system planes under prepare-branch `p`.
    fn branch_planes(&self, p: usize) -> [usize; 4] {
        let n = self.layout.n_sys;
        [
            ((p * 2) * 2) * n,
            ((p * 2) * 2 + 1) * n,
            ((p * 2 + 1) * 2) * n,
            ((p * 2 + 1) * 2 + 1) * n,
        ]
    }

    /// Runs encode, filter, postselect against `signal` and compares with
    /// the classical reference.
    pub fn run(&self, signal: &DVector<f64>) -> Result<FilterRunReport> {
        let n_k = self.layout.signal_index.len();
        if signal.len() != n_k {
            return Err(Error::Dimension { expected: n_k, got: signal.len() });
        }
        let norm = signal.norm();
        if norm < 1e-300 {
            return Err(Error::Signal("zero-norm signal cannot be encoded".into()));
        }
        let s_norm = signal / norm;
        let n_sys = self.layout.n_sys;
        let mut state = DVector::from_element(16 * n_sys, Complex64::new(0.0, 0.0));
        for (i, &idx) in self.layout.signal_index.iter().enumerate() {
            state[idx] = Complex64::new(s_norm[i], 0.0);
        }

        // prepare weights sqrt(c_i / beta) over branches (-I, lower, upper)
        let w = DVector::from_vec(vec![
            (self.h0 / self.beta).sqrt(),
            (1.0 / self.beta).sqrt(),
            (1.0 / self.beta).sqrt(),
            0.0,
        ]);
        let prep = householder_completion(&w);
        let mut counter = CallCounter::default();

        self.apply_prepare(&prep, &mut state);
        // select: branch 0 carries -I, branches 1/2 carry the sign-ancilla
        // sandwiched sequence pairs
        for i in self.branch_planes(0).iter().flat_map(|&po| po..po + n_sys) {
            state[i] = -state[i];
        }
        self.apply_controlled_piece(&self.lower, 1, true, &mut state, &mut counter);
        self.apply_controlled_piece(&self.upper, 2, false, &mut state, &mut counter);
        self.apply_prepare(&prep, &mut state);

        // postselect: all ancillas zero and the system inside the simplex
        // subspace
        let mut p_success = 0.0;
        for (sys, &keep) in self.layout.simplex_mask.iter().enumerate() {
            if keep {
                p_success += state[sys].norm_sqr();
            }
        }
        let norm_filtered = self.beta * p_success.sqrt();
        if norm_filtered < 1e-12 {
            return Err(Error::AnnihilatedSignal { norm: norm_filtered });
        }

        let mut amplitudes = Vec::with_capacity(n_k);
        let scale = 1.0 / p_success.sqrt();
        for &idx in &self.layout.signal_index {
            let amp = state[idx];
            debug_assert!(amp.im.abs() < 1e-9, "filtered amplitudes stay real");
            amplitudes.push(amp.re * scale);
        }

        let classical_raw = spectral_filter::apply_filter(
            &self.spec,
            &self.l_lower,
            &self.l_upper,
            Some(self.alphas),
            &s_norm,
        )?;
        let norm_classical = classical_raw.norm();
        if norm_classical < 1e-12 {
            return Err(Error::AnnihilatedSignal { norm: norm_classical });
        }
        let classical: Vec<f64> = (classical_raw / norm_classical).iter().copied().collect();
        let l2_distance = amplitudes
            .iter()
            .zip(&classical)
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            .sqrt();
        let linf_distance = amplitudes
            .iter()
            .zip(&classical)
            .map(|(a, c)| (a - c).abs())
            .fold(0.0, f64::max);

        Ok(FilterRunReport {
            encoding: self.kind.to_string(),
            k: self.k,
            beta: self.beta,
            degrees: self.degrees,
            ancillas: self.ancillas,
            p_success,
            norm_filtered,
            norm_classical,
            amplitudes,
            classical,
            l2_distance,
            linf_distance,
            residual: self.residual,
            prescaled: self.prescaled,
            counter,
        })
    }

    fn apply_prepare(&self, prep: &DMatrix<f64>, state: &mut DVector<Complex64>) {
        let stride = 4 * self.layout.n_sys;
        for r in 0..stride {
            let vals = [state[r], state[stride + r], state[2 * stride + r], state[3 * stride + r]];
            for (p, row) in prep.row_iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (q, v) in vals.iter().enumerate() {
                    acc += *v * row[q];
                }
                state[p * stride + r] = acc;
            }
        }
    }

    /// Applies the `|+>`-sandwiched sequence pair of `piece` on prepare
    /// branch `p`, selecting on the lower or upper sign ancilla.
    fn apply_controlled_piece(
        &self,
        piece: &Piece,
        p: usize,
        lower_sign: bool,
        state: &mut DVector<Complex64>,
        counter: &mut CallCounter,
    ) {
        let n = self.layout.n_sys;
        let planes = self.branch_planes(p);
        // plane order is (sl, su); pair planes across the active sign bit
        let pairs: [(usize, usize); 2] = if lower_sign {
            [(planes[0], planes[2]), (planes[1], planes[3])]
        } else {
            [(planes[0], planes[1]), (planes[2], planes[3])]
        };
        let hadamard = |state: &mut DVector<Complex64>| {
            let inv = std::f64::consts::FRAC_1_SQRT_2;
            for &(a, b) in &pairs {
                for s in 0..n {
                    let x = state[a + s];
                    let y = state[b + s];
                    state[a + s] = (x + y) * inv;
                    state[b + s] = (x - y) * inv;
                }
            }
        };
        hadamard(state);
        // sign = 0 planes run +Phi, sign = 1 planes run -Phi
        let plus_planes: Vec<usize> = pairs.iter().map(|&(a, _)| a).collect();
        let minus_planes: Vec<usize> = pairs.iter().map(|&(_, b)| b).collect();
        match piece {
            Piece::Constant { theta } => {
                let plus = Complex64::from_polar(1.0, *theta);
                let minus = Complex64::from_polar(1.0, -*theta);
                for &po in &plus_planes {
                    for s in 0..n {
                        state[po + s] *= plus;
                    }
                }
                for &po in &minus_planes {
                    for s in 0..n {
                        state[po + s] *= minus;
                    }
                }
                counter.record_constant_phase();
                counter.record_constant_phase();
            }
            Piece::Sequence { pue, solution, embedding, side } => {
                apply_sequence(
                    pue, embedding, &plus_planes, &solution.phases, false, state, *side, counter,
                );
                apply_sequence(
                    pue, embedding, &minus_planes, &solution.phases, true, state, *side, counter,
                );
            }
        }
        hadamard(state);
    }

    /// The filter block on simplex coordinates, `H/beta` up to residuals.
    /// Test-scale helper; queries are not booked.
    pub fn block_on_simplices(&self) -> DMatrix<f64> {
        let n_k = self.layout.signal_index.len();
        let n_sys = self.layout.n_sys;
        let mut scratch = CallCounter::default();
        let mut out = DMatrix::zeros(n_k, n_k);
        for j in 0..n_k {
            let mut e = DVector::from_element(n_sys, Complex64::new(0.0, 0.0));
            e[self.layout.signal_index[j]] = Complex64::new(1.0, 0.0);
            let lower = piece_average(&self.lower, &e, &mut scratch);
            let upper = piece_average(&self.upper, &e, &mut scratch);
            for (i, &idx) in self.layout.signal_index.iter().enumerate() {
                let val = (lower[idx] + upper[idx]
                    - Complex64::new(self.h0, 0.0) * e[idx])
                    / self.beta;
                debug_assert!(val.im.abs() < 1e-9);
                out[(i, j)] = val.re;
            }
        }
        out
    }
}

/// `(S_+ + S_-)/2` of a piece on a bare system vector.
fn piece_average(
    piece: &Piece,
    v: &DVector<Complex64>,
    counter: &mut CallCounter,
) -> DVector<Complex64> {
    match piece {
        Piece::Constant { theta } => v * Complex64::new(theta.cos(), 0.0),
        Piece::Sequence { pue, solution, embedding, side } => {
            let mut plus = v.clone();
            apply_sequence(pue, embedding, &[0], &solution.phases, false, &mut plus, *side, counter);
            let mut minus = v.clone();
            apply_sequence(pue, embedding, &[0], &solution.phases, true, &mut minus, *side, counter);
            (plus + minus) * Complex64::new(0.5, 0.0)
        }
    }
}

/// Builds the filter and runs the pipeline in one call.
pub fn run_pipeline(
    complex: &CliqueComplex,
    k: usize,
    kind: EncodingKind,
    spec: &FilterSpec,
    signal: &DVector<f64>,
) -> Result<FilterRunReport> {
    build_quantum_filter(complex, k, kind, spec)?.run(signal)
}

/// An approximated Hodge projector realized through the engine.
#[derive(Clone, Debug)]
pub struct SubcomponentProjection {
    pub component: Component,
    /// Approximation of the orthogonal projector on simplex coordinates.
    pub matrix: DMatrix<f64>,
    pub kappa: f64,
    pub eps: f64,
    /// Certified sup error of the underlying polynomial approximations.
    pub certified_error: f64,
    /// Phase residuals and encoding errors folded into the realization.
    pub residual: f64,
    /// Boundary-polynomial degrees used on the (lower, upper) paths.
    pub degrees: (usize, usize),
    pub counter: CallCounter,
}

fn validate_gap(kappa: f64, alpha: f64, b: &homology::SignMatrix, what: &str) -> Result<()> {
    if kappa <= 1.0 {
        return Err(Error::FilterSpec(format!("kappa = {kappa} must exceed 1")));
    }
    if let Some(xi) = homology::min_nonzero_singular_value(b) {
        let needed = alpha / xi;
        if kappa <= needed {
            return Err(Error::FilterSpec(format!(
                "kappa = {kappa} is inside the spectral gap of {what}: smallest nonzero singular \
                 value {xi:.6} needs kappa > {needed:.6}"
            )));
        }
    }
    Ok(())
}

/// Projector approximation along one boundary operator: the even certified
/// polynomial evaluated by the engine and rescaled by `2 kappa^2`.
fn boundary_projection(
    complex: &CliqueComplex,
    k_op: usize,
    kind: EncodingKind,
    adjoint: bool,
    kappa: f64,
    eps: f64,
    counter: &mut CallCounter,
) -> Result<(DMatrix<f64>, f64, f64, usize)> {
    let n = complex.graph().n();
    let signal_k = if adjoint { k_op - 1 } else { k_op };
    let n_k = complex.num_simplices(signal_k);
    if complex.num_simplices(k_op) == 0 || (!adjoint && complex.num_simplices(k_op - 1) == 0) {
        // the boundary operator is zero: its polynomial block is exactly
        // H(0) = 0 after rescaling
        return Ok((DMatrix::zeros(n_k, n_k), 0.0, 0.0, 0));
    }
    let proj = qsp_poly::projection_poly(kappa, eps)?;
    let solution = qsp_poly::solve_phases(&proj.boundary_poly)?;
    let pue_raw = encoding::boundary_pue(complex, k_op, kind)?;
    let pue = if adjoint { pue_raw.adjoint_pue() } else { pue_raw };
    let side = if adjoint { Side::Upper } else { Side::Lower };

    let enc = match kind {
        EncodingKind::Direct => BasisEncoding::direct(n, signal_k)?,
        EncodingKind::Compact => BasisEncoding::compact(n, signal_k, adjoint)?,
    };
    let indices: Vec<usize> = complex
        .simplices(signal_k)
        .iter()
        .map(|s| enc.index_of(s).expect("dimension matches"))
        .collect();
    let emb = Embedding::trivial(pue.dim());
    let scale = 2.0 * kappa * kappa;
    let mut m = DMatrix::zeros(n_k, n_k);
    for (j, &idx) in indices.iter().enumerate() {
        let mut plus = DVector::from_element(pue.dim(), Complex64::new(0.0, 0.0));
        plus[idx] = Complex64::new(1.0, 0.0);
        let mut minus = plus.clone();
        apply_sequence(&pue, &emb, &[0], &solution.phases, false, &mut plus, side, counter);
        apply_sequence(&pue, &emb, &[0], &solution.phases, true, &mut minus, side, counter);
        for (i, &ridx) in indices.iter().enumerate() {
            let avg = (plus[ridx] + minus[ridx]) * 0.5;
            debug_assert!(avg.im.abs() < 1e-9);
            m[(i, j)] = scale * avg.re;
        }
    }
    let residual = scale * (solution.residual + pue.error);
    Ok((m, proj.certified_error, residual, proj.degree_boundary))
}

/// Approximates the gradient, curl, or harmonic projector at dimension `k`.
///
/// `kappa` must clear the measured spectral gap of every boundary operator
/// the component touches; the harmonic projector is assembled as
/// `I - gradient - curl`.
pub fn subcomponent_filter(
    complex: &CliqueComplex,
    k: usize,
    kind: EncodingKind,
    component: Component,
    kappa: f64,
    eps: f64,
) -> Result<SubcomponentProjection> {
    if !(0.0..0.5).contains(&eps) || eps <= 0.0 {
        return Err(Error::FilterSpec(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    let n = complex.graph().n();
    let n_k = complex.num_simplices(k);
    if n_k == 0 {
        return Err(Error::Signal(format!("the complex has no {k}-simplices")));
    }
    let (a_k, a_k1) = rescale_alphas(kind, n, k);
    let mut counter = CallCounter::default();

    let gradient = |counter: &mut CallCounter| -> Result<(DMatrix<f64>, f64, f64, usize)> {
        if k == 0 {
            return Ok((DMatrix::zeros(n_k, n_k), 0.0, 0.0, 0));
        }
        let b = homology::boundary_matrix(complex, k);
        if b.entries().is_empty() {
            return Ok((DMatrix::zeros(n_k, n_k), 0.0, 0.0, 0));
        }
        validate_gap(kappa, a_k, &b, "the lower boundary operator")?;
        boundary_projection(complex, k, kind, false, kappa, eps, counter)
    };
    let curl = |counter: &mut CallCounter| -> Result<(DMatrix<f64>, f64, f64, usize)> {
        if complex.k_max() < k + 1 || complex.num_simplices(k + 1) == 0 {
            return Ok((DMatrix::zeros(n_k, n_k), 0.0, 0.0, 0));
        }
        let b = homology::boundary_matrix(complex, k + 1);
        validate_gap(kappa, a_k1, &b, "the upper boundary operator")?;
        boundary_projection(complex, k + 1, kind, true, kappa, eps, counter)
    };

    let (matrix, certified, residual, degrees) = match component {
        Component::Gradient => {
            let (m, c, r, d) = gradient(&mut counter)?;
            (m, c, r, (d, 0))
        }
        Component::Curl => {
            let (m, c, r, d) = curl(&mut counter)?;
            (m, c, r, (0, d))
        }
        Component::Harmonic => {
            let (g, cg, rg, dg) = gradient(&mut counter)?;
            let (c, cc, rc, dc) = curl(&mut counter)?;
            (DMatrix::identity(n_k, n_k) - g - c, cg + cc, rg + rc, (dg, dc))
        }
    };
    Ok(SubcomponentProjection {
        component,
        matrix,
        kappa,
        eps,
        certified_error: certified,
        residual,
        degrees,
        counter,
    })
}

/// The minimum-norm potential map realized through the engine.
#[derive(Clone, Debug)]
pub struct PotentialExtraction {
    /// Approximation of the pseudoinverse of the coboundary `B_k^T`, sending
    /// a `k`-signal to the shortest `(k-1)`-potential of its gradient part.
    pub matrix: DMatrix<f64>,
    pub kappa: f64,
    pub eps: f64,
    pub residual: f64,
    /// Degree of the odd pseudoinverse polynomial.
    pub degree: usize,
    pub counter: CallCounter,
}

/// Odd-polynomial route: `2 kappa / alpha` times the pseudoinverse block of
/// the lower boundary PUE approximates `(B_k^T)^+`.
pub fn lower_projector_filter(
    complex: &CliqueComplex,
    k: usize,
    kind: EncodingKind,
    kappa: f64,
    eps: f64,
) -> Result<PotentialExtraction> {
    if k == 0 {
        return Err(Error::FilterSpec("potentials live one dimension below k >= 1".into()));
    }
    let n = complex.graph().n();
    let n_k = complex.num_simplices(k);
    let n_km1 = complex.num_simplices(k - 1);
    if n_k == 0 {
        return Err(Error::Signal(format!("the complex has no {k}-simplices")));
    }
    let (a_k, _) = rescale_alphas(kind, n, k);
    let b = homology::boundary_matrix(complex, k);
    let mut counter = CallCounter::default();
    if b.entries().is_empty() {
        return Ok(PotentialExtraction {
            matrix: DMatrix::zeros(n_km1, n_k),
            kappa,
            eps,
            residual: 0.0,
            degree: 0,
            counter,
        });
    }
    validate_gap(kappa, a_k, &b, "the lower boundary operator")?;
    let inverse = qsp_poly::pseudoinverse_poly(kappa, eps)?;
    let solution = qsp_poly::solve_phases(&inverse.poly)?;
    let pue = encoding::boundary_pue(complex, k, kind)?;
    let emb = Embedding::trivial(pue.dim());

    let (enc_in, enc_out) = match kind {
        EncodingKind::Direct => (BasisEncoding::direct(n, k)?, BasisEncoding::direct(n, k - 1)?),
        EncodingKind::Compact => {
            (BasisEncoding::compact(n, k, false)?, BasisEncoding::compact(n, k - 1, true)?)
        }
    };
    let in_idx: Vec<usize> = complex
        .simplices(k)
        .iter()
        .map(|s| enc_in.index_of(s).expect("dimension matches"))
        .collect();
    let out_idx: Vec<usize> = complex
        .simplices(k - 1)
        .iter()
        .map(|s| enc_out.index_of(s).expect("dimension matches"))
        .collect();

    let scale = 2.0 * kappa / a_k;
    let mut matrix = DMatrix::zeros(n_km1, n_k);
    for (j, &idx) in in_idx.iter().enumerate() {
        let mut plus = DVector::from_element(pue.dim(), Complex64::new(0.0, 0.0));
        plus[idx] = Complex64::new(1.0, 0.0);
        let mut minus = plus.clone();
        apply_sequence(&pue, &emb, &[0], &solution.phases, false, &mut plus, Side::Lower, &mut counter);
        apply_sequence(&pue, &emb, &[0], &solution.phases, true, &mut minus, Side::Lower, &mut counter);
        for (i, &ridx) in out_idx.iter().enumerate() {
            let avg = (plus[ridx] + minus[ridx]) * 0.5;
            debug_assert!(avg.im.abs() < 1e-9);
            matrix[(i, j)] = scale * avg.re;
        }
    }
    Ok(PotentialExtraction {
        matrix,
        kappa,
        eps,
        residual: scale * (solution.residual + pue.error),
        degree: inverse.poly.degree(),
        counter,
    })
}
