//! Bounded parity polynomials and the machinery that realizes them on a
//! quantum signal processor: phase factor solving, Chebyshev phase formulas,
//! certified pseudoinverse approximants, and the projection polynomials built
//! from them.
//!
//! The signal operator is the reflection
//!
//! ```text
//! R(x) = [ x          sqrt(1-x^2) ]
//!        [ sqrt(1-x^2)    -x      ]
//! ```
//!
//! and a phase sequence `phi_1..phi_d` realizes the unitary
//! `U = prod_i exp(i phi_i Z) R(x)` (the `i = 1` factor leftmost). The
//! top-left entry of `U` is a polynomial `P(x)` of degree at most `d` with
//! parity `d mod 2` and `|P| <= 1` on `[-1, 1]`. Note `R(x)^2 = I`, so the
//! all-zero phase sequence yields the constant 1 for even `d`, not a
//! Chebyshev polynomial; `T_d` is realized by the phases
//! `((1-d) pi/2, pi/2, ..., pi/2)`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{par, Error, Result};

/// Largest polynomial degree the certified constructions will attempt.
pub const DEGREE_CAP: usize = 2000;

/// Parity of a polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_degree(d: usize) -> Parity {
        if d % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn matches(self, index: usize) -> bool {
        match self {
            Parity::Even => index % 2 == 0,
            Parity::Odd => index % 2 == 1,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    parity: Parity,
    coeffs: Vec<f64>,
}

/// A real polynomial of definite parity on `[-1, 1]`.
///
/// The serialized contract is the full monomial coefficient list
/// `coeffs[i] * x^i` with zeros at the wrong-parity slots. Internally a
/// Chebyshev expansion is kept alongside and used for evaluation, because the
/// monomial basis loses precision past degree 40 or so while the Chebyshev
/// form stays stable to degrees in the thousands.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct ParityPolynomial {
    parity: Parity,
    coeffs: Vec<f64>,
    cheb: Vec<f64>,
}

impl PartialEq for ParityPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.parity == other.parity && self.coeffs == other.coeffs
    }
}

impl TryFrom<PolyJson> for ParityPolynomial {
    type Error = Error;
    fn try_from(j: PolyJson) -> Result<Self> {
        ParityPolynomial::from_monomial(j.parity, j.coeffs)
    }
}

impl From<ParityPolynomial> for PolyJson {
    fn from(p: ParityPolynomial) -> PolyJson {
        PolyJson { parity: p.parity, coeffs: p.coeffs }
    }
}

impl ParityPolynomial {
    /// Builds a polynomial from monomial coefficients, checking parity.
    pub fn from_monomial(parity: Parity, mut coeffs: Vec<f64>) -> Result<Self> {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        for (i, &c) in coeffs.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::Polynomial(format!("non-finite coefficient {c} at x^{i}")));
            }
            if c != 0.0 && !parity.matches(i) {
                return Err(Error::Polynomial(format!(
                    "coefficient {c} at x^{i} violates {parity:?} parity"
                )));
            }
        }
        // sample the monomial form at Chebyshev nodes to recover the exact
        // Chebyshev expansion (degrees arriving this way are small)
        let degree = coeffs.len().saturating_sub(1);
        let horner = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        let mut cheb = chebyshev_transform(degree, horner);
        enforce_parity(&mut cheb, parity);
        while cheb.last() == Some(&0.0) {
            cheb.pop();
        }
        Ok(ParityPolynomial { parity, coeffs, cheb })
    }

    /// Builds a polynomial from its Chebyshev expansion `sum c_j T_j`.
    pub fn from_chebyshev(parity: Parity, mut cheb: Vec<f64>) -> Result<Self> {
        while cheb.last() == Some(&0.0) {
            cheb.pop();
        }
        for (j, &c) in cheb.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::Polynomial(format!("non-finite coefficient {c} at T_{j}")));
            }
            if c != 0.0 && !parity.matches(j) {
                return Err(Error::Polynomial(format!(
                    "coefficient {c} at T_{j} violates {parity:?} parity"
                )));
            }
        }
        let coeffs = chebyshev_to_monomial(&cheb);
        Ok(ParityPolynomial { parity, coeffs, cheb })
    }

    /// The Chebyshev polynomial `T_d`.
    pub fn chebyshev_t(d: usize) -> Self {
        let mut cheb = vec![0.0; d + 1];
        cheb[d] = 1.0;
        Self::from_chebyshev(Parity::of_degree(d), cheb).expect("a single T_d term is valid")
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Monomial coefficients `c_0..=c_d` (the serialized contract).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Chebyshev coefficients, the stable internal representation.
    pub fn cheb_coeffs(&self) -> &[f64] {
        &self.cheb
    }

    pub fn degree(&self) -> usize {
        self.cheb.len().max(self.coeffs.len()).saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.cheb.is_empty()
    }

    /// Evaluates the polynomial, by Clenshaw on the Chebyshev form inside
    /// `[-1, 1]` and by Horner on the monomial form outside.
    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() <= 1.0 {
            clenshaw(&self.cheb, x)
        } else {
            self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
        }
    }

    /// The polynomial scaled by a constant.
    pub fn scaled(&self, factor: f64) -> Self {
        ParityPolynomial {
            parity: self.parity,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            cheb: self.cheb.iter().map(|c| c * factor).collect(),
        }
    }

    /// Largest magnitude over `[-1, 1]`, sampled on `[0, 1]` (parity covers
    /// the negative half).
    pub fn sup_norm(&self, grid: usize) -> f64 {
        let cheb = self.cheb.clone();
        par::max_over_indices(grid, move |i| {
            let x = i as f64 / (grid - 1) as f64;
            clenshaw(&cheb, x).abs()
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

fn enforce_parity(cheb: &mut [f64], parity: Parity) {
    for (j, c) in cheb.iter_mut().enumerate() {
        if !parity.matches(j) {
            *c = 0.0;
        }
    }
}

/// Chebyshev coefficients of a degree-`d` polynomial from point evaluations
/// at the `d + 1` Chebyshev-Gauss nodes (exact for polynomials).
fn chebyshev_transform(degree: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let m = degree + 1;
    let samples: Vec<f64> = (0..m)
        .map(|j| f((std::f64::consts::PI * (j as f64 + 0.5) / m as f64).cos()))
        .collect();
    (0..m)
        .map(|k| {
            let scale = if k == 0 { 1.0 } else { 2.0 } / m as f64;
            scale
                * (0..m)
                    .map(|j| {
                        samples[j]
                            * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / m as f64).cos()
                    })
                    .sum::<f64>()
        })
        .collect()
}

fn clenshaw(cheb: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in cheb.iter().skip(1).rev() {
        let next = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = next;
    }
    cheb.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// Expands `sum c_j T_j` into monomial coefficients. Exact in exact
/// arithmetic; the result is for reporting, evaluation should stay on the
/// Chebyshev side at high degree.
fn chebyshev_to_monomial(cheb: &[f64]) -> Vec<f64> {
    if cheb.is_empty() {
        return Vec::new();
    }
    let deg = cheb.len() - 1;
    let mut acc = vec![0.0; deg + 1];
    let mut t_prev = vec![1.0];
    let mut t_curr = vec![0.0, 1.0];
    acc[0] += cheb[0];
    if deg >= 1 {
        acc[1] += cheb[1];
    }
    for k in 2..=deg {
        // T_{k} = 2 x T_{k-1} - T_{k-2}
        let mut next = vec![0.0; k + 1];
        for (i, &v) in t_curr.iter().enumerate() {
            next[i + 1] += 2.0 * v;
        }
        for (i, &v) in t_prev.iter().enumerate() {
            next[i] -= v;
        }
        for (i, &v) in next.iter().enumerate() {
            acc[i] += cheb[k] * v;
        }
        t_prev = std::mem::replace(&mut t_curr, next);
    }
    while acc.last() == Some(&0.0) {
        acc.pop();
    }
    acc
}

/// The signal reflection `R(x)`.
pub fn signal_reflection(x: f64) -> Matrix2<Complex64> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    Matrix2::new(
        Complex64::new(x, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(-x, 0.0),
    )
}

fn phase_gate(phi: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::from_polar(1.0, phi),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, -phi),
    )
}

/// The processed unitary `prod_i exp(i phi_i Z) R(x)`, `i = 1` leftmost.
pub fn qsp_unitary(phases: &[f64], x: f64) -> Matrix2<Complex64> {
    let mut u = Matrix2::identity();
    for &phi in phases {
        u = u * phase_gate(phi) * signal_reflection(x);
    }
    u
}

/// Top-left entry of the processed unitary: the realized polynomial.
pub fn qsp_value(phases: &[f64], x: f64) -> Complex64 {
    qsp_unitary(phases, x)[(0, 0)]
}

/// Phases realizing `T_d` exactly: `((1-d) pi/2, pi/2, .., pi/2)`.
pub fn chebyshev_phases(d: usize) -> Vec<f64> {
    use std::f64::consts::FRAC_PI_2;
    if d == 0 {
        return Vec::new();
    }
    let mut phases = vec![FRAC_PI_2; d];
    phases[0] = (1.0 - d as f64) * FRAC_PI_2;
    phases
}

/// Result of a phase solve.
#[derive(Clone, Debug)]
pub struct PhaseSolution {
    pub phases: Vec<f64>,
    /// Sup of `|Re P - f|` over a 2049-point grid on `[0, 1]` (parity makes
    /// the negative half redundant). Measured against the prescaled target
    /// when `prescaled` is set.
    pub residual: f64,
    /// Whether the target had to retreat to sup norm `1 - 1e-6` because the
    /// solver could not realize it hugging the unit bound.
    pub prescaled: bool,
}

/// Finds phases whose realized polynomial has real part `f`.
///
/// The solve runs in the symmetric rotation frame: the factorization
/// `R(x) = -i e^{i pi/4 Z} W(x) e^{i pi/4 Z}` with `W = e^{i arccos(x) X}`
/// rewrites the phase product as a `W`-convention sequence whose trailing
/// phase is pinned to `pi/4`, and a palindromic `W`-sequence has only
/// `d/2 + 1` free phases, exactly the coefficient count of a parity-`d`
/// polynomial. That square system is well conditioned around the anchor
/// `(pi/4, 0, .., 0)` (which realizes `i T_d`, so `Re P = 0`), where the
/// full-phase parametrization is rank-deficient and strands descent methods
/// in flat valleys. Parity and the unit bound are validated first; constant
/// targets are rejected since a length-0 sequence can only realize the
/// constant 1 (callers fold constants into global phases instead). The
/// achieved residual is measured on an independent grid and recorded, never
/// assumed.
pub fn solve_phases(poly: &ParityPolynomial) -> Result<PhaseSolution> {
    let d = poly.degree();
    if poly.is_zero() || d == 0 {
        return Err(Error::PhaseSolve(
            "constant targets are global phases, not phase sequences".into(),
        ));
    }
    if d > DEGREE_CAP {
        return Err(Error::PhaseSolve(format!("degree {d} exceeds the cap {DEGREE_CAP}")));
    }
    let sup = poly.sup_norm(4096);
    if sup > 1.0 + 1e-9 {
        return Err(Error::PhaseSolve(format!(
            "target reaches {sup:.9}, above the unit bound"
        )));
    }

    let solve_for = |target: &ParityPolynomial| -> (Vec<f64>, f64) {
        let phases = symmetric_homotopy(target);
        let grid = 2049;
        let residual = par::max_over_indices(grid, |i| {
            let x = i as f64 / (grid - 1) as f64;
            (qsp_value(&phases, x).re - target.eval(x)).abs()
        });
        (phases, residual)
    };

    let (phases, residual) = solve_for(poly);
    if residual <= 1e-9 || sup <= 1.0 - 1e-6 {
        return Ok(PhaseSolution { phases, residual, prescaled: false });
    }
    // a target hugging the unit bound can defeat the completion; retreat just
    // inside the bound and keep whichever solve came out tighter
    let inset = poly.scaled((1.0 - 1e-6) / sup);
    let (inset_phases, inset_residual) = solve_for(&inset);
    if inset_residual < residual {
        Ok(PhaseSolution { phases: inset_phases, residual: inset_residual, prescaled: true })
    } else {
        Ok(PhaseSolution { phases, residual, prescaled: false })
    }
}

/// `e^{i arccos(x) X}`, the signal rotation of the symmetric solving frame.
fn wx_rotation(x: f64) -> Matrix2<Complex64> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    Matrix2::new(
        Complex64::new(x, 0.0),
        Complex64::new(0.0, s),
        Complex64::new(0.0, s),
        Complex64::new(x, 0.0),
    )
}

/// Mirrors `d/2 + 1` reduced phases into the full palindromic vector
/// `(psi_0, .., psi_d)` with `psi_j = psi_{d-j}`.
fn expand_symmetric(reduced: &[f64], d: usize) -> Vec<f64> {
    let mut full = vec![0.0; d + 1];
    for (j, &r) in reduced.iter().enumerate() {
        full[j] = r;
        full[d - j] = r;
    }
    full
}

fn wx_real_value(full: &[f64], x: f64) -> f64 {
    let mut u = phase_gate(full[0]);
    let w = wx_rotation(x);
    for &psi in &full[1..] {
        u = u * w * phase_gate(psi);
    }
    u[(0, 0)].re
}

/// One damped Gauss-Newton run over the reduced symmetric phases; returns
/// the final sum of squared node residuals.
fn lm_symmetric(reduced: &mut [f64], d: usize, nodes: &[f64], wanted: &[f64]) -> f64 {
    let mt = reduced.len();
    let residuals = |red: &[f64]| -> DVector<f64> {
        let full = expand_symmetric(red, d);
        DVector::from_fn(mt, |j, _| wx_real_value(&full, nodes[j]) - wanted[j])
    };
    let mut r = residuals(reduced);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut stall = 0;
    let iz = Matrix2::new(
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, -1.0),
    );
    for _ in 0..300 {
        if cost < 1e-26 {
            break;
        }
        let full = expand_symmetric(reduced, d);
        // rows: d Re P / d psi_k = Re (prefix_{k} (iZ) suffix_{k})_00,
        // folded over the mirror position d - k
        let mut jac = DMatrix::zeros(mt, mt);
        for (row, &x) in nodes.iter().enumerate() {
            let w = wx_rotation(x);
            let steps: Vec<Matrix2<Complex64>> = (0..=d)
                .map(|j| if j == 0 { phase_gate(full[0]) } else { w * phase_gate(full[j]) })
                .collect();
            let mut prefixes = Vec::with_capacity(d + 2);
            prefixes.push(Matrix2::identity());
            for s in &steps {
                let last: Matrix2<Complex64> = *prefixes.last().unwrap();
                prefixes.push(last * s);
            }
            let mut suffixes = vec![Matrix2::identity(); d + 2];
            for j in (0..=d).rev() {
                suffixes[j] = steps[j] * suffixes[j + 1];
            }
            for k in 0..mt {
                let mut dv = (prefixes[k + 1] * iz * suffixes[k + 1])[(0, 0)].re;
                if d - k != k {
                    dv += (prefixes[d - k + 1] * iz * suffixes[d - k + 1])[(0, 0)].re;
                }
                jac[(row, k)] = dv;
            }
        }
        let jt = jac.transpose();
        let gram = &jt * &jac;
        let grad = &jt * &r;
        let mut improved = false;
        for _ in 0..40 {
            let mut damped = gram.clone();
            for i in 0..mt {
                damped[(i, i)] += lambda;
            }
            let Some(delta) = damped.lu().solve(&(-&grad)) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = reduced.iter().zip(delta.iter()).map(|(p, dl)| p + dl).collect();
            let r_trial = residuals(&trial);
            let c_trial = r_trial.norm_squared();
            if c_trial < cost {
                reduced.copy_from_slice(&trial);
                r = r_trial;
                if cost - c_trial < 1e-30 {
                    stall += 1;
                } else {
                    stall = 0;
                }
                cost = c_trial;
                lambda = (lambda / 3.0).max(1e-14);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            stall += 1;
        }
        if stall > 12 {
            break;
        }
    }
    cost
}

/// Solves the target in the symmetric frame and maps the phases back to the
/// reflection convention.
///
/// The target is matched at `d/2 + 1` positive Chebyshev nodes, which pins
/// a parity-`d` polynomial exactly. A homotopy along `s * f` starting from
/// the anchor recovers the full-leap solve when it misses: the step doubles
/// after a converged leg and halves after a failed one. The walk is
/// deterministic, so repeated solves of one target agree bit for bit.
///
/// Mapping back: a palindromic solution has `psi_d = psi_0` free, while the
/// reflection form needs `psi_d = pi/4`; shifting `psi_0` by `psi_d - pi/4`
/// preserves the realized polynomial and pins the tail. The leading phase
/// then absorbs `d pi/2`, cancelling the global `(-i)^d` of the frame
/// change, so the realized real parts agree exactly.
fn symmetric_homotopy(target: &ParityPolynomial) -> Vec<f64> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    let d = target.degree();
    let mt = d / 2 + 1;
    let nodes: Vec<f64> = (0..mt)
        .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / (2 * mt) as f64).cos())
        .collect();
    let wanted: Vec<f64> = nodes.iter().map(|&x| target.eval(x)).collect();
    let mut reduced = vec![0.0; mt];
    reduced[0] = FRAC_PI_4;
    let mut s = 0.0f64;
    let mut step = 1.0f64;
    for _ in 0..64 {
        if s >= 1.0 {
            break;
        }
        let s_next = (s + step).min(1.0);
        let scaled: Vec<f64> = wanted.iter().map(|w| s_next * w).collect();
        let mut trial = reduced.clone();
        let cost = lm_symmetric(&mut trial, d, &nodes, &scaled);
        if cost < 1e-20 {
            reduced = trial;
            s = s_next;
            step = (step * 2.0).min(1.0 - s + 1e-12);
        } else {
            step *= 0.5;
            if step < 1e-3 {
                break;
            }
        }
    }
    let mut full = expand_symmetric(&reduced, d);
    full[0] += full[d] - FRAC_PI_4;
    let mut phases = vec![0.0; d];
    phases[0] = full[0] - FRAC_PI_4 + d as f64 * FRAC_PI_2;
    for j in 1..d {
        phases[j] = full[j] - FRAC_PI_2;
    }
    phases
}

/// A certified odd approximation of `1/(2 kappa x)` away from zero.
#[derive(Clone, Debug)]
pub struct InversePoly {
    pub poly: ParityPolynomial,
    pub kappa: f64,
    pub eps: f64,
    /// Measured sup of `|g - 1/(2 kappa x)|` on `[1/kappa, 1]`.
    pub certified_error: f64,
    /// Measured sup of `|g|` on `[-1, 1]`.
    pub sup_norm: f64,
    /// The asymptotic degree yardstick `kappa * log(2 kappa / eps)`.
    pub asymptotic_degree: f64,
}

/// Builds an odd polynomial `g` with `|g(x) - 1/(2 kappa x)| <= eps/(2 kappa)`
/// on `[1/kappa, 1]`, `|g| <= 1` on `[-1, 1]`, and `g(0) = 0`.
///
/// The rectangle smoother is the squared Chebyshev step
/// `r(x)^2 = (1 - T_m(w(x))/T_m(w(0)))^2` where `w` maps `x^2` affinely so
/// that `[b^2, 1]` lands on `[1, -1]`, with the rectangle edge at
/// `b = 0.9/kappa`. Placing the edge below `1/kappa` leaves headroom
/// (`1/(2 kappa x) <= 0.56` wherever the step is flat) and squaring crushes
/// the step's transition tail quadratically, which keeps `r^2/(2 kappa x)`
/// below 1 all the way into the dip. The step vanishes at 0 identically, so
/// `g` is a true odd polynomial of degree `4m - 1`. Certification is by
/// measurement on dense grids, escalating `m` until the bounds pass or the
/// degree cap is hit.
pub fn pseudoinverse_poly(kappa: f64, eps: f64) -> Result<InversePoly> {
    if !(kappa.is_finite() && kappa > 1.0) {
        return Err(Error::Polynomial(format!("kappa must be finite and above 1, got {kappa}")));
    }
    if !(eps.is_finite() && (0.0..0.5).contains(&eps) && eps > 0.0) {
        return Err(Error::Polynomial(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let b = 0.9 / kappa;
    let w = move |x: f64| 1.0 - 2.0 * (x * x - b * b) / (1.0 - b * b);
    let w0 = w(0.0);
    // the squared step deviates from 1 by about 2 delta on [b, 1] with
    // delta = 1/T_m(w0), making the error against 1/(2 kappa x) about
    // 1.25 delta at x = 1/kappa; aim below eps/(2 kappa) and certify
    let mut m = ((3.0 * kappa / eps).acosh() / w0.acosh()).ceil() as usize;
    m = m.max(1);
    for _ in 0..10 {
        let degree = 4 * m - 1;
        if degree > DEGREE_CAP {
            return Err(Error::Polynomial(format!(
                "certified degree {degree} would exceed the cap {DEGREE_CAP} for kappa={kappa}, eps={eps}"
            )));
        }
        let tm_w0 = cheb_t_outside(m, w0);
        let g_raw = move |x: f64| {
            if x == 0.0 {
                return 0.0;
            }
            let rect = 1.0 - cheb_t_any(m, w(x)) / tm_w0;
            rect * rect / (2.0 * kappa * x)
        };
        // exact Chebyshev expansion of the degree 2m-1 polynomial
        let mut cheb = chebyshev_transform(degree, g_raw);
        enforce_parity(&mut cheb, Parity::Odd);
        let poly = ParityPolynomial::from_chebyshev(Parity::Odd, cheb)?;

        let err_grid = 2048;
        let certified_error = {
            let p = poly.clone();
            par::max_over_indices(err_grid, move |i| {
                let x = 1.0 / kappa + (1.0 - 1.0 / kappa) * i as f64 / (err_grid - 1) as f64;
                (p.eval(x) - 1.0 / (2.0 * kappa * x)).abs()
            })
        };
        let sup_norm = poly.sup_norm(4096);
        if certified_error <= eps / (2.0 * kappa) && sup_norm <= 1.0 {
            return Ok(InversePoly {
                poly,
                kappa,
                eps,
                certified_error,
                sup_norm,
                asymptotic_degree: kappa * (2.0 * kappa / eps).ln(),
            });
        }
        m += (m / 4).max(1);
    }
    Err(Error::Polynomial(format!(
        "pseudoinverse certification did not converge for kappa={kappa}, eps={eps}"
    )))
}

// T_m at arguments of any magnitude, stable in all three regimes
fn cheb_t_any(m: usize, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (m as f64 * x.acos()).cos()
    } else if x > 1.0 {
        cheb_t_outside(m, x)
    } else {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sign * cheb_t_outside(m, -x)
    }
}

fn cheb_t_outside(m: usize, x: f64) -> f64 {
    debug_assert!(x >= 1.0);
    (m as f64 * x.acosh()).cosh()
}

/// A certified even approximation of the spectral projector away from zero.
///
/// `H` is a polynomial in the (rescaled) Laplacian eigenvalue `y` with
/// `H(0) = 0` and `|2 kappa^2 H(y) - 1| <= eps` for `y in [1/kappa^2, 1]`;
/// equivalently `H(x^2)` is an even polynomial in the boundary singular
/// value `x`. Both degree conventions are carried.
#[derive(Clone, Debug)]
pub struct ProjectionPoly {
    pub kappa: f64,
    pub eps: f64,
    /// Chebyshev coefficients of `H` over `y in [0, 1]`.
    cheb_y: Vec<f64>,
    /// Monomial coefficients of `H` in `y` (constant term exactly zero).
    laplacian_coeffs: Vec<f64>,
    /// `H(x^2)` as an even polynomial in `x`.
    pub boundary_poly: ParityPolynomial,
    /// Measured sup of `|2 kappa^2 H(y) - 1|` on `[1/kappa^2, 1]`.
    pub certified_error: f64,
    /// Degree of `H` in the Laplacian.
    pub degree_laplacian: usize,
    /// Degree of `H(x^2)` in the boundary operator.
    pub degree_boundary: usize,
}

impl ProjectionPoly {
    /// `H(y)` evaluated stably for `y in [0, 1]`.
    pub fn eval_laplacian(&self, y: f64) -> f64 {
        clenshaw(&self.cheb_y, 2.0 * y - 1.0)
    }

    /// Monomial coefficients of `H` in the Laplacian variable, constant
    /// term included (it is exactly zero).
    pub fn laplacian_coeffs(&self) -> &[f64] {
        &self.laplacian_coeffs
    }

    /// The power-series tail `H = sum_i tail[i-1] y^i`, as a filter wants it.
    pub fn laplacian_tail(&self) -> Vec<f64> {
        self.laplacian_coeffs.get(1..).unwrap_or(&[]).to_vec()
    }

    /// Applies `H(L)` to a vector with the matrix Clenshaw recurrence,
    /// using only matrix-vector products. `l` must already be rescaled so
    /// its spectrum lies in `[0, 1]`.
    pub fn apply_laplacian(&self, l: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
        // t = 2 L - I; b_k = c_k v + 2 t b_{k+1} - b_{k+2}
        let t_apply = |u: &DVector<f64>| 2.0 * (l * u) - u;
        let mut b1: DVector<f64> = DVector::zeros(v.len());
        let mut b2: DVector<f64> = DVector::zeros(v.len());
        for &c in self.cheb_y.iter().skip(1).rev() {
            let next = 2.0 * t_apply(&b1) - &b2 + c * v;
            b2 = std::mem::replace(&mut b1, next);
        }
        self.cheb_y.first().copied().unwrap_or(0.0) * v + t_apply(&b1) - b2
    }

    /// Materializes `H(L)` column by column.
    pub fn laplacian_matrix(&self, l: &DMatrix<f64>) -> DMatrix<f64> {
        let n = l.nrows();
        let cols = par::map_indices(n, |j| {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            self.apply_laplacian(l, &e)
        });
        DMatrix::from_columns(&cols)
    }
}

/// Builds the projection polynomial from the certified pseudoinverse.
///
/// With `g(x) = x Q(x^2)` the odd approximant, `H(y) := y Q(y) / kappa`
/// satisfies `2 kappa^2 H(x^2) = 2 kappa x g(x)`, so the pseudoinverse
/// certificate transfers directly and `H(0) = 0` exactly.
pub fn projection_poly(kappa: f64, eps: f64) -> Result<ProjectionPoly> {
    let inverse = pseudoinverse_poly(kappa, eps)?;
    let g = &inverse.poly;
    let degree_boundary = g.degree() + 1; // even
    let degree_laplacian = degree_boundary / 2;

    // H as a function of y via the stable odd evaluation at x = sqrt(y)
    let g_eval = g.clone();
    let h_of_y = move |y: f64| {
        let x = y.max(0.0).sqrt();
        x * g_eval.eval(x) / kappa
    };
    let mut cheb_y = chebyshev_transform_on(degree_laplacian, (0.0, 1.0), &h_of_y);
    // pin H(0) to machine zero by folding the value at zero into c_0
    let at_zero = clenshaw(&cheb_y, -1.0);
    cheb_y[0] -= at_zero;

    let mut laplacian_coeffs = shifted_cheb_to_monomial(&cheb_y, (0.0, 1.0));
    if let Some(c0) = laplacian_coeffs.first_mut() {
        *c0 = 0.0;
    }

    // even polynomial in the boundary variable: x * g(x) / kappa
    let g_eval2 = g.clone();
    let mut cheb_x = chebyshev_transform(degree_boundary, move |x| x * g_eval2.eval(x) / kappa);
    enforce_parity(&mut cheb_x, Parity::Even);
    // same pin at x = 0
    let bx0 = clenshaw(&cheb_x, 0.0);
    cheb_x[0] -= bx0;
    let boundary_poly = ParityPolynomial::from_chebyshev(Parity::Even, cheb_x)?;

    let proj = ProjectionPoly {
        kappa,
        eps,
        cheb_y,
        laplacian_coeffs,
        boundary_poly,
        certified_error: 0.0,
        degree_laplacian,
        degree_boundary,
    };
    let err_grid = 2048;
    let certified_error = {
        let p = proj.clone();
        par::max_over_indices(err_grid, move |i| {
            let y = 1.0 / (kappa * kappa)
                + (1.0 - 1.0 / (kappa * kappa)) * i as f64 / (err_grid - 1) as f64;
            (2.0 * kappa * kappa * p.eval_laplacian(y) - 1.0).abs()
        })
    };
    if certified_error > eps {
        return Err(Error::Polynomial(format!(
            "projection certification failed: measured {certified_error:.3e} above eps {eps:.3e}"
        )));
    }
    Ok(ProjectionPoly { certified_error, ..proj })
}

/// Chebyshev coefficients on an arbitrary interval.
fn chebyshev_transform_on(degree: usize, domain: (f64, f64), f: &impl Fn(f64) -> f64) -> Vec<f64> {
    let (a, b) = domain;
    chebyshev_transform(degree, |t| f(0.5 * (a + b) + 0.5 * (b - a) * t))
}

/// Monomial coefficients (in the original variable) of a Chebyshev series on
/// `[a, b]`.
fn shifted_cheb_to_monomial(cheb: &[f64], domain: (f64, f64)) -> Vec<f64> {
    if cheb.is_empty() {
        return Vec::new();
    }
    let (a, b) = domain;
    let deg = cheb.len() - 1;
    let c1 = 2.0 / (b - a);
    let c0 = -(a + b) / (b - a);
    let mut acc = vec![0.0; deg + 1];
    let mut t_prev = vec![1.0];
    let mut t_curr = vec![c0, c1];
    acc[0] += cheb[0];
    if deg >= 1 {
        for (i, &v) in t_curr.iter().enumerate() {
            acc[i] += cheb[1] * v;
        }
    }
    for k in 2..=deg {
        let mut next = vec![0.0; k + 1];
        for (i, &v) in t_curr.iter().enumerate() {
            next[i] += 2.0 * c0 * v;
            next[i + 1] += 2.0 * c1 * v;
        }
        for (i, &v) in t_prev.iter().enumerate() {
            next[i] -= v;
        }
        for (i, &v) in next.iter().enumerate() {
            acc[i] += cheb[k] * v;
        }
        t_prev = std::mem::replace(&mut t_curr, next);
    }
    acc
}

/// Applies a parity polynomial to the singular values of a real matrix.
///
/// For even `f`: returns `f(sqrt(A^T A))` over the full right space, so
/// kernel directions receive `f(0)`. For odd `f`: returns
/// `sum_i f(xi_i) u_i v_i^T` over the singular triples, mapping the right
/// space into the left space (kernel directions are annihilated, consistent
/// with `f(0) = 0`). This is the reference every singular value transform in
/// the simulator is tested against.
pub fn svd_oracle(a: &DMatrix<f64>, poly: &ParityPolynomial) -> DMatrix<f64> {
    let (rows, cols) = (a.nrows(), a.ncols());
    match poly.parity() {
        Parity::Even => {
            let f0 = poly.eval(0.0);
            let mut out = DMatrix::from_diagonal_element(cols, cols, f0);
            if rows == 0 || cols == 0 {
                return out;
            }
            let svd = a.clone().svd(false, true);
            let vt = svd.v_t.expect("requested");
            for i in 0..svd.singular_values.len() {
                let xi = svd.singular_values[i];
                let v = vt.row(i).transpose();
                out += (poly.eval(xi) - f0) * &v * v.transpose();
            }
            out
        }
        Parity::Odd => {
            let mut out = DMatrix::zeros(rows, cols);
            if rows == 0 || cols == 0 {
                return out;
            }
            let svd = a.clone().svd(true, true);
            let u = svd.u.expect("requested");
            let vt = svd.v_t.expect("requested");
            for i in 0..svd.singular_values.len() {
                let xi = svd.singular_values[i];
                out += poly.eval(xi) * u.column(i) * vt.row(i);
            }
            out
        }
    }
}
