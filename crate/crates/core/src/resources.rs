//! Exact query counts and unit-constant cost proxies for the filtering
//! circuits.
//!
//! The exact section reproduces the cost model the engine realizes: a filter
//! with effective boundary-series degrees `(d_l, d_u)` books `4 d` calls to
//! each member of the boundary-oracle conjugate pair on its side, `8 d`
//! calls to each `C_PiNOT` flavor, and `4 (d_l + d_u)` reflection rotations.
//! The engine's run counters are the source of truth; these formulas are the
//! cross-check, and a test asserts they never drift apart.
//!
//! Everything in the asymptotic section is the literal unit-constant,
//! base-2-log evaluation of a complexity class and is labeled as such; none
//! of those numbers is an absolute gate count.

use serde::Serialize;

use crate::encoding::EncodingKind;
use crate::{qsp_poly, Result};

/// Label attached to every evaluated complexity class.
pub const ASYMPTOTIC_LABEL: &str = "asymptotic, unit-constant";

fn ceil_log2(x: usize) -> usize {
    debug_assert!(x >= 1);
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

fn log2(x: f64) -> f64 {
    x.log2()
}

/// Ancilla register width of the boundary PUE at operator dimension `k_op`.
pub fn boundary_ancillas(kind: EncodingKind, k_op: usize) -> usize {
    match kind {
        EncodingKind::Direct => 0,
        EncodingKind::Compact => ceil_log2(k_op + 1),
    }
}

/// Ancillas booked for the membership check backing the projector masks.
///
/// The direct construction uses `n` ancillas; for compact the two sections
/// of the source disagree (see [`MEMBERSHIP_ANCILLA_NOTE`]) and the detailed
/// circuit's `ceil(log2(k+1))` count is booked here.
pub fn membership_ancillas(kind: EncodingKind, n: usize, k: usize) -> usize {
    match kind {
        EncodingKind::Direct => n,
        EncodingKind::Compact => ceil_log2(k + 1),
    }
}

/// The compact membership ancilla count is stated once as `O(k)` and once,
/// by the detailed circuit, as `O(log k)`; both are reported.
pub const MEMBERSHIP_ANCILLA_NOTE: &str = "compact membership ancillas are stated as O(k) in the \
     oracle overview but the detailed serial circuit concludes O(log k); the log-k count is \
     booked, the discrepancy is reported verbatim";

/// Total filter ancillas: the boundary registers (booked only when the
/// matching series is nonempty), the membership register, and six fixed
/// ancillas (two prepare, two sign-selection, two phase-flag qubits).
pub fn filter_ancillas(kind: EncodingKind, n: usize, k: usize, d_l: usize, d_u: usize) -> usize {
    let a_k = if d_l >= 1 { boundary_ancillas(kind, k) } else { 0 };
    let a_k1 = if d_u >= 1 { boundary_ancillas(kind, k + 1) } else { 0 };
    a_k + a_k1 + membership_ancillas(kind, n, k) + 6
}

/// Exact per-run query counts for one filter execution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ExactCounts {
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
    pub ancillas: usize,
    pub beta: f64,
}

/// A unit-constant evaluation of one depth/space complexity class.
#[derive(Clone, Debug, Serialize)]
pub struct DepthProxy {
    pub label: &'static str,
    pub depth: f64,
    pub depth_formula: &'static str,
    pub space: f64,
    pub space_formula: &'static str,
}

/// Cost report for one filter instance.
#[derive(Clone, Debug, Serialize)]
pub struct ResourceEstimate {
    pub encoding: String,
    pub n: usize,
    pub k: usize,
    pub e: usize,
    pub d_lower: usize,
    pub d_upper: usize,
    pub exact: ExactCounts,
    pub asymptotic_unit_constant: DepthProxy,
}

/// Exact query counts and the evaluated depth class for a degree-(d_l, d_u)
/// filter at dimension `k` on an `n`-vertex, `e`-edge graph.
///
/// A side with an empty series queries no boundary oracle and books one
/// constant phase pair instead. The depth class is driven by
/// `d = max(d_l, d_u)`; its evaluation degenerates to zero for `n <= 2` in
/// the compact case because `log2(log2(n))` vanishes there.
pub fn estimate_filter(
    n: usize,
    k: usize,
    d_l: usize,
    d_u: usize,
    kind: EncodingKind,
    e: usize,
    h0: f64,
) -> ResourceEstimate {
    debug_assert!(n >= 1 && e <= n * (n - 1) / 2);
    let exact = ExactCounts {
        u_lower: 4 * d_l,
        u_lower_adjoint: 4 * d_l,
        u_upper: 4 * d_u,
        u_upper_adjoint: 4 * d_u,
        cpinot_lower: 8 * d_l,
        cpinot_prime_lower: 8 * d_l,
        cpinot_upper: 8 * d_u,
        cpinot_prime_upper: 8 * d_u,
        rotations: 4 * (d_l + d_u),
        constant_phases: 2 * usize::from(d_l == 0) + 2 * usize::from(d_u == 0),
        ancillas: filter_ancillas(kind, n, k, d_l, d_u),
        beta: 2.0 + h0,
    };
    let d = d_l.max(d_u) as f64;
    let nf = n as f64;
    let kf = k as f64;
    let asymptotic = match kind {
        EncodingKind::Direct => DepthProxy {
            label: ASYMPTOTIC_LABEL,
            depth: d * nf * log2(nf),
            depth_formula: "d * n * log2(n)",
            space: nf,
            space_formula: "n",
        },
        EncodingKind::Compact => DepthProxy {
            label: ASYMPTOTIC_LABEL,
            depth: d * kf * nf * nf * log2(nf) * log2(log2(nf)),
            depth_formula: "d * k * n^2 * log2(n) * log2(log2(n))",
            space: kf * log2(nf),
            space_formula: "k * log2(n)",
        },
    };
    ResourceEstimate {
        encoding: kind.to_string(),
        n,
        k,
        e,
        d_lower: d_l,
        d_upper: d_u,
        exact,
        asymptotic_unit_constant: asymptotic,
    }
}

/// Cost report for one membership (simplex-indicator) oracle call.
#[derive(Clone, Debug, Serialize)]
pub struct MembershipCost {
    pub encoding: String,
    pub n: usize,
    pub k: usize,
    pub e: usize,
    pub parallel: bool,
    pub label: &'static str,
    pub depth: f64,
    pub depth_formula: &'static str,
    pub toffoli: f64,
    /// Booked ancilla count; fractional for the parallel compact variant
    /// whose stated adjustment is "approximately k/2 - 2 log(k+1)".
    pub ancillas: f64,
    pub ancilla_adjustment: f64,
    pub ancilla_note: &'static str,
}

/// Unit-constant membership-oracle costs.
///
/// Direct checks Hamming weight in `n log2(n)` depth with `n` ancillas; the
/// compact clique check runs in `E k^2 log2(n)` depth serially and
/// `E k log2(n)` when the edge checks are parallelised, paying approximately
/// `k/2 - 2 log2(k+1)` extra ancillas (negative values of that expression
/// at small `k` are reported but not booked).
pub fn estimate_membership(
    n: usize,
    k: usize,
    e: usize,
    kind: EncodingKind,
    parallel: bool,
) -> MembershipCost {
    debug_assert!(n >= 1 && e <= n * (n - 1) / 2);
    let nf = n as f64;
    let kf = k as f64;
    let ef = e as f64;
    match kind {
        EncodingKind::Direct => MembershipCost {
            encoding: kind.to_string(),
            n,
            k,
            e,
            parallel,
            label: ASYMPTOTIC_LABEL,
            depth: nf * log2(nf),
            depth_formula: "n * log2(n)",
            toffoli: nf * log2(nf),
            ancillas: n as f64,
            ancilla_adjustment: 0.0,
            ancilla_note: "direct membership uses n ancillas",
        },
        EncodingKind::Compact => {
            let baseline = ceil_log2(k + 1) as f64;
            let adjustment = if parallel { kf / 2.0 - 2.0 * log2(kf + 1.0) } else { 0.0 };
            MembershipCost {
                encoding: kind.to_string(),
                n,
                k,
                e,
                parallel,
                label: ASYMPTOTIC_LABEL,
                depth: if parallel { ef * kf * log2(nf) } else { ef * kf * kf * log2(nf) },
                depth_formula: if parallel { "E * k * log2(n)" } else { "E * k^2 * log2(n)" },
                toffoli: ef * kf * kf * log2(nf),
                ancillas: baseline + adjustment.max(0.0),
                ancilla_adjustment: adjustment,
                ancilla_note: MEMBERSHIP_ANCILLA_NOTE,
            }
        }
    }
}

/// Cost report for a subcomponent projection at accuracy `eps`.
#[derive(Clone, Debug, Serialize)]
pub struct ProjectionEstimate {
    pub encoding: String,
    pub n: usize,
    pub k: usize,
    pub kappa: f64,
    pub eps: f64,
    /// Unit-constant evaluation of the degree class
    /// `kappa^2 * log2((n kappa)^2 / (alpha^2 eps))`.
    pub degree_proxy: f64,
    /// Boundary degree of the certified polynomial actually constructed.
    pub degree_measured: usize,
    /// Downstream filter costs at the measured degree (lower path,
    /// worst-case edge count).
    pub filter: ResourceEstimate,
    /// `d * n_k * D` with worst-case `n_k = C(n, k+1)` and the adjacency
    /// bound `D = (k+2)(n-k-1)`.
    pub classical_flops_proxy: f64,
    pub classical_formula: &'static str,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Degree and query costs for projecting onto a Hodge subcomponent.
///
/// Requires `kappa > 1`; the measured degree comes from the certified
/// polynomial construction, the proxy from the unit-constant class, and the
/// classical comparison line uses worst-case simplex counts.
pub fn estimate_projection(
    n: usize,
    k: usize,
    kappa: f64,
    eps: f64,
    kind: EncodingKind,
) -> Result<ProjectionEstimate> {
    let proj = qsp_poly::projection_poly(kappa, eps)?;
    let alpha_sq = match kind {
        EncodingKind::Direct => n as f64,
        EncodingKind::Compact => ((n + 1) * (k + 1)) as f64,
    };
    let nf = n as f64;
    let degree_proxy = kappa * kappa * log2((nf * kappa).powi(2) / (alpha_sq * eps));
    let e_worst = n * (n - 1) / 2;
    let filter = estimate_filter(n, k, proj.degree_laplacian, 0, kind, e_worst, 0.0);
    let n_k = binomial(n, k + 1);
    let simplex_degree = ((k + 2) * n.saturating_sub(k + 1)) as f64;
    Ok(ProjectionEstimate {
        encoding: kind.to_string(),
        n,
        k,
        kappa,
        eps,
        degree_proxy,
        degree_measured: proj.degree_boundary,
        filter,
        classical_flops_proxy: proj.degree_laplacian as f64 * n_k * simplex_degree,
        classical_formula: "d * n_k * D, n_k = C(n, k+1), D = (k+2)(n-k-1)",
    })
}
