//! Simplicial spectral filters: classical evaluation, frequency responses,
//! design helpers, and the admissibility checks a quantum realization adds.
//!
//! A filter is a constant term plus two power series, one in the lower and
//! one in the upper Hodge Laplacian:
//!
//! ```text
//! H = h0 I + sum_i lower[i-1] (L_lower)^i + sum_i upper[i-1] (L_upper)^i
//! ```
//!
//! Under the `rescaled` convention the Laplacians are divided by the squares
//! of the encoding rescaling factors before being raised to powers; this is
//! the form a quantum circuit realizes, and it additionally requires
//! `h0` in `[0, 1]` and both frequency responses bounded by 1 on `[0, 1]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::qsp_poly;
use crate::{par, Error, Result};

/// Grid size used when certifying response bounds.
pub const RESPONSE_GRID: usize = 4096;

/// Slack allowed on the certified response bounds.
pub const RESPONSE_TOL: f64 = 1e-9;

/// Whether coefficients refer to raw Laplacians or rescaled ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Raw,
    Rescaled,
}

/// Coefficients of a simplicial filter.
///
/// `lower[i]` multiplies the `(i+1)`-th power of the lower Laplacian, and
/// likewise for `upper`; the constant term is `h0`. Serialized as plain JSON:
/// `{"h0": .., "lower": [..], "upper": [..], "convention": "raw"|"rescaled"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub h0: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub convention: Convention,
}

impl FilterSpec {
    /// The identity filter.
    pub fn identity() -> Self {
        FilterSpec { h0: 1.0, lower: Vec::new(), upper: Vec::new(), convention: Convention::Rescaled }
    }

    /// Degrees `(d_lower, d_upper)` of the two series.
    pub fn degrees(&self) -> (usize, usize) {
        (self.lower.len(), self.upper.len())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: FilterSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Rejects non-finite coefficients.
    pub fn validate(&self) -> Result<()> {
        let all = std::iter::once(self.h0).chain(self.lower.iter().copied()).chain(self.upper.iter().copied());
        for c in all {
            if !c.is_finite() {
                return Err(Error::FilterSpec(format!("non-finite coefficient {c}")));
            }
        }
        Ok(())
    }

    /// Frequency response along the lower spectrum: the scalar the filter
    /// multiplies an eigenvector of the lower Laplacian with eigenvalue
    /// `lam` by (assuming it lies in the kernel of the upper Laplacian).
    pub fn response_lower(&self, lam: f64) -> f64 {
        horner_tail(self.h0, &self.lower, lam)
    }

    /// Frequency response along the upper spectrum.
    pub fn response_upper(&self, lam: f64) -> f64 {
        horner_tail(self.h0, &self.upper, lam)
    }

    /// Response on harmonic vectors, which both series annihilate.
    pub fn response_harmonic(&self) -> f64 {
        self.h0
    }

    /// Certifies the constraints a quantum realization needs.
    ///
    /// Requires the `rescaled` convention, `h0` in `[0, 1]`, and both
    /// responses within `[-1, 1]` (up to [`RESPONSE_TOL`]) on a
    /// [`RESPONSE_GRID`]-point grid over `[0, 1]`. Returns the measured
    /// response extrema.
    pub fn check_rescaled(&self) -> Result<ResponseBounds> {
        self.validate()?;
        if self.convention != Convention::Rescaled {
            return Err(Error::FilterSpec(
                "quantum admissibility applies to the rescaled convention only".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.h0) {
            return Err(Error::FilterSpec(format!("h0 = {} is outside [0, 1]", self.h0)));
        }
        let sup = |coeffs: &Vec<f64>| -> f64 {
            let h0 = self.h0;
            let coeffs = coeffs.clone();
            par::max_over_indices(RESPONSE_GRID, move |i| {
                let lam = i as f64 / (RESPONSE_GRID - 1) as f64;
                horner_tail(h0, &coeffs, lam).abs()
            })
        };
        let bounds = ResponseBounds { sup_lower: sup(&self.lower), sup_upper: sup(&self.upper) };
        for (name, s) in [("lower", bounds.sup_lower), ("upper", bounds.sup_upper)] {
            if s > 1.0 + RESPONSE_TOL {
                return Err(Error::FilterSpec(format!(
                    "{name} response reaches {s:.6}, above the unit bound"
                )));
            }
        }
        Ok(bounds)
    }
}

/// Measured suprema of the two responses over `[0, 1]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResponseBounds {
    pub sup_lower: f64,
    pub sup_upper: f64,
}

// h0 + sum coeffs[i] * lam^(i+1), evaluated as lam * (...) Horner style
fn horner_tail(h0: f64, coeffs: &[f64], lam: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * lam + c;
    }
    h0 + lam * acc
}

/// Applies the filter to a chain by repeated matrix-vector products.
///
/// `rescale` must carry the `(alpha_k, alpha_{k+1})` factors when the spec
/// uses the rescaled convention and must be absent for the raw convention.
/// Powers of the Laplacians are never materialized: the `i`-th term reuses
/// the `(i-1)`-th matvec.
pub fn apply_filter(
    spec: &FilterSpec,
    l_lower: &DMatrix<f64>,
    l_upper: &DMatrix<f64>,
    rescale: Option<(f64, f64)>,
    signal: &DVector<f64>,
) -> Result<DVector<f64>> {
    spec.validate()?;
    let n = signal.len();
    for m in [l_lower, l_upper] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension { expected: n, got: m.nrows() });
        }
    }
    let (scale_l, scale_u) = match (spec.convention, rescale) {
        (Convention::Raw, None) => (1.0, 1.0),
        (Convention::Rescaled, Some((a_k, a_k1))) => (a_k * a_k, a_k1 * a_k1),
        (Convention::Raw, Some(_)) => {
            return Err(Error::FilterSpec("raw filters take no rescaling factors".into()))
        }
        (Convention::Rescaled, None) => {
            return Err(Error::FilterSpec("rescaled filters need rescaling factors".into()))
        }
    };
    let mut out = spec.h0 * signal;
    let mut power = signal.clone();
    for &c in &spec.lower {
        power = (l_lower * &power) / scale_l;
        out += c * &power;
    }
    power.copy_from(signal);
    for &c in &spec.upper {
        power = (l_upper * &power) / scale_u;
        out += c * &power;
    }
    Ok(out)
}

/// Materializes the filter as a dense matrix, one basis column at a time.
pub fn filter_matrix(
    spec: &FilterSpec,
    l_lower: &DMatrix<f64>,
    l_upper: &DMatrix<f64>,
    rescale: Option<(f64, f64)>,
) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let n = l_lower.nrows();
    let cols = par::map_indices(n, |j| {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        apply_filter(spec, l_lower, l_upper, rescale, &e).expect("validated above")
    });
    Ok(DMatrix::from_columns(&cols))
}

/// Chebyshev interpolant of `f` on `[a, b]`: coefficients `c_0..=c_degree`
/// in the basis `T_j` of the affinely mapped variable, computed by the
/// discrete cosine quadrature at the `degree + 1` Chebyshev-Gauss nodes.
pub fn chebyshev_interpolant(
    f: impl Fn(f64) -> f64,
    degree: usize,
    domain: (f64, f64),
) -> Vec<f64> {
    let m = degree + 1;
    let (a, b) = domain;
    let samples: Vec<f64> = (0..m)
        .map(|j| {
            let t = (std::f64::consts::PI * (j as f64 + 0.5) / m as f64).cos();
            f(0.5 * (a + b) + 0.5 * (b - a) * t)
        })
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

/// Evaluates a Chebyshev series on its domain by the Clenshaw recurrence.
pub fn chebyshev_eval(coeffs: &[f64], domain: (f64, f64), x: f64) -> f64 {
    let (a, b) = domain;
    let t = (2.0 * x - a - b) / (b - a);
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let next = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = next;
    }
    coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// Converts a Chebyshev series on `[a, b]` to plain power-basis coefficients
/// in the original variable.
///
/// The conversion is exact in exact arithmetic but numerically delicate past
/// degree roughly 40; filter design here stays well below that.
pub fn chebyshev_to_power(coeffs: &[f64], domain: (f64, f64)) -> Vec<f64> {
    let (a, b) = domain;
    if coeffs.is_empty() {
        return Vec::new();
    }
    let deg = coeffs.len() - 1;
    // power coefficients of the mapped variable t(x) = c0 + c1 x
    let c1 = 2.0 / (b - a);
    let c0 = -(a + b) / (b - a);
    let mul_t = |p: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; p.len() + 1];
        for (i, &v) in p.iter().enumerate() {
            out[i] += c0 * v;
            out[i + 1] += c1 * v;
        }
        out
    };
    let mut t_prev: Vec<f64> = vec![1.0];
    let mut t_curr: Vec<f64> = vec![c0, c1];
    let mut acc = vec![0.0; deg + 1];
    acc[0] += coeffs[0];
    if deg >= 1 {
        for (i, &v) in t_curr.iter().enumerate() {
            acc[i] += coeffs[1] * v;
        }
    }
    for k in 2..=deg {
        let mut next = mul_t(&t_curr);
        for v in next.iter_mut() {
            *v *= 2.0;
        }
        for (i, &v) in t_prev.iter().enumerate() {
            next[i] -= v;
        }
        for (i, &v) in next.iter().enumerate() {
            acc[i] += coeffs[k] * v;
        }
        t_prev = t_curr;
        t_curr = next;
    }
    acc
}

/// Designs a rescaled filter whose responses interpolate the two target
/// functions on `[0, 1]` at Chebyshev nodes.
///
/// The shared constant term is pinned to the lower interpolant's value at 0;
/// the upper series is shifted by a constant so both responses agree there
/// exactly, as the rescaled form requires.
pub fn design_rescaled(
    g_lower: impl Fn(f64) -> f64,
    g_upper: impl Fn(f64) -> f64,
    d_lower: usize,
    d_upper: usize,
) -> Result<FilterSpec> {
    let p_lower = chebyshev_to_power(&chebyshev_interpolant(g_lower, d_lower, (0.0, 1.0)), (0.0, 1.0));
    let p_upper = chebyshev_to_power(&chebyshev_interpolant(g_upper, d_upper, (0.0, 1.0)), (0.0, 1.0));
    let h0 = p_lower.first().copied().unwrap_or(0.0);
    let spec = FilterSpec {
        h0,
        lower: p_lower.get(1..).unwrap_or(&[]).to_vec(),
        upper: p_upper.get(1..).unwrap_or(&[]).to_vec(),
        convention: Convention::Rescaled,
    };
    spec.validate()?;
    Ok(spec)
}

/// A named filter together with the scale tying its output back to the
/// operator it approximates.
#[derive(Clone, Debug)]
pub struct BuiltinFilter {
    pub name: String,
    pub spec: FilterSpec,
    /// Multiply filtered amplitudes by this to approximate the target
    /// operator (the certified projection polynomials sit at `1/(2 kappa^2)`
    /// of the projector so their responses stay within the unit bound).
    pub scale_to_target: f64,
    /// Certified sup-norm error of the approximated operator, if any.
    pub certified_error: Option<f64>,
}

/// Builds one of the named filters.
///
/// `identity` needs no parameters. `gradient-proj` and `harmonic-proj` need
/// `kappa_lower` and `eps`; `curl-proj` needs `kappa_upper` and `eps`;
/// `harmonic-proj` needs both kappas. The minimum-norm potential route
/// (`lower-proj`) is odd in the boundary operator rather than polynomial in
/// a Laplacian, so it is not expressible as a `FilterSpec`; the pipeline
/// handles it separately.
pub fn builtin_filter(
    name: &str,
    kappa_lower: Option<f64>,
    kappa_upper: Option<f64>,
    eps: Option<f64>,
) -> Result<BuiltinFilter> {
    let need = |v: Option<f64>, what: &str| {
        v.ok_or_else(|| Error::FilterSpec(format!("builtin {name:?} needs {what}")))
    };
    match name {
        "identity" => Ok(BuiltinFilter {
            name: name.into(),
            spec: FilterSpec::identity(),
            scale_to_target: 1.0,
            certified_error: None,
        }),
        "gradient-proj" => {
            let kappa = need(kappa_lower, "--kappa for the lower Laplacian")?;
            let eps = need(eps, "--eps")?;
            let proj = qsp_poly::projection_poly(kappa, eps)?;
            Ok(BuiltinFilter {
                name: name.into(),
                spec: FilterSpec {
                    h0: 0.0,
                    lower: proj.laplacian_tail(),
                    upper: Vec::new(),
                    convention: Convention::Rescaled,
                },
                scale_to_target: 2.0 * kappa * kappa,
                certified_error: Some(proj.certified_error),
            })
        }
        "curl-proj" => {
            let kappa = need(kappa_upper, "--kappa for the upper Laplacian")?;
            let eps = need(eps, "--eps")?;
            let proj = qsp_poly::projection_poly(kappa, eps)?;
            Ok(BuiltinFilter {
                name: name.into(),
                spec: FilterSpec {
                    h0: 0.0,
                    lower: Vec::new(),
                    upper: proj.laplacian_tail(),
                    convention: Convention::Rescaled,
                },
                scale_to_target: 2.0 * kappa * kappa,
                certified_error: Some(proj.certified_error),
            })
        }
        "harmonic-proj" => {
            let k_l = need(kappa_lower, "--kappa for the lower Laplacian")?;
            let k_u = need(kappa_upper, "--kappa for the upper Laplacian")?;
            let eps = need(eps, "--eps")?;
            let proj_l = qsp_poly::projection_poly(k_l, eps)?;
            let proj_u = qsp_poly::projection_poly(k_u, eps)?;
            let scale = |tail: Vec<f64>, kappa: f64| -> Vec<f64> {
                tail.into_iter().map(|c| -2.0 * kappa * kappa * c).collect()
            };
            Ok(BuiltinFilter {
                name: name.into(),
                spec: FilterSpec {
                    h0: 1.0,
                    lower: scale(proj_l.laplacian_tail(), k_l),
                    upper: scale(proj_u.laplacian_tail(), k_u),
                    convention: Convention::Rescaled,
                },
                scale_to_target: 1.0,
                certified_error: Some(proj_l.certified_error + proj_u.certified_error),
            })
        }
        "lower-proj" => Err(Error::FilterSpec(
            "lower-proj is odd in the boundary operator; use the dedicated potential route".into(),
        )),
        other => Err(Error::FilterSpec(format!(
            "unknown builtin {other:?}; expected identity, gradient-proj, curl-proj, harmonic-proj or lower-proj"
        ))),
    }
}
