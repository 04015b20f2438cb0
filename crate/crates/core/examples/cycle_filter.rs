//! Decomposes an edge signal on the 4-cycle and pushes it through the
//! simulated identity filter. Mirrors the README walkthrough.

use hodgeq_core::complex::{CliqueComplex, Graph};
use hodgeq_core::encoding::EncodingKind;
use hodgeq_core::spectral_filter::FilterSpec;
use hodgeq_core::{homology, qsvt, Error};
use nalgebra::DVector;

fn main() -> Result<(), Error> {
    let g = Graph::from_edges(4, &[(1, 2), (2, 3), (3, 4), (1, 4)])?;
    let complex = CliqueComplex::build(g, 2);

    let signal = DVector::from_vec(vec![1.0, 0.0, 0.5, 0.0]);
    let parts = homology::decompose(&complex, 1, &signal);
    println!(
        "gradient {:.4}  curl {:.4}  harmonic {:.4}",
        parts.gradient.norm(),
        parts.curl.norm(),
        parts.harmonic.norm()
    );

    let report = qsvt::run_pipeline(
        &complex,
        1,
        EncodingKind::Direct,
        &FilterSpec::identity(),
        &signal,
    )?;
    println!(
        "identity run: p_success {:.6}, l2 distance {:.2e}",
        report.p_success, report.l2_distance
    );
    assert!(report.l2_distance < 1e-10);
    Ok(())
}
