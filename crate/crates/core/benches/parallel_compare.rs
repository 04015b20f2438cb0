//! Wall-time comparison of the rayon-backed inner loops against the same
//! work pinned to a single worker thread.
//!
//! Both columns execute the identical code path; the single-thread column
//! installs a one-worker pool, so the gap is pure scheduling gain. Building
//! with `--no-default-features` swaps the loops for plain sequential ones;
//! rerun the bench there to measure that variant instead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hodgeq_core::complex::{CliqueComplex, Graph, Vertex};
use hodgeq_core::encoding::EncodingKind;
use hodgeq_core::homology;
use hodgeq_core::qsp_poly::{Parity, ParityPolynomial};
use hodgeq_core::qsvt::rescale_alphas;
use hodgeq_core::spectral_filter::{self, Convention, FilterSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const SUP_GRID: usize = 1 << 16;

fn dense_even_polynomial(degree: usize) -> ParityPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe7c);
    let mut cheb = vec![0.0; degree + 1];
    for j in (0..=degree).step_by(2) {
        cheb[j] = rng.random::<f64>() * 2.0 - 1.0;
    }
    ParityPolynomial::from_chebyshev(Parity::Even, cheb).expect("even indices only")
}

fn edge_workload() -> (DMatrix<f64>, DMatrix<f64>, FilterSpec, (f64, f64)) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf11e);
    let n = 8usize;
    let mut g = Graph::new(n);
    for a in 1..=n as Vertex {
        for b in (a + 1)..=n as Vertex {
            if rng.random::<f64>() < 0.6 {
                g.add_edge(a, b).expect("valid edge");
            }
        }
    }
    let complex = CliqueComplex::build(g, 2);
    let l_lower = homology::lower_laplacian(&complex, 1);
    let l_upper = homology::upper_laplacian(&complex, 1);
    let spec = FilterSpec {
        h0: 0.3,
        lower: vec![0.2, -0.1, 0.05],
        upper: vec![0.15, 0.1],
        convention: Convention::Rescaled,
    };
    let alphas = rescale_alphas(EncodingKind::Direct, n, 1);
    (l_lower, l_upper, spec, alphas)
}

fn in_single_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool")
        .install(f)
}

fn bench_sup_norm(c: &mut Criterion) {
    let poly = dense_even_polynomial(48);
    let mut group = c.benchmark_group("sup_norm_grid_certification");
    group.bench_with_input(BenchmarkId::new("rayon_pool", SUP_GRID), &poly, |b, p| {
        b.iter(|| black_box(p.sup_norm(SUP_GRID)))
    });
    group.bench_with_input(BenchmarkId::new("single_thread", SUP_GRID), &poly, |b, p| {
        b.iter(|| in_single_thread_pool(|| black_box(p.sup_norm(SUP_GRID))))
    });
    group.finish();
}

fn bench_filter_matrix(c: &mut Criterion) {
    let (l_lower, l_upper, spec, alphas) = edge_workload();
    let edges = l_lower.nrows();
    let mut group = c.benchmark_group("filter_matrix_columns");
    group.bench_with_input(BenchmarkId::new("rayon_pool", edges), &(), |b, _| {
        b.iter(|| {
            black_box(
                spectral_filter::filter_matrix(&spec, &l_lower, &l_upper, Some(alphas))
                    .expect("valid spec"),
            )
        })
    });
    group.bench_with_input(BenchmarkId::new("single_thread", edges), &(), |b, _| {
        b.iter(|| {
            in_single_thread_pool(|| {
                black_box(
                    spectral_filter::filter_matrix(&spec, &l_lower, &l_upper, Some(alphas))
                        .expect("valid spec"),
                )
            })
        })
    });
    group.finish();
}

criterion_group!(benches, bench_sup_norm, bench_filter_matrix);
criterion_main!(benches);
