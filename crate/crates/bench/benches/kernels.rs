//! Benchmarks for the numerical kernels on the hot paths: Bessel evaluations
//! (cusp expansion fits evaluate K₀/K₁ thousands of times per fit), the
//! Lobachevsky function (volume normalization), Gauss–Legendre node
//! generation, conjugate-gradient solves (the harmonic representative), and
//! Smith normal form (homology of the coarse meshes).

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use cuspnorm::exact::{mat_from_i64, smith_diagonal};
use cuspnorm::sparse::{conjugate_gradient, CgOptions, Triplets};
use cuspnorm::{bessel, lobachevsky, quadrature};

fn bench_bessel(c: &mut Criterion) {
    c.bench_function("bessel_k1_series_branch", |b| {
        b.iter(|| bessel::k1(black_box(1.3)).unwrap())
    });
    c.bench_function("bessel_k1_chebyshev_branch", |b| {
        b.iter(|| bessel::k1(black_box(7.9)).unwrap())
    });
}

fn bench_lobachevsky(c: &mut Criterion) {
    c.bench_function("lobachevsky", |b| {
        b.iter(|| lobachevsky::lobachevsky(black_box(0.87)))
    });
}

fn bench_quadrature(c: &mut Criterion) {
    c.bench_function("gauss_legendre_32", |b| {
        b.iter(|| quadrature::gauss_legendre(black_box(32)))
    });
}

fn bench_cg(c: &mut Criterion) {
    // 2D grid Laplacian + identity: the same sparsity energy profile as the
    // reduced Hodge systems.
    let n = 40usize;
    let idx = |i: usize, j: usize| i * n + j;
    let mut t = Triplets::new(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            t.push(idx(i, j), idx(i, j), 5.0);
            if i + 1 < n {
                t.push(idx(i, j), idx(i + 1, j), -1.0);
                t.push(idx(i + 1, j), idx(i, j), -1.0);
            }
            if j + 1 < n {
                t.push(idx(i, j), idx(i, j + 1), -1.0);
                t.push(idx(i, j + 1), idx(i, j), -1.0);
            }
        }
    }
    let a = t.to_csr();
    let b_vec: Vec<f64> = (0..n * n).map(|k| ((k as f64) * 0.01).sin()).collect();
    c.bench_function("cg_grid_1600", |b| {
        b.iter(|| conjugate_gradient(black_box(&a), black_box(&b_vec), &CgOptions::default()))
    });
}

fn bench_snf(c: &mut Criterion) {
    let m = mat_from_i64(&[
        &[2, 4, 4, 8, 1, 0],
        &[-6, 6, 12, 0, 0, 3],
        &[10, -4, -16, 6, 2, -1],
        &[4, 8, 8, 16, -5, 7],
        &[0, 1, -1, 1, 9, 2],
    ]);
    c.bench_function("smith_diagonal_5x6", |b| {
        b.iter(|| smith_diagonal(black_box(&m)))
    });
}

criterion_group!(
    kernels,
    bench_bessel,
    bench_lobachevsky,
    bench_quadrature,
    bench_cg,
    bench_snf
);
criterion_main!(kernels);
