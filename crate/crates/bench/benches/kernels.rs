use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qsync::{apply_word, trace_distance, ChannelFamilyParam, ComplexMat3, DensityMatrix, Word};

fn sample_hermitian() -> ComplexMat3 {
    let m = ComplexMat3::from_real([[0.3, 0.1, -0.2], [0.1, 0.5, 0.05], [-0.2, 0.05, 0.2]]).unwrap();
    m + m.adjoint()
}

fn eigenvalues(c: &mut Criterion) {
    let m = sample_hermitian();
    c.bench_function("hermitian_eigenvalues", |b| b.iter(|| black_box(&m).hermitian_eigenvalues()));
    c.bench_function("hermitian_eigenvalues_jacobi", |b| {
        b.iter(|| black_box(&m).hermitian_eigenvalues_jacobi())
    });
}

fn channels(c: &mut Criterion) {
    let param = ChannelFamilyParam::new(16).unwrap();
    let word = Word::rotation_sandwich(16);
    let rho = DensityMatrix::basis(0);
    c.bench_function("apply_word_len18", |b| b.iter(|| apply_word(black_box(&word), &rho, param)));

    let sigma = DensityMatrix::maximally_mixed();
    c.bench_function("trace_distance", |b| b.iter(|| trace_distance(black_box(&rho), black_box(&sigma))));
}

criterion_group!(benches, eigenvalues, channels);
criterion_main!(benches);
