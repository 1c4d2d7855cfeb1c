use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use irate_core::{block_signal, find_irc, lz78_encode, spectral_rate, spectrum, BitRateSignal, Edge, Trace, TransitionSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_system(n: usize, p: f64, seed: u64) -> TransitionSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(p) || j == (i + 1) % n {
                edges.push(Edge::new(i, j, None));
            }
        }
    }
    let states = (0..n).map(|i| format!("q{i}")).collect();
    TransitionSystem::from_parts(states, 0, n - 1, edges).unwrap()
}

fn rates(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_rate");
    for n in [8, 64, 256] {
        let m = dense_system(n, 0.1, 1);
        group.throughput(Throughput::Elements(m.num_edges() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| spectral_rate(black_box(m))));
    }
    group.finish();

    let m = dense_system(12, 0.3, 2);
    c.bench_function("find_irc/12", |b| b.iter(|| find_irc(black_box(&m), 0.79)));
}

fn traces(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tokens: Vec<String> = (0..100_000).map(|_| format!("op{}", rng.gen_range(0..64))).collect();
    let trace = Trace::from_tokens(&tokens);
    let mut group = c.benchmark_group("lz78_encode");
    group.throughput(Throughput::Elements(trace.len() as u64));
    group.bench_function("100k", |b| b.iter(|| lz78_encode(black_box(&trace))));
    group.finish();

    let enc = lz78_encode(&trace);
    c.bench_function("block_signal/1000", |b| b.iter(|| block_signal(black_box(&enc.per_symbol_bits), 1000)));
}

fn spectra(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut group = c.benchmark_group("spectrum");
    for n in [1000, 4096] {
        let x = BitRateSignal::new((0..n).map(|_| rng.gen_range(0.0..8.0)).collect(), 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| spectrum(black_box(x), 5)));
    }
    group.finish();
}

criterion_group!(benches, rates, traces, spectra);
criterion_main!(benches);
