use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use resonance::dynamics::evolve_survival;
use resonance::feshbach::{lead_self_energy, solve_nonlinear_eig};
use resonance::poles::find_poles;
use resonance::series::symmetric_grid;
use resonance::transfer::transfer_matrix;
use resonance::{Branch, LatticeModel, Potential1D, SearchWindow, Segment};

fn staircase(n: usize) -> Potential1D {
    let w = 2.0 / n as f64;
    let segments = (0..n)
        .map(|i| Segment::new(-1.0 + w * i as f64, -1.0 + w * (i + 1) as f64, (i as f64 * 0.7).sin() * 3.0))
        .collect();
    Potential1D::new(segments).unwrap()
}

fn transfer(c: &mut Criterion) {
    let mut g = c.benchmark_group("transfer_matrix");
    for n in [1, 16, 256] {
        let p = staircase(n);
        g.bench_function(format!("{n} pieces"), |b| {
            b.iter(|| transfer_matrix(black_box(&p), Complex64::new(1.3, -0.2)).unwrap())
        });
    }
    g.finish();
}

fn poles(c: &mut Criterion) {
    let p = Potential1D::square_well(5.0, 1.0).unwrap();
    let window = SearchWindow::new((-6.0, 6.0), (-2.0, 4.0));
    c.bench_function("find_poles square well V0=5", |b| b.iter(|| find_poles(black_box(&p), &window).unwrap()));
}

fn feshbach(c: &mut Criterion) {
    c.bench_function("lead_self_energy", |b| {
        b.iter(|| lead_self_energy(black_box(Complex64::new(0.7, -0.3)), 1.0, Branch::Retarded).unwrap())
    });
    let m = LatticeModel::double_dot();
    c.bench_function("solve_nonlinear_eig double-dot", |b| {
        b.iter(|| solve_nonlinear_eig(&m, Branch::Retarded, black_box(Complex64::new(1.0, -0.1))).unwrap())
    });
}

fn survival(c: &mut Criterion) {
    let m = LatticeModel::double_dot();
    let grid = symmetric_grid(5.0, 200);
    let mut g = c.benchmark_group("survival");
    g.sample_size(10);
    g.bench_function("401 sites, 401 times", |b| b.iter(|| evolve_survival(&m, 401, black_box(&grid)).unwrap()));
    g.finish();
}

criterion_group!(benches, transfer, poles, feshbach, survival);
criterion_main!(benches);
