mod common;

use common::{dense_exact, dense_iid, grid_maximize, mutual_information, orbits, singletons};
use delcap_core::kernel::{build_exact_kernel, build_iid_kernel};
use delcap_core::solver::{capacity_bracket_with, AlternatingMaximizer};
use delcap_core::{capacity_bracket, capacity_cn, capacity_cnk, Exec, SolveOptions, Symmetry};

const TOL: f64 = 1e-9;

// Grid-search oracle values (bits per input bit), frozen from
// `grid_maximize` at spacing 1e-3 with local refinement.
const C_2_1: f64 = 0.5;
const C_2_HALF: f64 = 0.415241011861;
const C_3_HALF: f64 = 0.365269059079;
const C_3_1: f64 = 1.0 / 3.0;
const C_3_2: f64 = 0.489927331252;

fn opts(symmetry: Symmetry) -> SolveOptions {
    SolveOptions { symmetry, ..SolveOptions::default() }
}

#[test]
fn frozen_values_match_the_live_oracle() {
    assert!((grid_maximize(&dense_exact(2, 1), &singletons(4), 40) / 2.0 - C_2_1).abs() < 1e-9);
    assert!((grid_maximize(&dense_iid(2, 0.5), &singletons(4), 40) / 2.0 - C_2_HALF).abs() < 1e-9);
    assert!((grid_maximize(&dense_iid(3, 0.5), &orbits(3), 200) / 3.0 - C_3_HALF).abs() < 1e-9);
    assert!((grid_maximize(&dense_exact(3, 2), &orbits(3), 200) / 3.0 - C_3_2).abs() < 1e-9);
}

#[test]
fn small_channels_agree_with_the_oracle() {
    let o = SolveOptions::default();
    let cases = [
        (capacity_cnk(2, 1, &o).unwrap(), C_2_1),
        (capacity_cn(2, 0.5, &o).unwrap(), C_2_HALF),
        (capacity_cn(3, 0.5, &o).unwrap(), C_3_HALF),
        (capacity_cnk(3, 1, &o).unwrap(), C_3_1),
        (capacity_cnk(3, 2, &o).unwrap(), C_3_2),
    ];
    for (b, expect) in cases {
        assert!(b.converged);
        assert!(b.width() <= TOL);
        assert!(b.contains_normalized(expect, 1e-10), "{b:?} vs {expect}");
    }
}

#[test]
fn erasure_channel_for_all_d() {
    for i in 0..=10 {
        let d = i as f64 / 10.0;
        let b = capacity_cn(1, d, &SolveOptions::default()).unwrap();
        assert!(b.converged);
        assert!(b.width() <= TOL);
        assert!(b.contains_normalized(1.0 - d, 0.0), "d={d}: {b:?}");
    }
}

#[test]
fn certificates_hold_along_the_trajectory() {
    // the true value is known here, so every certificate can be checked
    let w = dense_iid(3, 0.5);
    let k = build_iid_kernel(3, 0.5).unwrap();
    let mut m = AlternatingMaximizer::new(&k, false, Exec::Serial).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..2000 {
        let c = m.evaluate();
        assert!(c.lower <= 3.0 * C_3_HALF + 1e-9 && 3.0 * C_3_HALF <= c.upper + 1e-9);
        assert!(c.lower >= prev - 1e-12);
        assert!((c.lower - mutual_information(&w, &m.input_distribution().weights)).abs() < 1e-10);
        prev = c.lower;
        m.update();
    }
}

#[test]
fn erasure_sandwich_holds_for_computed_brackets() {
    for n in 1..=8 {
        for i in 1..10 {
            let d = i as f64 / 10.0;
            let b = capacity_cn(n, d, &SolveOptions { max_iters: 20_000, ..SolveOptions::default() }).unwrap();
            assert!(b.normalized_upper >= (1.0 - d.powi(n as i32)) / n as f64 - TOL);
            // equality at n = 1: W_1 is the erasure channel itself
            assert!(b.normalized_lower <= 1.0 - d + TOL);
        }
    }
}

#[test]
fn exact_capacity_is_monotone_in_k() {
    for n in 1..=8 {
        let b: Vec<_> = (0..=n).map(|k| capacity_cnk(n, k, &SolveOptions::default()).unwrap()).collect();
        for k1 in 0..=n {
            for k2 in 0..=k1 {
                assert!(b[k1].normalized_lower >= b[k2].normalized_lower - 2.0 * TOL, "n={n} k1={k1} k2={k2}");
            }
        }
    }
}

#[test]
fn subadditivity_small() {
    let o = SolveOptions::default();
    for d in [0.2, 0.5, 0.8] {
        let c: Vec<_> = (1..=6).map(|n| capacity_cn(n, d, &o).unwrap()).collect();
        for n in 1..=5 {
            for m in 1..=6 - n {
                let lhs = (n + m) as f64 * c[n + m - 1].normalized_lower;
                let rhs = n as f64 * c[n - 1].normalized_upper + m as f64 * c[m - 1].normalized_upper;
                assert!(lhs <= rhs + 3.0 * TOL, "d={d} n={n} m={m}");
            }
        }
    }
}

#[test]
fn symmetry_reduction_is_equivalent() {
    for n in 2..=8 {
        for d in [0.3, 0.6] {
            let a = capacity_cn(n, d, &opts(Symmetry::Off)).unwrap();
            let b = capacity_cn(n, d, &opts(Symmetry::On)).unwrap();
            assert!((a.normalized_lower - b.normalized_lower).abs() <= 2.0 * TOL);
            assert!((a.normalized_upper - b.normalized_upper).abs() <= 2.0 * TOL);
        }
        let k = n / 2;
        let a = capacity_cnk(n, k, &opts(Symmetry::Off)).unwrap();
        let b = capacity_cnk(n, k, &opts(Symmetry::On)).unwrap();
        assert!((a.normalized_lower - b.normalized_lower).abs() <= 2.0 * TOL);
    }
}

#[test]
fn thread_count_does_not_change_brackets() {
    let k = build_exact_kernel(9, 5).unwrap();
    let serial = capacity_bracket_with(&k, TOL, 5000, true, Exec::Serial).unwrap();
    let pool = rayon_pool(4);
    let parallel = pool.install(|| capacity_bracket_with(&k, TOL, 5000, true, Exec::Parallel).unwrap());
    assert_eq!(serial, parallel);
    assert_eq!(serial, capacity_bracket(&k, TOL, 5000, true).unwrap());
}

fn rayon_pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}
