mod common;

use common::*;
use freechaos_core::catalog::interval;
use freechaos_core::oracles::{
    catalan, enumerate_nc, free_poisson_moment, moments_from_free_cumulants, semicircle_moment,
};
use freechaos_core::{ChaosElement, Kind};
use proptest::prelude::*;

/// Moments from free cumulants through the recursion
/// `m_n = sum_s kappa_s sum_{i_1 + ... + i_s = n - s} m_{i_1} ... m_{i_s}`,
/// independent of partition enumeration.
fn recursive_moments(kappa: &[f64], n: usize) -> Vec<f64> {
    let mut m = vec![1.0];
    for len in 1..=n {
        let mut total = 0.0;
        for s in 1..=len {
            total += kappa[s - 1] * compositions_product(&m, len - s, s);
        }
        m.push(total);
    }
    m
}

// sum over (i_1..i_s) with i_1 + ... + i_s = rest of the product of m_{i_j}
fn compositions_product(m: &[f64], rest: usize, parts: usize) -> f64 {
    if parts == 0 {
        return if rest == 0 { 1.0 } else { 0.0 };
    }
    (0..=rest)
        .map(|i| m[i] * compositions_product(m, rest - i, parts - 1))
        .sum()
}

/// Catalan numbers by counting Dyck paths with a dynamic program.
fn dyck_paths(k: usize) -> u128 {
    let mut ways = vec![0u128; 2 * k + 2];
    ways[0] = 1;
    for _ in 0..2 * k {
        let mut next = vec![0u128; 2 * k + 2];
        for h in 0..=2 * k {
            if ways[h] == 0 {
                continue;
            }
            next[h + 1] += ways[h];
            if h > 0 {
                next[h - 1] += ways[h];
            }
        }
        ways = next;
    }
    ways[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cumulant_transform_matches_recursion(kappa in proptest::collection::vec(-1.0f64..1.0, 8)) {
        let want = recursive_moments(&kappa, 8);
        for (n, &w) in want.iter().enumerate().take(9) {
            let got = moments_from_free_cumulants(&kappa, n).unwrap();
            prop_assert!(close(got, w, 1e-12), "n={}", n);
        }
    }

    #[test]
    fn cumulant_transform_is_linear_in_each_cumulant(
        kappa in proptest::collection::vec(-1.0f64..1.0, 6),
        j in 0usize..6,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let at = |v: f64| {
            let mut k = kappa.clone();
            k[j] = v;
            moments_from_free_cumulants(&k, 6).unwrap()
        };
        // a single cumulant enters a polynomial; linear only when it appears once per
        // partition, which holds for kappa_j with j > n/2
        if j >= 3 {
            prop_assert!(close(at(a + b) - at(0.0), (at(a) - at(0.0)) + (at(b) - at(0.0)), 1e-9));
        }
    }
}

#[test]
fn catalan_matches_dyck_paths() {
    for k in 0..=30 {
        assert_eq!(catalan(k as u32).unwrap(), dyck_paths(k));
    }
}

#[test]
fn nc_counts_are_catalan() {
    for n in 0..=10 {
        let all = enumerate_nc(n).unwrap();
        assert_eq!(all.len() as u128, catalan(n as u32).unwrap());
        assert!(all.iter().all(|p| p.is_non_crossing()));
    }
}

#[test]
fn semicircle_moments_from_engine() {
    for t in [0.5f64, 1.0, 2.0] {
        let g = grid(2.0, 4);
        let x = ChaosElement::integral(Kind::Wigner, interval(g, 0.0, t, 1.0).unwrap());
        for k in 1..=12 {
            let want = semicircle_moment(t, k).unwrap();
            assert!(close(x.moment(k).unwrap(), want, 1e-9), "t={t} k={k}");
        }
    }
}

#[test]
fn free_poisson_moments_from_engine() {
    for t in [0.5f64, 1.0, 2.0] {
        let g = grid(2.0, 4);
        let x = ChaosElement::integral(Kind::FreePoisson, interval(g, 0.0, t, 1.0).unwrap());
        for n in 1..=8 {
            let want = free_poisson_moment(t, n as usize, true).unwrap();
            assert!(close(x.moment(n).unwrap(), want, 1e-9), "t={t} n={n}");
        }
        let (m3, m4) = (x.moment(3).unwrap(), x.moment(4).unwrap());
        assert!((m4 - 2.0 * m3 - (2.0 * t * t - t)).abs() < 1e-9);
    }
}
