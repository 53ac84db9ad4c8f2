mod common;

use common::*;
use freechaos_core::freeness::{
    contraction_norm_sum, covariance_of_squares, fourth_moment_identity,
};
use freechaos_core::{ChaosElement, Kernel, Kind};
use proptest::prelude::*;

/// Random element with a scalar and arbitrary parts of orders `1..=max_order`.
fn element(kind: Kind, cells: usize, max_order: usize) -> impl Strategy<Value = ChaosElement> {
    let parts: Vec<_> = (1..=max_order).map(|n| raw_kernel(cells, n)).collect();
    (-1.0f64..1.0, parts)
        .prop_map(move |(c, ks)| ChaosElement::from_parts(kind, grid(1.0, cells), c, ks).unwrap())
}

fn unit_variance(x: &ChaosElement) -> ChaosElement {
    let centered = x.centered();
    let v = centered.phi_product(&centered).unwrap();
    centered.scaled(1.0 / v.sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn isometry_matches_product(
        (x, y) in (kind(), 1usize..=3, 1usize..=3, 1usize..=3)
            .prop_flat_map(|(k, c, a, b)| (element(k, c, a), element(k, c, b)))
    ) {
        let direct = x.multiply(&y).unwrap().phi();
        prop_assert!(close(direct, x.phi_product(&y).unwrap(), 1e-9));
    }

    #[test]
    fn multiplication_is_associative(
        (x, y, z) in (kind(), 1usize..=3).prop_flat_map(|(k, c)| (element(k, c, 2), element(k, c, 1), element(k, c, 2)))
    ) {
        let left = x.multiply(&y).unwrap().multiply(&z).unwrap();
        let right = x.multiply(&y.multiply(&z).unwrap()).unwrap();
        let diff = ChaosElement::combine(1.0, &left, -1.0, &right).unwrap();
        prop_assert!(diff.norm_sq().sqrt() <= 1e-9 * left.norm_sq().sqrt().max(1.0));
    }

    #[test]
    fn traciality(
        (x, y, z) in (kind(), 1usize..=3).prop_flat_map(|(k, c)| {
            (self_adjoint_element(k, c, 2), self_adjoint_element(k, c, 2), self_adjoint_element(k, c, 2))
        })
    ) {
        let xyz = x.multiply(&y).unwrap().phi_product(&z).unwrap();
        let zxy = z.multiply(&x).unwrap().phi_product(&y).unwrap();
        prop_assert!(close(xyz, zxy, 1e-9));
        prop_assert!(close(x.phi_product(&y).unwrap(), y.phi_product(&x).unwrap(), 1e-12));
    }

    #[test]
    fn positivity(x in (kind(), 1usize..=3).prop_flat_map(|(k, c)| self_adjoint_element(k, c, 2))) {
        let m2 = x.moment(2).unwrap();
        let m4 = x.moment(4).unwrap();
        prop_assert!(m2 >= -1e-12);
        prop_assert!(m4 >= m2 * m2 - 1e-9 * m4.abs().max(1.0));
    }

    #[test]
    fn covariance_two_paths((k, (f, g)) in (kind(), symmetric_pair(3, 4))) {
        let (direct, expansion) = covariance_of_squares(k, &f, &g).unwrap();
        prop_assert!(close(direct, expansion, 1e-9), "{} vs {}", direct, expansion);
        prop_assert!(close(expansion, contraction_norm_sum(k, &f, &g).unwrap(), 1e-15));
    }

    #[test]
    fn fourth_moment_identity_holds(
        x in (kind(), 1usize..=3, 1usize..=3)
            .prop_flat_map(|(k, c, n)| mirror_kernel(c, n).prop_map(move |f| ChaosElement::integral(k, f)))
            .prop_filter("nonzero", |x| !x.is_zero())
    ) {
        let x = unit_variance(&embed(&x, 2));
        let (lhs, rhs) = fourth_moment_identity(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn time_shift_preserves_moments(x in (kind(), 2usize..=4).prop_flat_map(|(k, c)| self_adjoint_element(k, c, 2))) {
        let cells = x.grid().cells();
        let y = embed(&x, 2);
        let s = y.shift_in_time(cells as i64).unwrap();
        for k in 1..=4 {
            prop_assert!(close(y.moment(k).unwrap(), s.moment(k).unwrap(), 1e-9));
        }
        for (n, f) in y.parts() {
            let shifted = s.part(*n).unwrap();
            prop_assert_eq!(freechaos_core::nested_contract(f, shifted, 1).unwrap().max_abs(), 0.0);
        }
    }
}

#[test]
fn square_of_first_chaos_examples() {
    let g = grid(1.0, 1);
    let e = Kernel::from_dense(g, 1, vec![1.0]).unwrap();
    let w = ChaosElement::integral(Kind::Wigner, e.clone());
    let w2 = w.multiply(&w).unwrap();
    assert_eq!(w2.scalar(), 1.0);
    assert_eq!(w2.part(2).unwrap().to_dense_values(), vec![1.0]);
    assert!(w2.part(1).is_none());
    let p = ChaosElement::integral(Kind::FreePoisson, e);
    let p2 = p.multiply(&p).unwrap();
    assert_eq!(p2.part(1).unwrap().to_dense_values(), vec![1.0]);
    assert_eq!(p2.scalar(), 1.0);
}

#[test]
fn diagonal_sequence_fourth_moment() {
    for k in [2usize, 4, 8] {
        let f = freechaos_core::catalog::diagonal_sequence(k).unwrap();
        let x = ChaosElement::integral(Kind::Wigner, f);
        assert!((x.moment(4).unwrap() - (2.0 + 1.0 / k as f64)).abs() < 1e-9);
    }
}
