mod common;

use common::*;
use freechaos_core::bichaos::{bicontract, gradient_pairing, gradient_pairing_by_cells};
use freechaos_core::contraction::is_null;
use freechaos_core::{nested_contract, BiChaosElement, BiKernel, Kernel};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gradient_two_paths((f, g) in symmetric_pair(3, 3)) {
        let closed = gradient_pairing(&f, &g).unwrap().phi2_norm_sq();
        let cells = gradient_pairing_by_cells(&f, &g).unwrap().phi2_norm_sq();
        prop_assert!(close(closed, cells, 1e-9), "{} vs {}", closed, cells);
    }

    #[test]
    fn gradient_vanishes_with_contractions((f, g) in symmetric_pair(3, 3)) {
        let norm = gradient_pairing(&f, &g).unwrap().phi2_norm_sq();
        let all_null = (1..=f.order().min(g.order()))
            .all(|u| is_null(&nested_contract(&f, &g, u).unwrap()));
        prop_assert_eq!(norm <= 1e-12, all_null);
    }

    #[test]
    fn bicontraction_norm_depends_on_total(
        (f, g, split) in (1usize..=3, 2usize..=3, 2usize..=3)
            .prop_flat_map(|(c, n, m)| (symmetric_kernel(c, n), symmetric_kernel(c, m), 1..n.min(m)))
    ) {
        // split both kernels at the same left order; every (p, r) with p + r = u has
        // the norm of the u-th nested contraction
        let fb = BiKernel::new(f.clone(), split, f.order() - split).unwrap();
        let gb = BiKernel::new(g.clone(), split, g.order() - split).unwrap();
        for p in 0..=split {
            for r in 0..=f.order().min(g.order()) - split {
                let c = bicontract(&fb, &gb, p, r).unwrap();
                let want = nested_contract(&f, &g, p + r).unwrap().norm_sq();
                prop_assert!(close(c.norm_sq(), want, 1e-9));
            }
        }
    }

    #[test]
    fn bisometry_orthogonality(
        (a, b) in (1usize..=3).prop_flat_map(|c| (raw_kernel(c, 2), raw_kernel(c, 2)))
    ) {
        let mut x = BiChaosElement::zero(*a.grid());
        x.add_part(BiKernel::new(a.clone(), 1, 1).unwrap(), 1.0).unwrap();
        x.add_part(BiKernel::new(b.clone(), 2, 0).unwrap(), 1.0).unwrap();
        let want = a.norm_sq() + b.norm_sq();
        prop_assert!(close(x.phi2_norm_sq(), want, 1e-12));
    }
}

#[test]
fn full_bicontraction_is_squared_norm() {
    let g = grid(1.0, 2);
    let f = Kernel::from_dense(g, 3, (0..8).map(|i| i as f64).collect())
        .unwrap()
        .symmetrize()
        .unwrap();
    let fb = BiKernel::new(f.clone(), 2, 1).unwrap();
    let c = bicontract(&fb, &fb, 2, 1).unwrap();
    assert_eq!(c.split(), (0, 0));
    assert!((c.kernel().as_scalar().unwrap() - f.norm_sq()).abs() < 1e-12);
}

#[test]
fn sharp_unit_is_neutral() {
    let g = grid(1.0, 2);
    let f = Kernel::from_dense(g, 2, vec![1.0, 2.0, -1.0, 0.5]).unwrap();
    let x = BiChaosElement::bi_integral(BiKernel::new(f, 1, 1).unwrap());
    let u = BiChaosElement::unit(g);
    assert_eq!(x.sharp_multiply(&u).unwrap(), x);
    assert_eq!(u.sharp_multiply(&x).unwrap(), x);
}

#[test]
fn single_unit_part_has_unit_norm() {
    let g = grid(1.0, 1);
    let e = Kernel::from_dense(g, 1, vec![1.0]).unwrap();
    let x = BiChaosElement::bi_integral(BiKernel::from_pair(&e, &e).unwrap());
    assert_eq!(x.phi2_norm_sq(), 1.0);
    assert_eq!(BiChaosElement::zero(g).phi2_norm_sq(), 0.0);
}
