#![allow(dead_code)]

use freechaos_core::{ChaosElement, GridSpec, Kernel, Kind};
use proptest::prelude::*;

pub fn grid(t: f64, n: usize) -> GridSpec {
    GridSpec::new(t, n).unwrap()
}

pub fn raw_kernel(cells: usize, order: usize) -> impl Strategy<Value = Kernel> {
    let len = cells.pow(order as u32);
    proptest::collection::vec(-2.0f64..2.0, len)
        .prop_map(move |v| Kernel::from_dense(grid(1.0, cells), order, v).unwrap())
}

/// Random fully symmetric kernel of the given order on `T = 1`.
pub fn symmetric_kernel(cells: usize, order: usize) -> impl Strategy<Value = Kernel> {
    raw_kernel(cells, order).prop_map(|k| k.symmetrize().unwrap())
}

/// Random mirror-symmetric kernel of the given order on `T = 1`.
pub fn mirror_kernel(cells: usize, order: usize) -> impl Strategy<Value = Kernel> {
    raw_kernel(cells, order)
        .prop_map(|k| Kernel::linear_combination(0.5, &k, 0.5, &k.adjoint()).unwrap())
}

/// A pair of symmetric kernels of orders in `1..=max_order` on a shared grid.
pub fn symmetric_pair(
    max_order: usize,
    max_cells: usize,
) -> impl Strategy<Value = (Kernel, Kernel)> {
    (1..=max_cells, 1..=max_order, 1..=max_order)
        .prop_flat_map(|(c, n, m)| (symmetric_kernel(c, n), symmetric_kernel(c, m)))
}

/// A self-adjoint element with a scalar and mirror-symmetric parts of orders `1..=max_order`.
pub fn self_adjoint_element(
    kind: Kind,
    cells: usize,
    max_order: usize,
) -> impl Strategy<Value = ChaosElement> {
    let parts: Vec<_> = (1..=max_order).map(|n| mirror_kernel(cells, n)).collect();
    (-1.0f64..1.0, parts)
        .prop_map(move |(c, ks)| ChaosElement::from_parts(kind, grid(1.0, cells), c, ks).unwrap())
}

pub fn kind() -> impl Strategy<Value = Kind> {
    prop_oneof![Just(Kind::Wigner), Just(Kind::FreePoisson)]
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Copies `x` onto a grid `factor` times longer with the same cell width, leaving the
/// extra room empty.
pub fn embed(x: &ChaosElement, factor: usize) -> ChaosElement {
    let cells = x.grid().cells();
    let long = GridSpec::new(x.grid().horizon() * factor as f64, factor * cells).unwrap();
    let parts = x.parts().values().map(|f| {
        Kernel::from_cells(long, f.order(), |i| {
            if i.iter().all(|&c| c < cells) {
                f.get_multi(i)
            } else {
                0.0
            }
        })
        .unwrap()
    });
    ChaosElement::from_parts(x.kind(), long, x.scalar(), parts).unwrap()
}
