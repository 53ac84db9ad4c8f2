//! Named kernels used by the experiments and the acceptance checks.

use alloc::vec;

use alloc::format;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::{CellBox, Kernel};

/// `c * 1_[lo,hi]` as an order-1 kernel.
pub fn interval(grid: GridSpec, lo: f64, hi: f64, c: f64) -> Result<Kernel> {
    Kernel::indicator_box(grid, 1, &[CellBox::from([(lo, hi)])], c)
}

/// Two mirror-symmetric order-3 kernels on `T = 2, N = 2` whose first nested
/// contraction vanishes although their integrals are not free:
/// `f = 1_[0,1]x[0,2]x[0,1]` and `g = 1_[1,2]x[0,2]x[1,2]`.
pub fn mirror_counterexample() -> Result<(Kernel, Kernel)> {
    let grid = GridSpec::new(2.0, 2)?;
    let f = Kernel::indicator_box(
        grid,
        3,
        &[CellBox::from([(0.0, 1.0), (0.0, 2.0), (0.0, 1.0)])],
        1.0,
    )?;
    let g = Kernel::indicator_box(
        grid,
        3,
        &[CellBox::from([(1.0, 2.0), (0.0, 2.0), (1.0, 2.0)])],
        1.0,
    )?;
    Ok((f, g))
}

/// `f_k = sqrt(k) * sum_i 1_[i/k,(i+1)/k]^2` on `T = 1, N = k`. Unit norm,
/// `||f_k ⌢_1 f_k||^2 = 1/k` and `f_k ⌢_2 f_k = 1`.
pub fn diagonal_sequence(k: usize) -> Result<Kernel> {
    diagonal_sequence_on(k, k)
}

/// [`diagonal_sequence`] expressed on a finer grid `T = 1, N = cells`, where `cells`
/// is a multiple of `k`, so that a whole sequence can share one grid.
pub fn diagonal_sequence_on(k: usize, cells: usize) -> Result<Kernel> {
    if k == 0 || !cells.is_multiple_of(k) {
        return Err(Error::InvalidArgument(format!(
            "{cells} cells do not refine {k} blocks"
        )));
    }
    let grid = GridSpec::new(1.0, cells)?;
    let c = libm::sqrt(k as f64);
    let block = cells / k;
    Kernel::from_cells(
        grid,
        2,
        |i| if i[0] / block == i[1] / block { c } else { 0.0 },
    )
}

/// `f(x) = x` and `g(x) = x^2 - (3T/4) x` sampled at cell midpoints. The exact
/// integrals are orthogonal while their pointwise product is not zero.
pub fn transfer_pair(horizon: f64, cells: usize) -> Result<(Kernel, Kernel)> {
    let grid = GridSpec::new(horizon, cells)?;
    let f = Kernel::sample_midpoints(grid, 1, |x| x[0])?;
    let g = Kernel::sample_midpoints(grid, 1, |x| x[0] * x[0] - 0.75 * horizon * x[0])?;
    Ok((f, g))
}

/// Unit-norm mirror-symmetric, non-symmetric order-3 kernel
/// `2 * 1_[0,1/2]x[0,1]x[0,1/2]` on `T = 1` with an even number of cells.
pub fn mirror_block(cells: usize) -> Result<Kernel> {
    let grid = GridSpec::new(1.0, cells)?;
    Kernel::indicator_box(
        grid,
        3,
        &[CellBox::from([(0.0, 0.5), (0.0, 1.0), (0.0, 0.5)])],
        2.0,
    )
}

/// `c * 1_[lo,hi]^order`, symmetric, with unit norm when `c = (hi - lo)^(-order/2)`.
pub fn cube(grid: GridSpec, order: usize, lo: f64, hi: f64) -> Result<Kernel> {
    let c = 1.0 / libm::pow(hi - lo, order as f64 / 2.0);
    Kernel::indicator_box(grid, order, &[CellBox::cube((lo, hi), order)], c)
}

/// Unit-norm symmetric kernel of the given order supported on `[lo, hi]^order`,
/// with cell values growing with the index sum so that it is not a tensor power.
pub fn symmetric_staircase(grid: GridSpec, order: usize, lo: f64, hi: f64) -> Result<Kernel> {
    let h = grid.width();
    let (a, b) = (libm::round(lo / h) as usize, libm::round(hi / h) as usize);
    let raw = Kernel::from_cells(grid, order, |i| {
        if i.iter().all(|&c| c >= a && c < b) {
            1.0 + i.iter().sum::<usize>() as f64
        } else {
            0.0
        }
    })?;
    let norm = raw.norm();
    Ok(if norm > 0.0 {
        raw.scaled(1.0 / norm)
    } else {
        raw
    })
}

/// The `d` unit-variance first-chaos components `1_[i, i+1]`, `i < d`, on `T = d`,
/// `N = d`.
pub fn disjoint_unit_intervals(d: usize) -> Result<vec::Vec<Kernel>> {
    let grid = GridSpec::new(d as f64, d)?;
    (0..d)
        .map(|i| interval(grid, i as f64, i as f64 + 1.0, 1.0))
        .collect()
}
