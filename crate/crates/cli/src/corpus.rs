//! Seeded random kernels for the experiment batteries.

use freechaos_core::{GridSpec, Kernel};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Error;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric kernel with i.i.d. uniform `[-1, 1]` cell values before symmetrization,
/// scaled to unit norm.
pub fn random_symmetric(
    rng: &mut ChaCha8Rng,
    grid: GridSpec,
    order: usize,
) -> Result<Kernel, Error> {
    let len = grid.cells().pow(order as u32);
    let values = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
    let k = Kernel::from_dense(grid, order, values)?.symmetrize()?;
    let norm = k.norm();
    Ok(if norm > 0.0 { k.scaled(1.0 / norm) } else { k })
}

/// Symmetric kernel supported on `cells^order`, cell values uniform in `[0.1, 1]`
/// before symmetrization, scaled to unit norm.
pub fn random_supported(
    rng: &mut ChaCha8Rng,
    grid: GridSpec,
    order: usize,
    cells: &[usize],
) -> Result<Kernel, Error> {
    let k = Kernel::from_cells(grid, order, |i| {
        let v = rng.random_range(0.1..1.0);
        if i.iter().all(|c| cells.contains(c)) {
            v
        } else {
            0.0
        }
    })?
    .symmetrize()?;
    Ok(k.scaled(1.0 / k.norm()))
}

/// One pair of the freeness battery.
#[derive(Debug, Clone)]
pub struct LabeledPair {
    pub free: bool,
    pub f: Kernel,
    pub g: Kernel,
}

/// `count` pairs on `T = 4, N = 4` with orders 1 or 2, alternating between free pairs
/// (supports in cells `{0, 1}` and `{2, 3}`) and overlapping pairs (`{0, 1}` and
/// `{1, 2}`).
pub fn freeness_corpus(count: usize, seed: u64) -> Result<Vec<LabeledPair>, Error> {
    let grid = GridSpec::new(4.0, 4)?;
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let free = i % 2 == 0;
            let n = rng.random_range(1..=2usize);
            let m = rng.random_range(1..=2usize);
            let b: &[usize] = if free { &[2, 3] } else { &[1, 2] };
            Ok(LabeledPair {
                free,
                f: random_supported(&mut rng, grid, n, &[0, 1])?,
                g: random_supported(&mut rng, grid, m, b)?,
            })
        })
        .collect()
}

/// `count` unit-norm symmetric kernels of orders 1 and 2 on `T = 1` with up to
/// `max_cells` cells.
pub fn oracle_corpus(count: usize, max_cells: usize, seed: u64) -> Result<Vec<Kernel>, Error> {
    let mut rng = rng(seed);
    let grid = GridSpec::new(1.0, max_cells)?;
    (0..count)
        .map(|_| {
            let order = rng.random_range(1..=2usize);
            random_symmetric(&mut rng, grid, order)
        })
        .collect()
}
