//! Process-wide resource guards.
//!
//! The defaults can be changed at startup (the CLI maps `FCHAOS_MAX_TENSOR_ENTRIES`
//! onto [`set_max_tensor_entries`]). Every operation that allocates an output tensor
//! checks its dense size against the guard first.

use core::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_TENSOR_ENTRIES: usize = 1 << 26;
pub const DEFAULT_SYMMETRIZE_ORDER_CAP: usize = 8;
pub const DEFAULT_PERMUTATION_ORDER_CAP: usize = 6;

static MAX_TENSOR_ENTRIES: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_TENSOR_ENTRIES);
static SYMMETRIZE_ORDER_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_SYMMETRIZE_ORDER_CAP);
static PERMUTATION_ORDER_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_PERMUTATION_ORDER_CAP);

pub fn max_tensor_entries() -> usize {
    MAX_TENSOR_ENTRIES.load(Ordering::Relaxed)
}

pub fn set_max_tensor_entries(limit: usize) {
    MAX_TENSOR_ENTRIES.store(limit.max(1), Ordering::Relaxed);
}

pub fn symmetrize_order_cap() -> usize {
    SYMMETRIZE_ORDER_CAP.load(Ordering::Relaxed)
}

pub fn set_symmetrize_order_cap(cap: usize) {
    SYMMETRIZE_ORDER_CAP.store(cap, Ordering::Relaxed);
}

pub fn permutation_order_cap() -> usize {
    PERMUTATION_ORDER_CAP.load(Ordering::Relaxed)
}

pub fn set_permutation_order_cap(cap: usize) {
    PERMUTATION_ORDER_CAP.store(cap, Ordering::Relaxed);
}

/// Number of entries of a dense order-`order` tensor on `cells` cells, or `None`
/// on overflow.
pub fn dense_entries(cells: usize, order: usize) -> Option<usize> {
    cells.checked_pow(u32::try_from(order).ok()?)
}

/// Rejects an output tensor whose dense size exceeds the guard.
pub fn check_tensor(cells: usize, order: usize) -> Result<usize> {
    let limit = max_tensor_entries();
    match dense_entries(cells, order) {
        Some(n) if n <= limit => Ok(n),
        _ => Err(Error::TooLarge {
            order,
            cells,
            entries: (cells as u128).saturating_pow(order as u32),
            limit,
        }),
    }
}
