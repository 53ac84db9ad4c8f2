//! Nested and star contractions of step kernels.
//!
//! Both contractions pair the trailing `p` arguments of `f` with the leading `p`
//! arguments of `g` in reversed order: the last argument of `f` meets the first
//! argument of `g`. The nested contraction integrates all `p` pairs; the star
//! contraction integrates the inner `p - 1` pairs and keeps the outermost pair as a
//! single shared variable.

use alloc::vec;

use crate::error::{Error, Result};
use crate::kernel::{reverse_flat, Kernel, ZERO_TOL};
use crate::limits;
use crate::numeric;

/// Order of `f ⌢_p g`.
pub fn nested_order(n: usize, m: usize, p: usize) -> usize {
    n + m - 2 * p
}

/// Order of `f ⋆_p g`.
pub fn star_order(n: usize, m: usize, p: usize) -> usize {
    n + m - 2 * p + 1
}

fn check_range(f: &Kernel, g: &Kernel, p: usize, star: bool) -> Result<()> {
    f.grid().ensure_same(g.grid())?;
    if p > f.order().min(g.order()) || (star && p == 0) {
        return Err(Error::ContractionRange {
            p,
            left: f.order(),
            right: g.order(),
        });
    }
    Ok(())
}

/// Adds `scale * (f ⌢_p g)` (or `f ⋆_p g` when `star`) into a dense buffer laid out
/// as the contraction's output. Range and grid checks are the caller's job.
pub(crate) fn contract_into(
    f: &Kernel,
    g: &Kernel,
    p: usize,
    star: bool,
    out: &mut [f64],
    scale: f64,
) {
    let cells = f.cells();
    let integrated = if star { p - 1 } else { p };
    let weight = scale * numeric::powi(f.grid().width(), integrated as i32);
    let tail_len = cells.pow(p as u32);
    let g_free = cells.pow((g.order() - p) as u32);
    let lead = if star { cells.pow((p - 1) as u32) } else { 1 };
    for (i, fv) in f.entries() {
        let (a, tail) = (i / tail_len, i % tail_len);
        let key = reverse_flat(tail, cells, p);
        let base = if star {
            // the shared variable is f's argument n - p, the leading digit of the tail
            (a * cells + tail / lead) * g_free
        } else {
            a * g_free
        };
        let start = key * g_free;
        let c = weight * fv;
        for (j, gv) in g.entries_in(start, start + g_free) {
            out[base + j - start] += c * gv;
        }
    }
}

fn contract(f: &Kernel, g: &Kernel, p: usize, star: bool) -> Result<Kernel> {
    check_range(f, g, p, star)?;
    let order = if star {
        star_order(f.order(), g.order(), p)
    } else {
        nested_order(f.order(), g.order(), p)
    };
    let len = limits::check_tensor(f.cells(), order)?;
    let mut out = vec![0.0; len];
    contract_into(f, g, p, star, &mut out, 1.0);
    Ok(Kernel::from_dense_unchecked(*f.grid(), order, out))
}

/// `f ⌢_p g`, of order `n + m - 2p`, laid out as `[free args of f][free args of g]`.
/// `p = 0` is the tensor product.
pub fn nested_contract(f: &Kernel, g: &Kernel, p: usize) -> Result<Kernel> {
    contract(f, g, p, false)
}

/// `f ⋆_p g` for `p >= 1`, of order `n + m - 2p + 1`, laid out as
/// `[free args of f][shared variable][free args of g]`.
pub fn star_contract(f: &Kernel, g: &Kernel, p: usize) -> Result<Kernel> {
    contract(f, g, p, true)
}

/// The zero test used throughout: every entry at most `1e-12` in magnitude.
pub fn is_null(k: &Kernel) -> bool {
    k.is_negligible(ZERO_TOL)
}
