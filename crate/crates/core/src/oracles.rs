//! Combinatorial ground truth: Catalan numbers, non-crossing partitions and the
//! free moment-cumulant formula.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedSum};

/// Largest `n` accepted by [`enumerate_nc`]; `Catalan(14)` is about 2.7 million.
pub const NC_GUARD: usize = 14;

/// `Catalan(k)` in exact integer arithmetic, for `k <= 65`.
pub fn catalan(k: u32) -> Result<u128> {
    // C_{j+1} = C_j * 2(2j+1) / (j+2); the product is divisible at every step
    let mut c: u128 = 1;
    for j in 0..k as u128 {
        c = c
            .checked_mul(2 * (2 * j + 1))
            .map(|x| x / (j + 2))
            .ok_or_else(|| Error::EnumerationGuard(format!("Catalan({k})")))?;
    }
    Ok(c)
}

/// Moments of the centered semicircular law of variance `t`: `Catalan(k/2) t^(k/2)`
/// for even `k`, zero for odd `k`.
pub fn semicircle_moment(t: f64, k: u32) -> Result<f64> {
    if k % 2 == 1 {
        return Ok(0.0);
    }
    Ok(catalan(k / 2)? as f64 * numeric::powi(t, (k / 2) as i32))
}

/// A set partition of `{1, ..., n}` with blocks listed by smallest element and each
/// block sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NCPartition {
    blocks: Vec<Vec<usize>>,
}

impl NCPartition {
    /// Validates that `blocks` partition `{1..n}` without crossings.
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty block".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i == 0 || i > n || core::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidArgument(format!(
                        "{i} is out of range or repeated in a partition of 1..{n}"
                    )));
                }
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "blocks do not cover 1..{n}"
            )));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let p = Self { blocks };
        if !p.is_non_crossing() {
            return Err(Error::InvalidArgument(
                "partition has crossing blocks".into(),
            ));
        }
        Ok(p)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// No `a < b < c < d` with `a, c` in one block and `b, d` in another.
    pub fn is_non_crossing(&self) -> bool {
        let mut label = vec![0usize; self.size() + 1];
        for (k, b) in self.blocks.iter().enumerate() {
            for &i in b {
                label[i] = k;
            }
        }
        for (k, b) in self.blocks.iter().enumerate() {
            for w in b.windows(2) {
                // any element strictly between two consecutive members of a block must
                // belong to a block lying entirely inside that gap
                for &l in &label[w[0] + 1..w[1]] {
                    let other = &self.blocks[l];
                    if l != k && (other[0] < w[0] || *other.last().unwrap() > w[1]) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// All non-crossing partitions of `{1..n}`.
pub fn enumerate_nc(n: usize) -> Result<Vec<NCPartition>> {
    if n > NC_GUARD {
        return Err(Error::EnumerationGuard(format!(
            "NC({n}) (guard is n <= {NC_GUARD})"
        )));
    }
    let mut out = Vec::new();
    let mut assign = vec![0usize; n];
    grow(n, 0, 0, &mut assign, &mut out);
    Ok(out)
}

// Restricted growth strings, pruned as soon as a crossing appears.
fn grow(n: usize, pos: usize, used: usize, assign: &mut [usize], out: &mut Vec<NCPartition>) {
    if pos == n {
        let mut blocks = vec![Vec::new(); used];
        for (i, &b) in assign.iter().enumerate() {
            blocks[b].push(i + 1);
        }
        out.push(NCPartition { blocks });
        return;
    }
    for b in 0..=used {
        if b < used && !can_join(assign, pos, b) {
            continue;
        }
        assign[pos] = b;
        grow(n, pos + 1, used.max(b + 1), assign, out);
    }
}

// Element `pos` may join block `b` only if no block other than `b` has members on
// both sides of `b`'s last member before `pos`.
fn can_join(assign: &[usize], pos: usize, b: usize) -> bool {
    let last = (0..pos).rev().find(|&i| assign[i] == b).unwrap();
    let inside = &assign[last + 1..pos];
    inside.iter().all(|&c| !assign[..last].contains(&c))
}

/// `m_n = sum over NC(n) of prod over blocks of kappa_{|B|}`, with `kappa[j]` the
/// free cumulant of order `j + 1`.
pub fn moments_from_free_cumulants(kappa: &[f64], n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    if kappa.len() < n {
        return Err(Error::InvalidArgument(format!(
            "moment of order {n} needs {n} cumulants, got {}",
            kappa.len()
        )));
    }
    let acc: CompensatedSum = enumerate_nc(n)?
        .iter()
        .map(|p| {
            p.blocks()
                .iter()
                .map(|b| kappa[b.len() - 1])
                .product::<f64>()
        })
        .collect();
    Ok(acc.value())
}

/// Moments of the free Poisson law of rate `lambda` (every free cumulant equals
/// `lambda`); `centered` zeroes the first cumulant.
pub fn free_poisson_moment(lambda: f64, n: usize, centered: bool) -> Result<f64> {
    let mut kappa = vec![lambda; n.max(1)];
    if centered {
        kappa[0] = 0.0;
    }
    moments_from_free_cumulants(&kappa, n)
}
