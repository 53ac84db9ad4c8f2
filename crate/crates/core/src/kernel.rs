//! Step kernels: functions on `[0, T]^n` that are constant on every grid cell.
//!
//! Values are stored row-major with the first index slowest, either densely or as
//! a sorted coordinate list. Constructors pick sparse storage when at most 5% of the
//! entries are nonzero.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::limits;
use crate::numeric::{self, CompensatedSum};

/// Fraction of nonzero entries at or below which sparse storage is chosen.
pub const SPARSE_THRESHOLD: f64 = 0.05;

/// Default relative tolerance for identities that hold exactly on step kernels.
pub const EXACT_TOL: f64 = 1e-9;

/// Entries with magnitude at or below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(Vec<f64>),
    /// Sorted by flat index, no duplicates, no explicit zeros.
    Sparse(Vec<(usize, f64)>),
}

/// A product of intervals `[a_1, b_1] x ... x [a_n, b_n]` with endpoints on grid lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CellBox {
    intervals: Vec<(f64, f64)>,
}

impl CellBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Self {
        Self { intervals }
    }

    pub fn cube(interval: (f64, f64), order: usize) -> Self {
        Self::new(vec![interval; order])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }
}

impl<const K: usize> From<[(f64, f64); K]> for CellBox {
    fn from(intervals: [(f64, f64); K]) -> Self {
        Self::new(intervals.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    grid: GridSpec,
    order: usize,
    storage: Storage,
}

/// Writes the row-major digits of `flat` into `out` (first index slowest).
#[inline]
/// Multi-index of the flat row-major position `flat` in an order-`order` tensor.
pub fn unflatten_index(flat: usize, cells: usize, order: usize) -> Vec<usize> {
    let mut out = vec![0; order];
    unflatten(flat, cells, &mut out);
    out
}

pub(crate) fn unflatten(mut flat: usize, cells: usize, out: &mut [usize]) {
    for d in out.iter_mut().rev() {
        *d = flat % cells;
        flat /= cells;
    }
}

#[inline]
pub(crate) fn flatten(idx: &[usize], cells: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * cells + i)
}

/// Flat index of the reversed multi-index.
#[inline]
pub(crate) fn reverse_flat(mut flat: usize, cells: usize, order: usize) -> usize {
    let mut out = 0;
    for _ in 0..order {
        out = out * cells + flat % cells;
        flat /= cells;
    }
    out
}

impl Kernel {
    /// Builds a kernel from a full row-major value array.
    pub fn from_dense(grid: GridSpec, order: usize, values: Vec<f64>) -> Result<Self> {
        let len = limits::check_tensor(grid.cells(), order)?;
        if values.len() != len {
            return Err(Error::InvalidArgument(format!(
                "expected {len} values for order {order} on {} cells, got {}",
                grid.cells(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at flat index {pos}"
            )));
        }
        Ok(Self::from_dense_unchecked(grid, order, values))
    }

    pub(crate) fn from_dense_unchecked(grid: GridSpec, order: usize, values: Vec<f64>) -> Self {
        let nnz = values.iter().filter(|v| **v != 0.0).count();
        let storage = if (nnz as f64) <= SPARSE_THRESHOLD * values.len() as f64 {
            Storage::Sparse(
                values
                    .into_iter()
                    .enumerate()
                    .filter(|(_, v)| *v != 0.0)
                    .collect(),
            )
        } else {
            Storage::Dense(values)
        };
        Self {
            grid,
            order,
            storage,
        }
    }

    /// Builds a kernel from `(flat index, value)` pairs; duplicates are summed.
    pub fn from_entries(
        grid: GridSpec,
        order: usize,
        mut entries: Vec<(usize, f64)>,
    ) -> Result<Self> {
        let len = limits::check_tensor(grid.cells(), order)?;
        if let Some(&(i, _)) = entries.iter().find(|(i, _)| *i >= len) {
            return Err(Error::InvalidArgument(format!(
                "flat index {i} out of range for {len} entries"
            )));
        }
        if let Some(&(i, _)) = entries.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at flat index {i}"
            )));
        }
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        if (merged.len() as f64) <= SPARSE_THRESHOLD * len as f64 {
            Ok(Self {
                grid,
                order,
                storage: Storage::Sparse(merged),
            })
        } else {
            let mut values = vec![0.0; len];
            for (i, v) in merged {
                values[i] = v;
            }
            Ok(Self {
                grid,
                order,
                storage: Storage::Dense(values),
            })
        }
    }

    pub fn zeros(grid: GridSpec, order: usize) -> Self {
        Self {
            grid,
            order,
            storage: Storage::Sparse(Vec::new()),
        }
    }

    /// Order-0 kernel holding the constant `value`.
    pub fn scalar(grid: GridSpec, value: f64) -> Self {
        Self::from_dense_unchecked(grid, 0, vec![value])
    }

    /// Builds a kernel cell by cell from its multi-index.
    pub fn from_cells<F>(grid: GridSpec, order: usize, mut value: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> f64,
    {
        let len = limits::check_tensor(grid.cells(), order)?;
        let mut idx = vec![0usize; order];
        let mut values = Vec::with_capacity(len);
        for flat in 0..len {
            unflatten(flat, grid.cells(), &mut idx);
            values.push(value(&idx));
        }
        Self::from_dense(grid, order, values)
    }

    /// Samples `f` at cell midpoints. For smooth `f` the induced L2 quantities carry an
    /// `O(h^2)` quadrature error.
    pub fn sample_midpoints<F>(grid: GridSpec, order: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut x = vec![0.0; order];
        Self::from_cells(grid, order, |idx| {
            for (xi, &i) in x.iter_mut().zip(idx) {
                *xi = grid.midpoint(i);
            }
            f(&x)
        })
    }

    /// `coefficient` on the union of the boxes, zero elsewhere.
    pub fn indicator_box(
        grid: GridSpec,
        order: usize,
        boxes: &[CellBox],
        coefficient: f64,
    ) -> Result<Self> {
        let mut ranges: Vec<Vec<(usize, usize)>> = Vec::with_capacity(boxes.len());
        for (b, cell_box) in boxes.iter().enumerate() {
            if cell_box.intervals.len() != order {
                return Err(Error::OrderMismatch {
                    left: order,
                    right: cell_box.intervals.len(),
                });
            }
            let mut r = Vec::with_capacity(order);
            for (axis, &(lo, hi)) in cell_box.intervals.iter().enumerate() {
                let off = |value| Error::OffGrid {
                    index: b,
                    axis,
                    value,
                    width: grid.width(),
                };
                let a = grid.line_index(lo).ok_or_else(|| off(lo))?;
                let z = grid.line_index(hi).ok_or_else(|| off(hi))?;
                if z < a {
                    return Err(Error::InvalidArgument(format!(
                        "box {b} axis {axis}: interval [{lo}, {hi}] is reversed"
                    )));
                }
                r.push((a, z));
            }
            ranges.push(r);
        }
        Self::from_cells(grid, order, |idx| {
            let inside = ranges
                .iter()
                .any(|r| r.iter().zip(idx).all(|(&(a, z), &i)| a <= i && i < z));
            if inside {
                coefficient
            } else {
                0.0
            }
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cells(&self) -> usize {
        self.grid.cells()
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Dense entry count `N^order`.
    pub fn len(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.len(),
            Storage::Sparse(_) => self.cells().pow(self.order as u32),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nnz() == 0
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.iter().filter(|x| **x != 0.0).count(),
            Storage::Sparse(e) => e.len(),
        }
    }

    /// Value at flat index `flat`.
    pub fn get(&self, flat: usize) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v[flat],
            Storage::Sparse(e) => match e.binary_search_by_key(&flat, |x| x.0) {
                Ok(k) => e[k].1,
                Err(_) => 0.0,
            },
        }
    }

    pub fn get_multi(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.order);
        self.get(flatten(idx, self.cells()))
    }

    /// Nonzero entries as `(flat index, value)`, in increasing index order.
    pub fn entries(&self) -> Entries<'_> {
        match &self.storage {
            Storage::Dense(v) => Entries::Dense(v.iter().enumerate()),
            Storage::Sparse(e) => Entries::Sparse(e.iter()),
        }
    }

    /// Entries whose flat index lies in `range`.
    pub(crate) fn entries_in(&self, start: usize, end: usize) -> Entries<'_> {
        match &self.storage {
            Storage::Dense(v) => Entries::Offset(start, v[start..end].iter().enumerate()),
            Storage::Sparse(e) => {
                let a = e.partition_point(|x| x.0 < start);
                let b = e.partition_point(|x| x.0 < end);
                Entries::Sparse(e[a..b].iter())
            }
        }
    }

    pub fn to_dense_values(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(v) => v.clone(),
            Storage::Sparse(e) => {
                let mut out = vec![0.0; self.len()];
                for &(i, v) in e {
                    out[i] = v;
                }
                out
            }
        }
    }

    /// Cell volume `h^order`.
    pub fn cell_volume(&self) -> f64 {
        numeric::powi(self.grid.width(), self.order as i32)
    }

    fn ensure_compatible(&self, other: &Kernel) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        Ok(())
    }

    /// `<f, g>` in `L2([0,T]^n)`: `h^n * sum_i f[i] g[i]`.
    pub fn inner_product(&self, other: &Kernel) -> Result<f64> {
        self.ensure_compatible(other)?;
        let acc: CompensatedSum = match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => a.iter().zip(b).map(|(x, y)| x * y).collect(),
            (Storage::Sparse(_), _) => self.entries().map(|(i, v)| v * other.get(i)).collect(),
            (_, Storage::Sparse(_)) => other.entries().map(|(i, v)| v * self.get(i)).collect(),
        };
        Ok(acc.value() * self.cell_volume())
    }

    /// `<f, g*>`, the Wigner pairing `phi(I(f) I(g))`, without materializing `g*`.
    pub fn inner_with_adjoint(&self, other: &Kernel) -> Result<f64> {
        self.ensure_compatible(other)?;
        let (n, cells) = (self.order, self.cells());
        let acc: CompensatedSum = if self.nnz() <= other.nnz() {
            self.entries()
                .map(|(i, v)| v * other.get(reverse_flat(i, cells, n)))
                .collect()
        } else {
            other
                .entries()
                .map(|(i, v)| v * self.get(reverse_flat(i, cells, n)))
                .collect()
        };
        Ok(acc.value() * self.cell_volume())
    }

    pub fn norm_sq(&self) -> f64 {
        let acc: CompensatedSum = self.entries().map(|(_, v)| v * v).collect();
        acc.value() * self.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        numeric::sqrt(self.norm_sq())
    }

    /// `(h^n * sum_i |f[i]|^p)^(1/p)`.
    pub fn lp_norm(&self, p: u32) -> Result<f64> {
        if p == 0 {
            return Err(Error::InvalidArgument("Lp norm needs p >= 1".into()));
        }
        let acc: CompensatedSum = self
            .entries()
            .map(|(_, v)| numeric::powi(numeric::abs(v), p as i32))
            .collect();
        Ok(libm::pow(acc.value() * self.cell_volume(), 1.0 / p as f64))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries()
            .map(|(_, v)| numeric::abs(v))
            .fold(0.0, f64::max)
    }

    /// All entries within `tol` of zero.
    pub fn is_negligible(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    /// Rebuilds storage from a remapping of indices; `map` must be a bijection.
    fn remap<F: FnMut(usize) -> usize>(&self, order: usize, mut map: F) -> Kernel {
        match &self.storage {
            Storage::Dense(v) => {
                let mut out = vec![0.0; v.len()];
                for (i, &x) in v.iter().enumerate() {
                    out[map(i)] = x;
                }
                Kernel {
                    grid: self.grid,
                    order,
                    storage: Storage::Dense(out),
                }
            }
            Storage::Sparse(e) => {
                let mut out: Vec<(usize, f64)> = e.iter().map(|&(i, v)| (map(i), v)).collect();
                out.sort_by_key(|x| x.0);
                Kernel {
                    grid: self.grid,
                    order,
                    storage: Storage::Sparse(out),
                }
            }
        }
    }

    /// `f*(t_1, ..., t_n) = f(t_n, ..., t_1)` (real scalars, no conjugation).
    pub fn adjoint(&self) -> Kernel {
        let (n, cells) = (self.order, self.cells());
        self.remap(n, |i| reverse_flat(i, cells, n))
    }

    /// `f^(sigma)(x_1, ..., x_n) = f(x_{sigma(1)}, ..., x_{sigma(n)})`, with `sigma`
    /// given 0-based.
    ///
    /// Composition: `permute(permute(f, s), t) == permute(f, u)` where
    /// `u[j] = t[s[j]]`.
    pub fn permute(&self, sigma: &[usize]) -> Result<Kernel> {
        let n = self.order;
        if sigma.len() != n {
            return Err(Error::InvalidArgument(format!(
                "permutation of length {} applied to an order-{n} kernel",
                sigma.len()
            )));
        }
        let mut seen = vec![false; n];
        for &s in sigma {
            if s >= n || core::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidArgument(format!(
                    "{sigma:?} is not a permutation"
                )));
            }
        }
        let cells = self.cells();
        let mut y = vec![0usize; n];
        let mut x = vec![0usize; n];
        Ok(self.remap(n, |flat| {
            // entry at f-index y lands at x with x[sigma[j]] = y[j]
            unflatten(flat, cells, &mut y);
            for j in 0..n {
                x[sigma[j]] = y[j];
            }
            flatten(&x, cells)
        }))
    }

    /// Splits the arguments into consecutive blocks of lengths `lens` and lists the
    /// blocks in the sequence `order` (block indices), keeping each block intact.
    pub fn rearrange_blocks(&self, lens: &[usize], order: &[usize]) -> Result<Kernel> {
        if lens.iter().sum::<usize>() != self.order || order.len() != lens.len() {
            return Err(Error::InvalidArgument(format!(
                "block lengths {lens:?} with order {order:?} do not fit an order-{} kernel",
                self.order
            )));
        }
        let mut start = vec![0usize; lens.len()];
        for b in 1..lens.len() {
            start[b] = start[b - 1] + lens[b - 1];
        }
        // sigma[j] = new slot of the kernel's argument j
        let mut sigma = vec![0usize; self.order];
        let mut slot = 0;
        for &b in order {
            for t in 0..lens[b] {
                sigma[start[b] + t] = slot;
                slot += 1;
            }
        }
        self.permute(&sigma)
    }

    /// Average over all permutations of the arguments.
    pub fn symmetrize(&self) -> Result<Kernel> {
        let cap = limits::symmetrize_order_cap();
        if self.order > cap {
            return Err(Error::PermutationCap {
                order: self.order,
                cap,
            });
        }
        let perms = permutations(self.order);
        let weight = 1.0 / perms.len() as f64;
        let mut acc = vec![0.0; self.len()];
        for sigma in &perms {
            for (i, v) in self.permute(sigma)?.entries() {
                acc[i] += weight * v;
            }
        }
        Ok(Kernel::from_dense_unchecked(self.grid, self.order, acc))
    }

    /// Largest relative change under an adjacent transposition.
    pub fn asymmetry(&self) -> f64 {
        let n = self.order;
        let scale = 1f64.max(self.norm());
        let mut worst = 0.0f64;
        for k in 0..n.saturating_sub(1) {
            let mut sigma: Vec<usize> = (0..n).collect();
            sigma.swap(k, k + 1);
            let swapped = self.permute(&sigma).expect("valid transposition");
            let diff = Kernel::linear_combination(1.0, self, -1.0, &swapped).expect("same shape");
            worst = worst.max(diff.norm() / scale);
        }
        worst
    }

    /// Invariance under every permutation, checked on the adjacent transpositions.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol
    }

    pub fn mirror_asymmetry(&self) -> f64 {
        let diff =
            Kernel::linear_combination(1.0, self, -1.0, &self.adjoint()).expect("same shape");
        diff.norm() / 1f64.max(self.norm())
    }

    /// `||f - f*|| <= tol * max(1, ||f||)`.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        self.mirror_asymmetry() <= tol
    }

    /// `f (x) g`, of order `n + m`.
    pub fn tensor(&self, other: &Kernel) -> Result<Kernel> {
        crate::contraction::nested_contract(self, other, 0)
    }

    pub fn scaled(&self, c: f64) -> Kernel {
        if c == 0.0 {
            return Kernel::zeros(self.grid, self.order);
        }
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(v.iter().map(|x| c * x).collect()),
            Storage::Sparse(e) => Storage::Sparse(e.iter().map(|&(i, x)| (i, c * x)).collect()),
        };
        Kernel {
            grid: self.grid,
            order: self.order,
            storage,
        }
    }

    /// `a f + b g`.
    pub fn linear_combination(a: f64, f: &Kernel, b: f64, g: &Kernel) -> Result<Kernel> {
        f.ensure_compatible(g)?;
        if let (Storage::Dense(x), Storage::Dense(y)) = (&f.storage, &g.storage) {
            let v = x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
            return Ok(Kernel::from_dense_unchecked(f.grid, f.order, v));
        }
        let mut entries: Vec<(usize, f64)> = f.entries().map(|(i, v)| (i, a * v)).collect();
        entries.extend(g.entries().map(|(i, v)| (i, b * v)));
        Kernel::from_entries(f.grid, f.order, entries)
    }

    /// In-place `self += c * other`.
    pub fn add_scaled(&mut self, c: f64, other: &Kernel) -> Result<()> {
        self.ensure_compatible(other)?;
        if let Storage::Dense(v) = &mut self.storage {
            for (i, x) in other.entries() {
                v[i] += c * x;
            }
            return Ok(());
        }
        *self = Kernel::linear_combination(1.0, self, c, other)?;
        Ok(())
    }

    /// Fixes argument `position` (0-based) to grid cell `cell`; order drops by one.
    pub fn slice(&self, position: usize, cell: usize) -> Result<Kernel> {
        let n = self.order;
        if position >= n || cell >= self.cells() {
            return Err(Error::InvalidArgument(format!(
                "slice at argument {position}, cell {cell} of an order-{n} kernel on {} cells",
                self.cells()
            )));
        }
        let cells = self.cells();
        let mut idx = vec![0usize; n];
        let mut rest = Vec::with_capacity(n - 1);
        let entries = self
            .entries()
            .filter_map(|(flat, v)| {
                unflatten(flat, cells, &mut idx);
                if idx[position] != cell {
                    return None;
                }
                rest.clear();
                rest.extend(
                    idx.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != position)
                        .map(|(_, &i)| i),
                );
                Some((flatten(&rest, cells), v))
            })
            .collect();
        Kernel::from_entries(self.grid, n - 1, entries)
    }

    /// Smallest and largest cell index used by any coordinate of a nonzero entry.
    pub fn support_cells(&self) -> Option<(usize, usize)> {
        let cells = self.cells();
        let mut idx = vec![0usize; self.order];
        let mut range: Option<(usize, usize)> = None;
        for (flat, _) in self.entries() {
            unflatten(flat, cells, &mut idx);
            for &i in &idx {
                range = Some(match range {
                    Some((lo, hi)) => (lo.min(i), hi.max(i)),
                    None => (i, i),
                });
            }
        }
        range
    }

    /// Translates the support by `offset` cells along every coordinate.
    pub fn shifted(&self, offset: i64) -> Result<Kernel> {
        let cells = self.cells();
        let n = self.order;
        if n == 0 || offset == 0 {
            return Ok(self.clone());
        }
        let Some((lo, hi)) = self.support_cells() else {
            return Ok(self.clone());
        };
        let new_lo = lo as i64 + offset;
        let new_hi = hi as i64 + offset;
        if new_lo < 0 || new_hi >= cells as i64 {
            let required_horizon = if new_lo < 0 {
                // moving left past zero cannot be fixed by a longer horizon
                f64::INFINITY
            } else {
                (new_hi + 1) as f64 * self.grid.width()
            };
            return Err(Error::ShiftOverflow {
                offset,
                required_horizon,
            });
        }
        let mut idx = vec![0usize; n];
        let entries = self
            .entries()
            .map(|(flat, v)| {
                unflatten(flat, cells, &mut idx);
                for i in idx.iter_mut() {
                    *i = (*i as i64 + offset) as usize;
                }
                (flatten(&idx, cells), v)
            })
            .collect();
        Kernel::from_entries(self.grid, n, entries)
    }

    /// The same step function expressed on the grid with every cell halved.
    pub fn refined(&self) -> Result<Kernel> {
        let fine = self.grid.refined();
        let cells = self.cells();
        let n = self.order;
        limits::check_tensor(fine.cells(), n)?;
        let mut idx = vec![0usize; n];
        let mut child = vec![0usize; n];
        let mut entries = Vec::with_capacity(self.nnz() << n);
        for (flat, v) in self.entries() {
            unflatten(flat, cells, &mut idx);
            for mask in 0..(1usize << n) {
                for k in 0..n {
                    child[k] = 2 * idx[k] + ((mask >> k) & 1);
                }
                entries.push((flatten(&child, fine.cells()), v));
            }
        }
        Kernel::from_entries(fine, n, entries)
    }

    /// Scalar value of an order-0 kernel.
    pub fn as_scalar(&self) -> Option<f64> {
        (self.order == 0).then(|| self.get(0))
    }
}

pub enum Entries<'a> {
    Dense(core::iter::Enumerate<core::slice::Iter<'a, f64>>),
    Offset(usize, core::iter::Enumerate<core::slice::Iter<'a, f64>>),
    Sparse(core::slice::Iter<'a, (usize, f64)>),
}

impl Iterator for Entries<'_> {
    type Item = (usize, f64);

    #[inline]
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            Entries::Dense(it) => it.find(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)),
            Entries::Offset(base, it) => {
                let base = *base;
                it.find(|(_, v)| **v != 0.0).map(|(i, v)| (base + i, *v))
            }
            Entries::Sparse(it) => it.next().copied(),
        }
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}
