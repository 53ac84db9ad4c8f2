//! Bi-integrals `[I_n ⊗ I_m](f)`, bicontractions, the ♯ action and the free gradient
//! pairing `<∇I_n(f), ∇I_m(g)>`.
//!
//! A bi-kernel is an order `n + m` kernel together with its split point: the first
//! `n` arguments feed the left tensor leg, the last `m` the right one.

use alloc::collections::BTreeMap;
use alloc::format;

use crate::contraction::{self, nested_contract};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::{Kernel, EXACT_TOL, ZERO_TOL};
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, PartialEq)]
pub struct BiKernel {
    kernel: Kernel,
    left: usize,
}

impl BiKernel {
    pub fn new(kernel: Kernel, left: usize, right: usize) -> Result<Self> {
        if left + right != kernel.order() {
            return Err(Error::InvalidArgument(format!(
                "split ({left}, {right}) does not match a kernel of order {}",
                kernel.order()
            )));
        }
        Ok(Self { kernel, left })
    }

    /// `f ⊗ g` with the split between the two factors.
    pub fn from_pair(f: &Kernel, g: &Kernel) -> Result<Self> {
        Self::new(f.tensor(g)?, f.order(), g.order())
    }

    pub fn scalar(grid: GridSpec, c: f64) -> Self {
        Self {
            kernel: Kernel::scalar(grid, c),
            left: 0,
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn into_kernel(self) -> Kernel {
        self.kernel
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.kernel.order() - self.left
    }

    pub fn split(&self) -> (usize, usize) {
        (self.left, self.right())
    }

    pub fn grid(&self) -> &GridSpec {
        self.kernel.grid()
    }

    pub fn norm_sq(&self) -> f64 {
        self.kernel.norm_sq()
    }

    /// Reverses each leg separately; the split is kept.
    pub fn bi_adjoint(&self) -> BiKernel {
        let (n, m) = self.split();
        let sigma: alloc::vec::Vec<usize> = (0..n)
            .map(|j| n - 1 - j)
            .chain((n..n + m).map(|j| n + (n + m - 1 - j)))
            .collect();
        Self {
            kernel: self
                .kernel
                .permute(&sigma)
                .expect("leg reversal is a permutation"),
            left: n,
        }
    }
}

/// `f ⌢_{p,r} g`: contracts the last `p` left-leg arguments of `f` with the first
/// `p` arguments of `g` (reversed), and the first `r` right-leg arguments of `f` with
/// the last `r` arguments of `g` (reversed). With `f = (a, s_p..s_1, y_1..y_r, b)` and
/// `g = (s_1..s_p, c, d, y_r..y_1)` the result is laid out as `(a, c | d, b)`.
pub fn bicontract(f: &BiKernel, g: &BiKernel, p: usize, r: usize) -> Result<BiKernel> {
    let (n1, m1) = f.split();
    let (n2, m2) = g.split();
    if p > n1.min(n2) || r > m1.min(m2) {
        return Err(Error::InvalidArgument(format!(
            "bicontraction ({p}, {r}) out of range for splits ({n1}, {m1}) and ({n2}, {m2})"
        )));
    }
    let (a, b, c, d) = (n1 - p, m1 - r, n2 - p, m2 - r);
    // f' = (a, b, s_p..s_1, y_1..y_r) and g' = (y_r..y_1, s_1..s_p, c, d), so the
    // (p + r)-nested contraction pairs exactly the contracted variables
    let fp = f.kernel.rearrange_blocks(&[a, p + r, b], &[0, 2, 1])?;
    let gp = g.kernel.rearrange_blocks(&[p + c + d, r], &[1, 0])?;
    let joined = nested_contract(&fp, &gp, p + r)?;
    let kernel = joined.rearrange_blocks(&[a, b, c, d], &[0, 2, 3, 1])?;
    BiKernel::new(kernel, a + c, d + b)
}

/// A finite sum `c (1 ⊗ 1) + sum_{(n,m)} [I_n ⊗ I_m](f_{n,m})`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiChaosElement {
    grid: GridSpec,
    scalar: f64,
    parts: BTreeMap<(usize, usize), Kernel>,
}

impl BiChaosElement {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            scalar: 0.0,
            parts: BTreeMap::new(),
        }
    }

    pub fn unit(grid: GridSpec) -> Self {
        let mut x = Self::zero(grid);
        x.scalar = 1.0;
        x
    }

    /// `[I_n ⊗ I_m](f)`.
    pub fn bi_integral(f: BiKernel) -> Self {
        let mut x = Self::zero(*f.grid());
        x.add_part(f, 1.0).expect("same grid");
        x
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// The `1 ⊗ 1` coefficient, which is also `φ ⊗ φ` of the element.
    pub fn scalar(&self) -> f64 {
        self.scalar
    }

    pub fn parts(&self) -> impl Iterator<Item = ((usize, usize), &Kernel)> {
        self.parts.iter().map(|(k, v)| (*k, v))
    }

    pub fn part(&self, left: usize, right: usize) -> Option<BiKernel> {
        self.parts
            .get(&(left, right))
            .map(|k| BiKernel::new(k.clone(), left, right).expect("stored split is consistent"))
    }

    pub fn is_zero(&self) -> bool {
        self.scalar.abs() <= ZERO_TOL && self.parts.is_empty()
    }

    /// Adds `c f` to the part at `f`'s split.
    pub fn add_part(&mut self, f: BiKernel, c: f64) -> Result<()> {
        self.grid.ensure_same(f.grid())?;
        let split = f.split();
        if split == (0, 0) {
            self.scalar += c * f.kernel.get(0);
            return Ok(());
        }
        let k = match self.parts.remove(&split) {
            Some(prev) => Kernel::linear_combination(1.0, &prev, c, &f.kernel)?,
            None => f.kernel.scaled(c),
        };
        if !contraction::is_null(&k) {
            self.parts.insert(split, k);
        }
        Ok(())
    }

    fn terms(&self) -> impl Iterator<Item = BiKernel> + '_ {
        let scalar = (self.scalar != 0.0).then(|| BiKernel::scalar(self.grid, self.scalar));
        scalar.into_iter().chain(
            self.parts
                .iter()
                .map(|(&(n, m), k)| BiKernel::new(k.clone(), n, m).expect("stored split")),
        )
    }

    /// `a X + b Y`.
    pub fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        x.grid.ensure_same(&y.grid)?;
        let mut out = Self::zero(x.grid);
        for t in x.terms() {
            out.add_part(t, a)?;
        }
        for t in y.terms() {
            out.add_part(t, b)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = Self::zero(self.grid);
        for t in self.terms() {
            out.add_part(t, c).expect("same grid");
        }
        out
    }

    /// `A ♯ B`, expanded with the biproduct formula
    /// `[I⊗I](f) ♯ [I⊗I](g) = sum_{p,r} [I⊗I](f ⌢_{p,r} g)`.
    pub fn sharp_multiply(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let mut out = Self::zero(self.grid);
        for f in self.terms() {
            for g in other.terms() {
                let (n1, m1) = f.split();
                let (n2, m2) = g.split();
                for p in 0..=n1.min(n2) {
                    for r in 0..=m1.min(m2) {
                        out.add_part(bicontract(&f, &g, p, r)?, 1.0)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// The involution `(A ⊗ B)* = A* ⊗ B*`, acting on kernels by leg-wise reversal.
    pub fn bi_adjoint(&self) -> Self {
        let mut out = Self::zero(self.grid);
        for t in self.terms() {
            out.add_part(t.bi_adjoint(), 1.0).expect("same grid");
        }
        out
    }

    /// `φ⊗φ(A A*) = c^2 + sum ||f_{n,m}||^2`.
    pub fn phi2_norm_sq(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.scalar * self.scalar);
        for k in self.parts.values() {
            acc.add(k.norm_sq());
        }
        acc.value()
    }
}

fn ensure_symmetric(f: &Kernel) -> Result<()> {
    let asymmetry = f.asymmetry();
    if asymmetry > EXACT_TOL {
        return Err(Error::NotSymmetric {
            asymmetry,
            hint: "the gradient pairing is only defined here for fully symmetric kernels",
        });
    }
    Ok(())
}

/// `<∇I_n(f), ∇I_m(g)>` for fully symmetric `f` and `g`, summed term by term over
/// `1 <= k <= n`, `1 <= q <= m`, `0 <= p < k ∧ q`, `0 <= r <= (n-k) ∧ (m-q)`.
///
/// Each term is `f ⌢_{p+r+1} g` with its free variables arranged as
/// `(a, c | d, b)`: the first `a = k-1-p` free variables of `f`, then the `c + d`
/// free variables of `g`, then the last `b = n-k-r` free variables of `f`, split
/// after `a + c`. That arrangement is the one the per-cell computation produces.
pub fn gradient_pairing(f: &Kernel, g: &Kernel) -> Result<BiChaosElement> {
    f.grid().ensure_same(g.grid())?;
    ensure_symmetric(f)?;
    ensure_symmetric(g)?;
    let (n, m) = (f.order(), g.order());
    let mut out = BiChaosElement::zero(*f.grid());
    if n == 0 || m == 0 {
        return Ok(out);
    }
    let contractions: alloc::vec::Vec<Kernel> = (1..=n.min(m))
        .map(|u| nested_contract(f, g, u))
        .collect::<Result<_>>()?;
    for k in 1..=n {
        for q in 1..=m {
            for p in 0..k.min(q) {
                for r in 0..=(n - k).min(m - q) {
                    let joined = &contractions[p + r];
                    let (a, b) = (k - 1 - p, n - k - r);
                    let (c, d) = (q - 1 - p, m - q - r);
                    let term = joined.rearrange_blocks(&[a, b, c + d], &[0, 2, 1])?;
                    out.add_part(BiKernel::new(term, a + c, d + b)?, 1.0)?;
                }
            }
        }
    }
    Ok(out)
}

/// `∇_s I_n(f) = sum_k [I_{k-1} ⊗ I_{n-k}](f_s^(k))` at grid cell `s`, where
/// `f_s^(k)` fixes argument `k` of `f` to cell `s`.
pub fn gradient_at_cell(f: &Kernel, s: usize) -> Result<BiChaosElement> {
    let n = f.order();
    let mut out = BiChaosElement::zero(*f.grid());
    for k in 1..=n {
        out.add_part(BiKernel::new(f.slice(k - 1, s)?, k - 1, n - k)?, 1.0)?;
    }
    Ok(out)
}

/// `<∇I_n(f), ∇I_m(g)> = ∫ ∇_s I_n(f) ♯ (∇_s I_m(g))* ds`, assembled cell by cell.
/// Needs no symmetry; used to cross-check [`gradient_pairing`].
pub fn gradient_pairing_by_cells(f: &Kernel, g: &Kernel) -> Result<BiChaosElement> {
    f.grid().ensure_same(g.grid())?;
    let grid = *f.grid();
    let mut out = BiChaosElement::zero(grid);
    for s in 0..grid.cells() {
        let u = gradient_at_cell(f, s)?;
        let v = gradient_at_cell(g, s)?.bi_adjoint();
        let term = u.sharp_multiply(&v)?;
        out = BiChaosElement::combine(1.0, &out, grid.width(), &term)?;
    }
    Ok(out)
}
