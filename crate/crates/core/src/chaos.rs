//! Finite chaos decompositions `c 1 + sum_n I_n(f_n)` and their algebra.
//!
//! Products follow the Wigner product formula
//! `I_n(f) I_m(g) = sum_{p=0}^{n∧m} I_{n+m-2p}(f ⌢_p g)`; the free Poisson kind adds
//! `sum_{p=1}^{n∧m} I_{n+m-2p+1}(f ⋆_p g)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::contraction::{self, contract_into};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::{Kernel, ZERO_TOL};
use crate::limits;
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Kind {
    Wigner,
    FreePoisson,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Wigner => "wigner",
            Kind::FreePoisson => "free_poisson",
        }
    }

    pub const ALL: [Kind; 2] = [Kind::Wigner, Kind::FreePoisson];
}

impl core::fmt::Display for Kind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wigner" | "semicircular" => Ok(Kind::Wigner),
            "free_poisson" | "free-poisson" | "poisson" => Ok(Kind::FreePoisson),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown kind {other:?}; expected wigner or free_poisson"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosElement {
    kind: Kind,
    grid: GridSpec,
    scalar: f64,
    parts: BTreeMap<usize, Kernel>,
}

impl ChaosElement {
    pub fn zero(kind: Kind, grid: GridSpec) -> Self {
        Self::constant(kind, grid, 0.0)
    }

    pub fn unit(kind: Kind, grid: GridSpec) -> Self {
        Self::constant(kind, grid, 1.0)
    }

    pub fn constant(kind: Kind, grid: GridSpec, c: f64) -> Self {
        Self {
            kind,
            grid,
            scalar: c,
            parts: BTreeMap::new(),
        }
    }

    /// The multiple integral `I_n(f)`; an order-0 kernel gives its constant.
    pub fn integral(kind: Kind, f: Kernel) -> Self {
        let mut x = Self::zero(kind, *f.grid());
        x.insert(f);
        x
    }

    /// `c 1 + sum I(f)` over the given kernels; equal orders are added.
    pub fn from_parts<I>(kind: Kind, grid: GridSpec, scalar: f64, parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = Kernel>,
    {
        let mut x = Self::constant(kind, grid, scalar);
        for f in parts {
            grid.ensure_same(f.grid())?;
            let f = match x.parts.remove(&f.order()) {
                Some(prev) => Kernel::linear_combination(1.0, &prev, 1.0, &f)?,
                None => f,
            };
            x.insert(f);
        }
        Ok(x)
    }

    fn insert(&mut self, f: Kernel) {
        match f.as_scalar() {
            Some(c) => self.scalar += c,
            None if !contraction::is_null(&f) => {
                self.parts.insert(f.order(), f);
            }
            None => {}
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn scalar(&self) -> f64 {
        self.scalar
    }

    pub fn parts(&self) -> &BTreeMap<usize, Kernel> {
        &self.parts
    }

    pub fn part(&self, order: usize) -> Option<&Kernel> {
        self.parts.get(&order)
    }

    /// Highest order present, 0 for a constant.
    pub fn max_order(&self) -> usize {
        self.parts.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.scalar.abs() <= ZERO_TOL && self.parts.is_empty()
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                left: self.kind.as_str(),
                right: other.kind.as_str(),
            });
        }
        self.grid.ensure_same(&other.grid)
    }

    /// `a X + b Y`, order by order.
    pub fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        x.ensure_compatible(y)?;
        let mut out = Self::constant(x.kind, x.grid, a * x.scalar + b * y.scalar);
        let orders: alloc::collections::BTreeSet<usize> =
            x.parts.keys().chain(y.parts.keys()).copied().collect();
        for n in orders {
            let k = match (x.parts.get(&n), y.parts.get(&n)) {
                (Some(f), Some(g)) => Kernel::linear_combination(a, f, b, g)?,
                (Some(f), None) => f.scaled(a),
                (None, Some(g)) => g.scaled(b),
                (None, None) => unreachable!(),
            };
            out.insert(k);
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = Self::constant(self.kind, self.grid, c * self.scalar);
        for f in self.parts.values() {
            out.insert(f.scaled(c));
        }
        out
    }

    /// `X - phi(X) 1`.
    pub fn centered(&self) -> Self {
        let mut out = self.clone();
        out.scalar = 0.0;
        out
    }

    /// The product `XY` through the product formula of the element's kind.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.ensure_compatible(other)?;
        let cells = self.grid.cells();
        let mut scalar = CompensatedSum::new();
        scalar.add(self.scalar * other.scalar);
        let mut acc: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        // size the largest outputs first so a guard violation fails before any work
        for &n in self.parts.keys() {
            for &m in other.parts.keys() {
                buffer(&mut acc, cells, n + m)?;
            }
        }
        for (&n, f) in &self.parts {
            for (&m, g) in &other.parts {
                for p in 0..=n.min(m) {
                    let order = contraction::nested_order(n, m, p);
                    if order == 0 {
                        scalar.add(f.inner_with_adjoint(g)?);
                    } else {
                        contract_into(f, g, p, false, buffer(&mut acc, cells, order)?, 1.0);
                    }
                }
                if self.kind == Kind::FreePoisson {
                    for p in 1..=n.min(m) {
                        let order = contraction::star_order(n, m, p);
                        contract_into(f, g, p, true, buffer(&mut acc, cells, order)?, 1.0);
                    }
                }
            }
        }
        for (x, y) in [(self, other), (other, self)] {
            if x.scalar != 0.0 {
                for (&m, g) in &y.parts {
                    let buf = buffer(&mut acc, cells, m)?;
                    for (i, v) in g.entries() {
                        buf[i] += x.scalar * v;
                    }
                }
            }
        }
        let mut out = Self::constant(self.kind, self.grid, scalar.value());
        for (order, values) in acc {
            out.insert(Kernel::from_dense_unchecked(self.grid, order, values));
        }
        Ok(out)
    }

    /// The tracial state: the coefficient of the unit.
    pub fn phi(&self) -> f64 {
        self.scalar
    }

    /// `phi(XY)` from the isometry, without forming the product:
    /// `x_0 y_0 + sum_n <f_n, g_n*>`.
    pub fn phi_product(&self, other: &Self) -> Result<f64> {
        self.ensure_compatible(other)?;
        let mut acc = CompensatedSum::new();
        acc.add(self.scalar * other.scalar);
        for (n, f) in &self.parts {
            if let Some(g) = other.parts.get(n) {
                acc.add(f.inner_with_adjoint(g)?);
            }
        }
        Ok(acc.value())
    }

    /// `X^k` by repeated multiplication; `X^0` is the unit.
    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = Self::unit(self.kind, self.grid);
        for _ in 0..k {
            out = self.multiply(&out)?;
        }
        Ok(out)
    }

    /// `phi(X^k)`, computed as `phi(X^ceil(k/2) X^floor(k/2))` so the largest tensor
    /// formed has order `ceil(k/2)` times the top order of `X`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        let low = self.pow(k / 2)?;
        let high = if k.is_multiple_of(2) {
            low.clone()
        } else {
            self.multiply(&low)?
        };
        high.phi_product(&low)
    }

    /// `phi(X*X) = |x_0|^2 + sum_n ||f_n||^2`.
    pub fn norm_sq(&self) -> f64 {
        self.scalar * self.scalar + self.parts.values().map(Kernel::norm_sq).sum::<f64>()
    }

    /// The adjoint element, with every kernel reversed.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::constant(self.kind, self.grid, self.scalar);
        for f in self.parts.values() {
            out.insert(f.adjoint());
        }
        out
    }

    /// Every part mirror-symmetric within `tol`.
    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.parts.values().all(|f| f.is_mirror_symmetric(tol))
    }

    /// Smallest and largest cell index touched by any part.
    pub fn support_cells(&self) -> Option<(usize, usize)> {
        self.parts
            .values()
            .filter_map(Kernel::support_cells)
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
    }

    /// A free copy: every part shifted just past the current support, so each
    /// coordinate of the copy lives on cells disjoint from those of `self`.
    pub fn free_copy(&self) -> Result<Self> {
        match self.support_cells() {
            Some((lo, hi)) => self.shift_in_time((hi - lo + 1) as i64),
            None => Ok(self.clone()),
        }
    }

    /// Translates every kernel by `offset` cells in each coordinate, giving a free
    /// copy whenever the supports end up disjoint.
    pub fn shift_in_time(&self, offset: i64) -> Result<Self> {
        let mut out = Self::constant(self.kind, self.grid, self.scalar);
        let mut needed: Option<Error> = None;
        for f in self.parts.values() {
            match f.shifted(offset) {
                Ok(g) => out.insert(g),
                Err(Error::ShiftOverflow {
                    offset,
                    required_horizon,
                }) => {
                    let worst = match &needed {
                        Some(Error::ShiftOverflow {
                            required_horizon: r,
                            ..
                        }) => r.max(required_horizon),
                        _ => required_horizon,
                    };
                    needed = Some(Error::ShiftOverflow {
                        offset,
                        required_horizon: worst,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        match needed {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

fn buffer(
    acc: &mut BTreeMap<usize, Vec<f64>>,
    cells: usize,
    order: usize,
) -> Result<&mut Vec<f64>> {
    use alloc::collections::btree_map::Entry;
    Ok(match acc.entry(order) {
        Entry::Occupied(e) => e.into_mut(),
        Entry::Vacant(e) => e.insert(vec![0.0; limits::check_tensor(cells, order)?]),
    })
}
