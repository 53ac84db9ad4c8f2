use alloc::format;

use crate::error::{Error, Result};

/// Uniform partition of `[0, T]` into `N` cells of width `h = T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    horizon: f64,
    cells: usize,
}

impl GridSpec {
    pub fn new(horizon: f64, cells: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if cells == 0 {
            return Err(Error::InvalidGrid("cell count must be positive".into()));
        }
        Ok(Self { horizon, cells })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn width(&self) -> f64 {
        self.horizon / self.cells as f64
    }

    /// Midpoint of cell `i`.
    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.width()
    }

    /// Index of the grid line at `x`, if `x` lies on one (relative tolerance 1e-9).
    pub fn line_index(&self, x: f64) -> Option<usize> {
        let t = x / self.width();
        let r = libm::round(t);
        if r < 0.0 || r > self.cells as f64 {
            return None;
        }
        if libm::fabs(t - r) <= 1e-9 * r.max(1.0) {
            Some(r as usize)
        } else {
            None
        }
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: format!("T={} N={}", self.horizon, self.cells),
                right: format!("T={} N={}", other.horizon, other.cells),
            })
        }
    }

    /// The same horizon with every cell split in two.
    pub fn refined(&self) -> Self {
        Self {
            horizon: self.horizon,
            cells: self.cells * 2,
        }
    }
}

impl core::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "[0, {}] / {} cells", self.horizon, self.cells)
    }
}
