//! JSON file formats for kernels, chaos elements and bi-kernels.
//!
//! Floats are written in shortest round-trip form, so reading a file back yields
//! bit-identical values.

use std::fs;
use std::path::Path;

use freechaos_core::bichaos::BiKernel;
use freechaos_core::kernel::unflatten_index;
use freechaos_core::{ChaosElement, GridSpec, Kernel, Kind, Storage};
use serde::{Deserialize, Serialize};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageTag {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    Dense(Vec<f64>),
    Sparse(Vec<(Vec<usize>, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub cells: usize,
    pub order: usize,
    pub storage: StorageTag,
    pub values: Values,
}

impl KernelFile {
    pub fn from_kernel(k: &Kernel) -> Self {
        let (storage, values) = match k.storage() {
            Storage::Dense(v) => (StorageTag::Dense, Values::Dense(v.clone())),
            Storage::Sparse(entries) => (
                StorageTag::Sparse,
                Values::Sparse(
                    entries
                        .iter()
                        .map(|&(i, v)| (unflatten_index(i, k.cells(), k.order()), v))
                        .collect(),
                ),
            ),
        };
        Self {
            horizon: k.grid().horizon(),
            cells: k.cells(),
            order: k.order(),
            storage,
            values,
        }
    }

    pub fn to_kernel(&self) -> Result<Kernel, Error> {
        let grid = GridSpec::new(self.horizon, self.cells)?;
        match (&self.storage, &self.values) {
            (StorageTag::Dense, Values::Dense(v)) => {
                Ok(Kernel::from_dense(grid, self.order, v.clone())?)
            }
            (StorageTag::Sparse, Values::Sparse(entries)) => {
                let mut flat = Vec::with_capacity(entries.len());
                for (idx, v) in entries {
                    if idx.len() != self.order || idx.iter().any(|&i| i >= self.cells) {
                        return Err(Error::Format(format!(
                            "sparse index {idx:?} does not address an order-{} kernel on {} cells",
                            self.order, self.cells
                        )));
                    }
                    flat.push((idx.iter().fold(0, |a, &i| a * self.cells + i), *v));
                }
                Ok(Kernel::from_entries(grid, self.order, flat)?)
            }
            // an empty list parses as dense; accept it as an empty sparse kernel
            (StorageTag::Sparse, Values::Dense(v)) if v.is_empty() => {
                Ok(Kernel::from_entries(grid, self.order, Vec::new())?)
            }
            (tag, _) => Err(Error::Format(format!(
                "\"values\" layout does not match storage {:?}",
                tag
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartFile {
    pub order: usize,
    pub kernel: KernelFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosFile {
    pub kind: Kind,
    pub scalar: f64,
    pub parts: Vec<PartFile>,
}

impl ChaosFile {
    pub fn from_element(x: &ChaosElement) -> Self {
        Self {
            kind: x.kind(),
            scalar: x.scalar(),
            parts: x
                .parts()
                .iter()
                .map(|(&order, k)| PartFile {
                    order,
                    kernel: KernelFile::from_kernel(k),
                })
                .collect(),
        }
    }

    /// Needs at least one part to know the grid unless `grid` is given.
    pub fn to_element(&self, grid: Option<GridSpec>) -> Result<ChaosElement, Error> {
        let kernels = self
            .parts
            .iter()
            .map(|p| {
                let k = p.kernel.to_kernel()?;
                if k.order() != p.order {
                    return Err(Error::Format(format!(
                        "part declared as order {} holds an order-{} kernel",
                        p.order,
                        k.order()
                    )));
                }
                Ok(k)
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let grid = match (grid, kernels.first()) {
            (Some(g), _) => g,
            (None, Some(k)) => *k.grid(),
            (None, None) => {
                return Err(Error::Format(
                    "a chaos element without parts needs an explicit grid".into(),
                ))
            }
        };
        Ok(ChaosElement::from_parts(
            self.kind,
            grid,
            self.scalar,
            kernels,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiKernelFile {
    #[serde(flatten)]
    pub kernel: KernelFile,
    pub left_order: usize,
    pub right_order: usize,
}

impl BiKernelFile {
    pub fn from_bikernel(f: &BiKernel) -> Self {
        Self {
            kernel: KernelFile::from_kernel(f.kernel()),
            left_order: f.left(),
            right_order: f.right(),
        }
    }

    pub fn to_bikernel(&self) -> Result<BiKernel, Error> {
        Ok(BiKernel::new(
            self.kernel.to_kernel()?,
            self.left_order,
            self.right_order,
        )?)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(path.display().to_string(), e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::Io(path.display().to_string(), e))
}
