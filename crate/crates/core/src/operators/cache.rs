use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, RwLock};

use serde_json::json;

use crate::error::{Error, Result};
use crate::grid::snapshot::{load_snapshots, write_snapshot, Encoding};
use crate::grid::{Grid, ScalarField};
use crate::scalar::Real;

use super::heat::{heat_kernel_with, Stencil};

/// Invariant measurements of one cached kernel.
#[derive(Clone, Debug)]
pub struct KernelStats {
    pub t: f64,
    pub mass: f64,
    pub min: f64,
    /// `max |h(x) − h(x⁻¹)| / max |h|`.
    pub asymmetry: f64,
}

/// Read-mostly store of tabulated heat kernels on one grid.
///
/// Lookups take a shared lock; a missing kernel is computed outside any lock
/// and inserted with `entry().or_insert`, so concurrent misses agree on the
/// stored value.
pub struct KernelCache<T> {
    grid: Grid<T>,
    stencil: Stencil,
    map: RwLock<BTreeMap<u64, Arc<ScalarField<T>>>>,
}

impl<T: Real> KernelCache<T> {
    pub fn new(grid: Grid<T>, stencil: Stencil) -> Self {
        Self { grid, stencil, map: RwLock::new(BTreeMap::new()) }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Generation method recorded with every kernel.
    pub fn method(&self) -> &'static str {
        if self.grid.group().is_heisenberg() {
            self.stencil.label()
        } else {
            "gaussian"
        }
    }

    fn key(t: T) -> u64 {
        t.as_f64().to_bits()
    }

    /// Kernel at time `t`, computing and caching it on a miss.
    pub fn get(&self, t: T) -> Result<Arc<ScalarField<T>>> {
        if let Some(k) = self.map.read().expect("cache lock").get(&Self::key(t)) {
            return Ok(k.clone());
        }
        let k = Arc::new(heat_kernel_with(&self.grid, t, self.stencil)?);
        let mut w = self.map.write().expect("cache lock");
        Ok(w.entry(Self::key(t)).or_insert(k).clone())
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> Vec<T> {
        self.map.read().expect("cache lock").keys().map(|&b| T::lit(f64::from_bits(b))).collect()
    }

    /// Mass, minimum and inversion asymmetry of every cached kernel.
    pub fn stats(&self) -> Vec<KernelStats> {
        let map = self.map.read().expect("cache lock");
        map.iter()
            .map(|(&bits, k)| {
                let g = &self.grid;
                let peak = k.max_abs();
                let mut asym = T::zero();
                for i in 0..g.len() {
                    let l = g.lattice(i);
                    if let Some(j) = g.index_of(&[-l[0], -l[1], -l[2]]) {
                        asym = asym.max((k.values[i] - k.values[j]).abs());
                    }
                }
                KernelStats {
                    t: f64::from_bits(bits),
                    mass: k.integrate().as_f64(),
                    min: k.min().as_f64(),
                    asymmetry: (asym / peak).as_f64(),
                }
            })
            .collect()
    }

    /// Persists every kernel as concatenated binary snapshots.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let h: Vec<f64> = (0..self.grid.dims()).map(|a| self.grid.spacing(a).as_f64()).collect();
        for (_, k) in self.map.read().expect("cache lock").iter() {
            let meta = json!({"kind": "heat-kernel", "method": self.method(), "spacing": h});
            write_snapshot(&mut w, k.as_ref(), Encoding::BinaryLe, meta)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Loads kernels saved by [`KernelCache::save`]; records produced by a
    /// different method or grid are rejected.
    pub fn load(&self, path: &Path) -> Result<usize> {
        let recs = load_snapshots::<T>(path)?;
        let mut n = 0;
        for (f, meta) in recs {
            if meta["method"] != self.method() {
                return Err(Error::InvalidInput(format!("cached kernel method {} != {}", meta["method"], self.method())));
            }
            self.grid.check_same(&f.grid)?;
            let t = f.time.ok_or_else(|| Error::Parse("cached kernel without time".into()))?;
            self.map.write().expect("cache lock").entry(Self::key(t)).or_insert_with(|| Arc::new(f));
            n += 1;
        }
        Ok(n)
    }
}
