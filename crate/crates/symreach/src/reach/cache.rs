//! Tube and safety caches.

use std::collections::HashMap;
use std::sync::Arc;

use crate::dynamics::Dynamics;
use crate::error::Result;
use crate::geom::{CellId, Grid, Region, GEOM_TOL};

use super::tube::{states_for, CellTube, TubeRef};

/// Mode vector quantised to `1e-9` so it can be hashed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeKey(Vec<i64>);

impl ModeKey {
    pub fn new(p: &[f64]) -> Self {
        ModeKey(p.iter().map(|v| (v * 1e9).round() as i64).collect())
    }
}

/// Stored cell tubes for one grid and step, keyed by mode and cell.
#[derive(Debug)]
pub struct TubeCache {
    grid: Grid,
    dt: f64,
    dynamics: Dynamics,
    store: HashMap<(ModeKey, CellId), Arc<CellTube>>,
}

impl TubeCache {
    pub fn new(dynamics: Dynamics, grid: Grid, dt: f64) -> Self {
        TubeCache {
            grid,
            dt,
            dynamics,
            store: HashMap::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    /// A stored tube covering `t`, truncated to it.
    pub fn get_tube(&self, p: &[f64], cell: CellId, t: f64) -> Option<TubeRef> {
        let k = states_for(t, self.dt);
        self.store
            .get(&(ModeKey::new(p), cell))
            .filter(|tube| tube.n_states() >= k)
            .map(|tube| TubeRef {
                cell,
                tube: Arc::clone(tube),
                n_states: k,
            })
    }

    /// Store a tube; a shorter tube under the same key is replaced, a longer
    /// one is kept.
    pub fn store_tube(&mut self, p: &[f64], cell: CellId, tube: Arc<CellTube>) {
        let key = (ModeKey::new(p), cell);
        match self.store.get(&key) {
            Some(old) if old.n_states() >= tube.n_states() => {}
            _ => {
                self.store.insert(key, tube);
            }
        }
    }

    /// Retrieve or compute (extending a shorter stored tube). The flag is
    /// `true` when the tube was computed.
    pub fn fetch(&mut self, p: &[f64], cell: CellId, t: f64) -> Result<(TubeRef, bool)> {
        if let Some(r) = self.get_tube(p, cell, t) {
            return Ok((r, false));
        }
        let key = (ModeKey::new(p), cell);
        let tube = match self.store.get(&key) {
            Some(short) => {
                let mut longer = CellTube::clone(short);
                longer.extend(&self.dynamics, p, t)?;
                longer
            }
            None => {
                let half = self.grid.cell_width().iter().map(|w| 0.5 * w).collect();
                let centre = self.grid.cell_center(&cell);
                CellTube::compute(&self.dynamics, &centre, p, t, self.dt, half)?
            }
        };
        let tube = Arc::new(tube);
        self.store.insert(key, Arc::clone(&tube));
        Ok((
            TubeRef {
                cell,
                tube,
                n_states: states_for(t, self.dt),
            },
            true,
        ))
    }
}

/// Is `a` inside `b`? Decided on the bounding box of `a`, which must lie in
/// a single member of `b`. Sound for cache lookups: a `false` only costs a
/// miss.
pub(crate) fn region_subset(a: &Region, b: &Region) -> bool {
    let bb = match a.bounding_box() {
        Some(bb) => bb,
        None => return true,
    };
    b.polys().iter().any(|q| match q.as_box() {
        Some(qb) => qb.contains_rect(&bb, GEOM_TOL),
        None => bb.is_bounded() && bb.vertices().iter().all(|v| q.contains_point(v, GEOM_TOL)),
    })
}

#[derive(Clone, Debug)]
struct SafetyEntry {
    k: Region,
    t: f64,
    u: Region,
    intersects: bool,
}

/// Results of intersecting reachtubes with unsafe sets, in virtual
/// coordinates.
#[derive(Clone, Debug, Default)]
pub struct SafetyCache {
    entries: Vec<SafetyEntry>,
}

impl SafetyCache {
    pub fn new() -> Self {
        SafetyCache::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Some(false)` if a stored empty intersection covers the query (larger
    /// initial set, longer horizon, larger unsafe set); `Some(true)` if a
    /// stored hit is covered by it; otherwise `None`.
    pub fn get_intersect(&self, k: &Region, t: f64, u: &Region) -> Option<bool> {
        for e in &self.entries {
            if !e.intersects && t <= e.t && region_subset(k, &e.k) && region_subset(u, &e.u) {
                return Some(false);
            }
            if e.intersects && e.t <= t && region_subset(&e.k, k) && region_subset(&e.u, u) {
                return Some(true);
            }
        }
        None
    }

    pub fn store_intersect(&mut self, k: Region, t: f64, u: Region, intersects: bool) {
        self.entries.push(SafetyEntry { k, t, u, intersects });
    }
}
