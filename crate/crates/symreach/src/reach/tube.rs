//! Cell reachtubes: the centre of a grid cell simulated forward, with a
//! cell-sized box around every sampled state.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::Dynamics;
use crate::error::Result;
use crate::geom::{CellId, Grid, HyperRect};

/// One box of a reachtube and the time interval it covers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSegment {
    pub rect: HyperRect,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Boxes with contiguous time intervals starting at 0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Reachtube {
    pub segments: Vec<TubeSegment>,
}

impl Reachtube {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn bounding_box(&self) -> Option<HyperRect> {
        self.segments.iter().map(|s| s.rect.clone()).reduce(|a, b| a.hull(&b))
    }
}

/// Simulated centres of one cell at every `dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellTube {
    pub(crate) n: usize,
    pub(crate) dt: f64,
    /// `n` numbers per state.
    pub(crate) centres: Vec<f64>,
    pub(crate) half: Vec<f64>,
}

/// Number of samples covering `[0, t]` at step `dt`: a partial last step is
/// rounded up to a full one.
pub(crate) fn states_for(t: f64, dt: f64) -> usize {
    (t / dt - 1e-9).ceil().max(0.0) as usize + 1
}

impl CellTube {
    pub(crate) fn compute(dyn_: &Dynamics, centre: &[f64], p: &[f64], t: f64, dt: f64, half: Vec<f64>) -> Result<Self> {
        let n = centre.len();
        let k = states_for(t, dt);
        let mut centres = Vec::with_capacity(k * n);
        dyn_.integrate(centre, p, (k - 1) as f64 * dt, dt, |_, x| centres.extend_from_slice(x))?;
        Ok(CellTube { n, dt, centres, half })
    }

    /// Continue integrating until the tube covers `t`.
    pub(crate) fn extend(&mut self, dyn_: &Dynamics, p: &[f64], t: f64) -> Result<()> {
        let k = states_for(t, self.dt);
        let have = self.n_states();
        if k <= have {
            return Ok(());
        }
        let last = self.state(have - 1).to_vec();
        let mut first = true;
        let centres = &mut self.centres;
        dyn_.integrate(&last, p, (k - have) as f64 * self.dt, self.dt, |_, x| {
            if first {
                first = false;
            } else {
                centres.extend_from_slice(x);
            }
        })
    }

    pub fn n_states(&self) -> usize {
        self.centres.len() / self.n
    }

    pub fn duration(&self) -> f64 {
        (self.n_states() - 1) as f64 * self.dt
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.centres[i * self.n..(i + 1) * self.n]
    }

    pub fn rect(&self, i: usize) -> HyperRect {
        let c = self.state(i);
        HyperRect::new_unchecked(
            c.iter().zip(&self.half).map(|(v, h)| v - h).collect(),
            c.iter().zip(&self.half).map(|(v, h)| v + h).collect(),
        )
    }

    /// Box hull of states `0..k`.
    pub fn bbox(&self, k: usize) -> HyperRect {
        let mut lo = vec![f64::INFINITY; self.n];
        let mut hi = vec![f64::NEG_INFINITY; self.n];
        for i in 0..k {
            for (d, v) in self.state(i).iter().enumerate() {
                lo[d] = lo[d].min(*v);
                hi[d] = hi[d].max(*v);
            }
        }
        for d in 0..self.n {
            lo[d] -= self.half[d];
            hi[d] += self.half[d];
        }
        HyperRect::new_unchecked(lo, hi)
    }

    /// The first `k` states as a reachtube; each box spans half a step on
    /// either side of its sample time, clipped to `[0, (k−1)·dt]`.
    pub fn to_reachtube(&self, k: usize) -> Reachtube {
        let end = (k - 1) as f64 * self.dt;
        Reachtube {
            segments: (0..k)
                .map(|i| TubeSegment {
                    rect: self.rect(i),
                    t_lo: ((i as f64 - 0.5) * self.dt).max(0.0),
                    t_hi: ((i as f64 + 0.5) * self.dt).min(end),
                })
                .collect(),
        }
    }
}

/// A stored tube truncated to the requested horizon.
#[derive(Clone, Debug)]
pub struct TubeRef {
    pub cell: CellId,
    pub tube: Arc<CellTube>,
    pub n_states: usize,
}

impl TubeRef {
    pub fn rects(&self) -> impl Iterator<Item = HyperRect> + '_ {
        (0..self.n_states).map(|i| self.tube.rect(i))
    }

    pub fn bbox(&self) -> HyperRect {
        self.tube.bbox(self.n_states)
    }
}

/// Reachtube of a single cell: its centre simulated for `t` with a
/// cell-sized box at every state.
pub fn cell_reachtube(dynamics: &Dynamics, cell: CellId, g: &Grid, p: &[f64], t: f64, dt: f64) -> Result<Reachtube> {
    let half = g.cell_width().iter().map(|w| 0.5 * w).collect();
    let tube = CellTube::compute(dynamics, &g.cell_center(&cell), p, t, dt, half)?;
    Ok(tube.to_reachtube(tube.n_states()))
}
