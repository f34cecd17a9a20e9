//! The virtual automaton built from a concrete automaton and a virtual map,
//! plus a sampled forward-simulation checker.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::automaton::{sample_execution, sample_point, HybridAutomaton, MODE_TOL};
use crate::error::{Error, Result};
use crate::geom::{transform_region, AffineMap, Region, GEOM_TOL};
use crate::symmetry::{SymmetryPair, VirtualMap};

/// Tolerance when comparing polytopes or maps for deduplication.
const DEDUP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct VirtualAutomaton {
    /// The abstract automaton `A_v`.
    pub auto: HybridAutomaton,
    /// Concrete mode indices per virtual mode.
    pub mode_classes: Vec<Vec<usize>>,
    /// Concrete edge indices per virtual edge.
    pub edge_classes: Vec<Vec<usize>>,
    /// Per virtual edge: `(concrete edge, γ_dst ∘ reset ∘ γ_src⁻¹)`.
    pub reset_provenance: Vec<Vec<(usize, AffineMap)>>,
    /// Virtual mode of each concrete mode.
    pub rv_index: Vec<usize>,
    /// Virtual edge of each concrete edge.
    pub edge_index: Vec<usize>,
    /// Symmetry pair of each concrete mode.
    pub pairs: Vec<SymmetryPair>,
}

fn same_mode(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MODE_TOL)
}

/// `rv(p) = ρ_p(p)`.
pub fn rv_of(phi: &VirtualMap, p: &[f64]) -> Result<Vec<f64>> {
    phi.rv(p)
}

/// Build `A_v` from `a` and `phi`.
pub fn construct_virtual_model(a: &HybridAutomaton, phi: &VirtualMap) -> Result<VirtualAutomaton> {
    a.validate()?;
    let pairs = a
        .modes
        .iter()
        .map(|p| phi.pair(p))
        .collect::<Result<Vec<_>>>()?;

    let mut vmodes: Vec<Vec<f64>> = Vec::new();
    let mut mode_classes: Vec<Vec<usize>> = Vec::new();
    let mut rv_index = Vec::with_capacity(a.modes.len());
    for (i, p) in a.modes.iter().enumerate() {
        let v = pairs[i].rho.apply(p);
        let k = match vmodes.iter().position(|q| same_mode(q, &v)) {
            Some(k) => k,
            None => {
                vmodes.push(v);
                mode_classes.push(Vec::new());
                vmodes.len() - 1
            }
        };
        mode_classes[k].push(i);
        rv_index.push(k);
    }

    let mut vedges: Vec<(usize, usize)> = Vec::new();
    let mut edge_classes: Vec<Vec<usize>> = Vec::new();
    let mut edge_index = Vec::with_capacity(a.edges.len());
    for (e, &(s, d)) in a.edges.iter().enumerate() {
        let ve = (rv_index[s], rv_index[d]);
        let k = match vedges.iter().position(|&f| f == ve) {
            Some(k) => k,
            None => {
                vedges.push(ve);
                edge_classes.push(Vec::new());
                vedges.len() - 1
            }
        };
        edge_classes[k].push(e);
        edge_index.push(k);
    }

    let mut guards = Vec::with_capacity(vedges.len());
    let mut resets = Vec::with_capacity(vedges.len());
    let mut reset_provenance = Vec::with_capacity(vedges.len());
    for class in &edge_classes {
        let mut g = Region::empty(a.n);
        let mut maps: Vec<AffineMap> = Vec::new();
        let mut prov = Vec::new();
        for &e in class {
            let (s, d) = a.edges[e];
            g.union_dedup(&transform_region(&a.guards[e], &pairs[s].gamma)?, DEDUP_TOL);
            for r in &a.resets[e] {
                let m = pairs[d].gamma.compose(&r.compose(&pairs[s].gamma_inv)?)?;
                if !maps.iter().any(|q| q.approx_eq(&m, DEDUP_TOL)) {
                    maps.push(m.clone());
                }
                prov.push((e, m));
            }
        }
        guards.push(g);
        resets.push(maps);
        reset_provenance.push(prov);
    }

    let time_bounds = mode_classes
        .iter()
        .map(|c| c.iter().map(|&i| a.time_bounds[i]).fold(0.0, f64::max))
        .collect();
    let init_set = transform_region(&a.init_set, &pairs[a.init_mode].gamma)?;

    let auto = HybridAutomaton {
        n: a.n,
        modes: vmodes,
        init_set,
        init_mode: rv_index[a.init_mode],
        edges: vedges,
        guards,
        resets,
        dynamics: a.dynamics,
        time_bounds,
    };
    Ok(VirtualAutomaton {
        auto,
        mode_classes,
        edge_classes,
        reset_provenance,
        rv_index,
        edge_index,
        pairs,
    })
}

impl VirtualAutomaton {
    pub fn n_modes(&self) -> usize {
        self.auto.modes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.auto.edges.len()
    }

    /// A copy with every virtual guard scaled by `factor` about the centre of
    /// its bounded dimensions. Used as a broken-abstraction control.
    pub fn with_scaled_guards(&self, factor: f64) -> Result<VirtualAutomaton> {
        let mut out = self.clone();
        for g in &mut out.auto.guards {
            let bb = match g.bounding_box() {
                Some(b) => b,
                None => continue,
            };
            let c: Vec<f64> = bb
                .center()
                .into_iter()
                .map(|v| if v.is_finite() { v } else { 0.0 })
                .collect();
            let n = c.len();
            let a = nalgebra::DMatrix::identity(n, n) * factor;
            let b = nalgebra::DVector::from_iterator(n, c.iter().map(|v| v * (1.0 - factor)));
            *g = transform_region(g, &AffineMap::new(a, b)?)?;
        }
        Ok(out)
    }

    /// Structured dump: modes, edges, classes and guard vertices.
    pub fn dump_json(&self) -> serde_json::Value {
        let guards: Vec<Vec<Vec<Vec<f64>>>> = self
            .auto
            .guards
            .iter()
            .map(|g| g.polys().iter().map(|p| p.vertices()).collect())
            .collect();
        serde_json::json!({
            "modes": self.auto.modes,
            "edges": self.auto.edges,
            "init_mode": self.auto.init_mode,
            "time_bounds": self.auto.time_bounds,
            "mode_classes": self.mode_classes,
            "edge_classes": self.edge_classes,
            "reset_classes": self.reset_provenance.iter().map(|v| v.len()).collect::<Vec<_>>(),
            "reset_maps": self.auto.resets.iter().map(|v| v.len()).collect::<Vec<_>>(),
            "guard_vertices": guards,
        })
    }
}

/// A single FSR violation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FsrViolation {
    pub execution: usize,
    /// Position in the execution (trajectory or transition index).
    pub index: usize,
    pub what: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FsrReport {
    pub executions: usize,
    pub transitions: usize,
    pub violations: Vec<FsrViolation>,
}

impl FsrReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Map sampled concrete executions into `va` and check they are executions
/// of `A_v`: initial state, guard and reset membership, and trajectories
/// of `f_v` (within `tol`).
pub fn check_fsr(
    a: &HybridAutomaton,
    va: &VirtualAutomaton,
    phi: &VirtualMap,
    n_execs: usize,
    j: usize,
    seed: u64,
    tol: f64,
    dt: f64,
) -> Result<FsrReport> {
    let mut rep = FsrReport {
        executions: n_execs,
        ..FsrReport::default()
    };
    let av = &va.auto;
    for k in 0..n_execs {
        let exec = sample_execution(a, seed.wrapping_add(k as u64), j, dt)?;
        let mut bad = |index: usize, what: String| {
            rep.violations.push(FsrViolation {
                execution: k,
                index,
                what,
            })
        };
        let images: Vec<(Vec<Vec<f64>>, usize, Vec<f64>)> = exec
            .pairs
            .iter()
            .map(|(tr, p)| {
                let pair = phi.pair(&a.modes[*p])?;
                let states = tr.states.iter().map(|x| pair.gamma.apply(x)).collect();
                Ok((states, va.rv_index[*p], pair.rho.apply(&a.modes[*p])))
            })
            .collect::<Result<_>>()?;

        if !av.init_set.contains_point(&images[0].0[0], GEOM_TOL) {
            bad(0, "initial state outside the virtual initial set".into());
        }
        for (i, (states, pv, rvp)) in images.iter().enumerate() {
            if !same_mode(rvp, &av.modes[*pv]) {
                bad(i, "mode image differs from its class representative".into());
            }
            let tr = &exec.pairs[i].0;
            let sim = av.dynamics.simulate(&states[0], &av.modes[*pv], tr.dur(), dt)?;
            let dev = sim
                .states
                .iter()
                .zip(states)
                .flat_map(|(u, v)| u.iter().zip(v).map(|(a, b)| (a - b).abs()))
                .fold(0.0f64, f64::max);
            if sim.len() != states.len() || dev > tol {
                bad(i, format!("trajectory deviates by {dev:.3e}"));
            }
        }
        for (i, &e) in exec.edges.iter().enumerate() {
            rep.transitions += 1;
            let ev = va.edge_index[e];
            if av.edges[ev] != (images[i].1, images[i + 1].1) {
                bad(i, "edge image does not join the mode images".into());
            }
            let last = images[i].0.last().expect("trajectory has a state");
            if !av.guards[ev].contains_point(last, GEOM_TOL) {
                bad(i, "transition leaves outside the virtual guard".into());
            }
            let next = &images[i + 1].0[0];
            let tol_r = GEOM_TOL.max(tol);
            if !av.resets[ev].iter().any(|m| close(&m.apply(last), next, tol_r)) {
                bad(i, "transition does not follow a virtual reset".into());
            }
        }
    }
    Ok(rep)
}

/// Checks that `guard_v(e_v) ⊇ γ_src(guard(e))` on sampled points of every
/// concrete guard (bounded dimensions only).
pub fn guard_superset_holds(a: &HybridAutomaton, va: &VirtualAutomaton, samples: usize, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (e, &(s, _)) in a.edges.iter().enumerate() {
        let ev = va.edge_index[e];
        for p in a.guards[e].polys() {
            let mut clipped = Region::from_poly(p.clone());
            if let Some(bb) = clipped.bounding_box() {
                if !bb.is_bounded() {
                    let lo: Vec<f64> = bb.lo().iter().map(|v| v.max(-10.0)).collect();
                    let hi: Vec<f64> = bb.hi().iter().map(|v| v.min(10.0)).collect();
                    let b = crate::geom::HyperRect::new(lo, hi)?;
                    clipped = crate::geom::intersect(&clipped, &Region::from_rect(&b));
                }
            }
            for _ in 0..samples {
                let x = match sample_point(&clipped, &mut rng) {
                    Some(x) => x,
                    None => break,
                };
                let y = va.pairs[s].gamma.apply(&x);
                if !va.auto.guards[ev].contains_point(&y, GEOM_TOL) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Index of the virtual mode equal to `rv(p)`.
pub fn virtual_mode_of(va: &VirtualAutomaton, phi: &VirtualMap, p: &[f64]) -> Result<usize> {
    let v = phi.rv(p)?;
    va.auto
        .modes
        .iter()
        .position(|q| same_mode(q, &v))
        .ok_or(Error::UnknownMode(v))
}
