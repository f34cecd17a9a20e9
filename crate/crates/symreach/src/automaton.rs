//! Hybrid automata, executions and the waypoint/road builders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Dynamics, Trajectory};
use crate::error::{Error, Result};
use crate::geom::{AffineMap, ConvexPolytope, HyperRect, Region, GEOM_TOL};

/// Tolerance used when comparing mode vectors and waypoint coordinates.
pub const MODE_TOL: f64 = 1e-9;

/// How modes encode the path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeStyle {
    /// A mode is the waypoint being approached.
    Waypoint,
    /// A mode is a road `[src, dst]`.
    Road,
}

/// Hybrid automaton with per-mode time bounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HybridAutomaton {
    pub n: usize,
    pub modes: Vec<Vec<f64>>,
    pub init_set: Region,
    pub init_mode: usize,
    pub edges: Vec<(usize, usize)>,
    pub guards: Vec<Region>,
    /// Union semantics: a transition may apply any of the maps.
    pub resets: Vec<Vec<AffineMap>>,
    pub dynamics: Dynamics,
    pub time_bounds: Vec<f64>,
}

/// Sequence of mode indices joined by edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn truncated(&self, len: usize) -> Path {
        Path(self.0[..len.min(self.0.len())].to_vec())
    }
}

impl HybridAutomaton {
    /// Mode vector dimension.
    pub fn m(&self) -> usize {
        self.modes.first().map_or(0, |p| p.len())
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.modes.len();
        let bad = |msg: String| Err(Error::InvalidGeometry(msg));
        if self.init_mode >= k {
            return bad(format!("initial mode {} out of range", self.init_mode));
        }
        if self.init_set.dim() != self.n || self.init_set.is_empty() {
            return bad("initial set must be a nonempty region of the state dimension".into());
        }
        if self.guards.len() != self.edges.len() || self.resets.len() != self.edges.len() {
            return bad("one guard and one reset list per edge".into());
        }
        for (i, &(s, d)) in self.edges.iter().enumerate() {
            if s >= k || d >= k {
                return bad(format!("edge {i} has an endpoint out of range"));
            }
            if self.guards[i].dim() != self.n {
                return bad(format!("guard {i} has the wrong dimension"));
            }
        }
        if self.time_bounds.len() != k || self.time_bounds.iter().any(|t| !(*t > 0.0)) {
            return bad("time bounds must be positive, one per mode".into());
        }
        Ok(())
    }

    /// Edge indices leaving `p`.
    pub fn successors(&self, p: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].0 == p).collect()
    }

    pub fn edge_between(&self, src: usize, dst: usize) -> Option<usize> {
        self.edges.iter().position(|&(s, d)| s == src && d == dst)
    }

    /// Follow the first outgoing edge from the initial mode for up to
    /// `len − 1` transitions.
    pub fn unroll(&self, len: usize) -> Path {
        let mut out = Vec::with_capacity(len);
        if len == 0 {
            return Path(out);
        }
        let mut p = self.init_mode;
        out.push(p);
        while out.len() < len {
            match self.successors(p).first() {
                Some(&e) => {
                    p = self.edges[e].1;
                    out.push(p);
                }
                None => break,
            }
        }
        Path(out)
    }

    pub fn check_path(&self, path: &Path) -> Result<()> {
        for w in path.0.windows(2) {
            if self.edge_between(w[0], w[1]).is_none() {
                return Err(Error::InvalidEdge {
                    edge: usize::MAX,
                    mode: w[0],
                });
            }
        }
        Ok(())
    }

    /// Modes reachable from the initial mode in the mode graph.
    pub fn reachable_modes(&self) -> Vec<usize> {
        let mut seen = vec![false; self.modes.len()];
        let mut stack = vec![self.init_mode];
        seen[self.init_mode] = true;
        while let Some(p) = stack.pop() {
            for e in self.successors(p) {
                let d = self.edges[e].1;
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        (0..self.modes.len()).filter(|&p| seen[p]).collect()
    }
}

/// `B(w, ε) × ℝ` lifted to `n` state dimensions.
fn planar_guard(w: &[f64], eps: &[f64], n: usize) -> Result<ConvexPolytope> {
    let mut r = HyperRect::centered(&w[..2], eps)?;
    for _ in 2..n {
        r = r.extend(f64::NEG_INFINITY, f64::INFINITY);
    }
    Ok(r.to_polytope())
}

/// Waypoint-following automaton: mode `i` steers toward waypoint `i`, and
/// edge `(i, i+1)` fires inside `B(wᵢ, ε₁)`; the first edge also accepts
/// `B(w₀, ε₀)`. With `loops ≥ 1` the waypoints form a cycle.
pub fn build_waypoint_automaton(
    waypoints: &[[f64; 2]],
    eps0: [f64; 2],
    eps1: [f64; 2],
    init: &HyperRect,
    dynamics: Dynamics,
    time_bound: f64,
    loops: usize,
) -> Result<HybridAutomaton> {
    let k = waypoints.len();
    if k < 2 {
        return Err(Error::InvalidGeometry("need at least two waypoints".into()));
    }
    let n = dynamics.state_dim();
    let modes: Vec<Vec<f64>> = waypoints.iter().map(|w| w.to_vec()).collect();
    let n_edges = if loops == 0 { k - 1 } else { k };
    let mut edges = Vec::new();
    let mut guards = Vec::new();
    for i in 0..n_edges {
        edges.push((i, (i + 1) % k));
        let mut g = Region::from_poly(planar_guard(&modes[i], &eps1, n)?);
        if i == 0 {
            g = Region::from_poly(planar_guard(&modes[i], &eps0, n)?).union(&g);
        }
        guards.push(g);
    }
    let a = HybridAutomaton {
        n,
        init_set: Region::from_rect(init),
        init_mode: 0,
        resets: vec![vec![AffineMap::identity(n)]; edges.len()],
        edges,
        guards,
        dynamics,
        time_bounds: vec![time_bound; k],
        modes,
    };
    a.validate()?;
    Ok(a)
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MODE_TOL)
}

/// Road automaton: each distinct road `[src, dst]` is a mode, consecutive
/// roads are joined by an edge guarded by `B(dst, ε) × ℝ` (ε₀ on the first
/// edge, ε₁ elsewhere). When the last road ends where a later-than-first
/// road starts, the closing edge is added.
pub fn build_road_automaton(
    roads: &[([f64; 2], [f64; 2])],
    eps0: [f64; 2],
    eps1: [f64; 2],
    init: &HyperRect,
    dynamics: Dynamics,
    time_bound: f64,
) -> Result<HybridAutomaton> {
    if roads.is_empty() {
        return Err(Error::InvalidGeometry("need at least one road".into()));
    }
    if roads.iter().any(|(s, d)| same_point(s, d)) {
        return Err(Error::DegenerateRoad);
    }
    for i in 0..roads.len().saturating_sub(1) {
        if !same_point(&roads[i].1, &roads[i + 1].0) {
            return Err(Error::DisconnectedPath { index: i, next: i + 1 });
        }
    }
    let n = dynamics.state_dim();
    let mut modes: Vec<Vec<f64>> = Vec::new();
    let mut index = Vec::with_capacity(roads.len());
    for (s, d) in roads {
        let v = vec![s[0], s[1], d[0], d[1]];
        let i = match modes.iter().position(|m| same_point(m, &v)) {
            Some(i) => i,
            None => {
                modes.push(v);
                modes.len() - 1
            }
        };
        index.push(i);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for w in index.windows(2) {
        if !pairs.contains(&(w[0], w[1])) {
            pairs.push((w[0], w[1]));
        }
    }
    let last = *index.last().expect("nonempty");
    if let Some(first_src) = (1..modes.len()).find(|&j| same_point(&modes[last][2..], &modes[j][..2])) {
        if index.len() > 1 && !pairs.contains(&(last, first_src)) {
            pairs.push((last, first_src));
        }
    }
    let mut guards = Vec::new();
    for (k, &(s, _)) in pairs.iter().enumerate() {
        let eps = if k == 0 { eps0 } else { eps1 };
        guards.push(Region::from_poly(planar_guard(&modes[s][2..], &eps, n)?));
    }
    let a = HybridAutomaton {
        n,
        init_set: Region::from_rect(init),
        init_mode: index[0],
        resets: vec![vec![AffineMap::identity(n)]; pairs.len()],
        edges: pairs,
        guards,
        dynamics,
        time_bounds: vec![time_bound; modes.len()],
        modes,
    };
    a.validate()?;
    Ok(a)
}

/// Road-visit sequence of a road list as mode indices (modes deduplicated
/// the same way as [`build_road_automaton`]).
pub fn road_path(a: &HybridAutomaton, roads: &[([f64; 2], [f64; 2])]) -> Path {
    Path(
        roads
            .iter()
            .map(|(s, d)| {
                let v = [s[0], s[1], d[0], d[1]];
                a.modes
                    .iter()
                    .position(|m| same_point(m, &v))
                    .expect("road is a mode")
            })
            .collect(),
    )
}

/// Post-states of a discrete transition.
pub fn step_discrete(a: &HybridAutomaton, x: &[f64], p: usize, e: usize) -> Result<Region> {
    let (src, _) = a.edges[e];
    if src != p {
        return Err(Error::InvalidEdge { edge: e, mode: p });
    }
    if !a.guards[e].contains_point(x, GEOM_TOL) {
        return Err(Error::GuardNotSatisfied { edge: e });
    }
    let mut out = Region::empty(a.n);
    for m in &a.resets[e] {
        out.push(HyperRect::point(&m.apply(x)).to_polytope());
    }
    Ok(out)
}

/// Alternating trajectories and modes joined by transitions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Execution {
    pub pairs: Vec<(Trajectory, usize)>,
    /// Edge taken after each trajectory except the last.
    pub edges: Vec<usize>,
}

impl Execution {
    pub fn path(&self) -> Path {
        Path(self.pairs.iter().map(|(_, p)| *p).collect())
    }

    /// Check the execution invariants against `a`.
    pub fn check(&self, a: &HybridAutomaton) -> std::result::Result<(), String> {
        if self.edges.len() + 1 != self.pairs.len() {
            return Err("one edge per transition".into());
        }
        for (i, (tr, p)) in self.pairs.iter().enumerate() {
            if tr.dur() > a.time_bounds[*p] + 1e-9 {
                return Err(format!("trajectory {i} exceeds the time bound"));
            }
        }
        for (i, &e) in self.edges.iter().enumerate() {
            let (tr, p) = &self.pairs[i];
            let (next, q) = &self.pairs[i + 1];
            if a.edges[e] != (*p, *q) {
                return Err(format!("edge {e} does not join modes {p} and {q}"));
            }
            if !a.guards[e].contains_point(tr.lstate(), GEOM_TOL) {
                return Err(format!("transition {i} leaves outside the guard"));
            }
            let ok = a.resets[e].iter().any(|m| {
                m.apply(tr.lstate())
                    .iter()
                    .zip(next.fstate())
                    .all(|(u, v)| (u - v).abs() <= GEOM_TOL)
            });
            if !ok {
                return Err(format!("transition {i} does not follow a reset map"));
            }
        }
        Ok(())
    }
}

/// Uniform sample from the bounding box of `r`, rejected until inside `r`.
pub fn sample_point(r: &Region, rng: &mut impl Rng) -> Option<Vec<f64>> {
    let bb = r.bounding_box()?;
    if !bb.is_bounded() {
        return None;
    }
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..bb.dim())
            .map(|i| {
                let (l, h) = (bb.lo()[i], bb.hi()[i]);
                if h > l {
                    rng.random_range(l..=h)
                } else {
                    l
                }
            })
            .collect();
        if r.contains_point(&x, 0.0) {
            return Some(x);
        }
    }
    None
}

/// Run the automaton from a random initial state.
pub fn sample_execution(a: &HybridAutomaton, seed: u64, max_transitions: usize, dt: f64) -> Result<Execution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = sample_point(&a.init_set, &mut rng)
        .ok_or_else(|| Error::InvalidGeometry("cannot sample the initial set".into()))?;
    sample_execution_from(a, &x0, &mut rng, max_transitions, dt)
}

/// Simulate each mode up to its time bound; at the stop, pick uniformly among
/// enabled edges (and among their reset maps), or terminate if none is enabled.
pub fn sample_execution_from(
    a: &HybridAutomaton,
    x0: &[f64],
    rng: &mut impl Rng,
    max_transitions: usize,
    dt: f64,
) -> Result<Execution> {
    let mut pairs = Vec::new();
    let mut edges = Vec::new();
    let mut p = a.init_mode;
    let mut x = x0.to_vec();
    loop {
        let tr = a.dynamics.simulate(&x, &a.modes[p], a.time_bounds[p], dt)?;
        let last = tr.lstate().to_vec();
        pairs.push((tr, p));
        if edges.len() == max_transitions {
            break;
        }
        let enabled: Vec<usize> = a
            .successors(p)
            .into_iter()
            .filter(|&e| a.guards[e].contains_point(&last, GEOM_TOL))
            .collect();
        if enabled.is_empty() {
            break;
        }
        let e = enabled[rng.random_range(0..enabled.len())];
        let maps = &a.resets[e];
        let m = &maps[rng.random_range(0..maps.len())];
        x = m.apply(&last);
        p = a.edges[e].1;
        edges.push(e);
    }
    Ok(Execution { pairs, edges })
}
