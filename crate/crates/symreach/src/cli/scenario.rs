//! Scenario files: TOML with a schema version, one file per scenario and an
//! optional constants file for the robot.

use std::f64::consts::PI;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::automaton::{build_road_automaton, build_waypoint_automaton, road_path, HybridAutomaton, ModeStyle, Path};
use crate::dynamics::{Dynamics, DynamicsId, DEFAULT_LENGTH, DEFAULT_SPEED};
use crate::error::{Error, Result};
use crate::geom::{AffineMap, Grid, HyperRect, Region};
use crate::reach::{Horizon, Method, ReachConfig};
use crate::symmetry::{make_custom_map, make_tr_map_axis, make_translation_map, MapKind, SymmetryPair, VirtualMap};

use super::paths::{self, Point, Road};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_TIME_BOUND: f64 = 10.0;
pub const DEFAULT_CELL: f64 = 0.2;
pub const DEFAULT_HEADING_CELL: f64 = PI / 16.0;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: Option<u32>,
    name: Option<String>,
    dynamics: Option<String>,
    mode_style: Option<String>,
    map: Option<String>,
    method: Option<String>,
    target_axis: Option<usize>,
    constants: Option<String>,
    path: Option<RawPath>,
    guards: Option<RawGuards>,
    init: Option<RawBox>,
    grid: Option<RawGrid>,
    domain: Option<RawLoHi>,
    sim: Option<RawSim>,
    robot: Option<RawRobot>,
    #[serde(default, rename = "unsafe")]
    unsafe_: Vec<RawLoHi>,
    #[serde(default)]
    custom_map: Vec<RawPair>,
}

/// One entry of a per-mode symmetry table.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawPair {
    pub mode: Vec<f64>,
    pub gamma_a: Vec<Vec<f64>>,
    pub gamma_b: Vec<f64>,
    pub rho_a: Vec<Vec<f64>>,
    pub rho_b: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPath {
    kind: String,
    width: Option<f64>,
    height: Option<f64>,
    loops: Option<usize>,
    start: Option<[f64; 2]>,
    long: Option<f64>,
    short: Option<f64>,
    roads: Option<usize>,
    lead_in: Option<f64>,
    edge: Option<f64>,
    seed: Option<u64>,
    min_len: Option<u32>,
    max_len: Option<u32>,
    waypoints: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGuards {
    eps0: Option<[f64; 2]>,
    eps1: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    center: Vec<f64>,
    width: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoHi {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    cell_width: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawJ {
    N(usize),
    S(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: Option<f64>,
    time_bound: Option<f64>,
    time_margin: Option<f64>,
    j: Option<RawJ>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRobot {
    v: Option<f64>,
    l: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Rectangle,
    SShaped,
    Koch,
    Random,
    Custom,
}

/// Per-mode time bounds: one value for every mode, or the length of the leg
/// leading to the mode's target divided by the speed, plus a margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TimeSpec {
    Fixed(f64),
    LegPlus(f64),
}

/// A validated scenario.
#[derive(Clone, Debug, Serialize)]
pub struct Scenario {
    pub name: String,
    pub source: Option<PathBuf>,
    pub dynamics: Dynamics,
    pub mode_style: ModeStyle,
    pub path_kind: PathKind,
    /// The path as a chain of roads; waypoint scenarios use the road ends.
    pub roads: Vec<Road>,
    /// Number of waypoint visits for waypoint scenarios.
    pub visits: usize,
    pub eps0: [f64; 2],
    pub eps1: [f64; 2],
    pub init: HyperRect,
    pub unsafe_sets: Vec<HyperRect>,
    pub domain: HyperRect,
    pub cell_width: Vec<f64>,
    pub dt: f64,
    pub time: TimeSpec,
    pub j: Horizon,
    pub map: MapKind,
    pub method: Method,
    pub target_axis: usize,
    pub custom_map: Vec<RawPair>,
}

fn err(path: &str, msg: impl Into<String>) -> Error {
    Error::schema(path, msg)
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(err(path, format!("must be positive, got {v}")))
    }
}

pub fn parse_horizon(s: &str) -> Result<Horizon> {
    match s.trim() {
        "inf" | "∞" | "infinite" => Ok(Horizon::Infinite),
        t => t
            .parse::<usize>()
            .map(Horizon::Finite)
            .map_err(|_| err("sim.j", format!("expected a count or \"inf\", got {t:?}"))),
    }
}

pub fn parse_method(s: &str) -> Result<Method> {
    match s.to_ascii_lowercase().as_str() {
        "ns" => Ok(Method::NS),
        "sc" => Ok(Method::SC),
        "sv" => Ok(Method::SV),
        _ => Err(err("method", format!("unknown method {s:?}"))),
    }
}

pub fn parse_map(s: &str) -> Result<MapKind> {
    match s.to_ascii_lowercase().as_str() {
        "t" => Ok(MapKind::T),
        "tr" => Ok(MapKind::TR),
        "custom" => Ok(MapKind::Custom),
        _ => Err(err("map", format!("unknown map {s:?}"))),
    }
}

fn load_constants(base: Option<&FsPath>, file: &str) -> Result<(Option<f64>, Option<f64>)> {
    let p = match base {
        Some(b) => b.join(file),
        None => PathBuf::from(file),
    };
    let text = std::fs::read_to_string(&p)?;
    let raw: RawRobot = toml::from_str(&text).map_err(|e| err("constants", e.to_string()))?;
    Ok((raw.v, raw.l))
}

/// Parse and validate scenario text; `base` resolves the constants file.
pub fn parse_scenario(text: &str, base: Option<&FsPath>) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| err("<file>", e.to_string()))?;
    match raw.schema_version {
        None => return Err(err("schema_version", "missing")),
        Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(err("schema_version", format!("unsupported version {v}"))),
    }
    let name = raw.name.unwrap_or_else(|| "unnamed".into());
    let id = match raw.dynamics.as_deref().unwrap_or("robot") {
        "robot" => DynamicsId::Robot,
        "linear3d" => DynamicsId::Linear3D,
        d => return Err(err("dynamics", format!("unknown dynamics {d:?}"))),
    };
    let (mut v, mut l) = (DEFAULT_SPEED, DEFAULT_LENGTH);
    if let Some(f) = &raw.constants {
        let (cv, cl) = load_constants(base, f)?;
        v = cv.unwrap_or(v);
        l = cl.unwrap_or(l);
    }
    if let Some(r) = &raw.robot {
        v = r.v.unwrap_or(v);
        l = r.l.unwrap_or(l);
    }
    positive("robot.v", v)?;
    positive("robot.l", l)?;
    let dynamics = Dynamics { id, v, l };

    let mode_style = match raw.mode_style.as_deref().unwrap_or("road") {
        "waypoint" => ModeStyle::Waypoint,
        "road" => ModeStyle::Road,
        s => return Err(err("mode_style", format!("unknown mode style {s:?}"))),
    };
    let map = parse_map(raw.map.as_deref().unwrap_or("t"))?;
    let method = parse_method(raw.method.as_deref().unwrap_or("sv"))?;
    let target_axis = raw.target_axis.unwrap_or(0);
    if target_axis > 1 {
        return Err(err("target_axis", "must be 0 or 1"));
    }

    let rp = raw.path.ok_or_else(|| err("path", "missing"))?;
    let (path_kind, roads, visits) = build_path(&rp, mode_style)?;

    let g = raw.guards.unwrap_or(RawGuards { eps0: None, eps1: None });
    let eps0 = g.eps0.unwrap_or([1.0, 1.4]);
    let eps1 = g.eps1.unwrap_or([0.6, 1.0]);
    for (k, e) in [("guards.eps0", eps0), ("guards.eps1", eps1)] {
        positive(k, e[0])?;
        positive(k, e[1])?;
    }

    let n = 3;
    let init = match raw.init {
        Some(b) => {
            if b.center.len() != n || b.width.len() != n {
                return Err(err("init", format!("center and width need {n} entries")));
            }
            HyperRect::centered(&b.center, &b.width).map_err(|e| err("init", e.to_string()))?
        }
        None => return Err(err("init", "missing")),
    };
    let mut cell_width = raw
        .grid
        .and_then(|g| g.cell_width)
        .unwrap_or_else(|| default_cells(id));
    if cell_width.len() != n {
        return Err(err("grid.cell_width", format!("needs {n} entries")));
    }
    for w in &mut cell_width {
        *w = positive("grid.cell_width", *w)?;
    }
    let domain = match raw.domain {
        Some(d) => HyperRect::new(d.lo, d.hi).map_err(|e| err("domain", e.to_string()))?,
        None => return Err(err("domain", "missing")),
    };
    let mut unsafe_sets = Vec::new();
    for (i, u) in raw.unsafe_.into_iter().enumerate() {
        let r = HyperRect::new(u.lo, u.hi).map_err(|e| err(&format!("unsafe[{i}]"), e.to_string()))?;
        if r.dim() != n {
            return Err(err(&format!("unsafe[{i}]"), format!("needs {n} entries")));
        }
        unsafe_sets.push(r);
    }
    let sim = raw.sim.unwrap_or(RawSim {
        dt: None,
        time_bound: None,
        time_margin: None,
        j: None,
    });
    let dt = positive("sim.dt", sim.dt.unwrap_or(DEFAULT_DT))?;
    let time = match (sim.time_bound, sim.time_margin) {
        (Some(_), Some(_)) => return Err(err("sim", "give time_bound or time_margin, not both")),
        (Some(t), None) => TimeSpec::Fixed(positive("sim.time_bound", t)?),
        (None, Some(m)) => {
            if !(m.is_finite() && m >= 0.0) {
                return Err(err("sim.time_margin", "must be non-negative"));
            }
            TimeSpec::LegPlus(m)
        }
        (None, None) => TimeSpec::Fixed(DEFAULT_TIME_BOUND),
    };
    let j = match sim.j {
        None => Horizon::Finite(roads.len().max(visits).saturating_sub(1)),
        Some(RawJ::N(k)) => Horizon::Finite(k),
        Some(RawJ::S(s)) => parse_horizon(&s)?,
    };
    let s = Scenario {
        name,
        source: None,
        dynamics,
        mode_style,
        path_kind,
        roads,
        visits,
        eps0,
        eps1,
        init,
        unsafe_sets,
        domain,
        cell_width,
        dt,
        time,
        j,
        map,
        method,
        target_axis,
        custom_map: raw.custom_map,
    };
    s.validate()?;
    Ok(s)
}

fn default_cells(id: DynamicsId) -> Vec<f64> {
    match id {
        DynamicsId::Robot => vec![DEFAULT_CELL, DEFAULT_CELL, DEFAULT_HEADING_CELL],
        DynamicsId::Linear3D => vec![DEFAULT_CELL; 3],
    }
}

fn build_path(rp: &RawPath, style: ModeStyle) -> Result<(PathKind, Vec<Road>, usize)> {
    let start = rp.start.unwrap_or([0.0, 0.0]);
    let (kind, roads) = match rp.kind.as_str() {
        "rectangle" => {
            let w = positive("path.width", rp.width.unwrap_or(5.0))?;
            let h = positive("path.height", rp.height.unwrap_or(3.0))?;
            let loops = rp.loops.unwrap_or(4);
            let start = rp.start.unwrap_or([-4.5, -0.5]);
            (PathKind::Rectangle, paths::rectangle_roads(w, h, start, loops))
        }
        "s_shaped" => {
            let long = positive("path.long", rp.long.unwrap_or(5.0))?;
            let short = positive("path.short", rp.short.unwrap_or(3.0))?;
            (PathKind::SShaped, paths::s_shaped_roads(start, long, short, rp.roads.unwrap_or(16)))
        }
        "koch" => {
            let lead = positive("path.lead_in", rp.lead_in.unwrap_or(3.0))?;
            let edge = positive("path.edge", rp.edge.unwrap_or(2.0))?;
            (PathKind::Koch, paths::koch_roads(lead, edge))
        }
        "random" => {
            let lo = rp.min_len.unwrap_or(2);
            let hi = rp.max_len.unwrap_or(8);
            if lo == 0 || lo > hi {
                return Err(err("path.min_len", "need 0 < min_len <= max_len"));
            }
            let seed = rp.seed.ok_or_else(|| err("path.seed", "random paths need a seed"))?;
            (PathKind::Random, paths::random_roads(start, rp.roads.unwrap_or(14), lo, hi, seed))
        }
        "custom" => {
            let w = rp.waypoints.as_ref().ok_or_else(|| err("path.waypoints", "missing"))?;
            if w.len() < 2 {
                return Err(err("path.waypoints", "need at least 2 points"));
            }
            (PathKind::Custom, paths::roads_from_waypoints(w))
        }
        k => return Err(err("path.kind", format!("unknown path kind {k:?}"))),
    };
    if roads.is_empty() {
        return Err(err("path.roads", "path is empty"));
    }
    let visits = match style {
        ModeStyle::Waypoint => roads.len(),
        ModeStyle::Road => 0,
    };
    Ok((kind, roads, visits))
}

/// Everything needed to run a scenario.
pub struct Built {
    pub automaton: HybridAutomaton,
    pub path: Path,
    pub config: ReachConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.init.dim() != 3 || self.domain.dim() != 3 {
            return Err(err("init", "state dimension is 3"));
        }
        if !self.domain.contains_rect(&self.init, 1e-9) {
            return Err(err("domain", "does not contain the initial set"));
        }
        for (i, r) in self.roads.iter().enumerate() {
            if paths::road_length(r) <= 1e-9 {
                return Err(Error::DegenerateRoad);
            }
            for p in [r.0, r.1] {
                if !(0..2).all(|d| p[d] >= self.domain.lo()[d] && p[d] <= self.domain.hi()[d]) {
                    return Err(err("domain", format!("road {i} leaves the domain")));
                }
            }
        }
        if self.map == MapKind::TR && self.mode_style == ModeStyle::Waypoint {
            return Err(err("map", "tr needs road modes"));
        }
        Ok(())
    }

    /// Waypoint scenarios: the distinct road ends in visiting order.
    pub fn waypoints(&self) -> Vec<Point> {
        let mut w: Vec<Point> = Vec::new();
        for r in &self.roads {
            if !w.iter().any(|q| (q[0] - r.1[0]).abs() < 1e-9 && (q[1] - r.1[1]).abs() < 1e-9) {
                w.push(r.1);
            }
        }
        w
    }

    fn time_for_leg(&self, len: f64) -> f64 {
        match self.time {
            TimeSpec::Fixed(t) => t,
            TimeSpec::LegPlus(m) => len / self.dynamics.v + m,
        }
    }

    /// Concrete grid: positions anchored at the first target point, heading
    /// periodic from `−π`.
    pub fn grid(&self) -> Result<Grid> {
        let w0 = self.roads[0].1;
        self.grid_at([w0[0], w0[1]])
    }

    /// Virtual grid: positions anchored at the origin.
    pub fn virtual_grid(&self) -> Result<Grid> {
        self.grid_at([0.0, 0.0])
    }

    fn grid_at(&self, o: [f64; 2]) -> Result<Grid> {
        match self.dynamics.id {
            DynamicsId::Robot => Grid::new(vec![o[0], o[1], -PI], self.cell_width.clone())?.with_period(2, 2.0 * PI),
            DynamicsId::Linear3D => Grid::new(vec![o[0], o[1], 0.0], self.cell_width.clone()),
        }
    }

    pub fn unsafe_region(&self) -> Region {
        let mut r = Region::empty(3);
        for u in &self.unsafe_sets {
            r.push(u.to_polytope());
        }
        r
    }

    pub fn build(&self) -> Result<Built> {
        let horizon_len = match self.j {
            Horizon::Finite(j) => j + 1,
            Horizon::Infinite => usize::MAX,
        };
        let (mut automaton, path) = match self.mode_style {
            ModeStyle::Waypoint => {
                let w = self.waypoints();
                let loops = usize::from(self.roads.len() > w.len());
                let a = build_waypoint_automaton(&w, self.eps0, self.eps1, &self.init, self.dynamics, 1.0, loops)?;
                let len = self.visits.min(horizon_len).max(1);
                let path = a.unroll(len);
                (a, path)
            }
            ModeStyle::Road => {
                let a = build_road_automaton(&self.roads, self.eps0, self.eps1, &self.init, self.dynamics, 1.0)?;
                let p = road_path(&a, &self.roads);
                (a, p)
            }
        };
        // longest leg into each mode
        let mut t = vec![0.0f64; automaton.modes.len()];
        for (i, &m) in path.0.iter().enumerate() {
            let len = match self.mode_style {
                ModeStyle::Road => paths::road_length(&self.roads[i]),
                ModeStyle::Waypoint => paths::road_length(&self.roads[i % self.roads.len()]),
            };
            t[m] = t[m].max(self.time_for_leg(len));
        }
        let longest = self.roads.iter().map(paths::road_length).fold(0.0, f64::max);
        for v in t.iter_mut().filter(|v| **v == 0.0) {
            *v = self.time_for_leg(longest);
        }
        automaton.time_bounds = t;
        automaton.validate()?;
        let config = ReachConfig {
            grid: self.grid()?,
            vgrid: self.virtual_grid()?,
            dt: self.dt,
            horizon: self.j,
            budget: None,
        };
        Ok(Built {
            automaton,
            path,
            config,
        })
    }

    /// The scenario's virtual map for `kind`.
    pub fn virtual_map(&self, kind: MapKind) -> Result<VirtualMap> {
        match kind {
            MapKind::T => make_translation_map(self.dynamics, self.mode_style),
            MapKind::TR => {
                if self.mode_style != ModeStyle::Road {
                    return Err(err("map", "tr needs road modes"));
                }
                make_tr_map_axis(self.dynamics, self.target_axis)
            }
            MapKind::Custom => {
                if self.custom_map.is_empty() {
                    return Err(err("custom_map", "map = \"custom\" needs [[custom_map]] entries"));
                }
                let table = self
                    .custom_map
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let path = format!("custom_map[{i}]");
                        let gamma = AffineMap::from_rows(&c.gamma_a, &c.gamma_b).map_err(|e| err(&path, e.to_string()))?;
                        let rho = AffineMap::from_rows(&c.rho_a, &c.rho_b).map_err(|e| err(&path, e.to_string()))?;
                        Ok((c.mode.clone(), SymmetryPair::new(gamma, rho)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                make_custom_map(self.dynamics, table)
            }
        }
    }
}

/// Read and validate a scenario file.
pub fn load_scenario(path: impl AsRef<FsPath>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut s = parse_scenario(&text, path.parent())?;
    s.source = Some(path.to_path_buf());
    Ok(s)
}
