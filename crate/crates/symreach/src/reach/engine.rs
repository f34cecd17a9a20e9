//! Segment-by-segment reachability along a path, with or without symmetry.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::abstraction::{construct_virtual_model, VirtualAutomaton};
use crate::automaton::{HybridAutomaton, Path};
use crate::error::{Error, Result};
use crate::geom::{occupied_cells, region_volume, transform_region, AffineMap, CellId, CellSet, Grid, Region};
use crate::symmetry::VirtualMap;

use super::cache::TubeCache;
use super::cover::{tube_cells, Exit, PMap};
use super::tube::TubeRef;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// No symmetry.
    NS,
    /// Symmetry with a cache in virtual coordinates.
    SC,
    /// Virtual automaton with fixed-point detection.
    SV,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::NS => "NS",
            Method::SC => "SC",
            Method::SV => "SV",
        })
    }
}

/// Transition bound `J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Co,
    Re,
    Cp,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Co => "co",
            Provenance::Re => "re",
            Provenance::Cp => "cp",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Cell reachtubes computed from scratch.
    pub co: usize,
    /// Cell reachtubes retrieved from a cache.
    pub re: usize,
    /// Segments copied from the per-mode dictionary.
    pub cp: usize,
    pub tot: usize,
    pub wall_time: f64,
    pub error_pct: Option<f64>,
}

impl Metrics {
    fn count(&mut self, computed: bool) {
        if computed {
            self.co += 1;
        } else {
            self.re += 1;
        }
        self.tot = self.co + self.re + self.cp;
    }

    fn copied(&mut self, k: usize) {
        self.cp += k;
        self.tot = self.co + self.re + self.cp;
    }
}

/// Grids and steps shared by every method.
#[derive(Clone, Debug)]
pub struct ReachConfig {
    /// Grid over concrete coordinates.
    pub grid: Grid,
    /// Grid over virtual coordinates.
    pub vgrid: Grid,
    pub dt: f64,
    pub horizon: Horizon,
    /// Computed-segment budget for `J = ∞`; `None` means `10·|P_v|·|E_v|`.
    pub budget: Option<usize>,
}

/// Accumulated initial cells of one virtual mode, their tubes, and the cells
/// each of them reaches through every outgoing virtual edge.
#[derive(Clone, Debug, Default)]
pub struct DictEntry {
    pub k: CellSet,
    pub(crate) tubes: BTreeMap<CellId, TubeRef>,
    pub(crate) exits: BTreeMap<CellId, Vec<CellSet>>,
}

impl DictEntry {
    pub fn tubes(&self) -> impl Iterator<Item = &TubeRef> {
        self.tubes.values()
    }

    /// Union of the exits of every cell in `K` through out-edge slot `j`.
    pub fn exits_through(&self, j: usize) -> CellSet {
        let mut out = CellSet::new();
        for e in self.exits.values() {
            out.union_with(&e[j]);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct PerModeDict {
    entries: Vec<Option<DictEntry>>,
    /// Outgoing virtual edges of each virtual mode.
    out_edges: Vec<Vec<usize>>,
}

impl PerModeDict {
    pub fn new(va: &VirtualAutomaton) -> Self {
        let m = va.n_modes();
        PerModeDict {
            entries: vec![None; m],
            out_edges: (0..m).map(|v| va.auto.successors(v)).collect(),
        }
    }

    pub fn entry(&self, v: usize) -> Option<&DictEntry> {
        self.entries.get(v).and_then(|e| e.as_ref())
    }

    pub fn n_modes(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(|e| e.is_none())
    }

    fn slot(&self, v: usize, ve: usize) -> usize {
        self.out_edges[v]
            .iter()
            .position(|&e| e == ve)
            .expect("virtual edge leaves its source")
    }

    /// Replace the cell set of a mode (test and inspection helper; tubes and
    /// exits are left as they are).
    pub fn set_k(&mut self, v: usize, k: CellSet) {
        let e = self.entries[v].get_or_insert_with(DictEntry::default);
        e.k = k;
    }

    /// Add cells to `v`, computing or retrieving their tubes and exits.
    /// Returns the number of cells that were new to `K`.
    fn add_cells(
        &mut self,
        v: usize,
        cells: &CellSet,
        va: &VirtualAutomaton,
        exits: &[Exit],
        cache: &mut TubeCache,
        metrics: &mut Metrics,
    ) -> Result<usize> {
        let t = va.auto.time_bounds[v];
        let mode = va.auto.modes[v].clone();
        let slots = self.out_edges[v].clone();
        let grid = cache.grid().clone();
        let entry = self.entries[v].get_or_insert_with(DictEntry::default);
        let mut added = 0;
        for &c in cells {
            if entry.tubes.contains_key(&c) {
                metrics.count(false);
                entry.k.insert(c);
                continue;
            }
            let (tube, computed) = cache.fetch(&mode, c, t)?;
            metrics.count(computed);
            let mut per_edge = Vec::with_capacity(slots.len());
            for &ve in &slots {
                let mut out = CellSet::new();
                exits[ve].tube_exits(&tube, &grid, &mut out)?;
                per_edge.push(out);
            }
            entry.k.insert(c);
            entry.tubes.insert(c, tube);
            entry.exits.insert(c, per_edge);
            added += 1;
        }
        Ok(added)
    }

    /// The first virtual edge whose exits are not yet inside its target's
    /// `K`, with the missing cells.
    fn first_gap(&self, va: &VirtualAutomaton) -> Option<(usize, CellSet)> {
        for (v, e) in self.entries.iter().enumerate() {
            let e = match e {
                Some(e) => e,
                None => continue,
            };
            for (j, &ve) in self.out_edges[v].iter().enumerate() {
                let dst = va.auto.edges[ve].1;
                let reach = e.exits_through(j);
                let missing = match self.entry(dst) {
                    Some(d) => reach.difference(&d.k),
                    None => reach,
                };
                if !missing.is_empty() {
                    return Some((dst, missing));
                }
            }
        }
        None
    }
}

/// True iff the virtual initial cells lie in `K` of the initial mode and
/// every virtual edge's exits from `K[src]` lie in `K[dst]`.
pub fn check_fixed_point(dict: &PerModeDict, va: &VirtualAutomaton, g: &Grid) -> Result<bool> {
    let init = match dict.entry(va.auto.init_mode) {
        Some(e) => e,
        None => return Ok(false),
    };
    if !occupied_cells(&va.auto.init_set, g)?.is_subset(&init.k) {
        return Ok(false);
    }
    for (v, e) in dict.entries.iter().enumerate() {
        let e = match e {
            Some(e) => e,
            None => continue,
        };
        for (j, &ve) in dict.out_edges[v].iter().enumerate() {
            let reach = e.exits_through(j);
            if reach.is_empty() {
                continue;
            }
            match dict.entry(va.auto.edges[ve].1) {
                Some(d) if reach.is_subset(&d.k) => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug)]
pub enum SegmentSource {
    /// Tubes computed (or retrieved) for this segment.
    Computed { tubes: Vec<(TubeRef, Provenance)> },
    /// Produced from the dictionary entry of `vmode`.
    Copied,
}

/// One reachset segment along the path.
#[derive(Clone, Debug)]
pub struct Segment {
    pub index: usize,
    /// Concrete mode index.
    pub mode: usize,
    /// Virtual mode index (SC and SV).
    pub vmode: Option<usize>,
    /// From the frame the tubes live in to concrete coordinates.
    pub to_concrete: AffineMap,
    /// Initial cells, in the frame's grid.
    pub init: CellSet,
    pub source: SegmentSource,
}

/// Output of a reachability run.
#[derive(Debug)]
pub struct ReachRun {
    pub method: Method,
    pub path: Path,
    pub segments: Vec<Segment>,
    pub va: Option<VirtualAutomaton>,
    pub dict: Option<PerModeDict>,
    pub fixed_point: bool,
    /// Segments computed by SV, including any closure beyond the path.
    pub computed_segments: usize,
    /// `check_fixed_point` after each computed SV segment.
    pub fixed_point_trace: Vec<bool>,
    pub metrics: Metrics,
    /// The grid the tubes were computed on.
    pub grid: Grid,
    pub cache: TubeCache,
}

impl ReachRun {
    /// Tubes of segment `i` in its own frame, with provenance. Copied SV
    /// segments take every tube of their virtual mode's dictionary entry.
    pub fn segment_tubes(&self, i: usize) -> Result<Vec<(&TubeRef, Provenance)>> {
        let s = &self.segments[i];
        match &s.source {
            SegmentSource::Computed { tubes } => Ok(tubes.iter().map(|(t, p)| (t, *p)).collect()),
            SegmentSource::Copied => {
                let v = s.vmode.expect("copied segments carry a virtual mode");
                let e = self.dict.as_ref().and_then(|d| d.entry(v)).ok_or(Error::UncoveredMode(v))?;
                Ok(e.tubes().map(|t| (t, Provenance::Cp)).collect())
            }
        }
    }

    /// Cells of the concrete grid `g` covered by segment `i` in concrete
    /// coordinates.
    pub fn segment_cells(&self, i: usize, g: &Grid) -> Result<CellSet> {
        let m = PMap::new(self.segments[i].to_concrete.clone());
        let mut out = CellSet::new();
        for (t, _) in self.segment_tubes(i)? {
            tube_cells(t, &m, g, &mut out)?;
        }
        Ok(out)
    }

    /// Initial cell count per path index: the dictionary's `K` for copied
    /// segments, otherwise the segment's own initial cells.
    pub fn init_counts(&self) -> Vec<usize> {
        self.segments
            .iter()
            .map(|s| match (&self.dict, s.vmode, &s.source) {
                (Some(d), Some(v), SegmentSource::Copied) => d.entry(v).map(|e| e.k.len()).unwrap_or(0),
                _ => s.init.len(),
            })
            .collect()
    }

    /// Initial volume per path index.
    pub fn init_volumes(&self) -> Vec<f64> {
        let cv = self.grid.cell_volume();
        self.init_counts().iter().map(|&k| k as f64 * cv).collect()
    }

    pub fn n_virtual(&self) -> Option<(usize, usize)> {
        self.va.as_ref().map(|v| (v.n_modes(), v.n_edges()))
    }
}

/// Mean relative excess of initial-set volume over the baseline, in percent.
pub fn overapprox_error(ns_inits: &[Region], other_inits: &[Region]) -> Result<f64> {
    let ns = ns_inits.iter().map(region_volume).collect::<Result<Vec<_>>>()?;
    let ot = other_inits.iter().map(region_volume).collect::<Result<Vec<_>>>()?;
    overapprox_error_volumes(&ns, &ot)
}

pub fn overapprox_error_volumes(ns: &[f64], other: &[f64]) -> Result<f64> {
    if ns.len() != other.len() {
        return Err(Error::DimMismatch {
            expected: ns.len(),
            got: other.len(),
        });
    }
    if ns.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (i, (b, o)) in ns.iter().zip(other).enumerate() {
        if *b <= 0.0 {
            return Err(Error::DegenerateBaseline { index: i });
        }
        sum += (o - b) / b * 100.0;
    }
    Ok(sum / ns.len() as f64)
}

fn path_len(path: &Path, h: Horizon) -> usize {
    match h {
        Horizon::Finite(j) => path.len().min(j + 1),
        Horizon::Infinite => path.len(),
    }
}

fn edge_of(a: &HybridAutomaton, path: &Path, i: usize) -> Result<usize> {
    a.edge_between(path.0[i], path.0[i + 1]).ok_or(Error::DisconnectedPath {
        index: path.0[i],
        next: path.0[i + 1],
    })
}

/// One frame of a path run: the mode in frame coordinates and the time bound.
struct Frame {
    mode: Vec<f64>,
    t: f64,
    to_concrete: AffineMap,
    vmode: Option<usize>,
}

/// Shared NS/SC loop.
fn run_frames(
    path: &Path,
    frames: Vec<Frame>,
    exits: Vec<Exit>,
    init: CellSet,
    cache: &mut TubeCache,
    metrics: &mut Metrics,
) -> Result<Vec<Segment>> {
    let grid = cache.grid().clone();
    let mut segments = Vec::with_capacity(frames.len());
    let mut cells = init;
    let n = frames.len();
    for (i, f) in frames.into_iter().enumerate() {
        let mut tubes = Vec::with_capacity(cells.len());
        let mut next = CellSet::new();
        for &c in &cells {
            let (tube, computed) = cache.fetch(&f.mode, c, f.t)?;
            metrics.count(computed);
            if i + 1 < n {
                exits[i].tube_exits(&tube, &grid, &mut next)?;
            }
            tubes.push((tube, if computed { Provenance::Co } else { Provenance::Re }));
        }
        segments.push(Segment {
            index: i,
            mode: path.0[i],
            vmode: f.vmode,
            to_concrete: f.to_concrete,
            init: std::mem::take(&mut cells),
            source: SegmentSource::Computed { tubes },
        });
        cells = next;
    }
    Ok(segments)
}

fn run_ns(a: &HybridAutomaton, path: &Path, cfg: &ReachConfig, metrics: &mut Metrics) -> Result<ReachRun> {
    let len = path_len(path, cfg.horizon);
    let mut cache = TubeCache::new(a.dynamics, cfg.grid.clone(), cfg.dt);
    let frames = (0..len)
        .map(|i| Frame {
            mode: a.modes[path.0[i]].clone(),
            t: a.time_bounds[path.0[i]],
            to_concrete: AffineMap::identity(a.n),
            vmode: None,
        })
        .collect();
    let exits = (0..len.saturating_sub(1))
        .map(|i| {
            let e = edge_of(a, path, i)?;
            Ok(Exit::new(&a.guards[e], &a.resets[e]))
        })
        .collect::<Result<Vec<_>>>()?;
    let init = occupied_cells(&a.init_set, &cfg.grid)?;
    let segments = run_frames(path, frames, exits, init, &mut cache, metrics)?;
    Ok(ReachRun {
        method: Method::NS,
        path: path.truncated(len),
        computed_segments: segments.len(),
        segments,
        va: None,
        dict: None,
        fixed_point: false,
        fixed_point_trace: Vec::new(),
        metrics: metrics.clone(),
        grid: cfg.grid.clone(),
        cache,
    })
}

fn run_sc(a: &HybridAutomaton, path: &Path, cfg: &ReachConfig, phi: &VirtualMap, metrics: &mut Metrics) -> Result<ReachRun> {
    let len = path_len(path, cfg.horizon);
    let va = construct_virtual_model(a, phi)?;
    let mut cache = TubeCache::new(a.dynamics, cfg.vgrid.clone(), cfg.dt);
    let pairs = &va.pairs;
    let frames = (0..len)
        .map(|i| {
            let p = path.0[i];
            Frame {
                mode: va.auto.modes[va.rv_index[p]].clone(),
                t: a.time_bounds[p],
                to_concrete: pairs[p].gamma_inv.clone(),
                vmode: Some(va.rv_index[p]),
            }
        })
        .collect();
    let exits = (0..len.saturating_sub(1))
        .map(|i| {
            let e = edge_of(a, path, i)?;
            let (s, d) = (path.0[i], path.0[i + 1]);
            let guard = transform_region(&a.guards[e], &pairs[s].gamma)?;
            let maps = a.resets[e]
                .iter()
                .map(|r| pairs[d].gamma.compose(&r.compose(&pairs[s].gamma_inv)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(Exit::new(&guard, &maps))
        })
        .collect::<Result<Vec<_>>>()?;
    let init_v = transform_region(&a.init_set, &pairs[path.0[0]].gamma)?;
    let init = occupied_cells(&init_v, &cfg.vgrid)?;
    let segments = run_frames(path, frames, exits, init, &mut cache, metrics)?;
    Ok(ReachRun {
        method: Method::SC,
        path: path.truncated(len),
        computed_segments: segments.len(),
        segments,
        va: Some(va),
        dict: None,
        fixed_point: false,
        fixed_point_trace: Vec::new(),
        metrics: metrics.clone(),
        grid: cfg.vgrid.clone(),
        cache,
    })
}

fn run_sv(a: &HybridAutomaton, path: &Path, cfg: &ReachConfig, phi: &VirtualMap, metrics: &mut Metrics) -> Result<ReachRun> {
    let len = path_len(path, cfg.horizon);
    let va = construct_virtual_model(a, phi)?;
    let g = cfg.vgrid.clone();
    let mut cache = TubeCache::new(a.dynamics, g.clone(), cfg.dt);
    let exits: Vec<Exit> = (0..va.n_edges())
        .map(|ve| Exit::new(&va.auto.guards[ve], &va.auto.resets[ve]))
        .collect();
    let mut dict = PerModeDict::new(&va);
    let mut segments = Vec::with_capacity(len);
    let mut trace = Vec::new();
    let mut fixed = false;
    let mut cells = occupied_cells(&va.auto.init_set, &g)?;
    let mut i = 0;
    while i < len {
        let p = path.0[i];
        let v = va.rv_index[p];
        let mut tubes_prov = Vec::with_capacity(cells.len());
        let known: CellSet = dict.entry(v).map(|e| e.k.clone()).unwrap_or_default();
        dict.add_cells(v, &cells, &va, &exits, &mut cache, metrics)?;
        let entry = dict.entry(v).expect("entry was just filled");
        for &c in &cells {
            let prov = if known.contains_cell(&c) { Provenance::Re } else { Provenance::Co };
            tubes_prov.push((entry.tubes[&c].clone(), prov));
        }
        let next = if i + 1 < len {
            let ve = va.edge_index[edge_of(a, path, i)?];
            let j = dict.slot(v, ve);
            let mut out = CellSet::new();
            for c in &cells {
                out.union_with(&entry.exits[c][j]);
            }
            out
        } else {
            CellSet::new()
        };
        segments.push(Segment {
            index: i,
            mode: p,
            vmode: Some(v),
            to_concrete: va.pairs[p].gamma_inv.clone(),
            init: std::mem::take(&mut cells),
            source: SegmentSource::Computed { tubes: tubes_prov },
        });
        cells = next;
        let fp = check_fixed_point(&dict, &va, &g)?;
        trace.push(fp);
        i += 1;
        if fp {
            fixed = true;
            break;
        }
    }
    let mut computed = segments.len();
    if !fixed && cfg.horizon == Horizon::Infinite {
        let budget = cfg.budget.unwrap_or(10 * va.n_modes() * va.n_edges()).max(1);
        loop {
            match dict.first_gap(&va) {
                None => {
                    fixed = check_fixed_point(&dict, &va, &g)?;
                    if fixed {
                        break;
                    }
                    // only the initial cells can be missing now
                    let init = occupied_cells(&va.auto.init_set, &g)?;
                    dict.add_cells(va.auto.init_mode, &init, &va, &exits, &mut cache, metrics)?;
                    computed += 1;
                }
                Some((dst, missing)) => {
                    dict.add_cells(dst, &missing, &va, &exits, &mut cache, metrics)?;
                    computed += 1;
                    trace.push(check_fixed_point(&dict, &va, &g)?);
                    if *trace.last().expect("pushed") {
                        fixed = true;
                        break;
                    }
                }
            }
            if computed >= budget {
                return Err(Error::NoFixedPoint { segments: computed });
            }
        }
    }
    if fixed {
        let already = segments.len();
        for i in already..len {
            let p = path.0[i];
            segments.push(Segment {
                index: i,
                mode: p,
                vmode: Some(va.rv_index[p]),
                to_concrete: va.pairs[p].gamma_inv.clone(),
                init: CellSet::new(),
                source: SegmentSource::Copied,
            });
        }
        metrics.copied(len - already);
    }
    Ok(ReachRun {
        method: Method::SV,
        path: path.truncated(len),
        segments,
        va: Some(va),
        dict: Some(dict),
        fixed_point: fixed,
        computed_segments: computed,
        fixed_point_trace: trace,
        metrics: metrics.clone(),
        grid: g,
        cache,
    })
}

/// Reachset of `a` along `path` with the given method.
pub fn compute_reachset(
    a: &HybridAutomaton,
    path: &Path,
    cfg: &ReachConfig,
    method: Method,
    phi: Option<&VirtualMap>,
) -> Result<ReachRun> {
    a.check_path(path)?;
    let start = Instant::now();
    let mut metrics = Metrics::default();
    let mut run = match method {
        Method::NS => run_ns(a, path, cfg, &mut metrics)?,
        Method::SC => run_sc(a, path, cfg, phi.ok_or(Error::MissingMap { method: "SC" })?, &mut metrics)?,
        Method::SV => run_sv(a, path, cfg, phi.ok_or(Error::MissingMap { method: "SV" })?, &mut metrics)?,
    };
    run.metrics.wall_time = start.elapsed().as_secs_f64();
    Ok(run)
}

/// Per path index, the map taking the dictionary entry of `rv(path[i])`
/// back to concrete coordinates.
#[derive(Clone, Debug)]
pub struct TransformedSegment {
    pub index: usize,
    pub vmode: usize,
    pub map: AffineMap,
    /// The map rotates, so emitted boxes are bounding boxes.
    pub reboxed: bool,
}

/// `γ_{path[i]}⁻¹(dict[rv(path[i])])` for every path index; the pairs are
/// the ones `va` was built with.
pub fn transform_back(dict: &PerModeDict, va: &VirtualAutomaton, path: &Path) -> Result<Vec<TransformedSegment>> {
    path.0
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let v = va.rv_index[p];
            if dict.entry(v).is_none() {
                return Err(Error::UncoveredMode(v));
            }
            let map = va.pairs[p].gamma_inv.clone();
            Ok(TransformedSegment {
                index: i,
                vmode: v,
                reboxed: map.monomial().is_none(),
                map,
            })
        })
        .collect()
}

/// Reachtube of one concrete mode from `init`, with the cells reached
/// through each outgoing edge.
pub struct ModeReach {
    pub tubes: Vec<TubeRef>,
    /// `(edge, cells)` for every edge leaving the mode.
    pub exits: Vec<(usize, CellSet)>,
}

pub fn mode_reach(
    init: &Region,
    p: usize,
    a: &HybridAutomaton,
    cache: &mut TubeCache,
    metrics: &mut Metrics,
) -> Result<ModeReach> {
    let g = cache.grid().clone();
    let cells = occupied_cells(init, &g)?;
    let outs: Vec<(usize, Exit)> = a
        .successors(p)
        .into_iter()
        .map(|e| (e, Exit::new(&a.guards[e], &a.resets[e])))
        .collect();
    let mut tubes = Vec::with_capacity(cells.len());
    let mut exits: Vec<(usize, CellSet)> = outs.iter().map(|(e, _)| (*e, CellSet::new())).collect();
    for &c in &cells {
        let (tube, computed) = cache.fetch(&a.modes[p], c, a.time_bounds[p])?;
        metrics.count(computed);
        for (k, (_, x)) in outs.iter().enumerate() {
            x.tube_exits(&tube, &g, &mut exits[k].1)?;
        }
        tubes.push(tube);
    }
    Ok(ModeReach { tubes, exits })
}
