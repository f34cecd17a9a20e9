//! Single runs, the method/map matrix, and their reports.

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path as FsPath, PathBuf};

use serde::Serialize;

use crate::abstraction::{check_fsr, construct_virtual_model, FsrReport};
use crate::automaton::ModeStyle;
use crate::error::{Error, Result};
use crate::reach::{
    compute_reachset, metrics_text, overapprox_error_volumes, unbounded_verif, write_reachtube_csv, Horizon, Method,
    Metrics, ReachRun, Verdict,
};
use crate::symmetry::{check_equivariance, MapKind};

use super::scenario::{load_scenario, Scenario};

/// Paths longer than this skip the NS baseline used for the error column.
pub const BASELINE_MAX_SEGMENTS: usize = 40;
/// Time window of one CSV row.
pub const CSV_WINDOW: f64 = 1.0;

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub method: Method,
    pub map: Option<MapKind>,
    /// `|P_v|` and `|E_v|`, or the concrete counts for NS.
    pub modes: usize,
    pub edges: usize,
    pub segments: usize,
    pub fixed_point: bool,
    pub metrics: Metrics,
    pub verdict: Option<Verdict>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn verdict_str(&self) -> String {
        self.verdict.map(|v| v.to_string()).unwrap_or_else(|| "n/a".into())
    }
}

fn map_label(m: Option<MapKind>) -> &'static str {
    match m {
        None => "-",
        Some(MapKind::T) => "T",
        Some(MapKind::TR) => "TR",
        Some(MapKind::Custom) => "custom",
    }
}

fn file_stem(s: &Scenario, method: Method, map: Option<MapKind>) -> String {
    format!("{}_{}_{}", s.name, method, map_label(map)).to_lowercase()
}

/// Bounded-horizon safety of a computed run: does any segment, mapped back
/// to concrete coordinates, meet an unsafe box?
fn run_meets_unsafe(run: &ReachRun, s: &Scenario) -> Result<bool> {
    if s.unsafe_sets.is_empty() {
        return Ok(false);
    }
    let u = s.unsafe_region();
    for (i, seg) in run.segments.iter().enumerate() {
        let back = seg.to_concrete.inverse()?;
        let uv = crate::geom::transform_region(&u, &back)?;
        let ub = match uv.bounding_box() {
            Some(b) => b,
            None => continue,
        };
        for (t, _) in run.segment_tubes(i)? {
            if crate::reach::tube_meets(t, &uv, &ub) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// NS baseline initial volumes for the error column, if affordable.
pub fn ns_baseline(s: &Scenario) -> Result<Option<Vec<f64>>> {
    let b = s.build()?;
    if b.path.len() > BASELINE_MAX_SEGMENTS || b.config.horizon == Horizon::Infinite {
        return Ok(None);
    }
    let run = compute_reachset(&b.automaton, &b.path, &b.config, Method::NS, None)?;
    Ok(Some(run.init_volumes()))
}

fn error_vs(baseline: &[f64], run: &ReachRun) -> Result<Option<f64>> {
    let v = run.init_volumes();
    if v.len() != baseline.len() {
        return Ok(None);
    }
    overapprox_error_volumes(baseline, &v).map(Some)
}

/// Run one method on a scenario, writing outputs to `out` if given.
pub fn run_scenario(
    s: &Scenario,
    method: Method,
    map: Option<MapKind>,
    out: Option<&FsPath>,
    baseline: Option<&[f64]>,
) -> Result<RunReport> {
    let b = s.build()?;
    let mut notes = Vec::new();
    let map = if method == Method::NS { None } else { Some(map.unwrap_or(s.map)) };
    let phi = map.map(|m| s.virtual_map(m)).transpose()?;
    let unsafe_region = s.unsafe_region();

    let (run, verdict) = if method == Method::SV && (b.config.horizon == Horizon::Infinite || !s.unsafe_sets.is_empty()) {
        let o = unbounded_verif(&b.automaton, &b.path, phi.as_ref().expect("SV has a map"), &unsafe_region, &b.config)?;
        if let Some(r) = &o.reason {
            notes.push(r.clone());
        }
        match o.run {
            Some(run) => (run, Some(o.verdict)),
            None => {
                return Ok(RunReport {
                    scenario: s.name.clone(),
                    method,
                    map,
                    modes: 0,
                    edges: 0,
                    segments: 0,
                    fixed_point: false,
                    metrics: Metrics::default(),
                    verdict: Some(Verdict::Unknown),
                    notes,
                })
            }
        }
    } else {
        let run = compute_reachset(&b.automaton, &b.path, &b.config, method, phi.as_ref())?;
        let verdict = if s.unsafe_sets.is_empty() {
            None
        } else if run_meets_unsafe(&run, s)? {
            Some(Verdict::Unknown)
        } else {
            Some(Verdict::Safe)
        };
        (run, verdict)
    };

    let mut metrics = run.metrics.clone();
    let own_baseline;
    let base = match baseline {
        Some(b) => Some(b),
        None if method == Method::NS => None,
        None => {
            own_baseline = ns_baseline(s)?;
            own_baseline.as_deref()
        }
    };
    metrics.error_pct = match (method, base) {
        (Method::NS, _) => Some(0.0),
        (_, Some(b)) => error_vs(b, &run)?,
        (_, None) => None,
    };
    if method == Method::SV && !run.fixed_point {
        notes.push("no fixed point reached; all segments computed".into());
    }
    if run.segments.iter().any(|g| g.to_concrete.monomial().is_none()) {
        notes.push("rotated segments are emitted as bounding boxes".into());
    }
    let (modes, edges) = match (&run.va, method) {
        (Some(va), _) => (va.n_modes(), va.n_edges()),
        (None, _) => (b.automaton.modes.len(), b.automaton.edges.len()),
    };
    let report = RunReport {
        scenario: s.name.clone(),
        method,
        map,
        modes,
        edges,
        segments: run.segments.len(),
        fixed_point: run.fixed_point,
        metrics,
        verdict,
        notes,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let stem = file_stem(s, method, map);
        let f = fs::File::create(dir.join(format!("{stem}_reachtube.csv")))?;
        write_reachtube_csv(&run, BufWriter::new(f), CSV_WINDOW)?;
        fs::write(dir.join(format!("{stem}_metrics.txt")), metrics_text(&report.metrics))?;
        if let Some(va) = &run.va {
            let txt = serde_json::to_string_pretty(&va.dump_json()).expect("json");
            fs::write(dir.join(format!("{stem}_virtual.json")), txt)?;
        }
        let txt = serde_json::to_string_pretty(&serde_json::json!({
            "report": &report,
            "scenario": s,
        }))
        .expect("json");
        fs::write(dir.join(format!("{stem}_report.json")), txt)?;
    }
    Ok(report)
}

/// A row of the matrix; `error` holds the message of a failed run.
#[derive(Clone, Debug, Serialize)]
pub struct MatrixRow {
    pub scenario: String,
    pub method: Method,
    pub map: Option<MapKind>,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

/// Every scenario file (`*.scn`) in `dir`, sorted by name.
pub fn scenario_files(dir: &FsPath) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    v.sort();
    Ok(v)
}

/// Cross product of scenarios, methods and maps. NS runs once per scenario;
/// TR is skipped for waypoint scenarios. Failed runs are recorded and the
/// matrix continues.
pub fn run_matrix(scenarios: &[Scenario], methods: &[Method], maps: &[MapKind], out: Option<&FsPath>) -> Vec<MatrixRow> {
    let mut rows = Vec::new();
    for s in scenarios {
        let mut combos: Vec<(Method, Option<MapKind>)> = Vec::new();
        for &m in methods {
            if m == Method::NS {
                combos.push((m, None));
                continue;
            }
            for &k in maps {
                if k == MapKind::TR && s.mode_style == ModeStyle::Waypoint {
                    continue;
                }
                combos.push((m, Some(k)));
            }
        }
        if combos.is_empty() {
            continue;
        }
        let baseline = ns_baseline(s);
        for (m, k) in combos {
            let r = match &baseline {
                Ok(b) => run_scenario(s, m, k, out, b.as_deref()),
                Err(e) => Err(Error::InvalidGeometry(format!("baseline failed: {e}"))),
            };
            rows.push(MatrixRow {
                scenario: s.name.clone(),
                method: m,
                map: k,
                error: r.as_ref().err().map(|e| e.to_string()),
                report: r.ok(),
            });
        }
    }
    rows
}

/// The matrix as a text table with the statistic columns.
pub fn matrix_table(rows: &[MatrixRow]) -> String {
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{:<14} {:<6} {:<4} {:>7} {:>8} {:>8} {:>5} {:>8} {:>9} {:>9} {:>8}",
        "scenario", "Phi", "sym", "#m/e", "#co", "#re", "#cp", "#tot", "time", "error", "verdict"
    );
    for r in rows {
        match &r.report {
            Some(rep) => {
                let m = &rep.metrics;
                let err = m.error_pct.map(|e| format!("{e:.1}")).unwrap_or_else(|| "n/a".into());
                let _ = writeln!(
                    t,
                    "{:<14} {:<6} {:<4} {:>7} {:>8} {:>8} {:>5} {:>8} {:>9.3} {:>9} {:>8}",
                    r.scenario,
                    map_label(r.map),
                    r.method,
                    format!("{}/{}", rep.modes, rep.edges),
                    m.co,
                    m.re,
                    m.cp,
                    m.tot,
                    m.wall_time,
                    err,
                    rep.verdict_str()
                );
            }
            None => {
                let _ = writeln!(
                    t,
                    "{:<14} {:<6} {:<4} failed: {}",
                    r.scenario,
                    map_label(r.map),
                    r.method,
                    r.error.as_deref().unwrap_or("?")
                );
            }
        }
    }
    t
}

/// Load every scenario in `dir` and run the full matrix.
pub fn matrix_dir(dir: &FsPath, out: Option<&FsPath>) -> Result<(Vec<MatrixRow>, Vec<(PathBuf, Error)>)> {
    let mut scenarios = Vec::new();
    let mut bad = Vec::new();
    for p in scenario_files(dir)? {
        match load_scenario(&p) {
            Ok(s) => scenarios.push(s),
            Err(e) => bad.push((p, e)),
        }
    }
    let rows = run_matrix(&scenarios, &[Method::NS, Method::SC, Method::SV], &[MapKind::T, MapKind::TR], out);
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("matrix.txt"), matrix_table(&rows))?;
    }
    Ok((rows, bad))
}

/// Sampled FSR check for the scenario's map.
pub fn fsr_for(s: &Scenario, map: MapKind, samples: usize, seed: u64, j: usize) -> Result<FsrReport> {
    let b = s.build()?;
    let phi = s.virtual_map(map)?;
    let va = construct_virtual_model(&b.automaton, &phi)?;
    check_fsr(&b.automaton, &va, &phi, samples, j, seed, 1e-6, s.dt)
}

/// Largest equivariance residual over every mode of the scenario.
pub fn equivariance_for(s: &Scenario, map: MapKind, samples: usize, seed: u64) -> Result<f64> {
    let b = s.build()?;
    let phi = s.virtual_map(map)?;
    let mut worst = 0.0f64;
    for (i, p) in b.automaton.modes.iter().enumerate() {
        let pair = phi.pair(p)?;
        let r = check_equivariance(&s.dynamics, &pair, p, samples, seed.wrapping_add(i as u64), 1e-9);
        worst = worst.max(r.max_residual);
    }
    Ok(worst)
}
