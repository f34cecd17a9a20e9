//! The `symreach` command line: scenario files, runs, the comparison matrix
//! and the sampled checks.

pub mod paths;
pub mod run;
pub mod scenario;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::reach::{Horizon, Verdict};
use crate::symmetry::MapKind;

pub use run::{matrix_table, run_matrix, run_scenario, RunReport};
pub use scenario::{load_scenario, parse_scenario, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "symreach", version, about = "Symmetry-based reachability for hybrid automata")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Compute the reachset of one scenario.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        map: Option<String>,
        /// Cell width applied to every dimension.
        #[arg(long)]
        grid: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Segment count or `inf`.
        #[arg(long)]
        jmax: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every scenario in a directory under NS, SC and SV.
    Matrix {
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample executions and check the forward simulation relation.
    CheckFsr {
        scenario: PathBuf,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        map: Option<String>,
        #[arg(long, default_value_t = 16)]
        jmax: usize,
    },
    /// Check that the symmetry maps of every mode are equivariant.
    CheckEquivariance {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        map: Option<String>,
    },
}

fn exit_for(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

fn load_with(
    path: &PathBuf,
    grid: Option<f64>,
    dt: Option<f64>,
    jmax: Option<&str>,
) -> crate::Result<Scenario> {
    let mut s = load_scenario(path)?;
    if let Some(w) = grid {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::schema("--grid", "must be positive"));
        }
        // The robot heading keeps its own width so it still tiles 2π.
        let k = match s.dynamics.id {
            crate::dynamics::DynamicsId::Robot => 2,
            crate::dynamics::DynamicsId::Linear3D => 3,
        };
        for c in s.cell_width.iter_mut().take(k) {
            *c = w;
        }
    }
    if let Some(d) = dt {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::schema("--dt", "must be positive"));
        }
        s.dt = d;
    }
    if let Some(j) = jmax {
        s.j = scenario::parse_horizon(j)?;
    }
    s.validate()?;
    Ok(s)
}

fn cmd_run(
    path: PathBuf,
    method: Option<String>,
    map: Option<String>,
    grid: Option<f64>,
    dt: Option<f64>,
    jmax: Option<String>,
    out: Option<PathBuf>,
) -> crate::Result<i32> {
    let s = load_with(&path, grid, dt, jmax.as_deref())?;
    let method = method.as_deref().map(scenario::parse_method).transpose()?.unwrap_or(s.method);
    let map = map.as_deref().map(scenario::parse_map).transpose()?;
    let rep = run_scenario(&s, method, map, out.as_deref(), None)?;
    let m = &rep.metrics;
    println!("scenario   {}", rep.scenario);
    println!("method     {}", rep.method);
    if let Some(k) = rep.map {
        println!("map        {}", serde_json::to_string(&k).expect("json").trim_matches('"'));
    }
    println!("modes      {}", rep.modes);
    println!("edges      {}", rep.edges);
    println!("segments   {}", rep.segments);
    println!("fixed pt   {}", rep.fixed_point);
    print!("{}", crate::reach::metrics_text(m));
    println!("verdict    {}", rep.verdict_str());
    for n in &rep.notes {
        println!("note: {n}");
    }
    Ok(match rep.verdict {
        Some(Verdict::Unknown) => EXIT_UNKNOWN,
        _ if s.j == Horizon::Infinite && !rep.fixed_point => EXIT_UNKNOWN,
        _ => EXIT_OK,
    })
}

fn cmd_matrix(dir: PathBuf, out: Option<PathBuf>) -> crate::Result<i32> {
    let (rows, bad) = run::matrix_dir(&dir, out.as_deref())?;
    for (p, e) in &bad {
        eprintln!("skipped {}: {e}", p.display());
    }
    print!("{}", matrix_table(&rows));
    if rows.is_empty() {
        return Err(Error::schema("matrix", format!("no usable scenarios in {}", dir.display())));
    }
    if rows.iter().any(|r| r.report.is_none()) {
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

fn map_or_default(s: &Scenario, map: Option<String>) -> crate::Result<MapKind> {
    Ok(map.as_deref().map(scenario::parse_map).transpose()?.unwrap_or(s.map))
}

fn cmd_fsr(path: PathBuf, samples: usize, seed: u64, map: Option<String>, jmax: usize) -> crate::Result<i32> {
    let s = load_scenario(&path)?;
    let k = map_or_default(&s, map)?;
    let r = run::fsr_for(&s, k, samples, seed, jmax)?;
    println!("executions  {}", r.executions);
    println!("transitions {}", r.transitions);
    println!("violations  {}", r.violations.len());
    for v in r.violations.iter().take(10) {
        println!("  execution {} step {}: {}", v.execution, v.index, v.what);
    }
    Ok(if r.ok() { EXIT_OK } else { EXIT_UNKNOWN })
}

fn cmd_equiv(path: PathBuf, samples: usize, seed: u64, map: Option<String>) -> crate::Result<i32> {
    let s = load_scenario(&path)?;
    let k = map_or_default(&s, map)?;
    let worst = run::equivariance_for(&s, k, samples, seed)?;
    let pass = worst < 1e-9;
    println!("max residual {worst:.3e}  {}", if pass { "ok" } else { "FAILED" });
    if pass {
        Ok(EXIT_OK)
    } else {
        Err(Error::EquivarianceFailed { residual: worst })
    }
}

/// Parse `std::env::args` and run; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let r = match cli.cmd {
        Cmd::Run { scenario, method, map, grid, dt, jmax, out } => cmd_run(scenario, method, map, grid, dt, jmax, out),
        Cmd::Matrix { dir, out } => cmd_matrix(dir, out),
        Cmd::CheckFsr { scenario, samples, seed, map, jmax } => cmd_fsr(scenario, samples, seed, map, jmax),
        Cmd::CheckEquivariance { scenario, samples, seed, map } => cmd_equiv(scenario, samples, seed, map),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}
