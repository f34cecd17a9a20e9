//! Safety queries on top of the reachability engine.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automaton::{HybridAutomaton, Path};
use crate::error::{Error, Result};
use crate::geom::{occupied_cells, transform_region, HyperRect, Region};
use crate::symmetry::VirtualMap;

use super::cache::{SafetyCache, TubeCache};
use super::engine::{compute_reachset, Method, Metrics, ReachConfig, ReachRun};
use super::tube::TubeRef;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Safe,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Safe => "Safe",
            Verdict::Unknown => "Unknown",
        })
    }
}

#[derive(Debug)]
pub struct VerifyOutcome {
    pub verdict: Verdict,
    pub reason: Option<String>,
    /// Concrete mode whose transformed reachset meets the unsafe set.
    pub witness_mode: Option<usize>,
    pub run: Option<ReachRun>,
}

/// Does any box of `tube` meet `u`?
pub(crate) fn tube_meets(tube: &TubeRef, u: &Region, u_box: &HyperRect) -> bool {
    if !tube.bbox().intersects(u_box) {
        return false;
    }
    (0..tube.n_states).any(|i| {
        let r = tube.tube.rect(i);
        r.intersects(u_box) && u.meets_rect(&r)
    })
}

/// Verify `a` against the unsafe set `u` through its virtual automaton.
///
/// Every concrete mode reachable from the initial mode is checked by
/// intersecting the dictionary reachset of its virtual mode with `γ_p(u)`.
/// The answer is `Safe` only when a fixed point was reached and no such
/// intersection is nonempty.
pub fn unbounded_verif(
    a: &HybridAutomaton,
    path: &Path,
    phi: &VirtualMap,
    u: &Region,
    cfg: &ReachConfig,
) -> Result<VerifyOutcome> {
    if u.dim() != a.n {
        return Err(Error::DimMismatch {
            expected: a.n,
            got: u.dim(),
        });
    }
    let run = match compute_reachset(a, path, cfg, Method::SV, Some(phi)) {
        Ok(r) => r,
        Err(e @ Error::NoFixedPoint { .. }) => {
            return Ok(VerifyOutcome {
                verdict: Verdict::Unknown,
                reason: Some(e.to_string()),
                witness_mode: None,
                run: None,
            })
        }
        Err(e) => return Err(e),
    };
    if !run.fixed_point {
        return Ok(VerifyOutcome {
            verdict: Verdict::Unknown,
            reason: Some("no fixed point within the horizon".into()),
            witness_mode: None,
            run: Some(run),
        });
    }
    let va = run.va.as_ref().expect("SV keeps its virtual automaton");
    let dict = run.dict.as_ref().expect("SV keeps its dictionary");
    for p in a.reachable_modes() {
        let v = va.rv_index[p];
        let entry = match dict.entry(v) {
            Some(e) => e,
            None => continue,
        };
        let uv = transform_region(u, &va.pairs[p].gamma)?.pruned();
        let ub = match uv.bounding_box() {
            Some(b) => b,
            None => continue,
        };
        if entry.tubes().any(|t| tube_meets(t, &uv, &ub)) {
            return Ok(VerifyOutcome {
                verdict: Verdict::Unknown,
                reason: Some(format!("reachset of mode {p} meets the unsafe set")),
                witness_mode: Some(p),
                run: Some(run),
            });
        }
    }
    Ok(VerifyOutcome {
        verdict: Verdict::Safe,
        reason: None,
        witness_mode: None,
        run: Some(run),
    })
}

/// Is the reachtube of `k` in mode `p` over `[0, t]` clear of `u`?
///
/// The query is moved to virtual coordinates first; the safety cache answers
/// it when a stored result subsumes it, otherwise cell tubes are fetched from
/// `tcache` (which must live on the virtual grid) and the result is stored.
#[allow(clippy::too_many_arguments)]
pub fn sym_safety(
    k: &Region,
    p: &[f64],
    t: f64,
    u: &Region,
    phi: &VirtualMap,
    scache: &mut SafetyCache,
    tcache: &mut TubeCache,
    metrics: &mut Metrics,
) -> Result<bool> {
    let pair = phi.pair(p)?;
    let kv = transform_region(k, &pair.gamma)?;
    let uv = transform_region(u, &pair.gamma)?.pruned();
    if let Some(hit) = scache.get_intersect(&kv, t, &uv) {
        return Ok(!hit);
    }
    let pv = pair.rho.apply(p);
    let cells = occupied_cells(&kv, tcache.grid())?;
    let ub = uv.bounding_box();
    let mut hit = false;
    for &c in &cells {
        let (tube, computed) = tcache.fetch(&pv, c, t)?;
        if computed {
            metrics.co += 1;
        } else {
            metrics.re += 1;
        }
        metrics.tot = metrics.co + metrics.re + metrics.cp;
        if let Some(b) = &ub {
            hit = hit || tube_meets(&tube, &uv, b);
        }
    }
    scache.store_intersect(kv, t, uv, hit);
    Ok(!hit)
}
