//! CSV and text output of reach runs.

use std::io::Write;

use crate::error::Result;
use crate::geom::HyperRect;

use super::cover::PMap;
use super::engine::{Metrics, ReachRun};

/// Write one row per segment, cell tube and time window of length `window`:
/// `path_index, virtual_mode_index, t_lo, t_hi, lo_0.., hi_0.., provenance`.
/// Boxes are in concrete coordinates; a rotated box is replaced by its
/// bounding box, and the last column then carries a `+rebox` suffix.
pub fn write_reachtube_csv(run: &ReachRun, mut out: impl Write, window: f64) -> Result<()> {
    let n = run.grid.dim();
    let mut header = vec!["path_index".to_string(), "virtual_mode_index".into(), "t_lo".into(), "t_hi".into()];
    header.extend((0..n).map(|i| format!("lo_{i}")));
    header.extend((0..n).map(|i| format!("hi_{i}")));
    header.push("provenance".into());
    writeln!(out, "{}", header.join(","))?;
    for (i, seg) in run.segments.iter().enumerate() {
        let m = PMap::new(seg.to_concrete.clone());
        let rebox = if m.is_monomial() { "" } else { "+rebox" };
        let vm = seg.vmode.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
        for (tube, prov) in run.segment_tubes(i)? {
            let dt = tube.tube.dt;
            let per = ((window / dt).round() as usize).max(1);
            let mut start = 0;
            while start < tube.n_states {
                let end = (start + per + 1).min(tube.n_states);
                let hull = (start..end)
                    .map(|k| m.image_bbox(&tube.tube.rect(k)))
                    .reduce(|a, b| a.hull(&b))
                    .expect("window holds a state");
                write_row(&mut out, i, &vm, start as f64 * dt, (end - 1) as f64 * dt, &hull, prov.as_str(), rebox)?;
                if end == tube.n_states {
                    break;
                }
                start = end - 1;
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn write_row(
    out: &mut impl Write,
    i: usize,
    vm: &str,
    t_lo: f64,
    t_hi: f64,
    r: &HyperRect,
    prov: &str,
    rebox: &str,
) -> Result<()> {
    write!(out, "{i},{vm},{t_lo:.6},{t_hi:.6}")?;
    for v in r.lo().iter().chain(r.hi()) {
        write!(out, ",{v:.9}")?;
    }
    writeln!(out, ",{prov}{rebox}")?;
    Ok(())
}

/// The six metric fields as `key = value` lines.
pub fn metrics_text(m: &Metrics) -> String {
    let err = m.error_pct.map(|e| format!("{e:.3}")).unwrap_or_else(|| "n/a".into());
    format!(
        "co = {}\nre = {}\ncp = {}\ntot = {}\nwall_time = {:.6}\nerror_pct = {}\n",
        m.co, m.re, m.cp, m.tot, m.wall_time, err
    )
}
