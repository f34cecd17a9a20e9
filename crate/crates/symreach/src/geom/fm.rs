//! Fourier–Motzkin elimination over small systems `a·x ≤ b`.
//!
//! Rows are stored flat, `n + 1` numbers per row with the right-hand side last.

const COEF_EPS: f64 = 1e-12;
/// Slack accepted on the final `0 ≤ b` checks of normalized rows.
pub(crate) const FEAS_TOL: f64 = 1e-9;

struct System {
    n: usize,
    rows: Vec<f64>,
}

impl System {
    fn width(&self) -> usize {
        self.n + 1
    }

    fn count(&self) -> usize {
        self.rows.len() / self.width()
    }

    fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.rows[i * w..(i + 1) * w]
    }
}

/// Scale a row so its largest coefficient has magnitude one.
/// Returns `None` when every coefficient vanishes and the row is trivially
/// satisfied, `Some(false)` when it vanishes and is violated.
fn normalize(row: &mut [f64]) -> Option<bool> {
    let n = row.len() - 1;
    let s = row[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if s < COEF_EPS {
        return if row[n] >= -FEAS_TOL { None } else { Some(false) };
    }
    for v in row.iter_mut() {
        *v /= s;
    }
    Some(true)
}

/// Interval prefilter: tighten per-variable bounds from single-variable rows.
fn interval_conflict(sys: &System) -> bool {
    let n = sys.n;
    let mut lo = vec![f64::NEG_INFINITY; n];
    let mut hi = vec![f64::INFINITY; n];
    for i in 0..sys.count() {
        let r = sys.row(i);
        let mut only = None;
        let mut multi = false;
        for (j, &a) in r[..n].iter().enumerate() {
            if a.abs() > COEF_EPS {
                if only.is_some() {
                    multi = true;
                    break;
                }
                only = Some(j);
            }
        }
        if multi {
            continue;
        }
        if let Some(j) = only {
            let bound = r[n] / r[j];
            if r[j] > 0.0 {
                hi[j] = hi[j].min(bound);
            } else {
                lo[j] = lo[j].max(bound);
            }
        }
    }
    lo.iter().zip(&hi).any(|(l, h)| l > &(h + FEAS_TOL))
}

fn build(n: usize, rows: &[f64]) -> Option<System> {
    let w = n + 1;
    let mut out = Vec::with_capacity(rows.len());
    for r in rows.chunks_exact(w) {
        let mut r = r.to_vec();
        match normalize(&mut r) {
            None => {}
            Some(false) => return None,
            Some(true) => out.extend_from_slice(&r),
        }
    }
    Some(System { n, rows: out })
}

/// Remove duplicate rows (same normal), keeping the tightest bound.
fn dedupe(sys: &mut System) {
    let w = sys.width();
    let n = sys.n;
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(sys.count());
    'outer: for r in sys.rows.chunks_exact(w) {
        for k in kept.iter_mut() {
            if k[..n].iter().zip(&r[..n]).all(|(a, b)| (a - b).abs() < 1e-10) {
                if r[n] < k[n] {
                    k[n] = r[n];
                }
                continue 'outer;
            }
        }
        kept.push(r.to_vec());
    }
    sys.rows = kept.concat();
}

/// Eliminate variable `j`; returns false when a contradiction appears.
fn eliminate(sys: &mut System, j: usize) -> bool {
    let w = sys.width();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out: Vec<f64> = Vec::new();
    for i in 0..sys.count() {
        let r = sys.row(i);
        if r[j] > COEF_EPS {
            pos.push(i);
        } else if r[j] < -COEF_EPS {
            neg.push(i);
        } else {
            let mut z = r.to_vec();
            z[j] = 0.0;
            out.extend_from_slice(&z);
        }
    }
    let mut buf = vec![0.0; w];
    for &p in &pos {
        for &q in &neg {
            let rp = sys.row(p);
            let rq = sys.row(q);
            let sp = 1.0 / rp[j];
            let sq = -1.0 / rq[j];
            for k in 0..w {
                buf[k] = rp[k] * sp + rq[k] * sq;
            }
            buf[j] = 0.0;
            match normalize(&mut buf) {
                None => {}
                Some(false) => return false,
                Some(true) => out.extend_from_slice(&buf),
            }
        }
    }
    sys.rows = out;
    dedupe(sys);
    true
}

fn pick_variable(sys: &System, remaining: &[usize]) -> usize {
    let mut best = remaining[0];
    let mut best_cost = usize::MAX;
    for &j in remaining {
        let (mut p, mut q) = (0usize, 0usize);
        for i in 0..sys.count() {
            let a = sys.row(i)[j];
            if a > COEF_EPS {
                p += 1;
            } else if a < -COEF_EPS {
                q += 1;
            }
        }
        let cost = p * q;
        if cost < best_cost {
            best_cost = cost;
            best = j;
        }
    }
    best
}

fn reduce(n: usize, rows: &[f64], keep: Option<usize>) -> Option<System> {
    let mut sys = build(n, rows)?;
    if interval_conflict(&sys) {
        return None;
    }
    dedupe(&mut sys);
    let mut remaining: Vec<usize> = (0..n).filter(|&j| Some(j) != keep).collect();
    while !remaining.is_empty() {
        let j = pick_variable(&sys, &remaining);
        remaining.retain(|&v| v != j);
        if !eliminate(&mut sys, j) {
            return None;
        }
    }
    Some(sys)
}

/// Decide whether `{x : a·x ≤ b}` is nonempty.
pub(crate) fn feasible(n: usize, rows: &[f64]) -> bool {
    reduce(n, rows, None).is_some()
}

/// Range of coordinate `axis` over the polytope; `None` if it is empty.
pub(crate) fn project_bounds(n: usize, rows: &[f64], axis: usize) -> Option<(f64, f64)> {
    let sys = reduce(n, rows, Some(axis))?;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..sys.count() {
        let r = sys.row(i);
        let a = r[axis];
        if a > COEF_EPS {
            hi = hi.min(r[n] / a);
        } else if a < -COEF_EPS {
            lo = lo.max(r[n] / a);
        }
    }
    if lo > hi + FEAS_TOL {
        return None;
    }
    if lo > hi {
        let m = 0.5 * (lo + hi);
        return Some((m, m));
    }
    Some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_is_feasible() {
        let rows = [1.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, -1.0, 0.0];
        assert!(feasible(2, &rows));
        assert_eq!(project_bounds(2, &rows, 0), Some((0.0, 1.0)));
    }

    #[test]
    fn diagonal_cut_outside_triangle() {
        // x ≥ 0, y ≥ 0, x + y ≤ 1, x ≥ 0.7, y ≥ 0.7
        let rows = [
            -1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 1.0, 1.0, -1.0, 0.0, -0.7, 0.0, -1.0, -0.7,
        ];
        assert!(!feasible(2, &rows));
    }

    #[test]
    fn projection_of_rotated_square() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // |x| + |y| ≤ 1 written with normalized rows
        let rows = [s, s, s, -s, s, s, s, -s, s, -s, -s, s];
        let (lo, hi) = project_bounds(2, &rows, 1).unwrap();
        assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }
}
