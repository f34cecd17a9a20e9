use serde::{Deserialize, Serialize};

use super::affine::AffineMap;
use super::grid::{for_each_cell, CellSet, Grid, MAX_DIM};
use super::polytope::ConvexPolytope;
use super::rect::HyperRect;
use super::GEOM_TOL;
use crate::error::{Error, Result};

/// Finite union of convex polytopes in ℝⁿ; no members means the empty set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    dim: usize,
    polys: Vec<ConvexPolytope>,
}

impl Region {
    pub fn empty(dim: usize) -> Self {
        Region {
            dim,
            polys: Vec::new(),
        }
    }

    pub fn new(dim: usize, polys: Vec<ConvexPolytope>) -> Result<Self> {
        for p in &polys {
            if p.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
        }
        Ok(Region { dim, polys })
    }

    pub fn from_poly(p: ConvexPolytope) -> Self {
        Region {
            dim: p.dim(),
            polys: vec![p],
        }
    }

    pub fn from_rect(r: &HyperRect) -> Self {
        Self::from_poly(r.to_polytope())
    }

    pub fn universe(dim: usize) -> Self {
        Self::from_poly(ConvexPolytope::universe(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn polys(&self) -> &[ConvexPolytope] {
        &self.polys
    }

    pub fn push(&mut self, p: ConvexPolytope) {
        assert_eq!(p.dim(), self.dim, "region dimension");
        self.polys.push(p);
    }

    pub fn union(&self, other: &Region) -> Region {
        assert_eq!(self.dim, other.dim, "region dimension");
        let mut polys = self.polys.clone();
        polys.extend(other.polys.iter().cloned());
        Region {
            dim: self.dim,
            polys,
        }
    }

    /// Union that skips members already present (within `tol`).
    pub fn union_dedup(&mut self, other: &Region, tol: f64) {
        for p in &other.polys {
            if !self.polys.iter().any(|q| q.approx_eq(p, tol)) {
                self.polys.push(p.clone());
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.polys.iter().all(|p| p.is_empty())
    }

    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        self.polys.iter().any(|p| p.contains_point(x, tol))
    }

    pub fn bounding_box(&self) -> Option<HyperRect> {
        self.polys
            .iter()
            .filter_map(|p| p.bounding_box())
            .reduce(|a, b| a.hull(&b))
    }

    /// Drop members that are empty.
    pub fn pruned(&self) -> Region {
        Region {
            dim: self.dim,
            polys: self.polys.iter().filter(|p| !p.is_empty()).cloned().collect(),
        }
    }

    /// Does `rect` (closed) meet the region?
    pub fn meets_rect(&self, rect: &HyperRect) -> bool {
        self.polys.iter().any(|p| match p.as_box() {
            Some(b) => b.intersects(rect),
            None => !p.intersect(&rect.to_polytope()).is_empty(),
        })
    }
}

/// Exact affine image of a region.
pub fn transform_region(r: &Region, m: &AffineMap) -> Result<Region> {
    if m.dim() != r.dim {
        return Err(Error::DimMismatch {
            expected: r.dim,
            got: m.dim(),
        });
    }
    let polys = r
        .polys
        .iter()
        .map(|p| p.transform(m))
        .collect::<Result<Vec<_>>>()?;
    Ok(Region { dim: r.dim, polys })
}

/// Pairwise intersection of members, empty results dropped.
pub fn intersect(r1: &Region, r2: &Region) -> Region {
    assert_eq!(r1.dim, r2.dim, "region dimension");
    let mut polys = Vec::new();
    for p in &r1.polys {
        for q in &r2.polys {
            let s = p.intersect(q);
            if !s.is_empty() {
                polys.push(s);
            }
        }
    }
    Region { dim: r1.dim, polys }
}

/// Cells of `g` whose interior meets `p`, appended to `out`.
pub(crate) fn poly_cells(
    p: &ConvexPolytope,
    g: &Grid,
    out: &mut impl Extend<super::grid::CellId>,
) -> Result<()> {
    if let Some(b) = p.as_box() {
        if (0..b.dim()).any(|i| b.lo()[i] > b.hi()[i]) {
            return Ok(());
        }
        return g.rect_cells(&b, out);
    }
    let bb = match p.bounding_box() {
        Some(b) => b,
        None => return Ok(()),
    };
    let n = g.dim();
    let mut ranges = [(0i64, 0i64); MAX_DIM];
    for d in 0..n {
        ranges[d] = g.index_range(d, bb.lo()[d], bb.hi()[d])?;
    }
    for_each_cell(&ranges[..n], |c| {
        let cell = g.cell_rect(&c);
        let degenerate = (0..n).any(|d| bb.hi()[d] - bb.lo()[d] < 2.0 * GEOM_TOL);
        let hit = if degenerate {
            p.meets_shrunk_rect(&cell, 0.0)
        } else {
            p.meets_shrunk_rect(&cell, GEOM_TOL)
        };
        if hit {
            out.extend(std::iter::once(g.wrap(c)));
        }
    });
    Ok(())
}

/// Cells of `g` occupied by `r`: those whose interior, shrunk by the geometric
/// tolerance, meets a member of `r` (a degenerate member takes the cells it
/// touches).
pub fn occupied_cells(r: &Region, g: &Grid) -> Result<CellSet> {
    if r.dim != g.dim() {
        return Err(Error::DimMismatch {
            expected: g.dim(),
            got: r.dim,
        });
    }
    let mut out = CellSet::new();
    for p in &r.polys {
        poly_cells(p, g, &mut out)?;
    }
    Ok(out)
}

/// `inner ⊆ outer`.
pub fn contains(outer: &CellSet, inner: &CellSet) -> bool {
    inner.is_subset(outer)
}

fn interiors_overlap(a: &HyperRect, b: &HyperRect) -> bool {
    (0..a.dim()).all(|i| a.lo()[i] < b.hi()[i] && b.lo()[i] < a.hi()[i])
}

/// Exact volume of a union of boxes by coordinate compression.
fn box_union_volume(boxes: &[HyperRect]) -> f64 {
    let n = boxes[0].dim();
    let disjoint = boxes
        .iter()
        .enumerate()
        .all(|(i, a)| boxes[i + 1..].iter().all(|b| !interiors_overlap(a, b)));
    if disjoint {
        return boxes.iter().map(|b| b.volume()).sum();
    }
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(n);
    for d in 0..n {
        let mut v: Vec<f64> = boxes.iter().flat_map(|b| [b.lo()[d], b.hi()[d]]).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        axes.push(v);
    }
    let ranges: Vec<(i64, i64)> = axes.iter().map(|a| (0, a.len() as i64 - 2)).collect();
    let mut total = 0.0;
    for_each_cell(&ranges, |c| {
        let mid: Vec<f64> = (0..n)
            .map(|d| {
                let k = c.0[d] as usize;
                0.5 * (axes[d][k] + axes[d][k + 1])
            })
            .collect();
        if boxes.iter().any(|b| b.contains_point(&mid, 0.0)) {
            total += (0..n)
                .map(|d| {
                    let k = c.0[d] as usize;
                    axes[d][k + 1] - axes[d][k]
                })
                .product::<f64>();
        }
    });
    total
}

/// Volume of a bounded region.
///
/// Unions of boxes are measured exactly. Members that are not boxes are
/// measured by midpoint counting on a 64-per-axis lattice over the region's
/// bounding box, an approximation.
pub fn region_volume(r: &Region) -> Result<f64> {
    let members: Vec<&ConvexPolytope> = r.polys.iter().filter(|p| !p.is_empty()).collect();
    if members.is_empty() {
        return Ok(0.0);
    }
    let boxes: Option<Vec<HyperRect>> = members.iter().map(|p| p.as_box()).collect();
    if let Some(boxes) = boxes {
        for b in &boxes {
            if !b.is_bounded() {
                let d = (0..b.dim())
                    .find(|&i| !(b.lo()[i].is_finite() && b.hi()[i].is_finite()))
                    .unwrap_or(0);
                return Err(Error::UnboundedRegion { dim: d });
            }
        }
        return Ok(box_union_volume(&boxes));
    }
    let bb = r.bounding_box().ok_or(Error::UnboundedRegion { dim: 0 })?;
    if !bb.is_bounded() {
        return Err(Error::UnboundedRegion { dim: 0 });
    }
    let n = r.dim;
    const STEPS: i64 = 64;
    let w = bb.widths();
    let ranges = vec![(0i64, STEPS - 1); n];
    let mut hits = 0usize;
    for_each_cell(&ranges, |c| {
        let x: Vec<f64> = (0..n)
            .map(|d| bb.lo()[d] + (c.0[d] as f64 + 0.5) * w[d] / STEPS as f64)
            .collect();
        if members.iter().any(|p| p.contains_point(&x, 0.0)) {
            hits += 1;
        }
    });
    Ok(bb.volume() * hits as f64 / (STEPS as f64).powi(n as i32))
}
