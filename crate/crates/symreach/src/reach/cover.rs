//! Gridding of mapped boxes and of tube exits through guards.

use nalgebra::{DMatrix, Vector3};

use crate::error::Result;
use crate::geom::{for_each_cell, poly_cells, AffineMap, CellSet, ConvexPolytope, Grid, HyperRect, Region, GEOM_TOL, MAX_DIM};

use super::tube::TubeRef;

/// An affine map with its signed-permutation form, if it has one.
#[derive(Clone, Debug)]
pub(crate) struct PMap {
    pub map: AffineMap,
    perm: Option<Vec<(usize, f64)>>,
    inv: Option<DMatrix<f64>>,
}

impl PMap {
    pub fn new(map: AffineMap) -> Self {
        let perm = map.monomial();
        let inv = if perm.is_none() {
            map.inverse().ok().map(|m| m.matrix().clone())
        } else {
            None
        };
        PMap { map, perm, inv }
    }

    pub fn is_monomial(&self) -> bool {
        self.perm.is_some()
    }

    /// Axis-aligned hull of the image of `r`.
    pub fn image_bbox(&self, r: &HyperRect) -> HyperRect {
        if let Some(p) = &self.perm {
            return self.map.rect_image(r, p);
        }
        let c = self.map.apply(&r.center());
        let a = self.map.matrix();
        let h: Vec<f64> = r.widths().iter().map(|w| 0.5 * w).collect();
        let n = c.len();
        let ext: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[(i, j)].abs() * h[j]).sum())
            .collect();
        HyperRect::new_unchecked(
            (0..n).map(|i| c[i] - ext[i]).collect(),
            (0..n).map(|i| c[i] + ext[i]).collect(),
        )
    }

    /// Cells whose shrunk interior meets the image of the box `r`.
    pub fn rect_cells(&self, r: &HyperRect, g: &Grid, out: &mut CellSet) -> Result<()> {
        if let Some(p) = &self.perm {
            return g.rect_cells(&self.map.rect_image(r, p), out);
        }
        let inv = match &self.inv {
            Some(m) => m,
            None => return g.rect_cells(&self.image_bbox(r), out),
        };
        let n = g.dim();
        let bb = self.image_bbox(r);
        let mut ranges = [(0i64, 0i64); MAX_DIM];
        for d in 0..n {
            ranges[d] = g.index_range(d, bb.lo()[d], bb.hi()[d])?;
        }
        let c = self.map.apply(&r.center());
        let a = self.map.matrix();
        let h: Vec<f64> = r.widths().iter().map(|w| 0.5 * w).collect();
        let axes = separating_axes(a, inv);
        let w = g.cell_width();
        for_each_cell(&ranges[..n], |cell| {
            let cc = g.cell_center(&cell);
            let separated = axes.iter().any(|ax| {
                let dist: f64 = (0..n).map(|i| ax[i] * (c[i] - cc[i])).sum::<f64>().abs();
                let rp: f64 = (0..n)
                    .map(|j| (0..n).map(|i| ax[i] * a[(i, j)]).sum::<f64>().abs() * h[j])
                    .sum();
                let rc: f64 = (0..n).map(|i| ax[i].abs() * (0.5 * w[i] - GEOM_TOL)).sum();
                dist >= rp + rc
            });
            if !separated {
                out.insert(g.wrap(cell));
            }
        });
        Ok(())
    }
}

/// Candidate separating axes between a cell and a parallelotope `{c + A u}`:
/// the coordinate axes, the parallelotope's face normals (rows of `A⁻¹`) and,
/// in 3-D, the pairwise edge cross products.
fn separating_axes(a: &DMatrix<f64>, inv: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let n = a.nrows();
    let mut axes: Vec<Vec<f64>> = Vec::new();
    for d in 0..n {
        let mut e = vec![0.0; n];
        e[d] = 1.0;
        axes.push(e);
    }
    for i in 0..n {
        axes.push((0..n).map(|j| inv[(i, j)]).collect());
    }
    if n == 3 {
        for d in 0..3 {
            let e = Vector3::from_fn(|i, _| if i == d { 1.0 } else { 0.0 });
            for j in 0..3 {
                let col = Vector3::new(a[(0, j)], a[(1, j)], a[(2, j)]);
                let x = e.cross(&col);
                if x.norm() > 1e-9 {
                    axes.push(x.iter().copied().collect());
                }
            }
        }
    }
    axes
}

#[derive(Clone, Debug)]
struct PPoly {
    poly: ConvexPolytope,
    rect: Option<HyperRect>,
    bbox: HyperRect,
}

/// A guard with the reset maps applied after it, ready for repeated
/// intersection with tube boxes.
#[derive(Clone, Debug)]
pub(crate) struct Exit {
    polys: Vec<PPoly>,
    maps: Vec<PMap>,
    bbox: Option<HyperRect>,
}

impl Exit {
    pub fn new(guard: &Region, maps: &[AffineMap]) -> Self {
        let polys: Vec<PPoly> = guard
            .polys()
            .iter()
            .filter_map(|p| {
                let bbox = p.bounding_box()?;
                Some(PPoly {
                    poly: p.clone(),
                    rect: p.as_box(),
                    bbox,
                })
            })
            .collect();
        let bbox = polys.iter().map(|p| p.bbox.clone()).reduce(|a, b| a.hull(&b));
        Exit {
            polys,
            maps: maps.iter().cloned().map(PMap::new).collect(),
            bbox,
        }
    }

    /// Cells reached through this exit by one tube, added to `out`.
    pub fn tube_exits(&self, tube: &TubeRef, g: &Grid, out: &mut CellSet) -> Result<()> {
        let bbox = match &self.bbox {
            Some(b) => b,
            None => return Ok(()),
        };
        if !tube.bbox().intersects(bbox) {
            return Ok(());
        }
        for i in 0..tube.n_states {
            let r = tube.tube.rect(i);
            if !r.intersects(bbox) {
                continue;
            }
            for p in &self.polys {
                if !r.intersects(&p.bbox) {
                    continue;
                }
                match &p.rect {
                    Some(pr) => {
                        if let Some(s) = r.intersection(pr) {
                            for m in &self.maps {
                                m.rect_cells(&s, g, out)?;
                            }
                        }
                    }
                    None => {
                        let s = p.poly.intersect(&r.to_polytope());
                        if s.is_empty() {
                            continue;
                        }
                        for m in &self.maps {
                            match s.as_box() {
                                Some(b) => m.rect_cells(&b, g, out)?,
                                None => poly_cells(&s.transform(&m.map)?, g, out)?,
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Cells covered by the image of every box of `tube` under `m`.
pub(crate) fn tube_cells(tube: &TubeRef, m: &PMap, g: &Grid, out: &mut CellSet) -> Result<()> {
    for i in 0..tube.n_states {
        m.rect_cells(&tube.tube.rect(i), g, out)?;
    }
    Ok(())
}
