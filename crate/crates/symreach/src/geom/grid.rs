use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::rect::HyperRect;
use super::GEOM_TOL;
use crate::error::{Error, Result};

/// Largest supported ambient dimension for gridding.
pub const MAX_DIM: usize = 4;

/// Integer cell coordinates; entries beyond the grid dimension stay zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId(pub [i32; MAX_DIM]);

impl CellId {
    pub fn new(c: &[i32]) -> Self {
        assert!(c.len() <= MAX_DIM, "cell dimension");
        let mut a = [0; MAX_DIM];
        a[..c.len()].copy_from_slice(c);
        CellId(a)
    }

    pub fn coords(&self, n: usize) -> &[i32] {
        &self.0[..n]
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Uniform grid; cell `c` covers `[origin + c∘w, origin + (c+1)∘w)`.
///
/// A dimension may be periodic (e.g. a heading angle); its cell indices are
/// then taken modulo the number of cells in one period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    origin: Vec<f64>,
    cell_width: Vec<f64>,
    periods: Vec<Option<i32>>,
}

impl Grid {
    pub fn new(origin: Vec<f64>, cell_width: Vec<f64>) -> Result<Self> {
        if origin.len() != cell_width.len() {
            return Err(Error::DimMismatch {
                expected: origin.len(),
                got: cell_width.len(),
            });
        }
        if origin.len() > MAX_DIM {
            return Err(Error::InvalidGeometry(format!(
                "grids support at most {MAX_DIM} dimensions"
            )));
        }
        if cell_width.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidGeometry("cell width must be positive".into()));
        }
        let n = origin.len();
        Ok(Grid {
            origin,
            cell_width,
            periods: vec![None; n],
        })
    }

    /// Make dimension `d` periodic with the given period, which must be an
    /// integer multiple of the cell width.
    pub fn with_period(mut self, d: usize, period: f64) -> Result<Self> {
        let k = period / self.cell_width[d];
        let kr = k.round();
        if kr < 1.0 || (k - kr).abs() > 1e-9 * k.max(1.0) {
            return Err(Error::InvalidGeometry(format!(
                "period {period} is not a multiple of cell width {}",
                self.cell_width[d]
            )));
        }
        self.periods[d] = Some(kr as i32);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn cell_width(&self) -> &[f64] {
        &self.cell_width
    }

    /// Number of cells in one period of dimension `d`, if periodic.
    pub fn period_cells(&self, d: usize) -> Option<i32> {
        self.periods[d]
    }

    pub fn period(&self, d: usize) -> Option<f64> {
        self.periods[d].map(|k| k as f64 * self.cell_width[d])
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_width.iter().product()
    }

    /// Same widths and periods with a different origin.
    pub fn with_origin(&self, origin: Vec<f64>) -> Grid {
        assert_eq!(origin.len(), self.dim());
        Grid {
            origin,
            cell_width: self.cell_width.clone(),
            periods: self.periods.clone(),
        }
    }

    pub fn wrap(&self, c: CellId) -> CellId {
        let mut out = c;
        for d in 0..self.dim() {
            if let Some(k) = self.periods[d] {
                out.0[d] = c.0[d].rem_euclid(k);
            }
        }
        out
    }

    pub fn cell_of(&self, x: &[f64]) -> CellId {
        let mut c = [0; MAX_DIM];
        for d in 0..self.dim() {
            c[d] = ((x[d] - self.origin[d]) / self.cell_width[d] + 1e-9).floor() as i32;
        }
        self.wrap(CellId(c))
    }

    pub fn cell_rect(&self, c: &CellId) -> HyperRect {
        let n = self.dim();
        let lo: Vec<f64> = (0..n)
            .map(|d| self.origin[d] + c.0[d] as f64 * self.cell_width[d])
            .collect();
        let hi: Vec<f64> = (0..n).map(|d| lo[d] + self.cell_width[d]).collect();
        HyperRect::new_unchecked(lo, hi)
    }

    pub fn cell_center(&self, c: &CellId) -> Vec<f64> {
        (0..self.dim())
            .map(|d| self.origin[d] + (c.0[d] as f64 + 0.5) * self.cell_width[d])
            .collect()
    }

    /// Unwrapped index range of cells whose interior (shrunk by the geometric
    /// tolerance) meets `[lo, hi]` along dimension `d`. A degenerate interval
    /// falls back to the cell holding its midpoint.
    pub(crate) fn index_range(&self, d: usize, lo: f64, hi: f64) -> Result<(i64, i64)> {
        let o = self.origin[d];
        let w = self.cell_width[d];
        if !(lo.is_finite() && hi.is_finite()) {
            return match self.periods[d] {
                Some(k) => Ok((0, k as i64 - 1)),
                None => Err(Error::UnboundedRegion { dim: d }),
            };
        }
        let kmin = ((lo - o + GEOM_TOL) / w - 1.0).ceil() as i64;
        let kmax = ((hi - o - GEOM_TOL) / w).floor() as i64;
        if kmin > kmax {
            let k = ((0.5 * (lo + hi) - o) / w + 1e-9).floor() as i64;
            return Ok((k, k));
        }
        if let Some(k) = self.periods[d] {
            if kmax - kmin + 1 >= k as i64 {
                return Ok((kmin, kmin + k as i64 - 1));
            }
        }
        Ok((kmin, kmax))
    }

    /// Every cell (wrapped) whose interior meets the box.
    pub fn rect_cells(&self, r: &HyperRect, out: &mut impl Extend<CellId>) -> Result<()> {
        let n = self.dim();
        let mut ranges = [(0i64, 0i64); MAX_DIM];
        for d in 0..n {
            ranges[d] = self.index_range(d, r.lo()[d], r.hi()[d])?;
        }
        for_each_cell(&ranges[..n], |c| out.extend(std::iter::once(self.wrap(c))));
        Ok(())
    }

    /// Shift a point's periodic coordinates into `[origin, origin + period)`.
    pub fn canonical_point(&self, x: &mut [f64]) {
        for d in 0..self.dim() {
            if let Some(p) = self.period(d) {
                let o = self.origin[d];
                x[d] = o + (x[d] - o).rem_euclid(p);
            }
        }
    }
}

/// Iterate the integer box `ranges` (inclusive) in lexicographic order.
pub(crate) fn for_each_cell(ranges: &[(i64, i64)], mut f: impl FnMut(CellId)) {
    let n = ranges.len();
    if ranges.iter().any(|(a, b)| a > b) {
        return;
    }
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let mut c = [0i32; MAX_DIM];
        for d in 0..n {
            c[d] = cur[d] as i32;
        }
        f(CellId(c));
        let mut d = n;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            if cur[d] < ranges[d].1 {
                cur[d] += 1;
                for e in d + 1..n {
                    cur[e] = ranges[e].0;
                }
                break;
            }
        }
    }
}

/// A finite set of grid cells.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSet {
    cells: BTreeSet<CellId>,
}

impl CellSet {
    pub fn new() -> Self {
        CellSet::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn insert(&mut self, c: CellId) -> bool {
        self.cells.insert(c)
    }

    pub fn contains_cell(&self, c: &CellId) -> bool {
        self.cells.contains(c)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CellId> {
        self.cells.iter()
    }

    pub fn is_subset(&self, outer: &CellSet) -> bool {
        self.cells.is_subset(&outer.cells)
    }

    pub fn union_with(&mut self, other: &CellSet) {
        self.cells.extend(other.cells.iter().copied());
    }

    pub fn difference(&self, other: &CellSet) -> CellSet {
        CellSet {
            cells: self.cells.difference(&other.cells).copied().collect(),
        }
    }
}

impl FromIterator<CellId> for CellSet {
    fn from_iter<I: IntoIterator<Item = CellId>>(iter: I) -> Self {
        CellSet {
            cells: iter.into_iter().collect(),
        }
    }
}

impl Extend<CellId> for CellSet {
    fn extend<I: IntoIterator<Item = CellId>>(&mut self, iter: I) {
        self.cells.extend(iter)
    }
}

impl<'a> IntoIterator for &'a CellSet {
    type Item = &'a CellId;
    type IntoIter = std::collections::btree_set::Iter<'a, CellId>;
    fn into_iter(self) -> Self::IntoIter {
        self.cells.iter()
    }
}
