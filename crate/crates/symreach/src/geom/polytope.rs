use serde::{Deserialize, Serialize};

use super::affine::AffineMap;
use super::fm;
use super::rect::HyperRect;
use crate::error::{Error, Result};

/// `{x : A·x ≤ b}` with `A` stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolytope {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ConvexPolytope {
    /// `a` is row-major with `b.len()` rows of `n` columns.
    pub fn new(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != n * b.len() {
            return Err(Error::DimMismatch {
                expected: n * b.len(),
                got: a.len(),
            });
        }
        if a.iter().chain(&b).any(|v| v.is_nan()) {
            return Err(Error::InvalidGeometry("NaN in halfspace".into()));
        }
        Ok(ConvexPolytope { n, a, b })
    }

    pub fn from_rows(n: usize, rows: &[(Vec<f64>, f64)]) -> Self {
        let mut a = Vec::with_capacity(rows.len() * n);
        let mut b = Vec::with_capacity(rows.len());
        for (r, rhs) in rows {
            assert_eq!(r.len(), n, "halfspace dimension");
            a.extend_from_slice(r);
            b.push(*rhs);
        }
        ConvexPolytope { n, a, b }
    }

    /// The whole space (no halfspaces).
    pub fn universe(n: usize) -> Self {
        ConvexPolytope {
            n,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    pub fn row(&self, i: usize) -> (&[f64], f64) {
        (&self.a[i * self.n..(i + 1) * self.n], self.b[i])
    }

    pub fn a(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n_rows(), self.n, &self.a)
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        (0..self.n_rows()).all(|i| {
            let (r, b) = self.row(i);
            let s = r.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let lhs: f64 = r.iter().zip(x).map(|(a, v)| a * v).sum();
            (lhs - b) / s <= tol
        })
    }

    pub(crate) fn flat_rows(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_rows() * (self.n + 1));
        for i in 0..self.n_rows() {
            let (r, b) = self.row(i);
            out.extend_from_slice(r);
            out.push(b);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        !fm::feasible(self.n, &self.flat_rows())
    }

    pub fn intersect(&self, other: &ConvexPolytope) -> ConvexPolytope {
        assert_eq!(self.n, other.n, "polytope dimension");
        let mut a = self.a.clone();
        a.extend_from_slice(&other.a);
        let mut b = self.b.clone();
        b.extend_from_slice(&other.b);
        ConvexPolytope { n: self.n, a, b }
    }

    /// If every row constrains a single coordinate, the polytope is a box.
    pub fn as_box(&self) -> Option<HyperRect> {
        let n = self.n;
        let mut lo = vec![f64::NEG_INFINITY; n];
        let mut hi = vec![f64::INFINITY; n];
        for i in 0..self.n_rows() {
            let (r, b) = self.row(i);
            // rotations by right angles leave ~1e-17 residue off the axis
            let tiny = 1e-12 * r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut axis = None;
            for (j, v) in r.iter().enumerate() {
                if v.abs() > tiny {
                    if axis.is_some() {
                        return None;
                    }
                    axis = Some(j);
                }
            }
            match axis {
                None => {
                    if b < 0.0 {
                        return Some(HyperRect::new_unchecked(vec![1.0; n], vec![0.0; n]));
                    }
                }
                Some(j) => {
                    let bound = b / r[j];
                    if r[j] > 0.0 {
                        hi[j] = hi[j].min(bound);
                    } else {
                        lo[j] = lo[j].max(bound);
                    }
                }
            }
        }
        Some(HyperRect::new_unchecked(lo, hi))
    }

    /// Tight axis-aligned hull, or `None` when empty.
    pub fn bounding_box(&self) -> Option<HyperRect> {
        if let Some(b) = self.as_box() {
            return if (0..self.n).all(|i| b.lo()[i] <= b.hi()[i]) {
                Some(b)
            } else {
                None
            };
        }
        let rows = self.flat_rows();
        let mut lo = Vec::with_capacity(self.n);
        let mut hi = Vec::with_capacity(self.n);
        for axis in 0..self.n {
            let (l, h) = fm::project_bounds(self.n, &rows, axis)?;
            lo.push(l);
            hi.push(h);
        }
        Some(HyperRect::new_unchecked(lo, hi))
    }

    /// Affine image: `{M x + c}` is `{y : A M⁻¹ y ≤ b + A M⁻¹ c}`.
    pub fn transform(&self, m: &AffineMap) -> Result<ConvexPolytope> {
        if m.dim() != self.n {
            return Err(Error::DimMismatch {
                expected: self.n,
                got: m.dim(),
            });
        }
        let inv = m.inverse()?;
        let am = self.a() * inv.matrix();
        let shift = &am * m.offset();
        let mut a = Vec::with_capacity(self.a.len());
        let mut b = Vec::with_capacity(self.b.len());
        for i in 0..self.n_rows() {
            for j in 0..self.n {
                a.push(am[(i, j)]);
            }
            b.push(self.b[i] + shift[i]);
        }
        Ok(ConvexPolytope { n: self.n, a, b })
    }

    /// Does the polytope meet the interior of `rect` shrunk by `shrink`?
    pub fn meets_shrunk_rect(&self, rect: &HyperRect, shrink: f64) -> bool {
        let mut rows = self.flat_rows();
        for i in 0..self.n {
            let (l, h) = (rect.lo()[i] + shrink, rect.hi()[i] - shrink);
            if h.is_finite() {
                let mut r = vec![0.0; self.n + 1];
                r[i] = 1.0;
                r[self.n] = h;
                rows.extend_from_slice(&r);
            }
            if l.is_finite() {
                let mut r = vec![0.0; self.n + 1];
                r[i] = -1.0;
                r[self.n] = -l;
                rows.extend_from_slice(&r);
            }
        }
        fm::feasible(self.n, &rows)
    }

    /// Polytope-level equality of halfspace lists within `tol`.
    pub fn approx_eq(&self, other: &ConvexPolytope, tol: f64) -> bool {
        self.n == other.n
            && self.b.len() == other.b.len()
            && self.a.iter().zip(&other.a).all(|(x, y)| (x - y).abs() <= tol)
            && self.b.iter().zip(&other.b).all(|(x, y)| (x - y).abs() <= tol)
    }

    /// Vertices of a bounded polytope in up to 3 dimensions, by intersecting
    /// every `n`-subset of facets.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let k = self.n_rows();
        let mut out: Vec<Vec<f64>> = Vec::new();
        if n == 0 || k < n {
            return out;
        }
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let mut m = nalgebra::DMatrix::zeros(n, n);
            let mut rhs = nalgebra::DVector::zeros(n);
            for (r, &i) in idx.iter().enumerate() {
                let (row, b) = self.row(i);
                for j in 0..n {
                    m[(r, j)] = row[j];
                }
                rhs[r] = b;
            }
            if let Some(sol) = m.lu().solve(&rhs) {
                let v: Vec<f64> = sol.iter().copied().collect();
                if v.iter().all(|x| x.is_finite())
                    && self.contains_point(&v, 1e-9)
                    && !out.iter().any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-9))
                {
                    out.push(v);
                }
            }
            // next combination
            let mut i = n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if idx[i] < k - n + i {
                    idx[i] += 1;
                    for j in i + 1..n {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}
