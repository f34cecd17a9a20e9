use serde::{Deserialize, Serialize};

use super::polytope::ConvexPolytope;
use crate::error::{Error, Result};

/// Axis-aligned box `[lo, hi]`; bounds may be infinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperRect {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl HyperRect {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if l.is_nan() || h.is_nan() || l > h {
                return Err(Error::InvalidGeometry(format!(
                    "box bound {i}: lo {l} exceeds hi {h}"
                )));
            }
        }
        Ok(HyperRect { lo, hi })
    }

    pub(crate) fn new_unchecked(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        HyperRect { lo, hi }
    }

    /// `B(center, width)`: the box with side lengths `width[i]` around `center`.
    pub fn centered(center: &[f64], width: &[f64]) -> Result<Self> {
        if center.len() != width.len() {
            return Err(Error::DimMismatch {
                expected: center.len(),
                got: width.len(),
            });
        }
        if width.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::InvalidGeometry("negative box width".into()));
        }
        let lo = center.iter().zip(width).map(|(c, w)| c - 0.5 * w).collect();
        let hi = center.iter().zip(width).map(|(c, w)| c + 0.5 * w).collect();
        Ok(HyperRect { lo, hi })
    }

    pub fn universe(n: usize) -> Self {
        HyperRect {
            lo: vec![f64::NEG_INFINITY; n],
            hi: vec![f64::INFINITY; n],
        }
    }

    pub fn point(x: &[f64]) -> Self {
        HyperRect {
            lo: x.to_vec(),
            hi: x.to_vec(),
        }
    }

    /// Append an extra dimension with the given bounds (`× [lo, hi]`).
    pub fn extend(&self, lo: f64, hi: f64) -> Self {
        let mut r = self.clone();
        r.lo.push(lo);
        r.hi.push(hi);
        r
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect()
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }

    pub fn volume(&self) -> f64 {
        self.widths().iter().product()
    }

    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
    }

    pub fn contains_rect(&self, other: &HyperRect, tol: f64) -> bool {
        (0..self.dim()).all(|i| other.lo[i] >= self.lo[i] - tol && other.hi[i] <= self.hi[i] + tol)
    }

    /// Closed intersection test.
    pub fn intersects(&self, other: &HyperRect) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= other.hi[i] && other.lo[i] <= self.hi[i])
    }

    pub fn intersection(&self, other: &HyperRect) -> Option<HyperRect> {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let l = self.lo[i].max(other.lo[i]);
            let h = self.hi[i].min(other.hi[i]);
            if l > h {
                return None;
            }
            lo.push(l);
            hi.push(h);
        }
        Some(HyperRect { lo, hi })
    }

    pub fn hull(&self, other: &HyperRect) -> HyperRect {
        HyperRect {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    /// Shift dimension `d` by `delta`.
    pub fn shifted(&self, d: usize, delta: f64) -> HyperRect {
        let mut r = self.clone();
        r.lo[d] += delta;
        r.hi[d] += delta;
        r
    }

    /// Scale about the center by `factor` in every bounded dimension.
    pub fn scaled(&self, factor: f64) -> HyperRect {
        let mut r = self.clone();
        for i in 0..self.dim() {
            if self.lo[i].is_finite() && self.hi[i].is_finite() {
                let c = 0.5 * (self.lo[i] + self.hi[i]);
                let h = 0.5 * (self.hi[i] - self.lo[i]) * factor;
                r.lo[i] = c - h;
                r.hi[i] = c + h;
            }
        }
        r
    }

    /// Corner points; infinite bounds are kept as they are.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                    .collect()
            })
            .collect()
    }

    /// H-representation; infinite bounds contribute no halfspace.
    pub fn to_polytope(&self) -> ConvexPolytope {
        let n = self.dim();
        let mut rows = Vec::new();
        for i in 0..n {
            if self.hi[i].is_finite() {
                let mut a = vec![0.0; n];
                a[i] = 1.0;
                rows.push((a, self.hi[i]));
            }
            if self.lo[i].is_finite() {
                let mut a = vec![0.0; n];
                a[i] = -1.0;
                rows.push((a, -self.lo[i]));
            }
        }
        ConvexPolytope::from_rows(n, &rows)
    }
}
