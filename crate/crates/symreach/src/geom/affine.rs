use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::rect::HyperRect;
use super::DET_TOL;
use crate::error::{Error, Result};

/// `x ↦ A x + b` on ℝⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl AffineMap {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        if a.nrows() != b.len() {
            return Err(Error::DimMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        Ok(AffineMap { a, b })
    }

    pub fn from_rows(rows: &[Vec<f64>], b: &[f64]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGeometry("affine matrix must be square".into()));
        }
        let flat: Vec<f64> = rows.concat();
        Self::new(DMatrix::from_row_slice(n, n, &flat), DVector::from_column_slice(b))
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            a: DMatrix::identity(n, n),
            b: DVector::zeros(n),
        }
    }

    pub fn translation(t: &[f64]) -> Self {
        AffineMap {
            a: DMatrix::identity(t.len(), t.len()),
            b: DVector::from_column_slice(t),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut s = self.b[i];
            for (j, xj) in x.iter().enumerate().take(n) {
                s += self.a[(i, j)] * xj;
            }
            *o = s;
        }
    }

    /// Linear part only.
    pub fn apply_linear(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.a[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> Result<AffineMap> {
        if self.dim() != inner.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: inner.dim(),
            });
        }
        Ok(AffineMap {
            a: &self.a * &inner.a,
            b: &self.a * &inner.b + &self.b,
        })
    }

    pub fn det(&self) -> f64 {
        self.a.determinant()
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let det = self.det();
        if det.abs() < DET_TOL {
            return Err(Error::SingularMap { det });
        }
        let inv = self
            .a
            .clone()
            .try_inverse()
            .ok_or(Error::SingularMap { det })?;
        let b = -(&inv * &self.b);
        Ok(AffineMap { a: inv, b })
    }

    pub fn approx_eq(&self, other: &AffineMap, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.a.iter().zip(other.a.iter()).all(|(x, y)| (x - y).abs() <= tol)
            && self.b.iter().zip(other.b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&AffineMap::identity(self.dim()), tol)
    }

    /// For a signed permutation matrix (up to `1e-12`), the axis each output
    /// coordinate reads from and its sign.
    pub fn monomial(&self) -> Option<Vec<(usize, f64)>> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut hit = None;
            for j in 0..n {
                let v = self.a[(i, j)];
                if v.abs() > 1e-12 {
                    if hit.is_some() || (v.abs() - 1.0).abs() > 1e-12 {
                        return None;
                    }
                    hit = Some((j, v.signum()));
                }
            }
            out.push(hit?);
        }
        Some(out)
    }

    /// Image of a box under a signed-permutation map, itself a box.
    pub fn rect_image(&self, r: &HyperRect, perm: &[(usize, f64)]) -> HyperRect {
        let n = self.dim();
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for (i, &(j, s)) in perm.iter().enumerate() {
            let (a, b) = if s > 0.0 {
                (r.lo()[j], r.hi()[j])
            } else {
                (-r.hi()[j], -r.lo()[j])
            };
            lo.push(a + self.b[i]);
            hi.push(b + self.b[i]);
        }
        HyperRect::new_unchecked(lo, hi)
    }
}
