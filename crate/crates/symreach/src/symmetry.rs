//! Symmetry pairs `(γ_p, ρ_p)`, the translation and rotation families, and
//! numerical equivariance checks.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automaton::{ModeStyle, MODE_TOL};
use crate::dynamics::{Dynamics, DynamicsId};
use crate::error::{Error, Result};
use crate::geom::AffineMap;

/// Residual accepted by the construction-time equivariance gate.
pub const GATE_TOL: f64 = 1e-6;
/// Samples drawn by the construction-time gate.
pub const GATE_SAMPLES: usize = 100;

/// State map `γ`, its inverse, and mode map `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryPair {
    pub gamma: AffineMap,
    pub gamma_inv: AffineMap,
    pub rho: AffineMap,
}

impl SymmetryPair {
    pub fn new(gamma: AffineMap, rho: AffineMap) -> Result<Self> {
        let gamma_inv = gamma.inverse()?;
        Ok(SymmetryPair {
            gamma,
            gamma_inv,
            rho,
        })
    }

    pub fn identity(n: usize, m: usize) -> Self {
        SymmetryPair {
            gamma: AffineMap::identity(n),
            gamma_inv: AffineMap::identity(n),
            rho: AffineMap::identity(m),
        }
    }

    /// Apply `self` first, then `outer`.
    pub fn then(&self, outer: &SymmetryPair) -> Result<SymmetryPair> {
        let gamma = outer.gamma.compose(&self.gamma)?;
        let rho = outer.rho.compose(&self.rho)?;
        SymmetryPair::new(gamma, rho)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    T,
    TR,
    Custom,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
enum Family {
    Identity { n: usize, m: usize },
    Translation,
    /// Rotation about the origin aligning each road with `target_axis`.
    Rotation { target_axis: usize },
    TranslationRotation { target_axis: usize },
    Table(Vec<(Vec<f64>, SymmetryPair)>),
    Composed(Box<VirtualMap>, Box<VirtualMap>),
}

/// A family of symmetry pairs indexed by mode vectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VirtualMap {
    kind: MapKind,
    dynamics: Dynamics,
    family: Family,
}

fn block_rotation(theta: f64, n: usize) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let mut a = DMatrix::identity(n, n);
    a[(0, 0)] = c;
    a[(0, 1)] = s;
    a[(1, 0)] = -s;
    a[(1, 1)] = c;
    a
}

fn split_road(p: &[f64]) -> Result<(&[f64], &[f64])> {
    if p.len() != 4 {
        return Err(Error::DimMismatch {
            expected: 4,
            got: p.len(),
        });
    }
    Ok((&p[..2], &p[2..]))
}

fn road_angle(p: &[f64], target_axis: usize) -> Result<f64> {
    let (s, d) = split_road(p)?;
    let (dx, dy) = (d[0] - s[0], d[1] - s[1]);
    if dx.hypot(dy) <= MODE_TOL {
        return Err(Error::DegenerateRoad);
    }
    let theta = dy.atan2(dx);
    Ok(if target_axis == 1 {
        theta - std::f64::consts::FRAC_PI_2
    } else {
        theta
    })
}

impl VirtualMap {
    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    /// The pair for mode `p`.
    pub fn pair(&self, p: &[f64]) -> Result<SymmetryPair> {
        let n = self.dynamics.state_dim();
        match &self.family {
            Family::Identity { n, m } => Ok(SymmetryPair::identity(*n, *m)),
            Family::Translation => {
                let m = p.len();
                let dest: Vec<f64> = match m {
                    4 | 6 => p[m / 2..].to_vec(),
                    _ => p.to_vec(),
                };
                let mut t = vec![0.0; n];
                for (i, v) in dest.iter().enumerate().take(n) {
                    t[i] = -v;
                }
                let rho_t: Vec<f64> = match m {
                    4 | 6 => dest.iter().chain(dest.iter()).map(|v| -v).collect(),
                    _ => dest.iter().map(|v| -v).collect(),
                };
                SymmetryPair::new(AffineMap::translation(&t), AffineMap::translation(&rho_t))
            }
            Family::Rotation { target_axis } => {
                let theta = road_angle(p, *target_axis)?;
                let a = block_rotation(theta, n);
                let mut b = DVector::zeros(n);
                if self.dynamics.id == DynamicsId::Robot {
                    b[2] = -theta;
                }
                let r = block_rotation(theta, 2);
                let mut ra = DMatrix::zeros(4, 4);
                ra.view_mut((0, 0), (2, 2)).copy_from(&r);
                ra.view_mut((2, 2), (2, 2)).copy_from(&r);
                SymmetryPair::new(AffineMap::new(a, b)?, AffineMap::new(ra, DVector::zeros(4))?)
            }
            Family::TranslationRotation { target_axis } => {
                let theta = road_angle(p, *target_axis)?;
                let (_, d) = split_road(p)?;
                let a = block_rotation(theta, n);
                let r = block_rotation(theta, 2);
                let rd = &r * DVector::from_column_slice(d);
                let mut b = DVector::zeros(n);
                b[0] = -rd[0];
                b[1] = -rd[1];
                if self.dynamics.id == DynamicsId::Robot {
                    b[2] = -theta;
                }
                let mut ra = DMatrix::zeros(4, 4);
                ra.view_mut((0, 0), (2, 2)).copy_from(&r);
                ra.view_mut((2, 2), (2, 2)).copy_from(&r);
                let rb = DVector::from_column_slice(&[-rd[0], -rd[1], -rd[0], -rd[1]]);
                SymmetryPair::new(AffineMap::new(a, b)?, AffineMap::new(ra, rb)?)
            }
            Family::Table(rows) => rows
                .iter()
                .find(|(q, _)| q.len() == p.len() && q.iter().zip(p).all(|(a, b)| (a - b).abs() <= MODE_TOL))
                .map(|(_, pair)| pair.clone())
                .ok_or_else(|| Error::UnknownMode(p.to_vec())),
            Family::Composed(ab, bc) => {
                let first = ab.pair(p)?;
                let q = first.rho.apply(p);
                let second = bc.pair(&q)?;
                first.then(&second)
            }
        }
    }

    /// `rv(p) = ρ_p(p)`.
    pub fn rv(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.pair(p)?.rho.apply(p))
    }

    /// Check every listed mode's pair at the gate tolerance.
    pub fn gate(&self, modes: &[Vec<f64>], seed: u64) -> Result<()> {
        for (k, p) in modes.iter().enumerate() {
            let pair = self.pair(p)?;
            let rep = check_equivariance(&self.dynamics, &pair, p, GATE_SAMPLES, seed.wrapping_add(k as u64), GATE_TOL);
            if !rep.pass {
                return Err(Error::EquivarianceFailed {
                    residual: rep.max_residual,
                });
            }
        }
        Ok(())
    }

    fn gated(self, style: ModeStyle) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let modes: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let m = match style {
                    ModeStyle::Waypoint => 2,
                    ModeStyle::Road => 4,
                };
                (0..m).map(|_| rng.random_range(-10.0..10.0)).collect()
            })
            .collect();
        // 10 modes × 10 states keeps the gate at 100 samples overall.
        for (k, p) in modes.iter().enumerate() {
            let pair = self.pair(p)?;
            let rep = check_equivariance(&self.dynamics, &pair, p, GATE_SAMPLES / 10, k as u64, GATE_TOL);
            if !rep.pass {
                return Err(Error::EquivarianceFailed {
                    residual: rep.max_residual,
                });
            }
        }
        Ok(self)
    }
}

/// Identity family: every pair is `(id, id)`.
pub fn make_identity_map(dynamics: Dynamics, m: usize) -> VirtualMap {
    VirtualMap {
        kind: MapKind::Custom,
        dynamics,
        family: Family::Identity {
            n: dynamics.state_dim(),
            m,
        },
    }
}

/// Translation family T: move the mode's target point to the origin.
pub fn make_translation_map(dynamics: Dynamics, style: ModeStyle) -> Result<VirtualMap> {
    VirtualMap {
        kind: MapKind::T,
        dynamics,
        family: Family::Translation,
    }
    .gated(style)
}

/// Translation-rotation family TR on road modes, aligning each road with
/// the positive `x[0]` axis and its destination with the origin.
pub fn make_tr_map(dynamics: Dynamics) -> Result<VirtualMap> {
    make_tr_map_axis(dynamics, 0)
}

/// TR with the road aligned to `x[target_axis]`, `target_axis ∈ {0, 1}`.
pub fn make_tr_map_axis(dynamics: Dynamics, target_axis: usize) -> Result<VirtualMap> {
    if target_axis > 1 {
        return Err(Error::InvalidGeometry("target axis must be 0 or 1".into()));
    }
    VirtualMap {
        kind: MapKind::TR,
        dynamics,
        family: Family::TranslationRotation { target_axis },
    }
    .gated(ModeStyle::Road)
}

/// Pure rotation family on road modes (no translation).
pub fn make_rotation_map(dynamics: Dynamics, target_axis: usize) -> Result<VirtualMap> {
    VirtualMap {
        kind: MapKind::Custom,
        dynamics,
        family: Family::Rotation { target_axis },
    }
    .gated(ModeStyle::Road)
}

/// Family given explicitly per mode; every entry is gated.
pub fn make_custom_map(dynamics: Dynamics, table: Vec<(Vec<f64>, SymmetryPair)>) -> Result<VirtualMap> {
    let modes: Vec<Vec<f64>> = table.iter().map(|(p, _)| p.clone()).collect();
    let map = VirtualMap {
        kind: MapKind::Custom,
        dynamics,
        family: Family::Table(table),
    };
    map.gate(&modes, 0)?;
    Ok(map)
}

/// Composition: apply `phi_ab` first, then `phi_bc` on the resulting modes.
pub fn compose_maps(phi_ab: &VirtualMap, phi_bc: &VirtualMap) -> Result<VirtualMap> {
    let (n1, n2) = (phi_ab.dynamics.state_dim(), phi_bc.dynamics.state_dim());
    if n1 != n2 {
        return Err(Error::DimMismatch { expected: n1, got: n2 });
    }
    if phi_ab.dynamics.id != phi_bc.dynamics.id {
        return Err(Error::InvalidGeometry("composed maps use different dynamics".into()));
    }
    Ok(VirtualMap {
        kind: MapKind::Custom,
        dynamics: phi_ab.dynamics,
        family: Family::Composed(Box::new(phi_ab.clone()), Box::new(phi_bc.clone())),
    })
}

/// Result of a sampled equivariance check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivReport {
    pub max_residual: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Sample box for equivariance checks: positions in `[−10, 10]²`, third
/// coordinate in `[−π, π]`.
fn sample_state(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i < 2 {
                rng.random_range(-10.0..10.0)
            } else {
                rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
            }
        })
        .collect()
}

/// `max ‖A_γ f(x, p) − f(γ(x), ρ(p))‖∞` over sampled states.
pub fn check_equivariance(
    dynamics: &Dynamics,
    pair: &SymmetryPair,
    p: &[f64],
    samples: usize,
    seed: u64,
    tol: f64,
) -> EquivReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dynamics.state_dim();
    let pv = pair.rho.apply(p);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_state(&mut rng, n);
        let lhs = pair.gamma.apply_linear(&dynamics.f(&x, p));
        let rhs = dynamics.f(&pair.gamma.apply(&x), &pv);
        let r = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
    }
    EquivReport {
        max_residual: worst,
        samples,
        pass: worst <= tol,
    }
}
