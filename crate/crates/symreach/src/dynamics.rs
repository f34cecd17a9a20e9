//! Vehicle dynamics and a fixed-step RK4 integrator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The built-in dynamic functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicsId {
    /// Planar robot at constant speed steering toward a target point.
    Robot,
    /// `ẋ = diag(−3, −3, −1)(x − target)`.
    Linear3D,
}

impl DynamicsId {
    pub fn state_dim(self) -> usize {
        3
    }
}

/// A dynamics id together with its constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    pub id: DynamicsId,
    /// Robot speed.
    pub v: f64,
    /// Robot length.
    pub l: f64,
}

pub const DEFAULT_SPEED: f64 = 1.0;
pub const DEFAULT_LENGTH: f64 = 1.0;

const LINEAR_RATES: [f64; 3] = [-3.0, -3.0, -1.0];

/// The point a mode steers toward: the destination half of a road mode
/// (`m = 4` or `6`), otherwise the mode itself.
pub fn target_of(p: &[f64]) -> &[f64] {
    match p.len() {
        4 | 6 => &p[p.len() / 2..],
        _ => p,
    }
}

impl Dynamics {
    pub fn new(id: DynamicsId) -> Self {
        Dynamics {
            id,
            v: DEFAULT_SPEED,
            l: DEFAULT_LENGTH,
        }
    }

    pub fn robot(v: f64, l: f64) -> Self {
        Dynamics {
            id: DynamicsId::Robot,
            v,
            l,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.id.state_dim()
    }

    /// `f(x, p)` written into `out`.
    pub fn eval(&self, x: &[f64], p: &[f64], out: &mut [f64]) {
        let t = target_of(p);
        match self.id {
            DynamicsId::Robot => {
                let alpha = (t[1] - x[1]).atan2(t[0] - x[0]) - x[2];
                out[0] = self.v * x[2].cos();
                out[1] = self.v * x[2].sin();
                out[2] = 2.0 * self.v * alpha.sin() / self.l;
            }
            DynamicsId::Linear3D => {
                let tz = t.get(2).copied().unwrap_or(0.0);
                out[0] = LINEAR_RATES[0] * (x[0] - t[0]);
                out[1] = LINEAR_RATES[1] * (x[1] - t[1]);
                out[2] = LINEAR_RATES[2] * (x[2] - tz);
            }
        }
    }

    pub fn f(&self, x: &[f64], p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim()];
        self.eval(x, p, &mut out);
        out
    }

    fn rk4_step(&self, x: &mut [f64], p: &[f64], h: f64, k: &mut [[f64; 3]; 4], tmp: &mut [f64; 3]) {
        self.eval(x, p, &mut k[0]);
        for i in 0..3 {
            tmp[i] = x[i] + 0.5 * h * k[0][i];
        }
        self.eval(tmp, p, &mut k[1]);
        for i in 0..3 {
            tmp[i] = x[i] + 0.5 * h * k[1][i];
        }
        self.eval(tmp, p, &mut k[2]);
        for i in 0..3 {
            tmp[i] = x[i] + h * k[2][i];
        }
        self.eval(tmp, p, &mut k[3]);
        for i in 0..3 {
            x[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
    }

    /// Integrate from `x0` for `t` seconds, calling `visit(time, state)` on
    /// every state including the first. The last step is shortened when `t`
    /// is not a multiple of `dt`.
    pub(crate) fn integrate(
        &self,
        x0: &[f64],
        p: &[f64],
        t: f64,
        dt: f64,
        mut visit: impl FnMut(f64, &[f64]),
    ) -> Result<()> {
        assert!(dt > 0.0 && t >= 0.0, "integration step and horizon");
        let mut x = [0.0; 3];
        x.copy_from_slice(&x0[..3]);
        let mut k = [[0.0; 3]; 4];
        let mut tmp = [0.0; 3];
        visit(0.0, &x);
        let full = (t / dt + 1e-9).floor() as usize;
        for s in 1..=full {
            self.rk4_step(&mut x, p, dt, &mut k, &mut tmp);
            let time = s as f64 * dt;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalBlowup { t: time });
            }
            visit(time, &x);
        }
        let rest = t - full as f64 * dt;
        if rest > 1e-9 * dt {
            self.rk4_step(&mut x, p, rest, &mut k, &mut tmp);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalBlowup { t });
            }
            visit(t, &x);
        }
        Ok(())
    }

    pub fn simulate(&self, x0: &[f64], p: &[f64], t: f64, dt: f64) -> Result<Trajectory> {
        if x0.len() != self.state_dim() {
            return Err(Error::DimMismatch {
                expected: self.state_dim(),
                got: x0.len(),
            });
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        self.integrate(x0, p, t, dt, |time, x| {
            times.push(time);
            states.push(x.to_vec());
        })?;
        Ok(Trajectory {
            t0: 0.0,
            dt,
            times,
            states,
            mode: p.to_vec(),
        })
    }
}

/// `f(x, p)` with default constants.
pub fn eval_f(id: DynamicsId, x: &[f64], p: &[f64]) -> Vec<f64> {
    Dynamics::new(id).f(x, p)
}

/// RK4 trajectory with default constants.
pub fn simulate(id: DynamicsId, x0: &[f64], p: &[f64], t: f64, dt: f64) -> Result<Trajectory> {
    Dynamics::new(id).simulate(x0, p, t, dt)
}

/// Sampled solution of the ODE in one mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub mode: Vec<f64>,
}

impl Trajectory {
    pub fn fstate(&self) -> &[f64] {
        &self.states[0]
    }

    pub fn lstate(&self) -> &[f64] {
        self.states.last().expect("trajectory has a state")
    }

    pub fn dur(&self) -> f64 {
        *self.times.last().expect("trajectory has a state")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}
