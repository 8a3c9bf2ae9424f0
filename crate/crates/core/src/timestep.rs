//! Three-stage strong-stability-preserving Runge-Kutta (SSP-RK3).

use crate::error::{Error, Result};
use crate::field::{DgField, StatePair};
use crate::mesh::Mesh;

/// States that support the linear combinations used by the RK stages.
pub trait RkState: Sized {
    /// `a * self + b * x + c * y`
    fn combine(&self, a: f64, x: &Self, b: f64, y: &Self, c: f64) -> Self;

    fn all_finite(&self) -> bool;
}

impl RkState for f64 {
    fn combine(&self, a: f64, x: &Self, b: f64, y: &Self, c: f64) -> Self {
        a * self + b * x + c * y
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl RkState for DgField {
    fn combine(&self, a: f64, x: &Self, b: f64, y: &Self, c: f64) -> Self {
        let mut out = self.clone();
        for ((o, xv), yv) in out.coeffs_mut().iter_mut().zip(x.coeffs()).zip(y.coeffs()) {
            *o = a * *o + b * xv + c * yv;
        }
        out
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl RkState for StatePair {
    fn combine(&self, a: f64, x: &Self, b: f64, y: &Self, c: f64) -> Self {
        StatePair {
            u: self.u.combine(a, &x.u, b, &y.u, c),
            phi: self.phi.combine(a, &x.phi, b, &y.phi, c),
        }
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// One SSP-RK3 step of `y' = L(y)`.
pub fn ssp_rk3_step<S, F>(state: &S, dt: f64, rhs: F) -> Result<S>
where
    S: RkState,
    F: Fn(&S) -> Result<S>,
{
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "time step {dt} must be positive"
        )));
    }
    let l0 = rhs(state)?;
    let s1 = state.combine(1.0, &l0, dt, &l0, 0.0);
    let l1 = rhs(&s1)?;
    let s2 = state.combine(0.75, &s1, 0.25, &l1, 0.25 * dt);
    let l2 = rhs(&s2)?;
    Ok(state.combine(1.0 / 3.0, &s2, 2.0 / 3.0, &l2, 2.0 / 3.0 * dt))
}

/// `cfl * h_min^3`.
pub fn dt_from_cfl(cfl: f64, mesh: &Mesh) -> Result<f64> {
    if cfl.is_nan() || cfl <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "CFL number {cfl} must be positive"
        )));
    }
    Ok(cfl * mesh.h_min().powi(3))
}

/// Default CFL numbers for the dispersive step restriction.
///
/// With `eps = 1/(4 pi^2)` on a uniform mesh the RK3 limit
/// `dt rho <= sqrt(3)` gives roughly 0.18, 0.028 and 0.0069 for k = 2, 3, 4
/// (see `examples/spectrum.rs`); the defaults sit below those.
pub fn default_cfl(degree: usize) -> f64 {
    match degree {
        0..=2 => 0.05,
        3 => 0.02,
        4 => 0.005,
        _ => 0.001,
    }
}

/// Uniform steps of size `dt` to `t_final`, the last one shortened to land on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub cfl: f64,
    pub t_final: f64,
    pub dt: f64,
    pub steps: usize,
}

impl StepControl {
    pub fn new(dt: f64, t_final: f64, cfl: f64) -> Result<Self> {
        if dt.is_nan() || dt <= 0.0 || t_final.is_nan() || t_final < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bad step control dt={dt}, T={t_final}"
            )));
        }
        // tolerate t_final being an integer multiple of dt up to rounding
        let steps = (t_final / dt * (1.0 - 1e-12)).ceil() as usize;
        Ok(Self {
            cfl,
            t_final,
            dt,
            steps,
        })
    }

    pub fn from_cfl(cfl: f64, mesh: &Mesh, t_final: f64) -> Result<Self> {
        Self::new(dt_from_cfl(cfl, mesh)?, t_final, cfl)
    }

    /// Time at the end of step `n` (1-based).
    pub fn time_after(&self, n: usize) -> f64 {
        if n >= self.steps {
            self.t_final
        } else {
            n as f64 * self.dt
        }
    }

    pub fn step_size(&self, n: usize) -> f64 {
        self.time_after(n) - self.time_after(n - 1)
    }
}

/// Integrates to `control.t_final`, calling `observe(step, t, state)` after
/// the initial state (step 0) and after every step.
pub fn integrate<S, F, O>(initial: S, control: &StepControl, rhs: F, mut observe: O) -> Result<S>
where
    S: RkState,
    F: Fn(&S) -> Result<S>,
    O: FnMut(usize, f64, &S),
{
    let mut state = initial;
    observe(0, 0.0, &state);
    for n in 1..=control.steps {
        state = ssp_rk3_step(&state, control.step_size(n), &rhs)?;
        let t = control.time_after(n);
        if !state.all_finite() {
            return Err(Error::NonFinite { step: n, time: t });
        }
        observe(n, t, &state);
    }
    Ok(state)
}
