//! The four benchmark problems and a finite-difference check that their
//! exact solutions satisfy the PDE.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operators::{FluxFunction, ProblemSpec};
use crate::special::{elliptic_k, jacobi_cn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleId {
    /// `u_t + u_xxx / (4 pi^2) = 0`, `u = sin(2 pi (x + t))`.
    Ex41,
    /// `u_t - u_x + u_xxx / (4 pi^2) = 0`, `u = sin(2 pi (x + 2t))`.
    Ex42,
    /// `u_t + (u^2/2)_x + u_xxx / 576 = 0`, cnoidal wave.
    Ex43,
    /// Ex43 over a long horizon.
    Ex44,
}

impl ExampleId {
    pub const ALL: [ExampleId; 4] = [
        ExampleId::Ex41,
        ExampleId::Ex42,
        ExampleId::Ex43,
        ExampleId::Ex44,
    ];

    /// Final time used for long evolutions when none is given.
    pub fn default_horizon(self) -> f64 {
        match self {
            ExampleId::Ex44 => 5.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExampleId::Ex41 => "4.1",
            ExampleId::Ex42 => "4.2",
            ExampleId::Ex43 => "4.3",
            ExampleId::Ex44 => "4.4",
        };
        f.write_str(s)
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4.1" => Ok(ExampleId::Ex41),
            "4.2" => Ok(ExampleId::Ex42),
            "4.3" => Ok(ExampleId::Ex43),
            "4.4" => Ok(ExampleId::Ex44),
            other => Err(Error::InvalidArgument(format!("unknown example {other:?}"))),
        }
    }
}

/// `u(x, t) = a cn^2(4K (x - v t - x0); m)` for `u_t + u u_x + eps u_xxx = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnoidalWave {
    pub m: f64,
    pub k: f64,
    pub amplitude: f64,
    pub speed: f64,
    pub shift: f64,
}

impl CnoidalWave {
    pub fn new(epsilon: f64, m: f64, shift: f64) -> Result<Self> {
        let k = elliptic_k(m)?;
        Ok(Self {
            m,
            k,
            amplitude: 192.0 * m * epsilon * k * k,
            speed: 64.0 * epsilon * (2.0 * m - 1.0) * k * k,
            shift,
        })
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let cn = jacobi_cn(4.0 * self.k * (x - self.speed * t - self.shift), self.m)
            .expect("m validated");
        self.amplitude * cn * cn
    }
}

pub const CNOIDAL_EPSILON: f64 = 1.0 / 576.0;
pub const CNOIDAL_PARAMETER: f64 = 0.9;

pub fn make_problem(id: ExampleId) -> ProblemSpec {
    let eps = 1.0 / (4.0 * PI * PI);
    let sine = |speed: f64| -> (Arc<dyn Fn(f64) -> f64 + Send + Sync>, _) {
        let exact: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> =
            Arc::new(move |x: f64, t: f64| (2.0 * PI * (x + speed * t)).sin());
        (Arc::new(|x: f64| (2.0 * PI * x).sin()), Some(exact))
    };
    let spec = match id {
        ExampleId::Ex41 => {
            let (initial, exact) = sine(1.0);
            ProblemSpec::new("4.1", eps, FluxFunction::zero(), initial, exact)
        }
        ExampleId::Ex42 => {
            let (initial, exact) = sine(2.0);
            ProblemSpec::new("4.2", eps, FluxFunction::linear(-1.0), initial, exact)
        }
        ExampleId::Ex43 | ExampleId::Ex44 => {
            let wave =
                CnoidalWave::new(CNOIDAL_EPSILON, CNOIDAL_PARAMETER, 0.5).expect("valid parameter");
            ProblemSpec::new(
                id.to_string(),
                CNOIDAL_EPSILON,
                FluxFunction::burgers(),
                Arc::new(move |x| wave.value(x, 0.0)),
                Some(Arc::new(move |x, t| wave.value(x, t))),
            )
        }
    };
    spec.expect("registered problems are valid")
}

/// Outcome of [`residual_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualCheck {
    pub max_residual: f64,
    pub max_time_derivative: f64,
}

impl ResidualCheck {
    pub fn relative(&self) -> f64 {
        self.max_residual / self.max_time_derivative.max(f64::MIN_POSITIVE)
    }
}

/// Finite-difference step: balances the O(step^6) truncation of the
/// third-derivative stencil against its O(eps_mach / step^3) roundoff.
pub const RESIDUAL_STEP: f64 = 2e-3;

const FIRST: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const THIRD: [f64; 4] = [-61.0 / 30.0, 169.0 / 120.0, -3.0 / 10.0, 7.0 / 240.0];

fn central(stencil: &[f64; 4], g: impl Fn(f64) -> f64, step: f64) -> f64 {
    stencil
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let o = (i + 1) as f64 * step;
            c * (g(o) - g(-o))
        })
        .sum()
}

/// Max of `|u_t + f(u)_x + eps u_xxx|` over `samples` random `(x, t)` in
/// `[0, 1]^2`, using 9-point central differences.
pub fn residual_check(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<ResidualCheck> {
    let exact = spec.exact.as_ref().ok_or_else(|| {
        Error::InvalidArgument(format!("problem {} has no exact solution", spec.name))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = RESIDUAL_STEP;
    let mut out = ResidualCheck {
        max_residual: 0.0,
        max_time_derivative: 0.0,
    };
    for _ in 0..samples {
        let x: f64 = rng.gen();
        let t: f64 = rng.gen();
        let u_t = central(&FIRST, |d| exact(x, t + d), h) / h;
        let f_x = central(&FIRST, |d| spec.flux.f(exact(x + d, t)), h) / h;
        let u_xxx = central(&THIRD, |d| exact(x + d, t), h) / h.powi(3);
        let r = u_t + f_x + spec.epsilon * u_xxx;
        out.max_residual = out.max_residual.max(r.abs());
        out.max_time_derivative = out.max_time_derivative.max(u_t.abs());
    }
    Ok(out)
}
