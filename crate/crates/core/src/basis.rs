//! Legendre polynomials, the orthonormal modal basis and Gauss-Legendre rules
//! on the reference interval `[-1, 1]`.

use crate::error::{Error, Result};

pub const MAX_DERIVATIVE: usize = 3;

/// `d`-th derivative of the Legendre polynomial `P_n` at `xi`.
///
/// Uses the differentiated three-term recurrence
/// `(n+1) P_{n+1}^{(d)} = (2n+1) (xi P_n^{(d)} + d P_n^{(d-1)}) - n P_{n-1}^{(d)}`.
pub fn legendre_eval(degree: usize, deriv: usize, xi: f64) -> Result<f64> {
    if deriv > MAX_DERIVATIVE {
        return Err(Error::InvalidArgument(format!(
            "derivative order {deriv} > 3"
        )));
    }
    Ok(legendre_all(degree, xi)[deriv])
}

/// Values and first three derivatives of `P_degree` at `xi`.
pub fn legendre_all(degree: usize, xi: f64) -> [f64; 4] {
    let mut prev = [0.0; 4];
    let mut cur = [1.0, 0.0, 0.0, 0.0];
    for n in 0..degree {
        let nf = n as f64;
        let mut next = [0.0; 4];
        for d in 0..4 {
            let lower = if d > 0 { d as f64 * cur[d - 1] } else { 0.0 };
            next[d] = ((2.0 * nf + 1.0) * (xi * cur[d] + lower) - nf * prev[d]) / (nf + 1.0);
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Orthonormal Legendre mode `b_i = sqrt((2i+1)/2) P_i`, with
/// `int_{-1}^{1} b_i b_j = delta_ij`.
pub fn orthonormal_eval(i: usize, deriv: usize, xi: f64) -> Result<f64> {
    Ok(legendre_eval(i, deriv, xi)? * normalization(i))
}

pub fn orthonormal_all(i: usize, xi: f64) -> [f64; 4] {
    legendre_all(i, xi).map(|v| v * normalization(i))
}

fn normalization(i: usize) -> f64 {
    ((2 * i + 1) as f64 / 2.0).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]` by Newton iteration on the
/// roots of `P_n`, started from the Chebyshev-like guess `cos(pi (i + 3/4) / (n + 1/2))`.
pub fn gauss_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "quadrature needs at least one point".into(),
        ));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let [p, dp, ..] = legendre_all(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre_all(n, x)[1];
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok(QuadratureRule { points, weights })
}
