//! Piecewise polynomial fields in the orthonormal Legendre basis, their
//! interface traces, projections and norms.
//!
//! Coefficients are stored row-major: `coeffs[j * (k + 1) + i]` multiplies
//! mode `b_i` on cell `j`. With this basis the mass matrix of cell `j` is
//! `(h_j / 2) I`.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::basis::{gauss_rule, orthonormal_all, QuadratureRule};
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// A smooth function returning `[g, g', g'']` at `x`.
pub trait Smooth: Fn(f64) -> [f64; 3] {}
impl<F: Fn(f64) -> [f64; 3]> Smooth for F {}

#[derive(Debug, Clone, PartialEq)]
pub struct DgField {
    mesh: Arc<Mesh>,
    degree: usize,
    coeffs: Vec<f64>,
}

impl DgField {
    pub fn zeros(mesh: Arc<Mesh>, degree: usize) -> Self {
        let len = mesh.cells() * (degree + 1);
        Self {
            mesh,
            degree,
            coeffs: vec![0.0; len],
        }
    }

    pub fn from_coeffs(mesh: Arc<Mesh>, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mesh.cells() * (degree + 1) {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self {
            mesh,
            degree,
            coeffs,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modes(&self) -> usize {
        self.degree + 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        let m = self.modes();
        &self.coeffs[j * m..(j + 1) * m]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [f64] {
        let m = self.modes();
        &mut self.coeffs[j * m..(j + 1) * m]
    }

    /// True when both fields share mesh and degree.
    pub fn same_space(&self, other: &DgField) -> bool {
        self.degree == other.degree
            && (Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Value and first two physical derivatives on cell `j` at reference
    /// coordinate `xi`.
    pub fn eval_cell(&self, j: usize, xi: f64) -> [f64; 3] {
        let scale = 2.0 / self.mesh.h(j);
        let mut out = [0.0; 3];
        for (i, &c) in self.cell(j).iter().enumerate() {
            let b = orthonormal_all(i, xi);
            out[0] += c * b[0];
            out[1] += c * b[1];
            out[2] += c * b[2];
        }
        out[1] *= scale;
        out[2] *= scale * scale;
        out
    }

    /// Point value; interior nodes resolve to the left limit.
    pub fn evaluate(&self, x: f64) -> f64 {
        let j = self.mesh.locate(x);
        let xi = 2.0 * (x - self.mesh.center(j)) / self.mesh.h(j);
        self.eval_cell(j, xi.clamp(-1.0, 1.0))[0]
    }

    /// One trace per interface. Entry `j` is the node `x_{j-1/2}` on the left
    /// of cell `j`; entry 0 pairs the last cell (minus side) with the first.
    pub fn traces(&self) -> Vec<Trace> {
        let n = self.mesh.cells();
        (0..n)
            .map(|j| {
                let left_cell = if j == 0 { n - 1 } else { j - 1 };
                Trace {
                    minus: self.eval_cell(left_cell, 1.0),
                    plus: self.eval_cell(j, -1.0),
                }
            })
            .collect()
    }

    /// `sum_j (h_j/2) sum_i a_ji b_ji`, the L2 inner product.
    pub fn inner(&self, other: &DgField) -> f64 {
        let m = self.modes();
        self.coeffs
            .chunks(m)
            .zip(other.coeffs.chunks(m))
            .zip(self.mesh.sizes())
            .map(|((a, b), &h)| 0.5 * h * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// `||self - g||` with a `(k+3)`-point Gauss rule per cell.
    pub fn l2_error(&self, g: impl Fn(f64) -> f64) -> f64 {
        let rule = gauss_rule(self.degree + 3).expect("nonzero rule");
        self.l2_error_with(&rule, g)
    }

    pub fn l2_error_with(&self, rule: &QuadratureRule, g: impl Fn(f64) -> f64) -> f64 {
        let mut total = 0.0;
        for j in 0..self.mesh.cells() {
            let h = self.mesh.h(j);
            let xc = self.mesh.center(j);
            total += 0.5
                * h
                * rule.integrate(|xi| {
                    let d = self.eval_cell(j, xi)[0] - g(xc + 0.5 * h * xi);
                    d * d
                });
        }
        total.sqrt()
    }

    /// Writes `x,value` samples at `per_cell` equispaced points of each cell,
    /// endpoints included.
    pub fn samples(&self, per_cell: usize) -> Vec<(f64, f64)> {
        let per_cell = per_cell.max(2);
        let mut out = Vec::with_capacity(self.mesh.cells() * per_cell);
        for j in 0..self.mesh.cells() {
            let h = self.mesh.h(j);
            for s in 0..per_cell {
                let xi = -1.0 + 2.0 * s as f64 / (per_cell - 1) as f64;
                out.push((
                    self.mesh.left(j) + 0.5 * h * (xi + 1.0),
                    self.eval_cell(j, xi)[0],
                ));
            }
        }
        out
    }
}

/// One-sided limits `[p, p_x, p_xx]` at an interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trace {
    pub minus: [f64; 3],
    pub plus: [f64; 3],
}

impl Trace {
    pub fn jump(&self, d: usize) -> f64 {
        self.plus[d] - self.minus[d]
    }

    pub fn mean(&self, d: usize) -> f64 {
        0.5 * (self.plus[d] + self.minus[d])
    }
}

/// Cellwise L2 projection.
pub fn l2_project(g: impl Fn(f64) -> f64, mesh: &Arc<Mesh>, degree: usize) -> DgField {
    let rule = gauss_rule(2 * degree + 4).expect("nonzero rule");
    let mut field = DgField::zeros(mesh.clone(), degree);
    for j in 0..mesh.cells() {
        let h = mesh.h(j);
        let xc = mesh.center(j);
        let values: Vec<f64> = rule.points.iter().map(|&xi| g(xc + 0.5 * h * xi)).collect();
        for (i, c) in field.cell_mut(j).iter_mut().enumerate() {
            *c = rule
                .points
                .iter()
                .zip(&rule.weights)
                .zip(&values)
                .map(|((&xi, &w), &v)| w * v * orthonormal_all(i, xi)[0])
                .sum();
        }
    }
    field
}

/// Side on which a generalized Gauss-Radau projection matches point data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadauSide {
    /// `P^+`: value and two derivatives match at the left end of each cell.
    Plus,
    /// `P^-`: value and two derivatives match at the right end of each cell.
    Minus,
}

/// Generalized Gauss-Radau projection: moments against `P^{k-3}` plus value,
/// first and second derivative at one endpoint of every cell.
pub fn gauss_radau_project(
    side: RadauSide,
    g: impl Smooth,
    mesh: &Arc<Mesh>,
    degree: usize,
) -> Result<DgField> {
    if degree < 2 {
        return Err(Error::DegreeTooLow(degree));
    }
    let m = degree + 1;
    let rule = gauss_rule(2 * degree + 4)?;
    let xi_end = match side {
        RadauSide::Plus => -1.0,
        RadauSide::Minus => 1.0,
    };
    let end_modes: Vec<[f64; 4]> = (0..m).map(|i| orthonormal_all(i, xi_end)).collect();
    let mut field = DgField::zeros(mesh.clone(), degree);
    for j in 0..mesh.cells() {
        let h = mesh.h(j);
        let xc = mesh.center(j);
        let scale = 2.0 / h;
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        for q in 0..m.saturating_sub(3) {
            a[(q, q)] = 1.0;
            rhs[q] = rule.integrate(|xi| g(xc + 0.5 * h * xi)[0] * orthonormal_all(q, xi)[0]);
        }
        let target = g(xc + 0.5 * h * xi_end);
        for d in 0..3 {
            let row = m - 3 + d;
            for i in 0..m {
                a[(row, i)] = end_modes[i][d] * scale.powi(d as i32);
            }
            rhs[row] = target[d];
        }
        let sol = a
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularProjection { cell: j })?;
        field.cell_mut(j).copy_from_slice(sol.as_slice());
    }
    Ok(field)
}

/// Coupled projection pair built locally from one-sided projections:
/// `P1 = (P^+(u+phi) + P^-(u-phi)) / 2`, `P2 = (P^+(u+phi) - P^-(u-phi)) / 2`.
pub fn coupled_project(
    u: impl Smooth,
    phi: impl Smooth,
    mesh: &Arc<Mesh>,
    degree: usize,
) -> Result<(DgField, DgField)> {
    let sum = |x: f64| {
        let (a, b) = (u(x), phi(x));
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    };
    let diff = |x: f64| {
        let (a, b) = (u(x), phi(x));
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    };
    let plus = gauss_radau_project(RadauSide::Plus, sum, mesh, degree)?;
    let minus = gauss_radau_project(RadauSide::Minus, diff, mesh, degree)?;
    let mut p1 = plus.clone();
    let mut p2 = plus;
    for ((a, b), c) in p1
        .coeffs
        .iter_mut()
        .zip(p2.coeffs.iter_mut())
        .zip(&minus.coeffs)
    {
        let s = *a;
        *a = 0.5 * (s + c);
        *b = 0.5 * (s - c);
    }
    Ok((p1, p2))
}

/// The doubled unknown `(u_h, phi_h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub u: DgField,
    pub phi: DgField,
}

impl StatePair {
    pub fn new(u: DgField, phi: DgField) -> Result<Self> {
        if !u.same_space(&phi) {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self { u, phi })
    }

    /// `u` with an identically zero auxiliary field.
    pub fn from_u(u: DgField) -> Self {
        let phi = DgField::zeros(u.mesh.clone(), u.degree);
        Self { u, phi }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.u.mesh
    }

    pub fn degree(&self) -> usize {
        self.u.degree
    }

    /// `||u_h||^2 + ||phi_h||^2`.
    pub fn energy(&self) -> f64 {
        self.u.inner(&self.u) + self.phi.inner(&self.phi)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.phi.is_finite()
    }

    /// CSV rows `x,u,phi` at `per_cell` points of every cell.
    pub fn write_snapshot<W: Write>(&self, out: &mut W, per_cell: usize) -> Result<()> {
        writeln!(out, "x,u,phi")?;
        let u = self.u.samples(per_cell);
        let phi = self.phi.samples(per_cell);
        for ((x, a), (_, b)) in u.into_iter().zip(phi) {
            writeln!(out, "{x:.6e},{a:.6e},{b:.6e}")?;
        }
        Ok(())
    }
}
