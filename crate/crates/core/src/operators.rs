//! Spatial DG operators for `u_t + f(u)_x + eps u_xxx = 0` with the doubled
//! unknown `(u_h, phi_h)`.
//!
//! All residuals use the cell-major layout of [`DgField`] coefficients:
//! entry `j * (k + 1) + i` is the form evaluated against mode `b_i` of cell `j`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::basis::{gauss_rule, orthonormal_all};
use crate::error::{Error, Result};
use crate::field::{DgField, StatePair};
use crate::mesh::Mesh;

/// Choice of numerical fluxes for the third-derivative term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodVariant {
    /// Coupled fluxes between `u_h` and the auxiliary `phi_h`; conserves `||u_h||^2 + ||phi_h||^2`.
    A,
    /// Alternating fluxes `(u^-, u_x^+, u_xx^+)`; optimal but dissipative.
    U,
    /// `(u^-, {u_x}, u_xx^+)`; conservative, suboptimal on nonuniform meshes.
    C,
}

impl MethodVariant {
    pub const ALL: [MethodVariant; 3] = [MethodVariant::A, MethodVariant::U, MethodVariant::C];

    pub fn evolves_phi(self) -> bool {
        self == MethodVariant::A
    }
}

impl fmt::Display for MethodVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MethodVariant::A => "A",
            MethodVariant::U => "U",
            MethodVariant::C => "C",
        };
        f.write_str(s)
    }
}

impl FromStr for MethodVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(MethodVariant::A),
            "U" | "u" => Ok(MethodVariant::U),
            "C" | "c" => Ok(MethodVariant::C),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// Polynomial convective flux `f(u) = sum_p a_p u^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxFunction {
    coeffs: Vec<f64>,
}

impl FluxFunction {
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::polynomial(vec![])
    }

    /// `f(u) = speed * u`.
    pub fn linear(speed: f64) -> Self {
        Self::polynomial(vec![0.0, speed])
    }

    /// `f(u) = u^2 / 2`.
    pub fn burgers() -> Self {
        Self::polynomial(vec![0.0, 0.0, 0.5])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn f(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * u + a)
    }

    pub fn fprime(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (p, &a)| acc * u + p as f64 * a)
    }

    /// Potential `Psi(u) = int_0^u f`, whose divided difference is the
    /// square-entropy-conserving two-point flux.
    pub fn potential(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (p, &a)| acc * u + a / (p + 1) as f64)
            * u
    }
}

const ENTROPY_FLUX_TAU: f64 = 1e-8;

/// Square-entropy-conserving flux `(Psi(uR) - Psi(uL)) / (uR - uL)`, falling
/// back to `f` at the midpoint when the states nearly coincide.
pub fn entropy_flux(ul: f64, ur: f64, flux: &FluxFunction) -> f64 {
    let du = ur - ul;
    if du.abs() > ENTROPY_FLUX_TAU * 1f64.max(ul.abs()).max(ur.abs()) {
        (flux.potential(ur) - flux.potential(ul)) / du
    } else {
        flux.f(0.5 * (ul + ur))
    }
}

pub type SolutionFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `u_t + f(u)_x + epsilon u_xxx = 0` on the periodic unit interval.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub epsilon: f64,
    pub flux: FluxFunction,
    pub initial: ProfileFn,
    pub exact: Option<SolutionFn>,
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        epsilon: f64,
        flux: FluxFunction,
        initial: ProfileFn,
        exact: Option<SolutionFn>,
    ) -> Result<Self> {
        if epsilon == 0.0 || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dispersion coefficient {epsilon} must be nonzero"
            )));
        }
        Ok(Self {
            name: name.into(),
            epsilon,
            flux,
            initial,
            exact,
        })
    }
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("epsilon", &self.epsilon)
            .field("flux", &self.flux)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

/// Numerical fluxes `[p, p_x, p_xx]` at one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceFlux {
    pub u: [f64; 3],
    pub phi: [f64; 3],
}

/// Precomputed reference-cell tables for one mesh and degree.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: Arc<Mesh>,
    degree: usize,
    /// `b_i^{(d)}(-1)` and `b_i^{(d)}(+1)`, d = 0..2
    left_end: Vec<[f64; 3]>,
    right_end: Vec<[f64; 3]>,
    /// `int b_l b_i''' dxi`, row l, column i
    third: Vec<f64>,
    conv_weights: Vec<f64>,
    conv_values: Vec<f64>,
    conv_slopes: Vec<f64>,
}

impl Discretization {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::DegreeTooLow(degree));
        }
        let m = degree + 1;
        let ends = |xi: f64| -> Vec<[f64; 3]> {
            (0..m)
                .map(|i| {
                    let b = orthonormal_all(i, xi);
                    [b[0], b[1], b[2]]
                })
                .collect()
        };
        // integrand degree <= 2k - 3, so k + 1 points are exact
        let exact = gauss_rule(degree + 1)?;
        let mut third = vec![0.0; m * m];
        for l in 0..m {
            for i in 0..m {
                third[l * m + i] =
                    exact.integrate(|xi| orthonormal_all(l, xi)[0] * orthonormal_all(i, xi)[3]);
            }
        }
        let conv = gauss_rule(degree + 2)?;
        let mut conv_values = Vec::with_capacity(conv.len() * m);
        let mut conv_slopes = Vec::with_capacity(conv.len() * m);
        for &xi in &conv.points {
            for i in 0..m {
                let b = orthonormal_all(i, xi);
                conv_values.push(b[0]);
                conv_slopes.push(b[1]);
            }
        }
        Ok(Self {
            left_end: ends(-1.0),
            right_end: ends(1.0),
            mesh,
            degree,
            third,
            conv_weights: conv.weights,
            conv_values,
            conv_slopes,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn modes(&self) -> usize {
        self.degree + 1
    }

    fn check(&self, state: &StatePair) -> Result<()> {
        let ok = |f: &DgField| {
            f.degree() == self.degree
                && (Arc::ptr_eq(f.mesh(), &self.mesh) || **f.mesh() == *self.mesh)
        };
        if ok(&state.u) && ok(&state.phi) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch)
        }
    }

    fn end_value(&self, coeffs: &[f64], cell: usize, right: bool) -> [f64; 3] {
        let table = if right {
            &self.right_end
        } else {
            &self.left_end
        };
        let s = 2.0 / self.mesh.h(cell);
        let mut out = [0.0; 3];
        for (c, b) in coeffs.iter().zip(table) {
            out[0] += c * b[0];
            out[1] += c * b[1];
            out[2] += c * b[2];
        }
        out[1] *= s;
        out[2] *= s * s;
        out
    }

    /// `(minus, plus)` limits of `[p, p_x, p_xx]` at every interface; entry
    /// `j` is the left node of cell `j`, entry 0 the periodic seam.
    fn traces(&self, field: &DgField) -> Vec<([f64; 3], [f64; 3])> {
        let n = self.mesh.cells();
        let right: Vec<[f64; 3]> = (0..n)
            .map(|j| self.end_value(field.cell(j), j, true))
            .collect();
        (0..n)
            .map(|j| {
                let left_cell = if j == 0 { n - 1 } else { j - 1 };
                (right[left_cell], self.end_value(field.cell(j), j, false))
            })
            .collect()
    }

    pub fn flux_values(
        &self,
        state: &StatePair,
        variant: MethodVariant,
    ) -> Result<Vec<InterfaceFlux>> {
        self.check(state)?;
        let tu = self.traces(&state.u);
        let fluxes = match variant {
            MethodVariant::A => {
                let tp = self.traces(&state.phi);
                tu.iter()
                    .zip(&tp)
                    .map(|((um, up), (pm, pp))| {
                        let mut f = InterfaceFlux {
                            u: [0.0; 3],
                            phi: [0.0; 3],
                        };
                        for d in 0..3 {
                            f.u[d] = 0.5 * (um[d] + up[d]) + 0.5 * (pp[d] - pm[d]);
                            f.phi[d] = 0.5 * (pm[d] + pp[d]) + 0.5 * (up[d] - um[d]);
                        }
                        f
                    })
                    .collect()
            }
            MethodVariant::U => tu
                .iter()
                .map(|(um, up)| InterfaceFlux {
                    u: [um[0], up[1], up[2]],
                    phi: [0.0; 3],
                })
                .collect(),
            MethodVariant::C => tu
                .iter()
                .map(|(um, up)| InterfaceFlux {
                    u: [um[0], 0.5 * (um[1] + up[1]), up[2]],
                    phi: [0.0; 3],
                })
                .collect(),
        };
        Ok(fluxes)
    }

    /// One dispersive form `-eps int p v_xxx + eps [p^ v_xx - p^_x v_x + p^_xx v]`
    /// evaluated for every cell and test mode.
    fn dispersive_form(&self, field: &DgField, fluxes: &[[f64; 3]], epsilon: f64) -> Vec<f64> {
        let n = self.mesh.cells();
        let m = self.modes();
        let mut out = vec![0.0; n * m];
        for j in 0..n {
            let s = 2.0 / self.mesh.h(j);
            let coeffs = field.cell(j);
            let left = fluxes[j];
            let right = fluxes[(j + 1) % n];
            let row = &mut out[j * m..(j + 1) * m];
            for (i, r) in row.iter_mut().enumerate() {
                let volume: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(l, c)| c * self.third[l * m + i])
                    .sum();
                let br = self.right_end[i];
                let bl = self.left_end[i];
                let at_right = right[0] * br[2] * s * s - right[1] * br[1] * s + right[2] * br[0];
                let at_left = left[0] * bl[2] * s * s - left[1] * bl[1] * s + left[2] * bl[0];
                *r = epsilon * (-s * s * volume + at_right - at_left);
            }
        }
        out
    }

    /// `(D_u, D_phi)` for every cell and test mode. `D_phi` is identically
    /// zero for the single-field variants.
    pub fn dispersion_residual(
        &self,
        state: &StatePair,
        variant: MethodVariant,
        epsilon: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let fluxes = self.flux_values(state, variant)?;
        let fu: Vec<[f64; 3]> = fluxes.iter().map(|f| f.u).collect();
        let du = self.dispersive_form(&state.u, &fu, epsilon);
        let dphi = if variant.evolves_phi() {
            let fp: Vec<[f64; 3]> = fluxes.iter().map(|f| f.phi).collect();
            self.dispersive_form(&state.phi, &fp, epsilon)
        } else {
            vec![0.0; du.len()]
        };
        Ok((du, dphi))
    }

    /// `F_u = -int f(u_h) v_x + f^ v^- |_{j+1/2} - f^ v^+ |_{j-1/2}` with the
    /// entropy-conserving interface flux. The auxiliary field has no convection.
    pub fn convection_residual(&self, state: &StatePair, flux: &FluxFunction) -> Result<Vec<f64>> {
        self.check(state)?;
        let n = self.mesh.cells();
        let m = self.modes();
        let mut out = vec![0.0; n * m];
        if flux.is_zero() {
            return Ok(out);
        }
        let interface: Vec<f64> = self
            .traces_values(&state.u)
            .into_iter()
            .map(|(um, up)| entropy_flux(um, up, flux))
            .collect();
        for j in 0..n {
            let coeffs = state.u.cell(j);
            let row = &mut out[j * m..(j + 1) * m];
            for (q, &w) in self.conv_weights.iter().enumerate() {
                let vals = &self.conv_values[q * m..(q + 1) * m];
                let u: f64 = coeffs.iter().zip(vals).map(|(c, b)| c * b).sum();
                let fw = w * flux.f(u);
                let slopes = &self.conv_slopes[q * m..(q + 1) * m];
                for (r, b) in row.iter_mut().zip(slopes) {
                    *r -= fw * b;
                }
            }
            let (fl, fr) = (interface[j], interface[(j + 1) % n]);
            for (i, r) in row.iter_mut().enumerate() {
                *r += fr * self.right_end[i][0] - fl * self.left_end[i][0];
            }
        }
        Ok(out)
    }

    fn traces_values(&self, field: &DgField) -> Vec<(f64, f64)> {
        let n = self.mesh.cells();
        let dot = |c: &[f64], t: &[[f64; 3]]| c.iter().zip(t).map(|(a, b)| a * b[0]).sum::<f64>();
        (0..n)
            .map(|j| {
                let left_cell = if j == 0 { n - 1 } else { j - 1 };
                (
                    dot(field.cell(left_cell), &self.right_end),
                    dot(field.cell(j), &self.left_end),
                )
            })
            .collect()
    }

    /// Method-of-lines time derivative: `u_t = -M^{-1}(F_u + D_u)` and
    /// `phi_t = M^{-1} D_phi` with the diagonal mass matrix `(h_j / 2) I`.
    pub fn rhs(
        &self,
        state: &StatePair,
        problem: &ProblemSpec,
        variant: MethodVariant,
    ) -> Result<StatePair> {
        let (du, dphi) = self.dispersion_residual(state, variant, problem.epsilon)?;
        let conv = self.convection_residual(state, &problem.flux)?;
        let m = self.modes();
        let mut u_t = du;
        let mut phi_t = dphi;
        for (j, &h) in self.mesh.sizes().iter().enumerate() {
            let inv = 2.0 / h;
            for i in j * m..(j + 1) * m {
                u_t[i] = -(u_t[i] + conv[i]) * inv;
                phi_t[i] *= inv;
            }
        }
        Ok(StatePair {
            u: DgField::from_coeffs(self.mesh.clone(), self.degree, u_t)?,
            phi: DgField::from_coeffs(self.mesh.clone(), self.degree, phi_t)?,
        })
    }
}

/// `sum_j R_j(b_i) c_ji`, the form evaluated with the field itself as test function.
pub fn pair_with(residual: &[f64], field: &DgField) -> f64 {
    residual
        .iter()
        .zip(field.coeffs())
        .map(|(r, c)| r * c)
        .sum()
}
