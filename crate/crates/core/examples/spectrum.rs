//! Prints the spectral radius of the linearized dispersion operator, scaled
//! by `h_min^3 / eps`, i.e. the CFL number at which `dt * rho` equals one.

use std::sync::Arc;

use kdv_dg::field::{DgField, StatePair};
use kdv_dg::operators::{Discretization, FluxFunction, MethodVariant, ProblemSpec};
use kdv_dg::Mesh;
use nalgebra::DMatrix;

fn main() {
    let problem = ProblemSpec::new(
        "spectrum",
        1.0,
        FluxFunction::zero(),
        Arc::new(|_| 0.0),
        None,
    )
    .unwrap();
    for (label, mesh) in [
        ("uniform N=10", Mesh::uniform(10).unwrap()),
        ("random N=10", Mesh::perturbed(10, 0.1, 11).unwrap()),
        ("random N=20", Mesh::perturbed(20, 0.1, 21).unwrap()),
    ] {
        let mesh = Arc::new(mesh);
        for k in 2..=4 {
            let disc = Discretization::new(mesh.clone(), k).unwrap();
            let n = mesh.cells() * (k + 1);
            for variant in MethodVariant::ALL {
                let dim = if variant.evolves_phi() { 2 * n } else { n };
                let mut a = DMatrix::<f64>::zeros(dim, dim);
                for col in 0..dim {
                    let mut u = vec![0.0; n];
                    let mut phi = vec![0.0; n];
                    if col < n {
                        u[col] = 1.0
                    } else {
                        phi[col - n] = 1.0
                    }
                    let state = StatePair::new(
                        DgField::from_coeffs(mesh.clone(), k, u).unwrap(),
                        DgField::from_coeffs(mesh.clone(), k, phi).unwrap(),
                    )
                    .unwrap();
                    let r = disc.rhs(&state, &problem, variant).unwrap();
                    for row in 0..n {
                        a[(row, col)] = r.u.coeffs()[row];
                        if variant.evolves_phi() {
                            a[(row + n, col)] = r.phi.coeffs()[row];
                        }
                    }
                }
                let eig = a.complex_eigenvalues();
                let rho = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let max_re = eig.iter().map(|z| z.re).fold(f64::MIN, f64::max);
                let scaled = rho * mesh.h_min().powi(3);
                println!(
                    "{label:14} k={k} {variant}: rho*h^3 = {scaled:10.2}  max Re = {max_re:9.2e}  RK3 CFL limit (eps=1) = {:.4}",
                    3f64.sqrt() / scaled
                );
            }
        }
    }
}
