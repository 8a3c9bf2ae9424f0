//! Complete elliptic integral of the first kind and Jacobi elliptic functions.
//!
//! `m` is the parameter (the squared modulus), `K(m) = int_0^{pi/2} (1 - m sin^2 t)^{-1/2} dt`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const AGM_TOL: f64 = 1e-16;
const AGM_MAX_ITER: usize = 40;

fn check_parameter(m: f64) -> Result<()> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::InvalidArgument(format!(
            "elliptic parameter m = {m} outside [0, 1)"
        )));
    }
    Ok(())
}

/// `K(m) = pi / (2 AGM(1, sqrt(1 - m)))`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    check_parameter(m)?;
    let mut a = 1.0_f64;
    let mut g = (1.0 - m).sqrt();
    for _ in 0..AGM_MAX_ITER {
        if (a - g).abs() <= AGM_TOL * a {
            break;
        }
        (a, g) = (0.5 * (a + g), (a * g).sqrt());
    }
    Ok(FRAC_PI_2 / a)
}

/// `(sn, cn, dn)` at `(z, m)` by the descending Landen (AGM) scheme.
pub fn jacobi_sn_cn_dn(z: f64, m: f64) -> Result<(f64, f64, f64)> {
    check_parameter(m)?;
    let mut a = vec![1.0_f64];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    while c.last().unwrap().abs() > AGM_TOL * a.last().unwrap() && a.len() <= AGM_MAX_ITER {
        let an = *a.last().unwrap();
        c.push(0.5 * (an - b));
        a.push(0.5 * (an + b));
        b = (an * b).sqrt();
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * z;
    let mut prev = phi;
    for i in (1..=n).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = if n == 0 { 1.0 } else { cn / (prev - phi).cos() };
    Ok((sn, cn, dn))
}

pub fn jacobi_cn(z: f64, m: f64) -> Result<f64> {
    Ok(jacobi_sn_cn_dn(z, m)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Midpoint rule over a full period of the even, pi-periodic integrand;
    /// converges geometrically and shares no code with the AGM path.
    fn k_by_quadrature(m: f64) -> f64 {
        let n = 400;
        let h = PI / n as f64;
        let s: f64 = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                1.0 / (1.0 - m * t.sin().powi(2)).sqrt()
            })
            .sum();
        0.5 * h * s
    }

    #[test]
    fn complete_integral_values() {
        assert!((elliptic_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let k5 = elliptic_k(0.5).unwrap();
        let k9 = elliptic_k(0.9).unwrap();
        assert!((k5 - 1.8540746773).abs() < 1e-10);
        assert!((k9 - 2.5780921133).abs() < 1e-10);
        for m in [0.1, 0.5, 0.9, 0.99] {
            let oracle = k_by_quadrature(m);
            assert!(
                (elliptic_k(m).unwrap() - oracle).abs() < 1e-13 * oracle,
                "m={m}"
            );
        }
    }

    #[test]
    fn complete_integral_rejects_out_of_range() {
        assert!(elliptic_k(1.0).is_err());
        assert!(elliptic_k(-0.1).is_err());
        assert!(jacobi_cn(0.3, 1.0).is_err());
    }

    #[test]
    fn complete_integral_is_increasing() {
        let mut prev = elliptic_k(0.0).unwrap();
        for i in 1..100 {
            let k = elliptic_k(i as f64 / 100.0).unwrap();
            assert!(k > prev);
            prev = k;
        }
    }

    #[test]
    fn cn_special_values() {
        for m in [0.0, 0.3, 0.5, 0.9] {
            assert_eq!(jacobi_cn(0.0, m).unwrap(), 1.0);
            let k = elliptic_k(m).unwrap();
            assert!(jacobi_cn(k, m).unwrap().abs() < 1e-12, "m={m}");
        }
        assert!((jacobi_cn(0.5, 0.0).unwrap() - 0.5f64.cos()).abs() < 1e-15);
        assert!((jacobi_cn(0.5, 0.0).unwrap() - 0.8775825619).abs() < 1e-10);
    }

    #[test]
    fn cn_against_amplitude_quadrature() {
        // cn(F(phi | m)) = cos(phi) with F computed by Gauss quadrature
        let rule = crate::basis::gauss_rule(40).unwrap();
        for m in [0.5, 0.9] {
            for phi in [0.3, 0.9, 1.4] {
                let f = 0.5
                    * phi
                    * rule.integrate(|xi| {
                        let t = 0.5 * phi * (xi + 1.0);
                        1.0 / (1.0 - m * t.sin().powi(2)).sqrt()
                    });
                assert!((jacobi_cn(f, m).unwrap() - phi.cos()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identities() {
        for m in [0.5, 0.9] {
            for i in 0..50 {
                let z = -12.0 + 0.49 * i as f64;
                let (sn, cn, dn) = jacobi_sn_cn_dn(z, m).unwrap();
                assert!((sn * sn + cn * cn - 1.0).abs() < 1e-12);
                assert!((dn * dn + m * sn * sn - 1.0).abs() < 1e-12);
                assert!(cn.abs() <= 1.0);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn cn_period_four_k(z in -8.0f64..8.0, pick in proptest::bool::ANY) {
            let m = if pick { 0.5 } else { 0.9 };
            let k = elliptic_k(m).unwrap();
            let a = jacobi_cn(z, m).unwrap();
            let b = jacobi_cn(z + 4.0 * k, m).unwrap();
            proptest::prop_assert!((a - b).abs() < 1e-11);
        }
    }
}
