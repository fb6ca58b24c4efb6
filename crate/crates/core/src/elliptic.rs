//! Jacobi elliptic functions and the complete integral of the first kind.
//!
//! Everything here uses the modulus `k` (not the parameter `m = k²`), with the
//! standard derivative `d dn/du = -k² sn cn`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const AGM_TOL: f64 = 1e-14;
const AGM_MAX_ITER: usize = 64;

/// Elliptic modulus restricted to `0 <= k <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::Domain(format!("elliptic modulus {k} outside [0, 1]")));
        }
        Ok(Self(k))
    }

    pub fn k(self) -> f64 {
        self.0
    }

    /// Complementary modulus `sqrt(1 - k²)`, computed without cancellation.
    pub fn complementary(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() < AGM_TOL * a.max(1.0) {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind `K(k)`.
pub fn complete_k(k: f64) -> Result<f64> {
    if k == 1.0 {
        return Err(Error::DivergentIntegral);
    }
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("K(k) needs 0 <= k < 1, got {k}")));
    }
    Ok(complete_k_comp(EllipticModulus(k).complementary()))
}

/// `K` as a function of the complementary modulus `k' = sqrt(1 - k²)`. Near
/// `k = 1` this keeps full relative accuracy where `k` itself would round.
pub fn complete_k_comp(kp: f64) -> f64 {
    FRAC_PI_2 / agm(1.0, kp)
}

/// Amplitude `am(u, k)` by the descending Landen transformation.
fn amplitude(u: f64, k: f64, kp: f64) -> f64 {
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = kp;
    while c.last().unwrap().abs() >= AGM_TOL && a.len() <= AGM_MAX_ITER {
        let an = *a.last().unwrap();
        a.push(0.5 * (an + b));
        c.push(0.5 * (an - b));
        b = (an * b).sqrt();
    }
    let n = a.len() - 1;
    if n == 0 {
        return u;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    phi
}

/// Jacobi amplitude `am(u, k)`.
pub fn jacobi_am(u: f64, k: f64) -> Result<f64> {
    check_args(u, k)?;
    if k == 1.0 {
        return Ok(2.0 * u.exp().atan() - FRAC_PI_2);
    }
    Ok(amplitude(u, k, EllipticModulus(k).complementary()))
}

/// `(sn, cn, dn)` at `(u, k)`.
pub fn jacobi_sn_cn_dn(u: f64, k: f64) -> Result<(f64, f64, f64)> {
    check_args(u, k)?;
    if k == 0.0 {
        return Ok((u.sin(), u.cos(), 1.0));
    }
    Ok(sn_cn_dn_comp(u, k, EllipticModulus(k).complementary()))
}

/// `(sn, cn, dn)` with the complementary modulus supplied by the caller.
/// Arguments are not validated.
pub fn sn_cn_dn_comp(u: f64, k: f64, kp: f64) -> (f64, f64, f64) {
    if kp == 0.0 {
        let sech = 1.0 / u.cosh();
        return (u.tanh(), sech, sech);
    }
    let (sn, cn) = amplitude(u, k, kp).sin_cos();
    // 1 - k^2 sn^2 = k'^2 + k^2 cn^2 without cancellation
    let dn = (kp * kp + k * k * cn * cn).sqrt();
    (sn, cn, dn)
}

/// `am(u, k)` with the complementary modulus supplied by the caller.
pub fn am_comp(u: f64, k: f64, kp: f64) -> f64 {
    if kp == 0.0 {
        return 2.0 * u.exp().atan() - FRAC_PI_2;
    }
    amplitude(u, k, kp)
}

/// `dn(u, k)` alone.
pub fn jacobi_dn(u: f64, k: f64) -> Result<f64> {
    Ok(jacobi_sn_cn_dn(u, k)?.2)
}

fn check_args(u: f64, k: f64) -> Result<()> {
    if !u.is_finite() {
        return Err(Error::Domain(format!("argument u = {u} is not finite")));
    }
    EllipticModulus::new(k).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn k_at_zero_is_half_pi() {
        assert_eq!(complete_k(0.0).unwrap(), FRAC_PI_2);
    }

    #[test]
    fn k_is_increasing() {
        let a = complete_k(0.5).unwrap();
        let b = complete_k(0.9).unwrap();
        let c = complete_k(0.99).unwrap();
        assert!(c > b && b > a);
    }

    #[test]
    fn k_domain_errors() {
        assert_eq!(complete_k(1.0), Err(Error::DivergentIntegral));
        assert!(matches!(complete_k(-0.1), Err(Error::Domain(_))));
        assert!(matches!(complete_k(1.5), Err(Error::Domain(_))));
        assert!(jacobi_am(0.3, 1.2).is_err());
        assert!(jacobi_sn_cn_dn(f64::NAN, 0.3).is_err());
    }

    /// Composite Gauss-Legendre quadrature of the defining integral.
    fn k_quadrature(k: f64) -> f64 {
        let nodes = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.0, 0.568_888_888_888_888_9),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let panels = 400;
        let h = FRAC_PI_2 / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in nodes {
                let t = mid + 0.5 * h * x;
                sum += 0.5 * h * w / (1.0 - k * k * t.sin().powi(2)).sqrt();
            }
        }
        sum
    }

    #[test]
    fn k_matches_quadrature() {
        let k = 0.5;
        assert!((complete_k(k).unwrap() - k_quadrature(k)).abs() < 1e-12);
        let k = 0.95;
        assert!((complete_k(k).unwrap() - k_quadrature(k)).abs() < 1e-10);
    }

    #[test]
    fn am_circular_limit() {
        assert_eq!(jacobi_am(1.3, 0.0).unwrap(), 1.3);
    }

    #[test]
    fn am_quarter_period() {
        let kk = complete_k(0.5).unwrap();
        assert!((jacobi_am(kk, 0.5).unwrap() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn am_inverts_incomplete_integral() {
        // F(phi, k) by Simpson, then phi by bisection so that F(phi) = u.
        let f = |phi: f64, k: f64| {
            let n = 2000;
            let h = phi / n as f64;
            let g = |t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt();
            let mut s = g(0.0) + g(phi);
            for i in 1..n {
                s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let (u, k) = (0.7, 0.8);
        let (mut lo, mut hi) = (0.0, PI);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid, k) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((jacobi_am(u, k).unwrap() - 0.5 * (lo + hi)).abs() < 1e-10);
    }

    #[test]
    fn circular_and_hyperbolic_limits() {
        let u = 0.83;
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, 0.0).unwrap();
        assert_eq!((sn, cn, dn), (u.sin(), u.cos(), 1.0));
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, 1.0).unwrap();
        assert!((sn - u.tanh()).abs() < 1e-15);
        assert!((cn - 1.0 / u.cosh()).abs() < 1e-15);
        assert!((dn - 1.0 / u.cosh()).abs() < 1e-15);
        // nearly hyperbolic still agrees closely
        let (sn, _, dn) = jacobi_sn_cn_dn(u, 1.0 - 1e-12).unwrap();
        assert!((sn - u.tanh()).abs() < 1e-9);
        assert!((dn - 1.0 / u.cosh()).abs() < 1e-9);
    }

    #[test]
    fn dn_at_quarter_period_is_complementary_modulus() {
        for kp in [0.5f64, 1e-3, 1e-6] {
            let k = ((1.0 - kp) * (1.0 + kp)).sqrt();
            let (_, _, dn) = sn_cn_dn_comp(complete_k_comp(kp), k, kp);
            assert!((dn - kp).abs() < 1e-9 * kp, "k' = {kp}: dn = {dn}");
        }
    }

    #[test]
    fn am_is_odd() {
        for &k in &[0.1, 0.6, 0.999] {
            let a = jacobi_am(1.7, k).unwrap();
            let b = jacobi_am(-1.7, k).unwrap();
            assert!((a + b).abs() < 1e-13);
        }
    }

    #[test]
    fn complementary_modulus() {
        let m = EllipticModulus::new(0.6).unwrap();
        assert!((m.complementary() - 0.8).abs() < 1e-15);
        assert!(EllipticModulus::new(1.01).is_err());
    }
}
