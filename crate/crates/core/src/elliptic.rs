//! Elliptic integrals and the Gauss hypergeometric function.
//!
//! All elliptic integrals use the *parameter* convention: `k` multiplies `s²`
//! inside the integrand,
//!
//! ```text
//! ℱ(φ|k) = ∫₀^{sin φ} ds / √((1 − s²)(1 − k s²))
//! ℰ(φ|k) = ∫₀^{sin φ} √(1 − k s²) / √(1 − s²) ds
//! 𝒟(k)   = ∫₀¹ s² ds / √((1 − s²)(1 − k s²)) = (𝒦(k) − ℰ(k)) / k
//! ```
//!
//! and `𝒦(k) = ℱ(π/2|k)`, `ℰ(k) = ℰ(π/2|k)`. Negative `k` is allowed.

use std::f64::consts::{FRAC_PI_2, PI};

use libm::lgamma as ln_gamma;

use crate::error::{KerrError, Result};
use crate::quadrature::tanh_sinh;

const CARLSON_TOL: f64 = 1e-16;

/// Carlson's symmetric integral `R_F(x, y, z)`; at most one argument may be zero.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z < 0.0 || (x == 0.0) as u8 + (y == 0.0) as u8 + (z == 0.0) as u8 > 1 {
        return Err(KerrError::Domain(format!("R_F({x}, {y}, {z})")));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + z) / 3.0;
    let mut q = (3.0 * CARLSON_TOL).powf(-1.0 / 6.0)
        * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let mut a = a0;
    let mut scale = 1.0;
    let (x0, y0) = (x, y);
    while q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        a = 0.25 * (a + lam);
        q *= 0.25;
        scale *= 0.25;
    }
    let xx = (a0 - x0) * scale / a;
    let yy = (a0 - y0) * scale / a;
    let zz = -(xx + yy);
    let e2 = xx * yy - zz * zz;
    let e3 = xx * yy * zz;
    Ok((1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt())
}

/// Carlson's degenerate integral `R_D(x, y, z)`; needs `z > 0` and `x + y > 0`.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z <= 0.0 || x + y == 0.0 {
        return Err(KerrError::Domain(format!("R_D({x}, {y}, {z})")));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + 3.0 * z) / 5.0;
    let mut q = (0.25 * CARLSON_TOL).powf(-1.0 / 6.0)
        * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let mut a = a0;
    let mut scale = 1.0;
    let mut sum = 0.0;
    let (x0, y0) = (x, y);
    while q >= a.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        sum += scale / (sz * (z + lam));
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        a = 0.25 * (a + lam);
        q *= 0.25;
        scale *= 0.25;
    }
    let xx = (a0 - x0) * scale / a;
    let yy = (a0 - y0) * scale / a;
    let zz = -(xx + yy) / 3.0;
    let xy = xx * yy;
    let z2 = zz * zz;
    let e2 = xy - 6.0 * z2;
    let e3 = (3.0 * xy - 8.0 * z2) * zz;
    let e4 = 3.0 * (xy - z2) * z2;
    let e5 = xy * z2 * zz;
    let series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0
        - 3.0 * e4 / 22.0
        - 9.0 * e2 * e3 / 52.0
        + 3.0 * e5 / 26.0;
    Ok(scale * series / (a * a.sqrt()) + 3.0 * sum)
}

/// `𝒦(k)` for `k < 1`.
pub fn comp_k(k: f64) -> Result<f64> {
    if !(k < 1.0) {
        return Err(KerrError::Domain(format!("K(k) needs k < 1, got {k}")));
    }
    carlson_rf(0.0, 1.0 - k, 1.0)
}

/// `ℰ(k)` for `k ≤ 1`.
pub fn comp_e(k: f64) -> Result<f64> {
    if k == 1.0 {
        return Ok(1.0);
    }
    if !(k < 1.0) {
        return Err(KerrError::Domain(format!("E(k) needs k <= 1, got {k}")));
    }
    let y = 1.0 - k;
    Ok(carlson_rf(0.0, y, 1.0)? - k / 3.0 * carlson_rd(0.0, y, 1.0)?)
}

/// `𝒟(k) = (𝒦 − ℰ)/k`, evaluated as `R_D(0, 1−k, 1)/3`, which is smooth through `k = 0`.
pub fn comp_d(k: f64) -> Result<f64> {
    if !(k < 1.0) {
        return Err(KerrError::Domain(format!("D(k) needs k < 1, got {k}")));
    }
    Ok(carlson_rd(0.0, 1.0 - k, 1.0)? / 3.0)
}

/// `𝒦(k)` by the arithmetic-geometric mean, `π / (2 AGM(1, √(1−k)))`.
pub fn comp_k_agm(k: f64) -> Result<f64> {
    if !(k < 1.0) {
        return Err(KerrError::Domain(format!("K(k) needs k < 1, got {k}")));
    }
    let (mut x, mut y) = (1.0f64, (1.0 - k).sqrt());
    for _ in 0..64 {
        if (x - y).abs() <= 2.0 * f64::EPSILON * x {
            break;
        }
        let g = (x * y).sqrt();
        x = 0.5 * (x + y);
        y = g;
    }
    Ok(PI / (x + y))
}

fn check_incomplete(phi: f64, k: f64) -> Result<(f64, f64)> {
    if !(phi.abs() <= FRAC_PI_2 * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(KerrError::Domain(format!(
            "amplitude {phi} outside [-pi/2, pi/2]"
        )));
    }
    let (s, c) = phi.sin_cos();
    let y = 1.0 - k * s * s;
    if !(y > 0.0) {
        return Err(KerrError::Domain(format!(
            "k sin^2(phi) >= 1 (k = {k}, phi = {phi})"
        )));
    }
    Ok((s, c * c))
}

/// `ℱ(φ|k)` for `|φ| ≤ π/2`, `k sin²φ < 1`.
pub fn incomp_f(phi: f64, k: f64) -> Result<f64> {
    let (s, c2) = check_incomplete(phi, k)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(s * carlson_rf(c2, 1.0 - k * s * s, 1.0)?)
}

/// `ℰ(φ|k)` for `|φ| ≤ π/2`, `k sin²φ < 1`.
pub fn incomp_e(phi: f64, k: f64) -> Result<f64> {
    let (s, c2) = check_incomplete(phi, k)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let y = 1.0 - k * s * s;
    Ok(s * carlson_rf(c2, y, 1.0)? - k / 3.0 * s * s * s * carlson_rd(c2, y, 1.0)?)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma <= 0.0 && gamma == gamma.round() {
        return Err(KerrError::Domain(format!(
            "gamma = {gamma} is a non-positive integer"
        )));
    }
    Ok(())
}

/// Power series `Σ (α)ₙ(β)ₙ / ((γ)ₙ n!) xⁿ` for `|x| < 1`.
pub fn hyp2f1_series(alpha: f64, beta: f64, gamma: f64, x: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(x.abs() < 1.0) {
        return Err(KerrError::Domain(format!(
            "2F1 series needs |x| < 1, got {x}"
        )));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut quiet = 0;
    for n in 0..200_000 {
        let nf = n as f64;
        term *= (alpha + nf) * (beta + nf) / ((gamma + nf) * (nf + 1.0)) * x;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= 1e-17 * sum.abs() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(KerrError::Domain(format!(
        "2F1 series did not converge at x = {x}"
    )))
}

/// Euler's integral
/// `Γ(γ)/(Γ(β)Γ(γ−β)) ∫₀¹ t^{β−1}(1−t)^{γ−β−1}(1−xt)^{−α} dt`, valid for
/// `x < 1` and `γ > β > 0`.
pub fn hyp2f1_euler(alpha: f64, beta: f64, gamma: f64, x: f64) -> Result<f64> {
    if !(gamma > beta && beta > 0.0) {
        return Err(KerrError::Domain(format!(
            "Euler integral needs gamma > beta > 0 (beta = {beta}, gamma = {gamma})"
        )));
    }
    if !(x < 1.0) {
        return Err(KerrError::Domain(format!(
            "Euler integral needs x < 1, got {x}"
        )));
    }
    let lognorm = ln_gamma(gamma) - ln_gamma(beta) - ln_gamma(gamma - beta);
    let integrand = |t: f64, da: f64, db: f64| {
        // 1 − xt written to keep precision near t = 1 when x → 1
        let base = if x > 0.0 {
            db * x + (1.0 - x)
        } else {
            1.0 - x * t
        };
        ((beta - 1.0) * da.ln() + (gamma - beta - 1.0) * db.ln() - alpha * base.ln() + lognorm)
            .exp()
    };
    Ok(tanh_sinh(integrand, 0.0, 1.0, 1e-15).value)
}

/// `₂F₁(α, β; γ; x)` for real `x < 1`.
///
/// The series is summed directly for `−½ ≤ x < 1`. Below that, Pfaff's
/// transformation `F(α,β;γ;x) = (1−x)^{−α} F(α, γ−β; γ; x/(x−1))` maps the
/// argument into `(⅓, 1)`; if the mapped argument is close to 1 the Euler
/// integral is used instead when its parameter condition holds.
pub fn hyp2f1(alpha: f64, beta: f64, gamma: f64, x: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if !(x < 1.0) {
        return Err(KerrError::Domain(format!("2F1 needs x < 1, got {x}")));
    }
    if x >= -0.5 {
        return hyp2f1_series(alpha, beta, gamma, x);
    }
    let z = x / (x - 1.0);
    if z > 0.9 {
        if gamma > beta && beta > 0.0 {
            return hyp2f1_euler(alpha, beta, gamma, x);
        }
        if gamma > alpha && alpha > 0.0 {
            return hyp2f1_euler(beta, alpha, gamma, x);
        }
    }
    Ok((1.0 - x).powf(-alpha) * hyp2f1_series(alpha, gamma - beta, gamma, z)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::tanh_sinh;

    fn k_quad(k: f64) -> f64 {
        tanh_sinh(
            |s, _da, db| 1.0 / (db * (1.0 + s) * (1.0 - k * s * s)).sqrt(),
            0.0,
            1.0,
            1e-15,
        )
        .value
    }

    fn e_quad(k: f64) -> f64 {
        tanh_sinh(
            |s, _da, db| ((1.0 - k * s * s) / (db * (1.0 + s))).sqrt(),
            0.0,
            1.0,
            1e-15,
        )
        .value
    }

    fn d_quad(k: f64) -> f64 {
        tanh_sinh(
            |s, _da, db| s * s / (db * (1.0 + s) * (1.0 - k * s * s)).sqrt(),
            0.0,
            1.0,
            1e-15,
        )
        .value
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn complete_special_values() {
        assert!(rel(comp_k(0.0).unwrap(), FRAC_PI_2) < 1e-15);
        assert!(rel(comp_e(0.0).unwrap(), FRAC_PI_2) < 1e-15);
        assert_eq!(comp_e(1.0).unwrap(), 1.0);
        assert!(rel(comp_d(0.0).unwrap(), PI / 4.0) < 1e-15);
        assert!(comp_k(1.0).is_err() && comp_e(1.5).is_err());
        // K(1/2) = Γ(1/4)² / (4√π)
        let g = 3.625_609_908_221_908_3_f64;
        assert!(rel(comp_k(0.5).unwrap(), g * g / (4.0 * PI.sqrt())) < 1e-14);
    }

    #[test]
    fn complete_integrals_match_quadrature() {
        for &k in &[-1e4, -50.0, -10.0, -1.0, -0.3, 1e-6, 0.3, 0.9, 0.999] {
            assert!(rel(comp_k(k).unwrap(), k_quad(k)) < 1e-11, "K({k})");
            assert!(rel(comp_e(k).unwrap(), e_quad(k)) < 1e-11, "E({k})");
            assert!(rel(comp_d(k).unwrap(), d_quad(k)) < 1e-10, "D({k})");
            assert!(
                rel(comp_k(k).unwrap(), comp_k_agm(k).unwrap()) < 1e-13,
                "AGM({k})"
            );
        }
    }

    #[test]
    fn d_matches_quotient_away_from_zero() {
        for &k in &[-10.0, -2.0, -0.1, 0.2, 0.9] {
            let q = (comp_k(k).unwrap() - comp_e(k).unwrap()) / k;
            assert!(rel(comp_d(k).unwrap(), q) < 1e-12);
        }
    }

    #[test]
    fn incomplete_integrals() {
        assert_eq!(incomp_f(0.0, 0.4).unwrap(), 0.0);
        for &k in &[-5.0, -1.0, 0.0, 0.7] {
            assert!(rel(incomp_f(FRAC_PI_2, k).unwrap(), comp_k(k).unwrap()) < 1e-14);
            assert!(rel(incomp_e(FRAC_PI_2, k).unwrap(), comp_e(k).unwrap()) < 1e-14);
        }
        for &(phi, k) in &[
            (std::f64::consts::FRAC_PI_4, -1.0),
            (0.3, 2.0),
            (1.2, 0.8),
            (-0.7, -3.0),
        ] {
            let sphi: f64 = phi.sin();
            let sgn = sphi.signum();
            let hi = sphi.abs();
            let fq = tanh_sinh(
                |s, _, _| 1.0 / ((1.0 - s * s) * (1.0 - k * s * s)).sqrt(),
                0.0,
                hi,
                1e-15,
            );
            let eq = tanh_sinh(
                |s, _, _| ((1.0 - k * s * s) / (1.0 - s * s)).sqrt(),
                0.0,
                hi,
                1e-15,
            );
            assert!(
                rel(incomp_f(phi, k).unwrap(), sgn * fq.value) < 1e-11,
                "F({phi}|{k})"
            );
            assert!(
                rel(incomp_e(phi, k).unwrap(), sgn * eq.value) < 1e-11,
                "E({phi}|{k})"
            );
        }
        assert!(incomp_f(0.5, 10.0).is_err());
        assert!(incomp_f(2.0, 0.1).is_err());
    }

    #[test]
    fn hypergeometric_gives_k() {
        for &x in &[-5.0, -1.0, 0.0, 0.5, -0.4, 0.9, -49.0] {
            let f = FRAC_PI_2 * hyp2f1(0.5, 0.5, 1.0, x).unwrap();
            assert!(rel(f, comp_k(x).unwrap()) < 1e-12, "x = {x}: {f}");
        }
        assert_eq!(hyp2f1(2.0, 3.0, 4.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn euler_and_series_agree() {
        for &(a, b, c, x) in &[
            (0.5, 0.5, 1.0, 0.3),
            (1.2, 0.7, 2.1, -0.8),
            (-0.5, 1.5, 3.0, 0.6),
        ] {
            let s = if x >= -0.5 {
                hyp2f1_series(a, b, c, x).unwrap()
            } else {
                (1.0 - x).powf(-a) * hyp2f1_series(a, c - b, c, x / (x - 1.0)).unwrap()
            };
            let e = hyp2f1_euler(a, b, c, x).unwrap();
            assert!(rel(s, e) < 1e-12, "{a} {b} {c} {x}: {s} vs {e}");
        }
        assert!(hyp2f1_euler(1.0, 2.0, 1.5, 0.1).is_err());
        assert!(hyp2f1(1.0, 1.0, -2.0, 0.1).is_err());
    }

    #[test]
    fn closed_forms() {
        // F(1,1;2;x) = −ln(1−x)/x
        for &x in &[-0.9, -0.2, 0.4, 0.8] {
            let f = hyp2f1(1.0, 1.0, 2.0, x).unwrap();
            assert!(rel(f, -(1.0f64 - x).ln() / x) < 1e-13);
        }
        // F(a,b;b;x) = (1−x)^{−a}
        assert!(rel(hyp2f1(0.3, 1.7, 1.7, -3.0).unwrap(), 4f64.powf(-0.3)) < 1e-13);
    }
}
