//! Constant-radius null orbits with negative Carter constant.
//!
//! For `r` in the window `[R₂(a,M), 0)` the constants
//! `Φ(r) = [r²(r−3M) + a²(M+r)] / [a(M−r)]` and
//! `𝒬(r) = −r³(r³ − 6Mr² + 9M²r − 4a²M) / [a²(M−r)²]` make `r` a double root of
//! the radial quartic with `Q < 0`. The polar angle then oscillates between
//! `θ₁ = arccos √u₊` and `θ₂ = arccos √u₋` (and their mirror images), and the
//! time coordinate advances by `Δt` per full oscillation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::MotionConstants;
use crate::elliptic::{comp_e, comp_k};
use crate::error::{KerrError, Result};
use crate::integrator::{first_order_rhs, GeodesicState};
use crate::kerr::{KerrParams, KerrStarPoint};
use crate::potentials::{u_quadratic_roots, PolarPotential};
use crate::quadrature::gauss_kronrod;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalOrbit {
    pub r: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    #[serde(rename = "Qcal")]
    pub qcal: f64,
    pub w: f64,
    pub dis: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    /// `(θ₁, θ₂, θ₃, θ₄)` with `θ₁ < θ₂ < π/2 < θ₃ < θ₄`.
    pub theta_bounds: [f64; 4],
    #[serde(rename = "B")]
    pub b: f64,
    /// `None` at the window edge where `dis = 0` and θ is constant.
    pub delta_t: Option<f64>,
}

impl SphericalOrbit {
    /// Constants of motion of the orbit for energy `e`.
    pub fn constants(&self, params: &KerrParams, e: f64) -> MotionConstants {
        MotionConstants::null(params, e, self.phi * e, self.qcal * e * e)
    }
}

/// State on the orbit at mid-oscillation with `θ` increasing, `t* = φ* = 0` and `E = 1`.
pub fn initial_state(params: &KerrParams, orbit: &SphericalOrbit) -> Result<GeodesicState> {
    let consts = orbit.constants(params, 1.0);
    let theta = 0.5 * (orbit.theta_bounds[0] + orbit.theta_bounds[1]);
    let mut v = first_order_rhs(params, &consts, orbit.r, theta, 1.0, 1.0)?;
    // R vanishes to second order here; its roundoff would enter ṙ through √R
    v[1] = 0.0;
    Ok(GeodesicState::new(
        KerrStarPoint {
            t_star: 0.0,
            r: orbit.r,
            theta,
            phi_star: 0.0,
        },
        v,
        0.0,
    ))
}

/// `[R₂(a,M), 0)` and the roots of `k(r) = 2r³ − 3Mr² + a²M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExistenceWindow {
    pub r_lower: f64,
    pub r_upper: f64,
    /// `[2, −3M, 0, a²M]`, highest degree first.
    pub k_poly: [f64; 4],
    /// `(R₀, R₁, R₂)` with `R₂ < 0 < R₁ < R₀`.
    pub all_roots: [f64; 3],
}

impl ExistenceWindow {
    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_lower && r < self.r_upper
    }

    pub fn k(&self, r: f64) -> f64 {
        crate::potentials::horner(&self.k_poly, r)
    }
}

fn check_pole(params: &KerrParams, r: f64) -> Result<()> {
    if (r - params.m()).abs() <= 1e-14 * params.m() {
        return Err(KerrError::Pole { r });
    }
    Ok(())
}

/// `(Φ(r), 𝒬(r))` of the constant-radius null orbits with `Q < 0`.
pub fn spherical_constants(params: &KerrParams, r: f64) -> Result<(f64, f64)> {
    check_pole(params, r)?;
    let (a, m) = (params.a(), params.m());
    let d = m - r;
    let phi = (r * r * (r - 3.0 * m) + a * a * (m + r)) / (a * d);
    let qcal = -r.powi(3) * (r.powi(3) - 6.0 * m * r * r + 9.0 * m * m * r - 4.0 * a * a * m)
        / (a * a * d * d);
    Ok((phi, qcal))
}

/// The other solution of `R(r) = R'(r) = 0`, `Φ = (r²+a²)/a`, `𝒬 = −r⁴/a²`.
pub fn rejected_constants(params: &KerrParams, r: f64) -> (f64, f64) {
    let a = params.a();
    ((r * r + a * a) / a, -r.powi(4) / (a * a))
}

pub fn existence_window(params: &KerrParams) -> ExistenceWindow {
    let (a, m) = (params.a(), params.m());
    let base = (1.0 - 2.0 * a * a / (m * m)).clamp(-1.0, 1.0).acos() / 3.0;
    let root = |j: f64| m * (base - 2.0 * j * PI / 3.0).cos() + 0.5 * m;
    let all_roots = [root(0.0), root(1.0), root(2.0)];
    ExistenceWindow {
        r_lower: all_roots[2],
        r_upper: 0.0,
        k_poly: [2.0, -3.0 * m, 0.0, a * a * m],
        all_roots,
    }
}

/// `B(r) = r²(3M + r)/(r − M)`, the value of the general form at `Φ = Φ(r)`.
pub fn b_factor(params: &KerrParams, r: f64) -> Result<f64> {
    check_pole(params, r)?;
    let m = params.m();
    Ok(r * r * (3.0 * m + r) / (r - m))
}

/// `B = [r²Δ + 2Mr(r² + a² − aΦ)] / Δ` for an arbitrary `Φ`.
pub fn b_factor_general(params: &KerrParams, r: f64, phi: f64) -> Result<f64> {
    let delta = params.delta(r);
    if delta == 0.0 {
        return Err(KerrError::Pole { r });
    }
    let (a, m) = (params.a(), params.m());
    Ok((r * r * delta + 2.0 * m * r * (r * r + a * a - a * phi)) / delta)
}

/// Builds the orbit at radius `r`; fails if `Θ` admits no oscillation there.
pub fn spherical_orbit(params: &KerrParams, r: f64) -> Result<SphericalOrbit> {
    let (phi, qcal) = spherical_constants(params, r)?;
    build_orbit(params, r, phi, qcal, b_factor(params, r)?)
}

/// Orbit data for rescaled constants `(Φ, 𝒬)` held at radius `r`, with `B`
/// from the general form. The caller is responsible for `r` being a double
/// root of the radial quartic.
pub fn orbit_from_constants(
    params: &KerrParams,
    r: f64,
    phi: f64,
    qcal: f64,
) -> Result<SphericalOrbit> {
    build_orbit(params, r, phi, qcal, b_factor_general(params, r, phi)?)
}

fn build_orbit(params: &KerrParams, r: f64, phi: f64, qcal: f64, b: f64) -> Result<SphericalOrbit> {
    let consts = MotionConstants::null(params, 1.0, phi, qcal);
    let roots = u_quadratic_roots(&PolarPotential::new(&consts, params))?;
    if !(roots.u_minus > 0.0 && roots.u_plus <= 1.0) {
        return Err(KerrError::NoOscillation { dis: roots.dis });
    }
    let t1 = roots.u_plus.sqrt().acos();
    let t2 = roots.u_minus.sqrt().acos();
    let mut orbit = SphericalOrbit {
        r,
        phi,
        qcal,
        w: roots.w,
        dis: roots.dis,
        u_minus: roots.u_minus,
        u_plus: roots.u_plus,
        theta_bounds: [t1, t2, PI - t2, PI - t1],
        b,
        delta_t: None,
    };
    if orbit.dis > 0.0 && orbit.u_minus < orbit.u_plus {
        orbit.delta_t = Some(delta_t(params, &orbit)?);
    }
    Ok(orbit)
}

fn check_oscillating(orbit: &SphericalOrbit) -> Result<f64> {
    if !(orbit.dis > 0.0) || orbit.u_minus >= orbit.u_plus {
        return Err(KerrError::ConstantTheta { dis: orbit.dis });
    }
    Ok(1.0 - orbit.u_plus / orbit.u_minus)
}

/// `Δt = 2|a|√u₋ ℰ(x) + (2B/(|a|√u₊)) 𝒦(x/(x−1))`, `x = 1 − u₊/u₋ < 0`.
pub fn delta_t(params: &KerrParams, orbit: &SphericalOrbit) -> Result<f64> {
    let x = check_oscillating(orbit)?;
    let a = params.a().abs();
    Ok(2.0 * a * orbit.u_minus.sqrt() * comp_e(x)?
        + 2.0 * orbit.b / (a * orbit.u_plus.sqrt()) * comp_k(x / (x - 1.0))?)
}

/// Same as [`delta_t`] with `𝒦(x)` evaluated directly instead of after Pfaff's transformation.
pub fn delta_t_untransformed(params: &KerrParams, orbit: &SphericalOrbit) -> Result<f64> {
    let x = check_oscillating(orbit)?;
    let a = params.a().abs();
    let su = orbit.u_minus.sqrt();
    Ok(2.0 * a * su * comp_e(x)? + 2.0 * orbit.b / (a * su) * comp_k(x)?)
}

/// `I₁ = 𝒦(x)/(|a|√u₋)` and `I₂ = √u₋ ℰ(x)/|a|`, so that `Δt = 2B I₁ + 2a² I₂`.
pub fn oscillation_integrals(params: &KerrParams, orbit: &SphericalOrbit) -> Result<(f64, f64)> {
    let x = check_oscillating(orbit)?;
    let a = params.a().abs();
    let su = orbit.u_minus.sqrt();
    Ok((comp_k(x)? / (a * su), su * comp_e(x)? / a))
}

/// `(I₁, I₂)` by quadrature over `u = u₋ + (u₊ − u₋) sin²ψ`, `ψ ∈ [0, π/2]`,
/// where both integrands are smooth.
pub fn oscillation_integrals_quadrature(
    params: &KerrParams,
    orbit: &SphericalOrbit,
    tol: f64,
) -> Result<(f64, f64)> {
    check_oscillating(orbit)?;
    let a = params.a().abs();
    let (um, du) = (orbit.u_minus, orbit.u_plus - orbit.u_minus);
    let u = move |psi: f64| um + du * psi.sin().powi(2);
    let half_pi = 0.5 * PI;
    let i1 = gauss_kronrod(|psi| 1.0 / u(psi).sqrt(), 0.0, half_pi, tol * 1e-3, tol).value / a;
    let i2 = gauss_kronrod(|psi| u(psi).sqrt(), 0.0, half_pi, tol * 1e-3, tol).value / a;
    Ok((i1, i2))
}

/// `Δt = 2∫_{θ₁}^{θ₂} (B + a² cos²θ)/√Θ dθ` by quadrature.
///
/// With `u = cos²θ` and `u = u₋ + (u₊ − u₋) sin²ψ` the integral becomes
/// `(2/|a|) ∫₀^{π/2} (B + a²u)/√u dψ`, with a smooth integrand.
pub fn delta_t_quadrature(params: &KerrParams, orbit: &SphericalOrbit) -> Result<f64> {
    delta_t_quadrature_tol(params, orbit, 1e-14)
}

pub fn delta_t_quadrature_tol(
    params: &KerrParams,
    orbit: &SphericalOrbit,
    tol: f64,
) -> Result<f64> {
    check_oscillating(orbit)?;
    let a = params.a().abs();
    let (um, du, b) = (orbit.u_minus, orbit.u_plus - orbit.u_minus, orbit.b);
    let f = |psi: f64| {
        let u = um + du * psi.sin().powi(2);
        (b + a * a * u) / u.sqrt()
    };
    let scale = b.abs() / um.sqrt() + a * a;
    let q = gauss_kronrod(f, 0.0, 0.5 * PI, 1e-12f64.min(tol * scale), tol);
    Ok(2.0 * q.value / a)
}

/// `n` Chebyshev nodes on `[R₂ + ε, −ε]` with `ε = 1e−6·M`, in increasing order.
pub fn chebyshev_radii(params: &KerrParams, n: usize) -> Vec<f64> {
    let w = existence_window(params);
    let eps = 1e-6 * params.m();
    let (lo, hi) = (w.r_lower + eps, w.r_upper - eps);
    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            let c = ((2 * i + 1) as f64 * PI / (2 * n) as f64).cos();
            0.5 * (lo + hi) + 0.5 * (hi - lo) * c
        })
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    #[serde(rename = "Qcal")]
    pub qcal: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub theta2_deg: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub delta_t_elliptic: f64,
    pub delta_t_quadrature: f64,
}

/// Evaluates the orbit family on the Chebyshev grid; rows follow the grid order.
pub fn scan(params: &KerrParams, n: usize, quad_tol: f64) -> Result<Vec<ScanRow>> {
    chebyshev_radii(params, n)
        .par_iter()
        .map(|&r| {
            let orbit = spherical_orbit(params, r)?;
            Ok(ScanRow {
                r,
                phi: orbit.phi,
                qcal: orbit.qcal,
                u_minus: orbit.u_minus,
                u_plus: orbit.u_plus,
                theta2_deg: orbit.theta_bounds[1].to_degrees(),
                b: orbit.b,
                delta_t_elliptic: delta_t(params, &orbit)?,
                delta_t_quadrature: delta_t_quadrature_tol(params, &orbit, quad_tol)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{radial_poly, radial_roots, Multiplicity};
    use crate::quadrature::tanh_sinh;

    fn params(a: f64, m: f64) -> KerrParams {
        KerrParams::new(a, m).unwrap()
    }

    #[test]
    fn orbit_at_minus_one_constants() {
        let p = params(3.0, 8.0);
        let (phi, qcal) = spherical_constants(&p, -1.0).unwrap();
        assert!((phi - 38.0 / 27.0).abs() < 1e-14);
        assert!((qcal + 913.0 / 729.0).abs() < 1e-14);
        assert!((phi - 1.407).abs() < 5e-4 && (qcal + 1.252).abs() < 5e-4);
        assert!(matches!(
            spherical_constants(&p, 8.0),
            Err(KerrError::Pole { .. })
        ));
    }

    #[test]
    fn double_root_certificate() {
        let p = params(3.0, 8.0);
        for &r in &[-1.0, -0.3, -2.0] {
            let (phi, qcal) = spherical_constants(&p, r).unwrap();
            let c = MotionConstants::null(&p, 1.0, phi, qcal);
            let rp = radial_poly(&c, &p);
            let s = 1.0 + qcal.abs() + phi * phi;
            assert!(
                rp.eval(r).abs() < 1e-12 * s * 10.0,
                "R({r}) = {}",
                rp.eval(r)
            );
            assert!(rp.derivative(r).abs() < 1e-12 * s * 10.0);
        }
        let (phi, qcal) = spherical_constants(&p, -1.0).unwrap();
        let rep = radial_roots(
            &radial_poly(&MotionConstants::null(&p, 1.0, phi, qcal), &p),
            1e-12,
        )
        .unwrap();
        assert_eq!(rep.roots.len(), 1);
        assert!((rep.roots[0].value + 1.0).abs() < 1e-8);
        assert_eq!(rep.roots[0].multiplicity, Multiplicity::Higher);
    }

    #[test]
    fn rejected_branch_has_no_oscillation() {
        let p = params(3.0, 8.0);
        let r = -1.0;
        let (phi, qcal) = rejected_constants(&p, r);
        let c = MotionConstants::null(&p, 1.0, phi, qcal);
        let rp = radial_poly(&c, &p);
        assert!(rp.eval(r).abs() < 1e-12 && rp.derivative(r).abs() < 1e-12);
        let pp = PolarPotential::new(&c, &p);
        assert!((pp.w().unwrap() + 2.0 * r * r).abs() < 1e-13);
        assert!(u_quadratic_roots(&pp).is_err());
    }

    #[test]
    fn window_roots() {
        let p = params(3.0, 5.0);
        let w = existence_window(&p);
        assert!(w.k(w.r_lower).abs() < 1e-9);
        assert!((w.r_lower + 1.5746).abs() < 1e-3);
        let [r0, r1, r2] = w.all_roots;
        assert!(r2 < 0.0 && 0.0 < r1 && r1 < r0);
        for r in w.all_roots {
            assert!(w.k(r).abs() < 1e-10 * 125.0);
        }
        let near = params(1.0 - 1e-15, 1.0);
        assert!((existence_window(&near).r_lower + 0.5).abs() < 1e-6);
        for i in 1..100 {
            let r = w.r_lower * i as f64 / 100.0;
            assert!(spherical_constants(&p, r).unwrap().1 < 0.0);
        }
    }

    #[test]
    fn orbit_at_minus_one_polar_bounds() {
        let p = params(3.0, 8.0);
        let o = spherical_orbit(&p, -1.0).unwrap();
        assert!((o.u_plus - 0.72789).abs() < 1e-5);
        assert!((o.u_minus - 0.19118).abs() < 1e-5);
        assert!((o.theta_bounds[0] - 0.5487).abs() < 1e-3);
        let [t1, t2, t3, t4] = o.theta_bounds;
        assert!(t1 < t2 && t2 < PI / 2.0 && PI / 2.0 < t3 && t3 < t4);
        let pp = PolarPotential::new(&o.constants(&p, 1.0), &p);
        for th in o.theta_bounds {
            assert!(pp.eval(th).abs() < 1e-10);
        }
        let prod = (o.qcal + (o.phi.abs() - 3.0).powi(2)) * (o.qcal + (o.phi.abs() + 3.0).powi(2));
        assert!((prod - o.dis).abs() < 1e-12 * (1.0 + o.dis));
    }

    #[test]
    fn b_factor_examples() {
        let p = params(3.0, 8.0);
        assert!((b_factor(&p, -1.0).unwrap() + 23.0 / 9.0).abs() < 1e-14);
        let (phi, _) = spherical_constants(&p, -1.0).unwrap();
        assert!((b_factor_general(&p, -1.0, phi).unwrap() + 23.0 / 9.0).abs() < 1e-13);
        assert_eq!(b_factor(&p, 0.0).unwrap(), 0.0);
        for i in 1..50 {
            let r = -24.0 * i as f64 / 50.0;
            assert!(b_factor(&p, r).unwrap() < 0.0);
        }
    }

    fn delta_t_theta_quadrature(p: &KerrParams, o: &SphericalOrbit, mirrored: bool) -> f64 {
        // Θ = a²(u₊ − u)(u − u₋)/(1 − u) with u₊ − cos²θ = sin(θ+θ₁) sin(θ−θ₁)
        let a2 = p.a() * p.a();
        let [t1, t2, t3, t4] = o.theta_bounds;
        let (lo, hi) = if mirrored { (t3, t4) } else { (t1, t2) };
        let f = |th: f64, da: f64, db: f64| {
            let (up, um) = if mirrored {
                // on [θ₃, θ₄]: u − u₋ grows from θ₃, u₊ − u shrinks to θ₄
                ((th + t4).sin() * db.sin(), (th + t3).sin() * da.sin())
            } else {
                ((th + t1).sin() * da.sin(), (th + t2).sin() * db.sin())
            };
            let c2 = th.cos().powi(2);
            let theta = a2 * up.abs() * um.abs() / (1.0 - c2);
            (o.b + a2 * c2) / theta.sqrt()
        };
        2.0 * tanh_sinh(f, lo, hi, 1e-15).value
    }

    #[test]
    fn delta_t_routes_agree() {
        let p = params(3.0, 8.0);
        let o = spherical_orbit(&p, -1.0).unwrap();
        let dt = o.delta_t.unwrap();
        assert!(dt > 0.0);
        let q = delta_t_quadrature(&p, &o).unwrap();
        assert!(((dt - q) / dt).abs() < 1e-12);
        let direct = delta_t_untransformed(&p, &o).unwrap();
        assert!(((dt - direct) / dt).abs() < 1e-12);
        let th = delta_t_theta_quadrature(&p, &o, false);
        let mirrored = delta_t_theta_quadrature(&p, &o, true);
        assert!(((dt - th) / dt).abs() < 1e-9, "{dt} vs {th}");
        assert!(((mirrored - th) / dt).abs() < 1e-9);
    }

    #[test]
    fn oscillation_integrals_match_quadrature() {
        let p = params(5.0, 7.0);
        for r in chebyshev_radii(&p, 7) {
            let o = spherical_orbit(&p, r).unwrap();
            let (i1, i2) = oscillation_integrals(&p, &o).unwrap();
            let (q1, q2) = oscillation_integrals_quadrature(&p, &o, 1e-14).unwrap();
            assert!(((i1 - q1) / i1).abs() < 1e-9 && ((i2 - q2) / i2).abs() < 1e-9);
            let dt = 2.0 * o.b * i1 + 2.0 * 25.0 * i2;
            assert!(((dt - o.delta_t.unwrap()) / dt).abs() < 1e-12);
        }
    }

    #[test]
    fn window_edge_is_constant_theta() {
        let p = params(3.0, 8.0);
        let w = existence_window(&p);
        let (phi, qcal) = spherical_constants(&p, w.r_lower).unwrap();
        let a2 = 9.0;
        let wq = a2 - phi * phi - qcal;
        let dis = wq * wq + 4.0 * a2 * qcal;
        assert!(dis.abs() < 1e-10 * wq * wq);
        let mut o = spherical_orbit(&p, -1.0).unwrap();
        o.dis = 0.0;
        assert!(matches!(
            delta_t(&p, &o),
            Err(KerrError::ConstantTheta { .. })
        ));
    }

    #[test]
    fn chebyshev_grid_inside_window() {
        let p = params(0.9, 1.0);
        let w = existence_window(&p);
        let radii = chebyshev_radii(&p, 200);
        assert_eq!(radii.len(), 200);
        assert!(radii.windows(2).all(|x| x[0] < x[1]));
        assert!(radii[0] > w.r_lower && *radii.last().unwrap() < 0.0);
    }

    #[test]
    fn scan_is_ordered_and_positive() {
        let p = params(5.0, 7.0);
        let rows = scan(&p, 40, 1e-13).unwrap();
        assert_eq!(rows.len(), 40);
        assert!(rows.windows(2).all(|x| x[0].r < x[1].r));
        assert!(rows.iter().all(|row| row.delta_t_elliptic > 0.0));
    }
}
