//! Constants of motion `E`, `L`, `q`, `K`, `Q` and the auxiliary functions `ℙ(r)`, `𝔻(θ)`.

use serde::{Deserialize, Serialize};

use crate::error::{KerrError, Result};
use crate::kerr::{
    canonical_frame, contract, metric_at, Chart, KerrParams, SpacetimePoint, TangentVector, PH, R,
    T,
};

/// Invariants of a geodesic. `K` and `Q` are tied by `Q = K − (L − aE)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionConstants {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub q: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "Q")]
    pub carter_q: f64,
}

impl MotionConstants {
    /// Constants from `(E, L, Q, q)`, with `K` derived.
    pub fn new(params: &KerrParams, e: f64, l: f64, carter_q: f64, q: f64) -> Self {
        let d = l - params.a() * e;
        Self {
            e,
            l,
            q,
            k: carter_q + d * d,
            carter_q,
        }
    }

    pub fn null(params: &KerrParams, e: f64, l: f64, carter_q: f64) -> Self {
        Self::new(params, e, l, carter_q, 0.0)
    }

    /// Natural size of the constants, `max(|E|, |L|/M, √|K|/M, √|Q|/M)`.
    pub fn scale(&self, params: &KerrParams) -> f64 {
        let m = params.m();
        self.e
            .abs()
            .max(self.l.abs() / m)
            .max(self.k.abs().sqrt() / m)
            .max(self.carter_q.abs().sqrt() / m)
    }

    /// Same constants for the tangent scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            e: c * self.e,
            l: c * self.l,
            q: c * c * self.q,
            k: c * c * self.k,
            carter_q: c * c * self.carter_q,
        }
    }

    pub fn rescaled(&self) -> Result<RescaledConstants> {
        RescaledConstants::try_from(*self)
    }
}

/// `Φ = L/E`, `𝒬 = Q/E²`; only defined for `E ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledConstants {
    #[serde(rename = "Phi")]
    pub phi: f64,
    #[serde(rename = "Qcal")]
    pub qcal: f64,
}

impl TryFrom<MotionConstants> for RescaledConstants {
    type Error = KerrError;

    fn try_from(c: MotionConstants) -> Result<Self> {
        if c.e == 0.0 {
            return Err(KerrError::ZeroEnergy);
        }
        Ok(Self {
            phi: c.l / c.e,
            qcal: c.carter_q / (c.e * c.e),
        })
    }
}

/// `ℙ(r) = (r² + a²)E − La`.
pub fn p_function(consts: &MotionConstants, params: &KerrParams, r: f64) -> f64 {
    let a = params.a();
    (r * r + a * a) * consts.e - consts.l * a
}

/// `𝔻(θ) = L − Ea sin²θ`.
pub fn d_function(consts: &MotionConstants, params: &KerrParams, theta: f64) -> f64 {
    consts.l - consts.e * params.a() * theta.sin().powi(2)
}

/// Reads `E`, `L`, `q`, `K`, `Q` off a tangent vector.
///
/// In Boyer-Lindquist components `K = 2ρ² g(l,v) g(n,v) + r²q`. In Kerr-star
/// components the same quantity is written as
/// `K = −Δ g(∂*_r,v)² + 2ℙ g(∂*_r,v) + r²q`, which has no `1/Δ` and therefore
/// also holds on the horizons.
pub fn constants_from_state<P: SpacetimePoint>(
    params: &KerrParams,
    p: &P,
    v: &TangentVector,
) -> Result<MotionConstants> {
    if v.chart != p.chart() {
        return Err(KerrError::ChartMismatch);
    }
    let g = metric_at(params, p)?;
    let c = &v.components;
    let lower = |i: usize| -> f64 { (0..4).map(|j| g[(i, j)] * c[j]).sum() };
    let e = -lower(T);
    let l = lower(PH);
    let q = contract(&g, c, c);
    let r = p.r();
    let k = match p.chart() {
        Chart::BoyerLindquist => {
            let frame = canonical_frame(params, p)?;
            let rho2 = params.rho2(r, p.theta());
            let gl = contract(&g, &frame.l.components, c);
            let gn = contract(&g, &frame.n.components, c);
            2.0 * rho2 * gl * gn + r * r * q
        }
        Chart::KerrStar => {
            let x = lower(R);
            let pp = (r * r + params.a() * params.a()) * e - l * params.a();
            -params.delta(r) * x * x + 2.0 * pp * x + r * r * q
        }
    };
    let d = l - params.a() * e;
    Ok(MotionConstants {
        e,
        l,
        q,
        k,
        carter_q: k - d * d,
    })
}

/// Carter constant recovered from the polar equation `ρ⁴θ'² = Θ(θ)`.
pub fn carter_q_from_polar_motion(
    params: &KerrParams,
    e: f64,
    l: f64,
    q: f64,
    r: f64,
    theta: f64,
    theta_dot: f64,
) -> f64 {
    let a = params.a();
    let (s, c) = theta.sin_cos();
    let rho2 = params.rho2(r, theta);
    let lhs = rho2 * rho2 * theta_dot * theta_dot;
    lhs - c * c * (a * a * (e * e + q) - l * l / (s * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kerr::{BLPoint, KerrStarPoint, TH};

    fn params() -> KerrParams {
        KerrParams::new(0.8, 1.0).unwrap()
    }

    /// Completes `(v^r, v^θ, v^φ)` to a null vector with `v^t` from the quadratic.
    fn null_star(p: &KerrParams, r: f64, theta: f64, vr: f64, vth: f64, vph: f64) -> [f64; 4] {
        let pt = KerrStarPoint {
            t_star: 0.0,
            r,
            theta,
            phi_star: 0.0,
        };
        let g = crate::kerr::metric_star(p, &pt).unwrap();
        let a = g[(T, T)];
        let b = 2.0 * (g[(T, R)] * vr + g[(T, PH)] * vph);
        let rest = [0.0, vr, vth, vph];
        let c = contract(&g, &rest, &rest);
        let disc = (b * b - 4.0 * a * c).sqrt();
        let vt = if a.abs() < 1e-14 {
            -c / b
        } else {
            (-b - disc) / (2.0 * a)
        };
        [vt, vr, vth, vph]
    }

    #[test]
    fn restphoton_has_vanishing_constants() {
        let p = params();
        let rp = p.r_plus();
        let pt = KerrStarPoint {
            t_star: 0.0,
            r: rp,
            theta: 1.0,
            phi_star: 0.0,
        };
        let v = TangentVector::star([rp * rp + 0.64, 0.0, 0.0, 0.8]);
        let c = constants_from_state(&p, &pt, &v).unwrap();
        for x in [c.e, c.l, c.q, c.k] {
            assert!(x.abs() < 1e-13, "{c:?}");
        }
    }

    #[test]
    fn star_and_bl_constants_agree() {
        let p = params();
        let (r, th) = (3.0, std::f64::consts::FRAC_PI_3);
        let bl = BLPoint {
            t: 0.0,
            r,
            theta: th,
            phi: 0.0,
        };
        let g = crate::kerr::metric_bl(&p, &bl).unwrap();
        // null BL vector: pick spatial parts, solve for v^t
        let (vr, vth, vph) = (0.3, -0.1, 0.05);
        let a = g[(T, T)];
        let b = 2.0 * g[(T, PH)] * vph;
        let c = g[(R, R)] * vr * vr + g[(TH, TH)] * vth * vth + g[(PH, PH)] * vph * vph;
        let vt = (-b - (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        let vbl = TangentVector::bl([vt, vr, vth, vph]);
        let cbl = constants_from_state(&p, &bl, &vbl).unwrap();
        let vs = crate::kerr::tangent_bl_to_star(&p, r, &vbl).unwrap();
        let sp = crate::kerr::bl_to_star(&p, &bl, p.block_of(r).unwrap()).unwrap();
        let cs = constants_from_state(&p, &sp, &vs).unwrap();
        for (x, y) in [
            (cbl.e, cs.e),
            (cbl.l, cs.l),
            (cbl.k, cs.k),
            (cbl.carter_q, cs.carter_q),
        ] {
            assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()), "{cbl:?} {cs:?}");
        }
        assert!(cbl.q.abs() < 1e-13 && cs.q.abs() < 1e-13);
        assert!(cbl.k >= 0.0);
    }

    #[test]
    fn carter_q_two_routes() {
        let p = params();
        let (r, th) = (3.0, std::f64::consts::FRAC_PI_3);
        let v = null_star(&p, r, th, -0.4, 0.07, 0.02);
        let pt = KerrStarPoint {
            t_star: 0.0,
            r,
            theta: th,
            phi_star: 0.0,
        };
        let c = constants_from_state(&p, &pt, &TangentVector::star(v)).unwrap();
        let alt = carter_q_from_polar_motion(&p, c.e, c.l, c.q, r, th, v[TH]);
        assert!(
            (alt - c.carter_q).abs() < 1e-10 * (1.0 + alt.abs()),
            "{alt} {c:?}"
        );
    }

    #[test]
    fn axis_tangent_has_no_angular_momentum() {
        let p = params();
        let pt = KerrStarPoint {
            t_star: 0.0,
            r: 2.5,
            theta: 0.0,
            phi_star: 0.0,
        };
        let v = [1.0, -0.5, 0.0, 0.0];
        let c = constants_from_state(&p, &pt, &TangentVector::star(v)).unwrap();
        assert_eq!(c.l, 0.0);
    }

    #[test]
    fn p_and_d_functions() {
        let p = params();
        let e = 1.3;
        let rp = p.r_plus();
        let l = 2.0 * p.m() * rp * e / p.a();
        let c = MotionConstants::null(&p, e, l, 0.5);
        assert!(p_function(&c, &p, rp).abs() < 1e-13);
        let c = MotionConstants::null(&p, 1.0, 2.0, 0.5);
        assert!(p_function(&c, &p, rp).abs() > 1e-3);
        assert!((d_function(&c, &p, std::f64::consts::FRAC_PI_2) - (2.0 - 0.8)).abs() < 1e-15);
        assert_eq!(d_function(&c, &p, 0.0), 2.0);
    }

    #[test]
    fn rescaled_needs_energy() {
        let p = params();
        let c = MotionConstants::null(&p, 0.0, 1.0, 2.0);
        assert_eq!(c.rescaled(), Err(KerrError::ZeroEnergy));
        let c = MotionConstants::null(&p, 2.0, 1.0, 2.0);
        let rc = c.rescaled().unwrap();
        assert_eq!((rc.phi, rc.qcal), (0.5, 0.5));
    }

    #[test]
    fn chart_tag_must_match() {
        let p = params();
        let pt = KerrStarPoint {
            t_star: 0.0,
            r: 3.0,
            theta: 1.0,
            phi_star: 0.0,
        };
        let v = TangentVector::bl([1.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            constants_from_state(&p, &pt, &v),
            Err(KerrError::ChartMismatch)
        );
    }
}
