//! Radial quartic `R(r)`, polar potential `Θ(θ)` and its quadratic form in `u = cos²θ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::{MotionConstants, RescaledConstants};
use crate::error::{KerrError, Result};
use crate::kerr::KerrParams;

/// `R(r) = (E²+q)r⁴ − 2Mq r³ + 𝔛 r² + 2MK r − a²Q` with `𝔛 = a²(E²+q) − L² − Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPoly {
    /// `[c4, c3, c2, c1, c0]`, highest degree first.
    pub coeffs: [f64; 5],
}

impl RadialPoly {
    pub fn eval(&self, r: f64) -> f64 {
        horner(&self.coeffs, r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let [c4, c3, c2, c1, _] = self.coeffs;
        ((4.0 * c4 * r + 3.0 * c3) * r + 2.0 * c2) * r + c1
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let [c4, c3, c2, _, _] = self.coeffs;
        (12.0 * c4 * r + 6.0 * c3) * r + 2.0 * c2
    }
}

pub fn radial_poly(consts: &MotionConstants, params: &KerrParams) -> RadialPoly {
    let (a, m) = (params.a(), params.m());
    let MotionConstants {
        e,
        l,
        q,
        k,
        carter_q,
    } = *consts;
    let lead = e * e + q;
    let xi = a * a * lead - l * l - carter_q;
    RadialPoly {
        coeffs: [lead, -2.0 * m * q, xi, 2.0 * m * k, -a * a * carter_q],
    }
}

/// `R(r)` in the factored form `Δ(qr² − K) + ℙ²`.
pub fn radial_potential_factored(consts: &MotionConstants, params: &KerrParams, r: f64) -> f64 {
    let a = params.a();
    let p = (r * r + a * a) * consts.e - consts.l * a;
    params.delta(r) * (consts.q * r * r - consts.k) + p * p
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_abs(coeffs: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    coeffs.iter().fold(0.0, |acc, &c| acc * ax + c.abs())
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    coeffs[..n]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (n - i) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    Simple,
    Higher,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: Multiplicity,
    /// `|R'(root)|` used for the multiplicity decision.
    pub slope: f64,
    /// Set when `slope` is within a factor 10 of the multiplicity tolerance.
    pub ambiguous: bool,
}

/// An open interval between consecutive roots; `None` ends are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignInterval {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub coeffs: Vec<f64>,
    pub roots: Vec<RealRoot>,
    pub sign_intervals: Vec<SignInterval>,
    pub multiplicity_tol: f64,
}

impl RootReport {
    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).collect()
    }
}

pub fn radial_roots(poly: &RadialPoly, tol: f64) -> Result<RootReport> {
    real_roots(&poly.coeffs, tol)
}

/// Distinct real roots of a polynomial given highest degree first.
///
/// Candidates come from the eigenvalues of the companion matrix and are
/// polished by Newton's method. Candidates that fail to converge on `p` are
/// retried as critical points of `p`, which recovers double roots that the
/// eigen solver split into a complex pair. `tol` is the relative residual
/// accepted as zero.
pub fn real_roots(coeffs: &[f64], tol: f64) -> Result<RootReport> {
    let norm = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if norm == 0.0 {
        return Err(KerrError::DegeneratePolynomial);
    }
    let tol = tol.max(f64::EPSILON);
    let first = coeffs
        .iter()
        .position(|c| c.abs() > 1e-15 * norm)
        .unwrap_or(coeffs.len() - 1);
    let p = &coeffs[first..];
    let dp = if p.len() > 1 {
        poly_derivative(p)
    } else {
        vec![0.0]
    };
    let ddp = if dp.len() > 1 {
        poly_derivative(&dp)
    } else {
        vec![0.0]
    };
    let tol_mult = 1e-7 * norm.max(1.0);

    let residual_ok = |x: f64| horner(p, x).abs() <= tol * horner_abs(p, x).max(f64::MIN_POSITIVE);

    let mut found: Vec<f64> = Vec::new();
    for z in companion_eigenvalues(p) {
        if z.im.abs() > 1e-3 * z.norm().max(1.0) {
            continue;
        }
        let x0 = z.re;
        let x = newton(p, &dp, x0);
        if x.is_finite() && residual_ok(x) && (x - x0).abs() <= 1e-2 * x0.abs().max(1.0) {
            found.push(x);
            continue;
        }
        // near-double root: look for a critical point with vanishing value
        let c = newton(&dp, &ddp, x0);
        if c.is_finite() && (c - x0).abs() <= 1e-2 * x0.abs().max(1.0) && residual_ok(c) {
            found.push(c);
        }
    }
    found.sort_by(|a, b| a.total_cmp(b));

    let mut roots: Vec<RealRoot> = Vec::new();
    for x in found {
        if let Some(last) = roots.last() {
            if (x - last.value).abs() <= 1e-6 * x.abs().max(1.0) {
                continue;
            }
        }
        let mut value = x;
        let mut slope = horner(&dp, value).abs();
        if slope <= tol_mult {
            let c = newton(&dp, &ddp, value);
            if c.is_finite() && (c - value).abs() <= 1e-4 * value.abs().max(1.0) && residual_ok(c) {
                value = c;
                slope = horner(&dp, value).abs();
            }
        }
        let multiplicity = if slope > tol_mult {
            Multiplicity::Simple
        } else {
            Multiplicity::Higher
        };
        let ambiguous = slope > tol_mult / 10.0 && slope < tol_mult * 10.0;
        roots.push(RealRoot {
            value,
            multiplicity,
            slope,
            ambiguous,
        });
    }

    let sign_intervals = sign_intervals(p, &roots);
    Ok(RootReport {
        coeffs: coeffs.to_vec(),
        roots,
        sign_intervals,
        multiplicity_tol: tol_mult,
    })
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn sign_intervals(p: &[f64], roots: &[RealRoot]) -> Vec<SignInterval> {
    let mut edges: Vec<Option<f64>> = vec![None];
    edges.extend(roots.iter().map(|r| Some(r.value)));
    edges.push(None);
    edges
        .windows(2)
        .map(|w| {
            let probe = match (w[0], w[1]) {
                (Some(lo), Some(hi)) => 0.5 * (lo + hi),
                (Some(lo), None) => lo + lo.abs().max(1.0),
                (None, Some(hi)) => hi - hi.abs().max(1.0),
                (None, None) => 0.0,
            };
            SignInterval {
                lo: w[0],
                hi: w[1],
                sign: sign_of(horner(p, probe)),
            }
        })
        .collect()
}

fn companion_eigenvalues(p: &[f64]) -> Vec<nalgebra::Complex<f64>> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![nalgebra::Complex::new(-p[1] / p[0], 0.0)];
    }
    let mut c = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        c[(0, j)] = -p[j + 1] / p[0];
    }
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    c.complex_eigenvalues().iter().copied().collect()
}

fn newton(p: &[f64], dp: &[f64], x0: f64) -> f64 {
    let mut x = x0;
    for _ in 0..100 {
        let f = horner(p, x);
        let d = horner(dp, x);
        if d == 0.0 {
            break;
        }
        let step = f / d;
        let next = x - step;
        if !next.is_finite() {
            return f64::NAN;
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

/// Roots `(u₋, u₊)` of `Θ̃(u) = −a²u² + wu + 𝒬` with the diagnostics `w`, `dis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct URoots {
    pub u_minus: f64,
    pub u_plus: f64,
    pub w: f64,
    pub dis: f64,
}

/// Polar potential `Θ(θ) = Q + cos²θ [a²(E² + q) − L²/sin²θ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPotential {
    pub consts: MotionConstants,
    pub a: f64,
}

impl PolarPotential {
    pub fn new(consts: &MotionConstants, params: &KerrParams) -> Self {
        Self {
            consts: *consts,
            a: params.a(),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let MotionConstants {
            e, l, q, carter_q, ..
        } = self.consts;
        let a2 = self.a * self.a;
        let (s, c) = theta.sin_cos();
        if l.abs() < 1e-13 * (self.a * e).abs() {
            carter_q + a2 * (e * e + q) * c * c
        } else {
            carter_q + c * c * (a2 * (e * e + q) - l * l / (s * s))
        }
    }

    /// `w = a² − Φ² − 𝒬`.
    pub fn w(&self) -> Result<f64> {
        let rc = RescaledConstants::try_from(self.consts)?;
        Ok(self.a * self.a - rc.phi * rc.phi - rc.qcal)
    }

    /// `Θ̃(u) = Θ/E²` for null constants, in terms of `u = cos²θ`.
    pub fn theta_tilde(&self, u: f64) -> Result<f64> {
        let rc = RescaledConstants::try_from(self.consts)?;
        let w = self.a * self.a - rc.phi * rc.phi - rc.qcal;
        Ok(-self.a * self.a * u * u + w * u + rc.qcal)
    }
}

pub fn theta_potential_eval(pp: &PolarPotential, theta: f64) -> f64 {
    pp.eval(theta)
}

/// Roots of `Θ̃`. Fails with `NoOscillation` when `dis < 0`, or when `𝒬 < 0`
/// and both roots are non-positive.
pub fn u_quadratic_roots(pp: &PolarPotential) -> Result<URoots> {
    let rc = RescaledConstants::try_from(pp.consts)?;
    let a2 = pp.a * pp.a;
    let w = a2 - rc.phi * rc.phi - rc.qcal;
    let mut dis = w * w + 4.0 * a2 * rc.qcal;
    if dis < 0.0 && dis >= -1e-12 * (w * w + 4.0 * a2 * rc.qcal.abs()) {
        dis = 0.0;
    }
    if dis < 0.0 {
        return Err(KerrError::NoOscillation { dis });
    }
    if rc.qcal < 0.0 && w <= 0.0 {
        return Err(KerrError::NoOscillation { dis });
    }
    let sq = dis.sqrt();
    let big = 0.5 * (w + w.signum() * sq);
    let (x1, x2) = if big == 0.0 {
        (0.0, 0.0)
    } else {
        (big / a2, -rc.qcal / big)
    };
    let (u_minus, u_plus) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    Ok(URoots {
        u_minus,
        u_plus,
        w,
        dis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, m: f64) -> KerrParams {
        KerrParams::new(a, m).unwrap()
    }

    #[test]
    fn radial_special_forms() {
        let p = params(3.0, 6.0);
        let c = MotionConstants::null(&p, 0.0, 2.0, 4.0);
        let rp = radial_poly(&c, &p);
        assert_eq!(rp.coeffs, [0.0, 0.0, -8.0, 96.0, -36.0]);
        let c = MotionConstants::null(&p, 1.5, 0.0, -(3.0 * 1.5f64).powi(2));
        assert!(c.k.abs() < 1e-15);
        let rp = radial_poly(&c, &p);
        for r in [-3.0, 0.5, 7.0] {
            let expect = 1.5f64.powi(2) * (r * r + 9.0f64).powi(2);
            assert!((rp.eval(r) - expect).abs() < 1e-10 * expect);
        }
        let c = MotionConstants::null(&p, 2.0, 6.0, 0.0);
        assert_eq!(radial_poly(&c, &p).coeffs, [4.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn factored_form_matches() {
        let p = params(0.7, 1.0);
        let c = MotionConstants::new(&p, 1.1, -0.4, 2.3, -0.2);
        let rp = radial_poly(&c, &p);
        for r in [-4.0, -0.3, 0.0, 1.2, 9.0] {
            let f = radial_potential_factored(&c, &p, r);
            assert!((rp.eval(r) - f).abs() < 1e-11 * (1.0 + f.abs()));
        }
    }

    #[test]
    fn zero_energy_roots() {
        let p = params(3.0, 6.0);
        let c = MotionConstants::null(&p, 0.0, 2.0, 4.0);
        let rep = radial_roots(&radial_poly(&c, &p), 1e-12).unwrap();
        let d = (36.0f64 - 9.0 * 4.0 / 8.0).sqrt();
        let v = rep.values();
        assert_eq!(v.len(), 2);
        assert!((v[0] - (6.0 - d)).abs() < 1e-10 && (v[1] - (6.0 + d)).abs() < 1e-10);
        assert!(rep
            .roots
            .iter()
            .all(|r| r.multiplicity == Multiplicity::Simple));
        let signs: Vec<i8> = rep.sign_intervals.iter().map(|s| s.sign).collect();
        assert_eq!(signs, vec![-1, 1, -1]);

        let c = MotionConstants::null(&p, 0.0, 0.0, 4.0);
        let v = radial_roots(&radial_poly(&c, &p), 1e-12).unwrap().values();
        assert!((v[0] - p.r_minus()).abs() < 1e-13 && (v[1] - p.r_plus()).abs() < 1e-12);
    }

    #[test]
    fn double_root_is_higher() {
        // (r+1)²(r²+1)
        let rep = real_roots(&[1.0, 2.0, 2.0, 2.0, 1.0], 1e-12).unwrap();
        assert_eq!(rep.roots.len(), 1);
        assert!((rep.roots[0].value + 1.0).abs() < 1e-9);
        assert_eq!(rep.roots[0].multiplicity, Multiplicity::Higher);
        // r⁴ has a quadruple root at 0
        let rep = real_roots(&[4.0, 0.0, 0.0, 0.0, 0.0], 1e-12).unwrap();
        assert_eq!(rep.roots.len(), 1);
        assert_eq!(rep.roots[0].multiplicity, Multiplicity::Higher);
    }

    #[test]
    fn degenerate_and_constant() {
        assert_eq!(
            real_roots(&[0.0; 5], 1e-12),
            Err(KerrError::DegeneratePolynomial)
        );
        let rep = real_roots(&[0.0, 0.0, 0.0, 0.0, 2.0], 1e-12).unwrap();
        assert!(rep.roots.is_empty());
        assert_eq!(rep.sign_intervals.len(), 1);
        assert_eq!(rep.sign_intervals[0].sign, 1);
    }

    #[test]
    fn u_roots_for_negative_carter() {
        let p = params(3.0, 8.0);
        let e = 1.0;
        let (phi, qcal) = (38.0 / 27.0, -913.0 / 729.0);
        let c = MotionConstants::null(&p, e, phi, qcal);
        let pp = PolarPotential::new(&c, &p);
        let u = u_quadratic_roots(&pp).unwrap();
        assert!((u.u_plus - 0.72789).abs() < 1e-4 && (u.u_minus - 0.19118).abs() < 1e-4);
        assert!(pp.theta_tilde(u.u_plus).unwrap().abs() < 1e-12);
        assert!(pp.theta_tilde(u.u_minus).unwrap().abs() < 1e-12);
        // Θ vanishes at θ = arccos √u±
        for uu in [u.u_minus, u.u_plus] {
            assert!(pp.eval(uu.sqrt().acos()).abs() < 1e-12);
        }
    }

    #[test]
    fn u_roots_edge_cases() {
        let p = params(3.0, 8.0);
        // Φ = 0: u₊ = 1 whenever 𝒬 > −a²
        let c = MotionConstants::null(&p, 1.0, 0.0, -2.0);
        let u = u_quadratic_roots(&PolarPotential::new(&c, &p)).unwrap();
        assert!((u.u_plus - 1.0).abs() < 1e-15);
        // dis = 0 at 𝒬 = −(|Φ| − |a|)²
        let phi = 1.0f64;
        let c = MotionConstants::null(&p, 1.0, phi, -(3.0 - phi).powi(2));
        let u = u_quadratic_roots(&PolarPotential::new(&c, &p)).unwrap();
        assert!(u.dis.abs() < 1e-12);
        assert!((u.u_plus - u.u_minus).abs() < 1e-7);
        // no admissible root
        let c = MotionConstants::null(&p, 1.0, 3.5, -1.0);
        assert!(matches!(
            u_quadratic_roots(&PolarPotential::new(&c, &p)),
            Err(KerrError::NoOscillation { .. })
        ));
    }

    #[test]
    fn polar_forms_agree_for_vanishing_l() {
        let p = params(0.5, 1.0);
        let c = MotionConstants::null(&p, 1.0, 1e-15, 0.3);
        let pp = PolarPotential::new(&c, &p);
        let th = 1e-9;
        assert!((pp.eval(th) - (0.3 + 0.25)).abs() < 1e-12);
    }
}
