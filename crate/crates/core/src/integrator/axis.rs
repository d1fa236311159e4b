//! Local chart `(t*, r, x, y)` with `x = sinθ cosφ*`, `y = sinθ sinφ*`, regular on the axis.
//!
//! With `ϖ² = x² + y²`, `ρ² = r² + a²(1 − ϖ²)`, `ω = x dy − y dx` and
//! `C = a²(1 + 2Mr/ρ²)` the Kerr-star line element reads
//!
//! ```text
//! −(1 − 2Mr/ρ²) dt*² + 2 dt* dr − (4Mar/ρ²) dt* ω − 2a dr ω
//!   + ρ² (dx² + dy²) + ρ² (x dx + y dy)² / (1 − ϖ²) + C ω²
//! ```
//!
//! The same expression serves both hemispheres.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::kerr::{Christoffel, KerrParams, Metric};

/// Value together with its gradient in `(r, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct D3 {
    v: f64,
    d: [f64; 3],
}

impl D3 {
    fn cst(v: f64) -> Self {
        Self { v, d: [0.0; 3] }
    }

    fn var(v: f64, i: usize) -> Self {
        let mut d = [0.0; 3];
        d[i] = 1.0;
        Self { v, d }
    }

    fn map(self, f: f64, df: f64) -> Self {
        Self {
            v: f,
            d: [df * self.d[0], df * self.d[1], df * self.d[2]],
        }
    }

    fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.map(inv, -inv * inv)
    }
}

impl Add for D3 {
    type Output = D3;
    fn add(self, o: D3) -> D3 {
        D3 {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1], self.d[2] + o.d[2]],
        }
    }
}

impl Sub for D3 {
    type Output = D3;
    fn sub(self, o: D3) -> D3 {
        self + (-o)
    }
}

impl Neg for D3 {
    type Output = D3;
    fn neg(self) -> D3 {
        D3 {
            v: -self.v,
            d: [-self.d[0], -self.d[1], -self.d[2]],
        }
    }
}

impl Mul for D3 {
    type Output = D3;
    fn mul(self, o: D3) -> D3 {
        D3 {
            v: self.v * o.v,
            d: [
                self.d[0] * o.v + self.v * o.d[0],
                self.d[1] * o.v + self.v * o.d[1],
                self.d[2] * o.v + self.v * o.d[2],
            ],
        }
    }
}

impl Div for D3 {
    type Output = D3;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: D3) -> D3 {
        self * o.recip()
    }
}

impl Mul<D3> for f64 {
    type Output = D3;
    fn mul(self, o: D3) -> D3 {
        D3 {
            v: self * o.v,
            d: [self * o.d[0], self * o.d[1], self * o.d[2]],
        }
    }
}

impl Add<f64> for D3 {
    type Output = D3;
    fn add(self, o: f64) -> D3 {
        D3 {
            v: self.v + o,
            ..self
        }
    }
}

fn components(params: &KerrParams, r: D3, x: D3, y: D3) -> [[D3; 4]; 4] {
    let (a, m) = (params.a(), params.m());
    let w2 = x * x + y * y;
    let one_minus = -1.0 * w2 + 1.0;
    let rho2 = r * r + a * a * one_minus;
    let mr_rho = 2.0 * m * (r / rho2);
    let c = a * a * (mr_rho + 1.0);
    let zero = D3::cst(0.0);
    let g00 = mr_rho + -1.0;
    let g01 = D3::cst(1.0);
    let g02 = a * (mr_rho * y);
    let g03 = -a * (mr_rho * x);
    let g12 = a * y;
    let g13 = -a * x;
    let ratio = rho2 / one_minus;
    let g22 = rho2 + ratio * x * x + c * y * y;
    let g33 = rho2 + ratio * y * y + c * x * x;
    let g23 = ratio * x * y - c * x * y;
    [
        [g00, g01, g02, g03],
        [g01, zero, g12, g13],
        [g02, g12, g22, g23],
        [g03, g13, g23, g33],
    ]
}

fn split(c: [[D3; 4]; 4]) -> (Metric, [Metric; 4]) {
    let mut g = Metric::zeros();
    let mut dg = [Metric::zeros(); 4];
    for i in 0..4 {
        for j in 0..4 {
            g[(i, j)] = c[i][j].v;
            for k in 0..3 {
                dg[k + 1][(i, j)] = c[i][j].d[k];
            }
        }
    }
    (g, dg)
}

/// Metric in the axis chart at `(r, x, y)`.
pub fn metric(params: &KerrParams, r: f64, x: f64, y: f64) -> Metric {
    split(components(params, D3::cst(r), D3::cst(x), D3::cst(y))).0
}

/// Connection coefficients in the axis chart; `None` where the metric is singular.
pub fn christoffel(params: &KerrParams, r: f64, x: f64, y: f64) -> Option<Christoffel> {
    let c = components(params, D3::var(r, 0), D3::var(x, 1), D3::var(y, 2));
    let (g, dg) = split(c);
    let ginv = g.try_inverse()?;
    Some(Christoffel::from_metric_derivatives(&ginv, &dg))
}

/// Hemisphere of an axis chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pole {
    North,
    South,
}

/// `(t, r, θ, φ, ṫ, ṙ, θ̇, φ̇)` to `(t, r, x, y, ṫ, ṙ, ẋ, ẏ)`.
pub fn from_polar(y: &[f64; 8]) -> [f64; 8] {
    let (st, ct) = y[2].sin_cos();
    let (sp, cp) = y[3].sin_cos();
    let (th_dot, ph_dot) = (y[6], y[7]);
    [
        y[0],
        y[1],
        st * cp,
        st * sp,
        y[4],
        y[5],
        ct * cp * th_dot - st * sp * ph_dot,
        ct * sp * th_dot + st * cp * ph_dot,
    ]
}

/// Inverse of [`from_polar`]; `phi_ref` selects the branch of the azimuth.
pub fn to_polar(z: &[f64; 8], pole: Pole, phi_ref: f64) -> [f64; 8] {
    let (x, y) = (z[2], z[3]);
    let (xd, yd) = (z[6], z[7]);
    let w2 = x * x + y * y;
    let w = w2.sqrt();
    let theta = match pole {
        Pole::North => w.min(1.0).asin(),
        Pole::South => std::f64::consts::PI - w.min(1.0).asin(),
    };
    let cos_t = theta.cos();
    let (phi, th_dot, ph_dot) = if w > 0.0 {
        let raw = y.atan2(x);
        let phi = phi_ref + wrap_pi(raw - phi_ref);
        (phi, (x * xd + y * yd) / (w * cos_t), (x * yd - y * xd) / w2)
    } else {
        let speed = (xd * xd + yd * yd).sqrt();
        let sign = if pole == Pole::North { 1.0 } else { -1.0 };
        (phi_ref, sign * speed, 0.0)
    };
    [z[0], z[1], theta, phi, z[4], z[5], th_dot, ph_dot]
}

fn wrap_pi(d: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    d - tau * (d / tau).round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kerr::{metric_star, KerrStarPoint, PH, TH};

    #[test]
    fn metric_is_pullback_of_polar_metric() {
        let p = KerrParams::new(0.7, 1.0).unwrap();
        for &(r, th, ph) in &[(2.0, 0.3, 0.4), (-0.5, 2.8, 2.0), (0.3, 0.08, -1.0)] {
            let gs = metric_star(
                &p,
                &KerrStarPoint {
                    t_star: 0.0,
                    r,
                    theta: th,
                    phi_star: ph,
                },
            )
            .unwrap();
            // J = ∂(θ, φ)/∂(x, y) from the inverse of ∂(x, y)/∂(θ, φ)
            let (st, ct) = f64::sin_cos(th);
            let (sp, cp) = f64::sin_cos(ph);
            let fwd = nalgebra::Matrix2::new(ct * cp, -st * sp, ct * sp, st * cp);
            let inv = fwd.try_inverse().unwrap();
            // rows index polar coordinates (t, r, θ, φ), columns axis coordinates
            let mut jj = Metric::zeros();
            jj[(0, 0)] = 1.0;
            jj[(1, 1)] = 1.0;
            jj[(TH, 2)] = inv[(0, 0)];
            jj[(TH, 3)] = inv[(0, 1)];
            jj[(PH, 2)] = inv[(1, 0)];
            jj[(PH, 3)] = inv[(1, 1)];
            let pulled = jj.transpose() * gs * jj;
            let ga = metric(&p, r, st * cp, st * sp);
            assert!(
                (pulled - ga).abs().max() < 1e-11 * ga.abs().max(),
                "{pulled}\n{ga}"
            );
        }
    }

    #[test]
    fn regular_on_the_axis() {
        let p = KerrParams::new(0.9, 1.0).unwrap();
        let g = metric(&p, 2.0, 0.0, 0.0);
        assert!(g.determinant() < 0.0);
        assert!(christoffel(&p, 2.0, 0.0, 0.0).is_some());
    }

    #[test]
    fn christoffel_matches_finite_differences() {
        let p = KerrParams::new(0.6, 1.0).unwrap();
        let (r, x, y) = (1.7, 0.03, -0.02);
        let h = 1e-6;
        let gam = christoffel(&p, r, x, y).unwrap();
        let mut dg = [Metric::zeros(); 4];
        for (k, slot) in dg.iter_mut().enumerate().skip(1) {
            let mut plus = [r, x, y];
            let mut minus = [r, x, y];
            plus[k - 1] += h;
            minus[k - 1] -= h;
            *slot = (metric(&p, plus[0], plus[1], plus[2])
                - metric(&p, minus[0], minus[1], minus[2]))
                / (2.0 * h);
        }
        let ginv = metric(&p, r, x, y).try_inverse().unwrap();
        let fd = Christoffel::from_metric_derivatives(&ginv, &dg);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    assert!((gam.get(a, b, c) - fd.get(a, b, c)).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn polar_round_trip() {
        let y = [1.0, 2.0, 2.9, 5.0, 1.1, -0.2, 0.3, 0.7];
        let z = from_polar(&y);
        let back = to_polar(&z, Pole::South, 5.0);
        for i in 0..8 {
            assert!(
                (back[i] - y[i]).abs() < 1e-12,
                "{i}: {} vs {}",
                back[i],
                y[i]
            );
        }
    }
}
