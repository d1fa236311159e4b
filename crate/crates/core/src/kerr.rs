//! Kerr spacetime in Boyer-Lindquist and Kerr-star coordinates.
//!
//! Coordinates are indexed `0 = t`, `1 = r`, `2 = theta`, `3 = phi` in both
//! charts. The two charts share the coordinate fields `∂t`, `∂θ`, `∂φ`; only
//! `∂r` differs (`∂*_r = ∂_r − V/Δ`).
//!
//! All quantities are in geometric units (G = c = 1).

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{KerrError, Result};

pub const T: usize = 0;
pub const R: usize = 1;
pub const TH: usize = 2;
pub const PH: usize = 3;

/// Covariant metric components in a coordinate chart.
pub type Metric = Matrix4<f64>;

/// Spin and mass of a slowly rotating Kerr black hole, `0 < |a| < M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrParams {
    a: f64,
    m: f64,
}

impl KerrParams {
    pub fn new(a: f64, m: f64) -> Result<Self> {
        if !(a.is_finite() && m.is_finite()) || m <= 0.0 || a == 0.0 || a.abs() >= m {
            return Err(KerrError::InvalidParams { a, m });
        }
        Ok(Self { a, m })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Same spacetime with lengths measured in units of M.
    pub fn normalized(&self) -> Self {
        Self {
            a: self.a / self.m,
            m: 1.0,
        }
    }

    pub fn delta(&self, r: f64) -> f64 {
        r * r - 2.0 * self.m * r + self.a * self.a
    }

    pub fn rho2(&self, r: f64, theta: f64) -> f64 {
        let c = theta.cos();
        r * r + self.a * self.a * c * c
    }

    pub fn r_minus(&self) -> f64 {
        horizon_radii(self).0
    }

    pub fn r_plus(&self) -> f64 {
        horizon_radii(self).1
    }

    /// Boyer-Lindquist block containing `r`, or `None` on a horizon.
    pub fn block_of(&self, r: f64) -> Option<Block> {
        let (rm, rp) = horizon_radii(self);
        if r > rp {
            Some(Block::I)
        } else if r > rm && r < rp {
            Some(Block::II)
        } else if r < rm {
            Some(Block::III)
        } else {
            None
        }
    }

    fn check_not_singular(&self, r: f64, theta: f64) -> Result<f64> {
        let rho2 = self.rho2(r, theta);
        if rho2 <= 1e-24 * self.m * self.m {
            return Err(KerrError::RingSingularity { r, theta });
        }
        Ok(rho2)
    }
}

/// Roots `(r₋, r₊)` of `Δ(r) = r² − 2Mr + a²`.
pub fn horizon_radii(params: &KerrParams) -> (f64, f64) {
    let (a, m) = (params.a, params.m);
    let s = ((m - a) * (m + a)).sqrt();
    let rp = m + s;
    // r₋ r₊ = a² avoids cancellation when |a| ≪ M.
    (a * a / rp, rp)
}

/// Boyer-Lindquist blocks `I = {r > r₊}`, `II = {r₋ < r < r₊}`, `III = {r < r₋}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    I,
    II,
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    BoyerLindquist,
    KerrStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BLPoint {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrStarPoint {
    pub t_star: f64,
    pub r: f64,
    pub theta: f64,
    pub phi_star: f64,
}

/// Base point of a tangent vector: anything that knows its chart and `(r, θ)`.
pub trait SpacetimePoint {
    fn chart(&self) -> Chart;
    fn r(&self) -> f64;
    fn theta(&self) -> f64;
}

impl SpacetimePoint for BLPoint {
    fn chart(&self) -> Chart {
        Chart::BoyerLindquist
    }
    fn r(&self) -> f64 {
        self.r
    }
    fn theta(&self) -> f64 {
        self.theta
    }
}

impl SpacetimePoint for KerrStarPoint {
    fn chart(&self) -> Chart {
        Chart::KerrStar
    }
    fn r(&self) -> f64 {
        self.r
    }
    fn theta(&self) -> f64 {
        self.theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub components: [f64; 4],
    pub chart: Chart,
}

impl TangentVector {
    pub fn new(components: [f64; 4], chart: Chart) -> Self {
        Self { components, chart }
    }

    pub fn star(components: [f64; 4]) -> Self {
        Self::new(components, Chart::KerrStar)
    }

    pub fn bl(components: [f64; 4]) -> Self {
        Self::new(components, Chart::BoyerLindquist)
    }
}

/// `g(u, v)` for component arrays in the chart of `g`.
pub fn contract(g: &Metric, u: &[f64; 4], v: &[f64; 4]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += g[(i, j)] * u[i] * v[j];
        }
    }
    acc
}

/// Kerr metric in Kerr-star coordinates `(t*, r, θ, φ*)`; regular on the horizons.
pub fn metric_star(params: &KerrParams, p: &KerrStarPoint) -> Result<Metric> {
    let rho2 = params.check_not_singular(p.r, p.theta)?;
    Ok(star_components(params, p.r, p.theta, rho2))
}

fn star_components(params: &KerrParams, r: f64, theta: f64, rho2: f64) -> Metric {
    let (a, m) = (params.a, params.m);
    let s2 = theta.sin().powi(2);
    let mut g = Metric::zeros();
    g[(T, T)] = -(1.0 - 2.0 * m * r / rho2);
    let g_tphi = -2.0 * m * a * r * s2 / rho2;
    g[(T, PH)] = g_tphi;
    g[(PH, T)] = g_tphi;
    g[(PH, PH)] = (r * r + a * a + 2.0 * m * r * a * a * s2 / rho2) * s2;
    g[(T, R)] = 1.0;
    g[(R, T)] = 1.0;
    g[(R, PH)] = -a * s2;
    g[(PH, R)] = -a * s2;
    g[(TH, TH)] = rho2;
    g
}

/// Closed-form inverse of [`metric_star`]. Singular on the axis (`g^{φφ} ∝ 1/sin²θ`).
pub fn inverse_metric_star(params: &KerrParams, p: &KerrStarPoint) -> Result<Metric> {
    let rho2 = params.check_not_singular(p.r, p.theta)?;
    let s2 = p.theta.sin().powi(2);
    if s2 == 0.0 {
        return Err(KerrError::Domain(
            "inverse Kerr-star metric is undefined on the axis".into(),
        ));
    }
    Ok(inverse_star_components(params, p.r, s2, rho2))
}

fn inverse_star_components(params: &KerrParams, r: f64, s2: f64, rho2: f64) -> Metric {
    let a = params.a;
    let mut gi = Metric::zeros();
    gi[(T, T)] = a * a * s2;
    gi[(T, R)] = r * r + a * a;
    gi[(R, T)] = r * r + a * a;
    gi[(T, PH)] = a;
    gi[(PH, T)] = a;
    gi[(R, R)] = params.delta(r);
    gi[(R, PH)] = a;
    gi[(PH, R)] = a;
    gi[(PH, PH)] = 1.0 / s2;
    gi[(TH, TH)] = 1.0;
    gi / rho2
}

/// Partial derivatives `(∂_r g, ∂_θ g)` of the Kerr-star metric components.
pub fn metric_star_partials(params: &KerrParams, p: &KerrStarPoint) -> Result<(Metric, Metric)> {
    let rho2 = params.check_not_singular(p.r, p.theta)?;
    Ok(star_partials(params, p.r, p.theta, rho2))
}

fn star_partials(params: &KerrParams, r: f64, theta: f64, rho2: f64) -> (Metric, Metric) {
    let (a, m) = (params.a, params.m);
    let (s, c) = theta.sin_cos();
    let s2 = s * s;
    let a2 = a * a;
    let inv = 1.0 / rho2;
    let inv2 = inv * inv;
    // ∂_r ρ² = 2r, ∂_θ ρ² = −2a² s c
    let drho_r = rho2 - 2.0 * r * r; // ρ⁴ ∂_r(r/ρ²)

    let mut dr = Metric::zeros();
    dr[(T, T)] = 2.0 * m * drho_r * inv2;
    let dtphi_r = -2.0 * m * a * s2 * drho_r * inv2;
    dr[(T, PH)] = dtphi_r;
    dr[(PH, T)] = dtphi_r;
    dr[(PH, PH)] = 2.0 * r * s2 + 2.0 * m * a2 * s2 * s2 * drho_r * inv2;
    dr[(TH, TH)] = 2.0 * r;

    let mut dth = Metric::zeros();
    dth[(T, T)] = 4.0 * m * a2 * r * s * c * inv2;
    let dtphi_th = -4.0 * m * a * r * s * c * (r * r + a2) * inv2;
    dth[(T, PH)] = dtphi_th;
    dth[(PH, T)] = dtphi_th;
    dth[(PH, PH)] = 2.0 * (r * r + a2) * s * c
        + 2.0 * m * r * a2 * (4.0 * s2 * s * c * rho2 + 2.0 * a2 * s2 * s2 * s * c) * inv2;
    dth[(R, PH)] = -2.0 * a * s * c;
    dth[(PH, R)] = -2.0 * a * s * c;
    dth[(TH, TH)] = -2.0 * a2 * s * c;
    (dr, dth)
}

/// Levi-Civita connection coefficients `Γ^α_{βγ}`, stored as `[α][β][γ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel(pub [[[f64; 4]; 4]; 4]);

impl Christoffel {
    pub fn get(&self, alpha: usize, beta: usize, gamma: usize) -> f64 {
        self.0[alpha][beta][gamma]
    }

    /// Builds Γ from the inverse metric and the coordinate derivatives of `g`
    /// (`dg[k]` is `∂_k g`).
    pub fn from_metric_derivatives(ginv: &Metric, dg: &[Metric; 4]) -> Self {
        // first kind: Γ_{δβγ} = ½(∂_β g_{δγ} + ∂_γ g_{δβ} − ∂_δ g_{βγ})
        let mut first = [[[0.0; 4]; 4]; 4];
        for d in 0..4 {
            for b in 0..4 {
                for c in b..4 {
                    let v = 0.5 * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                    first[d][b][c] = v;
                    first[d][c][b] = v;
                }
            }
        }
        let mut out = [[[0.0; 4]; 4]; 4];
        for al in 0..4 {
            for b in 0..4 {
                for c in b..4 {
                    let mut acc = 0.0;
                    for d in 0..4 {
                        acc += ginv[(al, d)] * first[d][b][c];
                    }
                    out[al][b][c] = acc;
                    out[al][c][b] = acc;
                }
            }
        }
        Christoffel(out)
    }

    /// Geodesic acceleration `−Γ^α_{βγ} v^β v^γ`.
    pub fn acceleration(&self, v: &[f64; 4]) -> [f64; 4] {
        let mut acc = [0.0; 4];
        for (al, out) in acc.iter_mut().enumerate() {
            let mut sum = 0.0;
            for b in 0..4 {
                for c in 0..4 {
                    sum += self.0[al][b][c] * v[b] * v[c];
                }
            }
            *out = -sum;
        }
        acc
    }
}

/// Christoffel symbols of the Kerr-star metric from hand-differentiated partials.
pub fn christoffel_star(params: &KerrParams, p: &KerrStarPoint) -> Result<Christoffel> {
    let rho2 = params.check_not_singular(p.r, p.theta)?;
    let s2 = p.theta.sin().powi(2);
    if s2 == 0.0 {
        return Err(KerrError::Domain(
            "Christoffel symbols in the (θ, φ*) chart are undefined on the axis".into(),
        ));
    }
    let ginv = inverse_star_components(params, p.r, s2, rho2);
    let (dr, dth) = star_partials(params, p.r, p.theta, rho2);
    let dg = [Metric::zeros(), dr, dth, Metric::zeros()];
    Ok(Christoffel::from_metric_derivatives(&ginv, &dg))
}

/// Kerr metric in Boyer-Lindquist coordinates; undefined on the horizons.
pub fn metric_bl(params: &KerrParams, p: &BLPoint) -> Result<Metric> {
    let rho2 = params.check_not_singular(p.r, p.theta)?;
    let delta = params.delta(p.r);
    if delta == 0.0 {
        return Err(KerrError::OnHorizon { r: p.r });
    }
    let (a, m, r) = (params.a, params.m, p.r);
    let s2 = p.theta.sin().powi(2);
    let mut g = Metric::zeros();
    g[(T, T)] = -(1.0 - 2.0 * m * r / rho2);
    let g_tphi = -2.0 * m * a * r * s2 / rho2;
    g[(T, PH)] = g_tphi;
    g[(PH, T)] = g_tphi;
    g[(PH, PH)] = (r * r + a * a + 2.0 * m * r * a * a * s2 / rho2) * s2;
    g[(R, R)] = rho2 / delta;
    g[(TH, TH)] = rho2;
    Ok(g)
}

fn block_reference(params: &KerrParams, block: Block) -> f64 {
    match block {
        Block::I => 2.0 * params.r_plus(),
        Block::II => params.m,
        Block::III => 0.0,
    }
}

/// Antiderivatives of `(r²+a²)/Δ` and `a/Δ` before fixing the block constant.
fn shift_primitives(params: &KerrParams, r: f64) -> (f64, f64) {
    let (rm, rp) = horizon_radii(params);
    let width = rp - rm;
    let m = params.m;
    let lp = (r - rp).abs().ln();
    let lm = (r - rm).abs().ln();
    let t = r + 2.0 * m * rp / width * lp - 2.0 * m * rm / width * lm;
    let a = params.a / width * (lp - lm);
    (t, a)
}

/// `(𝒯(r), 𝒜(r))` with the additive constants fixed so that both vanish at the
/// block's reference radius (`2r₊`, `M`, `0` for blocks I, II, III).
pub fn star_shifts(params: &KerrParams, r: f64, block: Block) -> Result<(f64, f64)> {
    match params.block_of(r) {
        None => return Err(KerrError::OnHorizon { r }),
        Some(b) if b != block => return Err(KerrError::BlockMismatch { r, block }),
        _ => {}
    }
    let (t, a) = shift_primitives(params, r);
    let (t0, a0) = shift_primitives(params, block_reference(params, block));
    Ok((t - t0, a - a0))
}

/// Azimuth reduced to `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub fn bl_to_star(params: &KerrParams, p: &BLPoint, block: Block) -> Result<KerrStarPoint> {
    let (t_shift, phi_shift) = star_shifts(params, p.r, block)?;
    Ok(KerrStarPoint {
        t_star: p.t + t_shift,
        r: p.r,
        theta: p.theta,
        phi_star: wrap_angle(p.phi + phi_shift),
    })
}

/// Inverse of [`bl_to_star`]; the block is read off `r`.
pub fn star_to_bl(params: &KerrParams, p: &KerrStarPoint) -> Result<BLPoint> {
    let block = params
        .block_of(p.r)
        .ok_or(KerrError::OnHorizon { r: p.r })?;
    let (t_shift, phi_shift) = star_shifts(params, p.r, block)?;
    Ok(BLPoint {
        t: p.t_star - t_shift,
        r: p.r,
        theta: p.theta,
        phi: wrap_angle(p.phi_star - phi_shift),
    })
}

/// Jacobian `∂(t*, r, θ, φ*)/∂(t, r, θ, φ)` of the chart transition at radius `r`.
pub fn bl_to_star_jacobian(params: &KerrParams, r: f64) -> Result<Metric> {
    let delta = params.delta(r);
    if delta == 0.0 {
        return Err(KerrError::OnHorizon { r });
    }
    let a = params.a;
    let mut j = Metric::identity();
    j[(T, R)] = (r * r + a * a) / delta;
    j[(PH, R)] = a / delta;
    Ok(j)
}

/// Pushes a BL tangent vector forward to Kerr-star components.
pub fn tangent_bl_to_star(params: &KerrParams, r: f64, v: &TangentVector) -> Result<TangentVector> {
    if v.chart != Chart::BoyerLindquist {
        return Err(KerrError::ChartMismatch);
    }
    let j = bl_to_star_jacobian(params, r)?;
    let c = &v.components;
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|k| j[(i, k)] * c[k]).sum();
    }
    Ok(TangentVector::star(out))
}

/// Canonical fields `V`, `W`, `l`, `n` expressed in one chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFrame {
    pub v: TangentVector,
    pub w: TangentVector,
    pub l: TangentVector,
    pub n: TangentVector,
}

/// `V = (r²+a²)∂t + a∂φ`, `W = ∂φ + a sin²θ ∂t`, and the principal null pair
/// `l = V/Δ + ∂r`, `n = (V − Δ∂r)/(2ρ²)` with BL `∂r`.
///
/// In Kerr-star components `∂_r = ∂*_r + V/Δ`, so `l = ∂*_r + 2V/Δ` and
/// `n = −Δ/(2ρ²) ∂*_r`; only `l` is singular on the horizons.
pub fn canonical_frame<P: SpacetimePoint>(params: &KerrParams, p: &P) -> Result<CanonicalFrame> {
    let (r, theta) = (p.r(), p.theta());
    let rho2 = params.check_not_singular(r, theta)?;
    let a = params.a;
    let delta = params.delta(r);
    if delta == 0.0 {
        return Err(KerrError::OnHorizon { r });
    }
    let s2 = theta.sin().powi(2);
    let vt = r * r + a * a;
    let chart = p.chart();
    let v = TangentVector::new([vt, 0.0, 0.0, a], chart);
    let w = TangentVector::new([a * s2, 0.0, 0.0, 1.0], chart);
    let (l, n) = match chart {
        Chart::BoyerLindquist => (
            [vt / delta, 1.0, 0.0, a / delta],
            [
                vt / (2.0 * rho2),
                -delta / (2.0 * rho2),
                0.0,
                a / (2.0 * rho2),
            ],
        ),
        Chart::KerrStar => (
            [2.0 * vt / delta, 1.0, 0.0, 2.0 * a / delta],
            [0.0, -delta / (2.0 * rho2), 0.0, 0.0],
        ),
    };
    Ok(CanonicalFrame {
        v,
        w,
        l: TangentVector::new(l, chart),
        n: TangentVector::new(n, chart),
    })
}

/// Metric of the chart the point lives in.
pub fn metric_at<P: SpacetimePoint>(params: &KerrParams, p: &P) -> Result<Metric> {
    match p.chart() {
        Chart::KerrStar => metric_star(
            params,
            &KerrStarPoint {
                t_star: 0.0,
                r: p.r(),
                theta: p.theta(),
                phi_star: 0.0,
            },
        ),
        Chart::BoyerLindquist => metric_bl(
            params,
            &BLPoint {
                t: 0.0,
                r: p.r(),
                theta: p.theta(),
                phi: 0.0,
            },
        ),
    }
}

/// `Γ^θ_{φφ}` in closed form, valid where `∂φ` is null.
pub fn gamma_theta_phiphi_null_phi(params: &KerrParams, r: f64, theta: f64) -> f64 {
    let (a, m) = (params.a, params.m);
    let (s, c) = theta.sin_cos();
    let rho2 = params.rho2(r, theta);
    -(s * c / rho2.powi(3)) * 2.0 * m * (r * r + a * a) * a * a * r * s * s
}
