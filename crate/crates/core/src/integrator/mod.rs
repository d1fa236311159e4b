//! Null geodesics in Kerr-star coordinates.
//!
//! The second-order geodesic equation `ẍ^α = −Γ^α_{βγ} ẋ^β ẋ^γ` is advanced
//! with the Dormand-Prince 5(4) pair. Near the rotation axis the angular pair
//! `(θ, φ*)` is replaced by `(x, y) = sinθ (cos φ*, sin φ*)`, see [`axis`].
//! Sign changes of `ṙ`, `d cosθ/ds`, `Δ(r)` and the singularity and escape
//! thresholds are located by bisection on re-taken partial steps.

pub mod axis;

use serde::{Deserialize, Serialize};

use crate::constants::{d_function, p_function, MotionConstants};
use crate::error::{KerrError, Result};
use crate::kerr::{
    christoffel_star, metric_star, KerrParams, KerrStarPoint, Metric, TangentVector,
};
use crate::potentials::{radial_poly, PolarPotential};
use axis::Pole;

/// Polar angle below which (or above `π` minus which) the axis chart is used.
const AXIS_ENTER: f64 = 0.05;
/// Polar angle at which the polar chart is resumed.
const AXIS_LEAVE: f64 = 0.1;
const SINGULARITY_RHO: f64 = 1e-6;
const ESCAPE_RADIUS: f64 = 1e3;
const EVENT_RESOLUTION: f64 = 1e-12;
/// `|Δ|/M²` below which a geodesic on the singular branch of `X` is stopped.
const HORIZON_STOP: f64 = 1e-2;
/// Error-control floor for velocity components, relative to the initial speed.
const VELOCITY_FLOOR: f64 = 1e-9;
/// Lower bound on the velocity floor in units of `ε/tol`, keeping the error estimate above roundoff.
const ROUNDOFF_GUARD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    /// `phi_star` is continued through full turns rather than reduced mod 2π.
    pub point: KerrStarPoint,
    pub velocity: TangentVector,
    pub affine_param: f64,
}

impl GeodesicState {
    pub fn new(point: KerrStarPoint, velocity: [f64; 4], affine_param: f64) -> Self {
        Self {
            point,
            velocity: TangentVector::star(velocity),
            affine_param,
        }
    }

    fn to_array(self) -> [f64; 8] {
        let p = self.point;
        let v = self.velocity.components;
        [p.t_star, p.r, p.theta, p.phi_star, v[0], v[1], v[2], v[3]]
    }

    fn from_array(y: &[f64; 8], s: f64) -> Self {
        Self::new(
            KerrStarPoint {
                t_star: y[0],
                r: y[1],
                theta: y[2],
                phi_star: y[3],
            },
            [y[4], y[5], y[6], y[7]],
            s,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TurningR,
    TurningTheta,
    HorizonCross,
    SingularityApproach,
    Escape,
    /// The geodesic leaves the chart through a horizon with `t* → ∞`.
    HorizonApproach,
}

impl EventKind {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            EventKind::SingularityApproach | EventKind::Escape | EventKind::HorizonApproach
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub affine_param: f64,
    pub r: f64,
    pub theta: f64,
    /// Sign of `ṙ` after the event (of `d cosθ/ds` for `turning_theta`).
    pub direction: i8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Horizon>,
}

/// Absolute deviations of `(E, L, q, K)` from their initial values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub q: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl Drift {
    pub fn max(&self) -> f64 {
        self.e.max(self.l).max(self.q).max(self.k)
    }

    /// Drift in the natural units of `c0`: `E/S`, `L/(SM)`, `q/S²`, `K/(SM)²`
    /// with `S` from [`MotionConstants::scale`]. Invariant under rescaling
    /// the tangent and under a change of length unit.
    pub fn relative(&self, c0: &MotionConstants, params: &KerrParams) -> Drift {
        let s = c0.scale(params);
        let sm = s * params.m();
        Drift {
            e: self.e / s,
            l: self.l / sm,
            q: self.q / (s * s),
            k: self.k / (sm * sm),
        }
    }

    fn between(c0: &MotionConstants, c: &MotionConstants) -> Self {
        Self {
            e: (c.e - c0.e).abs(),
            l: (c.l - c0.l).abs(),
            q: (c.q - c0.q).abs(),
            k: (c.k - c0.k).abs(),
        }
    }

    fn merge(&self, o: &Drift) -> Drift {
        Drift {
            e: self.e.max(o.e),
            l: self.l.max(o.l),
            q: self.q.max(o.q),
            k: self.k.max(o.k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    SingularityApproach,
    Escape,
    HorizonApproach,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<GeodesicState>,
    /// Drift at each sample, parallel to `samples`.
    pub sample_drift: Vec<Drift>,
    pub events: Vec<Event>,
    /// Largest drift over the whole trajectory.
    pub drift: Drift,
    pub initial_constants: MotionConstants,
    pub termination: Termination,
}

impl Trajectory {
    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn last(&self) -> &GeodesicState {
        self.samples
            .last()
            .expect("trajectory has at least one sample")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub tol: f64,
    pub s_max: f64,
    /// Initial step; chosen from the velocity when `None`.
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            s_max: 100.0,
            h_init: None,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Frame {
    Polar,
    Axis(Pole),
}

fn rho2_of(params: &KerrParams, frame: Frame, y: &[f64; 8]) -> f64 {
    let a2 = params.a() * params.a();
    match frame {
        Frame::Polar => params.rho2(y[1], y[2]),
        Frame::Axis(_) => y[1] * y[1] + a2 * (1.0 - y[2] * y[2] - y[3] * y[3]),
    }
}

fn in_domain(frame: Frame, y: &[f64; 8]) -> bool {
    if !y.iter().all(|v| v.is_finite()) {
        return false;
    }
    match frame {
        Frame::Polar => y[2] > 0.0 && y[2] < std::f64::consts::PI,
        Frame::Axis(_) => y[2] * y[2] + y[3] * y[3] < 0.25,
    }
}

fn rhs(params: &KerrParams, frame: Frame, y: &[f64; 8]) -> Option<[f64; 8]> {
    if !in_domain(frame, y) {
        return None;
    }
    let gamma = match frame {
        Frame::Polar => christoffel_star(
            params,
            &KerrStarPoint {
                t_star: y[0],
                r: y[1],
                theta: y[2],
                phi_star: y[3],
            },
        )
        .ok()?,
        Frame::Axis(_) => {
            if rho2_of(params, frame, y) <= 0.0 {
                return None;
            }
            axis::christoffel(params, y[1], y[2], y[3])?
        }
    };
    let acc = gamma.acceleration(&[y[4], y[5], y[6], y[7]]);
    let out = [y[4], y[5], y[6], y[7], acc[0], acc[1], acc[2], acc[3]];
    out.iter().all(|v| v.is_finite()).then_some(out)
}

fn frame_metric(params: &KerrParams, frame: Frame, y: &[f64; 8]) -> Option<Metric> {
    match frame {
        Frame::Polar => metric_star(
            params,
            &KerrStarPoint {
                t_star: y[0],
                r: y[1],
                theta: y[2],
                phi_star: y[3],
            },
        )
        .ok(),
        Frame::Axis(_) => Some(axis::metric(params, y[1], y[2], y[3])),
    }
}

/// `(E, L, q, K, Q)` of a state in either chart.
///
/// `K` has two exact forms: the horizon-regular `−Δ X² + 2ℙX + r²q` with
/// `X = g(∂r, v)`, and `(ρ²θ̇)² − cos²θ[a²(E² + q) − L²/sin²θ] + (L − aE)²`
/// from the polar motion. The first cancels badly at large `r`, the second
/// near the axis, so the one with the smaller sum of term magnitudes is used.
fn frame_constants(params: &KerrParams, frame: Frame, y: &[f64; 8]) -> Option<MotionConstants> {
    let c = frame_constants_with_x(params, frame, y)?;
    Some(c.0)
}

fn frame_constants_with_x(
    params: &KerrParams,
    frame: Frame,
    y: &[f64; 8],
) -> Option<(MotionConstants, f64)> {
    let g = frame_metric(params, frame, y)?;
    let v = [y[4], y[5], y[6], y[7]];
    let lower: Vec<f64> = (0..4)
        .map(|i| (0..4).map(|j| g[(i, j)] * v[j]).sum())
        .collect();
    let e = -lower[0];
    let x = lower[1];
    let l = match frame {
        Frame::Polar => lower[3],
        Frame::Axis(_) => -y[3] * lower[2] + y[2] * lower[3],
    };
    let q: f64 = (0..4).map(|i| lower[i] * v[i]).sum();
    let a = params.a();
    let r = y[1];
    let d = l - a * e;
    let pp = (r * r + a * a) * e - l * a;
    let delta = params.delta(r);
    let terms = [-delta * x * x, 2.0 * pp * x, r * r * q];
    let mut k: f64 = terms.iter().sum();
    if let Frame::Polar = frame {
        let size_r: f64 = terms.iter().map(|t| t.abs()).sum();
        let (s, c) = y[2].sin_cos();
        let rho2 = params.rho2(r, y[2]);
        let p_theta = rho2 * y[6];
        let bracket = c * c * (a * a * (e * e + q) - l * l / (s * s));
        let size_p =
            p_theta * p_theta + c * c * (a * a * (e * e + q.abs()) + l * l / (s * s)) + d * d;
        if size_p < size_r {
            k = p_theta * p_theta - bracket + d * d;
        }
    }
    Some((
        MotionConstants {
            e,
            l,
            q,
            k,
            carter_q: k - d * d,
        },
        x,
    ))
}

/// Sum of `|g_ij v^i v^j|`, the scale against which `g(v, v)` is judged.
fn null_scale(g: &Metric, v: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += (g[(i, j)] * v[i] * v[j]).abs();
        }
    }
    s
}

const EV_TURN_R: usize = 0;
const EV_HORIZON: usize = 1;
const EV_TURN_THETA: usize = 2;
const EV_SINGULAR: usize = 3;
const EV_ESCAPE: usize = 4;

fn event_values(params: &KerrParams, frame: Frame, y: &[f64; 8]) -> [f64; 5] {
    let m = params.m();
    let dcos = match frame {
        Frame::Polar => -y[2].sin() * y[6],
        Frame::Axis(pole) => {
            let w2 = y[2] * y[2] + y[3] * y[3];
            let radial = y[2] * y[6] + y[3] * y[7];
            let c = (1.0 - w2).sqrt();
            match pole {
                Pole::North => -radial / c,
                Pole::South => radial / c,
            }
        }
    };
    [
        y[5],
        params.delta(y[1]),
        dcos,
        rho2_of(params, frame, y) - (SINGULARITY_RHO * m).powi(2),
        y[1].abs() - ESCAPE_RADIUS * m,
    ]
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct StepResult {
    y: [f64; 8],
    err: [f64; 8],
    k7: [f64; 8],
}

fn combine(y: &[f64; 8], h: f64, terms: &[(f64, &[f64; 8])]) -> [f64; 8] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn dopri_step<F>(f: &F, y: &[f64; 8], k1: &[f64; 8], h: f64) -> Option<StepResult>
where
    F: Fn(&[f64; 8]) -> Option<[f64; 8]>,
{
    let k2 = f(&combine(y, h, &[(A21, k1)]))?;
    let k3 = f(&combine(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(&combine(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(&combine(
        y,
        h,
        &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)],
    ))?;
    let k6 = f(&combine(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ))?;
    let y_new = combine(
        y,
        h,
        &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = f(&y_new)?;
    let mut err = [0.0; 8];
    for (i, e) in err.iter_mut().enumerate() {
        *e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Some(StepResult { y: y_new, err, k7 })
}

/// Largest component of `err` relative to `tol·max(|y_i|, |y_new_i|, floor_i)`.
fn error_norm(y: &[f64; 8], y_new: &[f64; 8], err: &[f64; 8], tol: f64, floor: &[f64; 8]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..8 {
        let sc = tol * y[i].abs().max(y_new[i].abs()).max(floor[i]);
        worst = worst.max((err[i] / sc).abs());
    }
    worst
}

fn polar_state(frame: Frame, y: &[f64; 8], phi_ref: f64) -> [f64; 8] {
    match frame {
        Frame::Polar => *y,
        Frame::Axis(pole) => axis::to_polar(y, pole, phi_ref),
    }
}

fn sign_i8(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Integrates from `initial` to affine parameter `s_max` with local tolerance `tol`.
pub fn integrate(
    params: &KerrParams,
    initial: &GeodesicState,
    s_max: f64,
    tol: f64,
) -> Result<Trajectory> {
    integrate_with(
        params,
        initial,
        &IntegratorOptions {
            tol,
            s_max,
            ..IntegratorOptions::default()
        },
    )
}

pub fn integrate_with(
    params: &KerrParams,
    initial: &GeodesicState,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if !(opts.tol > 0.0) || !opts.s_max.is_finite() {
        return Err(KerrError::Domain(
            "tolerance must be positive and s_max finite".into(),
        ));
    }
    if initial.velocity.chart != crate::kerr::Chart::KerrStar {
        return Err(KerrError::ChartMismatch);
    }
    let m = params.m();
    let p0 = initial.point;
    let g0 = metric_star(params, &p0)?;
    let v0 = initial.velocity.components;
    let q0 = crate::kerr::contract(&g0, &v0, &v0);
    if q0.abs() > 1e-10 * null_scale(&g0, &v0).max(f64::MIN_POSITIVE) {
        return Err(KerrError::NonNull { q: q0 });
    }
    let s0 = initial.affine_param;
    let dir = if opts.s_max >= s0 { 1.0 } else { -1.0 };
    let vscale = v0
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let fv = vscale * VELOCITY_FLOOR.max(ROUNDOFF_GUARD * f64::EPSILON / opts.tol);
    let floor = [m, m, 1.0, 1.0, fv, fv, fv / m, fv / m];

    let mut frame = if p0.theta.sin() < AXIS_ENTER.sin() {
        Frame::Axis(if p0.theta.cos() > 0.0 {
            Pole::North
        } else {
            Pole::South
        })
    } else {
        Frame::Polar
    };
    let y_polar0 = initial.to_array();
    let mut y = match frame {
        Frame::Polar => y_polar0,
        Frame::Axis(_) => axis::from_polar(&y_polar0),
    };
    let c0 = frame_constants(params, frame, &y).ok_or(KerrError::RingSingularity {
        r: p0.r,
        theta: p0.theta,
    })?;
    let f_of = |fr: Frame| move |z: &[f64; 8]| rhs(params, fr, z);
    let mut k1 = f_of(frame)(&y).ok_or(KerrError::RingSingularity {
        r: p0.r,
        theta: p0.theta,
    })?;

    let mut s = s0;
    let span = (opts.s_max - s0).abs();
    let mut h = dir
        * opts
            .h_init
            .unwrap_or_else(|| (1e-2 * m / vscale).min(span.max(f64::MIN_POSITIVE)));
    let mut phi_ref = p0.phi_star;
    let mut samples = vec![GeodesicState::from_array(&y_polar0, s0)];
    let mut sample_drift = vec![Drift::default()];
    let mut drift = Drift::default();
    let mut events: Vec<Event> = Vec::new();
    let mut termination = Termination::Completed;
    let mut steps = 0usize;

    let partial = |samples: &Vec<GeodesicState>,
                   sample_drift: &Vec<Drift>,
                   events: &Vec<Event>,
                   drift: Drift,
                   termination: Termination| Trajectory {
        samples: samples.clone(),
        sample_drift: sample_drift.clone(),
        events: events.clone(),
        drift,
        initial_constants: c0,
        termination,
    };

    while dir * (opts.s_max - s) > 0.0 {
        steps += 1;
        let remaining = opts.s_max - s;
        if h.abs() > remaining.abs() {
            h = remaining;
        }
        if steps > opts.max_steps || h.abs() < 1e-14 * s.abs().max(m) {
            return Err(KerrError::StepFailure {
                s,
                partial: Box::new(partial(
                    &samples,
                    &sample_drift,
                    &events,
                    drift,
                    termination,
                )),
            });
        }
        let f = f_of(frame);
        let Some(step) = dopri_step(&f, &y, &k1, h) else {
            h *= 0.25;
            continue;
        };
        let en = error_norm(&y, &step.y, &step.err, opts.tol, &floor);
        if !(en <= 1.0) || !in_domain(frame, &step.y) {
            let shrink = if en.is_finite() {
                (0.9 * en.powf(-0.2)).clamp(0.1, 0.5)
            } else {
                0.25
            };
            h *= shrink;
            continue;
        }

        // event detection on the accepted step
        let g_old = event_values(params, frame, &y);
        let g_new = event_values(params, frame, &step.y);
        let mut found: Vec<(f64, EventKind, [f64; 8])> = Vec::new();
        for (idx, kind) in [
            (EV_TURN_R, EventKind::TurningR),
            (EV_HORIZON, EventKind::HorizonCross),
            (EV_TURN_THETA, EventKind::TurningTheta),
            (EV_SINGULAR, EventKind::SingularityApproach),
            (EV_ESCAPE, EventKind::Escape),
        ] {
            let (a, b) = (g_old[idx], g_new[idx]);
            let crossed = (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0);
            if !crossed {
                continue;
            }
            let significant = match idx {
                EV_TURN_R => a.abs().max(b.abs()) > 1e-10 * vscale,
                EV_HORIZON => a.abs().max(b.abs()) > 1e-12 * m * m,
                EV_TURN_THETA => a.abs().max(b.abs()) > 1e-14 * vscale,
                EV_SINGULAR => a > 0.0,
                _ => a < 0.0,
            };
            if !significant {
                continue;
            }
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let mut y_hi = step.y;
            for _ in 0..80 {
                if (hi - lo) * h.abs() <= EVENT_RESOLUTION {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let Some(part) = dopri_step(&f, &y, &k1, mid * h) else {
                    break;
                };
                let gm = event_values(params, frame, &part.y)[idx];
                if gm.signum() == a.signum() && gm != 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                    y_hi = part.y;
                }
            }
            found.push((hi, kind, y_hi));
        }
        found.sort_by(|x, y| x.0.total_cmp(&y.0));

        let mut y_end = step.y;
        let mut h_taken = h;
        let mut stop = None;
        for (frac, kind, ye) in &found {
            let yp = polar_state(frame, ye, phi_ref);
            let direction = match kind {
                EventKind::TurningTheta => sign_i8(event_values(params, frame, ye)[EV_TURN_THETA]),
                _ => sign_i8(ye[5]),
            };
            let horizon = (*kind == EventKind::HorizonCross).then(|| {
                let (rm, rp) = (params.r_minus(), params.r_plus());
                if (yp[1] - rp).abs() < (yp[1] - rm).abs() {
                    Horizon::Outer
                } else {
                    Horizon::Inner
                }
            });
            events.push(Event {
                kind: *kind,
                affine_param: s + frac * h,
                r: yp[1],
                theta: yp[2],
                direction,
                horizon,
            });
            if kind.is_terminal() {
                y_end = *ye;
                h_taken = frac * h;
                stop = Some(match kind {
                    EventKind::SingularityApproach => Termination::SingularityApproach,
                    _ => Termination::Escape,
                });
                break;
            }
        }

        s += h_taken;
        y = y_end;
        let grow = if en == 0.0 {
            5.0
        } else {
            (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= grow;

        let yp = polar_state(frame, &y, phi_ref);
        phi_ref = yp[3];
        let cx = frame_constants_with_x(params, frame, &y);
        let d = cx.map(|(c, _)| Drift::between(&c0, &c)).unwrap_or(Drift {
            e: f64::INFINITY,
            l: f64::INFINITY,
            q: f64::INFINITY,
            k: f64::INFINITY,
        });
        drift = drift.merge(&d);
        samples.push(GeodesicState::from_array(&yp, s));
        sample_drift.push(d);

        if let Some(t) = stop {
            termination = t;
            break;
        }

        // Leaving the chart through a horizon: t* grows without bound and
        // X = g(∂r, v) behaves like 2ℙ/Δ instead of staying finite.
        let leaving = cx.is_some_and(|(c, x)| {
            let delta = params.delta(y[1]);
            let pp = p_function(&c, params, y[1]);
            delta.abs() < HORIZON_STOP * m * m && (delta * x).abs() > 0.5 * pp.abs() && pp != 0.0
        });
        if leaving || (params.delta(y[1]).abs() < 1e-3 * m * m && y[4].abs() > 1e6 * vscale) {
            events.push(Event {
                kind: EventKind::HorizonApproach,
                affine_param: s,
                r: yp[1],
                theta: yp[2],
                direction: sign_i8(yp[5]),
                horizon: Some(
                    if (yp[1] - params.r_plus()).abs() < (yp[1] - params.r_minus()).abs() {
                        Horizon::Outer
                    } else {
                        Horizon::Inner
                    },
                ),
            });
            termination = Termination::HorizonApproach;
            break;
        }

        // chart switches
        let switched = match frame {
            Frame::Polar if y[2].sin() < AXIS_ENTER.sin() => {
                let pole = if y[2].cos() > 0.0 {
                    Pole::North
                } else {
                    Pole::South
                };
                y = axis::from_polar(&y);
                Some(Frame::Axis(pole))
            }
            Frame::Axis(_) if (y[2] * y[2] + y[3] * y[3]).sqrt() > AXIS_LEAVE.sin() => {
                y = yp;
                Some(Frame::Polar)
            }
            _ => None,
        };
        if let Some(fr) = switched {
            frame = fr;
            k1 = f_of(frame)(&y).ok_or(KerrError::RingSingularity {
                r: yp[1],
                theta: yp[2],
            })?;
        } else {
            k1 = step.k7;
        }
    }

    Ok(partial(
        &samples,
        &sample_drift,
        &events,
        drift,
        termination,
    ))
}

/// Right-hand side `(ṫ*, ṙ, θ̇, φ̇*)` of the first-order equations in Kerr-star coordinates.
///
/// With `ℙ`, `𝔻` as in [`crate::constants`] and `X = (ℙ + σ_r√R)/Δ`,
///
/// ```text
/// ρ² ṙ  = σ_r √R(r)          ρ² θ̇  = σ_θ √Θ(θ)
/// ρ² ṫ* = a𝔻 + (r² + a²) X   ρ² φ̇* = 𝔻/sin²θ + a X
/// ```
///
/// `X` is evaluated as `(K − qr²)/(ℙ − σ_r√R)` when that avoids cancellation,
/// which keeps it finite on horizons crossed in the direction covered by the chart.
pub fn first_order_rhs(
    params: &KerrParams,
    consts: &MotionConstants,
    r: f64,
    theta: f64,
    sigma_r: f64,
    sigma_theta: f64,
) -> Result<[f64; 4]> {
    let rho2 = params.rho2(r, theta);
    if rho2 <= 0.0 {
        return Err(KerrError::RingSingularity { r, theta });
    }
    let rp = radial_poly(consts, params);
    let rr = rp.eval(r);
    let r_scale: f64 = rp.coeffs.iter().fold(0.0, |acc, c| acc * r.abs() + c.abs());
    if rr < -1e-12 * r_scale {
        return Err(KerrError::ForbiddenRegion {
            which: "R",
            value: rr,
        });
    }
    let pp = PolarPotential::new(consts, params);
    let th = pp.eval(theta);
    let s2 = theta.sin().powi(2);
    let a = params.a();
    let th_scale = consts.carter_q.abs()
        + theta.cos().powi(2)
            * (a * a * (consts.e * consts.e + consts.q.abs()) + consts.l * consts.l / s2);
    if th < -1e-12 * th_scale {
        return Err(KerrError::ForbiddenRegion {
            which: "Theta",
            value: th,
        });
    }
    let sqrt_r = sigma_r.signum() * rr.max(0.0).sqrt();
    let sqrt_th = sigma_theta.signum() * th.max(0.0).sqrt();
    let p = p_function(consts, params, r);
    let d = d_function(consts, params, theta);
    let plus = p + sqrt_r;
    let minus = p - sqrt_r;
    let x = if plus.abs() >= minus.abs() {
        plus / params.delta(r)
    } else {
        (consts.k - consts.q * r * r) / minus
    };
    Ok([
        (a * d + (r * r + a * a) * x) / rho2,
        sqrt_r / rho2,
        sqrt_th / rho2,
        (d / s2 + a * x) / rho2,
    ])
}

/// A future-directed null tangent at `p` with the given `(v^r, v^θ, v^φ)`.
///
/// The time component solves `g(v, v) = 0`; a null vector is future-directed
/// when `g(v, ∂r) > 0`, i.e. when it has negative product with the future
/// null field `−∂r`.
pub fn future_null_tangent(
    params: &KerrParams,
    p: &KerrStarPoint,
    spatial: [f64; 3],
) -> Result<TangentVector> {
    let g = metric_star(params, p)?;
    let [vr, vth, vph] = spatial;
    let a_coef = g[(0, 0)];
    let b_coef = 2.0 * (g[(0, 1)] * vr + g[(0, 3)] * vph);
    let rest = [0.0, vr, vth, vph];
    let c_coef = crate::kerr::contract(&g, &rest, &rest);
    let x_of = |vt: f64| vt + g[(1, 3)] * vph;
    let mut roots = Vec::new();
    if a_coef.abs() < 1e-14 * (b_coef.abs() + c_coef.abs()) {
        if b_coef != 0.0 {
            roots.push(-c_coef / b_coef);
        }
    } else {
        let disc = b_coef * b_coef - 4.0 * a_coef * c_coef;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let big = -0.5 * (b_coef + b_coef.signum() * sq);
            roots.push(big / a_coef);
            if big != 0.0 {
                roots.push(c_coef / big);
            }
        }
    }
    roots
        .into_iter()
        .filter(|&vt| x_of(vt) > 0.0)
        .max_by(|u, v| x_of(*u).total_cmp(&x_of(*v)))
        .map(|vt| TangentVector::star([vt, vr, vth, vph]))
        .ok_or_else(|| KerrError::Domain("no future-directed null completion".into()))
}

/// Initial state on the restphoton generator of the horizon `r`, tangent
/// `V/(k s₀)` with `k = (r₊ − r₋)/2`, `t*(s₀) = (r² + a²) ln(k s₀)/k`.
pub fn restphoton_state(params: &KerrParams, r_horizon: f64, theta: f64, s0: f64) -> GeodesicState {
    let a = params.a();
    let k = 0.5 * (params.r_plus() - params.r_minus());
    let vt = r_horizon * r_horizon + a * a;
    GeodesicState::new(
        KerrStarPoint {
            t_star: vt * (k * s0).ln() / k,
            r: r_horizon,
            theta,
            phi_star: 0.0,
        },
        [vt / (k * s0), 0.0, 0.0, a / (k * s0)],
        s0,
    )
}
