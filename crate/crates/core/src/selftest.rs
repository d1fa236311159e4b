//! Seeded invariant suite. Every check is deterministic for a given seed, and
//! parallel work is collected in input order so reports are reproducible.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{constants_from_state, MotionConstants};
use crate::elliptic::{comp_e, comp_k, hyp2f1};
use crate::error::Result;
use crate::integrator::{
    future_null_tangent, integrate, restphoton_state, EventKind, GeodesicState, Horizon,
};
use crate::kerr::{KerrParams, KerrStarPoint};
use crate::potentials::{horner, radial_poly, real_roots};
use crate::spherical::{
    chebyshev_radii, delta_t, delta_t_quadrature_tol, existence_window, initial_state,
    spherical_constants, spherical_orbit,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
}

impl CheckResult {
    fn new(name: &str, passed: bool, metrics: &[(&str, f64)]) -> Self {
        Self {
            name: name.to_string(),
            passed,
            metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    fn failed(name: &str, err: &crate::error::KerrError) -> Self {
        let mut r = Self::new(name, false, &[]);
        r.metrics.insert(format!("error: {err}"), f64::NAN);
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelftestConfig {
    pub a: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub seed: u64,
    pub ode_tol: f64,
    pub quad_tol: f64,
    pub root_tol: f64,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            a: 3.0,
            m: 8.0,
            seed: 1,
            ode_tol: 1e-10,
            quad_tol: 1e-12,
            root_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub config: SelftestConfig,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

pub fn run(cfg: &SelftestConfig) -> Result<SelftestReport> {
    let params = KerrParams::new(cfg.a, cfg.m)?;
    let seed = cfg.seed;
    let checks = vec![
        spherical_constants_check(),
        delta_t_positivity(200, cfg.quad_tol),
        prefactor_sign(200),
        elliptic_identities(),
        conservation(&params, seed, 100, cfg.ode_tol),
        spherical_stability(cfg.ode_tol),
        root_classification(seed, 200, cfg.root_tol),
        negative_carter_structure(&params, seed, 100),
        horizon_behavior(&params, seed, 50, 100, cfg.ode_tol),
        restphoton_formula(&params, cfg.ode_tol),
        window_edge(seed, 50),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(SelftestReport {
        config: *cfg,
        checks,
        passed,
    })
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Base point away from the horizons and the ring with `θ ∈ (0.2, π − 0.2)`.
pub fn random_point<R: Rng>(
    params: &KerrParams,
    rng: &mut R,
    r_lo: f64,
    r_hi: f64,
) -> KerrStarPoint {
    let m = params.m();
    loop {
        let r = rng.random_range(r_lo..r_hi);
        let theta = rng.random_range(0.2..PI - 0.2);
        if params.delta(r).abs() < 0.05 * m * m || params.rho2(r, theta) < 0.01 * m * m {
            continue;
        }
        return KerrStarPoint {
            t_star: 0.0,
            r,
            theta,
            phi_star: rng.random_range(-PI..PI),
        };
    }
}

/// Future-directed null state at a random point with a random spatial direction.
pub fn random_null_state<R: Rng>(
    params: &KerrParams,
    rng: &mut R,
    r_lo: f64,
    r_hi: f64,
) -> GeodesicState {
    let m = params.m();
    loop {
        let p = random_point(params, rng, r_lo, r_hi);
        let spatial = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0) / m,
            rng.random_range(-1.0..1.0) / m,
        ];
        if let Ok(v) = future_null_tangent(params, &p, spatial) {
            return GeodesicState {
                point: p,
                velocity: v,
                affine_param: 0.0,
            };
        }
    }
}

/// Null constants with `E ≠ 0` and `Q < 0` admitting polar motion, built from
/// random roots `0 < u₋ < u₊ < 1` of the polar quadratic.
pub fn random_negative_carter<R: Rng>(params: &KerrParams, rng: &mut R) -> MotionConstants {
    let a2 = params.a() * params.a();
    let mut us: [f64; 2] = [rng.random_range(1e-3..1.0), rng.random_range(1e-3..1.0)];
    us.sort_by(|x, y| x.total_cmp(y));
    let qcal = -a2 * us[0] * us[1];
    let phi =
        (a2 * (1.0 - us[0]) * (1.0 - us[1])).sqrt() * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let e = rng.random_range(0.1..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    MotionConstants::null(params, e, phi * e, qcal * e * e)
}

pub fn spherical_constants_check() -> CheckResult {
    const NAME: &str = "spherical_constants";
    let p = KerrParams::new(3.0, 8.0).expect("valid parameters");
    match spherical_constants(&p, -1.0) {
        Ok((phi, qcal)) => {
            let (dp, dq) = ((phi - 1.407).abs(), (qcal + 1.252).abs());
            CheckResult::new(
                NAME,
                dp < 5e-4 && dq < 5e-4,
                &[("Phi", phi), ("Qcal", qcal)],
            )
        }
        Err(e) => CheckResult::failed(NAME, &e),
    }
}

pub const DELTA_T_PARAMS: [(f64, f64); 3] = [(3.0, 8.0), (5.0, 7.0), (0.9, 1.0)];

pub fn delta_t_positivity(n: usize, quad_tol: f64) -> CheckResult {
    const NAME: &str = "delta_t_positivity";
    let mut min_dt = f64::INFINITY;
    let mut max_rel = 0.0f64;
    let mut count = 0usize;
    for (a, m) in DELTA_T_PARAMS {
        let p = KerrParams::new(a, m).expect("valid parameters");
        let rows: Vec<Result<(f64, f64)>> = chebyshev_radii(&p, n)
            .par_iter()
            .map(|&r| {
                let orbit = spherical_orbit(&p, r)?;
                Ok((
                    delta_t(&p, &orbit)?,
                    delta_t_quadrature_tol(&p, &orbit, quad_tol)?,
                ))
            })
            .collect();
        for row in rows {
            match row {
                Ok((dt, dq)) => {
                    count += 1;
                    min_dt = min_dt.min(dt);
                    max_rel = max_rel.max((dt - dq).abs() / dt.abs());
                }
                Err(e) => return CheckResult::failed(NAME, &e),
            }
        }
    }
    CheckResult::new(
        NAME,
        min_dt > 0.0 && max_rel < 1e-8,
        &[
            ("points", count as f64),
            ("min_delta_t", min_dt),
            ("max_rel_diff", max_rel),
        ],
    )
}

pub fn prefactor_sign(n: usize) -> CheckResult {
    let mut violations = 0usize;
    let mut count = 0usize;
    for (a, m) in DELTA_T_PARAMS {
        let p = KerrParams::new(a, m).expect("valid parameters");
        for r in chebyshev_radii(&p, n) {
            count += 1;
            if (-12.0 * m * r * r - 4.0 * a * a * m) * r <= 0.0 {
                violations += 1;
            }
        }
    }
    CheckResult::new(
        "prefactor_sign",
        violations == 0,
        &[("points", count as f64), ("violations", violations as f64)],
    )
}

pub fn elliptic_identities() -> CheckResult {
    const NAME: &str = "elliptic_identities";
    let eval = || -> Result<(f64, usize, f64)> {
        let mut pfaff = 0.0f64;
        for i in 0..100 {
            let x = -50.0 + (0.99 + 50.0) * i as f64 / 99.0;
            let lhs = comp_k(x)?;
            let rhs = comp_k(x / (x - 1.0))? / (1.0 - x).sqrt();
            pfaff = pfaff.max((lhs - rhs).abs() / lhs);
        }
        let mut dominated = 0usize;
        for i in 0..100 {
            let x = -(10f64.powf(-3.0 + 6.0 * i as f64 / 99.0));
            if comp_e(x)? > comp_k(x / (x - 1.0))? {
                dominated += 1;
            }
        }
        let mut series = 0.0f64;
        for i in 0..20 {
            let x = -10.0 + (0.95 + 10.0) * i as f64 / 19.0;
            let f = FRAC_PI_2 * hyp2f1(0.5, 0.5, 1.0, x)?;
            series = series.max((f - comp_k(x)?).abs() / comp_k(x)?);
        }
        Ok((pfaff, dominated, series))
    };
    match eval() {
        Ok((pfaff, dominated, series)) => CheckResult::new(
            NAME,
            pfaff < 1e-12 && dominated == 100 && series < 1e-10,
            &[
                ("pfaff_max_rel", pfaff),
                ("domination_count", dominated as f64),
                ("hypergeometric_max_rel", series),
            ],
        ),
        Err(e) => CheckResult::failed(NAME, &e),
    }
}

pub fn conservation(params: &KerrParams, seed: u64, n: usize, tol: f64) -> CheckResult {
    const NAME: &str = "conservation";
    let m = params.m();
    let mut rng = rng_for(seed, 5);
    let states: Vec<GeodesicState> = (0..n)
        .map(|_| random_null_state(params, &mut rng, -3.0 * m, 6.0 * m))
        .collect();
    let runs: Vec<Result<f64>> = states
        .par_iter()
        .map(|st| {
            integrate(params, st, 100.0 * m, tol)
                .map(|t| t.drift.relative(&t.initial_constants, params).max())
        })
        .collect();
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    for r in runs {
        match r {
            Ok(d) => worst = worst.max(d),
            Err(_) => failures += 1,
        }
    }
    CheckResult::new(
        NAME,
        failures == 0 && worst < 1e-6,
        &[
            ("max_drift", worst),
            ("integration_failures", failures as f64),
        ],
    )
}

/// Initial state of the spherical orbit at `r = −1` for `a = 3`, `M = 8`,
/// started at mid-oscillation with `θ` increasing.
pub fn spherical_orbit_state() -> Result<(KerrParams, GeodesicState, f64)> {
    let p = KerrParams::new(3.0, 8.0)?;
    let orbit = spherical_orbit(&p, -1.0)?;
    Ok((p, initial_state(&p, &orbit)?, orbit.r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityMeasurement {
    pub oscillations: f64,
    pub max_r_deviation: f64,
    pub max_half_period_mismatch: f64,
    /// Affine parameter at which `|r + 1|` first exceeded `1e−6`.
    pub departure_s: Option<f64>,
    pub half_period: f64,
}

/// Integrates the spherical orbit over 10 full polar oscillations.
pub fn measure_spherical_stability(tol: f64) -> Result<StabilityMeasurement> {
    let (p, st, r0) = spherical_orbit_state()?;
    // a short run fixes the half-period
    let probe = integrate(&p, &st, 200.0, tol)?;
    let turns: Vec<f64> = probe
        .events_of(EventKind::TurningTheta)
        .map(|e| e.affine_param)
        .collect();
    let half = match turns.as_slice() {
        [t0, t1, ..] => t1 - t0,
        _ => {
            return Err(crate::error::KerrError::Domain(
                "no polar oscillation found".into(),
            ))
        }
    };
    let s_end = turns[0] + 20.0 * half + 0.25 * half;
    let tr = integrate(&p, &st, s_end, tol)?;
    let turns: Vec<f64> = tr
        .events_of(EventKind::TurningTheta)
        .map(|e| e.affine_param)
        .collect();
    let s_last = turns.get(20).copied().unwrap_or(tr.last().affine_param);
    let mut max_dev = 0.0f64;
    let mut departure = None;
    for smp in tr.samples.iter().filter(|s| s.affine_param <= s_last) {
        let d = (smp.point.r - r0).abs();
        if d > 1e-6 && departure.is_none() {
            departure = Some(smp.affine_param);
        }
        max_dev = max_dev.max(d);
    }
    let halves: Vec<f64> = turns.windows(2).map(|w| w[1] - w[0]).collect();
    let mismatch = halves
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / w[0].abs())
        .fold(0.0f64, f64::max);
    let full = if turns.len() >= 21 {
        10.0
    } else {
        halves.len() as f64 / 2.0
    };
    Ok(StabilityMeasurement {
        oscillations: full,
        max_r_deviation: max_dev,
        max_half_period_mismatch: if halves.len() >= 2 {
            mismatch
        } else {
            f64::INFINITY
        },
        departure_s: departure,
        half_period: half,
    })
}

pub fn spherical_stability(tol: f64) -> CheckResult {
    const NAME: &str = "spherical_stability";
    match measure_spherical_stability(tol) {
        Ok(s) => CheckResult::new(
            NAME,
            s.oscillations >= 10.0 && s.max_r_deviation < 1e-6 && s.max_half_period_mismatch < 1e-6,
            &[
                ("oscillations", s.oscillations),
                ("max_r_deviation", s.max_r_deviation),
                ("max_half_period_mismatch", s.max_half_period_mismatch),
                ("departure_s", s.departure_s.unwrap_or(f64::NAN)),
                ("half_period", s.half_period),
            ],
        ),
        Err(e) => CheckResult::failed(NAME, &e),
    }
}

/// Real roots by recursive isolation: the critical points of `p` split the
/// real line into monotone pieces, each holding at most one root, which is
/// then bisected.
pub fn bisection_roots(coeffs: &[f64]) -> Vec<f64> {
    let lead = coeffs[0];
    let bound = 1.0
        + coeffs[1..]
            .iter()
            .fold(0.0f64, |m, c| m.max((c / lead).abs()));
    isolate(coeffs, -bound, bound)
}

fn isolate(p: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        let x = -p[1] / p[0];
        return if x > lo && x < hi {
            vec![x]
        } else {
            Vec::new()
        };
    }
    let dp: Vec<f64> = p[..n]
        .iter()
        .enumerate()
        .map(|(i, c)| c * (n - i) as f64)
        .collect();
    let mut knots = vec![lo];
    knots.extend(isolate(&dp, lo, hi));
    knots.push(hi);
    let mut out = Vec::new();
    for w in knots.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (horner(p, a), horner(p, b));
        if fa == 0.0 {
            out.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        let sa = fa.signum();
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if horner(p, mid).signum() == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * x.abs().max(1.0));
    out
}

pub fn root_classification(seed: u64, n: usize, tol: f64) -> CheckResult {
    const NAME: &str = "root_classification";
    let mut rng = rng_for(seed, 7);
    let mut max_err = 0.0f64;
    let mut count_mismatch = 0usize;
    for _ in 0..n {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut c = [sign * rng.random_range(0.5..1.0), 0.0, 0.0, 0.0, 0.0];
        for slot in c.iter_mut().skip(1) {
            *slot = rng.random_range(-1.0..1.0);
        }
        let oracle = bisection_roots(&c);
        let found = match real_roots(&c, tol) {
            Ok(r) => r.values(),
            Err(e) => return CheckResult::failed(NAME, &e),
        };
        if found.len() != oracle.len() {
            count_mismatch += 1;
            continue;
        }
        for (x, y) in found.iter().zip(&oracle) {
            max_err = max_err.max((x - y).abs() / y.abs().max(1.0));
        }
    }

    // zero energy: roots M ± √(M² − a²Q/(L² + Q))
    let mut closed_err = 0.0f64;
    for _ in 0..n {
        let m = rng.random_range(0.5..10.0);
        let a = m * rng.random_range(-0.99..0.99);
        let Ok(p) = KerrParams::new(a, m) else {
            continue;
        };
        let l: f64 = rng.random_range(-3.0..3.0) * m;
        let q = rng.random_range(-0.95 * l * l..10.0 * m * m);
        let consts = MotionConstants::null(&p, 0.0, l, q);
        let d = (m * m - a * a * q / (l * l + q)).sqrt();
        let found = real_roots(&radial_poly(&consts, &p).coeffs, tol).map(|r| r.values());
        match found {
            Ok(v) if v.len() == 2 => {
                closed_err = closed_err
                    .max((v[0] - (m - d)).abs() / m)
                    .max((v[1] - (m + d)).abs() / m);
            }
            _ => count_mismatch += 1,
        }
    }

    // E = L = 0: the horizon radii
    let mut horizon_err = 0.0f64;
    for _ in 0..n {
        let m = rng.random_range(0.5..10.0);
        let a = m * rng.random_range(0.01..0.99);
        let p = KerrParams::new(a, m).expect("valid parameters");
        let consts = MotionConstants::null(&p, 0.0, 0.0, rng.random_range(0.1..10.0) * m * m);
        match real_roots(&radial_poly(&consts, &p).coeffs, tol).map(|r| r.values()) {
            Ok(v) if v.len() == 2 => {
                horizon_err = horizon_err
                    .max((v[0] - p.r_minus()).abs() / m)
                    .max((v[1] - p.r_plus()).abs() / m);
            }
            _ => count_mismatch += 1,
        }
    }
    CheckResult::new(
        NAME,
        count_mismatch == 0
            && max_err < 1e-9
            && closed_err < 1e-10
            && horizon_err <= 4.0 * f64::EPSILON,
        &[
            ("count_mismatches", count_mismatch as f64),
            ("companion_vs_bisection", max_err),
            ("zero_energy_closed_form", closed_err),
            ("horizon_radii", horizon_err),
        ],
    )
}

pub fn negative_carter_structure(params: &KerrParams, seed: u64, n: usize) -> CheckResult {
    let mut rng = rng_for(seed, 8);
    let m = params.m();
    let mut nonneg_roots = 0usize;
    let mut min_curv = f64::INFINITY;
    let mut min_nonneg = f64::INFINITY;
    for _ in 0..n {
        let c = random_negative_carter(params, &mut rng);
        let poly = radial_poly(&c, params);
        if let Ok(rep) = real_roots(&poly.coeffs, 1e-12) {
            nonneg_roots += rep.values().iter().filter(|&&x| x >= 0.0).count();
        }
        for i in 0..=400 {
            let r = -10.0 * m + 20.0 * m * i as f64 / 400.0;
            let scale = c.e * c.e * m * m;
            min_curv = min_curv.min(poly.second_derivative(r) / scale);
            if r >= 0.0 {
                min_nonneg = min_nonneg.min(poly.eval(r) / (scale * m * m));
            }
        }
    }
    CheckResult::new(
        "negative_carter_structure",
        nonneg_roots == 0 && min_curv > 0.0 && min_nonneg > 0.0,
        &[
            ("nonnegative_roots", nonneg_roots as f64),
            ("min_scaled_second_derivative", min_curv),
            ("min_scaled_value_nonnegative_r", min_nonneg),
        ],
    )
}

pub fn horizon_behavior(
    params: &KerrParams,
    seed: u64,
    n_consts: usize,
    n_traj: usize,
    tol: f64,
) -> CheckResult {
    const NAME: &str = "horizon_behavior";
    let m = params.m();
    let (rm, rp) = (params.r_minus(), params.r_plus());
    let mut rng = rng_for(seed, 9);
    let mut min_gap = f64::INFINITY;
    let mut counted = 0usize;
    while counted < n_consts {
        let st = random_null_state(params, &mut rng, -3.0 * m, 6.0 * m);
        let Ok(c) = constants_from_state(params, &st.point, &st.velocity) else {
            continue;
        };
        counted += 1;
        let poly = radial_poly(&c, params);
        let scale = c.scale(params).powi(2) * m.powi(4);
        for i in 1..200 {
            let r = rm + (rp - rm) * i as f64 / 200.0;
            min_gap = min_gap.min(poly.eval(r) / scale);
        }
    }

    let mut states = Vec::with_capacity(n_traj);
    while states.len() < n_traj {
        let mut st = random_null_state(params, &mut rng, rp + 0.2 * m, 4.0 * m);
        if st.velocity.components[1] > 0.0 {
            // flip the spatial direction towards the hole
            let p = st.point;
            let v = st.velocity.components;
            match future_null_tangent(params, &p, [-v[1], -v[2], -v[3]]) {
                Ok(w) => st.velocity = w,
                Err(_) => continue,
            }
        }
        states.push(st);
    }
    let runs: Vec<Result<(usize, usize)>> = states
        .par_iter()
        .map(|st| {
            let tr = integrate(params, st, 100.0 * m, tol)?;
            let count = |h: Horizon| {
                tr.events_of(EventKind::HorizonCross)
                    .filter(|e| e.horizon == Some(h))
                    .count()
            };
            Ok((count(Horizon::Outer), count(Horizon::Inner)))
        })
        .collect();
    let mut max_outer = 0usize;
    let mut max_inner = 0usize;
    let mut failures = 0usize;
    for r in runs {
        match r {
            Ok((o, i)) => {
                max_outer = max_outer.max(o);
                max_inner = max_inner.max(i);
            }
            Err(_) => failures += 1,
        }
    }
    CheckResult::new(
        NAME,
        min_gap > 0.0 && max_outer <= 1 && max_inner <= 1 && failures == 0,
        &[
            ("min_scaled_R_between_horizons", min_gap),
            ("max_outer_crossings", max_outer as f64),
            ("max_inner_crossings", max_inner as f64),
            ("integration_failures", failures as f64),
        ],
    )
}

pub fn restphoton_formula(params: &KerrParams, tol: f64) -> CheckResult {
    const NAME: &str = "restphoton_formula";
    let (rp, rm, a) = (params.r_plus(), params.r_minus(), params.a());
    let k = 0.5 * (rp - rm);
    let st = restphoton_state(params, rp, 1.0, 0.1);
    match integrate(params, &st, 10.0, tol.min(1e-12)) {
        Ok(tr) => {
            let err = tr
                .samples
                .iter()
                .map(|s| {
                    let expect = (rp * rp + a * a) * (k * s.affine_param).ln() / k;
                    (s.point.t_star - expect).abs()
                })
                .fold(0.0f64, f64::max);
            let reached = tr.last().affine_param;
            CheckResult::new(
                NAME,
                err < 1e-6 && (reached - 10.0).abs() < 1e-12,
                &[("max_abs_error", err), ("final_s", reached)],
            )
        }
        Err(e) => CheckResult::failed(NAME, &e),
    }
}

pub fn window_edge(seed: u64, n: usize) -> CheckResult {
    let mut rng = rng_for(seed, 11);
    let mut max_k = 0.0f64;
    let mut below = 0usize;
    for _ in 0..n {
        let m = rng.random_range(0.5..10.0);
        let mut u = rng.random_range(-0.999..0.999);
        if u == 0.0 {
            u = 0.5;
        }
        let p = KerrParams::new(u * m, m).expect("valid parameters");
        let w = existence_window(&p);
        max_k = max_k.max(w.k(w.r_lower).abs());
        if w.r_lower < -0.5 * m {
            below += 1;
        }
    }
    CheckResult::new(
        "existence_window",
        max_k < 1e-9 && below == 0,
        &[("max_abs_k", max_k), ("below_minus_half_m", below as f64)],
    )
}
