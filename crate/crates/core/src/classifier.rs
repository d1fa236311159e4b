//! Case analysis of null geodesics by their constants of motion.
//!
//! The tree first separates restphotons (`E = L = K = 0`) and axis geodesics
//! (`K = L = 0`), then splits on `E`. Zero energy splits on `K`, nonzero
//! energy on the sign of `Q`, and `Q < 0` further on whether the polar
//! quadratic has a double root. Each branch records the numerical evidence
//! the verdict rests on; steps that follow from causal structure rather than
//! computation appear as reason codes only.

use serde::{Deserialize, Serialize};

use crate::constants::MotionConstants;
use crate::error::{KerrError, Result};
use crate::integrator::{EventKind, Termination, Trajectory};
use crate::kerr::KerrParams;
use crate::potentials::{
    radial_poly, radial_roots, u_quadratic_roots, Multiplicity, PolarPotential, RealRoot, URoots,
};
use crate::spherical::{existence_window, orbit_from_constants};

const ZERO_TOL: f64 = 1e-12;
const NULL_TOL: f64 = 1e-10;
const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "restphoton")]
    Restphoton,
    #[serde(rename = "axis")]
    Axis,
    #[serde(rename = "E0_K0")]
    ZeroEnergyZeroK,
    #[serde(rename = "E0_Kpos")]
    ZeroEnergyPositiveK,
    #[serde(rename = "Epos_Q0")]
    EquatorialCarter,
    #[serde(rename = "Epos_Qpos")]
    PositiveCarter,
    #[serde(rename = "Epos_Qneg_constTheta")]
    NegativeCarterConstantTheta,
    #[serde(rename = "Epos_Qneg_oscillating")]
    NegativeCarterOscillating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    /// Restphotons have `t*` growing like `ln s` in both directions.
    RestphotonTimeUnbounded,
    /// On the axis `R = E²(r² + a²)² > 0`, so `r` is strictly monotone.
    AxisRadialPotentialPositive,
    /// With `E = K = 0` the coordinate `t` is affine with nonzero slope.
    ZeroEnergyTimeAffine,
    /// The radial roots lie on both sides of the horizon pair.
    RootsStraddleHorizons,
    /// `R > 0` strictly between the horizons for every non-restphoton.
    RadialPositiveBetweenHorizons,
    /// A bounded geodesic needs its largest radial extent below `r₊`.
    BoundedRequiresExtentBelowOuterHorizon,
    /// A closed geodesic lies in `r < r₋`.
    ClosedConfinedBelowInnerHorizon,
    /// `r = const` slices of `0 < r < r₋` form a spacelike foliation.
    SpacelikeFoliationInnerRegion,
    /// `Q = 0` confines the geodesic to the equatorial plane.
    EquatorialConfinement,
    /// On the equatorial plane a vanishing radial extent meets the ring.
    RingSingularityAtZeroRadius,
    /// No bounded equatorial geodesic in `r < 0`.
    EquatorialNegativeRadiusUnbounded,
    /// `R(0) = −a²Q < 0` so motion never crosses `r = 0`.
    RadialNegativeAtZero,
    /// Horizon components are crossed at most once.
    HorizonCrossedOnce,
    /// For `Q < 0` the quartic has no roots in `r ≥ 0` and is convex.
    NegativeCarterConvexRadial,
    /// Bounded motion with `Q < 0` has constant negative `r`.
    NegativeCarterConstantRadius,
    /// Constant `θ` on a spherical orbit makes `t` affine and non-constant.
    ConstantThetaTimeAffine,
    /// `t` grows by `Δt > 0` per polar oscillation.
    DeltaTPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// `max(|E|, |L|/M, √|K|/M, √|Q|/M)`.
    pub scale: f64,
    pub roots: Vec<RealRoot>,
    /// `M ± √(M² − a²Q/(L² + Q))` for zero energy with `K > 0`.
    pub closed_form_roots: Option<[f64; 2]>,
    /// `R(0)`.
    pub radial_at_zero: f64,
    /// Smallest sampled `R` strictly between the horizons.
    pub min_between_horizons: Option<f64>,
    pub u_roots: Option<URoots>,
    pub spherical_radius: Option<f64>,
    pub in_window: Option<bool>,
    pub delta_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub branch: Branch,
    pub not_closed: bool,
    pub not_bounded: bool,
    pub reason_codes: Vec<ReasonCode>,
    pub evidence: Evidence,
}

fn min_between_horizons(params: &KerrParams, consts: &MotionConstants) -> f64 {
    let poly = radial_poly(consts, params);
    let (lo, hi) = (params.r_minus(), params.r_plus());
    (1..64)
        .map(|i| poly.eval(lo + (hi - lo) * i as f64 / 64.0))
        .fold(f64::INFINITY, f64::min)
}

/// Sorts a null geodesic into its branch of the case tree.
///
/// `fixed_r` names the radius of a spherical orbit when the caller knows it;
/// otherwise a higher-order root of `R` is used for `Q < 0`.
pub fn classify(
    params: &KerrParams,
    consts: &MotionConstants,
    fixed_r: Option<f64>,
) -> Result<CaseVerdict> {
    let (a, m) = (params.a(), params.m());
    let s = consts.scale(params);
    if consts.q.abs() > NULL_TOL * s * s {
        return Err(KerrError::NonNull { q: consts.q });
    }
    let consts = MotionConstants { q: 0.0, ..*consts };
    let zero1 = |x: f64| x.abs() <= ZERO_TOL * s;
    let zero2 = |x: f64| x.abs() <= ZERO_TOL * (s * m).powi(2);
    let (e0, l0, k0, q0) = (
        zero1(consts.e),
        zero1(consts.l),
        zero2(consts.k),
        zero2(consts.carter_q),
    );

    let poly = radial_poly(&consts, params);
    let mut evidence = Evidence {
        scale: s,
        roots: Vec::new(),
        closed_form_roots: None,
        radial_at_zero: poly.eval(0.0),
        min_between_horizons: None,
        u_roots: None,
        spherical_radius: None,
        in_window: None,
        delta_t: None,
    };
    use ReasonCode::*;

    if e0 && l0 && k0 {
        return Ok(CaseVerdict {
            branch: Branch::Restphoton,
            not_closed: true,
            not_bounded: true,
            reason_codes: vec![RestphotonTimeUnbounded],
            evidence,
        });
    }
    if !k0 && consts.k < 0.0 {
        return Err(KerrError::ForbiddenRegion {
            which: "K",
            value: consts.k,
        });
    }
    evidence.roots = radial_roots(&poly, ROOT_TOL)
        .map(|r| r.roots)
        .unwrap_or_default();
    let gap_min = min_between_horizons(params, &consts);
    evidence.min_between_horizons = Some(gap_min);
    let gap_positive = gap_min > 0.0;

    if k0 && l0 {
        return Ok(CaseVerdict {
            branch: Branch::Axis,
            not_closed: evidence.roots.is_empty(),
            not_bounded: evidence.roots.is_empty(),
            reason_codes: vec![AxisRadialPotentialPositive],
            evidence,
        });
    }

    if e0 {
        if k0 {
            return Ok(CaseVerdict {
                branch: Branch::ZeroEnergyZeroK,
                not_closed: true,
                not_bounded: true,
                reason_codes: vec![ZeroEnergyTimeAffine],
                evidence,
            });
        }
        let (l2, q) = (consts.l * consts.l, consts.carter_q);
        let disc = m * m - a * a * q / (l2 + q);
        if disc >= 0.0 {
            let d = disc.sqrt();
            evidence.closed_form_roots = Some([m - d, m + d]);
        }
        let straddle = evidence
            .closed_form_roots
            .map(|[lo, hi]| lo < params.r_minus() && hi > params.r_plus())
            .unwrap_or(false);
        let ok = gap_positive && straddle;
        return Ok(CaseVerdict {
            branch: Branch::ZeroEnergyPositiveK,
            not_closed: ok,
            not_bounded: ok,
            reason_codes: vec![
                RadialPositiveBetweenHorizons,
                RootsStraddleHorizons,
                BoundedRequiresExtentBelowOuterHorizon,
            ],
            evidence,
        });
    }

    if q0 {
        return Ok(CaseVerdict {
            branch: Branch::EquatorialCarter,
            not_closed: gap_positive,
            not_bounded: gap_positive,
            reason_codes: vec![
                EquatorialConfinement,
                EquatorialNegativeRadiusUnbounded,
                RingSingularityAtZeroRadius,
                ClosedConfinedBelowInnerHorizon,
                SpacelikeFoliationInnerRegion,
            ],
            evidence,
        });
    }

    if consts.carter_q > 0.0 {
        let ok = evidence.radial_at_zero < 0.0 && gap_positive;
        return Ok(CaseVerdict {
            branch: Branch::PositiveCarter,
            not_closed: ok,
            not_bounded: ok,
            reason_codes: vec![
                RadialNegativeAtZero,
                RadialPositiveBetweenHorizons,
                HorizonCrossedOnce,
                ClosedConfinedBelowInnerHorizon,
                SpacelikeFoliationInnerRegion,
            ],
            evidence,
        });
    }

    // Q < 0
    let pp = PolarPotential::new(&consts, params);
    let u = u_quadratic_roots(&pp)?;
    evidence.u_roots = Some(u);
    let rc = consts.rescaled()?;
    let dis_scale = (u.w * u.w).max(4.0 * a * a * rc.qcal.abs()).max(m.powi(4));
    let constant_theta = u.dis.abs() <= ZERO_TOL * dis_scale;

    let radius = match fixed_r {
        Some(r) => {
            let norm = poly.coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
            let scale = norm * r.abs().max(1.0).powi(4);
            if poly.eval(r).abs() > 1e-8 * scale || poly.derivative(r).abs() > 1e-8 * scale {
                return Err(KerrError::Domain(format!(
                    "r = {r} is not a double root of the radial quartic"
                )));
            }
            Some(r)
        }
        None => evidence
            .roots
            .iter()
            .find(|x| x.multiplicity == Multiplicity::Higher)
            .map(|x| x.value),
    };
    evidence.spherical_radius = radius;
    let nonneg_roots = evidence.roots.iter().any(|x| x.value >= 0.0);
    let mut reasons = vec![NegativeCarterConvexRadial, NegativeCarterConstantRadius];

    if constant_theta {
        reasons.push(ConstantThetaTimeAffine);
        return Ok(CaseVerdict {
            branch: Branch::NegativeCarterConstantTheta,
            not_closed: !nonneg_roots,
            not_bounded: !nonneg_roots,
            reason_codes: reasons,
            evidence,
        });
    }

    if let Some(r) = radius {
        let window = existence_window(params);
        evidence.in_window = Some(window.contains(r));
        let orbit = orbit_from_constants(params, r, rc.phi, rc.qcal)?;
        evidence.delta_t = orbit.delta_t;
    }
    reasons.push(DeltaTPositive);
    let ok = !nonneg_roots && evidence.delta_t.map_or(true, |dt| dt > 0.0);
    Ok(CaseVerdict {
        branch: Branch::NegativeCarterOscillating,
        not_closed: ok,
        not_bounded: ok,
        reason_codes: reasons,
        evidence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtentWarning {
    /// The running extent still moved over the last quarter of the samples.
    StillDrifting { side: Side, change: f64 },
    /// The extent is attained at an end of the integrated segment.
    SegmentEndpoint { side: Side, r: f64 },
    /// A finite extent with no nearby radial root and no terminal event.
    UnmatchedExtent { side: Side, r: f64 },
}

/// Observed radial range of a trajectory; `None` marks an infinite side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialExtent {
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub observed_min: f64,
    pub observed_max: f64,
    pub warnings: Vec<ExtentWarning>,
    /// A radial turning point strictly between the horizons.
    pub consistency_failure: bool,
}

/// Empirical inf and sup of `r` along `traj`, cross-checked against the roots of `R`.
pub fn radial_extent(
    params: &KerrParams,
    consts: &MotionConstants,
    traj: &Trajectory,
) -> Result<RadialExtent> {
    let rs: Vec<f64> = traj.samples.iter().map(|s| s.point.r).collect();
    let n = rs.len();
    if n == 0 {
        return Err(KerrError::Domain("empty trajectory".into()));
    }
    let min_of = |xs: &[f64]| xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max_of = |xs: &[f64]| xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = (min_of(&rs), max_of(&rs));
    let roots = radial_roots(&radial_poly(consts, params), ROOT_TOL)
        .map(|r| r.values())
        .unwrap_or_default();

    let last_r = rs[n - 1];
    let escaped = traj.termination == Termination::Escape;
    let r1 = (!(escaped && last_r < 0.0)).then_some(lo);
    let r2 = (!(escaped && last_r > 0.0)).then_some(hi);

    let mut warnings = Vec::new();
    if traj.termination == Termination::Completed && n >= 8 {
        let head = &rs[..(3 * n) / 4];
        let (dl, dh) = (min_of(head) - lo, hi - max_of(head));
        if dl > 1e-3 {
            warnings.push(ExtentWarning::StillDrifting {
                side: Side::Lower,
                change: dl,
            });
        }
        if dh > 1e-3 {
            warnings.push(ExtentWarning::StillDrifting {
                side: Side::Upper,
                change: dh,
            });
        }
    }
    let terminal = traj.termination != Termination::Completed;
    let near_root = |x: f64| {
        roots
            .iter()
            .any(|&z| (z - x).abs() <= 1e-4 * x.abs().max(1.0))
    };
    let mut consistency_failure = false;
    for (side, ext) in [(Side::Lower, r1), (Side::Upper, r2)] {
        let Some(x) = ext else { continue };
        if near_root(x) {
            if x > params.r_minus() && x < params.r_plus() {
                consistency_failure = true;
            }
        } else if x == rs[0] || (x == last_r && !terminal) {
            warnings.push(ExtentWarning::SegmentEndpoint { side, r: x });
        } else if !(x == last_r && terminal) {
            warnings.push(ExtentWarning::UnmatchedExtent { side, r: x });
        }
    }
    let (rm, rp) = (params.r_minus(), params.r_plus());
    let margin = 1e-9 * params.m();
    if traj
        .events_of(EventKind::TurningR)
        .any(|e| e.r > rm + margin && e.r < rp - margin)
    {
        consistency_failure = true;
    }
    Ok(RadialExtent {
        r1,
        r2,
        observed_min: lo,
        observed_max: hi,
        warnings,
        consistency_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherical::spherical_constants;

    fn params(a: f64, m: f64) -> KerrParams {
        KerrParams::new(a, m).unwrap()
    }

    #[test]
    fn zero_energy_positive_k() {
        let p = params(3.0, 6.0);
        let c = MotionConstants::null(&p, 0.0, 2.0, 4.0);
        let v = classify(&p, &c, None).unwrap();
        assert_eq!(v.branch, Branch::ZeroEnergyPositiveK);
        assert!(v.not_closed && v.not_bounded);
        assert!(v.reason_codes.contains(&ReasonCode::RootsStraddleHorizons));
        let [lo, hi] = v.evidence.closed_form_roots.unwrap();
        assert!((lo - 0.3875).abs() < 1e-4 && (hi - 11.6125).abs() < 1e-4);
        let found: Vec<f64> = v.evidence.roots.iter().map(|r| r.value).collect();
        assert!((found[0] - lo).abs() < 1e-10 && (found[1] - hi).abs() < 1e-10);
    }

    #[test]
    fn restphoton_and_axis() {
        let p = params(3.0, 6.0);
        let v = classify(&p, &MotionConstants::null(&p, 0.0, 0.0, 0.0), None).unwrap();
        assert_eq!(v.branch, Branch::Restphoton);
        assert!(v.not_bounded);
        let c = MotionConstants::null(&p, 2.0, 0.0, -9.0 * 4.0);
        let v = classify(&p, &c, None).unwrap();
        assert_eq!(v.branch, Branch::Axis);
        assert!(v.evidence.roots.is_empty() && v.not_bounded);
    }

    #[test]
    fn spherical_negative_carter() {
        let p = params(3.0, 8.0);
        let (phi, qcal) = spherical_constants(&p, -1.0).unwrap();
        let c = MotionConstants::null(&p, 1.0, phi, qcal);
        for fixed in [Some(-1.0), None] {
            let v = classify(&p, &c, fixed).unwrap();
            assert_eq!(v.branch, Branch::NegativeCarterOscillating);
            assert!(v.evidence.delta_t.unwrap() > 0.0);
            assert_eq!(v.evidence.in_window, Some(true));
            assert!((v.evidence.spherical_radius.unwrap() + 1.0).abs() < 1e-6);
            assert!(v.not_closed && v.not_bounded);
        }
        assert!(classify(&p, &c, Some(-2.0)).is_err());
    }

    #[test]
    fn carter_branches() {
        let p = params(0.6, 1.0);
        let v = classify(&p, &MotionConstants::null(&p, 1.0, 2.0, 0.0), None).unwrap();
        assert_eq!(v.branch, Branch::EquatorialCarter);
        let v = classify(&p, &MotionConstants::null(&p, 1.0, 2.0, 3.0), None).unwrap();
        assert_eq!(v.branch, Branch::PositiveCarter);
        assert!((v.evidence.radial_at_zero + 0.36 * 3.0).abs() < 1e-12);
        let v = classify(&p, &MotionConstants::null(&p, 0.0, 1.0, -1.0), None).unwrap();
        assert_eq!(v.branch, Branch::ZeroEnergyZeroK);
    }

    #[test]
    fn rejects_timelike_and_negative_k() {
        let p = params(0.6, 1.0);
        let c = MotionConstants::new(&p, 1.0, 0.5, 1.0, -1.0);
        assert!(matches!(
            classify(&p, &c, None),
            Err(KerrError::NonNull { .. })
        ));
        let c = MotionConstants::null(&p, 0.0, 1.0, -2.0);
        assert!(classify(&p, &c, None).is_err());
    }

    #[test]
    fn constant_theta_branch() {
        // dis = 0 with Q < 0: w = 2|a|√(−𝒬)
        let p = params(0.5, 1.0);
        let qcal: f64 = -0.01;
        let w = 2.0 * 0.5 * (-qcal).sqrt();
        let phi = (0.25 - qcal - w).sqrt();
        let v = classify(&p, &MotionConstants::null(&p, 1.0, phi, qcal), None).unwrap();
        assert_eq!(v.branch, Branch::NegativeCarterConstantTheta);
    }
}
