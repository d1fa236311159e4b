use std::f64::consts::FRAC_PI_2;

use kerrlab::classifier::radial_extent;
use kerrlab::constants::constants_from_state;
use kerrlab::integrator::{
    first_order_rhs, future_null_tangent, integrate, EventKind, GeodesicState, Termination,
};
use kerrlab::kerr::{contract, metric_star};
use kerrlab::selftest::random_null_state;
use kerrlab::spherical::{initial_state, spherical_orbit};
use kerrlab::{KerrParams, KerrStarPoint, MotionConstants};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn future_state(
    p: &KerrParams,
    c: &MotionConstants,
    r: f64,
    theta: f64,
    sigma_theta: f64,
) -> GeodesicState {
    let point = KerrStarPoint {
        t_star: 0.0,
        r,
        theta,
        phi_star: 0.0,
    };
    let g = metric_star(p, &point).unwrap();
    let dr = [0.0, 1.0, 0.0, 0.0];
    [1.0, -1.0]
        .iter()
        .map(|&sr| first_order_rhs(p, c, r, theta, sr, sigma_theta).unwrap())
        .find(|v| contract(&g, v, &dr) > 0.0)
        .map(|v| GeodesicState::new(point, v, 0.0))
        .expect("one radial direction is future-directed")
}

#[test]
fn no_turning_point_between_horizons_on_random_trajectories() {
    let p = KerrParams::new(0.9, 1.0).unwrap();
    let failures: Vec<(u64, f64, f64)> = (0..500u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
            let st = random_null_state(&p, &mut rng, -3.0, 6.0);
            let c = constants_from_state(&p, &st.point, &st.velocity).unwrap();
            let tr = integrate(&p, &st, 100.0, 1e-10).ok()?;
            let ext = radial_extent(&p, &c, &tr).unwrap();
            ext.consistency_failure
                .then_some((i, ext.observed_min, ext.observed_max))
        })
        .collect();
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn spherical_orbit_has_degenerate_extent() {
    let p = KerrParams::new(3.0, 8.0).unwrap();
    let orbit = spherical_orbit(&p, -1.0).unwrap();
    let st = initial_state(&p, &orbit).unwrap();
    let tr = integrate(&p, &st, 60.0, 1e-10).unwrap();
    let ext = radial_extent(&p, &orbit.constants(&p, 1.0), &tr).unwrap();
    let (r1, r2) = (ext.r1.unwrap(), ext.r2.unwrap());
    assert!(
        (r1 + 1.0).abs() < 1e-6 && (r2 + 1.0).abs() < 1e-6,
        "{r1} {r2}"
    );
    assert!(!ext.consistency_failure);
}

#[test]
fn zero_energy_ray_between_horizons_runs_inward() {
    let p = KerrParams::new(3.0, 6.0).unwrap();
    let (rm, rp) = (p.r_minus(), p.r_plus());
    let inner_root = 6.0 - (36.0f64 - 9.0 * 4.0 / 8.0).sqrt();

    // P = -La > 0: regular at the inner horizon, so the ray crosses it and turns
    let c = MotionConstants::null(&p, 0.0, -2.0, 4.0);
    let tr = integrate(&p, &future_state(&p, &c, 5.0, FRAC_PI_2, 1.0), 200.0, 1e-10).unwrap();
    let ext = radial_extent(&p, &c, &tr).unwrap();
    let crossings: Vec<_> = tr.events_of(EventKind::HorizonCross).collect();
    assert_eq!(crossings.len(), 1);
    assert!((crossings[0].r - rm).abs() < 1e-9 && crossings[0].direction == -1);
    let turns: Vec<f64> = tr.events_of(EventKind::TurningR).map(|e| e.r).collect();
    assert_eq!(turns.len(), 1);
    assert!((turns[0] - inner_root).abs() < 1e-6);
    assert!((ext.r1.unwrap() - inner_root).abs() < 1e-4);
    assert_eq!(ext.r2, Some(5.0));
    assert!(ext.observed_max < rp && !ext.consistency_failure);
    assert_eq!(tr.termination, Termination::HorizonApproach);

    // P < 0: the inward ray leaves the chart through the inner horizon
    let c = MotionConstants::null(&p, 0.0, 2.0, 4.0);
    let tr = integrate(&p, &future_state(&p, &c, 5.0, FRAC_PI_2, 1.0), 200.0, 1e-10).unwrap();
    let ext = radial_extent(&p, &c, &tr).unwrap();
    assert_eq!(tr.termination, Termination::HorizonApproach);
    assert_eq!(tr.events_of(EventKind::HorizonCross).count(), 0);
    assert!(ext.observed_min > rm && ext.observed_min - rm < 0.1);
    assert!(!ext.consistency_failure);
}

#[test]
fn axis_ray_is_radially_monotone() {
    let p = KerrParams::new(0.6, 1.0).unwrap();
    let point = KerrStarPoint {
        t_star: 0.0,
        r: 3.0,
        theta: 0.0,
        phi_star: 0.0,
    };
    let v = future_null_tangent(&p, &point, [1.0, 0.0, 0.0]).unwrap();
    let st = GeodesicState {
        point,
        velocity: v,
        affine_param: 0.0,
    };
    let c = constants_from_state(&p, &st.point, &st.velocity).unwrap();
    assert!(c.l.abs() < 1e-12 && c.k.abs() < 1e-12);
    let tr = integrate(&p, &st, 1e4, 1e-10).unwrap();
    assert_eq!(tr.termination, Termination::Escape);
    assert!(tr.samples.windows(2).all(|w| w[1].point.r > w[0].point.r));
    let ext = radial_extent(&p, &c, &tr).unwrap();
    assert_eq!(ext.r2, None);
    assert_eq!(ext.r1, Some(3.0));
}
