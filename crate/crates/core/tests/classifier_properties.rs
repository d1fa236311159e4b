use kerrlab::classifier::{classify, Branch};
use kerrlab::constants::constants_from_state;
use kerrlab::potentials::{radial_poly, PolarPotential};
use kerrlab::selftest::{random_negative_carter, random_null_state};
use kerrlab::spherical::{existence_window, spherical_orbit};
use kerrlab::{KerrParams, MotionConstants};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params_from(ratio: f64, m: f64) -> KerrParams {
    KerrParams::new(ratio * m, m).unwrap()
}

fn random_constants(p: &KerrParams, seed: u64) -> MotionConstants {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = p.m();
    let st = random_null_state(p, &mut rng, -3.0 * m, 6.0 * m);
    constants_from_state(p, &st.point, &st.velocity).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn branch_is_invariant_under_tangent_rescaling(
        ratio in prop_oneof![0.05f64..0.99, -0.99f64..-0.05],
        m in 0.5f64..10.0,
        seed in any::<u64>(),
        c in 1e-3f64..1e3,
    ) {
        let p = params_from(ratio, m);
        let c0 = random_constants(&p, seed);
        let v0 = classify(&p, &c0, None).unwrap();
        let v1 = classify(&p, &c0.scaled(c), None).unwrap();
        prop_assert_eq!(v0.branch, v1.branch);
        prop_assert_eq!(v0.reason_codes, v1.reason_codes);
    }

    #[test]
    fn negative_carter_branch_is_scale_invariant(
        ratio in 0.05f64..0.99,
        seed in any::<u64>(),
        c in 1e-3f64..1e3,
    ) {
        let p = params_from(ratio, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c0 = random_negative_carter(&p, &mut rng);
        let v0 = classify(&p, &c0, None).unwrap();
        let v1 = classify(&p, &c0.scaled(c), None).unwrap();
        prop_assert_eq!(v0.branch, Branch::NegativeCarterOscillating);
        prop_assert_eq!(v1.branch, Branch::NegativeCarterOscillating);
    }

    #[test]
    fn potentials_are_non_negative_at_the_base_point(
        ratio in 0.05f64..0.99,
        m in 0.5f64..10.0,
        seed in any::<u64>(),
    ) {
        let p = params_from(ratio, m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = random_null_state(&p, &mut rng, -3.0 * m, 6.0 * m);
        let c = constants_from_state(&p, &st.point, &st.velocity).unwrap();
        let (r, th) = (st.point.r, st.point.theta);
        let rp = radial_poly(&c, &p);
        let r_scale = rp.coeffs.iter().fold(0.0, |acc, x| acc * r.abs() + x.abs());
        prop_assert!(rp.eval(r) >= -1e-10 * r_scale, "R = {} (scale {})", rp.eval(r), r_scale);
        let a2 = p.a() * p.a();
        let t_scale = c.carter_q.abs() + a2 * c.e * c.e + c.l * c.l / th.sin().powi(2);
        let theta = PolarPotential::new(&c, &p).eval(th);
        prop_assert!(theta >= -1e-10 * t_scale, "Θ = {} (scale {})", theta, t_scale);
    }

    #[test]
    fn oscillating_negative_carter_has_positive_time_increment(
        ratio in prop_oneof![0.02f64..0.999, -0.999f64..-0.02],
        m in 0.1f64..20.0,
        frac in 0.0f64..0.999,
        e in prop_oneof![0.05f64..5.0, -5.0f64..-0.05],
    ) {
        let p = params_from(ratio, m);
        let w = existence_window(&p);
        let r = w.r_lower + frac * (w.r_upper - w.r_lower);
        prop_assume!(r < -1e-6 * m && r > w.r_lower + 1e-9 * m);
        let orbit = spherical_orbit(&p, r).unwrap();
        let v = classify(&p, &orbit.constants(&p, e), Some(r)).unwrap();
        prop_assert_eq!(v.branch, Branch::NegativeCarterOscillating);
        let dt = v.evidence.delta_t.unwrap();
        prop_assert!(dt > 0.0, "Δt = {} at r = {}", dt, r);
        prop_assert!(v.not_closed && v.not_bounded);
    }

    #[test]
    fn positive_carter_has_negative_radial_value_at_zero(
        ratio in 0.05f64..0.99,
        e in 0.1f64..3.0,
        l in -5.0f64..5.0,
        q in 1e-3f64..50.0,
    ) {
        let p = params_from(ratio, 1.0);
        let c = MotionConstants::null(&p, e, l, q);
        let v = classify(&p, &c, None).unwrap();
        prop_assert_eq!(v.branch, Branch::PositiveCarter);
        let r0 = v.evidence.radial_at_zero;
        prop_assert!(r0 < 0.0);
        prop_assert!((r0 + p.a() * p.a() * q).abs() <= 1e-12 * p.a() * p.a() * q);
    }
}
