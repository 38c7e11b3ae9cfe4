use approx::assert_relative_eq;
use ibmagnet::{
    amplification_ratio, build_design, fit_power_law, optimize_tangent_points, reduction_ratio,
    simulate_pull, ClampScenario, Converter, ForceCurve, MagneticSpringPair, PowerLawCurve,
    PullMode, SampledCurve, UnitConfig,
};
use proptest::prelude::*;

fn power_law() -> impl Strategy<Value = PowerLawCurve> {
    (0.5f64..200.0, 0.3f64..5.0, 1.0f64..4.0)
        .prop_map(|(a, c, p)| PowerLawCurve::new(a, c, p).unwrap())
}

/// Strictly increasing points in `[0, x_max)` with a minimum spacing.
fn tangent_points(
    n: std::ops::RangeInclusive<usize>,
    x_max: f64,
) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_filter_map("too close", move |mut u| {
        u.sort_by(f64::total_cmp);
        let pts: Vec<f64> = u.iter().map(|v| v * x_max * 0.999).collect();
        pts.windows(2)
            .all(|w| w[1] - w[0] > 1e-3 * x_max)
            .then_some(pts)
    })
}

fn pair(scale: f64) -> MagneticSpringPair {
    let a: ForceCurve = PowerLawCurve::through_points((0.0, 8.4), (7.5, 0.5), 2.0)
        .unwrap()
        .into();
    let r = a.scaled(scale).unwrap();
    MagneticSpringPair::new(a, r, 7.5, 0.1, 0.43).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slope_is_the_central_difference(c in power_law(), x in 1e-3f64..20.0) {
        let curve: ForceCurve = c.into();
        let h = 1e-4;
        let fd = (curve.eval_force(x + h).unwrap() - curve.eval_force(x - h).unwrap()) / (2.0 * h);
        assert_relative_eq!(curve.eval_slope(x).unwrap(), fd, max_relative = 1e-6);
    }

    #[test]
    fn work_is_additive(c in power_law(), a in 0.0f64..5.0, d1 in 0.0f64..5.0, d2 in 0.0f64..5.0) {
        let curve: ForceCurve = c.into();
        let (b, e) = (a + d1, a + d1 + d2);
        let whole = curve.work_integral(a, e).unwrap();
        let parts = curve.work_integral(a, b).unwrap() + curve.work_integral(b, e).unwrap();
        assert_relative_eq!(whole, parts, max_relative = 1e-9, epsilon = 1e-300);
    }

    #[test]
    fn sampled_work_is_additive(fs in prop::collection::vec(0.0f64..10.0, 4..10), s in 0.05f64..0.95) {
        let mut f = fs.clone();
        f.sort_by(|a, b| b.total_cmp(a));
        let pts: Vec<(f64, f64)> = f.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect();
        let curve: ForceCurve = SampledCurve::new(&pts).unwrap().into();
        let end = (pts.len() - 1) as f64;
        let mid = s * end;
        let whole = curve.work_integral(0.0, end).unwrap();
        let parts = curve.work_integral(0.0, mid).unwrap() + curve.work_integral(mid, end).unwrap();
        assert_relative_eq!(whole, parts, max_relative = 1e-9, epsilon = 1e-12);
    }

    #[test]
    fn fit_recovers_generating_curve(c in power_law()) {
        let samples: Vec<(f64, f64)> = (0..12).map(|i| {
            let x = 0.75 * i as f64;
            (x, c.amplitude() / (x + c.offset()).powf(c.exponent()))
        }).collect();
        let fit = fit_power_law(&samples, None).unwrap();
        assert_relative_eq!(fit.amplitude(), c.amplitude(), max_relative = 1e-6);
        assert_relative_eq!(fit.offset(), c.offset(), max_relative = 1e-6);
        assert_relative_eq!(fit.exponent(), c.exponent(), max_relative = 1e-6);
    }

    #[test]
    fn pchip_never_overshoots(fs in prop::collection::vec(0.0f64..10.0, 3..12), t in 0.0f64..1.0) {
        let mut f = fs.clone();
        f.sort_by(|a, b| b.total_cmp(a));
        let pts: Vec<(f64, f64)> = f.iter().enumerate().map(|(i, &v)| (i as f64 * 0.7, v)).collect();
        let curve: ForceCurve = SampledCurve::new(&pts).unwrap().into();
        let x = t * pts.last().unwrap().0;
        let i = ((x / 0.7).floor() as usize).min(pts.len() - 2);
        let y = curve.eval_force(x).unwrap();
        prop_assert!(y <= pts[i].1 + 1e-12 && y >= pts[i + 1].1 - 1e-12);
    }

    #[test]
    fn designs_stay_under_the_curve(c in power_law(), pts in tangent_points(1..=6, 10.0)) {
        let curve: ForceCurve = c.into();
        let d = build_design(&curve, &pts, 10.0).unwrap();
        for i in 0..=10_000 {
            let x = 10.0 * i as f64 / 10_000.0;
            prop_assert!(d.force(x) <= curve.eval_force(x).unwrap() + 1e-9);
        }
    }

    #[test]
    fn stiffness_telescopes(c in power_law(), pts in tangent_points(1..=6, 10.0)) {
        let curve: ForceCurve = c.into();
        let d = build_design(&curve, &pts, 10.0).unwrap();
        for (k, t) in d.segment_stiffness().iter().zip(&d.tangents) {
            assert_relative_eq!(*k, t.stiffness, max_relative = 1e-12);
        }
    }

    #[test]
    fn break_points_are_bracketed(c in power_law(), pts in tangent_points(2..=6, 10.0)) {
        let curve: ForceCurve = c.into();
        let d = build_design(&curve, &pts, 10.0).unwrap();
        for (b, w) in d.break_points.iter().zip(d.tangents.windows(2)) {
            prop_assert!(*b > w[0].point && *b < w[1].point);
        }
    }

    #[test]
    fn swapping_curves_negates_internal_force(s in 0.5f64..2.0, x in 0.0f64..7.5) {
        let p = pair(s);
        prop_assert_eq!(p.swapped().internal_force(x).unwrap(), -p.internal_force(x).unwrap());
    }

    #[test]
    fn peak_control_force_is_the_grid_maximum(s in 0.5f64..2.0) {
        let p = pair(s);
        let prof = p.deviation_profile(1001).unwrap();
        let peak = p.peak_control_force(0.0);
        let max_abs = prof.samples.iter().map(|q| q.deviation).fold(0.0, f64::max);
        let max_signed = prof.samples.iter().map(|q| q.internal_force).fold(f64::MIN, f64::max);
        prop_assert!(peak.total <= max_abs);
        prop_assert_eq!(peak.total, max_signed);
    }

    #[test]
    fn ratios_are_scale_invariant(a in 0.0f64..100.0, b in 0.1f64..100.0, l in 1e-3f64..1e3) {
        assert_relative_eq!(reduction_ratio(a * l, b * l).unwrap(), reduction_ratio(a, b).unwrap(), max_relative = 1e-12, epsilon = 1e-300);
        let unit = UnitConfig::from_pair(pair(1.1), 0.0).unwrap();
        let s1 = ClampScenario::new(unit.clone(), 0.0, 0.0, b, a, 0.0).unwrap();
        let s2 = ClampScenario::new(unit, 0.0, 0.0, b * l, a * l, 0.0).unwrap();
        assert_relative_eq!(amplification_ratio(&s1).unwrap(), amplification_ratio(&s2).unwrap(), max_relative = 1e-12, epsilon = 1e-300);
    }

    #[test]
    fn converter_reproduces_the_balance_profile(s in 0.5f64..2.0, grid in 2usize..400) {
        let p = pair(s);
        let conv = Converter::from_pair(&p);
        let a = conv.profile(p.stroke, grid).unwrap();
        let b = p.deviation_profile(grid).unwrap();
        for ((x, f), q) in a.iter().zip(&b.samples) {
            prop_assert_eq!(*x, q.x);
            prop_assert_eq!(*f, q.internal_force);
        }
    }

    #[test]
    fn pull_test_invariants(s in 0.9f64..1.9, step in 0.01f64..0.5) {
        let cfg = UnitConfig::from_pair(pair(s), 0.05).unwrap();
        let frame = simulate_pull(&cfg, PullMode::Frame, 15.0, step).unwrap();
        let rod = simulate_pull(&cfg, PullMode::Rod, 15.0, step).unwrap();
        let contact = cfg.pair.attraction.eval_force(0.0).unwrap();
        prop_assert_eq!(frame.samples[0].force(), contact + cfg.suspended_weight());
        prop_assert_eq!(frame.plateau, cfg.suspended_weight());
        prop_assert_eq!(rod.plateau, cfg.suspended_weight());
        let peak = cfg.pair.peak_control_force(0.0).net;
        let slope = cfg.pair.repulsion.eval_slope(0.0).unwrap() - cfg.pair.attraction.eval_slope(0.0).unwrap();
        prop_assert!((rod.peak_net - peak).abs() <= slope.abs() * step + 1e-12);
        // Spontaneous reduction: the rod is never harder to pull than the frame.
        for (r, f) in rod.samples.iter().zip(&frame.samples).take_while(|(r, _)| r.displacement < cfg.stroke) {
            prop_assert_eq!(r.displacement, f.displacement);
            prop_assert!(r.force() <= f.force());
        }
    }
}

#[test]
fn more_springs_never_lose_more_energy() {
    let curve: ForceCurve = PowerLawCurve::through_points((0.0, 8.4), (7.5, 0.5), 2.0)
        .unwrap()
        .into();
    let mut prev = f64::INFINITY;
    for n in 1..=6 {
        let d = optimize_tangent_points(&curve, n, 7.5, 0).unwrap();
        assert!(d.delta_e <= prev + 1e-9, "n = {n}");
        prev = d.delta_e;
    }
}

#[test]
fn generic_over_f32() {
    let c: ForceCurve<f32> = PowerLawCurve::through_points((0.0f32, 8.4), (7.5, 0.5), 2.0)
        .unwrap()
        .into();
    let d = build_design(&c, &[1.0f32, 4.0], 7.5).unwrap();
    assert!((d.delta_e - 1.902_065_3).abs() < 1e-3);
    let p = MagneticSpringPair::ideal(c, 7.5f32, 0.0, 0.0).unwrap();
    assert_eq!(p.peak_control_force(0.25).total, 0.25);
}
