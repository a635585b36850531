use nilgrade::event::{EndpointEvent, HalfSpace, Relation};
use nilgrade::lie::{build_blocks, build_flag, kolmogorov};
use nilgrade::rate::graded::{graded_rate, Bound, DriftMode};
use nilgrade::rate::{
    generic_min_energy, kolmogorov_problem, kolmogorov_rate, rkhs_minimize, solvable_rate,
    FieldSystem, LinearFunctional, MinimizerConfig, PiecewisePoly, RateProblem, SolvableSystem,
};
use num_rational::Rational64;
use proptest::prelude::*;

fn integral_at_least(t: f64) -> RateProblem<f64> {
    RateProblem::new(1)
        .at_least(LinearFunctional::time_integral(1, 1).unwrap(), t)
        .unwrap()
}

fn value(p: &RateProblem<f64>) -> f64 {
    rkhs_minimize(p).unwrap().value
}

#[test]
fn exact_and_float_solvers_agree() {
    let q = RateProblem::<Rational64>::new(1)
        .equal(
            LinearFunctional::endpoint(1, 1).unwrap(),
            Rational64::new(1, 2),
        )
        .unwrap()
        .at_least(
            LinearFunctional::time_integral(1, 1).unwrap(),
            Rational64::from_integer(1),
        )
        .unwrap();
    let f = RateProblem::<f64>::new(1)
        .equal(LinearFunctional::endpoint(1, 1).unwrap(), 0.5)
        .unwrap()
        .at_least(LinearFunctional::time_integral(1, 1).unwrap(), 1.0)
        .unwrap();
    let (a, b) = (rkhs_minimize(&q).unwrap(), rkhs_minimize(&f).unwrap());
    let exact = *a.value.numer() as f64 / *a.value.denom() as f64;
    assert!((exact - b.value).abs() < 1e-12);
}

#[test]
fn dropping_an_inactive_constraint() {
    let full = integral_at_least(1.0)
        .at_least(LinearFunctional::endpoint(1, 1).unwrap(), -5.0)
        .unwrap();
    let r = rkhs_minimize(&full).unwrap();
    assert_eq!(r.active, vec![true, false]);
    assert!((r.value - value(&integral_at_least(1.0))).abs() < 1e-12);
}

#[test]
fn two_channel_problem_splits_energy() {
    // h¹(1) = 1 and h²(1) = 2 are independent: energy ½(1 + 4).
    let p = RateProblem::new(2)
        .equal(LinearFunctional::endpoint(2, 1).unwrap(), 1.0)
        .unwrap()
        .equal(LinearFunctional::endpoint(2, 2).unwrap(), 2.0)
        .unwrap();
    assert!((value(&p) - 2.5).abs() < 1e-12);
}

#[test]
fn piecewise_kernel_with_breakpoint() {
    // h(1/2) ≥ 1 costs ½·1²/(1/2) = 1.
    let k = PiecewisePoly::new(vec![0.0, 0.5, 1.0], vec![vec![1.0], vec![0.0]]).unwrap();
    let p = RateProblem::new(1)
        .at_least(LinearFunctional::on_channel(1, 1, k).unwrap(), 1.0)
        .unwrap();
    assert!((value(&p) - 1.0).abs() < 1e-12);
}

#[test]
fn generic_minimizer_does_not_undercut_closed_forms() {
    let alg = kolmogorov::<f64>();
    let sys = FieldSystem::new(&alg, vec![0.0, 0.0]).unwrap();
    let cfg = MinimizerConfig::default();
    for (t, eps) in [(1.0, 1.0), (0.5, 0.8)] {
        let ev =
            EndpointEvent::unweighted(2, vec![vec![HalfSpace::coordinate(2, 1, Relation::Ge, t)]])
                .unwrap();
        let g = generic_min_energy(&sys, &ev, eps, &cfg).unwrap().value;
        let exact = value(&integral_at_least(t / eps.powi(3)));
        assert!(g >= exact - 1e-9 && g <= exact * 1.01, "{g} vs {exact}");
    }
    let ev = EndpointEvent::unweighted(
        2,
        vec![vec![HalfSpace::coordinate(2, 1, Relation::Ge, 1.0)]],
    )
    .unwrap();
    let g = generic_min_energy(&SolvableSystem, &ev, 0.5, &cfg)
        .unwrap()
        .value;
    let exact = solvable_rate(1.0, 0.5).unwrap().value;
    assert!(g >= exact - 1e-9 && g <= exact * 1.02, "{g} vs {exact}");
}

#[test]
fn graded_rates_exact_and_float_agree() {
    let ev_q = EndpointEvent::unweighted(
        3,
        vec![vec![HalfSpace::coordinate(
            3,
            2,
            Relation::Gt,
            Rational64::from_integer(1),
        )]],
    )
    .unwrap();
    let ev_f = EndpointEvent::unweighted(
        3,
        vec![vec![HalfSpace::coordinate(3, 2, Relation::Gt, 1.0)]],
    )
    .unwrap();
    let (aq, af) = (kolmogorov::<Rational64>(), kolmogorov::<f64>());
    let (fq, ff) = (build_flag(&aq, 2).unwrap(), build_flag(&af, 2).unwrap());
    let (bq, bf) = (build_blocks(&fq, 2).unwrap(), build_blocks(&ff, 2).unwrap());
    for mode in [DriftMode::Excluded, DriftMode::Transported] {
        let x = graded_rate(&aq, &fq, &bq, &ev_q, mode, Bound::Upper)
            .unwrap()
            .unwrap()
            .value;
        let y = graded_rate(&af, &ff, &bf, &ev_f, mode, Bound::Upper)
            .unwrap()
            .unwrap()
            .value;
        assert!((*x.numer() as f64 / *x.denom() as f64 - y).abs() < 1e-10);
    }
}

#[test]
fn graded_rate_of_an_unreachable_event_is_infinite() {
    // x³ > 1 and x³ < −1 together.
    let alg = kolmogorov::<Rational64>();
    let f = build_flag(&alg, 2).unwrap();
    let b = build_blocks(&f, 2).unwrap();
    let one = Rational64::from_integer(1);
    let ev = EndpointEvent::unweighted(
        3,
        vec![vec![
            HalfSpace::coordinate(3, 2, Relation::Gt, one),
            HalfSpace::new(
                vec![
                    Rational64::from_integer(0),
                    Rational64::from_integer(0),
                    -one,
                ],
                Relation::Gt,
                one,
            ),
        ]],
    )
    .unwrap();
    assert!(
        graded_rate(&alg, &f, &b, &ev, DriftMode::Excluded, Bound::Upper)
            .unwrap()
            .is_none()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity(x1 in -3.0f64..3.0, x2 in -3.0f64..3.0, lambda in 0.1f64..4.0) {
        let p = kolmogorov_problem(x1, x2, 1.0).unwrap();
        let v = value(&p);
        let w = value(&p.scale_targets(lambda));
        prop_assert!((w - lambda * lambda * v).abs() <= 1e-9 * w.abs().max(1.0));
    }

    #[test]
    fn monotone_in_threshold(a in 0.0f64..3.0, d in 0.01f64..2.0) {
        prop_assert!(value(&integral_at_least(a + d)) > value(&integral_at_least(a)) - 1e-12);
    }

    #[test]
    fn convex_in_targets(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0) {
        let v = |x1: f64, x2: f64| kolmogorov_rate(x1, x2, 1.0).value;
        let mid = v((a + c) / 2.0, (b + d) / 2.0);
        prop_assert!(mid <= (v(a, b) + v(c, d)) / 2.0 + 1e-9);
    }

    #[test]
    fn closed_form_matches_solver(x1 in -2.0f64..2.0, x2 in -2.0f64..2.0, eps in 0.5f64..2.0) {
        let r = rkhs_minimize(&kolmogorov_problem(x1, x2, eps).unwrap()).unwrap();
        let c = kolmogorov_rate(x1, x2, eps);
        prop_assert!((r.value - c.value).abs() <= 1e-10 * c.value.max(1.0));
        prop_assert!(r.h_distance(&c) <= 1e-9 * (x1.abs() / eps + x2.abs() / eps.powi(3)).max(1.0));
    }

    #[test]
    fn solvable_scaling_law(a in 0.5f64..50.0, eps in 0.05f64..0.9) {
        prop_assume!(a / (eps * eps) > 1.0 + 1e-9);
        let v = solvable_rate(a, eps).unwrap().value * eps * eps;
        let w = solvable_rate(a / (eps * eps), 1.0).unwrap().value;
        prop_assert!((v - w).abs() <= 1e-9 * w.max(1.0));
    }
}
