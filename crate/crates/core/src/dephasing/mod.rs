//! Pair statistics, decay kernels, fidelity curves and scaling ratios.

mod closed_form;
mod curve;
mod histogram;
mod kernel;
mod ratio;

pub use closed_form::{closed_form_ratio, ClosedForm, StateClass};
pub use curve::{
    fidelity_exact, fidelity_from_histogram, ratio_fit, short_time_grid, FidelityCurve,
    FIT_MIN_SAMPLES, FIT_WINDOW_MIN_F,
};
pub use histogram::{
    hamming, mean_pair_distance, pair_histogram, pair_histogram_closed_form, pair_histogram_with,
    script_b, script_b_of_state, HistogramBackend, PairHistogram,
};
pub use kernel::{pair_kernel, DecayKernel};
pub use ratio::{decoherence_time, ratio_analytic, Method, Ratio, ScalingResult};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{ProductState, SuperposedState};
    use num_complex::Complex64 as C64;

    fn gauss() -> DecayKernel {
        DecayKernel::gaussian(1.0).unwrap()
    }

    fn finite(r: &ScalingResult) -> f64 {
        r.ratio.value().expect("finite ratio")
    }

    fn closed(class: StateClass, nu: f64) -> Ratio {
        closed_form_ratio(&class, nu).unwrap().exact().unwrap().ratio
    }

    #[test]
    fn analytic_ratio_examples() {
        let r = ratio_analytic(&SuperposedState::ghz(9).unwrap(), &gauss());
        assert!((finite(&r) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.method, Method::AnalyticB);

        let r = ratio_analytic(&SuperposedState::w(3).unwrap(), &gauss());
        assert!((finite(&r) - (3.0f64 / 8.0).sqrt()).abs() < 1e-12);

        let echo = DecayKernel::new(4.0, 1.0).unwrap();
        let r = ratio_analytic(&SuperposedState::ghz(16).unwrap(), &echo);
        assert!((finite(&r) - 0.5).abs() < 1e-12);

        let single = SuperposedState::product(ProductState::all_up(5).unwrap());
        assert_eq!(ratio_analytic(&single, &gauss()).ratio, Ratio::NoDecoherence);
    }

    #[test]
    fn single_qubit_ratio_is_one_for_every_nu() {
        let g1 = SuperposedState::ghz(1).unwrap();
        for nu in [1.0, 2.0, 3.5, 4.0, 6.0] {
            let k = DecayKernel::new(nu, 2.5).unwrap();
            assert!((finite(&ratio_analytic(&g1, &k)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_state_examples() {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = SuperposedState::two_state(5, 2, h, h).unwrap();
        assert!((finite(&ratio_analytic(&s, &gauss())) - 0.5f64.sqrt()).abs() < 1e-12);
        let s = SuperposedState::two_state(4, 1, C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert_eq!(ratio_analytic(&s, &gauss()).ratio, Ratio::NoDecoherence);
    }

    #[test]
    fn closed_form_examples() {
        let v = closed(StateClass::GeneralizedW { n: 10, k: 2 }, 2.0).value().unwrap();
        assert!((v - 0.5 * (10.0f64 / 16.0).sqrt()).abs() < 1e-15);
        assert!((v - 0.3953).abs() < 1e-4);
        assert_eq!(closed(StateClass::Ladder { n: 3 }, 2.0), Ratio::Finite(0.75));
        assert_eq!(closed(StateClass::GeneralizedW { n: 8, k: 8 }, 2.0), Ratio::NoDecoherence);
        assert_eq!(closed(StateClass::GeneralizedW { n: 8, k: 0 }, 2.0), Ratio::NoDecoherence);
        assert_eq!(closed(StateClass::Product { n: 3 }, 4.0), Ratio::NoDecoherence);
        let v = closed(StateClass::ghz(4), 1.0).value().unwrap();
        assert!((v - 0.25).abs() < 1e-12);
        let v = closed(StateClass::GeneralizedW { n: 9, k: 3 }, 2.0).value().unwrap();
        assert!((v - 0.5 * 0.5f64.sqrt()).abs() < 1e-15);

        match closed_form_ratio(&StateClass::SingleFlip { n: 5 }, 2.0).unwrap() {
            ClosedForm::Bounds { lower, upper } => {
                assert!((lower - 0.5 * (5.0f64 / 4.0).sqrt()).abs() < 1e-15);
                assert_eq!(upper, Ratio::NoDecoherence);
            }
            other => panic!("expected bounds, got {other:?}"),
        }

        assert!(closed_form_ratio(&StateClass::GeneralizedW { n: 4, k: 5 }, 2.0).is_err());
        assert!(closed_form_ratio(&StateClass::Ladder { n: 1 }, 2.0).is_err());
        assert!(closed_form_ratio(&StateClass::TwoState { n: 3, k: 4, d1_abs: 0.5 }, 2.0).is_err());
        assert!(closed_form_ratio(&StateClass::Full { n: 3 }, 0.0).is_err());
    }

    #[test]
    fn closed_form_spin_flip_symmetry() {
        for n in 2..=30 {
            for k in 0..=n {
                assert_eq!(
                    closed(StateClass::GeneralizedW { n, k }, 2.0),
                    closed(StateClass::GeneralizedW { n, k: n - k }, 2.0)
                );
            }
        }
    }

    #[test]
    fn engine_matches_closed_forms() {
        for n in 2..=16usize {
            for nu in [1.0, 2.0, 4.0, 6.0] {
                let kern = DecayKernel::new(nu, 1.0).unwrap();
                let mut classes = vec![StateClass::ghz(n), StateClass::Ladder { n }];
                classes.extend((0..=n).map(|k| StateClass::GeneralizedW { n, k }));
                classes.push(StateClass::TwoState { n, k: n / 2 + 1, d1_abs: 0.6 });
                if n <= 12 {
                    classes.push(StateClass::Full { n });
                }
                for class in classes {
                    let engine = ratio_analytic(&class.build().unwrap(), &kern).ratio;
                    let cf = closed(class, nu);
                    match (engine, cf) {
                        (Ratio::Finite(a), Ratio::Finite(b)) => {
                            assert!((a - b).abs() < 1e-12 * b, "{class:?} ν={nu}: {a} vs {b}")
                        }
                        (a, b) => assert_eq!(a, b, "{class:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn fidelity_exact_basics() {
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let w = SuperposedState::w(4).unwrap();
        let c = fidelity_exact(&w, &times, &[gauss()]).unwrap();
        assert_eq!(c.values[0], 1.0);
        let floor = pair_histogram(&w).diag().sqrt();
        for pair in c.values.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
        assert!(c.values.iter().all(|&f| f >= floor && f <= 1.0));

        let single = SuperposedState::product(ProductState::all_down(3).unwrap());
        let c = fidelity_exact(&single, &times, &[gauss()]).unwrap();
        assert!(c.values.iter().all(|&f| f == 1.0));

        let g2 = SuperposedState::ghz(2).unwrap();
        let c = fidelity_exact(&g2, &[0.0, 50.0], &[gauss()]).unwrap();
        assert!((c.values[1] - 0.5f64.sqrt()).abs() < 1e-15);

        assert!(fidelity_exact(&g2, &times, &[]).is_err());
        assert!(fidelity_exact(&g2, &[], &[gauss()]).is_err());
        assert!(fidelity_exact(&g2, &[0.2, 0.1], &[gauss()]).is_err());
        assert!(fidelity_exact(&g2, &[-0.1], &[gauss()]).is_err());
    }

    #[test]
    fn fidelity_ghz_one_is_single_qubit_decay() {
        // F² = ½ + ½e^{−4(t/T)²}; F ≈ exp{−(t/T)²} at short times
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
        let c = fidelity_exact(&SuperposedState::ghz(1).unwrap(), &times, &[gauss()]).unwrap();
        for (t, f) in c.points() {
            let exact = (0.5 + 0.5 * (-4.0 * t * t).exp()).sqrt();
            assert!((f - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn fit_examples() {
        let g = gauss();
        let ghz4 = SuperposedState::ghz(4).unwrap();
        let grid = short_time_grid(0.5, &g, 0.8, 64);
        let c = fidelity_exact(&ghz4, &grid, &[g]).unwrap();
        let r = ratio_fit(&c, 2.0, 1.0).unwrap();
        assert_eq!(r.method, Method::Fit);
        assert!((finite(&r) - 0.5).abs() < 0.005);

        let l10 = SuperposedState::ladder(10).unwrap();
        let target = (30.0f64 / 198.0).sqrt();
        let grid = short_time_grid(target, &g, 0.8, 64);
        let r = ratio_fit(&fidelity_exact(&l10, &grid, &[g]).unwrap(), 2.0, 1.0).unwrap();
        assert!((finite(&r) - target).abs() < 0.02 * target);

        let flat = FidelityCurve {
            n: 3,
            times: grid.clone(),
            values: vec![1.0; grid.len()],
        };
        assert_eq!(ratio_fit(&flat, 2.0, 1.0).unwrap().ratio, Ratio::NoDecoherence);
    }

    #[test]
    fn fit_errors() {
        let times: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut values: Vec<f64> = times.iter().map(|t| (-t * t).exp()).collect();
        let curve = FidelityCurve { n: 1, times: times.clone(), values: values.clone() };
        // only t=0 has F ≥ 0.9
        assert!(matches!(ratio_fit(&curve, 2.0, 1.0), Err(crate::Error::Fit(_))));
        values[5] = 0.99;
        let curve = FidelityCurve { n: 1, times, values };
        assert!(matches!(ratio_fit(&curve, 2.0, 1.0), Err(crate::Error::Fit(_))));
    }

    #[test]
    fn scaling_result_json() {
        let r = ScalingResult::new(4, 2.0, Ratio::Finite(0.5), Method::ClosedForm).with_case("D", Some(2));
        assert_eq!(
            r.to_json(),
            r#"{"n":4,"k":2,"case":"D","nu":2.0,"ratio":0.5,"method":"closed_form"}"#
        );
        let back: ScalingResult = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let r = ScalingResult::new(3, 1.0, Ratio::NoDecoherence, Method::AnalyticB).with_case("A", None);
        assert_eq!(
            r.to_json(),
            r#"{"n":3,"case":"A","nu":1.0,"ratio":"no_decoherence","method":"analytic_b"}"#
        );
        let back: ScalingResult = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn curve_csv() {
        let c = FidelityCurve { n: 1, times: vec![0.0, 0.5], values: vec![1.0, 0.75] };
        assert_eq!(c.to_csv(), "t,F\n0,1\n0.5,0.75\n");
    }
}
