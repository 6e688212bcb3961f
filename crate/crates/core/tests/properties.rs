use dephase::dephasing::{
    fidelity_exact, pair_histogram, pair_histogram_with, ratio_analytic, ratio_fit, script_b,
    script_b_of_state, short_time_grid, DecayKernel, HistogramBackend, Ratio,
};
use dephase::ensembles::{deviation_stats, sample_state, EnsembleFamily, EnsembleSpec};
use dephase::oracle::brute_force_fidelity;
use dephase::states::{ProductState, SuperposedState};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

/// Random state on `n ≤ 8` qubits with distinct bases and complex amplitudes.
fn arb_state() -> impl Strategy<Value = SuperposedState> {
    (1usize..=8)
        .prop_flat_map(|n| {
            let size = 1u64 << n;
            (
                Just(n),
                proptest::collection::btree_set(0..size, 1..=(size as usize).min(40)),
            )
        })
        .prop_flat_map(|(n, bases)| {
            let m = bases.len();
            (
                Just(n),
                Just(bases),
                proptest::collection::vec((0.05f64..1.0, -3.2f64..3.2), m),
            )
        })
        .prop_map(|(n, bases, amps)| {
            let terms = bases
                .into_iter()
                .zip(amps)
                .map(|(b, (r, phi))| (C64::from_polar(r, phi), ProductState::new(n, b).unwrap()))
                .collect();
            SuperposedState::normalized(terms).unwrap()
        })
}

fn gauss() -> DecayKernel {
    DecayKernel::gaussian(1.0).unwrap()
}

const TIMES: [f64; 6] = [0.0, 0.03, 0.1, 0.25, 0.6, 2.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn histogram_is_normalized(x in arb_state()) {
        let h = pair_histogram(&x);
        prop_assert!((h.total() - 1.0).abs() < 1e-12);
        prop_assert!(h.entries().all(|(_, w)| w >= 0.0));
    }

    #[test]
    fn backends_and_routes_agree(x in arb_state()) {
        let a = pair_histogram_with(&x, HistogramBackend::Pairs).unwrap();
        let b = pair_histogram_with(&x, HistogramBackend::Walsh).unwrap();
        for j in 0..=x.n() {
            prop_assert!((a.weight(j) - b.weight(j)).abs() < 1e-14);
        }
        prop_assert!((script_b(&a) - script_b_of_state(&x)).abs() < 1e-12);
    }

    #[test]
    fn phases_do_not_matter(x in arb_state(), seed in any::<u64>()) {
        let phases: Vec<f64> = (0..x.len())
            .map(|r| ((seed.wrapping_mul(r as u64 + 1) % 6283) as f64) * 1e-3)
            .collect();
        let y = x.with_phases(&phases).unwrap();
        let (a, b) = (pair_histogram(&x), pair_histogram(&y));
        prop_assert!((a.diag() - b.diag()).abs() < 1e-14);
        for j in 0..=x.n() {
            prop_assert!((a.weight(j) - b.weight(j)).abs() < 1e-14);
        }
        let (ra, rb) = (ratio_analytic(&x, &gauss()).ratio, ratio_analytic(&y, &gauss()).ratio);
        match (ra.value(), rb.value()) {
            (Some(u), Some(v)) => prop_assert!((u - v).abs() < 1e-12 * u),
            (u, v) => prop_assert_eq!(u, v),
        }
        let fa = fidelity_exact(&x, &TIMES, &[gauss()]).unwrap();
        let fb = fidelity_exact(&y, &TIMES, &[gauss()]).unwrap();
        for (u, v) in fa.values.iter().zip(&fb.values) {
            prop_assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn qubit_permutations_do_not_matter(x in arb_state(), shift in 0usize..8) {
        let n = x.n();
        // a rotation composed with a reversal
        let perm: Vec<usize> = (0..n).map(|j| n - 1 - (j + shift) % n).collect();
        let y = x.permuted(&perm).unwrap();
        let (a, b) = (pair_histogram(&x), pair_histogram(&y));
        prop_assert_eq!(a.diag(), b.diag());
        for j in 0..=n {
            prop_assert!((a.weight(j) - b.weight(j)).abs() < 1e-15);
        }
    }

    #[test]
    fn curve_is_monotone_above_floor(x in arb_state(), nu in 0.5f64..7.0) {
        let k = DecayKernel::new(nu, 1.0).unwrap();
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
        let c = fidelity_exact(&x, &times, &[k]).unwrap();
        let floor = pair_histogram(&x).diag().sqrt();
        prop_assert!((c.values[0] - 1.0).abs() < 1e-15);
        for w in c.values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-15);
        }
        prop_assert!(c.values.iter().all(|&f| f >= floor - 1e-15 && f <= 1.0));
    }

    #[test]
    fn brute_force_matches_engine(x in arb_state(), nu in 0.5f64..7.0) {
        let k = DecayKernel::new(nu, 0.8).unwrap();
        let c = fidelity_exact(&x, &TIMES, &[k]).unwrap();
        for (t, f) in c.points() {
            prop_assert!((brute_force_fidelity(&x, t, &k).unwrap() - f).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_is_independent_of_time_unit(x in arb_state(), t1 in 0.01f64..100.0, nu in 0.5f64..7.0) {
        let a = ratio_analytic(&x, &DecayKernel::new(nu, 1.0).unwrap()).ratio;
        let b = ratio_analytic(&x, &DecayKernel::new(nu, t1).unwrap()).ratio;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn equal_population_envelope(n in 1usize..=10, picks in proptest::collection::btree_set(0u64..1024, 2..64)) {
        let bases: Vec<u64> = picks.into_iter().map(|b| b & ((1 << n) - 1)).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        prop_assume!(bases.len() >= 2);
        let a = C64::new(1.0 / (bases.len() as f64).sqrt(), 0.0);
        let x = SuperposedState::new(
            bases.iter().map(|&b| (a, ProductState::new(n, b).unwrap())).collect(),
        ).unwrap();
        let r = ratio_analytic(&x, &gauss()).ratio.value().unwrap();
        prop_assert!(r >= 0.5 / (n as f64).sqrt() && r <= 1.0 + 1e-12, "ratio {}", r);
    }

    #[test]
    fn text_round_trip(x in arb_state()) {
        let y = SuperposedState::parse_text(&x.to_text()).unwrap();
        prop_assert_eq!(x.len(), y.len());
        for ((a, p), (b, q)) in x.terms().iter().zip(y.terms()) {
            prop_assert_eq!(p, q);
            prop_assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn sampled_states_are_normalized_and_reproducible(
        family in arb_family(),
        seed in any::<u64>(),
        index in 0usize..1000,
    ) {
        let spec = EnsembleSpec::new(family, 1000, seed);
        let x = sample_state(&spec, index).unwrap();
        let norm: f64 = x.populations().iter().sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert_eq!(x, sample_state(&spec, index).unwrap());
    }
}

fn arb_family() -> impl Strategy<Value = EnsembleFamily> {
    prop_oneof![
        (2usize..=12).prop_flat_map(|n| (Just(n), 1..n))
            .prop_map(|(n, k)| EnsembleFamily::RandomInManifold { n, k }),
        (2usize..=40).prop_map(|n| EnsembleFamily::RandomCrossManifold { n }),
        (2usize..=40).prop_map(|n| EnsembleFamily::LadderRandomWeights { n }),
        (1usize..=10).prop_map(|n| EnsembleFamily::FullBasisRandomWeights { n }),
    ]
}

#[test]
fn constructors_are_normalized() {
    let mut states = vec![
        SuperposedState::ghz(1).unwrap(),
        SuperposedState::ghz(30).unwrap(),
        SuperposedState::w(9).unwrap(),
        SuperposedState::w_generalized(10, 4).unwrap(),
        SuperposedState::ladder(20).unwrap(),
        SuperposedState::full_superposition(12).unwrap(),
        SuperposedState::two_state(6, 3, C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap(),
    ];
    states.push(SuperposedState::product(ProductState::all_down(5).unwrap()));
    for x in states {
        let norm: f64 = x.populations().iter().sum();
        assert!((norm - 1.0).abs() < 1e-12, "{norm}");
    }
}

#[test]
fn ensemble_statistics_are_reproducible() {
    let spec = EnsembleSpec::new(EnsembleFamily::RandomInManifold { n: 9, k: 3 }, 40, 5);
    assert_eq!(deviation_stats(&spec, 2.0).unwrap(), deviation_stats(&spec, 2.0).unwrap());
    let other = EnsembleSpec::new(EnsembleFamily::RandomInManifold { n: 9, k: 3 }, 40, 6);
    assert_ne!(
        deviation_stats(&spec, 2.0).unwrap().mean,
        deviation_stats(&other, 2.0).unwrap().mean
    );
}

#[test]
fn two_channels_add_short_time_exponents() {
    // C_combined = C_ib + C_ns, read off by fitting each curve
    let ib = DecayKernel::gaussian(1.0).unwrap();
    let ns = DecayKernel::gaussian(2.5).unwrap();
    for x in [
        SuperposedState::w(5).unwrap(),
        SuperposedState::ladder(6).unwrap(),
        SuperposedState::ghz(3).unwrap(),
    ] {
        let r_ib = ratio_analytic(&x, &ib).ratio.value().unwrap();
        let c_ib = 1.0 / (r_ib * ib.t_single()).powi(2);
        let c_ns = 1.0 / (r_ib * ns.t_single()).powi(2);
        let combined_t = (c_ib + c_ns).powf(-0.5);
        let grid = short_time_grid(combined_t, &ib, 0.8, 64);
        let curve = fidelity_exact(&x, &grid, &[ib, ns]).unwrap();
        let fitted = ratio_fit(&curve, 2.0, 1.0).unwrap().ratio.value().unwrap();
        assert!((fitted - combined_t).abs() < 0.01 * combined_t, "{fitted} vs {combined_t}");
    }
}

#[test]
fn two_channel_curve_matches_explicit_pair_sum() {
    let ib = DecayKernel::gaussian(1.0).unwrap();
    let ns = DecayKernel::gaussian(1.7).unwrap();
    let x = SuperposedState::ladder(5).unwrap();
    let c = fidelity_exact(&x, &TIMES, &[ib, ns]).unwrap();
    let h = pair_histogram(&x);
    for (t, f) in c.points() {
        let s: f64 = h
            .entries()
            .map(|(j, w)| w * (-4.0 * j as f64 * (t * t + t * t / (1.7 * 1.7))).exp())
            .sum();
        assert!(((h.diag() + 2.0 * s).sqrt() - f).abs() < 1e-14);
    }
}

#[test]
fn fitted_ratio_for_product_state_is_no_decoherence() {
    let x = SuperposedState::product(ProductState::all_up(4).unwrap());
    let times: Vec<f64> = (0..32).map(|i| i as f64 * 0.01).collect();
    let c = fidelity_exact(&x, &times, &[gauss()]).unwrap();
    assert_eq!(ratio_fit(&c, 2.0, 1.0).unwrap().ratio, Ratio::NoDecoherence);
}
