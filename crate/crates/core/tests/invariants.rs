use opnorm::boyd::{iterates, objective, uniform_start};
use opnorm::diagnostics::{check_irreducible, irreducible};
use opnorm::error::ReducibleWitness;
use opnorm::linalg::lq_norm;
use opnorm::mtx::{read_matrix_market, write_matrix_market, Layout};
use opnorm::oracle::maximize_multistart;
use opnorm::stats::{clt_statistic, derivative_check, eta, grothendieck_mr, statistic_from_gamma, CltModel};
use opnorm::{compute_norm, NormParams, PowerOptions, SymMatrix};
use proptest::prelude::*;

/// Symmetric matrices with entries in [0.05, 1]: positive, hence irreducible.
fn positive_matrix(max_n: usize) -> impl Strategy<Value = SymMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0.05..1.0f64, n * n).prop_map(move |raw| {
            SymMatrix::from_upper_fn(n, |i, j| raw[i * n + j]).unwrap()
        })
    })
}

/// `1 < p ≤ r ≤ 4`.
fn norm_params() -> impl Strategy<Value = NormParams> {
    (1.1..4.0f64, 0.0..1.0f64).prop_map(|(p, t)| NormParams::new(p + (4.0 - p) * t, p).unwrap())
}

fn graph(max_n: usize) -> impl Strategy<Value = SymMatrix> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::weighted(0.3), n * n).prop_map(move |bits| {
            SymMatrix::from_upper_fn(n, |i, j| if i != j && bits[i * n + j] { 1.0 } else { 0.0 }).unwrap()
        })
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_step_estimate_is_sandwiched(a in positive_matrix(7), params in norm_params()) {
        let gamma = compute_norm(&a, &params, &PowerOptions::default()).unwrap().gamma;
        let eta = eta(&a, &params).unwrap();
        let start = uniform_start(a.n(), params.r());
        let uniform = lq_norm(params.p(), &a.matvec(&start).unwrap());
        prop_assert!(eta <= gamma + 1e-10, "eta {eta} > gamma {gamma}");
        prop_assert!(eta >= uniform - 1e-10, "eta {eta} < uniform value {uniform}");
    }

    #[test]
    fn objective_never_decreases_along_iterates(a in positive_matrix(6), params in norm_params()) {
        let start = uniform_start(a.n(), params.r());
        let values: Vec<f64> = iterates(&a, &params, &start)
            .unwrap()
            .take(12)
            .map(|x| objective(&a, &params, &x.unwrap()).unwrap())
            .collect();
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12), "{values:?}");
        }
    }

    #[test]
    fn norm_scales_and_ignores_relabelling(
        (a, perm) in positive_matrix(6).prop_flat_map(|a| { let n = a.n(); (Just(a), permutation(n)) }),
        params in norm_params(),
        c in 0.1..10.0f64,
    ) {
        let opts = PowerOptions::default();
        let g = compute_norm(&a, &params, &opts).unwrap().gamma;
        let scaled = compute_norm(&a.scaled(c).unwrap(), &params, &opts).unwrap().gamma;
        let permuted = compute_norm(&a.permuted(&perm).unwrap(), &params, &opts).unwrap().gamma;
        prop_assert!((scaled - c * g).abs() <= 1e-9 * c * g);
        prop_assert!((permuted - g).abs() <= 1e-9 * g);
    }

    #[test]
    fn grothendieck_at_two_is_the_spectral_norm(a in positive_matrix(8)) {
        let opts = PowerOptions::default();
        let m2 = grothendieck_mr(&a, 2.0, &opts).unwrap();
        let g = compute_norm(&a, &NormParams::new(2.0, 2.0).unwrap(), &opts).unwrap().gamma;
        prop_assert!((m2 - g).abs() <= 1e-9);
    }

    #[test]
    fn power_iteration_matches_multistart(a in positive_matrix(3), params in norm_params(), seed in 0u64..1000) {
        let g = compute_norm(&a, &params, &PowerOptions::default()).unwrap().gamma;
        let o = maximize_multistart(&a, &params, 20, 1e-12, seed).unwrap();
        prop_assert!((g - o.value).abs() <= 1e-6, "power {g} oracle {}", o.value);
    }

    #[test]
    fn witnesses_are_genuine(a in graph(9)) {
        match check_irreducible(&a) {
            Ok(()) => {}
            Err(ReducibleWitness::Disconnected(parts)) => {
                prop_assert!(parts.len() >= 2);
                for (x, px) in parts.iter().enumerate() {
                    for py in &parts[x + 1..] {
                        for &i in px {
                            for &j in py {
                                prop_assert_eq!(a.get(i, j), 0.0);
                            }
                        }
                    }
                }
            }
            Err(ReducibleWitness::Bipartite(left, right)) => {
                prop_assert_eq!(left.len() + right.len(), a.n());
                for class in [&left, &right] {
                    for &i in class.iter() {
                        for &j in class.iter() {
                            prop_assert_eq!(a.get(i, j), 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn irreducibility_survives_relabelling(
        (a, perm) in graph(9).prop_flat_map(|a| { let n = a.n(); (Just(a), permutation(n)) }),
    ) {
        prop_assert_eq!(irreducible(&a), irreducible(&a.permuted(&perm).unwrap()));
    }

    #[test]
    fn matrix_market_round_trips(a in positive_matrix(6), array in any::<bool>()) {
        let layout = if array { Layout::Array } else { Layout::Coordinate };
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf, layout).unwrap();
        prop_assert_eq!(read_matrix_market(buf.as_slice()).unwrap(), a);
    }
}

#[test]
fn statistic_depends_only_on_gamma() {
    let a = opnorm::ensembles::EnsembleSpec::er(80, 0.4, 5).sample().unwrap();
    let params = NormParams::new(3.0, 2.0).unwrap();
    let model = CltModel::hom(80, 0.4, 0.24);
    let (value, result) = clt_statistic(&a, &params, &model, &PowerOptions::default()).unwrap();
    let again = statistic_from_gamma(result.gamma, &params, &model).unwrap();
    assert_eq!(value, again);
}

#[test]
fn central_differences_are_second_order() {
    // Successive differences of the estimate shrink 4× per halving of h.
    let params = NormParams::new(3.0, 2.0).unwrap();
    let fd: Vec<f64> =
        [2e-2, 1e-2, 5e-3, 2.5e-3].iter().map(|&h| derivative_check(60, 0.5, &params, h).unwrap().grad_fd).collect();
    let steps: Vec<f64> = fd.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    for w in steps.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.0..5.5).contains(&ratio), "successive differences {steps:?}");
    }
}
