mod common;

use common::*;
use qitn::optimize::{
    apply_non_repetition, brute_force_qudo, brute_force_tsp, ite_state, readout_exact,
    readout_greedy, solve_qudo, solve_tsp, tour_cost, uniform_state, AmplitudeState, IteConfig,
    Method, QudoProblem, Readout, TspVariant,
};
use qitn::{DenseTensor, Error, TensorTrain, TensorTrainOperator, TruncationPolicy};
use rand::Rng;

/// Same state as `ite_state`, built by applying one diagonal operator per cost table to the uniform state.
fn layered_state(p: &QudoProblem, tau: f64) -> TensorTrain {
    let (n, d) = (p.n(), p.d());
    let mut s = uniform_state(n, d).unwrap().state;
    for i in 0..n {
        let sites: Vec<DenseTensor> = (0..n)
            .map(|k| {
                DenseTensor::from_fn(vec![d, d], |ix| {
                    if ix[0] != ix[1] {
                        0.0
                    } else if k == i {
                        (-tau * p.local(i)[ix[0]]).exp()
                    } else {
                        1.0
                    }
                })
                .unwrap()
            })
            .collect();
        s = TensorTrainOperator::product(&sites).unwrap().apply(&s, None).unwrap();
    }
    for i in 0..n - 1 {
        let cores: Vec<DenseTensor> = (0..n)
            .map(|k| {
                let (l, r) = (if k == i + 1 { d } else { 1 }, if k == i { d } else { 1 });
                DenseTensor::from_fn(vec![l, d, d, r], |ix| {
                    let (a, x, y, b) = (ix[0], ix[1], ix[2], ix[3]);
                    if x != y {
                        return 0.0;
                    }
                    if k == i {
                        (b == x) as u8 as f64
                    } else if k == i + 1 {
                        (-tau * p.coupling(i, a, x)).exp()
                    } else {
                        1.0
                    }
                })
                .unwrap()
            })
            .collect();
        s = TensorTrainOperator::new(cores).unwrap().apply(&s, None).unwrap();
    }
    s
}

fn normalized(t: DenseTensor) -> DenseTensor {
    let n = t.frobenius_norm();
    t.scaled(1.0 / n)
}

#[test]
fn direct_build_equals_layered_route() {
    let mut r = rng(11);
    for (n, d) in [(1, 2), (2, 3), (4, 2), (5, 3), (3, 4)] {
        let p = random_qudo(n, d, &mut r);
        for tau in [0.1, 1.0, 4.0] {
            let direct = ite_state(&p, &IteConfig::default().with_tau(tau).unwrap()).unwrap();
            assert!(direct.state.max_bond() <= d);
            let a = direct.normalized_dense(1 << 12).unwrap();
            let b = normalized(layered_state(&p, tau).to_dense().unwrap());
            assert!(a.relative_error(&b).unwrap() < 1e-12, "n={n} d={d} tau={tau}");
        }
    }
}

#[test]
fn worked_instance_amplitude_ratios() {
    let p = QudoProblem::new(
        2,
        vec![vec![0.0, 1.0], vec![0.0, -1.0]],
        vec![vec![vec![0.0, 0.0], vec![0.0, -3.0]]],
    )
    .unwrap();
    let s = ite_state(&p, &IteConfig::default().with_tau(1.0).unwrap()).unwrap();
    let t = s.state.to_dense().unwrap();
    let base = t.data()[0];
    let e = std::f64::consts::E;
    for (got, want) in t.data().iter().zip([1.0, e, 1.0 / e, e.powi(3)]) {
        assert!((got / base - want).abs() < 1e-12 * want);
    }
    let exact = readout_exact(&s, 16).unwrap();
    let greedy = readout_greedy(&s).unwrap();
    assert_eq!(exact, vec![1, 1]);
    assert_eq!(greedy, vec![1, 1]);
}

#[test]
fn zero_costs_give_uniform_state_and_first_configuration() {
    let p = QudoProblem::zeros(3, 3).unwrap();
    let s = ite_state(&p, &IteConfig::default()).unwrap();
    let t = s.normalized_dense(64).unwrap();
    assert!(t.data().iter().all(|&x| (x - t.data()[0]).abs() < 1e-15));
    let sol = solve_qudo(&p, &IteConfig::default()).unwrap();
    assert_eq!(sol.configuration, vec![0, 0, 0]);
    assert_eq!(sol.cost, 0.0);
}

#[test]
fn uniform_state_examples() {
    let s = uniform_state(1, 2).unwrap();
    let t = s.state.to_dense().unwrap();
    assert!((t.data()[0] - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    for n in 1..=10 {
        let s = uniform_state(n, 2).unwrap();
        assert!((s.state.norm() - 1.0).abs() < 1e-12);
        assert!(s.state.bond_dims().iter().all(|&b| b == 1));
    }
}

#[test]
fn dominant_amplitude_is_read_out() {
    let mut t = DenseTensor::filled(vec![3, 3, 2], 0.1).unwrap();
    t.set(&[2, 0, 1], 1.0);
    let s = AmplitudeState::new(qitn::tt_svd(&t, &TruncationPolicy::exact()).unwrap());
    assert_eq!(readout_exact(&s, 64).unwrap(), vec![2, 0, 1]);
}

#[test]
fn greedy_can_miss_but_stays_on_support() {
    let t = DenseTensor::new(vec![2, 2], vec![0.0, 0.7, 0.69, 0.68]).unwrap();
    let s = AmplitudeState::new(qitn::tt_svd(&t, &TruncationPolicy::exact()).unwrap());
    assert_eq!(readout_exact(&s, 16).unwrap(), vec![0, 1]);
    let g = readout_greedy(&s).unwrap();
    assert!(t.get(&g).abs() > 0.0);
}

#[test]
fn non_repetition_small_cases() {
    let s = apply_non_repetition(&uniform_state(2, 2).unwrap(), &IteConfig::default()).unwrap();
    let t = s.state.to_dense().unwrap();
    let top = max_abs(t.data());
    assert!(t.data()[0].abs() <= 1e-12 * top && t.data()[3].abs() <= 1e-12 * top);
    assert!((t.data()[1] - t.data()[2]).abs() < 1e-12 * top && t.data()[1].abs() > 0.5 * top);

    let s = apply_non_repetition(&uniform_state(3, 3).unwrap(), &IteConfig::default()).unwrap();
    let t = s.state.to_dense().unwrap();
    let top = max_abs(t.data());
    let nonzero: Vec<f64> = t.data().iter().copied().filter(|x| x.abs() > 1e-12 * top).collect();
    assert_eq!(nonzero.len(), 6);
    assert!(nonzero.iter().all(|x| (x - nonzero[0]).abs() < 1e-12 * top));
}

#[test]
fn non_repetition_on_evolved_state() {
    let mut r = rng(5);
    for _ in 0..10 {
        let p = random_qudo(4, 4, &mut r);
        let tau = 1.0;
        let cfg = IteConfig::default().with_tau(tau).unwrap();
        let s = apply_non_repetition(&ite_state(&p, &cfg).unwrap(), &cfg).unwrap();
        let t = s.normalized_dense(256).unwrap();
        let configs = configurations(4, 4);
        let perm = |x: &Vec<usize>| {
            let mut y = x.clone();
            y.sort();
            y == vec![0, 1, 2, 3]
        };
        let raw: Vec<f64> = configs
            .iter()
            .map(|x| if perm(x) { (-tau * p.cost(x)).exp() } else { 0.0 })
            .collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let top = max_abs(t.data());
        let mut support = 0;
        for (k, x) in configs.iter().enumerate() {
            if perm(x) {
                support += 1;
                assert!((t.data()[k] - raw[k] / norm).abs() <= 1e-10 * raw[k] / norm);
            } else {
                assert!(t.data()[k].abs() <= 1e-12 * top);
            }
        }
        assert_eq!(support, 24);
    }
}

#[test]
fn more_variables_than_values_is_infeasible() {
    let r = apply_non_repetition(&uniform_state(3, 2).unwrap(), &IteConfig::default());
    assert!(matches!(r, Err(Error::Infeasible(_))));
}

#[test]
fn unique_optimum_instances_for_every_tau() {
    let mut r = rng(21);
    let mut checked = 0;
    while checked < 30 {
        let (n, d) = if r.gen_bool(0.5) { (8, 2) } else { (5, 3) };
        let p = random_qudo(n, d, &mut r);
        let (best, second) = two_best(&p);
        if second - best < 1e-6 {
            continue;
        }
        let oracle = brute_force_qudo(&p).unwrap();
        for tau in [0.1, 1.0, 10.0] {
            let cfg = IteConfig::default().with_tau(tau).unwrap();
            let s = solve_qudo(&p, &cfg).unwrap();
            assert_eq!(s.configuration, oracle.configuration);
            assert_eq!(s.method, Method::IteExact);
            assert_eq!(s.cost, p.cost(&s.configuration));
        }
        checked += 1;
    }
}

#[test]
fn single_variable_oracle_is_argmin() {
    let p = QudoProblem::new(4, vec![vec![0.3, -0.2, 0.9, -0.2]], vec![]).unwrap();
    let s = brute_force_qudo(&p).unwrap();
    assert_eq!(s.configuration, vec![1]);
    assert_eq!(solve_qudo(&p, &IteConfig::default()).unwrap().configuration, vec![1]);
}

#[test]
fn tsp_small_cases() {
    let two = vec![vec![0.0, 3.0], vec![3.0, 0.0]];
    let s = solve_tsp(&two, TspVariant::Closed, &IteConfig::default()).unwrap();
    assert_eq!(s.configuration, vec![0, 1]);
    assert_eq!(s.cost, 6.0);

    let flat = vec![vec![2.0; 4]; 4];
    let open = solve_tsp(&flat, TspVariant::Open, &IteConfig::default()).unwrap();
    assert_eq!(open.cost, 3.0 * 2.0);
    let closed = solve_tsp(&flat, TspVariant::Closed, &IteConfig::default()).unwrap();
    assert_eq!(closed.cost, 4.0 * 2.0);
    assert_eq!(closed.configuration, vec![0, 1, 2, 3]);

    // asymmetric 0/1 costs: only 0 -> 2 -> 1 -> 0 is free
    let c = vec![
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 0.0, 0.0],
    ];
    let o = brute_force_tsp(&c, TspVariant::Closed).unwrap();
    assert_eq!(o.configuration, vec![0, 2, 1]);
    assert_eq!(o.cost, 0.0);
    let s = solve_tsp(&c, TspVariant::Closed, &IteConfig::default()).unwrap();
    assert_eq!(s.configuration, o.configuration);
}

#[test]
fn random_tsp_matches_oracle() {
    let mut r = rng(9);
    for _ in 0..20 {
        let c: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..5).map(|j| if i == j { 0.0 } else { r.gen_range(1.0..10.0) }).collect())
            .collect();
        for variant in [TspVariant::Closed, TspVariant::Open] {
            let want = brute_force_tsp(&c, variant).unwrap();
            let got = solve_tsp(&c, variant, &IteConfig::default()).unwrap();
            assert!((got.cost - want.cost).abs() <= 1e-9 * want.cost);
            assert_eq!(got.cost, tour_cost(&c, &got.configuration, variant));
            let greedy = solve_tsp(&c, variant, &IteConfig::default().with_readout(Readout::Greedy)).unwrap();
            let mut sorted = greedy.configuration.clone();
            sorted.sort();
            assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
        }
    }
}
