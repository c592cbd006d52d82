mod common;

use common::*;
use proptest::prelude::*;
use qitn::optimize::{
    apply_occurrence_limits, ite_state, readout_exact, AmplitudeState, IteConfig, QudoProblem,
};
use qitn::{
    apply_mpo_to_product, compress_layer, contract_pair, product_feature_map, tt_norm, tt_round,
    tt_svd, tt_svd_detailed, ContractionNetwork, DenseTensor, GroupingPlan, ShapePlan, SiteKernel,
    TruncationPolicy,
};
use rand::seq::SliceRandom;
use rand::Rng;

fn shape_strategy(max_rank: usize, max_dim: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=max_dim, 1..=max_rank)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_plan(shape: &[usize], rng: &mut impl Rng) -> GroupingPlan {
    let mut perm: Vec<usize> = (0..shape.len()).collect();
    perm.shuffle(rng);
    let mut sizes = Vec::new();
    let mut left = shape.len();
    while left > 0 {
        let s = rng.gen_range(1..=left);
        sizes.push(s);
        left -= s;
    }
    GroupingPlan::new(shape.to_vec(), perm, sizes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_and_split_are_inverse(shape in shape_strategy(5, 4), seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_tensor(&shape, &mut r);
        let plan = random_plan(&shape, &mut r);
        let g = t.group_indexes(&plan).unwrap();
        prop_assert_eq!(g.shape().to_vec(), plan.grouped_shape());
        let back = g.split_groups(&plan).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(back.group_indexes(&plan).unwrap(), g);
    }

    #[test]
    fn norm_survives_index_reshuffles(shape in shape_strategy(5, 4), seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_tensor(&shape, &mut r);
        let n = t.frobenius_norm();
        let plan = random_plan(&shape, &mut r);
        prop_assert!(rel(t.permute(plan.permutation()).unwrap().frobenius_norm(), n) < 1e-13);
        prop_assert!(rel(t.group_indexes(&plan).unwrap().frobenius_norm(), n) < 1e-13);
        let flat = t.clone().reshape(vec![t.len()]).unwrap();
        prop_assert!(rel(flat.split_index(0, &shape).unwrap().frobenius_norm(), n) < 1e-13);
    }

    #[test]
    fn pair_contraction_matches_loops(i in 1usize..5, j in 1usize..5, k in 1usize..5, l in 1usize..5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_tensor(&[i, j, k], &mut r);
        let b = random_tensor(&[k, l, j], &mut r);
        let c = contract_pair(&a, &b, &[(1, 2), (2, 0)]).unwrap();
        let mut expect = DenseTensor::zeros(vec![i, l]).unwrap();
        for x in 0..i {
            for y in 0..l {
                let mut s = 0.0;
                for p in 0..j {
                    for q in 0..k {
                        s += a.get(&[x, p, q]) * b.get(&[q, y, p]);
                    }
                }
                expect.set(&[x, y], s);
            }
        }
        prop_assert!(c.relative_error(&expect).unwrap() <= 1e-12);
    }

    #[test]
    fn contraction_order_does_not_matter(seed in any::<u64>()) {
        let mut r = rng(seed);
        // ring of four matrices closed through a three-leg node with one free leg
        let dims: Vec<usize> = (0..4).map(|_| r.gen_range(1..5)).collect();
        let extra = r.gen_range(1..4);
        let mut nodes = Vec::new();
        for q in 0..4 {
            let right = if q == 3 { dims[0] } else { dims[q + 1] };
            nodes.push((format!("M{q}"), random_tensor(&[dims[q], right], &mut r)));
        }
        nodes.push(("T".to_string(), random_tensor(&[dims[0], dims[0], extra], &mut r)));
        let edges = vec![
            ((0, 1), (1, 0)),
            ((1, 1), (2, 0)),
            ((2, 1), (3, 0)),
            ((3, 1), (4, 0)),
            ((4, 1), (0, 0)),
        ];
        let net = ContractionNetwork::new(nodes, edges, vec![(4, 2)]).unwrap();
        let greedy = net.contract().unwrap();
        let mut path = Vec::new();
        let mut live = 5usize;
        while live > 1 {
            let i = r.gen_range(0..live);
            let mut j = r.gen_range(0..live - 1);
            if j >= i {
                j += 1;
            }
            path.push((i, j));
            live -= 1;
        }
        let other = net.contract_with_path(&path).unwrap();
        let scale = greedy.frobenius_norm().max(1e-300);
        prop_assert!(other.distance(&greedy).unwrap() / scale <= 1e-12);
    }

    #[test]
    fn exact_tt_svd_roundtrip(shape in shape_strategy(6, 5), seed in any::<u64>()) {
        prop_assume!(shape.iter().product::<usize>() <= 1 << 16);
        let t = random_tensor(&shape, &mut rng(seed));
        let tt = tt_svd(&t, &TruncationPolicy::exact()).unwrap();
        prop_assert!(tt.to_dense().unwrap().relative_error(&t).unwrap() <= 1e-10);
    }

    #[test]
    fn truncation_error_is_bounded(shape in shape_strategy(6, 4), bond in 1usize..5, tol in 0.0f64..0.5, seed in any::<u64>()) {
        let t = random_tensor(&shape, &mut rng(seed));
        let policy = TruncationPolicy::new(Some(bond), tol).unwrap();
        let dec = tt_svd_detailed(&t, &policy).unwrap();
        let err = dec.train.to_dense().unwrap().distance(&t).unwrap();
        prop_assert!(err <= dec.error_bound() + 1e-12, "{} > {}", err, dec.error_bound());
        prop_assert!(dec.train.max_bond() <= bond);
    }

    #[test]
    fn error_does_not_grow_with_bond(shape in shape_strategy(5, 4), seed in any::<u64>()) {
        let t = random_tensor(&shape, &mut rng(seed));
        let full = tt_svd(&t, &TruncationPolicy::exact()).unwrap().max_bond();
        let slack = 1e-12 * t.frobenius_norm();
        let mut prev = f64::INFINITY;
        for b in 1..=full {
            let tt = tt_svd(&t, &TruncationPolicy::with_max_bond(b).unwrap()).unwrap();
            let err = tt.to_dense().unwrap().distance(&t).unwrap();
            prop_assert!(err <= prev + slack, "bond {}: {} after {}", b, err, prev);
            prev = err;
        }
    }

    #[test]
    fn exact_rounding_keeps_norm(n in 2usize..6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let phys: Vec<usize> = (0..n).map(|_| r.gen_range(2..4)).collect();
        let bonds: Vec<usize> = (0..n - 1).map(|_| r.gen_range(1..5)).collect();
        let tt = random_train(&phys, &bonds, &mut r);
        let rounded = tt_round(&tt, &TruncationPolicy::exact()).unwrap();
        prop_assert!(rel(tt_norm(&rounded), tt_norm(&tt)) <= 1e-12);
    }

    #[test]
    fn train_sum_is_dense_sum(n in 1usize..5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let phys: Vec<usize> = (0..n).map(|_| r.gen_range(1..4)).collect();
        let ba: Vec<usize> = (0..n.saturating_sub(1)).map(|_| r.gen_range(1..4)).collect();
        let bb: Vec<usize> = (0..n.saturating_sub(1)).map(|_| r.gen_range(1..4)).collect();
        let a = random_train(&phys, &ba, &mut r);
        let b = random_train(&phys, &bb, &mut r);
        let sum = a.add(&b).unwrap().to_dense().unwrap();
        let da = a.to_dense().unwrap();
        let db = b.to_dense().unwrap();
        let expect = DenseTensor::new(
            da.shape().to_vec(),
            da.data().iter().zip(db.data()).map(|(x, y)| x + y).collect(),
        ).unwrap();
        prop_assert!(sum.distance(&expect).unwrap() <= 1e-12 * expect.frobenius_norm().max(1.0));
    }

    #[test]
    fn exact_layer_matches_dense(sites in 1usize..4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rf: Vec<usize> = (0..sites).map(|_| r.gen_range(1..5)).collect();
        let cf: Vec<usize> = (0..sites).map(|_| r.gen_range(1..5)).collect();
        let (rows, cols): (usize, usize) = (rf.iter().product(), cf.iter().product());
        prop_assume!(rows * cols <= 1 << 12);
        let mut pairing: Vec<usize> = (0..sites).collect();
        pairing.shuffle(&mut r);
        let plan = ShapePlan::with_pairing(rf, cf, pairing).unwrap();
        let a = random_tensor(&[rows, cols], &mut r);
        let c: Vec<f64> = (0..rows).map(|_| r.gen_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..cols).map(|_| r.gen_range(-1.0..1.0)).collect();
        let (layer, report) = compress_layer(&a, &c, &plan, &TruncationPolicy::exact()).unwrap();
        let got = layer.apply(&x).unwrap();
        let expect: Vec<f64> = (0..rows)
            .map(|i| (0..cols).map(|j| a.get(&[i, j]) * x[j]).sum::<f64>() + c[i])
            .collect();
        let num: f64 = got.iter().zip(&expect).map(|(g, e)| (g - e) * (g - e)).sum::<f64>().sqrt();
        let den: f64 = expect.iter().map(|e| e * e).sum::<f64>().sqrt();
        prop_assert!(num <= 1e-9 * den.max(1e-300));
        let cores: usize = layer.weights.cores().iter().map(|c| c.len()).sum::<usize>()
            + layer.bias.cores().iter().map(|c| c.len()).sum::<usize>();
        prop_assert_eq!(report.compressed_params, cores);
        prop_assert_eq!(report.dense_params, rows * (cols + 1));
    }

    #[test]
    fn layer_error_does_not_grow_with_bond(seed in any::<u64>()) {
        let mut r = rng(seed);
        let plan = ShapePlan::new(vec![2, 3, 2], vec![3, 2, 2]).unwrap();
        let a = random_tensor(&[12, 12], &mut r);
        let c: Vec<f64> = (0..12).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut prev = f64::INFINITY;
        for b in 1..=40 {
            let policy = TruncationPolicy::with_max_bond(b).unwrap();
            let (_, report) = compress_layer(&a, &c, &plan, &policy).unwrap();
            let err = report.relative_error.unwrap();
            prop_assert!(err <= prev + 1e-12, "bond {}: {} after {}", b, err, prev);
            prev = err;
        }
        prop_assert!(prev <= 1e-10);
    }

    #[test]
    fn kernel_matches_dense_oracle(n in 1usize..=12, bond in 1usize..4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let outs: Vec<usize> = (0..n).map(|k| if k < 2 { 2 } else { 1 }).collect();
        let op = random_mpo(&vec![2; n], &outs, bond, &mut r);
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let ps = product_feature_map(&x, &vec![SiteKernel::Affine; n]).unwrap();
        let app = apply_mpo_to_product(&op, &ps).unwrap();
        let m = op.to_matrix().unwrap();
        let phi = ps.to_dense(1 << 12).unwrap();
        let cols = phi.len();
        let dense: Vec<f64> = (0..m.shape()[0])
            .map(|i| (0..cols).map(|j| m.get(&[i, j]) * phi.data()[j]).sum())
            .collect();
        let expect = DenseTensor::new(op.out_dims(), dense).unwrap();
        let scale = expect.frobenius_norm().max(1e-300);
        prop_assert!(app.result.distance(&expect).unwrap() / scale <= 1e-8);
    }

    #[test]
    fn kernel_output_is_affine_per_component(n in 2usize..7, j in 0usize..7, seed in any::<u64>()) {
        let j = j % n;
        let mut r = rng(seed);
        let op = random_mpo(&vec![2; n], &vec![2; n], 2, &mut r);
        let mut x: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut at = |v: f64| {
            x[j] = v;
            let ps = product_feature_map(&x, &vec![SiteKernel::Affine; n]).unwrap();
            apply_mpo_to_product(&op, &ps).unwrap().result
        };
        let (y0, y1, y2) = (at(0.0), at(1.0), at(2.0));
        // y(2) - y(1) == y(1) - y(0) for an affine dependence
        for ((a, b), c) in y0.data().iter().zip(y1.data()).zip(y2.data()) {
            prop_assert!(((c - b) - (b - a)).abs() <= 1e-10 * (1.0 + a.abs() + b.abs() + c.abs()));
        }
    }

    #[test]
    fn amplitudes_follow_exponentiated_cost(n in 1usize..7, d in 2usize..4, tau in 0.05f64..5.0, seed in any::<u64>()) {
        prop_assume!(d.pow(n as u32) <= 4096);
        let p = random_qudo(n, d, &mut rng(seed));
        let s = ite_state(&p, &IteConfig::default().with_tau(tau).unwrap()).unwrap();
        let got = s.normalized_dense(4096).unwrap();
        let raw: Vec<f64> = configurations(n, d).iter().map(|x| (-tau * p.cost(x)).exp()).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (g, e) in got.data().iter().zip(&raw) {
            prop_assert!((g - e / norm).abs() <= 1e-10 * (e / norm));
        }
    }

    #[test]
    fn shifting_a_table_keeps_the_argmax(n in 2usize..6, d in 2usize..4, table in 0usize..20, shift in -50.0f64..50.0, seed in any::<u64>()) {
        let p = random_qudo(n, d, &mut rng(seed));
        let (best, second) = two_best(&p);
        prop_assume!(second - best > 1e-6);
        let mut v = p.local_tables().to_vec();
        let mut w = p.coupling_tables();
        let t = table % (2 * n - 1);
        if t < n {
            v[t].iter_mut().for_each(|x| *x += shift);
        } else {
            w[t - n].iter_mut().flatten().for_each(|x| *x += shift);
        }
        let q = QudoProblem::new(d, v, w).unwrap();
        let cfg = IteConfig::default().with_tau(1.0).unwrap();
        let a = readout_exact(&ite_state(&p, &cfg).unwrap(), 1 << 12).unwrap();
        let b = readout_exact(&ite_state(&q, &cfg).unwrap(), 1 << 12).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn constraint_layers_are_sound(n in 2usize..5, d in 2usize..5, tau in 0.1f64..3.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_qudo(n, d, &mut r);
        let limits: Vec<usize> = (0..d).map(|_| r.gen_range(0..=n)).collect();
        prop_assume!(limits.iter().sum::<usize>() >= n);
        let cfg = IteConfig::default().with_tau(tau).unwrap();
        let before = ite_state(&p, &cfg).unwrap();
        let after = apply_occurrence_limits(&before, &limits, &cfg).unwrap();
        let tb = before.state.to_dense().unwrap();
        let ta = after.state.to_dense().unwrap();
        let configs = configurations(n, d);
        let feasible: Vec<bool> = configs
            .iter()
            .map(|x| (0..d).all(|v| x.iter().filter(|&&y| y == v).count() <= limits[v]))
            .collect();
        let top = max_abs(ta.data());
        // ratio of surviving amplitudes against the first feasible configuration
        let k0 = feasible.iter().position(|&f| f).unwrap();
        for (k, &ok) in feasible.iter().enumerate() {
            if ok {
                let want = tb.data()[k] / tb.data()[k0];
                let got = ta.data()[k] / ta.data()[k0];
                prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0));
            } else {
                prop_assert!(ta.data()[k].abs() <= 1e-12 * top);
            }
        }
    }

    #[test]
    fn cores_stay_balanced_for_extreme_tau(n in 1usize..9, d in 2usize..4, tau in 0.1f64..50.0, scale in 1.0f64..100.0, seed in any::<u64>()) {
        let p = random_qudo(n, d, &mut rng(seed));
        let v = p.local_tables().iter().map(|t| t.iter().map(|x| x * scale).collect()).collect();
        let w = p.coupling_tables().into_iter()
            .map(|t| t.into_iter().map(|row| row.into_iter().map(|x| x * scale).collect()).collect())
            .collect();
        let q = QudoProblem::new(d, v, w).unwrap();
        let s = ite_state(&q, &IteConfig::default().with_tau(tau).unwrap()).unwrap();
        prop_assert!(balanced(&s));
        prop_assert!(s.log_scale.is_finite());
    }

    #[test]
    fn cores_stay_balanced_after_each_layer(n in 2usize..6, scale in 0.01f64..100.0, seed in any::<u64>()) {
        let d = n;
        let p = random_qudo(n, d, &mut rng(seed));
        let v = p.local_tables().iter().map(|t| t.iter().map(|x| x * scale).collect()).collect();
        let q = QudoProblem::new(d, v, p.coupling_tables()).unwrap();
        let cfg = IteConfig::default();
        let mut s = ite_state(&q, &cfg).unwrap();
        prop_assert!(balanced(&s));
        for value in 0..d {
            let mut limits = vec![n; d];
            limits[value] = 1;
            s = apply_occurrence_limits(&s, &limits, &cfg).unwrap();
            prop_assert!(balanced(&s));
        }
    }
}

fn balanced(s: &AmplitudeState) -> bool {
    s.state.cores().iter().all(|c| (1e-3..=1e3).contains(&max_abs(c.data())))
}

#[test]
fn parameter_formulas_match_core_sizes() {
    let mut r = rng(7);
    for n in 2..=8 {
        for d in [2, 3] {
            for b in 1..=4 {
                let mps = random_train(&vec![d; n], &vec![b; n - 1], &mut r);
                assert_eq!(qitn::param_count_mps(n, d, b), mps.param_count());
                let mpo = random_mpo(&vec![d; n], &vec![d; n], b, &mut r);
                assert_eq!(qitn::param_count_mpo(n, d, b), mpo.param_count());
            }
        }
    }
    assert_eq!(qitn::param_count_mps(5, 2, 3), 66);
    assert_eq!(qitn::param_count_mpo(4, 2, 2), 48);
}

#[test]
fn kernel_peak_is_flat_in_length() {
    let mut r = rng(3);
    let mut peaks = Vec::new();
    for n in [4usize, 8, 16, 32] {
        let outs: Vec<usize> = (0..n).map(|k| if k == 0 { 2 } else { 1 }).collect();
        let op = random_mpo(&vec![2; n], &outs, 3, &mut r);
        let ps = product_feature_map(&vec![0.5; n], &vec![SiteKernel::Affine; n]).unwrap();
        let app = apply_mpo_to_product(&op, &ps).unwrap();
        assert_eq!(app.intermediate_sizes.len(), 2 * n);
        let total: usize = app.intermediate_sizes.iter().sum();
        assert!(total <= n * 2 * 2 * 3 * 3);
        peaks.push(app.peak());
    }
    assert!(peaks.windows(2).all(|w| w[0] == w[1]), "{peaks:?}");
}
