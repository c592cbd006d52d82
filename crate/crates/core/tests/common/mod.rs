#![allow(dead_code)]

use qitn::optimize::QudoProblem;
use qitn::{DenseTensor, TensorTrain, TensorTrainOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(shape: &[usize], rng: &mut impl Rng) -> DenseTensor {
    let n = shape.iter().product();
    DenseTensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Random train with the given physical and (inner) bond dimensions.
pub fn random_train(phys: &[usize], bonds: &[usize], rng: &mut impl Rng) -> TensorTrain {
    let cores = (0..phys.len())
        .map(|k| {
            let l = if k == 0 { 1 } else { bonds[k - 1] };
            let r = if k + 1 == phys.len() { 1 } else { bonds[k] };
            random_tensor(&[l, phys[k], r], rng)
        })
        .collect();
    TensorTrain::new(cores).unwrap()
}

pub fn random_mpo(ins: &[usize], outs: &[usize], bond: usize, rng: &mut impl Rng) -> TensorTrainOperator {
    let n = ins.len();
    let cores = (0..n)
        .map(|k| {
            let l = if k == 0 { 1 } else { bond };
            let r = if k + 1 == n { 1 } else { bond };
            random_tensor(&[l, ins[k], outs[k], r], rng)
        })
        .collect();
    TensorTrainOperator::new(cores).unwrap()
}

pub fn random_qudo(n: usize, d: usize, rng: &mut impl Rng) -> QudoProblem {
    let v = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let w = (0..n.saturating_sub(1))
        .map(|_| (0..d).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect())
        .collect();
    QudoProblem::new(d, v, w).unwrap()
}

/// Every configuration in row-major order.
pub fn configurations(n: usize, d: usize) -> Vec<Vec<usize>> {
    let total = d.pow(n as u32);
    (0..total)
        .map(|mut i| {
            let mut x = vec![0; n];
            for slot in x.iter_mut().rev() {
                *slot = i % d;
                i /= d;
            }
            x
        })
        .collect()
}

/// Smallest and second-smallest cost over all configurations.
pub fn two_best(p: &QudoProblem) -> (f64, f64) {
    let mut best = (f64::INFINITY, f64::INFINITY);
    for x in configurations(p.n(), p.d()) {
        let c = p.cost(&x);
        if c < best.0 {
            best = (c, best.0);
        } else if c < best.1 {
            best.1 = c;
        }
    }
    best
}

pub fn max_abs(data: &[f64]) -> f64 {
    data.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}
