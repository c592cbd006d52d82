use crate::error::{Error, Result};
use crate::tensor::matmul;

use super::ite::AmplitudeState;
use super::problem::TIE_TOLERANCE;

/// First index whose score is within the tie margin of the maximum.
fn first_max(scores: impl Iterator<Item = f64> + Clone) -> Option<usize> {
    let best = scores.clone().fold(0.0f64, f64::max);
    if best <= 0.0 || !best.is_finite() {
        return None;
    }
    scores.into_iter().position(|x| x >= best * (1.0 - TIE_TOLERANCE))
}

/// Configuration with the largest amplitude magnitude, from the dense tensor.
pub fn readout_exact(s: &AmplitudeState, cap: usize) -> Result<Vec<usize>> {
    let t = s.state.to_dense_capped(cap)?;
    let flat = first_max(t.data().iter().map(|x| x.abs()))
        .ok_or_else(|| Error::Infeasible("every amplitude is zero".into()))?;
    let mut config = vec![0; t.rank()];
    let mut rest = flat;
    for (slot, &d) in config.iter_mut().zip(t.shape()).rev() {
        *slot = rest % d;
        rest /= d;
    }
    Ok(config)
}

/// Fixes variables left to right, each to the value with the largest
/// marginal weight given the values already fixed.
pub fn readout_greedy(s: &AmplitudeState) -> Result<Vec<usize>> {
    let cores = s.state.cores();
    let n = cores.len();
    // env[k]: contraction of sites k.. with themselves, indexed by the bond left of site k.
    let mut env = vec![Vec::new(); n + 1];
    env[n] = vec![1.0];
    for k in (0..n).rev() {
        let (l, d, r) = (cores[k].shape()[0], cores[k].shape()[1], cores[k].shape()[2]);
        let mut e = vec![0.0; l * l];
        for x in 0..d {
            let slice = site_slice(cores[k].data(), l, d, r, x);
            let ar = matmul(&slice, &env[k + 1], l, r, r);
            for a in 0..l {
                for b in 0..l {
                    e[a * l + b] += (0..r).map(|j| ar[a * r + j] * slice[b * r + j]).sum::<f64>();
                }
            }
        }
        let m = e.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if m > 0.0 {
            e.iter_mut().for_each(|x| *x /= m);
        }
        env[k] = e;
    }
    let mut left = vec![1.0];
    let mut config = Vec::with_capacity(n);
    for k in 0..n {
        let (l, d, r) = (cores[k].shape()[0], cores[k].shape()[1], cores[k].shape()[2]);
        let vs: Vec<Vec<f64>> = (0..d)
            .map(|x| matmul(&left, &site_slice(cores[k].data(), l, d, r, x), 1, l, r))
            .collect();
        let weights: Vec<f64> = vs
            .iter()
            .map(|v| {
                let rv = matmul(&env[k + 1], v, r, r, 1);
                v.iter().zip(&rv).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect();
        let x = first_max(weights.iter().copied()).ok_or_else(|| {
            Error::Infeasible(format!("no configuration with nonzero amplitude extends the prefix at site {k}"))
        })?;
        config.push(x);
        let m = vs[x].iter().fold(0.0f64, |acc, y| acc.max(y.abs()));
        left = vs[x].iter().map(|y| y / m).collect();
    }
    Ok(config)
}

fn site_slice(data: &[f64], l: usize, d: usize, r: usize, x: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(l * r);
    for a in 0..l {
        out.extend_from_slice(&data[(a * d + x) * r..(a * d + x + 1) * r]);
    }
    out
}
