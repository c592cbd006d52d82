use crate::error::{dim_err, Error, Result};
use crate::mpo::TensorTrainOperator;
use crate::tensor::DenseTensor;

use super::ite::{AmplitudeState, IteConfig};

/// Below this fraction of the pre-layer norm a projected state is treated as empty;
/// rounding noise sits several orders of magnitude lower.
const EMPTY_RATIO: f64 = 1e-12;

/// Diagonal operator that keeps configurations in which `value` occurs at most
/// `max_count` times. The bond carries the running count, so its dimension is `max_count + 1`.
pub fn occurrence_limit_mpo(
    n: usize,
    d: usize,
    value: usize,
    max_count: usize,
) -> Result<TensorTrainOperator> {
    if n == 0 || value >= d {
        return dim_err(format!("value {value} out of range for {n} sites of dimension {d}"));
    }
    let k = max_count + 1;
    let cores = (0..n)
        .map(|i| {
            let left = if i == 0 { 1 } else { k };
            let right = if i + 1 == n { 1 } else { k };
            DenseTensor::from_fn(vec![left, d, d, right], |idx| {
                let (c, x, y, c2) = (idx[0], idx[1], idx[2], idx[3]);
                if x != y {
                    return 0.0;
                }
                let count = c + (x == value) as usize;
                let ok = count <= max_count && (right == 1 || c2 == count);
                ok as u8 as f64
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TensorTrainOperator::new(cores)
}

/// Projects the state onto configurations where value `v` occurs at most
/// `limits[v]` times, one operator layer per value, rounding after each layer.
pub fn apply_occurrence_limits(
    s: &AmplitudeState,
    limits: &[usize],
    cfg: &IteConfig,
) -> Result<AmplitudeState> {
    let dims = s.phys_dims();
    let n = dims.len();
    let d = dims[0];
    if dims.iter().any(|&x| x != d) {
        return dim_err("occurrence limits need equal site dimensions");
    }
    if limits.len() != d {
        return dim_err(format!("{} limits for {d} values", limits.len()));
    }
    let mut out = s.clone();
    for (value, &limit) in limits.iter().enumerate() {
        if limit >= n {
            continue;
        }
        let before = out.state.norm();
        let op = occurrence_limit_mpo(n, d, value, limit)?;
        out.state = op.apply(&out.state, Some(&cfg.policy))?;
        let after = out.state.norm();
        if !after.is_finite() {
            return Err(Error::Numerical("constraint layer produced a non-finite state".into()));
        }
        if after <= EMPTY_RATIO * before {
            return Err(Error::Infeasible(format!(
                "no configuration satisfies the occurrence limits within numerical resolution \
                 (failed at value {value}); a smaller tau keeps feasible amplitudes resolvable"
            )));
        }
        out.rebalance();
    }
    Ok(out)
}

/// Each value occurs at most once; with `n == d` this leaves only permutations.
pub fn apply_non_repetition(s: &AmplitudeState, cfg: &IteConfig) -> Result<AmplitudeState> {
    let d = s.phys_dims()[0];
    apply_occurrence_limits(s, &vec![1; d], cfg)
}

/// Zeroes every configuration whose variable `site` differs from `value`.
pub fn fix_value(s: &AmplitudeState, site: usize, value: usize) -> Result<AmplitudeState> {
    let dims = s.phys_dims();
    if site >= dims.len() || value >= dims[site] {
        return dim_err(format!("cannot fix site {site} to value {value}"));
    }
    let mut cores = s.state.cores().to_vec();
    let c = &cores[site];
    cores[site] = DenseTensor::from_fn(c.shape().to_vec(), |i| {
        if i[1] == value {
            c.get(i)
        } else {
            0.0
        }
    })?;
    let mut out = AmplitudeState {
        state: crate::tt::TensorTrain::new(cores)?,
        log_scale: s.log_scale,
    };
    if out.is_zero() {
        return Err(Error::Infeasible(format!("no configuration has site {site} = {value}")));
    }
    out.rebalance();
    Ok(out)
}
