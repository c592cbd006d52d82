//! Tensor trains (matrix product states) with open boundary conditions.
//!
//! A train over physical dimensions `d_1..d_N` is a list of cores with shape
//! `(left bond, d_k, right bond)`; the outer bonds of the first and last core
//! are 1. Element `(i_1..i_N)` of the represented tensor is the matrix product
//! `G_1[i_1] G_2[i_2] ... G_N[i_N]`.

use crate::error::{dim_err, Error, Result};
use crate::svd::{truncated_svd, TruncationPolicy};
use crate::tensor::{contract_pair, matmul, DenseTensor};

/// Default element limit for dense materialization (2^22).
pub const DEFAULT_DENSE_CAP: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorTrain {
    cores: Vec<DenseTensor>,
}

/// A train together with the discarded weight of each link that produced it.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub train: TensorTrain,
    /// Sum of squared dropped singular values, one entry per link (`N - 1` entries).
    pub discarded: Vec<f64>,
}

impl Decomposition {
    pub fn total_discarded(&self) -> f64 {
        self.discarded.iter().sum()
    }

    /// Upper bound on the Frobenius error of the approximation.
    pub fn error_bound(&self) -> f64 {
        self.total_discarded().sqrt()
    }
}

impl TensorTrain {
    pub fn new(cores: Vec<DenseTensor>) -> Result<Self> {
        validate_chain(&cores, 3)?;
        Ok(Self { cores })
    }

    /// Bond-1 train whose cores are the given site vectors.
    pub fn product_state(sites: &[Vec<f64>]) -> Result<Self> {
        let cores = sites
            .iter()
            .map(|v| DenseTensor::new(vec![1, v.len(), 1], v.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    /// The train of a tensor whose entries are all zero.
    pub fn zeros(phys_dims: &[usize]) -> Result<Self> {
        let cores = phys_dims
            .iter()
            .map(|&d| DenseTensor::zeros(vec![1, d, 1]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn cores(&self) -> &[DenseTensor] {
        &self.cores
    }

    pub fn into_cores(self) -> Vec<DenseTensor> {
        self.cores
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    /// Internal bond dimensions, one per link.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.cores[..self.len() - 1]
            .iter()
            .map(|c| c.shape()[2])
            .collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Number of stored elements across all cores.
    pub fn param_count(&self) -> usize {
        self.cores.iter().map(DenseTensor::len).sum()
    }

    /// Number of elements of the represented dense tensor, saturating at `u128::MAX`.
    pub fn dense_len(&self) -> u128 {
        self.phys_dims()
            .iter()
            .fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
    }

    /// Single element of the represented tensor.
    pub fn element(&self, index: &[usize]) -> Result<f64> {
        if index.len() != self.len() {
            return dim_err(format!(
                "index of length {} for a train of {} sites",
                index.len(),
                self.len()
            ));
        }
        let mut row = vec![1.0];
        for (core, &i) in self.cores.iter().zip(index) {
            let (l, d, r) = core_dims(core);
            if i >= d {
                return dim_err(format!("physical index {i} out of range {d}"));
            }
            let mut next = vec![0.0; r];
            for a in 0..l {
                let base = (a * d + i) * r;
                for (b, slot) in next.iter_mut().enumerate() {
                    *slot += row[a] * core.data()[base + b];
                }
            }
            row = next;
        }
        Ok(row[0])
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        self.to_dense_capped(DEFAULT_DENSE_CAP)
    }

    /// Contracts the cores left to right into a dense tensor of shape `phys_dims`.
    pub fn to_dense_capped(&self, cap: usize) -> Result<DenseTensor> {
        let requested = self.dense_len();
        if requested > cap as u128 {
            return Err(Error::Capacity {
                what: "dense reconstruction of a tensor train".into(),
                requested,
                limit: cap as u128,
            });
        }
        let mut acc = vec![1.0];
        let mut rows = 1usize;
        let mut bond = 1usize;
        for core in &self.cores {
            let (l, d, r) = core_dims(core);
            debug_assert_eq!(l, bond);
            acc = matmul(&acc, core.data(), rows, l, d * r);
            rows *= d;
            bond = r;
        }
        DenseTensor::new(self.phys_dims(), acc)
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        if self.phys_dims() != other.phys_dims() {
            return dim_err(format!(
                "inner product of trains with physical dims {:?} and {:?}",
                self.phys_dims(),
                other.phys_dims()
            ));
        }
        let mut env = DenseTensor::filled(vec![1, 1], 1.0)?;
        for (a, b) in self.cores.iter().zip(&other.cores) {
            let half = contract_pair(&env, a, &[(0, 0)])?;
            env = contract_pair(&half, b, &[(0, 0), (1, 1)])?;
        }
        Ok(env.data()[0])
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).map(|x| x.max(0.0).sqrt()).unwrap_or(0.0)
    }

    /// Multiplies the represented tensor by `factor` (applied to the first core).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut cores = self.cores.clone();
        cores[0] = cores[0].scaled(factor);
        Self { cores }
    }

    /// Sum of two trains via direct-sum cores; bond dimensions add.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.phys_dims() != other.phys_dims() {
            return dim_err(format!(
                "cannot add trains with physical dims {:?} and {:?}",
                self.phys_dims(),
                other.phys_dims()
            ));
        }
        let n = self.len();
        if n == 1 {
            let data = self.cores[0]
                .data()
                .iter()
                .zip(other.cores[0].data())
                .map(|(x, y)| x + y)
                .collect();
            return Self::new(vec![DenseTensor::new(self.cores[0].shape().to_vec(), data)?]);
        }
        let mut cores = Vec::with_capacity(n);
        for (k, (a, b)) in self.cores.iter().zip(&other.cores).enumerate() {
            let (la, d, ra) = core_dims(a);
            let (lb, _, rb) = core_dims(b);
            let (l, r) = match k {
                0 => (1, ra + rb),
                _ if k == n - 1 => (la + lb, 1),
                _ => (la + lb, ra + rb),
            };
            let mut core = DenseTensor::zeros(vec![l, d, r])?;
            for x in 0..la {
                for i in 0..d {
                    for y in 0..ra {
                        core.set(&[x, i, y], a.get(&[x, i, y]));
                    }
                }
            }
            let (lo, ro) = match k {
                0 => (0, ra),
                _ if k == n - 1 => (la, 0),
                _ => (la, ra),
            };
            for x in 0..lb {
                for i in 0..d {
                    for y in 0..rb {
                        core.set(&[lo + x, i, ro + y], b.get(&[x, i, y]));
                    }
                }
            }
            cores.push(core);
        }
        Self::new(cores)
    }

    pub fn round(&self, policy: &TruncationPolicy) -> Result<Self> {
        Ok(self.round_detailed(policy)?.train)
    }

    /// Right-to-left orthogonalization followed by a left-to-right truncation sweep.
    ///
    /// Every truncation happens with the rest of the train in orthogonal form,
    /// so the Frobenius error is at most `sqrt(sum of discarded weights)`.
    pub fn round_detailed(&self, policy: &TruncationPolicy) -> Result<Decomposition> {
        if self.cores.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("non-finite entry in tensor train".into()));
        }
        let n = self.len();
        let mut cores = self.cores.clone();

        // right-orthogonalize; directions under the rank cutoff are dropped and
        // their weight is charged to the link they leave
        let mut orth_loss = vec![0.0; n.saturating_sub(1)];
        for k in (1..n).rev() {
            let (l, d, r) = core_dims(&cores[k]);
            let svd = truncated_svd(&cores[k].clone().reshape(vec![l, d * r])?, &TruncationPolicy::exact())?;
            let rank = svd.rank();
            orth_loss[k - 1] = svd.discarded_weight;
            cores[k] = svd.v.reshape(vec![rank, d, r])?;
            let us = scale_cols(&svd.u, &svd.s);
            let (pl, pd, _) = core_dims(&cores[k - 1]);
            let prev = cores[k - 1].clone().reshape(vec![pl * pd, l])?;
            cores[k - 1] = contract_pair(&prev, &us, &[(1, 0)])?.reshape(vec![pl, pd, rank])?;
        }

        let mut discarded = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n.saturating_sub(1) {
            let (l, d, r) = core_dims(&cores[k]);
            let svd = truncated_svd(&cores[k].clone().reshape(vec![l * d, r])?, policy)?;
            let rank = svd.rank();
            discarded.push(svd.discarded_weight + orth_loss[k]);
            cores[k] = svd.u.reshape(vec![l, d, rank])?;
            let sv = scale_rows(&svd.v, &svd.s);
            let (_, nd, nr) = core_dims(&cores[k + 1]);
            let next = cores[k + 1].clone().reshape(vec![r, nd * nr])?;
            cores[k + 1] = contract_pair(&sv, &next, &[(1, 0)])?.reshape(vec![rank, nd, nr])?;
        }
        Ok(Decomposition {
            train: Self::new(cores)?,
            discarded,
        })
    }
}

/// Decomposes a dense tensor into a train by a left-to-right sweep of truncated SVDs.
pub fn tt_svd(t: &DenseTensor, policy: &TruncationPolicy) -> Result<TensorTrain> {
    Ok(tt_svd_detailed(t, policy)?.train)
}

/// [`tt_svd`] also returning the discarded weight of every link.
///
/// At step `k` the remainder is reshaped to `(left bond * d_k, rest)`; its
/// left singular vectors become core `k` and `diag(s) * v` carries on.
pub fn tt_svd_detailed(t: &DenseTensor, policy: &TruncationPolicy) -> Result<Decomposition> {
    if t.rank() == 0 {
        return dim_err("tensor-train decomposition needs at least one index");
    }
    if !t.is_finite() {
        return Err(Error::Numerical("non-finite entry in input tensor".into()));
    }
    let dims = t.shape().to_vec();
    let n = dims.len();
    let mut cores = Vec::with_capacity(n);
    let mut discarded = Vec::with_capacity(n - 1);
    let mut bond = 1usize;
    let mut rest: usize = t.len();
    let mut remainder = t.data().to_vec();
    for &d in &dims[..n - 1] {
        rest /= d;
        let m = DenseTensor::new(vec![bond * d, rest], remainder)?;
        let svd = truncated_svd(&m, policy)?;
        let rank = svd.rank();
        discarded.push(svd.discarded_weight);
        cores.push(svd.u.reshape(vec![bond, d, rank])?);
        remainder = scale_rows(&svd.v, &svd.s).into_data();
        bond = rank;
    }
    cores.push(DenseTensor::new(vec![bond, dims[n - 1], 1], remainder)?);
    Ok(Decomposition {
        train: TensorTrain::new(cores)?,
        discarded,
    })
}

pub fn tt_to_dense(tt: &TensorTrain, cap: usize) -> Result<DenseTensor> {
    tt.to_dense_capped(cap)
}

pub fn tt_round(tt: &TensorTrain, policy: &TruncationPolicy) -> Result<TensorTrain> {
    tt.round(policy)
}

pub fn tt_inner(a: &TensorTrain, b: &TensorTrain) -> Result<f64> {
    a.inner(b)
}

pub fn tt_norm(tt: &TensorTrain) -> f64 {
    tt.norm()
}

/// Stored elements of an `n`-site train with uniform physical dimension `d`
/// and bond dimension `b`: `2db + (n-2)db²`, or `d` for a single site.
pub fn param_count_mps(n: usize, d: usize, b: usize) -> usize {
    match n {
        0 => 0,
        1 => d,
        _ => 2 * d * b + (n - 2) * d * b * b,
    }
}

/// Stored elements of an `n`-site operator train: `2d²b + (n-2)d²b²`, or `d²` for one site.
pub fn param_count_mpo(n: usize, d: usize, b: usize) -> usize {
    param_count_mps(n, d * d, b)
}

pub(crate) fn core_dims(core: &DenseTensor) -> (usize, usize, usize) {
    let s = core.shape();
    (s[0], s[1], s[2])
}

/// `diag(s) * m` for a row-major matrix `m`.
fn scale_rows(m: &DenseTensor, s: &[f64]) -> DenseTensor {
    let cols = m.shape()[1];
    let mut out = m.clone();
    for (row, &sv) in out.data_mut().chunks_mut(cols).zip(s) {
        row.iter_mut().for_each(|x| *x *= sv);
    }
    out
}

/// `m * diag(s)` for a row-major matrix `m`.
fn scale_cols(m: &DenseTensor, s: &[f64]) -> DenseTensor {
    let cols = m.shape()[1];
    let mut out = m.clone();
    for row in out.data_mut().chunks_mut(cols) {
        row.iter_mut().zip(s).for_each(|(x, sv)| *x *= sv);
    }
    out
}

/// Checks boundary and adjacency rules for cores whose first axis is the left
/// bond and last axis the right bond.
pub(crate) fn validate_chain(cores: &[DenseTensor], rank: usize) -> Result<()> {
    if cores.is_empty() {
        return dim_err("a train needs at least one core");
    }
    for (k, core) in cores.iter().enumerate() {
        if core.rank() != rank {
            return dim_err(format!(
                "core {k} has rank {}, expected {rank}",
                core.rank()
            ));
        }
    }
    if cores[0].shape()[0] != 1 {
        return dim_err("first core must have left bond 1");
    }
    if cores[cores.len() - 1].shape()[rank - 1] != 1 {
        return dim_err("last core must have right bond 1");
    }
    for k in 1..cores.len() {
        let right = cores[k - 1].shape()[rank - 1];
        let left = cores[k].shape()[0];
        if right != left {
            return dim_err(format!(
                "bond mismatch between cores {} and {k}: {right} vs {left}",
                k - 1
            ));
        }
    }
    Ok(())
}
