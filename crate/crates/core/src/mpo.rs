//! Tensor-train operators (matrix product operators).
//!
//! Cores have shape `(left bond, input, output, right bond)`. As a matrix the
//! operator maps the row-major flattening of the input indexes to the
//! row-major flattening of the output indexes.

use crate::error::{dim_err, Error, Result};
use crate::svd::TruncationPolicy;
use crate::tensor::{contract_pair, DenseTensor};
use crate::tt::{validate_chain, TensorTrain, DEFAULT_DENSE_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct TensorTrainOperator {
    cores: Vec<DenseTensor>,
}

impl TensorTrainOperator {
    pub fn new(cores: Vec<DenseTensor>) -> Result<Self> {
        validate_chain(&cores, 4)?;
        Ok(Self { cores })
    }

    /// Bond-1 identity on the given site dimensions.
    pub fn identity(dims: &[usize]) -> Result<Self> {
        let cores = dims
            .iter()
            .map(|&d| DenseTensor::from_fn(vec![1, d, d, 1], |i| (i[1] == i[2]) as u8 as f64))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    /// Bond-1 operator acting as `site_matrices[k]` (shape `(out, in)`) on site `k`.
    pub fn product(site_matrices: &[DenseTensor]) -> Result<Self> {
        let cores = site_matrices
            .iter()
            .map(|m| {
                if m.rank() != 2 {
                    return dim_err("site operator must be a matrix");
                }
                let (o, i) = (m.shape()[0], m.shape()[1]);
                m.permute(&[1, 0])?.reshape(vec![1, i, o, 1])
            })
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

    pub fn in_dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    pub fn out_dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[2]).collect()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.cores[..self.len() - 1]
            .iter()
            .map(|c| c.shape()[3])
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.cores.iter().map(DenseTensor::len).sum()
    }

    /// Views the operator as a train over merged `(input, output)` site indexes.
    pub fn to_train(&self) -> TensorTrain {
        let cores = self
            .cores
            .iter()
            .map(|c| {
                let s = c.shape();
                c.clone()
                    .reshape(vec![s[0], s[1] * s[2], s[3]])
                    .expect("same element count")
            })
            .collect();
        TensorTrain::new(cores).expect("operator chain is a valid train")
    }

    /// Inverse of [`to_train`](Self::to_train): splits each merged site index into `(in, out)`.
    pub fn from_train(train: &TensorTrain, in_dims: &[usize], out_dims: &[usize]) -> Result<Self> {
        if in_dims.len() != train.len() || out_dims.len() != train.len() {
            return dim_err("site dimension lists do not match the train length");
        }
        let cores = train
            .cores()
            .iter()
            .zip(in_dims.iter().zip(out_dims))
            .map(|(c, (&i, &o))| c.split_index(1, &[i, o]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn to_matrix(&self) -> Result<DenseTensor> {
        self.to_matrix_capped(DEFAULT_DENSE_CAP)
    }

    /// Dense `(prod out, prod in)` matrix.
    pub fn to_matrix_capped(&self, cap: usize) -> Result<DenseTensor> {
        let n = self.len();
        let requested = self
            .in_dims()
            .iter()
            .chain(&self.out_dims())
            .fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
        if requested > cap as u128 {
            return Err(Error::Capacity {
                what: "dense operator matrix".into(),
                requested,
                limit: cap as u128,
            });
        }
        let mut interleaved = Vec::with_capacity(2 * n);
        for (i, o) in self.in_dims().into_iter().zip(self.out_dims()) {
            interleaved.push(i);
            interleaved.push(o);
        }
        let dense = self
            .to_train()
            .to_dense_capped(cap)?
            .reshape(interleaved)?;
        let perm: Vec<usize> = (0..n).map(|k| 2 * k + 1).chain((0..n).map(|k| 2 * k)).collect();
        let rows = self.out_dims().iter().product();
        let cols = self.in_dims().iter().product();
        dense.permute(&perm)?.reshape(vec![rows, cols])
    }

    /// Applies the operator to a train. Bond dimensions multiply link-wise;
    /// with a policy the product is rounded afterwards.
    pub fn apply(&self, state: &TensorTrain, policy: Option<&TruncationPolicy>) -> Result<TensorTrain> {
        if self.in_dims() != state.phys_dims() {
            return dim_err(format!(
                "operator input dims {:?} do not match state dims {:?}",
                self.in_dims(),
                state.phys_dims()
            ));
        }
        let cores = self
            .cores
            .iter()
            .zip(state.cores())
            .map(|(w, s)| {
                let (wl, _, o, wr) = (w.shape()[0], w.shape()[1], w.shape()[2], w.shape()[3]);
                let (sl, sr) = (s.shape()[0], s.shape()[2]);
                // (wl, o, wr, sl, sr) -> (wl, sl, o, wr, sr)
                contract_pair(w, s, &[(1, 1)])?
                    .permute(&[0, 3, 1, 2, 4])?
                    .reshape(vec![wl * sl, o, wr * sr])
            })
            .collect::<Result<Vec<_>>>()?;
        let product = TensorTrain::new(cores)?;
        match policy {
            Some(p) => product.round(p),
            None => Ok(product),
        }
    }
}

pub fn apply_mpo(
    op: &TensorTrainOperator,
    state: &TensorTrain,
    policy: Option<&TruncationPolicy>,
) -> Result<TensorTrain> {
    op.apply(state, policy)
}
