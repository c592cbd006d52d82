//! Product feature maps and their contraction with operator trains.
//!
//! The feature map `phi(x) = phi_1(x_1) ⊗ ... ⊗ phi_N(x_N)` has `d^N` entries
//! but is stored as `N` site vectors. An operator train is applied to it by
//! absorbing each site vector into its operator core and merging the results
//! left to right, so the largest intermediate is `(open outputs) × bond`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{dim_err, Error, Result};
use crate::mpo::TensorTrainOperator;
use crate::tensor::{matmul, DenseTensor};
use crate::tt::{TensorTrain, DEFAULT_DENSE_CAP};

/// Per-component map from a real number to a short vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteKernel {
    /// `x ↦ (x, 1)`: index 0 carries the component, index 1 the constant.
    Affine,
    /// `x ↦ (cos(πx/2), sin(πx/2))`.
    Cosine,
}

impl SiteKernel {
    pub fn dim(&self) -> usize {
        2
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        match self {
            SiteKernel::Affine => vec![x, 1.0],
            SiteKernel::Cosine => vec![(FRAC_PI_2 * x).cos(), (FRAC_PI_2 * x).sin()],
        }
    }
}

/// `N` site vectors whose outer product is the represented tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    sites: Vec<Vec<f64>>,
}

impl ProductState {
    pub fn new(sites: Vec<Vec<f64>>) -> Result<Self> {
        if sites.is_empty() || sites.iter().any(Vec::is_empty) {
            return dim_err("a product state needs at least one nonempty site vector");
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[Vec<f64>] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sites.iter().map(Vec::len).collect()
    }

    pub fn to_train(&self) -> TensorTrain {
        TensorTrain::product_state(&self.sites).expect("nonempty sites")
    }

    pub fn to_dense(&self, cap: usize) -> Result<DenseTensor> {
        self.to_train().to_dense_capped(cap)
    }
}

pub fn product_feature_map(x: &[f64], kernels: &[SiteKernel]) -> Result<ProductState> {
    if x.len() != kernels.len() {
        return dim_err(format!(
            "{} input components for {} kernels",
            x.len(),
            kernels.len()
        ));
    }
    ProductState::new(x.iter().zip(kernels).map(|(&xi, k)| k.eval(xi)).collect())
}

/// Result of [`apply_mpo_to_product`] and the size of every intermediate it built.
#[derive(Debug, Clone)]
pub struct KernelApplication {
    /// Indexed by the operator's output dimensions.
    pub result: DenseTensor,
    /// Element counts in creation order: absorbed site node, then merged prefix, per site.
    pub intermediate_sizes: Vec<usize>,
}

impl KernelApplication {
    pub fn peak(&self) -> usize {
        self.intermediate_sizes.iter().copied().max().unwrap_or(0)
    }
}

/// Contracts each site vector into its operator core, giving a
/// `(left bond, output, right bond)` node per site.
pub fn absorb_product(op: &TensorTrainOperator, ps: &ProductState) -> Result<TensorTrain> {
    if op.in_dims() != ps.dims() {
        return dim_err(format!(
            "operator input dims {:?} do not match feature dims {:?}",
            op.in_dims(),
            ps.dims()
        ));
    }
    let cores = op
        .cores()
        .iter()
        .zip(ps.sites())
        .map(|(w, phi)| absorb_site(w, phi))
        .collect::<Result<Vec<_>>>()?;
    TensorTrain::new(cores)
}

fn absorb_site(w: &DenseTensor, phi: &[f64]) -> Result<DenseTensor> {
    let s = w.shape();
    let (l, d, o, r) = (s[0], s[1], s[2], s[3]);
    let mut out = vec![0.0; l * o * r];
    let block = o * r;
    for a in 0..l {
        for (i, &p) in phi.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let src = &w.data()[(a * d + i) * block..(a * d + i + 1) * block];
            for (dst, &x) in out[a * block..(a + 1) * block].iter_mut().zip(src) {
                *dst += p * x;
            }
        }
    }
    DenseTensor::new(vec![l, o, r], out)
}

pub fn apply_mpo_to_product(
    op: &TensorTrainOperator,
    ps: &ProductState,
) -> Result<KernelApplication> {
    apply_mpo_to_product_capped(op, ps, DEFAULT_DENSE_CAP)
}

/// Applies the operator to the feature map left to right: absorb site `k`,
/// merge it into the running prefix over the shared bond, keep the output
/// index open, continue. Neither the feature map nor the operator is densified.
pub fn apply_mpo_to_product_capped(
    op: &TensorTrainOperator,
    ps: &ProductState,
    cap: usize,
) -> Result<KernelApplication> {
    if op.in_dims() != ps.dims() {
        return dim_err(format!(
            "operator input dims {:?} do not match feature dims {:?}",
            op.in_dims(),
            ps.dims()
        ));
    }
    let mut sizes = Vec::with_capacity(2 * op.len());
    let mut prefix = vec![1.0];
    let mut open = 1usize;
    let mut bond = 1usize;
    for (w, phi) in op.cores().iter().zip(ps.sites()) {
        let node = absorb_site(w, phi)?;
        sizes.push(node.len());
        let (l, o, r) = (node.shape()[0], node.shape()[1], node.shape()[2]);
        debug_assert_eq!(l, bond);
        let merged = (open as u128) * (o as u128) * (r as u128);
        if merged > cap as u128 {
            return Err(Error::Capacity {
                what: "open output indexes of a kernel application".into(),
                requested: merged,
                limit: cap as u128,
            });
        }
        prefix = matmul(&prefix, node.data(), open, l, o * r);
        open *= o;
        bond = r;
        sizes.push(prefix.len());
    }
    Ok(KernelApplication {
        result: DenseTensor::new(op.out_dims(), prefix)?,
        intermediate_sizes: sizes,
    })
}
