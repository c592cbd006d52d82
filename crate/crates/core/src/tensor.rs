//! Dense row-major tensors and the index bookkeeping built on top of them.
//!
//! Every tensor in the crate stores its elements in row-major order (last
//! index fastest). Grouping and splitting are therefore pure relabelings of
//! the flat buffer once the axes are in the right order, and both are exact
//! inverses of each other.

use crate::error::{dim_err, Error, Result};

/// A multi-dimensional array of `f64` with an explicit shape.
///
/// Rank 0 is a scalar holding exactly one element.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_shape(&shape)?;
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return dim_err(format!(
                "shape {shape:?} holds {expected} elements but {} were given",
                data.len()
            ));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        Self::filled(shape, 0.0)
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Result<Self> {
        check_shape(&shape)?;
        let len = shape.iter().product();
        Ok(Self {
            shape,
            data: vec![value; len],
        })
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    /// Builds a tensor by evaluating `f` at every multi-index in row-major order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_shape(&shape)?;
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, &shape);
        }
        Ok(Self { shape, data })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(vec![n, n], |i| if i[0] == i[1] { 1.0 } else { 0.0 })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false: even a scalar holds one element.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.shape)
    }

    /// Flat offset of a multi-index. Panics when the index is out of range.
    pub fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.shape.len(), "index rank mismatch");
        let mut off = 0;
        for (&i, &d) in index.iter().zip(&self.shape) {
            assert!(i < d, "index {index:?} out of range for shape {:?}", self.shape);
            off = off * d + i;
        }
        off
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let off = self.offset(index);
        self.data[off] = value;
    }

    /// Reinterprets the flat buffer under a new shape with the same element count.
    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.shape != other.shape {
            return dim_err(format!(
                "cannot compare shapes {:?} and {:?}",
                self.shape, other.shape
            ));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// `‖self − reference‖ / ‖reference‖`, or the absolute distance when the reference is zero.
    pub fn relative_error(&self, reference: &Self) -> Result<f64> {
        let dist = self.distance(reference)?;
        let norm = reference.frobenius_norm();
        Ok(if norm > 0.0 { dist / norm } else { dist })
    }

    /// Reorders axes: output axis `k` is input axis `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.rank())?;
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let in_strides = self.strides();
        let out_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mapped_strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; out_shape.len()];
        let mut src = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[src]);
            // odometer step that keeps the source offset in sync
            for ax in (0..idx.len()).rev() {
                idx[ax] += 1;
                src += mapped_strides[ax];
                if idx[ax] < out_shape[ax] {
                    break;
                }
                src -= mapped_strides[ax] * out_shape[ax];
                idx[ax] = 0;
            }
        }
        Ok(Self {
            shape: out_shape,
            data,
        })
    }

    /// Applies the plan's permutation and merges each group into one index.
    /// A merged index enumerates its constituents row-major (first constituent slowest).
    pub fn group_indexes(&self, plan: &GroupingPlan) -> Result<Self> {
        if self.shape != plan.source_shape {
            return dim_err(format!(
                "grouping plan expects shape {:?}, tensor has {:?}",
                plan.source_shape, self.shape
            ));
        }
        self.permute(&plan.permutation)?
            .reshape(plan.grouped_shape())
    }

    /// Exact inverse of [`group_indexes`](Self::group_indexes) for the same plan.
    pub fn split_groups(&self, plan: &GroupingPlan) -> Result<Self> {
        let grouped = plan.grouped_shape();
        if self.shape != grouped {
            return dim_err(format!(
                "plan produces shape {grouped:?}, tensor has {:?}",
                self.shape
            ));
        }
        self.clone()
            .reshape(plan.permuted_shape())?
            .permute(&plan.inverse_permutation())
    }

    /// Factors one axis into several, row-major (first factor slowest).
    pub fn split_index(&self, axis: usize, factor_dims: &[usize]) -> Result<Self> {
        if axis >= self.rank() {
            return dim_err(format!("axis {axis} out of range for rank {}", self.rank()));
        }
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return dim_err(format!("invalid split factors {factor_dims:?}"));
        }
        let prod: usize = factor_dims.iter().product();
        if prod != self.shape[axis] {
            return dim_err(format!(
                "factors {factor_dims:?} multiply to {prod}, axis {axis} has dimension {}",
                self.shape[axis]
            ));
        }
        let mut shape = Vec::with_capacity(self.rank() + factor_dims.len() - 1);
        shape.extend_from_slice(&self.shape[..axis]);
        shape.extend_from_slice(factor_dims);
        shape.extend_from_slice(&self.shape[axis + 1..]);
        Ok(Self {
            shape,
            data: self.data.clone(),
        })
    }

    /// Sums over the diagonal of two axes, removing both.
    pub fn trace_axes(&self, first: usize, second: usize) -> Result<Self> {
        if first == second || first >= self.rank() || second >= self.rank() {
            return dim_err(format!("invalid trace axes ({first}, {second})"));
        }
        if self.shape[first] != self.shape[second] {
            return dim_err(format!(
                "trace over axes of dimension {} and {}",
                self.shape[first], self.shape[second]
            ));
        }
        let rest: Vec<usize> = (0..self.rank()).filter(|&a| a != first && a != second).collect();
        let mut perm = rest.clone();
        perm.push(first);
        perm.push(second);
        let moved = self.permute(&perm)?;
        let n = self.shape[first];
        let out_shape: Vec<usize> = rest.iter().map(|&a| self.shape[a]).collect();
        let outer: usize = out_shape.iter().product();
        let data = (0..outer)
            .map(|o| (0..n).map(|i| moved.data[o * n * n + i * n + i]).sum())
            .collect();
        Ok(Self {
            shape: out_shape,
            data,
        })
    }
}

/// Describes how to merge the axes of a tensor: first permute, then merge
/// consecutive runs of the permuted axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingPlan {
    source_shape: Vec<usize>,
    permutation: Vec<usize>,
    group_sizes: Vec<usize>,
}

impl GroupingPlan {
    /// `group_sizes[g]` is the number of consecutive permuted axes merged into output axis `g`.
    pub fn new(
        source_shape: Vec<usize>,
        permutation: Vec<usize>,
        group_sizes: Vec<usize>,
    ) -> Result<Self> {
        check_shape(&source_shape)?;
        check_permutation(&permutation, source_shape.len())?;
        if group_sizes.contains(&0) {
            return dim_err("empty group in grouping plan");
        }
        if group_sizes.iter().sum::<usize>() != source_shape.len() {
            return dim_err(format!(
                "groups {group_sizes:?} do not partition {} axes",
                source_shape.len()
            ));
        }
        Ok(Self {
            source_shape,
            permutation,
            group_sizes,
        })
    }

    /// Groups listed as explicit source axes; the permutation is their concatenation.
    pub fn from_groups(source_shape: Vec<usize>, groups: &[Vec<usize>]) -> Result<Self> {
        let permutation: Vec<usize> = groups.iter().flatten().copied().collect();
        let sizes = groups.iter().map(Vec::len).collect();
        Self::new(source_shape, permutation, sizes)
    }

    /// Merges consecutive axes without reordering.
    pub fn contiguous(source_shape: Vec<usize>, group_sizes: Vec<usize>) -> Result<Self> {
        let perm = (0..source_shape.len()).collect();
        Self::new(source_shape, perm, group_sizes)
    }

    pub fn source_shape(&self) -> &[usize] {
        &self.source_shape
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn permuted_shape(&self) -> Vec<usize> {
        self.permutation.iter().map(|&p| self.source_shape[p]).collect()
    }

    pub fn grouped_shape(&self) -> Vec<usize> {
        let permuted = self.permuted_shape();
        let mut out = Vec::with_capacity(self.group_sizes.len());
        let mut start = 0;
        for &size in &self.group_sizes {
            out.push(permuted[start..start + size].iter().product());
            start += size;
        }
        out
    }

    pub fn inverse_permutation(&self) -> Vec<usize> {
        invert_permutation(&self.permutation)
    }
}

/// Contracts `a` and `b` over the listed `(axis of a, axis of b)` pairs.
///
/// The result keeps the remaining axes of `a` followed by those of `b`, each
/// in their original order. With no pairs this is the outer product.
pub fn contract_pair(
    a: &DenseTensor,
    b: &DenseTensor,
    axis_pairs: &[(usize, usize)],
) -> Result<DenseTensor> {
    let mut used_a = vec![false; a.rank()];
    let mut used_b = vec![false; b.rank()];
    for &(ia, ib) in axis_pairs {
        if ia >= a.rank() || ib >= b.rank() {
            return dim_err(format!("contraction axes ({ia}, {ib}) out of range"));
        }
        if used_a[ia] || used_b[ib] {
            return dim_err(format!("axis paired twice in ({ia}, {ib})"));
        }
        if a.shape[ia] != b.shape[ib] {
            return dim_err(format!(
                "paired axes ({ia}, {ib}) have dimensions {} and {}",
                a.shape[ia], b.shape[ib]
            ));
        }
        used_a[ia] = true;
        used_b[ib] = true;
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&i| !used_a[i]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&i| !used_b[i]).collect();

    let perm_a: Vec<usize> = free_a
        .iter()
        .copied()
        .chain(axis_pairs.iter().map(|p| p.0))
        .collect();
    let perm_b: Vec<usize> = axis_pairs
        .iter()
        .map(|p| p.1)
        .chain(free_b.iter().copied())
        .collect();
    let pa = a.permute(&perm_a)?;
    let pb = b.permute(&perm_b)?;

    let m: usize = free_a.iter().map(|&i| a.shape[i]).product();
    let n: usize = free_b.iter().map(|&i| b.shape[i]).product();
    let k: usize = axis_pairs.iter().map(|p| a.shape[p.0]).product();
    let data = matmul(&pa.data, &pb.data, m, k, n);

    let shape = free_a
        .iter()
        .map(|&i| a.shape[i])
        .chain(free_b.iter().map(|&i| b.shape[i]))
        .collect();
    Ok(DenseTensor { shape, data })
}

/// Row-major `(m×k)·(k×n)`.
pub(crate) fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aik = a[i * k + p];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in row.iter_mut().zip(brow) {
                *o += aik * bv;
            }
        }
    }
    out
}

pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; shape.len()];
    for ax in (0..shape.len().saturating_sub(1)).rev() {
        strides[ax] = strides[ax + 1] * shape[ax + 1];
    }
    strides
}

/// Row-major odometer increment; wraps to all zeros after the last index.
pub(crate) fn advance(idx: &mut [usize], shape: &[usize]) {
    for ax in (0..idx.len()).rev() {
        idx[ax] += 1;
        if idx[ax] < shape[ax] {
            return;
        }
        idx[ax] = 0;
    }
}

pub(crate) fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.contains(&0) {
        return dim_err(format!("zero-sized dimension in shape {shape:?}"));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .map(|_| ())
        .ok_or_else(|| Error::Dimension(format!("shape {shape:?} overflows")))
}

fn check_permutation(perm: &[usize], rank: usize) -> Result<()> {
    if perm.len() != rank {
        return dim_err(format!(
            "permutation of length {} for rank {rank}",
            perm.len()
        ));
    }
    let mut seen = vec![false; rank];
    for &p in perm {
        if p >= rank || seen[p] {
            return dim_err(format!("{perm:?} is not a permutation"));
        }
        seen[p] = true;
    }
    Ok(())
}
