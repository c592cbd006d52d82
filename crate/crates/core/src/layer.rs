//! Matrix and dense-layer compression into tensor-train form.
//!
//! A `rows × cols` matrix is split into `2n` indexes (row factors then column
//! factors), each column factor is paired with a row factor, the pairs are
//! merged into `n` site indexes, the resulting tensor is decomposed by
//! TT-SVD, and every site index is split back into `(input, output)`.

use crate::error::{dim_err, Result};
use crate::mpo::TensorTrainOperator;
use crate::svd::TruncationPolicy;
use crate::tensor::{DenseTensor, GroupingPlan};
use crate::tt::{tt_svd_detailed, Decomposition, TensorTrain, DEFAULT_DENSE_CAP};

/// Factorization of a matrix shape into per-site row and column factors.
///
/// Site `i` carries row factor `i` as its output index and column factor
/// `pairing[i]` as its input index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapePlan {
    row_factors: Vec<usize>,
    col_factors: Vec<usize>,
    pairing: Vec<usize>,
}

impl ShapePlan {
    pub fn new(row_factors: Vec<usize>, col_factors: Vec<usize>) -> Result<Self> {
        let pairing = (0..col_factors.len()).collect();
        Self::with_pairing(row_factors, col_factors, pairing)
    }

    pub fn with_pairing(
        row_factors: Vec<usize>,
        col_factors: Vec<usize>,
        pairing: Vec<usize>,
    ) -> Result<Self> {
        if row_factors.is_empty() {
            return dim_err("a shape plan needs at least one site");
        }
        if row_factors.len() != col_factors.len() || pairing.len() != col_factors.len() {
            return dim_err(format!(
                "{} row factors, {} column factors and {} pairings",
                row_factors.len(),
                col_factors.len(),
                pairing.len()
            ));
        }
        if row_factors.contains(&0) || col_factors.contains(&0) {
            return dim_err("factors must be positive");
        }
        let mut seen = vec![false; pairing.len()];
        for &p in &pairing {
            if p >= seen.len() || seen[p] {
                return dim_err(format!("{pairing:?} is not a permutation"));
            }
            seen[p] = true;
        }
        Ok(Self {
            row_factors,
            col_factors,
            pairing,
        })
    }

    /// Splits `rows` and `cols` into `sites` factors each, spreading prime
    /// factors as evenly as possible (missing factors are 1).
    pub fn balanced(rows: usize, cols: usize, sites: usize) -> Result<Self> {
        if sites == 0 || rows == 0 || cols == 0 {
            return dim_err("rows, cols and sites must be positive");
        }
        Self::new(balanced_factors(rows, sites), balanced_factors(cols, sites))
    }

    pub fn sites(&self) -> usize {
        self.row_factors.len()
    }

    pub fn rows(&self) -> usize {
        self.row_factors.iter().product()
    }

    pub fn cols(&self) -> usize {
        self.col_factors.iter().product()
    }

    pub fn row_factors(&self) -> &[usize] {
        &self.row_factors
    }

    pub fn col_factors(&self) -> &[usize] {
        &self.col_factors
    }

    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    /// Input dimension of each operator site.
    pub fn site_in_dims(&self) -> Vec<usize> {
        self.pairing.iter().map(|&p| self.col_factors[p]).collect()
    }

    pub fn site_out_dims(&self) -> Vec<usize> {
        self.row_factors.clone()
    }

    fn check_matrix(&self, m: &DenseTensor) -> Result<()> {
        if m.rank() != 2 || m.shape() != [self.rows(), self.cols()] {
            return dim_err(format!(
                "plan describes a {}x{} matrix, got shape {:?}",
                self.rows(),
                self.cols(),
                m.shape()
            ));
        }
        Ok(())
    }

    /// Reorders an input vector's split indexes into site order.
    fn input_to_sites(&self, x: &DenseTensor) -> Result<DenseTensor> {
        let split = x.clone().reshape(self.col_factors.clone())?;
        split.permute(&self.pairing)
    }

    /// Maps a dense operator matrix (columns in site order) back to natural column order.
    pub fn restore_matrix(&self, op_matrix: &DenseTensor) -> Result<DenseTensor> {
        let n = self.sites();
        let mut shape = vec![self.rows()];
        shape.extend(self.site_in_dims());
        let mut inverse = vec![0; n];
        for (site, &p) in self.pairing.iter().enumerate() {
            inverse[p] = site;
        }
        let perm: Vec<usize> = std::iter::once(0).chain(inverse.iter().map(|s| s + 1)).collect();
        op_matrix
            .clone()
            .reshape(shape)?
            .permute(&perm)?
            .reshape(vec![self.rows(), self.cols()])
    }
}

fn balanced_factors(mut n: usize, sites: usize) -> Vec<usize> {
    let mut primes = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            primes.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    let mut factors = vec![1usize; sites];
    for &prime in primes.iter().rev() {
        let smallest = (0..sites).min_by_key(|&i| (factors[i], i)).expect("sites > 0");
        factors[smallest] *= prime;
    }
    factors
}

/// Sizes and errors of a compression.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionReport {
    pub dense_params: usize,
    pub compressed_params: usize,
    /// Measured relative Frobenius error, present when the dense comparison fit under the cap.
    pub relative_error: Option<f64>,
    /// `sqrt(sum of discarded weights) / ‖original‖`.
    pub error_bound: f64,
    /// Discarded weight per link (layer reports list weight links, then bias links).
    pub discarded: Vec<f64>,
}

impl CompressionReport {
    /// Stored over dense parameter count; below 1 means the train is smaller.
    pub fn compression_ratio(&self) -> f64 {
        self.compressed_params as f64 / self.dense_params as f64
    }
}

/// Matrix to operator train through the split / pair / group / TT-SVD / split pipeline.
pub fn matrix_to_mpo(
    a: &DenseTensor,
    plan: &ShapePlan,
    policy: &TruncationPolicy,
) -> Result<TensorTrainOperator> {
    Ok(matrix_to_mpo_detailed(a, plan, policy)?.0)
}

/// [`matrix_to_mpo`] also returning the discarded weight per link.
pub fn matrix_to_mpo_detailed(
    a: &DenseTensor,
    plan: &ShapePlan,
    policy: &TruncationPolicy,
) -> Result<(TensorTrainOperator, Vec<f64>)> {
    plan.check_matrix(a)?;
    let n = plan.sites();
    // 1) split rows and columns
    let split = a
        .split_index(1, plan.col_factors())?
        .split_index(0, plan.row_factors())?;
    // 2) pair each site's (input, output) indexes and 3) group the pairs
    let groups: Vec<Vec<usize>> = (0..n).map(|i| vec![n + plan.pairing[i], i]).collect();
    let grouping = GroupingPlan::from_groups(split.shape().to_vec(), &groups)?;
    let grouped = split.group_indexes(&grouping)?;
    // 4) iterative SVD
    let Decomposition { train, discarded } = tt_svd_detailed(&grouped, policy)?;
    // 5) split every site index back into (input, output)
    let op = TensorTrainOperator::from_train(&train, &plan.site_in_dims(), &plan.site_out_dims())?;
    Ok((op, discarded))
}

/// Dense matrix of an operator produced by [`matrix_to_mpo`] with the same plan.
pub fn mpo_to_matrix(op: &TensorTrainOperator, plan: &ShapePlan) -> Result<DenseTensor> {
    plan.restore_matrix(&op.to_matrix()?)
}

pub fn vector_to_mps(
    c: &[f64],
    factor_dims: &[usize],
    policy: &TruncationPolicy,
) -> Result<TensorTrain> {
    Ok(vector_to_mps_detailed(c, factor_dims, policy)?.train)
}

pub fn vector_to_mps_detailed(
    c: &[f64],
    factor_dims: &[usize],
    policy: &TruncationPolicy,
) -> Result<Decomposition> {
    let v = DenseTensor::new(vec![c.len()], c.to_vec())?;
    tt_svd_detailed(&v.split_index(0, factor_dims)?, policy)
}

/// A dense layer `v = A x + c` held as an operator train and a bias train.
#[derive(Debug, Clone)]
pub struct CompressedLayer {
    pub weights: TensorTrainOperator,
    pub bias: TensorTrain,
    pub plan: ShapePlan,
    pub policy: TruncationPolicy,
}

impl CompressedLayer {
    pub fn param_count(&self) -> usize {
        self.weights.param_count() + self.bias.param_count()
    }

    /// Layer output as a train; the input is decomposed exactly, the bias is
    /// added as a direct sum, and the sum is rounded to its numerical rank.
    pub fn apply_to_train(&self, x: &TensorTrain) -> Result<TensorTrain> {
        self.weights
            .apply(x, None)?
            .add(&self.bias)?
            .round(&TruncationPolicy::exact())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.plan.cols() {
            return dim_err(format!(
                "layer expects an input of length {}, got {}",
                self.plan.cols(),
                x.len()
            ));
        }
        let sites = self
            .plan
            .input_to_sites(&DenseTensor::new(vec![x.len()], x.to_vec())?)?;
        let x_tt = crate::tt::tt_svd(&sites, &TruncationPolicy::exact())?;
        Ok(self.apply_to_train(&x_tt)?.to_dense()?.into_data())
    }

    pub fn weights_dense(&self) -> Result<DenseTensor> {
        mpo_to_matrix(&self.weights, &self.plan)
    }
}

pub fn apply_compressed_layer(layer: &CompressedLayer, x: &[f64]) -> Result<Vec<f64>> {
    layer.apply(x)
}

/// Compresses `A` into an operator train and `c` into a train over the row factors.
pub fn compress_layer(
    a: &DenseTensor,
    c: &[f64],
    plan: &ShapePlan,
    policy: &TruncationPolicy,
) -> Result<(CompressedLayer, CompressionReport)> {
    if c.len() != plan.rows() {
        return dim_err(format!(
            "bias of length {} for a layer with {} outputs",
            c.len(),
            plan.rows()
        ));
    }
    let (weights, mut discarded) = matrix_to_mpo_detailed(a, plan, policy)?;
    let bias = vector_to_mps_detailed(c, plan.row_factors(), policy)?;
    discarded.extend(&bias.discarded);
    let layer = CompressedLayer {
        weights,
        bias: bias.train,
        plan: plan.clone(),
        policy: *policy,
    };

    let (rows, cols) = (plan.rows(), plan.cols());
    let reference_sq = a.frobenius_norm().powi(2) + c.iter().map(|x| x * x).sum::<f64>();
    let relative = |abs: f64| {
        if reference_sq > 0.0 {
            abs / reference_sq.sqrt()
        } else {
            abs
        }
    };
    let relative_error = if rows * cols <= DEFAULT_DENSE_CAP {
        let w_err = layer.weights_dense()?.distance(a)?;
        let b_dense = layer.bias.to_dense()?;
        let b_err_sq: f64 = b_dense
            .data()
            .iter()
            .zip(c)
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        Some(relative((w_err * w_err + b_err_sq).sqrt()))
    } else {
        None
    };
    let report = CompressionReport {
        dense_params: rows * (cols + 1),
        compressed_params: layer.param_count(),
        relative_error,
        error_bound: relative(discarded.iter().sum::<f64>().sqrt()),
        discarded,
    };
    Ok((layer, report))
}

/// Reshapes data to `factor_dims` (its own shape when `None`) and decomposes it.
pub fn compress_dataset(
    t: &DenseTensor,
    factor_dims: Option<&[usize]>,
    policy: &TruncationPolicy,
) -> Result<(TensorTrain, CompressionReport)> {
    let shaped = match factor_dims {
        Some(dims) => t.clone().reshape(dims.to_vec())?,
        None => t.clone(),
    };
    let Decomposition { train, discarded } = tt_svd_detailed(&shaped, policy)?;
    let norm = shaped.frobenius_norm();
    let relative = |abs: f64| if norm > 0.0 { abs / norm } else { abs };
    let relative_error = if shaped.len() <= DEFAULT_DENSE_CAP {
        Some(relative(train.to_dense()?.distance(&shaped)?))
    } else {
        None
    };
    let report = CompressionReport {
        dense_params: shaped.len(),
        compressed_params: train.param_count(),
        relative_error,
        error_bound: relative(discarded.iter().sum::<f64>().sqrt()),
        discarded,
    };
    Ok((train, report))
}
