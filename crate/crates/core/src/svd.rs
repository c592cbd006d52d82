//! Truncated singular value decomposition and the policy that governs every
//! approximation in the crate.

use crate::error::{dim_err, Error, Result};
use crate::tensor::DenseTensor;

/// Singular values at or below this fraction of the largest one are treated
/// as exact zeros in every mode.
pub const RANK_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationMode {
    Exact,
    Truncated,
}

/// Bond-dimension cap and relative singular-value tolerance.
///
/// A singular value `s_k` is discarded when `s_k < tolerance * s_1`; values
/// exactly at the threshold are kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    max_bond: Option<usize>,
    tolerance: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::exact()
    }
}

impl TruncationPolicy {
    pub fn exact() -> Self {
        Self {
            max_bond: None,
            tolerance: 0.0,
        }
    }

    pub fn new(max_bond: Option<usize>, tolerance: f64) -> Result<Self> {
        if max_bond == Some(0) {
            return dim_err("max bond dimension must be positive");
        }
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::Numerical(format!(
                "singular-value tolerance must be finite and nonnegative, got {tolerance}"
            )));
        }
        Ok(Self {
            max_bond,
            tolerance,
        })
    }

    pub fn with_max_bond(max_bond: usize) -> Result<Self> {
        Self::new(Some(max_bond), 0.0)
    }

    pub fn max_bond(&self) -> Option<usize> {
        self.max_bond
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn mode(&self) -> TruncationMode {
        if self.max_bond.is_none() && self.tolerance == 0.0 {
            TruncationMode::Exact
        } else {
            TruncationMode::Truncated
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode() == TruncationMode::Exact
    }

    /// Number of leading singular values to keep from a nonincreasing list.
    /// Always at least one, so that a zero matrix still yields a valid factor.
    pub fn kept_rank(&self, singular_values: &[f64]) -> usize {
        let Some(&largest) = singular_values.first() else {
            return 0;
        };
        let floor = largest * RANK_CUTOFF;
        let threshold = largest * self.tolerance;
        let mut rank = singular_values
            .iter()
            .take_while(|&&s| s > floor && s >= threshold)
            .count();
        if let Some(cap) = self.max_bond {
            rank = rank.min(cap);
        }
        rank.max(1)
    }
}

/// `m ≈ u · diag(s) · v`, with `u` of shape `(rows, r)` and `v` of shape `(r, cols)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseTensor,
    pub s: Vec<f64>,
    pub v: DenseTensor,
    /// Sum of squares of the dropped singular values.
    pub discarded_weight: f64,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `u · diag(s) · v` as a dense matrix.
    pub fn reconstruct(&self) -> DenseTensor {
        let (rows, r) = (self.u.shape()[0], self.rank());
        let cols = self.v.shape()[1];
        let mut us = self.u.data().to_vec();
        for row in us.chunks_mut(r) {
            for (x, s) in row.iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        let data = crate::tensor::matmul(&us, self.v.data(), rows, r, cols);
        DenseTensor::new(vec![rows, cols], data).expect("consistent factor shapes")
    }
}

/// Singular value decomposition truncated according to `policy`.
///
/// Each left singular vector is oriented so its first nonzero entry is
/// positive (the matching right vector is flipped with it), which makes the
/// factors reproducible.
pub fn truncated_svd(m: &DenseTensor, policy: &TruncationPolicy) -> Result<Svd> {
    if m.rank() != 2 {
        return dim_err(format!("SVD needs a matrix, got shape {:?}", m.shape()));
    }
    if !m.is_finite() {
        return Err(Error::Numerical("non-finite entry in SVD input".into()));
    }
    let (rows, cols) = (m.shape()[0], m.shape()[1]);
    let full = jacobi_svd(m.data(), rows, cols)?;
    let r = policy.kept_rank(&full.values);
    let discarded_weight = full.values[r..].iter().fold(0.0, |acc, s| acc + s * s);

    let mut u_data = vec![0.0; rows * r];
    let mut v_data = vec![0.0; r * cols];
    for j in 0..r {
        let left = &full.left[j];
        let scale = left.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let pivot = left.iter().copied().find(|x| x.abs() > 1e-12 * scale);
        let sign = if pivot.is_some_and(|p| p < 0.0) { -1.0 } else { 1.0 };
        for i in 0..rows {
            u_data[i * r + j] = sign * left[i];
        }
        for c in 0..cols {
            v_data[j * cols + c] = sign * full.right[j][c];
        }
    }
    Ok(Svd {
        u: DenseTensor::new(vec![rows, r], u_data)?,
        s: full.values[..r].to_vec(),
        v: DenseTensor::new(vec![r, cols], v_data)?,
        discarded_weight,
    })
}

/// Singular triplets sorted by nonincreasing value.
struct FullSvd {
    values: Vec<f64>,
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD of a row-major `rows × cols` matrix.
///
/// Column pairs of the working copy are rotated until all are mutually
/// orthogonal; the column norms are then the singular values. Wide matrices
/// are handled through their transpose.
fn jacobi_svd(data: &[f64], rows: usize, cols: usize) -> Result<FullSvd> {
    if rows < cols {
        let transposed: Vec<f64> = (0..cols)
            .flat_map(|c| (0..rows).map(move |r| data[r * cols + c]))
            .collect();
        let t = jacobi_svd(&transposed, cols, rows)?;
        return Ok(FullSvd {
            values: t.values,
            left: t.right,
            right: t.left,
        });
    }
    let n = cols;
    let mut work: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..rows).map(|r| data[r * cols + c]).collect())
        .collect();
    let mut basis: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..n).map(|r| (r == c) as u8 as f64).collect())
        .collect();

    let frob_sq: f64 = data.iter().map(|x| x * x).sum();
    // columns below this squared norm are numerically zero
    let negligible = frob_sq * (f64::EPSILON * f64::EPSILON) * 1e-4;
    let tol = f64::EPSILON * (rows as f64).sqrt();
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (wp, wq) = (&work[p], &work[q]);
                    let mut a = 0.0;
                    let mut b = 0.0;
                    let mut g = 0.0;
                    for (x, y) in wp.iter().zip(wq) {
                        a += x * x;
                        b += y * y;
                        g += x * y;
                    }
                    (a, b, g)
                };
                if alpha.min(beta) <= negligible || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut work, p, q, c, s);
                rotate(&mut basis, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Numerical("Jacobi SVD did not converge".into()));
    }

    let norms: Vec<f64> = work
        .iter()
        .map(|w| w.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let mut values = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        if !sigma.is_finite() {
            return Err(Error::Numerical("non-finite singular value".into()));
        }
        let u = if sigma > 0.0 {
            work[j].iter().map(|x| x / sigma).collect()
        } else {
            // any unit vector; only reachable for zero columns
            let mut e = vec![0.0; rows];
            e[k.min(rows - 1)] = 1.0;
            e
        };
        values.push(sigma);
        left.push(u);
        right.push(basis[j].clone());
    }
    Ok(FullSvd {
        values,
        left,
        right,
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let (wp, wq) = (&mut head[p], &mut tail[0]);
    for (x, y) in wp.iter_mut().zip(wq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}
