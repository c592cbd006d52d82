use crate::error::{dim_err, Error, Result};

/// Relative margin within which two candidates count as tied; ties go to the
/// lexicographically smallest configuration.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Nearest-neighbor discrete cost model over `n` variables taking values in `0..d`:
/// `cost(x) = Σ_i local[i][x_i] + Σ_i coupling[i][x_i][x_{i+1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QudoProblem {
    d: usize,
    local: Vec<Vec<f64>>,
    /// Row-major `d × d` tables, one per neighboring pair.
    coupling: Vec<Vec<f64>>,
}

impl QudoProblem {
    pub fn new(d: usize, local: Vec<Vec<f64>>, coupling: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = local.len();
        if n == 0 {
            return dim_err("a problem needs at least one variable");
        }
        if d < 2 {
            return dim_err(format!("cardinality must be at least 2, got {d}"));
        }
        if coupling.len() != n - 1 {
            return dim_err(format!(
                "{n} variables need {} coupling tables, got {}",
                n - 1,
                coupling.len()
            ));
        }
        if let Some(i) = local.iter().position(|v| v.len() != d) {
            return dim_err(format!("local table {i} has length {}, expected {d}", local[i].len()));
        }
        let mut flat = Vec::with_capacity(n - 1);
        for (i, table) in coupling.into_iter().enumerate() {
            if table.len() != d || table.iter().any(|row| row.len() != d) {
                return dim_err(format!("coupling table {i} is not {d}x{d}"));
            }
            flat.push(table.into_iter().flatten().collect::<Vec<f64>>());
        }
        let finite = local.iter().flatten().chain(flat.iter().flatten()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::Numerical("cost tables must be finite".into()));
        }
        Ok(Self {
            d,
            local,
            coupling: flat,
        })
    }

    pub fn zeros(n: usize, d: usize) -> Result<Self> {
        Self::new(
            d,
            vec![vec![0.0; d]; n],
            vec![vec![vec![0.0; d]; d]; n.saturating_sub(1)],
        )
    }

    pub fn n(&self) -> usize {
        self.local.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn local(&self, site: usize) -> &[f64] {
        &self.local[site]
    }

    /// Cost of `(x_site, x_{site+1}) = (a, b)`.
    pub fn coupling(&self, site: usize, a: usize, b: usize) -> f64 {
        self.coupling[site][a * self.d + b]
    }

    pub fn coupling_table(&self, site: usize) -> &[f64] {
        &self.coupling[site]
    }

    pub fn local_tables(&self) -> &[Vec<f64>] {
        &self.local
    }

    /// Coupling tables as nested `d × d` rows.
    pub fn coupling_tables(&self) -> Vec<Vec<Vec<f64>>> {
        self.coupling
            .iter()
            .map(|t| t.chunks(self.d).map(<[f64]>::to_vec).collect())
            .collect()
    }

    /// Panics if `config` has the wrong length or a value out of range.
    pub fn cost(&self, config: &[usize]) -> f64 {
        assert_eq!(config.len(), self.n(), "configuration length");
        let mut total = 0.0;
        for (i, &x) in config.iter().enumerate() {
            total += self.local[i][x];
            if i + 1 < config.len() {
                total += self.coupling(i, x, config[i + 1]);
            }
        }
        total
    }

    /// Sum over all tables of `max - min`; bounds the spread of `cost` over all configurations.
    pub fn spread(&self) -> f64 {
        self.local
            .iter()
            .chain(&self.coupling)
            .map(|t| {
                let (lo, hi) = min_max(t);
                hi - lo
            })
            .sum()
    }

    /// Number of configurations, `d^n`, saturating.
    pub fn configurations(&self) -> u128 {
        (0..self.n()).fold(1u128, |acc, _| acc.saturating_mul(self.d as u128))
    }
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Oracle,
    IteExact,
    IteGreedy,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::IteExact => "ite-exact",
            Method::IteGreedy => "ite-greedy",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub configuration: Vec<usize>,
    pub cost: f64,
    pub method: Method,
}
