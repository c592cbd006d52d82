use crate::error::{dim_err, Error, Result};

use super::problem::QudoProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TspVariant {
    /// Returns to the starting city; tours are reported starting at city 0.
    Closed,
    /// Hamiltonian path with free endpoints.
    Open,
}

impl TspVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            TspVariant::Closed => "closed",
            TspVariant::Open => "open",
        }
    }
}

impl std::str::FromStr for TspVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(TspVariant::Closed),
            "open" => Ok(TspVariant::Open),
            other => dim_err(format!("unknown tour variant {other:?}")),
        }
    }
}

/// Checks a square, finite cost matrix with at least two cities; returns the city count.
pub fn validate_costs(costs: &[Vec<f64>]) -> Result<usize> {
    let d = costs.len();
    if d < 2 {
        return dim_err("a tour needs at least two cities");
    }
    if costs.iter().any(|row| row.len() != d) {
        return dim_err("cost matrix must be square");
    }
    if costs.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("cost matrix must be finite".into()));
    }
    Ok(d)
}

/// Total cost of visiting `tour` in order, closing the loop for [`TspVariant::Closed`].
pub fn tour_cost(costs: &[Vec<f64>], tour: &[usize], variant: TspVariant) -> f64 {
    let mut total: f64 = tour.windows(2).map(|w| costs[w[0]][w[1]]).sum();
    if variant == TspVariant::Closed && tour.len() > 1 {
        total += costs[tour[tour.len() - 1]][tour[0]];
    }
    total
}

/// Step `i` of the tour is variable `i`; consecutive steps pay the edge cost.
/// The closed variant adds the return edge to city 0 on the last step, which
/// equals the tour cost for tours that start at city 0.
pub fn tsp_to_qudo(costs: &[Vec<f64>], variant: TspVariant) -> Result<QudoProblem> {
    let d = validate_costs(costs)?;
    let mut local = vec![vec![0.0; d]; d];
    if variant == TspVariant::Closed {
        local[d - 1] = (0..d).map(|x| costs[x][0]).collect();
    }
    QudoProblem::new(d, local, vec![costs.to_vec(); d - 1])
}
