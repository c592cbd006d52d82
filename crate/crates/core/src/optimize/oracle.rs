use crate::error::{Error, Result};

use super::problem::{Method, QudoProblem, Solution, TIE_TOLERANCE};
use super::tsp::{tour_cost, validate_costs, TspVariant};

/// Largest number of configurations the exhaustive QUDO search will visit.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;
/// Largest city count for exhaustive tour search.
pub const BRUTE_FORCE_TSP_CITIES: usize = 9;

fn tied(cost: f64, best: f64) -> bool {
    cost <= best + TIE_TOLERANCE * best.abs().max(1.0)
}

/// Exhaustive minimum over all configurations; ties go to the lexicographically smallest.
pub fn brute_force_qudo(p: &QudoProblem) -> Result<Solution> {
    brute_force_filtered(p, |_| true)
}

/// Exhaustive minimum over configurations where value `v` occurs at most `limits[v]` times.
pub fn brute_force_qudo_with_limits(p: &QudoProblem, limits: &[usize]) -> Result<Solution> {
    if limits.len() != p.d() {
        return crate::error::dim_err(format!("{} limits for {} values", limits.len(), p.d()));
    }
    brute_force_filtered(p, |x| {
        let mut counts = vec![0usize; limits.len()];
        x.iter().all(|&v| {
            counts[v] += 1;
            counts[v] <= limits[v]
        })
    })
}

fn brute_force_filtered(p: &QudoProblem, keep: impl Fn(&[usize]) -> bool) -> Result<Solution> {
    let total = p.configurations();
    if total > BRUTE_FORCE_LIMIT {
        return Err(Error::Capacity {
            what: "exhaustive search configurations".into(),
            requested: total,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let visit = |f: &mut dyn FnMut(&[usize]) -> bool| {
        let mut x = vec![0usize; p.n()];
        loop {
            if keep(&x) && !f(&x) {
                return;
            }
            let mut k = x.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                x[k] += 1;
                if x[k] < p.d() {
                    break;
                }
                x[k] = 0;
            }
        }
    };
    let mut best = f64::INFINITY;
    visit(&mut |x| {
        best = best.min(p.cost(x));
        true
    });
    if best == f64::INFINITY {
        return Err(Error::Infeasible("no configuration satisfies the constraints".into()));
    }
    let mut found = None;
    visit(&mut |x| {
        if tied(p.cost(x), best) {
            found = Some(x.to_vec());
            false
        } else {
            true
        }
    });
    let configuration = found.expect("minimum is attained");
    Ok(Solution {
        cost: p.cost(&configuration),
        configuration,
        method: Method::Oracle,
    })
}

/// Rearranges `x` into the next permutation in lexicographic order; false at the last one.
pub fn next_permutation(x: &mut [usize]) -> bool {
    if x.len() < 2 {
        return false;
    }
    let mut i = x.len() - 1;
    while i > 0 && x[i - 1] >= x[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = x.len() - 1;
    while x[j] <= x[i - 1] {
        j -= 1;
    }
    x.swap(i - 1, j);
    x[i..].reverse();
    true
}

/// Exhaustive minimum over tours. Closed tours start at city 0.
pub fn brute_force_tsp(costs: &[Vec<f64>], variant: TspVariant) -> Result<Solution> {
    let d = validate_costs(costs)?;
    if d > BRUTE_FORCE_TSP_CITIES {
        return Err(Error::Capacity {
            what: "exhaustive tour search cities".into(),
            requested: d as u128,
            limit: BRUTE_FORCE_TSP_CITIES as u128,
        });
    }
    let start = match variant {
        TspVariant::Closed => 1,
        TspVariant::Open => 0,
    };
    let scan = |f: &mut dyn FnMut(&[usize]) -> bool| {
        let mut tour: Vec<usize> = (0..d).collect();
        loop {
            if !f(&tour) || !next_permutation(&mut tour[start..]) {
                return;
            }
        }
    };
    let mut best = f64::INFINITY;
    scan(&mut |t| {
        best = best.min(tour_cost(costs, t, variant));
        true
    });
    let mut found = None;
    scan(&mut |t| {
        if tied(tour_cost(costs, t, variant), best) {
            found = Some(t.to_vec());
            false
        } else {
            true
        }
    });
    let configuration = found.expect("minimum is attained");
    Ok(Solution {
        cost: tour_cost(costs, &configuration, variant),
        configuration,
        method: Method::Oracle,
    })
}
