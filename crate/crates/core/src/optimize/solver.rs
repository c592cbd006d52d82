use crate::error::Result;

use super::constraints::{apply_non_repetition, apply_occurrence_limits, fix_value};
use super::ite::{ite_state, AmplitudeState, IteConfig, Readout};
use super::problem::{Method, QudoProblem, Solution};
use super::readout::{readout_exact, readout_greedy};
use super::tsp::{tour_cost, tsp_to_qudo, TspVariant};

pub fn read_out(s: &AmplitudeState, cfg: &IteConfig) -> Result<(Vec<usize>, Method)> {
    match cfg.readout {
        Readout::Exact => Ok((readout_exact(s, cfg.dense_cap)?, Method::IteExact)),
        Readout::Greedy => Ok((readout_greedy(s)?, Method::IteGreedy)),
    }
}

pub fn solve_qudo(p: &QudoProblem, cfg: &IteConfig) -> Result<Solution> {
    let s = ite_state(p, cfg)?;
    finish(p, &s, cfg)
}

/// Minimizes subject to value `v` occurring at most `limits[v]` times.
pub fn solve_qudo_with_limits(p: &QudoProblem, limits: &[usize], cfg: &IteConfig) -> Result<Solution> {
    let s = apply_occurrence_limits(&ite_state(p, cfg)?, limits, cfg)?;
    finish(p, &s, cfg)
}

fn finish(p: &QudoProblem, s: &AmplitudeState, cfg: &IteConfig) -> Result<Solution> {
    let (configuration, method) = read_out(s, cfg)?;
    Ok(Solution {
        cost: p.cost(&configuration),
        configuration,
        method,
    })
}

pub fn solve_tsp(costs: &[Vec<f64>], variant: TspVariant, cfg: &IteConfig) -> Result<Solution> {
    let p = tsp_to_qudo(costs, variant)?;
    let mut s = ite_state(&p, cfg)?;
    if variant == TspVariant::Closed {
        s = fix_value(&s, 0, 0)?;
    }
    let s = apply_non_repetition(&s, cfg)?;
    let (configuration, method) = read_out(&s, cfg)?;
    Ok(Solution {
        cost: tour_cost(costs, &configuration, variant),
        configuration,
        method,
    })
}
