//! Imaginary-time-evolution solver for nearest-neighbor discrete optimization.
//!
//! A configuration `x` of `n` variables in `0..d` is encoded as a basis state;
//! the state with amplitudes `exp(-τ cost(x))` is built as a tensor train,
//! constraints are imposed by diagonal operator layers, and the answer is the
//! configuration with the largest amplitude.

mod constraints;
mod ite;
mod oracle;
mod problem;
mod readout;
mod solver;
mod tsp;

pub use constraints::{apply_non_repetition, apply_occurrence_limits, fix_value, occurrence_limit_mpo};
pub use ite::{ite_state, uniform_state, AmplitudeState, IteConfig, Readout, Tau};
pub use oracle::{
    brute_force_qudo, brute_force_qudo_with_limits, brute_force_tsp, next_permutation,
    BRUTE_FORCE_LIMIT, BRUTE_FORCE_TSP_CITIES,
};
pub use problem::{Method, QudoProblem, Solution, TIE_TOLERANCE};
pub use readout::{readout_exact, readout_greedy};
pub use solver::{read_out, solve_qudo, solve_qudo_with_limits, solve_tsp};
pub use tsp::{tour_cost, tsp_to_qudo, validate_costs, TspVariant};
