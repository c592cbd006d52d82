use crate::error::{Error, Result};
use crate::svd::TruncationPolicy;
use crate::tensor::DenseTensor;
use crate::tt::{TensorTrain, DEFAULT_DENSE_CAP};

use super::problem::QudoProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau {
    /// `10 / spread`, so the best and worst configurations differ by about `e^10` in amplitude.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// Densify and take the largest amplitude. Limited by `dense_cap`.
    Exact,
    /// Site-by-site argmax of the conditional marginals. Never densifies.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IteConfig {
    pub tau: Tau,
    /// Rounding applied after each constraint layer.
    pub policy: TruncationPolicy,
    pub readout: Readout,
    pub dense_cap: usize,
}

impl Default for IteConfig {
    fn default() -> Self {
        Self {
            tau: Tau::Auto,
            policy: TruncationPolicy::exact(),
            readout: Readout::Exact,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

impl IteConfig {
    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Numerical(format!(
                "imaginary time must be finite and positive, got {tau}"
            )));
        }
        self.tau = Tau::Fixed(tau);
        Ok(self)
    }

    pub fn with_readout(mut self, readout: Readout) -> Self {
        self.readout = readout;
        self
    }

    pub fn with_policy(mut self, policy: TruncationPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn effective_tau(&self, p: &QudoProblem) -> f64 {
        match self.tau {
            Tau::Fixed(t) => t,
            Tau::Auto => {
                let spread = p.spread();
                if spread > 0.0 {
                    10.0 / spread
                } else {
                    1.0
                }
            }
        }
    }
}

/// A train whose represented tensor is `exp(log_scale) · state`.
///
/// Cores are kept at unit max-abs entry; the common magnitude lives in `log_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub state: TensorTrain,
    pub log_scale: f64,
}

impl AmplitudeState {
    pub fn new(state: TensorTrain) -> Self {
        let mut s = Self {
            state,
            log_scale: 0.0,
        };
        s.rebalance();
        s
    }

    pub fn len(&self) -> usize {
        self.state.len()
    }

    pub fn is_empty(&self) -> bool {
        self.state.is_empty()
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.state.phys_dims()
    }

    /// Divides every core by its largest magnitude and moves the factor into
    /// `log_scale`. All-zero cores are left as they are.
    pub fn rebalance(&mut self) {
        let mut log_scale = self.log_scale;
        let cores = std::mem::replace(&mut self.state, placeholder())
            .into_cores()
            .into_iter()
            .map(|c| {
                let m = c.data().iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
                if m > 0.0 && m.is_finite() {
                    log_scale += m.ln();
                    c.scaled(1.0 / m)
                } else {
                    c
                }
            })
            .collect();
        self.state = TensorTrain::new(cores).expect("rescaling keeps shapes");
        self.log_scale = log_scale;
    }

    pub fn is_zero(&self) -> bool {
        self.state
            .cores()
            .iter()
            .any(|c| c.data().iter().all(|&x| x == 0.0))
    }

    /// Amplitude of one configuration, including the global scale.
    pub fn amplitude(&self, config: &[usize]) -> Result<f64> {
        Ok(self.state.element(config)? * self.log_scale.exp())
    }

    /// Dense tensor scaled to unit Frobenius norm.
    pub fn normalized_dense(&self, cap: usize) -> Result<DenseTensor> {
        let t = self.state.to_dense_capped(cap)?;
        let n = t.frobenius_norm();
        if n == 0.0 {
            return Err(Error::Infeasible("the state has zero norm".into()));
        }
        Ok(t.scaled(1.0 / n))
    }
}

fn placeholder() -> TensorTrain {
    TensorTrain::zeros(&[1]).expect("trivial train")
}

/// Equal superposition over all `d^n` configurations, unit norm.
pub fn uniform_state(n: usize, d: usize) -> Result<AmplitudeState> {
    let w = 1.0 / (d as f64).sqrt();
    let train = TensorTrain::product_state(&vec![vec![w; d]; n])?;
    Ok(AmplitudeState {
        state: train,
        log_scale: 0.0,
    })
}

/// State with amplitude proportional to `exp(-τ · cost(x))` for every configuration.
///
/// Built directly with bond `d`: each bond carries a copy of the previous
/// variable, so site `i` sees `(x_{i-1}, x_i)` and applies its local term and
/// the coupling to its left neighbour.
pub fn ite_state(p: &QudoProblem, cfg: &IteConfig) -> Result<AmplitudeState> {
    let tau = cfg.effective_tau(p);
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Numerical(format!("invalid imaginary time {tau}")));
    }
    let (n, d) = (p.n(), p.d());
    let mut log_scale = 0.0;
    let mut cores = Vec::with_capacity(n);
    for i in 0..n {
        let left = if i == 0 { 1 } else { d };
        let right = if i + 1 == n { 1 } else { d };
        // energy seen by site i for (previous value a, own value x)
        let energy = |a: usize, x: usize| {
            let mut e = p.local(i)[x];
            if i > 0 {
                e += p.coupling(i - 1, a, x);
            }
            e
        };
        let e_min = (0..left)
            .flat_map(|a| (0..d).map(move |x| (a, x)))
            .map(|(a, x)| energy(a, x))
            .fold(f64::INFINITY, f64::min);
        // exponentiate relative to the core's best entry so its largest weight is exactly 1
        let core = DenseTensor::from_fn(vec![left, d, right], |idx| {
            let (a, x, b) = (idx[0], idx[1], idx[2]);
            if right > 1 && b != x {
                return 0.0;
            }
            (-tau * (energy(a, x) - e_min)).exp()
        })?;
        if !core.is_finite() {
            return Err(Error::Numerical("non-finite amplitude weights".into()));
        }
        log_scale -= tau * e_min;
        cores.push(core);
    }
    if !log_scale.is_finite() {
        return Err(Error::Numerical("amplitude scale is not representable".into()));
    }
    Ok(AmplitudeState {
        state: TensorTrain::new(cores)?,
        log_scale,
    })
}
