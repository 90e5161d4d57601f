use crate::error::{Error, Result};
use crate::model::{check_positive, Scenario};
use crate::scalar::Scalar;

use super::{
    numeric_best_response, sum, EquilibriumSolution, SolveMethod, SolverConfig, SolverInfo,
};

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsResult<T> {
    pub solution: EquilibriumSolution<T>,
    /// Every iterate, starting with the initial profile. The final entry is the limit.
    pub trajectory: Vec<Vec<T>>,
}

/// A failed run keeps the iterates it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsFailure<T> {
    pub error: Error,
    pub trajectory: Vec<Vec<T>>,
}

impl<T> std::fmt::Display for DynamicsFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} iterates", self.error, self.trajectory.len())
    }
}

impl<T: std::fmt::Debug> std::error::Error for DynamicsFailure<T> {}

impl<T> From<Error> for DynamicsFailure<T> {
    fn from(error: Error) -> Self {
        Self {
            error,
            trajectory: Vec::new(),
        }
    }
}

/// Simultaneous best-response iteration: every miner replies to the others'
/// current profile at once. Stops when the sup-norm step drops below
/// `config.dynamics_tol`; that last negligible step is not appended.
pub fn best_response_dynamics<T: Scalar>(
    scenario: &Scenario<T>,
    initial: &[T],
    config: &SolverConfig<T>,
) -> std::result::Result<DynamicsResult<T>, DynamicsFailure<T>> {
    config.validate()?;
    if initial.len() != scenario.len() {
        return Err(Error::invalid(
            "initial",
            format!(
                "expected {} hash rates, got {}",
                scenario.len(),
                initial.len()
            ),
        )
        .into());
    }
    for &h in initial {
        check_positive("initial", h)?;
    }

    let mut trajectory = vec![initial.to_vec()];
    let mut current = initial.to_vec();
    let mut last_step = f64::NAN;
    for _ in 0..config.max_iters {
        let next = match step(scenario, &current, config) {
            Ok(next) => next,
            Err(error) => return Err(DynamicsFailure { error, trajectory }),
        };
        let delta = current
            .iter()
            .zip(&next)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        last_step = delta.as_f64();
        if delta < config.dynamics_tol {
            let info = SolverInfo {
                method: SolveMethod::BestResponseDynamics,
                iterations: trajectory.len() - 1,
                bracket: None,
            };
            return match EquilibriumSolution::from_hash_rates(scenario, current, info) {
                Ok(solution) => Ok(DynamicsResult {
                    solution,
                    trajectory,
                }),
                Err(error) => Err(DynamicsFailure { error, trajectory }),
            };
        }
        trajectory.push(next.clone());
        current = next;
    }

    Err(DynamicsFailure {
        error: Error::NoConvergence {
            iterations: config.max_iters,
            residual: last_step,
        },
        trajectory,
    })
}

fn step<T: Scalar>(
    scenario: &Scenario<T>,
    current: &[T],
    config: &SolverConfig<T>,
) -> Result<Vec<T>> {
    let total = sum(current);
    scenario
        .miners()
        .iter()
        .zip(current)
        .map(|(m, &h)| {
            let others = total - h;
            numeric_best_response(m, others, scenario.reward(), config).map(|r| r.h_star)
        })
        .collect()
}
