//! Pure Nash equilibrium of the mining game.
//!
//! At equilibrium every miner satisfies the first-order condition
//!
//! ```text
//! h_i = (α_i β_i H² + H·R(H)) / (α_i H² + R(H) − H·R′(H))
//! ```
//!
//! with `H = Σ h_i`. Under a linear reward this collapses to `h_i = β_i + ρ/α_i`,
//! independent of everyone else. For other rewards the aggregate `H` is found
//! as the root of `G(H) = Σ h_i(H) − H` (see [`solve_general`]).
//!
//! [`numeric_best_response`] and [`best_response_dynamics`] never touch the
//! closed forms; they maximize the raw utility and serve as the oracle the
//! closed forms are checked against.

mod best_response;
mod dynamics;
mod root;

pub use best_response::{numeric_best_response, BestResponseResult};
pub use dynamics::{best_response_dynamics, DynamicsFailure, DynamicsResult};

use crate::error::{Error, Result};
use crate::model::{
    check_positive, equilibrium_utility_linear, marginal_utility, utility, MinerParams,
    RewardFunction, RewardSpec, Scenario,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Upper bound on any single miner's hash rate.
    pub h_max: T,
    /// Relative tolerance on the aggregate fixed point `|Σh(H) − H| ≤ fp_tol·H`.
    pub fp_tol: T,
    /// Accepted per-miner first-order-condition residual.
    pub foc_tol: T,
    pub max_iters: usize,
    /// Sup-norm step size at which best-response dynamics stop.
    pub dynamics_tol: T,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            h_max: T::lit(1e9),
            fp_tol: T::lit(1e-12),
            foc_tol: T::lit(1e-8),
            max_iters: 200,
            dynamics_tol: T::lit(1e-10),
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        check_positive("h_max", self.h_max)?;
        check_positive("fp_tol", self.fp_tol)?;
        check_positive("foc_tol", self.foc_tol)?;
        check_positive("dynamics_tol", self.dynamics_tol)?;
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    ClosedForm,
    FixedPoint,
    BestResponseDynamics,
}

impl SolveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::ClosedForm => "closed_form",
            SolveMethod::FixedPoint => "fixed_point",
            SolveMethod::BestResponseDynamics => "best_response_dynamics",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverInfo<T> {
    pub method: SolveMethod,
    pub iterations: usize,
    /// Final root bracket on the aggregate hash rate, for fixed-point solves.
    pub bracket: Option<(T, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution<T> {
    pub hash_rates: Vec<T>,
    /// Always `Σ hash_rates`.
    pub total_hash: T,
    pub utilities: Vec<T>,
    /// `|u_i′(h_i)|` per miner.
    pub residuals: Vec<T>,
    pub solver: SolverInfo<T>,
}

impl<T: Scalar> EquilibriumSolution<T> {
    /// Builds a solution record around a hash-rate profile, evaluating each
    /// miner's utility and first-order residual against the others' total.
    pub fn from_hash_rates(
        scenario: &Scenario<T>,
        hash_rates: Vec<T>,
        solver: SolverInfo<T>,
    ) -> Result<Self> {
        let total_hash = sum(&hash_rates);
        let reward = scenario.reward();
        let mut utilities = Vec::with_capacity(hash_rates.len());
        let mut residuals = Vec::with_capacity(hash_rates.len());
        for (m, &h) in scenario.miners().iter().zip(&hash_rates) {
            let others = total_hash - h;
            utilities.push(utility(m, h, others, reward)?);
            residuals.push(marginal_utility(m, h, others, reward)?.abs());
        }
        Ok(Self {
            hash_rates,
            total_hash,
            utilities,
            residuals,
            solver,
        })
    }

    pub fn shares(&self) -> Vec<T> {
        self.hash_rates
            .iter()
            .map(|&h| h / self.total_hash)
            .collect()
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |a, &r| a.max(r))
    }

    fn check_residuals(&self, scenario: &Scenario<T>, tol: T) -> Result<()> {
        for (m, &r) in scenario.miners().iter().zip(&self.residuals) {
            if !(r <= tol) {
                return Err(Error::FocResidual {
                    miner: m.id().to_owned(),
                    residual: r.as_f64(),
                    tolerance: tol.as_f64(),
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn sum<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |a, &x| a + x)
}

/// The hash rate that satisfies a miner's first-order condition when the
/// aggregate hash rate is `total_hash`.
pub fn best_response_formula<T: Scalar, R: RewardFunction<T> + ?Sized>(
    miner: &MinerParams<T>,
    total_hash: T,
    reward: &R,
) -> Result<T> {
    check_positive("total_hash", total_hash)?;
    let h2 = total_hash * total_hash;
    let r = reward.value(total_hash);
    let denominator = miner.alpha() * h2 + r - total_hash * reward.derivative(total_hash);
    if !(denominator > T::zero()) {
        return Err(Error::DegenerateDenominator {
            total_hash: total_hash.as_f64(),
            denominator: denominator.as_f64(),
        });
    }
    let numerator = miner.alpha() * miner.beta() * h2 + total_hash * r;
    Ok(numerator / denominator)
}

/// Closed-form equilibrium for `R(H) = ρH`: `h_i = β_i + ρ/α_i`.
pub fn solve_linear<T: Scalar>(
    scenario: &Scenario<T>,
    config: &SolverConfig<T>,
) -> Result<EquilibriumSolution<T>> {
    config.validate()?;
    let rho = scenario
        .reward()
        .linear_rho()
        .ok_or(Error::NotLinearReward)?;
    let hash_rates: Vec<T> = scenario
        .miners()
        .iter()
        .map(|m| m.beta() + rho / m.alpha())
        .collect();
    check_bounds(scenario, &hash_rates, config.h_max)?;

    let info = SolverInfo {
        method: SolveMethod::ClosedForm,
        iterations: 0,
        bracket: None,
    };
    let mut solution = EquilibriumSolution::from_hash_rates(scenario, hash_rates, info)?;
    for (u, m) in solution.utilities.iter_mut().zip(scenario.miners()) {
        *u = equilibrium_utility_linear(m, rho)?;
    }
    solution.check_residuals(scenario, config.foc_tol)?;
    Ok(solution)
}

/// Equilibrium for any reward in the family. Linear rewards are delegated to
/// [`solve_linear`]; otherwise the aggregate hash rate is the unique root of
/// `Σ h_i(H) − H` on `(0, n·h_max]`.
pub fn solve_general<T: Scalar>(
    scenario: &Scenario<T>,
    config: &SolverConfig<T>,
) -> Result<EquilibriumSolution<T>> {
    if scenario.reward().linear_rho().is_some() {
        return solve_linear(scenario, config);
    }
    config.validate()?;
    let fixed = solve_aggregate(scenario.miners(), scenario.reward(), config)?;
    let hash_rates = scenario
        .miners()
        .iter()
        .map(|m| best_response_formula(m, fixed.total_hash, scenario.reward()))
        .collect::<Result<Vec<_>>>()?;
    check_bounds(scenario, &hash_rates, config.h_max)?;

    let info = SolverInfo {
        method: SolveMethod::FixedPoint,
        iterations: fixed.iterations,
        bracket: Some(fixed.bracket),
    };
    let solution = EquilibriumSolution::from_hash_rates(scenario, hash_rates, info)?;
    solution.check_residuals(scenario, config.foc_tol)?;
    Ok(solution)
}

struct AggregateRoot<T> {
    total_hash: T,
    iterations: usize,
    bracket: (T, T),
}

fn solve_aggregate<T: Scalar>(
    miners: &[MinerParams<T>],
    reward: &RewardSpec<T>,
    config: &SolverConfig<T>,
) -> Result<AggregateRoot<T>> {
    let excess = |total: T| -> Result<T> {
        let mut s = T::zero();
        for m in miners {
            s = s + best_response_formula(m, total, reward)?;
        }
        Ok(s - total)
    };

    let n = T::from_usize(miners.len()).expect("miner count fits scalar");
    let hi = n * config.h_max;
    // 2^-120 below the upper end, so the scan covers ~36 decades.
    let lo = hi * T::lit(2f64.powi(-120));
    let brackets = root::scan_sign_changes(&excess, lo, hi)?;
    if brackets.is_empty() {
        return Err(Error::NoBracket {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }

    let mut roots = Vec::with_capacity(brackets.len());
    for b in &brackets {
        roots.push(root::brent(&excess, *b, config.fp_tol, config.max_iters)?);
    }
    if roots.len() > 1 {
        return Err(Error::MultipleRoots {
            roots: roots.iter().map(|r| r.root.as_f64()).collect(),
        });
    }
    let r = roots.pop().expect("one root");
    let residual = excess(r.root)?;
    if !(residual.abs() <= config.fp_tol * r.root) {
        return Err(Error::NoConvergence {
            iterations: r.iterations,
            residual: (residual / r.root).as_f64(),
        });
    }
    Ok(AggregateRoot {
        total_hash: r.root,
        iterations: r.iterations,
        bracket: r.bracket,
    })
}

fn check_bounds<T: Scalar>(scenario: &Scenario<T>, hash_rates: &[T], h_max: T) -> Result<()> {
    for (m, &h) in scenario.miners().iter().zip(hash_rates) {
        if h > h_max {
            return Err(Error::AboveBound {
                miner: m.id().to_owned(),
                hash_rate: h.as_f64(),
                h_max: h_max.as_f64(),
            });
        }
    }
    Ok(())
}
