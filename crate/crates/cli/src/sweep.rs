//! One-parameter sweeps over a scenario.

use std::fmt;
use std::str::FromStr;

use pouw_core::{
    decentralization_coefficient, solve_general, EquilibriumSolution64, RewardKind, RewardSpec,
    Scenario64, SolverConfig64,
};
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepParam {
    Rho,
    R0,
    MinerAlpha(String),
    MinerBeta(String),
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rho" => return Ok(SweepParam::Rho),
            "r0" => return Ok(SweepParam::R0),
            _ => {}
        }
        let bad = || {
            format!("unknown sweep parameter `{s}`; expected rho, r0, miner.<id>.alpha or miner.<id>.beta")
        };
        let rest = s.strip_prefix("miner.").ok_or_else(bad)?;
        match rest.rsplit_once('.') {
            Some((id, "alpha")) if !id.is_empty() => Ok(SweepParam::MinerAlpha(id.to_owned())),
            Some((id, "beta")) if !id.is_empty() => Ok(SweepParam::MinerBeta(id.to_owned())),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParam::Rho => f.write_str("rho"),
            SweepParam::R0 => f.write_str("r0"),
            SweepParam::MinerAlpha(id) => write!(f, "miner.{id}.alpha"),
            SweepParam::MinerBeta(id) => write!(f, "miner.{id}.beta"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn list(parameter: SweepParam, values: Vec<f64>) -> Result<Self, String> {
        if values.is_empty() {
            return Err("sweep needs at least one value".into());
        }
        Ok(Self { parameter, values })
    }

    /// `steps` evenly spaced values from `from` to `to` inclusive.
    pub fn grid(parameter: SweepParam, from: f64, to: f64, steps: usize) -> Result<Self, String> {
        if steps < 2 {
            return Err(format!("grid needs at least 2 steps, got {steps}"));
        }
        if !(from.is_finite() && to.is_finite()) {
            return Err("grid bounds must be finite".into());
        }
        let last = (steps - 1) as f64;
        let values = (0..steps)
            .map(|k| from + (to - from) * (k as f64 / last))
            .collect();
        Ok(Self { parameter, values })
    }

    /// Checks the parameter applies to `scenario` and every value is in its domain.
    pub fn validate(&self, scenario: &Scenario64) -> Result<(), String> {
        let kind = scenario.reward().kind();
        let positive = match &self.parameter {
            SweepParam::Rho => {
                if !matches!(kind, RewardKind::Linear { .. }) {
                    return Err("rho can only be swept on a linear-reward scenario".into());
                }
                true
            }
            SweepParam::R0 => {
                if !matches!(kind, RewardKind::Constant { .. }) {
                    return Err("r0 can only be swept on a constant-reward scenario".into());
                }
                true
            }
            SweepParam::MinerAlpha(id) | SweepParam::MinerBeta(id) => {
                if scenario.miner_index(id).is_none() {
                    return Err(format!("no miner with id `{id}`"));
                }
                matches!(self.parameter, SweepParam::MinerAlpha(_))
            }
        };
        for &v in &self.values {
            let ok = v.is_finite() && if positive { v > 0.0 } else { v >= 0.0 };
            if !ok {
                let bound = if positive { "> 0" } else { ">= 0" };
                return Err(format!("{} must be {bound}, got {v}", self.parameter));
            }
        }
        Ok(())
    }

    pub fn apply(&self, scenario: &Scenario64, value: f64) -> pouw_core::Result<Scenario64> {
        match &self.parameter {
            SweepParam::Rho => Ok(scenario.with_reward(RewardSpec::linear(value)?)),
            SweepParam::R0 => Ok(scenario.with_reward(RewardSpec::constant(value)?)),
            SweepParam::MinerAlpha(id) | SweepParam::MinerBeta(id) => {
                let i =
                    scenario
                        .miner_index(id)
                        .ok_or_else(|| pouw_core::Error::InvalidParameter {
                            field: "sweep".into(),
                            reason: format!("no miner with id `{id}`"),
                        })?;
                let m = &scenario.miners()[i];
                let m = match self.parameter {
                    SweepParam::MinerAlpha(_) => m.with_alpha(value)?,
                    _ => m.with_beta(value)?,
                };
                scenario.with_miner(i, m)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolvedRow {
    pub scenario: Scenario64,
    pub solution: EquilibriumSolution64,
    pub decentralization: f64,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<SolvedRow, String>,
}

/// Solves every swept value independently. Rows come back in sweep order.
pub fn run_sweep(
    scenario: &Scenario64,
    spec: &SweepSpec,
    config: &SolverConfig64,
    base: f64,
) -> Vec<SweepRow> {
    spec.values
        .par_iter()
        .map(|&value| {
            let outcome = spec
                .apply(scenario, value)
                .and_then(|sc| {
                    let solution = solve_general(&sc, config)?;
                    let decentralization =
                        decentralization_coefficient(&solution.hash_rates, base)?;
                    Ok(SolvedRow {
                        scenario: sc,
                        solution,
                        decentralization,
                    })
                })
                .map_err(|e| e.to_string());
            SweepRow { value, outcome }
        })
        .collect()
}
