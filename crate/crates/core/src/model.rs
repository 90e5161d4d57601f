//! Domain types and the raw cost, reward and utility functions of the game.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) fn check_finite<T: Scalar>(field: &str, x: T) -> Result<T> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::invalid(field, format!("must be finite, got {x}")))
    }
}

pub(crate) fn check_positive<T: Scalar>(field: &str, x: T) -> Result<T> {
    check_finite(field, x)?;
    if x > T::zero() {
        Ok(x)
    } else {
        Err(Error::invalid(field, format!("must be > 0, got {x}")))
    }
}

pub(crate) fn check_non_negative<T: Scalar>(field: &str, x: T) -> Result<T> {
    check_finite(field, x)?;
    if x >= T::zero() {
        Ok(x)
    } else {
        Err(Error::invalid(field, format!("must be >= 0, got {x}")))
    }
}

/// Quadratic cost parameters of one miner.
#[derive(Debug, Clone, PartialEq)]
pub struct MinerParams<T> {
    id: String,
    alpha: T,
    beta: T,
}

impl<T: Scalar> MinerParams<T> {
    /// `alpha` is the compute cost (> 0), `beta` the compute coupons (>= 0).
    pub fn new(id: impl Into<String>, alpha: T, beta: T) -> Result<Self> {
        Ok(Self {
            id: id.into(),
            alpha: check_positive("alpha", alpha)?,
            beta: check_non_negative("beta", beta)?,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        Self::new(self.id.clone(), alpha, self.beta)
    }

    pub fn with_beta(&self, beta: T) -> Result<Self> {
        Self::new(self.id.clone(), self.alpha, beta)
    }
}

/// A block reward `R(H)` with an analytic derivative.
///
/// Implemented by [`RewardSpec`]; the trait exists so the best-response
/// machinery can also be driven by reward curves outside the built-in family.
pub trait RewardFunction<T> {
    fn value(&self, total_hash: T) -> T;
    fn derivative(&self, total_hash: T) -> T;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardKind<T> {
    /// `R(H) = ρH`.
    Linear { rho: T },
    /// `R(H) = r0`.
    Constant { r0: T },
    /// `R(H) = a·H^γ` with `γ ∈ [0, 1]`.
    Power { a: T, gamma: T },
}

/// Validated block-reward specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSpec<T> {
    kind: RewardKind<T>,
}

impl<T: Scalar> RewardSpec<T> {
    pub fn linear(rho: T) -> Result<Self> {
        Ok(Self {
            kind: RewardKind::Linear {
                rho: check_positive("rho", rho)?,
            },
        })
    }

    pub fn constant(r0: T) -> Result<Self> {
        Ok(Self {
            kind: RewardKind::Constant {
                r0: check_positive("r0", r0)?,
            },
        })
    }

    pub fn power(a: T, gamma: T) -> Result<Self> {
        let a = check_positive("a", a)?;
        let gamma = check_finite("gamma", gamma)?;
        if gamma < T::zero() || gamma > T::one() {
            return Err(Error::invalid(
                "gamma",
                format!("must lie in [0, 1], got {gamma}"),
            ));
        }
        Ok(Self {
            kind: RewardKind::Power { a, gamma },
        })
    }

    pub fn from_kind(kind: RewardKind<T>) -> Result<Self> {
        match kind {
            RewardKind::Linear { rho } => Self::linear(rho),
            RewardKind::Constant { r0 } => Self::constant(r0),
            RewardKind::Power { a, gamma } => Self::power(a, gamma),
        }
    }

    pub fn kind(&self) -> RewardKind<T> {
        self.kind
    }

    /// The relative reward parameter when the reward is linear.
    pub fn linear_rho(&self) -> Option<T> {
        match self.kind {
            RewardKind::Linear { rho } => Some(rho),
            _ => None,
        }
    }
}

impl<T: Scalar> RewardFunction<T> for RewardSpec<T> {
    fn value(&self, total_hash: T) -> T {
        match self.kind {
            RewardKind::Linear { rho } => rho * total_hash,
            RewardKind::Constant { r0 } => r0,
            RewardKind::Power { a, gamma } => a * total_hash.powf(gamma),
        }
    }

    fn derivative(&self, total_hash: T) -> T {
        match self.kind {
            RewardKind::Linear { rho } => rho,
            RewardKind::Constant { .. } => T::zero(),
            RewardKind::Power { a, gamma } => {
                if gamma == T::zero() {
                    T::zero()
                } else {
                    a * gamma * total_hash.powf(gamma - T::one())
                }
            }
        }
    }
}

/// A complete game instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    miners: Vec<MinerParams<T>>,
    reward: RewardSpec<T>,
    blocks: u32,
}

impl<T: Scalar> Scenario<T> {
    pub fn new(miners: Vec<MinerParams<T>>, reward: RewardSpec<T>) -> Result<Self> {
        if miners.len() < 2 {
            return Err(Error::TooFewMiners(miners.len()));
        }
        let mut seen = HashSet::new();
        for m in &miners {
            if !seen.insert(m.id()) {
                return Err(Error::DuplicateMinerId(m.id().to_owned()));
            }
        }
        Ok(Self {
            miners,
            reward,
            blocks: 1,
        })
    }

    pub fn with_blocks(mut self, blocks: u32) -> Result<Self> {
        if blocks == 0 {
            return Err(Error::invalid("blocks", "must be >= 1"));
        }
        self.blocks = blocks;
        Ok(self)
    }

    pub fn miners(&self) -> &[MinerParams<T>] {
        &self.miners
    }

    pub fn reward(&self) -> &RewardSpec<T> {
        &self.reward
    }

    pub fn blocks(&self) -> u32 {
        self.blocks
    }

    pub fn len(&self) -> usize {
        self.miners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.miners.is_empty()
    }

    pub fn miner_index(&self, id: &str) -> Option<usize> {
        self.miners.iter().position(|m| m.id() == id)
    }

    pub fn with_reward(&self, reward: RewardSpec<T>) -> Self {
        Self {
            reward,
            ..self.clone()
        }
    }

    /// Replaces the miner at `index`, keeping every other field.
    pub fn with_miner(&self, index: usize, miner: MinerParams<T>) -> Result<Self> {
        let mut miners = self.miners.clone();
        miners[index] = miner;
        Self::new(miners, self.reward)?.with_blocks(self.blocks)
    }
}

/// `c(h) = (α/2)h² − αβh`. Negative while coupons outweigh compute cost.
pub fn cost<T: Scalar>(miner: &MinerParams<T>, h: T) -> Result<T> {
    check_non_negative("h", h)?;
    let half = T::lit(0.5);
    Ok(miner.alpha * h * (half * h - miner.beta))
}

/// `c′(h) = α(h − β)`.
pub fn marginal_cost<T: Scalar>(miner: &MinerParams<T>, h: T) -> Result<T> {
    check_non_negative("h", h)?;
    Ok(miner.alpha * (h - miner.beta))
}

/// Expected proportional reward minus cost, `h/(h+H₋ᵢ)·R(h+H₋ᵢ) − c(h)`.
pub fn utility<T: Scalar, R: RewardFunction<T> + ?Sized>(
    miner: &MinerParams<T>,
    h: T,
    h_others: T,
    reward: &R,
) -> Result<T> {
    check_non_negative("h", h)?;
    check_positive("h_others", h_others)?;
    let total = h + h_others;
    let gross = h / total * reward.value(total);
    Ok(gross - cost(miner, h)?)
}

/// Derivative of [`utility`] in the miner's own hash rate, with `H₋ᵢ` held fixed:
/// `H₋ᵢ·R(H)/H² + (h/H)·R′(H) − α(h − β)`.
pub fn marginal_utility<T: Scalar, R: RewardFunction<T> + ?Sized>(
    miner: &MinerParams<T>,
    h: T,
    h_others: T,
    reward: &R,
) -> Result<T> {
    check_non_negative("h", h)?;
    check_positive("h_others", h_others)?;
    let total = h + h_others;
    let share = h / total;
    let marginal_reward =
        h_others / total * (reward.value(total) / total) + share * reward.derivative(total);
    Ok(marginal_reward - marginal_cost(miner, h)?)
}

/// Closed-form equilibrium utility under `R(H) = ρH`:
/// `(α²β² + 2αβρ + ρ²) / 2α`.
pub fn equilibrium_utility_linear<T: Scalar>(miner: &MinerParams<T>, rho: T) -> Result<T> {
    check_positive("rho", rho)?;
    let (a, b) = (miner.alpha, miner.beta);
    let two = T::lit(2.0);
    Ok((a * a * b * b + two * a * b * rho + rho * rho) / (two * a))
}
