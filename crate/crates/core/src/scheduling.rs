//! Allocation of a coupon budget across a horizon of blocks.
//!
//! Each block is valued independently with the linear-reward equilibrium
//! utility. That utility is strictly convex in `β`, so the best schedule
//! spends the whole budget in one block.

use crate::error::{Error, Result};
use crate::model::{check_non_negative, check_positive, equilibrium_utility_linear, MinerParams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CouponSchedule<T> {
    allocation: Vec<T>,
    budget: T,
}

impl<T: Scalar> CouponSchedule<T> {
    pub fn new(allocation: Vec<T>, budget: T) -> Result<Self> {
        check_non_negative("budget", budget)?;
        if allocation.is_empty() {
            return Err(Error::InvalidSchedule(
                "allocation needs at least one block".into(),
            ));
        }
        let mut spent = T::zero();
        for (t, &b) in allocation.iter().enumerate() {
            check_non_negative(&format!("allocation[{t}]"), b)?;
            spent = spent + b;
        }
        // Allow for summation rounding.
        let n = T::from_usize(allocation.len()).expect("block count fits scalar");
        let slack = T::lit(4.0) * n * T::epsilon() * budget;
        if spent > budget + slack {
            return Err(Error::InvalidSchedule(format!(
                "allocation spends {spent}, budget is {budget}"
            )));
        }
        Ok(Self { allocation, budget })
    }

    pub fn allocation(&self) -> &[T] {
        &self.allocation
    }

    pub fn budget(&self) -> T {
        self.budget
    }

    pub fn blocks(&self) -> usize {
        self.allocation.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEvaluation<T> {
    pub per_block_utility: Vec<T>,
    pub total_utility: T,
}

pub fn evaluate_schedule<T: Scalar>(
    miner_alpha: T,
    schedule: &CouponSchedule<T>,
    rho: T,
) -> Result<ScheduleEvaluation<T>> {
    check_positive("alpha", miner_alpha)?;
    check_positive("rho", rho)?;
    let per_block_utility = schedule
        .allocation
        .iter()
        .map(|&beta| {
            let m = MinerParams::new("block", miner_alpha, beta)?;
            equilibrium_utility_linear(&m, rho)
        })
        .collect::<Result<Vec<_>>>()?;
    let total_utility = per_block_utility.iter().fold(T::zero(), |a, &u| a + u);
    Ok(ScheduleEvaluation {
        per_block_utility,
        total_utility,
    })
}

fn check_horizon<T: Scalar>(miner_alpha: T, budget: T, blocks: usize, rho: T) -> Result<()> {
    check_positive("alpha", miner_alpha)?;
    check_non_negative("budget", budget)?;
    check_positive("rho", rho)?;
    if blocks == 0 {
        return Err(Error::invalid("blocks", "must be >= 1"));
    }
    Ok(())
}

/// Whole budget in the last block, zero elsewhere.
pub fn optimal_schedule<T: Scalar>(
    miner_alpha: T,
    budget: T,
    blocks: usize,
    rho: T,
) -> Result<CouponSchedule<T>> {
    check_horizon(miner_alpha, budget, blocks, rho)?;
    let mut allocation = vec![T::zero(); blocks];
    allocation[blocks - 1] = budget;
    CouponSchedule::new(allocation, budget)
}

/// `budget / blocks` in every block.
pub fn uniform_schedule<T: Scalar>(budget: T, blocks: usize) -> Result<CouponSchedule<T>> {
    check_non_negative("budget", budget)?;
    if blocks == 0 {
        return Err(Error::invalid("blocks", "must be >= 1"));
    }
    let n = T::from_usize(blocks).expect("block count fits scalar");
    CouponSchedule::new(vec![budget / n; blocks], budget)
}

/// Utility of the concentrated schedule minus that of the uniform split.
pub fn concentration_gain<T: Scalar>(
    miner_alpha: T,
    budget: T,
    blocks: usize,
    rho: T,
) -> Result<T> {
    check_horizon(miner_alpha, budget, blocks, rho)?;
    let best = evaluate_schedule(
        miner_alpha,
        &optimal_schedule(miner_alpha, budget, blocks, rho)?,
        rho,
    )?;
    let split = evaluate_schedule(miner_alpha, &uniform_schedule(budget, blocks)?, rho)?;
    Ok((best.total_utility - split.total_utility).max(T::zero()))
}
