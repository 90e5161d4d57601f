//! Derivative-free best response, used as an oracle for the closed forms.
//!
//! The search works on utility values alone. A doubling scan caps the
//! interval, golden-section shrinks it while value comparisons are still well
//! above rounding noise, and a bisection on the sign of a Richardson-
//! extrapolated central-difference slope finishes the job. Value comparisons
//! alone stall at roughly `sqrt(eps)` relative accuracy because the objective
//! is flat at its peak; the slope sign stays informative down to ~`eps`.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::model::{check_positive, utility, MinerParams, RewardFunction};
use crate::scalar::Scalar;

use super::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponseResult<T> {
    pub h_star: T,
    pub u_star: T,
    pub evaluations: usize,
}

const GOLDEN_MAX_STEPS: usize = 400;
const BISECTION_MAX_STEPS: usize = 200;

/// Maximizes `utility(miner, ·, h_others, reward)` over `[0, config.h_max]`.
pub fn numeric_best_response<T: Scalar, R: RewardFunction<T> + ?Sized>(
    miner: &MinerParams<T>,
    h_others: T,
    reward: &R,
    config: &SolverConfig<T>,
) -> Result<BestResponseResult<T>> {
    check_positive("h_others", h_others)?;
    config.validate()?;

    let evaluations = Cell::new(0usize);
    let u = |h: T| -> Result<T> {
        evaluations.set(evaluations.get() + 1);
        utility(miner, h, h_others, reward)
    };

    let h_max = config.h_max;
    let two = T::lit(2.0);

    // Upper end: for concave u, once u(2t) < u(t) the peak lies below 2t.
    let mut t = h_max.min(T::one());
    let mut ut = u(t)?;
    let mut hi = h_max;
    while t < h_max {
        let next = (t * two).min(h_max);
        let un = u(next)?;
        if un < ut {
            hi = next;
            break;
        }
        t = next;
        ut = un;
    }
    let mut lo = T::zero();

    // Golden section down to a coarse relative width.
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let coarse = T::lit(1e-3).max(T::lit(100.0) * T::epsilon().sqrt());
    let tiny = T::min_positive_value().sqrt();
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut u1 = u(x1)?;
    let mut u2 = u(x2)?;
    for _ in 0..GOLDEN_MAX_STEPS {
        let mid = (lo + hi) / two;
        if hi - lo <= coarse * mid.max(tiny) {
            break;
        }
        if u1 < u2 {
            lo = x1;
            x1 = x2;
            u1 = u2;
            x2 = lo + inv_phi * (hi - lo);
            u2 = u(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            u2 = u1;
            x1 = hi - inv_phi * (hi - lo);
            u1 = u(x1)?;
        }
    }

    // Slope-sign bisection to floating-point resolution.
    let slope = |h: T| -> Result<T> {
        let d = h * T::lit(1e-3);
        let d2 = d / two;
        let wide = (u(h + d)? - u(h - d)?) / (two * d);
        let narrow = (u(h + d2)? - u(h - d2)?) / d;
        Ok((T::lit(4.0) * narrow - wide) / T::lit(3.0))
    };
    for _ in 0..BISECTION_MAX_STEPS {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi || hi - lo <= T::lit(4.0) * T::epsilon() * hi {
            break;
        }
        if slope(mid)? > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let h_star = lo + (hi - lo) / two;
    let u_star = u(h_star)?;
    check_curvature(&u, h_star)?;
    Ok(BestResponseResult {
        h_star,
        u_star,
        evaluations: evaluations.get(),
    })
}

/// Strict concavity at the maximizer, which makes the best response unique.
fn check_curvature<T: Scalar, F: Fn(T) -> Result<T>>(u: &F, h: T) -> Result<()> {
    if h <= T::zero() {
        return Ok(());
    }
    let d = h * T::lit(1e-2);
    let curvature = (u(h + d)? - T::lit(2.0) * u(h)? + u(h - d)?) / (d * d);
    if curvature < T::zero() {
        Ok(())
    } else {
        Err(Error::NotConcave {
            hash_rate: h.as_f64(),
            curvature: curvature.as_f64(),
        })
    }
}
