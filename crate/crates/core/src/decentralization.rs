//! Shannon-entropy decentralization coefficient and its coupon / compute-cost
//! decomposition under linear rewards.
//!
//! With `R(H) = ρH` the equilibrium hash splits as `h_i = β_i + ρ/α_i`, so the
//! normalized profile is the mixture `λ·p^β + (1 − λ)·p^α` with `λ = Σβ / H`.
//! Concavity of entropy then gives `D(h) ≥ λ·D(β) + (1 − λ)·D(ρ/α)`.

use crate::equilibrium::EquilibriumSolution;
use crate::error::{Error, Result};
use crate::model::{check_finite, Scenario};
use crate::scalar::Scalar;

/// Slack on the entropy bound, absorbing rounding in the three entropies.
const BOUND_SLACK: f64 = 1e-12;
/// Allowed deviation (relative to `max(1, h)`) between a solution and `β + ρ/α`.
const MIXTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DecentralizationReport<T> {
    pub coefficient: T,
    /// Entropy of the coupon shares; `None` when nobody holds coupons.
    pub coupon_component: Option<T>,
    pub cost_component: T,
    /// Coupon weight `Σβ / H`.
    pub lambda: T,
    pub lower_bound: T,
    pub bound_satisfied: bool,
}

fn check_base<T: Scalar>(base: T) -> Result<T> {
    check_finite("base", base)?;
    if base > T::one() {
        Ok(base)
    } else {
        Err(Error::invalid("base", format!("must be > 1, got {base}")))
    }
}

/// Entropy of the normalized weights in the given log base, with `0·log 0 = 0`.
pub fn entropy<T: Scalar>(weights: &[T], base: T) -> Result<T> {
    let base = check_base(base)?;
    let mut total = T::zero();
    for &w in weights {
        check_finite("weight", w)?;
        if w < T::zero() {
            return Err(Error::invalid("weight", format!("must be >= 0, got {w}")));
        }
        total = total + w;
    }
    if total == T::zero() {
        return Err(Error::AllZero);
    }
    let nats = weights
        .iter()
        .filter(|&&w| w > T::zero())
        .map(|&w| {
            let p = w / total;
            -p * p.ln()
        })
        .fold(T::zero(), |a, x| a + x);
    Ok((nats / base.ln()).max(T::zero()))
}

pub fn decentralization_coefficient<T: Scalar>(hash_rates: &[T], base: T) -> Result<T> {
    entropy(hash_rates, base)
}

/// Decomposes an equilibrium of a linear-reward scenario into its coupon and
/// compute-cost parts and evaluates the entropy lower bound.
pub fn decomposition_report<T: Scalar>(
    scenario: &Scenario<T>,
    solution: &EquilibriumSolution<T>,
    base: T,
) -> Result<DecentralizationReport<T>> {
    let base = check_base(base)?;
    let rho = scenario
        .reward()
        .linear_rho()
        .ok_or(Error::NotLinearReward)?;
    if solution.hash_rates.len() != scenario.len() {
        return Err(Error::invalid(
            "solution",
            format!(
                "has {} hash rates for {} miners",
                solution.hash_rates.len(),
                scenario.len()
            ),
        ));
    }

    let coupon: Vec<T> = scenario.miners().iter().map(|m| m.beta()).collect();
    let compute: Vec<T> = scenario.miners().iter().map(|m| rho / m.alpha()).collect();
    let tol = T::lit(MIXTURE_TOL);
    for ((m, &h), (&b, &c)) in scenario
        .miners()
        .iter()
        .zip(&solution.hash_rates)
        .zip(coupon.iter().zip(&compute))
    {
        let deviation = (h - (b + c)).abs();
        if !(deviation <= tol * h.max(T::one())) {
            return Err(Error::MixtureMismatch {
                miner: m.id().to_owned(),
                deviation: deviation.as_f64(),
            });
        }
    }

    let total = solution.total_hash;
    let coupon_total = coupon.iter().fold(T::zero(), |a, &b| a + b);
    let lambda = (coupon_total / total).max(T::zero()).min(T::one());

    let coefficient = decentralization_coefficient(&solution.hash_rates, base)?;
    let cost_component = entropy(&compute, base)?;
    let coupon_component = if coupon_total > T::zero() {
        Some(entropy(&coupon, base)?)
    } else {
        None
    };
    let lower_bound =
        coupon_component.map_or(T::zero(), |d| lambda * d) + (T::one() - lambda) * cost_component;
    let bound_satisfied = coefficient >= lower_bound - T::lit(BOUND_SLACK);

    Ok(DecentralizationReport {
        coefficient,
        coupon_component,
        cost_component,
        lambda,
        lower_bound,
        bound_satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_linear, SolverConfig};
    use crate::model::{MinerParams, RewardSpec};
    use proptest::prelude::*;
    use std::f64::consts::{E, LN_2};

    fn linear_scenario(params: &[(f64, f64)], rho: f64) -> Scenario<f64> {
        let miners = params
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| MinerParams::new(format!("m{i}"), a, b).unwrap())
            .collect();
        Scenario::new(miners, RewardSpec::linear(rho).unwrap()).unwrap()
    }

    fn report(params: &[(f64, f64)], rho: f64) -> DecentralizationReport<f64> {
        let sc = linear_scenario(params, rho);
        let sol = solve_linear(&sc, &SolverConfig::default()).unwrap();
        decomposition_report(&sc, &sol, E).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&[1.0, 1.0], E).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0, 0.0], E).unwrap(), 0.0);
        assert!((entropy(&[1.0f64, 1.0, 2.0], 2.0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn entropy_errors() {
        assert_eq!(entropy(&[0.0, 0.0], E), Err(Error::AllZero));
        assert_eq!(entropy::<f64>(&[], E), Err(Error::AllZero));
        assert!(entropy(&[1.0, -1.0], E).is_err());
        assert!(entropy(&[1.0, f64::NAN], E).is_err());
        assert!(entropy(&[1.0, 1.0], 1.0).is_err());
        assert!(entropy(&[1.0, 1.0], 0.5).is_err());
    }

    #[test]
    fn coefficient_examples() {
        let d = decentralization_coefficient(&[1.0, 3.5], E).unwrap();
        let (p, q) = (2.0f64 / 9.0, 7.0f64 / 9.0);
        let expected = -(p * p.ln() + q * q.ln());
        assert!((d - expected).abs() < 1e-15);
        assert!((d - 0.529_706).abs() < 1e-6);
        for n in 2..8 {
            let d = decentralization_coefficient(&vec![2.5; n], 10.0).unwrap();
            assert!((d - (n as f64).log10()).abs() < 1e-14);
        }
        assert_eq!(decentralization_coefficient(&[5.0], E).unwrap(), 0.0);
    }

    #[test]
    fn report_without_coupons() {
        let r = report(&[(1.0, 0.0), (1.0, 0.0)], 1.0);
        assert_eq!(r.lambda, 0.0);
        assert_eq!(r.coupon_component, None);
        assert!((r.coefficient - LN_2).abs() < 1e-15);
        assert!((r.lower_bound - LN_2).abs() < 1e-15);
        assert!(r.bound_satisfied);
    }

    #[test]
    fn report_identical_components() {
        let r = report(&[(1.0, 1.0), (1.0, 1.0)], 1.0);
        assert!((r.coefficient - LN_2).abs() < 1e-15);
        assert!((r.coupon_component.unwrap() - LN_2).abs() < 1e-15);
        assert!((r.cost_component - LN_2).abs() < 1e-15);
        assert!((r.lower_bound - LN_2).abs() < 1e-15);
    }

    #[test]
    fn report_concentrated_coupons() {
        let r = report(&[(1.0, 4.0), (1.0, 0.0)], 1.0);
        assert!((r.lambda - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.coupon_component, Some(0.0));
        assert!((r.cost_component - LN_2).abs() < 1e-15);
        assert!((r.lower_bound - LN_2 / 3.0).abs() < 1e-15);
        assert!((r.lower_bound - 0.23105).abs() < 1e-5);
        let (p, q) = (5.0f64 / 6.0, 1.0f64 / 6.0);
        assert!((r.coefficient - -(p * p.ln() + q * q.ln())).abs() < 1e-15);
        assert!((r.coefficient - 0.45056).abs() < 1e-5);
        assert!(r.bound_satisfied);
    }

    #[test]
    fn report_rejects_foreign_inputs() {
        let sc = linear_scenario(&[(1.0, 4.0), (1.0, 0.0)], 1.0);
        let mut sol = solve_linear(&sc, &SolverConfig::default()).unwrap();
        sol.hash_rates[0] += 1e-3;
        assert!(matches!(
            decomposition_report(&sc, &sol, E),
            Err(Error::MixtureMismatch { .. })
        ));

        let constant = sc.with_reward(RewardSpec::constant(1.0).unwrap());
        assert_eq!(
            decomposition_report(&constant, &sol, E),
            Err(Error::NotLinearReward)
        );
    }

    fn linear_params() -> impl Strategy<Value = (Vec<(f64, f64)>, f64)> {
        (
            prop::collection::vec((0.1..10.0f64, 0.0..10.0f64), 2..=10),
            0.1..5.0f64,
        )
    }

    proptest! {
        #[test]
        fn lower_bound_holds((params, rho) in linear_params()) {
            let r = report(&params, rho);
            prop_assert!(r.coefficient >= r.lower_bound - 1e-12);
            prop_assert!(r.bound_satisfied);
            prop_assert!((0.0..=1.0).contains(&r.lambda));
        }

        #[test]
        fn coefficient_in_range(weights in prop::collection::vec(0.0..100.0f64, 1..20)) {
            prop_assume!(weights.iter().any(|&w| w > 0.0));
            let d = decentralization_coefficient(&weights, E).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert!(d <= (weights.len() as f64).ln() + 1e-12);
        }

        #[test]
        fn base_change(weights in prop::collection::vec(0.01..100.0f64, 1..20), base in 1.1..100.0f64) {
            let natural = entropy(&weights, E).unwrap();
            let other = entropy(&weights, base).unwrap();
            prop_assert!((other - natural / base.ln()).abs() < 1e-12);
        }

        #[test]
        fn equality_when_components_align(alphas in prop::collection::vec(0.1..10.0f64, 2..=10),
                                          scale in 0.01..10.0f64, rho in 0.1..5.0f64) {
            // β ∝ 1/α makes both normalized components identical.
            let params: Vec<(f64, f64)> = alphas.iter().map(|&a| (a, scale / a)).collect();
            let r = report(&params, rho);
            prop_assert!((r.coefficient - r.lower_bound).abs() < 1e-12);
        }

        #[test]
        fn concentrating_coupons_lowers_entropy(n in 2usize..10, alpha in 0.1..10.0f64,
                                                supply in 0.01..50.0f64, rho in 0.1..5.0f64,
                                                holder in 0usize..10) {
            let holder = holder % n;
            let even: Vec<(f64, f64)> = vec![(alpha, supply / n as f64); n];
            let mut concentrated = vec![(alpha, 0.0); n];
            concentrated[holder].1 = supply;
            let d_even = report(&even, rho).coefficient;
            let d_conc = report(&concentrated, rho).coefficient;
            prop_assert!(d_conc <= d_even + 1e-12);
        }
    }
}
