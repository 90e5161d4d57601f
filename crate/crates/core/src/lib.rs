//! Equilibrium analysis for Proof-of-Useful-Work mining games.
//!
//! Miners pay a quadratic cost `(α/2)h² − αβh`, where `α` is the compute cost
//! and `β` the amount of externally paid ("coupon") work, and share a block
//! reward `R(H)` in proportion to their hash rate. This crate computes the
//! unique pure Nash equilibrium of that game, checks it against an independent
//! numeric best-response oracle, optimizes coupon schedules across blocks, and
//! measures decentralization as the entropy of the equilibrium hash shares.
//!
//! All math is generic over [`Scalar`] (implemented for `f32` and `f64`); the
//! `*64` / `*32` aliases below name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decentralization;
pub mod equilibrium;
mod error;
pub mod model;
mod scalar;
pub mod scheduling;

pub use decentralization::{
    decentralization_coefficient, decomposition_report, entropy, DecentralizationReport,
};
pub use equilibrium::{
    best_response_dynamics, best_response_formula, numeric_best_response, solve_general,
    solve_linear, BestResponseResult, DynamicsFailure, DynamicsResult, EquilibriumSolution,
    SolveMethod, SolverConfig, SolverInfo,
};
pub use error::{Error, Result};
pub use model::{
    cost, equilibrium_utility_linear, marginal_cost, marginal_utility, utility, MinerParams,
    RewardFunction, RewardKind, RewardSpec, Scenario,
};
pub use scalar::Scalar;
pub use scheduling::{
    concentration_gain, evaluate_schedule, optimal_schedule, uniform_schedule, CouponSchedule,
    ScheduleEvaluation,
};

pub type MinerParams64 = MinerParams<f64>;
pub type RewardSpec64 = RewardSpec<f64>;
pub type Scenario64 = Scenario<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type EquilibriumSolution64 = EquilibriumSolution<f64>;
pub type CouponSchedule64 = CouponSchedule<f64>;
pub type DecentralizationReport64 = DecentralizationReport<f64>;

pub type MinerParams32 = MinerParams<f32>;
pub type RewardSpec32 = RewardSpec<f32>;
pub type Scenario32 = Scenario<f32>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type EquilibriumSolution32 = EquilibriumSolution<f32>;
pub type CouponSchedule32 = CouponSchedule<f32>;
pub type DecentralizationReport32 = DecentralizationReport<f32>;
