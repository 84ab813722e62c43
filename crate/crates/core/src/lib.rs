//! Exact engine for finite-horizon betting games.
//!
//! A game pits Skeptic (who buys tickets) against Reality (who picks
//! outcomes), optionally refereed by a Forecaster who quotes ticket
//! prices round by round. This crate prices European payoffs on such
//! games by backward induction, synthesizes and verifies replicating
//! stake rules, derives the exact discrete distributions the standard
//! forecasting strategies induce, and certifies everything against
//! brute-force enumeration and a per-node minimax oracle.
//!
//! All arithmetic is exact: prices, stakes, weights, and capital are
//! arbitrary-precision rationals end to end, so every identity in the
//! test suite holds with zero residual rather than within a tolerance.
//!
//! # Modules
//!
//! - [`game`] - move spaces, capital process, forward play, price
//!   admissibility
//! - [`forecasters`] - constant, urn, Polya, staircase, and chained
//!   price rules
//! - [`lattice`] - backward-induction pricing, delta hedges,
//!   replication checks
//! - [`distributions`] - closed-form mass functions and expectations
//! - [`crr`] - the multiplicative asset game and its two-label
//!   reduction
//! - [`oracle`] - path enumeration, upper/lower expected values,
//!   coherence certificates

pub mod crr;
pub mod distributions;
pub mod error;
pub mod forecasters;
pub mod game;
pub mod lattice;
pub mod oracle;
pub mod payoff;
pub mod rational;

/// Default ceiling on exhaustive path enumeration.
pub const DEFAULT_PATH_CAP: u64 = 1 << 20;

pub use crr::{crr_delta, crr_price, crr_to_multilabel, CrrReduction, CrrSpec};
pub use distributions::{
    binomial_pmf, expectation, generalized_binomial, hypergeometric_pmf, multinomial_pmf,
    polya_pmf, Pmf, PmfPoint,
};
pub use error::Error;
pub use forecasters::{
    chain_conditionals, constant_price, polya_price, staircase_price, tail_ratios, urn_price,
    ChainedForecaster, Forecaster, Staircase, UrnParams,
};
pub use game::{
    affine_rescale, run_game, step_capital, validate_forecast, ArbitrageCertificate, CapitalTrace,
    ForecastValidation, GameSpec, MoveSpace, NodeKey, Path, Price, Quantity, RescaledGame,
    RoundView, Stake, StakeRule, StateValue, UpdateRule,
};
pub use lattice::{
    backward_induct, delta_hedge, verify_replication, verify_replication_capped, PathViolation,
    PriceLattice, ReplicationPlan, ReplicationReport,
};
pub use oracle::{
    check_proposition_a1, coherence_check, default_statistic, enumerate_paths, pmf_by_enumeration,
    upper_lower, BoundsReport, CoherenceVerdict, NodeWitness, ReplicationPricing,
};
pub use payoff::Payoff;
pub use rational::{decimal_string, parse_rat, render_rat, Rat};
