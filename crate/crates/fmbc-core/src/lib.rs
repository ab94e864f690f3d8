//! Core library for forecast-mediated market-based control (F-MBC) of
//! uninterruptible deferrable loads: cost/supply models, probabilistic
//! price forecasts, MDP threshold bidding, one-shot double-auction
//! clearing with randomized tie-breaking, rolling-horizon reference
//! scheduling, and the analysis suite (equilibrium checks, consistency
//! bounds, regret).
//!
//! `no_std` + `alloc`; all IO and orchestration live in the companion
//! `fmbc-cli` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod auction;
pub mod bidding;
pub mod forecast;
pub mod model;
pub mod reference;

pub use analysis::{check_nash, consistency_bounds, regret, ConsistencyReport, EquilibriumReport};
pub use auction::{clear, settle, tie_break, MarketOutcome, Settlement, SubmittedBid};
pub use bidding::{BidFunction, BidPolicy, PolicyVariant, ValueFunction};
pub use forecast::{PriceForecast, StepDistribution};
pub use model::{CostCurve, CostModel, DeviceId, DeviceSpec, DeviceState, Schedule, TimeGrid};
pub use reference::{
    brute_force_schedule, deadline_counts, reference_schedule, ForecastModel, ReferenceSolution,
    ScheduleProblem,
};
