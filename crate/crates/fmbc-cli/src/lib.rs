//! Scenario handling, profile ingestion/synthesis, the time-stepped
//! simulation harness, sweeps and report writers around `fmbc-core`.

pub mod profiles;
pub mod reports;
pub mod runner;
pub mod scenario;
pub mod seeding;
