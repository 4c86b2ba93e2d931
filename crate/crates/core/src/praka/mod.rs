//! Locally differentially private aggregation of keyword sensitivity.
//!
//! Each user reports every vocabulary word exactly once as a two-bit array
//! that starts as `(1, 0)` for a word the user considers sensitive and
//! `(0, 1)` otherwise. Each bit is independently forced to 1 with
//! probability `p/2`, forced to 0 with probability `p/2`, and kept with
//! probability `1 - p`. The server counts reports with the first bit set
//! and inverts the noise to estimate how many users marked each word.

mod aggregate;
mod bound;
mod files;
mod report;

pub use aggregate::{aggregate, AggregateCounts, AggregateEstimate, WordCounter};
pub use bound::{count_pmf, error_bound, CountPmf};
pub use files::{load_vocabulary, read_reports, write_aggregates, write_reports};
pub use report::{
    epsilon, make_report, simulate_reports, verify_dp, KeywordReport, PrivacyParam, ReportingClient,
};
