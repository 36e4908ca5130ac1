//! Economic value of targeting data to an advertiser bidding in
//! second-price auctions.
pub mod binary;
pub mod budget;
pub mod config;
pub mod correlated;
pub mod dist;
pub mod error;
pub mod forensics;
pub mod game;
pub mod grid;
pub mod mc;
pub mod multi_signal;
pub mod quad;
pub mod refinement;
pub mod report;
pub mod runner;

pub use binary::BinaryScenario;
pub use dist::{Distribution, DistributionSpec, Interval};
pub use error::{Error, Result};
