//! Joint design of wireless forwarding policies and LQG controllers over
//! lossy multi-hop networks.

pub mod codesign;
pub mod discretize;
pub mod error;
pub mod exec;
pub mod expm;
pub mod instances;
pub mod linalg;
pub mod lqg;
pub mod model;
pub mod netdp;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
