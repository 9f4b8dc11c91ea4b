//! Simulation and control of a dynamic virtual power plant (DVPP).

pub mod network;
pub mod units;
pub mod lp;
pub mod coordination;
pub mod frequency;
pub mod wind;
pub mod redispatch;
pub mod market;
pub mod scenario;
pub mod sim;
