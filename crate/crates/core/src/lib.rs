//! Acceptable multi-modal trip planning.
//!
//! Given a driver's usual trip, the planner finds time-optimal alternatives
//! under mode-sequence constraints, learned models estimate how likely the
//! driver is to accept each one, and the alternative with the largest
//! expected fuel saving is recommended. [`sim`] measures the population-level
//! effect of such recommendations.
#![cfg_attr(not(feature = "std"), no_std)]
extern crate alloc;

pub mod adoption;
pub mod choice;
pub mod copter;
pub mod energy;
pub mod likelihood;
pub mod mode;
pub mod modelang;
pub mod netgraph;
pub mod planner;
pub mod sim;
