//! Minimum-cost input selection for structural controllability of
//! structured linear systems, fixed and switched.
//!
//! The pipeline: parse a [`model::StructuredSystem`], check controllability
//! ([`controllability`]), build the source-SCC incidence matrix and test it
//! for restricted total unimodularity ([`tu`]), build the integer program
//! ([`ilp`]) and solve its relaxation with the exact simplex ([`lp`]).
//! [`selection`] ties these together and adds bounds, rounding and an
//! exhaustive oracle.

pub mod controllability;
pub mod graph;
pub mod ilp;
pub mod lp;
pub mod model;
pub mod rational;
pub mod selection;
pub mod tu;

pub use model::{parse_switched_system, parse_system, StructuredSystem, SwitchedStructuredSystem};
pub use rational::Rational;
