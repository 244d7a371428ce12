//! Solvers for an energy-centred growth model of a single autarkic agent.
//!
//! The energy side maximises surplus from energy goods under prime-mover
//! and usability constraints, the demand side spends that surplus on
//! non-energy goods, and the growth loop accumulates prime movers from
//! their marginal surplus until a steady state is reached.

pub mod demand;
pub mod embodied;
pub mod error;
pub mod fixtures;
pub mod growth;
pub mod model;
pub mod numerics;
pub mod par;
pub mod statics;
pub mod surplus;

pub use error::{ConfigError, SolveError};
pub use model::{load_scenario, EconomyState, ScenarioConfig};
