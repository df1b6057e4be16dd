//! Corridor-constrained waypoint navigation for a simulated differential-drive
//! robot: natural-language targets, language-model waypoint generation with
//! deterministic validation, proportional tracking and emergency replanning.

pub mod clock;
pub mod control;
pub mod geometry;
pub mod planning;
pub mod providers;
pub mod safety;
pub mod world;
pub mod metrics;
pub mod navigator;
pub mod cli;
