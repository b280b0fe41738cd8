//! Fibre thickness sizing and orientation updates.

mod design;
mod oc;
mod rotate;
mod run;

pub use design::{
    axis_aligned_direction, DesignField, DesignPoint, InitDirection, ThicknessBounds,
};
pub use oc::{default_bracket, find_lambda, kkt_residuals, oc_update, KktReport, LambdaSolution};
pub use rotate::{rotate_fibers, RotationReport};
pub use run::{
    certificate, initial_design, optimize, size_fibers, HistoryEntry, OptimizationResult,
    OptimizationSettings, RunHistory, SizingReport, BOUND_TOL,
};
