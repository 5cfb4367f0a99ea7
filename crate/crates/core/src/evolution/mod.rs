//! The extended second-order system for `theta`, its derivatives and the
//! auxiliary curvature variables, evolved by the method of lines in the
//! homogeneous and plane-symmetric reductions of a flat background.

mod desitter;
mod evolve;
mod initial;
mod io;
mod monitors;
mod sources;
mod state;

pub use desitter::{desitter_fields, desitter_initial_data, desitter_rates, polish_desitter_radius};
pub use evolve::{
    evolve, project_trace, rhs_extended, rk4_step, step_plan, EvolutionConfig, EvolutionRun, MonitorCeilings,
    TrajectoryRecord,
};
pub use initial::{build_theta_initial_data, InitialData, SliceGrid};
pub use io::{read_checkpoint, trajectory_csv, trajectory_header, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use monitors::{
    auxiliary_mismatch, gauge_constraint_monitor, harmonic_potential, slice_constraint_residuals, theta_jet_from_state,
    MonitorRecord,
};
pub use sources::{
    auxiliary_curvature, gradient_source, point_acceleration, scalar_curvature_source, theta_source, trace_box_scalar,
    traceless_source, SourceContext,
};
pub use state::{EvolutionState, Fields, PointState, Reduction, FIELD_COUNT, GROUP_NAMES, SYM_PAIRS};
