//! Certified lower bounds on the effective entanglement an optical channel
//! preserves, computed from homodyne statistics of two coherent-state probes.
//!
//! The pipeline runs [`estimation`] (moments to subspace windows), then
//! [`projection`] (constraints on the projected two-qubit state), then
//! [`sdp`] (Negativity minimization per convex region). [`channels`] provides
//! synthetic probe data.

pub mod channels;
pub mod error;
pub mod estimation;
pub mod format;
pub mod hermitian;
pub mod probe_file;
pub mod projection;
pub mod sdp;

pub use channels::{
    initial_negativity, input_overlap, loss_noise_exact_subspace, simulate_loss_noise, simulate_thermal_splitter,
    thermal_projected_state, ExactSubspace, InputSpec, LossNoiseChannel, ThermalSplitterChannel,
};
pub use error::{Error, Result};
pub use estimation::{
    eigen_defect_bound, estimate, estimate_exact, kappa_from_means, offdiag_floors, overlap_window_full,
    overlap_window_relaxed, supplementary_window, ConditionalMoments, DefectBounds, OffDiagFloors, ProbeRecord,
    SubspaceEstimate,
};
pub use hermitian::{
    eig_hermitian, is_psd, negativity, partial_transpose_a, trace_norm, ComplexMatrix, HermitianMatrix, Spectrum,
};
pub use projection::{
    assemble_constraints, fix_gauge, polygon_regions, ConvexRegion, HalfPlane, LinearConstraint, OrthoBasis,
    ProjectedStateTemplate, Sense,
};
pub use sdp::{
    compile, compile_linear, min_negativity, solve, BoundOptions, BoundResult, Mode, RegionOutcome, SdProblem,
    SdSolution, Shortcut, SolveStatus,
};
