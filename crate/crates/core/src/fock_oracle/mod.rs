//! Brute-force simulation of the interferometer in a truncated two-mode Fock
//! space. Nothing here uses the closed-form model; it is the reference the
//! closed forms are checked against.

pub mod basis;
pub mod beam_splitter;
pub mod channels;
pub mod evaluator;
pub mod observables;
pub mod pipeline;
pub mod state;
pub mod truncation;

pub use basis::TwoModeBasis;
pub use beam_splitter::{
    apply_bs, apply_bs_5050, apply_bs_5050_mixed, sector_unitary, unitarity_error,
};
pub use channels::{
    apply_diagonal_phase, apply_linear_phase, apply_loss, apply_nonlinear_phase, LossKraus,
    LossModes, Mode, PhaseCompensation,
};
pub use evaluator::{PhaseScanEvaluator, PhiSlice};
pub use observables::{
    edge_mass, lowering_expectation, normal_ordered_expectation, photon_distribution, psi_p_state,
    x_moments, StateRef,
};
pub use pipeline::{end_to_end_moments, end_to_end_moments_with, OracleOptions, ProtocolPipeline};
pub use state::{dump_state_json, AmplitudeEntry, MixedState2M, PureState2M, TwoModeState};
pub use truncation::{
    auto_n_max, coherent_two_mode, coherent_two_mode_auto, poisson_tail, TAIL_LIMIT,
};
