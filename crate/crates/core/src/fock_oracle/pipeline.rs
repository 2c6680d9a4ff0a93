//! The full interferometer, state by state:
//! coherent input -> BS -> nonlinear phase (A) and linear phase (B) -> BS ->
//! quadrature of mode B, with optional loss in both arms before or after the
//! phase elements.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::beam_splitter::apply_bs;
use super::channels::{
    apply_linear_phase, apply_loss, apply_nonlinear_phase, LossModes, Mode, PhaseCompensation,
};
use super::observables::x_moments;
use super::state::TwoModeState;
use super::truncation::{auto_n_max, coherent_two_mode};
use crate::error::Result;
use crate::types::{LossPlacement, LossSpec, ProtocolParams, QuadratureMoments};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Photon-number cutoff; chosen from the input intensity when absent.
    pub n_max: Option<usize>,
    pub compensation: PhaseCompensation,
}

impl OracleOptions {
    pub fn resolve_n_max(&self, mean_photon_number: f64) -> usize {
        self.n_max.unwrap_or_else(|| auto_n_max(mean_photon_number))
    }
}

/// Interferometer with a fixed input and loss, evaluated at many phases.
/// The state entering the phase elements is computed once.
#[derive(Debug, Clone)]
pub struct ProtocolPipeline {
    order: u32,
    loss: LossSpec,
    compensation: PhaseCompensation,
    before_phases: TwoModeState,
}

impl ProtocolPipeline {
    pub fn new(
        mean_photon_number: f64,
        order: u32,
        loss: LossSpec,
        options: OracleOptions,
    ) -> Result<Self> {
        // validates N and k
        ProtocolParams::with_order(mean_photon_number, 0.0, 0.0, order)?;
        loss.validate()?;
        let n_max = options.resolve_n_max(mean_photon_number);
        let input = coherent_two_mode(
            Complex64::new(mean_photon_number.sqrt(), 0.0),
            Complex64::new(0.0, 0.0),
            n_max,
        )?;
        let mut state = apply_bs(&TwoModeState::Pure(input));
        if loss.placement == LossPlacement::BeforePhase && !loss.is_transparent() {
            state = TwoModeState::Mixed(apply_loss(&state, LossModes::Both, loss.transmissivity)?);
        }
        Ok(Self {
            order,
            loss,
            compensation: options.compensation,
            before_phases: state,
        })
    }

    pub fn n_max(&self) -> usize {
        self.before_phases.basis().n_max()
    }

    /// State at the detector for the given phases.
    pub fn output_state(&self, theta: f64, phi: f64) -> Result<TwoModeState> {
        let mut state = apply_nonlinear_phase(
            &self.before_phases,
            Mode::A,
            phi,
            self.order,
            self.compensation,
        );
        state = apply_linear_phase(&state, Mode::B, theta);
        if self.loss.placement == LossPlacement::AfterPhase && !self.loss.is_transparent() {
            state = TwoModeState::Mixed(apply_loss(
                &state,
                LossModes::Both,
                self.loss.transmissivity,
            )?);
        }
        Ok(apply_bs(&state))
    }

    pub fn moments(&self, theta: f64, phi: f64) -> Result<QuadratureMoments> {
        x_moments(&self.output_state(theta, phi)?, Mode::B)
    }
}

/// Quadrature moments of mode B at the detector, by direct simulation.
pub fn end_to_end_moments(params: &ProtocolParams, loss: &LossSpec) -> Result<QuadratureMoments> {
    end_to_end_moments_with(params, loss, OracleOptions::default())
}

pub fn end_to_end_moments_with(
    params: &ProtocolParams,
    loss: &LossSpec,
    options: OracleOptions,
) -> Result<QuadratureMoments> {
    params.validate()?;
    ProtocolPipeline::new(params.mean_photon_number, params.order, *loss, options)?
        .moments(params.theta, params.phi)
}
