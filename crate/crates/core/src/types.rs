//! Value types shared by the closed-form model, the Fock-space oracle and the
//! estimation layer.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};

/// Operating point of the interferometer.
///
/// The coherent amplitude is taken real and positive, so `alpha = sqrt(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Mean photon number inside the interferometer, `N = |alpha|^2`.
    pub mean_photon_number: f64,
    /// Linear phase on mode B after compensation, radians.
    pub theta: f64,
    /// Nonlinear phase, radians.
    pub phi: f64,
    /// Order of the nonlinearity, `exp[i phi (a^dag a)^k]`.
    pub order: u32,
}

impl ProtocolParams {
    /// Second-order (Kerr-type) operating point.
    pub fn new(mean_photon_number: f64, theta: f64, phi: f64) -> Result<Self> {
        Self::with_order(mean_photon_number, theta, phi, 2)
    }

    pub fn with_order(mean_photon_number: f64, theta: f64, phi: f64, order: u32) -> Result<Self> {
        let params = Self {
            mean_photon_number,
            theta,
            phi,
            order,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("mean_photon_number", self.mean_photon_number)?;
        ensure_finite("theta", self.theta)?;
        ensure_finite("phi", self.phi)?;
        if self.mean_photon_number < 0.0 {
            return Err(invalid(
                "mean_photon_number",
                format!("must be >= 0, got {}", self.mean_photon_number),
            ));
        }
        if self.order == 0 {
            return Err(invalid("order", "must be >= 1"));
        }
        Ok(())
    }

    /// Coherent amplitude `alpha = sqrt(N)`.
    pub fn alpha(&self) -> f64 {
        self.mean_photon_number.sqrt()
    }

    pub fn with_phi(self, phi: f64) -> Self {
        Self { phi, ..self }
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    pub fn with_mean_photon_number(self, mean_photon_number: f64) -> Self {
        Self {
            mean_photon_number,
            ..self
        }
    }
}

/// First and second moment of the measured quadrature `X = b + b^dag`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

impl QuadratureMoments {
    pub fn new(mean: f64, second_moment: f64) -> Self {
        Self {
            mean,
            second_moment,
            variance: second_moment - mean * mean,
        }
    }

    pub fn vacuum() -> Self {
        Self::new(0.0, 1.0)
    }
}

/// Where the photon loss acts relative to the nonlinear phase element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossPlacement {
    None,
    /// Both arms, between the first beam splitter and the phase elements.
    BeforePhase,
    /// Both arms, between the phase elements and the second beam splitter.
    AfterPhase,
}

/// Fictitious-beam-splitter loss model, identical in both arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub transmissivity: f64,
    pub placement: LossPlacement,
}

impl LossSpec {
    pub fn new(transmissivity: f64, placement: LossPlacement) -> Result<Self> {
        let spec = Self {
            transmissivity,
            placement,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn none() -> Self {
        Self {
            transmissivity: 1.0,
            placement: LossPlacement::None,
        }
    }

    pub fn before_phase(transmissivity: f64) -> Result<Self> {
        Self::new(transmissivity, LossPlacement::BeforePhase)
    }

    pub fn after_phase(transmissivity: f64) -> Result<Self> {
        Self::new(transmissivity, LossPlacement::AfterPhase)
    }

    pub fn validate(&self) -> Result<()> {
        validate_transmissivity(self.transmissivity)
    }

    /// Loss ratio `L = 1 - T`.
    pub fn loss_ratio(&self) -> f64 {
        1.0 - self.effective_transmissivity()
    }

    /// Transmissivity actually applied; `placement = None` is transparent.
    pub fn effective_transmissivity(&self) -> f64 {
        match self.placement {
            LossPlacement::None => 1.0,
            _ => self.transmissivity,
        }
    }

    /// True when the channel acts as the identity.
    pub fn is_transparent(&self) -> bool {
        self.effective_transmissivity() == 1.0
    }
}

impl Default for LossSpec {
    fn default() -> Self {
        Self::none()
    }
}

pub(crate) fn validate_transmissivity(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(
            "transmissivity",
            format!("must lie in [0, 1], got {t}"),
        ));
    }
    Ok(())
}

/// Which closed form of the second quadrature moment to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SecondMomentForm {
    /// Uncorrected closed form; its variance at `phi = 0` is `N + 1` instead of 1.
    AsPrinted,
    /// Closed form that agrees with the Fock-space simulation.
    #[default]
    Corrected,
}
