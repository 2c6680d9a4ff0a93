//! Closed-form homodyne moments for the second-order nonlinearity.
//!
//! Conventions: the coherent amplitude is real, `alpha = sqrt(N)`; the
//! quadrature is `X = b + b^dag` so the vacuum variance is 1; the linear part
//! of the nonlinear phase is compensated, i.e. mode A sees
//! `exp[i phi (n^2 - n)]`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::search::{golden_section_max, golden_section_min, linspace};
use crate::types::{LossPlacement, LossSpec, ProtocolParams, QuadratureMoments, SecondMomentForm};

fn check_params(params: &ProtocolParams) -> Result<()> {
    params.validate()?;
    if params.order != 2 {
        return Err(Error::UnsupportedOrder(params.order));
    }
    Ok(())
}

/// `exp(-N sin^2 phi) * sin[(N/2) sin 2phi]`, the phi-dependent fringe term.
pub fn fringe_term(n: f64, phi: f64) -> f64 {
    (-n * phi.sin().powi(2)).exp() * (0.5 * n * (2.0 * phi).sin()).sin()
}

/// `<X_B>` at the detector.
pub fn expectation_x(params: &ProtocolParams) -> Result<f64> {
    check_params(params)?;
    let n = params.mean_photon_number;
    Ok(-n.sqrt() * (params.theta.sin() + fringe_term(n, params.phi)))
}

/// `<X_B^2>` at the detector, in the requested closed form.
pub fn second_moment_x(params: &ProtocolParams, form: SecondMomentForm) -> Result<f64> {
    check_params(params)?;
    let n = params.mean_photon_number;
    let (theta, phi) = (params.theta, params.phi);
    let cross = 2.0 * n * theta.sin() * fringe_term(n, phi);
    let value = match form {
        SecondMomentForm::AsPrinted => {
            let e2 = (-2.0 * n * phi.sin().powi(2)).exp() * (n * (2.0 * phi).sin()).cos();
            n - 0.5 * n * ((2.0 * theta).cos() - e2) + 1.0 + cross
        }
        SecondMomentForm::Corrected => {
            // Re<a^2> after the phase: (N/2) e^{-N sin^2 2phi} cos(2phi + (N/2) sin 4phi)
            let a2 = (-n * (2.0 * phi).sin().powi(2)).exp()
                * (2.0 * phi + 0.5 * n * (4.0 * phi).sin()).cos();
            1.0 + n - 0.5 * n * ((2.0 * theta).cos() + a2) + cross
        }
    };
    Ok(value)
}

/// Mean and second moment together (lossless).
pub fn moments(params: &ProtocolParams, form: SecondMomentForm) -> Result<QuadratureMoments> {
    Ok(QuadratureMoments::new(
        expectation_x(params)?,
        second_moment_x(params, form)?,
    ))
}

/// `d<X_B>/d phi`.
pub fn slope_x(params: &ProtocolParams) -> Result<f64> {
    check_params(params)?;
    let n = params.mean_photon_number;
    let phi = params.phi;
    Ok(-n.powf(1.5)
        * (-n * phi.sin().powi(2)).exp()
        * (2.0 * phi + 0.5 * n * (2.0 * phi).sin()).cos())
}

/// `d<X_B>/d theta`; zero marks a point where the mean is stationary under
/// linear-phase drift.
pub fn theta_slope_x(params: &ProtocolParams) -> Result<f64> {
    check_params(params)?;
    Ok(-params.alpha() * params.theta.cos())
}

/// Moments with loss, using the corrected second-moment form.
pub fn moments_with_loss(params: &ProtocolParams, loss: &LossSpec) -> Result<QuadratureMoments> {
    moments_with_loss_in_form(params, loss, SecondMomentForm::Corrected)
}

pub fn moments_with_loss_in_form(
    params: &ProtocolParams,
    loss: &LossSpec,
    form: SecondMomentForm,
) -> Result<QuadratureMoments> {
    check_params(params)?;
    loss.validate()?;
    let t = loss.effective_transmissivity();
    match loss.placement {
        LossPlacement::None => moments(params, form),
        // Loss ahead of the phases leaves a coherent state of amplitude sqrt(T) alpha.
        LossPlacement::BeforePhase => {
            let reduced = params.with_mean_photon_number(t * params.mean_photon_number);
            moments(&reduced, form)
        }
        LossPlacement::AfterPhase => {
            let lossless = moments(params, form)?;
            Ok(QuadratureMoments::new(
                t.sqrt() * lossless.mean,
                t * lossless.second_moment + 1.0 - t,
            ))
        }
    }
}

/// `d<X_B>/d phi` with loss.
pub fn slope_with_loss(params: &ProtocolParams, loss: &LossSpec) -> Result<f64> {
    check_params(params)?;
    loss.validate()?;
    let t = loss.effective_transmissivity();
    match loss.placement {
        LossPlacement::None => slope_x(params),
        LossPlacement::BeforePhase => {
            slope_x(&params.with_mean_photon_number(t * params.mean_photon_number))
        }
        LossPlacement::AfterPhase => Ok(t.sqrt() * slope_x(params)?),
    }
}

/// `d<X_B>/d theta` with loss.
pub fn theta_slope_with_loss(params: &ProtocolParams, loss: &LossSpec) -> Result<f64> {
    loss.validate()?;
    Ok(loss.effective_transmissivity().sqrt() * theta_slope_x(params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub phi: f64,
    pub raw_mean: f64,
    /// `raw_mean / sqrt(N)`.
    pub normalized_mean: f64,
}

/// `<X_B>` along a grid of nonlinear phases at fixed `theta`.
pub fn fringe_scan(n: f64, theta: f64, phi_grid: &[f64]) -> Result<Vec<FringePoint>> {
    ensure_finite("mean_photon_number", n)?;
    if n <= 0.0 {
        return Err(invalid(
            "mean_photon_number",
            format!("must be > 0, got {n}"),
        ));
    }
    if phi_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let norm = n.sqrt();
    phi_grid
        .iter()
        .map(|&phi| {
            let raw_mean = expectation_x(&ProtocolParams::new(n, theta, phi)?)?;
            Ok(FringePoint {
                phi,
                raw_mean,
                normalized_mean: raw_mean / norm,
            })
        })
        .collect()
}

/// Closed interval of nonlinear phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiDomain {
    pub lo: f64,
    pub hi: f64,
}

impl PhiDomain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        ensure_finite("phi_domain.lo", lo)?;
        ensure_finite("phi_domain.hi", hi)?;
        if hi <= lo {
            return Err(Error::DegenerateDomain { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// One period of the fringe pattern, `[-pi/2, pi/2]`.
    pub fn one_period() -> Self {
        Self {
            lo: -std::f64::consts::FRAC_PI_2,
            hi: std::f64::consts::FRAC_PI_2,
        }
    }
}

impl Default for PhiDomain {
    fn default() -> Self {
        Self::one_period()
    }
}

/// Dense-grid size for the extremum search.
pub const VISIBILITY_GRID_POINTS: usize = 4096;
/// Golden-section refinement tolerance in phi.
pub const VISIBILITY_PHI_TOL: f64 = 1e-10;

/// Extrema of a fringe over a phi domain: dense grid, then golden-section
/// refinement inside the grid cells adjacent to the best grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeExtrema {
    pub phi_at_max: f64,
    pub max: f64,
    pub phi_at_min: f64,
    pub min: f64,
}

pub fn fringe_extrema<F>(mut mean: F, domain: PhiDomain) -> Result<FringeExtrema>
where
    F: FnMut(f64) -> Result<f64>,
{
    if domain.hi <= domain.lo {
        return Err(Error::DegenerateDomain {
            lo: domain.lo,
            hi: domain.hi,
        });
    }
    let grid = linspace(domain.lo, domain.hi, VISIBILITY_GRID_POINTS);
    let values = grid
        .iter()
        .map(|&phi| mean(phi))
        .collect::<Result<Vec<_>>>()?;

    let mut imax = 0;
    let mut imin = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[imax] {
            imax = i;
        }
        if v < values[imin] {
            imin = i;
        }
    }
    let bracket = |i: usize| (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);

    // The closure below cannot propagate errors; any failure was already
    // surfaced on the grid, so NaN marks an unusable point.
    let mut eval = |phi: f64| mean(phi).unwrap_or(f64::NAN);

    let (lo, hi) = bracket(imax);
    let refined_max = golden_section_max(&mut eval, lo, hi, VISIBILITY_PHI_TOL);
    let (phi_at_max, max) = if refined_max.value >= values[imax] {
        (refined_max.x, refined_max.value)
    } else {
        (grid[imax], values[imax])
    };

    let (lo, hi) = bracket(imin);
    let refined_min = golden_section_min(&mut eval, lo, hi, VISIBILITY_PHI_TOL);
    let (phi_at_min, min) = if refined_min.value <= values[imin] {
        (refined_min.x, refined_min.value)
    } else {
        (grid[imin], values[imin])
    };

    Ok(FringeExtrema {
        phi_at_max,
        max,
        phi_at_min,
        min,
    })
}

/// Contrast `(max - min) / (|max| + |min|)` of a pair of extrema.
pub fn contrast(extrema: &FringeExtrema) -> f64 {
    let denom = extrema.max.abs() + extrema.min.abs();
    if denom == 0.0 {
        0.0
    } else {
        ((extrema.max - extrema.min) / denom).clamp(0.0, 1.0)
    }
}

/// Fringe visibility of `<X_B>` as phi sweeps `domain` at fixed `theta`.
pub fn visibility(n: f64, theta: f64, domain: PhiDomain) -> Result<f64> {
    ensure_finite("mean_photon_number", n)?;
    ensure_finite("theta", theta)?;
    if n <= 0.0 {
        return Err(invalid(
            "mean_photon_number",
            format!("must be > 0, got {n}"),
        ));
    }
    let extrema = fringe_extrema(
        |phi| expectation_x(&ProtocolParams::new(n, theta, phi)?),
        domain,
    )?;
    Ok(contrast(&extrema))
}
