//! Error-propagation sensitivity, operating-point search and the derived
//! limits (quantum Cramer-Rao ratio, loss tolerance).

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::analytic_model;
use crate::error::{ensure_finite, invalid, Error, Result};
use crate::fock_oracle::{OracleOptions, PhaseScanEvaluator, PhiSlice};
use crate::qfi::qcrb;
use crate::search::{golden_section_min, linspace};
use crate::types::{LossPlacement, LossSpec, ProtocolParams, QuadratureMoments};

/// Slopes below this make the linearized estimator uninformative.
pub const SLOPE_FLOOR: f64 = 1e-9;

/// `sqrt(Var X) / |d<X>/d phi|`.
pub fn sensitivity_from_moments(moments: &QuadratureMoments, slope: f64) -> Result<f64> {
    ensure_finite("slope", slope)?;
    if slope.abs() < SLOPE_FLOOR {
        return Err(Error::InsensitivePoint { slope });
    }
    Ok(moments.variance.max(0.0).sqrt() / slope.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentsSource {
    Analytic,
    Oracle,
}

/// Detector statistics along theta at one fixed phi.
pub trait SensitivitySlice {
    fn moments(&self, theta: f64) -> Result<QuadratureMoments>;
    /// `d<X>/d phi`
    fn slope(&self, theta: f64) -> Result<f64>;
    /// `d<X>/d theta`
    fn theta_slope(&self, theta: f64) -> Result<f64>;

    fn sensitivity(&self, theta: f64) -> Result<f64> {
        sensitivity_from_moments(&self.moments(theta)?, self.slope(theta)?)
    }
}

/// A source of detector statistics that can be sliced at fixed phi.
pub trait SensitivityModel {
    type Slice: SensitivitySlice;
    fn slice(&self, phi: f64) -> Result<Self::Slice>;
}

/// Closed-form statistics (corrected second moment).
#[derive(Debug, Clone, Copy)]
pub struct AnalyticModel {
    pub mean_photon_number: f64,
    pub loss: LossSpec,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyticSlice {
    params: ProtocolParams,
    loss: LossSpec,
}

impl SensitivityModel for AnalyticModel {
    type Slice = AnalyticSlice;

    fn slice(&self, phi: f64) -> Result<AnalyticSlice> {
        Ok(AnalyticSlice {
            params: ProtocolParams::new(self.mean_photon_number, 0.0, phi)?,
            loss: self.loss,
        })
    }
}

impl SensitivitySlice for AnalyticSlice {
    fn moments(&self, theta: f64) -> Result<QuadratureMoments> {
        analytic_model::moments_with_loss(&self.params.with_theta(theta), &self.loss)
    }

    fn slope(&self, theta: f64) -> Result<f64> {
        analytic_model::slope_with_loss(&self.params.with_theta(theta), &self.loss)
    }

    fn theta_slope(&self, theta: f64) -> Result<f64> {
        analytic_model::theta_slope_with_loss(&self.params.with_theta(theta), &self.loss)
    }
}

impl SensitivityModel for PhaseScanEvaluator {
    type Slice = PhiSlice;

    fn slice(&self, phi: f64) -> Result<PhiSlice> {
        ensure_finite("phi", phi)?;
        Ok(PhaseScanEvaluator::slice(self, phi))
    }
}

impl SensitivitySlice for PhiSlice {
    fn moments(&self, theta: f64) -> Result<QuadratureMoments> {
        Ok(PhiSlice::moments(self, theta))
    }

    fn slope(&self, theta: f64) -> Result<f64> {
        Ok(PhiSlice::slope(self, theta))
    }

    fn theta_slope(&self, theta: f64) -> Result<f64> {
        Ok(PhiSlice::theta_slope(self, theta))
    }
}

/// Coarse grid plus coordinate-descent golden-section refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSchedule {
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub phi_points: usize,
    /// Points of the theta grid over `[0, 2 pi)`.
    pub theta_points: usize,
    pub tolerance: f64,
    pub max_rounds: usize,
    /// Relative spread of the sensitivity across theta below which theta is
    /// treated as a free parameter.
    pub degeneracy_tolerance: f64,
}

impl Default for SearchSchedule {
    fn default() -> Self {
        Self {
            phi_lo: -FRAC_PI_4,
            phi_hi: FRAC_PI_4,
            phi_points: 256,
            theta_points: 256,
            tolerance: 1e-10,
            max_rounds: 8,
            degeneracy_tolerance: 1e-9,
        }
    }
}

/// Optimum located by [`optimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub phi: f64,
    pub theta: f64,
    pub delta_phi: f64,
    pub slope: f64,
    pub variance: f64,
    /// The sensitivity did not depend on theta at the optimum; theta was then
    /// fixed where `<X>` is stationary in theta.
    pub theta_degenerate: bool,
}

fn or_infinity(r: Result<f64>) -> Result<f64> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::InsensitivePoint { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Minimizes the sensitivity of `model` over the schedule's phi interval and
/// all theta.
pub fn optimize<M: SensitivityModel>(model: &M, schedule: &SearchSchedule) -> Result<Optimum> {
    if schedule.phi_points < 2 || schedule.theta_points < 2 {
        return Err(Error::EmptyGrid);
    }
    if schedule.phi_hi <= schedule.phi_lo {
        return Err(Error::DegenerateDomain {
            lo: schedule.phi_lo,
            hi: schedule.phi_hi,
        });
    }
    let phis = linspace(schedule.phi_lo, schedule.phi_hi, schedule.phi_points);
    let theta_step = TAU / schedule.theta_points as f64;
    let thetas: Vec<f64> = (0..schedule.theta_points)
        .map(|j| j as f64 * theta_step)
        .collect();

    let mut best: Option<(f64, f64, f64)> = None;
    for &phi in &phis {
        let slice = model.slice(phi)?;
        for &theta in &thetas {
            let v = or_infinity(slice.sensitivity(theta))?;
            if v.is_finite() && best.is_none_or(|(_, _, b)| v < b) {
                best = Some((phi, theta, v));
            }
        }
    }
    let (mut phi, mut theta, mut value) = best.ok_or(Error::NoInformativePoint)?;

    let phi_step = phis[1] - phis[0];
    let mut failure: Option<Error> = None;
    for _ in 0..schedule.max_rounds {
        let start = value;

        let lo = (phi - phi_step).max(schedule.phi_lo);
        let hi = (phi + phi_step).min(schedule.phi_hi);
        let m = golden_section_min(
            |p| match model
                .slice(p)
                .and_then(|s| or_infinity(s.sensitivity(theta)))
            {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            schedule.tolerance,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        if m.value < value {
            phi = m.x;
            value = m.value;
        }

        let slice = model.slice(phi)?;
        let m = golden_section_min(
            |t| or_infinity(slice.sensitivity(t)).unwrap_or(f64::NAN),
            theta - theta_step,
            theta + theta_step,
            schedule.tolerance,
        );
        if m.value < value {
            theta = m.x;
            value = m.value;
        }

        if start - value <= 1e-15 * value {
            break;
        }
    }

    // Resolve a theta that the sensitivity cannot see.
    let slice = model.slice(phi)?;
    let mut spread = 0.0f64;
    for &t in thetas.iter().filter(|&&t| t <= PI) {
        let v = or_infinity(slice.sensitivity(t))?;
        spread = spread.max((v - value).abs() / value);
    }
    let theta_degenerate = spread <= schedule.degeneracy_tolerance;
    if theta_degenerate {
        let m = golden_section_min(
            |t| slice.theta_slope(t).map(f64::abs).unwrap_or(f64::NAN),
            0.0,
            PI,
            schedule.tolerance,
        );
        theta = m.x;
    } else {
        theta = theta.rem_euclid(TAU);
    }

    let moments = slice.moments(theta)?;
    let slope = slice.slope(theta)?;
    Ok(Optimum {
        phi,
        theta,
        delta_phi: sensitivity_from_moments(&moments, slope)?,
        slope,
        variance: moments.variance,
        theta_degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub delta_phi: f64,
    pub phi_star: f64,
    pub theta_star: f64,
    pub moments_source: MomentsSource,
    pub slope: f64,
    pub variance: f64,
    pub theta_degenerate: bool,
}

impl SensitivityReport {
    fn from_optimum(o: Optimum, source: MomentsSource) -> Self {
        Self {
            delta_phi: o.delta_phi,
            phi_star: o.phi,
            theta_star: o.theta,
            moments_source: source,
            slope: o.slope,
            variance: o.variance,
            theta_degenerate: o.theta_degenerate,
        }
    }
}

fn check_positive_n(n: f64) -> Result<()> {
    ensure_finite("mean_photon_number", n)?;
    if n <= 0.0 {
        return Err(invalid(
            "mean_photon_number",
            format!("must be > 0, got {n}"),
        ));
    }
    Ok(())
}

/// Optimal operating point with the default search schedule.
pub fn find_optimum(n: f64, source: MomentsSource) -> Result<SensitivityReport> {
    find_optimum_with(n, source, LossSpec::none(), &SearchSchedule::default())
}

pub fn find_optimum_with(
    n: f64,
    source: MomentsSource,
    loss: LossSpec,
    schedule: &SearchSchedule,
) -> Result<SensitivityReport> {
    check_positive_n(n)?;
    loss.validate()?;
    let optimum = match source {
        MomentsSource::Analytic => optimize(
            &AnalyticModel {
                mean_photon_number: n,
                loss,
            },
            schedule,
        )?,
        MomentsSource::Oracle => optimize(
            &PhaseScanEvaluator::new(n, 2, loss, OracleOptions::default())?,
            schedule,
        )?,
    };
    Ok(SensitivityReport::from_optimum(optimum, source))
}

/// Optimum with loss of transmissivity `t` in both arms.
pub fn lossy_optimum(
    n: f64,
    t: f64,
    placement: LossPlacement,
    source: MomentsSource,
) -> Result<SensitivityReport> {
    ensure_finite("transmissivity", t)?;
    if t <= 0.0 || t > 1.0 {
        return Err(invalid(
            "transmissivity",
            format!("must lie in (0, 1], got {t}"),
        ));
    }
    find_optimum_with(
        n,
        source,
        LossSpec::new(t, placement)?,
        &SearchSchedule::default(),
    )
}

/// Optima for both loss placements next to the lossless optimum at `T N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossPlacementComparison {
    pub mean_photon_number: f64,
    pub transmissivity: f64,
    pub before_phase: f64,
    pub after_phase: f64,
    /// `(T N)^{-3/2}`
    pub reduced_intensity_limit: f64,
}

pub fn compare_loss_placements(
    n: f64,
    t: f64,
    source: MomentsSource,
) -> Result<LossPlacementComparison> {
    let before = lossy_optimum(n, t, LossPlacement::BeforePhase, source)?;
    let after = lossy_optimum(n, t, LossPlacement::AfterPhase, source)?;
    Ok(LossPlacementComparison {
        mean_photon_number: n,
        transmissivity: t,
        before_phase: before.delta_phi,
        after_phase: after.delta_phi,
        reduced_intensity_limit: (t * n).powf(-1.5),
    })
}

/// `N^{-3/2}`, the protocol's optimal lossless sensitivity.
pub fn optimal_sensitivity(n: f64) -> Result<f64> {
    check_positive_n(n)?;
    Ok(n.powf(-1.5))
}

/// Heisenberg limit `1/N`.
pub fn heisenberg_limit(n: f64) -> Result<f64> {
    check_positive_n(n)?;
    Ok(1.0 / n)
}

/// Largest loss ratio for which the lossy optimum `(T N)^{-3/2}` still beats
/// the Heisenberg limit `1/N`: `1 - N^{-1/3}`.
pub fn allowable_max_loss(n: f64) -> Result<f64> {
    ensure_finite("mean_photon_number", n)?;
    if n < 1.0 {
        return Err(invalid(
            "mean_photon_number",
            format!("must be >= 1, got {n}"),
        ));
    }
    Ok(1.0 - n.cbrt().recip())
}

/// Fraction of the quantum Fisher information reached by homodyne detection,
/// `(qcrb / delta_phi)^2`.
pub fn fisher_ratio_for(n: f64, delta_phi: f64) -> Result<f64> {
    ensure_finite("delta_phi", delta_phi)?;
    if delta_phi <= 0.0 {
        return Err(invalid(
            "delta_phi",
            format!("must be > 0, got {delta_phi}"),
        ));
    }
    Ok((qcrb(n)? / delta_phi).powi(2))
}

/// Fisher ratio at the lossless optimum `N^{-3/2}`, i.e. `N / (N + 3/2)`.
pub fn fisher_ratio(n: f64) -> Result<f64> {
    fisher_ratio_for(n, optimal_sensitivity(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn sensitivity_examples() {
        let n: f64 = 20.0;
        let v = sensitivity_from_moments(&QuadratureMoments::new(0.0, 1.0), -n.powf(1.5)).unwrap();
        assert!((v - 0.011180).abs() < 1e-6);
        assert_eq!(
            sensitivity_from_moments(&QuadratureMoments::new(0.0, 4.0), 2.0).unwrap(),
            1.0
        );
        assert!(matches!(
            sensitivity_from_moments(&QuadratureMoments::new(0.0, 1.0), 1e-12),
            Err(Error::InsensitivePoint { .. })
        ));
    }

    #[test]
    fn analytic_optimum_at_unit_intensity() {
        let r = find_optimum(1.0, MomentsSource::Analytic).unwrap();
        assert!((r.delta_phi - 1.0).abs() < 1e-9);
        assert!(r.phi_star.abs() < 1e-4);
        assert!((r.theta_star - FRAC_PI_2).abs() < 1e-4);
        assert!(r.theta_degenerate);
    }

    #[test]
    fn lossy_optimum_rejects_dark_channel() {
        assert!(lossy_optimum(
            10.0,
            0.0,
            LossPlacement::BeforePhase,
            MomentsSource::Analytic
        )
        .is_err());
        assert!(lossy_optimum(
            10.0,
            1.1,
            LossPlacement::AfterPhase,
            MomentsSource::Analytic
        )
        .is_err());
    }

    #[test]
    fn transparent_loss_matches_lossless() {
        let lossless = find_optimum(20.0, MomentsSource::Analytic).unwrap();
        for placement in [LossPlacement::BeforePhase, LossPlacement::AfterPhase] {
            let r = lossy_optimum(20.0, 1.0, placement, MomentsSource::Analytic).unwrap();
            assert!((r.delta_phi - lossless.delta_phi).abs() < 1e-15);
        }
    }

    #[test]
    fn allowable_loss_examples() {
        assert_eq!(allowable_max_loss(1.0).unwrap(), 0.0);
        assert!((allowable_max_loss(20.0).unwrap() - 0.6316).abs() < 1e-4);
        assert!((allowable_max_loss(1000.0).unwrap() - 0.9).abs() < 1e-12);
        assert!(allowable_max_loss(0.5).is_err());
    }

    #[test]
    fn fisher_ratio_examples() {
        assert!((fisher_ratio(1.5).unwrap() - 0.5).abs() < 1e-12);
        assert!((fisher_ratio(100.0).unwrap() - 0.98522).abs() < 1e-5);
        assert!((fisher_ratio(1e9).unwrap() - 1.0).abs() < 1e-8);
    }
}
