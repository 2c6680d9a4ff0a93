//! Phase elements and the photon-loss channel.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use super::basis::TwoModeBasis;
use super::state::{MixedState2M, PureState2M, TwoModeState};
use crate::error::Result;
use crate::types::validate_transmissivity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    A,
    B,
}

impl Mode {
    #[inline]
    pub(crate) fn count(self, m: usize, n: usize) -> usize {
        match self {
            Mode::A => m,
            Mode::B => n,
        }
    }
}

/// Which arms a loss channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossModes {
    A,
    B,
    Both,
}

/// Whether the phase shifter removes the linear part `exp(i phi n)` of the
/// nonlinear phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PhaseCompensation {
    /// `exp[i phi (n^k - n)]`
    #[default]
    Compensated,
    /// `exp[i phi n^k]`
    Uncompensated,
}

/// Multiplies `|m, n>` by `exp(i angle(m, n))`.
pub fn apply_diagonal_phase<F>(state: &TwoModeState, angle: F) -> TwoModeState
where
    F: Fn(usize, usize) -> f64,
{
    let basis = state.basis();
    let phases: Vec<Complex64> = basis
        .iter()
        .map(|(_, m, n)| Complex64::from_polar(1.0, angle(m, n)))
        .collect();
    match state {
        TwoModeState::Pure(s) => TwoModeState::Pure(PureState2M {
            basis,
            amps: s.amps.iter().zip(&phases).map(|(c, p)| c * p).collect(),
        }),
        TwoModeState::Mixed(s) => {
            let d = phases.len();
            let rho = DMatrix::from_fn(d, d, |i, j| s.rho[(i, j)] * phases[i] * phases[j].conj());
            TwoModeState::Mixed(MixedState2M { basis, rho })
        }
    }
}

/// `exp(i theta n_mode)`.
pub fn apply_linear_phase(state: &TwoModeState, mode: Mode, theta: f64) -> TwoModeState {
    apply_diagonal_phase(state, |m, n| theta * mode.count(m, n) as f64)
}

/// Eigenphase of the order-`k` nonlinear element on `|n>`, divided by phi.
#[inline]
pub fn nonlinear_generator(n: usize, order: u32, compensation: PhaseCompensation) -> f64 {
    let n = n as f64;
    let nk = n.powi(order as i32);
    match compensation {
        PhaseCompensation::Compensated => nk - n,
        PhaseCompensation::Uncompensated => nk,
    }
}

/// `exp[i phi n^k]` or its compensated form on one mode.
pub fn apply_nonlinear_phase(
    state: &TwoModeState,
    mode: Mode,
    phi: f64,
    order: u32,
    compensation: PhaseCompensation,
) -> TwoModeState {
    apply_diagonal_phase(state, |m, n| {
        phi * nonlinear_generator(mode.count(m, n), order, compensation)
    })
}

/// Kraus amplitudes of the single-mode loss channel.
///
/// `K_j = sum_M kappa(M, j) |M - j><M|` with
/// `kappa(M, j) = sqrt(C(M, j) T^{M-j} (1-T)^j)`, i.e. `K_j` removes `j`
/// photons with binomial probability.
#[derive(Debug, Clone)]
pub struct LossKraus {
    n_max: usize,
    kappa: Vec<Vec<f64>>, // kappa[M][j], j <= M
}

impl LossKraus {
    pub fn new(transmissivity: f64, n_max: usize) -> Result<Self> {
        validate_transmissivity(transmissivity)?;
        let t = transmissivity;
        let kappa = (0..=n_max)
            .map(|big_m| {
                (0..=big_m)
                    .map(|j| {
                        let kept = big_m - j;
                        if t == 1.0 {
                            if j == 0 {
                                1.0
                            } else {
                                0.0
                            }
                        } else if t == 0.0 {
                            if kept == 0 {
                                1.0
                            } else {
                                0.0
                            }
                        } else {
                            (0.5 * (ln_binomial(big_m as u64, j as u64)
                                + kept as f64 * t.ln()
                                + j as f64 * (1.0 - t).ln()))
                            .exp()
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n_max, kappa })
    }

    #[inline]
    pub fn amplitude(&self, big_m: usize, j: usize) -> f64 {
        if j > big_m {
            0.0
        } else {
            self.kappa[big_m][j]
        }
    }

    /// Dense single-mode matrices `K_0 ..= K_{n_max}` on `|0> ..= |n_max>`.
    pub fn operators(&self) -> Vec<DMatrix<f64>> {
        let d = self.n_max + 1;
        (0..d)
            .map(|j| {
                DMatrix::from_fn(d, d, |row, col| {
                    if col >= j && row == col - j {
                        self.amplitude(col, j)
                    } else {
                        0.0
                    }
                })
            })
            .collect()
    }

    /// Largest entry of `sum_j K_j^T K_j - 1`.
    pub fn completeness_error(&self) -> f64 {
        let d = self.n_max + 1;
        let mut sum = DMatrix::<f64>::zeros(d, d);
        for k in self.operators() {
            sum += k.transpose() * &k;
        }
        (sum - DMatrix::<f64>::identity(d, d)).amax()
    }
}

fn damp_mode(
    rho: &DMatrix<Complex64>,
    basis: TwoModeBasis,
    mode: Mode,
    kraus: &LossKraus,
) -> DMatrix<Complex64> {
    let n_max = basis.n_max();
    let d = basis.dim();
    let coords: Vec<(usize, usize)> = basis.iter().map(|(_, m, n)| (m, n)).collect();
    // index of the state holding j more photons in the damped mode
    let shifted = |m: usize, n: usize, j: usize| -> usize {
        match mode {
            Mode::A => TwoModeBasis::sector_offset(m + n + j) + m + j,
            Mode::B => TwoModeBasis::sector_offset(m + n + j) + m,
        }
    };
    let mut out = DMatrix::zeros(d, d);
    for col in 0..d {
        let (mc, nc) = coords[col];
        let kc = mode.count(mc, nc);
        let room_c = n_max - mc - nc;
        for row in 0..d {
            let (mr, nr) = coords[row];
            let kr = mode.count(mr, nr);
            let room = room_c.min(n_max - mr - nr);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..=room {
                let w = kraus.amplitude(kr + j, j) * kraus.amplitude(kc + j, j);
                if w == 0.0 {
                    continue;
                }
                acc += rho[(shifted(mr, nr, j), shifted(mc, nc, j))] * w;
            }
            out[(row, col)] = acc;
        }
    }
    out
}

/// Photon loss with transmissivity `T` on the selected arms.
pub fn apply_loss(
    state: &TwoModeState,
    modes: LossModes,
    transmissivity: f64,
) -> Result<MixedState2M> {
    let basis = state.basis();
    let kraus = LossKraus::new(transmissivity, basis.n_max())?;
    let mixed = state.clone().into_mixed();
    if transmissivity == 1.0 {
        return Ok(mixed);
    }
    let mut rho = mixed.rho;
    if matches!(modes, LossModes::A | LossModes::Both) {
        rho = damp_mode(&rho, basis, Mode::A, &kraus);
    }
    if matches!(modes, LossModes::B | LossModes::Both) {
        rho = damp_mode(&rho, basis, Mode::B, &kraus);
    }
    Ok(MixedState2M { basis, rho })
}
