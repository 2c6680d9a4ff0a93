//! Fast repeated evaluation of the simulated interferometer over phase grids.
//!
//! The phases act diagonally between two fixed stages, so every detector
//! expectation is a bilinear form
//! `<O>(phi, theta) = sum_{x,y} sigma[y,x] Ohat[x,y] e^{i phi (g_y - g_x)} e^{i theta (n_y - n_x)}`
//! where `sigma` is the numerically simulated state entering the phase
//! elements and `Ohat` is the detector observable pulled back numerically
//! through the second beam splitter (and the loss channel when it follows the
//! phases). For fixed phi the sum collapses to a short trigonometric
//! polynomial in theta, which is what [`PhiSlice`] stores.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::TwoModeBasis;
use super::beam_splitter::{apply_bs_5050, sector_unitaries};
use super::channels::{apply_loss, nonlinear_generator, LossKraus, LossModes, Mode};
use super::pipeline::OracleOptions;
use super::state::TwoModeState;
use super::truncation::coherent_two_mode;
use crate::error::Result;
use crate::types::{LossPlacement, LossSpec, ProtocolParams, QuadratureMoments};

/// Operator whose only nonzero blocks map sector `s + shift` to sector `s`:
/// `blocks[s][(i, j)] = <x_i| O |y_j>` with `x_i` in sector `s` and `y_j` in
/// sector `s + shift`.
#[derive(Debug, Clone)]
struct BandOperator {
    shift: usize,
    blocks: Vec<DMatrix<Complex64>>,
}

impl BandOperator {
    /// `b^p` (lowering mode B by `p`) or, for `p = 0`, the number operator `b^dag b`.
    fn mode_b_operator(n_max: usize, power: usize) -> Self {
        let blocks = (0..=n_max.saturating_sub(power))
            .filter(|s| s + power <= n_max)
            .map(|s| {
                DMatrix::from_fn(s + 1, s + power + 1, |i, j| {
                    // x = (i, s - i), y = (j, s + power - j)
                    if i != j {
                        return Complex64::new(0.0, 0.0);
                    }
                    let n = s + power - j;
                    let v = if power == 0 {
                        n as f64
                    } else {
                        ((n + 1 - power)..=n)
                            .map(|v| v as f64)
                            .product::<f64>()
                            .sqrt()
                    };
                    Complex64::new(v, 0.0)
                })
            })
            .collect();
        Self {
            shift: power,
            blocks,
        }
    }

    /// `U^dag O U` for the balanced beam splitter.
    fn conjugate_by_bs(&self, unitaries: &[std::sync::Arc<DMatrix<Complex64>>]) -> Self {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(s, blk)| unitaries[s].adjoint() * blk * unitaries[s + self.shift].as_ref())
            .collect();
        Self {
            shift: self.shift,
            blocks,
        }
    }

    /// Heisenberg-picture loss on one mode: `sum_j K_j^dag O K_j`.
    fn damp(&self, mode: Mode, kraus: &LossKraus) -> Self {
        let d = self.shift;
        let blocks = (0..self.blocks.len())
            .map(|s| {
                DMatrix::from_fn(s + 1, s + d + 1, |i, j| {
                    let (kx, ky) = match mode {
                        Mode::A => (i, j),
                        Mode::B => (s - i, s + d - j),
                    };
                    let mut acc = Complex64::new(0.0, 0.0);
                    for l in 0..=kx.min(ky) {
                        let w = kraus.amplitude(kx, l) * kraus.amplitude(ky, l);
                        if w == 0.0 {
                            continue;
                        }
                        let (ii, jj) = match mode {
                            Mode::A => (i - l, j - l),
                            Mode::B => (i, j),
                        };
                        acc += self.blocks[s - l][(ii, jj)] * w;
                    }
                    acc
                })
            })
            .collect();
        Self { shift: d, blocks }
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    x: u32,
    y: u32,
    weight: Complex64,
}

/// Precomputed bilinear forms for `<b>`, `<b^2>` and `<b^dag b>` at the detector.
#[derive(Debug, Clone)]
pub struct PhaseScanEvaluator {
    n_max: usize,
    generator: Vec<f64>,
    count_b: Vec<usize>,
    lower: Vec<Entry>,
    lower2: Vec<Entry>,
    number: Vec<Entry>,
}

impl PhaseScanEvaluator {
    pub fn new(
        mean_photon_number: f64,
        order: u32,
        loss: LossSpec,
        options: OracleOptions,
    ) -> Result<Self> {
        ProtocolParams::with_order(mean_photon_number, 0.0, 0.0, order)?;
        loss.validate()?;
        let n_max = options.resolve_n_max(mean_photon_number);
        let basis = TwoModeBasis::new(n_max);
        let input = coherent_two_mode(
            Complex64::new(mean_photon_number.sqrt(), 0.0),
            Complex64::new(0.0, 0.0),
            n_max,
        )?;
        let mut sigma = TwoModeState::Pure(apply_bs_5050(&input));
        if loss.placement == LossPlacement::BeforePhase && !loss.is_transparent() {
            sigma = TwoModeState::Mixed(apply_loss(&sigma, LossModes::Both, loss.transmissivity)?);
        }

        let unitaries = sector_unitaries(n_max);
        let after_loss = (loss.placement == LossPlacement::AfterPhase && !loss.is_transparent())
            .then(|| LossKraus::new(loss.transmissivity, n_max))
            .transpose()?;
        let pull_back = |op: BandOperator| {
            let op = op.conjugate_by_bs(&unitaries);
            match &after_loss {
                Some(kraus) => op.damp(Mode::A, kraus).damp(Mode::B, kraus),
                None => op,
            }
        };
        let entries = |op: BandOperator| -> Vec<Entry> {
            let mut out = Vec::new();
            for (s, blk) in op.blocks.iter().enumerate() {
                let ox = TwoModeBasis::sector_offset(s);
                let oy = TwoModeBasis::sector_offset(s + op.shift);
                for j in 0..blk.ncols() {
                    for i in 0..blk.nrows() {
                        let (x, y) = (ox + i, oy + j);
                        let state_factor = match &sigma {
                            TwoModeState::Pure(p) => p.amps[y] * p.amps[x].conj(),
                            TwoModeState::Mixed(m) => m.rho[(y, x)],
                        };
                        let weight = state_factor * blk[(i, j)];
                        if weight != Complex64::new(0.0, 0.0) {
                            out.push(Entry {
                                x: x as u32,
                                y: y as u32,
                                weight,
                            });
                        }
                    }
                }
            }
            out
        };

        let lower = entries(pull_back(BandOperator::mode_b_operator(n_max, 1)));
        let lower2 = entries(pull_back(BandOperator::mode_b_operator(n_max, 2)));
        let number = entries(pull_back(BandOperator::mode_b_operator(n_max, 0)));

        let compensation = options.compensation;
        let generator = basis
            .iter()
            .map(|(_, m, _)| nonlinear_generator(m, order, compensation))
            .collect();
        let count_b = basis.iter().map(|(_, _, n)| n).collect();
        Ok(Self {
            n_max,
            generator,
            count_b,
            lower,
            lower2,
            number,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Collapses the bilinear forms at fixed `phi`.
    pub fn slice(&self, phi: f64) -> PhiSlice {
        let phases: Vec<Complex64> = self
            .generator
            .iter()
            .map(|&g| Complex64::from_polar(1.0, phi * g))
            .collect();
        let width = 2 * self.n_max + 1;
        let collapse = |entries: &[Entry]| {
            let mut value = vec![Complex64::new(0.0, 0.0); width];
            let mut d_phi = vec![Complex64::new(0.0, 0.0); width];
            for e in entries {
                let (x, y) = (e.x as usize, e.y as usize);
                let t = e.weight * phases[x].conj() * phases[y];
                let k = self.n_max + self.count_b[y] - self.count_b[x];
                value[k] += t;
                d_phi[k] += t * Complex64::new(0.0, self.generator[y] - self.generator[x]);
            }
            ThetaSeries { value, d_phi }
        };
        PhiSlice {
            phi,
            n_max: self.n_max,
            lower: collapse(&self.lower),
            lower2: collapse(&self.lower2),
            number: collapse(&self.number),
        }
    }

    pub fn moments(&self, theta: f64, phi: f64) -> QuadratureMoments {
        self.slice(phi).moments(theta)
    }
}

/// `f(theta) = sum_k c_k e^{i theta (k - n_max)}` and its phi-derivative.
#[derive(Debug, Clone)]
struct ThetaSeries {
    value: Vec<Complex64>,
    d_phi: Vec<Complex64>,
}

/// Expectations along theta at one fixed phi.
#[derive(Debug, Clone)]
pub struct PhiSlice {
    phi: f64,
    n_max: usize,
    lower: ThetaSeries,
    lower2: ThetaSeries,
    number: ThetaSeries,
}

impl PhiSlice {
    pub fn phi(&self) -> f64 {
        self.phi
    }

    fn harmonics(&self, theta: f64) -> Vec<Complex64> {
        (0..=2 * self.n_max)
            .map(|k| Complex64::from_polar(1.0, theta * (k as f64 - self.n_max as f64)))
            .collect()
    }

    fn sum(coeffs: &[Complex64], harmonics: &[Complex64]) -> Complex64 {
        coeffs.iter().zip(harmonics).map(|(c, h)| c * h).sum()
    }

    pub fn moments(&self, theta: f64) -> QuadratureMoments {
        let h = self.harmonics(theta);
        let b = Self::sum(&self.lower.value, &h);
        let b2 = Self::sum(&self.lower2.value, &h);
        let n = Self::sum(&self.number.value, &h);
        QuadratureMoments::new(2.0 * b.re, 2.0 * b2.re + 2.0 * n.re + 1.0)
    }

    /// `d<X>/d phi`.
    pub fn slope(&self, theta: f64) -> f64 {
        2.0 * Self::sum(&self.lower.d_phi, &self.harmonics(theta)).re
    }

    /// `d<X>/d theta`.
    pub fn theta_slope(&self, theta: f64) -> f64 {
        let h = self.harmonics(theta);
        let d: Complex64 = self
            .lower
            .value
            .iter()
            .zip(&h)
            .enumerate()
            .map(|(k, (c, hk))| c * hk * Complex64::new(0.0, k as f64 - self.n_max as f64))
            .sum();
        2.0 * d.re
    }
}
