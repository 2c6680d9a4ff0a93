use num_complex::Complex64;

use super::basis::TwoModeBasis;
use super::channels::Mode;
use super::state::{MixedState2M, PureState2M, TwoModeState};
use crate::error::{invalid, Error, Result};
use crate::types::QuadratureMoments;

/// Edge weight above which quadrature moments are rejected.
pub const EDGE_LIMIT: f64 = 1e-10;

/// Borrowed view of either state representation.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a PureState2M),
    Mixed(&'a MixedState2M),
}

impl<'a> From<&'a PureState2M> for StateRef<'a> {
    fn from(s: &'a PureState2M) -> Self {
        Self::Pure(s)
    }
}

impl<'a> From<&'a MixedState2M> for StateRef<'a> {
    fn from(s: &'a MixedState2M) -> Self {
        Self::Mixed(s)
    }
}

impl<'a> From<&'a TwoModeState> for StateRef<'a> {
    fn from(s: &'a TwoModeState) -> Self {
        match s {
            TwoModeState::Pure(p) => Self::Pure(p),
            TwoModeState::Mixed(m) => Self::Mixed(m),
        }
    }
}

impl StateRef<'_> {
    fn basis(&self) -> TwoModeBasis {
        match self {
            Self::Pure(s) => s.basis,
            Self::Mixed(s) => s.basis,
        }
    }

    fn population(&self, index: usize) -> f64 {
        match self {
            Self::Pure(s) => s.amps[index].norm_sqr(),
            Self::Mixed(s) => s.rho[(index, index)].re,
        }
    }

    fn total_weight(&self) -> f64 {
        (0..self.basis().dim()).map(|i| self.population(i)).sum()
    }

    /// `<c^p>` for the lowering operator `c` of `mode`.
    fn lowering_power(&self, mode: Mode, power: usize) -> Complex64 {
        let basis = self.basis();
        let mut acc = Complex64::new(0.0, 0.0);
        for (y, m, n) in basis.iter() {
            let k = mode.count(m, n);
            if k < power {
                continue;
            }
            // c^p |y> = sqrt(k!/(k-p)!) |x>
            let factor = ((k + 1 - power)..=k)
                .map(|v| v as f64)
                .product::<f64>()
                .sqrt();
            let (mx, nx) = match mode {
                Mode::A => (m - power, n),
                Mode::B => (m, n - power),
            };
            let x = basis
                .index(mx, nx)
                .expect("lowering stays inside the space");
            acc += factor
                * match self {
                    Self::Pure(s) => s.amps[x].conj() * s.amps[y],
                    Self::Mixed(s) => s.rho[(y, x)],
                };
        }
        acc
    }
}

/// Photon-number distribution of one mode.
pub fn photon_distribution<'a>(state: impl Into<StateRef<'a>>, mode: Mode) -> Vec<f64> {
    let state = state.into();
    let basis = state.basis();
    let mut p = vec![0.0; basis.n_max() + 1];
    for (i, m, n) in basis.iter() {
        p[mode.count(m, n)] += state.population(i);
    }
    p
}

/// `<c>` for the lowering operator of `mode`.
pub fn lowering_expectation<'a>(state: impl Into<StateRef<'a>>, mode: Mode) -> Complex64 {
    state.into().lowering_power(mode, 1)
}

/// `<c^dag^m c^m>` from the number distribution of `mode`.
pub fn normal_ordered_expectation<'a>(state: impl Into<StateRef<'a>>, mode: Mode, m: usize) -> f64 {
    photon_distribution(state, mode)
        .iter()
        .enumerate()
        .filter(|(k, _)| *k >= m)
        .map(|(k, p)| p * ((k + 1 - m)..=k).map(|v| v as f64).product::<f64>())
        .sum()
}

/// Probability in the top sector `m + n = n_max`, relative to the trace.
pub fn edge_mass<'a>(state: impl Into<StateRef<'a>>) -> f64 {
    let state = state.into();
    let basis = state.basis();
    let s = basis.n_max();
    let off = TwoModeBasis::sector_offset(s);
    let edge: f64 = (off..=off + s).map(|i| state.population(i)).sum();
    edge / state.total_weight()
}

/// `<X>` and `<X^2>` for `X = c + c^dag`, from
/// `X^2 = c^2 + c^dag^2 + 2 c^dag c + 1`.
///
/// Fails when the top truncation sector carries more than [`EDGE_LIMIT`] of
/// the weight.
pub fn x_moments<'a>(state: impl Into<StateRef<'a>>, mode: Mode) -> Result<QuadratureMoments> {
    let state = state.into();
    let edge = edge_mass(state);
    if edge > EDGE_LIMIT {
        return Err(Error::TruncationEdge { edge_mass: edge });
    }
    let c = state.lowering_power(mode, 1);
    let c2 = state.lowering_power(mode, 2);
    let number = normal_ordered_expectation(state, mode, 1);
    Ok(QuadratureMoments::new(
        2.0 * c.re,
        2.0 * c2.re + 2.0 * number + 1.0,
    ))
}

/// `|psi_p> = 2^{-p/2} sum_j sqrt(C(p, j)) |j, p - j>`, the sector-`p`
/// component of a phase-averaged coherent input after the first beam
/// splitter.
pub fn psi_p_state(p: usize, n_max: usize) -> Result<PureState2M> {
    if p > n_max {
        return Err(invalid(
            "p",
            format!("sector {p} exceeds the cutoff n_max = {n_max}"),
        ));
    }
    let basis = TwoModeBasis::new(n_max);
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
    let ln_p = statrs::function::factorial::ln_factorial(p as u64);
    for j in 0..=p {
        let ln_binom = ln_p
            - statrs::function::factorial::ln_factorial(j as u64)
            - statrs::function::factorial::ln_factorial((p - j) as u64);
        let amp = (0.5 * ln_binom - 0.5 * p as f64 * std::f64::consts::LN_2).exp();
        amps[basis.index(j, p - j).expect("p <= n_max")] = Complex64::new(amp, 0.0);
    }
    Ok(PureState2M { basis, amps })
}
