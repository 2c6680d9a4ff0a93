use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::TwoModeBasis;

/// Pure two-mode state `sum c[m][n] |m, n>` on the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState2M {
    pub(crate) basis: TwoModeBasis,
    pub(crate) amps: Vec<Complex64>,
}

impl PureState2M {
    /// Builds a state from amplitudes in storage order.
    pub fn from_amplitudes(n_max: usize, amps: Vec<Complex64>) -> Option<Self> {
        let basis = TwoModeBasis::new(n_max);
        (amps.len() == basis.dim()).then_some(Self { basis, amps })
    }

    /// `|m, n>`, if it fits under the truncation.
    pub fn fock(m: usize, n: usize, n_max: usize) -> Option<Self> {
        let basis = TwoModeBasis::new(n_max);
        let idx = basis.index(m, n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amps[idx] = Complex64::new(1.0, 0.0);
        Some(Self { basis, amps })
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::fock(0, 0, n_max).expect("vacuum always fits")
    }

    pub fn n_max(&self) -> usize {
        self.basis.n_max()
    }

    pub fn basis(&self) -> TwoModeBasis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `c[m][n]`; zero outside the truncated space.
    pub fn amplitude(&self, m: usize, n: usize) -> Complex64 {
        self.basis
            .index(m, n)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amps[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.basis, other.basis, "truncations differ");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Probability held in each total-photon-number sector.
    pub fn sector_weights(&self) -> Vec<f64> {
        (0..=self.n_max())
            .map(|s| {
                let off = TwoModeBasis::sector_offset(s);
                self.amps[off..=off + s].iter().map(|c| c.norm_sqr()).sum()
            })
            .collect()
    }
}

/// Density operator `rho[(m, n), (m', n')]` on the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState2M {
    pub(crate) basis: TwoModeBasis,
    pub(crate) rho: DMatrix<Complex64>,
}

impl MixedState2M {
    pub fn from_pure(state: &PureState2M) -> Self {
        let v = &state.amps;
        let d = v.len();
        let rho = DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj());
        Self {
            basis: state.basis,
            rho,
        }
    }

    pub fn from_matrix(n_max: usize, rho: DMatrix<Complex64>) -> Option<Self> {
        let basis = TwoModeBasis::new(n_max);
        (rho.nrows() == basis.dim() && rho.ncols() == basis.dim()).then_some(Self { basis, rho })
    }

    pub fn n_max(&self) -> usize {
        self.basis.n_max()
    }

    pub fn basis(&self) -> TwoModeBasis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    /// `<m, n| rho |m', n'>`; zero outside the truncated space.
    pub fn element(&self, m: usize, n: usize, mp: usize, np: usize) -> Complex64 {
        match (self.basis.index(m, n), self.basis.index(mp, np)) {
            (Some(i), Some(j)) => self.rho[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|c| c.re).sum()
    }

    /// Largest elementwise `|rho - rho^dag|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.rho.nrows();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `<psi| rho |psi>`, the fidelity with a pure state.
    pub fn fidelity_with(&self, psi: &PureState2M) -> f64 {
        assert_eq!(self.basis, psi.basis, "truncations differ");
        let v = &psi.amps;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..v.len() {
            if v[j] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let col: Complex64 = (0..v.len()).map(|i| v[i].conj() * self.rho[(i, j)]).sum();
            acc += col * v[j];
        }
        acc.re
    }

    pub fn sector_weights(&self) -> Vec<f64> {
        (0..=self.n_max())
            .map(|s| {
                let off = TwoModeBasis::sector_offset(s);
                (off..=off + s).map(|i| self.rho[(i, i)].re).sum()
            })
            .collect()
    }
}

/// Either representation; the pipeline only densifies when loss is present.
#[derive(Debug, Clone, PartialEq)]
pub enum TwoModeState {
    Pure(PureState2M),
    Mixed(MixedState2M),
}

impl TwoModeState {
    pub fn basis(&self) -> TwoModeBasis {
        match self {
            Self::Pure(s) => s.basis,
            Self::Mixed(s) => s.basis,
        }
    }

    pub fn into_mixed(self) -> MixedState2M {
        match self {
            Self::Pure(s) => MixedState2M::from_pure(&s),
            Self::Mixed(s) => s,
        }
    }

    pub fn sector_weights(&self) -> Vec<f64> {
        match self {
            Self::Pure(s) => s.sector_weights(),
            Self::Mixed(s) => s.sector_weights(),
        }
    }

    /// Probability in the top sector `m + n = n_max`.
    pub fn edge_mass(&self) -> f64 {
        *self.sector_weights().last().unwrap_or(&0.0)
    }
}

impl From<PureState2M> for TwoModeState {
    fn from(s: PureState2M) -> Self {
        Self::Pure(s)
    }
}

impl From<MixedState2M> for TwoModeState {
    fn from(s: MixedState2M) -> Self {
        Self::Mixed(s)
    }
}

/// One non-negligible amplitude in a state dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEntry {
    pub m: usize,
    pub n: usize,
    pub re: f64,
    pub im: f64,
}

/// Debug dump: amplitudes with `|c| > threshold`, as JSON.
pub fn dump_state_json(state: &PureState2M, threshold: f64) -> String {
    let entries: Vec<AmplitudeEntry> = state
        .basis
        .iter()
        .filter_map(|(i, m, n)| {
            let c = state.amps[i];
            (c.norm() > threshold).then_some(AmplitudeEntry {
                m,
                n,
                re: c.re,
                im: c.im,
            })
        })
        .collect();
    serde_json::to_string(&entries).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_keeps_only_large_amplitudes() {
        let s = 0.5f64.sqrt();
        let mut amps = vec![Complex64::new(0.0, 0.0); TwoModeBasis::new(2).dim()];
        amps[1] = Complex64::new(s, 0.0); // |0,1>
        amps[2] = Complex64::new(0.0, s); // |1,0>
        amps[3] = Complex64::new(1e-12, 0.0);
        let state = PureState2M::from_amplitudes(2, amps).unwrap();
        let parsed: Vec<AmplitudeEntry> =
            serde_json::from_str(&dump_state_json(&state, 1e-9)).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!((parsed[0].m, parsed[0].n), (0, 1));
        assert_eq!((parsed[1].m, parsed[1].n, parsed[1].im), (1, 0, s));
    }

    #[test]
    fn pure_to_mixed_is_hermitian_unit_trace() {
        let s = 0.5f64.sqrt();
        let mut amps = vec![Complex64::new(0.0, 0.0); TwoModeBasis::new(3).dim()];
        amps[1] = Complex64::new(s, 0.0);
        amps[4] = Complex64::new(0.0, -s);
        let pure = PureState2M::from_amplitudes(3, amps).unwrap();
        let mixed = MixedState2M::from_pure(&pure);
        assert!((mixed.trace() - 1.0).abs() < 1e-15);
        assert_eq!(mixed.hermiticity_error(), 0.0);
        assert!((mixed.fidelity_with(&pure) - 1.0).abs() < 1e-15);
    }
}
