//! Balanced beam splitter `U = exp[i pi (a^dag b + b^dag a) / 4]`.
//!
//! In the Heisenberg picture `U^dag b U = (b + i a) / sqrt(2)`, so
//! `|1, 0> -> (|1, 0> + i |0, 1>) / sqrt(2)`. Each total-photon sector `s` is
//! an invariant `(s+1)`-dimensional block; its unitary is the exponential of
//! the real tridiagonal generator, taken through its eigendecomposition.

use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::basis::TwoModeBasis;
use super::state::{MixedState2M, PureState2M, TwoModeState};

/// Generator `a^dag b + b^dag a` restricted to sector `s`, in the basis
/// `|m, s - m>`, `m = 0..=s`.
pub fn sector_generator(s: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(s + 1, s + 1);
    for m in 0..s {
        // a^dag b |m, s-m> = sqrt((m+1)(s-m)) |m+1, s-m-1>
        let v = (((m + 1) * (s - m)) as f64).sqrt();
        g[(m + 1, m)] = v;
        g[(m, m + 1)] = v;
    }
    g
}

/// Sector unitary `exp(i pi/4 G_s)`.
pub fn sector_unitary(s: usize) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(sector_generator(s));
    let v = eig.eigenvectors;
    let dim = s + 1;
    // Eigenvalues snapped to the exact spectrum {-s, -s+2, ..., s}.
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * l.round()))
        .collect();
    DMatrix::from_fn(dim, dim, |i, j| {
        (0..dim)
            .map(|k| phases[k] * (v[(i, k)] * v[(j, k)]))
            .sum::<Complex64>()
    })
}

/// Sector unitaries are independent of the cutoff, so one growing table
/// serves every truncation.
fn cache() -> &'static Mutex<Vec<Arc<DMatrix<Complex64>>>> {
    static CACHE: OnceLock<Mutex<Vec<Arc<DMatrix<Complex64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Vec::new()))
}

/// Frobenius norm of `U_s^dagger U_s - 1`.
pub fn unitarity_error(s: usize) -> f64 {
    let u = sector_unitary(s);
    (u.adjoint() * &u - DMatrix::<Complex64>::identity(s + 1, s + 1)).norm()
}

/// Sector unitaries `U_0 ..= U_{n_max}`.
pub fn sector_unitaries(n_max: usize) -> Vec<Arc<DMatrix<Complex64>>> {
    let mut table = cache().lock().unwrap_or_else(|e| e.into_inner());
    while table.len() <= n_max {
        let s = table.len();
        table.push(Arc::new(sector_unitary(s)));
    }
    table[..=n_max].to_vec()
}

pub fn apply_bs_5050(state: &PureState2M) -> PureState2M {
    let n_max = state.n_max();
    let unitaries = sector_unitaries(n_max);
    let mut out = vec![Complex64::new(0.0, 0.0); state.amps.len()];
    for (s, u) in unitaries.iter().enumerate() {
        let off = TwoModeBasis::sector_offset(s);
        let input = &state.amps[off..=off + s];
        let output = &mut out[off..=off + s];
        for (j, &cj) in input.iter().enumerate() {
            if cj == Complex64::new(0.0, 0.0) {
                continue;
            }
            let col = u.column(j);
            for (o, &uij) in output.iter_mut().zip(col.iter()) {
                *o += uij * cj;
            }
        }
    }
    PureState2M {
        basis: state.basis,
        amps: out,
    }
}

/// `U rho U^dag`, block by block over sector pairs.
pub fn apply_bs_5050_mixed(state: &MixedState2M) -> MixedState2M {
    let n_max = state.n_max();
    let unitaries = sector_unitaries(n_max);
    let adjoints: Vec<DMatrix<Complex64>> = unitaries.iter().map(|u| u.adjoint()).collect();
    let d = state.rho.nrows();
    let mut out = DMatrix::zeros(d, d);
    for (s, u) in unitaries.iter().enumerate() {
        let oi = TwoModeBasis::sector_offset(s);
        for (sp, uh) in adjoints.iter().enumerate() {
            let oj = TwoModeBasis::sector_offset(sp);
            let block = state.rho.view((oi, oj), (s + 1, sp + 1));
            let rotated = u.as_ref() * block * uh;
            out.view_mut((oi, oj), (s + 1, sp + 1)).copy_from(&rotated);
        }
    }
    MixedState2M {
        basis: state.basis,
        rho: out,
    }
}

pub fn apply_bs(state: &TwoModeState) -> TwoModeState {
    match state {
        TwoModeState::Pure(s) => TwoModeState::Pure(apply_bs_5050(s)),
        TwoModeState::Mixed(s) => TwoModeState::Mixed(apply_bs_5050_mixed(s)),
    }
}
