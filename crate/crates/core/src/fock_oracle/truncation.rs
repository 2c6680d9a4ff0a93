use num_complex::Complex64;
use statrs::function::factorial::ln_factorial;

use super::basis::TwoModeBasis;
use super::state::PureState2M;
use crate::error::{ensure_finite, Error, Result};

/// Largest neglected Poisson mass accepted for a coherent input.
pub const TAIL_LIMIT: f64 = 1e-12;

/// `P(K > n_max)` for `K ~ Poisson(mean)`.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut total = 0.0;
    let mut k = n_max as u64 + 1;
    loop {
        let term = (-mean + k as f64 * ln_mean - ln_factorial(k)).exp();
        total += term;
        if k as f64 > mean && term <= 1e-18 * total {
            return total;
        }
        k += 1;
    }
}

/// Photon-number cutoff for a coherent input of total mean `mean`:
/// `ceil(N + 6 sqrt(N) + 10)`, grown by 25% until the Poisson tail is below
/// [`TAIL_LIMIT`].
pub fn auto_n_max(mean: f64) -> usize {
    let mean = mean.max(0.0);
    let mut n_max = (mean + 6.0 * mean.sqrt() + 10.0).ceil() as usize;
    while poisson_tail(mean, n_max) >= TAIL_LIMIT {
        n_max = ((n_max as f64) * 1.25).ceil() as usize;
    }
    n_max
}

/// Product coherent state `|alpha_a>|alpha_b>` truncated at total photon
/// number `n_max`. Amplitudes are exact (no renormalization); the truncation
/// is rejected when the neglected mass reaches [`TAIL_LIMIT`].
pub fn coherent_two_mode(
    alpha_a: Complex64,
    alpha_b: Complex64,
    n_max: usize,
) -> Result<PureState2M> {
    for (name, v) in [
        ("alpha_a.re", alpha_a.re),
        ("alpha_a.im", alpha_a.im),
        ("alpha_b.re", alpha_b.re),
        ("alpha_b.im", alpha_b.im),
    ] {
        ensure_finite(name, v)?;
    }
    let total = alpha_a.norm_sqr() + alpha_b.norm_sqr();
    let tail = poisson_tail(total, n_max);
    if tail >= TAIL_LIMIT {
        return Err(Error::InsufficientTruncation { n_max, tail });
    }

    let basis = TwoModeBasis::new(n_max);
    let ln_norm = -0.5 * total;
    let single = |alpha: Complex64, k: usize| -> Complex64 {
        if k == 0 {
            return Complex64::new(1.0, 0.0);
        }
        if alpha.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let ln_mag = k as f64 * alpha.norm().ln() - 0.5 * ln_factorial(k as u64);
        Complex64::from_polar(1.0, k as f64 * alpha.arg()) * ln_mag.exp()
    };
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
    let scale = ln_norm.exp();
    for (i, m, n) in basis.iter() {
        amps[i] = single(alpha_a, m) * single(alpha_b, n) * scale;
    }
    Ok(PureState2M { basis, amps })
}

/// Same as [`coherent_two_mode`] with the cutoff chosen by [`auto_n_max`].
pub fn coherent_two_mode_auto(alpha_a: Complex64, alpha_b: Complex64) -> Result<PureState2M> {
    coherent_two_mode(
        alpha_a,
        alpha_b,
        auto_n_max(alpha_a.norm_sqr() + alpha_b.norm_sqr()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_matches_direct_sum() {
        // P(K > 3) for Poisson(2) = 1 - e^{-2}(1 + 2 + 2 + 4/3)
        let expected = 1.0 - (-2.0f64).exp() * (1.0 + 2.0 + 2.0 + 4.0 / 3.0);
        assert!((poisson_tail(2.0, 3) - expected).abs() < 1e-15);
        assert_eq!(poisson_tail(0.0, 0), 0.0);
    }

    #[test]
    fn auto_cutoff_meets_tail_limit() {
        for mean in [0.0, 0.3, 4.0, 20.0, 30.0, 100.0] {
            let n = auto_n_max(mean);
            assert!(n >= (mean + 6.0 * mean.sqrt() + 10.0).ceil() as usize);
            assert!(poisson_tail(mean, n) < TAIL_LIMIT, "mean = {mean}");
        }
    }

    #[test]
    fn rejects_short_cutoff_with_tail() {
        match coherent_two_mode(Complex64::new(3.0, 0.0), Complex64::new(0.0, 0.0), 5) {
            Err(Error::InsufficientTruncation { n_max, tail }) => {
                assert_eq!(n_max, 5);
                assert!((tail - poisson_tail(9.0, 5)).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
