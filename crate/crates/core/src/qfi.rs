//! Phase-averaged quantum Fisher information of the protocol.
//!
//! Removing the external phase reference turns the coherent input into a
//! Poisson mixture of photon-number sectors. After the first beam splitter
//! each sector `p` is the pure binomial state
//! `|psi_p> = 2^{-p/2} sum_j sqrt(C(p, j)) |j, p - j>`, the sectors stay
//! orthogonal, and the total QFI is the Poisson-weighted sum of the
//! per-sector QFIs for the generator `n_A^2 - n_A = a^dag^2 a^2`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{ensure_finite, invalid, Error, Result};

/// QFI of sector `p`: `p (p - 1) (2p - 1) / 2`.
pub fn sector_qfi(p: u32) -> f64 {
    let p = p as f64;
    0.5 * p * (p - 1.0) * (2.0 * p - 1.0)
}

/// `sector_qfi` in exact arithmetic.
pub fn sector_qfi_exact(p: u32) -> BigRational {
    let p = BigInt::from(p);
    let num = &p * (&p - 1) * (BigInt::from(2) * &p - 1);
    BigRational::new(num, BigInt::from(2))
}

/// `(n)_m = n (n - 1) ... (n - m + 1)` as an exact integer.
fn falling_factorial(n: u32, m: u32) -> BigInt {
    if m > n {
        return BigInt::zero();
    }
    (n - m + 1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn binomial(n: u32, k: u32) -> BigInt {
    falling_factorial(n, k) / falling_factorial(k, k)
}

/// Exact `<a^dag^m a^m>` on mode A of `|psi_p>`, summed over the state's
/// number distribution `|c_j|^2 = C(p, j) / 2^p`.
pub fn psi_p_normal_ordered_exact(p: u32, m: u32) -> BigRational {
    let denom = BigInt::one() << p;
    let num = (0..=p)
        .map(|j| binomial(p, j) * falling_factorial(j, m))
        .fold(BigInt::zero(), |acc, x| acc + x);
    BigRational::new(num, denom)
}

/// `p! / (p - m)! / 2^m`, the sector's normal-ordered moment in product form.
pub fn psi_p_normal_ordered_product_form(p: u32, m: u32) -> BigRational {
    BigRational::new(falling_factorial(p, m), BigInt::one() << m)
}

/// Sector QFI by brute force: builds the binomial amplitudes of `|psi_p>`,
/// evaluates the normal-ordered moments of `O = a^dag^2 a^2` and
/// `O^2 = a^dag^4 a^4 + 4 a^dag^3 a^3 + 2 a^dag^2 a^2` on that state, and
/// returns `4 (<O^2> - <O>^2)` exactly.
pub fn sector_qfi_bruteforce(p: u32) -> BigRational {
    let o = psi_p_normal_ordered_exact(p, 2);
    let o2 = psi_p_normal_ordered_exact(p, 4)
        + BigRational::from_integer(4.into()) * psi_p_normal_ordered_exact(p, 3)
        + BigRational::from_integer(2.into()) * &o;
    BigRational::from_integer(4.into()) * (o2 - &o * &o)
}

/// One term of the Poisson-weighted sector sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorTerm {
    pub p: u32,
    /// `e^{-N} N^p / p!`
    pub weight: f64,
    pub sector_qfi: f64,
}

impl SectorTerm {
    pub fn contribution(&self) -> f64 {
        self.weight * self.sector_qfi
    }
}

/// Poisson weight `e^{-N} N^p / p!`, evaluated in log space.
pub fn poisson_weight(n: f64, p: u32) -> f64 {
    if n == 0.0 {
        return if p == 0 { 1.0 } else { 0.0 };
    }
    (-n + p as f64 * n.ln() - ln_factorial(p as u64)).exp()
}

pub fn sector_terms(n: f64, p_max: u32) -> Vec<SectorTerm> {
    (0..=p_max)
        .map(|p| SectorTerm {
            p,
            weight: poisson_weight(n, p),
            sector_qfi: sector_qfi(p),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiResult {
    pub value: f64,
    /// Largest sector included in the sum.
    pub p_max: u32,
    /// Upper bound on the QFI carried by the neglected sectors `p > p_max`.
    /// Also an upper bound on the neglected Poisson mass.
    pub tail_bound: f64,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Phase-averaged QFI as the truncated Poisson-weighted sector series.
///
/// Sectors are summed in ascending `p` until a geometric majorant of the
/// remaining tail drops below `tolerance` (absolute, in QFI units). For
/// `p >= 2` the term ratio `t_{p+1} / t_p = N (2p + 1) / ((p - 1)(2p - 1))`
/// decreases in `p`, so once it is below one the tail after `p` is at most
/// `t_{p+1} / (1 - r_{p+1})`.
pub fn phase_averaged_qfi(n: f64, tolerance: f64) -> Result<QfiResult> {
    ensure_finite("mean_photon_number", n)?;
    ensure_finite("tolerance", tolerance)?;
    if n < 0.0 {
        return Err(invalid(
            "mean_photon_number",
            format!("must be >= 0, got {n}"),
        ));
    }
    if tolerance <= 0.0 {
        return Err(invalid(
            "tolerance",
            format!("must be > 0, got {tolerance}"),
        ));
    }
    if n == 0.0 {
        return Ok(QfiResult {
            value: 0.0,
            p_max: 2,
            tail_bound: 0.0,
        });
    }

    let term = |p: u32| poisson_weight(n, p) * sector_qfi(p);
    let mut sum = CompensatedSum::default();
    let mut p: u32 = 2;
    loop {
        sum.add(term(p));
        let next = p + 1;
        // ratio t_{next+1} / t_next
        let ratio =
            n * (2.0 * next as f64 + 1.0) / ((next as f64 - 1.0) * (2.0 * next as f64 - 1.0));
        if ratio < 1.0 {
            let tail_bound = term(next) / (1.0 - ratio);
            if tail_bound < tolerance {
                return Ok(QfiResult {
                    value: sum.value(),
                    p_max: p,
                    tail_bound,
                });
            }
        }
        p = next;
        if p == u32::MAX {
            return Err(invalid("mean_photon_number", "series failed to converge"));
        }
    }
}

/// Resummed series, `N^3 + (3/2) N^2`.
pub fn qfi_closed_form(n: f64) -> f64 {
    n * n * (n + 1.5)
}

/// Quantum Cramer-Rao bound `F^{-1/2}` for a single shot.
pub fn qcrb(n: f64) -> Result<f64> {
    ensure_finite("mean_photon_number", n)?;
    if n < 0.0 {
        return Err(invalid(
            "mean_photon_number",
            format!("must be >= 0, got {n}"),
        ));
    }
    let f = qfi_closed_form(n);
    if f == 0.0 {
        return Err(Error::Uninformative);
    }
    Ok(f.powf(-0.5))
}

/// Exact rational as `f64`.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn sector_formula_examples() {
        assert_eq!(sector_qfi(0), 0.0);
        assert_eq!(sector_qfi(1), 0.0);
        assert_eq!(sector_qfi(2), 3.0);
        assert_eq!(sector_qfi(3), 15.0);
        assert_eq!(sector_qfi(5), 90.0);
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(sector_qfi_bruteforce(0), int(0));
        assert_eq!(sector_qfi_bruteforce(1), int(0));
        assert_eq!(sector_qfi_bruteforce(2), int(3));
        // <O> = 5, <O^2> = 95/2 for p = 5, giving 4 * 45/2 = 90.
        assert_eq!(psi_p_normal_ordered_exact(5, 2), int(5));
        assert_eq!(sector_qfi_bruteforce(5), int(90));
    }

    #[test]
    fn bruteforce_matches_formula_exactly() {
        for p in 0..=20 {
            assert_eq!(sector_qfi_bruteforce(p), sector_qfi_exact(p), "p = {p}");
            assert_eq!(to_f64(&sector_qfi_exact(p)), sector_qfi(p));
        }
    }

    #[test]
    fn normal_ordered_product_form_matches_state_sum() {
        for p in 0..=20 {
            for m in 0..=6 {
                assert_eq!(
                    psi_p_normal_ordered_exact(p, m),
                    psi_p_normal_ordered_product_form(p, m),
                    "p = {p}, m = {m}"
                );
            }
        }
    }

    #[test]
    fn series_examples() {
        assert_eq!(phase_averaged_qfi(0.0, 1e-12).unwrap().value, 0.0);
        let one = phase_averaged_qfi(1.0, 1e-13).unwrap();
        assert!((one.value - 2.5).abs() < 1e-12);
        let ten = phase_averaged_qfi(10.0, 1e-10).unwrap();
        assert!((ten.value - 1150.0).abs() / 1150.0 < 1e-12);
        assert!(ten.tail_bound < 1e-10);
        assert!(ten.p_max > 10);
    }

    #[test]
    fn series_rejects_bad_input() {
        assert!(phase_averaged_qfi(1.0, 0.0).is_err());
        assert!(phase_averaged_qfi(1.0, -1.0).is_err());
        assert!(phase_averaged_qfi(-1.0, 1e-9).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(qfi_closed_form(0.0), 0.0);
        assert_eq!(qfi_closed_form(1.0), 2.5);
        assert_eq!(qfi_closed_form(20.0), 8600.0);
    }

    #[test]
    fn qcrb_examples() {
        assert!((qcrb(1.0).unwrap() - 1.0 / 2.5f64.sqrt()).abs() < 1e-15);
        assert!((qcrb(1.0).unwrap() - 0.63246).abs() < 1e-5);
        let b = qcrb(100.0).unwrap();
        assert!((b - 1.0 / 1_015_000f64.sqrt()).abs() < 1e-18);
        assert!((b - 9.92583e-4).abs() < 1e-9);
        assert_eq!(qcrb(0.0), Err(Error::Uninformative));
    }

    #[test]
    fn poisson_weights_cover_unit_mass() {
        for n in [0.5, 4.0, 30.0] {
            let r = phase_averaged_qfi(n, 1e-12).unwrap();
            let mass: f64 = sector_terms(n, r.p_max).iter().map(|t| t.weight).sum();
            assert!(mass >= 1.0 - r.tail_bound - 1e-14, "n = {n}");
            assert!(mass <= 1.0 + 1e-14);
        }
    }
}
