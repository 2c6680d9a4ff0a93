//! Figure-data sweeps.

use nlphase::analytic_model::{contrast, fringe_extrema, moments_with_loss, PhiDomain};
use nlphase::estimation::{
    allowable_max_loss, find_optimum_with, fisher_ratio_for, heisenberg_limit, MomentsSource,
    SearchSchedule, SensitivityModel, SensitivitySlice,
};
use nlphase::fock_oracle::{OracleOptions, PhaseScanEvaluator};
use nlphase::qfi::{qcrb, qfi_closed_form};
use nlphase::{LossPlacement, LossSpec, ProtocolParams, Result};

use crate::config::SweepConfig;
use crate::table::{Cell, Table};

pub fn oracle_options(config: &SweepConfig) -> OracleOptions {
    OracleOptions {
        n_max: config.n_max,
        ..OracleOptions::default()
    }
}

fn analytic_mean(n: f64, theta: f64, phi: f64, loss: &LossSpec) -> Result<f64> {
    Ok(moments_with_loss(&ProtocolParams::new(n, theta, phi)?, loss)?.mean)
}

fn domain(config: &SweepConfig) -> Result<PhiDomain> {
    let lo = config.phi_grid[0];
    let hi = *config.phi_grid.last().expect("nonempty grid");
    PhiDomain::new(lo, hi)
}

struct Deviations {
    max: f64,
    cutoffs: Vec<String>,
}

impl Deviations {
    fn new() -> Self {
        Self {
            max: 0.0,
            cutoffs: Vec::new(),
        }
    }

    fn record(&mut self, d: f64) -> f64 {
        self.max = self.max.max(d);
        d
    }

    fn cutoff(&mut self, n: f64, evaluator: &PhaseScanEvaluator) {
        self.cutoffs.push(format!(
            "{}={}",
            crate::table::format_g(n),
            evaluator.n_max()
        ));
    }

    fn finish(self, table: &mut Table, with_oracle: bool) {
        if with_oracle {
            table.meta("n_max", self.cutoffs.join(" "));
            table.meta("max_deviation", self.max);
        }
    }
}

fn columns(base: &[&str], oracle: &[&str], with_oracle: bool) -> Vec<String> {
    let mut c: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    if with_oracle {
        c.extend(oracle.iter().map(|s| s.to_string()));
    }
    c
}

/// `<X_B>` against phi for every N.
pub fn fringe(config: &SweepConfig) -> Result<Table> {
    let mut table = Table::new(&columns(
        &["N", "phi", "raw_mean", "normalized_mean"],
        &["oracle_mean", "oracle_normalized_mean", "deviation"],
        config.with_oracle,
    ));
    let mut dev = Deviations::new();
    for &n in &config.n_grid {
        let norm = n.sqrt();
        let evaluator = if config.with_oracle {
            let e = PhaseScanEvaluator::new(n, 2, config.loss, oracle_options(config))?;
            dev.cutoff(n, &e);
            Some(e)
        } else {
            None
        };
        for &phi in &config.phi_grid {
            let raw = analytic_mean(n, config.theta, phi, &config.loss)?;
            let mut row: Vec<Cell> = vec![n.into(), phi.into(), raw.into(), (raw / norm).into()];
            if let Some(e) = &evaluator {
                let oracle = e.slice(phi).moments(config.theta).mean;
                row.push(oracle.into());
                row.push((oracle / norm).into());
                row.push(dev.record((raw / norm - oracle / norm).abs()).into());
            }
            table.push(row);
        }
    }
    dev.finish(&mut table, config.with_oracle);
    Ok(table)
}

/// Fringe visibility over the phi range for every N.
pub fn visibility(config: &SweepConfig) -> Result<Table> {
    let domain = domain(config)?;
    let mut table = Table::new(&columns(
        &["N", "visibility", "max_mean", "min_mean"],
        &["oracle_visibility", "deviation"],
        config.with_oracle,
    ));
    let mut dev = Deviations::new();
    for &n in &config.n_grid {
        let extrema = fringe_extrema(
            |phi| analytic_mean(n, config.theta, phi, &config.loss),
            domain,
        )?;
        let v = contrast(&extrema);
        let mut row: Vec<Cell> = vec![n.into(), v.into(), extrema.max.into(), extrema.min.into()];
        if config.with_oracle {
            let e = PhaseScanEvaluator::new(n, 2, config.loss, oracle_options(config))?;
            dev.cutoff(n, &e);
            let oracle = contrast(&fringe_extrema(
                |phi| Ok(e.slice(phi).moments(config.theta).mean),
                domain,
            )?);
            row.push(oracle.into());
            row.push(dev.record((v - oracle).abs()).into());
        }
        table.push(row);
    }
    dev.finish(&mut table, config.with_oracle);
    Ok(table)
}

/// Optimal homodyne sensitivity with the Heisenberg limit and the quantum
/// Cramer-Rao bound as reference curves.
pub fn sensitivity(config: &SweepConfig) -> Result<Table> {
    let schedule = SearchSchedule::default();
    let mut table = Table::new(&columns(
        &[
            "N",
            "delta_phi",
            "phi_star",
            "theta_star",
            "heisenberg_limit",
            "qcrb",
        ],
        &[
            "oracle_delta_phi",
            "oracle_phi_star",
            "oracle_theta_star",
            "deviation",
        ],
        config.with_oracle,
    ));
    let mut dev = Deviations::new();
    for &n in &config.n_grid {
        let a = find_optimum_with(n, MomentsSource::Analytic, config.loss, &schedule)?;
        let mut row: Vec<Cell> = vec![
            n.into(),
            a.delta_phi.into(),
            a.phi_star.into(),
            a.theta_star.into(),
            heisenberg_limit(n)?.into(),
            qcrb(n)?.into(),
        ];
        if config.with_oracle {
            let e = PhaseScanEvaluator::new(n, 2, config.loss, oracle_options(config))?;
            dev.cutoff(n, &e);
            let o = nlphase::estimation::optimize(&e, &schedule)?;
            row.extend([o.delta_phi.into(), o.phi.into(), o.theta.into()]);
            row.push(
                dev.record((a.delta_phi - o.delta_phi).abs() / a.delta_phi)
                    .into(),
            );
        }
        table.push(row);
    }
    dev.finish(&mut table, config.with_oracle);
    Ok(table)
}

/// Fraction of the quantum Fisher information captured by homodyne detection.
pub fn fisher_ratio(config: &SweepConfig) -> Result<Table> {
    let schedule = SearchSchedule::default();
    let mut table = Table::new(&columns(
        &["N", "fisher_ratio", "delta_phi", "qfi", "qcrb"],
        &["oracle_fisher_ratio", "oracle_delta_phi", "deviation"],
        config.with_oracle,
    ));
    let mut dev = Deviations::new();
    for &n in &config.n_grid {
        let delta_phi = if config.loss.is_transparent() {
            nlphase::estimation::optimal_sensitivity(n)?
        } else {
            find_optimum_with(n, MomentsSource::Analytic, config.loss, &schedule)?.delta_phi
        };
        let ratio = fisher_ratio_for(n, delta_phi)?;
        let mut row: Vec<Cell> = vec![
            n.into(),
            ratio.into(),
            delta_phi.into(),
            qfi_closed_form(n).into(),
            qcrb(n)?.into(),
        ];
        if config.with_oracle {
            let e = PhaseScanEvaluator::new(n, 2, config.loss, oracle_options(config))?;
            dev.cutoff(n, &e);
            let o = nlphase::estimation::optimize(&e, &schedule)?;
            let oracle_ratio = fisher_ratio_for(n, o.delta_phi)?;
            row.extend([oracle_ratio.into(), o.delta_phi.into()]);
            row.push(dev.record((ratio - oracle_ratio).abs()).into());
        }
        table.push(row);
    }
    dev.finish(&mut table, config.with_oracle);
    Ok(table)
}

/// Loss ratio at which the oracle sensitivity with loss before the phase,
/// at the lossless operating point, reaches the Heisenberg limit.
fn oracle_loss_bound(n: f64, options: OracleOptions) -> Result<f64> {
    let limit = heisenberg_limit(n)?;
    let theta = std::f64::consts::FRAC_PI_2;
    let excess = |t: f64| -> Result<f64> {
        let e =
            PhaseScanEvaluator::new(n, 2, LossSpec::new(t, LossPlacement::BeforePhase)?, options)?;
        let slice = SensitivityModel::slice(&e, 0.0)?;
        Ok(slice.sensitivity(theta)? - limit)
    };
    if excess(1.0)? > 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 || excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(1.0 - 0.5 * (lo + hi))
}

/// Allowable maximum loss `1 - N^{-1/3}`.
pub fn loss_bound(config: &SweepConfig) -> Result<Table> {
    let mut table = Table::new(&columns(
        &["N", "allowable_max_loss", "heisenberg_limit"],
        &["oracle_allowable_max_loss", "deviation"],
        config.with_oracle,
    ));
    let mut max_dev = 0.0f64;
    for &n in &config.n_grid {
        let bound = allowable_max_loss(n)?;
        let mut row: Vec<Cell> = vec![n.into(), bound.into(), heisenberg_limit(n)?.into()];
        if config.with_oracle {
            let oracle = oracle_loss_bound(n, oracle_options(config))?;
            let d = (bound - oracle).abs();
            max_dev = max_dev.max(d);
            row.extend([oracle.into(), d.into()]);
        }
        table.push(row);
    }
    if config.with_oracle {
        table.meta("max_deviation", max_dev);
    }
    Ok(table)
}
