//! Mixing-rate experiments, DSH norms, and the recurrence corollary.
//!
//! The decay target is
//! `|<mu(f_0), (f_{n-1} o ... o f_0)^* phi psi> - <mu(f_n), phi><mu(f_0), psi>|
//!  <= C d^{-n} (1 + ||g_n||)^2 ||phi||_inf ||psi||_DSH`,
//! with `||g_n||` the sup of the shifted-orbit potential. The unknown
//! constant is fitted, never asserted; only the `d^{-n}` shape and the
//! dominance of the fitted curve are checked downstream.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::DriverSystem;
use crate::error::{CoreError, Result};
use crate::grid::{BinnedMass, GridSpec, GridValues, CHARTS};
use crate::map::RationalMapP1;
use crate::measure::{measure_by_preimages, GreenMeasure};
use crate::observable::Observable;
use crate::point::PointP1;
use crate::potential::green_series;
use crate::stats;

/// `||psi||_DSH ~= ||psi||_L1 + 2c`, where `c` is the smallest constant
/// with `dd^c psi >= -c omega` on the grid: the canonical decomposition
/// `dd^c psi = (dd^c psi + c omega) - c omega` has two positive closed
/// parts of mass `c` each. An upper-bound surrogate for `inf ||T^+-||`.
pub fn estimate_dsh_norm(psi: &Observable, grid: &GridSpec) -> Result<f64> {
    let nps = grid.nodes_per_side();
    // A grid observable sampled on this very grid is read off directly;
    // interpolating it back at off-disk nodes would put kinks under the
    // discrete Laplacian.
    let vals = match psi {
        Observable::Grid(g)
            if g.grid().resolution() == grid.resolution()
                && g.grid().extent() == grid.extent() =>
        {
            g.values().clone()
        }
        _ => {
            let mut vals = GridValues::zeros(grid);
            for chart in CHARTS {
                let field = vals.get_mut(chart);
                for i in 0..nps {
                    for j in 0..nps {
                        field[grid.flat(i, j)] = psi.eval(&grid.node_point(chart, i, j));
                    }
                }
            }
            vals
        }
    };
    for chart in CHARTS {
        if vals.get(chart).iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFiniteObservable);
        }
    }

    let weights = grid.fs_weights();
    let mut l1 = 0.0;
    for chart in CHARTS {
        for (w, v) in weights.get(chart).iter().zip(vals.get(chart).iter()) {
            l1 += w * v.abs();
        }
    }

    let fs = grid.fs_local_potential();
    let mut c_max = 0.0f64;
    for chart in CHARTS {
        let field = vals.get(chart);
        for i in 1..nps - 1 {
            for j in 1..nps - 1 {
                if grid.node_in_region(chart, i, j) {
                    let lap_psi = grid.laplacian_mass(field, i, j);
                    let lap_fs = grid.laplacian_mass(&fs, i, j);
                    if lap_fs > 0.0 {
                        c_max = c_max.max(-lap_psi / lap_fs);
                    }
                }
            }
        }
    }
    Ok(l1 + 2.0 * c_max)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PairingReport {
    /// Monte-Carlo `<mu, psi>`.
    pub pairing: f64,
    pub dsh_norm: f64,
    pub g_sup: f64,
    /// `|<mu, psi>| / ((1 + g_sup) ||psi||_DSH)`.
    pub ratio: f64,
}

/// Pairs the measure against a DSH observable and reports the ratio tested
/// by the norm-equivalence inequality `|<mu, psi>| <= C (1+||g||) ||psi||`.
pub fn check_pairing_bounds(
    mu: &GreenMeasure,
    g_sup: f64,
    psi: &Observable,
    grid: &GridSpec,
) -> Result<PairingReport> {
    let dsh_norm = estimate_dsh_norm(psi, grid)?;
    let pairing = mu.pair(|p| psi.eval(p));
    let denom = (1.0 + g_sup) * dsh_norm;
    Ok(PairingReport {
        pairing,
        dsh_norm,
        g_sup,
        ratio: if denom > 0.0 {
            pairing.abs() / denom
        } else {
            f64::INFINITY
        },
    })
}

#[derive(Debug, Clone)]
pub struct MixingOptions {
    /// Depth of the preimage sampler used for every `mu(f_n)`.
    pub sampler_depth: usize,
    pub root: PointP1,
    /// Grid for the DSH estimate and the shifted-potential sups.
    pub grid: GridSpec,
    pub p_hat: f64,
    pub bootstrap_replicates: usize,
    /// Run even when the driver fails the compliance diagnostics; the
    /// report is then stamped as hypothesis-violated.
    pub force: bool,
}

impl MixingOptions {
    pub fn new(grid: GridSpec) -> Self {
        Self {
            sampler_depth: 20,
            root: PointP1::from_affine(num_complex::Complex64::new(1.1, 0.7)),
            grid,
            p_hat: 1.0,
            bootstrap_replicates: 200,
            force: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MixingDepthRow {
    pub depth: usize,
    /// `|<mu(f_0), (F_{n-1})^* phi psi> - <mu(f_n), phi><mu(f_0), psi>|`.
    pub correlation: f64,
    pub err_low: f64,
    pub err_high: f64,
    pub std_error: f64,
    /// Sup of the shifted-orbit potential `g_n`.
    pub g_sup: f64,
    /// `d^{-n} (1 + g_sup)^2 ||phi||_inf ||psi||_DSH` (reference C = 1).
    pub paper_bound_shape: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixingReport {
    pub rows: Vec<MixingDepthRow>,
    /// Slope of `log correlation` against `n` over depths above the noise
    /// floor; only reported when at least 4 depths qualify.
    pub fitted_rate: Option<f64>,
    /// Largest observed `correlation / shape` over depths above the noise
    /// floor.
    pub fitted_constant: f64,
    pub phi_sup: f64,
    pub psi_dsh: f64,
    pub hypothesis_violated: bool,
}

struct CorrEstimate {
    correlation: f64,
    err_low: f64,
    err_high: f64,
    std_error: f64,
    mu_n_binned: BinnedMass,
}

fn batch_means(vals: &[f64], batch: usize) -> Vec<f64> {
    vals.chunks_exact(batch)
        .map(|c| c.iter().sum::<f64>() / batch as f64)
        .collect()
}

/// Correlation estimates at each requested depth, reusing one
/// forward-transported `mu(f_0)` cloud. `mu(f_n)` is sampled afresh on the
/// shifted orbit rather than pushed forward, to keep sampler noise flat
/// across depths.
#[allow(clippy::too_many_arguments)]
fn correlations_along_depths(
    orbit: &[RationalMapP1],
    depths: &[usize],
    phi: &Observable,
    psi: &Observable,
    m: usize,
    options: &MixingOptions,
    seed: u64,
) -> Result<Vec<(usize, CorrEstimate)>> {
    let sd = options.sampler_depth;
    let mu0 = measure_by_preimages(&orbit[..=sd], sd, &options.root, m, seed)?;
    let psi_vals: Vec<f64> = mu0.sample_cloud.iter().map(|p| psi.eval(p)).collect();
    let mean_psi = stats::mean(&psi_vals);

    let batch = (m / 512).max(1);
    let psi_batches = batch_means(&psi_vals, batch);

    let mut out = Vec::with_capacity(depths.len());
    let mut current = mu0.sample_cloud.clone();
    let mut pushed = 0usize;
    for &n in depths {
        while pushed < n {
            let f = &orbit[pushed];
            let moved: Result<Vec<PointP1>> = current
                .par_iter()
                .with_min_len(256)
                .map(|p| f.evaluate(p))
                .collect();
            current = moved?;
            pushed += 1;
        }
        let a_vals: Vec<f64> = current
            .iter()
            .zip(psi_vals.iter())
            .map(|(p, psi_v)| phi.eval(p) * psi_v)
            .collect();
        let mu_n = measure_by_preimages(
            &orbit[n..=n + sd],
            sd,
            &options.root,
            m,
            stats::splitmix64(seed ^ (n as u64).wrapping_mul(0x9e37)),
        )?;
        let b_vals: Vec<f64> = mu_n.sample_cloud.iter().map(|p| phi.eval(p)).collect();

        let mean_a = stats::mean(&a_vals);
        let mean_b = stats::mean(&b_vals);
        let correlation = (mean_a - mean_b * mean_psi).abs();

        // Bootstrap over batch means; a- and psi-batches share indices
        // (they come from the same sample paths), b-batches are
        // independent.
        let a_batches = batch_means(&a_vals, batch);
        let b_batches = batch_means(&b_vals, batch);
        let mut rng = stats::task_rng(seed ^ 0xb5, n as u64);
        let k = a_batches.len();
        let replicates: Vec<f64> = (0..options.bootstrap_replicates)
            .map(|_| {
                let (mut sa, mut sp, mut sb) = (0.0, 0.0, 0.0);
                for _ in 0..k {
                    let i = rng.gen_range(0..k);
                    sa += a_batches[i];
                    sp += psi_batches[i];
                    let j = rng.gen_range(0..k);
                    sb += b_batches[j];
                }
                let kf = k as f64;
                (sa / kf - (sb / kf) * (sp / kf)).abs()
            })
            .collect();
        let std_error = {
            let mr = stats::mean(&replicates);
            (replicates.iter().map(|r| (r - mr) * (r - mr)).sum::<f64>()
                / (replicates.len().max(2) - 1) as f64)
                .sqrt()
        };
        let (err_low, err_high) = stats::percentile_interval_95(replicates);
        out.push((
            n,
            CorrEstimate {
                correlation,
                err_low,
                err_high,
                std_error,
                mu_n_binned: mu_n.binned,
            },
        ));
    }
    Ok(out)
}

/// Runs the correlation-decay experiment along the driver orbit.
#[allow(clippy::too_many_arguments)]
pub fn mixing_experiment(
    driver: &DriverSystem,
    f0_param: f64,
    phi: &Observable,
    psi: &Observable,
    depths: &[usize],
    m: usize,
    seed: u64,
    options: &MixingOptions,
) -> Result<MixingReport> {
    let mut depths: Vec<usize> = depths.to_vec();
    depths.sort_unstable();
    depths.dedup();
    if depths.is_empty() || depths[0] < 1 {
        return Err(CoreError::InvalidInput(
            "mixing depths must be >= 1".into(),
        ));
    }

    let compliance = driver.compliance(f0_param, 64, options.p_hat)?;
    if !compliance.compliant && !options.force {
        return Err(CoreError::NonCompliantDriver(
            compliance.reasons.join("; "),
        ));
    }

    let max_depth = *depths.last().unwrap();
    let orbit = driver.orbit(f0_param, max_depth + options.sampler_depth + 1)?;
    let estimates = correlations_along_depths(&orbit, &depths, phi, psi, m, options, seed)?;

    let phi_sup = phi.sup_bound();
    let psi_dsh = estimate_dsh_norm(psi, &options.grid)?;
    let d = driver.degree() as f64;

    let mut rows = Vec::with_capacity(estimates.len());
    for (n, est) in estimates {
        let shifted = green_series(
            &orbit[n..],
            options.sampler_depth,
            &options.grid,
            options.p_hat,
        )?;
        let g_sup = shifted.sup_abs();
        let shape = d.powi(-(n as i32)) * (1.0 + g_sup).powi(2) * phi_sup * psi_dsh;
        rows.push(MixingDepthRow {
            depth: n,
            correlation: est.correlation,
            err_low: est.err_low,
            err_high: est.err_high,
            std_error: est.std_error,
            g_sup,
            paper_bound_shape: shape,
        });
    }

    let above_noise: Vec<&MixingDepthRow> = rows
        .iter()
        .filter(|r| r.correlation > 3.0 * r.std_error && r.correlation > 0.0)
        .collect();
    let fitted_constant = if above_noise.is_empty() {
        rows.iter()
            .map(|r| r.correlation / r.paper_bound_shape)
            .fold(0.0f64, f64::max)
    } else {
        above_noise
            .iter()
            .map(|r| r.correlation / r.paper_bound_shape)
            .fold(0.0f64, f64::max)
    };
    let fitted_rate = if above_noise.len() >= 4 {
        let xs: Vec<f64> = above_noise.iter().map(|r| r.depth as f64).collect();
        let ys: Vec<f64> = above_noise.iter().map(|r| r.correlation.ln()).collect();
        Some(stats::linear_fit(&xs, &ys).0)
    } else {
        None
    };

    Ok(MixingReport {
        rows,
        fitted_rate,
        fitted_constant,
        phi_sup,
        psi_dsh,
        hypothesis_violated: !compliance.compliant,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RecurrenceRow {
    pub alpha: usize,
    pub correlation: f64,
    pub std_error: f64,
    /// `tv_binned(mu(f_alpha), mu(f_0))`.
    pub tv_binned: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecurrenceTable {
    pub recurrence_times: Vec<usize>,
    pub rows: Vec<RecurrenceRow>,
}

/// Correlations along the recurrence times `alpha(n)` of the driver,
/// together with the measure distance `tv(mu(f_alpha), mu(f_0))`; both
/// columns decay when the recurrence corollary applies.
#[allow(clippy::too_many_arguments)]
pub fn recurrence_experiment(
    driver: &DriverSystem,
    f0_param: f64,
    phi: &Observable,
    psi: &Observable,
    horizon: usize,
    radius: f64,
    m: usize,
    seed: u64,
    options: &MixingOptions,
) -> Result<RecurrenceTable> {
    let times = driver.recurrence_times(f0_param, horizon, radius)?;
    if times.is_empty() {
        return Err(CoreError::NoRecurrence { horizon, radius });
    }
    let max_time = *times.last().unwrap();
    let orbit = driver.orbit(f0_param, max_time + options.sampler_depth + 1)?;
    let sd = options.sampler_depth;
    let mu0 = measure_by_preimages(&orbit[..=sd], sd, &options.root, m, seed ^ 0x5eed)?;
    let estimates = correlations_along_depths(&orbit, &times, phi, psi, m, options, seed)?;
    let rows = estimates
        .into_iter()
        .map(|(alpha, est)| RecurrenceRow {
            alpha,
            correlation: est.correlation,
            std_error: est.std_error,
            tv_binned: est.mu_n_binned.tv(&mu0.binned),
        })
        .collect();
    Ok(RecurrenceTable {
        recurrence_times: times,
        rows,
    })
}
