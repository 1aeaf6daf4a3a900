//! Disorder-ensemble orchestration and order-independent aggregation.
//!
//! Realizations run concurrently; each draws its own seed from the master
//! seed by index, so results are bit-identical for a fixed
//! (config, n_realizations, master_seed) regardless of worker count.
//! Aggregation uses compensated summation and a fixed index order, making it
//! insensitive to completion order and, within 1e-12, to permutations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::derive_seed;
use crate::error::{CoreError, Result};
use crate::observables::{propagate_error_uncertainty, truncation_error};
use crate::simulation::{run_trajectory, SimulationConfig, TrajectoryRecord};

/// Compensated accumulator (Kahan with Neumaier's correction, which also
/// survives cancellation of a large intermediate sum).
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// A realization that failed, recorded and excluded from the statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRealization {
    pub index: usize,
    pub seed: u64,
    pub message: String,
}

/// Per-snapshot-time ensemble statistics of the binned site profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotStats {
    pub time: f64,
    pub bin_size: usize,
    pub bin_mean: Vec<f64>,
    pub bin_std: Vec<f64>,
    pub right_tail_mean: f64,
    pub right_tail_std: f64,
}

/// Ensemble averages and (n-1)-denominator standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub master_seed: u64,
    /// Number of realizations that completed and entered the statistics.
    pub n_realizations: usize,
    /// True when only one realization contributed; stds are reported as 0.
    pub single_realization: bool,
    pub times: Vec<f64>,
    pub d_mean: Vec<f64>,
    pub d_std: Vec<f64>,
    pub pmol_mean: Vec<f64>,
    pub pmol_std: Vec<f64>,
    /// Stats of the max-normalized trajectory-averaged mode weights; absent
    /// when the runs carried no photon weight (zero coupling).
    pub weight_mean: Option<Vec<f64>>,
    pub weight_std: Option<Vec<f64>>,
    /// Stats of the max-normalized infinite-time mode weights.
    pub infinite_weight_mean: Option<Vec<f64>>,
    pub infinite_weight_std: Option<Vec<f64>>,
    pub photon_content_mean: f64,
    pub photon_content_std: f64,
    pub snapshots: Vec<SnapshotStats>,
    pub failed_realizations: Vec<FailedRealization>,
}

fn stats_over_rows(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len();
    let width = rows[0].len();
    let mut mean = vec![0.0f64; width];
    for (j, m) in mean.iter_mut().enumerate() {
        let mut acc = KahanSum::default();
        for row in rows {
            acc.add(row[j]);
        }
        let first = acc.value() / n as f64;
        // Fold the first pass's rounding back in; a degenerate ensemble then
        // gets its exact common value, and exact zero deviations below.
        let mut residual = KahanSum::default();
        for row in rows {
            residual.add(row[j] - first);
        }
        *m = first + residual.value() / n as f64;
    }
    let mut std = vec![0.0f64; width];
    if n > 1 {
        for (j, s) in std.iter_mut().enumerate() {
            let mut acc = KahanSum::default();
            for row in rows {
                let dev = row[j] - mean[j];
                acc.add(dev * dev);
            }
            *s = (acc.value() / (n - 1) as f64).sqrt();
        }
    }
    (mean, std)
}

fn scalar_stats(values: &[f64]) -> (f64, f64) {
    let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
    let (mean, std) = stats_over_rows(&rows);
    (mean[0], std[0])
}

/// Aggregates completed trajectories into ensemble statistics.
///
/// Exposed separately from [`run_ensemble`] so order-invariance can be
/// checked directly: permuting `records` changes results by at most ~1e-12.
pub fn aggregate(
    records: &[TrajectoryRecord],
    master_seed: u64,
    failed_realizations: Vec<FailedRealization>,
) -> Result<EnsembleResult> {
    let n = records.len();
    if n == 0 {
        return Err(CoreError::config("cannot aggregate an empty ensemble"));
    }
    let times = records[0].times.clone();
    for r in records {
        if r.times != times {
            return Err(CoreError::config("realizations disagree on the time grid"));
        }
    }

    let widths: Vec<Vec<f64>> = records.iter().map(|r| r.widths.clone()).collect();
    let populations: Vec<Vec<f64>> =
        records.iter().map(|r| r.molecular_populations.clone()).collect();
    let (d_mean, d_std) = stats_over_rows(&widths);
    let (pmol_mean, pmol_std) = stats_over_rows(&populations);

    let (photon_content_mean, photon_content_std) =
        scalar_stats(&records.iter().map(|r| r.mean_photon_content).collect::<Vec<_>>());

    let weight_rows: Option<Vec<Vec<f64>>> = records
        .iter()
        .map(|r| r.trajectory_weights.as_ref().map(|w| w.weights.to_vec()))
        .collect();
    let (weight_mean, weight_std) = match &weight_rows {
        Some(rows) => {
            let (m, s) = stats_over_rows(rows);
            (Some(m), Some(s))
        }
        None => (None, None),
    };
    let infinite_rows: Option<Vec<Vec<f64>>> = records
        .iter()
        .map(|r| r.infinite_time_weights.as_ref().map(|w| w.weights.to_vec()))
        .collect();
    let (infinite_weight_mean, infinite_weight_std) = match &infinite_rows {
        Some(rows) => {
            let (m, s) = stats_over_rows(rows);
            (Some(m), Some(s))
        }
        None => (None, None),
    };

    let n_snapshots = records[0].snapshots.len();
    let mut snapshots = Vec::with_capacity(n_snapshots);
    for s in 0..n_snapshots {
        let first = &records[0].snapshots[s];
        for r in records {
            let snap = &r.snapshots[s];
            if snap.time != first.time
                || snap.bin_size != first.bin_size
                || snap.bin_populations.len() != first.bin_populations.len()
            {
                return Err(CoreError::config("realizations disagree on snapshot layout"));
            }
        }
        let bins: Vec<Vec<f64>> =
            records.iter().map(|r| r.snapshots[s].bin_populations.clone()).collect();
        let (bin_mean, bin_std) = stats_over_rows(&bins);
        let (right_tail_mean, right_tail_std) = scalar_stats(
            &records.iter().map(|r| r.snapshots[s].right_tail_mass).collect::<Vec<_>>(),
        );
        snapshots.push(SnapshotStats {
            time: first.time,
            bin_size: first.bin_size,
            bin_mean,
            bin_std,
            right_tail_mean,
            right_tail_std,
        });
    }

    Ok(EnsembleResult {
        master_seed,
        n_realizations: n,
        single_realization: n == 1,
        times,
        d_mean,
        d_std,
        pmol_mean,
        pmol_std,
        weight_mean,
        weight_std,
        infinite_weight_mean,
        infinite_weight_std,
        photon_content_mean,
        photon_content_std,
        snapshots,
        failed_realizations,
    })
}

/// Runs `n_realizations` through an arbitrary per-realization runner.
///
/// Realization `i` receives `derive_seed(master_seed, i)`. Failures are
/// recorded with their seed and excluded; more than 10% failures aborts.
pub fn run_ensemble_with<F>(
    n_realizations: usize,
    master_seed: u64,
    runner: F,
) -> Result<EnsembleResult>
where
    F: Fn(u64) -> Result<TrajectoryRecord> + Sync,
{
    if n_realizations == 0 {
        return Err(CoreError::config("n_realizations must be at least 1"));
    }
    let outcomes: Vec<(usize, u64, Result<TrajectoryRecord>)> = (0..n_realizations)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(master_seed, i as u64);
            (i, seed, runner(seed))
        })
        .collect();

    let mut records = Vec::with_capacity(n_realizations);
    let mut failed = Vec::new();
    for (index, seed, outcome) in outcomes {
        match outcome {
            Ok(record) => records.push(record),
            Err(e) => {
                log::warn!("realization {index} (seed {seed}) failed: {e}");
                failed.push(FailedRealization { index, seed, message: e.to_string() });
            }
        }
    }
    let failure_fraction = failed.len() as f64 / n_realizations as f64;
    if failure_fraction > 0.1 {
        return Err(CoreError::numerical(format!(
            "{} of {} realizations failed ({:.0}%), aborting; first failure: {}",
            failed.len(),
            n_realizations,
            failure_fraction * 100.0,
            failed[0].message
        )));
    }
    aggregate(&records, master_seed, failed)
}

/// Runs a disorder ensemble of [`run_trajectory`] realizations.
pub fn run_ensemble(
    config: &SimulationConfig,
    n_realizations: usize,
    master_seed: u64,
) -> Result<EnsembleResult> {
    config.validate()?;
    run_ensemble_with(n_realizations, master_seed, |seed| run_trajectory(config, seed))
}

/// Time-averaged relative deviation of this ensemble's mean width from a
/// reference ensemble, with the uncertainty propagated from twice the
/// ensemble standard deviations.
pub fn compare_to_reference(
    result: &EnsembleResult,
    reference: &EnsembleResult,
) -> Result<(f64, f64)> {
    if result.times != reference.times {
        return Err(CoreError::config("ensembles disagree on the time grid"));
    }
    let two_sigma: Vec<f64> = result.d_std.iter().map(|s| 2.0 * s).collect();
    let two_sigma_ref: Vec<f64> = reference.d_std.iter().map(|s| 2.0 * s).collect();
    let (_, uncertainty) =
        propagate_error_uncertainty(&result.d_mean, &two_sigma, &reference.d_mean, &two_sigma_ref)?;
    let error = truncation_error(&result.d_mean, &reference.d_mean)?;
    Ok((error, uncertainty))
}
