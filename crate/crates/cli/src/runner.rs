//! Executes a plan: validates members, enforces the resource guard, runs
//! each ensemble, writes data files, post-processes sweeps, and certifies
//! the output directory with a manifest.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use polariton_core::ensemble::{compare_to_reference, run_ensemble, EnsembleResult, FailedRealization};
use polariton_core::io::{
    atomic_write, write_ensemble_csv, write_mode_weights_json, write_snapshots_csv,
    write_tails_csv,
};
use polariton_core::modes::build_mode_set;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::manifest::{checksum_file, write_failed_marker, write_manifest, MemberManifest, RunManifest};
use crate::presets::{PostProcess, PresetMember, PresetPlan};

pub const ERRORS_FILE: &str = "errors.json";
pub const COMPARISON_FILE: &str = "comparison.json";

/// Per-member scalar results, written alongside the data files. Contains no
/// timing so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub label: String,
    pub master_seed: u64,
    pub requested_realizations: usize,
    pub completed_realizations: usize,
    pub single_realization: bool,
    pub failed_realizations: Vec<FailedRealization>,
    /// Time-averaged photon content, ensemble mean and deviation.
    pub photon_content_mean: f64,
    pub photon_content_std: f64,
    pub realized_cutoff_ev: f64,
    pub n_modes: usize,
    pub dimension: usize,
}

/// One row of the truncation-error post-processing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationErrorRow {
    pub member: String,
    pub reference: String,
    pub n_modes: usize,
    pub realized_cutoff_ev: f64,
    /// Time-averaged relative width deviation from the reference.
    pub error: f64,
    /// Propagated from twice the ensemble standard deviations.
    pub uncertainty: f64,
}

/// One row of the directionality comparison: right-tail probability beyond
/// the launch point plus one packet width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailComparisonRow {
    pub time_fs: f64,
    pub baseline_mean: f64,
    pub baseline_std: f64,
    pub variant_mean: f64,
    pub variant_std: f64,
    /// variant / baseline; absent when the baseline tail is empty.
    pub ratio: Option<f64>,
}

/// A completed member with its in-memory result, kept for post-processing.
pub struct MemberOutcome {
    pub label: String,
    pub n_modes: usize,
    pub result: EnsembleResult,
    pub manifest: MemberManifest,
}

fn write_json_file<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| AppError::Io(e.to_string()))?;
    bytes.push(b'\n');
    atomic_write(path, &bytes).map_err(AppError::from)
}

/// Validates every member up front, collecting violations across the whole
/// plan so a bad sweep fails once with the full list.
pub fn validate_plan(plan: &PresetPlan) -> Result<()> {
    let mut all = Vec::new();
    for member in &plan.members {
        for violation in member.config.violations() {
            all.push(format!("[{}] {violation}", member.label));
        }
    }
    if all.is_empty() {
        Ok(())
    } else {
        Err(AppError::Config(format!(
            "{} violation(s):\n  - {}",
            all.len(),
            all.join("\n  - ")
        )))
    }
}

/// Refuses members whose Hamiltonian exceeds the configured dimension
/// before any work or output happens.
pub fn enforce_resource_guard(plan: &PresetPlan) -> Result<()> {
    for member in &plan.members {
        let config = &member.config;
        let modes =
            build_mode_set(&config.wire(), config.truncation(), config.modes.directionality)
                .map_err(AppError::from)?;
        let dim = config.wire.n_molecules + modes.len();
        let max = config.limits.max_dimension;
        if dim > max {
            // Matrix, eigenvector copy, and solver workspaces together cost
            // about 64 bytes per matrix entry.
            let gib = 64.0 * (dim as f64) * (dim as f64) / f64::from(1u32 << 30);
            return Err(AppError::Resource(format!(
                "member '{}' needs a {dim} x {dim} Hermitian matrix (roughly {gib:.1} GiB \
                 with eigenvectors and solver workspace); the configured limit is \
                 limits.max_dimension = {max}. Reduce wire.n_molecules or the retained \
                 mode count, or raise limits.max_dimension if this size is intended.",
                member.label
            )));
        }
    }
    Ok(())
}

fn run_member(
    member: &PresetMember,
    out_root: &Path,
    files_written: &mut Vec<String>,
) -> Result<MemberOutcome> {
    let config = &member.config;
    let sim = config.to_simulation();
    let modes = build_mode_set(&sim.wire, sim.truncation, sim.directionality)?;
    let dimension = sim.wire.n_molecules + modes.len();

    let started = Instant::now();
    let result = run_ensemble(&sim, config.ensemble.realizations, config.ensemble.master_seed)?;
    let wall_time_s = started.elapsed().as_secs_f64();

    let member_dir = out_root.join(&member.label);
    std::fs::create_dir_all(&member_dir)?;
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    let mut record = |name: &str, path: &Path, files: &mut BTreeMap<String, String>| -> Result<()> {
        let relpath = format!("{}/{name}", member.label);
        files.insert(relpath.clone(), checksum_file(path)?);
        files_written.push(relpath);
        Ok(())
    };

    let csv_path = member_dir.join("ensemble.csv");
    write_ensemble_csv(&result, &csv_path)?;
    record("ensemble.csv", &csv_path, &mut files)?;

    if let (Some(mean), Some(std)) = (&result.weight_mean, &result.weight_std) {
        let path = member_dir.join("weights.json");
        write_mode_weights_json(&modes, mean, std, &path)?;
        record("weights.json", &path, &mut files)?;
    }
    if let (Some(mean), Some(std)) = (&result.infinite_weight_mean, &result.infinite_weight_std) {
        let path = member_dir.join("weights_infinite.json");
        write_mode_weights_json(&modes, mean, std, &path)?;
        record("weights_infinite.json", &path, &mut files)?;
    }
    if !result.snapshots.is_empty() {
        let snap_path = member_dir.join("snapshots.csv");
        write_snapshots_csv(&result.snapshots, &snap_path)?;
        record("snapshots.csv", &snap_path, &mut files)?;
        let tails_path = member_dir.join("tails.csv");
        write_tails_csv(&result.snapshots, &tails_path)?;
        record("tails.csv", &tails_path, &mut files)?;
    }

    let summary = MemberSummary {
        label: member.label.clone(),
        master_seed: config.ensemble.master_seed,
        requested_realizations: config.ensemble.realizations,
        completed_realizations: result.n_realizations,
        single_realization: result.single_realization,
        failed_realizations: result.failed_realizations.clone(),
        photon_content_mean: result.photon_content_mean,
        photon_content_std: result.photon_content_std,
        realized_cutoff_ev: modes.realized_cutoff(),
        n_modes: modes.len(),
        dimension,
    };
    let summary_path = member_dir.join("summary.json");
    write_json_file(&summary, &summary_path)?;
    record("summary.json", &summary_path, &mut files)?;

    let config_toml = config.canonical_toml()?;
    let config_hash = crate::config::sha256_hex(config_toml.as_bytes());
    Ok(MemberOutcome {
        label: member.label.clone(),
        n_modes: modes.len(),
        result,
        manifest: MemberManifest {
            label: member.label.clone(),
            config_toml,
            config_hash,
            realized_cutoff_ev: modes.realized_cutoff(),
            dimension,
            wall_time_s,
            files,
        },
    })
}

fn post_process(
    plan: &PresetPlan,
    outcomes: &[MemberOutcome],
    out_root: &Path,
    files_written: &mut Vec<String>,
) -> Result<BTreeMap<String, String>> {
    let mut aggregate_files = BTreeMap::new();
    let find = |label: &str| -> Result<&MemberOutcome> {
        outcomes.iter().find(|o| o.label == label).ok_or_else(|| {
            AppError::Config(format!("post-processing references unknown member '{label}'"))
        })
    };
    match &plan.post {
        PostProcess::None => {}
        PostProcess::TruncationErrors { comparisons } => {
            let mut rows = Vec::with_capacity(comparisons.len());
            for (member_label, reference_label) in comparisons {
                let member = find(member_label)?;
                let reference = find(reference_label)?;
                let (error, uncertainty) =
                    compare_to_reference(&member.result, &reference.result)?;
                rows.push(TruncationErrorRow {
                    member: member_label.clone(),
                    reference: reference_label.clone(),
                    n_modes: member.n_modes,
                    realized_cutoff_ev: member.manifest.realized_cutoff_ev,
                    error,
                    uncertainty,
                });
            }
            let path = out_root.join(ERRORS_FILE);
            write_json_file(&rows, &path)?;
            aggregate_files.insert(ERRORS_FILE.to_string(), checksum_file(&path)?);
            files_written.push(ERRORS_FILE.to_string());
        }
        PostProcess::TailComparison { baseline, variant } => {
            let baseline = find(baseline)?;
            let variant = find(variant)?;
            if baseline.result.snapshots.len() != variant.result.snapshots.len() {
                return Err(AppError::Config(
                    "directionality variants disagree on snapshot times".to_string(),
                ));
            }
            let rows: Vec<TailComparisonRow> = baseline
                .result
                .snapshots
                .iter()
                .zip(&variant.result.snapshots)
                .map(|(b, v)| TailComparisonRow {
                    time_fs: b.time,
                    baseline_mean: b.right_tail_mean,
                    baseline_std: b.right_tail_std,
                    variant_mean: v.right_tail_mean,
                    variant_std: v.right_tail_std,
                    ratio: (b.right_tail_mean > 0.0)
                        .then(|| v.right_tail_mean / b.right_tail_mean),
                })
                .collect();
            let path = out_root.join(COMPARISON_FILE);
            write_json_file(&rows, &path)?;
            aggregate_files.insert(COMPARISON_FILE.to_string(), checksum_file(&path)?);
            files_written.push(COMPARISON_FILE.to_string());
        }
    }
    Ok(aggregate_files)
}

/// Runs the whole plan. On success the output directory holds every data
/// file plus `manifest.json`; on failure after any file was produced, a
/// `manifest.failed.json` marker is left instead.
pub fn execute(plan: &PresetPlan, out_root: &Path, parallelism: usize) -> Result<RunManifest> {
    validate_plan(plan)?;
    enforce_resource_guard(plan)?;
    std::fs::create_dir_all(out_root)?;

    let started = Instant::now();
    let mut files_written = Vec::new();
    match execute_inner(plan, out_root, parallelism, &mut files_written) {
        Ok(mut manifest) => {
            manifest.wall_time_s = started.elapsed().as_secs_f64();
            write_manifest(&manifest, out_root)?;
            Ok(manifest)
        }
        Err(e) => {
            write_failed_marker(out_root, &e.to_string(), files_written);
            Err(e)
        }
    }
}

fn execute_inner(
    plan: &PresetPlan,
    out_root: &Path,
    parallelism: usize,
    files_written: &mut Vec<String>,
) -> Result<RunManifest> {
    let mut outcomes = Vec::with_capacity(plan.members.len());
    for member in &plan.members {
        let outcome = run_member(member, out_root, files_written)
            .map_err(|e| e.annotate(&format!("member '{}'", member.label)))?;
        println!(
            "  {}: dimension {}, {} realization(s), {:.1} s",
            outcome.label,
            outcome.manifest.dimension,
            outcome.result.n_realizations,
            outcome.manifest.wall_time_s
        );
        outcomes.push(outcome);
    }

    let aggregate_files = post_process(plan, &outcomes, out_root, files_written)?;
    let members = outcomes.into_iter().map(|o| o.manifest).collect();
    let mut manifest = RunManifest::new(parallelism, members);
    manifest.aggregate_files = aggregate_files;
    Ok(manifest)
}
