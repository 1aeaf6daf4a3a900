//! Plot-ready data files: CSV time series, JSON mode-weight sidecars.
//!
//! Every file is written through a temp-file-plus-rename so a crash never
//! leaves a truncated artifact in place. Floats are written with 17
//! significant digits and parse back bit-exactly.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::{EnsembleResult, SnapshotStats};
use crate::error::{CoreError, Result};
use crate::modes::CavityModeSet;

/// Header of the ensemble time-series CSV.
pub const ENSEMBLE_CSV_HEADER: [&str; 5] = ["time_fs", "d_mean", "d_std", "pmol_mean", "pmol_std"];

/// Round-trip-safe float formatting (17 significant digits).
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to `path` atomically: the full payload lands in a
/// temporary file in the same directory, then replaces the target.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .ok_or_else(|| CoreError::config(format!("output path {path:?} has no parent directory")))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| CoreError::Io(e.error))?;
    Ok(())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new())
}

fn finish_csv(writer: csv::Writer<Vec<u8>>, path: &Path) -> Result<()> {
    let bytes = writer
        .into_inner()
        .map_err(|e| CoreError::Serialization(format!("flushing CSV failed: {e}")))?;
    atomic_write(path, &bytes)
}

/// Writes the ensemble time series (one row per sample time).
pub fn write_ensemble_csv(result: &EnsembleResult, path: &Path) -> Result<()> {
    let mut writer = csv_writer();
    writer
        .write_record(ENSEMBLE_CSV_HEADER)
        .map_err(|e| CoreError::Serialization(e.to_string()))?;
    for i in 0..result.times.len() {
        writer
            .write_record([
                format_float(result.times[i]),
                format_float(result.d_mean[i]),
                format_float(result.d_std[i]),
                format_float(result.pmol_mean[i]),
                format_float(result.pmol_std[i]),
            ])
            .map_err(|e| CoreError::Serialization(e.to_string()))?;
    }
    finish_csv(writer, path)
}

/// Writes a header-only CSV (the empty-ensemble artifact).
pub fn write_header_only_csv(path: &Path) -> Result<()> {
    let mut writer = csv_writer();
    writer
        .write_record(ENSEMBLE_CSV_HEADER)
        .map_err(|e| CoreError::Serialization(e.to_string()))?;
    finish_csv(writer, path)
}

/// Columns of an ensemble CSV read back from disk.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnsembleCsv {
    pub times: Vec<f64>,
    pub d_mean: Vec<f64>,
    pub d_std: Vec<f64>,
    pub pmol_mean: Vec<f64>,
    pub pmol_std: Vec<f64>,
}

/// Reads a CSV written by [`write_ensemble_csv`].
pub fn read_ensemble_csv(path: &Path) -> Result<EnsembleCsv> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CoreError::Serialization(format!("opening {path:?}: {e}")))?;
    {
        let headers = reader.headers().map_err(|e| CoreError::Serialization(e.to_string()))?;
        if headers.iter().ne(ENSEMBLE_CSV_HEADER) {
            return Err(CoreError::Serialization(format!(
                "unexpected CSV header {headers:?}"
            )));
        }
    }
    let mut out = EnsembleCsv::default();
    for record in reader.records() {
        let record = record.map_err(|e| CoreError::Serialization(e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .ok_or_else(|| CoreError::Serialization(format!("row too short: {record:?}")))?
                .parse::<f64>()
                .map_err(|e| CoreError::Serialization(format!("bad float in {record:?}: {e}")))
        };
        out.times.push(field(0)?);
        out.d_mean.push(field(1)?);
        out.d_std.push(field(2)?);
        out.pmol_mean.push(field(3)?);
        out.pmol_std.push(field(4)?);
    }
    Ok(out)
}

/// One row of the W(q) sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeWeightRow {
    pub m_x: i64,
    pub q: f64,
    #[serde(rename = "energy_eV")]
    pub energy_ev: f64,
    pub weight_mean: f64,
    pub weight_std: f64,
}

/// Writes the per-mode weight distribution as a JSON array of rows.
pub fn write_mode_weights_json(
    modes: &CavityModeSet,
    weight_mean: &[f64],
    weight_std: &[f64],
    path: &Path,
) -> Result<()> {
    if weight_mean.len() != modes.len() || weight_std.len() != modes.len() {
        return Err(CoreError::config(format!(
            "weight arrays ({}, {}) do not match the {} modes",
            weight_mean.len(),
            weight_std.len(),
            modes.len()
        )));
    }
    let rows: Vec<ModeWeightRow> = modes
        .modes
        .iter()
        .zip(weight_mean.iter().zip(weight_std))
        .map(|(mode, (&mean, &std))| ModeWeightRow {
            m_x: mode.m_x,
            q: mode.q,
            energy_ev: mode.energy,
            weight_mean: mean,
            weight_std: std,
        })
        .collect();
    let mut bytes = serde_json::to_vec_pretty(&rows)
        .map_err(|e| CoreError::Serialization(e.to_string()))?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

/// Reads a sidecar written by [`write_mode_weights_json`].
pub fn read_mode_weights_json(path: &Path) -> Result<Vec<ModeWeightRow>> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| CoreError::Serialization(e.to_string()))
}

/// Writes snapshot bin statistics in long format, one row per (time, bin).
pub fn write_snapshots_csv(snapshots: &[SnapshotStats], path: &Path) -> Result<()> {
    let mut writer = csv_writer();
    writer
        .write_record(["time_fs", "bin_index", "first_site", "pop_mean", "pop_std"])
        .map_err(|e| CoreError::Serialization(e.to_string()))?;
    for snap in snapshots {
        for (bin, (&mean, &std)) in snap.bin_mean.iter().zip(&snap.bin_std).enumerate() {
            writer
                .write_record([
                    format_float(snap.time),
                    bin.to_string(),
                    (bin * snap.bin_size).to_string(),
                    format_float(mean),
                    format_float(std),
                ])
                .map_err(|e| CoreError::Serialization(e.to_string()))?;
        }
    }
    finish_csv(writer, path)
}

/// Writes the right-tail probability per snapshot time.
pub fn write_tails_csv(snapshots: &[SnapshotStats], path: &Path) -> Result<()> {
    let mut writer = csv_writer();
    writer
        .write_record(["time_fs", "right_tail_mean", "right_tail_std"])
        .map_err(|e| CoreError::Serialization(e.to_string()))?;
    for snap in snapshots {
        writer
            .write_record([
                format_float(snap.time),
                format_float(snap.right_tail_mean),
                format_float(snap.right_tail_std),
            ])
            .map_err(|e| CoreError::Serialization(e.to_string()))?;
    }
    finish_csv(writer, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderSpec;
    use crate::ensemble::run_ensemble;
    use crate::hamiltonian::CouplingSpec;
    use crate::modes::{build_mode_set, Directionality, ModeTruncation, WireConfig};
    use crate::simulation::{SimulationConfig, SnapshotSpec, TimeGrid};
    use crate::wavepacket::WavepacketSpec;

    fn small_result() -> EnsembleResult {
        let config = SimulationConfig {
            wire: WireConfig {
                n_molecules: 30,
                spacing: 10.0,
                l_y: 200.0,
                l_z: 400.0,
                epsilon: 3.0,
                mean_exciton_energy: 2.0,
            },
            disorder: DisorderSpec { sigma_m: 0.02, sigma_a: 1.0 },
            coupling: CouplingSpec { rabi_splitting: 0.1 },
            wavepacket: WavepacketSpec { sigma_x: 40.0, mean_momentum: 0.0, center: None },
            truncation: ModeTruncation::Count(5),
            directionality: Directionality::Bidirectional,
            time_grid: TimeGrid { t_end: 100.0, dt: 20.0 },
            snapshots: Some(SnapshotSpec { times: vec![50.0, 100.0], bin_size: 10 }),
        };
        run_ensemble(&config, 3, 42).unwrap()
    }

    #[test]
    fn floats_survive_the_round_trip() {
        for x in [
            0.0,
            -0.0,
            1.0 / 3.0,
            0.1 + 0.2,
            6.02214076e23,
            1e-300,
            -123.456789012345678,
            f64::MIN_POSITIVE,
        ] {
            let s = format_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
        }
    }

    #[test]
    fn ensemble_csv_round_trips_bit_exactly() {
        let result = small_result();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");
        write_ensemble_csv(&result, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("time_fs,d_mean,d_std,pmol_mean,pmol_std\n"));
        assert!(!text.contains('\r'));
        assert!(text.ends_with('\n'));
        assert_eq!(text.lines().count(), 1 + result.times.len());

        let back = read_ensemble_csv(&path).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.times), bits(&result.times));
        assert_eq!(bits(&back.d_mean), bits(&result.d_mean));
        assert_eq!(bits(&back.d_std), bits(&result.d_std));
        assert_eq!(bits(&back.pmol_mean), bits(&result.pmol_mean));
        assert_eq!(bits(&back.pmol_std), bits(&result.pmol_std));
    }

    #[test]
    fn header_only_csv_for_empty_runs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_header_only_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "time_fs,d_mean,d_std,pmol_mean,pmol_std\n");
        let back = read_ensemble_csv(&path).unwrap();
        assert!(back.times.is_empty());
    }

    #[test]
    fn mode_weights_json_round_trips_with_exact_keys() {
        let wire = WireConfig {
            n_molecules: 30,
            spacing: 10.0,
            l_y: 200.0,
            l_z: 400.0,
            epsilon: 3.0,
            mean_exciton_energy: 2.0,
        };
        let modes =
            build_mode_set(&wire, ModeTruncation::Count(5), Directionality::Bidirectional).unwrap();
        let mean = vec![0.1, 0.5, 1.0, 0.5, 0.1];
        let std = vec![0.01, 0.02, 0.0, 0.02, 0.01];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.json");
        write_mode_weights_json(&modes, &mean, &std, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        for key in ["\"m_x\"", "\"q\"", "\"energy_eV\"", "\"weight_mean\"", "\"weight_std\""] {
            assert!(text.contains(key), "missing {key}");
        }
        let rows = read_mode_weights_json(&path).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].m_x, -2);
        assert_eq!(rows[2].m_x, 0);
        assert_eq!(rows[2].weight_mean, 1.0);
        assert_eq!(rows[2].energy_ev.to_bits(), modes.modes[2].energy.to_bits());

        let short = vec![1.0];
        assert!(write_mode_weights_json(&modes, &short, &std, &path).is_err());
    }

    #[test]
    fn snapshot_files_have_long_format() {
        let result = small_result();
        let dir = tempfile::tempdir().unwrap();
        let bins = dir.path().join("snapshots.csv");
        let tails = dir.path().join("tails.csv");
        write_snapshots_csv(&result.snapshots, &bins).unwrap();
        write_tails_csv(&result.snapshots, &tails).unwrap();

        let text = std::fs::read_to_string(&bins).unwrap();
        assert!(text.starts_with("time_fs,bin_index,first_site,pop_mean,pop_std\n"));
        assert_eq!(text.lines().count(), 1 + 2 * 3); // 2 times x 3 bins

        let text = std::fs::read_to_string(&tails).unwrap();
        assert!(text.starts_with("time_fs,right_tail_mean,right_tail_std\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_residue() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.txt");
        atomic_write(&path, b"first").unwrap();
        atomic_write(&path, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        let entries: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(entries.len(), 1, "unexpected residue: {entries:?}");
    }
}
