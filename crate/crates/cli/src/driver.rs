//! Resolves an invocation (target, flags, overrides) into an executable
//! plan, applying the precedence flags > file > defaults.

use std::path::{Path, PathBuf};

use crate::config::{apply_override, config_from_table, table_from_file, RunConfig};
use crate::error::{AppError, Result};
use crate::presets::{build_preset, is_preset_target, PostProcess, PresetMember, PresetPlan, PRESET_NAMES};

/// Environment variable consulted for the worker count when the flag is
/// absent.
pub const WORKERS_ENV: &str = "SIMULATE_WORKERS";

/// A parsed command line, decoupled from the argument parser.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    /// Preset name (optionally `:full`) or config file path.
    pub target: String,
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
    pub out: Option<PathBuf>,
    /// `section.key=value` adjustments applied to every run member.
    pub overrides: Vec<String>,
}

/// Worker count: the flag wins; the environment variable is honored only
/// when the flag is absent; `None` leaves the default (all cores).
pub fn resolve_workers(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(AppError::Config("--workers must be at least 1".to_string()));
        }
        return Ok(Some(n));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(raw) => {
            let n: usize = raw.trim().parse().map_err(|_| {
                AppError::Config(format!("{WORKERS_ENV}='{raw}' is not a worker count"))
            })?;
            if n == 0 {
                return Err(AppError::Config(format!("{WORKERS_ENV} must be at least 1")));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

/// Applies overrides and dedicated flags to one member config.
fn finalize_member(member: &mut PresetMember, invocation: &Invocation) -> Result<()> {
    let mut table = member.config.to_table()?;
    for spec in &invocation.overrides {
        apply_override(&mut table, spec)?;
    }
    let mut config: RunConfig = config_from_table(table)?;
    if let Some(seed) = invocation.seed {
        config.ensemble.master_seed = seed;
    }
    if let Some(realizations) = invocation.realizations {
        config.ensemble.realizations = realizations;
    }
    if let Some(out) = &invocation.out {
        config.output.directory = out.display().to_string();
    }
    member.config = config;
    Ok(())
}

/// Expands the target into labeled members and applies the invocation's
/// adjustments. The plan is not yet validated; [`crate::runner::execute`]
/// validates and runs it.
pub fn build_plan(invocation: &Invocation) -> Result<PresetPlan> {
    let target = invocation.target.as_str();
    let mut plan = if is_preset_target(target) {
        build_preset(target)?
    } else {
        let path = Path::new(target);
        if !path.exists() {
            return Err(AppError::Config(format!(
                "'{target}' is neither a preset nor an existing config file; presets: {}",
                PRESET_NAMES.join(", ")
            )));
        }
        let config = config_from_table(table_from_file(path)?)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".to_string());
        PresetPlan {
            name: label.clone(),
            members: vec![PresetMember { label, config }],
            post: PostProcess::None,
        }
    };
    for member in &mut plan.members {
        finalize_member(member, invocation)?;
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_outrank_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        let mut file = std::fs::File::create(&path).unwrap();
        writeln!(
            file,
            "[ensemble]\nrealizations = 3\nmaster_seed = 7\n[output]\ndirectory = \"from-file\""
        )
        .unwrap();
        drop(file);

        let invocation = Invocation {
            target: path.display().to_string(),
            seed: Some(99),
            realizations: Some(5),
            out: Some(PathBuf::from("from-flag")),
            overrides: vec!["ensemble.master_seed=13".to_string()],
        };
        let plan = build_plan(&invocation).unwrap();
        let config = &plan.members[0].config;
        // The override bumped the file's 7 to 13; the flag still wins.
        assert_eq!(config.ensemble.master_seed, 99);
        assert_eq!(config.ensemble.realizations, 5);
        assert_eq!(config.output.directory, "from-flag");
    }

    #[test]
    fn overrides_outrank_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[coupling]\nrabi_splitting_ev = 0.1\n").unwrap();
        let invocation = Invocation {
            target: path.display().to_string(),
            overrides: vec!["coupling.rabi_splitting_ev=0.25".to_string()],
            ..Invocation::default()
        };
        let plan = build_plan(&invocation).unwrap();
        assert_eq!(plan.members[0].config.coupling.rabi_splitting_ev, 0.25);
    }

    #[test]
    fn preset_overrides_touch_every_member() {
        let invocation = Invocation {
            target: "cutoff-sweep".to_string(),
            overrides: vec!["time.t_end_fs=100.0".to_string()],
            ..Invocation::default()
        };
        let plan = build_plan(&invocation).unwrap();
        assert!(plan.members.len() > 2);
        for member in &plan.members {
            assert_eq!(member.config.time.t_end_fs, 100.0);
        }
    }

    #[test]
    fn missing_target_is_a_config_error() {
        let invocation =
            Invocation { target: "no-such-thing".to_string(), ..Invocation::default() };
        let err = build_plan(&invocation).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("det-trajectories"));
    }

    #[test]
    fn workers_flag_validates() {
        assert_eq!(resolve_workers(Some(3)).unwrap(), Some(3));
        assert!(resolve_workers(Some(0)).is_err());
    }
}
