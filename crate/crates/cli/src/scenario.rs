//! Scenario resolution: preset defaults, optional flat key-value override
//! files, then explicit flags, in that precedence order.
//!
//! Override files use `key = value` lines with `#` comments. Keys mirror
//! the scenario fields: `preset`, `theta`, `p_m`, `alpha_grid`,
//! `counts_per_setting`, `seed`, `xi_grid`. Angles accept the `pi` suffix.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use qeraser_core::experiment::{ScenarioPreset, ScenarioSpec};

use crate::angles::{parse_angle, parse_angle_grid};
use crate::output::fmt_float;

/// Applies one `key = value` override to the spec.
fn apply_override(spec: &mut ScenarioSpec<f64>, key: &str, value: &str) -> Result<()> {
    match key {
        "preset" => {
            spec.preset = match value {
                "figure2" => ScenarioPreset::Figure2,
                "figure3" => ScenarioPreset::Figure3,
                "custom" => ScenarioPreset::Custom,
                other => bail!("unknown preset '{other}'"),
            }
        }
        "theta" => spec.theta = parse_angle(value)?,
        "p_m" | "purity" => {
            spec.p_m = value
                .parse()
                .with_context(|| format!("invalid purity '{value}'"))?
        }
        "alpha_grid" => spec.alpha_grid = parse_angle_grid(value)?,
        "counts_per_setting" | "counts" => {
            spec.counts_per_setting = value
                .parse()
                .with_context(|| format!("invalid count '{value}'"))?
        }
        "seed" => {
            spec.seed = value
                .parse()
                .with_context(|| format!("invalid seed '{value}'"))?
        }
        "xi_grid" => spec.xi_grid = parse_angle_grid(value)?,
        other => bail!("unknown scenario key '{other}'"),
    }
    Ok(())
}

/// Reads a flat key-value override file into the spec.
pub fn apply_config_file(spec: &mut ScenarioSpec<f64>, path: &Path) -> Result<()> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').with_context(|| {
            format!("{}:{}: expected 'key = value'", path.display(), lineno + 1)
        })?;
        apply_override(spec, key.trim(), value.trim())
            .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
    }
    Ok(())
}

/// Command-line overrides shared by the scenario commands.
#[derive(Debug, Clone, Default)]
pub struct SpecOverrides {
    pub seed: Option<u64>,
    pub counts: Option<u64>,
    pub theta: Option<f64>,
    pub purity: Option<f64>,
    pub alpha_grid: Option<Vec<f64>>,
}

/// Resolves the final spec: preset defaults, then config file, then flags.
/// Passing `--theta` or `--purity` switches the run to a single custom
/// setup at those parameters.
pub fn resolve_spec(
    mut spec: ScenarioSpec<f64>,
    config: Option<&Path>,
    overrides: &SpecOverrides,
) -> Result<ScenarioSpec<f64>> {
    if let Some(path) = config {
        apply_config_file(&mut spec, path)?;
    }
    if let Some(seed) = overrides.seed {
        spec.seed = seed;
    }
    if let Some(counts) = overrides.counts {
        spec.counts_per_setting = counts;
    }
    if let Some(theta) = overrides.theta {
        spec.theta = theta;
        spec.preset = ScenarioPreset::Custom;
    }
    if let Some(purity) = overrides.purity {
        spec.p_m = purity;
        spec.preset = ScenarioPreset::Custom;
    }
    if let Some(grid) = &overrides.alpha_grid {
        spec.alpha_grid = grid.clone();
    }
    if spec.alpha_grid.is_empty() {
        bail!("alpha grid must not be empty");
    }
    if spec.counts_per_setting == 0 {
        bail!("counts per setting must be at least 1");
    }
    Ok(spec)
}

/// Manifest lines describing a resolved spec.
pub fn spec_lines(spec: &ScenarioSpec<f64>) -> Vec<(String, String)> {
    let join = |values: &[f64]| {
        values
            .iter()
            .map(|v| fmt_float(*v))
            .collect::<Vec<_>>()
            .join(",")
    };
    vec![
        ("preset".into(), spec.preset.as_str().into()),
        ("theta".into(), fmt_float(spec.theta)),
        ("p_m".into(), fmt_float(spec.p_m)),
        ("alpha_grid".into(), join(&spec.alpha_grid)),
        (
            "counts_per_setting".into(),
            spec.counts_per_setting.to_string(),
        ),
        ("seed".into(), spec.seed.to_string()),
        ("xi_grid".into(), join(&spec.xi_grid)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_overrides_apply() {
        let dir = std::env::temp_dir().join("qeraser-scenario-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("override.cfg");
        std::fs::write(
            &path,
            "# comment\npreset = custom\ntheta = 0.25pi\npurity = 0.9\nseed = 7\nalpha_grid = 0:0.4pi:5\n",
        )
        .unwrap();
        let spec = resolve_spec(
            ScenarioSpec::figure2_default(),
            Some(&path),
            &SpecOverrides::default(),
        )
        .unwrap();
        assert_eq!(spec.preset, ScenarioPreset::Custom);
        assert!((spec.theta - 0.25 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(spec.seed, 7);
        assert_eq!(spec.alpha_grid.len(), 5);
    }

    #[test]
    fn flags_take_precedence() {
        let overrides = SpecOverrides {
            seed: Some(11),
            counts: Some(123),
            ..Default::default()
        };
        let spec = resolve_spec(ScenarioSpec::figure2_default(), None, &overrides).unwrap();
        assert_eq!(spec.seed, 11);
        assert_eq!(spec.counts_per_setting, 123);
        assert_eq!(spec.preset, ScenarioPreset::Figure2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut spec = ScenarioSpec::figure2_default();
        assert!(apply_override(&mut spec, "bogus", "1").is_err());
    }
}
