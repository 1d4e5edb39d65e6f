//! Angle and grid parsing. Angles are accepted as raw radians ("1.047")
//! or as multiples of pi with the `pi` suffix ("0.297pi", "-0.5pi", "pi").

use anyhow::{bail, Context, Result};

/// Parses one angle, radians or `<factor>pi`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let trimmed = text.trim();
    if let Some(prefix) = trimmed.strip_suffix("pi") {
        let factor = match prefix.trim() {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .with_context(|| format!("invalid pi multiple '{other}'"))?,
        };
        return Ok(factor * std::f64::consts::PI);
    }
    trimmed
        .parse::<f64>()
        .with_context(|| format!("invalid angle '{trimmed}'"))
}

/// Parses an angle grid. Three forms:
/// - a single angle ("0.25pi"),
/// - a comma list ("0,0.1pi,0.2pi"),
/// - a linspace triple "start:end:count" ("0:0.49pi:99").
pub fn parse_angle_grid(text: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim();
    if trimmed.contains(':') {
        let parts: Vec<&str> = trimmed.split(':').collect();
        if parts.len() != 3 {
            bail!("grid '{trimmed}' must be start:end:count");
        }
        let start = parse_angle(parts[0])?;
        let end = parse_angle(parts[1])?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .with_context(|| format!("invalid point count '{}'", parts[2]))?;
        if count == 0 {
            bail!("grid '{trimmed}' must contain at least one point");
        }
        return Ok(qeraser_core::experiment::linspace(start, end, count));
    }
    if trimmed.contains(',') {
        return trimmed.split(',').map(parse_angle).collect();
    }
    Ok(vec![parse_angle(trimmed)?])
}
