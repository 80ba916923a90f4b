//! Resolves command-line inputs: a file path, inline JSON, or `example:NAME`
//! with an optional `:VARIANT` suffix.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;
use treeshift_core::codec;
use treeshift_core::fixtures::{self, ExampleDirection};
use treeshift_core::orbits::PseudoOrbit;
use treeshift_core::shifts::ShiftSystem;
use treeshift_core::words::{Letter, Signature};
use treeshift_core::Configuration;

/// Radius of the counterexample orbit served by `example:two-point-no-shadow`.
pub const COUNTEREXAMPLE_RADIUS: usize = 5;

enum Source {
    Example { name: String, variant: Option<String> },
    Json(Value),
}

fn source(arg: &str) -> Result<Source> {
    if let Some(rest) = arg.strip_prefix("example:") {
        let (name, variant) = match rest.split_once(':') {
            Some((n, v)) => (n.to_string(), Some(v.to_string())),
            None => (rest.to_string(), None),
        };
        return Ok(Source::Example { name, variant });
    }
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') || trimmed.parse::<f64>().is_ok() {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).with_context(|| format!("reading {arg}"))?
    };
    let v = serde_json::from_str(&text).with_context(|| format!("parsing JSON from {arg}"))?;
    Ok(Source::Json(v))
}

fn direction(variant: Option<&str>) -> Result<ExampleDirection> {
    Ok(match variant {
        Some(v) => v.parse()?,
        None => ExampleDirection::Literal,
    })
}

fn unknown(name: &str, role: &str) -> anyhow::Error {
    anyhow!("example {name:?} provides no {role}")
}

pub fn points(arg: &str, sig: Signature) -> Result<(Signature, Vec<Configuration>)> {
    match source(arg)? {
        Source::Json(v) => Ok(codec::points_from_json(&v, Some(sig))?),
        Source::Example { name, variant } => {
            let g2 = Signature::group(2);
            let m2 = Signature::monoid(2);
            Ok(match name.as_str() {
                "two-point-no-shadow" => (g2, vec![Configuration::constant(g2, 0), Configuration::constant(g2, 1)]),
                "ict-not-cict" => (g2, fixtures::ict_not_cict(direction(variant.as_deref())?)),
                "golden-mean-monoid" => (m2, fixtures::parity_pair(m2)),
                "full-shift-2" => (g2, vec![Configuration::constant(g2, 0)]),
                _ => return Err(unknown(&name, "points")),
            })
        }
    }
}

pub fn system(arg: &str) -> Result<ShiftSystem> {
    match source(arg)? {
        Source::Json(v) => Ok(codec::system_from_json(&v)?),
        Source::Example { name, .. } => {
            let g2 = Signature::group(2);
            Ok(match name.as_str() {
                "two-point-no-shadow" => fixtures::two_point_system(g2),
                "ict-not-cict" => fixtures::full_shift(g2, 3),
                "golden-mean-monoid" => fixtures::golden_mean(Signature::monoid(2)),
                "full-shift-2" => fixtures::full_shift(g2, 2),
                _ => return Err(unknown(&name, "system")),
            })
        }
    }
}

pub fn orbit(arg: &str, sig: Signature) -> Result<PseudoOrbit> {
    match source(arg)? {
        Source::Json(v) => Ok(codec::orbit_from_json(&v, Some(sig))?),
        Source::Example { name, .. } => match name.as_str() {
            "two-point-no-shadow" => {
                let (_, orbit) = fixtures::asymptotic_counterexample(2, Letter::generator(0), COUNTEREXAMPLE_RADIUS)?;
                Ok(orbit)
            }
            _ => Err(unknown(&name, "pseudo-orbit")),
        },
    }
}

pub fn config(arg: &str, sig: Signature) -> Result<Configuration> {
    match source(arg)? {
        Source::Json(v) => Ok(codec::config_from_json(sig, &v)?),
        Source::Example { name, variant } => {
            let index: usize = match variant {
                Some(v) => v.parse().with_context(|| format!("point index {v:?}"))?,
                None => 0,
            };
            if name == "x0" {
                return Ok(fixtures::x0());
            }
            let (_, list) = points(&format!("example:{name}"), sig)?;
            list.into_iter()
                .nth(index)
                .ok_or_else(|| anyhow!("example {name:?} has no point {index}"))
        }
    }
}

/// Parses `2^-k` (or `1`) into its exponent.
pub fn exponent(s: &str) -> Result<u32> {
    let d: treeshift_core::Dyadic = s.parse()?;
    if d.exp == 0 {
        bail!("resolution must be below 1, got {s}");
    }
    Ok(d.exp)
}
