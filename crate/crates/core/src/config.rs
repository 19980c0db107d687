//! Flat `key = value` run configuration.
//!
//! Grammar: one assignment per line, `#` starts a comment, blank lines are
//! ignored, lists are comma separated. Keys:
//!
//! | key | value |
//! |-----|-------|
//! | `preset` | `quadratic`, `smooth` or `fig1` (quadratic with the β grid of the coverage figure) |
//! | `n` | list of sample sizes |
//! | `beta` | list of interaction strengths in `[0, 1]` |
//! | `rho` | edge density scale in `(0, 1]` |
//! | `reps` | replications per cell |
//! | `alpha1`, `alpha2` | levels of the two steps |
//! | `methods` | subset of `conserv, beta0, oracle, onestep, simulated` |
//! | `seed` | unsigned 64-bit base seed |
//! | `tau_reps` | inner draws for `τ_n`, `0` for the exact sum |
//! | `grid_points` | size of the β grid |
//! | `kernel` | `epanechnikov`, `triangular` or `uniform` |
//! | `bandwidth` | fixed bandwidth, or `auto` |
//! | `bandwidth_scale` | constant of the automatic bandwidth |
//! | `x0` | evaluation point of the learner |
//! | `workers` | worker threads |

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::{Method, SweepConfig};
use crate::inference::KernelKind;
use crate::outcome::Preset;

/// Ordered `(line, key, value)` assignments.
pub fn parse_assignments(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                line,
                field: content.to_string(),
                reason: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config {
                line,
                field: String::new(),
                reason: "missing key".into(),
            });
        }
        out.push((line, key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn parse_one<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| Error::Config {
        line,
        field: key.to_string(),
        reason: format!("cannot parse `{value}`: {e}"),
    })
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::Config {
            line,
            field: key.to_string(),
            reason: "empty list".into(),
        });
    }
    items.into_iter().map(|v| parse_one(line, key, v)).collect()
}

fn apply(cfg: &mut SweepConfig, line: usize, key: &str, value: &str) -> Result<()> {
    match key {
        "preset" => {}
        "n" => cfg.ns = parse_list(line, key, value)?,
        "beta" => cfg.betas = parse_list(line, key, value)?,
        "rho" => cfg.rho = parse_one(line, key, value)?,
        "reps" => cfg.reps = parse_one(line, key, value)?,
        "alpha1" => cfg.alpha1 = parse_one(line, key, value)?,
        "alpha2" => cfg.alpha2 = parse_one(line, key, value)?,
        "methods" => {
            cfg.methods = parse_list::<String>(line, key, value)?
                .iter()
                .map(|m| {
                    m.parse::<Method>().map_err(|_| Error::Config {
                        line,
                        field: key.to_string(),
                        reason: format!("unknown method `{m}`"),
                    })
                })
                .collect::<Result<_>>()?
        }
        "seed" => cfg.seed = parse_one(line, key, value)?,
        "tau_reps" => cfg.tau_reps = parse_one(line, key, value)?,
        "grid_points" => cfg.grid_points = parse_one(line, key, value)?,
        "kernel" => {
            cfg.learner.kernel = value.parse::<KernelKind>().map_err(|_| Error::Config {
                line,
                field: key.to_string(),
                reason: format!("unknown kernel `{value}`"),
            })?
        }
        "bandwidth" => {
            cfg.learner.bandwidth = if value == "auto" {
                None
            } else {
                Some(parse_one(line, key, value)?)
            }
        }
        "bandwidth_scale" => cfg.learner.bandwidth_scale = parse_one(line, key, value)?,
        "x0" => cfg.learner.x0 = parse_one(line, key, value)?,
        "workers" => cfg.workers = Some(parse_one(line, key, value)?),
        _ => {
            return Err(Error::Config {
                line,
                field: key.to_string(),
                reason: "unknown key".into(),
            })
        }
    }
    Ok(())
}

fn base_for_preset(line: usize, value: &str) -> Result<SweepConfig> {
    match value {
        "fig1" => Ok(SweepConfig::fig1()),
        other => match Preset::parse(other) {
            Some(p) => Ok(SweepConfig {
                preset: p,
                ..SweepConfig::default()
            }),
            None => Err(Error::Config {
                line,
                field: "preset".into(),
                reason: format!("unknown preset `{other}`"),
            }),
        },
    }
}

/// Builds a sweep configuration from `base`, the file contents and
/// `key=value` overrides, in that order. A `preset` line resets the base
/// before the remaining keys apply.
pub fn build_config(base: SweepConfig, text: &str, overrides: &[String]) -> Result<SweepConfig> {
    let mut assignments = parse_assignments(text)?;
    for (k, o) in overrides.iter().enumerate() {
        let Some((key, value)) = o.split_once('=') else {
            return Err(Error::Config {
                line: 0,
                field: o.clone(),
                reason: format!("override {} is not `key=value`", k + 1),
            });
        };
        assignments.push((0, key.trim().to_string(), value.trim().to_string()));
    }
    let mut cfg = base;
    if let Some((line, _, value)) = assignments.iter().rev().find(|a| a.1 == "preset") {
        cfg = base_for_preset(*line, value)?;
    }
    for (line, key, value) in &assignments {
        apply(&mut cfg, *line, key, value)?;
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::Config {
            line: assignments.iter().rev().find(|a| a.1 == name).map_or(0, |a| a.0),
            field: name.to_string(),
            reason,
        },
        other => other,
    })?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let text = "# tiny\nn = 100\nreps = 10\nbeta = 0\nmethods = beta0   # only one\n";
        let cfg = build_config(SweepConfig::default(), text, &[]).unwrap();
        assert_eq!(cfg.ns, vec![100]);
        assert_eq!(cfg.reps, 10);
        assert_eq!(cfg.methods, vec![Method::Beta0]);
    }

    #[test]
    fn overrides_win() {
        let cfg = build_config(SweepConfig::default(), "reps = 10\n", &["reps=3".into(), "beta=0,0.5".into()]).unwrap();
        assert_eq!(cfg.reps, 3);
        assert_eq!(cfg.betas, vec![0.0, 0.5]);
    }

    #[test]
    fn fig1_preset_sets_grid() {
        let cfg = build_config(SweepConfig::default(), "reps = 5\npreset = fig1\n", &[]).unwrap();
        assert_eq!(cfg.betas.len(), 12);
        assert_eq!(cfg.methods.len(), 4);
        assert_eq!(cfg.reps, 5);
    }

    #[test]
    fn errors_name_line_and_field() {
        let err = build_config(SweepConfig::default(), "n = 100\nreps = many\n", &[]).unwrap_err();
        match err {
            Error::Config { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "reps");
            }
            other => panic!("{other:?}"),
        }
        let err = build_config(SweepConfig::default(), "colour = blue\n", &[]).unwrap_err();
        assert!(err.to_string().contains("colour"));
        let err = build_config(SweepConfig::default(), "just words\n", &[]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = build_config(SweepConfig::default(), "\nbeta = 1.5\n", &[]).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err:?}");
        assert!(build_config(SweepConfig::default(), "methods = fast\n", &[]).is_err());
    }
}
