//! Solver parameters from defaults, an optional key=value file, and flags.

use std::fs;

use lasvegas::{PermutationProblem, SolverParams};

use crate::{Failure, SolverFlags};

/// Keys accepted in a config file. Blank lines and `#` comments are ignored.
const KEYS: [&str; 5] = ["tabu", "reset-fraction", "reset-trigger", "local-min-acceptance", "max-iterations"];

pub fn solver_params(flags: &SolverFlags) -> Result<(PermutationProblem, SolverParams), Failure> {
    let problem = PermutationProblem::new(flags.problem, flags.n as usize).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut params = SolverParams::defaults(&problem, flags.seed);
    if let Some(path) = &flags.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        apply_config(&mut params, &text)?;
    }
    if let Some(v) = flags.tabu {
        params.tabu_tenure = v;
    }
    if let Some(v) = flags.reset_fraction {
        params.reset_fraction = v;
    }
    if let Some(v) = flags.reset_trigger {
        params.reset_trigger = v;
    }
    if let Some(v) = flags.local_min_acceptance {
        params.local_min_acceptance = v;
    }
    if let Some(v) = flags.max_iterations {
        params.max_iterations = v;
    }
    params.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((problem, params))
}

fn apply_config(params: &mut SolverParams, text: &str) -> Result<(), Failure> {
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |why: String| Failure::Usage(format!("config line {}: {why}", k + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        let invalid = |_| bad(format!("invalid value {value:?} for {key}"));
        match key.as_str() {
            "tabu" => params.tabu_tenure = value.parse().map_err(|e: std::num::ParseIntError| invalid(e.to_string()))?,
            "reset-fraction" => {
                params.reset_fraction = value.parse().map_err(|e: std::num::ParseFloatError| invalid(e.to_string()))?
            }
            "reset-trigger" => {
                params.reset_trigger = value.parse().map_err(|e: std::num::ParseIntError| invalid(e.to_string()))?
            }
            "local-min-acceptance" => {
                params.local_min_acceptance =
                    value.parse().map_err(|e: std::num::ParseFloatError| invalid(e.to_string()))?
            }
            "max-iterations" => {
                params.max_iterations = value.parse().map_err(|e: std::num::ParseIntError| invalid(e.to_string()))?
            }
            _ => return Err(bad(format!("unknown key {key:?}; expected one of {}", KEYS.join(", ")))),
        }
    }
    Ok(())
}
