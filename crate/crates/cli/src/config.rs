use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use gapmodes::{PeriodicPotential, Tolerances};
use serde_json::json;
use sha2::{Digest, Sha256};

/// Failure of a run, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid inputs. Exit code 2.
    Config(String),
    /// A solver failed or a verification disagreed. Exit code 3.
    Numeric { message: String, details: serde_json::Value },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
        }
    }

    pub fn diagnostic(&self, command: &str) -> serde_json::Value {
        match self {
            CliError::Config(m) => json!({"kind": "config", "command": command, "message": m}),
            CliError::Numeric { message, details } => {
                json!({"kind": "numeric", "command": command, "message": message, "details": details})
            }
        }
    }
}

impl From<gapmodes::Error> for CliError {
    fn from(e: gapmodes::Error) -> Self {
        use gapmodes::Error::*;
        match e {
            InvalidPeriod(_) | EmptyCoefficients | NonFiniteCoefficient | InvalidTolerance(_) | InvalidGrid(_)
            | InvalidProblem(_) | InvalidArgument(_) | NonMonotonePotential => CliError::Config(e.to_string()),
            _ => CliError::Numeric {
                message: e.to_string(),
                details: serde_json::Value::Null,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Inclusive grid `lo:hi:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts[..] else {
            return Err(format!("grid `{s}` is not of the form lo:hi:step"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("grid `{s}`: {e}"));
        let g = Grid {
            lo: num(lo)?,
            hi: num(hi)?,
            step: num(step)?,
        };
        if !(g.lo.is_finite() && g.hi.is_finite() && g.step.is_finite()) {
            return Err(format!("grid `{s}` has non-finite entries"));
        }
        if !(g.step > 0.0) || g.hi < g.lo {
            return Err(format!("grid `{s}` needs lo <= hi and step > 0"));
        }
        if (g.hi - g.lo) / g.step > 1e6 {
            return Err(format!("grid `{s}` has more than a million points"));
        }
        Ok(g)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

/// Reads a potential descriptor from a file, or parses it inline when the
/// argument starts with `{`.
pub fn load_potential(arg: &str) -> CliResult<PeriodicPotential> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_owned()
    } else {
        fs::read_to_string(Path::new(arg)).map_err(|e| CliError::Config(format!("cannot read {arg}: {e}")))?
    };
    PeriodicPotential::from_json(&text).map_err(|e| CliError::Config(format!("potential descriptor {arg}: {e}")))
}

/// A named profile (`default`, `fast`, `strict`) or a JSON file of overrides
/// on top of the default profile.
pub fn load_tolerances(arg: &str) -> CliResult<Tolerances> {
    let tol = match Tolerances::profile(arg) {
        Some(t) => t,
        None => {
            let text = fs::read_to_string(arg)
                .map_err(|e| CliError::Config(format!("`{arg}` is neither a tolerance profile nor a readable file: {e}")))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("tolerance file {arg}: {e}")))?
        }
    };
    tol.validate()?;
    Ok(tol)
}

/// First 16 hex digits of the SHA-256 of the profile's JSON form.
pub fn tolerance_hash(tol: &Tolerances) -> String {
    let text = serde_json::to_string(tol).expect("tolerances serialize");
    let digest = Sha256::digest(text.as_bytes());
    format!("{digest:x}")[..16].to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_include_both_ends() {
        let g: Grid = "-3:3:0.05".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 121);
        assert!((pts[120] - 3.0).abs() < 1e-12);
        assert_eq!("0:1:0.3".parse::<Grid>().unwrap().points().len(), 4);
    }

    #[test]
    fn bad_grids_are_rejected() {
        for s in ["1:0:0.1", "0:1:0", "0:1", "a:1:0.1", "0:inf:1"] {
            assert!(s.parse::<Grid>().is_err(), "{s}");
        }
    }

    #[test]
    fn hash_depends_on_profile() {
        let a = tolerance_hash(&Tolerances::default());
        assert_eq!(a.len(), 16);
        assert_eq!(a, tolerance_hash(&Tolerances::default()));
        assert_ne!(a, tolerance_hash(&Tolerances::strict()));
    }

    #[test]
    fn inline_descriptor() {
        let p = load_potential(r#"{"period": 10.0, "cosine_coeffs": [0.5, -0.5]}"#).unwrap();
        assert_eq!(p.period(), 10.0);
        assert!(matches!(load_potential(r#"{"period": -1, "cosine_coeffs": [1]}"#), Err(CliError::Config(_))));
    }
}
