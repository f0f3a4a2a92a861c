//! Optional TOML scan definitions. Every key is optional; command-line flags
//! take precedence.
//!
//! ```toml
//! s_min = 0.01
//! s_max = 1.0
//! n = 100
//! log = true
//! p = 2.0
//! cost = "logsq"
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScanFile {
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub n: Option<usize>,
    pub log: Option<bool>,
    pub p: Option<f64>,
    pub cost: Option<String>,
    pub grid: Option<usize>,
}

impl ScanFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_files() {
        let s = ScanFile::parse("s_min = 0.1\nn = 5\ncost = \"logsq\"\n").unwrap();
        assert_eq!(s.s_min, Some(0.1));
        assert_eq!(s.n, Some(5));
        assert_eq!(s.cost.as_deref(), Some("logsq"));
        assert_eq!(s.p, None);
        assert!(ScanFile::parse("bogus = 1").is_err());
    }
}
