//! Run configuration files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "family": {
//!     "dimension": 2,
//!     "generators": { "a": [["1", "2"], ["0", "1"]], "b": [["1", "0"], ["l", "1"]] },
//!     "poles": []
//!   },
//!   "walk": { "measure": [{ "word": "a", "p": 0.25 }, { "word": "A", "p": 0.25 },
//!                         { "word": "b", "p": 0.25 }, { "word": "B", "p": 0.25 }] }
//! }
//! ```
//!
//! `walk` may be omitted, or `measure` given as `"uniform-symmetric"`; both
//! mean weight `1/(2k)` on every generator and inverse.

use std::path::Path;

use bifurclab_core::family::FamilySpec;
use bifurclab_core::{Error, RepFamily, StepMeasure, Word};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The only schema version this build reads.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub family: FamilySpec,
    #[serde(default)]
    pub walk: WalkSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSpec {
    pub measure: MeasureSpec,
}

impl Default for WalkSpec {
    fn default() -> Self {
        WalkSpec {
            measure: MeasureSpec::Named(UNIFORM_SYMMETRIC.into()),
        }
    }
}

pub const UNIFORM_SYMMETRIC: &str = "uniform-symmetric";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Named(String),
    Atoms(Vec<AtomSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub word: String,
    pub p: f64,
}

/// A parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub file: ConfigFile,
    pub family: RepFamily,
    pub measure: StepMeasure,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let family = RepFamily::from_spec(&file.family)?;
        let measure = build_measure(&file.walk.measure, &family)?;
        Ok(Config { file, family, measure })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Config::parse(&text).map_err(|source| CliError::Config {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn build_measure(spec: &MeasureSpec, family: &RepFamily) -> Result<StepMeasure, Error> {
    match spec {
        MeasureSpec::Named(name) if name == UNIFORM_SYMMETRIC => StepMeasure::uniform_symmetric(family.names().len()),
        MeasureSpec::Named(name) => Err(Error::InvalidMeasure(format!(
            "unknown measure `{name}` (expected `{UNIFORM_SYMMETRIC}` or a list of atoms)"
        ))),
        MeasureSpec::Atoms(atoms) => {
            let atoms = atoms
                .iter()
                .map(|a| Ok((Word::parse(&a.word, family.names())?, a.p)))
                .collect::<Result<Vec<_>, Error>>()?;
            StepMeasure::new(atoms)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAG: &str = r#""family":{"dimension":2,"generators":{"a":[["l","0"],["0","1/l"]]},"poles":[[0,0]]}"#;

    #[test]
    fn walk_block_is_optional() {
        let c = Config::parse(&format!(r#"{{"schema_version":1,{DIAG}}}"#)).unwrap();
        assert_eq!(c.measure, StepMeasure::uniform_symmetric(1).unwrap());
        assert!(c.measure.is_symmetric());
    }

    #[test]
    fn explicit_atoms() {
        let text = format!(
            r#"{{"schema_version":1,{DIAG},"walk":{{"measure":[{{"word":"a","p":0.75}},{{"word":"A","p":0.25}}]}}}}"#
        );
        let c = Config::parse(&text).unwrap();
        assert!(!c.measure.is_symmetric());
        assert_eq!(c.measure.atoms()[1].0, c.family.word("A").unwrap());
    }

    #[test]
    fn schema_version_is_required_and_checked() {
        let err = Config::parse(&format!("{{{DIAG}}}")).unwrap_err();
        assert!(err.to_string().contains("schema_version"), "{err}");
        let err = Config::parse(&format!(r#"{{"schema_version":2,{DIAG}}}"#)).unwrap_err();
        assert!(err.to_string().contains("unsupported"), "{err}");
    }

    #[test]
    fn bad_measures_are_rejected() {
        let named = format!(r#"{{"schema_version":1,{DIAG},"walk":{{"measure":"lazy"}}}}"#);
        assert!(matches!(Config::parse(&named), Err(Error::InvalidMeasure(_))));
        let unknown = format!(r#"{{"schema_version":1,{DIAG},"walk":{{"measure":[{{"word":"b","p":1}}]}}}}"#);
        assert!(matches!(Config::parse(&unknown), Err(Error::InvalidMeasure(_))));
    }
}
