//! Fitted stand-ins for the universal constants, one JSON file each.
//!
//! The committed values live in `constants/` and are compiled in; a
//! directory passed with `--constants` overrides them file by file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use smallball_core::bounds::{FittedConstant, TheoremConstants};

use crate::formats::{parse_json, FormatError};

pub const EQUAL: &str = "C_equal";
pub const DIFF: &str = "C_diff";
pub const PRG: &str = "C_prg";
pub const ESSEEN: &str = "C_esseen";
pub const COS: &str = "C_cos";
pub const COORD: &str = "C_coord";
pub const SIZE: &str = "C_1";

pub const NAMES: [&str; 7] = [EQUAL, DIFF, PRG, ESSEEN, COS, COORD, SIZE];

const EMBEDDED: [(&str, &str); 7] = [
    (EQUAL, include_str!("../constants/C_equal.json")),
    (DIFF, include_str!("../constants/C_diff.json")),
    (PRG, include_str!("../constants/C_prg.json")),
    (ESSEEN, include_str!("../constants/C_esseen.json")),
    (COS, include_str!("../constants/C_cos.json")),
    (COORD, include_str!("../constants/C_coord.json")),
    (SIZE, include_str!("../constants/C_1.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantFile {
    pub name: String,
    pub value: f64,
    pub family: String,
    pub grid: String,
}

impl From<FittedConstant> for ConstantFile {
    fn from(c: FittedConstant) -> Self {
        Self { name: c.name, value: c.value, family: c.family, grid: c.grid }
    }
}

impl ConstantFile {
    fn parse(path: &Path, expected: &str, text: &str) -> Result<Self, FormatError> {
        let c: ConstantFile = parse_json(path, text)?;
        if c.name != expected {
            return Err(FormatError::Schema {
                path: path.into(),
                message: format!("expected constant {expected}, found {}", c.name),
            });
        }
        if !(c.value.is_finite() && c.value > 0.0) {
            return Err(FormatError::Schema { path: path.into(), message: format!("value {} is not positive", c.value) });
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    files: Vec<ConstantFile>,
}

impl Constants {
    pub fn embedded() -> Self {
        let files = EMBEDDED
            .iter()
            .map(|(name, text)| {
                ConstantFile::parse(Path::new(&format!("constants/{name}.json")), name, text)
                    .expect("committed constant files are valid")
            })
            .collect();
        Self { files }
    }

    /// Embedded values, replaced by any `<name>.json` present in `dir`.
    pub fn load(dir: Option<&Path>) -> Result<Self, FormatError> {
        let mut c = Self::embedded();
        let Some(dir) = dir else { return Ok(c) };
        if !dir.is_dir() {
            return Err(FormatError::Io {
                path: dir.into(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "constants directory not found"),
            });
        }
        for (slot, name) in c.files.iter_mut().zip(NAMES) {
            let path = dir.join(format!("{name}.json"));
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|source| FormatError::Io { path: path.clone(), source })?;
                *slot = ConstantFile::parse(&path, name, &text)?;
            }
        }
        Ok(c)
    }

    pub fn get(&self, name: &str) -> f64 {
        self.files.iter().find(|c| c.name == name).map(|c| c.value).expect("known constant name")
    }

    pub fn files(&self) -> &[ConstantFile] {
        &self.files
    }

    pub fn theorem(&self) -> TheoremConstants {
        TheoremConstants { equal: self.get(EQUAL), diff: self.get(DIFF), prg: self.get(PRG), coord: self.get(COORD) }
    }
}
