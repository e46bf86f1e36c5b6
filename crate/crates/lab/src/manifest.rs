use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// How a measured value is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `measured < tolerance`
    Below,
    /// `measured <= tolerance`
    AtMost,
    /// `measured >= tolerance`
    AtLeast,
    /// `|measured| <= tolerance` for a signed deviation
    Within,
    /// pass/fail decided elsewhere; the numbers are informational
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(with = "lenient_f64")]
    pub measured: f64,
    #[serde(with = "lenient_f64")]
    pub tolerance: f64,
    pub comparison: Comparison,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, measured: f64, comparison: Comparison, tolerance: f64) -> Self {
        let passed = match comparison {
            Comparison::Below => measured < tolerance,
            Comparison::AtMost => measured <= tolerance,
            Comparison::AtLeast => measured >= tolerance,
            Comparison::Within => measured.abs() <= tolerance,
            Comparison::Flag => true,
        };
        Self { name: name.into(), passed, measured, tolerance, comparison, detail: String::new() }
    }

    pub fn flag(name: &str, passed: bool, measured: f64) -> Self {
        Self { passed, ..Self::new(name, measured, Comparison::Flag, f64::NAN) }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallClock {
    pub started_unix_seconds: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub library_version: String,
    pub transform_normalization: String,
    pub seeds: Vec<u64>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    /// Excluded from the content hash, as is `config.output_dir`.
    pub wall_clock: Option<WallClock>,
}

impl RunManifest {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            seeds: vec![config.seed],
            config,
            library_version: nst_lab_core::VERSION.into(),
            transform_normalization: nst_lab_core::TRANSFORM_NORMALIZATION.into(),
            checks: Vec::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
            wall_clock: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Pretty JSON with fields in declaration order.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of the JSON form without the wall clock and output directory.
    pub fn content_hash(&self) -> String {
        let mut stripped = RunManifest { wall_clock: None, ..self.clone() };
        stripped.config.output_dir.clear();
        hex::encode(Sha256::digest(stripped.to_json().as_bytes()))
    }
}

/// JSON has no NaN or infinity; those are written as the strings `nan`, `inf`, `-inf`.
mod lenient_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&crate::output::num(*v))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(serde::de::Error::custom(format!("not a number: {t}"))),
            },
        }
    }
}
