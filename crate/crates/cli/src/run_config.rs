//! JSON run configuration for `bench`.
//!
//! ```json
//! {
//!   "dataset": { "artfc": { "n_train": 2000, "n_test": 2000, "d": 200 } },
//!   "algorithms": ["sup", "unsup", "lsh", "fjl", "fly", "random"],
//!   "k": [2, 4, 8],
//!   "d_out": 400,
//!   "seed": 7,
//!   "output": { "csv": "report.csv", "timing": false }
//! }
//! ```
//!
//! File datasets use `{"fvecs": {"train": ..., "test": ..., "train_codes": ...}}`
//! or `{"csv": {..., "delimiter": ","}}`; relative paths resolve against the
//! directory holding the configuration file. Every field is checked before any
//! work starts and errors name the offending field, e.g. `k[1]`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use wtahash::eval::{Algorithm, DEFAULT_REPEATS, DEFAULT_TOP_R};

use crate::{CliError, Result};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<String>,
    pub k: Vec<usize>,
    pub d_out: usize,
    #[serde(default)]
    pub c: Option<usize>,
    #[serde(default = "default_r")]
    pub r: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default)]
    pub output: Output,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSource {
    Artfc {
        n_train: usize,
        n_test: usize,
        d: usize,
    },
    Fvecs {
        train: PathBuf,
        test: PathBuf,
        #[serde(default)]
        train_codes: Option<PathBuf>,
    },
    Csv {
        train: PathBuf,
        test: PathBuf,
        #[serde(default = "default_delimiter")]
        delimiter: String,
        #[serde(default)]
        train_codes: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default = "default_timing")]
    pub timing: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            csv: None,
            timing: true,
        }
    }
}

pub fn default_algorithms() -> Vec<String> {
    Algorithm::ALL.iter().map(|a| a.name().to_string()).collect()
}

fn default_r() -> usize {
    DEFAULT_TOP_R
}

fn default_repeats() -> usize {
    DEFAULT_REPEATS
}

fn default_max_iterations() -> usize {
    100
}

fn default_delimiter() -> String {
    ",".into()
}

fn default_timing() -> bool {
    true
}

fn field_error(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("config field `{field}`: {message}"))
}

impl RunConfig {
    /// Parses and validates a configuration; `origin` is used in messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                CliError::Config(format!("{origin}: {inner}"))
            } else {
                CliError::Config(format!("{origin}: config field `{path}`: {inner}"))
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a configuration file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::parse(&text, &path.display().to_string())?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.dataset {
            DatasetSource::Artfc { .. } => {}
            DatasetSource::Fvecs { train, test, train_codes } | DatasetSource::Csv { train, test, train_codes, .. } => {
                fix(train);
                fix(test);
                if let Some(codes) = train_codes {
                    fix(codes);
                }
            }
        }
        if let Some(csv) = &mut self.output.csv {
            fix(csv);
        }
    }

    /// Algorithms in configuration order.
    pub fn parsed_algorithms(&self) -> Result<Vec<Algorithm>> {
        self.algorithms
            .iter()
            .enumerate()
            .map(|(i, name)| Algorithm::from_str(name).map_err(|e| field_error(&format!("algorithms[{i}]"), e)))
            .collect()
    }

    pub fn delimiter(&self) -> u8 {
        match &self.dataset {
            DatasetSource::Csv { delimiter, .. } => delimiter.as_bytes()[0],
            _ => b',',
        }
    }

    pub fn validate(&self) -> Result<()> {
        let algorithms = self.parsed_algorithms()?;
        if algorithms.is_empty() {
            return Err(field_error("algorithms", "must name at least one algorithm"));
        }
        for (i, a) in algorithms.iter().enumerate() {
            if algorithms[..i].contains(a) {
                return Err(field_error(&format!("algorithms[{i}]"), format!("`{a}` is listed twice")));
            }
        }
        if self.d_out < 2 {
            return Err(field_error("d_out", format!("must be at least 2, got {}", self.d_out)));
        }
        if self.k.is_empty() {
            return Err(field_error("k", "must list at least one hash length"));
        }
        let binary = algorithms.iter().any(|a| !matches!(a, Algorithm::Lsh | Algorithm::Fjl));
        for (i, &k) in self.k.iter().enumerate() {
            if k == 0 {
                return Err(field_error(&format!("k[{i}]"), "must be positive"));
            }
            if binary && k >= self.d_out {
                return Err(field_error(&format!("k[{i}]"), format!("must be below d_out = {}, got {k}", self.d_out)));
            }
            if self.k[..i].contains(&k) {
                return Err(field_error(&format!("k[{i}]"), format!("{k} is listed twice")));
            }
        }
        if self.c == Some(0) {
            return Err(field_error("c", "must be positive"));
        }
        if self.r == 0 {
            return Err(field_error("r", "must be positive"));
        }
        if self.repeats == 0 {
            return Err(field_error("repeats", "must be positive"));
        }
        if self.workers == Some(0) {
            return Err(field_error("workers", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(field_error("max_iterations", "must be positive"));
        }
        match &self.dataset {
            DatasetSource::Artfc { n_train, n_test, d } => {
                if *d == 0 || *d >= self.d_out {
                    return Err(field_error(
                        "dataset.artfc.d",
                        format!("must satisfy 1 <= d < d_out = {}, got {d}", self.d_out),
                    ));
                }
                if let Some(c) = self.c {
                    if c > *d {
                        return Err(field_error("c", format!("must not exceed d = {d}, got {c}")));
                    }
                }
                if *n_train == 0 {
                    return Err(field_error("dataset.artfc.n_train", "must be positive"));
                }
                if *n_test <= self.r {
                    return Err(field_error(
                        "dataset.artfc.n_test",
                        format!("must exceed r = {} so every query has r neighbors, got {n_test}", self.r),
                    ));
                }
            }
            DatasetSource::Fvecs { train_codes, .. } => {
                if algorithms.contains(&Algorithm::Sup) && train_codes.is_none() {
                    return Err(field_error("dataset.fvecs.train_codes", "required when `sup` is benchmarked"));
                }
            }
            DatasetSource::Csv {
                delimiter, train_codes, ..
            } => {
                if delimiter.len() != 1 {
                    return Err(field_error(
                        "dataset.csv.delimiter",
                        format!("must be a single ASCII character, got {delimiter:?}"),
                    ));
                }
                if algorithms.contains(&Algorithm::Sup) && train_codes.is_none() {
                    return Err(field_error("dataset.csv.train_codes", "required when `sup` is benchmarked"));
                }
            }
        }
        Ok(())
    }
}
