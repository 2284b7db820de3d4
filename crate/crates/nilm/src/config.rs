//! Pipeline configuration: one TOML file describing the network, the
//! dataset split, the regression knobs, and the output paths.
//!
//! Unknown keys are rejected rather than ignored, so a typo cannot silently
//! fall back to a default.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuit::{LoadSpec, NetworkConfig};
use crate::error::{Error, Result};

/// Rows reserved per dataset segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Rows kept in the dataset after the start-up transient is discarded.
    pub n_samples: usize,
    /// Leading rows used for training.
    pub n_train: usize,
    /// Rows right after the training segment used for validation.
    pub n_valid: usize,
}

/// Kernel width: a fixed value, or `"auto"` for the median-distance
/// heuristic computed on the training vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelWidth {
    Auto,
    Fixed(f64),
}

impl Serialize for KernelWidth {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KernelWidth::Auto => serializer.serialize_str("auto"),
            KernelWidth::Fixed(v) => serializer.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for KernelWidth {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct WidthVisitor;

        impl Visitor<'_> for WidthVisitor {
            type Value = KernelWidth;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive number or the string \"auto\"")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<KernelWidth, E> {
                if s == "auto" {
                    Ok(KernelWidth::Auto)
                } else {
                    Err(E::custom(format!(
                        "kernel width must be a number or \"auto\", got \"{s}\""
                    )))
                }
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<KernelWidth, E> {
                Ok(KernelWidth::Fixed(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<KernelWidth, E> {
                Ok(KernelWidth::Fixed(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<KernelWidth, E> {
                Ok(KernelWidth::Fixed(v as f64))
            }
        }

        deserializer.deserialize_any(WidthVisitor)
    }
}

/// Regression knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionConfig {
    /// In-advance vector length.
    pub d: usize,
    /// Gaussian kernel width.
    pub p: KernelWidth,
    /// Adaline learning rate.
    pub eta: f64,
    /// Training passes over the training segment.
    pub epochs: usize,
}

/// Where the pipeline reads and writes its artifacts. Relative paths are
/// resolved against a base directory chosen by the caller (the command line
/// uses the working directory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub dataset_csv: PathBuf,
    pub model_file: PathBuf,
    pub report_file: PathBuf,
    pub trace_csv: PathBuf,
    /// Per-row prediction dump written next to the report when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions_csv: Option<PathBuf>,
    /// Decoded-state output of the disaggregate step; defaults next to the
    /// report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states_csv: Option<PathBuf>,
}

impl PathsConfig {
    pub fn predictions_csv(&self) -> PathBuf {
        self.predictions_csv
            .clone()
            .unwrap_or_else(|| self.report_file.with_file_name("predictions.csv"))
    }

    pub fn states_csv(&self) -> PathBuf {
        self.states_csv
            .clone()
            .unwrap_or_else(|| self.report_file.with_file_name("states.csv"))
    }
}

/// The whole pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub network: NetworkConfig,
    pub dataset: DatasetConfig,
    pub regression: RegressionConfig,
    pub paths: PathsConfig,
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field: field.into(),
        message: message.into(),
    }
}

impl PipelineConfig {
    /// Rows dropped from the head of the emitted series so that no kept row's
    /// averaging window overlaps the start-up transient.
    pub fn transient_discard_rows(&self) -> Result<usize> {
        let window = self.network.window_steps()?;
        Ok(window.div_ceil(self.network.sample_stride))
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        let d = &self.dataset;
        if d.n_samples == 0 {
            return Err(config_err("dataset.n_samples", "must be at least 1"));
        }
        if d.n_train == 0 {
            return Err(config_err("dataset.n_train", "must be at least 1"));
        }
        if d.n_valid == 0 {
            return Err(config_err("dataset.n_valid", "must be at least 1"));
        }
        let needed = d
            .n_train
            .checked_add(d.n_valid)
            .ok_or_else(|| config_err("dataset", "segment sizes overflow"))?;
        if needed > d.n_samples {
            return Err(config_err(
                "dataset.n_samples",
                format!(
                    "n_train + n_valid = {needed} exceeds n_samples = {}",
                    d.n_samples
                ),
            ));
        }
        let r = &self.regression;
        if r.d == 0 {
            return Err(config_err("regression.d", "must be at least 1"));
        }
        if r.d > d.n_train || r.d > d.n_valid {
            return Err(config_err(
                "regression.d",
                format!(
                    "in-advance vectors of length {} do not fit in segments of {} and {} rows",
                    r.d, d.n_train, d.n_valid
                ),
            ));
        }
        if let KernelWidth::Fixed(p) = r.p {
            if !(p > 0.0) || !p.is_finite() {
                return Err(config_err(
                    "regression.p",
                    format!("must be positive and finite, got {p}"),
                ));
            }
        }
        if !(r.eta > 0.0) || !r.eta.is_finite() {
            return Err(config_err(
                "regression.eta",
                format!("must be positive and finite, got {}", r.eta),
            ));
        }
        if r.epochs == 0 {
            return Err(config_err("regression.epochs", "must be at least 1"));
        }

        // The measurement grid must be long enough to fill the dataset after
        // the discard.
        let window = self.network.window_steps()?;
        let stride = self.network.sample_stride;
        let discard = window.div_ceil(stride);
        let last_step = (window - 1) + (discard + d.n_samples - 1) * stride;
        let available = self.network.total_steps();
        if available < last_step {
            return Err(config_err(
                "network.t_end",
                format!(
                    "too short for {} dataset rows after the transient discard; need at least {} s",
                    d.n_samples,
                    last_step as f64 * self.network.dt
                ),
            ));
        }
        Ok(())
    }

    /// Serializes the configuration exactly as a config file would hold it.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Reference four-load setup: a 60 Hz mains source driving four series-RLC
/// branches, a half-period RMS window advanced by its own width, and a
/// dataset of 2000 rows split 1350/650.
///
/// The values are engineered so that aggregate RMS current carries the joint
/// switch state cleanly:
///
/// * Each branch is tuned to resonance at the drive frequency
///   (`1/sqrt(LC) = w`), so an ON branch looks purely resistive and its
///   current adds in phase with the others.
/// * Resistances double from one load to the next (20, 40, 80, 160 ohm), so
///   the sixteen joint states produce sixteen distinct, nearly evenly spaced
///   RMS plateaus (adjacent levels sit about 0.7 A apart).
/// * Dwell times are odd multiples of the mains period while the RMS window
///   is half a period advanced by its own width, so every switching edge
///   falls exactly on a window boundary and no window ever mixes two states;
///   the RMS of a sinusoid over any half period is phase-independent, so the
///   plateaus do not wobble with window placement.
/// * Damping rates `R / 2L` are 500/s or faster, so post-switch transients
///   die inside a single window.
///
/// The step size is set by stiffness: the OFF branch decays at `R K / L`
/// (worst case about 1.1e6 per second here), and explicit RK4 is stable only
/// while `dt * R K / L < 2.8`. One sixteen-thousandth of a mains period
/// (about 1.04 us) keeps that product near 1.1.
///
/// The regression reads a two-sample window: the leading sample pins the
/// plateau of the state being decoded and the look-ahead sample
/// disambiguates windows that land on a post-switch transient. The kernel
/// width 0.2 resolves the 0.7 A spacing between adjacent plateaus.
impl Default for PipelineConfig {
    fn default() -> Self {
        let angular_frequency = 120.0 * PI;
        let period = 2.0 * PI / angular_frequency;
        let w2 = angular_frequency * angular_frequency;
        let window_steps = 8000usize;
        let dt = period / 16000.0;
        let sample_stride = 8000usize;
        let n_samples = 2000usize;
        let discard = window_steps.div_ceil(sample_stride);
        let last_step = (window_steps - 1) + (discard + n_samples - 1) * sample_stride;
        let t_end = last_step as f64 * dt;

        PipelineConfig {
            network: NetworkConfig {
                source_resistance: 0.5,
                amplitude: 170.0,
                angular_frequency,
                standby_constant: 100.0,
                seed: 0.123456789,
                per_load_seeds: None,
                dt,
                t_end,
                rms_window: period / 2.0,
                sample_stride,
                loads: vec![
                    LoadSpec {
                        resistance: 20.0,
                        inductance: 0.02,
                        capacitance: 1.0 / (w2 * 0.02),
                        tau: 9.0 * period,
                    },
                    LoadSpec {
                        resistance: 40.0,
                        inductance: 0.025,
                        capacitance: 1.0 / (w2 * 0.025),
                        tau: 15.0 * period,
                    },
                    LoadSpec {
                        resistance: 80.0,
                        inductance: 0.03,
                        capacitance: 1.0 / (w2 * 0.03),
                        tau: 21.0 * period,
                    },
                    LoadSpec {
                        resistance: 160.0,
                        inductance: 0.015,
                        capacitance: 1.0 / (w2 * 0.015),
                        tau: 33.0 * period,
                    },
                ],
            },
            dataset: DatasetConfig {
                n_samples,
                n_train: 1350,
                n_valid: 650,
            },
            regression: RegressionConfig {
                d: 2,
                p: KernelWidth::Fixed(0.2),
                eta: 0.3,
                epochs: 300,
            },
            paths: PathsConfig {
                dataset_csv: PathBuf::from("dataset.csv"),
                model_file: PathBuf::from("model.json"),
                report_file: PathBuf::from("report.txt"),
                trace_csv: PathBuf::from("trace.csv"),
                predictions_csv: None,
                states_csv: None,
            },
        }
    }
}

/// Parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path)?;
    let config: PipelineConfig = toml::from_str(&text).map_err(|e| Error::InvalidConfig {
        field: path.display().to_string(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}
