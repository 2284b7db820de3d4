//! Non-intrusive load monitoring on a chaotically switched RLC network.
//!
//! A bank of series-RLC loads shares one sinusoidal source. Each load
//! switches ON and OFF on its own dwell grid, driven by a binarized
//! logistic-map orbit, and the only observable is the RMS of the aggregate
//! current. This crate simulates that network, encodes the joint switch
//! state as a scalar, and trains a Gaussian kernel Adaline that recovers the
//! switch state of every load from short windows of upcoming RMS samples.
//!
//! The pieces compose in a fixed order:
//!
//! * [`chaos`]: logistic-map switching schedules.
//! * [`circuit`]: the switched network, its RK4 integrator, and windowed RMS
//!   measurement.
//! * [`encoding`]: joint switch-state codec on the `i_max / M` grid.
//! * [`kernel`]: in-advance vectors, the Gaussian kernel, Adaline training,
//!   prediction.
//! * [`config`], [`files`], [`pipeline`]: the TOML-configured end-to-end
//!   pipeline and its on-disk artifacts.
//!
//! The `examples/` directory demonstrates each capability on its own;
//! `cargo run --example full_reproduction` walks the whole pipeline. The
//! `nilm` binary wraps the same pipeline behind `simulate`, `train`, `eval`,
//! `disaggregate`, and `run-all` subcommands.

pub mod chaos;
pub mod circuit;
pub mod config;
pub mod encoding;
pub mod error;
pub mod files;
pub mod kernel;
pub mod pipeline;

pub use chaos::{generate_sequence, logistic_step, BinarySequence, SwitchSchedule};
pub use circuit::{
    derivatives, rk4_step, rms_series, simulate, simulate_rms, CircuitState, LoadSpec,
    NetworkConfig, RawTrajectory, SampledSeries,
};
pub use config::{load_config, KernelWidth, PipelineConfig};
pub use encoding::{bit_from_switch, decode, encode, EncodingParams};
pub use error::{Error, Result};
pub use kernel::{
    build_advance_vectors, gaussian_kernel, median_heuristic_width, mse, predict,
    train_kernel_adaline, KernelModel, TrainOptions,
};
pub use pipeline::{
    cmd_disaggregate, cmd_eval, cmd_simulate, cmd_train, run_all, EvaluationReport,
};
