//! End-to-end drivers: simulate a dataset, train a model, evaluate it, and
//! disaggregate a current series. These are the verbs the command line
//! exposes; each takes a validated configuration plus a base directory that
//! relative paths resolve against, so identical configurations can run in
//! different sandboxes and produce byte-identical artifacts.

use std::path::{Path, PathBuf};

use crate::chaos::{self, FixedPointHit, SwitchSchedule};
use crate::circuit::{simulate_rms, NetworkConfig};
use crate::config::{KernelWidth, PipelineConfig};
use crate::encoding::{decode, EncodingParams};
use crate::error::{Error, Result};
use crate::files::{self, PredictionRow};
use crate::kernel::{
    build_advance_vectors, median_heuristic_width, predict, train_kernel_adaline, TrainOptions,
    TrainingSet,
};

/// Vectors subsampled by the automatic kernel-width heuristic.
pub const WIDTH_SUBSAMPLE: usize = 200;

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Builds the switching schedule a network configuration describes, long
/// enough to cover the whole run.
pub fn build_schedule(network: &NetworkConfig) -> Result<SwitchSchedule> {
    let taus: Vec<f64> = network.loads.iter().map(|l| l.tau).collect();
    let needed = |tau: f64| (network.t_end / tau).floor() as usize + 2;
    match &network.per_load_seeds {
        None => {
            let len = taus.iter().map(|&tau| needed(tau)).max().unwrap_or(1);
            let seq = chaos::generate_sequence(network.seed, len, network.standby_constant)?;
            SwitchSchedule::shared(seq, taus)
        }
        Some(seeds) => {
            let sequences = seeds
                .iter()
                .zip(&taus)
                .map(|(&seed, &tau)| {
                    chaos::generate_sequence(seed, needed(tau), network.standby_constant)
                })
                .collect::<Result<Vec<_>>>()?;
            SwitchSchedule::per_load(sequences, taus)
        }
    }
}

/// Switching activity of one load across the emitted dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadActivity {
    pub tau: f64,
    /// Bit flips between consecutive dataset rows.
    pub toggles: usize,
    pub on_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct SimulateSummary {
    pub rows: usize,
    pub i_max: f64,
    pub dataset_path: PathBuf,
    pub loads: Vec<LoadActivity>,
    /// Present when the chaotic orbit grazed a fixed point; the schedule's
    /// tail is then constant and the seed deserves a second look.
    pub fixed_point_hit: Option<FixedPointHit>,
}

/// Simulates the network, discards every row whose averaging window touches
/// the start-up transient, keeps exactly `n_samples` rows, and writes them
/// as the dataset CSV.
pub fn cmd_simulate(config: &PipelineConfig, base: &Path) -> Result<SimulateSummary> {
    config.validate()?;
    let schedule = build_schedule(&config.network)?;
    let series = simulate_rms(&config.network, &schedule)?;
    let discard = config.transient_discard_rows()?;
    let keep = discard + config.dataset.n_samples;
    if series.len() < keep {
        return Err(Error::InvalidArgument(format!(
            "run produced {} rows, dataset needs {keep}",
            series.len()
        )));
    }
    let dataset = series.slice(discard..keep)?;
    let dataset_path = resolve(base, &config.paths.dataset_csv);
    files::write_dataset_csv(&dataset_path, &dataset)?;

    let mut loads = Vec::with_capacity(dataset.num_loads());
    for j in 0..dataset.num_loads() {
        let mut toggles = 0usize;
        let mut ones = 0usize;
        for row in 0..dataset.len() {
            let bit = dataset.bits_at(row)[j];
            ones += bit as usize;
            if row > 0 && bit != dataset.bits_at(row - 1)[j] {
                toggles += 1;
            }
        }
        loads.push(LoadActivity {
            tau: config.network.loads[j].tau,
            toggles,
            on_fraction: ones as f64 / dataset.len() as f64,
        });
    }
    Ok(SimulateSummary {
        rows: dataset.len(),
        i_max: dataset.i_max,
        dataset_path,
        loads,
        fixed_point_hit: schedule.fixed_point_hit(),
    })
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub vectors: usize,
    pub width: f64,
    pub i_max: f64,
    pub monitored_index: usize,
    pub final_train_mse: f64,
    pub model_path: PathBuf,
    pub trace_path: PathBuf,
}

fn training_set_from_dataset(
    config: &PipelineConfig,
    series: &crate::circuit::SampledSeries,
) -> Result<(TrainingSet, EncodingParams)> {
    let n_train = config.dataset.n_train;
    if series.num_loads() != config.network.loads.len() {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} switch columns, the configuration describes {} loads",
            series.num_loads(),
            config.network.loads.len()
        )));
    }
    if series.len() < n_train {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} rows, training needs the first {n_train}",
            series.len()
        )));
    }
    // The target grid is frozen from the training segment alone; validation
    // rows must not leak into it.
    let i_max = series.i_rms[..n_train]
        .iter()
        .fold(0.0f64, |a, &b| a.max(b));
    let params = EncodingParams::new(i_max, series.num_loads())?;
    let set = build_advance_vectors(series, config.regression.d, 0..n_train, &params)?;
    Ok((set, params))
}

/// Derives every stochastic choice (width subsample, monitored weight) from
/// the orbit seed so a configuration pins the whole pipeline.
fn derived_seed(config: &PipelineConfig) -> u64 {
    config.network.seed.to_bits()
}

/// Trains a kernel Adaline on the first `n_train` dataset rows and writes
/// the model file and the per-epoch trace.
pub fn cmd_train(config: &PipelineConfig, base: &Path) -> Result<TrainSummary> {
    config.validate()?;
    let series = files::read_dataset_csv(&resolve(base, &config.paths.dataset_csv))?;
    let (data, _) = training_set_from_dataset(config, &series)?;
    let seed = derived_seed(config);
    let width = match config.regression.p {
        KernelWidth::Fixed(p) => p,
        KernelWidth::Auto => median_heuristic_width(&data.vectors, WIDTH_SUBSAMPLE, seed)?,
    };
    let outcome = train_kernel_adaline(
        &data,
        &TrainOptions {
            width,
            eta: config.regression.eta,
            epochs: config.regression.epochs,
            seed,
        },
    )?;
    let model_path = resolve(base, &config.paths.model_file);
    let trace_path = resolve(base, &config.paths.trace_csv);
    files::write_model(&model_path, &outcome.model)?;
    files::write_trace_csv(&trace_path, &outcome.trace, outcome.monitored_index)?;
    Ok(TrainSummary {
        vectors: data.vectors.len(),
        width,
        i_max: outcome.model.i_max,
        monitored_index: outcome.monitored_index,
        final_train_mse: outcome.trace.last().expect("at least one epoch").train_mse,
        model_path,
        trace_path,
    })
}

/// Mean and population variance (the 1/N normalization).
pub fn population_variance(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput("variance input"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok((mean, var))
}

/// Everything the evaluation step measures.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub e_train: f64,
    pub e_valid: f64,
    /// `e_valid` over the population variance of the validation targets.
    pub normalized_e_valid: f64,
    /// Fraction of validation windows whose decoded joint state matches the
    /// truth exactly.
    pub exact_state_accuracy: f64,
    /// Per-load fraction of correctly decoded bits on the validation
    /// segment, load 1 first.
    pub per_load_bit_accuracy: Vec<f64>,
    pub train_vectors: usize,
    pub valid_vectors: usize,
    pub model_i_max: f64,
    /// The configuration that produced the numbers, echoed verbatim.
    pub config_echo: String,
}

impl EvaluationReport {
    /// Text form written to the report file.
    pub fn render(&self) -> String {
        let accuracies: Vec<String> = self
            .per_load_bit_accuracy
            .iter()
            .map(|a| a.to_string())
            .collect();
        format!(
            "E_train: {}\nE_valid: {}\nnormalized_E_valid: {}\nexact_state_accuracy: {}\n\
             per_load_bit_accuracy: {}\ntrain_vectors: {}\nvalid_vectors: {}\nmodel_i_max: {}\n\
             arithmetic: {}\n\nconfiguration:\n{}",
            self.e_train,
            self.e_valid,
            self.normalized_e_valid,
            self.exact_state_accuracy,
            accuracies.join(","),
            self.train_vectors,
            self.valid_vectors,
            self.model_i_max,
            crate::kernel::ARITHMETIC_NOTE,
            self.config_echo,
        )
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub report: EvaluationReport,
    pub report_path: PathBuf,
    pub predictions_path: PathBuf,
}

/// Evaluates the trained model on the training and validation segments,
/// writes the per-row prediction dump and the report.
pub fn cmd_eval(config: &PipelineConfig, base: &Path) -> Result<EvalOutput> {
    config.validate()?;
    let series = files::read_dataset_csv(&resolve(base, &config.paths.dataset_csv))?;
    let model = files::read_model(&resolve(base, &config.paths.model_file))?;
    if model.d != config.regression.d {
        return Err(Error::InvalidConfig {
            field: "regression.d".into(),
            message: format!(
                "model was trained with d = {}, configuration says {}",
                model.d, config.regression.d
            ),
        });
    }
    if model.num_loads != series.num_loads() {
        return Err(Error::InvalidArgument(format!(
            "model describes {} loads, dataset has {}",
            model.num_loads,
            series.num_loads()
        )));
    }
    let n_train = config.dataset.n_train;
    let n_valid = config.dataset.n_valid;
    if series.len() < n_train + n_valid {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} rows, evaluation needs {}",
            series.len(),
            n_train + n_valid
        )));
    }
    let params = model.encoding_params()?;
    let train_set = build_advance_vectors(&series, model.d, 0..n_train, &params)?;
    let valid_set = build_advance_vectors(&series, model.d, n_train..n_train + n_valid, &params)?;

    let mut rows = Vec::with_capacity(train_set.vectors.len() + valid_set.vectors.len());
    let mut eval_segment = |set: &TrainingSet, name: &str| -> Result<Vec<f64>> {
        let mut predictions = Vec::with_capacity(set.vectors.len());
        for (vector, &target) in set.vectors.iter().zip(&set.targets) {
            let s_pred = predict(&model, &vector.values)?;
            predictions.push(s_pred);
            rows.push(PredictionRow {
                segment: name.to_string(),
                t: series.times[vector.start],
                s_true: target,
                s_pred,
                true_bits: series.bits_at(vector.start).to_vec(),
                pred_bits: decode(s_pred, &params)?,
            });
        }
        Ok(predictions)
    };
    let pred_train = eval_segment(&train_set, "train")?;
    let pred_valid = eval_segment(&valid_set, "valid")?;

    let e_train = crate::kernel::mse(&pred_train, &train_set.targets)?;
    let e_valid = crate::kernel::mse(&pred_valid, &valid_set.targets)?;
    let (_, var_valid) = population_variance(&valid_set.targets)?;
    if !(var_valid > 0.0) {
        return Err(Error::InvalidArgument(
            "validation targets are constant; the normalized error is undefined".into(),
        ));
    }
    let normalized = e_valid / var_valid;

    let m = model.num_loads;
    let valid_rows = &rows[train_set.vectors.len()..];
    let mut per_load = vec![0usize; m];
    let mut exact = 0usize;
    for row in valid_rows {
        if row.pred_bits == row.true_bits {
            exact += 1;
        }
        for j in 0..m {
            if row.pred_bits[j] == row.true_bits[j] {
                per_load[j] += 1;
            }
        }
    }
    let denom = valid_rows.len() as f64;

    let report = EvaluationReport {
        e_train,
        e_valid,
        normalized_e_valid: normalized,
        exact_state_accuracy: exact as f64 / denom,
        per_load_bit_accuracy: per_load.iter().map(|&c| c as f64 / denom).collect(),
        train_vectors: train_set.vectors.len(),
        valid_vectors: valid_set.vectors.len(),
        model_i_max: model.i_max,
        config_echo: config.to_toml_string(),
    };
    let predictions_path = resolve(base, &config.paths.predictions_csv());
    files::write_predictions_csv(&predictions_path, &rows, m)?;
    let report_path = resolve(base, &config.paths.report_file);
    files::write_text(&report_path, &report.render())?;
    Ok(EvalOutput {
        report,
        report_path,
        predictions_path,
    })
}

#[derive(Debug, Clone)]
pub struct DisaggregateSummary {
    pub rows: usize,
    pub states_path: PathBuf,
}

/// Runs the trained model over a measured current series and writes the
/// decoded per-load states: one row per in-advance window, `N - d + 1` in
/// total.
pub fn cmd_disaggregate(
    config: &PipelineConfig,
    base: &Path,
    input: Option<&Path>,
    output: Option<&Path>,
) -> Result<DisaggregateSummary> {
    config.validate()?;
    let model = files::read_model(&resolve(base, &config.paths.model_file))?;
    let input_path = match input {
        Some(p) => resolve(base, p),
        None => resolve(base, &config.paths.dataset_csv),
    };
    let (times, currents) = files::read_current_csv(&input_path)?;
    if currents.len() < model.d {
        return Err(Error::InvalidArgument(format!(
            "input series has {} samples, an in-advance window needs {}",
            currents.len(),
            model.d
        )));
    }
    let params = model.encoding_params()?;
    let count = currents.len() - model.d + 1;
    let mut out_times = Vec::with_capacity(count);
    let mut out_bits = Vec::with_capacity(count);
    for j in 0..count {
        let s = predict(&model, &currents[j..j + model.d])?;
        out_bits.push(decode(s, &params)?);
        out_times.push(times.as_ref().map_or(j as f64, |ts| ts[j]));
    }
    let states_path = match output {
        Some(p) => resolve(base, p),
        None => resolve(base, &config.paths.states_csv()),
    };
    files::write_states_csv(&states_path, &out_times, &out_bits, model.num_loads)?;
    Ok(DisaggregateSummary {
        rows: count,
        states_path,
    })
}

#[derive(Debug, Clone)]
pub struct RunAllSummary {
    pub simulate: SimulateSummary,
    pub train: TrainSummary,
    pub eval: EvalOutput,
}

/// The whole reproduction: simulate, train, evaluate.
pub fn run_all(config: &PipelineConfig, base: &Path) -> Result<RunAllSummary> {
    let simulate = cmd_simulate(config, base)?;
    let train = cmd_train(config, base)?;
    let eval = cmd_eval(config, base)?;
    Ok(RunAllSummary {
        simulate,
        train,
        eval,
    })
}
