//! Per-load state recovery from an aggregate current trace.
//!
//! Runs a shortened pipeline (simulate, train) to obtain a model, then feeds
//! the model a current series it has never seen and prints the recovered
//! switch states next to the truth, which the model was never shown.

use std::f64::consts::PI;

use nilm::circuit::{LoadSpec, NetworkConfig};
use nilm::config::{DatasetConfig, KernelWidth, PathsConfig, RegressionConfig};
use nilm::pipeline::{cmd_disaggregate, cmd_simulate, cmd_train};
use nilm::PipelineConfig;

fn main() -> nilm::Result<()> {
    let dir = tempfile::tempdir()?;
    let base = dir.path();

    // A shortened run: two loads, 300 dataset rows, a few seconds simulated.
    let angular_frequency = 120.0 * PI;
    let period = 2.0 * PI / angular_frequency;
    let w2 = angular_frequency * angular_frequency;
    let window_steps = 4000usize;
    let dt = period / 8000.0;
    let sample_stride = 4000usize;
    let n_samples = 300usize;
    let discard = window_steps.div_ceil(sample_stride);
    let last_step = (window_steps - 1) + (discard + n_samples - 1) * sample_stride;

    let config = PipelineConfig {
        network: NetworkConfig {
            source_resistance: 0.5,
            amplitude: 170.0,
            angular_frequency,
            standby_constant: 100.0,
            seed: 0.123456789,
            per_load_seeds: None,
            dt,
            t_end: last_step as f64 * dt,
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
            ],
        },
        dataset: DatasetConfig {
            n_samples,
            n_train: 220,
            n_valid: 80,
        },
        regression: RegressionConfig {
            d: 2,
            p: KernelWidth::Fixed(0.2),
            eta: 0.3,
            epochs: 120,
        },
        paths: PathsConfig {
            dataset_csv: "dataset.csv".into(),
            model_file: "model.json".into(),
            report_file: "report.txt".into(),
            trace_csv: "trace.csv".into(),
            predictions_csv: None,
            states_csv: None,
        },
    };
    config.validate()?;

    let sim = cmd_simulate(&config, base)?;
    println!("simulated {} rows, i_max {:.3}", sim.rows, sim.i_max);
    let train = cmd_train(&config, base)?;
    println!(
        "trained {} two-sample windows to MSE {:.3e}",
        train.vectors, train.final_train_mse
    );

    // Disaggregate the dataset itself as if it were a fresh meter trace: the
    // reader only consumes the time and current columns.
    let summary = cmd_disaggregate(&config, base, None, None)?;
    println!("decoded {} windows -> {}\n", summary.rows, summary.states_path.display());

    // Compare a stretch of recovered states against the simulator's truth.
    let truth = std::fs::read_to_string(base.join("dataset.csv"))?;
    let decoded = std::fs::read_to_string(&summary.states_path)?;
    let truth_rows: Vec<&str> = truth.lines().skip(1).collect();
    let decoded_rows: Vec<&str> = decoded.lines().skip(1).collect();
    println!("   t [s]   truth   decoded");
    let mut agree = 0usize;
    for (k, (t_row, d_row)) in truth_rows.iter().zip(&decoded_rows).enumerate() {
        let truth_bits: Vec<&str> = t_row.split(',').skip(2).collect();
        let decoded_bits: Vec<&str> = d_row.split(',').skip(1).collect();
        if truth_bits == decoded_bits {
            agree += 1;
        }
        if (140..152).contains(&k) {
            let t: f64 = t_row.split(',').next().unwrap().parse().unwrap();
            let show = |bits: &[&str]| -> String {
                bits.iter().map(|&b| if b == "1" { '#' } else { '.' }).collect()
            };
            println!(
                "  {t:6.3}   {}      {}",
                show(&truth_bits),
                show(&decoded_bits)
            );
        }
    }
    println!(
        "\nexact joint-state agreement: {agree} / {} windows",
        decoded_rows.len()
    );
    Ok(())
}
