//! Gaussian kernel-Adaline training on a planted model.
//!
//! Generates targets from a known kernel expansion, then refits them from
//! scratch and watches the per-epoch error trace collapse. Also shows the
//! median-heuristic width, and what divergence looks like when the step size
//! is pushed past stability.

use nilm::kernel::{
    build_advance_vectors, gaussian_kernel, median_heuristic_width, predict,
    train_kernel_adaline, TrainingSet, TrainOptions,
};
use nilm::circuit::SampledSeries;
use nilm::encoding::EncodingParams;
use nilm::Error;

fn main() -> nilm::Result<()> {
    // A synthetic RMS series: smooth wave plus plateau jumps, enough rows
    // for 60 four-sample advance vectors.
    let n = 63;
    let times: Vec<f64> = (0..n).map(|k| k as f64 * 0.1).collect();
    let i_rms: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 * 0.1;
            2.0 + (t * 0.9).sin() + if k % 17 < 8 { 1.5 } else { 0.0 }
        })
        .collect();
    let series = SampledSeries::from_parts(times, i_rms, 1, vec![0u8; n])?;
    let params = EncodingParams::new(series.i_max, 1)?;
    let d = 4;
    let base = build_advance_vectors(&series, d, 0..n, &params)?;
    println!("built {} advance vectors of length {d}", base.vectors.len());

    // Plant a model: targets come from a known 12-term expansion, so a
    // perfect fit exists inside the hypothesis class.
    let p = 1.0;
    let planted: Vec<(usize, f64)> = (0..12)
        .map(|k| (k * 5, if k % 2 == 0 { 1.5 } else { -0.8 }))
        .collect();
    let targets: Vec<f64> = base
        .vectors
        .iter()
        .map(|v| {
            let mut acc = 0.25;
            for &(idx, weight) in &planted {
                acc += weight * gaussian_kernel(&v.values, &base.vectors[idx].values, p).unwrap();
            }
            acc
        })
        .collect();

    let data = TrainingSet {
        vectors: base.vectors,
        targets,
        encoding: params,
    };

    let width = median_heuristic_width(&data.vectors, 200, 7)?;
    println!("median-heuristic width on these vectors: {width:.4} (planted width {p})");

    let opts = TrainOptions {
        width: p,
        eta: 0.05,
        epochs: 400,
        seed: 7,
    };
    let outcome = train_kernel_adaline(&data, &opts)?;
    let trace = &outcome.trace;
    println!("\nepoch   training MSE");
    for row in trace.iter().step_by(80).chain(trace.last()) {
        println!("{:5}   {:12.3e}", row.epoch, row.train_mse);
    }

    let refit = predict(&outcome.model, &data.vectors[3].values)?;
    println!(
        "\nrefit at vector 3: {refit:.6} vs planted target {:.6}",
        data.targets[3]
    );

    // The same fit with a reckless step size blows up fast, and the trainer
    // reports the epoch where the residual left the reals.
    let reckless = TrainOptions {
        width: p,
        eta: 5.0,
        epochs: 400,
        seed: 7,
    };
    match train_kernel_adaline(&data, &reckless) {
        Err(Error::Divergence { epoch }) => {
            println!("eta = 5.0 diverged at epoch {epoch}, as it should");
        }
        other => println!("unexpected outcome at eta = 5.0: {other:?}"),
    }
    Ok(())
}
