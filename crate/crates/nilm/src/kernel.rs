//! Gaussian kernel-Adaline regression on in-advance vectors.
//!
//! The regressor learns the map from a short stretch of *future* RMS current
//! samples to the joint switch state at the stretch's first index: sample
//! index j pairs the vector `(i_j, .., i_{j+d-1})` with the code `s_j`. The
//! model is a linear Adaline in the feature space of a Gaussian kernel, so a
//! prediction is a weighted sum of kernel evaluations against the stored
//! training vectors plus a bias.
//!
//! Training is least-mean-squares in that feature space: visit the training
//! samples in index order, compute the residual against the current weights,
//! and bump the visited sample's weight and the bias by `eta * residual`.
//! Since `k(x, x) = 1` the per-visit feature norm is exactly 2, and rates
//! below 1 keep each correction contractive.

use rand::seq::index::sample as index_sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::SampledSeries;
use crate::encoding::{encode, EncodingParams};
use crate::error::{Error, Result};

/// Note stored in every model file describing how targets were built.
pub const ENCODING_NOTE: &str =
    "targets are joint switch states encoded as (i_max / M) * sum_k 2^(k-1) b_k; \
     i_max is the peak RMS current of the training segment";

/// Floating-point format tag recorded in every emitted file.
pub const ARITHMETIC_NOTE: &str = "IEEE-754 binary64";

/// One in-advance vector: `d` consecutive RMS samples starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvanceVector {
    /// Absolute row index of the first sample in the source series.
    pub start: usize,
    pub values: Vec<f64>,
}

/// Training pairs drawn from one segment of a measured series.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub vectors: Vec<AdvanceVector>,
    /// Encoded joint state at each vector's first index.
    pub targets: Vec<f64>,
    /// Scaling the targets were encoded with.
    pub encoding: EncodingParams,
}

/// Builds all in-advance vectors that fit inside `segment`: rows
/// `segment.start + k` for `k = 0 .. len - d`, each paired with the joint
/// state at its own first row. Vectors never reach past `segment.end`, so
/// train and validation sets built from adjacent segments share no samples.
pub fn build_advance_vectors(
    series: &SampledSeries,
    d: usize,
    segment: std::ops::Range<usize>,
    params: &EncodingParams,
) -> Result<TrainingSet> {
    if d == 0 {
        return Err(Error::InvalidArgument("window length d must be at least 1".into()));
    }
    if segment.start > segment.end || segment.end > series.len() {
        return Err(Error::InvalidArgument(format!(
            "segment {segment:?} out of bounds for a series of {} rows",
            series.len()
        )));
    }
    let len = segment.end - segment.start;
    if len < d {
        return Err(Error::InvalidArgument(format!(
            "segment of {len} rows cannot hold an in-advance vector of length {d}"
        )));
    }
    let mut vectors = Vec::with_capacity(len - d + 1);
    let mut targets = Vec::with_capacity(len - d + 1);
    for start in segment.start..=(segment.end - d) {
        vectors.push(AdvanceVector {
            start,
            values: series.i_rms[start..start + d].to_vec(),
        });
        targets.push(encode(series.bits_at(start), params)?);
    }
    Ok(TrainingSet {
        vectors,
        targets,
        encoding: *params,
    })
}

/// Gaussian kernel `exp(-|u - v|^2 / (2 p^2))`.
///
/// The squared distance is a sum of squared coordinate differences, and
/// `(a - b)^2` and `(b - a)^2` are the same floating-point number, so the
/// kernel is symmetric to the last bit.
pub fn gaussian_kernel(u: &[f64], v: &[f64], p: f64) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kernel width p must be positive and finite, got {p}"
        )));
    }
    let mut sq = 0.0;
    for (a, b) in u.iter().zip(v) {
        let diff = a - b;
        sq += diff * diff;
    }
    Ok((-sq / (2.0 * p * p)).exp())
}

/// Dense symmetric Gram matrix of kernel values between training vectors.
/// The upper triangle is computed and mirrored; the diagonal is exactly 1.
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }
}

pub fn gram_matrix(vectors: &[AdvanceVector], p: f64) -> Result<GramMatrix> {
    let n = vectors.len();
    if n == 0 {
        return Err(Error::EmptyInput("training vectors"));
    }
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        data[j * n + j] = 1.0;
        for k in (j + 1)..n {
            let v = gaussian_kernel(&vectors[j].values, &vectors[k].values, p)?;
            data[j * n + k] = v;
            data[k * n + j] = v;
        }
    }
    Ok(GramMatrix { n, data })
}

/// One stored kernel term: a training vector and its learned weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTerm {
    pub start: usize,
    pub values: Vec<f64>,
    pub weight: f64,
}

/// A trained kernel expansion plus everything needed to reuse it: kernel
/// width, the target-grid scaling, and the settings the model was trained
/// with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelModel {
    /// In-advance vector length.
    pub d: usize,
    /// Kernel width p.
    pub width: f64,
    pub eta: f64,
    pub epochs: usize,
    /// Peak RMS current of the training segment; fixes the target grid.
    pub i_max: f64,
    pub num_loads: usize,
    pub encoding_note: String,
    pub arithmetic: String,
    /// Seed that picked the monitored weight (and the width subsample when
    /// the width was chosen automatically).
    pub seed: u64,
    /// Weight index reported in the training trace.
    pub monitored_index: usize,
    pub bias: f64,
    pub terms: Vec<ModelTerm>,
}

impl KernelModel {
    pub fn encoding_params(&self) -> Result<EncodingParams> {
        EncodingParams::new(self.i_max, self.num_loads)
    }
}

/// Kernel expansion value at `vector`: `sum_k w_k k(vector, v_k) + bias`.
pub fn predict(model: &KernelModel, vector: &[f64]) -> Result<f64> {
    if vector.len() != model.d {
        return Err(Error::DimensionMismatch {
            left: vector.len(),
            right: model.d,
        });
    }
    let mut acc = model.bias;
    for term in &model.terms {
        acc += term.weight * gaussian_kernel(vector, &term.values, model.width)?;
    }
    Ok(acc)
}

/// Mean squared error between two equal-length series.
pub fn mse(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("error series"));
    }
    let sum: f64 = predictions
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// Knobs for [`train_kernel_adaline`].
#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    /// Kernel width p.
    pub width: f64,
    /// Learning rate; the update is contractive for rates below 1.
    pub eta: f64,
    pub epochs: usize,
    /// Seeds the monitored-weight draw. Sample visits are in index order.
    pub seed: u64,
}

/// One row of the per-epoch training trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    /// Full-pass MSE over the training set at the epoch's end.
    pub train_mse: f64,
    pub bias: f64,
    /// Weight of the monitored training sample.
    pub monitored_weight: f64,
}

/// A trained model plus its per-epoch history.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: KernelModel,
    pub trace: Vec<TraceRow>,
    pub monitored_index: usize,
}

fn training_mse(gram: &GramMatrix, weights: &[f64], bias: f64, targets: &[f64]) -> f64 {
    let n = weights.len();
    let mut sum = 0.0;
    for j in 0..n {
        let row = gram.row(j);
        let mut pred = bias;
        for k in 0..n {
            pred += weights[k] * row[k];
        }
        let e = targets[j] - pred;
        sum += e * e;
    }
    sum / n as f64
}

/// Trains the kernel Adaline by cycling through the training set in index
/// order for `epochs` passes. Kernel values between training vectors are
/// precomputed once. Divergence (a non-finite residual) aborts with the
/// offending epoch.
pub fn train_kernel_adaline(data: &TrainingSet, opts: &TrainOptions) -> Result<TrainOutcome> {
    let n = data.vectors.len();
    if n == 0 {
        return Err(Error::EmptyInput("training set"));
    }
    if data.targets.len() != n {
        return Err(Error::DimensionMismatch {
            left: data.targets.len(),
            right: n,
        });
    }
    if !(opts.eta > 0.0) || !opts.eta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "learning rate eta must be positive and finite, got {}",
            opts.eta
        )));
    }
    if opts.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be at least 1".into()));
    }
    let gram = gram_matrix(&data.vectors, opts.width)?;
    let monitored_index = ChaCha8Rng::seed_from_u64(opts.seed).random_range(0..n);

    let mut weights = vec![0.0f64; n];
    let mut bias = 0.0f64;
    let mut trace = Vec::with_capacity(opts.epochs);
    for epoch in 1..=opts.epochs {
        for j in 0..n {
            let row = gram.row(j);
            let mut pred = bias;
            for k in 0..n {
                pred += weights[k] * row[k];
            }
            let residual = data.targets[j] - pred;
            if !residual.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            weights[j] += opts.eta * residual;
            bias += opts.eta * residual;
        }
        trace.push(TraceRow {
            epoch,
            train_mse: training_mse(&gram, &weights, bias, &data.targets),
            bias,
            monitored_weight: weights[monitored_index],
        });
    }

    let terms = data
        .vectors
        .iter()
        .zip(&weights)
        .map(|(v, &w)| ModelTerm {
            start: v.start,
            values: v.values.clone(),
            weight: w,
        })
        .collect();
    let model = KernelModel {
        d: data.vectors[0].values.len(),
        width: opts.width,
        eta: opts.eta,
        epochs: opts.epochs,
        i_max: data.encoding.i_max(),
        num_loads: data.encoding.num_loads(),
        encoding_note: ENCODING_NOTE.to_string(),
        arithmetic: ARITHMETIC_NOTE.to_string(),
        seed: opts.seed,
        monitored_index,
        bias,
        terms,
    };
    Ok(TrainOutcome {
        model,
        trace,
        monitored_index,
    })
}

/// Median pairwise distance over a seeded subsample of at most `limit`
/// vectors; the usual starting point for the kernel width.
pub fn median_heuristic_width(
    vectors: &[AdvanceVector],
    limit: usize,
    seed: u64,
) -> Result<f64> {
    if vectors.len() < 2 {
        return Err(Error::InvalidArgument(
            "median width heuristic needs at least two vectors".into(),
        ));
    }
    let take = limit.max(2).min(vectors.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index_sample(&mut rng, vectors.len(), take).into_vec();
    picked.sort_unstable();

    let mut dists = Vec::with_capacity(take * (take - 1) / 2);
    for a in 0..picked.len() {
        for b in (a + 1)..picked.len() {
            let u = &vectors[picked[a]].values;
            let v = &vectors[picked[b]].values;
            let sq: f64 = u
                .iter()
                .zip(v)
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            dists.push(sq.sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let median = dists[dists.len() / 2];
    if !(median > 0.0) {
        return Err(Error::InvalidArgument(
            "median pairwise distance is zero (vectors are degenerate); set the kernel width explicitly".into(),
        ));
    }
    Ok(median)
}
