//! Chaotic on/off switching schedules.
//!
//! A logistic-map orbit at full chaos is binarized into a two-level signal:
//! orbit values in the lower half of the unit interval map to a large standby
//! constant (the load is OFF, leaving a high series resistance), values in the
//! upper half map to 1 (the load is ON). Each load reads the same binary
//! sequence through its own dwell time `tau`, so the joint switching pattern
//! is deterministic but aperiodic.

use crate::error::{Error, Result};

/// Orbit values this close to 0 or 0.75 are flagged: both points are fixed
/// under the map, and an orbit that lands there numerically stays there.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;

/// Seeds rejected outright: 0, 0.5 and 1 collapse to the fixed point at 0
/// within two steps, 0.25 maps to 0.75, and 0.75 stays put.
pub const DEGENERATE_SEEDS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// One iteration of the fully chaotic logistic map, `4 x (1 - x)`.
///
/// The map sends the unit interval onto itself, so iterating never needs a
/// re-check; only external inputs are validated.
pub fn logistic_step(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::LogisticDomain(x));
    }
    Ok(step_unchecked(x))
}

#[inline]
fn step_unchecked(x: f64) -> f64 {
    // In binary64 the product 4 x (1 - x) cannot escape [0, 1]: both factors
    // are non-negative, and near the maximum x = 0.5 the operands are exact
    // (Sterbenz) so the result rounds to at most 1.0.
    4.0 * x * (1.0 - x)
}

/// Two-level quantization of an orbit value: the standby constant for
/// `x <= 1/2` (boundary included), 1 otherwise.
pub fn binarize(x: f64, standby: f64) -> f64 {
    if x <= 0.5 {
        standby
    } else {
        1.0
    }
}

fn validate_standby(standby: f64) -> Result<()> {
    if !(standby > 1.0) || !standby.is_finite() {
        return Err(Error::InvalidStandbyConstant(standby));
    }
    Ok(())
}

/// Checks a seed for use with [`generate_sequence`]: strictly inside (0, 1)
/// and away from the degenerate points.
pub fn validate_seed(seed: f64) -> Result<()> {
    if !(seed > 0.0 && seed < 1.0) {
        return Err(Error::SeedOutOfRange(seed));
    }
    if DEGENERATE_SEEDS.contains(&seed) {
        return Err(Error::DegenerateSeed(seed));
    }
    Ok(())
}

/// Step at which an orbit first came within [`FIXED_POINT_TOLERANCE`] of a
/// fixed point. Such an orbit is numerically stuck from there on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointHit {
    /// Index into the generated sequence (0 is the seed itself).
    pub step: usize,
    /// The offending orbit value.
    pub value: f64,
}

/// A binarized logistic orbit: every element is either 1 (ON) or the standby
/// constant (OFF).
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySequence {
    values: Vec<f64>,
    standby: f64,
    fixed_point_hit: Option<FixedPointHit>,
}

impl BinarySequence {
    /// Wraps an explicit two-level signal, validating every element.
    /// Useful for forced all-ON or all-OFF schedules in tests and
    /// calibration runs.
    pub fn from_values(values: Vec<f64>, standby: f64) -> Result<Self> {
        validate_standby(standby)?;
        if values.is_empty() {
            return Err(Error::EmptyInput("switch sequence"));
        }
        for &v in &values {
            if v != 1.0 && v != standby {
                return Err(Error::InvalidSwitchValue { value: v, standby });
            }
        }
        Ok(BinarySequence {
            values,
            standby,
            fixed_point_hit: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn standby(&self) -> f64 {
        self.standby
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Set when the generating orbit grazed a fixed point; the tail of such a
    /// sequence is constant and the seed should be changed.
    pub fn fixed_point_hit(&self) -> Option<FixedPointHit> {
        self.fixed_point_hit
    }

    /// Fraction of ON entries.
    pub fn on_fraction(&self) -> f64 {
        let ones = self.values.iter().filter(|&&v| v == 1.0).count();
        ones as f64 / self.values.len() as f64
    }
}

/// Iterates the logistic map from `seed` and binarizes each orbit value,
/// seed included, into a sequence of `length` switch levels.
pub fn generate_sequence(seed: f64, length: usize, standby: f64) -> Result<BinarySequence> {
    validate_standby(standby)?;
    if length == 0 {
        return Err(Error::InvalidArgument(
            "sequence length must be at least 1".into(),
        ));
    }
    validate_seed(seed)?;

    let mut values = Vec::with_capacity(length);
    let mut hit = None;
    let mut x = seed;
    for step in 0..length {
        if hit.is_none() && (x.abs() <= FIXED_POINT_TOLERANCE || (x - 0.75).abs() <= FIXED_POINT_TOLERANCE)
        {
            hit = Some(FixedPointHit { step, value: x });
        }
        values.push(binarize(x, standby));
        if step + 1 < length {
            x = step_unchecked(x);
        }
    }
    Ok(BinarySequence {
        values,
        standby,
        fixed_point_hit: hit,
    })
}

/// Switching schedule for a whole network: one binary sequence shared by all
/// loads (the usual setup) or one per load, each read through that load's
/// dwell time.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchSchedule {
    sequences: Vec<BinarySequence>,
    taus: Vec<f64>,
}

fn validate_taus(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::EmptyInput("dwell time list"));
    }
    for &tau in taus {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dwell time tau must be positive and finite, got {tau}"
            )));
        }
    }
    Ok(())
}

impl SwitchSchedule {
    /// All loads read the same sequence; load `j` switches every `taus[j]`
    /// seconds.
    pub fn shared(sequence: BinarySequence, taus: Vec<f64>) -> Result<Self> {
        validate_taus(&taus)?;
        Ok(SwitchSchedule {
            sequences: vec![sequence],
            taus,
        })
    }

    /// Independent sequences, one per load. All must share the same standby
    /// constant.
    pub fn per_load(sequences: Vec<BinarySequence>, taus: Vec<f64>) -> Result<Self> {
        validate_taus(&taus)?;
        if sequences.len() != taus.len() {
            return Err(Error::DimensionMismatch {
                left: sequences.len(),
                right: taus.len(),
            });
        }
        let standby = sequences[0].standby();
        for seq in &sequences {
            if seq.standby() != standby {
                return Err(Error::InvalidArgument(
                    "all per-load sequences must share one standby constant".into(),
                ));
            }
        }
        Ok(SwitchSchedule { sequences, taus })
    }

    pub fn num_loads(&self) -> usize {
        self.taus.len()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn standby(&self) -> f64 {
        self.sequences[0].standby()
    }

    fn sequence_for(&self, load: usize) -> &BinarySequence {
        if self.sequences.len() == 1 {
            &self.sequences[0]
        } else {
            &self.sequences[load]
        }
    }

    /// First fixed-point graze across the underlying sequences, if any.
    pub fn fixed_point_hit(&self) -> Option<FixedPointHit> {
        self.sequences.iter().find_map(|s| s.fixed_point_hit())
    }

    /// Value of load `j`'s switch function at time `t`: element
    /// `floor(t / tau_j)` of its sequence. The switch level is constant on
    /// each dwell interval `[n tau_j, (n + 1) tau_j)`.
    pub fn switch_value(&self, load: usize, t: f64) -> Result<f64> {
        let tau = *self
            .taus
            .get(load)
            .ok_or(Error::LoadIndexOutOfRange {
                index: load,
                loads: self.taus.len(),
            })?;
        if !(t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let seq = self.sequence_for(load);
        let idx = (t / tau).floor();
        if idx >= seq.len() as f64 {
            return Err(Error::SequenceExhausted {
                load,
                needed: idx.min(usize::MAX as f64) as usize,
                available: seq.len(),
            });
        }
        Ok(seq.values()[idx as usize])
    }

    /// Errors unless every load's sequence covers times up to and including
    /// `t_end`.
    pub fn check_covers(&self, t_end: f64) -> Result<()> {
        for j in 0..self.num_loads() {
            self.switch_value(j, t_end)?;
        }
        Ok(())
    }
}
