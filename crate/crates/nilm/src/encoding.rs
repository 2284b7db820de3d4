//! Joint switch-state codec.
//!
//! The ON/OFF pattern of M loads is folded into one real number so a scalar
//! regressor can learn it: bit k (load k ON) contributes `2^(k-1)`, and the
//! integer code is scaled by `i_max / M`, placing all 2^M states on a uniform
//! grid whose top rung is near the peak observed current. Decoding snaps a
//! real value back to the nearest grid point.

use crate::error::{Error, Result};

/// Hard ceiling on decodable network sizes; decoding enumerates 2^M codes.
pub const MAX_DECODE_LOADS: usize = 24;

/// Scaling for the joint-state grid: `i_max` is frozen from the training
/// segment of a measured series, `num_loads` is M.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingParams {
    i_max: f64,
    num_loads: usize,
}

impl EncodingParams {
    pub fn new(i_max: f64, num_loads: usize) -> Result<Self> {
        if !i_max.is_finite() || i_max < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "i_max must be finite and non-negative, got {i_max}"
            )));
        }
        if num_loads == 0 {
            return Err(Error::EmptyInput("load count"));
        }
        Ok(EncodingParams { i_max, num_loads })
    }

    pub fn i_max(&self) -> f64 {
        self.i_max
    }

    pub fn num_loads(&self) -> usize {
        self.num_loads
    }

    /// Grid spacing between adjacent integer codes, `i_max / M`.
    pub fn spacing(&self) -> f64 {
        self.i_max / self.num_loads as f64
    }
}

/// Maps a two-level switch value to a bit: 1 stays 1 (ON), the standby
/// constant becomes 0 (OFF). Both levels are produced by exact assignment,
/// never arithmetic, so comparing with `==` is sound.
pub fn bit_from_switch(value: f64, standby: f64) -> Result<u8> {
    if value == 1.0 {
        Ok(1)
    } else if value == standby {
        Ok(0)
    } else {
        Err(Error::InvalidSwitchValue { value, standby })
    }
}

fn code_of_bits(bits: &[u8]) -> Result<u64> {
    let mut code = 0u64;
    for (k, &b) in bits.iter().enumerate() {
        match b {
            0 => {}
            1 => code |= 1 << k,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "switch bit must be 0 or 1, got {b}"
                )))
            }
        }
    }
    Ok(code)
}

/// Scalar joint-state code `(i_max / M) * sum_k 2^(k-1) b_k` for the M switch
/// bits, load 1 in the lowest position.
pub fn encode(bits: &[u8], params: &EncodingParams) -> Result<f64> {
    if bits.len() != params.num_loads {
        return Err(Error::DimensionMismatch {
            left: bits.len(),
            right: params.num_loads,
        });
    }
    let code = code_of_bits(bits)?;
    Ok(params.spacing() * code as f64)
}

fn bits_of_code(code: u64, m: usize) -> Vec<u8> {
    (0..m).map(|k| ((code >> k) & 1) as u8).collect()
}

/// Nearest-grid-point inverse of [`encode`] for any real input, ties going to
/// the smaller integer code. Out-of-range inputs clamp to the end codes, and
/// a degenerate `i_max = 0` grid decodes everything to all-OFF.
pub fn decode(s: f64, params: &EncodingParams) -> Result<Vec<u8>> {
    let m = params.num_loads;
    if m > MAX_DECODE_LOADS {
        return Err(Error::TooManyLoadsToDecode(m));
    }
    let spacing = params.spacing();
    let mut best_code = 0u64;
    let mut best_dist = f64::INFINITY;
    for code in 0..(1u64 << m) {
        let dist = (spacing * code as f64 - s).abs();
        if dist < best_dist {
            best_dist = dist;
            best_code = code;
        }
    }
    Ok(bits_of_code(best_code, m))
}
