//! On-disk artifact formats.
//!
//! Everything is plain UTF-8 with `\n` line endings and a mandatory header
//! row. Floating-point values are written with Rust's shortest round-trip
//! formatting, so re-reading a file reproduces the exact bit pattern and
//! rerunning a deterministic pipeline reproduces the exact bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::circuit::SampledSeries;
use crate::error::{Error, Result};
use crate::kernel::{KernelModel, TraceRow};

fn schema_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::CsvSchema(format!("{}: {}", path.display(), detail.into()))
}

fn parse_field(path: &Path, line: usize, what: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse()
        .map_err(|_| schema_err(path, format!("line {line}: {what} value '{raw}' is not a number")))
}

fn parse_bit(path: &Path, line: usize, raw: &str) -> Result<u8> {
    match raw.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(schema_err(
            path,
            format!("line {line}: switch bit must be 0 or 1, got '{other}'"),
        )),
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path)?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file))
}

/// Writes a measured series as `t,i_rms,S1,..,SM`.
pub fn write_dataset_csv(path: &Path, series: &SampledSeries) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "t,i_rms")?;
    for j in 1..=series.num_loads() {
        write!(out, ",S{j}")?;
    }
    writeln!(out)?;
    for row in 0..series.len() {
        write!(out, "{},{}", series.times[row], series.i_rms[row])?;
        for &b in series.bits_at(row) {
            write!(out, ",{b}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset_csv`], restoring every float
/// bit for bit.
pub fn read_dataset_csv(path: &Path) -> Result<SampledSeries> {
    let mut rdr = open_csv(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| schema_err(path, e.to_string()))?
        .clone();
    if headers.len() < 3 || &headers[0] != "t" || &headers[1] != "i_rms" {
        return Err(schema_err(
            path,
            "expected header t,i_rms,S1,..,SM".to_string(),
        ));
    }
    let num_loads = headers.len() - 2;
    for j in 1..=num_loads {
        if &headers[1 + j] != format!("S{j}").as_str() {
            return Err(schema_err(
                path,
                format!("switch column {} must be named S{j}", 1 + j),
            ));
        }
    }

    let mut times = Vec::new();
    let mut i_rms = Vec::new();
    let mut bits = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(schema_err(
                path,
                format!("line {line}: expected {} fields, got {}", headers.len(), record.len()),
            ));
        }
        times.push(parse_field(path, line, "t", &record[0])?);
        i_rms.push(parse_field(path, line, "i_rms", &record[1])?);
        for j in 0..num_loads {
            bits.push(parse_bit(path, line, &record[2 + j])?);
        }
    }
    if times.is_empty() {
        return Err(schema_err(path, "no data rows".to_string()));
    }
    SampledSeries::from_parts(times, i_rms, num_loads, bits)
}

/// Writes the per-epoch training trace. The monitored weight's index is
/// recorded on a leading comment line so the column is interpretable on its
/// own.
pub fn write_trace_csv(path: &Path, trace: &[TraceRow], monitored_index: usize) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# monitored_index={monitored_index}")?;
    writeln!(out, "epoch,train_mse,w0,w_r")?;
    for row in trace {
        writeln!(
            out,
            "{},{},{},{}",
            row.epoch, row.train_mse, row.bias, row.monitored_weight
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a trace file back: `(monitored_index, rows)`.
pub fn read_trace_csv(path: &Path) -> Result<(usize, Vec<TraceRow>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| schema_err(path, "empty trace file".to_string()))?;
    let monitored_index: usize = first
        .strip_prefix("# monitored_index=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| schema_err(path, "first line must be '# monitored_index=R'".to_string()))?;
    let (_, header) = lines
        .next()
        .ok_or_else(|| schema_err(path, "missing header".to_string()))?;
    if header != "epoch,train_mse,w0,w_r" {
        return Err(schema_err(path, "expected header epoch,train_mse,w0,w_r".to_string()));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(schema_err(path, format!("line {}: expected 4 fields", idx + 1)));
        }
        let epoch: usize = fields[0]
            .parse()
            .map_err(|_| schema_err(path, format!("line {}: bad epoch", idx + 1)))?;
        rows.push(TraceRow {
            epoch,
            train_mse: parse_field(path, idx + 1, "train_mse", fields[1])?,
            bias: parse_field(path, idx + 1, "w0", fields[2])?,
            monitored_weight: parse_field(path, idx + 1, "w_r", fields[3])?,
        });
    }
    Ok((monitored_index, rows))
}

/// Serializes a trained model as pretty-printed JSON.
pub fn write_model(path: &Path, model: &KernelModel) -> Result<()> {
    let mut text = serde_json::to_string_pretty(model)
        .map_err(|e| Error::ModelFormat(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a model file and checks its internal consistency.
pub fn read_model(path: &Path) -> Result<KernelModel> {
    let text = std::fs::read_to_string(path)?;
    let model: KernelModel = serde_json::from_str(&text)
        .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
    if model.d == 0 {
        return Err(Error::ModelFormat("vector length d must be at least 1".into()));
    }
    if !(model.width > 0.0) || !model.width.is_finite() {
        return Err(Error::ModelFormat(format!(
            "kernel width must be positive, got {}",
            model.width
        )));
    }
    if model.num_loads == 0 {
        return Err(Error::ModelFormat("model must describe at least one load".into()));
    }
    if model.terms.is_empty() {
        return Err(Error::ModelFormat("model holds no kernel terms".into()));
    }
    for (k, term) in model.terms.iter().enumerate() {
        if term.values.len() != model.d {
            return Err(Error::ModelFormat(format!(
                "term {k} has {} values, expected d = {}",
                term.values.len(),
                model.d
            )));
        }
    }
    if model.monitored_index >= model.terms.len() {
        return Err(Error::ModelFormat(format!(
            "monitored index {} out of range for {} terms",
            model.monitored_index,
            model.terms.len()
        )));
    }
    Ok(model)
}

/// One row of the evaluation dump: encoded truth and prediction plus the
/// true and decoded bit patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    /// "train" or "valid".
    pub segment: String,
    pub t: f64,
    pub s_true: f64,
    pub s_pred: f64,
    pub true_bits: Vec<u8>,
    pub pred_bits: Vec<u8>,
}

/// Writes evaluation rows as
/// `segment,t,s_true,s_pred,S1,..,SM,P1,..,PM` (S = true bits, P = decoded).
pub fn write_predictions_csv(path: &Path, rows: &[PredictionRow], num_loads: usize) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "segment,t,s_true,s_pred")?;
    for j in 1..=num_loads {
        write!(out, ",S{j}")?;
    }
    for j in 1..=num_loads {
        write!(out, ",P{j}")?;
    }
    writeln!(out)?;
    for row in rows {
        write!(out, "{},{},{},{}", row.segment, row.t, row.s_true, row.s_pred)?;
        for &b in &row.true_bits {
            write!(out, ",{b}")?;
        }
        for &b in &row.pred_bits {
            write!(out, ",{b}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an evaluation dump written by [`write_predictions_csv`].
pub fn read_predictions_csv(path: &Path) -> Result<Vec<PredictionRow>> {
    let mut rdr = open_csv(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| schema_err(path, e.to_string()))?
        .clone();
    if headers.len() < 6 || (headers.len() - 4) % 2 != 0 {
        return Err(schema_err(path, "expected segment,t,s_true,s_pred,S..,P..".to_string()));
    }
    let num_loads = (headers.len() - 4) / 2;
    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        let mut true_bits = Vec::with_capacity(num_loads);
        let mut pred_bits = Vec::with_capacity(num_loads);
        for j in 0..num_loads {
            true_bits.push(parse_bit(path, line, &record[4 + j])?);
            pred_bits.push(parse_bit(path, line, &record[4 + num_loads + j])?);
        }
        rows.push(PredictionRow {
            segment: record[0].to_string(),
            t: parse_field(path, line, "t", &record[1])?,
            s_true: parse_field(path, line, "s_true", &record[2])?,
            s_pred: parse_field(path, line, "s_pred", &record[3])?,
            true_bits,
            pred_bits,
        });
    }
    Ok(rows)
}

/// Extracts the RMS current column (and the time column when present) from
/// any CSV with named headers.
pub fn read_current_csv(path: &Path) -> Result<(Option<Vec<f64>>, Vec<f64>)> {
    let mut rdr = open_csv(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| schema_err(path, e.to_string()))?
        .clone();
    let i_col = headers
        .iter()
        .position(|h| h == "i_rms")
        .ok_or_else(|| schema_err(path, "input needs an i_rms column".to_string()))?;
    let t_col = headers.iter().position(|h| h == "t");

    let mut times = Vec::new();
    let mut currents = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| schema_err(path, e.to_string()))?;
        currents.push(parse_field(path, line, "i_rms", &record[i_col])?);
        if let Some(col) = t_col {
            times.push(parse_field(path, line, "t", &record[col])?);
        }
    }
    if currents.is_empty() {
        return Err(schema_err(path, "no data rows".to_string()));
    }
    Ok((t_col.map(|_| times), currents))
}

/// Writes decoded per-load states as `t,load_1,..,load_M`.
pub fn write_states_csv(
    path: &Path,
    times: &[f64],
    bit_rows: &[Vec<u8>],
    num_loads: usize,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "t")?;
    for j in 1..=num_loads {
        write!(out, ",load_{j}")?;
    }
    writeln!(out)?;
    for (t, bits) in times.iter().zip(bit_rows) {
        write!(out, "{t}")?;
        for &b in bits {
            write!(out, ",{b}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes a text artifact (the evaluation report) verbatim.
pub fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)?;
    Ok(())
}
