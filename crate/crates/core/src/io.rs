//! CSV formats shared by the command-line pipeline.
//!
//! Every file has a header row. Speedup files may start with `# key=value`
//! comment lines carrying the curve's limit and origin slope.

use std::io::{Read, Write};

use crate::distributions::{SpeedupCurve, SpeedupPoint};
use crate::error::{Error, Result};
use crate::fitting::{EmpiricalSample, Unit};
use crate::multiwalk::{MeasuredSpeedup, ParallelRunRecord};
use crate::solver::RunSample;

pub const RUNS_HEADER: [&str; 7] = ["run_id", "seed", "problem", "n", "iterations", "wall_time_s", "solved"];
pub const PARALLEL_HEADER: [&str; 5] = ["trial_id", "workers", "winner_seed", "winner_iterations", "wall_time_s"];
pub const MEASURED_HEADER: [&str; 7] =
    ["n", "measured_speedup", "ci_low", "ci_high", "trials", "mean_winner_iterations", "baseline_mean"];

pub fn write_runs<W: Write>(out: W, runs: &[RunSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNS_HEADER)?;
    for (id, r) in runs.iter().enumerate() {
        w.write_record([
            id.to_string(),
            r.seed.to_string(),
            r.problem.kind.to_string(),
            r.problem.n.to_string(),
            r.iterations.to_string(),
            format!("{:.6}", r.wall_time),
            r.solved.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads one runtime column from a CSV file.
///
/// `iterations` selects the `iterations` column; `seconds` selects `seconds`
/// or, failing that, `wall_time_s`. When a `solved` column exists only rows
/// with `solved = true` are kept. Parse errors report the file line number.
pub fn read_sample<R: Read>(input: R, unit: Unit, label: impl Into<String>) -> Result<EmpiricalSample> {
    let mut reader = reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let column = match unit {
        Unit::Iterations => find("iterations"),
        Unit::Seconds => find("seconds").or_else(|| find("wall_time_s")),
    }
    .ok_or_else(|| Error::Data {
        row: 1,
        message: format!("no {} column in header {:?}", unit_column(unit), headers.iter().collect::<Vec<_>>()),
    })?;
    let solved = find("solved");

    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = line_of(&record);
        if let Some(s) = solved {
            if !parse_bool(field(&record, s, line)?, line)? {
                continue;
            }
        }
        values.push(parse_f64(field(&record, column, line)?, line)?);
    }
    if values.is_empty() {
        return Err(Error::DegenerateSample("the CSV holds no usable runtimes".into()));
    }
    EmpiricalSample::new(values, unit, label)
}

fn unit_column(unit: Unit) -> &'static str {
    match unit {
        Unit::Iterations => "iterations",
        Unit::Seconds => "seconds (or wall_time_s)",
    }
}

/// Writes `n,<value_column>[,std_error]` with `# limit=` and `# origin_slope=`
/// comment lines for the values the curve carries.
pub fn write_curve<W: Write>(mut out: W, curve: &SpeedupCurve, value_column: &str) -> Result<()> {
    if let Some(limit) = curve.limit {
        writeln!(out, "# limit={limit}")?;
    }
    if let Some(slope) = curve.origin_slope {
        writeln!(out, "# origin_slope={slope}")?;
    }
    let with_errors = curve.points.iter().any(|p| p.std_error.is_some());
    let mut w = csv::Writer::from_writer(out);
    if with_errors {
        w.write_record(["n", value_column, "std_error"])?;
    } else {
        w.write_record(["n", value_column])?;
    }
    for p in &curve.points {
        let mut row = vec![p.n.to_string(), p.speedup.to_string()];
        if with_errors {
            row.push(p.std_error.map(|e| e.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a curve written by [`write_curve`]. The first column must be `n`;
/// the second is the speedup, whatever its name. A `std_error` column is
/// optional.
pub fn read_curve<R: Read>(mut input: R) -> Result<SpeedupCurve> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut limit = None;
    let mut origin_slope = None;
    for (k, line) in text.lines().enumerate() {
        let Some(comment) = line.trim().strip_prefix('#') else {
            continue;
        };
        if let Some((key, value)) = comment.split_once('=') {
            let parsed = || parse_f64(value.trim(), k + 1);
            match key.trim() {
                "limit" => limit = Some(parsed()?),
                "origin_slope" => origin_slope = Some(parsed()?),
                _ => {}
            }
        }
    }

    let mut reader = reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "n" {
        return Err(Error::Data { row: 1, message: "expected header starting with n,<speedup>".into() });
    }
    let se = headers.iter().position(|h| h == "std_error");
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = line_of(&record);
        let n = field(&record, 0, line)?
            .parse::<u32>()
            .map_err(|e| Error::Data { row: line, message: format!("bad core count: {e}") })?;
        let speedup = parse_f64(field(&record, 1, line)?, line)?;
        let std_error = match se.map(|c| field(&record, c, line)).transpose()? {
            Some("") | None => None,
            Some(v) => Some(parse_f64(v, line)?),
        };
        points.push(SpeedupPoint { n, speedup, std_error });
    }
    Ok(SpeedupCurve { points, limit, origin_slope })
}

/// Writes parallel records; `trial_id` counts from zero.
pub fn write_parallel<W: Write>(out: W, records: &[ParallelRunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PARALLEL_HEADER)?;
    for (id, r) in records.iter().enumerate() {
        w.write_record([
            id.to_string(),
            r.workers.to_string(),
            r.winner_seed.to_string(),
            r.winner_iterations.to_string(),
            format!("{:.6}", r.wall_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One line per worker count: the measured speedup and its 95% interval.
pub fn write_measured<W: Write>(out: W, measured: &[MeasuredSpeedup]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MEASURED_HEADER)?;
    for m in measured {
        w.write_record([
            m.workers.to_string(),
            m.mean_speedup.to_string(),
            m.confidence_interval.0.to_string(),
            m.confidence_interval.1.to_string(),
            m.trials.to_string(),
            m.mean_winner_iterations.to_string(),
            m.baseline_mean.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A row of the measured-speedup file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredRow {
    pub n: u32,
    pub speedup: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn read_measured<R: Read>(input: R) -> Result<Vec<MeasuredRow>> {
    let mut reader = reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data { row: 1, message: format!("missing column {name}") })
    };
    let (n, s, lo, hi) = (col("n")?, col("measured_speedup")?, col("ci_low")?, col("ci_high")?);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = line_of(&record);
        rows.push(MeasuredRow {
            n: field(&record, n, line)?
                .parse()
                .map_err(|e| Error::Data { row: line, message: format!("bad core count: {e}") })?,
            speedup: parse_f64(field(&record, s, line)?, line)?,
            ci_low: parse_f64(field(&record, lo, line)?, line)?,
            ci_high: parse_f64(field(&record, hi, line)?, line)?,
        });
    }
    Ok(rows)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input)
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn field(record: &csv::StringRecord, column: usize, line: usize) -> Result<&str> {
    record.get(column).ok_or_else(|| Error::Data { row: line, message: format!("missing column {}", column + 1) })
}

fn parse_f64(value: &str, line: usize) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::Data { row: line, message: format!("not a number: {value:?}") })
}

fn parse_bool(value: &str, line: usize) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Data { row: line, message: format!("not a boolean: {value:?}") }),
    }
}
