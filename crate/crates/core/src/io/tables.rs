//! CSV formats: classified counts in, PCU series and filter traces out.
//!
//! ```text
//! counts: timestamp,vehicle_class,count
//! series: bin_start,pcu
//! trace:  bin_start,observed,forecast,filtered,gain,innovation
//! ```
//!
//! Timestamps are epoch seconds or ISO-8601 UTC (`2021-01-20T08:00:00Z`).
//! UTF-8 with LF or CRLF line endings. Line numbers in errors are 1-based and
//! count the header as line 1.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::DateTime;

use super::fs::write_atomic;
use super::IoError;
use crate::kalman::FilterTrace;
use crate::series::FlowSeries;
use crate::vehicle::{parse_vehicle_class, ClassifiedCount};

pub const COUNTS_HEADER: [&str; 3] = ["timestamp", "vehicle_class", "count"];
pub const SERIES_HEADER: [&str; 2] = ["bin_start", "pcu"];
pub const TRACE_HEADER: [&str; 6] = ["bin_start", "observed", "forecast", "filtered", "gain", "innovation"];

/// Which CSV layout a file uses, judged from its header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Counts,
    Series,
}

fn open(path: &Path) -> Result<File, IoError> {
    File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            IoError::FileNotFound(path.to_path_buf())
        } else {
            IoError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn line_of(record: &csv::ByteRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn csv_error(err: csv::Error) -> IoError {
    let line = err.position().map_or(0, |p| p.line());
    IoError::MalformedRow {
        line,
        reason: err.to_string(),
    }
}

/// Reads all rows as UTF-8 strings, header included.
fn rows<R: Read>(input: R) -> Result<Vec<(u64, Vec<String>)>, IoError> {
    let mut out = Vec::new();
    let mut rdr = reader(input);
    let mut record = csv::ByteRecord::new();
    while rdr.read_byte_record(&mut record).map_err(csv_error)? {
        let line = line_of(&record);
        let fields = record
            .iter()
            .map(|f| {
                std::str::from_utf8(f)
                    .map(str::to_string)
                    .map_err(|_| IoError::MalformedRow {
                        line,
                        reason: "invalid UTF-8".into(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((line, fields));
    }
    Ok(out)
}

fn header_matches(fields: &[String], expected: &[&str]) -> bool {
    fields.len() == expected.len()
        && fields
            .iter()
            .zip(expected)
            .all(|(f, e)| f.trim_start_matches('\u{feff}').eq_ignore_ascii_case(e))
}

fn check_header(line: u64, fields: &[String], expected: &[&str]) -> Result<(), IoError> {
    if header_matches(fields, expected) {
        Ok(())
    } else {
        Err(IoError::BadHeader {
            line,
            expected: expected.join(","),
            found: fields.join(","),
        })
    }
}

/// Epoch seconds, or RFC 3339 / ISO-8601 with a zero UTC offset.
pub fn parse_timestamp(text: &str) -> Result<i64, String> {
    if let Ok(secs) = text.parse::<i64>() {
        return Ok(secs);
    }
    let dt = DateTime::parse_from_rfc3339(text).map_err(|_| format!("bad timestamp '{text}'"))?;
    if dt.offset().local_minus_utc() != 0 {
        return Err(format!("timestamp '{text}' is not UTC"));
    }
    Ok(dt.timestamp())
}

pub fn parse_counts<R: Read>(input: R) -> Result<Vec<ClassifiedCount>, IoError> {
    let rows = rows(input)?;
    let Some(((hline, header), data)) = rows.split_first() else {
        return Err(IoError::EmptyInput);
    };
    check_header(*hline, header, &COUNTS_HEADER)?;
    if data.is_empty() {
        return Err(IoError::EmptyInput);
    }
    data.iter()
        .map(|(line, fields)| {
            let line = *line;
            let malformed = |reason: String| IoError::MalformedRow { line, reason };
            if fields.len() != 3 {
                return Err(malformed(format!("expected 3 fields, found {}", fields.len())));
            }
            let timestamp = parse_timestamp(&fields[0]).map_err(malformed)?;
            let vehicle_class = parse_vehicle_class(&fields[1]).map_err(|_| IoError::UnknownVehicleClass {
                line,
                label: fields[1].clone(),
            })?;
            let count = fields[2]
                .parse::<u64>()
                .map_err(|_| malformed(format!("count '{}' is not a nonnegative integer", fields[2])))?;
            Ok(ClassifiedCount {
                timestamp,
                vehicle_class,
                count,
            })
        })
        .collect()
}

/// Reads a classified counts CSV, preserving row order.
pub fn read_counts_csv(path: &Path) -> Result<Vec<ClassifiedCount>, IoError> {
    parse_counts(open(path)?)
}

pub fn format_counts(records: &[ClassifiedCount]) -> String {
    let mut out = COUNTS_HEADER.join(",");
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{},{},{}", r.timestamp, r.vehicle_class.label(), r.count);
    }
    out
}

pub fn write_counts_csv(records: &[ClassifiedCount], path: &Path) -> Result<(), IoError> {
    write_atomic(path, format_counts(records).as_bytes())
}

/// Parses a series CSV. Bin spacing is taken from consecutive `bin_start`
/// values and must be constant; a single-row file uses `default_bin_duration`.
pub fn parse_series<R: Read>(input: R, default_bin_duration: u64) -> Result<FlowSeries, IoError> {
    let rows = rows(input)?;
    let Some(((hline, header), data)) = rows.split_first() else {
        return Err(IoError::EmptyInput);
    };
    check_header(*hline, header, &SERIES_HEADER)?;
    if data.is_empty() {
        return Err(IoError::EmptyInput);
    }
    let mut starts = Vec::with_capacity(data.len());
    let mut values = Vec::with_capacity(data.len());
    for (line, fields) in data {
        let malformed = |reason: String| IoError::MalformedRow { line: *line, reason };
        if fields.len() != 2 {
            return Err(malformed(format!("expected 2 fields, found {}", fields.len())));
        }
        starts.push(parse_timestamp(&fields[0]).map_err(malformed)?);
        let v = fields[1]
            .parse::<f64>()
            .map_err(|_| malformed(format!("pcu '{}' is not a number", fields[1])))?;
        if !v.is_finite() || v < 0.0 {
            return Err(malformed(format!("pcu must be finite and >= 0, got {v}")));
        }
        values.push(v);
    }
    let bin_duration = if starts.len() > 1 {
        let step = starts[1].checked_sub(starts[0]).filter(|d| *d > 0);
        let step = step.ok_or(IoError::MalformedRow {
            line: data[1].0,
            reason: "bin_start values must increase".into(),
        })?;
        for (i, w) in starts.windows(2).enumerate() {
            if w[1].checked_sub(w[0]) != Some(step) {
                return Err(IoError::MalformedRow {
                    line: data[i + 1].0,
                    reason: format!("uneven bin spacing (expected {step}s)"),
                });
            }
        }
        step as u64
    } else {
        default_bin_duration
    };
    FlowSeries::new(starts[0], bin_duration, values).map_err(|e| IoError::MalformedRow {
        line: data[0].0,
        reason: e.to_string(),
    })
}

pub fn read_series_csv(path: &Path, default_bin_duration: u64) -> Result<FlowSeries, IoError> {
    parse_series(open(path)?, default_bin_duration)
}

/// Tells a counts file from a series file by its header.
pub fn sniff_csv(path: &Path) -> Result<CsvKind, IoError> {
    let mut head = Vec::new();
    open(path)?
        .take(4096)
        .read_to_end(&mut head)
        .map_err(|source| IoError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    let rows = rows(&head[..]).or_else(|_| {
        // The 4 KiB window may cut a row in half; only the header matters.
        let first = head.split(|b| *b == b'\n').next().unwrap_or(&[]);
        rows(first)
    })?;
    let Some((line, header)) = rows.first() else {
        return Err(IoError::EmptyInput);
    };
    if header_matches(header, &COUNTS_HEADER) {
        Ok(CsvKind::Counts)
    } else if header_matches(header, &SERIES_HEADER) {
        Ok(CsvKind::Series)
    } else {
        Err(IoError::BadHeader {
            line: *line,
            expected: format!("{} or {}", COUNTS_HEADER.join(","), SERIES_HEADER.join(",")),
            found: header.join(","),
        })
    }
}

pub fn format_series(series: &FlowSeries) -> String {
    let mut out = SERIES_HEADER.join(",");
    out.push('\n');
    for (t, v) in series.bin_starts().zip(series.values()) {
        let _ = writeln!(out, "{t},{v}");
    }
    out
}

pub fn write_series_csv(series: &FlowSeries, path: &Path) -> Result<(), IoError> {
    write_atomic(path, format_series(series).as_bytes())
}

/// One row per bin. Bin 0 seeds the filter, so its forecast, gain and
/// innovation are empty.
pub fn format_trace(trace: &FilterTrace, series: &FlowSeries) -> String {
    let h = trace.params.measurement();
    let mut out = TRACE_HEADER.join(",");
    out.push('\n');
    if let Some(first) = series.values().first() {
        let _ = writeln!(
            out,
            "{},{},,{},,",
            series.bin_start(0),
            first,
            h * trace.initial_state.estimate
        );
    }
    for (i, step) in trace.steps.iter().enumerate() {
        let bin = i + 1;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            series.bin_start(bin),
            series.values().get(bin).copied().unwrap_or(f64::NAN),
            step.forecast,
            h * step.posterior.estimate,
            step.gain,
            step.innovation
        );
    }
    out
}

pub fn write_trace_csv(trace: &FilterTrace, series: &FlowSeries, path: &Path) -> Result<(), IoError> {
    write_atomic(path, format_trace(trace, series).as_bytes())
}
