//! CSV input with header auto-detection, and provenance-stamped output files.

use std::fs;
use std::path::{Path, PathBuf};

use monotrend::TimeSeries;

use crate::{CliError, CliResult};

/// A parsed input series: values, the labels column when present, and which
/// 1-based column the values came from.
pub struct ParsedSeries {
    pub series: TimeSeries,
    pub value_column: usize,
}

/// Reads a series from a CSV file. Comma separated, UTF-8, `.` decimal,
/// LF or CRLF line ends; lines starting with `#` are ignored. A header row
/// is detected by a non-numeric first row. The value column defaults to the
/// last; labels are taken from the first column when there are at least two.
pub fn read_series(path: &str, column: Option<usize>) -> CliResult<ParsedSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("cannot open {path}: {e}")))?;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut value_column = column;
    let mut first_data_row = true;
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1;
        let record =
            record.map_err(|e| CliError::Validation(format!("malformed CSV at row {row}: {e}")))?;
        if record.is_empty() || (record.len() == 1 && record[0].is_empty()) {
            continue;
        }
        let col = match value_column {
            Some(c) => {
                if c < 1 || c > record.len() {
                    return Err(CliError::Validation(format!(
                        "row {row} has {} columns; --column {c} is out of range",
                        record.len()
                    )));
                }
                c
            }
            None => record.len(),
        };
        let field = &record[col - 1];
        match field.parse::<f64>() {
            Ok(v) => {
                value_column = Some(col);
                values.push(v);
                labels.push(if record.len() >= 2 {
                    record[0].to_string()
                } else {
                    (values.len()).to_string()
                });
            }
            Err(_) if first_data_row => {
                // Non-numeric first row: treat as a header.
                value_column = Some(col);
            }
            Err(_) => {
                return Err(CliError::Validation(format!(
                    "non-numeric value `{field}` at row {row}, column {col}"
                )));
            }
        }
        first_data_row = false;
    }
    let series = TimeSeries::with_labels(values, labels)
        .map_err(|e| CliError::Validation(format!("{path}: {e}")))?;
    Ok(ParsedSeries {
        series,
        value_column: value_column.unwrap_or(1),
    })
}

/// FNV-1a hash of the resolved configuration, for provenance headers.
pub fn config_hash(config: &impl std::fmt::Debug) -> String {
    let text = format!("{config:?}");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// The `# ...` provenance line stamped at the top of every emitted file.
pub fn provenance_line(seed: Option<u64>, config_hash: &str) -> String {
    let seed = seed.map_or("-".to_string(), |s| s.to_string());
    format!(
        "# monotrend {} seed={seed} config={config_hash}",
        env!("CARGO_PKG_VERSION")
    )
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Output path `<out_dir>/<stem of input><suffix>`.
pub fn derived_path(out_dir: &str, input: &str, suffix: &str) -> PathBuf {
    let stem = Path::new(input)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());
    Path::new(out_dir).join(format!("{stem}{suffix}"))
}
