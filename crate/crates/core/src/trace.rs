//! Labeled discrete-time traces and their CSV representation.
//!
//! File layout: a header `trace,t,<var1>,...,<varn>,label` and one row per
//! `(trace, t)`. Time indices run `0..=K` per trace, rows may appear in any
//! order. A variable cell left empty marks the variable as absent for that
//! trace; every trace must end up with the same set of variables.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use thiserror::Error;

use crate::bits::BitVector;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{source_name}: {error}")]
    Io { source_name: String, error: std::io::Error },
    #[error("{source_name}: bad header: {msg}")]
    Header { source_name: String, msg: String },
    #[error("{source_name}:{line}: {msg}")]
    Malformed { source_name: String, line: u64, msg: String },
    #[error("{source_name}:{line}: label must be 0 or 1, got `{token}`")]
    Label { source_name: String, line: u64, token: String },
    #[error("{source_name}: trace `{trace}` has non-consecutive time index (expected {expected}, found {found} at line {line})")]
    TimeIndex { source_name: String, trace: String, expected: u64, found: u64, line: u64 },
    #[error("{context}: trace `{trace}` has variables {found:?}, expected {expected:?}")]
    SchemaMismatch { context: String, trace: String, expected: Vec<String>, found: Vec<String> },
    #[error("trace `{trace}`: {msg}")]
    InvalidTrace { trace: String, msg: String },
    #[error("a dataset needs at least one trace")]
    Empty,
}

/// One finite signal `x_0..x_K` with a label bit per time point.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrace {
    id: String,
    variable_names: Vec<String>,
    /// Row-major `(K+1) x n`.
    values: Vec<f64>,
    labels: BitVector,
}

impl LabeledTrace {
    /// `rows[t]` holds `x_t` in `variable_names` order.
    pub fn new(
        id: impl Into<String>,
        variable_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<bool>,
    ) -> Result<Self, DatasetError> {
        let id = id.into();
        let invalid = |msg: String| DatasetError::InvalidTrace { trace: id.clone(), msg };
        if rows.is_empty() {
            return Err(invalid("a trace needs at least one time point".into()));
        }
        if rows.len() != labels.len() {
            return Err(invalid(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        for (i, name) in variable_names.iter().enumerate() {
            if variable_names[..i].contains(name) {
                return Err(invalid(format!("duplicate variable `{name}`")));
            }
        }
        let n = variable_names.len();
        let mut values = Vec::with_capacity(rows.len() * n);
        for (t, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(invalid(format!("row {t} has {} values, expected {n}", row.len())));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(invalid(format!("row {t} has non-finite value {v}")));
            }
            values.extend(row);
        }
        Ok(LabeledTrace { id, variable_names, values, labels: BitVector::from_bools(&labels) })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    /// Number of time points, `K + 1`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &BitVector {
        &self.labels
    }

    pub fn label(&self, t: usize) -> bool {
        self.labels.get(t)
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let n = self.variable_names.len();
        &self.values[t * n..(t + 1) * n]
    }

    pub fn value(&self, t: usize, var: usize) -> f64 {
        self.values[t * self.variable_names.len() + var]
    }

    pub fn column(&self, var: usize) -> impl Iterator<Item = f64> + '_ {
        let n = self.variable_names.len();
        self.values.iter().skip(var).step_by(n.max(1)).copied()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variable_names.iter().position(|v| v == name)
    }

    /// `(positives, negatives)` of the dataset labels on this trace.
    pub fn label_counts(&self) -> (u64, u64) {
        (self.labels.count_ones(), self.labels.count_zeros())
    }
}

/// Column-major view of one or more traces laid end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    segments: Vec<Range<usize>>,
    labels: BitVector,
}

impl Frame {
    pub fn new(traces: &[LabeledTrace]) -> Self {
        let names = traces.first().map(|t| t.variable_names.clone()).unwrap_or_default();
        let total: usize = traces.iter().map(|t| t.len()).sum();
        let mut columns = vec![Vec::with_capacity(total); names.len()];
        let mut segments = Vec::with_capacity(traces.len());
        let mut labels = BitVector::zeros(total);
        let mut start = 0;
        for tr in traces {
            for (v, col) in columns.iter_mut().enumerate() {
                col.extend(tr.column(v));
            }
            for t in 0..tr.len() {
                labels.set(start + t, tr.label(t));
            }
            segments.push(start..start + tr.len());
            start += tr.len();
        }
        Frame { names, columns, segments, labels }
    }

    pub fn from_trace(trace: &LabeledTrace) -> Self {
        Frame::new(std::slice::from_ref(trace))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, var: usize) -> &[f64] {
        &self.columns[var]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|v| v == name)
    }

    /// Per-trace index ranges into the concatenated columns.
    pub fn segments(&self) -> &[Range<usize>] {
        &self.segments
    }

    pub fn labels(&self) -> &BitVector {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A nonempty collection of traces over one shared schema. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    traces: Vec<LabeledTrace>,
    frame: Frame,
}

impl Dataset {
    pub fn new(traces: Vec<LabeledTrace>) -> Result<Self, DatasetError> {
        let first = traces.first().ok_or(DatasetError::Empty)?;
        for tr in &traces[1..] {
            if tr.variable_names != first.variable_names {
                return Err(DatasetError::SchemaMismatch {
                    context: "dataset".into(),
                    trace: tr.id.clone(),
                    expected: first.variable_names.clone(),
                    found: tr.variable_names.clone(),
                });
            }
        }
        let frame = Frame::new(&traces);
        Ok(Dataset { traces, frame })
    }

    pub fn traces(&self) -> &[LabeledTrace] {
        &self.traces
    }

    pub fn variable_names(&self) -> &[String] {
        self.frame.names()
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Total number of labeled time points over all traces.
    pub fn total_points(&self) -> usize {
        self.frame.len()
    }

    /// `(positives, negatives)` of the dataset labels.
    pub fn label_counts(&self) -> (u64, u64) {
        (self.frame.labels.count_ones(), self.frame.labels.count_zeros())
    }
}

/// `(positives, negatives)` over every labeled point of `d`.
pub fn dataset_label_counts(d: &Dataset) -> (u64, u64) {
    d.label_counts()
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let source_name = path.display().to_string();
    let file = File::open(path).map_err(|error| DatasetError::Io { source_name: source_name.clone(), error })?;
    read_dataset(file, &source_name)
}

struct PendingTrace {
    id: String,
    present: Vec<bool>,
    rows: Vec<(u64, u64, Vec<f64>, bool)>,
}

/// Reads the CSV layout from any reader. `source_name` is used in errors.
pub fn read_dataset(reader: impl Read, source_name: &str) -> Result<Dataset, DatasetError> {
    let src = || source_name.to_string();
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| DatasetError::Header { source_name: src(), msg: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 3 || header[0] != "trace" || header[1] != "t" || header[header.len() - 1] != "label" {
        return Err(DatasetError::Header { source_name: src(), msg: "expected `trace,t,<variables...>,label`".into() });
    }
    let vars: Vec<String> = header[2..header.len() - 1].to_vec();
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(DatasetError::Header { source_name: src(), msg: format!("duplicate column `{v}`") });
        }
    }

    let mut order: Vec<PendingTrace> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| DatasetError::Malformed {
            source_name: src(),
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |msg: String| DatasetError::Malformed { source_name: src(), line, msg };
        if record.len() != header.len() {
            return Err(malformed(format!("expected {} fields, found {}", header.len(), record.len())));
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(malformed("empty trace id".into()));
        }
        let t: u64 = record[1]
            .parse()
            .map_err(|_| malformed(format!("time index `{}` is not a non-negative integer", &record[1])))?;
        let label = match &record[header.len() - 1] {
            "0" => false,
            "1" => true,
            other => return Err(DatasetError::Label { source_name: src(), line, token: other.to_string() }),
        };
        let mut present = Vec::with_capacity(vars.len());
        let mut values = Vec::with_capacity(vars.len());
        for (i, cell) in record.iter().skip(2).take(vars.len()).enumerate() {
            if cell.is_empty() {
                present.push(false);
                continue;
            }
            let v: f64 =
                cell.parse().map_err(|_| malformed(format!("`{cell}` in column `{}` is not a number", vars[i])))?;
            if !v.is_finite() {
                return Err(malformed(format!("non-finite value in column `{}`", vars[i])));
            }
            present.push(true);
            values.push(v);
        }
        let slot = *by_id.entry(id.clone()).or_insert_with(|| {
            order.push(PendingTrace { id: id.clone(), present: present.clone(), rows: Vec::new() });
            order.len() - 1
        });
        let pending = &mut order[slot];
        if pending.present != present {
            return Err(malformed(format!(
                "trace `{id}` leaves a different set of variable cells empty than its first row"
            )));
        }
        pending.rows.push((t, line, values, label));
    }

    let mut traces = Vec::with_capacity(order.len());
    let mut schema: Option<(String, Vec<String>)> = None;
    for mut p in order {
        let names: Vec<String> = vars.iter().zip(&p.present).filter(|(_, &k)| k).map(|(v, _)| v.clone()).collect();
        match &schema {
            None => schema = Some((p.id.clone(), names.clone())),
            Some((_, expected)) if *expected != names => {
                return Err(DatasetError::SchemaMismatch {
                    context: source_name.to_string(),
                    trace: p.id,
                    expected: expected.clone(),
                    found: names,
                })
            }
            Some(_) => {}
        }
        p.rows.sort_by_key(|r| r.0);
        for (expected, row) in p.rows.iter().enumerate() {
            if row.0 != expected as u64 {
                return Err(DatasetError::TimeIndex {
                    source_name: src(),
                    trace: p.id.clone(),
                    expected: expected as u64,
                    found: row.0,
                    line: row.1,
                });
            }
        }
        let labels = p.rows.iter().map(|r| r.3).collect();
        let rows = p.rows.into_iter().map(|r| r.2).collect();
        traces.push(LabeledTrace::new(p.id, names, rows, labels)?);
    }
    if traces.is_empty() {
        return Err(DatasetError::Empty);
    }
    Dataset::new(traces)
}

/// Writes `d` in the CSV layout, traces in dataset order, rows in time order.
pub fn write_dataset(d: &Dataset, writer: impl Write) -> Result<(), DatasetError> {
    let io = |e: csv::Error| DatasetError::Io { source_name: "<output>".into(), error: e.into() };
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let mut header = vec!["trace".to_string(), "t".to_string()];
    header.extend(d.variable_names().iter().cloned());
    header.push("label".into());
    w.write_record(&header).map_err(io)?;
    let mut record = Vec::with_capacity(header.len());
    for tr in d.traces() {
        for t in 0..tr.len() {
            record.clear();
            record.push(tr.id().to_string());
            record.push(t.to_string());
            record.extend(tr.row(t).iter().map(|v| v.to_string()));
            record.push(if tr.label(t) { "1" } else { "0" }.to_string());
            w.write_record(&record).map_err(io)?;
        }
    }
    w.flush().map_err(|error| DatasetError::Io { source_name: "<output>".into(), error })?;
    Ok(())
}

pub fn save_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let file =
        File::create(path).map_err(|error| DatasetError::Io { source_name: path.display().to_string(), error })?;
    write_dataset(d, std::io::BufWriter::new(file))
}
