use std::io::{BufRead, Write};

use super::{parse_error, Fingerprint, IoError};
use crate::simulation::{SimulationTrace, SnapshotContent, SnapshotData, Summary};
use crate::wealth::WealthState;

const FULL_COLUMNS: &str = "tau,total,x_1..x_n";
const SUMMARY_COLUMNS: &str = "tau,total,gini,top1,top10";
const DRIFT_COLUMNS: &str = "tau,total,drift,rel_drift";

fn write_header(
    w: &mut dyn Write,
    fp: Option<&Fingerprint>,
    columns: &str,
    mode: &str,
) -> std::io::Result<()> {
    if let Some(fp) = fp {
        writeln!(w, "{fp}")?;
    }
    writeln!(w, "# mode: {mode}")?;
    writeln!(w, "# columns: {columns}")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One line per snapshot: `tau,total,x_1,...,x_n`, or
/// `tau,total,gini,top1,top10` for summary snapshots. Undefined summary
/// values (zero total) are left empty.
pub fn write_snapshots<S: WealthState, W: Write>(
    mut w: W,
    trace: &SimulationTrace<S>,
    fp: Option<&Fingerprint>,
) -> std::io::Result<()> {
    let summary = trace
        .snapshots
        .first()
        .is_some_and(|s| matches!(s.data, SnapshotData::Summary(_)));
    let columns = if summary { SUMMARY_COLUMNS } else { FULL_COLUMNS };
    write_header(&mut w, fp, columns, trace.mode.as_str())?;
    for s in &trace.snapshots {
        match &s.data {
            SnapshotData::Full(x) => {
                write!(w, "{},{}", s.tau, x.total())?;
                x.write_csv_values(&mut w)?;
                writeln!(w)?;
            }
            SnapshotData::Summary(m) => writeln!(
                w,
                "{},{},{},{},{}",
                s.tau,
                s.total,
                opt(m.gini),
                opt(m.top1),
                opt(m.top10)
            )?,
        }
    }
    w.flush()
}

/// The final state as a single full snapshot line.
pub fn write_final<S: WealthState, W: Write>(
    mut w: W,
    trace: &SimulationTrace<S>,
    fp: Option<&Fingerprint>,
) -> std::io::Result<()> {
    write_header(&mut w, fp, FULL_COLUMNS, trace.mode.as_str())?;
    write!(w, "{},{}", trace.steps, trace.final_state.total())?;
    trace.final_state.write_csv_values(&mut w)?;
    writeln!(w)?;
    w.flush()
}

/// One line per step `tau = 1..=T`: the total after the step, its absolute
/// deviation from the monetary base and that deviation relative to it.
pub fn write_drift<S: WealthState, W: Write>(
    mut w: W,
    trace: &SimulationTrace<S>,
    fp: Option<&Fingerprint>,
) -> std::io::Result<()> {
    write_header(&mut w, fp, DRIFT_COLUMNS, trace.mode.as_str())?;
    let base = trace.monetary_base_f64();
    for (k, (total, drift)) in trace.totals.iter().zip(&trace.drift).enumerate() {
        let rel = if base == 0.0 { 0.0 } else { drift / base };
        writeln!(w, "{},{},{},{}", k + 1, total, drift, rel)?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub tau: u64,
    pub total: f64,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotRows {
    /// `(tau, total, x)` per line.
    Full(Vec<(u64, f64, Vec<f64>)>),
    Summary(Vec<SummaryRow>),
}

impl SnapshotRows {
    pub fn content(&self) -> SnapshotContent {
        match self {
            SnapshotRows::Full(_) => SnapshotContent::Full,
            SnapshotRows::Summary(_) => SnapshotContent::Summary,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SnapshotRows::Full(r) => r.len(),
            SnapshotRows::Summary(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub fingerprint: Option<Fingerprint>,
    pub mode: Option<String>,
    pub rows: SnapshotRows,
}

/// Reads a file written by [`write_snapshots`] or [`write_final`].
pub fn read_snapshots<R: BufRead>(r: R) -> Result<SnapshotFile, IoError> {
    let mut fingerprint = None;
    let mut mode = None;
    let mut summary: Option<bool> = None;
    let mut full_rows = Vec::new();
    let mut summary_rows = Vec::new();
    let mut width = None;
    for (idx, line) in r.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let content = line.trim();
        if content.is_empty() {
            continue;
        }
        if let Some(comment) = content.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(cols) = comment.strip_prefix("columns:") {
                summary = Some(cols.trim() == SUMMARY_COLUMNS);
            } else if let Some(m) = comment.strip_prefix("mode:") {
                mode = Some(m.trim().to_string());
            } else if fingerprint.is_none() && lineno == 1 {
                fingerprint = Fingerprint::parse(content);
            }
            continue;
        }
        let fields: Vec<&str> = content.split(',').collect();
        let num = |s: &str| -> Result<f64, IoError> {
            s.trim()
                .parse()
                .map_err(|_| parse_error(lineno, format!("invalid number {s:?}")))
        };
        let tau: u64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_error(lineno, format!("invalid step {:?}", fields[0])))?;
        if fields.len() < 2 {
            return Err(parse_error(lineno, "expected at least tau and total"));
        }
        let total = num(fields[1])?;
        if summary == Some(true) {
            if fields.len() != 5 {
                return Err(parse_error(lineno, format!("expected {SUMMARY_COLUMNS}")));
            }
            let o = |s: &str| -> Result<Option<f64>, IoError> {
                if s.trim().is_empty() {
                    Ok(None)
                } else {
                    num(s).map(Some)
                }
            };
            summary_rows.push(SummaryRow {
                tau,
                total,
                summary: Summary {
                    gini: o(fields[2])?,
                    top1: o(fields[3])?,
                    top10: o(fields[4])?,
                },
            });
        } else {
            let x = fields[2..].iter().map(|s| num(s)).collect::<Result<Vec<f64>, _>>()?;
            if x.is_empty() {
                return Err(parse_error(lineno, "snapshot without agents"));
            }
            if *width.get_or_insert(x.len()) != x.len() {
                return Err(parse_error(
                    lineno,
                    format!("{} agents, earlier lines have {}", x.len(), width.unwrap()),
                ));
            }
            full_rows.push((tau, total, x));
        }
    }
    let rows = if summary == Some(true) {
        SnapshotRows::Summary(summary_rows)
    } else {
        SnapshotRows::Full(full_rows)
    };
    Ok(SnapshotFile {
        fingerprint,
        mode,
        rows,
    })
}

/// Reads a wealth vector: numbers separated by newlines, commas or
/// whitespace; `#` starts a comment line.
pub fn read_wealth<R: BufRead>(r: R) -> Result<Vec<f64>, IoError> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let content = line.trim();
        if content.starts_with('#') {
            continue;
        }
        for tok in content.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_error(idx + 1, format!("invalid wealth value {tok:?}")))?;
            out.push(v);
        }
    }
    Ok(out)
}
