//! CSV tables. Floats use `{:.16e}` (17 significant digits, locale-free).

use std::path::Path;

use crate::constitutive::AssumptionReport;
use crate::diagnostics::{DiagnosticRecord, LedgerEntry};
use crate::error::{Error, Result};
use crate::experiments::{AbsorbingProbeRow, GevreyTrack, NuSweepResult, SweepResult};
use crate::tangent::LyapunovResult;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(u64),
    S(String),
    B(bool),
    /// Missing value, written as an empty field.
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format_float(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::F)
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let wrap = |e: csv::Error| Error::Config(format!("csv encoding failed: {e}"));
        w.write_record(&self.header).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(wrap)?;
        }
        w.into_inner().map_err(|e| Error::Config(format!("csv encoding failed: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        super::write_atomic(path, &self.to_bytes()?)
    }
}

/// Columns `t, l2, H<s>..., linf, [gevrey], dissipation_rate`.
pub fn diagnostics_table(records: &[DiagnosticRecord]) -> Table {
    let first = records.first();
    let mut header = vec!["t".to_string(), "l2".to_string()];
    if let Some(r) = first {
        header.extend(r.hs.iter().map(|(s, _)| format!("H{s}")));
    }
    header.push("linf".into());
    let with_gevrey = first.is_some_and(|r| r.gevrey.is_some());
    if with_gevrey {
        header.push("gevrey".into());
    }
    header.push("dissipation_rate".into());
    let mut t = Table::new(header);
    for r in records {
        let mut row = vec![Cell::F(r.t), Cell::F(r.l2)];
        row.extend(r.hs.iter().map(|(_, v)| Cell::F(*v)));
        row.push(Cell::F(r.linf));
        if with_gevrey {
            row.push(r.gevrey.into());
        }
        row.push(Cell::F(r.dissipation_rate));
        t.push(row);
    }
    t
}

pub fn ledger_table(entries: &[LedgerEntry]) -> Table {
    let mut t = Table::new(["t", "dt", "delta_e", "dissipation", "injection", "residual"]);
    for e in entries {
        t.push(vec![
            e.t.into(),
            e.dt.into(),
            e.delta_e.into(),
            e.dissipation.into(),
            e.injection.into(),
            e.residual.into(),
        ]);
    }
    t
}

/// Columns `param, t, norm_name, value`.
pub fn sweep_table(result: &SweepResult) -> Table {
    let mut t = Table::new(["param", "t", "norm_name", "value"]);
    for r in &result.rows {
        t.push(vec![r.param.into(), r.t.into(), Cell::S(r.norm_name.clone()), r.value.into()]);
    }
    t
}

/// Columns `index, exponent, cumulative_sum`; index starts at 1.
pub fn lyapunov_table(result: &LyapunovResult) -> Table {
    let mut t = Table::new(["index", "exponent", "cumulative_sum"]);
    for (i, (l, c)) in result.exponents.iter().zip(&result.cumulative).enumerate() {
        t.push(vec![Cell::I(i as u64 + 1), (*l).into(), (*c).into()]);
    }
    t
}

pub fn audit_table(report: &AssumptionReport) -> Table {
    let mut t = Table::new(["kind", "nu", "div_max", "c2_hat", "order_one_ratio", "conj_max"]);
    for p in &report.probes {
        t.push(vec![
            Cell::S(report.kind.clone()),
            p.nu.into(),
            p.div_max.into(),
            p.c2_hat.into(),
            p.order_one_ratio.into(),
            p.conj_max.into(),
        ]);
    }
    t
}

pub fn gevrey_track_table(track: &GevreyTrack) -> Table {
    let mut t = Table::new(["t", "tau_hat", "reliable", "tau_prescribed", "gevrey"]);
    for r in &track.rows {
        t.push(vec![
            r.t.into(),
            r.tau_hat.into(),
            Cell::B(r.reliable),
            r.tau_prescribed.into(),
            r.gevrey.into(),
        ]);
    }
    t
}

pub fn nu_sweep_table(result: &NuSweepResult) -> Table {
    let mut t = Table::new(["nu", "reference_nu", "semidistance", "flagged"]);
    for r in &result.rows {
        t.push(vec![
            r.nu.into(),
            result.reference_nu.into(),
            r.semidistance.into(),
            Cell::I(r.flagged as u64),
        ]);
    }
    t
}

pub fn absorbing_table(rows: &[AbsorbingProbeRow]) -> Table {
    let mut t = Table::new(["kappa", "radius", "t_entry"]);
    for r in rows {
        t.push(vec![r.kappa.into(), r.radius.into(), r.t_entry.into()]);
    }
    t
}
