//! CSV tables emitted by the front end.

use std::io::Write;

/// One verification outcome. Passes iff `slack >= −tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub operation: String,
    pub params: String,
    pub value: f64,
    pub slack: f64,
    pub tolerance: f64,
}

impl ReportRow {
    pub fn new(experiment: &str, operation: &str, params: impl Into<String>, value: f64, slack: f64, tolerance: f64) -> Self {
        ReportRow {
            experiment: experiment.into(),
            operation: operation.into(),
            params: params.into(),
            value,
            slack,
            tolerance,
        }
    }

    pub fn pass(&self) -> bool {
        self.slack >= -self.tolerance
    }
}

/// A header and string cells; `failed` drives the exit code.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub failed: bool,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Table {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
            failed: false,
        }
    }

    pub fn push(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn from_rows(rows: &[ReportRow]) -> Table {
        let mut t = Table::new(&["experiment", "operation", "params", "value", "slack", "tolerance", "pass"]);
        for r in rows {
            t.failed |= !r.pass();
            t.push(vec![
                r.experiment.clone(),
                r.operation.clone(),
                r.params.clone(),
                num(r.value),
                num(r.slack),
                num(r.tolerance),
                r.pass().to_string(),
            ]);
        }
        t
    }

    pub fn write(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip form; scientific outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
