use std::fmt::Write as _;

use super::metrics::{row_min, MetricPair};
use super::ModelKind;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scalers::ScalerKind;

pub const MIN_COLUMN: &str = "Overall Min Error";

/// Hold-out metrics for every (model, scaler) pair, rows and columns in roster order.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkGrid<T> {
    cells: Vec<[MetricPair<T>; 6]>,
    minima: Vec<MetricPair<T>>,
}

impl<T: Scalar> BenchmarkGrid<T> {
    pub fn from_cells(cells: Vec<[MetricPair<T>; 6]>) -> Result<Self> {
        if cells.len() != ModelKind::ALL.len() {
            return Err(Error::dim(ModelKind::ALL.len(), cells.len()));
        }
        let minima = cells.iter().map(|r| row_min(r)).collect();
        Ok(Self { cells, minima })
    }

    pub fn cell(&self, model: ModelKind, scaler: ScalerKind) -> MetricPair<T> {
        self.cells[model.index()][scaler.index()]
    }

    pub fn row(&self, model: ModelKind) -> &[MetricPair<T>; 6] {
        &self.cells[model.index()]
    }

    pub fn overall_min(&self, model: ModelKind) -> MetricPair<T> {
        self.minima[model.index()]
    }

    fn check_complete(&self) -> Result<()> {
        for m in ModelKind::ALL {
            for s in ScalerKind::ALL {
                let c = self.cell(m, s);
                if !(c.mse.is_finite() && c.mape.is_finite()) {
                    return Err(Error::config(format!("grid cell ({m}, {s}) is not a finite metric pair")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Delimited,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(Self::Table),
            "delimited" => Ok(Self::Delimited),
            _ => Err(Error::config(format!("unknown report format {s:?}"))),
        }
    }
}

type Metric<T> = (&'static str, fn(&MetricPair<T>) -> T);

fn metrics<T: Scalar>() -> [Metric<T>; 2] {
    [("MSE", |c| c.mse), ("MAPE", |c| c.mape)]
}

fn header() -> Vec<&'static str> {
    let mut h: Vec<&str> = ScalerKind::ALL.iter().map(|s| s.label()).collect();
    h.push(MIN_COLUMN);
    h
}

/// Both metric blocks at 4 decimals.
pub fn render_report<T: Scalar>(grid: &BenchmarkGrid<T>, format: ReportFormat) -> Result<String> {
    grid.check_complete()?;
    Ok(match format {
        ReportFormat::Table => render_table(grid),
        ReportFormat::Delimited => render_delimited(grid, |v| format!("{v:.4}")),
    })
}

/// Delimited grid at full precision, for storage and later re-rendering.
pub fn grid_to_delimited<T: Scalar>(grid: &BenchmarkGrid<T>) -> String {
    render_delimited(grid, |v| v.to_string())
}

fn render_delimited<T: Scalar>(grid: &BenchmarkGrid<T>, fmt: impl Fn(T) -> String) -> String {
    let mut out = format!("metric,model,{}\n", header().join(","));
    for (name, get) in metrics::<T>() {
        for m in ModelKind::ALL {
            let mut line = format!("{name},{}", m.label());
            for c in grid.row(m).iter().chain(std::iter::once(&grid.overall_min(m))) {
                line.push(',');
                line.push_str(&fmt(get(c)));
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

fn render_table<T: Scalar>(grid: &BenchmarkGrid<T>) -> String {
    let first = ModelKind::ALL.iter().map(|m| m.label().len()).max().unwrap_or(0).max("Model".len());
    let head = header();
    let widths: Vec<usize> = head.iter().map(|h| h.len().max(10)).collect();
    let mut out = String::new();
    for (k, (name, get)) in metrics::<T>().into_iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        writeln!(out, "{name}").expect("write to string");
        let mut line = format!("{:<first$}", "Model");
        for (h, w) in head.iter().zip(&widths) {
            write!(line, "  {h:>w$}").expect("write to string");
        }
        writeln!(out, "{line}").expect("write to string");
        for m in ModelKind::ALL {
            let mut line = format!("{:<first$}", m.label());
            for (c, w) in grid.row(m).iter().chain(std::iter::once(&grid.overall_min(m))).zip(&widths) {
                write!(line, "  {:>w$}", format!("{:.4}", get(c))).expect("write to string");
            }
            writeln!(out, "{line}").expect("write to string");
        }
    }
    out
}

/// Reads either delimited rendering back into a grid. The minimum column is recomputed.
pub fn parse_delimited<T: Scalar>(text: &str) -> Result<BenchmarkGrid<T>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(Error::Empty("grid text"))?;
    let expected = format!("metric,model,{}", header().join(","));
    if first.trim() != expected {
        return Err(Error::Parse { line: 1, message: "unexpected grid header".into() });
    }
    let mut cells: Vec<[Option<MetricPair<T>>; 6]> = vec![[None; 6]; ModelKind::ALL.len()];
    let mut filled = [[[false; 6]; 7]; 2];
    for (n, line) in lines {
        let bad = |message: String| Error::Parse { line: n + 1, message };
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 9 {
            return Err(bad(format!("expected 9 fields, got {}", fields.len())));
        }
        let metric = match fields[0] {
            "MSE" => 0,
            "MAPE" => 1,
            other => return Err(bad(format!("unknown metric {other:?}"))),
        };
        let model = ModelKind::from_label(fields[1]).ok_or_else(|| bad(format!("unknown model {:?}", fields[1])))?;
        for (s, raw) in fields[2..8].iter().enumerate() {
            let v: f64 = raw.parse().map_err(|_| bad(format!("bad number {raw:?}")))?;
            let cell = cells[model.index()][s].get_or_insert_with(MetricPair::default);
            if metric == 0 {
                cell.mse = T::lit(v);
            } else {
                cell.mape = T::lit(v);
            }
            if std::mem::replace(&mut filled[metric][model.index()][s], true) {
                return Err(bad(format!("duplicate row for {}", model.label())));
            }
        }
    }
    if filled.iter().flatten().flatten().any(|f| !f) {
        return Err(Error::config("grid text is incomplete"));
    }
    let rows = cells.into_iter().map(|r| r.map(|c| c.unwrap_or_default())).collect();
    BenchmarkGrid::from_cells(rows)
}
