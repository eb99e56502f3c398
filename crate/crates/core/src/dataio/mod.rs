//! Monthly indicator panel: parsing, validation, imputation and splitting.

mod catalog;
mod impute;
mod split;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};
use ndarray::{s, Array2, Axis};

pub use catalog::{CatalogEntry, FeatureCatalog};
pub use impute::backward_fill;
pub use split::{chronological_split, SplitSpec};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The bundled reference panel: 48 month-end rows, 2021-01 through 2024-12.
pub const REFERENCE_INDICATORS: &str = include_str!("../../data/indicators.csv");

/// Monthly U-3 rate for the same 48 months, in the target file format.
pub const REFERENCE_TARGET: &str = include_str!("../../data/unemployment_rate.csv");

/// Header of the target file.
pub const TARGET_HEADER: [&str; 2] = ["date", "unemployment_rate"];

pub fn is_month_end(date: NaiveDate) -> bool {
    date.succ_opt().is_none_or(|next| next.month() != date.month())
}

/// Date-indexed matrix of indicator columns plus an optional target.
///
/// Cells are `None` where the source file had an empty field; [`Dataset::impute`]
/// removes every `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    dates: Vec<NaiveDate>,
    features: Array2<Option<T>>,
    feature_names: Vec<String>,
    target: Option<Vec<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        dates: Vec<NaiveDate>,
        features: Array2<Option<T>>,
        feature_names: Vec<String>,
        target: Option<Vec<T>>,
    ) -> Result<Self> {
        if features.nrows() != dates.len() {
            return Err(Error::dim(dates.len(), features.nrows()));
        }
        if features.ncols() != feature_names.len() {
            return Err(Error::dim(feature_names.len(), features.ncols()));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::config(format!("duplicate feature `{name}`")));
            }
        }
        for pair in dates.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateDate(pair[1]));
            }
            if pair[0] > pair[1] {
                return Err(Error::config(format!("dates out of order at {}", pair[1])));
            }
        }
        if let Some(&d) = dates.iter().find(|d| !is_month_end(**d)) {
            return Err(Error::NotMonthEnd(d));
        }
        if let Some(t) = &target {
            if t.len() != dates.len() {
                return Err(Error::dim(dates.len(), t.len()));
            }
            if let Some((i, &v)) = t.iter().enumerate().find(|(_, v)| !(**v > T::zero())) {
                return Err(Error::NonPositiveRate { date: dates[i], value: v.as_f64() });
            }
        }
        Ok(Self { dates, features, feature_names, target })
    }

    /// Builds an already-complete dataset from a dense matrix.
    pub fn from_dense(
        dates: Vec<NaiveDate>,
        features: Array2<T>,
        feature_names: Vec<String>,
        target: Option<Vec<T>>,
    ) -> Result<Self> {
        Self::new(dates, features.mapv(Some), feature_names, target)
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_cols(&self) -> usize {
        self.feature_names.len()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn raw_features(&self) -> &Array2<Option<T>> {
        &self.features
    }

    pub fn target(&self) -> Option<&[T]> {
        self.target.as_deref()
    }

    pub(crate) fn require_target(&self) -> Result<&[T]> {
        self.target().ok_or_else(|| Error::config("dataset has no target column"))
    }

    pub fn column_index(&self, code: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == code)
    }

    pub fn column(&self, j: usize) -> Vec<Option<T>> {
        self.features.column(j).to_vec()
    }

    pub fn missing_count(&self) -> usize {
        self.features.iter().filter(|c| c.is_none()).count()
    }

    /// Dense feature matrix; fails if any cell is still missing.
    pub fn feature_matrix(&self) -> Result<Array2<T>> {
        for (j, col) in self.features.axis_iter(Axis(1)).enumerate() {
            if col.iter().any(Option::is_none) {
                return Err(Error::NotImputed(self.feature_names[j].clone()));
            }
        }
        Ok(self.features.mapv(|c| c.unwrap_or_else(T::nan)))
    }

    /// Replaces every missing cell by backward fill (forward fill for a trailing gap).
    pub fn impute(&self) -> Result<Self> {
        let mut out = self.features.clone();
        if self.n_rows() > 0 {
            for j in 0..self.n_cols() {
                let filled = backward_fill(&self.column(j)).map_err(|e| match e {
                    Error::AllMissing(_) => Error::AllMissing(self.feature_names[j].clone()),
                    other => other,
                })?;
                for (cell, v) in out.column_mut(j).iter_mut().zip(filled) {
                    *cell = Some(v);
                }
            }
        }
        Ok(Self { features: out, ..self.clone() })
    }

    /// Contiguous block of rows `[start, end)`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        Self {
            dates: self.dates[start..end].to_vec(),
            features: self.features.slice(s![start..end, ..]).to_owned(),
            feature_names: self.feature_names.clone(),
            target: self.target.as_ref().map(|t| t[start..end].to_vec()),
        }
    }

    /// Keeps only the named columns, in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, codes: &[S]) -> Result<Self> {
        let idx = codes
            .iter()
            .map(|c| {
                self.column_index(c.as_ref())
                    .ok_or_else(|| Error::UnknownColumn(c.as_ref().to_owned()))
            })
            .collect::<Result<Vec<_>>>()?;
        let features = self.features.select(Axis(1), &idx);
        Self::new(
            self.dates.clone(),
            features,
            codes.iter().map(|c| c.as_ref().to_owned()).collect(),
            self.target.clone(),
        )
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.feature_names != other.feature_names {
            return Err(Error::config("cannot concatenate datasets with different columns"));
        }
        let mut dates = self.dates.clone();
        dates.extend_from_slice(&other.dates);
        let features = ndarray::concatenate(Axis(0), &[self.features.view(), other.features.view()])
            .map_err(|_| Error::dim(self.n_cols(), other.n_cols()))?;
        let target = match (&self.target, &other.target) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            (None, None) => None,
            _ => return Err(Error::config("cannot concatenate datasets with and without target")),
        };
        Self::new(dates, features, self.feature_names.clone(), target)
    }

    pub fn with_target(&self, target: Vec<T>) -> Result<Self> {
        Self::new(self.dates.clone(), self.features.clone(), self.feature_names.clone(), Some(target))
    }

    /// Pairs target values with their dates.
    pub fn target_series(&self) -> Option<Vec<(NaiveDate, T)>> {
        self.target.as_ref().map(|t| self.dates.iter().copied().zip(t.iter().copied()).collect())
    }

    /// Pairs the features of month `t` with the target of month `t + horizon`.
    ///
    /// The last `horizon` rows are dropped. `horizon = 0` is the nowcast setting.
    pub fn shift_target(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Ok(self.clone());
        }
        let target = self.require_target()?;
        if horizon >= self.n_rows() {
            return Err(Error::config(format!(
                "horizon {horizon} leaves no rows out of {}",
                self.n_rows()
            )));
        }
        let keep = self.n_rows() - horizon;
        let mut out = self.slice_rows(0, keep);
        out.target = Some(target[horizon..].to_vec());
        Ok(out)
    }

    /// Serializes to the comma-delimited indicator format (target omitted).
    pub fn to_delimited(&self) -> String {
        let mut out = String::from("date");
        for name in &self.feature_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, date) in self.dates.iter().enumerate() {
            let _ = write!(out, "{}", date.format("%Y-%m-%d"));
            for cell in self.features.row(i) {
                out.push(',');
                if let Some(v) = cell {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}

fn detect_delimiter(header: &str) -> char {
    if header.contains('\t') {
        '\t'
    } else {
        ','
    }
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| Error::Parse {
        line,
        message: format!("bad date `{}`: {e}", s.trim()),
    })
}

fn parse_value<T: Scalar>(s: &str, line: usize) -> Result<Option<T>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(T::lit(v))),
        _ => Err(Error::Parse { line, message: format!("unparseable numeral `{s}`") }),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Parses an indicator file (`date,<code>,...`, comma or tab delimited).
pub fn parse_dataset<T: Scalar>(text: &str, catalog: &FeatureCatalog) -> Result<Dataset<T>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = data_lines(text);
    let (_, header) = lines.next().ok_or(Error::Empty("indicator file has no header"))?;
    let delim = detect_delimiter(header);
    let mut fields = header.split(delim).map(str::trim);
    match fields.next() {
        Some("date") => {}
        other => {
            return Err(Error::Parse {
                line: 1,
                message: format!("first header must be `date`, got `{}`", other.unwrap_or("")),
            })
        }
    }
    let names: Vec<String> = fields.map(str::to_owned).collect();
    if let Some(bad) = names.iter().find(|n| !catalog.contains(n)) {
        return Err(Error::UnknownColumn(bad.clone()));
    }

    let mut rows: Vec<(NaiveDate, Vec<Option<T>>)> = Vec::new();
    for (line, text) in lines {
        let cells: Vec<&str> = text.split(delim).collect();
        if cells.len() != names.len() + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", names.len() + 1, cells.len()),
            });
        }
        let date = parse_date(cells[0], line)?;
        if !is_month_end(date) {
            return Err(Error::NotMonthEnd(date));
        }
        let values = cells[1..].iter().map(|c| parse_value(c, line)).collect::<Result<Vec<_>>>()?;
        rows.push((date, values));
    }
    rows.sort_by_key(|(d, _)| *d);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateDate(w[0].0));
    }

    let n = rows.len();
    let mut features = Array2::from_elem((n, names.len()), None);
    let mut dates = Vec::with_capacity(n);
    for (i, (date, values)) in rows.into_iter().enumerate() {
        dates.push(date);
        for (j, v) in values.into_iter().enumerate() {
            features[[i, j]] = v;
        }
    }
    Dataset::new(dates, features, names, None)
}

/// Parses a target file with header `date,unemployment_rate`.
pub fn parse_target<T: Scalar>(text: &str) -> Result<Vec<(NaiveDate, T)>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = data_lines(text);
    let (_, header) = lines.next().ok_or(Error::Empty("target file has no header"))?;
    let delim = detect_delimiter(header);
    let fields: Vec<&str> = header.split(delim).map(str::trim).collect();
    if fields != TARGET_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("target header must be `date,unemployment_rate`, got `{header}`"),
        });
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in lines {
        let cells: Vec<&str> = text.split(delim).collect();
        if cells.len() != 2 {
            return Err(Error::Parse { line, message: format!("expected 2 fields, found {}", cells.len()) });
        }
        let date = parse_date(cells[0], line)?;
        if !is_month_end(date) {
            return Err(Error::NotMonthEnd(date));
        }
        if !seen.insert(date) {
            return Err(Error::DuplicateDate(date));
        }
        let value = parse_value::<T>(cells[1], line)?
            .ok_or_else(|| Error::Parse { line, message: "missing rate".into() })?;
        out.push((date, value));
    }
    Ok(out)
}

/// Attaches the target column by exact date match.
pub fn join_target<T: Scalar>(ds: &Dataset<T>, series: &[(NaiveDate, T)]) -> Result<Dataset<T>> {
    let by_date: BTreeMap<NaiveDate, T> = series.iter().copied().collect();
    let target = ds
        .dates()
        .iter()
        .map(|d| {
            let v = *by_date.get(d).ok_or(Error::MissingTargetDate(*d))?;
            if v > T::zero() {
                Ok(v)
            } else {
                Err(Error::NonPositiveRate { date: *d, value: v.as_f64() })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ds.with_target(target)
}

/// Reference panel parsed against the reference catalog.
pub fn reference_dataset<T: Scalar>() -> Dataset<T> {
    parse_dataset(REFERENCE_INDICATORS, &FeatureCatalog::reference())
        .expect("bundled indicator file is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn reference_panel_shape_and_values() {
        let ds = reference_dataset::<f64>();
        assert_eq!(ds.n_rows(), 48);
        assert_eq!(ds.n_cols(), 30);
        assert_eq!(ds.missing_count(), 0);
        assert_eq!(ds.dates()[0], d(2021, 1, 31));
        assert_eq!(ds.dates()[47], d(2024, 12, 31));
        let m = ds.feature_matrix().unwrap();
        assert_eq!(m[[0, ds.column_index("UNITEDSTACONJOBCLA").unwrap()]], 4658.0);
        assert_eq!(m[[0, ds.column_index("USAPFBC").unwrap()]], 51.2);
    }

    #[test]
    fn header_only_gives_empty_dataset() {
        let header = REFERENCE_INDICATORS.lines().next().unwrap();
        let ds = parse_dataset::<f64>(header, &FeatureCatalog::reference()).unwrap();
        assert_eq!(ds.n_rows(), 0);
        assert_eq!(ds.n_cols(), 30);
        assert_eq!(ds.impute().unwrap().n_rows(), 0);
    }

    #[test]
    fn tab_delimited_and_missing_cells() {
        let text = "date\tUSAPFBC\tUSADBT\n2021-01-31\t\t1.5\n2021-02-28\t2.0\t\n";
        let ds = parse_dataset::<f64>(text, &FeatureCatalog::reference()).unwrap();
        assert_eq!(ds.missing_count(), 2);
        assert_eq!(ds.column(0), vec![None, Some(2.0)]);
        let filled = ds.impute().unwrap().feature_matrix().unwrap();
        assert_eq!(filled.column(0).to_vec(), vec![2.0, 2.0]);
        assert_eq!(filled.column(1).to_vec(), vec![1.5, 1.5]);
    }

    #[test]
    fn rows_are_sorted_by_date() {
        let text = "date,USAPFBC\n2021-02-28,2\n2021-01-31,1\n";
        let ds = parse_dataset::<f64>(text, &FeatureCatalog::reference()).unwrap();
        assert_eq!(ds.dates(), &[d(2021, 1, 31), d(2021, 2, 28)]);
        assert_eq!(ds.column(0), vec![Some(1.0), Some(2.0)]);
    }

    #[test]
    fn parse_errors() {
        let cat = FeatureCatalog::reference();
        let dup = "date,USAPFBC\n2021-01-31,1\n2021-01-31,2\n";
        assert!(matches!(parse_dataset::<f64>(dup, &cat), Err(Error::DuplicateDate(_))));
        let mid = "date,USAPFBC\n2021-01-15,1\n";
        assert!(matches!(parse_dataset::<f64>(mid, &cat), Err(Error::NotMonthEnd(_))));
        let unknown = "date,NOPE\n2021-01-31,1\n";
        assert!(matches!(parse_dataset::<f64>(unknown, &cat), Err(Error::UnknownColumn(c)) if c == "NOPE"));
        let bad = "date,USAPFBC\n2021-01-31,1.2.3\n";
        assert!(matches!(parse_dataset::<f64>(bad, &cat), Err(Error::Parse { line: 2, .. })));
        let leap = "date,USAPFBC\n2024-02-29,1\n";
        assert!(parse_dataset::<f64>(leap, &cat).is_ok());
    }

    #[test]
    fn join_target_exact_cover_and_missing_date() {
        let ds = reference_dataset::<f64>();
        let series: Vec<_> = ds.dates().iter().map(|&d| (d, 4.0)).collect();
        let joined = join_target(&ds, &series).unwrap();
        assert_eq!(joined.target().unwrap().len(), 48);

        let short: Vec<_> = series.iter().copied().filter(|(d0, _)| *d0 != d(2024, 12, 31)).collect();
        match join_target(&ds, &short) {
            Err(Error::MissingTargetDate(date)) => assert_eq!(date, d(2024, 12, 31)),
            other => panic!("unexpected {other:?}"),
        }
        let mut zero = series.clone();
        zero[3].1 = 0.0;
        assert!(matches!(join_target(&ds, &zero), Err(Error::NonPositiveRate { .. })));
    }

    #[test]
    fn join_then_extract_restricts_series() {
        let ds = reference_dataset::<f64>().slice_rows(10, 20);
        let full: Vec<_> = reference_dataset::<f64>()
            .dates()
            .iter()
            .enumerate()
            .map(|(i, &d)| (d, 3.0 + i as f64 * 0.1))
            .collect();
        let back = join_target(&ds, &full).unwrap().target_series().unwrap();
        assert_eq!(back, full[10..20].to_vec());
    }

    #[test]
    fn target_file_parsing() {
        let text = "date,unemployment_rate\n2021-01-31,6.4\n2021-02-28,6.2\n";
        let s = parse_target::<f64>(text).unwrap();
        assert_eq!(s, vec![(d(2021, 1, 31), 6.4), (d(2021, 2, 28), 6.2)]);
        assert!(parse_target::<f64>("date,rate\n").is_err());
    }

    #[test]
    fn horizon_shift_drops_tail() {
        let ds = reference_dataset::<f64>();
        let t: Vec<f64> = (0..48).map(|i| 1.0 + i as f64).collect();
        let ds = ds.with_target(t).unwrap();
        let h = ds.shift_target(2).unwrap();
        assert_eq!(h.n_rows(), 46);
        assert_eq!(h.target().unwrap()[0], 3.0);
        assert_eq!(h.dates()[0], ds.dates()[0]);
    }

    #[test]
    fn generic_over_f32() {
        let ds = reference_dataset::<f32>();
        assert_eq!(ds.feature_matrix().unwrap()[[5, 1]], 69.0f32);
    }
}
