//! CSV datasets and the JSON run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Coeffs,
    Binned,
    Prediction,
    Banding,
}

impl Schema {
    pub fn header(&self) -> &'static [&'static str] {
        match self {
            Schema::Coeffs => &["E_alpha", "E_sum_ij", "abs_c"],
            Schema::Binned => &["Ebar_center", "omega_mid", "mean_sq", "count", "std_err"],
            Schema::Prediction => &["model", "Ebar", "omega", "f", "entropic_factor", "variance"],
            Schema::Banding => &["E_alpha", "E_beta", "abs_o"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Real(f64),
    Count(u64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Count(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Rows of one CSV file. `name` is the file stem.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub schema: Schema,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, schema: Schema) -> Self {
        Self {
            name: name.into(),
            schema,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.schema.header().len());
        self.rows.push(row);
    }

    /// Column `name` as reals; text cells are skipped.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.schema.header().iter().position(|h| *h == name)?;
        Some(
            self.rows
                .iter()
                .filter_map(|r| match &r[k] {
                    Cell::Real(v) => Some(*v),
                    Cell::Count(c) => Some(*c as f64),
                    Cell::Text(_) => None,
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.schema.header().join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Text(t) => t.clone(),
                    Cell::Real(v) => format_sig9(*v),
                    Cell::Count(n) => n.to_string(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest rendering of `v` at 9 significant digits: positional for
/// decimal exponents in [-5, 9), scientific otherwise.
pub fn format_sig9(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `<dir>/<name>.csv` and returns the path.
pub fn emit_dataset(table: &Table, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", table.name));
    write_text(&path, &table.to_csv())?;
    Ok(path)
}

pub fn emit_json(value: &impl Serialize, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("JSON encoding failed: {e}")))?;
    write_text(path, &(text + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(-0.5), "-0.5");
        assert_eq!(format_sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(format_sig9(123456789.4), "123456789");
        assert_eq!(format_sig9(9.9999999999), "10");
        assert_eq!(format_sig9(2.44140625e-4), "0.000244140625");
        assert_eq!(format_sig9(1.23456789012e-7), "1.23456789e-7");
        assert_eq!(format_sig9(6.02214076e23), "6.02214076e23");
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(f64::NAN), "NaN");
    }

    #[test]
    fn headers_are_the_contract() {
        let t = Table::new("x", Schema::Binned);
        assert_eq!(t.to_csv(), "Ebar_center,omega_mid,mean_sq,count,std_err\n");
        assert_eq!(Schema::Prediction.header().join(","), "model,Ebar,omega,f,entropic_factor,variance");
        assert_eq!(Schema::Coeffs.header().join(","), "E_alpha,E_sum_ij,abs_c");
    }

    #[test]
    fn rows_render_in_order() {
        let mut t = Table::new("p", Schema::Prediction);
        t.push(vec!["flat_A_narrow".into(), 0.0.into(), 0.25.into(), 1.5.into(), 0.1.into(), 0.0225.into()]);
        assert_eq!(t.to_csv().lines().nth(1).unwrap(), "flat_A_narrow,0,0.25,1.5,0.1,0.0225");
        assert_eq!(t.column("omega").unwrap(), vec![0.25]);
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_dataset(&Table::new("t", Schema::Coeffs), &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"));
    }
}
