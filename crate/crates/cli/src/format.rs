//! Fixed decimal formatting shared by the text tables and the JSON reports,
//! so both carry identical strings.

use serde::Serialize;

/// A value with the exact string used for it in rendered tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Num {
    /// `null` in JSON when not finite.
    pub value: f64,
    pub text: String,
}

impl Num {
    pub fn new(value: f64, text: String) -> Self {
        Self { value, text }
    }

    pub fn rate(value: f64) -> Self {
        Self::new(value, rate(value))
    }

    pub fn fdr(value: f64) -> Self {
        Self::new(value, fdr(value))
    }

    pub fn score(value: f64) -> Self {
        Self::new(value, score(value))
    }
}

/// Error rates: three decimals.
pub fn rate(v: f64) -> String {
    format!("{v:.3}")
}

/// FDR values: three decimals, or four when the fourth decimal is a 5, as in
/// 0.9205, so that half-way values are not silently rounded.
pub fn fdr(v: f64) -> String {
    let four = format!("{v:.4}");
    if four.ends_with('5') {
        four
    } else {
        format!("{v:.3}")
    }
}

/// Thresholds in score units.
pub fn score(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.4}")
    }
}

/// Column heading for an FMR target exponent, e.g. `10^-3`.
pub fn exponent(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("10^-{}", x as i64)
    } else {
        format!("10^-{x}")
    }
}

/// Quotes a CSV field when it holds a delimiter, quote or line break.
pub fn csv_field(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"")).into()
    } else {
        s.into()
    }
}

/// Lays out rows as left-aligned first column and right-aligned data columns.
pub fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let ncol = header.len();
    let mut width = vec![0usize; ncol];
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i == 0 {
                line.push_str(&format!("{cell:<w$}", w = width[0]));
            } else {
                line.push_str(&format!("  {cell:>w$}", w = width[i]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
