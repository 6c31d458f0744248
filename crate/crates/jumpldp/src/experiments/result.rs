//! Tabular study output with deterministic serialization.
//!
//! Every study returns a [`StudyResult`]: named parameters, a rectangular
//! table of numeric rows (one per ladder rung), named summary scalars
//! (fitted slopes, extrapolated limits, medians), and named boolean
//! verdicts. Rows must be complete and free of NaN; a rung whose quantity
//! is genuinely infinite (a log of an exact zero probability, a divergent
//! action) stores `inf` or `-inf` and the study records what that means in
//! a verdict or flag.
//!
//! Serialization is deterministic: floats print through [`fmt_float`]
//! (full precision, fixed spellings for infinities), keys keep insertion
//! order, and no timestamps or machine state are embedded, so reruns with
//! the same inputs produce byte-identical files.

use crate::numeric::fmt_float;

#[derive(Debug, Clone)]
pub struct StudyResult {
    /// Study name, fixed per study function.
    pub study: String,
    /// Input parameters as key/value strings, in insertion order.
    pub params: Vec<(String, String)>,
    /// Column names, one per entry of each row.
    pub columns: Vec<String>,
    /// One row per ladder rung; lengths always match `columns`.
    pub rows: Vec<Vec<f64>>,
    /// Named derived scalars, in insertion order.
    pub summary: Vec<(String, f64)>,
    /// Named checks; the study passes when all hold.
    pub verdicts: Vec<(String, bool)>,
}

impl StudyResult {
    pub fn new(study: &str, columns: &[&str]) -> StudyResult {
        assert!(!columns.is_empty(), "a study table needs columns");
        StudyResult {
            study: study.to_string(),
            params: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl std::fmt::Display) {
        self.params.push((key.to_string(), value.to_string()));
    }

    /// Append a rung. Panics on arity mismatch or NaN entries: both are
    /// bugs in the calling study, which must encode missing quantities as
    /// signed infinities plus a verdict instead.
    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row arity {} does not match {} columns",
            row.len(),
            self.columns.len()
        );
        assert!(
            row.iter().all(|v| !v.is_nan()),
            "NaN entry in study row {row:?}"
        );
        self.rows.push(row);
    }

    pub fn set_summary(&mut self, name: &str, value: f64) {
        assert!(!value.is_nan(), "NaN summary value for {name}");
        self.summary.push((name.to_string(), value));
    }

    pub fn set_verdict(&mut self, name: &str, ok: bool) {
        self.verdicts.push((name.to_string(), ok));
    }

    pub fn summary_value(&self, name: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }

    pub fn verdict(&self, name: &str) -> Option<bool> {
        self.verdicts.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// True when every recorded verdict holds.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|(_, ok)| *ok)
    }

    /// Flat CSV: `#`-prefixed metadata lines (study name, parameters,
    /// summary scalars, verdicts, overall pass), then a header line, then
    /// one data row per rung at full float precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# study: {}\n", self.study));
        for (k, v) in &self.params {
            out.push_str(&format!("# param {k} = {v}\n"));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# summary {k} = {}\n", fmt_float(*v)));
        }
        for (k, ok) in &self.verdicts {
            out.push_str(&format!("# verdict {k} = {ok}\n"));
        }
        out.push_str(&format!("# passed = {}\n", self.passed()));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON object with `study`, `params`, `columns`, `rows`, `summary`,
    /// `verdicts`, and `passed`. Infinities have no JSON number form and
    /// serialize as `null`; the CSV form keeps their signs.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        out.push_str(&format!("\"study\":{}", json_string(&self.study)));
        out.push_str(",\"params\":{");
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}:{}", json_string(k), json_string(v)));
        }
        out.push_str("},\"columns\":[");
        for (i, c) in self.columns.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&json_string(c));
        }
        out.push_str("],\"rows\":[");
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&json_number(*v));
            }
            out.push(']');
        }
        out.push_str("],\"summary\":{");
        for (i, (k, v)) in self.summary.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}:{}", json_string(k), json_number(*v)));
        }
        out.push_str("},\"verdicts\":{");
        for (i, (k, ok)) in self.verdicts.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}:{ok}", json_string(k)));
        }
        out.push_str(&format!("}},\"passed\":{}}}", self.passed()));
        out
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        fmt_float(v)
    } else {
        "null".to_string()
    }
}
