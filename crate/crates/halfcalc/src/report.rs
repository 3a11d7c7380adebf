//! Deterministic JSON reports: every float is rendered as a fixed
//! 17-significant-digit string so identical runs emit identical bytes.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::calculus::CalculusResult;
use crate::error::{HalfcalcError, Result};
use crate::linalg::CMatrix;

pub const REPORT_SCHEMA: &str = "halfcalc-report/1";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex_value(z: Complex64) -> Value {
    json!([fmt_f64(z.re), fmt_f64(z.im)])
}

pub fn matrix_value(m: &CMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| {
            let row: Vec<Value> = (0..m.cols()).map(|j| complex_value(m[(i, j)])).collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

pub fn calculus_result_value(r: &CalculusResult) -> Value {
    json!({
        "path": r.path.to_string(),
        "matrix": matrix_value(&r.matrix),
        "error_estimate": fmt_f64(r.error_estimate),
        "tolerance": fmt_f64(r.tolerance),
        "metadata": r.metadata.iter()
            .map(|(k, v)| json!([k, v]))
            .collect::<Vec<_>>(),
        "warnings": r.warnings,
    })
}

/// A pass/fail statement tied to the numeric residual that justifies it.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, residual: f64, threshold: f64, detail: &str) -> Self {
        Self {
            name: name.to_string(),
            pass: residual <= threshold,
            residual,
            threshold,
            detail: detail.to_string(),
        }
    }

    /// a verdict decided elsewhere, still carrying its residual
    pub fn stated(name: &str, pass: bool, residual: f64, detail: &str) -> Self {
        Self {
            name: name.to_string(),
            pass,
            residual,
            threshold: f64::NAN,
            detail: detail.to_string(),
        }
    }

    fn to_value(&self) -> Value {
        json!({
            "name": self.name,
            "pass": self.pass,
            "residual": fmt_f64(self.residual),
            "threshold": fmt_f64(self.threshold),
            "detail": self.detail,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    command: String,
    inputs: Value,
    results: Vec<(String, Value)>,
    verdicts: Vec<Verdict>,
    provenance: Vec<(String, Value)>,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            results: Vec::new(),
            verdicts: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn add_result(&mut self, key: &str, value: Value) {
        self.results.push((key.to_string(), value));
    }

    pub fn add_verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn add_provenance(&mut self, key: &str, value: Value) {
        self.provenance.push((key.to_string(), value));
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_value(&self) -> Value {
        let mut prov = self.provenance.clone();
        prov.push(("version".into(), json!(env!("CARGO_PKG_VERSION"))));
        prov.push((
            "threads".into(),
            json!(std::env::var("HALFCALC_THREADS").unwrap_or_else(|_| "default".into())),
        ));
        json!({
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results.iter().cloned().collect::<serde_json::Map<_, _>>(),
            "verdicts": self.verdicts.iter().map(Verdict::to_value).collect::<Vec<_>>(),
            "provenance": prov.into_iter().collect::<serde_json::Map<_, _>>(),
        })
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report is plain data");
        s.push('\n');
        s
    }
}

/// Re-parse and re-validate an emitted report: schema and command present,
/// every verdict carries a parseable residual and a boolean flag.
pub fn check_report(text: &str) -> Result<()> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| HalfcalcError::Validation(format!("report parse: {e}")))?;
    if v.get("schema").and_then(Value::as_str) != Some(REPORT_SCHEMA) {
        return Err(HalfcalcError::Validation(format!(
            "report schema must be '{REPORT_SCHEMA}'"
        )));
    }
    if v.get("command").and_then(Value::as_str).unwrap_or("").is_empty() {
        return Err(HalfcalcError::Validation("report has no command".into()));
    }
    for key in ["inputs", "results", "provenance"] {
        if v.get(key).is_none() {
            return Err(HalfcalcError::Validation(format!("report lacks '{key}'")));
        }
    }
    let verdicts = v
        .get("verdicts")
        .and_then(Value::as_array)
        .ok_or_else(|| HalfcalcError::Validation("report lacks a verdict list".into()))?;
    for entry in verdicts {
        let name = entry.get("name").and_then(Value::as_str).unwrap_or("");
        if name.is_empty() {
            return Err(HalfcalcError::Validation("verdict without a name".into()));
        }
        if entry.get("pass").and_then(Value::as_bool).is_none() {
            return Err(HalfcalcError::Validation(format!(
                "verdict '{name}' has no boolean pass flag"
            )));
        }
        let residual = entry.get("residual").and_then(Value::as_str).unwrap_or("");
        if residual.parse::<f64>().is_err() {
            return Err(HalfcalcError::Validation(format!(
                "verdict '{name}' has no parseable residual"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width_sig_digits() {
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_f64(-1.0 / 3.0), "-3.3333333333333331e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        // 17 significant digits round-trip every f64 exactly
        for x in [std::f64::consts::PI, 1e-300, 123456789.123456789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn report_renders_and_checks() {
        let mut rep = Report::new("demo", json!({"n": 2}));
        rep.add_result("matrix", matrix_value(&CMatrix::identity(2)));
        rep.add_verdict(Verdict::new("small", 1e-12, 1e-9, "residual under threshold"));
        rep.add_provenance("seed", json!("7"));
        let text = rep.render();
        check_report(&text).unwrap();
        assert!(rep.all_pass());
        assert!(text.contains("halfcalc-report/1"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let build = || {
            let mut rep = Report::new("demo", json!({"x": fmt_f64(0.1)}));
            rep.add_result("value", complex_value(Complex64::new(1.0 / 3.0, -2.0)));
            rep.add_verdict(Verdict::stated("noted", false, 0.5, "stated elsewhere"));
            rep.render()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn check_rejects_malformed_reports() {
        assert!(check_report("not json").is_err());
        assert!(check_report(r#"{"schema": "other"}"#).is_err());
        let missing_residual = r#"{
            "schema": "halfcalc-report/1", "command": "x",
            "inputs": {}, "results": {}, "provenance": {},
            "verdicts": [{"name": "v", "pass": true}]
        }"#;
        assert!(check_report(missing_residual).is_err());
    }
}
