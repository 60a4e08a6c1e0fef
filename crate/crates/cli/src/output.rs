//! Report assembly: a JSON document and a parallel plain-text rendering.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{Map, Number, Value};

use framesym::characters::AuditReport;

/// Rounds to 12 significant digits; magnitudes below 1e-12 become 0.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x.abs() < 1e-12 {
        return 0.0;
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt(x: f64) -> String {
    let r = round12(x);
    if r.fract() == 0.0 && r.abs() < 1e15 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

fn normalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round12(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect())
        }
        other => other,
    }
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn matrix_columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter()
        .map(|c| c.iter().copied().collect())
        .collect()
}

#[derive(Default)]
pub struct Report {
    json: Map<String, Value>,
    text: Vec<String>,
    failed: bool,
}

impl Report {
    pub fn new(kind: &str) -> Self {
        let mut r = Self::default();
        r.json.insert("input".into(), Value::String(kind.into()));
        r
    }

    pub fn put(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.json.insert(key.into(), v);
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    pub fn fail(&mut self) {
        self.failed = true;
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    /// Records an audit under `key`; any failed check fails the report.
    pub fn audit(&mut self, key: &str, title: &str, report: &AuditReport) {
        self.line(format!("{title}:"));
        for c in &report.checks {
            let mark = if c.satisfied { "pass" } else { "FAIL" };
            let element = c
                .element
                .as_deref()
                .map(|e| format!(" {e}"))
                .unwrap_or_default();
            let scope = match serde_json::to_value(&c.scope)
                .ok()
                .and_then(|v| v.get("vertices").cloned())
            {
                Some(v) => format!(" on {v}"),
                None => String::new(),
            };
            let counts: Vec<String> = c
                .counts
                .iter()
                .map(|(k, v)| format!("{k}={}", fmt(*v)))
                .collect();
            self.line(format!(
                "  [{mark}] {}{element}{scope}: {} (value {}; {})",
                c.rule,
                c.requirement,
                fmt(c.value),
                counts.join(", ")
            ));
            if !c.satisfied {
                self.line(format!(
                    "         {}; rule: {}",
                    c.consequence.as_deref().unwrap_or(""),
                    c.citation
                ));
            }
        }
        let passed = report.passed();
        if !passed {
            self.fail();
        }
        self.put(
            key,
            serde_json::json!({ "passed": passed, "checks": report.checks }),
        );
    }

    pub fn render_json(mut self) -> String {
        self.json.insert(
            "necessary_conditions_failed".into(),
            Value::Bool(self.failed),
        );
        let v = normalize(Value::Object(self.json));
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_text(self) -> String {
        let mut s = self.text.join("\n");
        s.push('\n');
        s
    }
}
