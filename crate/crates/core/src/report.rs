//! Output envelope shared by every CLI command.
//!
//! JSON output is a single object with a fixed field order. Floats use the
//! shortest representation that parses back to the same value, so identical
//! inputs produce byte-identical output.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::inequalities::Term;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub terms: Vec<Term>,
    pub margins: Vec<f64>,
    pub holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    pub details: Value,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    pub timings_ms: Option<f64>,
}

impl Envelope {
    pub fn new(command: &str, config: Value) -> Self {
        Envelope {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            terms: Vec::new(),
            margins: Vec::new(),
            holds: None,
            witness: None,
            details: Value::Null,
            warnings: Vec::new(),
            error: None,
            timings_ms: None,
        }
    }

    pub fn failure(command: &str, config: Value, kind: &str, message: String) -> Self {
        let mut env = Envelope::new(command, config);
        env.error = Some(ErrorInfo {
            kind: kind.to_string(),
            message,
        });
        env
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
                s.push('\n');
                s
            }
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Human => self.render_human(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::from("kind,label,value\n");
        for t in &self.terms {
            let _ = writeln!(out, "term,{},{}", csv_field(&t.label), t.value);
        }
        for (i, m) in self.margins.iter().enumerate() {
            let _ = writeln!(out, "margin,{i},{m}");
        }
        if let Some(h) = self.holds {
            let _ = writeln!(out, "holds,,{h}");
        }
        if let Some(Value::Array(rows)) = self.details.get("curve") {
            out.push_str("\nx,f,P,AP\n");
            for row in rows {
                let cell = |k: &str| row.get(k).map(Value::to_string).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    cell("x"),
                    cell("f"),
                    cell("P"),
                    cell("AP")
                );
            }
        }
        if let Some(e) = &self.error {
            let _ = writeln!(
                out,
                "error,{},{}",
                csv_field(&e.kind),
                csv_field(&e.message)
            );
        }
        out
    }

    fn render_human(&self) -> String {
        let mut out = format!("{}\n", self.command);
        if let Some(e) = &self.error {
            let _ = writeln!(out, "  error ({}): {}", e.kind, e.message);
            return out;
        }
        for t in &self.terms {
            let _ = writeln!(out, "  {:<32} {}", t.label, t.value);
        }
        if !self.margins.is_empty() {
            let margins: Vec<String> = self.margins.iter().map(|m| format!("{m:e}")).collect();
            let _ = writeln!(out, "  margins: {}", margins.join(", "));
        }
        if let Some(h) = self.holds {
            let _ = writeln!(out, "  holds: {h}");
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "  witness: {w}");
        }
        if let Some(Value::Array(rows)) = self.details.get("fixtures") {
            for row in rows {
                let get = |k: &str| row.get(k).and_then(Value::as_str).unwrap_or("");
                let pass = row.get("pass").and_then(Value::as_bool).unwrap_or(false);
                let _ = writeln!(
                    out,
                    "  [{}] {:<36} {:<12} expect {:<6} got {}",
                    if pass { "pass" } else { "FAIL" },
                    get("file"),
                    get("check"),
                    get("expect"),
                    get("outcome"),
                );
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
