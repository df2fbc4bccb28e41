use std::fmt::Display;

use serde_json::{json, Value};

/// How a run ended, beyond hard errors.
#[derive(Debug)]
pub enum Status {
    Ok,
    /// Output was written but the check it reports did not hold.
    CheckFailed(String),
    NotRenormalizable(String),
}

pub struct Emitted {
    pub body: String,
    pub status: Status,
}

impl Emitted {
    pub fn ok(body: String) -> Self {
        Emitted { body, status: Status::Ok }
    }
}

/// Provenance written at the top of every output: version, seed and the
/// parameters the run actually used, all as exact literals.
pub struct Header {
    seed: u64,
    params: Vec<(String, String)>,
}

impl Header {
    pub fn new(seed: u64) -> Self {
        Header { seed, params: Vec::new() }
    }

    pub fn param(&mut self, key: &str, value: impl Display) {
        self.params.push((key.to_string(), value.to_string()));
    }

    pub fn comment_line(&self) -> String {
        let mut s = format!("ribbonflow {} seed {}", env!("CARGO_PKG_VERSION"), self.seed);
        for (k, v) in &self.params {
            s.push_str(&format!("; {k} {v}"));
        }
        s
    }

    pub fn csv(&self, cols: &[&str], rows: Vec<Vec<String>>) -> String {
        let mut out = format!("# ribbonflow {}\n# seed: {}\n", env!("CARGO_PKG_VERSION"), self.seed);
        for (k, v) in &self.params {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(cols).expect("in-memory write");
        for r in rows {
            w.write_record(&r).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
        out
    }

    pub fn json(&self, result: Value) -> String {
        let params: serde_json::Map<String, Value> =
            self.params.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let doc = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "params": params,
            "result": result,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }
}
