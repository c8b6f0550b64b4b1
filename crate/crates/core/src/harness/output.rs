//! Result rows and their CSV form.

use std::io::Write;

use serde::Serialize;

use crate::stats::EstimateRecord;

pub const HEADER: [&str; 10] = ["experiment", "dim", "n", "p", "reps", "seed", "value", "stderr", "extra_json", "elapsed_ms"];

/// One CSV line. `n` and `p` are empty when the experiment has no such parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub dim: usize,
    pub n: Option<u64>,
    pub p: Option<u64>,
    pub reps: u64,
    pub seed: u64,
    pub value: f64,
    pub stderr: f64,
    /// Diagnostics and parameter echo, keys sorted.
    pub extra: serde_json::Map<String, serde_json::Value>,
    pub elapsed_ms: u64,
}

impl ResultRow {
    pub fn from_record(experiment: &str, dim: usize, n: Option<u64>, p: Option<u64>, rec: EstimateRecord) -> Self {
        let mut extra = rec.extra;
        if !rec.params.is_null() {
            extra.insert("params".into(), rec.params);
        }
        ResultRow { experiment: experiment.into(), dim, n, p, reps: rec.reps, seed: rec.seed, value: rec.value, stderr: rec.stderr, extra, elapsed_ms: rec.elapsed_ms }
    }

    fn fields(&self) -> [String; 10] {
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.experiment.clone(),
            self.dim.to_string(),
            opt(self.n),
            opt(self.p),
            self.reps.to_string(),
            self.seed.to_string(),
            fmt_f64(self.value),
            fmt_f64(self.stderr),
            serde_json::Value::Object(self.extra.clone()).to_string(),
            self.elapsed_ms.to_string(),
        ]
    }
}

/// Shortest round-trip digits; exponent form outside [1e-4, 1e15).
fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "NaN".into()
    } else if a == 0.0 || x.is_infinite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn write_rows<W: Write>(w: W, rows: &[ResultRow]) -> std::io::Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(HEADER)?;
    for r in rows {
        out.write_record(r.fields())?;
    }
    out.flush()
}
