use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Outcome of one row of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    /// Outside the hypotheses of the check (e.g. p ≤ deg f).
    Skipped,
}

/// Overall outcome of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn from_statuses<'a>(rows: impl IntoIterator<Item = &'a Status>) -> Verdict {
        rows.into_iter().fold(Verdict::Pass, |v, s| match s {
            Status::Fail => v.combine(Verdict::Fail),
            Status::Inconclusive => v.combine(Verdict::Inconclusive),
            _ => v,
        })
    }
}

/// Measurements at one prime (and possibly one level).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub p: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    pub status: Status,
    pub values: BTreeMap<String, Value>,
}

impl CheckRow {
    pub fn new(p: u64, m: Option<u32>) -> Self {
        CheckRow {
            p,
            m,
            status: Status::Pass,
            values: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.values.insert(key.to_string(), v.into());
        self
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.values.get(key).and_then(Value::as_f64)
    }

    pub fn get_bool(&self, key: &str) -> Option<bool> {
        self.values.get(key).and_then(Value::as_bool)
    }
}

/// Per-prime measurements, fitted constants and a verdict for one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub check: String,
    pub polynomial: String,
    pub n: usize,
    pub rows: Vec<CheckRow>,
    pub constants: BTreeMap<String, Value>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(check: &str, polynomial: String, n: usize) -> Self {
        BoundReport {
            check: check.to_string(),
            polynomial,
            n,
            rows: Vec::new(),
            constants: BTreeMap::new(),
            verdict: Verdict::Pass,
            notes: Vec::new(),
        }
    }

    /// Sets the verdict from the row statuses combined with `extra`.
    pub fn finish(mut self, extra: Verdict) -> Self {
        self.verdict = Verdict::from_statuses(self.rows.iter().map(|r| &r.status)).combine(extra);
        self
    }

    pub fn rows_for(&self, p: u64) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(move |r| r.p == p)
    }
}

/// A float as JSON, with non-finite values as strings.
pub(crate) fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}
