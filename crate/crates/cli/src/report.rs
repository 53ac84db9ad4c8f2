//! Experiment reports and their JSON and CSV renderings.

use std::collections::BTreeMap;
use std::io::Write;

use freechaos_core::{FreenessVerdict, SequenceTrace, ENGINE_VERSION};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Error;

/// One expectation of an experiment, such as "the Wigner verdict is free".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub inputs: BTreeMap<String, Value>,
    pub values: BTreeMap<String, Value>,
    pub verdicts: Vec<FreenessVerdict>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<SequenceTrace>,
    pub runtime_ms: u64,
    pub engine_version: String,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            inputs: BTreeMap::new(),
            values: BTreeMap::new(),
            verdicts: Vec::new(),
            checks: Vec::new(),
            traces: Vec::new(),
            runtime_ms: 0,
            engine_version: ENGINE_VERSION.to_string(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.to_string(), to_value(value));
    }

    pub fn value(&mut self, key: &str, value: impl Serialize) {
        self.values.insert(key.to_string(), to_value(value));
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    /// True when every check holds.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String, Error> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Sequence traces as one row per index, or the scalar values as `name,value`
    /// rows when the experiment has no traces.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), Error> {
        let mut w = csv::Writer::from_writer(out);
        if self.traces.is_empty() {
            w.write_record(["name", "value"])?;
            for (k, v) in &self.values {
                let cell = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                w.write_record([k.as_str(), cell.as_str()])?;
            }
        } else {
            let width = self
                .traces
                .iter()
                .map(|t| t.contraction_trends.len())
                .max()
                .unwrap_or(0);
            let mut header: Vec<String> = [
                "kind",
                "index",
                "cov_squares",
                "cov_expansion",
                "fourth_moment_f",
                "fourth_moment_g",
                "l4_norm_f",
                "l4_norm_g",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            header.extend((1..=width).map(|p| format!("nested_norm_{p}")));
            header.extend((1..=width).map(|p| format!("star_norm_{p}")));
            w.write_record(&header)?;
            for t in &self.traces {
                for r in &t.records {
                    let mut row = vec![
                        t.kind.as_str().to_string(),
                        r.index.to_string(),
                        r.cov_squares.to_string(),
                        r.cov_expansion.to_string(),
                        r.fourth_moment_f.to_string(),
                        r.fourth_moment_g.to_string(),
                        r.l4_norm_f.to_string(),
                        r.l4_norm_g.to_string(),
                    ];
                    for p in 0..width {
                        row.push(
                            r.contraction_norms
                                .get(p)
                                .map(f64::to_string)
                                .unwrap_or_default(),
                        );
                    }
                    for p in 0..width {
                        row.push(r.star_norms.get(p).map(f64::to_string).unwrap_or_default());
                    }
                    w.write_record(&row)?;
                }
            }
        }
        w.flush().map_err(|e| Error::Io("csv output".into(), e))?;
        Ok(())
    }
}

fn to_value(v: impl Serialize) -> Value {
    // non-finite floats have no JSON form and become null
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_only_when_all_checks_hold() {
        let mut r = Report::new("demo");
        r.value("x", 1.5);
        r.check("a", true, "");
        assert!(r.passed());
        r.check("b", false, "x too small");
        assert!(!r.passed());
        assert_eq!(r.failed_checks().count(), 1);
        let back: Report = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_of_values() {
        let mut r = Report::new("demo");
        r.value("alpha", 0.25);
        r.value("flag", true);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "name,value\nalpha,0.25\nflag,true\n"
        );
    }
}
