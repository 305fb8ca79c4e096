use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub nodes: usize,
    pub trunc: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

/// Everything a run emits. Apart from `wall_time_s` the content depends only
/// on the command, its inputs and the config.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub inputs: Value,
    pub outputs: Value,
    pub residuals: BTreeMap<String, Check>,
    pub pass: bool,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Check {
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            inputs: Value::Null,
            outputs: Value::Object(Default::default()),
            residuals: BTreeMap::new(),
            pass: true,
            wall_time_s: 0.0,
        }
    }

    /// Records `value ≤ tolerance`. NaN never passes.
    pub fn check(&mut self, name: &str, value: f64, tolerance: f64) {
        let pass = value <= tolerance;
        self.pass &= pass;
        self.residuals.insert(name.to_string(), Check { value, tolerance, pass });
    }

    /// A check that is a plain yes/no.
    pub fn flag(&mut self, name: &str, ok: bool) {
        self.check(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    pub fn output(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        if let Value::Object(map) = &mut self.outputs {
            map.insert(key.to_string(), v);
        }
    }

    pub fn first_failure(&self) -> Option<(&str, &Check)> {
        self.residuals.iter().find(|(_, c)| !c.pass).map(|(k, c)| (k.as_str(), c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig { n: None, tol: None, nodes: 64, trunc: 32, seed: 42 }
    }

    #[test]
    fn checks_combine_into_pass() {
        let mut r = Report::new("x", config());
        r.check("small", 1e-12, 1e-8);
        assert!(r.pass && r.first_failure().is_none());
        r.check("nan", f64::NAN, 1e-8);
        r.check("big", 1.0, 1e-8);
        assert!(!r.pass);
        // residuals are ordered by name
        assert_eq!(r.first_failure().unwrap().0, "big");
    }

    #[test]
    fn flags_and_outputs() {
        let mut r = Report::new("x", config());
        r.flag("ok", true);
        r.output("value", 2.5);
        assert!(r.pass);
        assert_eq!(r.outputs["value"], 2.5);
        r.flag("bad", false);
        assert!(!r.pass);
    }
}
