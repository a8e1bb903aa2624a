use serde_json::{json, Map, Value};

use crate::numerics::{decimal, BigReal};

/// Significant digits used when residuals and tolerances are rendered.
pub const REPORT_DIGITS: usize = 12;

/// Outcome of one verification: `passed` is exactly `residual <= tolerance`.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    name: String,
    inputs: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
    residual: BigReal,
    tolerance: BigReal,
    passed: bool,
    bits: u32,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, bits: u32, residual: BigReal, tolerance: BigReal) -> Self {
        let passed = !residual.is_nan() && residual <= tolerance;
        CheckReport { name: name.into(), inputs: Vec::new(), outputs: Vec::new(), residual, tolerance, passed, bits }
    }

    /// A check with an exact verdict: residual 0 when it holds, 1 otherwise, tolerance 0.
    pub fn exact(name: impl Into<String>, bits: u32, holds: bool) -> Self {
        let residual = BigReal::with_val(64, if holds { 0 } else { 1 });
        Self::new(name, bits, residual, BigReal::new(64))
    }

    pub fn with_input(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.inputs.push((key.into(), value.to_string()));
        self
    }

    pub fn with_output(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.outputs.push((key.into(), value.to_string()));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[(String, String)] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[(String, String)] {
        &self.outputs
    }

    pub fn output(&self, key: &str) -> Option<&str> {
        self.outputs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn residual(&self) -> &BigReal {
        &self.residual
    }

    pub fn tolerance(&self) -> &BigReal {
        &self.tolerance
    }

    pub fn passed(&self) -> bool {
        self.passed
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn residual_str(&self) -> String {
        decimal(&self.residual, REPORT_DIGITS)
    }

    pub fn tolerance_str(&self) -> String {
        decimal(&self.tolerance, REPORT_DIGITS)
    }

    /// JSON object with every number rendered as a decimal string.
    pub fn to_json(&self, command: &str) -> Value {
        json!({
            "command": command,
            "name": self.name,
            "inputs": pairs(&self.inputs),
            "outputs": pairs(&self.outputs),
            "residual": self.residual_str(),
            "tolerance": self.tolerance_str(),
            "passed": self.passed,
            "bits": self.bits,
            "version": crate::VERSION,
        })
    }

    /// One line of a human-readable table.
    pub fn to_line(&self) -> String {
        let ins: Vec<String> = self.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "[{}] {:<28} residual={} tol={} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.residual_str(),
            self.tolerance_str(),
            ins.join(" ")
        )
    }
}

pub(crate) fn pairs(kv: &[(String, String)]) -> Value {
    let mut m = Map::new();
    for (k, v) in kv {
        m.insert(k.clone(), Value::String(v.clone()));
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_iff_residual_within_tolerance() {
        let r = CheckReport::new("x", 64, BigReal::with_val(64, 0.5), BigReal::with_val(64, 0.5));
        assert!(r.passed());
        let r = CheckReport::new("x", 64, BigReal::with_val(64, 0.6), BigReal::with_val(64, 0.5));
        assert!(!r.passed());
        assert!(CheckReport::exact("e", 64, true).passed());
        assert!(!CheckReport::exact("e", 64, false).passed());
    }

    #[test]
    fn json_uses_decimal_strings() {
        let r = CheckReport::new("x", 64, BigReal::with_val(64, 0.25), BigReal::with_val(64, 1)).with_input("n", 3).with_output("sum", "1/2");
        let v = r.to_json("check");
        assert_eq!(v["residual"], Value::String("2.50000000000e-1".into()));
        assert_eq!(v["inputs"]["n"], Value::String("3".into()));
        assert_eq!(v["passed"], Value::Bool(true));
        assert!(v["version"].is_string());
    }
}
