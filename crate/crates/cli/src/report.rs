//! JSON report assembly and decimal rendering of log-domain values.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// Every command emits exactly one of these as a single JSON object on
/// standard output. Log-domain values are the primary results; linear
/// renderings are best-effort decimal strings.
#[derive(Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub inputs: Value,
    pub results: Value,
    /// Base RNG seed, or null for commands that use no randomness.
    pub seed: Option<u64>,
    pub wall_time_ms: u64,
}

impl Report {
    pub fn print(&self) {
        println!(
            "{}",
            serde_json::to_string(self).expect("report serializes")
        );
    }
}

/// Log value as a JSON number when finite; infinities become the strings
/// "inf" / "-inf" since JSON has no literal for them.
pub fn json_log(v: f64) -> Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else if v == f64::NEG_INFINITY {
        Value::String("-inf".to_string())
    } else if v == f64::INFINITY {
        Value::String("inf".to_string())
    } else {
        Value::String("nan".to_string())
    }
}

/// Decimal rendering of exp(ln) that cannot overflow: values of moderate
/// size print plainly, anything else in scientific notation derived from
/// the log itself.
pub fn decimal_from_ln(ln: f64) -> String {
    if ln == f64::NEG_INFINITY {
        return "0".to_string();
    }
    if ln.is_nan() {
        return "nan".to_string();
    }
    if ln == f64::INFINITY {
        return "inf".to_string();
    }
    let v = ln.exp();
    if v.is_finite() && (1e-4..1e15).contains(&v) {
        trim_decimal(format!("{v:.6}"))
    } else {
        let log10 = ln / std::f64::consts::LN_10;
        let mut exp10 = log10.floor() as i64;
        let mut mantissa = 10f64.powf(log10 - exp10 as f64);
        if mantissa >= 9.999_999_5 {
            mantissa /= 10.0;
            exp10 += 1;
        }
        format!(
            "{}e{}{}",
            trim_decimal(format!("{mantissa:.6}")),
            if exp10 >= 0 { "+" } else { "-" },
            exp10.abs()
        )
    }
}

fn trim_decimal(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
