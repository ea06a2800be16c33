//! Certificates and their canonical JSON form.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use ttwb::strata::Status;

use crate::input::{serialize, WorkbenchInput};

/// Replayable evidence for a verdict. Paths are token arrays, vertices names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `f^period_#(path) = path`.
    NielsenPath {
        start: String,
        path: Vec<String>,
        period: usize,
    },
    /// `f^period_#` fixes the circuit.
    FixedCircuit { circuit: Vec<String>, period: usize },
    /// `f^k_#(path) = image`.
    Iterate {
        start: String,
        path: Vec<String>,
        k: usize,
        image: Vec<String>,
    },
    /// `sub` is an oriented subpath of `f^k_#(path)`.
    ImageContains {
        start: String,
        path: Vec<String>,
        k: usize,
        sub: Vec<String>,
    },
    /// Both directions have the same image under `Df^k`.
    Degenerate { directions: [String; 2], k: usize },
    /// Crossing counts of a path, both orientations.
    Crossings {
        start: String,
        path: Vec<String>,
        counts: BTreeMap<String, usize>,
    },
    /// The two words tighten to the same circuit up to rotation and inversion.
    SameCircuit { a: Vec<String>, b: Vec<String> },
    /// Free-form evidence that cannot be replayed from the graph and map alone.
    Text { description: String },
}

impl Witness {
    pub fn replayable(&self) -> bool {
        !matches!(self, Witness::Text { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub check: String,
    pub status: Status,
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// What was searched when there is nothing to replay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub budget_exhausted: bool,
}

impl CheckVerdict {
    pub fn witnessed(
        check: impl Into<String>,
        status: Status,
        note: impl Into<String>,
        witness: Witness,
    ) -> Self {
        CheckVerdict {
            check: check.into(),
            status,
            note: note.into(),
            witness: Some(witness),
            bound: None,
            budget_exhausted: false,
        }
    }

    pub fn bounded(
        check: impl Into<String>,
        status: Status,
        note: impl Into<String>,
        bound: impl Into<String>,
    ) -> Self {
        CheckVerdict {
            check: check.into(),
            status,
            note: note.into(),
            witness: None,
            bound: Some(bound.into()),
            budget_exhausted: false,
        }
    }

    /// An inconclusive verdict caused by a budget.
    pub fn exhausted(
        check: impl Into<String>,
        note: impl Into<String>,
        bound: impl Into<String>,
    ) -> Self {
        CheckVerdict {
            budget_exhausted: true,
            ..Self::bounded(check, Status::Inconclusive, note, bound)
        }
    }

    pub fn with_bound(mut self, bound: impl Into<String>) -> Self {
        self.bound = Some(bound.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub iterate_bound: usize,
    pub length_bound: usize,
    pub period_bound: usize,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub command: String,
    pub input_digest: String,
    pub power: usize,
    pub budgets: Budgets,
    pub verdicts: Vec<CheckVerdict>,
    pub result: Value,
    pub warnings: Vec<String>,
    pub inconclusive: bool,
}

impl Certificate {
    pub fn new(
        command: &str,
        input: &WorkbenchInput,
        power: usize,
        budgets: Budgets,
        verdicts: Vec<CheckVerdict>,
        result: Value,
    ) -> Self {
        let inconclusive = verdicts.iter().any(|v| v.status == Status::Inconclusive);
        Certificate {
            command: command.to_string(),
            input_digest: digest(input),
            power,
            budgets,
            verdicts,
            result,
            warnings: input.warnings.iter().map(|w| w.to_string()).collect(),
            inconclusive,
        }
    }

    /// 1 if a check failed, else 3 if one was inconclusive, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.verdicts.iter().any(|v| v.status == Status::Fail) {
            1
        } else if self.inconclusive {
            3
        } else {
            0
        }
    }
}

/// SHA-256 of the canonical text of the input.
pub fn digest(input: &WorkbenchInput) -> String {
    let hash = Sha256::digest(serialize(input).as_bytes());
    hash.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Canonical JSON: sorted keys, two-space indent, floats as `%.12g`.
pub fn emit(cert: &Certificate) -> String {
    let value = serde_json::to_value(cert).expect("certificates serialize");
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', 2 * n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => out.push_str(&i.to_string()),
            (_, Some(u)) => out.push_str(&u.to_string()),
            _ => out.push_str(&format_g(n.as_f64().unwrap_or(f64::NAN), 12)),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            // short scalar arrays (token lists) stay on one line
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(k).expect("keys serialize"));
                out.push_str(": ");
                write_value(out, &map[*k], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// C's `%.{prec}g`.
pub fn format_g(x: f64, prec: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let p = prec.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip(mant), exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip(&format!("{x:.decimals$}"))
    }
}
