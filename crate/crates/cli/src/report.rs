//! report.json and per-suite CSV emission.

use serde::Serialize;
use std::fmt::Write as _;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "==")]
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Eq => "==",
        }
    }

    fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Relation::Le => measured <= threshold,
            Relation::Gt => measured > threshold,
            Relation::Eq => measured == threshold,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    /// Acceptance criterion this row belongs to, if any.
    pub criterion: Option<u32>,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(suite: &str, criterion: Option<u32>, name: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> Self {
        // NaN never passes
        let pass = relation.holds(measured, threshold);
        Self { suite: suite.into(), name: name.into(), criterion, measured, relation, threshold, pass }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridInfo {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub h: f64,
    pub mode: String,
    #[serde(rename = "refine_N")]
    pub refine_n: usize,
    pub alias_budget: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Environment {
    pub grid: GridInfo,
    pub seed: u64,
    pub version: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteError {
    pub suite: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    /// Experiment id from the config.
    pub suite: String,
    pub suites_run: Vec<String>,
    pub checks: Vec<Check>,
    pub errors: Vec<SuiteError>,
    pub files: Vec<String>,
    pub environment: Environment,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// 17 significant digits, so every f64 round-trips exactly.
pub fn float17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub const CSV_HEADER: &str = "suite,name,criterion,measured,relation,threshold,pass";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn checks_csv(checks: &[Check]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in checks {
        let crit = c.criterion.map(|k| k.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&c.suite),
            csv_field(&c.name),
            crit,
            float17(c.measured),
            c.relation.symbol(),
            float17(c.threshold),
            c.pass
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(float17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float17(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn nan_fails_every_relation() {
        for r in [Relation::Le, Relation::Gt, Relation::Eq] {
            assert!(!Check::new("s", None, "n", f64::NAN, r, 1.0).pass);
        }
    }

    #[test]
    fn csv_quotes_names_with_commas() {
        let c = Check::new("s", Some(3), "a,b", 1.0, Relation::Le, 2.0);
        let csv = checks_csv(&[c]);
        assert!(csv.lines().nth(1).unwrap().starts_with("s,\"a,b\",3,"));
    }
}
