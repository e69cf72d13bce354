//! Run reports and their serialized forms. All numeric output goes
//! through one formatter (17 significant digits, exponent notation) so
//! repeated runs of the same scenario produce identical files; a parsing
//! comparator is provided for environments whose libm makes
//! last-ulp-different choices.

use crate::entropy::EntropyTrace;
use serde::Serialize;
use std::fmt::Write as _;

/// Canonical float formatting for CSV cells: round-trippable 17
/// significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Outcome of the refinement-confirmation pass that runs after a raw
/// margin violation: halved spacing, quartered step.
#[derive(Debug, Clone, Serialize)]
pub struct RefinementOutcome {
    pub raw_min_margin: f64,
    pub refined_min_margin: f64,
    /// The violation is confirmed only when it survives refinement
    /// without shrinking to less than half its raw size.
    pub confirmed: bool,
}

/// One check's result inside a run.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub pass: bool,
    pub min_margin: f64,
    pub argmin_t: f64,
    pub argmin_node: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementOutcome>,
    /// Human-readable note (tolerance used, skip reasons, warnings).
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
    /// Per-snapshot CSV body for this check, already formatted.
    #[serde(skip)]
    pub csv: String,
}

/// Full result of running one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub checks: Vec<CheckOutcome>,
    /// Curvature summary for the first dimension parameter appearing in
    /// the check list (None when no check carries one).
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub lambda_min: Option<f64>,
    pub pass: bool,
    pub wall_ms: u128,
}

impl RunReport {
    /// The JSON summary: scenario name, per-check id/pass/min-margin/
    /// argmin, curvature bound and raw minimal eigenvalue.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Argmin {
            t: f64,
            node: usize,
        }
        #[derive(Serialize)]
        struct CheckRow<'a> {
            id: &'a str,
            pass: bool,
            min_margin: f64,
            argmin: Argmin,
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            scenario: &'a str,
            checks: Vec<CheckRow<'a>>,
            #[serde(rename = "K")]
            k: Option<f64>,
            lambda_min: Option<f64>,
            pass: bool,
        }
        let summary = Summary {
            scenario: &self.scenario,
            checks: self
                .checks
                .iter()
                .map(|c| CheckRow {
                    id: &c.id,
                    pass: c.pass,
                    min_margin: c.min_margin,
                    argmin: Argmin {
                        t: c.argmin_t,
                        node: c.argmin_node,
                    },
                })
                .collect(),
            k: self.k,
            lambda_min: self.lambda_min,
            pass: self.pass,
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }

    /// One human-readable line per check.
    pub fn text_summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "FAIL" };
            let _ = write!(
                out,
                "check {:<20} {}  min margin {:+.6e} at t = {:.6e}, node {}",
                c.id, verdict, c.min_margin, c.argmin_t, c.argmin_node
            );
            if let Some(r) = &c.refinement {
                let _ = write!(
                    out,
                    "  [refined: {:+.6e} -> {:+.6e}, {}]",
                    r.raw_min_margin,
                    r.refined_min_margin,
                    if r.confirmed { "confirmed" } else { "discounted" }
                );
            }
            if !c.detail.is_empty() {
                let _ = write!(out, "  ({})", c.detail);
            }
            out.push('\n');
        }
        let _ = write!(
            out,
            "scenario {}: {} ({} ms)\n",
            self.scenario,
            if self.pass { "PASS" } else { "FAIL" },
            self.wall_ms
        );
        out
    }
}

/// CSV of per-snapshot margins for a bound-family check:
/// check id, time, minimum margin over nodes, node attaining it, pass.
pub fn margins_csv(id: &str, rows: &[(f64, f64, usize, bool)]) -> String {
    let mut out = String::from("check,t,min_margin,argmin_node,pass\n");
    for (t, margin, node, pass) in rows {
        let _ = writeln!(
            out,
            "{id},{},{},{node},{pass}",
            fmt_float(*t),
            fmt_float(*margin)
        );
    }
    out
}

/// CSV of an entropy trace: times, both entropies, formula and
/// finite-difference rates, the fast-regime rate bound when applicable,
/// and the per-row monotonicity flag.
pub fn entropy_csv(trace: &EntropyTrace) -> String {
    let mut out =
        String::from("t,N,W,dN_formula,dN_fd,dW_formula,dW_fd,bound_fast,monotone_flag\n");
    for i in 0..trace.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_float(trace.times[i]),
            fmt_float(trace.n[i]),
            fmt_float(trace.w[i]),
            fmt_float(trace.dn_formula[i]),
            fmt_float(trace.dn_fd[i]),
            fmt_float(trace.dw_formula[i]),
            fmt_float(trace.dw_fd[i]),
            fmt_opt(trace.bound_fast[i]),
            trace.monotone[i]
        );
    }
    out
}

/// CSV of rate-identity comparisons: one row per interior snapshot with
/// every computed form.
pub fn rates_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::from("t");
    for h in header {
        out.push(',');
        out.push_str(h);
    }
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt_float(*v));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// One row of a sweep aggregate.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// None for a skipped point.
    pub check: Option<String>,
    pub min_margin: Option<f64>,
    pub pass: Option<bool>,
    /// Skip reason for invalid points, empty otherwise.
    pub note: String,
}

/// Aggregate CSV of global minimum margins against the swept parameter.
pub fn sweep_csv(axis: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{axis},check,min_margin,pass,note\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(row.value),
            row.check.as_deref().unwrap_or(""),
            fmt_opt(row.min_margin),
            row.pass.map(|b| b.to_string()).unwrap_or_default(),
            row.note.replace(',', ";")
        );
    }
    out
}

/// Structural comparison of two CSV texts: identical shape and non-numeric
/// cells, numeric cells equal to `rel` relative tolerance (NaN matches
/// NaN). Used to accept byte-different but value-identical outputs from
/// libm variations.
pub fn csv_values_close(a: &str, b: &str, rel: f64) -> bool {
    let rows_a: Vec<&str> = a.lines().collect();
    let rows_b: Vec<&str> = b.lines().collect();
    if rows_a.len() != rows_b.len() {
        return false;
    }
    for (ra, rb) in rows_a.iter().zip(&rows_b) {
        let cells_a: Vec<&str> = ra.split(',').collect();
        let cells_b: Vec<&str> = rb.split(',').collect();
        if cells_a.len() != cells_b.len() {
            return false;
        }
        for (ca, cb) in cells_a.iter().zip(&cells_b) {
            match (ca.parse::<f64>(), cb.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    let close = if x.is_nan() || y.is_nan() {
                        x.is_nan() && y.is_nan()
                    } else {
                        (x - y).abs() <= rel * x.abs().max(y.abs()).max(1e-300)
                    };
                    if !close {
                        return false;
                    }
                }
                (Err(_), Err(_)) => {
                    if ca != cb {
                        return false;
                    }
                }
                _ => return false,
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for &x in &[
            0.0,
            1.0,
            -1.0 / 3.0,
            std::f64::consts::PI,
            6.02e23,
            -2.2250738585072014e-308,
            f64::MAX,
        ] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn csv_compare_tolerates_last_digit_jitter() {
        let a = "check,t,min_margin,argmin_node,pass\nporous-alpha,1.0000000000000000e-1,2.6666666666666665e0,3,true\n";
        let b = a.replace("2.6666666666666665e0", "2.6666666666666670e0");
        assert!(csv_values_close(a, &b, 1e-14));
        assert!(!csv_values_close(a, &b, 1e-17));
        let c = a.replace("true", "false");
        assert!(!csv_values_close(a, &c, 1e-9));
        let d = a.replace(",3,", ",4,");
        assert!(!csv_values_close(a, &d, 1e-9));
        assert!(csv_values_close("x,NaN\n", "x,NaN\n", 1e-15));
        assert!(!csv_values_close("x,NaN\n", "x,0.0\n", 1e-15));
    }

    #[test]
    fn json_summary_has_the_contract_fields() {
        let report = RunReport {
            scenario: "demo".into(),
            checks: vec![CheckOutcome {
                id: "porous-alpha".into(),
                pass: true,
                min_margin: 0.25,
                argmin_t: 0.1,
                argmin_node: 7,
                refinement: None,
                detail: String::new(),
                csv: String::new(),
            }],
            k: Some(0.3),
            lambda_min: Some(-0.3),
            pass: true,
            wall_ms: 12,
        };
        let json = report.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["scenario"], "demo");
        assert_eq!(v["checks"][0]["id"], "porous-alpha");
        assert_eq!(v["checks"][0]["pass"], true);
        assert_eq!(v["checks"][0]["argmin"]["node"], 7);
        assert_eq!(v["K"], 0.3);
        assert_eq!(v["lambda_min"], -0.3);
        assert!(report.text_summary().contains("min margin"));
    }

    #[test]
    fn sweep_rows_escape_reasons() {
        let rows = vec![
            SweepRow {
                value: 1.5,
                check: Some("porous-alpha".into()),
                min_margin: Some(0.5),
                pass: Some(true),
                note: String::new(),
            },
            SweepRow {
                value: 1.0,
                check: None,
                min_margin: None,
                pass: None,
                note: "skipped: exponent p = 1, the flow is linear".into(),
            },
        ];
        let csv = sweep_csv("p", &rows);
        assert!(csv.starts_with("p,check,min_margin,pass,note\n"));
        assert!(csv.contains("skipped"));
        assert_eq!(csv.lines().count(), 3);
    }
}
