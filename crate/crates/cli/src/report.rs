//! Report emission in the three output formats. CSV serializes numbers at 17
//! significant digits so every field round-trips bit-exactly; JSON relies on
//! serde_json's shortest-round-trip float encoding.

use mininfer::inference::{Comparison, Diagnostics, InferenceResult};
use mininfer::linalg::ComplexMatrix;
use mininfer::scenarios::{LemmaVerdict, Scenario, ScenarioRow, ThresholdPredicate};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// 17 significant digits; round-trips any f64.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// RFC-4180-style quoting. The built-in labels never need it, but fields go
/// through here so the writer stays correct if they ever do.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn state_csv_header() -> String {
    let mut cols = Vec::with_capacity(32);
    for i in 0..4 {
        for j in 0..4 {
            cols.push(format!("re{i}{j}"));
            cols.push(format!("im{i}{j}"));
        }
    }
    cols.join(",")
}

fn state_csv_row(m: &ComplexMatrix) -> String {
    let mut cols = Vec::with_capacity(32);
    for i in 0..4 {
        for j in 0..4 {
            let v = m.get(i, j);
            cols.push(num(v.re));
            cols.push(num(v.im));
        }
    }
    cols.join(",")
}

fn state_json(m: &ComplexMatrix) -> Value {
    let dim = m.dim();
    let mut re = Vec::with_capacity(dim);
    let mut im = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut re_row = Vec::with_capacity(dim);
        let mut im_row = Vec::with_capacity(dim);
        for j in 0..dim {
            re_row.push(json!(m.get(i, j).re));
            im_row.push(json!(m.get(i, j).im));
        }
        re.push(Value::Array(re_row));
        im.push(Value::Array(im_row));
    }
    json!({ "re": re, "im": im })
}

fn summary_json(r: &InferenceResult) -> Value {
    json!({
        "F": r.summary.fraction,
        "concurrence": r.summary.concurrence,
        "E_f": r.summary.e_f,
        "E_r": r.summary.e_r,
        "separable": r.summary.separable,
    })
}

fn diagnostics_json(r: &InferenceResult) -> Value {
    match &r.diagnostics {
        Diagnostics::Jaynes(d) => json!({
            "lambda": d.lambda,
            "log_z": d.log_z,
            "iterations": d.iterations,
            "residual": d.residual,
            "boundary": d.boundary,
        }),
        Diagnostics::Minent(d) => json!({
            "bell_reduced": d.bell_reduced,
            "e_min": d.e_min,
            "stage2_kkt_residual": d.stage2_kkt_residual,
            "oracle_gap": d.oracle_gap,
            "best_effort_slice": d.best_effort_slice,
        }),
    }
}

fn solver_residual(r: &InferenceResult) -> f64 {
    match &r.diagnostics {
        Diagnostics::Jaynes(d) => d.residual,
        Diagnostics::Minent(d) => d.stage2_kkt_residual,
    }
}

fn state_text(m: &ComplexMatrix, out: &mut String) {
    for i in 0..m.dim() {
        out.push_str("  ");
        for j in 0..m.dim() {
            let v = m.get(i, j);
            out.push_str(&format!("{:+.12}{:+.12}i  ", v.re, v.im));
        }
        out.push('\n');
    }
}

fn result_text(r: &InferenceResult, out: &mut String) {
    out.push_str(&format!("method: {}\n", r.method.label()));
    out.push_str("state:\n");
    state_text(r.state.matrix(), out);
    out.push_str(&format!("entropy: {:.12} nats\n", r.state.entropy()));
    let s = &r.summary;
    out.push_str(&format!(
        "summary: F = {:.12}, concurrence = {:.12}, E_f = {:.12}{}, separable = {}\n",
        s.fraction,
        s.concurrence,
        s.e_f,
        match s.e_r {
            Some(er) => format!(", E_r = {er:.12}"),
            None => ", E_r = n/a (state not Bell-diagonal)".to_string(),
        },
        s.separable
    ));
    match &r.diagnostics {
        Diagnostics::Jaynes(d) => {
            let lambda: Vec<String> = d.lambda.iter().map(|l| format!("{l:.12}")).collect();
            out.push_str(&format!(
                "diagnostics: iterations = {}, residual = {:.3e}, log_z = {:.12}, lambda = [{}]{}\n",
                d.iterations,
                d.residual,
                d.log_z,
                lambda.join(", "),
                if d.boundary {
                    ", boundary means (limit state)"
                } else {
                    ""
                }
            ));
        }
        Diagnostics::Minent(d) => {
            out.push_str(&format!(
                "diagnostics: bell_reduced = {}, E_min = {:.12}, stage2 residual = {:.3e}{}{}\n",
                d.bell_reduced,
                d.e_min,
                d.stage2_kkt_residual,
                match d.oracle_gap {
                    Some(g) => format!(", oracle gap = {g:.3e}"),
                    None => String::new(),
                },
                if d.best_effort_slice {
                    ", best-effort entangled slice"
                } else {
                    ""
                }
            ));
        }
    }
}

pub fn solve_report(r: &InferenceResult, format: Format) -> String {
    match format {
        Format::Text => {
            let mut out = String::new();
            result_text(r, &mut out);
            out
        }
        Format::Csv => {
            let mut out = format!(
                "method,F,concurrence,E_f,E_r,separable,entropy,solver_residual,{}\n",
                state_csv_header()
            );
            out.push_str(&solve_csv_row(r, None));
            out
        }
        Format::Json => {
            let value = json!({
                "method": r.method.label(),
                "state": state_json(r.state.matrix()),
                "diagnostics": diagnostics_json(r),
                "summary": summary_json(r),
                "verdict": Value::Null,
            });
            pretty(value)
        }
    }
}

fn solve_csv_row(r: &InferenceResult, verdict: Option<&str>) -> String {
    let mut row = format!(
        "{},{},{},{},{},{},{},{},{}",
        csv_field(r.method.label()),
        num(r.summary.fraction),
        num(r.summary.concurrence),
        num(r.summary.e_f),
        opt_num(r.summary.e_r),
        r.summary.separable,
        num(r.state.entropy()),
        num(solver_residual(r)),
        state_csv_row(r.state.matrix())
    );
    if let Some(v) = verdict {
        row.push(',');
        row.push_str(&csv_field(v));
    }
    row.push('\n');
    row
}

pub fn compare_report(cmp: &Comparison, format: Format) -> String {
    match format {
        Format::Text => {
            let mut out = String::new();
            result_text(&cmp.jaynes, &mut out);
            out.push('\n');
            result_text(&cmp.minent, &mut out);
            out.push_str(&format!("verdict: {}\n", cmp.verdict.label()));
            out
        }
        Format::Csv => {
            let mut out = format!(
                "method,F,concurrence,E_f,E_r,separable,entropy,solver_residual,{},verdict\n",
                state_csv_header()
            );
            out.push_str(&solve_csv_row(&cmp.jaynes, Some(cmp.verdict.label())));
            out.push_str(&solve_csv_row(&cmp.minent, Some(cmp.verdict.label())));
            out
        }
        Format::Json => {
            let part = |r: &InferenceResult| {
                json!({
                    "state": state_json(r.state.matrix()),
                    "diagnostics": diagnostics_json(r),
                    "summary": summary_json(r),
                })
            };
            pretty(json!({
                "method": "compare",
                "jaynes": part(&cmp.jaynes),
                "minent": part(&cmp.minent),
                "verdict": cmp.verdict.label(),
            }))
        }
    }
}

const SWEEP_HEADER: &str = "parameter,jaynes_F,jaynes_separable,minent_F,minent_separable,\
                            E_f_jaynes,E_f_minent,E_r_jaynes,E_r_minent,verdict";

fn sweep_csv_row(row: &ScenarioRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}\n",
        num(row.parameter),
        num(row.jaynes_fraction),
        row.jaynes_separable,
        num(row.minent_fraction),
        row.minent_separable,
        num(row.e_f_jaynes),
        num(row.e_f_minent),
        opt_num(row.e_r_jaynes),
        opt_num(row.e_r_minent),
        csv_field(row.verdict.label())
    )
}

fn sweep_row_json(row: &ScenarioRow) -> Value {
    json!({
        "parameter": row.parameter,
        "jaynes_F": row.jaynes_fraction,
        "jaynes_separable": row.jaynes_separable,
        "minent_F": row.minent_fraction,
        "minent_separable": row.minent_separable,
        "E_f_jaynes": row.e_f_jaynes,
        "E_f_minent": row.e_f_minent,
        "E_r_jaynes": row.e_r_jaynes,
        "E_r_minent": row.e_r_minent,
        "verdict": row.verdict.label(),
    })
}

pub fn sweep_report(scenario: Scenario, rows: &[ScenarioRow], format: Format) -> String {
    match format {
        Format::Text => {
            let mut out = format!(
                "{:>10}  {:>10} {:>5}  {:>10} {:>5}  {:>10}  {:>10}  verdict\n",
                "parameter", "jaynes_F", "sep", "minent_F", "sep", "E_f_jaynes", "E_f_minent"
            );
            for r in rows {
                out.push_str(&format!(
                    "{:>10.6}  {:>10.6} {:>5}  {:>10.6} {:>5}  {:>10.6}  {:>10.6}  {}\n",
                    r.parameter,
                    r.jaynes_fraction,
                    r.jaynes_separable,
                    r.minent_fraction,
                    r.minent_separable,
                    r.e_f_jaynes,
                    r.e_f_minent,
                    r.verdict.label()
                ));
            }
            out
        }
        Format::Csv => {
            let mut out = String::from(SWEEP_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&sweep_csv_row(r));
            }
            out
        }
        Format::Json => pretty(json!({
            "method": "sweep",
            "scenario": scenario.label(),
            "rows": rows.iter().map(sweep_row_json).collect::<Vec<_>>(),
        })),
    }
}

pub fn threshold_report(
    scenario: Scenario,
    predicate: ThresholdPredicate,
    value: f64,
    format: Format,
) -> String {
    match format {
        Format::Text => format!(
            "threshold ({}, {}): {:.7}\n",
            scenario.label(),
            predicate.label(),
            value
        ),
        Format::Csv => format!(
            "scenario,predicate,threshold\n{},{},{}\n",
            csv_field(scenario.label()),
            csv_field(predicate.label()),
            num(value)
        ),
        Format::Json => pretty(json!({
            "method": "threshold",
            "scenario": scenario.label(),
            "predicate": predicate.label(),
            "threshold": value,
        })),
    }
}

pub fn lemma_report(v: &LemmaVerdict, format: Format) -> String {
    match format {
        Format::Text => format!(
            "pinching inequalities over {} random states (seed {}):\n\
               entanglement-of-formation violations: {}\n\
               entropy violations: {}\n\
               relative-entropy violations (Bell-diagonal closed form): {}\n\
               max E_f gap: {:.3e}\n\
               max entropy gap: {:.3e}\n",
            v.samples,
            v.seed,
            v.ef_violations,
            v.entropy_violations,
            v.er_violations,
            v.max_ef_gap,
            v.max_entropy_gap
        ),
        Format::Csv => format!(
            "samples,seed,ef_violations,entropy_violations,er_violations,max_ef_gap,max_entropy_gap\n\
             {},{},{},{},{},{},{}\n",
            v.samples,
            v.seed,
            v.ef_violations,
            v.entropy_violations,
            v.er_violations,
            num(v.max_ef_gap),
            num(v.max_entropy_gap)
        ),
        Format::Json => pretty(json!({
            "method": "verify-lemma",
            "samples": v.samples,
            "seed": v.seed,
            "ef_violations": v.ef_violations,
            "entropy_violations": v.entropy_violations,
            "er_violations": v.er_violations,
            "max_ef_gap": v.max_ef_gap,
            "max_entropy_gap": v.max_entropy_gap,
        })),
    }
}

fn pretty(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json serialization cannot fail");
    s.push('\n');
    s
}
