//! Deterministic rendering of check reports.
//!
//! The JSON layout is a stable contract: fixed key order, floats printed with
//! 17 significant digits (`{:.16e}`), negative zero normalized, no other
//! fields. Identical reports render byte-identically.

use crate::verify::{CheckReport, CheckRecord};

/// 17-significant-digit float rendering used everywhere in JSON output.
pub fn fmt_f64(v: f64) -> String {
    if !v.is_finite() {
        return "null".to_string();
    }
    let v = if v == 0.0 { 0.0 } else { v }; // normalize -0.0
    format!("{v:.16e}")
}

pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn spectrum_json(spec: &[nalgebra::Complex<f64>]) -> String {
    let entries: Vec<String> = spec
        .iter()
        .map(|ev| format!("[{}, {}]", fmt_f64(ev.re), fmt_f64(ev.im)))
        .collect();
    format!("[{}]", entries.join(", "))
}

fn check_json(c: &CheckRecord) -> String {
    format!(
        "{{\"name\": \"{}\", \"max_residual\": {}, \"tolerance\": {}, \"pass\": {}, \"points_evaluated\": {}}}",
        json_escape(&c.name),
        fmt_f64(c.max_residual),
        fmt_f64(c.tolerance),
        c.pass,
        c.points_evaluated
    )
}

/// Render the full report as JSON (trailing newline included).
pub fn to_json(report: &CheckReport) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!(
        "  \"problem\": \"{}\",\n",
        json_escape(&report.problem)
    ));
    out.push_str(&format!("  \"dim\": {},\n", report.dim));
    out.push_str(&format!("  \"lambda\": {},\n", fmt_f64(report.lambda)));
    out.push_str("  \"checks\": [\n");
    for (i, c) in report.checks.iter().enumerate() {
        let sep = if i + 1 == report.checks.len() { "" } else { "," };
        out.push_str(&format!("    {}{}\n", check_json(c), sep));
    }
    out.push_str("  ],\n");
    out.push_str("  \"profile\": {\n");
    out.push_str(&format!(
        "    \"ric_spectrum\": {},\n",
        spectrum_json(&report.profile.ric_spectrum)
    ));
    out.push_str(&format!("    \"ric_rank\": {},\n", report.profile.ric_rank));
    out.push_str(&format!(
        "    \"ric_nilpotency\": {},\n",
        report
            .profile
            .ric_nilpotency
            .map(|k| k.to_string())
            .unwrap_or_else(|| "null".to_string())
    ));
    out.push_str(&format!(
        "    \"hf_spectrum\": {},\n",
        spectrum_json(&report.profile.hf_spectrum)
    ));
    out.push_str(&format!(
        "    \"grad_f_causal_type\": \"{}\",\n",
        json_escape(&report.profile.grad_f_causal_type)
    ));
    out.push_str(&format!(
        "    \"grad_f_norm_sq\": {}\n",
        fmt_f64(report.profile.grad_f_norm_sq)
    ));
    out.push_str("  },\n");
    out.push_str("  \"notes\": [\n");
    for (i, n) in report.notes.iter().enumerate() {
        let sep = if i + 1 == report.notes.len() { "" } else { "," };
        out.push_str(&format!("    \"{}\"{}\n", json_escape(n), sep));
    }
    out.push_str("  ]\n}\n");
    out
}

/// Human-readable rendering with one line per check.
pub fn to_text(report: &CheckReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("problem : {}\n", report.problem));
    out.push_str(&format!(
        "dim     : {}    lambda: {:?}\n\n",
        report.dim, report.lambda
    ));
    out.push_str(&format!(
        "{:<26} {:>13} {:>10} {:>7} {:>6}\n",
        "check", "max residual", "tolerance", "points", "status"
    ));
    for c in &report.checks {
        out.push_str(&format!(
            "{:<26} {:>13.3e} {:>10.1e} {:>7} {:>6}\n",
            c.name,
            c.max_residual,
            c.tolerance,
            c.points_evaluated,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    out.push('\n');
    let spec = |s: &[nalgebra::Complex<f64>]| {
        s.iter()
            .map(|ev| {
                if ev.im == 0.0 {
                    format!("{:.6}", ev.re)
                } else {
                    format!("{:.6}{:+.6}i", ev.re, ev.im)
                }
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    out.push_str(&format!(
        "Ric spectrum  : [{}]  rank {}  nilpotency {}\n",
        spec(&report.profile.ric_spectrum),
        report.profile.ric_rank,
        report
            .profile
            .ric_nilpotency
            .map(|k| k.to_string())
            .unwrap_or_else(|| "-".into())
    ));
    out.push_str(&format!(
        "H_f spectrum  : [{}]\n",
        spec(&report.profile.hf_spectrum)
    ));
    out.push_str(&format!(
        "grad f        : {}  with |grad f|^2 = {:.6e}\n",
        report.profile.grad_f_causal_type, report.profile.grad_f_norm_sq
    ));
    if !report.notes.is_empty() {
        out.push_str("\nnotes:\n");
        for n in &report.notes {
            out.push_str(&format!("  - {n}\n"));
        }
    }
    out.push_str(&format!(
        "\noverall: {}\n",
        if report.all_pass() { "PASS" } else { "FAIL" }
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{CheckRecord, CheckReport, ProfileSummary};
    use nalgebra::Complex;

    fn sample_report() -> CheckReport {
        CheckReport {
            problem: "N_b(b=1.0)".into(),
            dim: 3,
            lambda: 0.0,
            checks: vec![
                CheckRecord {
                    name: "soliton_residual".into(),
                    max_residual: 1.25e-13,
                    tolerance: 1e-9,
                    pass: true,
                    points_evaluated: 100,
                },
                CheckRecord {
                    name: "bochner".into(),
                    max_residual: 0.0,
                    tolerance: 1e-8,
                    pass: true,
                    points_evaluated: 100,
                },
            ],
            profile: ProfileSummary {
                ric_spectrum: vec![Complex::new(0.0, 0.0); 3],
                ric_rank: 1,
                ric_nilpotency: Some(2),
                hf_spectrum: vec![Complex::new(0.0, 0.0); 3],
                grad_f_causal_type: "spacelike".into(),
                grad_f_norm_sq: 1.0,
            },
            notes: vec!["a \"quoted\" note".into()],
        }
    }

    #[test]
    fn float_formatting_has_17_significant_digits() {
        assert_eq!(fmt_f64(0.7), "6.9999999999999996e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(1.25e-13), "1.2500000000000000e-13");
    }

    #[test]
    fn json_structure() {
        let json = to_json(&sample_report());
        assert!(json.starts_with("{\n  \"problem\": \"N_b(b=1.0)\",\n"));
        assert!(json.contains("\"dim\": 3"));
        assert!(json.contains("\"name\": \"soliton_residual\""));
        assert!(json.contains("\"max_residual\": 1.2500000000000000e-13"));
        assert!(json.contains("\"ric_nilpotency\": 2"));
        assert!(json.contains("\"grad_f_causal_type\": \"spacelike\""));
        assert!(json.contains("a \\\"quoted\\\" note"));
        assert!(json.ends_with("}\n"));
        // byte determinism on re-render
        assert_eq!(json, to_json(&sample_report()));
    }

    #[test]
    fn null_nilpotency_renders_as_json_null() {
        let mut r = sample_report();
        r.profile.ric_nilpotency = None;
        assert!(to_json(&r).contains("\"ric_nilpotency\": null"));
    }

    #[test]
    fn text_has_one_line_per_check() {
        let text = to_text(&sample_report());
        assert!(text.contains("soliton_residual"));
        assert!(text.contains("PASS"));
        assert!(text.contains("overall: PASS"));
    }
}
