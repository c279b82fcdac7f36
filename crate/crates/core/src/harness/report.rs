use std::fmt::Write as _;

use crate::energy::{ConvergenceReport, StudyRow};
use crate::hypotheses::HypothesisReport;

use super::ReportFile;

pub const CSV_COLUMNS: [&str; 10] = [
    "nu",
    "mu",
    "eps_nu",
    "meas_S_nu",
    "F_y_nu",
    "gap",
    "w1p_dist",
    "lip_rank",
    "budget",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    JsonLines,
}

/// 17 significant digits; infinities as `inf` and `-inf`.
pub fn format_float(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// JSON token for a number: bare when finite, a string otherwise.
fn json_num(x: Option<f64>) -> String {
    match x {
        None => "null".into(),
        Some(v) if v.is_finite() => format_float(v),
        Some(v) => format!("\"{}\"", format_float(v)),
    }
}

fn row_fields(row: &StudyRow) -> [String; 10] {
    [
        format_float(row.nu),
        opt(row.mu),
        opt(row.eps_nu),
        opt(row.meas_s_nu),
        opt(row.f_y_nu.map(|e| e.value)),
        opt(row.gap),
        opt(row.w1p_dist),
        opt(row.lip_rank),
        opt(row.budget.as_ref().map(|b| b.bound)),
        row.status.as_str().to_string(),
    ]
}

fn hypothesis_line(file: &ReportFile, r: &HypothesisReport) -> String {
    let mut line = format!(
        "{} {} {}",
        r.name,
        r.verdict.as_str(),
        if file.verdicts.is_required(r.name) { "required" } else { "reported" }
    );
    if let Some(x) = r.statistic {
        let _ = write!(line, " statistic={}", format_float(x));
    }
    if let Some(w) = &r.witness {
        let join = |v: &[f64]| v.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(";");
        let _ = write!(line, " witness=s:{},z:{},v:{}", format_float(w.s), join(&w.z), join(&w.v));
    }
    for (level, rho) in &r.levels {
        let _ = write!(line, " rho({})={}", format_float(*level), format_float(*rho));
    }
    line
}

fn emit_csv(file: &ReportFile) -> String {
    let ConvergenceReport { rows, baseline } = &file.report;
    let mut out = String::new();
    let _ = writeln!(out, "# lavgap {}", file.version);
    let _ = writeln!(out, "# config {}", file.config.to_json());
    let required: Vec<&str> = file.verdicts.required.iter().map(|h| h.as_str()).collect();
    let _ = writeln!(out, "# claim {} requires {}", file.verdicts.claim.as_str(), required.join(","));
    for r in &file.verdicts.reports {
        let _ = writeln!(out, "# hypothesis {}", hypothesis_line(file, r));
    }
    let _ = writeln!(out, "# F_y {} p {}", format_float(baseline.f_y.value), format_float(baseline.p));
    let _ = writeln!(out, "{}", CSV_COLUMNS.join(","));
    for row in rows {
        let _ = writeln!(out, "{}", row_fields(row).join(","));
    }
    out
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn emit_jsonl(file: &ReportFile) -> String {
    let ConvergenceReport { rows, baseline } = &file.report;
    let mut out = String::new();
    let hyps: Vec<String> = file
        .verdicts
        .reports
        .iter()
        .map(|r| {
            format!(
                "{{\"name\":{},\"verdict\":{},\"required\":{},\"statistic\":{},\"detail\":{}}}",
                json_str(r.name.as_str()),
                json_str(r.verdict.as_str()),
                file.verdicts.is_required(r.name),
                json_num(r.statistic),
                json_str(&hypothesis_line(file, r)),
            )
        })
        .collect();
    let required: Vec<String> = file.verdicts.required.iter().map(|h| json_str(h.as_str())).collect();
    let _ = writeln!(
        out,
        "{{\"header\":{{\"lavgap\":{},\"config\":{},\"claim\":{},\"required\":[{}],\"hypotheses\":[{}],\"F_y\":{},\"p\":{}}}}}",
        json_str(file.version),
        file.config.to_json(),
        json_str(file.verdicts.claim.as_str()),
        required.join(","),
        hyps.join(","),
        json_num(Some(baseline.f_y.value)),
        json_num(Some(baseline.p)),
    );
    for row in rows {
        let values = [
            json_num(Some(row.nu)),
            json_num(row.mu),
            json_num(row.eps_nu),
            json_num(row.meas_s_nu),
            json_num(row.f_y_nu.map(|e| e.value)),
            json_num(row.gap),
            json_num(row.w1p_dist),
            json_num(row.lip_rank),
            json_num(row.budget.as_ref().map(|b| b.bound)),
            json_str(row.status.as_str()),
        ];
        let fields: Vec<String> = CSV_COLUMNS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{}:{}", json_str(k), v))
            .collect();
        let _ = writeln!(out, "{{{}}}", fields.join(","));
    }
    out
}

pub fn emit_report(file: &ReportFile, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => emit_csv(file),
        Format::JsonLines => emit_jsonl(file),
    }
    .into_bytes()
}

/// `nu,s,y_nu` columns for every row's samples.
pub fn emit_samples(report: &ConvergenceReport) -> Vec<u8> {
    let mut out = String::from("nu,s,y_nu\n");
    for row in &report.rows {
        for &(s, y) in &row.samples {
            let _ = writeln!(out, "{},{},{}", format_float(row.nu), format_float(s), format_float(y));
        }
    }
    out.into_bytes()
}
