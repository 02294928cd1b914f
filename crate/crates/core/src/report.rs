//! Result tables and their CSV / JSON serializations.
//!
//! Every table has a fixed column order and every number a fixed format, so
//! identical inputs produce byte-identical files. Derived columns such as
//! relative errors are computed from full-precision values and only rounded
//! when written.

use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::io::{self, Write};

use crate::analytics::AnalyticReport;
use crate::optimizer::{OptimizerConfig, Optimum, ProfilePoint};
use crate::simulator::MonteCarloReport;
use crate::stats::SimEstimate;
use crate::sweep::SweepRow;
use crate::trace::TraceEstimate;

/// Relative-error threshold of the validation report.
pub const VALIDATION_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Fixed number of decimals.
    Fixed(usize),
    /// Seven decimals, switching to scientific notation below 1e-3.
    Auto,
}

impl Format {
    pub fn render(self, v: f64) -> String {
        if v.is_nan() {
            return "nan".into();
        }
        if v.is_infinite() {
            return if v > 0.0 { "inf".into() } else { "-inf".into() };
        }
        match self {
            Format::Fixed(d) => format!("{v:.d$}"),
            Format::Auto if v != 0.0 && v.abs() < 1e-3 => format!("{v:.6e}"),
            Format::Auto => format!("{v:.7}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(skip)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// A column-oriented result with optional key/value metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub kind: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
    pub metadata: Vec<(String, Value)>,
}

impl ResultTable {
    pub fn new(kind: &str) -> Self {
        ResultTable {
            kind: kind.to_string(),
            columns: Vec::new(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn column(mut self, name: &str, unit: Option<&str>, format: Format) -> Self {
        self.columns.push(Column {
            name: name.to_string(),
            unit: unit.map(str::to_string),
            format,
        });
        self
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    fn render_cell(&self, col: usize, v: &Value) -> String {
        match v {
            Value::Num(x) => self.columns[col].format.render(*x),
            Value::Int(i) => i.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))
            .expect("in-memory write");
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, v)| self.render_cell(i, v))
                .collect();
            w.write_record(&cells).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    /// Self-describing JSON document: kind, metadata, columns and rows as
    /// objects keyed by column name, numbers at full precision.
    pub fn to_json(&self) -> String {
        let metadata: serde_json::Map<String, serde_json::Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.name.clone(), json!(v)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "kind": self.kind,
            "metadata": metadata,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json");
        s.push('\n');
        s
    }

    /// Aligned plain-text rendering for terminals.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().enumerate().map(|(i, v)| self.render_cell(i, v)).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| cells.iter().map(|r| r[i].len()).chain([c.name.len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let v = match v {
                Value::Num(x) => Format::Auto.render(*x),
                Value::Int(i) => i.to_string(),
                Value::Text(s) => s.clone(),
            };
            let _ = writeln!(out, "# {k}: {v}");
        }
        let line = |out: &mut String, items: Vec<&str>| {
            let parts: Vec<String> = items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, self.columns.iter().map(|c| c.name.as_str()).collect());
        for r in &cells {
            line(&mut out, r.iter().map(String::as_str).collect());
        }
        out
    }

    pub fn write<W: Write>(&self, mut w: W, format: OutputFormat) -> io::Result<()> {
        let s = match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Structured => self.to_json(),
            OutputFormat::Text => self.to_text(),
        };
        w.write_all(s.as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Structured,
    Text,
}

fn long_table(kind: &str) -> ResultTable {
    ResultTable::new(kind)
        .column("quantity", None, Format::Fixed(0))
        .column("value", None, Format::Auto)
        .column("unit", None, Format::Fixed(0))
}

fn long_row(t: &mut ResultTable, name: &str, value: f64, unit: &str) {
    t.push(vec![name.into(), value.into(), unit.into()]);
}

/// Every field of an analytic report, one row each.
pub fn analysis_table(r: &AnalyticReport) -> ResultTable {
    let p = &r.params;
    let mut t = long_table("analysis");
    let rows: [(&str, f64, &str); 38] = [
        ("session_mean", p.session_mean(), "s"),
        ("threshold_mean", p.threshold_mean(), "s"),
        ("eta_s", p.eta_s, "1/s"),
        ("eta_m", p.eta_m(), "1/s"),
        ("eta_f", p.eta_f(), "1/s"),
        ("eta_o", p.eta_o, "1/s"),
        ("macro_variance", p.macro_law.variance(), "s^2"),
        ("femto_variance", p.femto_law.variance(), "s^2"),
        ("prob_case1", r.prob_case1, "1"),
        ("prob_case2", r.prob_case2, "1"),
        ("macro_laplace", r.macro_laplace, "1"),
        ("femto_laplace", r.femto_laplace, "1"),
        ("alpha", r.alpha, "1"),
        ("beta", r.beta, "1"),
        ("tau", r.tau, "s"),
        ("sigma", r.sigma, "s"),
        ("xi", r.xi, "s"),
        ("phi", r.phi, "s"),
        ("rho", r.rho, "s"),
        ("x1", r.x1, "1"),
        ("x2", r.x2, "1"),
        ("x3", r.x3, "1"),
        ("y1", r.y1, "s"),
        ("y2", r.y2, "s"),
        ("e_nb", r.e_nb, "handovers"),
        ("e_nt", r.e_nt, "handovers"),
        ("e_tb", r.e_tb, "s"),
        ("e_tt", r.e_tt, "s"),
        ("static_femto_time", r.static_femto_time, "s"),
        ("theta", r.theta, "1"),
        ("lambda", r.lambda, "1"),
        ("theta_closed_form", r.theta_closed_form, "1"),
        ("lambda_closed_form", r.lambda_closed_form, "1"),
        ("objective", r.objective(), "1"),
        ("e_nt_case_1_1", r.n_t_cases.case_1_1, "handovers"),
        ("e_nt_case_1_2", r.n_t_cases.case_1_2, "handovers"),
        ("e_nt_case_2_1", r.n_t_cases.case_2_1, "handovers"),
        ("e_nt_case_2_2", r.n_t_cases.case_2_2, "handovers"),
    ];
    for (name, v, unit) in rows {
        long_row(&mut t, name, v, unit);
    }
    for (prefix, cases, unit) in [
        ("e_nb", &r.n_b_cases, "handovers"),
        ("e_tb", &r.t_b_cases, "s"),
        ("e_tt", &r.t_t_cases, "s"),
    ] {
        for (suffix, v) in [
            ("1_1", cases.case_1_1),
            ("1_2", cases.case_1_2),
            ("2_1", cases.case_2_1),
            ("2_2", cases.case_2_2),
        ] {
            long_row(&mut t, &format!("{prefix}_case_{suffix}"), v, unit);
        }
    }
    t
}

/// One line of a validation report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationRow {
    pub metric: &'static str,
    pub analytic: f64,
    pub simulated: SimEstimate,
    /// `|analytic - simulated| / analytic`, full precision.
    pub relative_error: f64,
}

impl ValidationRow {
    fn new(metric: &'static str, analytic: f64, simulated: SimEstimate) -> Self {
        ValidationRow {
            metric,
            analytic,
            simulated,
            relative_error: (analytic - simulated.mean).abs() / analytic.abs(),
        }
    }

    pub fn passes(&self) -> bool {
        self.relative_error < VALIDATION_LIMIT
    }
}

/// `N_t`, `T_t`, `Θ`, `Λ`: analytic against simulated.
pub fn validation_rows(a: &AnalyticReport, mc: &MonteCarloReport) -> [ValidationRow; 4] {
    [
        ValidationRow::new("n_t", a.e_nt, mc.n_t),
        ValidationRow::new("t_t", a.e_tt, mc.t_t),
        ValidationRow::new("theta", a.theta, mc.theta),
        ValidationRow::new("lambda", a.lambda, mc.lambda),
    ]
}

/// Analytic, simulated and relative-error rows per metric; `Θ` and `Λ` are given in percent.
pub fn validation_table(a: &AnalyticReport, mc: &MonteCarloReport) -> ResultTable {
    let cfg = &mc.config;
    let mut t = ResultTable::new("validation")
        .column("metric", None, Format::Fixed(0))
        .column("unit", None, Format::Fixed(0))
        .column("analytic", None, Format::Fixed(5))
        .column("simulated", None, Format::Fixed(5))
        .column("ci95_halfwidth", None, Format::Fixed(5))
        .column("error_percent", None, Format::Fixed(5))
        .column("pass", None, Format::Fixed(0))
        .meta("session_mean_s", a.params.session_mean())
        .meta("threshold_mean_s", a.params.threshold_mean())
        .meta("replications", cfg.replications)
        .meta("batch_count", cfg.batch_count)
        .meta("seed", cfg.seed)
        .meta("counting_mode", cfg.counting_mode.to_string());
    for row in validation_rows(a, mc) {
        let (unit, scale) = match row.metric {
            "n_t" => ("handovers", 1.0),
            "t_t" => ("s", 1.0),
            _ => ("%", 100.0),
        };
        t.push(vec![
            row.metric.into(),
            unit.into(),
            (row.analytic * scale).into(),
            (row.simulated.mean * scale).into(),
            (row.simulated.ci_halfwidth * scale).into(),
            (row.relative_error * 100.0).into(),
            if row.passes() { "yes" } else { "no" }.into(),
        ]);
    }
    t
}

/// Simulated aggregates with their intervals.
pub fn simulation_table(mc: &MonteCarloReport) -> ResultTable {
    let mut t = ResultTable::new("simulation")
        .column("quantity", None, Format::Fixed(0))
        .column("mean", None, Format::Fixed(5))
        .column("ci95_halfwidth", None, Format::Fixed(5))
        .column("unit", None, Format::Fixed(0));
    for (name, e, unit) in [
        ("n_b", mc.n_b, "handovers"),
        ("n_t", mc.n_t, "handovers"),
        ("t_b", mc.t_b, "s"),
        ("t_t", mc.t_t, "s"),
        ("t_static", mc.t_static, "s"),
        ("theta", mc.theta, "1"),
        ("lambda", mc.lambda, "1"),
        ("start_macro", mc.start_macro, "1"),
    ] {
        t.push(vec![name.into(), e.mean.into(), e.ci_halfwidth.into(), unit.into()]);
    }
    t
}

pub fn sweep_table(axis: &str, unit: &str, rows: &[SweepRow]) -> ResultTable {
    let simulated = rows.iter().any(|r| r.simulated.is_some());
    let mut t = ResultTable::new("sweep")
        .column(axis, Some(unit), Format::Fixed(5))
        .column("theta", None, Format::Fixed(7))
        .column("lambda", None, Format::Fixed(7))
        .column("objective", None, Format::Fixed(7))
        .meta("axis", axis);
    if simulated {
        t = t
            .column("theta_simulated", None, Format::Fixed(7))
            .column("theta_ci95", None, Format::Fixed(7))
            .column("lambda_simulated", None, Format::Fixed(7))
            .column("lambda_ci95", None, Format::Fixed(7));
    }
    for r in rows {
        let mut row: Vec<Value> = vec![
            r.value.into(),
            r.analytic.theta.into(),
            r.analytic.lambda.into(),
            r.analytic.objective().into(),
        ];
        if simulated {
            let m = r.simulated.as_ref();
            let get = |f: fn(&MonteCarloReport) -> f64| m.map_or(f64::NAN, f);
            row.extend([
                get(|m| m.theta.mean).into(),
                get(|m| m.theta.ci_halfwidth).into(),
                get(|m| m.lambda.mean).into(),
                get(|m| m.lambda.ci_halfwidth).into(),
            ]);
        }
        t.push(row);
    }
    t
}

pub fn optimum_table(o: &Optimum, cfg: &OptimizerConfig) -> ResultTable {
    let mut t = long_table("optimum")
        .meta("delta_per_second", cfg.delta)
        .meta("epsilon_per_second", cfg.epsilon_rate)
        .meta("grid_points", cfg.grid_points as u64)
        .meta("tolerance", cfg.tolerance)
        .meta("boundary_hit", o.boundary_hit.to_string());
    long_row(&mut t, "eta_o_star", o.eta_o_star, "1/s");
    long_row(&mut t, "expected_threshold_star", o.expected_threshold_star, "s");
    long_row(&mut t, "theta_at", o.theta_at, "1");
    long_row(&mut t, "lambda_at", o.lambda_at, "1");
    long_row(&mut t, "objective_value", o.objective_value, "1");
    t.push(vec!["boundary_hit".into(), o.boundary_hit.to_string().into(), "".into()]);
    t
}

pub fn profile_table(points: &[ProfilePoint]) -> ResultTable {
    let mut t = ResultTable::new("objective_profile")
        .column("eta_o", Some("1/s"), Format::Auto)
        .column("theta", None, Format::Fixed(7))
        .column("lambda", None, Format::Fixed(7))
        .column("objective", None, Format::Fixed(7));
    for p in points {
        t.push(vec![p.eta_o.into(), p.theta.into(), p.lambda.into(), p.objective.into()]);
    }
    t
}

pub fn estimate_table(e: &TraceEstimate) -> ResultTable {
    let mut t = ResultTable::new("trace_estimate")
        .column("quantity", None, Format::Fixed(0))
        .column("estimate", Some("s"), Format::Fixed(5))
        .column("std_error", Some("s"), Format::Fixed(5))
        .column("ci95_halfwidth", Some("s"), Format::Fixed(5))
        .column("n", None, Format::Fixed(0))
        .meta("sessions", e.sessions);
    let nan = SimEstimate {
        mean: f64::NAN,
        ci_halfwidth: f64::NAN,
        std_error: f64::NAN,
        n: 0,
    };
    for (name, est) in [
        ("femto_mean", e.femto_mean.unwrap_or(nan)),
        ("macro_mean", e.macro_mean.unwrap_or(nan)),
        ("session_mean", e.session_mean),
    ] {
        t.push(vec![
            name.into(),
            est.mean.into(),
            est.std_error.into(),
            est.ci_halfwidth.into(),
            est.n.into(),
        ]);
    }
    for (name, s) in [
        ("complete_femto", e.complete_femto),
        ("complete_macro", e.complete_macro),
    ] {
        if let Some(s) = s {
            t = t
                .meta(&format!("{name}_count"), s.count)
                .meta(&format!("{name}_mean_s"), s.mean)
                .meta(&format!("{name}_variance_s2"), s.variance);
        }
    }
    t.meta("session_variance_s2", e.session_variance)
}
