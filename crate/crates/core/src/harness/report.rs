//! Report emission: CSV, JSON and markdown tables.

use super::metrics::{MetricsRecord, MotionType};
use super::HarnessError;
use std::fmt::Write as _;
use std::str::FromStr;

pub const STATIC_HEADER: &str =
    "test_case,distance_m,angle_deg,altitude_error_cm,lateral_displacement_cm,time_to_land_s,success";
pub const DYNAMIC_HEADER: &str =
    "test_case,motion_type,speed,tracking_error_cm,landing_displacement_cm,time_to_stabilize_s,success";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Md,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Md => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Md),
            other => Err(HarnessError::BadReport(format!("unknown report format {other:?}"))),
        }
    }
}

fn is_dynamic(records: &[MetricsRecord]) -> bool {
    records.iter().any(|r| r.motion_type.is_some())
}

fn num(x: f64) -> String {
    format!("{x:.2}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn speed_label(r: &MetricsRecord) -> String {
    match (r.motion_type, r.speed) {
        (Some(MotionType::Linear), Some(v)) => format!("{v} m/s"),
        (Some(MotionType::Rotational), Some(v)) => format!("{v}°/s"),
        _ => String::new(),
    }
}

fn csv_rows(records: &[MetricsRecord]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    if is_dynamic(records) {
        let header = DYNAMIC_HEADER.split(',').collect();
        let rows = records
            .iter()
            .map(|r| {
                vec![
                    r.test_case.to_string(),
                    r.motion_type.map(|m| m.label().to_string()).unwrap_or_default(),
                    r.speed.map(|v| v.to_string()).unwrap_or_default(),
                    opt(r.tracking_error_cm),
                    num(r.lateral_displacement_cm),
                    opt(r.time_to_stabilize_s),
                    r.success.to_string(),
                ]
            })
            .collect();
        (header, rows)
    } else {
        let header = STATIC_HEADER.split(',').collect();
        let rows = records
            .iter()
            .map(|r| {
                vec![
                    r.test_case.to_string(),
                    r.distance_m.to_string(),
                    r.angle_deg.to_string(),
                    num(r.altitude_error_cm),
                    num(r.lateral_displacement_cm),
                    num(r.time_to_land_s),
                    r.success.to_string(),
                ]
            })
            .collect();
        (header, rows)
    }
}

fn csv_doc(records: &[MetricsRecord]) -> String {
    let (header, rows) = csv_rows(records);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn md_doc(records: &[MetricsRecord]) -> String {
    let mut out = String::new();
    let (header, rows): ([&str; 7], Vec<[String; 7]>) = if is_dynamic(records) {
        (
            [
                "Test Case",
                "Motion Type",
                "Speed/Angular Velocity",
                "Tracking Error (cm)",
                "Landing Displacement (cm)",
                "Time to Stabilize (s)",
                "Success",
            ],
            records
                .iter()
                .map(|r| {
                    [
                        r.test_case.to_string(),
                        r.motion_type.map(|m| m.label().to_string()).unwrap_or_default(),
                        speed_label(r),
                        opt(r.tracking_error_cm),
                        num(r.lateral_displacement_cm),
                        opt(r.time_to_stabilize_s),
                        yes_no(r.success),
                    ]
                })
                .collect(),
        )
    } else {
        (
            [
                "Test Case",
                "Distance (m)",
                "Angle (°)",
                "Altitude Error (cm)",
                "Lateral Displacement (cm)",
                "Time to Land (s)",
                "Success",
            ],
            records
                .iter()
                .map(|r| {
                    [
                        r.test_case.to_string(),
                        r.distance_m.to_string(),
                        r.angle_deg.to_string(),
                        num(r.altitude_error_cm),
                        num(r.lateral_displacement_cm),
                        num(r.time_to_land_s),
                        yes_no(r.success),
                    ]
                })
                .collect(),
        )
    };
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

/// Renders records as a report document. Records carrying motion fields
/// select the moving-pad layout; otherwise the static layout is used.
pub fn emit_report(records: &[MetricsRecord], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => csv_doc(records),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(records).expect("records serialize");
            s.push('\n');
            s
        }
        ReportFormat::Md => md_doc(records),
    }
}
