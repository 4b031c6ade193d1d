//! One CSV row per accepted iteration.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::monitor::MonitorReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub r: u64,
    pub t: u64,
    pub active_transversals: usize,
    pub min_candidate: usize,
    pub max_candidate: usize,
    pub s_minus: f64,
    pub s_plus: f64,
    pub d_bound: f64,
    pub size_band: bool,
    pub shrink_band: bool,
    pub degree: bool,
    pub transversal_neighbors: bool,
    pub remaining_neighbors: bool,
    pub crowding: bool,
    pub calibration_violations: usize,
    pub retries: u64,
}

impl TraceRow {
    pub fn from_report(report: &MonitorReport, retries: u64) -> Self {
        Self {
            r: report.r,
            t: report.t,
            active_transversals: report.active_lanes,
            min_candidate: report.min_candidate,
            max_candidate: report.max_candidate,
            s_minus: report.s_minus,
            s_plus: report.s_plus,
            d_bound: report.d_bound,
            size_band: report.size_band.passed,
            shrink_band: report.shrink_band.passed,
            degree: report.degree.passed,
            transversal_neighbors: report.transversal_neighbors.passed,
            remaining_neighbors: report.remaining_neighbors.passed,
            crowding: report.crowding.passed,
            calibration_violations: report.calibration_violations,
            retries,
        }
    }
}

pub fn write_trace<W: Write>(rows: &[TraceRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "r",
            "t",
            "active_transversals",
            "min_candidate",
            "max_candidate",
            "s_minus",
            "s_plus",
            "d_bound",
            "size_band",
            "shrink_band",
            "degree",
            "transversal_neighbors",
            "remaining_neighbors",
            "crowding",
            "calibration_violations",
            "retries",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
