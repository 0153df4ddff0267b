//! Deterministic text exports: OBJ meshes of immersion fields, scalar
//! fields and stage reports as CSV and JSON lines.

use std::fmt::Write as _;

use crate::driver::StageReport;
use crate::error::{Error, Result};
use crate::weierstrass::ImmersionField;

/// Column order of report tables.
pub const REPORT_COLUMNS: [&str; 11] = [
    "stage",
    "sup_change",
    "sup_change_target",
    "distance",
    "distance_target",
    "flux_err",
    "h_err",
    "min_phi3",
    "N",
    "M",
    "mu",
];

/// At most nine significant digits, shortest form.
pub fn fmt_sig(x: f64) -> String {
    let r: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if r == 0.0 {
        return "0".into();
    }
    let a = r.abs();
    if (1e-4..1e9).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Wavefront OBJ text: one vertex per grid node in index order, quads between
/// adjacent rings with angular wraparound, and a triangle fan around the
/// center of a disk grid.
pub fn export_mesh(field: &ImmersionField) -> Result<String> {
    let grid = &field.grid;
    let mut out = String::new();
    for (k, v) in field.values.iter().enumerate() {
        if let Some(c) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::Export(format!(
                "node {k} (z = {}) has non-finite coordinate {}",
                grid.z(k),
                ["x", "y", "z"][c]
            )));
        }
        let _ = writeln!(out, "v {} {} {}", fmt_sig(v[0]), fmt_sig(v[1]), fmt_sig(v[2]));
    }
    let na = grid.angular_count();
    let first = if grid.parent().is_disk() {
        for j in 0..na {
            let _ = writeln!(out, "f 1 {} {}", grid.index(1, j) + 1, grid.index(1, j + 1) + 1);
        }
        1
    } else {
        0
    };
    for i in first..grid.radial_count() - 1 {
        for j in 0..na {
            let _ = writeln!(
                out,
                "f {} {} {} {}",
                grid.index(i, j) + 1,
                grid.index(i + 1, j) + 1,
                grid.index(i + 1, j + 1) + 1,
                grid.index(i, j + 1) + 1
            );
        }
    }
    Ok(out)
}

/// `node,re,im,<column>` rows for a scalar field on grid nodes.
pub fn export_scalar_csv(field: &ImmersionField, values: &[f64], column: &str) -> Result<String> {
    if values.len() != field.grid.len() {
        return Err(Error::Export(format!(
            "{} values for {} nodes",
            values.len(),
            field.grid.len()
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Export(e.to_string());
    w.write_record(["node", "re", "im", column]).map_err(io)?;
    for (k, v) in values.iter().enumerate() {
        let z = field.grid.z(k);
        w.write_record([k.to_string(), fmt_sig(z.re), fmt_sig(z.im), fmt_sig(*v)]).map_err(io)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Export(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
}

/// Report table as CSV (fixed column order) and as JSON lines.
pub fn export_reports(reports: &[StageReport]) -> Result<(String, String)> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Export(e.to_string());
    w.write_record(REPORT_COLUMNS).map_err(io)?;
    let mut jsonl = String::new();
    for r in reports {
        w.write_record([
            r.stage.to_string(),
            fmt_sig(r.sup_change),
            fmt_sig(r.sup_change_target),
            fmt_sig(r.distance),
            fmt_sig(r.distance_target),
            fmt_sig(r.flux_err),
            fmt_sig(r.h_err),
            fmt_sig(r.min_phi3),
            r.n.to_string(),
            fmt_sig(r.m),
            fmt_sig(r.mu),
        ])
        .map_err(io)?;
        jsonl.push_str(&serde_json::to_string(r)?);
        jsonl.push('\n');
    }
    Ok((finish(w)?, jsonl))
}

/// Reports back from JSON lines.
pub fn parse_reports(jsonl: &str) -> Result<Vec<StageReport>> {
    jsonl
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
