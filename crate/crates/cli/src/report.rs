use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use toric_wkstab::rational::{fmt_q, parse_q};

use crate::input_error;
use crate::record::{Scalar, SweepRecord, SweepRun};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
}

pub fn report(run: &SweepRun, format: Format) -> String {
    match format {
        Format::Json => to_json(run),
        Format::Csv => records_to_csv(&run.records, run.dim),
        Format::Md => to_markdown(run),
    }
}

pub fn to_json(run: &SweepRun) -> String {
    let mut s = serde_json::to_string_pretty(run).expect("records serialize");
    s.push('\n');
    s
}

pub fn from_json(s: &str) -> Result<SweepRun> {
    match serde_json::from_str(s) {
        Ok(r) => Ok(r),
        Err(e) => input_error(format!("sweep json: {e}")),
    }
}

fn csv_header(dim: usize) -> Vec<String> {
    let mut h = vec!["eps".to_string(), "delta".into(), "c".into()];
    h.extend((0..=dim).map(|i| format!("b{i}")));
    h.push("status".into());
    h.push("ms".into());
    h
}

/// Columns `eps, delta, c, b0..bn, status, ms`; empty cells for nulls.
pub fn records_to_csv(records: &[SweepRecord], dim: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(csv_header(dim)).expect("in-memory write");
    for r in records {
        let opt = |s: &Option<Scalar>| s.as_ref().map(ToString::to_string).unwrap_or_default();
        let mut row = vec![fmt_q(&r.eps), opt(&r.delta), opt(&r.c_value)];
        match &r.ell_coeffs {
            Some(b) => row.extend(b.iter().map(fmt_q)),
            None => row.extend(std::iter::repeat_n(String::new(), dim + 1)),
        }
        row.push(r.lp_status.clone());
        row.push(r.wall_time_ms.to_string());
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn records_from_csv(s: &str) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_reader(s.as_bytes());
    let header = rd.headers()?.clone();
    let nb = header.len().saturating_sub(5);
    if header.len() < 6 || header.iter().collect::<Vec<_>>() != csv_header(nb - 1) {
        return input_error("unexpected sweep csv header");
    }
    let scalar = |x: &str| -> Result<Option<Scalar>> {
        if x.is_empty() {
            Ok(None)
        } else {
            Ok(Some(x.parse()?))
        }
    };
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let b: Vec<&str> = (3..3 + nb).map(|i| &row[i]).collect();
        let ell_coeffs = if b.iter().all(|x| x.is_empty()) {
            None
        } else {
            Some(b.iter().map(|x| parse_q(x)).collect::<toric_wkstab::Result<_>>()?)
        };
        out.push(SweepRecord {
            eps: parse_q(&row[0])?,
            delta: scalar(&row[1])?,
            c_value: scalar(&row[2])?,
            ell_coeffs,
            lp_status: row[3 + nb].to_string(),
            wall_time_ms: row[4 + nb].parse().context("ms column")?,
        });
    }
    Ok(out)
}

fn to_markdown(run: &SweepRun) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Perturbation sweep\n");
    let _ = writeln!(s, "- dimension: {}", run.dim);
    let _ = writeln!(s, "- refinement: {}", run.refinement);
    if let Some(y0) = &run.base_point {
        let _ = writeln!(s, "- base point: ({})", y0.iter().map(fmt_q).collect::<Vec<_>>().join(", "));
    }
    if let Some(d) = run.quadrature_degree {
        let _ = writeln!(s, "- quadrature degree: {d}");
    }
    let _ = writeln!(s, "- boundary measure: {}", run.sigma_convention);
    let _ = writeln!(s, "\n> {}\n", run.caveat);
    let _ = writeln!(s, "| eps | delta | c | ell | status | triangulation | ms |");
    let _ = writeln!(s, "|---|---|---|---|---|---|---|");
    for (r, t) in run.records.iter().zip(&run.triangulation_ids) {
        let opt = |x: &Option<Scalar>| x.as_ref().map(ToString::to_string).unwrap_or_else(|| "-".into());
        let ell = r
            .ell_coeffs
            .as_ref()
            .map(|b| b.iter().map(fmt_q).collect::<Vec<_>>().join(", "))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} |",
            fmt_q(&r.eps),
            opt(&r.delta),
            opt(&r.c_value),
            ell,
            r.lp_status.replace('|', "/"),
            t.as_deref().unwrap_or("-"),
            r.wall_time_ms
        );
    }
    let sum = &run.summary;
    let _ = writeln!(s);
    match &sum.largest_positive_eps {
        Some(e) => {
            let _ = writeln!(s, "Largest sampled eps with positive delta at and below it: {}.", fmt_q(e));
        }
        None => {
            let _ = writeln!(s, "No sampled eps has positive delta from the smallest one up.");
        }
    }
    let _ = writeln!(s, "Destabilized entries: {}. Failed entries: {}.", sum.destabilized, sum.failed);
    let _ = writeln!(s, "\n_{}_", sum.note);
    s
}

/// SHA-256 of the JSON document with every `wall_time_ms` zeroed.
pub fn determinism_hash(run: &SweepRun) -> String {
    let mut canon = run.clone();
    for r in &mut canon.records {
        r.wall_time_ms = 0;
    }
    hex::encode(Sha256::digest(serde_json::to_vec(&canon).expect("records serialize")))
}

/// Writes `sweep-<hash>.{json,csv,md}` into `dir`, named by the first 16 hex
/// digits of the determinism hash.
pub fn write_outputs(run: &SweepRun, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = format!("sweep-{}", &determinism_hash(run)[..16]);
    let mut paths = Vec::new();
    for (ext, f) in [("json", Format::Json), ("csv", Format::Csv), ("md", Format::Md)] {
        let p = dir.join(format!("{stem}.{ext}"));
        std::fs::write(&p, report(run, f)).with_context(|| format!("writing {}", p.display()))?;
        paths.push(p);
    }
    Ok(paths)
}
