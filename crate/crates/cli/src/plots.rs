use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use whh_core::lab::SectionKind;

use crate::report::{AnalysisReport, PointReport};

pub const ESSENTIAL_RANGE: &str = "essential_range.csv";
pub const DISTANCE_VS_N: &str = "distance_vs_N.csv";
pub const SINGULAR_VALUES: &str = "singular_values.csv";

fn section_label(kind: SectionKind, source: &str) -> String {
    match source {
        "phi" => kind.name().to_string(),
        other => format!("{}_{other}", kind.name()),
    }
}

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<std::fs::File>> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(header)?;
    Ok(w)
}

/// Writes the three CSV files of one point into `dir`.
pub fn emit_point(point: &PointReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let result = point.result.as_ref();

    let mut w = writer(&dir.join(ESSENTIAL_RANGE), &["re", "im"])?;
    for [re, im] in result.map(|r| r.essential_range.as_slice()).unwrap_or_default() {
        w.write_record([re.to_string(), im.to_string()])?;
    }
    w.flush()?;

    let mut w = writer(&dir.join(DISTANCE_VS_N), &["class", "N", "lower_bound"])?;
    for e in result.map(|r| r.estimates.as_slice()).unwrap_or_default() {
        for b in &e.lower_bounds {
            w.write_record([e.class.name().to_string(), b.n.to_string(), b.value.to_string()])?;
        }
    }
    w.flush()?;

    let mut w = writer(&dir.join(SINGULAR_VALUES), &["kind", "N", "index", "sigma"])?;
    let sections = result
        .and_then(|r| r.operator_lab.as_ref())
        .map(|lab| lab.sections.as_slice())
        .unwrap_or_default();
    for d in sections {
        let kind = section_label(d.kind, &d.source);
        for (i, s) in d.singular_values.iter().enumerate() {
            w.write_record([kind.clone(), d.n.to_string(), i.to_string(), s.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn point_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("point-{index:03}"))
}

/// One directory per sweep point under `out`; returns the directories.
pub fn emit_plot_data(report: &AnalysisReport, out: &Path) -> Result<Vec<PathBuf>> {
    report
        .points
        .iter()
        .map(|p| {
            let dir = point_dir(out, p.index);
            emit_point(p, &dir)?;
            Ok(dir)
        })
        .collect()
}
