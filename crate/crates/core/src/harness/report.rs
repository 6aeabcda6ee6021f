//! Summary tables ("PSNR / PSNR-B / SSIM" per quality) and SVG line plots
//! from evaluation records.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::eval::{mean_rows, EvaluationRecord};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub quality: u8,
    pub images: usize,
    pub psnr: f64,
    pub psnr_b: f64,
    pub ssim: f64,
}

impl SummaryRow {
    pub fn triple(&self) -> String {
        format!("{:.2} / {:.2} / {:.3}", self.psnr, self.psnr_b, self.ssim)
    }
}

/// One (dataset, variant, convention) partition. Partitions without rows are
/// never created.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSection {
    pub dataset: String,
    pub variant: String,
    pub convention: String,
    pub rows: Vec<SummaryRow>,
}

pub fn summarize(records: &[EvaluationRecord]) -> Vec<ReportSection> {
    let mut counts: BTreeMap<(String, u8, String, String), usize> = BTreeMap::new();
    for r in records {
        *counts
            .entry((r.dataset.clone(), r.quality, r.variant.clone(), r.convention.clone()))
            .or_default() += 1;
    }
    let mut sections: BTreeMap<(String, String, String), Vec<SummaryRow>> = BTreeMap::new();
    for m in mean_rows(records) {
        let n = counts[&(m.dataset.clone(), m.quality, m.variant.clone(), m.convention.clone())];
        sections.entry((m.dataset, m.variant, m.convention)).or_default().push(SummaryRow {
            quality: m.quality,
            images: n,
            psnr: m.psnr,
            psnr_b: m.psnr_b,
            ssim: m.ssim,
        });
    }
    sections
        .into_iter()
        .map(|((dataset, variant, convention), rows)| ReportSection {
            dataset,
            variant,
            convention,
            rows,
        })
        .collect()
}

pub fn markdown(sections: &[ReportSection]) -> String {
    let mut s = String::new();
    for sec in sections {
        let _ = writeln!(s, "## {} / {} / {}\n", sec.dataset, sec.variant, sec.convention);
        let _ = writeln!(s, "| quality | images | PSNR / PSNR-B / SSIM |\n|---|---|---|");
        for r in &sec.rows {
            let _ = writeln!(s, "| {} | {} | {} |", r.quality, r.images, r.triple());
        }
        s.push('\n');
    }
    s
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// PSNR against quality, one polyline per section.
pub fn psnr_svg(sections: &[ReportSection]) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let pts: Vec<(f64, f64)> = sections
        .iter()
        .flat_map(|s| s.rows.iter().map(|r| (r.quality as f64, r.psnr)))
        .collect();
    let (mut lo, mut hi) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if pts.is_empty() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let x = |q: f64| m + (q - 1.0) / 99.0 * (w - 2.0 * m);
    let y = |v: f64| h - m - (v - lo) / (hi - lo) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{} H{}" stroke="black" fill="none"/>"#,
        h - m,
        w - m
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">quality</text>"#, w / 2.0, h - 10.0);
    let _ = writeln!(s, r#"<text x="12" y="{}" transform="rotate(-90 12 {})" text-anchor="middle">PSNR (dB)</text>"#, h / 2.0, h / 2.0);
    for (label, v) in [(format!("{lo:.2}"), lo), (format!("{hi:.2}"), hi)] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#, m - 4.0, y(v) + 4.0);
    }
    for q in [10.0, 50.0, 100.0] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{q}</text>"#, x(q), h - m + 16.0);
    }
    for (i, sec) in sections.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let line: Vec<String> = sec.rows.iter().map(|r| format!("{:.1},{:.1}", x(r.quality as f64), y(r.psnr))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{} {} {}</text>"#,
            m + 10.0,
            m + 14.0 * (i as f64 + 1.0),
            sec.dataset,
            sec.variant,
            sec.convention
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `summary.csv`, `summary.md` and `psnr.svg` into `out_dir`.
pub fn write_report(records: &[EvaluationRecord], out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let sections = summarize(records);
    let csv_path = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["dataset", "variant", "convention", "quality", "images", "psnr", "psnr_b", "ssim", "triple"])?;
    for sec in &sections {
        for r in &sec.rows {
            w.write_record([
                sec.dataset.clone(),
                sec.variant.clone(),
                sec.convention.clone(),
                r.quality.to_string(),
                r.images.to_string(),
                format!("{:.6}", r.psnr),
                format!("{:.6}", r.psnr_b),
                format!("{:.6}", r.ssim),
                r.triple(),
            ])?;
        }
    }
    w.flush()?;
    let md = out_dir.join("summary.md");
    fs::write(&md, markdown(&sections))?;
    let svg = out_dir.join("psnr.svg");
    fs::write(&svg, psnr_svg(&sections))?;
    Ok(vec![csv_path, md, svg])
}
