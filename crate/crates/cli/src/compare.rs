use std::fmt::Write as _;

use crsos::HeightDistribution;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareTolerances {
    /// Bound on the exact-vs-KMC distance.
    pub kmc: f64,
    /// Bound on the exact-vs-mean-field distance; unchecked if absent.
    pub mean_field: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KRow {
    pub k: usize,
    pub exact: f64,
    pub kmc: f64,
    pub mean_field: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub tv_exact_kmc: f64,
    pub tv_exact_mean_field: f64,
    pub tv_kmc_mean_field: f64,
    pub tolerances: CompareTolerances,
    pub pass: bool,
    pub rows: Vec<KRow>,
}

impl CompareReport {
    pub fn csv(&self) -> String {
        let mut s = String::from("k,exact,kmc,mean_field,kmc_minus_exact,mean_field_minus_exact\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:?},{:?},{:?},{:?},{:?},{:?}",
                r.k,
                r.exact,
                r.kmc,
                r.mean_field,
                r.kmc - r.exact,
                r.mean_field - r.exact
            );
        }
        s
    }
}

/// Distances between the three one-site laws on a common padded support.
/// Rows stop at the largest `k` where any law is nonzero.
pub fn compare_report(
    exact: &HeightDistribution,
    kmc: &HeightDistribution,
    mean_field: &HeightDistribution,
    tolerances: CompareTolerances,
) -> CompareReport {
    let len = exact.len().max(kmc.len()).max(mean_field.len());
    let len = (0..len)
        .rev()
        .find(|&k| exact.get(k) != 0.0 || kmc.get(k) != 0.0 || mean_field.get(k) != 0.0)
        .map_or(1, |k| k + 1);
    let rows = (0..len)
        .map(|k| KRow { k, exact: exact.get(k), kmc: kmc.get(k), mean_field: mean_field.get(k) })
        .collect();
    let tv_exact_kmc = exact.total_variation(kmc);
    let tv_exact_mean_field = exact.total_variation(mean_field);
    let pass = tv_exact_kmc <= tolerances.kmc
        && tolerances.mean_field.is_none_or(|tol| tv_exact_mean_field <= tol);
    CompareReport {
        tv_exact_kmc,
        tv_exact_mean_field,
        tv_kmc_mean_field: kmc.total_variation(mean_field),
        tolerances,
        pass,
        rows,
    }
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Static overlay of the three laws. `provenance` goes into a comment at the
/// top of the file, followed by the plotted values.
pub fn overlay_svg(report: &CompareReport, provenance: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, "<!-- {} -->", provenance.replace("--", "- -"));
    let _ = writeln!(s, "<!-- k,exact,kmc,mean_field");
    for r in &report.rows {
        let _ = writeln!(s, "{:?},{:?},{:?},{:?}", r.k, r.exact, r.kmc, r.mean_field);
    }
    let _ = writeln!(s, "-->");
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);

    let n = report.rows.len().max(2) - 1;
    let top = report
        .rows
        .iter()
        .flat_map(|r| [r.exact, r.kmc, r.mean_field])
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.05;
    let x = |k: usize| MARGIN + (W - 2.0 * MARGIN) * k as f64 / n as f64;
    let y = |p: f64| H - MARGIN - (H - 2.0 * MARGIN) * (p.max(0.0) / top);

    let (x0, y0, x1, y1) = (MARGIN, H - MARGIN, W - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="12">"#);
    for r in &report.rows {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, x(r.k), y0 + 16.0, r.k);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">k</text>"#, W / 2.0, H - 10.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, y1 + 4.0, top);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">0</text>"#, x0 - 4.0, y0 + 4.0);
    let _ = writeln!(s, "</g>");

    let series: [(&str, &str, fn(&KRow) -> f64); 3] = [
        ("exact", "#1f77b4", |r| r.exact),
        ("kmc", "#d62728", |r| r.kmc),
        ("mean field", "#2ca02c", |r| r.mean_field),
    ];
    for (i, (label, color, get)) in series.iter().enumerate() {
        let points: Vec<String> =
            report.rows.iter().map(|r| format!("{:.2},{:.2}", x(r.k), y(get(r)))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        for r in &report.rows {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, x(r.k), y(get(r)));
        }
        let ly = MARGIN + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" font-family="sans-serif" font-size="12" fill="{color}">{label}</text>"#,
            W - MARGIN - 80.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" font-family="sans-serif" font-size="12">TV(exact, kmc) = {:.4}  TV(exact, mean field) = {:.4}</text>"#,
        MARGIN, report.tv_exact_kmc, report.tv_exact_mean_field
    );
    s.push_str("</svg>\n");
    s
}
