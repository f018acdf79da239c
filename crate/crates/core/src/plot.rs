//! Minimal SVG line plots of sweep CSV files.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};

/// Which column is the abscissa and which columns get a panel each.
/// Every remaining column is a grouping key, one curve per distinct value.
#[derive(Debug, Clone, PartialEq)]
pub struct AxesSpec {
    pub x: String,
    pub panels: Vec<String>,
    pub log_x: bool,
}

impl AxesSpec {
    /// `sum_rate` and `jain` panels against the first column.
    pub fn for_header(header: &[&str]) -> Result<Self> {
        let x = header
            .first()
            .ok_or_else(|| Error::Csv("missing header".into()))?;
        Ok(AxesSpec {
            x: x.to_string(),
            panels: vec!["sum_rate".into(), "jain".into()],
            log_x: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub svg: String,
    /// Curves drawn in each panel.
    pub curves: usize,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn parse_csv(csv: &str) -> Result<Table> {
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Csv("empty input".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if row.len() != header.len() {
            return Err(Error::Csv(format!(
                "row {} has {} fields, header has {}",
                i + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    Ok(Table { header, rows })
}

fn column(table: &Table, name: &str) -> Result<usize> {
    table
        .header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Csv(format!("no column `{name}`")))
}

fn number(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Csv(format!("`{s}` is not a number")))
}

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Renders one panel per `axes.panels` column side by side.
pub fn emit_plot(csv: &str, axes: &AxesSpec) -> Result<Plot> {
    let table = parse_csv(csv)?;
    let xi = column(&table, &axes.x)?;
    let panel_cols = axes
        .panels
        .iter()
        .map(|p| column(&table, p))
        .collect::<Result<Vec<_>>>()?;
    let group_cols: Vec<usize> = (0..table.header.len())
        .filter(|c| *c != xi && !panel_cols.contains(c))
        .collect();

    // group label -> rows, in first-appearance order
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<&Vec<String>>> = BTreeMap::new();
    for row in &table.rows {
        let label = group_cols
            .iter()
            .map(|&c| format!("{}={}", table.header[c], row[c]))
            .collect::<Vec<_>>()
            .join(" ");
        if !groups.contains_key(&label) {
            order.push(label.clone());
        }
        groups.entry(label).or_default().push(row);
    }

    let width = MARGIN + panel_cols.len() as f64 * (PANEL_W + MARGIN);
    let height = PANEL_H + 2.0 * MARGIN + 18.0 * order.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let xs = |row: &Vec<String>| -> Result<f64> {
        let x = number(&row[xi])?;
        Ok(if axes.log_x { x.max(f64::MIN_POSITIVE).log10() } else { x })
    };
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    for row in &table.rows {
        let x = xs(row)?;
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
    }
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }

    for (p, (&yc, name)) in panel_cols.iter().zip(&axes.panels).enumerate() {
        let left = MARGIN + p as f64 * (PANEL_W + MARGIN);
        let top = MARGIN;
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        for row in &table.rows {
            let y = number(&row[yc])?;
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
        let pad = 0.05 * (y_hi - y_lo).max(1e-9);
        let (y_lo, y_hi) = (y_lo - pad, y_hi + pad);
        let sx = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * PANEL_W;
        let sy = |y: f64| top + PANEL_H - (y - y_lo) / (y_hi - y_lo) * PANEL_H;

        let _ = writeln!(svg, r#"<g class="panel" data-y="{name}">"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{left}" y="{top}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        for t in 0..=4 {
            let f = t as f64 / 4.0;
            let xv = x_lo + f * (x_hi - x_lo);
            let yv = y_lo + f * (y_hi - y_lo);
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                sx(xv),
                top + PANEL_H + 14.0,
                tick(if axes.log_x { 10f64.powf(xv) } else { xv })
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                left - 4.0,
                sy(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            left + PANEL_W / 2.0,
            top + PANEL_H + 32.0,
            axes.x
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{name}</text>"#,
            left + PANEL_W / 2.0,
            top - 10.0
        );

        for (g, label) in order.iter().enumerate() {
            let mut pts = Vec::new();
            for row in &groups[label] {
                pts.push((xs(row)?, number(&row[yc])?));
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let path = pts
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect::<Vec<_>>()
                .join(" ");
            let colour = PALETTE[g % PALETTE.len()];
            let dash = if label.contains("mode=maxsum") { r#" stroke-dasharray="6 3""# } else { "" };
            let _ = writeln!(
                svg,
                r#"<polyline class="curve" data-group="{label}" points="{path}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>"#
            );
        }
        let _ = writeln!(svg, "</g>");
    }

    for (g, label) in order.iter().enumerate() {
        let y = PANEL_H + 2.0 * MARGIN + 18.0 * g as f64;
        let colour = PALETTE[g % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<line x1="{MARGIN}" y1="{y}" x2="{}" y2="{y}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{label}</text>"#,
            MARGIN + 24.0,
            MARGIN + 30.0,
            y + 4.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(Plot {
        svg,
        curves: order.len(),
    })
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}
