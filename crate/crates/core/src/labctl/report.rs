//! Report rendering: plot-data CSVs, SVG line charts and a markdown summary
//! written into `<run>/report/`. Everything rendered is a pure function of
//! the run's data files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{sha256_hex, RunManifest};
use crate::error::{LabError, Result};

pub const REPORT_DIR: &str = "report";

pub type Series = (String, Vec<(f64, f64)>);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportSummary {
    pub dir: PathBuf,
    pub charts: Vec<String>,
    pub files: Vec<ReportFile>,
}

struct Chart {
    name: &'static str,
    title: String,
    x_label: &'static str,
    y_label: &'static str,
    series: Vec<Series>,
}

fn bad(msg: String) -> LabError {
    LabError::Report(msg)
}

/// Rows of a CSV as string fields, keyed by the header.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(name: &str, text: &str) -> Result<Table> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| bad(format!("{name} is empty")))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows: Vec<Vec<String>> = lines
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(str::to_string).collect::<Vec<_>>())
            .collect();
        if rows.iter().any(|r| r.len() != header.len()) {
            return Err(bad(format!("{name} has ragged rows")));
        }
        Ok(Table { header, rows })
    }

    fn col(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing column {name}")))
    }

    fn num(&self, row: &[String], col: usize) -> Result<f64> {
        row[col].parse().map_err(|_| bad(format!("not a number: {}", row[col])))
    }
}

fn eeoe_chart(t: &Table) -> Result<Chart> {
    let (n, mean) = (t.col("N")?, t.col("mean")?);
    let pts = t
        .rows
        .iter()
        .map(|r| Ok((t.num(r, n)?, t.num(r, mean)?)))
        .collect::<Result<_>>()?;
    Ok(Chart {
        name: "eeoe",
        title: "mean EAC vs network size".into(),
        x_label: "N",
        y_label: "mean EAC (bits)",
        series: vec![("mean EAC".into(), pts)],
    })
}

fn growth_chart(t: &Table) -> Result<Chart> {
    let (trial, x, k) = (t.col("trial")?, t.col("t")?, t.col("k")?);
    let mut series: Vec<Series> = Vec::new();
    for r in &t.rows {
        let name = format!("trial {}", r[trial]);
        let p = (t.num(r, x)?, t.num(r, k)?);
        match series.iter_mut().find(|s| s.0 == name) {
            Some(s) => s.1.push(p),
            None => series.push((name, vec![p])),
        }
    }
    Ok(Chart {
        name: "growth",
        title: "lineage complexity vs mutation step".into(),
        x_label: "mutation step t",
        y_label: "K estimate (bits)",
        series,
    })
}

fn trend_chart(t: &Table) -> Result<Chart> {
    let (obs, tp, outcome) = (t.col("observer")?, t.col("t_prime")?, t.col("outcome")?);
    let mut series: Vec<Series> = Vec::new();
    for r in &t.rows {
        let y = if r[outcome] == "emergent" { 1.0 } else { 0.0 };
        let p = (t.num(r, tp)?, y);
        match series.iter_mut().find(|s| s.0 == r[obs]) {
            Some(s) => s.1.push(p),
            None => series.push((r[obs].clone(), vec![p])),
        }
    }
    Ok(Chart {
        name: "trend",
        title: "emergent (1) or not (0) per horizon".into(),
        x_label: "horizon t'",
        y_label: "emergent",
        series,
    })
}

fn profile_chart(t: &Table) -> Result<Chart> {
    let (trial, d) = (t.col("trial")?, t.col("delta_bits")?);
    let pts = t
        .rows
        .iter()
        .map(|r| Ok((t.num(r, trial)?, t.num(r, d)?)))
        .collect::<Result<_>>()?;
    Ok(Chart {
        name: "profile",
        title: "complexity change per single-edge deletion".into(),
        x_label: "trial",
        y_label: "delta K (bits)",
        series: vec![("delta".into(), pts)],
    })
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// A self-contained SVG line chart; the same series always render to the
/// same bytes.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (640.0, 400.0);
    let (l, r, t, b) = (70.0, 150.0, 40.0, 50.0);
    let pts = series.iter().flat_map(|s| s.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| l + (x - x0) / (x1 - x0) * (w - l - r);
    let py = |y: f64| h - b - (y - y0) / (y1 - y0) * (h - t - b);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (w - r + l) / 2.0,
        esc(title)
    )
    .unwrap();
    let (ax0, ax1, ay0, ay1) = (l, w - r, h - b, t);
    writeln!(
        s,
        r#"<line x1="{ax0}" y1="{ay0}" x2="{ax1}" y2="{ay0}" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{ax0}" y1="{ay0}" x2="{ax0}" y2="{ay1}" stroke="black"/>"#
    )
    .unwrap();
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (xp, yp) = (px(xv), py(yv));
        writeln!(
            s,
            r#"<line x1="{xp:.1}" y1="{ay0}" x2="{xp:.1}" y2="{:.1}" stroke="black"/>"#,
            ay0 + 4.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{xp:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            ay0 + 18.0,
            fmt_num(xv)
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{:.1}" y1="{yp:.1}" x2="{ax0}" y2="{yp:.1}" stroke="black"/>"#,
            ax0 - 4.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            ax0 - 8.0,
            yp + 4.0,
            fmt_num(yv)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (ax0 + ax1) / 2.0,
        h - 12.0,
        esc(x_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0,
        esc(y_label)
    )
    .unwrap();
    for (i, (name, pts)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        )
        .unwrap();
        for &(x, y) in pts {
            writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{colour}"/>"#,
                px(x),
                py(y)
            )
            .unwrap();
        }
        let ly = t + 14.0 + 18.0 * i as f64;
        writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/>"#,
            w - r + 12.0,
            w - r + 32.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            w - r + 38.0,
            ly + 4.0,
            esc(name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn plot_csv(series: &[Series]) -> String {
    let mut s = String::from("series,x,y\n");
    for (name, pts) in series {
        for (x, y) in pts {
            writeln!(s, "{name},{x},{y}").unwrap();
        }
    }
    s
}

/// Renders a run directory. The manifest must be present, parse, and match
/// every listed output's hash.
pub fn report(run_dir: &Path) -> Result<ReportSummary> {
    if !run_dir.join(super::MANIFEST_FILE).is_file() {
        return Err(bad(format!("{} holds no run manifest", run_dir.display())));
    }
    let manifest = RunManifest::load(run_dir)?;
    let mut data = Vec::new();
    for o in &manifest.outputs {
        let bytes = std::fs::read(run_dir.join(&o.path)).map_err(|e| bad(format!("{}: {e}", o.path)))?;
        if sha256_hex(&bytes) != o.sha256 {
            return Err(bad(format!("{} does not match its manifest hash", o.path)));
        }
        data.push((o.path.clone(), String::from_utf8_lossy(&bytes).into_owned()));
    }
    let mut charts = Vec::new();
    for (path, text) in &data {
        let build: Option<fn(&Table) -> Result<Chart>> = match path.as_str() {
            "aggregate.csv" => Some(eeoe_chart),
            "growth.csv" => Some(growth_chart),
            "trend.csv" => Some(trend_chart),
            "profile.csv" => Some(profile_chart),
            _ => None,
        };
        if let Some(f) = build {
            charts.push(f(&Table::parse(path, text)?)?);
        }
    }

    let out = run_dir.join(REPORT_DIR);
    std::fs::create_dir_all(&out)?;
    let mut files = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        std::fs::write(out.join(&name), &body)?;
        files.push(ReportFile {
            path: name,
            sha256: sha256_hex(body.as_bytes()),
        });
        Ok(())
    };
    let mut md = String::new();
    writeln!(md, "# Run report: {}\n", manifest.config.kind.name()).unwrap();
    writeln!(md, "- config hash: `{}`", manifest.config_hash).unwrap();
    writeln!(md, "- artifact version: {}", manifest.artifact_version).unwrap();
    writeln!(md, "- master seed: {}", manifest.config.seed).unwrap();
    writeln!(md, "- trial seeds recorded: {}\n", manifest.trial_seeds.len()).unwrap();
    writeln!(md, "## Outputs\n\n| file | bytes | sha256 |\n|---|---|---|").unwrap();
    for o in &manifest.outputs {
        writeln!(md, "| {} | {} | `{}` |", o.path, o.bytes, o.sha256).unwrap();
    }
    if !charts.is_empty() {
        writeln!(md, "\n## Charts\n").unwrap();
    }
    for c in &charts {
        put(format!("{}.csv", c.name), plot_csv(&c.series))?;
        put(
            format!("{}.svg", c.name),
            line_chart_svg(&c.title, c.x_label, c.y_label, &c.series),
        )?;
        writeln!(md, "- {}: `{}.svg` (data `{}.csv`)", c.title, c.name, c.name).unwrap();
    }
    put("report.md".into(), md)?;
    Ok(ReportSummary {
        dir: out,
        charts: charts.iter().map(|c| c.name.to_string()).collect(),
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_deterministic_and_well_formed() {
        let s: Vec<Series> = vec![("a".into(), vec![(8.0, 1.0), (16.0, 3.5), (32.0, 2.0)])];
        let a = line_chart_svg("t", "x", "y", &s);
        assert_eq!(a, line_chart_svg("t", "x", "y", &s));
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<polyline").count(), 1);
        assert_eq!(a.matches("<circle").count(), 3);
    }

    #[test]
    fn degenerate_series_render() {
        let s: Vec<Series> = vec![("flat".into(), vec![(1.0, 2.0)])];
        assert!(!line_chart_svg("t", "x", "y", &s).contains("NaN"));
        assert!(!line_chart_svg("t", "x", "y", &[]).contains("NaN"));
    }

    #[test]
    fn tables_reject_ragged_rows() {
        assert!(Table::parse("x", "a,b\n1,2\n3\n").is_err());
        let t = Table::parse("x", "a,b\n1,2\n").unwrap();
        assert_eq!(t.col("b").unwrap(), 1);
        assert!(t.col("c").is_err());
    }
}
