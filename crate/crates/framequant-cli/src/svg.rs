//! Static SVG line charts for sweep results. No rendering dependencies, and
//! all coordinates are formatted with fixed precision, so identical input
//! bytes produce identical output bytes.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use framequant::experiments::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axes {
    Linear,
    LogLog,
}

impl std::str::FromStr for Axes {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Axes::Linear),
            "loglog" => Ok(Axes::LogLog),
            other => Err(format!("unknown axes '{other}' (use linear|loglog)")),
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

/// Render a line+marker chart of the sweep rows. In log-log mode the fitted
/// slope is annotated when a fit exists (≥ 3 positive rows).
pub fn emit_svg(sweep: &SweepResult, axes: Axes) -> Result<String> {
    if sweep.rows.len() < 2 {
        bail!("svg needs at least 2 rows, got {}", sweep.rows.len());
    }
    let pts: Vec<(f64, f64)> = match axes {
        Axes::Linear => sweep.rows.clone(),
        Axes::LogLog => sweep
            .rows
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|&(x, y)| (x.log10(), y.log10()))
            .collect(),
    };
    if pts.len() < 2 {
        bail!("svg needs at least 2 positive rows in loglog mode");
    }
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    if xmax == xmin {
        xmax = xmin + 1.0;
    }
    if ymax == ymin {
        ymax = ymin + 1.0;
    }
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN_B - (y - ymin) / (ymax - ymin) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="22" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        xml_escape(&sweep.scenario)
    );
    // axes
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        MARGIN_L,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
        MARGIN_L, MARGIN_T, MARGIN_L, HEIGHT - MARGIN_B
    );
    // ticks
    for i in 0..=4 {
        let fx = xmin + (xmax - xmin) * i as f64 / 4.0;
        let px = sx(fx);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        );
        let label = tick_label(fx, axes);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{label}</text>"#,
            HEIGHT - MARGIN_B + 18.0
        );
        let fy = ymin + (ymax - ymin) * i as f64 / 4.0;
        let py = sy(fy);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="black"/>"#,
            MARGIN_L - 5.0,
            MARGIN_L
        );
        let label = tick_label(fy, axes);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{py:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{label}</text>"#,
            MARGIN_L - 8.0
        );
    }
    // axis titles
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">param</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">value</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );
    // polyline + markers
    let mut path = String::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let _ = write!(path, "{}{:.2},{:.2}", if i == 0 { "" } else { " " }, sx(x), sy(y));
    }
    let _ = writeln!(
        svg,
        r#"<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#
    );
    for &(x, y) in &pts {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.2" fill="steelblue"/>"#,
            sx(x),
            sy(y)
        );
    }
    if axes == Axes::LogLog {
        if let Some(fit) = &sweep.fit {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">slope ≈ {:.3}</text>"#,
                WIDTH - MARGIN_R - 6.0,
                MARGIN_T + 16.0,
                fit.slope
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn tick_label(v: f64, axes: Axes) -> String {
    match axes {
        Axes::Linear => format!("{v:.3e}"),
        Axes::LogLog => format!("1e{v:.2}"),
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(rows: Vec<(f64, f64)>) -> SweepResult {
        SweepResult::new("demo", None, serde_json::json!({}), rows)
    }

    #[test]
    fn renders_and_is_deterministic() {
        let s = sweep(vec![(1.0, 1.0), (2.0, 2.8), (4.0, 8.1), (8.0, 22.6)]);
        let a = emit_svg(&s, Axes::LogLog).unwrap();
        let b = emit_svg(&s, Axes::LogLog).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("slope"));
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
    }

    #[test]
    fn two_points_no_fit_annotation() {
        let s = sweep(vec![(1.0, 1.0), (2.0, 3.0)]);
        let svg = emit_svg(&s, Axes::LogLog).unwrap();
        assert!(!svg.contains("slope"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn rejects_single_row() {
        let s = sweep(vec![(1.0, 1.0)]);
        assert!(emit_svg(&s, Axes::Linear).is_err());
    }
}
