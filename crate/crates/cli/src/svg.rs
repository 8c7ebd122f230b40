//! Normalized concentration-versus-time plots, one panel per probe.

use std::fmt::Write as _;

use fluidic::trace::Trace;

const WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 40.0;
/// Points per polyline; longer series are decimated.
const MAX_POINTS: usize = 2000;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Each series is divided by its own maximum, so every curve spans [0, 1].
pub fn render(trace: &Trace) -> String {
    let mut probes: Vec<&str> = Vec::new();
    for s in &trace.series {
        if !probes.contains(&s.probe.as_str()) {
            probes.push(&s.probe);
        }
    }
    let height = PANEL_HEIGHT * probes.len().max(1) as f64;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    let t_max = trace.duration().max(f64::MIN_POSITIVE);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let stride = trace.len().div_ceil(MAX_POINTS).max(1);

    for (p, probe) in probes.iter().enumerate() {
        let top = p as f64 * PANEL_HEIGHT + MARGIN_TOP;
        let bottom = top + plot_h;
        writeln!(out, r#"<g>"#).unwrap();
        writeln!(
            out,
            r#"<text x="{MARGIN_LEFT}" y="{}" font-weight="bold">probe {}</text>"#,
            top - 10.0,
            escape(probe)
        )
        .unwrap();
        writeln!(
            out,
            r##"<rect x="{MARGIN_LEFT}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
        )
        .unwrap();
        for tick in 0..=4 {
            let frac = tick as f64 / 4.0;
            let y = bottom - frac * plot_h;
            writeln!(
                out,
                r##"<line x1="{MARGIN_LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{frac:.2}</text>"##,
                MARGIN_LEFT + plot_w,
                MARGIN_LEFT - 6.0,
                y + 4.0
            )
            .unwrap();
            let t = frac * t_max;
            let x = MARGIN_LEFT + frac * plot_w;
            writeln!(
                out,
                r#"<text x="{x}" y="{}" text-anchor="middle">{t:.2}</text>"#,
                bottom + 16.0
            )
            .unwrap();
        }
        writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">t [s]</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            bottom + 32.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">normalized concentration</text>"#,
            top + plot_h / 2.0,
            top + plot_h / 2.0
        )
        .unwrap();

        for (k, s) in trace.series.iter().filter(|s| s.probe == *probe).enumerate() {
            let color = COLORS[k % COLORS.len()];
            let max = s.values.iter().copied().fold(0.0, f64::max);
            let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
            let mut points = String::new();
            for i in (0..trace.len()).step_by(stride) {
                let x = MARGIN_LEFT + trace.times[i] / t_max * plot_w;
                let y = bottom - (s.values[i] * scale).clamp(0.0, 1.0) * plot_h;
                write!(points, "{x:.1},{y:.1} ").unwrap();
            }
            writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                points.trim_end()
            )
            .unwrap();
            writeln!(
                out,
                r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{} (max {:.4} mol/m³)</text>"#,
                MARGIN_LEFT + plot_w - 6.0,
                top + 16.0 + 14.0 * k as f64,
                escape(&s.label()),
                max
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    out.push_str("</svg>\n");
    out
}
