//! Static four-panel SVG: frequency, turbine power, rotor speed, pitch.

use std::fmt::Write as _;

use windfreq::engine::Timeseries;

const WIDTH: f64 = 900.0;
const PANEL_H: f64 = 200.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_TOP: f64 = 50.0;
const GAP: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

struct Panel {
    title: &'static str,
    column: fn(&Timeseries) -> &[f64],
}

const PANELS: [Panel; 4] = [
    Panel {
        title: "frequency (Hz)",
        column: |ts| &ts.f_hz,
    },
    Panel {
        title: "turbine power (pu)",
        column: |ts| &ts.p_wind_wt,
    },
    Panel {
        title: "rotor speed (pu)",
        column: |ts| &ts.omega_r,
    },
    Panel {
        title: "pitch (deg)",
        column: |ts| &ts.beta_deg,
    },
];

fn nice_step(span: f64, target_ticks: f64) -> f64 {
    let raw = span / target_ticks;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        let pad = (lo.abs() * 0.01).max(0.01);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Min/max per horizontal pixel keeps dips visible without emitting every sample.
fn thin(xs: &[f64], ys: &[f64], to_px: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < xs.len() {
        let col = to_px(xs[i]).floor();
        let start = i;
        let (mut lo, mut hi) = (start, start);
        while i < xs.len() && to_px(xs[i]).floor() == col {
            if ys[i] < ys[lo] {
                lo = i;
            }
            if ys[i] > ys[hi] {
                hi = i;
            }
            i += 1;
        }
        let mut picks = vec![start, lo, hi, i - 1];
        picks.sort_unstable();
        picks.dedup();
        out.extend(picks.into_iter().map(|k| (xs[k], ys[k])));
    }
    out
}

pub fn render(series: &[(String, Timeseries)]) -> String {
    let height = MARGIN_TOP + PANELS.len() as f64 * (PANEL_H + GAP) + 20.0;
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let (t0, t1) = series
        .iter()
        .flat_map(|(_, ts)| ts.t.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
    let (t0, t1) = if t1 > t0 { (t0, t1) } else { (t0 - 0.5, t0 + 0.5) };
    let x_px = |t: f64| MARGIN_L + (t - t0) / (t1 - t0) * plot_w;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let _ = writeln!(svg, r#"<g class="legend">"#);
    for (k, (label, _)) in series.iter().enumerate() {
        let x = MARGIN_L + 160.0 * k as f64;
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="20" x2="{}" y2="20" stroke="{color}" stroke-width="2"/><text x="{}" y="24">{}</text>"#,
            x + 24.0,
            x + 30.0,
            escape(label)
        );
    }
    let _ = writeln!(svg, "</g>");

    for (p, panel) in PANELS.iter().enumerate() {
        let top = MARGIN_TOP + p as f64 * (PANEL_H + GAP);
        let (lo, hi) = range(series.iter().flat_map(|(_, ts)| (panel.column)(ts).iter().copied()));
        let y_px = |v: f64| top + PANEL_H - (v - lo) / (hi - lo) * PANEL_H;

        let _ = writeln!(svg, r#"<g class="panel">"#);
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN_L}" y="{top}" width="{plot_w}" height="{PANEL_H}" fill="none" stroke="#333"/>"##
        );
        let _ = writeln!(svg, r#"<text x="{MARGIN_L}" y="{}" font-weight="bold">{}</text>"#, top - 6.0, panel.title);

        let step = nice_step(hi - lo, 5.0);
        let mut v = (lo / step).ceil() * step;
        while v <= hi {
            let y = y_px(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_L + plot_w,
                MARGIN_L - 6.0,
                y + 4.0,
                tick_label(v, step)
            );
            v += step;
        }
        let tstep = nice_step(t1 - t0, 10.0);
        let mut t = (t0 / tstep).ceil() * tstep;
        while t <= t1 {
            let x = x_px(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{}" stroke="#eee"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
                top + PANEL_H,
                top + PANEL_H + 14.0,
                tick_label(t, tstep)
            );
            t += tstep;
        }

        for (k, (_, ts)) in series.iter().enumerate() {
            let pts = thin(&ts.t, (panel.column)(ts), x_px);
            let mut d = String::with_capacity(pts.len() * 16);
            for (x, y) in pts {
                let _ = write!(d, "{:.2},{:.2} ", x_px(x), y_px(y));
            }
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
                PALETTE[k % PALETTE.len()],
                d.trim_end()
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">time (s)</text>"#,
        MARGIN_L + plot_w / 2.0,
        height - 6.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}
