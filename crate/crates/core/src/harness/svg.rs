//! Minimal self-contained SVG plots: no scripts, fonts or external assets.

use std::fmt::Write;

use super::report::ExperimentReport;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ =
        writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, escape(title));
}

/// Maps data to the plot box, optionally on a log scale.
struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    from: f64,
    to: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, log: bool, from: f64, to: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-300 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, log, from, to }
    }

    fn map(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let v = if self.log { v.log10() } else { v };
        Some(self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|k| {
                let u = self.lo + (self.hi - self.lo) * k as f64 / 4.0;
                let v = if self.log { 10f64.powf(u) } else { u };
                (self.from + (self.to - self.from) * k as f64 / 4.0, format!("{v:.3}"))
            })
            .collect()
    }
}

fn axes_frame(out: &mut String, xs: &Scale, ys: &Scale, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for (px, label) in xs.ticks() {
        let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="black"/>"#, y0 + 4.0);
        let _ = writeln!(out, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{label}</text>"#, y0 + 16.0);
    }
    for (py, label) in ys.ticks() {
        let _ = writeln!(out, r#"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 6.0, py + 4.0);
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

/// One polyline per series and per combination of the leading axes, against
/// the last axis.
pub fn line_plot(report: &ExperimentReport, series: &[String], log_x: bool, log_y: bool) -> String {
    let mut out = String::new();
    header(&mut out, &report.name);
    let Some(x_axis) = report.axes.last() else {
        out.push_str("</svg>\n");
        return out;
    };
    let nx = x_axis.values.len();
    let groups = if nx == 0 { 0 } else { report.cells() / nx };
    let chosen: Vec<_> = series.iter().filter_map(|n| report.series(n)).collect();
    let xs = Scale::new(x_axis.values.iter().copied(), log_x, LEFT, W - RIGHT);
    let ys = Scale::new(chosen.iter().flat_map(|s| s.values.iter().flatten().copied()), log_y, H - BOTTOM, TOP);
    let ylabel = if chosen.len() == 1 { chosen[0].name.as_str() } else { "value" };
    axes_frame(&mut out, &xs, &ys, &x_axis.name, ylabel);
    let mut line = 0;
    for s in &chosen {
        for g in 0..groups {
            let color = PALETTE[line % PALETTE.len()];
            let mut label = s.name.clone();
            if report.axes.len() > 1 {
                let idx = report.unravel(g * nx);
                for (a, &i) in report.axes.iter().zip(&idx).take(report.axes.len() - 1) {
                    let _ = write!(label, " {}={}", a.name, a.values[i]);
                }
            }
            // break the line at failed or unplottable cells
            let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
            for k in 0..nx {
                let p = s.values[g * nx + k].and_then(|v| Some((xs.map(x_axis.values[k])?, ys.map(v)?)));
                match p {
                    Some(p) => segments.last_mut().unwrap().push(p),
                    None if !segments.last().unwrap().is_empty() => segments.push(Vec::new()),
                    None => {}
                }
            }
            for seg in segments.iter().filter(|s| !s.is_empty()) {
                let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    out,
                    r#"<polyline class="line" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            let ly = TOP + 14.0 * line as f64 + 6.0;
            if ly < H - BOTTOM {
                let lx = W - RIGHT + 10.0;
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                    lx + 16.0
                );
                let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 20.0, ly + 4.0, escape(&label));
            }
            line += 1;
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Perceptually ordered blue-to-yellow ramp.
fn color(u: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];
    let u = u.clamp(0.0, 1.0) * 4.0;
    let i = (u.floor() as usize).min(3);
    let f = u - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Heatmap of one series over a two-axis grid: first axis vertical, second
/// horizontal. Failed cells are drawn grey.
pub fn heatmap(report: &ExperimentReport, series: &str, log_color: bool) -> String {
    let mut out = String::new();
    header(&mut out, &format!("{} / {series}", report.name));
    let (Some(s), [ya, xa]) = (report.series(series), report.axes.as_slice()) else {
        out.push_str("</svg>\n");
        return out;
    };
    let (nx, ny) = (xa.values.len(), ya.values.len());
    let cs = Scale::new(s.values.iter().flatten().copied(), log_color, 0.0, 1.0);
    let (pw, ph) = ((W - LEFT - RIGHT) / nx as f64, (H - TOP - BOTTOM) / ny as f64);
    for r in 0..ny {
        for c in 0..nx {
            let v = s.values[r * nx + c];
            let fill = v.and_then(|v| cs.map(v)).map(color).unwrap_or_else(|| "#bbbbbb".into());
            let title = v.map(|v| format!("{v}")).unwrap_or_else(|| "failed".into());
            let _ = writeln!(
                out,
                r#"<rect class="cell" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"><title>{title}</title></rect>"#,
                LEFT + c as f64 * pw,
                H - BOTTOM - (r + 1) as f64 * ph,
                pw,
                ph
            );
        }
    }
    let label =
        |v: f64| if v.abs() >= 1e3 || (v != 0.0 && v.abs() < 1e-2) { format!("{v:.2e}") } else { format!("{v:.3}") };
    for (c, v) in xa.values.iter().enumerate().step_by(nx.div_ceil(6).max(1)) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + (c as f64 + 0.5) * pw,
            H - BOTTOM + 16.0,
            label(*v)
        );
    }
    for (r, v) in ya.values.iter().enumerate().step_by(ny.div_ceil(6).max(1)) {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            H - BOTTOM - (r as f64 + 0.5) * ph + 4.0,
            label(*v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 12.0,
        escape(&xa.name)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        escape(&ya.name)
    );
    // colour bar
    let bx = W - RIGHT + 20.0;
    let steps = 32;
    let bh = (H - TOP - BOTTOM) / steps as f64;
    for k in 0..steps {
        let u = (k as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{bx}" y="{:.2}" width="14" height="{:.2}" fill="{}"/>"#,
            H - BOTTOM - (k + 1) as f64 * bh,
            bh + 0.5,
            color(u)
        );
    }
    let unscale = |u: f64| {
        let v = cs.lo + (cs.hi - cs.lo) * u;
        if log_color {
            10f64.powf(v)
        } else {
            v
        }
    };
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, bx + 18.0, H - BOTTOM, label(unscale(0.0)));
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, bx + 18.0, TOP + 8.0, label(unscale(1.0)));
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, bx, TOP - 6.0, escape(series));
    out.push_str("</svg>\n");
    out
}
