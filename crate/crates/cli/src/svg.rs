//! Hand-written SVG for the two diagnostic figures. Coordinates are
//! printed with two decimals so output is byte-stable.

use std::fmt::Write;

use egl_core::growth::Trajectory;
use egl_core::surplus::Figure1Report;

use crate::number::general;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    general(v, 4)
}

/// Named polyline.
type Series = (String, Vec<(f64, f64)>);

/// "Nice" tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !span.is_finite() || span <= 0.0 {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// One set of axes inside the document.
struct Panel {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Panel {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        let y = y.clamp(self.y.0, self.y.1);
        self.top + self.height - (y - self.y.0) / (self.y.1 - self.y.0) * self.height
    }

    fn points(&self, pts: &[(f64, f64)]) -> String {
        let mut s = String::new();
        for (i, (x, y)) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.2},{:.2}", self.px(*x), self.py(*y));
        }
        s
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            self.left, self.top, self.width, self.height
        );
        let bottom = self.top + self.height;
        for t in ticks(self.x.0, self.x.1, 6) {
            let x = self.px(t);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                bottom + 4.0,
                bottom + 16.0,
                tick_label(t)
            );
        }
        for t in ticks(self.y.0, self.y.1, 5) {
            let y = self.py(t);
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                self.left - 4.0,
                self.left,
                self.left - 6.0,
                y + 4.0,
                tick_label(t)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            self.left + self.width / 2.0,
            bottom + 32.0,
            esc(xlabel)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            self.left - 44.0,
            self.top + self.height / 2.0,
            self.left - 44.0,
            self.top + self.height / 2.0,
            esc(ylabel)
        );
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], color: &str, extra: &str) {
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{extra}/>"#,
            self.points(pts)
        );
    }
}

fn open(width: f64, height: f64, title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        esc(title)
    );
    out
}

/// Energy content ceiling, MEEC, optimum markers and the surplus area.
pub fn figure1(report: &Figure1Report) -> String {
    let q_max = report.meec.last().map(|p| p.0).unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let gamma_max = report
        .meec
        .iter()
        .map(|p| p.1)
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let y_max = 1.15 * report.energy_content.max(gamma_max.min(3.0 * report.energy_content));
    let panel = Panel {
        left: 70.0,
        top: 40.0,
        width: 560.0,
        height: 360.0,
        x: (0.0, q_max),
        y: (0.0, y_max),
    };
    let mut out = open(
        700.0,
        480.0,
        &format!("{}: energy content and marginal embodied energy", report.good_id),
    );

    if let Some(m) = &report.markers {
        // area between the content line and the MEEC up to Q*: the surplus
        let mut area: Vec<(f64, f64)> = vec![(0.0, report.energy_content), (m.output, report.energy_content)];
        area.extend(report.meec.iter().rev().filter(|p| p.0 <= m.output).cloned());
        area.push((m.output, m.marginal_embodied));
        area.push((0.0, report.meec.first().map(|p| p.1).unwrap_or(0.0)));
        let _ = writeln!(
            out,
            r##"<polygon points="{}" fill="#ffd966" fill-opacity="0.6" stroke="none"/>"##,
            panel.points(&area)
        );
    }
    panel.axes(&mut out, "output Q", "energy per unit");
    panel.polyline(&mut out, &report.ceiling, PALETTE[0], "");
    panel.polyline(&mut out, &report.meec, PALETTE[1], "");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">δ = {}</text>"#,
        panel.left + 6.0,
        panel.py(report.energy_content) - 6.0,
        tick_label(report.energy_content)
    );

    if let Some(m) = &report.markers {
        let x = panel.px(m.output);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#666" stroke-dasharray="4,3"/>"##,
            panel.py(0.0),
            panel.py(m.marginal_embodied)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{}" stroke-width="4"/>"#,
            panel.py(m.marginal_embodied),
            panel.py(report.energy_content),
            PALETTE[2]
        );
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{:.2}" r="4" fill="{}"/>"#,
            panel.py(m.marginal_embodied),
            PALETTE[1]
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">α = {}</text>"#,
            x + 8.0,
            (panel.py(m.marginal_embodied) + panel.py(report.energy_content)) / 2.0,
            tick_label(m.marginal_surplus)
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">Q* = {}</text>"#,
            panel.py(0.0) - 6.0,
            tick_label(m.output)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">γ(Q*) = {}</text>"#,
            x + 8.0,
            panel.py(m.marginal_embodied) + 14.0,
            tick_label(m.marginal_embodied)
        );
    }

    let legend_y = 460.0;
    let surplus = report.markers.map(|m| tick_label(m.surplus)).unwrap_or_else(|| "0".into());
    let _ = writeln!(
        out,
        r#"<text x="70" y="{legend_y}"><tspan fill="{}">ceiling</tspan>  <tspan fill="{}">MEEC γ(Q)</tspan>  <tspan fill="{}">α wedge</tspan>  surplus E = {surplus}</text>"#,
        PALETTE[0], PALETTE[1], PALETTE[2]
    );
    out.push_str("</svg>\n");
    out
}

/// Output, marginal surplus and mover stocks over time, with the steady
/// state marked when it was reached.
pub fn figure2(traj: &Trajectory) -> String {
    let t_max = traj.records.last().map(|r| r.period as f64).unwrap_or(0.0).max(1.0);
    let height = 3.0 * 200.0 + 80.0;
    let mut out = open(760.0, height, "prime-mover accumulation and energy output");

    let series: [(&str, Vec<Series>); 3] = [
        (
            "output Q",
            traj.good_ids
                .iter()
                .enumerate()
                .map(|(e, id)| {
                    let pts = traj
                        .records
                        .iter()
                        .filter_map(|r| r.goods[e].output.map(|q| (r.period as f64, q)))
                        .collect();
                    (id.clone(), pts)
                })
                .collect(),
        ),
        (
            "marginal surplus α",
            traj.good_ids
                .iter()
                .enumerate()
                .map(|(e, id)| {
                    let pts = traj
                        .records
                        .iter()
                        .filter_map(|r| r.goods[e].marginal_surplus.map(|a| (r.period as f64, a)))
                        .collect();
                    (id.clone(), pts)
                })
                .collect(),
        ),
        (
            "stock x",
            traj.mover_ids
                .iter()
                .enumerate()
                .map(|(l, id)| {
                    let pts = traj.records.iter().map(|r| (r.period as f64, r.stocks[l])).collect();
                    (id.clone(), pts)
                })
                .collect(),
        ),
    ];

    for (k, (label, lines)) in series.iter().enumerate() {
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for (_, pts) in lines {
            for (_, v) in pts {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
        if hi <= lo {
            hi = lo + 1.0;
        }
        let panel = Panel {
            left: 80.0,
            top: 40.0 + k as f64 * 200.0,
            width: 560.0,
            height: 150.0,
            x: (0.0, t_max),
            y: (lo, hi + 0.05 * (hi - lo)),
        };
        panel.axes(&mut out, if k == 2 { "period t" } else { "" }, label);
        for (i, (id, pts)) in lines.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            panel.polyline(&mut out, pts, color, "");
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
                panel.left + panel.width + 8.0,
                panel.top + 14.0 * (i as f64 + 1.0),
                esc(id)
            );
        }
        if let Some(ss) = &traj.steady_state {
            let x = panel.px(ss.period as f64);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000" stroke-dasharray="5,4"/>"##,
                panel.top,
                panel.top + panel.height
            );
            if k == 0 {
                let _ = writeln!(
                    out,
                    r#"<text x="{:.2}" y="{:.2}">ζ (t = {})</text>"#,
                    x + 4.0,
                    panel.top + 12.0,
                    ss.period
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
