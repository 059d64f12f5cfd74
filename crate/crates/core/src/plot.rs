//! Minimal deterministic SVG charts.

use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

pub struct Line<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    /// Formats an x tick value.
    pub x_tick: &'a dyn Fn(f64) -> String,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let bounds = |it: &mut dyn Iterator<Item = f64>| {
            it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            })
        };
        let (mut x0, mut x1) = bounds(&mut xs.clone());
        let (mut y0, mut y1) = bounds(&mut ys.clone());
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        Self {
            x0,
            x1,
            y0: y0 - pad,
            y1: y1 + pad,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open(out: &mut String, chart: &Chart<'_>, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(chart.title)
    );
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{left:.1},{top:.1} L{left:.1},{bottom:.1} L{right:.1},{bottom:.1}" stroke="black" fill="none"/>"#
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let xv = frame.x0 + t * (frame.x1 - frame.x0);
        let yv = frame.y0 + t * (frame.y1 - frame.y0);
        let (x, y) = (frame.px(xv), frame.py(yv));
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            bottom + 18.0,
            escape(&(chart.x_tick)(xv))
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.1}</text>"#,
            left - 6.0,
            y + 4.0
        );
        let _ = writeln!(
            out,
            r##"<line x1="{left:.1}" y1="{y:.1}" x2="{right:.1}" y2="{y:.1}" stroke="#dddddd"/>"##
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 14.0,
        escape(chart.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(chart.y_label)
    );
}

fn legend(out: &mut String, entries: &[(&str, &str, bool)]) {
    for (i, (name, color, dashed)) in entries.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + 20.0 * i as f64;
        let x = WIDTH - MARGIN_RIGHT + 12.0;
        let dash = if *dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"{dash}/>"#,
            x + 24.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            x + 30.0,
            y + 4.0,
            escape(name)
        );
    }
}

pub fn line_chart(chart: &Chart<'_>, lines: &[Line<'_>]) -> String {
    let all = lines.iter().flat_map(|l| l.points.iter());
    let frame = Frame::fit(all.clone().map(|p| p.0), all.map(|p| p.1));
    let mut out = String::new();
    open(&mut out, chart, &frame);
    for line in lines.iter().filter(|l| !l.points.is_empty()) {
        let mut d = String::new();
        for (i, (x, y)) in line.points.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.1},{:.1}",
                if i == 0 { "M" } else { " L" },
                frame.px(*x),
                frame.py(*y)
            );
        }
        let dash = if line.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<path d="{d}" stroke="{}" stroke-width="2" fill="none"{dash}/>"#,
            line.color
        );
    }
    let entries: Vec<_> = lines.iter().map(|l| (l.name, l.color, l.dashed)).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

/// Stem plot of autocorrelation coefficients with a symmetric band.
pub fn acf_chart(chart: &Chart<'_>, coefficients: &[f64], bound: f64) -> String {
    let xs = (0..coefficients.len()).map(|k| k as f64);
    let ys = coefficients
        .iter()
        .copied()
        .chain([-1.0, 1.0, bound, -bound]);
    let frame = Frame::fit(xs.chain([-0.5, coefficients.len() as f64 - 0.5]), ys);
    let mut out = String::new();
    open(&mut out, chart, &frame);
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    for b in [bound, -bound] {
        let y = frame.py(b);
        let _ = writeln!(
            out,
            r#"<line x1="{left:.1}" y1="{y:.1}" x2="{right:.1}" y2="{y:.1}" stroke="red" stroke-dasharray="6 4"/>"#
        );
    }
    let zero = frame.py(0.0);
    for (k, c) in coefficients.iter().enumerate() {
        let x = frame.px(k as f64);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{zero:.1}" x2="{x:.1}" y2="{:.1}" stroke="steelblue" stroke-width="4"/>"#,
            frame.py(*c)
        );
    }
    legend(
        &mut out,
        &[
            ("autocorrelation", "steelblue", false),
            ("95% bound", "red", true),
        ],
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_well_formed_and_stable() {
        let tick = |x: f64| format!("{x:.0}");
        let chart = Chart {
            title: "a <b>",
            x_label: "x",
            y_label: "y",
            x_tick: &tick,
        };
        let lines = [Line {
            name: "s",
            color: "black",
            dashed: false,
            points: vec![(0.0, 1.0), (1.0, 3.0)],
        }];
        let a = line_chart(&chart, &lines);
        assert_eq!(a, line_chart(&chart, &lines));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("a &lt;b&gt;"));

        let b = acf_chart(&chart, &[1.0, 0.2, -0.1], 0.196);
        assert_eq!(b.matches("stroke-width=\"4\"").count(), 3);

        // Empty input still renders a frame.
        assert!(line_chart(&chart, &[]).contains("</svg>"));
    }
}
