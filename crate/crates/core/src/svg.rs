//! Minimal, deterministic SVG output: polyline plots and quiver plots.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 70.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinePlot {
    pub title: String,
    pub caption: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (WIDTH - MARGIN_RIGHT + MARGIN_LEFT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str, caption: &str) {
    let (x0, x1) = (frame.px(frame.x.0), frame.px(frame.x.1));
    let (y0, y1) = (frame.py(frame.y.0), frame.py(frame.y.1));
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for k in 0..=4 {
        let fx = frame.x.0 + (frame.x.1 - frame.x.0) * k as f64 / 4.0;
        let fy = frame.y.0 + (frame.y.1 - frame.y.0) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            frame.px(fx),
            y0 + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            frame.py(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        y0 + 34.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
    if !caption.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            escape(caption)
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

impl LinePlot {
    pub fn render(&self) -> String {
        let finite = self.series.iter().flat_map(|s| &s.points).filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in finite {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        if !xmin.is_finite() {
            (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
        }
        let frame = Frame::new((xmin, xmax), (ymin.min(0.0), ymax));
        let mut out = String::new();
        header(&mut out, &self.title);
        axes(&mut out, &frame, &self.x_label, &self.y_label, &self.caption);
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let mut pts = String::new();
            for &(x, y) in s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                let _ = write!(pts, "{:.2},{:.2} ", frame.px(x), frame.py(y));
            }
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.trim_end()
            );
            let ly = MARGIN_TOP + 16.0 * k as f64 + 8.0;
            let lx = WIDTH - MARGIN_RIGHT + 12.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                lx + 20.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 26.0,
                ly + 4.0,
                escape(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// One arrow of a quiver plot: base point and unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrow {
    pub x: f64,
    pub y: f64,
    pub ux: f64,
    pub uy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuiverPlot {
    pub title: String,
    pub caption: String,
    pub bounds: ((f64, f64), (f64, f64)),
    pub arrows: Vec<Arrow>,
    /// Highlighted points (equilibria).
    pub markers: Vec<(f64, f64)>,
    /// Sample trajectories drawn as polylines.
    pub orbits: Vec<Vec<(f64, f64)>>,
}

impl QuiverPlot {
    pub fn render(&self) -> String {
        let frame = Frame::new(self.bounds.0, self.bounds.1);
        let mut out = String::new();
        header(&mut out, &self.title);
        axes(&mut out, &frame, "x_1", "x_2", &self.caption);
        let cells = (self.arrows.len() as f64).sqrt().max(1.0);
        let len = 0.4 * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / cells;
        for a in &self.arrows {
            if a.ux == 0.0 && a.uy == 0.0 {
                continue;
            }
            let (bx, by) = (frame.px(a.x), frame.py(a.y));
            // screen y grows downwards
            let (tx, ty) = (bx + len * a.ux, by - len * a.uy);
            let _ = writeln!(
                out,
                r##"<line x1="{bx:.2}" y1="{by:.2}" x2="{tx:.2}" y2="{ty:.2}" stroke="#555" stroke-width="1"/>"##
            );
            let _ = writeln!(out, r##"<circle cx="{tx:.2}" cy="{ty:.2}" r="1.5" fill="#555"/>"##);
        }
        for (k, orbit) in self.orbits.iter().enumerate() {
            let mut pts = String::new();
            for &(x, y) in orbit {
                let _ = write!(pts, "{:.2},{:.2} ", frame.px(x), frame.py(y));
            }
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
                PALETTE[k % PALETTE.len()],
                pts.trim_end()
            );
        }
        for &(x, y) in &self.markers {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="red" stroke="black"/>"#,
                frame.px(x),
                frame.py(y)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}
