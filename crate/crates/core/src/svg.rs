//! Static SVG figures: scree plot, per-shape load densities and
//! predicted-versus-simulated scatter grids.

use std::fmt::Write;

use crate::analysis::{LoadDistribution, PcaResult};
use crate::geometry::ShapeKind;
use crate::surrogate::FitReport;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn open(out: &mut String, w: f64, h: f64, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <title>{}</title>\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
        escape(title)
    );
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, s: &str) {
    let _ = writeln!(
        out,
        "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\">{}</text>",
        escape(s)
    );
}

/// Maps data coordinates into a plot rectangle.
struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xlim: (f64, f64),
    ylim: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xlim.0) / (self.xlim.1 - self.xlim.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.ylim.0) / (self.ylim.1 - self.ylim.0) * self.h
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            out,
            "<rect class=\"frame\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333\"/>",
            self.x0, self.y0, self.w, self.h
        );
        for (v, anchor, x, y) in [
            (self.xlim.0, "start", self.x0, self.y0 + self.h + 14.0),
            (
                self.xlim.1,
                "end",
                self.x0 + self.w,
                self.y0 + self.h + 14.0,
            ),
        ] {
            text(out, x, y, anchor, &format!("{v:.4}"));
        }
        for (v, y) in [
            (self.ylim.0, self.y0 + self.h),
            (self.ylim.1, self.y0 + 10.0),
        ] {
            text(out, self.x0 - 4.0, y, "end", &format!("{v:.4}"));
        }
        text(
            out,
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 30.0,
            "middle",
            xlabel,
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 {:.2} {:.2})\">{}</text>",
            self.x0 - 40.0,
            self.y0 + self.h / 2.0,
            self.x0 - 40.0,
            self.y0 + self.h / 2.0,
            escape(ylabel)
        );
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.03 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn shape_colour(k: ShapeKind) -> &'static str {
    match k {
        ShapeKind::Square => "#1f77b4",
        ShapeKind::TShape => "#d62728",
        ShapeKind::UShape => "#2ca02c",
        ShapeKind::LShape => "#9467bd",
    }
}

/// Explained-variance bars, one per component, with the cumulative curve.
pub fn scree_plot(pca: &PcaResult) -> String {
    let mut out = String::new();
    open(&mut out, W, H, "Explained variance per principal component");
    let p = pca.explained_ratio.len();
    let f = Frame {
        x0: MARGIN,
        y0: 24.0,
        w: W - 1.5 * MARGIN,
        h: H - 24.0 - MARGIN,
        xlim: (0.0, p as f64),
        ylim: (0.0, 1.0),
    };
    f.axes(&mut out, "Principal component", "Explained variance ratio");
    for (i, r) in pca.explained_ratio.iter().enumerate() {
        let (x, y) = (f.px(i as f64 + 0.15), f.py(r.max(0.0)));
        let _ = writeln!(
            out,
            "<rect class=\"bar\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#4c72b0\"/>",
            f.px(0.7) - f.px(0.0),
            f.py(0.0) - y
        );
        text(
            &mut out,
            f.px(i as f64 + 0.5),
            f.py(0.0) + 14.0,
            "middle",
            &format!("PC{}", i + 1),
        );
    }
    let pts: Vec<String> = pca
        .cumulative_ratio
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{:.2},{:.2}", f.px(i as f64 + 0.5), f.py(*c)))
        .collect();
    let _ = writeln!(
        out,
        "<polyline class=\"cumulative\" points=\"{}\" fill=\"none\" stroke=\"#dd8452\" stroke-width=\"2\"/>",
        pts.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

/// Kernel density of load per outline on the shared grid.
pub fn density_plot(dist: &LoadDistribution) -> String {
    let mut out = String::new();
    open(&mut out, W, H, "Thermal load density by building outline");
    let ymax = dist
        .shapes
        .iter()
        .flat_map(|s| s.kde.iter().chain(&s.histogram))
        .fold(0.0, |a: f64, &b| a.max(b));
    let f = Frame {
        x0: MARGIN + 10.0,
        y0: 24.0,
        w: W - 1.5 * MARGIN - 30.0,
        h: H - 24.0 - MARGIN,
        xlim: (dist.grid[0], dist.grid[dist.grid.len() - 1]),
        ylim: (0.0, if ymax > 0.0 { 1.05 * ymax } else { 1.0 }),
    };
    f.axes(&mut out, "Thermal load (kWh/m² yr)", "Density");
    for (k, s) in dist.shapes.iter().enumerate() {
        let colour = shape_colour(s.shape);
        let pts: Vec<String> = dist
            .grid
            .iter()
            .zip(&s.kde)
            .map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline class=\"kde\" data-shape=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"/>",
            s.shape.token(),
            pts.join(" ")
        );
        let ly = f.y0 + 16.0 + 16.0 * k as f64;
        let lx = f.x0 + f.w - 70.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{colour}\" stroke-width=\"2\"/>",
            ly - 4.0,
            lx + 18.0,
            ly - 4.0
        );
        text(&mut out, lx + 24.0, ly, "start", &s.shape.to_string());
    }
    out.push_str("</svg>\n");
    out
}

/// One panel per report, predicted against simulated load on the test rows,
/// with the identity line.
pub fn scatter_grid(title: &str, reports: &[&FitReport]) -> String {
    let cols = reports.len().clamp(1, 2);
    let rows = reports.len().div_ceil(cols).max(1);
    let (pw, ph) = (360.0, 320.0);
    let mut out = String::new();
    open(&mut out, pw * cols as f64, ph * rows as f64 + 24.0, title);
    text(&mut out, pw * cols as f64 / 2.0, 16.0, "middle", title);
    for (i, r) in reports.iter().enumerate() {
        let (c, rr) = ((i % cols) as f64, (i / cols) as f64);
        let lo = r
            .pairs
            .iter()
            .flat_map(|p| *p)
            .fold(f64::INFINITY, f64::min);
        let hi = r
            .pairs
            .iter()
            .flat_map(|p| *p)
            .fold(f64::NEG_INFINITY, f64::max);
        let lim = if lo.is_finite() {
            padded(lo, hi)
        } else {
            (0.0, 1.0)
        };
        let f = Frame {
            x0: c * pw + MARGIN + 10.0,
            y0: 24.0 + rr * ph + 24.0,
            w: pw - MARGIN - 30.0,
            h: ph - 24.0 - MARGIN - 10.0,
            xlim: lim,
            ylim: lim,
        };
        let _ = writeln!(out, "<g class=\"panel\" data-degree=\"{}\">", r.degree);
        text(
            &mut out,
            f.x0 + f.w / 2.0,
            f.y0 - 8.0,
            "middle",
            &format!("degree {}  R² = {:.4}", r.degree, r.r2_test),
        );
        f.axes(&mut out, "Simulated", "Predicted");
        let _ = writeln!(
            out,
            "<line class=\"identity\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>",
            f.px(lim.0),
            f.py(lim.0),
            f.px(lim.1),
            f.py(lim.1)
        );
        for [pred, sim] in &r.pairs {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.6\" fill=\"#4c72b0\" fill-opacity=\"0.5\"/>",
                f.px(*sim),
                f.py(pred.clamp(lim.0, lim.1))
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
