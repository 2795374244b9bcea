//! Minimal self-contained SVG charts for eyeballing the CSV outputs.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 70.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axis_value(v: f64, log: bool) -> Option<f64> {
    let t = if log { v.log10() } else { v };
    t.is_finite().then_some(t)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= 0.0 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn tick_label(t: f64, log: bool) -> String {
    if log {
        format!("1e{}", t.round() as i64)
    } else {
        format!("{t:.3}")
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn axes(svg: &mut String, x_label: &str, y_label: &str, (x0, x1): (f64, f64), (y0, y1): (f64, f64), log_x: bool, log_y: bool) {
    let (left, right, top, bottom) = (MARGIN, WIDTH - 20.0, 40.0, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        "<path d=\"M{left},{top} V{bottom} H{right}\" fill=\"none\" stroke=\"black\"/>"
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let x = left + f * (right - left);
        let y = bottom - f * (bottom - top);
        let _ = writeln!(
            svg,
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            bottom + 16.0,
            tick_label(x0 + f * (x1 - x0), log_x)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            left - 6.0,
            y + 4.0,
            tick_label(y0 + f * (y1 - y0), log_y)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        (left + right) / 2.0,
        HEIGHT - 24.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(y_label)
    );
}

impl LinePlot {
    pub fn render(&self) -> String {
        let xs = self.series.iter().flat_map(|s| s.points.iter().filter_map(|p| axis_value(p.0, self.log_x)));
        let ys = self.series.iter().flat_map(|s| s.points.iter().filter_map(|p| axis_value(p.1, self.log_y)));
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        let (left, right, top, bottom) = (MARGIN, WIDTH - 20.0, 40.0, HEIGHT - MARGIN);

        let mut svg = header(&self.title);
        axes(&mut svg, &self.x_label, &self.y_label, (x0, x1), (y0, y1), self.log_x, self.log_y);
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .filter_map(|&(x, y)| Some((axis_value(x, self.log_x)?, axis_value(y, self.log_y)?)))
                .map(|(x, y)| {
                    let px = left + (x - x0) / (x1 - x0) * (right - left);
                    let py = bottom - (y - y0) / (y1 - y0) * (bottom - top);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            if !path.is_empty() {
                let _ = writeln!(
                    svg,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                    path.join(" ")
                );
            }
            let _ = writeln!(
                svg,
                "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>",
                right - 140.0,
                top + 14.0 * (i as f64 + 1.0),
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Grey-to-blue heat map with `values[row][col]`, rows drawn bottom to top.
pub fn heatmap(title: &str, x_label: &str, y_label: &str, x_values: &[f64], y_values: &[f64], values: &[Vec<f64>], log_y: bool) -> String {
    let (left, right, top, bottom) = (MARGIN, WIDTH - 20.0, 40.0, HEIGHT - MARGIN);
    let finite = values.iter().flatten().copied().filter(|v| v.is_finite());
    let (v0, v1) = bounds(finite);
    let cols = x_values.len().max(1) as f64;
    let rows = y_values.len().max(1) as f64;
    let (cw, ch) = ((right - left) / cols, (bottom - top) / rows);

    let mut svg = header(title);
    for (r, row) in values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let fill = if v.is_finite() {
                let f = ((v - v0) / (v1 - v0)).clamp(0.0, 1.0);
                let g = (235.0 - 200.0 * f) as u8;
                format!("rgb({g},{g},{})", (235.0 - 40.0 * f) as u8)
            } else {
                "white".to_string()
            };
            let _ = writeln!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
                left + c as f64 * cw,
                bottom - (r as f64 + 1.0) * ch,
                cw + 0.2,
                ch + 0.2
            );
        }
    }
    let xb = bounds(x_values.iter().copied());
    let yb = bounds(y_values.iter().filter_map(|&v| axis_value(v, log_y)));
    axes(&mut svg, x_label, y_label, xb, yb, false, log_y);
    svg.push_str("</svg>\n");
    svg
}
