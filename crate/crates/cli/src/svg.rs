//! Minimal static SVG plots on a fixed 800×500 canvas.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub enum Mark {
    Line,
    Dots,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(series: &[Series]) -> Self {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = (f64::INFINITY, f64::NEG_INFINITY);
        for &(px, py) in series.iter().flat_map(|s| &s.points) {
            if px.is_finite() && py.is_finite() {
                x = (x.0.min(px), x.1.max(px));
                y = (y.0.min(py), y.1.max(py));
            }
        }
        Self {
            x: widen(x),
            y: widen(y),
        }
    }

    fn map(&self, (px, py): (f64, f64)) -> (f64, f64) {
        let sx = MARGIN + (px - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN);
        let sy =
            HEIGHT - MARGIN - (py - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN);
        (sx, sy)
    }
}

fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

pub fn plot(title: &str, x_label: &str, y_label: &str, series: &[Series], mark: Mark) -> String {
    let frame = Frame::fit(series);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (k, (v, anchor)) in [(frame.x.0, "start"), (frame.x.1, "end")]
        .into_iter()
        .enumerate()
    {
        let x = if k == 0 { MARGIN } else { WIDTH - MARGIN };
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" text-anchor="{anchor}">{}</text>"#,
            HEIGHT - MARGIN + 16.0,
            tick(v)
        );
    }
    for (v, y) in [(frame.y.0, HEIGHT - MARGIN), (frame.y.1, MARGIN + 10.0)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            tick(v)
        );
    }

    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&p| frame.map(p))
            .collect();
        match mark {
            Mark::Line => {
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
                    path.join(" ")
                );
            }
            Mark::Dots => {
                for (x, y) in pts {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{x:.2}" cy="{y:.2}" r="1" fill="{color}"/>"#
                    );
                }
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 6.0,
            MARGIN + 16.0 * (k + 1) as f64,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    format!("{v:.4}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_canvas_and_one_polyline_per_series() {
        let series = vec![
            Series {
                label: "a".into(),
                points: vec![(0.0, 0.0), (1.0, 1.0)],
            },
            Series {
                label: "b<c".into(),
                points: vec![(0.0, 1.0), (1.0, 0.0)],
            },
        ];
        let svg = plot("t", "x", "y", &series, Mark::Line);
        assert!(svg.contains(r#"viewBox="0 0 800 500""#));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
    }

    #[test]
    fn degenerate_ranges_do_not_divide_by_zero() {
        let series = vec![Series {
            label: "flat".into(),
            points: vec![(1.0, 2.0); 3],
        }];
        let svg = plot("t", "x", "y", &series, Mark::Dots);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
