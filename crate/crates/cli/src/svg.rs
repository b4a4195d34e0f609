//! Minimal static scatter-plus-fit plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const CURVE_SAMPLES: usize = 100;

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    /// Fitted curves, each evaluated on `[0, max x]`.
    pub curves: Vec<Box<dyn Fn(f64) -> f64>>,
    /// Extrapolated value drawn at `x = 0`.
    pub estimate: Option<f64>,
    /// Noiseless value drawn as a dashed horizontal line.
    pub reference: Option<f64>,
}

struct Frame {
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + x / self.x_max * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn frame(&self) -> Frame {
        let x_max = self.points.iter().map(|p| p.0).fold(1.0, f64::max) * 1.05;
        let mut ys: Vec<f64> = self.points.iter().map(|p| p.1).collect();
        ys.extend(self.estimate);
        ys.extend(self.reference);
        for f in &self.curves {
            ys.extend((0..=CURVE_SAMPLES).map(|i| f(x_max * i as f64 / CURVE_SAMPLES as f64)));
        }
        ys.retain(|y| y.is_finite());
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1e-3) };
        Frame { x_max, y_min: lo - pad, y_max: hi + pad }
    }

    /// SVG document with `comments` embedded as an XML comment.
    pub fn render(&self, comments: &[String]) -> String {
        let fr = self.frame();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        for line in comments {
            let _ = writeln!(s, "<!-- {} -->", line.replace("--", "- -"));
        }
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(s, r#"<g stroke="black" stroke-width="1">"#);
        let _ = writeln!(s, r#"<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/>"#);
        let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
        let _ = writeln!(s, "</g>");
        let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11">"#);
        for i in 0..=TICKS {
            let t = i as f64 / TICKS as f64;
            let xv = t * fr.x_max;
            let yv = fr.y_min + t * (fr.y_max - fr.y_min);
            let (px, py) = (fr.px(xv), fr.py(yv));
            let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{y1}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 4.0);
            let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.2}</text>"#, y1 + 16.0);
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 4.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.4}</text>"#, x0 - 6.0, py + 4.0);
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(s, "</g>");
        if let Some(r) = self.reference {
            let py = fr.py(r);
            let _ = writeln!(
                s,
                r#"<line x1="{x0}" y1="{py:.2}" x2="{x1}" y2="{py:.2}" stroke="green" stroke-dasharray="6 4"/>"#
            );
        }
        for f in &self.curves {
            let pts: Vec<String> = (0..=CURVE_SAMPLES)
                .map(|i| fr.x_max * i as f64 / CURVE_SAMPLES as f64)
                .filter(|&x| f(x).is_finite())
                .map(|x| format!("{:.2},{:.2}", fr.px(x), fr.py(f(x))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="red" stroke-opacity="0.6" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let _ = writeln!(s, r#"<g fill="steelblue">"#);
        for &(x, y) in self.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, fr.px(x), fr.py(y));
        }
        let _ = writeln!(s, "</g>");
        if let Some(e) = self.estimate.filter(|e| e.is_finite()) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="red"/>"#, fr.px(0.0), fr.py(e));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot() -> Plot {
        Plot {
            title: "hop <zne>".into(),
            x_label: "λ".into(),
            y_label: "value".into(),
            points: vec![(1.0, 0.8), (2.0, 0.7), (3.0, 0.65)],
            curves: vec![Box::new(|x| 0.9 - 0.08 * x)],
            estimate: Some(0.9),
            reference: Some(0.85),
        }
    }

    #[test]
    fn renders_all_elements() {
        let svg = plot().render(&["seed=1".into()]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(r#"r="3""#).count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("<!-- seed=1 -->"));
        assert!(svg.contains("hop &lt;zne&gt;"));
    }

    #[test]
    fn points_stay_inside_the_axes() {
        let p = plot();
        let fr = p.frame();
        for &(x, y) in &p.points {
            assert!((LEFT..=WIDTH - RIGHT).contains(&fr.px(x)));
            assert!((TOP..=HEIGHT - BOTTOM).contains(&fr.py(y)));
        }
        assert!((TOP..=HEIGHT - BOTTOM).contains(&fr.py(0.9)));
    }

    #[test]
    fn degenerate_data_still_renders() {
        let p = Plot {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            points: vec![(1.0, 0.5), (1.0, 0.5)],
            curves: Vec::new(),
            estimate: None,
            reference: None,
        };
        let svg = p.render(&[]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
