//! Fixed-layout SVG of an eigenvalue histogram with a density overlay.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 780.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 450.0;

/// Normalized histogram heights of `values` over `[0, upper]`; values outside
/// the range still count toward the total.
pub fn histogram(values: &[f64], upper: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0usize; bins];
    let width = upper / bins as f64;
    for &v in values {
        if (0.0..=upper).contains(&v) {
            counts[((v / width) as usize).min(bins - 1)] += 1;
        }
    }
    let total = values.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / (total * width)).collect()
}

/// Histogram over `[0, 1.1 x*]` as rectangles, then the polyline `curve`.
/// Output depends only on the inputs.
pub fn render(values: &[f64], x_star: f64, bins: usize, curve: &[(f64, f64)], title: &str) -> String {
    let upper = 1.1 * x_star;
    let heights = histogram(values, upper, bins);
    // the density diverges at 0; scale to the histogram and the bulk of the curve
    let bulk = curve.iter().filter(|(x, _)| *x >= 0.05 * x_star).map(|(_, y)| *y).fold(0.0, f64::max);
    let y_max = 1.1 * heights.iter().copied().fold(bulk, f64::max).max(f64::MIN_POSITIVE);
    let sx = |x: f64| LEFT + (RIGHT - LEFT) * x / upper;
    let sy = |y: f64| BOTTOM - (BOTTOM - TOP) * y.min(y_max) / y_max;

    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let bw = upper / bins as f64;
    let _ = writeln!(w, r##"<g fill="#9ecae1" stroke="#3182bd" stroke-width="0.5">"##);
    for (i, h) in heights.iter().enumerate() {
        let (x0, x1) = (sx(i as f64 * bw), sx((i + 1) as f64 * bw));
        let y = sy(*h);
        let _ = writeln!(w, r#"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}"/>"#, x1 - x0, BOTTOM - y);
    }
    let _ = writeln!(w, "</g>");
    let pts: Vec<String> = curve.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
    let _ = writeln!(w, r##"<polyline fill="none" stroke="#de2d26" stroke-width="2" points="{}"/>"##, pts.join(" "));
    let _ = writeln!(w, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(w, r#"<line x1="{LEFT}" y1="{BOTTOM}" x2="{RIGHT}" y2="{BOTTOM}"/>"#);
    let _ = writeln!(w, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{BOTTOM}"/>"#);
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, r#"<g font-size="12" text-anchor="middle">"#);
    for (x, label) in [(0.0, "0".to_string()), (x_star, format!("x* = {x_star:.4}")), (upper, format!("{upper:.4}"))] {
        let _ = writeln!(
            w,
            r#"<line x1="{0:.2}" y1="{BOTTOM}" x2="{0:.2}" y2="{1:.2}" stroke="black"/>"#,
            sx(x),
            BOTTOM + 5.0
        );
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">{label}</text>"#, sx(x), BOTTOM + 20.0);
    }
    let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y_max:.4}</text>"#, LEFT - 5.0, TOP + 4.0);
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_is_normalized() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let h = histogram(&v, 1.0, 10);
        let area: f64 = h.iter().map(|x| x * 0.1).sum();
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn render_layout() {
        let svg = render(&[0.5, 1.0, 3.9], 4.0, 4, &[(1.0, 0.3), (2.0, 0.16)], "a<b");
        assert!(svg.starts_with("<svg") && svg.contains(r#"viewBox="0 0 800 500""#));
        assert_eq!(svg.matches("<rect").count(), 5);
        assert!(svg.find("<rect x=\"60").unwrap() < svg.find("<polyline").unwrap());
        assert!(svg.contains("a&lt;b"));
        assert_eq!(svg, render(&[0.5, 1.0, 3.9], 4.0, 4, &[(1.0, 0.3), (2.0, 0.16)], "a<b"));
    }
}
