//! Minimal static SVG charts. The CSV files next to them are the real output;
//! these are for a quick look.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: String,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = write!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

/// Hue ramp from dark blue through teal to yellow.
pub fn ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 4] = [(68.0, 1.0, 84.0), (49.0, 104.0, 142.0), (53.0, 183.0, 121.0), (253.0, 231.0, 37.0)];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - k as f64;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    let mix = |x: f64, y: f64| (x + f * (y - x)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let sy = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut out = String::new();
    header(&mut out, title);
    let _ = write!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = write!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{fx:.3}</text>"#, sx(fx), H - BOTTOM + 16.0);
        let _ = write!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{fy:.3}</text>"#, LEFT - 6.0, sy(fy) + 4.0);
    }
    let _ = write!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(x_label));
    let _ = write!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (k, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (i, &(x, y)) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { 'M' } else { 'L' }, sx(x), sy(y));
        }
        let _ = write!(out, r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#, d.trim_end(), s.color);
        if !s.label.is_empty() {
            let ly = TOP + 14.0 + 14.0 * k as f64;
            let _ = write!(
                out,
                r#"<text x="{:.1}" y="{ly:.1}" text-anchor="end" fill="{}">{}</text>"#,
                W - RIGHT - 6.0,
                s.color,
                escape(&s.label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Cells colored by value; `None` cells are left grey.
pub fn heatmap(title: &str, rows: &[String], cols: &[String], values: &[Vec<Option<f64>>], x_label: &str, y_label: &str) -> String {
    let (lo, hi) = bounds(values.iter().flatten().flatten().copied());
    let cw = (W - LEFT - RIGHT - 60.0) / cols.len().max(1) as f64;
    let ch = (H - TOP - BOTTOM) / rows.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, title);
    for (r, row) in values.iter().enumerate() {
        // First row at the bottom.
        let y = H - BOTTOM - (r + 1) as f64 * ch;
        for (c, v) in row.iter().enumerate() {
            let fill = v.map(|v| ramp((v - lo) / (hi - lo))).unwrap_or_else(|| "#cccccc".into());
            let _ = write!(
                out,
                r#"<rect x="{:.1}" y="{y:.1}" width="{cw:.1}" height="{ch:.1}" fill="{fill}"><title>{}</title></rect>"#,
                LEFT + c as f64 * cw,
                v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into())
            );
        }
        let _ = write!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + ch / 2.0 + 4.0, escape(&rows[r]));
    }
    for (c, label) in cols.iter().enumerate() {
        let _ = write!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + (c as f64 + 0.5) * cw,
            H - BOTTOM + 16.0,
            escape(label)
        );
    }
    let _ = write!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + cw * cols.len() as f64 / 2.0, H - 10.0, escape(x_label));
    let _ = write!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    let bar_x = W - RIGHT - 40.0;
    for k in 0..20 {
        let t = k as f64 / 19.0;
        let _ = write!(
            out,
            r#"<rect x="{bar_x:.1}" y="{:.1}" width="14" height="{:.1}" fill="{}"/>"#,
            H - BOTTOM - (k + 1) as f64 * (H - TOP - BOTTOM) / 20.0,
            (H - TOP - BOTTOM) / 20.0 + 0.5,
            ramp(t)
        );
    }
    let _ = write!(out, r#"<text x="{:.1}" y="{:.1}">{hi:.3}</text>"#, bar_x - 4.0, TOP - 4.0);
    let _ = write!(out, r#"<text x="{:.1}" y="{:.1}">{lo:.3}</text>"#, bar_x - 4.0, H - BOTTOM + 16.0);
    out.push_str("</svg>\n");
    out
}

/// Parse a matrix CSV as written by the sweep aggregator: a header of column
/// keys after a corner label, then one labelled row per line.
pub fn parse_matrix(csv: &str) -> Option<(String, Vec<String>, Vec<String>, Vec<Vec<Option<f64>>>)> {
    let mut lines = csv.lines();
    let head: Vec<&str> = lines.next()?.split(',').collect();
    let corner = head.first()?.to_string();
    let cols = head[1..].iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let mut cells = line.split(',');
        rows.push(cells.next()?.to_string());
        values.push(cells.map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite())).collect());
    }
    Some((corner, cols, rows, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#440154");
        assert_eq!(ramp(1.0), "#fde725");
        assert_eq!(ramp(2.0), ramp(1.0));
    }

    #[test]
    fn charts_are_wellformed() {
        let s = line_chart(
            "a < b",
            "x",
            "y",
            &[Series {
                label: "one".into(),
                points: vec![(0.0, 0.0), (1.0, 2.0), (2.0, f64::NAN)],
                color: "#000".into(),
            }],
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a &lt; b"));
        let h = heatmap("h", &["r".into()], &["c0".into(), "c1".into()], &[vec![Some(1.0), None]], "q", "alpha");
        assert!(h.contains("#cccccc"));
    }

    #[test]
    fn matrix_roundtrip() {
        let (corner, cols, rows, values) = parse_matrix("alpha\\q,0.1,0.2\n0.5,1.5,\n").unwrap();
        assert_eq!(corner, "alpha\\q");
        assert_eq!(cols, vec!["0.1", "0.2"]);
        assert_eq!(rows, vec!["0.5"]);
        assert_eq!(values, vec![vec![Some(1.5), None]]);
    }
}
