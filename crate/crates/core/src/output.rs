//! CSV tables, static SVG plots and run manifests.
//!
//! Numbers are written with six significant digits and a '.' decimal
//! separator. Nothing time-dependent goes into a CSV, so reruns with the same
//! parameters reproduce the files byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

/// Six significant digits, fixed notation for moderate exponents and
/// scientific otherwise (like C's `%.6g`). NaN is written as `nan`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let e: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&e) {
        let decimals = (5 - e).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{e}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Header line followed by one line per row.
pub fn csv_string<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_sig(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    fs::write(path, csv_string(header, rows))?;
    Ok(())
}

/// `key = value` lines echoing every resolved parameter, preceded by a
/// commented timestamp.
pub fn manifest_string(command: &str, params: &[(String, String)], unix_time: u64) -> String {
    let mut out = format!("# hitchin run manifest, unix time {unix_time}\ncommand = {command}\n");
    for (k, v) in params {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

pub fn write_manifest(dir: &Path, command: &str, params: &[(String, String)]) -> Result<()> {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    fs::write(dir.join("run-manifest.txt"), manifest_string(command, params, now))?;
    Ok(())
}

/// Blue (min) through white to red (max); NaN cells are grey.
fn color(t: f64) -> String {
    if !t.is_finite() {
        return "#999999".into();
    }
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = t / 0.5;
        (s, s, 1.0)
    } else {
        let s = (1.0 - t) / 0.5;
        (1.0, s, s)
    };
    let c = |v: f64| (v * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(r), c(g), c(b))
}

/// Heatmap of a row-major `nx × ny` grid; cell (i, j) is drawn with x to
/// the right and y upwards. The legend states the mapped min and max.
pub fn svg_heatmap(title: &str, values: &[f64], nx: usize, ny: usize, extent: [f64; 4]) -> String {
    const CELL: f64 = 400.0;
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (w, h) = (CELL / nx as f64, CELL / ny as f64);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"480\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <text x=\"10\" y=\"20\">{title}</text>\n<g transform=\"translate(10,40)\">\n"
    );
    for i in 0..nx {
        for j in 0..ny {
            let v = values[i * ny + j];
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                i as f64 * w,
                (ny - 1 - j) as f64 * h,
                w + 0.05,
                h + 0.05,
                color((v - lo) / span)
            );
        }
    }
    s.push_str("</g>\n");
    // legend
    for k in 0..20 {
        let t = k as f64 / 19.0;
        let _ = writeln!(
            s,
            "<rect x=\"430\" y=\"{:.1}\" width=\"20\" height=\"20\" fill=\"{}\"/>",
            420.0 - 20.0 * k as f64,
            color(t)
        );
    }
    let _ = writeln!(s, "<text x=\"455\" y=\"54\">max {}</text>", fmt_sig(hi));
    let _ = writeln!(s, "<text x=\"455\" y=\"436\">min {}</text>", fmt_sig(lo));
    let [x0, x1, y0, y1] = extent;
    let _ = writeln!(
        s,
        "<text x=\"10\" y=\"470\">x in [{}, {}], y in [{}, {}]</text>",
        fmt_sig(x0),
        fmt_sig(x1),
        fmt_sig(y0),
        fmt_sig(y1)
    );
    s.push_str("</svg>\n");
    s
}

/// Polyline through (x, y) points with the axis ranges printed.
pub fn svg_line_plot(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let sx = if x1 > x0 { 400.0 / (x1 - x0) } else { 1.0 };
    let sy = if y1 > y0 { 300.0 / (y1 - y0) } else { 1.0 };
    let path: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", 60.0 + (x - x0) * sx, 340.0 - (y - y0) * sy))
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" height=\"400\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <text x=\"10\" y=\"20\">{title}</text>\n\
         <line x1=\"60\" y1=\"340\" x2=\"460\" y2=\"340\" stroke=\"black\"/>\n\
         <line x1=\"60\" y1=\"40\" x2=\"60\" y2=\"340\" stroke=\"black\"/>\n\
         <polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"{}\"/>\n\
         <text x=\"60\" y=\"360\">{}</text><text x=\"430\" y=\"360\">{}</text>\n\
         <text x=\"5\" y=\"340\">{}</text><text x=\"5\" y=\"45\">{}</text>\n\
         <text x=\"240\" y=\"385\">{x_label}</text><text x=\"5\" y=\"200\">{y_label}</text>\n</svg>\n",
        path.join(" "),
        fmt_sig(x0),
        fmt_sig(x1),
        fmt_sig(y0),
        fmt_sig(y1)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159");
        assert_eq!(fmt_sig(1.5708e-7), "1.5708e-7");
        assert_eq!(fmt_sig(-0.000123456789), "-0.000123457");
        assert_eq!(fmt_sig(123456789.0), "1.23457e8");
        assert_eq!(fmt_sig(20.0), "20");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(f64::NAN), "nan");
        assert_eq!(fmt_sig(999999.5), "1e6");
    }

    #[test]
    fn csv_layout() {
        let s = csv_string(&["B", "flux_over_pi"], vec![vec![0.0, 1.0], vec![0.5, 0.745804]]);
        assert_eq!(s, "B,flux_over_pi\n0,1\n0.5,0.745804\n");
    }

    #[test]
    fn manifest_layout() {
        let s = manifest_string("scan-b", &[("steps".into(), "21".into())], 7);
        assert_eq!(s, "# hitchin run manifest, unix time 7\ncommand = scan-b\nsteps = 21\n");
    }

    #[test]
    fn svg_is_well_formed() {
        let s = svg_heatmap("C", &[0.0, 1.0, f64::NAN, 2.0], 2, 2, [-1.0, 1.0, -1.0, 1.0]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("max 2") && s.contains("min 0") && s.contains("#999999"));
        let l = svg_line_plot("flux", "B", "flux/pi", &[(0.0, 1.0), (1.0, 0.35)]);
        assert!(l.contains("polyline"));
    }
}
