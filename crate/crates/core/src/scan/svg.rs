//! Minimal SVG rendering of a descriptor curve.

use std::f64::consts::PI;
use std::fmt::Write;

use super::DescriptorCurve;
use super::io::format_number;

const WIDTH: f64 = 640.0;
const PANEL: f64 = 220.0;
const MARGIN: f64 = 50.0;

fn polyline(out: &mut String, xs: &[f64], ys: &[f64], top: f64, colour: &str) {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    if pts.is_empty() {
        return;
    }
    let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let (y0, y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    let sx = if x1 > x0 { (WIDTH - 2.0 * MARGIN) / (x1 - x0) } else { 0.0 };
    let sy = if y1 > y0 { (PANEL - 40.0) / (y1 - y0) } else { 0.0 };
    let coords: Vec<String> = pts
        .iter()
        .map(|(x, y)| {
            let px = MARGIN + (x - x0) * sx;
            let py = top + PANEL - 20.0 - (y - y0) * sy;
            format!("{:.2},{:.2}", px, py)
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
        coords.join(" ")
    );
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{:.2}" font-size="11">min {} max {}</text>"#,
        top + PANEL - 2.0,
        format_number(y0),
        format_number(y1)
    );
}

/// Angle (in units of π) and amplitude versus one-photon detuning.
pub fn descriptor_plot(curve: &DescriptorCurve) -> String {
    let xs: Vec<f64> = curve.rows.iter().map(|r| r.big_delta_mhz).collect();
    let phi: Vec<f64> = curve.rows.iter().map(|r| r.phi / PI).collect();
    let d: Vec<f64> = curve.rows.iter().map(|r| r.d).collect();
    let height = 2.0 * PANEL + 40.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="20" font-size="13">phi / pi vs one-photon detuning (MHz)</text>"#);
    polyline(&mut out, &xs, &phi, 20.0, "#1f4e9c");
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{:.0}" font-size="13">D vs one-photon detuning (MHz)</text>"#,
        PANEL + 40.0
    );
    polyline(&mut out, &xs, &d, PANEL + 40.0, "#a33b20");
    out.push_str("</svg>\n");
    out
}
