use std::fmt::Write;

use geoscale_core::{PowerLawFit, ScalingPoint};

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Standalone log-log scatter with the fitted curve. The plotted data are
/// embedded as a CSV table inside `<metadata>`.
pub fn scaling_svg(points: &[ScalingPoint], fit: &PowerLawFit) -> String {
    let xs: Vec<f64> = points.iter().map(|p| p.scale.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.loss.log10()).collect();
    let (mut x0, mut x1) = bounds(&xs);
    let (mut y0, mut y1) = bounds(&ys);
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let curve: Vec<(f64, f64)> = (0..=100)
        .map(|i| x0 + (x1 - x0) * i as f64 / 100.0)
        .map(|lx| (lx, fit.predict(10f64.powf(lx))))
        .filter(|(_, l)| *l > 0.0)
        .map(|(lx, l)| (lx, l.log10()))
        .collect();
    for &(_, y) in &curve {
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.05;
        y1 += 0.05;
    }
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, "<metadata>\nrun_id,scale,loss,trapped");
    for p in points {
        let _ = writeln!(s, "{},{},{},{}", esc(&p.run_id), p.scale, p.loss, p.trapped);
    }
    let _ = writeln!(s, "</metadata>");
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">log10 scale [{x0:.3}, {x1:.3}]</text>"#,
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">log10 loss [{y0:.4}, {y1:.4}]</text>"#,
        H / 2.0,
        H / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-size="13" text-anchor="middle">L = {:.6} + {:.6} s^-{:.6}   R2(log-log) = {:.4}</text>"#,
        W / 2.0,
        fit.floor,
        fit.coefficient,
        fit.exponent,
        fit.r_squared_loglog
    );
    if let Some((first, rest)) = curve.split_first() {
        let mut d = format!("M{:.2} {:.2}", px(first.0), py(first.1));
        for &(x, y) in rest {
            let _ = write!(d, " L{:.2} {:.2}", px(x), py(y));
        }
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="steelblue" stroke-width="2"/>"#);
    }
    for (p, (&x, &y)) in points.iter().zip(xs.iter().zip(&ys)) {
        let (fill, stroke) = if p.trapped { ("none", "crimson") } else { ("black", "black") };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="{stroke}"><title>{}</title></circle>"#,
            px(x),
            py(y),
            esc(&p.run_id)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}
