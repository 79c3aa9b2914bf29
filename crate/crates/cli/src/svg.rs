//! Minimal native SVG: heat maps of site profiles and line plots.

use crate::record::RunRecord;
use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD_L: f64 = 64.0;
const PAD_R: f64 = 110.0;
const PAD_T: f64 = 36.0;
const PAD_B: f64 = 48.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = write!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = xs
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 * hi.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn axes(s: &mut String, x: (f64, f64), y: (f64, f64), xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (PAD_L, W - PAD_R, H - PAD_B, PAD_T);
    let _ = write!(s, r#"<path d="M{x0} {y1}V{y0}H{x1}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let px = x0 + f * (x1 - x0);
        let py = y0 + f * (y1 - y0);
        let _ = write!(
            s,
            r#"<text x="{px}" y="{}" text-anchor="middle">{}</text><text x="{}" y="{}" text-anchor="end">{}</text>"#,
            y0 + 16.0,
            tick(x.0 + f * (x.1 - x.0)),
            x0 - 6.0,
            py + 4.0,
            tick(y.0 + f * (y.1 - y.0))
        );
    }
    let _ = write!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 10.0,
        escape(xlabel)
    );
    let _ = write!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.01 && v.abs() < 1e4) {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// One curve of a line plot.
pub struct Curve<'a> {
    pub label: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, curves: &[Curve<'_>]) -> String {
    let mut s = header(title);
    let xr = range(curves.iter().flat_map(|c| c.x.iter().copied()));
    let yr = range(curves.iter().flat_map(|c| c.y.iter().copied()));
    axes(&mut s, xr, yr, xlabel, ylabel);
    let px = |x: f64| PAD_L + (x - xr.0) / (xr.1 - xr.0) * (W - PAD_L - PAD_R);
    let py = |y: f64| H - PAD_B - (y - yr.0) / (yr.1 - yr.0) * (H - PAD_B - PAD_T);
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (k, (x, y)) in c.x.iter().zip(c.y).enumerate() {
            if y.is_finite() {
                let _ = write!(d, "{}{:.2} {:.2}", if k == 0 { 'M' } else { 'L' }, px(*x), py(*y));
            }
        }
        let _ = write!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let ly = PAD_T + 16.0 * i as f64 + 8.0;
        let _ = write!(
            s,
            r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            W - PAD_R + 8.0,
            W - PAD_R + 24.0,
            W - PAD_R + 28.0,
            ly + 4.0,
            escape(&c.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Time runs upward, site index to the right. Signed data use a blue–white–red
/// scale centred on zero, non-negative data a white–black one.
pub fn heat_map(title: &str, times: &[f64], values: &[Vec<f64>], signed: bool) -> String {
    let mut s = header(title);
    let cols = values.first().map_or(0, Vec::len);
    if values.is_empty() || cols == 0 {
        s.push_str("</svg>\n");
        return s;
    }
    let tr = range(times.iter().copied());
    axes(&mut s, (0.5, cols as f64 + 0.5), tr, "site", "t");
    let (lo, hi) = range(values.iter().flatten().copied());
    let scale = lo.abs().max(hi.abs());
    let cw = (W - PAD_L - PAD_R) / cols as f64;
    let rh = (H - PAD_B - PAD_T) / values.len() as f64;
    for (r, row) in values.iter().enumerate() {
        let y = H - PAD_B - (r + 1) as f64 * rh;
        for (c, &v) in row.iter().enumerate() {
            let color = if signed {
                let f = (v / scale).clamp(-1.0, 1.0);
                let (a, b) = if f >= 0.0 { (255.0, 255.0 * (1.0 - f)) } else { (255.0 * (1.0 + f), 255.0) };
                if f >= 0.0 {
                    format!("rgb({},{},{})", a as u8, b as u8, b as u8)
                } else {
                    format!("rgb({},{},{})", a as u8, a as u8, b as u8)
                }
            } else {
                let f = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
                let g = (255.0 * (1.0 - f)) as u8;
                format!("rgb({g},{g},{g})")
            };
            let _ = write!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                PAD_L + c as f64 * cw,
                y,
                cw + 0.05,
                rh + 0.05
            );
        }
    }
    let _ = write!(
        s,
        r#"<text x="{}" y="{}">{} … {}</text>"#,
        W - PAD_R + 8.0,
        PAD_T + 12.0,
        tick(if signed { -scale } else { lo }),
        tick(if signed { scale } else { hi })
    );
    s.push_str("</svg>\n");
    s
}

/// Figures for a single run.
pub fn run_figures(r: &RunRecord) -> Vec<(String, String)> {
    let d = &r.data;
    let label = r.point().label();
    let mut out = Vec::new();
    if !d.density.is_empty() {
        let n = d.density.len();
        out.push(("density".into(), heat_map(&format!("n_j  {label}"), &d.times[..n], &d.density, false)));
        out.push(("current".into(), heat_map(&format!("I_j  {label}"), &d.times[..n], &d.current, true)));
    }
    if !d.inflow.is_empty() {
        out.push(("inflow".into(), heat_map(&format!("σ_j  {label}"), &d.inflow_times, &d.inflow, true)));
    }
    let n = d.number.len();
    out.push((
        "number".into(),
        line_plot(&format!("N(t)  {label}"), "t", "N", &[Curve { label: label.clone(), x: &d.times[..n], y: &d.number }]),
    ));
    if !d.entropy.is_empty() {
        let s: Vec<f64> = d.entropy.iter().map(|e| e.0).collect();
        let t = &d.times[..s.len()];
        out.push(("entropy".into(), line_plot(&format!("S_vN  {label}"), "t", "S", &[Curve { label: label.clone(), x: t, y: &s }])));
    }
    if !d.asymmetry.is_empty() {
        let t = &d.times[..d.asymmetry.len()];
        out.push((
            "asymmetry".into(),
            line_plot(&format!("ΔS_2  {label}"), "t", "ΔS_2", &[Curve { label, x: t, y: &d.asymmetry }]),
        ));
    }
    out
}

/// Overlays of every run in a scenario, one figure per observable and γ.
pub fn scenario_figures(runs: &[RunRecord]) -> Vec<(String, String)> {
    let mut gammas: Vec<f64> = runs.iter().map(|r| r.point().gamma).collect();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    let mut out = Vec::new();
    for g in gammas {
        let group: Vec<&RunRecord> = runs.iter().filter(|r| r.point().gamma == g).collect();
        let ee: Vec<Vec<f64>> = group.iter().map(|r| r.data.entropy.iter().map(|e| e.0).collect()).collect();
        let mut push = |name: &str, ylabel: &str, ys: Vec<&[f64]>| {
            let curves: Vec<Curve> = group
                .iter()
                .zip(ys)
                .filter(|(_, y)| !y.is_empty())
                .map(|(r, y)| Curve {
                    label: format!("θ={}", r.point().theta),
                    x: &r.data.times[..y.len()],
                    y,
                })
                .collect();
            if !curves.is_empty() {
                out.push((format!("{name}-g{g}"), line_plot(&format!("{ylabel}, γ = {g}"), "t", ylabel, &curves)));
            }
        };
        push("number", "N", group.iter().map(|r| r.data.number.as_slice()).collect());
        push("entropy", "S_vN", ee.iter().map(Vec::as_slice).collect());
        push("asymmetry", "ΔS_2", group.iter().map(|r| r.data.asymmetry.as_slice()).collect());
    }
    out
}
