//! CSV tables and SVG line charts.

use std::fmt::Write as _;

use wptsim::measurement::IngestRow;
use wptsim::sweep::{SweepResult, Trace};

/// Fixed float formatting: 9 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

fn trace_name(t: Trace) -> String {
    match t {
        Trace::Tx(i) => format!("i_tx{}_norm", i + 1),
        Trace::Rp(i) => format!("i_rp{}_norm", i + 1),
        Trace::Rx => "i_rx_norm".into(),
        Trace::Input => "i_in_norm".into(),
    }
}

fn trace_label(t: Trace) -> String {
    match t {
        Trace::Tx(i) => format!("Tx{}", i + 1),
        Trace::Rp(i) => format!("Rp{}", i + 1),
        Trace::Rx => "Rx".into(),
        Trace::Input => "input".into(),
    }
}

pub fn sweep_header(r: &SweepResult) -> String {
    let mut cols = vec!["y_mm".to_string(), "y_over_d0".to_string()];
    cols.extend(r.traces().into_iter().map(trace_name));
    cols.extend(["p_out_w", "eta", "xi_tx", "xi_rp", "xi_rx"].map(String::from));
    cols.join(",")
}

pub fn sweep_csv(r: &SweepResult) -> String {
    let traces: Vec<Vec<f64>> = r.traces().into_iter().map(|t| r.normalized(t)).collect();
    let mut out = sweep_header(r);
    out.push('\n');
    for (k, row) in r.rows.iter().enumerate() {
        let mut cells = vec![num(row.y * 1e3), num(row.y_over_d0)];
        cells.extend(traces.iter().map(|t| num(t[k])));
        cells.extend([row.p_out, row.efficiency, row.xi_tx, row.xi_rp, row.xi_rx].map(num));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Proposed and conventional sweeps side by side; columns of the
/// conventional system carry a `_conv` suffix.
pub fn compare_csv(proposed: &SweepResult, conventional: &SweepResult) -> String {
    let pt: Vec<Trace> = proposed.traces();
    let ct: Vec<Trace> = conventional.traces();
    let mut cols = vec!["y_mm".to_string(), "y_over_d0".to_string()];
    cols.extend(pt.iter().map(|t| trace_name(*t)));
    cols.extend(["p_out_w", "eta"].map(String::from));
    cols.extend(ct.iter().map(|t| format!("{}_conv", trace_name(*t))));
    cols.extend(["p_out_w_conv", "eta_conv"].map(String::from));
    let pv: Vec<Vec<f64>> = pt.iter().map(|t| proposed.normalized(*t)).collect();
    let cv: Vec<Vec<f64>> = ct.iter().map(|t| conventional.normalized(*t)).collect();
    let mut out = cols.join(",");
    out.push('\n');
    for (k, (p, c)) in proposed.rows.iter().zip(&conventional.rows).enumerate() {
        let mut cells = vec![num(p.y * 1e3), num(p.y_over_d0)];
        cells.extend(pv.iter().map(|t| num(t[k])));
        cells.extend([num(p.p_out), num(p.efficiency)]);
        cells.extend(cv.iter().map(|t| num(t[k])));
        cells.extend([num(c.p_out), num(c.efficiency)]);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn curve_csv(z: &[f64], offsets: &[f64], k: &[Vec<f64>]) -> String {
    let mut out = String::from("z_mm,offset_mm,k\n");
    for (zi, row) in z.iter().zip(k) {
        for (y, kv) in offsets.iter().zip(row) {
            writeln!(out, "{},{},{}", num(zi * 1e3), num(y * 1e3), num(*kv)).unwrap();
        }
    }
    out
}

pub fn ingest_csv(rows: &[IngestRow]) -> String {
    let mut out = String::from("frequency_hz,eta,i1_abs_a,i2_abs_a\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", num(r.frequency), num(r.eta), num(r.i1_abs), num(r.i2_abs)).unwrap();
    }
    out
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, xs: &[f64], ys: &[f64]) -> Self {
        Series { label: label.into(), points: xs.iter().copied().zip(ys.iter().copied()).collect(), dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

/// Minimal line chart.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 55.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title)).unwrap();
    writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    for k in 0..=5 {
        let fx = x0 + (x1 - x0) * k as f64 / 5.0;
        let fy = y0 + (y1 - y0) * k as f64 / 5.0;
        let (px, py) = (sx(fx), sy(fy));
        writeln!(s, r##"<line x1="{px:.2}" y1="{top}" x2="{px:.2}" y2="{}" stroke="#ddd"/>"##, top + ph).unwrap();
        writeln!(s, r##"<line x1="{left}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#ddd"/>"##, left + pw).unwrap();
        writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, top + ph + 16.0, tick(fx)).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, left - 6.0, py + 4.0, tick(fy)).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 14.0, escape(x_label)).unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    )
    .unwrap();
    for (i, ser) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let path: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{}"/>"#, path.join(" ")).unwrap();
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"{dash}/>"#, lx + 24.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&ser.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Normalized current traces of a sweep against `y / d0`.
pub fn sweep_series(r: &SweepResult, suffix: &str, dashed: bool) -> Vec<Series> {
    let x: Vec<f64> = r.rows.iter().map(|row| row.y_over_d0).collect();
    r.traces()
        .into_iter()
        .map(|t| {
            let s = Series::new(format!("{}{suffix}", trace_label(t)), &x, &r.normalized(t));
            if dashed {
                s.dashed()
            } else {
                s
            }
        })
        .collect()
}
