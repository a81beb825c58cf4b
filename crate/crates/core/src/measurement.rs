//! Two-port network data: Touchstone `.s2p` I/O, S/Z conversion and
//! loaded-efficiency post-processing.

use std::f64::consts::PI;
use std::fmt::Write as _;

use log::warn;
use serde::Serialize;

use crate::circuit::{two_port_impedance, WptSystem};
use crate::{Complex, Error, Result};

type Matrix2 = [[Complex; 2]; 2];

const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

/// S-parameters of a two-port at one frequency. `s[i][j]` is `S_(i+1)(j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPortRecord {
    pub frequency: f64,
    pub s: Matrix2,
    pub z0: f64,
}

impl TwoPortRecord {
    pub fn new(frequency: f64, s: Matrix2, z0: f64) -> Result<Self> {
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::invalid(format!("frequency must be positive, got {frequency}")));
        }
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(Error::invalid(format!("reference impedance must be positive, got {z0}")));
        }
        Ok(TwoPortRecord { frequency, s, z0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Real / imaginary.
    Ri,
    /// Magnitude / angle in degrees.
    Ma,
    /// dB / angle in degrees.
    Db,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn scale(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    fn label(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "Hz",
            FrequencyUnit::KHz => "kHz",
            FrequencyUnit::MHz => "MHz",
            FrequencyUnit::GHz => "GHz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Options {
    unit: FrequencyUnit,
    format: DataFormat,
    z0: f64,
}

// Touchstone defaults when the option line is absent
const DEFAULT_OPTIONS: Options = Options { unit: FrequencyUnit::GHz, format: DataFormat::Ma, z0: 50.0 };

fn parse_options(line: &str, lineno: usize) -> Result<Options> {
    let err = |message: String| Error::Parse { line: lineno, message };
    let mut opts = DEFAULT_OPTIONS;
    let mut tokens = line[1..].split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opts.unit = FrequencyUnit::Hz,
            "KHZ" => opts.unit = FrequencyUnit::KHz,
            "MHZ" => opts.unit = FrequencyUnit::MHz,
            "GHZ" => opts.unit = FrequencyUnit::GHz,
            "S" => {}
            "Y" | "Z" | "H" | "G" => return Err(err(format!("only S-parameter files are supported, got {tok}"))),
            "RI" => opts.format = DataFormat::Ri,
            "MA" => opts.format = DataFormat::Ma,
            "DB" => opts.format = DataFormat::Db,
            "R" => {
                let v = tokens.next().ok_or_else(|| err("R without a reference impedance".into()))?;
                opts.z0 = v.parse().map_err(|_| err(format!("bad reference impedance {v:?}")))?;
                if !(opts.z0 > 0.0 && opts.z0.is_finite()) {
                    return Err(err(format!("reference impedance must be positive, got {v}")));
                }
            }
            _ => return Err(err(format!("unknown option {tok:?}"))),
        }
    }
    Ok(opts)
}

fn to_complex(a: f64, b: f64, format: DataFormat) -> Complex {
    match format {
        DataFormat::Ri => Complex::new(a, b),
        DataFormat::Ma => Complex::from_polar(a, b.to_radians()),
        DataFormat::Db => Complex::from_polar(10f64.powf(a / 20.0), b.to_radians()),
    }
}

fn from_complex(z: Complex, format: DataFormat) -> (f64, f64) {
    match format {
        DataFormat::Ri => (z.re, z.im),
        DataFormat::Ma => (z.norm(), z.arg().to_degrees()),
        DataFormat::Db => (20.0 * z.norm().log10(), z.arg().to_degrees()),
    }
}

/// Parses `.s2p` text. Records come back in ascending frequency.
pub fn parse_touchstone(text: &str) -> Result<Vec<TwoPortRecord>> {
    let mut opts: Option<Options> = None;
    let mut records = Vec::new();
    let mut monotone = true;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('!').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if opts.is_some() {
                return Err(Error::Parse { line: lineno, message: "second option line".into() });
            }
            opts = Some(parse_options(line, lineno)?);
            continue;
        }
        let o = *opts.get_or_insert(DEFAULT_OPTIONS);
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse { line: lineno, message: format!("bad number {t:?}") }))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != 9 {
            return Err(Error::Parse { line: lineno, message: format!("expected 9 columns, found {}", values.len()) });
        }
        let p = |k: usize| to_complex(values[1 + 2 * k], values[2 + 2 * k], o.format);
        // column order is S11 S21 S12 S22
        let s = [[p(0), p(2)], [p(1), p(3)]];
        let record = TwoPortRecord::new(values[0] * o.unit.scale(), s, o.z0)
            .map_err(|e| Error::Parse { line: lineno, message: e.to_string() })?;
        if let Some(prev) = records.last().map(|r: &TwoPortRecord| r.frequency) {
            if record.frequency <= prev {
                monotone = false;
            }
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::Parse { line: 0, message: "no data rows".into() });
    }
    if !monotone {
        warn!("touchstone frequencies are not strictly increasing; records sorted");
        records.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    }
    Ok(records)
}

/// Serialises records sharing one reference impedance.
pub fn write_touchstone(records: &[TwoPortRecord], unit: FrequencyUnit, format: DataFormat) -> Result<String> {
    let z0 = records.first().map_or(50.0, |r| r.z0);
    if records.iter().any(|r| r.z0 != z0) {
        return Err(Error::invalid("records use different reference impedances"));
    }
    let tag = match format {
        DataFormat::Ri => "RI",
        DataFormat::Ma => "MA",
        DataFormat::Db => "DB",
    };
    let mut out = format!("# {} S {} R {}\n", unit.label(), tag, z0);
    for r in records {
        write!(out, "{:e}", r.frequency / unit.scale()).unwrap();
        for z in [r.s[0][0], r.s[1][0], r.s[0][1], r.s[1][1]] {
            let (a, b) = from_complex(z, format);
            write!(out, " {a:e} {b:e}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

fn inverse(m: &Matrix2) -> Option<Matrix2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().fold(0.0f64, |a, z| a.max(z.norm()));
    if !(det.norm() > 1e-14 * scale * scale) || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut c = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// `Z = Z0 (I + S)(I - S)^-1`.
pub fn s_to_z(record: &TwoPortRecord) -> Result<Matrix2> {
    let s = record.s;
    let one = Complex::new(1.0, 0.0);
    let i_plus = [[one + s[0][0], s[0][1]], [s[1][0], one + s[1][1]]];
    let i_minus = [[one - s[0][0], -s[0][1]], [-s[1][0], one - s[1][1]]];
    let inv = inverse(&i_minus).ok_or_else(|| Error::Degenerate(format!("I - S is singular at {} Hz", record.frequency)))?;
    let z = mul(&i_plus, &inv);
    Ok(z.map(|row| row.map(|v| v * record.z0)))
}

/// `S = (Z/Z0 - I)(Z/Z0 + I)^-1`.
pub fn z_to_s(z: &Matrix2, z0: f64, frequency: f64) -> Result<TwoPortRecord> {
    let one = Complex::new(1.0, 0.0);
    let zn = z.map(|row| row.map(|v| v / z0));
    let minus = [[zn[0][0] - one, zn[0][1]], [zn[1][0], zn[1][1] - one]];
    let plus = [[zn[0][0] + one, zn[0][1]], [zn[1][0], zn[1][1] + one]];
    let inv = inverse(&plus).ok_or_else(|| Error::Degenerate(format!("Z/Z0 + I is singular at {frequency} Hz")))?;
    TwoPortRecord::new(frequency, mul(&minus, &inv), z0)
}

/// Port quantities with port 2 loaded and unit voltage on port 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoadedTwoPort {
    pub eta: f64,
    pub i1: Complex,
    pub i2: Complex,
    pub z_in: Complex,
}

/// Efficiency of a two-port (impedance form) terminated in `r_l`.
pub fn efficiency_from_z(z: &Matrix2, r_l: f64) -> Result<LoadedTwoPort> {
    if !(r_l > 0.0 && r_l.is_finite()) {
        return Err(Error::invalid(format!("load resistance must be positive, got {r_l}")));
    }
    let z22l = z[1][1] + r_l;
    if z22l.norm() == 0.0 {
        return Err(Error::Degenerate("Z22 + R_L is zero".into()));
    }
    let z_in = z[0][0] - z[0][1] * z[1][0] / z22l;
    if z_in.norm() == 0.0 || !z_in.is_finite() {
        return Err(Error::Degenerate("input impedance is zero".into()));
    }
    let i1 = Complex::new(1.0, 0.0) / z_in;
    let i2 = -z[1][0] * i1 / z22l;
    let p_in = i1.conj().re;
    let eta = i2.norm_sqr() * r_l / p_in;
    Ok(LoadedTwoPort { eta, i1, i2, z_in })
}

/// Loaded efficiency of a measured record; `eta >= 1` is logged as a
/// measurement anomaly.
pub fn efficiency_from_two_port(record: &TwoPortRecord, r_l: f64) -> Result<LoadedTwoPort> {
    let out = efficiency_from_z(&s_to_z(record)?, r_l)?;
    if !(out.eta < 1.0) {
        warn!("non-passive data at {} Hz: efficiency {} >= 1", record.frequency, out.eta);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalLoad {
    pub load_resistance: f64,
    pub eta: f64,
}

/// Load in `[lo, hi]` maximising efficiency (golden-section search in
/// `ln R_L`; assumes a single peak in the interval).
pub fn max_efficiency_load(record: &TwoPortRecord, lo: f64, hi: f64) -> Result<OptimalLoad> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(format!("bad load interval [{lo}, {hi}]")));
    }
    let z = s_to_z(record)?;
    let eta = |x: f64| efficiency_from_z(&z, x.exp()).map(|l| l.eta);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (eta(c)?, eta(d)?);
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eta(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eta(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok(OptimalLoad { load_resistance: x.exp(), eta: eta(x)? })
}

/// Per-frequency loaded results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IngestRow {
    pub frequency: f64,
    pub eta: f64,
    pub i1_abs: f64,
    pub i2_abs: f64,
}

pub fn ingest(records: &[TwoPortRecord], r_l: f64) -> Result<Vec<IngestRow>> {
    records
        .iter()
        .map(|r| {
            let l = efficiency_from_two_port(r, r_l)?;
            Ok(IngestRow { frequency: r.frequency, eta: l.eta, i1_abs: l.i1.norm(), i2_abs: l.i2.norm() })
        })
        .collect()
}

/// Row of maximum efficiency within `+-rel_window` of `f_center`.
pub fn best_near(rows: &[IngestRow], f_center: f64, rel_window: f64) -> Option<IngestRow> {
    rows.iter()
        .filter(|r| (r.frequency - f_center).abs() <= rel_window * f_center)
        .copied()
        .max_by(|a, b| a.eta.total_cmp(&b.eta))
}

/// S-parameters of a circuit's two-port reduction (transmitters in
/// parallel on port 1, receiver without load on port 2).
pub fn export_two_port(system: &WptSystem, frequencies: &[f64], z0: f64) -> Result<Vec<TwoPortRecord>> {
    frequencies.iter().map(|&f| z_to_s(&two_port_impedance(system, 2.0 * PI * f)?, z0, f)).collect()
}
