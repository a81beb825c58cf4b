//! Linear transmitter/repeater array and receiver-position sweeps.
//!
//! Transmitters sit at `z = 0` with centres `y_i = i d0`, repeaters directly
//! above them at `z_tx_rp`, and the receiver moves along `y` at
//! `z_tx_rp + z_rp_rx`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::load_for_delta;
use crate::circuit::{solve_currents, tune_capacitance, Resonator, Role, WptSystem};
use crate::geometry::{coil_mutual_with, coil_self_inductance_with, Point3, Quadrature, SpiralCoil};
use crate::{Complex, Error, Result};

/// Design adjacent-coil spacing of the reference array (m).
pub const TABLE2_SPACING: f64 = 57.55e-3;
/// Transmitter-to-repeater gap of the reference array (m).
pub const TABLE2_Z_TX_RP: f64 = 10e-3;
/// Default number of sweep positions.
pub const DEFAULT_STEPS: usize = 61;
/// Default load (ohm): the value putting the aligned single channel at
/// `z_rp_rx = 50 mm` at `Delta = 0.1`. Reconstructed, not measured; see
/// [`reconstructed_load_resistance`].
pub const DEFAULT_LOAD_RESISTANCE: f64 = 12.50;
/// Default operating frequency (Hz).
pub const DEFAULT_FREQUENCY: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// Every geometric mutual inductance is kept.
    Practical,
    /// Couplings between different channels are forced to zero.
    Ideal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearArrayLayout {
    pub n_channels: usize,
    /// Adjacent-coil spacing `d0` (m).
    pub channel_spacing: f64,
    pub z_tx_rp: f64,
    pub z_rp_rx: f64,
    pub coil: SpiralCoil,
    pub coupling_mode: CouplingMode,
}

impl LinearArrayLayout {
    /// Four channels of the reference coil at the design spacing.
    pub fn table2(z_rp_rx: f64) -> Self {
        LinearArrayLayout {
            n_channels: 4,
            channel_spacing: TABLE2_SPACING,
            z_tx_rp: TABLE2_Z_TX_RP,
            z_rp_rx,
            coil: SpiralCoil::reference(),
            coupling_mode: CouplingMode::Practical,
        }
    }

    pub fn with_mode(mut self, mode: CouplingMode) -> Self {
        self.coupling_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_channels == 0 {
            return Err(Error::invalid("at least one channel required"));
        }
        for (name, v) in [("channel spacing", self.channel_spacing), ("z_tx_rp", self.z_tx_rp), ("z_rp_rx", self.z_rp_rx)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        self.coil.validate()
    }

    pub fn tx_center(&self, i: usize) -> Point3 {
        Point3::new(0.0, i as f64 * self.channel_spacing, 0.0)
    }

    pub fn rp_center(&self, i: usize) -> Point3 {
        Point3::new(0.0, i as f64 * self.channel_spacing, self.z_tx_rp)
    }

    /// Receiver height above the transmitter plane.
    pub fn rx_height(&self) -> f64 {
        self.z_tx_rp + self.z_rp_rx
    }

    /// `y` of the last transmitter.
    pub fn span(&self) -> f64 {
        (self.n_channels - 1) as f64 * self.channel_spacing
    }
}

/// Per-coil electrical data. A missing inductance is computed from the
/// coil geometry; a missing `f0` means "tune to the operating frequency".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoilElectrical {
    pub inductance: Option<f64>,
    pub resistance: f64,
    pub f0: Option<f64>,
}

impl CoilElectrical {
    pub fn measured(inductance_uh: f64, resistance_mohm: f64, f0_mhz: f64) -> Self {
        CoilElectrical { inductance: Some(inductance_uh * 1e-6), resistance: resistance_mohm * 1e-3, f0: Some(f0_mhz * 1e6) }
    }

    pub fn from_resistance(resistance: f64) -> Self {
        CoilElectrical { inductance: None, resistance, f0: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tuning {
    /// Every capacitor resonates its coil at the operating frequency.
    Common,
    /// Capacitors reproduce each coil's own `f0` (falls back to common).
    Measured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayElectrical {
    pub tx: Vec<CoilElectrical>,
    pub rp: Vec<CoilElectrical>,
    pub rx: CoilElectrical,
    pub frequency: f64,
    pub tuning: Tuning,
    pub source_voltage: f64,
    pub load_resistance: f64,
}

impl ArrayElectrical {
    /// Measured values of the four-channel prototype.
    pub fn table3() -> Self {
        ArrayElectrical {
            tx: vec![
                CoilElectrical::measured(4.64, 55.0, 0.9972),
                CoilElectrical::measured(4.69, 53.0, 0.9968),
                CoilElectrical::measured(4.69, 55.0, 0.9990),
                CoilElectrical::measured(4.90, 67.0, 0.9990),
            ],
            rp: vec![
                CoilElectrical::measured(4.70, 49.0, 1.0024),
                CoilElectrical::measured(4.58, 52.0, 0.9930),
                CoilElectrical::measured(4.61, 57.0, 0.9988),
                CoilElectrical::measured(4.73, 65.0, 1.0024),
            ],
            rx: CoilElectrical::measured(4.47, 42.0, 1.0020),
            frequency: DEFAULT_FREQUENCY,
            tuning: Tuning::Common,
            source_voltage: 1.0,
            load_resistance: DEFAULT_LOAD_RESISTANCE,
        }
    }

    /// Identical coils with geometry-derived inductance.
    pub fn uniform(n_channels: usize, resistance: f64) -> Self {
        let c = CoilElectrical::from_resistance(resistance);
        ArrayElectrical {
            tx: vec![c; n_channels],
            rp: vec![c; n_channels],
            rx: c,
            frequency: DEFAULT_FREQUENCY,
            tuning: Tuning::Common,
            source_voltage: 1.0,
            load_resistance: DEFAULT_LOAD_RESISTANCE,
        }
    }

    pub fn with_load(mut self, r_l: f64) -> Self {
        self.load_resistance = r_l;
        self
    }

    pub fn with_tuning(mut self, tuning: Tuning) -> Self {
        self.tuning = tuning;
        self
    }

    pub fn validate(&self, n_channels: usize) -> Result<()> {
        if self.tx.len() != n_channels || self.rp.len() != n_channels {
            return Err(Error::LengthMismatch(format!(
                "{n_channels} channels but {} Tx and {} repeater entries",
                self.tx.len(),
                self.rp.len()
            )));
        }
        for c in self.tx.iter().chain(&self.rp).chain(std::iter::once(&self.rx)) {
            if let Some(l) = c.inductance {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(Error::invalid(format!("inductance must be positive, got {l}")));
                }
            }
            if let Some(f) = c.f0 {
                if !(f > 0.0 && f.is_finite()) {
                    return Err(Error::invalid(format!("f0 must be positive, got {f}")));
                }
            }
            if !(c.resistance >= 0.0 && c.resistance.is_finite()) {
                return Err(Error::invalid(format!("resistance must be non-negative, got {}", c.resistance)));
            }
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::invalid(format!("frequency must be positive, got {}", self.frequency)));
        }
        if !(self.load_resistance > 0.0 && self.load_resistance.is_finite()) {
            return Err(Error::invalid(format!("load resistance must be positive, got {}", self.load_resistance)));
        }
        Ok(())
    }

    fn resonator(&self, role: Role, c: &CoilElectrical, geometric_l: f64) -> Result<Resonator> {
        let l = c.inductance.unwrap_or(geometric_l);
        let f_tune = match self.tuning {
            Tuning::Common => self.frequency,
            Tuning::Measured => c.f0.unwrap_or(self.frequency),
        };
        Resonator::new(role, l, tune_capacitance(l, f_tune)?, c.resistance)
    }
}

/// Load resistance that puts the aligned single channel (Tx at 0, repeater
/// at `z_tx_rp`, receiver `z_rp_rx` above it) at the given `Delta`.
pub fn reconstructed_load_resistance(
    quad: &Quadrature,
    coil: &SpiralCoil,
    z_tx_rp: f64,
    z_rp_rx: f64,
    delta: f64,
    frequency: f64,
) -> Result<f64> {
    let tx = (*coil).at(Point3::ORIGIN);
    let rp = (*coil).at(Point3::new(0.0, 0.0, z_tx_rp));
    let rx = (*coil).at(Point3::new(0.0, 0.0, z_tx_rp + z_rp_rx));
    let m_tx_rp = coil_mutual_with(quad, &tx, &rp)?;
    let m_tx_rx = coil_mutual_with(quad, &tx, &rx)?;
    let m_rp_rx = coil_mutual_with(quad, &rp, &rx)?;
    load_for_delta(delta, m_tx_rp, m_tx_rx, m_rp_rx, 2.0 * std::f64::consts::PI * frequency)
}

/// Builds circuit systems for arbitrary receiver positions with the fixed
/// array couplings computed once.
#[derive(Debug, Clone)]
pub struct ArrayFactory {
    layout: LinearArrayLayout,
    quad: Quadrature,
    /// Transmitters, then repeaters (if any), then the receiver.
    resonators: Vec<Resonator>,
    /// Array couplings, `n_array x n_array`.
    fixed: Vec<Vec<f64>>,
    with_repeaters: bool,
    source_voltage: f64,
    load_resistance: f64,
    frequency: f64,
    rx_height: f64,
}

/// Precomputes the array for the proposed system.
pub fn build_array_system(layout: &LinearArrayLayout, electrical: &ArrayElectrical) -> Result<ArrayFactory> {
    ArrayFactory::new(layout, electrical, Quadrature::default(), true)
}

impl ArrayFactory {
    pub fn new(
        layout: &LinearArrayLayout,
        electrical: &ArrayElectrical,
        quad: Quadrature,
        with_repeaters: bool,
    ) -> Result<Self> {
        layout.validate()?;
        electrical.validate(layout.n_channels)?;
        let n = layout.n_channels;
        let needs_geometric_l = electrical.tx.iter().chain(&electrical.rp).chain([&electrical.rx]).any(|c| c.inductance.is_none());
        let geometric_l = if needs_geometric_l { coil_self_inductance_with(&quad, &layout.coil)? } else { f64::NAN };

        let mut resonators = Vec::new();
        let mut coils = Vec::new();
        for (i, c) in electrical.tx.iter().enumerate() {
            let coil = layout.coil.at(layout.tx_center(i));
            resonators.push(electrical.resonator(Role::Tx, c, geometric_l)?.with_coil(coil));
            coils.push(coil);
        }
        if with_repeaters {
            for (i, c) in electrical.rp.iter().enumerate() {
                let coil = layout.coil.at(layout.rp_center(i));
                resonators.push(electrical.resonator(Role::Repeater, c, geometric_l)?.with_coil(coil));
                coils.push(coil);
            }
        }
        resonators.push(electrical.resonator(Role::Rx, &electrical.rx, geometric_l)?);

        let na = coils.len();
        let mut fixed = vec![vec![0.0; na]; na];
        for i in 0..na {
            for j in 0..i {
                let m = if layout.coupling_mode == CouplingMode::Ideal && i % n != j % n {
                    0.0
                } else {
                    coil_mutual_with(&quad, &coils[i], &coils[j])?
                };
                fixed[i][j] = m;
                fixed[j][i] = m;
            }
        }
        // without repeaters the receiver rides z_rp_rx above the transmitters
        let rx_height = if with_repeaters { layout.rx_height() } else { layout.z_rp_rx };
        Ok(ArrayFactory {
            layout: layout.clone(),
            quad,
            resonators,
            fixed,
            with_repeaters,
            source_voltage: electrical.source_voltage,
            load_resistance: electrical.load_resistance,
            frequency: electrical.frequency,
            rx_height,
        })
    }

    /// Same transmitters and receiver with the repeater row removed.
    pub fn conventional(layout: &LinearArrayLayout, electrical: &ArrayElectrical) -> Result<Self> {
        ArrayFactory::new(layout, electrical, Quadrature::default(), false)
    }

    pub fn layout(&self) -> &LinearArrayLayout {
        &self.layout
    }

    pub fn has_repeaters(&self) -> bool {
        self.with_repeaters
    }

    pub fn rx_height(&self) -> f64 {
        self.rx_height
    }

    /// Array-to-array mutual inductance (H).
    pub fn array_mutual(&self, i: usize, j: usize) -> f64 {
        self.fixed[i][j]
    }

    /// System with the receiver at lateral position `y` at the default height.
    pub fn at(&self, y: f64) -> Result<WptSystem> {
        self.at_position(y, self.rx_height)
    }

    /// System with the receiver centred at `(0, y, z)`.
    pub fn at_position(&self, y: f64, z: f64) -> Result<WptSystem> {
        if !y.is_finite() || !z.is_finite() {
            return Err(Error::invalid("receiver position must be finite"));
        }
        let rx_coil = self.layout.coil.at(Point3::new(0.0, y, z));
        let na = self.fixed.len();
        let mut m = vec![vec![0.0; na + 1]; na + 1];
        for i in 0..na {
            m[i][..na].copy_from_slice(&self.fixed[i]);
            let coil = self.resonators[i].coil.as_ref().expect("array coils carry geometry");
            let mi = coil_mutual_with(&self.quad, coil, &rx_coil)?;
            m[i][na] = mi;
            m[na][i] = mi;
        }
        let mut resonators = self.resonators.clone();
        resonators[na].coil = Some(rx_coil);
        WptSystem::new(resonators, m, self.source_voltage, self.load_resistance, self.frequency)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Each current trace divided by its own maximum over the sweep.
    PerTraceMax,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub y_start: f64,
    pub y_end: f64,
    pub steps: usize,
    pub normalization: Normalization,
}

impl SweepSpec {
    /// From the first to the last transmitter centre.
    pub fn across(layout: &LinearArrayLayout) -> Self {
        SweepSpec { y_start: 0.0, y_end: layout.span(), steps: DEFAULT_STEPS, normalization: Normalization::PerTraceMax }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::invalid(format!("a sweep needs at least 2 steps, got {}", self.steps)));
        }
        if !self.y_start.is_finite() || !self.y_end.is_finite() {
            return Err(Error::invalid("sweep bounds must be finite"));
        }
        Ok(())
    }

    pub fn positions(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.y_end } else { self.y_start + (self.y_end - self.y_start) * k as f64 / last })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub y: f64,
    pub y_over_d0: f64,
    /// Transmitters, repeaters, receiver.
    pub currents: Vec<Complex>,
    pub input_current: Complex,
    pub p_in: f64,
    pub p_out: f64,
    pub efficiency: f64,
    pub xi_tx: f64,
    pub xi_rp: f64,
    pub xi_rx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trace {
    Tx(usize),
    Rp(usize),
    Rx,
    Input,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub n_channels: usize,
    pub has_repeaters: bool,
    pub d0: f64,
    pub normalization: Normalization,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Every current trace in column order.
    pub fn traces(&self) -> Vec<Trace> {
        let mut t: Vec<Trace> = (0..self.n_channels).map(Trace::Tx).collect();
        if self.has_repeaters {
            t.extend((0..self.n_channels).map(Trace::Rp));
        }
        t.extend([Trace::Rx, Trace::Input]);
        t
    }

    /// Current magnitude along the sweep (A).
    pub fn magnitudes(&self, trace: Trace) -> Vec<f64> {
        let n = self.n_channels;
        let rx = if self.has_repeaters { 2 * n } else { n };
        self.rows
            .iter()
            .map(|r| match trace {
                Trace::Tx(i) => r.currents[i].norm(),
                Trace::Rp(i) => r.currents[n + i].norm(),
                Trace::Rx => r.currents[rx].norm(),
                Trace::Input => r.input_current.norm(),
            })
            .collect()
    }

    /// Magnitudes under the result's normalization.
    pub fn normalized(&self, trace: Trace) -> Vec<f64> {
        let m = self.magnitudes(trace);
        match self.normalization {
            Normalization::None => m,
            Normalization::PerTraceMax => per_trace_max(m),
        }
    }

    pub fn efficiencies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.efficiency).collect()
    }

    /// `max - min` of the efficiency.
    pub fn efficiency_spread(&self) -> f64 {
        let e = self.efficiencies();
        max(&e) - min(&e)
    }

    /// `(max - min) / max` of a current magnitude trace.
    pub fn relative_variation(&self, trace: Trace) -> f64 {
        let m = self.magnitudes(trace);
        let hi = max(&m);
        if hi > 0.0 {
            (hi - min(&m)) / hi
        } else {
            0.0
        }
    }
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn per_trace_max(v: Vec<f64>) -> Vec<f64> {
    let hi = max(&v);
    if hi > 0.0 {
        v.into_iter().map(|x| x / hi).collect()
    } else {
        v
    }
}

/// Solves the circuit at every position of `spec`, in parallel.
pub fn sweep_receiver(factory: &ArrayFactory, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let d0 = factory.layout.channel_spacing;
    let rows = spec
        .positions()
        .into_par_iter()
        .map(|y| solve_row(factory, y, d0).map_err(|e| Error::AtPosition { y_m: y, source: Box::new(e) }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        n_channels: factory.layout.n_channels,
        has_repeaters: factory.with_repeaters,
        d0,
        normalization: spec.normalization,
        rows,
    })
}

fn solve_row(factory: &ArrayFactory, y: f64, d0: f64) -> Result<SweepRow> {
    let system = factory.at(y)?;
    let sol = solve_currents(&system, system.omega())?;
    Ok(SweepRow {
        y,
        y_over_d0: y / d0,
        input_current: sol.input_current,
        p_in: sol.p_in,
        p_out: sol.p_out,
        efficiency: sol.efficiency,
        xi_tx: sol.loss_ratio(Role::Tx),
        xi_rp: sol.loss_ratio(Role::Repeater),
        xi_rx: sol.loss_ratio(Role::Rx),
        currents: sol.currents,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub ideal: SweepResult,
    pub practical: SweepResult,
    /// Largest absolute difference between per-trace-max normalized
    /// current magnitudes, over all traces and positions.
    pub max_deviation: f64,
}

/// Runs the layout with and without inter-channel coupling.
pub fn compare_ideal_practical(
    layout: &LinearArrayLayout,
    electrical: &ArrayElectrical,
    spec: &SweepSpec,
) -> Result<Comparison> {
    let ideal = sweep_receiver(&build_array_system(&layout.clone().with_mode(CouplingMode::Ideal), electrical)?, spec)?;
    let practical =
        sweep_receiver(&build_array_system(&layout.clone().with_mode(CouplingMode::Practical), electrical)?, spec)?;
    let max_deviation = max_normalized_deviation(&ideal, &practical);
    Ok(Comparison { ideal, practical, max_deviation })
}

/// Largest per-trace-max normalized difference between two sweeps of the
/// same shape.
pub fn max_normalized_deviation(a: &SweepResult, b: &SweepResult) -> f64 {
    a.traces()
        .into_iter()
        .flat_map(|t| {
            let x = per_trace_max(a.magnitudes(t));
            let y = per_trace_max(b.magnitudes(t));
            x.into_iter().zip(y).map(|(p, q)| (p - q).abs()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Sweep of the same transmitters and receiver without repeaters.
pub fn conventional_baseline(
    layout: &LinearArrayLayout,
    electrical: &ArrayElectrical,
    spec: &SweepSpec,
) -> Result<SweepResult> {
    sweep_receiver(&ArrayFactory::conventional(layout, electrical)?, spec)
}

/// Coupling coefficient between a coil at the origin and a copy offset
/// laterally by each of `offsets` and axially by `z`. A copy that lands
/// exactly on the original is the coil itself, k = 1.
pub fn coupling_curve(coil: &SpiralCoil, z: f64, offsets: &[f64]) -> Result<Vec<f64>> {
    let quad = Quadrature::default();
    let base = (*coil).at(Point3::ORIGIN);
    let l = coil_self_inductance_with(&quad, coil)?;
    offsets
        .par_iter()
        .map(|&y| {
            if y == 0.0 && z == 0.0 {
                return Ok(1.0);
            }
            coil_mutual_with(&quad, &base, &(*coil).at(Point3::new(0.0, y, z))).map(|m| m / l)
        })
        .collect()
}
