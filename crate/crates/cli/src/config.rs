//! JSON run configuration. Every section is optional and defaults to the
//! reference coil, the nominal array and the measured coil table.
//! Units are carried in the field names.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use wptsim::geometry::SpiralCoil;
use wptsim::sweep::{
    ArrayElectrical, CoilElectrical, CouplingMode, LinearArrayLayout, Normalization, SweepSpec, Tuning,
    DEFAULT_LOAD_RESISTANCE, DEFAULT_STEPS, TABLE2_SPACING, TABLE2_Z_TX_RP,
};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Syntax { path: PathBuf, source: serde_json::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub coil: CoilConfig,
    pub layout: LayoutConfig,
    pub electrical: ElectricalConfig,
    pub source_voltage_v: f64,
    pub load_resistance_ohm: f64,
    pub frequency_mhz: f64,
    pub sweep: SweepConfig,
    pub d0: D0Config,
    pub coupling_curve: CurveConfig,
    pub ingest: IngestConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            coil: CoilConfig::default(),
            layout: LayoutConfig::default(),
            electrical: ElectricalConfig::default(),
            source_voltage_v: 1.0,
            load_resistance_ohm: DEFAULT_LOAD_RESISTANCE,
            frequency_mhz: 1.0,
            sweep: SweepConfig::default(),
            d0: D0Config::default(),
            coupling_curve: CurveConfig::default(),
            ingest: IngestConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoilConfig {
    pub outer_diameter_mm: f64,
    pub turns: u32,
    pub radial_pitch_mm: f64,
    pub wire_diameter_mm: f64,
}

impl Default for CoilConfig {
    fn default() -> Self {
        CoilConfig { outer_diameter_mm: 100.0, turns: 8, radial_pitch_mm: 4.0, wire_diameter_mm: 2.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutConfig {
    pub n_channels: usize,
    pub channel_spacing_mm: f64,
    pub z_tx_rp_mm: f64,
    pub z_rp_rx_mm: f64,
    pub coupling_mode: CouplingMode,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            n_channels: 4,
            channel_spacing_mm: TABLE2_SPACING * 1e3,
            z_tx_rp_mm: TABLE2_Z_TX_RP * 1e3,
            z_rp_rx_mm: 20.0,
            coupling_mode: CouplingMode::Practical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElectricalPreset {
    /// Measured inductance, resistance and f0 of the four-channel prototype.
    Table3,
    /// Identical coils, inductance from geometry.
    Geometric,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilOverride {
    pub inductance_uh: Option<f64>,
    pub resistance_mohm: Option<f64>,
    pub f0_mhz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ElectricalConfig {
    pub preset: ElectricalPreset,
    /// Coil resistance for the geometric preset.
    pub resistance_mohm: f64,
    pub tuning: Tuning,
    /// Keyed `tx1`..`txN`, `rp1`..`rpN`, `rx`.
    pub coils: BTreeMap<String, CoilOverride>,
}

impl Default for ElectricalConfig {
    fn default() -> Self {
        ElectricalConfig { preset: ElectricalPreset::Table3, resistance_mohm: 55.0, tuning: Tuning::Common, coils: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub y_start_mm: f64,
    /// Defaults to the last transmitter centre.
    pub y_end_mm: Option<f64>,
    pub steps: usize,
    pub normalization: Normalization,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { y_start_mm: 0.0, y_end_mm: None, steps: DEFAULT_STEPS, normalization: Normalization::PerTraceMax }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct D0Config {
    pub axial_gap_mm: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveConfig {
    pub offset_max_mm: f64,
    pub steps: usize,
    pub z_mm: Vec<f64>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig { offset_max_mm: 180.0, steps: 181, z_mm: vec![0.0, 10.0, 20.0, 50.0] }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestConfig {
    /// Touchstone file, relative to the config file.
    pub path: Option<PathBuf>,
    /// Half-width of the window around the operating frequency searched
    /// for the best efficiency, in percent.
    pub window_percent: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub svg: bool,
}

impl RunConfig {
    /// Reads a config; relative paths inside it resolve against its folder.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Syntax { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(p) = cfg.ingest.path.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = cfg.output.dir.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn coil(&self) -> Result<SpiralCoil, ConfigError> {
        let c = &self.coil;
        SpiralCoil::new(c.outer_diameter_mm * 1e-3, c.turns, c.radial_pitch_mm * 1e-3, c.wire_diameter_mm * 1e-3)
            .map_err(|e| invalid(format!("coil: {e}")))
    }

    pub fn frequency_hz(&self) -> Result<f64, ConfigError> {
        positive("frequency_mhz", self.frequency_mhz).map(|f| f * 1e6)
    }

    pub fn layout(&self) -> Result<LinearArrayLayout, ConfigError> {
        let l = &self.layout;
        let layout = LinearArrayLayout {
            n_channels: l.n_channels,
            channel_spacing: l.channel_spacing_mm * 1e-3,
            z_tx_rp: l.z_tx_rp_mm * 1e-3,
            z_rp_rx: l.z_rp_rx_mm * 1e-3,
            coil: self.coil()?,
            coupling_mode: l.coupling_mode,
        };
        layout.validate().map_err(|e| invalid(format!("layout: {e}")))?;
        Ok(layout)
    }

    pub fn electrical(&self) -> Result<ArrayElectrical, ConfigError> {
        let n = self.layout.n_channels;
        let e = &self.electrical;
        let mut out = match e.preset {
            ElectricalPreset::Table3 => {
                if n != 4 {
                    return Err(invalid(format!("the table3 preset describes 4 channels, layout has {n}")));
                }
                ArrayElectrical::table3()
            }
            ElectricalPreset::Geometric => {
                let r = non_negative("electrical.resistance_mohm", e.resistance_mohm)? * 1e-3;
                ArrayElectrical::uniform(n, r)
            }
        };
        for (key, o) in &e.coils {
            let slot = coil_slot(&mut out, key, n)?;
            if let Some(l) = o.inductance_uh {
                slot.inductance = Some(positive(&format!("{key}.inductance_uh"), l)? * 1e-6);
            }
            if let Some(r) = o.resistance_mohm {
                slot.resistance = non_negative(&format!("{key}.resistance_mohm"), r)? * 1e-3;
            }
            if let Some(f) = o.f0_mhz {
                slot.f0 = Some(positive(&format!("{key}.f0_mhz"), f)? * 1e6);
            }
        }
        out.tuning = e.tuning;
        out.frequency = self.frequency_hz()?;
        if !self.source_voltage_v.is_finite() {
            return Err(invalid("source_voltage_v must be finite"));
        }
        out.source_voltage = self.source_voltage_v;
        out.load_resistance = positive("load_resistance_ohm", self.load_resistance_ohm)?;
        out.validate(n).map_err(|e| invalid(format!("electrical: {e}")))?;
        Ok(out)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let s = &self.sweep;
        let span = self.layout.channel_spacing_mm * self.layout.n_channels.saturating_sub(1) as f64;
        let spec = SweepSpec {
            y_start: s.y_start_mm * 1e-3,
            y_end: s.y_end_mm.unwrap_or(span) * 1e-3,
            steps: s.steps,
            normalization: s.normalization,
        };
        spec.validate().map_err(|e| invalid(format!("sweep: {e}")))?;
        Ok(spec)
    }

    pub fn axial_gap(&self) -> Result<f64, ConfigError> {
        non_negative("d0.axial_gap_mm", self.d0.axial_gap_mm).map(|g| g * 1e-3)
    }

    /// Offsets (m) and heights (m) of the coupling curve.
    pub fn curve(&self) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
        let c = &self.coupling_curve;
        let max = positive("coupling_curve.offset_max_mm", c.offset_max_mm)?;
        if c.steps < 2 {
            return Err(invalid(format!("coupling_curve.steps must be at least 2, got {}", c.steps)));
        }
        if c.z_mm.is_empty() {
            return Err(invalid("coupling_curve.z_mm is empty"));
        }
        for &z in &c.z_mm {
            non_negative("coupling_curve.z_mm", z)?;
        }
        let offsets = (0..c.steps).map(|k| max * 1e-3 * k as f64 / (c.steps - 1) as f64).collect();
        Ok((offsets, c.z_mm.iter().map(|z| z * 1e-3).collect()))
    }

    pub fn ingest_window(&self) -> Result<f64, ConfigError> {
        positive("ingest.window_percent", self.ingest.window_percent.unwrap_or(2.0)).map(|w| w / 100.0)
    }
}

fn coil_slot<'a>(e: &'a mut ArrayElectrical, key: &str, n: usize) -> Result<&'a mut CoilElectrical, ConfigError> {
    let bad = || invalid(format!("unknown coil {key:?}; expected tx1..tx{n}, rp1..rp{n} or rx"));
    if key == "rx" {
        return Ok(&mut e.rx);
    }
    let (list, idx) = if let Some(i) = key.strip_prefix("tx") {
        (&mut e.tx, i)
    } else if let Some(i) = key.strip_prefix("rp") {
        (&mut e.rp, i)
    } else {
        return Err(bad());
    };
    let i: usize = idx.parse().map_err(|_| bad())?;
    if i == 0 || i > n {
        return Err(bad());
    }
    Ok(&mut list[i - 1])
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be non-negative, got {v}")))
    }
}
