//! Self and mutual inductance of planar spiral coils.
//!
//! A spiral is modelled as concentric circular filaments, one per turn. All
//! coil axes are parallel to `z`, so a pair of filaments is described by
//! their radii, the lateral distance `rho` between their centres and the
//! axial offset `z`.
//!
//! The Neumann double integral over the two loop angles is reduced to a
//! single integral: at fixed angle difference `u` the integral over the
//! remaining angle is a complete elliptic integral of the first kind. The
//! remaining integral over `u` is smooth except near angles where the two
//! filaments come close (or cross, when `z = 0`); those angles are made
//! panel endpoints of a tanh-sinh rule, which absorbs the logarithmic peak.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::quadrature::TanhSinh;
use crate::roots::find_crossing;
use crate::{Error, Result, MU_0};

/// Default tanh-sinh level for the mutual-inductance integral
/// (step `2^-4`, about 200 nodes per panel).
pub const DEFAULT_QUADRATURE_LEVEL: u32 = 4;

/// Absolute tolerance on the uncoupling distance (m).
pub const UNCOUPLING_XTOL: f64 = 10e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A circular current filament with its axis along `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilamentLoop {
    pub radius: f64,
    pub center: Point3,
}

impl FilamentLoop {
    pub fn new(radius: f64, center: Point3) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::invalid(format!("filament radius must be positive, got {radius}")));
        }
        Ok(FilamentLoop { radius, center })
    }

    /// Lateral and axial separation of the two centres.
    fn offsets(&self, other: &FilamentLoop) -> (f64, f64) {
        let dx = other.center.x - self.center.x;
        let dy = other.center.y - self.center.y;
        (dx.hypot(dy), (other.center.z - self.center.z).abs())
    }
}

/// Planar circular spiral: turns are concentric, radially pitched filaments
/// in the plane `z = center.z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralCoil {
    pub outer_diameter: f64,
    pub turns: u32,
    pub radial_pitch: f64,
    pub wire_diameter: f64,
    pub center: Point3,
}

impl SpiralCoil {
    pub fn new(outer_diameter: f64, turns: u32, radial_pitch: f64, wire_diameter: f64) -> Result<Self> {
        let coil = SpiralCoil { outer_diameter, turns, radial_pitch, wire_diameter, center: Point3::ORIGIN };
        coil.validate()?;
        Ok(coil)
    }

    /// The prototype coil: 100 mm outer diameter, 8 turns, 4 mm pitch,
    /// 2 mm wire.
    pub fn reference() -> Self {
        SpiralCoil {
            outer_diameter: 0.100,
            turns: 8,
            radial_pitch: 0.004,
            wire_diameter: 0.002,
            center: Point3::ORIGIN,
        }
    }

    pub fn at(mut self, center: Point3) -> Self {
        self.center = center;
        self
    }

    /// Same coil with every length multiplied by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.outer_diameter *= factor;
        self.radial_pitch *= factor;
        self.wire_diameter *= factor;
        self.center = Point3::new(self.center.x * factor, self.center.y * factor, self.center.z * factor);
        self
    }

    pub fn wire_radius(&self) -> f64 {
        0.5 * self.wire_diameter
    }

    pub fn inner_radius(&self) -> f64 {
        0.5 * self.outer_diameter - f64::from(self.turns.saturating_sub(1)) * self.radial_pitch
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("outer_diameter", self.outer_diameter),
            ("radial_pitch", self.radial_pitch),
            ("wire_diameter", self.wire_diameter),
        ];
        for (name, v) in lengths {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.turns == 0 {
            return Err(Error::invalid("turns must be at least 1"));
        }
        if !self.center.is_finite() {
            return Err(Error::invalid("coil centre must be finite"));
        }
        if self.inner_radius() <= self.wire_radius() {
            return Err(Error::invalid(format!(
                "innermost turn radius {:.6e} m does not exceed the wire radius {:.6e} m",
                self.inner_radius(),
                self.wire_radius()
            )));
        }
        Ok(())
    }
}

/// Quadrature used for filament mutual inductance.
#[derive(Debug, Clone)]
pub struct Quadrature {
    rule: TanhSinh,
}

impl Quadrature {
    pub fn new(level: u32) -> Self {
        Quadrature { rule: TanhSinh::new(level) }
    }

    pub fn level(&self) -> u32 {
        self.rule.level()
    }

    /// Shared instance at [`DEFAULT_QUADRATURE_LEVEL`].
    pub fn shared() -> &'static Quadrature {
        static DEFAULT: OnceLock<Quadrature> = OnceLock::new();
        DEFAULT.get_or_init(|| Quadrature::new(DEFAULT_QUADRATURE_LEVEL))
    }
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::new(DEFAULT_QUADRATURE_LEVEL)
    }
}

/// Splits a spiral into one filament per turn, outermost first.
pub fn decompose_to_filaments(coil: &SpiralCoil) -> Result<Vec<FilamentLoop>> {
    coil.validate()?;
    (0..coil.turns)
        .map(|k| FilamentLoop::new(0.5 * coil.outer_diameter - f64::from(k) * coil.radial_pitch, coil.center))
        .collect()
}

/// Complete elliptic integral of the first kind `K(m)`, taking the
/// complementary parameter `1 - m` so that the logarithmic growth near
/// `m = 1` is resolved without cancellation.
fn ellipk_complement(one_minus_m: f64) -> f64 {
    let mut a = 1.0;
    let mut b = one_minus_m.max(f64::MIN_POSITIVE).sqrt();
    for _ in 0..64 {
        if (a - b).abs() <= 1e-15 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    FRAC_PI_2 / a
}

/// Mutual inductance (H) of two parallel circular filaments.
pub fn filament_mutual(a: &FilamentLoop, b: &FilamentLoop) -> Result<f64> {
    filament_mutual_with(Quadrature::shared(), a, b)
}

pub fn filament_mutual_with(quad: &Quadrature, a: &FilamentLoop, b: &FilamentLoop) -> Result<f64> {
    let (rho, z) = a.offsets(b);
    mutual_by_offsets(quad, a.radius, b.radius, rho, z)
}

fn mutual_by_offsets(quad: &Quadrature, ra: f64, rb: f64, rho: f64, z: f64) -> Result<f64> {
    if rho == 0.0 && z == 0.0 && ra == rb {
        return Err(Error::SingularConfiguration(format!("coincident filaments of radius {ra:.6e} m")));
    }
    let rarb = ra * rb;
    let dr2 = (ra - rb) * (ra - rb);
    let z2 = z * z;
    // With u the angle between the two position vectors, the chord between
    // the loop points is c(u); integrating over the common rotation leaves
    // 4 K(m) / sqrt((c + rho)^2 + z^2) with 1 - m = ((c - rho)^2 + z^2) / ((c + rho)^2 + z^2).
    let integrand = |u: f64| {
        let s = (0.5 * u).sin();
        let chord = (dr2 + 4.0 * rarb * s * s).sqrt();
        let far = (chord + rho) * (chord + rho) + z2;
        let near = (chord - rho) * (chord - rho) + z2;
        u.cos() * ellipk_complement(near / far) / far.sqrt()
    };

    let mut breakpoints = [0.0, PI, PI];
    let mut n = 2;
    if rho > (ra - rb).abs() && rho < ra + rb {
        // chord equals rho: the loops pass closest here (cross, if z == 0)
        let cos_u = ((ra * ra + rb * rb - rho * rho) / (2.0 * rarb)).clamp(-1.0, 1.0);
        breakpoints[1] = cos_u.acos();
        n = 3;
    }
    let integral = quad.rule.integrate_panels(&breakpoints[..n], integrand);
    Ok(2.0 * MU_0 * rarb / PI * integral)
}

/// Mutual inductance (H) of two coils: the sum over all filament pairs.
pub fn coil_mutual(a: &SpiralCoil, b: &SpiralCoil) -> Result<f64> {
    coil_mutual_with(Quadrature::shared(), a, b)
}

pub fn coil_mutual_with(quad: &Quadrature, a: &SpiralCoil, b: &SpiralCoil) -> Result<f64> {
    let fa = decompose_to_filaments(a)?;
    let fb = decompose_to_filaments(b)?;
    let mut total = 0.0;
    for la in &fa {
        for lb in &fb {
            total += filament_mutual_with(quad, la, lb)?;
        }
    }
    Ok(total)
}

/// Low-frequency inductance of a single round-wire loop.
pub fn single_loop_inductance(radius: f64, wire_radius: f64) -> f64 {
    MU_0 * radius * ((8.0 * radius / wire_radius).ln() - 2.0)
}

/// Self-inductance (H): per-turn loop inductance plus all turn-to-turn
/// mutual terms.
pub fn coil_self_inductance(coil: &SpiralCoil) -> Result<f64> {
    coil_self_inductance_with(Quadrature::shared(), coil)
}

pub fn coil_self_inductance_with(quad: &Quadrature, coil: &SpiralCoil) -> Result<f64> {
    let loops = decompose_to_filaments(coil)?;
    let rw = coil.wire_radius();
    let mut total: f64 = loops.iter().map(|l| single_loop_inductance(l.radius, rw)).sum();
    for (i, a) in loops.iter().enumerate() {
        for b in &loops[i + 1..] {
            total += 2.0 * filament_mutual_with(quad, a, b)?;
        }
    }
    Ok(total)
}

/// `M / sqrt(La Lb)`, signed.
pub fn coupling_coefficient(a: &SpiralCoil, b: &SpiralCoil) -> Result<f64> {
    let m = coil_mutual(a, b)?;
    let la = coil_self_inductance(a)?;
    let lb = if same_shape(a, b) { la } else { coil_self_inductance(b)? };
    Ok(m / (la * lb).sqrt())
}

fn same_shape(a: &SpiralCoil, b: &SpiralCoil) -> bool {
    a.outer_diameter == b.outer_diameter
        && a.turns == b.turns
        && a.radial_pitch == b.radial_pitch
        && a.wire_diameter == b.wire_diameter
}

/// Result of the uncoupling-distance search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncouplingDistance {
    /// Lateral offset (m) where the mutual inductance changes sign.
    pub distance: f64,
    pub axial_gap: f64,
    /// Final bracket (m) and the mutual inductance (H) at its ends.
    pub bracket: (f64, f64),
    pub mutual_at_bracket: (f64, f64),
    pub iterations: usize,
    pub evaluations: usize,
}

/// Lateral offset at which two copies of `coil`, separated axially by
/// `axial_gap`, have zero mutual inductance. Searched on
/// `[0.5, 1.5] * outer_diameter` to [`UNCOUPLING_XTOL`].
pub fn find_uncoupling_distance(coil: &SpiralCoil, axial_gap: f64) -> Result<UncouplingDistance> {
    find_uncoupling_distance_with(Quadrature::shared(), coil, axial_gap)
}

pub fn find_uncoupling_distance_with(
    quad: &Quadrature,
    coil: &SpiralCoil,
    axial_gap: f64,
) -> Result<UncouplingDistance> {
    coil.validate()?;
    if !(axial_gap >= 0.0 && axial_gap.is_finite()) {
        return Err(Error::invalid(format!("axial gap must be non-negative, got {axial_gap}")));
    }
    let fixed = coil.at(Point3::ORIGIN);
    let mutual = |offset: f64| -> Result<f64> {
        let moved = coil.at(Point3::new(offset, 0.0, axial_gap));
        coil_mutual_with(quad, &fixed, &moved)
    };
    let lo = 0.5 * coil.outer_diameter;
    let hi = 1.5 * coil.outer_diameter;
    let found = find_crossing(mutual, lo, hi, UNCOUPLING_XTOL).map_err(|e| match e {
        Error::NoSignChange { lo, hi, .. } => Error::NoSignChange { what: "coil mutual inductance".into(), lo, hi },
        other => other,
    })?;
    Ok(UncouplingDistance {
        distance: found.root,
        axial_gap,
        bracket: (found.lo, found.hi),
        mutual_at_bracket: (found.f_lo, found.f_hi),
        iterations: found.iterations,
        evaluations: found.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mm(v: f64) -> f64 {
        v * 1e-3
    }

    #[test]
    fn reference_coil_radii() {
        let radii: Vec<f64> = decompose_to_filaments(&SpiralCoil::reference())
            .unwrap()
            .iter()
            .map(|l| (l.radius * 1e3 * 1e9).round() / 1e9)
            .collect();
        assert_eq!(radii, vec![50.0, 46.0, 42.0, 38.0, 34.0, 30.0, 26.0, 22.0]);
    }

    #[test]
    fn single_turn_is_one_loop() {
        let coil = SpiralCoil::new(mm(80.0), 1, mm(4.0), mm(1.0)).unwrap();
        let loops = decompose_to_filaments(&coil).unwrap();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].radius, mm(40.0));
    }

    #[test]
    fn too_many_turns_rejected() {
        // 13 turns leaves a 2 mm innermost radius, still above the 1 mm wire radius
        let coil = SpiralCoil { turns: 13, ..SpiralCoil::reference() };
        assert_eq!(decompose_to_filaments(&coil).unwrap().len(), 13);
        let coil = SpiralCoil { turns: 14, ..SpiralCoil::reference() };
        assert!(matches!(decompose_to_filaments(&coil), Err(Error::InvalidInput(_))));
        let coil = SpiralCoil { turns: 0, ..SpiralCoil::reference() };
        assert!(coil.validate().is_err());
        let coil = SpiralCoil { wire_diameter: -1.0, ..SpiralCoil::reference() };
        assert!(coil.validate().is_err());
    }

    #[test]
    fn coincident_filaments_are_singular() {
        let a = FilamentLoop::new(mm(50.0), Point3::ORIGIN).unwrap();
        assert!(matches!(filament_mutual(&a, &a), Err(Error::SingularConfiguration(_))));
        let coil = SpiralCoil::reference();
        assert!(matches!(coil_mutual(&coil, &coil), Err(Error::SingularConfiguration(_))));
    }

    #[test]
    fn concentric_coplanar_loops_are_finite() {
        let a = FilamentLoop::new(mm(50.0), Point3::ORIGIN).unwrap();
        let b = FilamentLoop::new(mm(46.0), Point3::ORIGIN).unwrap();
        let m = filament_mutual(&a, &b).unwrap();
        assert!(m.is_finite() && m > 0.0);
    }

    #[test]
    fn ellipk_known_values() {
        assert!((ellipk_complement(1.0) - FRAC_PI_2).abs() < 1e-15);
        // K(m = 0.5)
        assert!((ellipk_complement(0.5) - 1.854_074_677_301_372).abs() < 1e-14);
        // K(m) ~ ln(4 / sqrt(1 - m)) as m -> 1
        let kp2 = 1e-20;
        assert!((ellipk_complement(kp2) - (4.0 / kp2.sqrt()).ln()).abs() < 1e-12);
    }

    #[test]
    fn single_turn_self_inductance_is_the_loop_formula() {
        let coil = SpiralCoil::new(mm(60.0), 1, mm(3.0), mm(1.5)).unwrap();
        assert_eq!(coil_self_inductance(&coil).unwrap(), single_loop_inductance(mm(30.0), mm(0.75)));
    }

    #[test]
    fn uncoupling_search_rejects_negative_gap() {
        assert!(find_uncoupling_distance(&SpiralCoil::reference(), -1e-3).is_err());
    }
}
