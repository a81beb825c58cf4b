//! N-coil phasor circuit: series-compensated resonators coupled through a
//! symmetric mutual-inductance matrix.
//!
//! Every transmitter row is driven by the same source voltage (transmitters
//! in parallel), the single receiver row carries the load resistance, and
//! repeaters are passive. Currents follow from Kirchhoff's voltage law,
//! `Z I = V`, solved directly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::SpiralCoil;
use crate::linalg::ComplexMatrix;
use crate::{Complex, Error, Result};

/// Upper bound on `||Z I - V|| / ||V||` accepted from the direct solve.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

/// Relative asymmetry tolerated in a user-supplied mutual-inductance matrix.
const SYMMETRY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Tx,
    Repeater,
    Rx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resonator {
    pub role: Role,
    /// Self-inductance (H).
    pub inductance: f64,
    /// Series compensation capacitance (F).
    pub capacitance: f64,
    /// Series parasitic resistance (ohm).
    pub resistance: f64,
    pub coil: Option<SpiralCoil>,
}

impl Resonator {
    pub fn new(role: Role, inductance: f64, capacitance: f64, resistance: f64) -> Result<Self> {
        let r = Resonator { role, inductance, capacitance, resistance, coil: None };
        r.validate()?;
        Ok(r)
    }

    /// Resonator whose capacitor is tuned to `f0`.
    pub fn tuned(role: Role, inductance: f64, resistance: f64, f0: f64) -> Result<Self> {
        Resonator::new(role, inductance, tune_capacitance(inductance, f0)?, resistance)
    }

    pub fn with_coil(mut self, coil: SpiralCoil) -> Self {
        self.coil = Some(coil);
        self
    }

    /// `omega L - 1 / (omega C)`.
    pub fn reactance(&self, omega: f64) -> f64 {
        omega * self.inductance - 1.0 / (omega * self.capacitance)
    }

    pub fn resonant_frequency(&self) -> f64 {
        1.0 / (2.0 * PI * (self.inductance * self.capacitance).sqrt())
    }

    fn validate(&self) -> Result<()> {
        if !(self.inductance > 0.0 && self.inductance.is_finite()) {
            return Err(Error::invalid(format!("inductance must be positive, got {}", self.inductance)));
        }
        if !(self.capacitance > 0.0 && self.capacitance.is_finite()) {
            return Err(Error::invalid(format!("capacitance must be positive, got {}", self.capacitance)));
        }
        if !(self.resistance >= 0.0 && self.resistance.is_finite()) {
            return Err(Error::invalid(format!("resistance must be non-negative, got {}", self.resistance)));
        }
        Ok(())
    }
}

/// Series capacitance that resonates `inductance` at `f0`.
pub fn tune_capacitance(inductance: f64, f0: f64) -> Result<f64> {
    if !(inductance > 0.0 && inductance.is_finite()) || !(f0 > 0.0 && f0.is_finite()) {
        return Err(Error::invalid(format!("cannot tune L = {inductance} H to f0 = {f0} Hz")));
    }
    let omega = 2.0 * PI * f0;
    Ok(1.0 / (omega * omega * inductance))
}

/// A complete circuit description.
#[derive(Debug, Clone, PartialEq)]
pub struct WptSystem {
    resonators: Vec<Resonator>,
    /// Row-major `n x n` mutual inductances (H); the diagonal is ignored.
    mutual: Vec<f64>,
    /// Source amplitude (V) applied to every transmitter row.
    pub source_voltage: f64,
    /// Load resistance (ohm) in series with the receiver.
    pub load_resistance: f64,
    /// Internal resistance (ohm) of the common source; zero by default.
    pub source_resistance: f64,
    /// Operating frequency (Hz).
    pub frequency: f64,
}

impl WptSystem {
    pub fn new(
        resonators: Vec<Resonator>,
        mutual: Vec<Vec<f64>>,
        source_voltage: f64,
        load_resistance: f64,
        frequency: f64,
    ) -> Result<Self> {
        let n = resonators.len();
        if mutual.len() != n || mutual.iter().any(|row| row.len() != n) {
            return Err(Error::LengthMismatch(format!("mutual-inductance matrix must be {n}x{n}")));
        }
        let flat: Vec<f64> = mutual.into_iter().flatten().collect();
        let system = WptSystem {
            resonators,
            mutual: flat,
            source_voltage,
            load_resistance,
            source_resistance: 0.0,
            frequency,
        };
        system.validate()?;
        Ok(system)
    }

    pub fn with_source_resistance(mut self, r: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("source resistance must be non-negative, got {r}")));
        }
        self.source_resistance = r;
        Ok(self)
    }

    pub fn with_frequency(mut self, f: f64) -> Result<Self> {
        self.frequency = f;
        self.validate()?;
        Ok(self)
    }

    pub fn with_source_voltage(mut self, v: f64) -> Self {
        self.source_voltage = v;
        self
    }

    pub fn with_load_resistance(mut self, r: f64) -> Result<Self> {
        self.load_resistance = r;
        self.validate()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.resonators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resonators.is_empty()
    }

    pub fn resonators(&self) -> &[Resonator] {
        &self.resonators
    }

    pub fn resonator_mut(&mut self, i: usize) -> &mut Resonator {
        &mut self.resonators[i]
    }

    pub fn mutual(&self, i: usize, j: usize) -> f64 {
        self.mutual[i * self.len() + j]
    }

    /// Sets `M[i][j]` and `M[j][i]`.
    pub fn set_mutual(&mut self, i: usize, j: usize, m: f64) {
        let n = self.len();
        self.mutual[i * n + j] = m;
        self.mutual[j * n + i] = m;
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    pub fn rx_index(&self) -> usize {
        self.resonators.iter().position(|r| r.role == Role::Rx).expect("validated: one receiver")
    }

    pub fn indices(&self, role: Role) -> Vec<usize> {
        self.resonators.iter().enumerate().filter(|(_, r)| r.role == role).map(|(i, _)| i).collect()
    }

    fn validate(&self) -> Result<()> {
        for r in &self.resonators {
            r.validate()?;
        }
        let rx = self.resonators.iter().filter(|r| r.role == Role::Rx).count();
        if rx != 1 {
            return Err(Error::invalid(format!("exactly one receiver required, found {rx}")));
        }
        if !self.resonators.iter().any(|r| r.role == Role::Tx) {
            return Err(Error::invalid("at least one transmitter required"));
        }
        if !(self.load_resistance > 0.0 && self.load_resistance.is_finite()) {
            return Err(Error::invalid(format!("load resistance must be positive, got {}", self.load_resistance)));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::invalid(format!("frequency must be positive, got {}", self.frequency)));
        }
        if !self.source_voltage.is_finite() {
            return Err(Error::invalid("source voltage must be finite"));
        }
        let n = self.len();
        let scale = self.mutual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (self.mutual(i, j), self.mutual(j, i));
                if !a.is_finite() || (a - b).abs() > SYMMETRY_RTOL * scale {
                    return Err(Error::invalid(format!("mutual-inductance matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    /// Impedance matrix without the load or source resistance.
    fn bare_impedance(&self, omega: f64) -> ComplexMatrix {
        let n = self.len();
        let mut z = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                z[(i, j)] = if i == j {
                    let r = &self.resonators[i];
                    Complex::new(r.resistance, r.reactance(omega))
                } else {
                    Complex::new(0.0, omega * self.mutual(i, j))
                };
            }
        }
        z
    }
}

/// KVL impedance matrix at angular frequency `omega`: `R_i + j X_i` on the
/// diagonal (plus the load on the receiver row), `j omega M_ij` elsewhere.
/// A non-zero source resistance is shared by all transmitter rows.
pub fn assemble_impedance_matrix(system: &WptSystem, omega: f64) -> ComplexMatrix {
    let mut z = system.bare_impedance(omega);
    let rx = system.rx_index();
    z[(rx, rx)] += system.load_resistance;
    if system.source_resistance > 0.0 {
        let tx = system.indices(Role::Tx);
        for &i in &tx {
            for &j in &tx {
                z[(i, j)] += system.source_resistance;
            }
        }
    }
    z
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentSolution {
    /// Phasor current per resonator (A), in system order.
    pub currents: Vec<Complex>,
    /// Sum of the transmitter currents (A).
    pub input_current: Complex,
    /// Power delivered by the source (W).
    pub p_in: f64,
    /// Power in the load (W).
    pub p_out: f64,
    /// `|I_i|^2 R_i` per resonator (W).
    pub losses: Vec<f64>,
    /// Dissipation in the source resistance (W).
    pub source_loss: f64,
    pub efficiency: f64,
    /// `||Z I - V|| / ||V||` of the solve.
    pub residual: f64,
    roles: Vec<Role>,
    rx: usize,
}

impl CurrentSolution {
    pub fn rx_current(&self) -> Complex {
        self.currents[self.rx]
    }

    pub fn currents_of(&self, role: Role) -> Vec<Complex> {
        self.roles.iter().zip(&self.currents).filter(|(r, _)| **r == role).map(|(_, c)| *c).collect()
    }

    /// Total coil loss of all resonators with the given role (W).
    pub fn loss_of(&self, role: Role) -> f64 {
        self.roles.iter().zip(&self.losses).filter(|(r, _)| **r == role).map(|(_, l)| l).sum()
    }

    /// Segment loss divided by output power.
    pub fn loss_ratio(&self, role: Role) -> f64 {
        self.loss_of(role) / self.p_out
    }

    pub fn total_loss(&self) -> f64 {
        self.losses.iter().sum::<f64>() + self.source_loss
    }
}

/// Solves `Z I = V` and derives powers, losses and efficiency.
pub fn solve_currents(system: &WptSystem, omega: f64) -> Result<CurrentSolution> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid(format!("angular frequency must be positive, got {omega}")));
    }
    let z = assemble_impedance_matrix(system, omega);
    let v: Vec<Complex> = system
        .resonators
        .iter()
        .map(|r| if r.role == Role::Tx { Complex::new(system.source_voltage, 0.0) } else { Complex::new(0.0, 0.0) })
        .collect();
    let currents = z.solve(&v)?;
    let residual = z.relative_residual(&currents, &v);
    if !(residual < RESIDUAL_LIMIT) {
        return Err(Error::Residual { residual, limit: RESIDUAL_LIMIT });
    }

    let rx = system.rx_index();
    let roles: Vec<Role> = system.resonators.iter().map(|r| r.role).collect();
    let input_current: Complex =
        roles.iter().zip(&currents).filter(|(r, _)| **r == Role::Tx).map(|(_, c)| *c).sum();
    let p_in = (Complex::new(system.source_voltage, 0.0) * input_current.conj()).re;
    let losses: Vec<f64> =
        system.resonators.iter().zip(&currents).map(|(r, i)| i.norm_sqr() * r.resistance).collect();
    let source_loss = input_current.norm_sqr() * system.source_resistance;
    let p_out = currents[rx].norm_sqr() * system.load_resistance;
    let efficiency = if p_in > 0.0 { p_out / p_in } else { 0.0 };
    Ok(CurrentSolution { currents, input_current, p_in, p_out, losses, source_loss, efficiency, residual, roles, rx })
}

/// Two-port impedance parameters of the coil network: port 1 is the
/// transmitters in parallel, port 2 the receiver terminals with the load
/// removed. Currents flow into the ports.
pub fn two_port_impedance(system: &WptSystem, omega: f64) -> Result<[[Complex; 2]; 2]> {
    let z = system.bare_impedance(omega);
    let rx = system.rx_index();
    let zero = Complex::new(0.0, 0.0);
    let one = Complex::new(1.0, 0.0);
    let drive_tx: Vec<Complex> = system.resonators.iter().map(|r| if r.role == Role::Tx { one } else { zero }).collect();
    let mut drive_rx = vec![zero; system.len()];
    drive_rx[rx] = one;

    let port_currents = |v: &[Complex]| -> Result<(Complex, Complex)> {
        let i = z.solve(v)?;
        let residual = z.relative_residual(&i, v);
        if !(residual < RESIDUAL_LIMIT) {
            return Err(Error::Residual { residual, limit: RESIDUAL_LIMIT });
        }
        let i1: Complex = system.resonators.iter().zip(&i).filter(|(r, _)| r.role == Role::Tx).map(|(_, c)| *c).sum();
        Ok((i1, i[rx]))
    };
    let (y11, y21) = port_currents(&drive_tx)?;
    let (y12, y22) = port_currents(&drive_rx)?;
    let det = y11 * y22 - y12 * y21;
    if det.norm() == 0.0 || !det.is_finite() {
        return Err(Error::Degenerate("two-port admittance matrix is singular".into()));
    }
    Ok([[y22 / det, -y12 / det], [-y21 / det, y11 / det]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuning_formula() {
        let c = tune_capacitance(4.64e-6, 1e6).unwrap();
        assert!((c - 5.459e-9).abs() < 0.001e-9, "{c:e}");
        let r = Resonator::new(Role::Tx, 4.64e-6, c, 0.05).unwrap();
        assert!(r.reactance(2.0 * PI * 1e6).abs() < 1e-9);
        let c_half = tune_capacitance(2.32e-6, 1e6).unwrap();
        assert!((c_half / c - 2.0).abs() < 1e-14);
        assert!(tune_capacitance(0.0, 1e6).is_err());
        assert!(tune_capacitance(1e-6, -1.0).is_err());
    }

    fn pair(m: f64) -> WptSystem {
        let tx = Resonator::tuned(Role::Tx, 4.7e-6, 0.05, 1e6).unwrap();
        let rx = Resonator::tuned(Role::Rx, 4.5e-6, 0.04, 1e6).unwrap();
        WptSystem::new(vec![tx, rx], vec![vec![0.0, m], vec![m, 0.0]], 1.0, 10.0, 1e6).unwrap()
    }

    #[test]
    fn two_coil_matrix_shape() {
        let s = pair(1e-6);
        let w = s.omega();
        let z = assemble_impedance_matrix(&s, w);
        assert!((z[(0, 0)] - Complex::new(0.05, 0.0)).norm() < 1e-9);
        assert!((z[(1, 1)] - Complex::new(10.04, 0.0)).norm() < 1e-9);
        assert_eq!(z[(0, 1)], Complex::new(0.0, w * 1e-6));
        assert_eq!(z[(0, 1)], z[(1, 0)]);
    }

    #[test]
    fn system_invariants_enforced() {
        let tx = Resonator::tuned(Role::Tx, 4.7e-6, 0.05, 1e6).unwrap();
        let rx = Resonator::tuned(Role::Rx, 4.5e-6, 0.04, 1e6).unwrap();
        let m = vec![vec![0.0, 1e-6], vec![1e-6, 0.0]];
        assert!(WptSystem::new(vec![tx.clone(), tx.clone()], m.clone(), 1.0, 10.0, 1e6).is_err());
        assert!(WptSystem::new(vec![rx.clone(), rx.clone()], m.clone(), 1.0, 10.0, 1e6).is_err());
        assert!(WptSystem::new(vec![tx.clone(), rx.clone()], m.clone(), 1.0, 0.0, 1e6).is_err());
        assert!(WptSystem::new(vec![tx.clone(), rx.clone()], m.clone(), 1.0, 10.0, 0.0).is_err());
        let asym = vec![vec![0.0, 1e-6], vec![2e-6, 0.0]];
        assert!(WptSystem::new(vec![tx.clone(), rx.clone()], asym, 1.0, 10.0, 1e6).is_err());
        assert!(WptSystem::new(vec![tx, rx], vec![vec![0.0]], 1.0, 10.0, 1e6).is_err());
        assert!(Resonator::new(Role::Tx, 1e-6, 1e-9, -0.1).is_err());
    }

    #[test]
    fn uncoupled_system() {
        let s = pair(0.0);
        let sol = solve_currents(&s, s.omega()).unwrap();
        assert!((sol.currents[0] - Complex::new(20.0, 0.0)).norm() < 1e-9);
        assert_eq!(sol.rx_current().norm(), 0.0);
        assert_eq!(sol.efficiency, 0.0);
    }

    #[test]
    fn singular_system_reported() {
        // lossless, uncoupled transmitter at resonance: Z_tx = 0
        let tx = Resonator::tuned(Role::Tx, 4.7e-6, 0.0, 1e6).unwrap();
        let rx = Resonator::tuned(Role::Rx, 4.5e-6, 0.04, 1e6).unwrap();
        let s = WptSystem::new(vec![tx, rx], vec![vec![0.0; 2]; 2], 1.0, 10.0, 1e6).unwrap();
        assert!(matches!(solve_currents(&s, s.omega()), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn source_resistance_accounted() {
        let s = pair(1e-6).with_source_resistance(0.5).unwrap();
        let sol = solve_currents(&s, s.omega()).unwrap();
        let balance = sol.p_in - sol.total_loss() - sol.p_out;
        assert!(balance.abs() < 1e-9 * sol.p_in);
        assert!(sol.source_loss > 0.0);
    }

    #[test]
    fn two_port_is_reciprocal() {
        let s = pair(1.3e-6);
        let z = two_port_impedance(&s, s.omega()).unwrap();
        assert!((z[0][1] - z[1][0]).norm() < 1e-12 * z[0][1].norm());
        assert!((z[0][1] - Complex::new(0.0, s.omega() * 1.3e-6)).norm() < 1e-9);
    }
}
