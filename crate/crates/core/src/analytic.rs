//! Closed-form currents, output power and loss ratios at resonance.
//!
//! All mutual inductances are signed, as produced by the geometry module.

use serde::Serialize;

use crate::circuit::{CurrentSolution, Role, WptSystem};
use crate::{Complex, Error, Result};

const J: Complex = Complex { re: 0.0, im: 1.0 };

/// Two-coil currents at resonance.
///
/// `I_tx = (R_rx + R_L) V / D`, `I_rx = -j w M V / D` with
/// `D = R_tx (R_rx + R_L) + w^2 M^2`.
pub fn two_coil_currents(r_tx: f64, r_rx: f64, r_l: f64, m: f64, omega: f64, v_s: f64) -> (Complex, Complex) {
    let r2 = r_rx + r_l;
    let d = r_tx * r2 + omega * omega * m * m;
    (Complex::new(r2 * v_s / d, 0.0), -J * (omega * m * v_s / d))
}

/// Mutual inductance that maximises the two-coil receiver current.
pub fn two_coil_optimal_mutual(r_tx: f64, r_rx: f64, r_l: f64, omega: f64) -> f64 {
    (r_tx * (r_rx + r_l)).sqrt() / omega
}

/// Denominator, regime parameter and currents of the Tx / repeater / Rx chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeCoilDiagnostics {
    pub a: Complex,
    pub delta: f64,
    pub i_tx: Complex,
    pub i_rp: Complex,
    pub i_rx: Complex,
}

/// `Delta = 2 M_tx,rx M_rp,rx w / (M_tx,rp R_L)`.
pub fn delta(r_l: f64, m_tx_rp: f64, m_tx_rx: f64, m_rp_rx: f64, omega: f64) -> f64 {
    2.0 * m_tx_rx * m_rp_rx * omega / (m_tx_rp * r_l)
}

/// Load resistance for which the chain sits at the given `delta`.
///
/// This is how the shipped default load is reconstructed.
pub fn load_for_delta(delta: f64, m_tx_rp: f64, m_tx_rx: f64, m_rp_rx: f64, omega: f64) -> Result<f64> {
    let r = 2.0 * m_tx_rx * m_rp_rx * omega / (m_tx_rp * delta);
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("no positive load gives delta = {delta} for these couplings")));
    }
    Ok(r)
}

/// Exact three-coil currents at resonance with `R_tx = R_rp = R` and the
/// receiver resistance absorbed into the load.
pub fn three_coil_currents_full(
    r: f64,
    r_l: f64,
    m_tx_rp: f64,
    m_tx_rx: f64,
    m_rp_rx: f64,
    omega: f64,
    v_s: f64,
) -> ThreeCoilDiagnostics {
    let w2 = omega * omega;
    // written without dividing by M_tx,rp so an uncoupled repeater stays finite
    let cross = Complex::new(0.0, -2.0 * m_tx_rx * m_rp_rx * omega * w2 * m_tx_rp);
    let a = Complex::new(r * r * r_l + r * w2 * (m_tx_rx * m_tx_rx + m_rp_rx * m_rp_rx) + m_tx_rp * m_tx_rp * r_l * w2, 0.0)
        + cross;
    let delta = if m_tx_rp == 0.0 { f64::INFINITY } else { delta(r_l, m_tx_rp, m_tx_rx, m_rp_rx, omega) };
    let i_tx = Complex::new((m_rp_rx * m_rp_rx * w2 + r * r_l) * v_s, 0.0) / a;
    let i_rp = (-J * v_s * omega * m_tx_rp * r_l - v_s * w2 * m_tx_rx * m_rp_rx) / a;
    let i_rx = (-J * v_s * omega * m_tx_rx * r - v_s * w2 * m_tx_rp * m_rp_rx) / a;
    ThreeCoilDiagnostics { a, delta, i_tx, i_rp, i_rx }
}

/// Three-coil currents with the coil resistances neglected:
/// `I_tx = M_rp,rx^2 V / (M_tx,rp^2 R_L)`, `I_rp = -j V / (w M_tx,rp)`,
/// `I_rx = -M_rp,rx V / (M_tx,rp R_L)`.
pub fn three_coil_currents_simplified(
    r_l: f64,
    m_tx_rp: f64,
    _m_tx_rx: f64,
    m_rp_rx: f64,
    omega: f64,
    v_s: f64,
) -> (Complex, Complex, Complex) {
    let i_tx = Complex::new(m_rp_rx * m_rp_rx * v_s / (m_tx_rp * m_tx_rp * r_l), 0.0);
    let i_rp = -J * (v_s / (omega * m_tx_rp));
    let i_rx = Complex::new(-m_rp_rx * v_s / (m_tx_rp * r_l), 0.0);
    (i_tx, i_rp, i_rx)
}

/// Receiver current induced by all channels:
/// `I_rx = -(sum j w M_tx_i,rx I_tx_i + sum j w M_rp_i,rx I_rp_i) / (R_L + R)`.
pub fn multichannel_rx_current(
    m_tx_rx: &[f64],
    m_rp_rx: &[f64],
    i_tx: &[Complex],
    i_rp: &[Complex],
    r: f64,
    r_l: f64,
    omega: f64,
) -> Result<Complex> {
    let n = m_tx_rx.len();
    if m_rp_rx.len() != n || i_tx.len() != n || i_rp.len() != n {
        return Err(Error::LengthMismatch(format!(
            "channel lists differ in length: {n}, {}, {}, {}",
            m_rp_rx.len(),
            i_tx.len(),
            i_rp.len()
        )));
    }
    let emf: Complex = (0..n).map(|i| J * omega * (m_tx_rx[i] * i_tx[i] + m_rp_rx[i] * i_rp[i])).sum();
    Ok(-emf / (r_l + r))
}

/// `P_out = V^2 (sum k_rp_i,rx)^2 / (k_tx,rp^2 R_L)`.
pub fn multichannel_output_power(v_s: f64, r_l: f64, k_tx_rp: f64, k_rp_rx: &[f64]) -> Result<f64> {
    if k_tx_rp == 0.0 {
        return Err(Error::Degenerate("Tx-repeater coupling is zero".into()));
    }
    let s: f64 = k_rp_rx.iter().sum();
    Ok(v_s * v_s * s * s / (k_tx_rp * k_tx_rp * r_l))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyBreakdown {
    pub xi_tx: f64,
    pub xi_rp: f64,
    pub xi_rx: f64,
    /// `R_L / R`.
    pub gamma: f64,
    /// `w L / R`.
    pub q: f64,
    pub eta: f64,
}

/// Loss ratios of the repeater-array system in the high-Q limit.
pub fn loss_ratios(n: usize, q: f64, gamma: f64, k_tx_rp: f64, k_rp_rx: &[f64]) -> Result<EfficiencyBreakdown> {
    if !(q > 0.0) || !(gamma > 0.0) {
        return Err(Error::invalid(format!("Q and Gamma must be positive, got Q = {q}, Gamma = {gamma}")));
    }
    if k_tx_rp == 0.0 {
        return Err(Error::Degenerate("Tx-repeater coupling is zero".into()));
    }
    let s: f64 = k_rp_rx.iter().sum();
    if s == 0.0 {
        return Err(Error::Degenerate("repeaters are not coupled to the receiver".into()));
    }
    let s4: f64 = k_rp_rx.iter().map(|k| k.powi(4)).sum();
    let xi_tx = s4 / (gamma * k_tx_rp * k_tx_rp * s * s);
    let xi_rp = n as f64 * gamma / (q * q * s * s);
    let xi_rx = 1.0 / gamma;
    Ok(EfficiencyBreakdown { xi_tx, xi_rp, xi_rx, gamma, q, eta: 1.0 / (1.0 + xi_tx + xi_rp + xi_rx) })
}

/// Voltages induced in the receiver by each coil, grouped by role.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadVoltageSplit {
    /// `-j w M_i,rx I_i` per resonator; zero for the receiver itself.
    pub contributions: Vec<Complex>,
    pub tx_sum: Complex,
    pub rp_sum: Complex,
    /// `|tx_sum| / (|tx_sum| + |rp_sum|)`, in percent.
    pub tx_percent: f64,
    pub rp_percent: f64,
    /// Phase of `rp_sum` relative to `tx_sum` (degrees, in (-180, 180]).
    pub phase_difference_deg: f64,
}

/// Splits the receiver EMF into transmitter and repeater parts.
///
/// The contributions add up to `(R_L + R_rx) I_rx` when the receiver is at
/// resonance.
pub fn load_voltage_contributions(system: &WptSystem, solution: &CurrentSolution) -> LoadVoltageSplit {
    let rx = system.rx_index();
    let omega = system.omega();
    let contributions: Vec<Complex> = (0..system.len())
        .map(|i| if i == rx { Complex::new(0.0, 0.0) } else { -J * omega * system.mutual(i, rx) * solution.currents[i] })
        .collect();
    let group = |role: Role| -> Complex {
        system.resonators().iter().zip(&contributions).filter(|(r, _)| r.role == role).map(|(_, c)| *c).sum()
    };
    let tx_sum = group(Role::Tx);
    let rp_sum = group(Role::Repeater);
    let total = tx_sum.norm() + rp_sum.norm();
    let (tx_percent, rp_percent) =
        if total > 0.0 { (100.0 * tx_sum.norm() / total, 100.0 * rp_sum.norm() / total) } else { (0.0, 0.0) };
    let mut phase = (rp_sum.arg() - tx_sum.arg()).to_degrees();
    if phase > 180.0 {
        phase -= 360.0;
    } else if phase <= -180.0 {
        phase += 360.0;
    }
    LoadVoltageSplit { contributions, tx_sum, rp_sum, tx_percent, rp_percent, phase_difference_deg: phase }
}
