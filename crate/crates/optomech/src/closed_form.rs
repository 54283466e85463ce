//! Dissipationless Hamiltonian dynamics: normal modes of the resonant
//! interaction, the stroboscopic entanglement protocol, and the
//! quadrature maps of the equal-coupling regime.
//!
//! Everything here propagates states through exact symplectic maps; the
//! damped counterparts live in [`crate::rwa`].

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::gaussian::SymplecticMap;
use crate::{Error, Result};

/// Tolerance on |phi_p mod 2pi - pi| below which the stroboscopic phase
/// counts as exactly -1.
pub const PHASE_TOL: f64 = 1e-8;

/// Eigenfrequencies and mixing angle of the coupled cavity and bright
/// mechanical mode.
///
/// The dark mode stays at zero frequency; the other two modes split as
/// lambda_{1,2} = (Delta -+ Delta_tilde)/2 with
/// Delta_tilde = sqrt(Delta^2 + 4 G^2), and the mixing angle obeys
/// tan 2theta = -2 G / Delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModeData {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Mixing angle between the cavity and the bright mode.
    pub theta: f64,
    pub delta_tilde: f64,
}

/// Normal-mode data of the undamped resonant interaction with collective
/// coupling `cal_g` and cavity detuning `delta`.
pub fn normal_modes(cal_g: f64, delta: f64) -> Result<NormalModeData> {
    if cal_g == 0.0 && delta == 0.0 {
        return Err(Error::InvalidParameter {
            name: "cal_g",
            reason: "normal modes are degenerate at zero coupling and zero detuning".into(),
        });
    }
    let delta_tilde = (delta * delta + 4.0 * cal_g * cal_g).sqrt();
    Ok(NormalModeData {
        lambda0: 0.0,
        lambda1: 0.5 * (delta - delta_tilde),
        lambda2: 0.5 * (delta + delta_tilde),
        theta: 0.5 * (-2.0 * cal_g).atan2(delta),
        delta_tilde,
    })
}

fn embed_rotation(s: &mut DMatrix<f64>, mode: usize, angle: f64) {
    let (c, sn) = (angle.cos(), angle.sin());
    let i = 2 * mode;
    s[(i, i)] = c;
    s[(i, i + 1)] = sn;
    s[(i + 1, i)] = -sn;
    s[(i + 1, i + 1)] = c;
}

/// Two-mode squeeze of the mechanical pair embedded in the three-mode
/// layout (cavity, resonator 1, resonator 2).
fn mechanical_squeeze(r: f64) -> DMatrix<f64> {
    let (ch, sh) = (r.cosh(), r.sinh());
    let mut s = DMatrix::identity(6, 6);
    s[(2, 2)] = ch;
    s[(2, 4)] = sh;
    s[(3, 3)] = ch;
    s[(3, 5)] = -sh;
    s[(4, 2)] = sh;
    s[(4, 4)] = ch;
    s[(5, 3)] = -sh;
    s[(5, 5)] = ch;
    s
}

/// Real beam-splitter mixing of the cavity with the bright mode sitting
/// in the second mechanical slot: slot 0 receives
/// cos(theta) a - sin(theta) beta2 and slot 2 receives
/// sin(theta) a + cos(theta) beta2.
fn cavity_bright_mixing(theta: f64) -> DMatrix<f64> {
    let (c, sn) = (theta.cos(), theta.sin());
    let mut s = DMatrix::identity(6, 6);
    for q in 0..2 {
        s[(q, q)] = c;
        s[(q, 4 + q)] = -sn;
        s[(4 + q, q)] = sn;
        s[(4 + q, 4 + q)] = c;
    }
    s
}

/// Heisenberg propagator of the undamped system for time `t`, as a
/// quadrature map on (cavity, resonator 1, resonator 2).
///
/// The map diagonalizes the dynamics through the mechanical two-mode
/// squeeze by `r` followed by the cavity-bright-mode mixing, applies the
/// three normal-mode phase rotations, and transforms back. The cavity
/// blocks of the result vanish whenever sin(Delta_tilde t / 2) = 0.
pub fn hamiltonian_map(t: f64, r: f64, cal_g: f64, delta: f64) -> Result<SymplecticMap> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("squeeze parameter must be positive and finite, got {r}"),
        });
    }
    let nm = normal_modes(cal_g, delta)?;
    let t1 = mechanical_squeeze(r);
    let t1_inv = mechanical_squeeze(-r);
    let t2 = cavity_bright_mixing(nm.theta);
    let mut rot = DMatrix::identity(6, 6);
    // Slot 0 holds the upper normal mode, slot 2 the lower one; the dark
    // mode in slot 1 does not rotate.
    embed_rotation(&mut rot, 0, nm.lambda2 * t);
    embed_rotation(&mut rot, 2, nm.lambda1 * t);
    let m = t1_inv * t2.transpose() * rot * t2 * t1;
    SymplecticMap::new(m)
}

/// Result of the stroboscopic entanglement protocol after `p` half
/// periods of the normal-mode splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StroboscopicEntanglement {
    /// Interaction time t_p = 2 pi p / Delta_tilde.
    pub t_p: f64,
    /// Relative phase phi_p = pi p (1 + Delta / Delta_tilde) acquired by
    /// the bright mode.
    pub phi_p: f64,
    /// Distance |phi_p mod 2pi - pi| from the ideal phase.
    pub phase_residual: f64,
    /// Logarithmic negativity of the two resonators at t_p; present only
    /// when the acquired phase is -1 within [`PHASE_TOL`].
    pub en: Option<f64>,
    /// Large-squeezing approximation 4r - ln(nbar_+ + 1).
    pub en_approx: f64,
}

/// Entanglement generated on the initially thermal resonators by waiting
/// `p` full normal-mode beats.
///
/// When the bright-mode phase is -1 the net effect on the resonators is a
/// two-mode squeeze by 2r, giving
/// E_N = -ln[(nbar_+ + 1) cosh 4r - sqrt((nbar_+ + 1)^2 sinh^2 4r + nbar_-^2)]
/// with nbar_+- = nbar1 +- nbar2. This factored form of the closed-form
/// result avoids the cancellation the expanded cosh 8r version suffers at
/// large r.
pub fn stroboscopic_entanglement(
    p: u32,
    r: f64,
    cal_g: f64,
    delta: f64,
    nbar1: f64,
    nbar2: f64,
) -> Result<StroboscopicEntanglement> {
    if p == 0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "the protocol needs at least one beat".into(),
        });
    }
    if nbar1 < 0.0 || nbar2 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "nbar1",
            reason: "occupancies must be non-negative".into(),
        });
    }
    let nm = normal_modes(cal_g, delta)?;
    let t_p = 2.0 * PI * f64::from(p) / nm.delta_tilde;
    let phi_p = PI * f64::from(p) * (1.0 + delta / nm.delta_tilde);
    let phase_residual = (phi_p.rem_euclid(2.0 * PI) - PI).abs();

    let n_plus = nbar1 + nbar2;
    let n_minus = nbar1 - nbar2;
    let en = (phase_residual < PHASE_TOL).then(|| {
        let a = n_plus + 1.0;
        let nu = a * (4.0 * r).cosh()
            - (a * a * (4.0_f64 * r).sinh().powi(2) + n_minus * n_minus).sqrt();
        (-nu.ln()).max(0.0)
    });
    Ok(StroboscopicEntanglement {
        t_p,
        phi_p,
        phase_residual,
        en,
        en_approx: 4.0 * r - (n_plus + 1.0).ln(),
    })
}

/// Collective coupling that makes the stroboscopic phase land exactly on
/// -1 after `p` beats: cal_g_p = |Delta| sqrt(d (2p - d)) / (2 |p - d|)
/// for odd `d` with 0 < d < 2p and d != p.
pub fn optimal_coupling_gp(delta: f64, p: u32, d: u32) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "the phase-matching coupling is defined for nonzero detuning".into(),
        });
    }
    if p == 0 || d % 2 == 0 || d >= 2 * p || d == p {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("need odd d with 0 < d < 2p and d != p, got p = {p}, d = {d}"),
        });
    }
    let (pf, df) = (f64::from(p), f64::from(d));
    Ok(delta.abs() * (df * (2.0 * pf - df)).sqrt() / (2.0 * (pf - df).abs()))
}

/// Time after `m` cavity periods at which the equal-coupling dynamics
/// disentangles the cavity from the resonators.
pub fn decoupling_time(m: u32, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "decoupling times require nonzero detuning".into(),
        });
    }
    Ok(2.0 * PI * f64::from(m) / delta.abs())
}

/// Shear accumulated by the resonator quadratures at the m-th decoupling
/// time: 4 pi m G^2 / Delta^2.
pub fn equal_coupling_shear(m: u32, g: f64, delta: f64) -> f64 {
    4.0 * PI * f64::from(m) * g * g / (delta * delta)
}

/// Heisenberg propagator for equal couplings g1 = g2 = `g`, as a
/// quadrature map on (cavity, resonator 1, resonator 2).
///
/// In the collective basis the sum position and difference momentum are
/// conserved, the cavity is a displaced rotor, and the conjugate
/// collective quadratures accumulate shears; at t_m = 2 pi m / Delta the
/// cavity returns exactly to its initial state and the resonators keep
/// only the shear 4 pi m G^2 / Delta^2.
pub fn equal_coupling_map(t: f64, g: f64, delta: f64) -> Result<SymplecticMap> {
    if delta == 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "the equal-coupling solution is written for nonzero detuning".into(),
        });
    }
    let q = std::f64::consts::SQRT_2 * g;
    let a = q / delta;
    let (c, s) = ((delta * t).cos(), (delta * t).sin());
    let s1 = s / delta;
    let s2 = (1.0 - c) / delta;
    // Basis (X, Y, x_+, p_+, x_-, p_-).
    #[rustfmt::skip]
    let m_pm = DMatrix::from_row_slice(6, 6, &[
        c,        s,       -a * (1.0 - c), 0.0, 0.0, -a * s,
        -s,       c,       -a * s,         0.0, 0.0,  a * (1.0 - c),
        0.0,      0.0,      1.0,           0.0, 0.0,  0.0,
        -q * s1,  -q * s2,  q * a * (t - s1), 1.0, 0.0, q * a * s2,
        q * s2,   -q * s1,  q * a * s2,     0.0, 1.0, -q * a * (t - s1),
        0.0,      0.0,      0.0,            0.0, 0.0,  1.0,
    ]);
    // Orthogonal change to the collective basis: x_+- = (x1 -+ ... x2)/sqrt(2).
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut p = DMatrix::identity(6, 6);
    for q_idx in 0..2 {
        p[(2 + q_idx, 2 + q_idx)] = h;
        p[(2 + q_idx, 4 + q_idx)] = h;
        p[(4 + q_idx, 2 + q_idx)] = h;
        p[(4 + q_idx, 4 + q_idx)] = -h;
    }
    SymplecticMap::new(p.transpose() * m_pm * &p)
}
