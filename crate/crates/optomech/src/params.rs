//! System parameters of the two-resonator optomechanical model and the
//! mappings between drive-level and effective-coupling descriptions.

use num_complex::Complex64;

use crate::{Error, Result};

/// Physical parameters of one cavity mode coupled to two mechanical
/// resonators, in the frame where the resonant interaction is static.
///
/// All rates and frequencies are in 1/s. The effective couplings `g1`,
/// `g2` are the magnitudes of the linearized couplings after the phase
/// choice that makes both real; `g_single`, `e1`, `e2`, `delta0` describe
/// the underlying drives and are only needed by the time-dependent model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// First mechanical frequency, > 0.
    pub omega1: f64,
    /// Second mechanical frequency, > 0. Convention: omega2 > omega1.
    pub omega2: f64,
    /// Cavity amplitude decay rate, > 0.
    pub kappa: f64,
    /// Amplitude decay rate of resonator 1, >= 0.
    pub gamma1: f64,
    /// Amplitude decay rate of resonator 2, >= 0.
    pub gamma2: f64,
    /// Effective linearized coupling to resonator 1 (two-mode-squeezing
    /// tone), real >= 0.
    pub g1: f64,
    /// Effective linearized coupling to resonator 2 (beam-splitter tone),
    /// real >= 0.
    pub g2: f64,
    /// Effective cavity detuning, including the static mean-field shift.
    pub delta: f64,
    /// Thermal occupancy of resonator 1, >= 0.
    pub nbar1: f64,
    /// Thermal occupancy of resonator 2, >= 0.
    pub nbar2: f64,
    /// Single-photon optomechanical coupling, >= 0 (time-dependent model).
    pub g_single: f64,
    /// Drive amplitude on the blue sideband of resonator 1, >= 0.
    pub e1: f64,
    /// Drive amplitude on the red sideband of resonator 2, >= 0.
    pub e2: f64,
    /// Bare cavity detuning before the mean-field shift.
    pub delta0: f64,
}

impl SystemParams {
    /// Parameters for the resonant model given the effective couplings
    /// directly; drive-level fields are zeroed.
    pub fn with_couplings(
        omega: (f64, f64),
        kappa: f64,
        gamma: (f64, f64),
        g: (f64, f64),
        delta: f64,
        nbar: (f64, f64),
    ) -> Result<Self> {
        let p = Self {
            omega1: omega.0,
            omega2: omega.1,
            kappa,
            gamma1: gamma.0,
            gamma2: gamma.1,
            g1: g.0,
            g2: g.1,
            delta,
            nbar1: nbar.0,
            nbar2: nbar.1,
            g_single: 0.0,
            e1: 0.0,
            e2: 0.0,
            delta0: delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks all sign and finiteness constraints.
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 14] = [
            ("omega1", self.omega1, self.omega1 > 0.0),
            ("omega2", self.omega2, self.omega2 > 0.0),
            ("kappa", self.kappa, self.kappa > 0.0),
            ("gamma1", self.gamma1, self.gamma1 >= 0.0),
            ("gamma2", self.gamma2, self.gamma2 >= 0.0),
            ("g1", self.g1, self.g1 >= 0.0),
            ("g2", self.g2, self.g2 >= 0.0),
            ("delta", self.delta, true),
            ("nbar1", self.nbar1, self.nbar1 >= 0.0),
            ("nbar2", self.nbar2, self.nbar2 >= 0.0),
            ("g_single", self.g_single, self.g_single >= 0.0),
            ("e1", self.e1, self.e1 >= 0.0),
            ("e2", self.e2, self.e2 >= 0.0),
            ("delta0", self.delta0, true),
        ];
        for (name, value, ok) in checks {
            if !value.is_finite() || !ok {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("value {value} violates the sign or finiteness constraint"),
                });
            }
        }
        Ok(())
    }

    /// Half-sum of the mechanical frequencies.
    pub fn omega_plus(&self) -> f64 {
        0.5 * (self.omega2 + self.omega1)
    }

    /// Half-difference of the mechanical frequencies.
    pub fn omega_minus(&self) -> f64 {
        0.5 * (self.omega2 - self.omega1)
    }
}

/// Complex effective couplings of the two drive tones:
/// G1 = g E1 / (omega1 - Delta + i kappa) for the blue tone and
/// G2 = -g E2 / (omega2 + Delta - i kappa) for the red tone.
///
/// Their magnitudes serve as the real couplings of [`SystemParams`] under
/// the phase choice that removes the complex phases.
pub fn effective_couplings(params: &SystemParams) -> (Complex64, Complex64) {
    let g1 = params.g_single * params.e1
        / Complex64::new(params.omega1 - params.delta, params.kappa);
    let g2 = -params.g_single * params.e2
        / Complex64::new(params.omega2 + params.delta, -params.kappa);
    (g1, g2)
}

/// Effective detuning including the static mechanical displacement:
/// Delta = Delta0 + 2 g Re(beta1_dc) + 2 g Re(beta2_dc).
pub fn detuning_shift(delta0: f64, params: &SystemParams, beta_dc: (Complex64, Complex64)) -> f64 {
    delta0 + 2.0 * params.g_single * (beta_dc.0.re + beta_dc.1.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn base() -> SystemParams {
        SystemParams::with_couplings(
            (5.0e6, 1.0e7),
            1.0e5,
            (10.0, 10.0),
            (0.75e5, 1.0e5),
            1.0e3,
            (2000.0, 1000.0),
        )
        .unwrap()
    }

    #[test]
    fn validation_rejects_bad_signs() {
        let mut p = base();
        p.kappa = 0.0;
        assert!(p.validate().is_err());
        let mut p = base();
        p.nbar1 = -1.0;
        assert!(p.validate().is_err());
        let mut p = base();
        p.omega1 = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn effective_coupling_zero_drive() {
        let mut p = base();
        p.g_single = 1.0e1;
        p.e1 = 0.0;
        p.e2 = 1.0e9;
        let (g1, g2) = effective_couplings(&p);
        assert_eq!(g1, Complex64::new(0.0, 0.0));
        assert!(g2.norm() > 0.0);
    }

    #[test]
    fn effective_coupling_narrow_cavity_limit() {
        // For Delta = 0 and kappa much smaller than omega1 the magnitude
        // reduces to g E1 / omega1.
        let mut p = base();
        p.delta = 0.0;
        p.g_single = 10.0;
        p.e1 = 1.0e9;
        p.kappa = 1.0e-3 * p.omega1;
        let (g1, _) = effective_couplings(&p);
        assert_abs_diff_eq!(
            g1.norm(),
            p.g_single * p.e1 / p.omega1,
            epsilon = 1e-6 * g1.norm()
        );
    }

    #[test]
    fn coupling_inversion_reproduces_target() {
        // Choosing E1 from the inverted formula lands the requested
        // coupling magnitude.
        let kappa = 1.0e5;
        let mut p = base();
        p.kappa = kappa;
        p.omega1 = 50.0 * kappa;
        p.delta = 0.01 * kappa;
        p.g_single = 1.0e-4 * kappa;
        let target = 0.918 * kappa;
        p.e1 = target * Complex64::new(p.omega1 - p.delta, kappa).norm() / p.g_single;
        let (g1, _) = effective_couplings(&p);
        assert_abs_diff_eq!(g1.norm(), target, epsilon = 1e-9 * target);
    }

    #[test]
    fn detuning_shift_reduces_to_bare() {
        let p = base();
        let zero = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(detuning_shift(123.0, &p, zero), 123.0);
        let mut p2 = base();
        p2.g_single = 0.0;
        let dc = (Complex64::new(5.0, 1.0), Complex64::new(-2.0, 3.0));
        assert_eq!(detuning_shift(123.0, &p2, dc), 123.0);
    }

    #[test]
    fn omega_half_sums() {
        let p = base();
        assert_abs_diff_eq!(p.omega_plus(), 7.5e6);
        assert_abs_diff_eq!(p.omega_minus(), 2.5e6);
    }
}
