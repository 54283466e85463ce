//! Resonant (rotating-wave) model of the driven cavity and the two
//! mechanical resonators: drift and diffusion matrices, stability,
//! moment propagation, and the analytic steady state in the
//! Bogoliubov-transformed mechanical frame.
//!
//! Quadrature ordering is (X, Y, x1, p1, x2, p2) with the cavity first.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::gaussian::{
    log_negativity, CovarianceMatrix, ModeCorrelations, SqueezeParams,
};
use crate::linalg::{expm, max_re_eigenvalue, propagation_pair, solve_lyapunov};
use crate::params::SystemParams;
use crate::{Error, Result};

/// Indices of the mechanical modes inside the three-mode state.
pub const MECHANICAL_MODES: [usize; 2] = [1, 2];

/// Drift and diffusion matrices of the quadrature moment equations
/// dC/dt = A C + C A' + D.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    pub a: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

/// Builds the drift and diffusion matrices of the resonant model.
///
/// The diffusion matrix is fixed by requiring that at zero coupling the
/// steady state is the thermal state of the two resonators tensored with
/// the cavity vacuum.
pub fn build_drift_diffusion(params: &SystemParams) -> Result<DriftDiffusion> {
    params.validate()?;
    let (k, dl) = (params.kappa, params.delta);
    let (g1, g2) = (params.g1, params.g2);
    let (h1, h2) = (0.5 * params.gamma1, 0.5 * params.gamma2);
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(6, 6, &[
        -k,  dl,  0.0, -g1, 0.0,  g2,
        -dl, -k, -g1,  0.0, -g2, 0.0,
        0.0, -g1, -h1, 0.0, 0.0, 0.0,
        -g1, 0.0, 0.0, -h1, 0.0, 0.0,
        0.0,  g2, 0.0, 0.0, -h2, 0.0,
        -g2, 0.0, 0.0, 0.0, 0.0, -h2,
    ]);
    let q1 = params.gamma1 * (params.nbar1 + 0.5);
    let q2 = params.gamma2 * (params.nbar2 + 0.5);
    let d = DMatrix::from_diagonal(&nalgebra::dvector![k, k, q1, q1, q2, q2]);
    Ok(DriftDiffusion { a, d })
}

/// Outcome of the drift stability analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// All drift eigenvalues have negative real part.
    pub stable: bool,
    /// Largest real part among the drift eigenvalues.
    pub max_re_eig: f64,
    /// Verdict of the equal-damping threshold inequality
    /// g2^2 > g1^2 - (kappa gamma / 2) (1 + 4 Delta^2 / (gamma + 2 kappa)^2);
    /// absent when gamma1 != gamma2.
    pub closed_form: Option<bool>,
}

/// Checks stability of the resonant drift, both numerically and (for
/// equal mechanical damping) against the closed-form threshold.
pub fn stability_check(params: &SystemParams) -> Result<StabilityReport> {
    let dd = build_drift_diffusion(params)?;
    let max_re = max_re_eigenvalue(&dd.a);
    let closed_form = if params.gamma1 == params.gamma2 {
        let gamma = params.gamma1;
        let margin = 0.5 * params.kappa * gamma
            * (1.0 + 4.0 * params.delta.powi(2) / (gamma + 2.0 * params.kappa).powi(2));
        Some(params.g2.powi(2) > params.g1.powi(2) - margin)
    } else {
        None
    };
    Ok(StabilityReport {
        stable: max_re < 0.0,
        max_re_eig: max_re,
        closed_form,
    })
}

/// Time at which the entanglement of the stable system has essentially
/// saturated: t_s = (kappa^2 + Delta^2) / (G^2 kappa) with
/// G^2 = g2^2 - g1^2.
pub fn saturation_time(params: &SystemParams) -> Result<f64> {
    let sq = SqueezeParams::from_couplings(params.g1, params.g2)?;
    Ok((params.kappa.powi(2) + params.delta.powi(2)) / (sq.cal_g.powi(2) * params.kappa))
}

/// Sampled second-moment trajectory of the three-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementTrajectory {
    /// Sample times in seconds.
    pub times: Vec<f64>,
    /// Logarithmic negativity of the two-resonator reduction.
    pub en: Vec<f64>,
    /// Cavity photon number above the displaced frame.
    pub photon_number: Vec<f64>,
    /// Phonon occupancies of the two resonators.
    pub occupancies: Vec<[f64; 2]>,
}

impl EntanglementTrajectory {
    pub(crate) fn with_capacity(n: usize) -> Self {
        EntanglementTrajectory {
            times: Vec::with_capacity(n),
            en: Vec::with_capacity(n),
            photon_number: Vec::with_capacity(n),
            occupancies: Vec::with_capacity(n),
        }
    }
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

pub(crate) fn record_sample(
    cm: &DMatrix<f64>,
    t: f64,
    traj: &mut EntanglementTrajectory,
) -> Result<()> {
    if cm.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteCovariance { t });
    }
    let state = CovarianceMatrix::from_symmetric_unchecked(cm.clone());
    traj.times.push(t);
    traj.en.push(log_negativity(&state.restrict(&MECHANICAL_MODES)?)?);
    traj.photon_number.push(0.5 * (cm[(0, 0)] + cm[(1, 1)] - 1.0));
    traj.occupancies.push([
        0.5 * (cm[(2, 2)] + cm[(3, 3)] - 1.0),
        0.5 * (cm[(4, 4)] + cm[(5, 5)] - 1.0),
    ]);
    Ok(())
}

/// Shared input checks of the trajectory solvers: a three-mode state and
/// a strictly increasing grid of non-negative times.
pub(crate) fn validate_evolution_inputs(
    cm0: &CovarianceMatrix,
    t_grid: &[f64],
) -> Result<()> {
    if cm0.n_modes() != 3 {
        return Err(Error::InvalidParameter {
            name: "cm0",
            reason: format!("expected 3 modes, got {}", cm0.n_modes()),
        });
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "t_grid",
            reason: "empty time grid".into(),
        });
    }
    if t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "t_grid",
            reason: "times must be non-negative and strictly increasing".into(),
        });
    }
    Ok(())
}

/// Propagates the covariance matrix of the three-mode state through the
/// resonant model and samples it on `t_grid`.
///
/// `cm0` is the state at the first grid time. Propagation over each
/// interval is exact: for a stable drift the affine form
/// C(t+h) = e^{Ah} (C - C_ss) e^{A'h} + C_ss is used around the steady
/// state, otherwise the step transition pair (Phi, Q) is formed from a
/// block matrix exponential.
pub fn evolve(
    cm0: &CovarianceMatrix,
    params: &SystemParams,
    t_grid: &[f64],
) -> Result<EntanglementTrajectory> {
    validate_evolution_inputs(cm0, t_grid)?;
    let dd = build_drift_diffusion(params)?;
    let stable = max_re_eigenvalue(&dd.a) < 0.0;
    let steady = if stable { Some(solve_lyapunov(&dd.a, &dd.d)?) } else { None };

    let mut traj = EntanglementTrajectory::with_capacity(t_grid.len());
    let mut cm = cm0.matrix().clone();
    record_sample(&cm, t_grid[0], &mut traj)?;

    for w in t_grid.windows(2) {
        let h = w[1] - w[0];
        match &steady {
            Some(css) => {
                let phi = expm(&(&dd.a * h));
                cm = &phi * (&cm - css) * phi.transpose() + css;
            }
            None => {
                let (phi, q) = propagation_pair(&dd.a, &dd.d, h);
                cm = &phi * &cm * phi.transpose() + q;
            }
        }
        symmetrize(&mut cm);
        record_sample(&cm, w[1], &mut traj)?;
    }
    Ok(traj)
}

/// Steady-state covariance matrix of the resonant model.
///
/// Fails with the largest drift eigenvalue when the drift is unstable.
pub fn steady_state(params: &SystemParams) -> Result<CovarianceMatrix> {
    let dd = build_drift_diffusion(params)?;
    let max_re = max_re_eigenvalue(&dd.a);
    if max_re >= 0.0 {
        return Err(Error::UnstableDrift { max_re_eig: max_re });
    }
    let c = solve_lyapunov(&dd.a, &dd.d)?;
    CovarianceMatrix::new(c)
}

/// Default initial state of the simulations: cavity vacuum tensored with
/// the thermal state of the two resonators.
pub fn thermal_initial_state(params: &SystemParams) -> Result<CovarianceMatrix> {
    CovarianceMatrix::thermal(&[0.0, params.nbar1, params.nbar2])
}

/// Steady-state moments in the Bogoliubov-transformed mechanical frame
/// and the equivalent physical-mode correlations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovSteadyState {
    /// Squeeze parameter of the frame, tanh r = g1/g2.
    pub r: f64,
    /// Occupancy of the heated Bogoliubov mode.
    pub n1_eff: f64,
    /// Occupancy of the cavity-cooled Bogoliubov mode.
    pub n2_cool: f64,
    /// Cross correlation of the two Bogoliubov modes.
    pub m_beta: Complex64,
    /// Collective cooperativity 2 (g2^2 - g1^2) / (gamma kappa).
    pub c_minus: f64,
    /// Damping ratio gamma / (gamma + 2 kappa).
    pub epsilon: f64,
    /// Scaled detuning 2 Delta / (gamma + 2 kappa).
    pub delta_ratio: f64,
    /// The same moments expressed for the physical resonators.
    pub corr_b: ModeCorrelations,
}

/// Thermal moments seen by the Bogoliubov modes: occupancies and the
/// real cross correlation the squeeze transform imprints on the
/// independent thermal baths.
pub fn effective_bath(r: f64, nbar1: f64, nbar2: f64) -> (f64, f64, f64) {
    let (ch, sh) = (r.cosh(), r.sinh());
    let n1_eff = nbar1 * ch * ch + (nbar2 + 1.0) * sh * sh;
    let n2_eff = nbar2 * ch * ch + (nbar1 + 1.0) * sh * sh;
    let m_eff = ch * sh * (nbar1 + nbar2 + 1.0);
    (n1_eff, n2_eff, m_eff)
}

/// Analytic steady state of the mechanical moments, valid for equal
/// mechanical damping and g2 > g1.
///
/// The cavity cools the bright Bogoliubov mode with cooperativity
/// C_minus while the dark mode keeps its effective bath occupancy; the
/// residual cross correlation is filtered by the cavity response.
pub fn bogoliubov_steady_analytic(params: &SystemParams) -> Result<BogoliubovSteadyState> {
    params.validate()?;
    if params.gamma1 != params.gamma2 {
        return Err(Error::InvalidParameter {
            name: "gamma2",
            reason: "analytic steady state requires equal mechanical damping".into(),
        });
    }
    let gamma = params.gamma1;
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "gamma1",
            reason: "analytic steady state requires nonzero mechanical damping".into(),
        });
    }
    let sq = SqueezeParams::from_couplings(params.g1, params.g2)?;
    let r = sq.r;
    let (ch, sh) = (r.cosh(), r.sinh());

    let c_minus = 2.0 * sq.cal_g.powi(2) / (gamma * params.kappa);
    let epsilon = gamma / (gamma + 2.0 * params.kappa);
    let delta_ratio = 2.0 * params.delta / (gamma + 2.0 * params.kappa);

    let (n1_eff, n2_eff, m_eff) = effective_bath(r, params.nbar1, params.nbar2);
    let cooling = (1.0 - epsilon) * c_minus / (1.0 + delta_ratio.powi(2) + c_minus);
    let n2_cool = n2_eff * (1.0 - cooling);
    let response = Complex64::new(2.0, 2.0 * delta_ratio);
    let m_beta = m_eff * response / (response + (1.0 - epsilon) * c_minus);

    let total = 1.0 + n1_eff + n2_cool;
    let shared = sh * sh * total - 2.0 * ch * sh * m_beta.re;
    let corr_b = ModeCorrelations {
        n_b1: n1_eff + shared,
        n_b2: n2_cool + shared,
        m_b: ch * ch * m_beta + sh * sh * m_beta.conj() - ch * sh * total,
    };
    Ok(BogoliubovSteadyState {
        r,
        n1_eff,
        n2_cool,
        m_beta,
        c_minus,
        epsilon,
        delta_ratio,
        corr_b,
    })
}

/// Smaller partial-transpose symplectic eigenvalue (times two) of the
/// steady mechanical state when the Bogoliubov cross correlation is
/// dropped, as a function of the squeeze parameter and the cooperativity
/// C1 = 2 g1^2 / (kappa gamma) of the squeezing tone.
///
/// `params` supplies the bath occupancies and the damping and detuning
/// ratios; its coupling fields are ignored.
pub fn nu_exact_decoupled(r: f64, c1: f64, params: &SystemParams) -> Result<f64> {
    params.validate()?;
    if params.gamma1 != params.gamma2 || params.gamma1 <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "gamma2",
            reason: "closed-form expression requires equal nonzero damping".into(),
        });
    }
    if r <= 0.0 || c1 <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: "squeeze parameter and cooperativity must be positive".into(),
        });
    }
    let gamma = params.gamma1;
    let epsilon = gamma / (gamma + 2.0 * params.kappa);
    let delta_ratio = 2.0 * params.delta / (gamma + 2.0 * params.kappa);
    let (ch2, sh2) = (r.cosh().powi(2), r.sinh().powi(2));

    let n1_eff = params.nbar1 * ch2 + (params.nbar2 + 1.0) * sh2;
    let n2_eff = params.nbar2 * ch2 + (params.nbar1 + 1.0) * sh2;
    let cooling = (1.0 - epsilon) * c1 / (sh2 * (1.0 + delta_ratio.powi(2)) + c1);
    let n2_cool = n2_eff * (1.0 - cooling);

    let n_plus = n1_eff + n2_cool;
    let n_minus = n1_eff - n2_cool;
    Ok((n_plus + 1.0) * (ch2 + sh2)
        - (n_minus.powi(2) + 4.0 * (n_plus + 1.0).powi(2) * sh2 * ch2).sqrt())
}

/// Large-cooperativity approximation of [`nu_exact_decoupled`]:
/// nu ~ 2 e^{-2r} + (1 + nbar1 + nbar2) e^{2r} / (4 C1).
pub fn nu_approx(r: f64, c1: f64, nbar1: f64, nbar2: f64) -> f64 {
    2.0 * (-2.0 * r).exp() + (1.0 + nbar1 + nbar2) * (2.0 * r).exp() / (4.0 * c1)
}

/// Squeeze parameter minimizing [`nu_approx`].
pub fn r_opt(c1: f64, nbar1: f64, nbar2: f64) -> f64 {
    0.25 * (8.0 * c1 / (nbar1 + nbar2 + 1.0)).ln()
}

/// Logarithmic negativity of [`nu_approx`] at the optimal squeeze
/// parameter.
pub fn en_opt(c1: f64, nbar1: f64, nbar2: f64) -> f64 {
    0.5 * (c1 / (2.0 * (1.0 + nbar1 + nbar2))).ln()
}
