//! Simulated homodyne readout of the mechanical state and statistical
//! reconstruction of its covariance matrix.
//!
//! Each resonator is read through a weak auxiliary cavity mode driven on its
//! own red sideband. In the adiabatic regime, where the probe coupling is far
//! below the drive couplings and its back-action on the mechanics is
//! negligible, the probe output is a scaled copy of the resonator
//! annihilation operator plus the vacuum input field. Homodyning the two
//! probe outputs at local-oscillator phases (theta1, theta2) therefore
//! samples the rotated quadrature pair
//!
//! ```text
//! q_j(theta_j) = x_j cos(theta_j) + p_j sin(theta_j)
//! ```
//!
//! with additive Gaussian shot noise of input-referred variance
//! kappa / (2 Gp_j^2) per record. The x and p quadratures of one resonator
//! do not commute and are never measured jointly; cycling through a small
//! set of phase pairs instead pins every second moment of the two-mode
//! state, with the symmetrized in-mode cross moment recovered from the
//! variance of the diagonal quadrature at theta = pi/4.
//!
//! Reconstruction inverts the linear map from the ten independent second
//! moments to the per-pair sample variances and cross covariance, subtracts
//! the known shot noise, and reports bootstrap standard errors. Estimates
//! that land outside the uncertainty relation, which happens at small sample
//! counts, are clamped by the smallest isotropic noise addition that
//! restores physicality.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::gaussian::{self, CovarianceMatrix};
use crate::{Error, Result};

/// Probe couplings above this fraction of the corresponding drive coupling
/// leave the back-action-negligible regime the readout model assumes.
pub const BACK_ACTION_COUPLING_RATIO: f64 = 0.01;

/// Number of bootstrap resamples behind every reported standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Fixed seed of the bootstrap resampling stream. The estimator takes no
/// seed of its own so that identical records always produce identical
/// estimates; the resampling randomness is internal plumbing, not part of
/// the statistical model.
const BOOTSTRAP_SEED: u64 = 0x9e3779b97f4a7c15;

/// Tolerance for recognizing a local-oscillator phase as 0 or pi/2 mod pi.
const PHASE_TOL: f64 = 1e-9;

/// Relative eigenvalue cutoff below which a direction of the moment normal
/// equations counts as undetermined.
const RANK_TOL: f64 = 1e-8;

/// Threshold on null-vector components for naming a moment as missing.
const NULL_SUPPORT_TOL: f64 = 1e-8;

/// Human-readable names of the ten independent second moments, in the
/// ordering used by the internal least-squares system.
const MOMENT_NAMES: [&str; 10] = [
    "x1x1", "x1p1", "p1p1", "x2x2", "x2p2", "p2p2", "x1x2", "x1p2", "p1x2", "p1p2",
];

/// Readout configuration for the two probe modes.
#[derive(Debug, Clone)]
pub struct ProbeConfig {
    /// Probe coupling to resonator 1, >= 0.
    pub gp1: f64,
    /// Probe coupling to resonator 2, >= 0.
    pub gp2: f64,
    /// Probe cavity amplitude decay rate, > 0.
    pub kappa: f64,
    /// Joint records drawn per local-oscillator phase pair, >= 2.
    pub n_samples: usize,
    /// Local-oscillator phase pairs (theta1, theta2) in radians.
    pub phase_grid: Vec<(f64, f64)>,
}

impl ProbeConfig {
    /// Validates and builds a configuration. The phase grid must expose
    /// both the x quadrature (a phase at 0 mod pi) and the p quadrature
    /// (a phase at pi/2 mod pi) of each mode; that much is necessary for
    /// any reconstruction, though not yet sufficient, and grids that pass
    /// here can still leave individual moments undetermined.
    pub fn new(
        gp: (f64, f64),
        kappa: f64,
        n_samples: usize,
        phase_grid: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let cfg = Self {
            gp1: gp.0,
            gp2: gp.1,
            kappa,
            n_samples,
            phase_grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration with the five-pair grid of [`Self::standard_phase_grid`].
    pub fn with_standard_grid(gp: (f64, f64), kappa: f64, n_samples: usize) -> Result<Self> {
        Self::new(gp, kappa, n_samples, Self::standard_phase_grid())
    }

    /// The default complete phase grid. The (0, 0) and (pi/2, pi/2) pairs
    /// pin the x and p variances and the like-quadrature cross moments, the
    /// two mixed pairs pin the opposite-quadrature cross moments, and the
    /// diagonal (pi/4, pi/4) pair determines the symmetrized in-mode xp
    /// moments through the rotated variances. The final anti-diagonal pair
    /// (pi/4, 3 pi/4) measures a joint quadrature combination that is
    /// squeezed whenever the modes carry two-mode-squeezing correlations;
    /// without it the corresponding cross moments are determined only as
    /// differences of individually wide statistics, and the reconstruction
    /// of strongly correlated states loses the squeezed directions to
    /// sampling noise.
    pub fn standard_phase_grid() -> Vec<(f64, f64)> {
        use std::f64::consts::FRAC_PI_2 as P2;
        use std::f64::consts::FRAC_PI_4 as P4;
        vec![
            (0.0, 0.0),
            (P2, P2),
            (0.0, P2),
            (P2, 0.0),
            (P4, P4),
            (P4, 3.0 * P4),
        ]
    }

    /// Checks field domains and the per-mode quadrature coverage of the
    /// phase grid.
    pub fn validate(&self) -> Result<()> {
        for (name, value, ok) in [
            ("gp1", self.gp1, self.gp1 >= 0.0),
            ("gp2", self.gp2, self.gp2 >= 0.0),
            ("kappa", self.kappa, self.kappa > 0.0),
        ] {
            if !value.is_finite() || !ok {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("value {value} violates the sign or finiteness constraint"),
                });
            }
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidParameter {
                name: "n_samples",
                reason: format!("{} samples cannot determine a variance", self.n_samples),
            });
        }
        if self.phase_grid.is_empty() {
            return Err(Error::InvalidParameter {
                name: "phase_grid",
                reason: "at least one phase pair required".into(),
            });
        }
        for &(t1, t2) in &self.phase_grid {
            if !t1.is_finite() || !t2.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "phase_grid",
                    reason: format!("non-finite phase pair ({t1}, {t2})"),
                });
            }
        }
        for (name, phases) in [
            (
                "phase_grid (mode 1)",
                self.phase_grid.iter().map(|p| p.0).collect::<Vec<_>>(),
            ),
            (
                "phase_grid (mode 2)",
                self.phase_grid.iter().map(|p| p.1).collect::<Vec<_>>(),
            ),
        ] {
            let has_x = phases.iter().any(|t| t.sin().abs() < PHASE_TOL);
            let has_p = phases.iter().any(|t| t.cos().abs() < PHASE_TOL);
            if !has_x || !has_p {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "grid must include a phase at 0 and one at pi/2 (mod pi) per mode"
                        .into(),
                });
            }
        }
        Ok(())
    }

    /// Input-referred shot-noise variance per record, one value per mode:
    /// kappa / (2 Gp_j^2). Infinite when the corresponding coupling is zero,
    /// since a decoupled probe transduces no signal.
    pub fn shot_variance(&self) -> (f64, f64) {
        (
            self.kappa / (2.0 * self.gp1 * self.gp1),
            self.kappa / (2.0 * self.gp2 * self.gp2),
        )
    }

    /// Whether both probe couplings sit below
    /// [`BACK_ACTION_COUPLING_RATIO`] times the corresponding drive
    /// coupling, the regime in which the probe back-action on the mechanics
    /// is negligible and the readout model applies.
    pub fn back_action_negligible(&self, drive_couplings: (f64, f64)) -> bool {
        self.gp1 < BACK_ACTION_COUPLING_RATIO * drive_couplings.0
            && self.gp2 < BACK_ACTION_COUPLING_RATIO * drive_couplings.1
    }
}

/// Ratio of transduced signal variance to shot-noise variance at the probe
/// output, per unit of mechanical quadrature variance, one value per mode.
/// A quadrature with variance v is read out with signal-to-noise ratio v
/// times this number, so at vacuum level (v = 1/2) signal and shot noise
/// balance exactly when Gp^2 = kappa. The ratio vanishes with the coupling
/// and grows with its square.
pub fn probe_output_snr(cfg: &ProbeConfig) -> (f64, f64) {
    (
        2.0 * cfg.gp1 * cfg.gp1 / cfg.kappa,
        2.0 * cfg.gp2 * cfg.gp2 / cfg.kappa,
    )
}

/// Joint homodyne records for one local-oscillator phase pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordBlock {
    /// Local-oscillator phases (theta1, theta2) of this block.
    pub phases: (f64, f64),
    /// Per-mode record values; `values[0][k]` and `values[1][k]` form one
    /// simultaneous measurement of the two probe outputs.
    pub values: [Vec<f64>; 2],
}

/// Homodyne records for a full phase grid, one block per pair in grid
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneRecords {
    /// Record blocks, one per phase pair.
    pub blocks: Vec<RecordBlock>,
}

/// Draws homodyne records of a two-mode mechanical state.
///
/// For each phase pair the measured pair (q_1(theta1), q_2(theta2)) is
/// jointly Gaussian with the covariance induced by `cm_mech` plus
/// independent per-mode shot noise, and `cfg.n_samples` joint draws are
/// taken. Records are fluctuation values around the classical mean, so
/// their population mean is zero.
///
/// Every block runs on its own stream of one counter-based generator keyed
/// by `seed`, which makes the output bit-identical for a given seed
/// regardless of evaluation order; callers may fan blocks or whole seeds
/// out across threads without coordination.
pub fn simulate_homodyne(
    cm_mech: &CovarianceMatrix,
    cfg: &ProbeConfig,
    seed: u64,
) -> Result<HomodyneRecords> {
    cfg.validate()?;
    if cm_mech.n_modes() != 2 {
        return Err(Error::InvalidParameter {
            name: "cm_mech",
            reason: format!("expected a two-mode state, got {} modes", cm_mech.n_modes()),
        });
    }
    let shot = cfg.shot_variance();
    if !shot.0.is_finite() || !shot.1.is_finite() {
        return Err(Error::InvalidParameter {
            name: "gp",
            reason: "a vanishing probe coupling transduces no signal".into(),
        });
    }
    let m = cm_mech.matrix();
    let mut blocks = Vec::with_capacity(cfg.phase_grid.len());
    for (stream, &(t1, t2)) in cfg.phase_grid.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream as u64);
        let (c1, s1) = (t1.cos(), t1.sin());
        let (c2, s2) = (t2.cos(), t2.sin());
        let v11 = c1 * c1 * m[(0, 0)] + 2.0 * c1 * s1 * m[(0, 1)] + s1 * s1 * m[(1, 1)] + shot.0;
        let v22 = c2 * c2 * m[(2, 2)] + 2.0 * c2 * s2 * m[(2, 3)] + s2 * s2 * m[(3, 3)] + shot.1;
        let v12 = c1 * c2 * m[(0, 2)]
            + c1 * s2 * m[(0, 3)]
            + s1 * c2 * m[(1, 2)]
            + s1 * s2 * m[(1, 3)];
        // Cholesky factor of the 2x2 joint covariance. Positive shot noise
        // keeps it strictly positive definite; the clamp only absorbs
        // round-off in the Schur complement.
        let l11 = v11.sqrt();
        let l21 = v12 / l11;
        let l22 = (v22 - l21 * l21).max(0.0).sqrt();
        let mut a = Vec::with_capacity(cfg.n_samples);
        let mut b = Vec::with_capacity(cfg.n_samples);
        for _ in 0..cfg.n_samples {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            a.push(l11 * z1);
            b.push(l21 * z1 + l22 * z2);
        }
        blocks.push(RecordBlock {
            phases: (t1, t2),
            values: [a, b],
        });
    }
    Ok(HomodyneRecords { blocks })
}

/// Writes records as CSV with columns `mode,phase_rad,sample_index,value`.
/// Rows carrying the same sample index are one joint measurement; the index
/// runs on across blocks so every row is unambiguous even when two blocks
/// share a phase.
pub fn dump_records_csv<W: Write>(records: &HomodyneRecords, w: &mut W) -> io::Result<()> {
    writeln!(w, "mode,phase_rad,sample_index,value")?;
    let mut base = 0usize;
    for block in &records.blocks {
        let n = block.values[0].len();
        for k in 0..n {
            writeln!(w, "1,{},{},{}", block.phases.0, base + k, block.values[0][k])?;
            writeln!(w, "2,{},{},{}", block.phases.1, base + k, block.values[1][k])?;
        }
        base += n;
    }
    Ok(())
}

/// Reconstructed state estimate with statistical and physicality metadata.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Estimated two-mode covariance matrix, clamped to physicality if the
    /// raw moment estimate violated the uncertainty relation.
    pub cm_est: CovarianceMatrix,
    /// Bootstrap standard error of each covariance entry.
    pub stderr: DMatrix<f64>,
    /// Logarithmic negativity of the estimate. Near the boundary of the
    /// uncertainty relation the sampling distribution of this value is
    /// skewed, because the negativity responds much more steeply to a
    /// downward fluctuation of the smallest uncertainty eigenvalue than to
    /// an upward one; the bootstrap error below reflects that spread.
    pub en_est: f64,
    /// Bootstrap standard error of the logarithmic negativity.
    pub en_stderr: f64,
    /// Isotropic variance added by the physicality clamp; zero when the raw
    /// estimate was already physical. A nonzero value is the warning that
    /// the sample count was too small for the noise level.
    pub added_noise: f64,
}

/// Linear map from the ten independent second moments to the per-block
/// sample statistics, prefactored for repeated solves.
///
/// The solve is a generalized least squares with one 3x3 weight matrix per
/// block, the inverse of the sampling covariance of that block's statistics
/// under the Gaussian fourth-moment identities. The weighting matters far
/// beyond efficiency bookkeeping: for strongly correlated states the
/// variances and the cross covariance of one block carry highly correlated
/// errors that cancel in the squeezed combinations, and an unweighted fit
/// would destroy that cancellation by averaging in independent estimates of
/// the same moments from other blocks. With the proper weights the squeezed
/// directions are recovered at their intrinsic relative precision even when
/// the individual entries are orders of magnitude larger.
struct MomentSystem {
    /// Weighted pseudoinverse, 10 rows by 3 per block.
    pinv: DMatrix<f64>,
}

impl MomentSystem {
    /// Builds the weighted system from the block phases and the observed
    /// (shot-inclusive) block statistics, checking first that every moment
    /// is determined and naming the undetermined ones otherwise.
    fn build(blocks: &[RecordBlock], observed: &[(f64, f64, f64)]) -> Result<Self> {
        let rows = 3 * blocks.len();
        let mut a = DMatrix::zeros(rows, 10);
        for (i, block) in blocks.iter().enumerate() {
            let (t1, t2) = block.phases;
            let (c1, s1) = (t1.cos(), t1.sin());
            let (c2, s2) = (t2.cos(), t2.sin());
            let r = 3 * i;
            a[(r, 0)] = c1 * c1;
            a[(r, 1)] = 2.0 * c1 * s1;
            a[(r, 2)] = s1 * s1;
            a[(r + 1, 3)] = c2 * c2;
            a[(r + 1, 4)] = 2.0 * c2 * s2;
            a[(r + 1, 5)] = s2 * s2;
            a[(r + 2, 6)] = c1 * c2;
            a[(r + 2, 7)] = c1 * s2;
            a[(r + 2, 8)] = s1 * c2;
            a[(r + 2, 9)] = s1 * s2;
        }
        // Identifiability comes from the unweighted normal-equations Gram
        // matrix, whose null directions are exactly the moment combinations
        // the grid cannot see; weights are positive definite and cannot
        // change that null space. The eigendecomposition always spans the
        // full ten-dimensional moment space, unlike a thin SVD of the
        // design matrix when there are fewer than ten rows.
        let gram = a.transpose() * &a;
        let eig = nalgebra::SymmetricEigen::new(gram);
        let lmax = eig.eigenvalues.max();
        let mut missing = Vec::new();
        for i in 0..10 {
            for k in 0..10 {
                if eig.eigenvalues[k] <= RANK_TOL * lmax
                    && eig.eigenvectors[(i, k)].abs() > NULL_SUPPORT_TOL
                {
                    missing.push(MOMENT_NAMES[i]);
                    break;
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingMoments { missing });
        }

        // Per-block weights. For a jointly Gaussian record pair with
        // variances va, vb and covariance c, the sampling covariance of
        // (va_hat, vb_hat, c_hat) over n draws is
        //   [[2 va^2,   2 c^2,      2 va c   ],
        //    [2 c^2,    2 vb^2,     2 vb c   ],
        //    [2 va c,   2 vb c,     va vb + c^2]] / n.
        // The weights come from the observed statistics of the same
        // records; at the sample sizes of interest the feasible and exact
        // weights differ at order 1/n.
        let mut normal = DMatrix::zeros(10, 10);
        let mut weighted_t = DMatrix::zeros(10, rows);
        for (i, block) in blocks.iter().enumerate() {
            let (va, vb, c) = observed[i];
            let n = block.values[0].len() as f64;
            let sigma = nalgebra::Matrix3::new(
                2.0 * va * va,
                2.0 * c * c,
                2.0 * va * c,
                2.0 * c * c,
                2.0 * vb * vb,
                2.0 * vb * c,
                2.0 * va * c,
                2.0 * vb * c,
                va * vb + c * c,
            ) / n;
            // A degenerate block (perfectly correlated or constant records)
            // cannot be inverted; fall back to its diagonal so the block
            // still contributes with sane relative weights.
            let w = sigma.try_inverse().unwrap_or_else(|| {
                nalgebra::Matrix3::from_diagonal(&nalgebra::Vector3::new(
                    1.0 / sigma[(0, 0)].max(f64::MIN_POSITIVE),
                    1.0 / sigma[(1, 1)].max(f64::MIN_POSITIVE),
                    1.0 / sigma[(2, 2)].max(f64::MIN_POSITIVE),
                ))
            });
            let ab = a.view((3 * i, 0), (3, 10)).into_owned();
            let atw = ab.transpose() * w;
            normal += &atw * &ab;
            weighted_t.view_mut((0, 3 * i), (10, 3)).copy_from(&atw);
        }
        let neig = nalgebra::SymmetricEigen::new(normal);
        let inv_diag = DMatrix::from_diagonal(&neig.eigenvalues.map(|l| 1.0 / l));
        let normal_inv = &neig.eigenvectors * inv_diag * neig.eigenvectors.transpose();
        Ok(Self {
            pinv: normal_inv * weighted_t,
        })
    }

    /// Solves for the moment vector given the per-block statistics.
    fn solve(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.pinv * y
    }
}

/// Mean-subtracted second moments of one joint record block: the two
/// variances and the cross covariance, with the unbiased 1/(n-1)
/// normalization.
fn block_moments<F>(n: usize, mut pair: F) -> (f64, f64, f64)
where
    F: FnMut(usize) -> (f64, f64),
{
    let (mut s1, mut s2, mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let (a, b) = pair(k);
        s1 += a;
        s2 += b;
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
    }
    let nf = n as f64;
    let c = 1.0 / (nf - 1.0);
    (
        (s11 - s1 * s1 / nf) * c,
        (s22 - s2 * s2 / nf) * c,
        (s12 - s1 * s2 / nf) * c,
    )
}

/// Computes the observed (shot-inclusive) statistics of every block.
fn observed_statistics<F>(blocks: &[RecordBlock], mut moments: F) -> Vec<(f64, f64, f64)>
where
    F: FnMut(&RecordBlock) -> (f64, f64, f64),
{
    blocks.iter().map(|block| moments(block)).collect()
}

/// Assembles the target vector for the least-squares solve, with the
/// per-mode shot noise subtracted from the variance rows. Cross-covariance
/// rows need no subtraction because the two probe noises are independent.
fn statistics_vector(stats: &[(f64, f64, f64)], shot: (f64, f64)) -> DVector<f64> {
    let mut y = DVector::zeros(3 * stats.len());
    for (i, &(v1, v2, c12)) in stats.iter().enumerate() {
        y[3 * i] = v1 - shot.0;
        y[3 * i + 1] = v2 - shot.1;
        y[3 * i + 2] = c12;
    }
    y
}

/// Builds the symmetric 4x4 covariance matrix from the moment vector in
/// [`MOMENT_NAMES`] order.
fn assemble_covariance(m: &DVector<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(4, 4);
    out[(0, 0)] = m[0];
    out[(1, 1)] = m[2];
    out[(2, 2)] = m[3];
    out[(3, 3)] = m[5];
    let pairs = [
        (0, 1, m[1]),
        (2, 3, m[4]),
        (0, 2, m[6]),
        (0, 3, m[7]),
        (1, 2, m[8]),
        (1, 3, m[9]),
    ];
    for (i, j, v) in pairs {
        out[(i, j)] = v;
        out[(j, i)] = v;
    }
    out
}

/// Clamps a symmetric matrix to the nearest physical covariance matrix
/// along the isotropic-noise direction, returning the result and the added
/// variance.
///
/// Adding c to the diagonal shifts every eigenvalue of C + (i/2) Omega by
/// exactly c, because the identity commutes with the symplectic form. The
/// smallest admissible c is therefore read off the most negative
/// uncertainty eigenvalue directly, with no search. The added noise is
/// local and phase-insensitive, so the clamp can only lower an
/// entanglement estimate, never inflate it.
pub fn clamp_to_physical(m: DMatrix<f64>) -> Result<(CovarianceMatrix, f64)> {
    let sym = (&m + m.transpose()) * 0.5;
    let scale = sym.amax().max(1.0);
    let probe = CovarianceMatrix::from_symmetric_unchecked(sym.clone());
    let min_eig = probe.min_uncertainty_eigenvalue();
    if min_eig >= -gaussian::PHYSICALITY_TOL * scale {
        return Ok((CovarianceMatrix::new(sym)?, 0.0));
    }
    let added = -min_eig + 2.0 * gaussian::PHYSICALITY_TOL * scale;
    let fixed = &sym + DMatrix::identity(sym.nrows(), sym.ncols()) * added;
    Ok((CovarianceMatrix::new(fixed)?, added))
}

/// Reconstructs the two-mode covariance matrix and its logarithmic
/// negativity from homodyne records.
///
/// The estimator subtracts the shot noise known from `cfg`, solves the
/// moment system by least squares over all blocks, clamps the result to
/// physicality if needed, and attaches bootstrap standard errors from
/// [`BOOTSTRAP_RESAMPLES`] within-block resamples of the full pipeline.
/// The whole computation is a deterministic function of the records, so
/// repeated calls agree bit for bit.
pub fn reconstruct_cm(records: &HomodyneRecords, cfg: &ProbeConfig) -> Result<Reconstruction> {
    let shot = cfg.shot_variance();
    if !shot.0.is_finite() || !shot.1.is_finite() {
        return Err(Error::InvalidParameter {
            name: "gp",
            reason: "shot noise of a vanishing probe coupling cannot be subtracted".into(),
        });
    }
    if records.blocks.is_empty() {
        return Err(Error::InvalidParameter {
            name: "records",
            reason: "no record blocks".into(),
        });
    }
    for block in &records.blocks {
        let n = block.values[0].len();
        if n < 2 || block.values[1].len() != n {
            return Err(Error::InvalidParameter {
                name: "records",
                reason: format!(
                    "block at phases ({}, {}) needs two equal-length series of at least 2 samples",
                    block.phases.0, block.phases.1
                ),
            });
        }
    }
    let observed = observed_statistics(&records.blocks, |block| {
        let n = block.values[0].len();
        block_moments(n, |k| (block.values[0][k], block.values[1][k]))
    });
    let system = MomentSystem::build(&records.blocks, &observed)?;

    let y = statistics_vector(&observed, shot);
    let (cm_est, added_noise) = clamp_to_physical(assemble_covariance(&system.solve(&y)))?;
    let en_est = gaussian::log_negativity(&cm_est)?;

    let mut cm_samples = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut en_samples = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for b in 0..BOOTSTRAP_RESAMPLES {
        let mut rng = ChaCha12Rng::seed_from_u64(BOOTSTRAP_SEED);
        rng.set_stream(b as u64);
        let resampled = observed_statistics(&records.blocks, |block| {
            let n = block.values[0].len();
            block_moments(n, |_| {
                let j = rng.random_range(0..n);
                (block.values[0][j], block.values[1][j])
            })
        });
        let y_b = statistics_vector(&resampled, shot);
        let (cm_b, _) = clamp_to_physical(assemble_covariance(&system.solve(&y_b)))?;
        en_samples.push(gaussian::log_negativity(&cm_b)?);
        cm_samples.push(cm_b.matrix().clone());
    }

    let mut stderr = DMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            let values: Vec<f64> = cm_samples.iter().map(|m| m[(i, j)]).collect();
            stderr[(i, j)] = sample_std(&values);
        }
    }
    let en_stderr = sample_std(&en_samples);

    Ok(Reconstruction {
        cm_est,
        stderr,
        en_est,
        en_stderr,
        added_noise,
    })
}

/// Standard deviation with the 1/(n-1) normalization.
fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
