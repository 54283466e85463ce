//! Linearized dynamics beyond the resonant approximation.
//!
//! Here the drift matrix of the quadrature moments inherits the full time
//! dependence of the classical fields from [`crate::mean_field`]: counter
//! rotating sidebands, switch-on transients, and the oscillating part of
//! the radiation-pressure detuning shift. The module propagates second
//! moments through that drift, folds the periodic long-time drift into a
//! cosine/sine harmonic decomposition, classifies stability through
//! Floquet exponents of the monodromy matrix, and reports the ratios that
//! justify (or rule out) the resonant approximation.
//!
//! The cavity couples to each resonator through two complex scalars: the
//! co-rotating amplitude `u_j` and the counter rotating amplitude `v_j`,
//! both proportional to the cavity field and a sideband phase. Their real
//! and imaginary parts enter the drift at fixed positions, so the drift is
//! assembled from a constant part plus five scalar-valued slots (u1, v1,
//! u2, v2, and the real detuning modulation).

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::gaussian::CovarianceMatrix;
use crate::mean_field::{mean_field_expansion, FieldMode, MeanFieldExpansion};
use crate::params::SystemParams;
use crate::rwa::{
    build_drift_diffusion, record_sample, symmetrize, validate_evolution_inputs,
    EntanglementTrajectory,
};
use crate::{Error, Result};

/// Integration steps per period of the fastest drift component when
/// propagating covariances.
const EVOLVE_STEPS_PER_PERIOD: f64 = 50.0;

/// Integration steps per period of the fastest drift component when
/// forming the monodromy matrix.
const FLOQUET_STEPS_PER_PERIOD: f64 = 200.0;

/// Minimum number of monodromy integration steps.
const FLOQUET_MIN_STEPS: usize = 2000;

/// Harmonic frequencies closer than this fraction of the beat frequency
/// are merged into one line; lines below it count as static.
const FREQ_TOL_FRACTION: f64 = 1e-9;

/// Relative amplitude below which a folded harmonic is dropped.
const HARMONIC_PRUNE_REL: f64 = 1e-14;

/// Largest denominator searched when testing frequency ratios for a
/// common period.
const MAX_RATIO_DENOMINATOR: u64 = 1000;

/// Default threshold on the sideband-resolution ratios below which the
/// resonant approximation is considered justified.
pub const RWA_RATIO_THRESHOLD: f64 = 0.1;

/// Where the real and imaginary part of one drift slot enter the 6x6
/// drift: entry (i, j) receives `re_coeff * Re(s) + im_coeff * Im(s)`.
type Placement = Vec<(usize, usize, f64, f64)>;

/// Placement of the co-rotating coupling to the resonator whose
/// quadratures start at row `m`.
fn co_rotating_placement(m: usize) -> Placement {
    vec![
        (0, m, 0.0, 1.0),
        (0, m + 1, 1.0, 0.0),
        (1, m, -1.0, 0.0),
        (1, m + 1, 0.0, 1.0),
        (m, 0, 0.0, -1.0),
        (m, 1, 1.0, 0.0),
        (m + 1, 0, -1.0, 0.0),
        (m + 1, 1, 0.0, -1.0),
    ]
}

/// Placement of the counter rotating coupling to the resonator whose
/// quadratures start at row `m`.
fn counter_rotating_placement(m: usize) -> Placement {
    vec![
        (0, m, 0.0, 1.0),
        (0, m + 1, -1.0, 0.0),
        (1, m, -1.0, 0.0),
        (1, m + 1, 0.0, -1.0),
        (m, 0, 0.0, 1.0),
        (m, 1, -1.0, 0.0),
        (m + 1, 0, -1.0, 0.0),
        (m + 1, 1, 0.0, -1.0),
    ]
}

/// Placement of the real detuning modulation.
fn detuning_placement() -> Placement {
    vec![(0, 1, 1.0, 0.0), (1, 0, -1.0, 0.0)]
}

fn slot_placements() -> [Placement; 5] {
    [
        co_rotating_placement(2),
        counter_rotating_placement(2),
        co_rotating_placement(4),
        counter_rotating_placement(4),
        detuning_placement(),
    ]
}

/// Phase shifts turning the cavity field into the four coupling slots.
fn slot_shifts(params: &SystemParams) -> [f64; 4] {
    let wm = params.omega_minus();
    [
        wm - params.omega1,
        wm + params.omega1,
        wm - params.omega2,
        wm + params.omega2,
    ]
}

/// Damping, bare detuning, and nothing else: the part of the drift that
/// does not depend on the classical fields.
fn constant_drift(params: &SystemParams) -> DMatrix<f64> {
    let (h1, h2) = (0.5 * params.gamma1, 0.5 * params.gamma2);
    let mut a = DMatrix::from_diagonal(&nalgebra::dvector![
        -params.kappa,
        -params.kappa,
        -h1,
        -h1,
        -h2,
        -h2
    ]);
    a[(0, 1)] = params.delta0;
    a[(1, 0)] = -params.delta0;
    a
}

/// One exponential term of a slot series after folding in the coupling
/// power and the sideband shift.
#[derive(Debug, Clone, Copy)]
struct SlotTerm {
    chi: Complex64,
    zeta: Complex64,
    degree: u32,
}

fn eval_terms(terms: &[SlotTerm], t: f64) -> Complex64 {
    let mut out = Complex64::ZERO;
    for term in terms {
        let mut val = term.chi * (term.zeta * t).exp();
        for _ in 0..term.degree {
            val *= t;
        }
        out += val;
    }
    out
}

/// Pointwise evaluator of the time dependent drift, valid in both field
/// modes. The cavity and resonator series are evaluated once per call and
/// distributed into the five slots through phase factors.
struct DriftEvaluator {
    a_const: DMatrix<f64>,
    alpha_terms: Vec<SlotTerm>,
    beta_terms: [Vec<SlotTerm>; 2],
    shifts: [f64; 4],
    placements: [Placement; 5],
    max_rate: f64,
}

impl DriftEvaluator {
    fn new(expansion: &MeanFieldExpansion) -> Self {
        let params = expansion.params();
        let g = params.g_single;
        let shifts = slot_shifts(params);
        let to_terms = |series: &crate::mean_field::ExponentialSeries| -> Vec<SlotTerm> {
            series
                .terms()
                .iter()
                .map(|t| SlotTerm { chi: g * t.chi, zeta: t.zeta, degree: t.degree })
                .collect()
        };
        let alpha_terms = to_terms(&expansion.alpha_total());
        let beta_terms = [to_terms(&expansion.beta_total(0)), to_terms(&expansion.beta_total(1))];

        let mut max_rate = params.omega_plus();
        for term in &alpha_terms {
            for shift in shifts {
                max_rate = max_rate.max((term.zeta.im + shift).abs());
            }
            max_rate = max_rate.max(term.zeta.re.abs());
        }
        for terms in &beta_terms {
            for term in terms {
                max_rate = max_rate.max(term.zeta.im.abs()).max(term.zeta.re.abs());
            }
        }

        DriftEvaluator {
            a_const: constant_drift(params),
            alpha_terms,
            beta_terms,
            shifts,
            placements: slot_placements(),
            max_rate,
        }
    }

    fn evaluate_into(&self, t: f64, out: &mut DMatrix<f64>) {
        out.copy_from(&self.a_const);
        let alpha = eval_terms(&self.alpha_terms, t);
        let b = [eval_terms(&self.beta_terms[0], t), eval_terms(&self.beta_terms[1], t)];
        let phi = 2.0 * (b[0].re + b[1].re);
        for (k, placement) in self.placements.iter().enumerate() {
            let value = if k < 4 {
                alpha * Complex64::new(0.0, self.shifts[k] * t).exp()
            } else {
                Complex64::new(phi, 0.0)
            };
            for &(i, j, cr, ci) in placement {
                out[(i, j)] += cr * value.re + ci * value.im;
            }
        }
    }

    #[cfg(test)]
    fn evaluate(&self, t: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(6, 6);
        self.evaluate_into(t, &mut out);
        out
    }
}

/// One spectral line of the periodic drift.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftHarmonic {
    /// Line frequency in 1/s, strictly positive.
    pub frequency: f64,
    /// Coefficient of cos(frequency t).
    pub a_cos: DMatrix<f64>,
    /// Coefficient of sin(frequency t).
    pub a_sin: DMatrix<f64>,
}

/// Harmonic decomposition A(t) = A0 + sum of cos/sin lines of the drift
/// driven by the periodic long-time fields.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicDrift {
    /// Static part, including the full radiation-pressure detuning shift
    /// and the resonant couplings.
    pub a0: DMatrix<f64>,
    /// Oscillating lines, sorted by increasing frequency.
    pub harmonics: Vec<DriftHarmonic>,
    /// Largest frequency dividing every line, if the lines admit one.
    pub fundamental: Option<f64>,
}

impl PeriodicDrift {
    /// Drift matrix at time `t`.
    pub fn evaluate(&self, t: f64) -> DMatrix<f64> {
        let mut out = self.a0.clone();
        self.evaluate_into(t, &mut out);
        out
    }

    fn evaluate_into(&self, t: f64, out: &mut DMatrix<f64>) {
        out.copy_from(&self.a0);
        for line in &self.harmonics {
            let (s, c) = (line.frequency * t).sin_cos();
            out.zip_apply(&line.a_cos, |acc, x| *acc += c * x);
            out.zip_apply(&line.a_sin, |acc, x| *acc += s * x);
        }
    }

    /// Largest line frequency, zero for a static drift.
    pub fn max_frequency(&self) -> f64 {
        self.harmonics.last().map_or(0.0, |line| line.frequency)
    }
}

/// Folds the steady-mode drift into its harmonic lines.
///
/// Each slot term contributes at a signed frequency (a beat harmonic plus
/// the slot shift); lines closer together than the merge tolerance
/// collapse onto one frequency, and anything below it joins the static
/// part. Transient-mode expansions are rejected because their drift is not
/// periodic.
pub fn build_periodic_drift(expansion: &MeanFieldExpansion) -> Result<PeriodicDrift> {
    if expansion.mode != FieldMode::Steady {
        return Err(Error::InvalidParameter {
            name: "expansion",
            reason: "harmonic folding needs steady-mode fields; transients are not periodic"
                .into(),
        });
    }
    let params = expansion.params();
    let g = params.g_single;
    let omega_plus = params.omega_plus();
    let freq_tol = FREQ_TOL_FRACTION * omega_plus;
    let shifts = slot_shifts(params);
    let placements = slot_placements();

    // Signed spectral lines per slot: (slot, frequency, complex amplitude).
    let mut lines: Vec<(usize, f64, Complex64)> = Vec::new();
    let alpha = expansion.alpha_total();
    for term in alpha.terms() {
        let n = term.harmonic().expect("steady series contain only harmonics");
        for (k, shift) in shifts.iter().enumerate() {
            lines.push((k, n as f64 * omega_plus + shift, g * term.chi));
        }
    }
    for j in 0..2 {
        for term in expansion.beta_total(j).terms() {
            let n = term.harmonic().expect("steady series contain only harmonics");
            let f = n as f64 * omega_plus;
            lines.push((4, f, g * term.chi));
            lines.push((4, -f, g * term.chi.conj()));
        }
    }

    let mut a0 = constant_drift(params);
    let mut buckets: BTreeMap<i64, (f64, DMatrix<f64>, DMatrix<f64>)> = BTreeMap::new();
    for (slot, f, amp) in lines {
        let key = (f.abs() / freq_tol).round() as i64;
        if key == 0 {
            for &(i, j, cr, ci) in &placements[slot] {
                a0[(i, j)] += cr * amp.re + ci * amp.im;
            }
            continue;
        }
        let sign = if f >= 0.0 { 1.0 } else { -1.0 };
        let entry = buckets
            .entry(key)
            .or_insert_with(|| (f.abs(), DMatrix::zeros(6, 6), DMatrix::zeros(6, 6)));
        for &(i, j, cr, ci) in &placements[slot] {
            entry.1[(i, j)] += cr * amp.re + ci * amp.im;
            entry.2[(i, j)] += sign * (ci * amp.re - cr * amp.im);
        }
    }

    let max_amp = buckets
        .values()
        .map(|(_, c, s)| c.amax().max(s.amax()))
        .fold(a0.amax(), f64::max);
    let harmonics: Vec<DriftHarmonic> = buckets
        .into_values()
        .filter(|(_, c, s)| c.amax().max(s.amax()) > HARMONIC_PRUNE_REL * max_amp)
        .map(|(frequency, a_cos, a_sin)| DriftHarmonic { frequency, a_cos, a_sin })
        .collect();

    let freqs: Vec<f64> = harmonics.iter().map(|h| h.frequency).collect();
    let fundamental = commensurate_fundamental(&freqs);
    Ok(PeriodicDrift { a0, harmonics, fundamental })
}

/// Best rational approximation p/q of `x` with q bounded, by continued
/// fractions; accepted only within `tol` of `x`.
fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    let mut rem = x;
    let (mut h_prev, mut k_prev) = (1u64, 0u64);
    let (mut h, mut k) = (rem.floor() as u64, 1u64);
    for _ in 0..64 {
        if (x - h as f64 / k as f64).abs() <= tol {
            return Some((h, k));
        }
        let frac = rem - rem.floor();
        if frac < 1e-15 {
            break;
        }
        rem = 1.0 / frac;
        let a = rem.floor() as u64;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > max_den {
            break;
        }
        (h_prev, k_prev) = (h, k);
        (h, k) = (h_next, k_next);
    }
    ((x - h as f64 / k as f64).abs() <= tol).then_some((h, k))
}

/// Largest frequency dividing every entry of `freqs` within the merge
/// tolerance, found by rational reconstruction of the ratios against the
/// smallest entry. `None` when the spectrum is empty or the ratios are
/// incommensurate within the search bounds.
fn commensurate_fundamental(freqs: &[f64]) -> Option<f64> {
    let f_min = freqs.iter().copied().fold(f64::INFINITY, f64::min);
    if !f_min.is_finite() || f_min <= 0.0 {
        return None;
    }
    let mut ratios = Vec::with_capacity(freqs.len());
    for &f in freqs {
        let x = f / f_min;
        if x > 1e9 {
            return None;
        }
        ratios.push(rational_approx(x, MAX_RATIO_DENOMINATOR, 1e-9 * x.max(1.0))?);
    }
    let mut lcm: u128 = 1;
    for &(_, q) in &ratios {
        let q = q as u128;
        lcm = lcm / gcd(lcm, q) * q;
        if lcm > 1_000_000_000_000 {
            return None;
        }
    }
    let mut common = lcm;
    for &(p, q) in &ratios {
        common = gcd(common, p as u128 * (lcm / q as u128));
    }
    Some(f_min * common as f64 / lcm as f64)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Propagates the covariance matrix of the three-mode state through the
/// time dependent drift and samples it on `t_grid`.
///
/// The classical fields are expanded to `order_max` in the chosen mode;
/// the moment equation dC/dt = A(t) C + C A(t)' + D is then integrated
/// with a classical fourth-order scheme whose step resolves the fastest
/// drift component with [`EVOLVE_STEPS_PER_PERIOD`] points. Times are
/// absolute: in transient mode the fields switch on at t = 0.
pub fn evolve_full(
    cm0: &CovarianceMatrix,
    params: &SystemParams,
    t_grid: &[f64],
    order_max: usize,
    mode: FieldMode,
) -> Result<EntanglementTrajectory> {
    validate_evolution_inputs(cm0, t_grid)?;
    let expansion = mean_field_expansion(params, order_max, mode)?;
    let eval = DriftEvaluator::new(&expansion);
    let d = build_drift_diffusion(params)?.d;
    let h_max = 2.0 * std::f64::consts::PI / (EVOLVE_STEPS_PER_PERIOD * eval.max_rate);

    let mut traj = EntanglementTrajectory::with_capacity(t_grid.len());
    let mut cm = cm0.matrix().clone();
    record_sample(&cm, t_grid[0], &mut traj)?;

    let rhs = |a: &DMatrix<f64>, c: &DMatrix<f64>| a * c + c * a.transpose() + &d;
    let mut a = DMatrix::zeros(6, 6);
    for w in t_grid.windows(2) {
        let n_sub = ((w[1] - w[0]) / h_max).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / n_sub as f64;
        for s in 0..n_sub {
            let t = w[0] + s as f64 * h;
            eval.evaluate_into(t, &mut a);
            let k1 = rhs(&a, &cm);
            eval.evaluate_into(t + 0.5 * h, &mut a);
            let k2 = rhs(&a, &(&cm + 0.5 * h * &k1));
            let k3 = rhs(&a, &(&cm + 0.5 * h * &k2));
            eval.evaluate_into(t + h, &mut a);
            let k4 = rhs(&a, &(&cm + h * &k3));
            cm += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        symmetrize(&mut cm);
        record_sample(&cm, w[1], &mut traj)?;
    }
    Ok(traj)
}

/// Floquet exponents of the periodic linearized dynamics, sorted by
/// decreasing real part.
///
/// The monodromy matrix is formed by integrating dU/dt = A(t) U over one
/// common period of the steady drift; the exponents are the principal
/// logarithms of its eigenvalues divided by the period. The dynamics is
/// asymptotically stable exactly when every exponent has negative real
/// part. Fails when the drift lines admit no common period.
pub fn floquet_exponents(params: &SystemParams, order_max: usize) -> Result<Vec<Complex64>> {
    let expansion = mean_field_expansion(params, order_max, FieldMode::Steady)?;
    let drift = build_periodic_drift(&expansion)?;
    let fundamental = if drift.harmonics.is_empty() {
        params.omega_plus()
    } else {
        drift.fundamental.ok_or_else(|| Error::IncommensurateFrequencies {
            reason: format!(
                "drift lines {:?} share no period with denominators up to {}",
                drift.harmonics.iter().map(|h| h.frequency).collect::<Vec<_>>(),
                MAX_RATIO_DENOMINATOR
            ),
        })?
    };
    let period = 2.0 * std::f64::consts::PI / fundamental;

    let rate = drift.max_frequency().max(params.omega_plus());
    let by_rate = period * FLOQUET_STEPS_PER_PERIOD * rate / (2.0 * std::f64::consts::PI);
    let n_steps = (by_rate.ceil() as usize).max(FLOQUET_MIN_STEPS);
    let h = period / n_steps as f64;

    let mut u = DMatrix::<f64>::identity(6, 6);
    let mut a = DMatrix::zeros(6, 6);
    for s in 0..n_steps {
        let t = s as f64 * h;
        drift.evaluate_into(t, &mut a);
        let k1 = &a * &u;
        drift.evaluate_into(t + 0.5 * h, &mut a);
        let k2 = &a * &(&u + 0.5 * h * &k1);
        let k3 = &a * &(&u + 0.5 * h * &k2);
        drift.evaluate_into(t + h, &mut a);
        let k4 = &a * &(&u + h * &k3);
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    let mut exponents: Vec<Complex64> = u
        .complex_eigenvalues()
        .iter()
        .map(|lambda| lambda.ln() / period)
        .collect();
    exponents.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(exponents)
}

/// Sideband-resolution ratios behind the resonant approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct RwaValidity {
    /// Named ratios, each of which must stay below the threshold.
    pub ratios: BTreeMap<&'static str, f64>,
    /// Threshold the ratios were compared against.
    pub threshold: f64,
    /// All ratios are below the threshold.
    pub valid: bool,
}

/// [`rwa_validity_with_threshold`] at the default threshold.
pub fn rwa_validity(expansion: &MeanFieldExpansion) -> RwaValidity {
    rwa_validity_with_threshold(expansion, RWA_RATIO_THRESHOLD)
}

/// Compares the effective drive strength and the cavity linewidth against
/// the smallest frequency scale separating the sidebands: both must be
/// small for the resonant approximation to hold.
pub fn rwa_validity_with_threshold(
    expansion: &MeanFieldExpansion,
    threshold: f64,
) -> RwaValidity {
    let params = expansion.params();
    let min_freq = params
        .omega1
        .min(params.omega2)
        .min((params.omega2 - params.omega1).abs());
    let (lower, upper) = expansion.sideband_amplitudes();
    let drive = params.g_single * lower.norm().max(upper.norm());
    let mut ratios = BTreeMap::new();
    ratios.insert("drive_over_min_frequency", drive / min_freq);
    ratios.insert("linewidth_over_min_frequency", params.kappa / min_freq);
    let valid = ratios.values().all(|r| *r < threshold);
    RwaValidity { ratios, threshold, valid }
}

/// Finds drive amplitudes and a bare detuning that realize the requested
/// effective couplings and shifted detuning.
///
/// `targets.g1` and `targets.g2` are the wanted sideband coupling
/// magnitudes, `targets.delta` the wanted detuning after the static
/// radiation-pressure shift. The static displacement scales with the
/// drive power, so the inversion iterates: build the steady fields,
/// compare the realized couplings and detuning, rescale the drives and
/// shift the bare detuning until all three match.
pub fn drive_for_targets(targets: &SystemParams, order_max: usize) -> Result<SystemParams> {
    targets.validate()?;
    if targets.g_single <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "g_single",
            reason: "drive inversion needs a nonzero single-photon coupling".into(),
        });
    }
    let g = targets.g_single;
    let mut p = *targets;
    p.delta0 = targets.delta;
    p.e1 = targets.g1 * Complex64::new(p.omega1 - p.delta0, p.kappa).norm() / g;
    p.e2 = targets.g2 * Complex64::new(p.omega2 + p.delta0, p.kappa).norm() / g;

    let tol = 1e-11;
    for _ in 0..60 {
        let expansion = mean_field_expansion(&p, order_max, FieldMode::Steady)?;
        let (lower, upper) = expansion.sideband_amplitudes();
        let (c1, c2) = (g * lower.norm(), g * upper.norm());
        let delta_real = expansion.shifted_detuning();

        let c1_ok = targets.g1 == 0.0 || (c1 - targets.g1).abs() <= tol * targets.g1;
        let c2_ok = targets.g2 == 0.0 || (c2 - targets.g2).abs() <= tol * targets.g2;
        let delta_ok =
            (delta_real - targets.delta).abs() <= tol * targets.delta.abs().max(p.kappa);
        if c1_ok && c2_ok && delta_ok {
            return Ok(p);
        }
        if targets.g1 > 0.0 && c1 > 0.0 {
            p.e1 *= targets.g1 / c1;
        }
        if targets.g2 > 0.0 && c2 > 0.0 {
            p.e2 *= targets.g2 / c2;
        }
        p.delta0 += targets.delta - delta_real;
    }
    Err(Error::InvalidParameter {
        name: "targets",
        reason: "drive inversion did not converge within 60 iterations".into(),
    })
}
