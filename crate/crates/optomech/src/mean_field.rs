//! Perturbative solution of the classical pump and resonator amplitudes.
//!
//! The bichromatic drive builds up time dependent mean fields in the cavity
//! and in both resonators, and the linearized dynamics of the fluctuations
//! inherits its coefficients from them. This module expands the fields in
//! powers of the single photon coupling and keeps every order as a finite
//! sum of (polynomial) x (exponential) terms, so downstream code can
//! evaluate amplitudes, sidebands, and static shifts at any time without
//! step integration of the classical equations.
//!
//! Exponents live on an integer lattice: each one is a multiple of the
//! drive beat frequency minus a non-negative combination of the six
//! response poles (cavity, both resonators, and conjugates). Keeping the
//! lattice coordinates instead of floating point exponents makes merging
//! of equal exponents exact and makes resonant denominators detectable
//! structurally instead of by floating point coincidence.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::params::SystemParams;
use crate::{Error, Result};

/// A response denominator smaller than this fraction of the beat frequency
/// is treated as an exact resonance.
pub const RESONANCE_TOL_FRACTION: f64 = 1e-12;

/// Terms whose amplitude falls below this fraction of the largest amplitude
/// in the same series are dropped.
const PRUNE_REL: f64 = 1e-14;

/// Hard cap on the number of stored terms in one series.
pub const SERIES_TERM_CAP: usize = 200_000;

/// Largest supported expansion order.
pub const MAX_EXPANSION_ORDER: usize = 8;

/// Whether the classical fields carry the switch-on transient or only the
/// periodic long-time attractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    /// Fields start from zero amplitude at t = 0 and include every decaying
    /// contribution, with polynomial secular factors where a source term
    /// sits exactly on a response pole.
    Transient,
    /// Only purely oscillatory terms are kept after each integration, which
    /// yields the periodic attractor directly.
    Steady,
}

/// Lattice coordinates of one exponent: `n` counts multiples of the beat
/// frequency, `pole[k]` counts powers of the k-th response pole in the
/// order cavity, cavity conjugate, resonator 1, its conjugate, resonator 2,
/// its conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct ExpKey {
    n: i32,
    pole: [u8; 6],
}

impl ExpKey {
    const ZERO_POLE: [u8; 6] = [0; 6];

    fn harmonic(n: i32) -> Self {
        ExpKey { n, pole: Self::ZERO_POLE }
    }

    fn single_pole(idx: usize) -> Self {
        let mut pole = Self::ZERO_POLE;
        pole[idx] = 1;
        ExpKey { n: 0, pole }
    }

    fn is_pure_harmonic(&self) -> bool {
        self.pole == Self::ZERO_POLE
    }

    fn conjugated(&self) -> Self {
        let p = self.pole;
        ExpKey {
            n: -self.n,
            pole: [p[1], p[0], p[3], p[2], p[5], p[4]],
        }
    }

    fn sum(&self, other: &Self) -> Self {
        let mut pole = [0u8; 6];
        for k in 0..6 {
            pole[k] = self.pole[k] + other.pole[k];
        }
        ExpKey { n: self.n + other.n, pole }
    }
}

/// Frequencies and poles shared by every series of one parameter set.
#[derive(Debug, Clone, Copy)]
struct PoleConsts {
    omega_plus: f64,
    /// Cavity pole, resonator poles, and their conjugates.
    poles: [Complex64; 6],
}

impl PoleConsts {
    fn new(params: &SystemParams) -> Self {
        let z = Complex64::new(params.kappa, params.delta0 + params.omega_minus());
        let w1 = Complex64::new(0.5 * params.gamma1, params.omega1);
        let w2 = Complex64::new(0.5 * params.gamma2, params.omega2);
        PoleConsts {
            omega_plus: params.omega_plus(),
            poles: [z, z.conj(), w1, w1.conj(), w2, w2.conj()],
        }
    }

    fn zeta(&self, key: &ExpKey) -> Complex64 {
        let mut out = Complex64::new(0.0, key.n as f64 * self.omega_plus);
        for k in 0..6 {
            if key.pole[k] > 0 {
                out -= self.poles[k] * key.pole[k] as f64;
            }
        }
        out
    }

    fn resonance_tol(&self) -> f64 {
        RESONANCE_TOL_FRACTION * self.omega_plus
    }
}

/// Working representation of one series during construction: amplitude per
/// (exponent, polynomial degree). The ordered map keeps merging exact and
/// iteration deterministic.
type TermMap = BTreeMap<(ExpKey, u32), Complex64>;

fn add_term(map: &mut TermMap, key: ExpKey, degree: u32, chi: Complex64) {
    let slot = map.entry((key, degree)).or_insert(Complex64::ZERO);
    *slot += chi;
}

fn scaled(map: &TermMap, factor: Complex64) -> TermMap {
    map.iter().map(|(k, chi)| (*k, chi * factor)).collect()
}

fn conjugated(map: &TermMap) -> TermMap {
    let mut out = TermMap::new();
    for ((key, degree), chi) in map {
        add_term(&mut out, key.conjugated(), *degree, chi.conj());
    }
    out
}

fn added(a: &TermMap, b: &TermMap) -> TermMap {
    let mut out = a.clone();
    for ((key, degree), chi) in b {
        add_term(&mut out, *key, *degree, *chi);
    }
    out
}

fn real_part(map: &TermMap) -> TermMap {
    scaled(&added(map, &conjugated(map)), Complex64::new(0.5, 0.0))
}

fn product(a: &TermMap, b: &TermMap) -> TermMap {
    let mut out = TermMap::new();
    for ((ka, da), xa) in a {
        for ((kb, db), xb) in b {
            add_term(&mut out, ka.sum(kb), da + db, xa * xb);
        }
    }
    out
}

/// Drops negligible terms and enforces the series size cap.
fn pruned(map: TermMap) -> Result<TermMap> {
    let max_amp = map.values().fold(0.0f64, |m, chi| m.max(chi.norm()));
    let floor = PRUNE_REL * max_amp;
    let out: TermMap = map.into_iter().filter(|(_, chi)| chi.norm() > floor).collect();
    if out.len() > SERIES_TERM_CAP {
        return Err(Error::SeriesTermCap { count: out.len(), cap: SERIES_TERM_CAP });
    }
    Ok(out)
}

/// Solves y' = -pole * y + source for one expansion order.
///
/// Every source term integrates against the pole into a shifted amplitude
/// plus, in transient mode, the matching initial-condition term so that
/// y(0) = 0. A source exponent on top of the pole would divide by zero;
/// if its real part decays the secular factor t^(k+1) is exact and
/// harmless, otherwise the perturbative solution genuinely grows without
/// bound and the order is rejected.
fn integrate(
    source: &TermMap,
    pole_idx: usize,
    mode: FieldMode,
    order: usize,
    consts: &PoleConsts,
) -> Result<TermMap> {
    let pole = consts.poles[pole_idx];
    let tol = consts.resonance_tol();
    let mut out = TermMap::new();
    for ((key, degree), chi) in source {
        if mode == FieldMode::Steady && !key.is_pure_harmonic() {
            continue;
        }
        let zeta = consts.zeta(key);
        let s = zeta + pole;
        if s.norm() <= tol {
            if zeta.re > -tol {
                return Err(Error::ResonantSecularTerm {
                    order,
                    harmonic: i64::from(key.n),
                    magnitude: s.norm(),
                });
            }
            add_term(&mut out, *key, degree + 1, chi / (degree + 1) as f64);
        } else {
            let mut c = chi / s;
            add_term(&mut out, *key, *degree, c);
            let mut j = *degree;
            while j > 0 {
                c = -(j as f64) * c / s;
                j -= 1;
                add_term(&mut out, *key, j, c);
            }
            if mode == FieldMode::Transient {
                add_term(&mut out, ExpKey::single_pole(pole_idx), 0, -c);
            }
        }
    }
    pruned(out)
}

/// Checks that purely oscillatory terms sit on beat harmonics of the
/// expected parity: odd for the cavity field, even for the resonators.
fn assert_harmonic_parity(map: &TermMap, odd: bool, label: &str) {
    for ((key, _), _) in map {
        if key.is_pure_harmonic() {
            let is_odd = key.n.rem_euclid(2) == 1;
            assert!(
                is_odd == odd,
                "{label} carries a beat harmonic {} of unexpected parity",
                key.n
            );
        }
    }
}

/// One expansion order as a closed sum of terms chi * t^degree * e^(zeta t).
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialSeries {
    terms: Vec<SeriesTerm>,
}

/// A single term of an [`ExponentialSeries`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    /// Complex amplitude.
    pub chi: Complex64,
    /// Complex rate in the exponent.
    pub zeta: Complex64,
    /// Power of the polynomial prefactor.
    pub degree: u32,
    key: ExpKey,
}

impl SeriesTerm {
    /// Beat-harmonic index of a purely oscillatory term, if it is one.
    pub fn harmonic(&self) -> Option<i32> {
        self.key.is_pure_harmonic().then_some(self.key.n)
    }
}

impl ExponentialSeries {
    fn from_map(map: &TermMap, consts: &PoleConsts) -> Self {
        let terms = map
            .iter()
            .map(|((key, degree), chi)| SeriesTerm {
                chi: *chi,
                zeta: consts.zeta(key),
                degree: *degree,
                key: *key,
            })
            .collect();
        ExponentialSeries { terms }
    }

    /// The stored terms, ordered by exponent lattice position and degree.
    pub fn terms(&self) -> &[SeriesTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of chi * t^degree * e^(zeta t) over all terms.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let mut out = Complex64::ZERO;
        for term in &self.terms {
            let mut val = term.chi * (term.zeta * t).exp();
            for _ in 0..term.degree {
                val *= t;
            }
            out += val;
        }
        out
    }

    /// Term-wise time derivative.
    pub fn derivative(&self) -> Self {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for term in &self.terms {
            terms.push(SeriesTerm { chi: term.chi * term.zeta, ..*term });
            if term.degree > 0 {
                terms.push(SeriesTerm {
                    chi: term.chi * term.degree as f64,
                    degree: term.degree - 1,
                    ..*term
                });
            }
        }
        ExponentialSeries { terms }
    }

    /// Largest oscillation or decay rate appearing in any exponent.
    pub fn max_rate(&self) -> f64 {
        self.terms
            .iter()
            .fold(0.0f64, |m, t| m.max(t.zeta.im.abs()).max(t.zeta.re.abs()))
    }

    /// Largest polynomial degree appearing in any term.
    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.degree).max().unwrap_or(0)
    }
}

/// The classical fields of one parameter set, order by order.
///
/// Cavity orders are even powers of the coupling, resonator orders odd
/// powers; each is stored without the coupling power so the same expansion
/// can be rescaled cheaply. The evaluation helpers fold the powers back in.
#[derive(Debug, Clone)]
pub struct MeanFieldExpansion {
    /// Whether transients are included.
    pub mode: FieldMode,
    /// Largest retained power of the coupling.
    pub order_max: usize,
    params: SystemParams,
    consts: PoleConsts,
    /// Cavity orders 0, 2, 4, ...
    alpha: Vec<ExponentialSeries>,
    /// Resonator orders 1, 3, 5, ... for each resonator.
    beta: [Vec<ExponentialSeries>; 2],
}

impl MeanFieldExpansion {
    /// Series of the cavity order `p`, present for even p <= order_max.
    pub fn alpha_order(&self, p: usize) -> Option<&ExponentialSeries> {
        if p % 2 != 0 {
            return None;
        }
        self.alpha.get(p / 2)
    }

    /// Series of resonator `j` (0 or 1) at order `p`, present for odd
    /// p <= order_max.
    pub fn beta_order(&self, j: usize, p: usize) -> Option<&ExponentialSeries> {
        if p % 2 != 1 {
            return None;
        }
        self.beta.get(j)?.get((p - 1) / 2)
    }

    fn g_powers(&self, start: usize) -> impl Iterator<Item = f64> + '_ {
        let g = self.params.g_single;
        (0..).map(move |k| g.powi((start + 2 * k) as i32))
    }

    /// All cavity orders merged into one series with coupling powers folded
    /// into the amplitudes.
    pub fn alpha_total(&self) -> ExponentialSeries {
        self.merged(&self.alpha, 0)
    }

    /// All orders of resonator `j` merged, coupling powers folded in.
    pub fn beta_total(&self, j: usize) -> ExponentialSeries {
        self.merged(&self.beta[j], 1)
    }

    fn merged(&self, orders: &[ExponentialSeries], start: usize) -> ExponentialSeries {
        let mut map = TermMap::new();
        for (series, gp) in orders.iter().zip(self.g_powers(start)) {
            for term in series.terms() {
                add_term(&mut map, term.key, term.degree, term.chi * gp);
            }
        }
        ExponentialSeries::from_map(&map, &self.consts)
    }

    /// Cavity amplitude at time `t`, all orders summed.
    pub fn alpha_at(&self, t: f64) -> Complex64 {
        self.alpha
            .iter()
            .zip(self.g_powers(0))
            .map(|(s, gp)| s.evaluate(t) * gp)
            .sum()
    }

    /// Amplitude of resonator `j` at time `t`, all orders summed.
    pub fn beta_at(&self, j: usize, t: f64) -> Complex64 {
        self.beta[j]
            .iter()
            .zip(self.g_powers(1))
            .map(|(s, gp)| s.evaluate(t) * gp)
            .sum()
    }

    /// Long-time amplitudes of the two lowest cavity sidebands, returned as
    /// (lower, upper). These set the effective linearized couplings.
    pub fn sideband_amplitudes(&self) -> (Complex64, Complex64) {
        let mut lower = Complex64::ZERO;
        let mut upper = Complex64::ZERO;
        for (series, gp) in self.alpha.iter().zip(self.g_powers(0)) {
            for term in series.terms() {
                match term.harmonic() {
                    Some(-1) => lower += term.chi * gp,
                    Some(1) => upper += term.chi * gp,
                    _ => {}
                }
            }
        }
        (lower, upper)
    }

    /// Static displacement of resonator `j`, all orders summed.
    pub fn mean_displacement_dc(&self, j: usize) -> Complex64 {
        let mut out = Complex64::ZERO;
        for (series, gp) in self.beta[j].iter().zip(self.g_powers(1)) {
            for term in series.terms() {
                if term.harmonic() == Some(0) {
                    out += term.chi * gp;
                }
            }
        }
        out
    }

    /// Cavity detuning with the static radiation-pressure shift included.
    pub fn shifted_detuning(&self) -> f64 {
        crate::params::detuning_shift(
            self.params.delta0,
            &self.params,
            (self.mean_displacement_dc(0), self.mean_displacement_dc(1)),
        )
    }

    /// Parameter set the expansion was built from.
    pub fn params(&self) -> &SystemParams {
        &self.params
    }
}

/// Builds the classical field expansion up to `order_max` powers of the
/// single photon coupling.
///
/// Cavity orders solve against the cavity pole with the two drive tones as
/// the zeroth-order source; resonator orders solve against the mechanical
/// poles with the radiation pressure beat of all lower cavity orders as
/// source. In steady mode only purely oscillatory terms survive each step
/// and the beat-harmonic parity (odd for the cavity, even for the
/// resonators) is checked structurally.
pub fn mean_field_expansion(
    params: &SystemParams,
    order_max: usize,
    mode: FieldMode,
) -> Result<MeanFieldExpansion> {
    params.validate()?;
    if order_max > MAX_EXPANSION_ORDER {
        return Err(Error::InvalidParameter {
            name: "order_max",
            reason: format!("must be at most {MAX_EXPANSION_ORDER}, got {order_max}"),
        });
    }
    let consts = PoleConsts::new(params);
    let minus_i = Complex64::new(0.0, -1.0);

    // Working maps per order; index = order for alpha (even) and beta (odd).
    let mut alpha_maps: Vec<TermMap> = Vec::new();
    let mut beta_maps: [Vec<TermMap>; 2] = [Vec::new(), Vec::new()];
    // Cached combinations reused by the recursion.
    let mut alpha_conj: Vec<TermMap> = Vec::new();
    let mut re_beta_sum: Vec<TermMap> = Vec::new();

    let mut drive = TermMap::new();
    add_term(&mut drive, ExpKey::harmonic(-1), 0, minus_i * params.e1);
    add_term(&mut drive, ExpKey::harmonic(1), 0, minus_i * params.e2);

    for p in 0..=order_max {
        if p % 2 == 0 {
            let mut source = if p == 0 {
                drive.clone()
            } else {
                let mut xi = TermMap::new();
                for q in (0..=p - 2).step_by(2) {
                    let cross = product(&alpha_maps[q / 2], &re_beta_sum[(p - 2 - q) / 2]);
                    for ((key, degree), chi) in &cross {
                        add_term(&mut xi, *key, *degree, chi * 2.0 * minus_i);
                    }
                }
                xi
            };
            source = pruned(source)?;
            let solved = integrate(&source, 0, mode, p, &consts)?;
            assert_harmonic_parity(&solved, true, "cavity field");
            alpha_conj.push(conjugated(&solved));
            alpha_maps.push(solved);
        } else {
            let mut xi = TermMap::new();
            for q in (0..=p - 1).step_by(2) {
                let cross = product(&alpha_maps[q / 2], &alpha_conj[(p - 1 - q) / 2]);
                for ((key, degree), chi) in &cross {
                    add_term(&mut xi, *key, *degree, chi * minus_i);
                }
            }
            let xi = pruned(xi)?;
            let mut sum = TermMap::new();
            for (j, store) in beta_maps.iter_mut().enumerate() {
                let solved = integrate(&xi, 2 + 2 * j, mode, p, &consts)?;
                assert_harmonic_parity(&solved, false, "resonator field");
                sum = added(&sum, &real_part(&solved));
                store.push(solved);
            }
            re_beta_sum.push(pruned(sum)?);
        }
    }

    Ok(MeanFieldExpansion {
        mode,
        order_max,
        params: *params,
        consts,
        alpha: alpha_maps.iter().map(|m| ExponentialSeries::from_map(m, &consts)).collect(),
        beta: [
            beta_maps[0].iter().map(|m| ExponentialSeries::from_map(m, &consts)).collect(),
            beta_maps[1].iter().map(|m| ExponentialSeries::from_map(m, &consts)).collect(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn drive_params() -> SystemParams {
        let mut p = SystemParams::with_couplings(
            (50.0, 100.0),
            1.0,
            (1e-4, 1e-4),
            (0.0, 0.0),
            0.01,
            (200.0, 100.0),
        )
        .unwrap();
        p.g_single = 1e-4;
        p.e1 = 2.0e4;
        p.e2 = 1.5e4;
        p
    }

    fn pole_z(p: &SystemParams) -> Complex64 {
        Complex64::new(p.kappa, p.delta0 + p.omega_minus())
    }

    #[test]
    fn order_zero_matches_drive_response() {
        let p = drive_params();
        let exp = mean_field_expansion(&p, 0, FieldMode::Steady).unwrap();
        let z = pole_z(&p);
        let i = Complex64::I;
        let wp = p.omega_plus();
        let lower = -i * p.e1 / (z - i * wp);
        let upper = -i * p.e2 / (z + i * wp);
        let (am, ap) = exp.sideband_amplitudes();
        assert_relative_eq!(am.re, lower.re, max_relative = 1e-12);
        assert_relative_eq!(am.im, lower.im, max_relative = 1e-12);
        assert_relative_eq!(ap.re, upper.re, max_relative = 1e-12);
        assert_relative_eq!(ap.im, upper.im, max_relative = 1e-12);
        assert_eq!(exp.alpha_order(0).unwrap().len(), 2);
        assert!(exp.beta_order(0, 1).is_none());
    }

    #[test]
    fn transient_fields_start_from_rest() {
        let p = drive_params();
        let exp = mean_field_expansion(&p, 6, FieldMode::Transient).unwrap();
        let scale = exp.alpha_at(1e3).norm();
        assert!(scale > 1.0);
        assert!(exp.alpha_at(0.0).norm() < 1e-9 * scale);
        assert!(exp.beta_at(0, 0.0).norm() < 1e-9 * scale);
        assert!(exp.beta_at(1, 0.0).norm() < 1e-9 * scale);
    }

    #[test]
    fn first_order_displacement_dc_and_sidebands() {
        let p = drive_params();
        let exp = mean_field_expansion(&p, 1, FieldMode::Steady).unwrap();
        let (am, ap) = exp.sideband_amplitudes();
        let power = am.norm_sqr() + ap.norm_sqr();
        let i = Complex64::I;
        let wp = p.omega_plus();
        for j in 0..2 {
            let w = Complex64::new(
                0.5 * if j == 0 { p.gamma1 } else { p.gamma2 },
                if j == 0 { p.omega1 } else { p.omega2 },
            );
            let expected_dc = -i * p.g_single * power / w;
            let dc = exp.mean_displacement_dc(j);
            assert_relative_eq!(dc.re, expected_dc.re, max_relative = 1e-12);
            assert_relative_eq!(dc.im, expected_dc.im, max_relative = 1e-12);

            // Sideband amplitudes at twice the beat frequency.
            let series = exp.beta_total(j);
            let lower: Complex64 = series
                .terms()
                .iter()
                .filter(|t| t.harmonic() == Some(-2))
                .map(|t| t.chi)
                .sum();
            let expected_lower = -i * p.g_single * am * ap.conj() / (w - 2.0 * i * wp);
            assert_relative_eq!(lower.re, expected_lower.re, max_relative = 1e-12);
            assert_relative_eq!(lower.im, expected_lower.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn steady_harmonics_have_bounded_odd_even_structure() {
        let p = drive_params();
        let exp = mean_field_expansion(&p, 6, FieldMode::Steady).unwrap();
        for p_ord in [0usize, 2, 4, 6] {
            let series = exp.alpha_order(p_ord).unwrap();
            assert!(!series.is_empty());
            for term in series.terms() {
                let n = term.harmonic().expect("steady terms are harmonics");
                assert_eq!(n.rem_euclid(2), 1);
                assert!(n.unsigned_abs() as usize <= p_ord + 1);
                assert_eq!(term.degree, 0);
            }
        }
        for j in 0..2 {
            for p_ord in [1usize, 3, 5] {
                for term in exp.beta_order(j, p_ord).unwrap().terms() {
                    let n = term.harmonic().unwrap();
                    assert_eq!(n.rem_euclid(2), 0);
                    assert!(n.unsigned_abs() as usize <= p_ord + 1);
                }
            }
        }
    }

    #[test]
    fn transient_relaxes_to_steady_fields() {
        let mut p = drive_params();
        p.gamma1 = 0.8;
        p.gamma2 = 0.7;
        p.g_single = 1e-3;
        p.e1 = 120.0;
        p.e2 = 90.0;
        let transient = mean_field_expansion(&p, 4, FieldMode::Transient).unwrap();
        let steady = mean_field_expansion(&p, 4, FieldMode::Steady).unwrap();
        let scale = steady.sideband_amplitudes().0.norm();
        for k in 0..=20 {
            let t = 50.0 + k as f64;
            assert!((transient.alpha_at(t) - steady.alpha_at(t)).norm() < 1e-6 * scale);
            for j in 0..2 {
                assert!((transient.beta_at(j, t) - steady.beta_at(j, t)).norm() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn transient_orders_carry_secular_factors() {
        let p = drive_params();
        let transient = mean_field_expansion(&p, 4, FieldMode::Transient).unwrap();
        let has_secular = [2usize, 4]
            .iter()
            .any(|&ord| transient.alpha_order(ord).unwrap().max_degree() > 0);
        assert!(has_secular);
        let steady = mean_field_expansion(&p, 4, FieldMode::Steady).unwrap();
        assert_eq!(steady.alpha_order(4).unwrap().max_degree(), 0);
        assert!(transient.alpha_at(3.0).norm().is_finite());
    }

    /// Residuals of the truncated classical equations must shrink with the
    /// first dropped power of the coupling when the coupling is halved:
    /// the resonator equations miss order 7 terms, the cavity equation
    /// order 8 terms.
    #[test]
    fn residuals_scale_with_first_dropped_order() {
        let mut p = SystemParams::with_couplings(
            (7.0, 11.0),
            1.0,
            (0.6, 0.5),
            (0.0, 0.0),
            0.3,
            (0.0, 0.0),
        )
        .unwrap();
        p.e1 = 5.0;
        p.e2 = 4.0;

        let residuals = |g: f64| -> (f64, f64) {
            let mut q = p;
            q.g_single = g;
            let exp = mean_field_expansion(&q, 6, FieldMode::Transient).unwrap();
            let alpha = exp.alpha_total();
            let dalpha = alpha.derivative();
            let betas = [exp.beta_total(0), exp.beta_total(1)];
            let dbetas = [betas[0].derivative(), betas[1].derivative()];
            let z = pole_z(&q);
            let i = Complex64::I;
            let wp = q.omega_plus();
            let w = [
                Complex64::new(0.5 * q.gamma1, q.omega1),
                Complex64::new(0.5 * q.gamma2, q.omega2),
            ];
            let mut worst_a = 0.0f64;
            let mut worst_b = 0.0f64;
            for k in 0..=60 {
                let t = 0.1 + 0.1 * k as f64;
                let a = alpha.evaluate(t);
                let re_b = betas[0].evaluate(t).re + betas[1].evaluate(t).re;
                let drive = i * (q.e1 * (-i * wp * t).exp() + q.e2 * (i * wp * t).exp());
                let ra = dalpha.evaluate(t)
                    + z * a
                    + 2.0 * i * g * re_b * a
                    + drive;
                worst_a = worst_a.max(ra.norm());
                for j in 0..2 {
                    let rb = dbetas[j].evaluate(t)
                        + w[j] * betas[j].evaluate(t)
                        + i * g * a.norm_sqr();
                    worst_b = worst_b.max(rb.norm());
                }
            }
            (worst_a, worst_b)
        };

        let g = 0.35;
        let (ra_full, rb_full) = residuals(g);
        let (ra_half, rb_half) = residuals(0.5 * g);
        assert!(ra_full > 0.0 && rb_full > 0.0);
        let ratio_a = ra_full / ra_half;
        let ratio_b = rb_full / rb_half;
        assert!((160.0..420.0).contains(&ratio_a), "cavity ratio {ratio_a}");
        assert!((80.0..210.0).contains(&ratio_b), "resonator ratio {ratio_b}");
    }

    #[test]
    fn degenerate_denominator_is_rejected() {
        let mut p = drive_params();
        p.kappa = 1e-13;
        p.delta0 = -p.omega2;
        let err = mean_field_expansion(&p, 2, FieldMode::Steady).unwrap_err();
        match err {
            Error::ResonantSecularTerm { order, harmonic, magnitude } => {
                assert_eq!(order, 0);
                assert_eq!(harmonic, 1);
                assert!(magnitude <= RESONANCE_TOL_FRACTION * 75.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let p = drive_params();
        let a = mean_field_expansion(&p, 6, FieldMode::Transient).unwrap();
        let b = mean_field_expansion(&p, 6, FieldMode::Transient).unwrap();
        let at = a.alpha_total();
        let bt = b.alpha_total();
        assert_eq!(at.len(), bt.len());
        for (x, y) in at.terms().iter().zip(bt.terms()) {
            assert_eq!(x.chi, y.chi);
            assert_eq!(x.zeta, y.zeta);
            assert_eq!(x.degree, y.degree);
        }
    }

    #[test]
    fn order_cap_is_enforced() {
        let p = drive_params();
        let err = mean_field_expansion(&p, 9, FieldMode::Steady).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "order_max", .. }));
    }
}
