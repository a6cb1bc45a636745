//! Closed-form quantities: capacity and effective-rate bounds, the optimal
//! ISI rate, Chebyshev error bounds, the variance bound of the decoding
//! metric, sphere volumes, finite-n codebook-size bounds and the converse
//! separation checker.
//!
//! Reported rates and codebook sizes are in bits. Sizes are computed exactly
//! at finite `n` through log-gamma volumes; asymptotic rates are recovered by
//! evaluating `log2 M / (n log2 n)` over a grid of `n`.

use std::f64::consts::{E, LN_2, LOG2_E, PI};

use serde::{Deserialize, Serialize};

use crate::channel::{means_unchecked, ChannelParams};
use crate::codebook::{packing_radius, Codebook};
use crate::error::{ensure, Error, Result};

/// Packing-density exponent of the converse: `Delta_n <= 2^{-0.599 n}`.
pub const DENSITY_UPPER_EXPONENT: f64 = 0.599;

fn check_kappa(kappa: f64) -> Result<()> {
    ensure(
        (0.0..1.0).contains(&kappa),
        "kappa",
        kappa,
        "ISI rate lies in [0, 1)",
    )
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    ensure(v.is_finite() && v > 0.0, name, v, "must be positive")
}

/// Lower and upper bounds on the DI capacity in units of `n log2 n`:
/// `((1 - kappa) / 4, 3/2 + kappa)`.
pub fn capacity_bounds(kappa: f64) -> Result<(f64, f64)> {
    check_kappa(kappa)?;
    Ok(((1.0 - kappa) / 4.0, 1.5 + kappa))
}

/// Bounds on the effective identification rate in bits/s when the symbol
/// period shrinks as `T_s = T_cir / n^kappa`.
pub fn effective_rate_bounds(n: usize, kappa: f64, t_cir: f64) -> Result<(f64, f64)> {
    ensure(n >= 2, "n", n as f64, "need n >= 2 so that log n > 0")?;
    check_kappa(kappa)?;
    check_positive("t_cir", t_cir)?;
    let nf = n as f64;
    let scale = nf.powf(kappa) * nf.log2() / t_cir;
    Ok((
        (1.0 - kappa) * scale / 4.0,
        (3.0 + 2.0 * kappa) * scale / 2.0,
    ))
}

/// ISI rate maximising the lower effective-rate bound, and the bound there.
///
/// At `kappa = 1 - 1/ln n` the lower bound equals `n log2(e) / (4 e T_cir)`
/// exactly.
pub fn optimal_isi_rate(n: usize, t_cir: f64) -> Result<(f64, f64)> {
    ensure(
        n >= 3,
        "n",
        n as f64,
        "need n >= 3 so that kappa_max lies in (0, 1)",
    )?;
    check_positive("t_cir", t_cir)?;
    let kappa_max = 1.0 - 1.0 / (n as f64).ln();
    Ok((kappa_max, LOG2_E / (4.0 * E * t_cir) * n as f64))
}

/// Per-slot bound on `Var[(Y_t - (rho0 c_t + lambda))^2]`:
/// `6 s^4 (1 + e^{8/lambda} (1 + s + s^2 + s^3))` with `s = A + lambda`.
///
/// Multiply by `n + K - 1` for the bound on `psi_Var`.
pub fn variance_upper_bound(amplitude: f64, lambda: f64) -> Result<f64> {
    ensure(
        amplitude.is_finite() && amplitude >= 0.0,
        "A",
        amplitude,
        "must be non-negative",
    )?;
    check_positive("lambda", lambda)?;
    let s = amplitude + lambda;
    let poly = 1.0 + s + s * s + s * s * s;
    Ok(6.0 * s.powi(4) * (1.0 + (8.0 / lambda).exp() * poly))
}

/// `psi_Var^UB` summed over the `n_bar` output slots.
pub fn psi_var_upper_bound(n_bar: usize, amplitude: f64, lambda: f64) -> Result<f64> {
    Ok(n_bar as f64 * variance_upper_bound(amplitude, lambda)?)
}

/// Parameters shared by the Chebyshev error bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundParams {
    pub n: usize,
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    pub c_const: f64,
    pub rho0: f64,
    pub amplitude: f64,
    pub lambda: f64,
}

impl ErrorBoundParams {
    fn validate(&self) -> Result<()> {
        ensure(self.n >= 1, "n", self.n as f64, "must be at least 1")?;
        check_kappa(self.kappa)?;
        check_positive("a", self.a)?;
        ensure(self.b > 0.0 && self.b < 1.0, "b", self.b, "lies in (0, 1)")?;
        check_positive("rho0", self.rho0)?;
        ensure(self.c_const > 0.0, "c", self.c_const, "lies in (0, 2)")?;
        if self.c_const == 2.0 {
            return Err(Error::Singularity("E1 bound divides by (c - 2)^2"));
        }
        ensure(self.c_const < 2.0, "c", self.c_const, "lies in (0, 2)")
    }
}

/// Chebyshev bound on the type-I error probability. Not clamped to 1.
pub fn type1_error_bound(p: &ErrorBoundParams) -> Result<f64> {
    p.validate()?;
    let numerator = variance_upper_bound(p.amplitude, p.lambda)?;
    let n = p.n as f64;
    Ok(numerator / (p.c_const.powi(2) * p.rho0.powi(4) * p.a.powi(2) * n.powf(p.kappa + p.b)))
}

/// Chebyshev bounds on the two events covering a type-II error,
/// `(Pr(E0) bound, Pr(E1) bound)`. Their sum bounds `P_{e,2}`.
pub fn type2_event_bounds(p: &ErrorBoundParams) -> Result<(f64, f64)> {
    p.validate()?;
    let n = p.n as f64;
    let (a, c, rho0) = (p.a, p.c_const, p.rho0);
    let e0 =
        16.0 * (rho0 + 1.0) * p.amplitude.powi(3) / (c * c * rho0 * rho0 * a * a * n.powf(p.b));
    let e1 = variance_upper_bound(p.amplitude, p.lambda)?
        / (4.0 * (c - 2.0).powi(2) * rho0.powi(4) * a * a * n.powf(2.0 * p.kappa + p.b));
    Ok((e0, e1))
}

/// `log2` of the volume of an `n`-ball of radius `r`.
pub fn sphere_log_volume(n: usize, r: f64) -> Result<f64> {
    ensure(n >= 1, "n", n as f64, "must be at least 1")?;
    check_positive("r", r)?;
    let nf = n as f64;
    Ok(nf / 2.0 * PI.log2() + nf * r.log2() - libm::lgamma(nf / 2.0 + 1.0) / LN_2)
}

/// Exact finite-n achievability bound `log2[2^{-n} A^n / Vol(S(n, r0))]`
/// with `r0` from [`packing_radius`].
pub fn achievable_log_size(n: usize, amplitude: f64, a: f64, b: f64, kappa: f64) -> Result<f64> {
    check_positive("A", amplitude)?;
    let (_, r0) = packing_radius(n, kappa, a, b)?;
    let nf = n as f64;
    Ok(nf * amplitude.log2() - sphere_log_volume(n, r0)? - nf)
}

/// Converse separation scale `theta'_n = P_max / n^{1 + b + kappa}`.
pub fn converse_separation(n: usize, kappa: f64, b: f64, p_max: f64) -> Result<f64> {
    ensure(n >= 1, "n", n as f64, "must be at least 1")?;
    check_kappa(kappa)?;
    ensure(b > 0.0, "b", b, "must be positive")?;
    check_positive("P_max", p_max)?;
    Ok(p_max / (n as f64).powf(1.0 + b + kappa))
}

/// Exact finite-n converse cap
/// `log2[2^{-0.599 n} P_max^n / Vol(S(n, lambda theta'_n / (2 rho0)))]`.
pub fn converse_log_size_cap(
    n: usize,
    kappa: f64,
    b: f64,
    p_max: f64,
    lambda: f64,
    rho0: f64,
) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("rho0", rho0)?;
    let theta_prime = converse_separation(n, kappa, b, p_max)?;
    let radius = lambda * theta_prime / (2.0 * rho0);
    let nf = n as f64;
    Ok(nf * p_max.log2() - sphere_log_volume(n, radius)? - DENSITY_UPPER_EXPONENT * nf)
}

/// Separation margin of one codeword pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSeparation {
    pub i: usize,
    pub j: usize,
    /// `min` over both orderings of `max_t |1 - d_{j,t} / d_{i,t}|`, `t < n`.
    pub margin_message: f64,
    /// Same, scanning all `n + K - 1` output slots.
    pub margin_padded: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub theta_prime: f64,
    pub pairs: Vec<PairSeparation>,
    /// Every pair separates within the first `n` slots.
    pub passed_message: bool,
    /// Every pair separates somewhere in the `n + K - 1` slots.
    pub passed_padded: bool,
}

impl SeparationReport {
    pub fn passed(&self) -> bool {
        self.passed_message
    }

    pub fn failing_pairs(&self) -> impl Iterator<Item = &PairSeparation> {
        self.pairs
            .iter()
            .filter(move |p| p.margin_message <= self.theta_prime)
    }

    pub fn worst_pair(&self) -> Option<&PairSeparation> {
        self.pairs
            .iter()
            .min_by(|a, b| a.margin_message.total_cmp(&b.margin_message))
    }
}

/// Converse necessary condition: every pair of shifted codewords
/// `d_{i,t} = rho0 c_{i,t} + I_t` must differ in ratio by more than
/// `theta'_n` in at least one slot.
pub fn check_lemma_separation(
    cb: &Codebook,
    channel: &ChannelParams,
    b: f64,
    p_max: f64,
) -> Result<SeparationReport> {
    let n = cb.n();
    let theta_prime = converse_separation(n, cb.params().kappa(), b, p_max)?;
    // d_{i,t} is the slot mean, which is at least lambda > 0.
    let shifted: Vec<Vec<f64>> = cb
        .codewords()
        .iter()
        .map(|c| means_unchecked(c, channel))
        .collect();

    let deviation = |num: &[f64], den: &[f64], upto: usize| -> f64 {
        num.iter()
            .zip(den)
            .take(upto)
            .map(|(&dn, &dd)| (1.0 - dn / dd).abs())
            .fold(0.0, f64::max)
    };

    let nbar = channel.padded_len(n);
    let mut pairs = Vec::new();
    for i in 0..shifted.len() {
        for j in i + 1..shifted.len() {
            let (di, dj) = (&shifted[i], &shifted[j]);
            let margin_message = deviation(dj, di, n).min(deviation(di, dj, n));
            let margin_padded = deviation(dj, di, nbar).min(deviation(di, dj, nbar));
            pairs.push(PairSeparation {
                i,
                j,
                margin_message,
                margin_padded,
            });
        }
    }
    let passed_message = pairs.iter().all(|p| p.margin_message > theta_prime);
    let passed_padded = pairs.iter().all(|p| p.margin_padded > theta_prime);
    Ok(SeparationReport {
        theta_prime,
        pairs,
        passed_message,
        passed_padded,
    })
}

/// Inputs for a full [`BoundsReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub kappa: f64,
    pub t_cir: f64,
    pub a: f64,
    pub b: f64,
    pub c_const: f64,
    pub rho0: f64,
    pub amplitude: f64,
    pub p_max: f64,
    pub lambda: f64,
}

impl Default for BoundInputs {
    fn default() -> Self {
        Self {
            n: 256,
            kappa: 0.0,
            t_cir: 1.0,
            a: 1.0,
            b: 0.3,
            c_const: 1.0,
            rho0: 1.0,
            amplitude: 1.0,
            p_max: 1.0,
            lambda: 1.0,
        }
    }
}

/// Every closed-form quantity evaluated at one parameter point.
///
/// Probability bounds are kept raw, so values above 1 are possible at small
/// `n`; use [`display_probability`] when presenting them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub inputs: BoundInputs,
    pub taps: usize,
    pub capacity_lower: f64,
    pub capacity_upper: f64,
    pub reff_lower: f64,
    pub reff_upper: f64,
    pub kappa_max: f64,
    pub reff_at_kappa_max: f64,
    pub theta_n: f64,
    pub r0: f64,
    pub tau_n: f64,
    pub type1_bound: f64,
    pub type2_e0_bound: f64,
    pub type2_e1_bound: f64,
    pub psi_var_ub: f64,
    pub achievable_log_m: f64,
    pub converse_log_m_cap: f64,
    pub lemma1_theta_prime: f64,
}

/// Clamps a raw probability bound to `[0, 1]` and flags whether it was vacuous.
pub fn display_probability(raw: f64) -> (f64, bool) {
    if raw > 1.0 {
        (1.0, true)
    } else {
        (raw, false)
    }
}

/// Tap count `round(n^kappa)`, at least 1.
pub fn taps_for(n: usize, kappa: f64) -> usize {
    ((n as f64).powf(kappa).round() as usize).max(1)
}

impl BoundsReport {
    pub fn evaluate(inputs: BoundInputs) -> Result<Self> {
        let BoundInputs {
            n,
            kappa,
            t_cir,
            a,
            b,
            c_const,
            rho0,
            amplitude,
            p_max,
            lambda,
        } = inputs;
        let (capacity_lower, capacity_upper) = capacity_bounds(kappa)?;
        let (reff_lower, reff_upper) = effective_rate_bounds(n, kappa, t_cir)?;
        let (kappa_max, reff_at_kappa_max) = optimal_isi_rate(n, t_cir)?;
        let (theta_n, r0) = packing_radius(n, kappa, a, b)?;
        let tau_n = crate::decoder::decoding_threshold(theta_n, rho0, c_const)?;
        let ep = ErrorBoundParams {
            n,
            kappa,
            a,
            b,
            c_const,
            rho0,
            amplitude,
            lambda,
        };
        let type1_bound = type1_error_bound(&ep)?;
        let (type2_e0_bound, type2_e1_bound) = type2_event_bounds(&ep)?;
        let taps = taps_for(n, kappa);
        Ok(Self {
            inputs,
            taps,
            capacity_lower,
            capacity_upper,
            reff_lower,
            reff_upper,
            kappa_max,
            reff_at_kappa_max,
            theta_n,
            r0,
            tau_n,
            type1_bound,
            type2_e0_bound,
            type2_e1_bound,
            psi_var_ub: psi_var_upper_bound(n + taps - 1, amplitude, lambda)?,
            achievable_log_m: achievable_log_size(n, amplitude, a, b, kappa)?,
            converse_log_m_cap: converse_log_size_cap(n, kappa, b, p_max, lambda, rho0)?,
            lemma1_theta_prime: converse_separation(n, kappa, b, p_max)?,
        })
    }

    /// Flat `(key, value)` view, one entry per reported quantity.
    pub fn records(&self) -> Vec<(&'static str, f64)> {
        let i = &self.inputs;
        vec![
            ("n", i.n as f64),
            ("kappa", i.kappa),
            ("taps", self.taps as f64),
            ("t_cir", i.t_cir),
            ("a", i.a),
            ("b", i.b),
            ("c", i.c_const),
            ("rho0", i.rho0),
            ("amplitude", i.amplitude),
            ("p_max", i.p_max),
            ("lambda", i.lambda),
            ("capacity_lower", self.capacity_lower),
            ("capacity_upper", self.capacity_upper),
            ("reff_lower", self.reff_lower),
            ("reff_upper", self.reff_upper),
            ("kappa_max", self.kappa_max),
            ("reff_at_kappa_max", self.reff_at_kappa_max),
            ("theta_n", self.theta_n),
            ("r0", self.r0),
            ("tau_n", self.tau_n),
            ("type1_bound", self.type1_bound),
            ("type2_e0_bound", self.type2_e0_bound),
            ("type2_e1_bound", self.type2_e1_bound),
            ("psi_var_ub", self.psi_var_ub),
            ("achievable_log_m", self.achievable_log_m),
            ("converse_log_m_cap", self.converse_log_m_cap),
            ("lemma1_theta_prime", self.lemma1_theta_prime),
        ]
    }
}

/// One point of a kappa sweep of the rate bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaPoint {
    pub kappa: f64,
    pub capacity_lower: f64,
    pub capacity_upper: f64,
    pub reff_lower: f64,
    pub reff_upper: f64,
}

/// Evaluates the rate bounds on `kappa = start, start + step, ... <= stop`.
pub fn kappa_sweep(
    n: usize,
    t_cir: f64,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<Vec<KappaPoint>> {
    check_positive("step", step)?;
    ensure(start <= stop, "start", start, "must not exceed stop")?;
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|k| {
            // Index-based grid avoids drift from repeated addition.
            let kappa = start + k as f64 * step;
            let (capacity_lower, capacity_upper) = capacity_bounds(kappa)?;
            let (reff_lower, reff_upper) = effective_rate_bounds(n, kappa, t_cir)?;
            Ok(KappaPoint {
                kappa,
                capacity_lower,
                capacity_upper,
                reff_lower,
                reff_upper,
            })
        })
        .collect()
}

/// Index of the grid point with the largest lower effective-rate bound.
pub fn argmax_reff_lower(points: &[KappaPoint]) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.reff_lower.total_cmp(&b.1.reff_lower))
        .map(|(i, _)| i)
}
