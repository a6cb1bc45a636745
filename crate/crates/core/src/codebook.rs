//! Codebooks built by greedy saturated sphere packing in the cube `[0, A]^n`.
//!
//! Codeword centres are drawn uniformly from the cube and kept when they sit
//! at Euclidean distance at least `2 r0` from every centre already accepted.
//! Only the centres are confined to the cube; the spheres themselves may
//! protrude. Construction stops after `max_rejections` consecutive rejected
//! candidates (or at an optional size cap), and [`verify_packing`] measures
//! how close to saturated the result actually is.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{sphere_log_volume, DENSITY_UPPER_EXPONENT};
use crate::error::{ensure, Error, Result};
use crate::numeric::fmt17;
use crate::seed::SeedStream;

pub const DEFAULT_A: f64 = 1.0;
pub const DEFAULT_B: f64 = 0.3;
pub const DEFAULT_MAX_REJECTIONS: u64 = 10_000;

const CONSTRUCTION_CELL: u64 = 0;
const COVER_CELL: u64 = 1;
const COVER_BATCH: u64 = 4096;

/// `A = min(P_ave, P_max)`: codewords in `[0, A]^n` meet both the peak and
/// the average release-rate constraint.
pub fn admissible_amplitude(p_ave: f64, p_max: f64) -> Result<f64> {
    ensure(
        p_ave.is_finite() && p_ave > 0.0,
        "P_ave",
        p_ave,
        "must be positive",
    )?;
    ensure(
        p_max.is_finite() && p_max > 0.0,
        "P_max",
        p_max,
        "must be positive",
    )?;
    Ok(p_ave.min(p_max))
}

/// `(theta_n, r0)` with `theta_n = a / n^{(1 - (b + kappa)) / 2}` and
/// `r0 = sqrt(n theta_n)`.
pub fn packing_radius(n: usize, kappa: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    ensure(n >= 1, "n", n as f64, "must be at least 1")?;
    ensure(
        (0.0..1.0).contains(&kappa),
        "kappa",
        kappa,
        "ISI rate lies in [0, 1)",
    )?;
    ensure(a.is_finite() && a > 0.0, "a", a, "must be positive")?;
    ensure(b > 0.0 && b < 1.0, "b", b, "lies in (0, 1)")?;
    let nf = n as f64;
    let theta = a / nf.powf((1.0 - (b + kappa)) / 2.0);
    Ok((theta, (nf * theta).sqrt()))
}

/// `log2` of the guaranteed codebook size `2^{-n} A^n / Vol(S(n, r0))` of a
/// saturated packing.
pub fn codebook_size_lower_bound(n: usize, amplitude: f64, r0: f64) -> Result<f64> {
    ensure(
        amplitude.is_finite() && amplitude > 0.0,
        "A",
        amplitude,
        "must be positive",
    )?;
    let nf = n as f64;
    Ok(nf * amplitude.log2() - sphere_log_volume(n, r0)? - nf)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingParams {
    n: usize,
    amplitude: f64,
    a: f64,
    b: f64,
    kappa: f64,
    theta_n: f64,
    r0: f64,
}

impl PackingParams {
    pub fn new(n: usize, amplitude: f64, a: f64, b: f64, kappa: f64) -> Result<Self> {
        ensure(
            amplitude.is_finite() && amplitude > 0.0,
            "A",
            amplitude,
            "must be positive",
        )?;
        let (theta_n, r0) = packing_radius(n, kappa, a, b)?;
        Ok(Self {
            n,
            amplitude,
            a,
            b,
            kappa,
            theta_n,
            r0,
        })
    }

    /// Chooses `a` so that the packing radius is `r0`.
    pub fn with_radius(n: usize, amplitude: f64, r0: f64, b: f64, kappa: f64) -> Result<Self> {
        ensure(r0.is_finite() && r0 > 0.0, "r0", r0, "must be positive")?;
        ensure(n >= 1, "n", n as f64, "must be at least 1")?;
        let a = r0 * r0 / (n as f64).powf((1.0 + b + kappa) / 2.0);
        Self::new(n, amplitude, a, b, kappa)
    }

    /// Parameters for a fixed tap count `K`, using the ISI rate
    /// `kappa = ln K / ln n` so that `theta_n = a sqrt(K) / n^{(1 - b)/2}`.
    pub fn for_taps(n: usize, amplitude: f64, a: f64, b: f64, taps: usize) -> Result<Self> {
        Self::new(n, amplitude, a, b, isi_rate_for_taps(n, taps)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn theta_n(&self) -> f64 {
        self.theta_n
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// `r0 >= A sqrt(n) / 2`: at most one sphere pair fits along the diagonal,
    /// so the packing typically holds a single codeword.
    pub fn is_degenerate(&self) -> bool {
        self.r0 >= self.amplitude * (self.n as f64).sqrt() / 2.0
    }
}

/// `kappa = ln K / ln n`, i.e. `K = n^kappa` exactly.
pub fn isi_rate_for_taps(n: usize, taps: usize) -> Result<f64> {
    ensure(taps >= 1, "K", taps as f64, "must be at least 1")?;
    if taps == 1 {
        return Ok(0.0);
    }
    ensure(
        taps < n,
        "K",
        taps as f64,
        "must be below the codeword length",
    )?;
    Ok((taps as f64).ln() / (n as f64).ln())
}

/// Why construction stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    /// `streak` consecutive candidates were rejected.
    Saturated { streak: u64 },
    /// The size cap was reached; the packing is not saturated.
    Capped { streak: u64 },
    /// Read from a file; construction history unknown.
    Loaded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    codewords: Vec<Vec<f64>>,
    params: PackingParams,
    seed: u64,
    stop: StopReason,
}

impl Codebook {
    /// Wraps externally supplied codewords. Only shape and finiteness are
    /// checked here; packing invariants are reported by [`verify_packing`].
    pub fn from_codewords(
        codewords: Vec<Vec<f64>>,
        params: PackingParams,
        seed: u64,
    ) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::Argument(
                "a codebook needs at least one codeword".into(),
            ));
        }
        for c in &codewords {
            if c.len() != params.n {
                return Err(Error::Dimension {
                    what: "codeword",
                    expected: params.n,
                    got: c.len(),
                });
            }
            crate::channel::check_codeword(c)?;
        }
        Ok(Self {
            codewords,
            params,
            seed,
            stop: StopReason::Loaded,
        })
    }

    pub fn codewords(&self) -> &[Vec<f64>] {
        &self.codewords
    }

    pub fn codeword(&self, i: usize) -> Result<&[f64]> {
        self.codewords
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::Index {
                what: "message",
                index: i,
                len: self.codewords.len(),
            })
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn params(&self) -> &PackingParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop
    }

    /// Rejection streak at stop, when known.
    pub fn saturation_evidence(&self) -> Option<u64> {
        match self.stop {
            StopReason::Saturated { streak } | StopReason::Capped { streak } => Some(streak),
            StopReason::Loaded => None,
        }
    }

    /// `log2 M / (n log2 n)`, undefined for `n = 1`.
    pub fn rate(&self) -> Option<f64> {
        let n = self.n() as f64;
        (self.n() > 1).then(|| (self.len() as f64).log2() / (n * n.log2()))
    }

    /// Pair with the smallest Euclidean distance, as `(i, j, distance)`.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d2 = sq_dist(&self.codewords[i], &self.codewords[j]);
                if best.is_none_or(|(_, _, b)| d2 < b) {
                    best = Some((i, j, d2));
                }
            }
        }
        best.map(|(i, j, d2)| (i, j, d2.sqrt()))
    }

    /// Copy without message `i`; used to open a hole in a saturated packing.
    pub fn without(&self, i: usize) -> Result<Self> {
        self.codeword(i)?;
        let mut codewords = self.codewords.clone();
        codewords.remove(i);
        let mut out = Self::from_codewords(codewords, self.params.clone(), self.seed)?;
        out.stop = StopReason::Loaded;
        Ok(out)
    }

    /// Text form: the `#di-codebook v1` header line followed by one
    /// whitespace-separated row per codeword, 17 significant digits.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = format!(
            "#di-codebook v1 n={} A={} a={} b={} kappa={} seed={} M={}\n",
            p.n,
            fmt17(p.amplitude),
            fmt17(p.a),
            fmt17(p.b),
            fmt17(p.kappa),
            self.seed,
            self.len()
        );
        for c in &self.codewords {
            let row: Vec<String> = c.iter().map(|&v| fmt17(v)).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty codebook file".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("#di-codebook") || fields.next() != Some("v1") {
            return Err(Error::Format(format!("bad header: {header}")));
        }
        let mut kv = std::collections::BTreeMap::new();
        for f in fields {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad header field: {f}")))?;
            if kv.insert(k, v).is_some() {
                return Err(Error::Format(format!("duplicate header field: {k}")));
            }
        }
        let expected = ["A", "M", "a", "b", "kappa", "n", "seed"];
        if kv.keys().copied().ne(expected.iter().copied()) {
            return Err(Error::Format(format!(
                "header must carry exactly n, A, a, b, kappa, seed, M; got {:?}",
                kv.keys().collect::<Vec<_>>()
            )));
        }
        fn num<T: std::str::FromStr>(
            kv: &std::collections::BTreeMap<&str, &str>,
            k: &str,
        ) -> Result<T> {
            kv[k]
                .parse()
                .map_err(|_| Error::Format(format!("header field {k}={} is not a number", kv[k])))
        }
        let n: usize = num(&kv, "n")?;
        let m: usize = num(&kv, "M")?;
        let params = PackingParams::new(
            n,
            num(&kv, "A")?,
            num(&kv, "a")?,
            num(&kv, "b")?,
            num(&kv, "kappa")?,
        )
        .map_err(|e| Error::Format(format!("header parameters invalid: {e}")))?;
        let seed: u64 = num(&kv, "seed")?;
        let mut codewords = Vec::with_capacity(m);
        for (row, line) in lines.enumerate() {
            let c: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Format(format!("row {row}: unparsable value")))?;
            if c.len() != n {
                return Err(Error::Format(format!(
                    "row {row}: {} values, header says n={n}",
                    c.len()
                )));
            }
            codewords.push(c);
        }
        if codewords.len() != m {
            return Err(Error::Format(format!(
                "{} rows, header says M={m}",
                codewords.len()
            )));
        }
        Self::from_codewords(codewords, params, seed).map_err(|e| Error::Format(e.to_string()))
    }
}

pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// True when `x` is at squared distance at least `min_sq` from every centre.
fn far_from_all(centres: &[Vec<f64>], x: &[f64], min_sq: f64) -> bool {
    centres.iter().all(|c| {
        let mut acc = 0.0;
        for (a, b) in c.iter().zip(x) {
            acc += (a - b) * (a - b);
            if acc >= min_sq {
                return true;
            }
        }
        acc >= min_sq
    })
}

/// Greedy randomized packer.
#[derive(Clone, Debug)]
pub struct GreedyPacker {
    params: PackingParams,
    max_rejections: u64,
    max_codewords: Option<usize>,
}

impl GreedyPacker {
    pub fn new(params: PackingParams) -> Self {
        Self {
            params,
            max_rejections: DEFAULT_MAX_REJECTIONS,
            max_codewords: None,
        }
    }

    pub fn max_rejections(mut self, streak: u64) -> Self {
        self.max_rejections = streak;
        self
    }

    /// Stops once `cap` codewords are accepted. The result is then not
    /// saturated, but keeps the pairwise separation.
    pub fn max_codewords(mut self, cap: usize) -> Self {
        self.max_codewords = Some(cap);
        self
    }

    pub fn build(&self, seed: u64) -> Result<Codebook> {
        ensure(
            self.max_rejections >= 1,
            "max_rejections",
            self.max_rejections as f64,
            "must be at least 1",
        )?;
        if self.max_codewords == Some(0) {
            return Err(Error::Argument("max_codewords must be at least 1".into()));
        }
        let p = &self.params;
        let min_sq = 4.0 * p.r0 * p.r0;
        let mut rng = SeedStream::new(seed, CONSTRUCTION_CELL).rng(0);
        let mut centres: Vec<Vec<f64>> = Vec::new();
        let mut candidate = vec![0.0; p.n];
        let mut streak = 0u64;
        let stop = loop {
            for v in candidate.iter_mut() {
                *v = rng.random::<f64>() * p.amplitude;
            }
            if far_from_all(&centres, &candidate, min_sq) {
                centres.push(candidate.clone());
                streak = 0;
                if self.max_codewords.is_some_and(|cap| centres.len() >= cap) {
                    break StopReason::Capped { streak };
                }
            } else {
                streak += 1;
                if streak >= self.max_rejections {
                    break StopReason::Saturated { streak };
                }
            }
        };
        Ok(Codebook {
            codewords: centres,
            params: p.clone(),
            seed,
            stop,
        })
    }
}

/// Greedy saturation with a rejection-streak stopping rule.
pub fn construct_codebook(
    params: &PackingParams,
    seed: u64,
    max_rejections: u64,
) -> Result<Codebook> {
    GreedyPacker::new(params.clone())
        .max_rejections(max_rejections)
        .build(seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingReport {
    pub m: usize,
    pub n: usize,
    pub r0: f64,
    /// Smallest pairwise distance; `None` for a single codeword.
    pub min_distance: Option<f64>,
    pub separation_ok: bool,
    pub linf_ok: bool,
    /// Every codeword's mean entry is at most `A`.
    pub average_ok: bool,
    pub cover_samples: u64,
    pub covered: u64,
    pub covering_fraction: f64,
    /// `log2(M Vol(S(n, r0)) / A^n)`.
    pub log2_density: f64,
    /// `Delta_n >= 2^{-n}`.
    pub density_above_lower: bool,
    /// `Delta_n <= 2^{-0.599 n}`; an asymptotic bound, often violated at small n.
    pub density_below_upper: bool,
    pub log2_size_lower_bound: f64,
    pub degenerate: bool,
    pub stop: StopReason,
}

impl PackingReport {
    /// Separation, cube bound and full covering all hold.
    pub fn passed(&self) -> bool {
        self.separation_ok && self.linf_ok && self.covered == self.cover_samples
    }
}

/// Checks separation, the cube bound, covering by doubled spheres (on
/// `cover_samples` uniform points) and the packing density bracket.
pub fn verify_packing(cb: &Codebook, cover_samples: u64, seed: u64) -> Result<PackingReport> {
    let p = cb.params();
    let (n, a, r0) = (p.n, p.amplitude, p.r0);
    let min_distance = cb.closest_pair().map(|(_, _, d)| d);
    let separation_ok = min_distance.is_none_or(|d| d >= 2.0 * r0);
    let linf_ok = cb
        .codewords
        .iter()
        .flatten()
        .all(|&v| (0.0..=a).contains(&v));
    let average_ok = cb
        .codewords
        .iter()
        .all(|c| c.iter().sum::<f64>() / n as f64 <= a);

    let cover_sq = 4.0 * r0 * r0;
    let stream = SeedStream::new(seed, COVER_CELL);
    let batches = cover_samples.div_ceil(COVER_BATCH);
    let covered: u64 = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = stream.rng(batch);
            let size = COVER_BATCH.min(cover_samples - batch * COVER_BATCH);
            let mut point = vec![0.0; n];
            let mut hits = 0u64;
            for _ in 0..size {
                for v in point.iter_mut() {
                    *v = rng.random::<f64>() * a;
                }
                if cb.codewords.iter().any(|c| sq_dist(c, &point) <= cover_sq) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let covering_fraction = if cover_samples == 0 {
        1.0
    } else {
        covered as f64 / cover_samples as f64
    };

    let nf = n as f64;
    let log2_density = (cb.len() as f64).log2() + sphere_log_volume(n, r0)? - nf * a.log2();
    Ok(PackingReport {
        m: cb.len(),
        n,
        r0,
        min_distance,
        separation_ok,
        linf_ok,
        average_ok,
        cover_samples,
        covered,
        covering_fraction,
        log2_density,
        density_above_lower: log2_density >= -nf,
        density_below_upper: log2_density <= -DENSITY_UPPER_EXPONENT * nf,
        log2_size_lower_bound: codebook_size_lower_bound(n, a, r0)?,
        degenerate: p.is_degenerate(),
        stop: cb.stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn amplitude_examples() {
        assert_eq!(admissible_amplitude(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(admissible_amplitude(3.0, 3.0).unwrap(), 3.0);
        assert_eq!(admissible_amplitude(5.0, 0.5).unwrap(), 0.5);
        assert!(admissible_amplitude(0.0, 1.0).is_err());
        assert!(admissible_amplitude(1.0, -1.0).is_err());
    }

    #[test]
    fn radius_examples() {
        let (theta, r0) = packing_radius(16, 0.0, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(theta, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r0, 8f64.sqrt(), epsilon = 1e-12);
        let (theta, r0) = packing_radius(1, 0.7, 2.5, 0.2).unwrap();
        assert_eq!(theta, 2.5);
        assert_abs_diff_eq!(r0, 2.5f64.sqrt(), epsilon = 1e-15);
        let (_, r0) = packing_radius(10_000, 0.5, 1.0, 0.1).unwrap();
        assert_abs_diff_eq!(r0, 39.810717055349734, epsilon = 1e-9);
        assert!(packing_radius(0, 0.0, 1.0, 0.5).is_err());
        assert!(packing_radius(4, 1.0, 1.0, 0.5).is_err());
        assert!(packing_radius(4, 0.0, 0.0, 0.5).is_err());
        assert!(packing_radius(4, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn fixed_taps_match_sqrt_k_form() {
        let p = PackingParams::for_taps(64, 1.0, 1.0, 0.3, 2).unwrap();
        let direct = 2f64.sqrt() / 64f64.powf(0.35);
        assert_abs_diff_eq!(p.theta_n(), direct, epsilon = 1e-12);
        assert!(PackingParams::for_taps(4, 1.0, 1.0, 0.3, 4).is_err());
    }

    #[test]
    fn with_radius_round_trips() {
        let p = PackingParams::with_radius(2, 1.0, 0.6, 0.3, 0.0).unwrap();
        assert_abs_diff_eq!(p.r0(), 0.6, epsilon = 1e-14);
        assert!(!p.is_degenerate() || p.r0() >= 2f64.sqrt() / 2.0);
    }

    #[test]
    fn lower_bound_examples() {
        assert_abs_diff_eq!(
            codebook_size_lower_bound(1, 1.0, 0.2).unwrap(),
            1.25f64.log2(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            codebook_size_lower_bound(2, 1.0, 0.1).unwrap(),
            2.992360060302406,
            epsilon = 1e-12
        );
        let ach = crate::analysis::achievable_log_size(37, 3.0, 0.8, 0.3, 0.2).unwrap();
        let p = PackingParams::new(37, 3.0, 0.8, 0.3, 0.2).unwrap();
        assert_eq!(ach, codebook_size_lower_bound(37, 3.0, p.r0()).unwrap());
    }

    #[test]
    fn construction_is_deterministic_and_separated() {
        let p = PackingParams::new(5, 4.0, 1.0, 0.3, 0.0).unwrap();
        let a = construct_codebook(&p, 9, 2000).unwrap();
        let b = construct_codebook(&p, 9, 2000).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, construct_codebook(&p, 10, 2000).unwrap());
        let rep = verify_packing(&a, 1000, 0).unwrap();
        assert!(rep.separation_ok && rep.linf_ok && rep.average_ok);
        assert!(matches!(
            a.stop_reason(),
            StopReason::Saturated { streak: 2000 }
        ));
    }

    #[test]
    fn one_dimensional_saturation() {
        let p = PackingParams::with_radius(1, 1.0, 0.2, 0.3, 0.0).unwrap();
        for seed in 0..20 {
            let cb = construct_codebook(&p, seed, 100_000).unwrap();
            assert!((2..=3).contains(&cb.len()), "seed {seed}: M={}", cb.len());
            let rep = verify_packing(&cb, 100_000, seed).unwrap();
            assert_eq!(rep.covering_fraction, 1.0, "seed {seed}");
            assert!(rep.passed());
            assert!(cb.len() as f64 >= rep.log2_size_lower_bound.exp2().ceil());
        }
    }

    #[test]
    fn removing_a_codeword_opens_a_hole() {
        let p = PackingParams::with_radius(1, 1.0, 0.2, 0.3, 0.0).unwrap();
        let cb = construct_codebook(&p, 3, 100_000).unwrap();
        let holed = cb.without(0).unwrap();
        let rep = verify_packing(&holed, 100_000, 1).unwrap();
        assert!(rep.covering_fraction < 1.0);
        assert!(!rep.passed());
    }

    #[test]
    fn two_dimensional_density_lower_bound() {
        let p = PackingParams::with_radius(2, 1.0, 0.1, 0.3, 0.0).unwrap();
        let cb = construct_codebook(&p, 5, 200_000).unwrap();
        let rep = verify_packing(&cb, 100_000, 5).unwrap();
        assert_eq!(rep.covering_fraction, 1.0);
        assert!(rep.log2_density.exp2() >= 0.25);
        assert!(rep.density_above_lower);
    }

    #[test]
    fn size_cap_stops_early() {
        let p = PackingParams::new(16, 8.0, 1.0, 0.3, 0.0).unwrap();
        let cb = GreedyPacker::new(p).max_codewords(7).build(1).unwrap();
        assert_eq!(cb.len(), 7);
        assert!(matches!(cb.stop_reason(), StopReason::Capped { .. }));
    }

    #[test]
    fn degenerate_regime_gives_singleton() {
        // r0 > A sqrt(n): no second centre can ever be accepted.
        let p = PackingParams::with_radius(3, 1.0, 2.0, 0.3, 0.0).unwrap();
        assert!(p.is_degenerate());
        let cb = construct_codebook(&p, 0, 500).unwrap();
        assert_eq!(cb.len(), 1);
        assert!(verify_packing(&cb, 100, 0).unwrap().degenerate);
    }

    #[test]
    fn text_format_rejects_corruption() {
        let p = PackingParams::new(3, 2.0, 0.5, 0.3, 0.0).unwrap();
        let cb = construct_codebook(&p, 1, 300).unwrap();
        let text = cb.to_text();
        assert!(text.starts_with("#di-codebook v1 n=3 A=2.0000000000000000e0 "));
        let mut lines: Vec<&str> = text.lines().collect();
        lines.pop();
        assert!(matches!(
            Codebook::from_text(&lines.join("\n")),
            Err(Error::Format(_))
        ));
        let bad_row = text.replacen("\n", "\n1.0 2.0\n", 1);
        assert!(matches!(
            Codebook::from_text(&bad_row),
            Err(Error::Format(_))
        ));
        let extra_key = text.replacen(" M=", " x=1 M=", 1);
        assert!(matches!(
            Codebook::from_text(&extra_key),
            Err(Error::Format(_))
        ));
        assert!(matches!(Codebook::from_text(""), Err(Error::Format(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn text_round_trip_is_bit_exact(n in 1usize..6, seed in any::<u64>(), amp in 0.5f64..5.0) {
            let p = PackingParams::new(n, amp, 0.3, 0.3, 0.0).unwrap();
            let cb = construct_codebook(&p, seed, 200).unwrap();
            let back = Codebook::from_text(&cb.to_text()).unwrap();
            prop_assert_eq!(back.codewords(), cb.codewords());
            prop_assert_eq!(back.params(), cb.params());
            prop_assert_eq!(back.seed(), seed);
        }

        #[test]
        fn greedy_meets_volume_lower_bound(n in 1usize..4, r0 in 0.08f64..0.5, seed in 0u64..1000) {
            let p = PackingParams::with_radius(n, 1.0, r0, 0.3, 0.0).unwrap();
            let cb = construct_codebook(&p, seed, 20_000).unwrap();
            let rep = verify_packing(&cb, 20_000, seed).unwrap();
            prop_assert!(rep.separation_ok && rep.linf_ok);
            if rep.covering_fraction == 1.0 {
                prop_assert!(cb.len() as f64 >= rep.log2_size_lower_bound.exp2().ceil());
            }
        }
    }
}
