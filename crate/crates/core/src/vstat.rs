//! A VSTAT(N) oracle simulator and the single-query mean-weight distinguisher.
//!
//! Truths, variances and answers are exact rationals. The tolerance
//! `max{1/N, sqrt(Var/N)}` is irrational in general, so the band check is done
//! on squares: `(value - truth)^2 <= max{1/N^2, Var/N}`.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planted::{random_planting, rng_from_seed};
use crate::pseudo::derive_seeds;
use crate::rational::{self, int, pow2, ratio, ExactRational};
use crate::sq::{sda_parameters_unchecked, RowMixture, MAX_EXHAUSTIVE_N};

/// A `[0,1]`-valued query on `{0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Constant(ExactRational),
    /// `c_0 + sum_v c_v x_v`.
    Affine {
        constant: ExactRational,
        coeffs: Vec<ExactRational>,
    },
    /// Entry `x` holds `f(x)` with bit `v-1` of `x` the coordinate `x_v`.
    Table { n: usize, values: Vec<ExactRational> },
}

impl Query {
    /// `(sum_v x_v) / n`.
    pub fn mean_weight(n: usize) -> Self {
        Query::Affine {
            constant: ExactRational::zero(),
            coeffs: vec![ratio(1, n as i64); n],
        }
    }

    pub fn table(n: usize, values: Vec<ExactRational>) -> Result<Self> {
        if n > MAX_EXHAUSTIVE_N {
            return Err(Error::limit("exhaustive-n", n, MAX_EXHAUSTIVE_N as u64));
        }
        if values.len() != 1 << n {
            return Err(Error::invalid(format!("table has {} entries, expected 2^{n}", values.len())));
        }
        let q = Query::Table { n, values };
        q.validate()?;
        Ok(q)
    }

    /// Range of the query over `{0,1}^n`.
    pub fn range(&self) -> (ExactRational, ExactRational) {
        match self {
            Query::Constant(c) => (c.clone(), c.clone()),
            Query::Affine { constant, coeffs } => {
                let lo = coeffs.iter().filter(|c| c.is_negative()).fold(constant.clone(), |a, c| a + c);
                let hi = coeffs.iter().filter(|c| c.is_positive()).fold(constant.clone(), |a, c| a + c);
                (lo, hi)
            }
            Query::Table { values, .. } => {
                let lo = values.iter().min().cloned().unwrap_or_default();
                let hi = values.iter().max().cloned().unwrap_or_default();
                (lo, hi)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range();
        if lo.is_negative() || hi > int(1) {
            return Err(Error::invalid(format!(
                "query range [{}, {}] leaves [0,1]",
                rational::encode(&lo),
                rational::encode(&hi)
            )));
        }
        Ok(())
    }

    /// Explicit table of an affine or constant query.
    pub fn tabulate(&self, n: usize) -> Result<Query> {
        if n > MAX_EXHAUSTIVE_N {
            return Err(Error::limit("exhaustive-n", n, MAX_EXHAUSTIVE_N as u64));
        }
        let values = (0u64..1 << n).map(|x| self.eval_mask(n, x)).collect::<Result<Vec<_>>>()?;
        Ok(Query::Table { n, values })
    }

    fn eval_mask(&self, n: usize, x: u64) -> Result<ExactRational> {
        match self {
            Query::Constant(c) => Ok(c.clone()),
            Query::Affine { constant, coeffs } => {
                check_n(coeffs.len(), n)?;
                Ok((0..n).filter(|v| x >> v & 1 == 1).fold(constant.clone(), |a, v| a + &coeffs[v]))
            }
            Query::Table { n: m, values } => {
                check_n(*m, n)?;
                Ok(values[x as usize].clone())
            }
        }
    }
}

fn check_n(len: usize, n: usize) -> Result<()> {
    if len != n {
        return Err(Error::invalid(format!("query is on {len} coordinates, distribution on {n}")));
    }
    Ok(())
}

/// The null law `D_0` (uniform) or a row mixture `D_S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Distribution {
    Null(usize),
    Mixture(RowMixture),
}

impl Distribution {
    pub fn n(&self) -> usize {
        match self {
            Distribution::Null(n) => *n,
            Distribution::Mixture(m) => m.n(),
        }
    }

    /// Components `(weight, forced-to-one vertices)`; free coordinates are fair bits.
    fn branches(&self) -> Vec<(ExactRational, Vec<usize>)> {
        match self {
            Distribution::Null(_) => vec![(int(1), Vec::new())],
            Distribution::Mixture(m) => {
                let mut out = vec![(int(1) - m.p(), Vec::new())];
                let w = m.p() / int(m.t() as i64);
                out.extend(m.planting().blocks().iter().map(|b| (w.clone(), b.clone())));
                out
            }
        }
    }

    fn pmf_mask(&self, x: u64) -> ExactRational {
        match self {
            Distribution::Null(n) => pow2(-(*n as i64)),
            Distribution::Mixture(m) => m.pmf_from_fired(m.fired_blocks_mask(x)),
        }
    }
}

/// Exact mean and variance of a query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Moments {
    pub mean: ExactRational,
    pub variance: ExactRational,
}

pub fn query_moments(d: &Distribution, q: &Query) -> Result<Moments> {
    q.validate()?;
    match q {
        Query::Constant(c) => Ok(Moments {
            mean: c.clone(),
            variance: ExactRational::zero(),
        }),
        Query::Affine { constant, coeffs } => {
            check_n(coeffs.len(), d.n())?;
            let half = ratio(1, 2);
            let quarter = ratio(1, 4);
            let mut mean = ExactRational::zero();
            let mut second = ExactRational::zero();
            for (w, forced) in d.branches() {
                let mut m = constant.clone();
                let mut var = ExactRational::zero();
                for (v, c) in coeffs.iter().enumerate() {
                    if forced.contains(&(v + 1)) {
                        m += c;
                    } else {
                        m += c * &half;
                        var += c * c * &quarter;
                    }
                }
                mean += &w * &m;
                second += &w * (var + &m * &m);
            }
            let variance = second - &mean * &mean;
            Ok(Moments { mean, variance })
        }
        Query::Table { n, .. } => exhaustive_moments(d, q, *n),
    }
}

/// Sum over all of `{0,1}^n`; the reference used to check analytic moments.
pub fn exhaustive_moments(d: &Distribution, q: &Query, n: usize) -> Result<Moments> {
    check_n(d.n(), n)?;
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::limit("exhaustive-n", n, MAX_EXHAUSTIVE_N as u64));
    }
    let mut mean = ExactRational::zero();
    let mut second = ExactRational::zero();
    for x in 0u64..1 << n {
        let f = q.eval_mask(n, x)?;
        let w = d.pmf_mask(x);
        second += &w * &f * &f;
        mean += w * f;
    }
    let variance = second - &mean * &mean;
    Ok(Moments { mean, variance })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Truth plus uniform noise inside the band.
    Honest,
    /// The point of the band closest to the null expectation.
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleAnswer {
    #[serde(with = "rational::serde_str")]
    pub value: ExactRational,
    #[serde(with = "rational::serde_str")]
    pub truth: ExactRational,
    #[serde(with = "rational::serde_str")]
    pub variance: ExactRational,
    pub sample_size: u64,
    /// `max{1/N^2, Var/N}`.
    #[serde(with = "rational::serde_str")]
    pub tolerance_sq: ExactRational,
    pub tolerance: f64,
}

impl OracleAnswer {
    pub fn within_tolerance(&self) -> bool {
        let dev = &self.value - &self.truth;
        &dev * &dev <= self.tolerance_sq
    }

    pub fn value_f64(&self) -> f64 {
        rational::to_f64(&self.value)
    }
}

pub fn tolerance_sq(variance: &ExactRational, sample_size: u64) -> ExactRational {
    let nn = int(sample_size as i64);
    let a = int(1) / (&nn * &nn);
    let b = variance / nn;
    if a >= b {
        a
    } else {
        b
    }
}

/// A rational `r >= 0` with `r^2 <= tol_sq`, within a relative `2^-40` of `sqrt(tol_sq)`.
fn inner_radius(tol_sq: &ExactRational) -> ExactRational {
    if tol_sq.is_zero() {
        return ExactRational::zero();
    }
    let approx = rational::to_f64(tol_sq).sqrt();
    let mut r = ExactRational::from_float(approx).unwrap_or_else(ExactRational::zero);
    let shrink = int(1) - pow2(-40);
    while &r * &r > *tol_sq {
        r *= &shrink;
    }
    r
}

const NOISE_STEPS: i64 = 1 << 20;

/// One VSTAT(N) answer. Errors if the query is not evaluable exactly or the
/// emitted answer leaves its band.
pub fn vstat_query<R: Rng>(
    d: &Distribution,
    q: &Query,
    sample_size: u64,
    policy: Policy,
    rng: &mut R,
) -> Result<OracleAnswer> {
    if sample_size == 0 {
        return Err(Error::invalid("sample size N must be positive"));
    }
    if sample_size > i64::MAX as u64 {
        return Err(Error::invalid("sample size N exceeds 2^63"));
    }
    let Moments { mean: truth, variance } = query_moments(d, q)?;
    let tol_sq = tolerance_sq(&variance, sample_size);
    let value = match policy {
        Policy::Honest => {
            let r = inner_radius(&tol_sq);
            let u = rng.random_range(-NOISE_STEPS..=NOISE_STEPS);
            &truth + r * ratio(u, NOISE_STEPS)
        }
        Policy::Adversarial => {
            let null = query_moments(&Distribution::Null(d.n()), q)?.mean;
            let dev = &null - &truth;
            if &dev * &dev <= tol_sq {
                null
            } else {
                let r = inner_radius(&tol_sq);
                if dev.is_positive() {
                    &truth + r
                } else {
                    &truth - r
                }
            }
        }
    };
    let answer = OracleAnswer {
        value,
        truth,
        tolerance: rational::to_f64(&tol_sq).sqrt(),
        variance,
        sample_size,
        tolerance_sq: tol_sq,
    };
    if !answer.within_tolerance() {
        return Err(Error::Invariant("oracle answer outside its tolerance band".into()));
    }
    Ok(answer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Planted,
    Null,
}

/// `p = kt/n`.
pub fn planting_rate(n: usize, k: usize, t: usize) -> ExactRational {
    ratio((k * t) as i64, n as i64)
}

/// `E_{D_S}[mean weight] - 1/2 = p k / (2n)`.
pub fn mean_weight_gap(n: usize, k: usize, t: usize) -> ExactRational {
    planting_rate(n, k, t) * ratio(k as i64, 2 * n as i64)
}

/// `1/2 + p k / (2n)`.
pub fn mean_weight_truth(n: usize, k: usize, t: usize) -> ExactRational {
    ratio(1, 2) + mean_weight_gap(n, k, t)
}

/// `1/2 + p k / (4n)`.
pub fn decision_threshold(n: usize, k: usize, t: usize) -> ExactRational {
    ratio(1, 2) + mean_weight_gap(n, k, t) / int(2)
}

/// `ceil(16 (n/(pk))^2)`: above this the honest oracle's band is under half the gap.
pub fn honest_sufficient_n(n: usize, k: usize, t: usize) -> u64 {
    let x = int(n as i64) / (planting_rate(n, k, t) * int(k as i64));
    ceil_u64(&(int(16) * &x * &x))
}

/// Largest `N` whose planted tolerance still covers the whole gap, so the
/// adversarial oracle can answer exactly `1/2`.
pub fn gap_threshold_n(n: usize, k: usize, t: usize) -> Result<u64> {
    let pl = random_planting(n, k, t, &mut rng_from_seed(0))?;
    let var = query_moments(&Distribution::Mixture(RowMixture::new(pl)), &Query::mean_weight(n))?.variance;
    let g = mean_weight_gap(n, k, t);
    let a = int(1) / &g;
    let b = var / (&g * &g);
    Ok(floor_u64(if a >= b { &a } else { &b }))
}

fn floor_u64(q: &ExactRational) -> u64 {
    q.numer().div_floor(q.denom()).to_u64().unwrap_or(u64::MAX)
}

fn ceil_u64(q: &ExactRational) -> u64 {
    q.numer().div_ceil(q.denom()).to_u64().unwrap_or(u64::MAX)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinguisherTrial {
    pub hypothesis: Hypothesis,
    pub decision: Hypothesis,
    pub answer: OracleAnswer,
}

impl DistinguisherTrial {
    pub fn correct(&self) -> bool {
        self.hypothesis == self.decision
    }
}

/// One mean-weight query; decides planted iff the answer exceeds `1/2 + pk/(4n)`.
/// Under the planted hypothesis the planting is drawn from `seed`.
pub fn mean_weight_distinguisher(
    n: usize,
    k: usize,
    t: usize,
    sample_size: u64,
    policy: Policy,
    hypothesis: Hypothesis,
    seed: u64,
) -> Result<DistinguisherTrial> {
    let mut rng = rng_from_seed(seed);
    let planting = random_planting(n, k, t, &mut rng)?;
    let d = match hypothesis {
        Hypothesis::Planted => Distribution::Mixture(RowMixture::new(planting)),
        Hypothesis::Null => Distribution::Null(n),
    };
    let answer = vstat_query(&d, &Query::mean_weight(n), sample_size, policy, &mut rng)?;
    let decision = if answer.value > decision_threshold(n, k, t) {
        Hypothesis::Planted
    } else {
        Hypothesis::Null
    };
    Ok(DistinguisherTrial {
        hypothesis,
        decision,
        answer,
    })
}

/// Correct decisions over `trials` planted and `trials` null runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub planted_correct: usize,
    pub null_correct: usize,
    pub trials: usize,
    pub answers_within_tolerance: bool,
}

impl TrialSummary {
    pub fn success_rate(&self) -> ExactRational {
        ratio((self.planted_correct + self.null_correct) as i64, 2 * self.trials as i64)
    }
}

pub fn run_trials(
    n: usize,
    k: usize,
    t: usize,
    sample_size: u64,
    policy: Policy,
    trials: usize,
    seed: u64,
) -> Result<TrialSummary> {
    let seeds = derive_seeds(seed, 2 * trials);
    let results: Vec<DistinguisherTrial> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let h = if i < trials { Hypothesis::Planted } else { Hypothesis::Null };
            mean_weight_distinguisher(n, k, t, sample_size, policy, h, s)
        })
        .collect::<Result<_>>()?;
    let count = |h: Hypothesis| results.iter().filter(|r| r.hypothesis == h && r.correct()).count();
    Ok(TrialSummary {
        planted_correct: count(Hypothesis::Planted),
        null_correct: count(Hypothesis::Null),
        trials,
        answers_within_tolerance: results.iter().all(|r| r.answer.within_tolerance()),
    })
}

/// The mean-weight truth formula against exhaustive summation, both hypotheses.
pub fn check_mean_weight_truth(n: usize, k: usize, t: usize, seed: u64) -> Result<bool> {
    let q = Query::mean_weight(n);
    let table = q.tabulate(n)?;
    let pl = random_planting(n, k, t, &mut rng_from_seed(seed))?;
    let planted = Distribution::Mixture(RowMixture::new(pl));
    let null = Distribution::Null(n);
    let ep = exhaustive_moments(&planted, &table, n)?;
    let e0 = exhaustive_moments(&null, &table, n)?;
    Ok(ep.mean == mean_weight_truth(n, k, t)
        && e0.mean == ratio(1, 2)
        && ep == query_moments(&planted, &q)?
        && e0 == query_moments(&null, &q)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    /// `(n, k, t)` triples.
    pub models: Vec<[usize; 3]>,
    /// Sample sizes scanned are `2^0, 2^1, ..., 2^max_log2_n`.
    pub max_log2_n: u32,
    pub trials: usize,
    pub seed: u64,
    /// `l` used for the statistical-dimension column.
    pub ell: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            models: vec![[100, 2, 2], [100, 2, 4], [100, 4, 4], [100, 4, 8], [100, 5, 10]],
            max_log2_n: 40,
            trials: 20,
            seed: 1,
            ell: 0,
        }
    }
}

/// Success rate the sweep looks for.
pub fn target_success() -> ExactRational {
    ratio(2, 3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    #[serde(with = "rational::serde_str")]
    pub p: ExactRational,
    #[serde(with = "rational::serde_str")]
    pub gap: ExactRational,
    /// Smallest scanned `N` reaching the target under the adversarial oracle.
    pub minimal_n: Option<u64>,
    #[serde(with = "rational::serde_opt_str")]
    pub success_at_minimal: Option<ExactRational>,
    pub gap_threshold_n: u64,
    pub honest_sufficient_n: u64,
    #[serde(with = "rational::serde_str")]
    pub honest_success_at_max: ExactRational,
    pub sda_ell: usize,
    pub sda_vstat_n: String,
    pub sda_window_violation: Option<String>,
    pub answers_within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub config: ThresholdConfig,
    #[serde(with = "rational::serde_str")]
    pub target_success: ExactRational,
    pub rows: Vec<ThresholdRow>,
    /// At each fixed `n`, `minimal_n` is non-increasing in `kt`.
    pub decreasing_in_kt: bool,
    pub all_answers_within_tolerance: bool,
}

pub fn threshold_sweep(cfg: &ThresholdConfig) -> Result<ThresholdReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    if cfg.max_log2_n > 62 {
        return Err(Error::invalid("max_log2_n must be at most 62"));
    }
    let mut rows = Vec::new();
    for (i, &[n, k, t]) in cfg.models.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let mut minimal = None;
        let mut tally = true;
        for e in 0..=cfg.max_log2_n {
            let s = run_trials(n, k, t, 1u64 << e, Policy::Adversarial, cfg.trials, seed)?;
            tally &= s.answers_within_tolerance;
            if s.success_rate() >= target_success() {
                minimal = Some((1u64 << e, s.success_rate()));
                break;
            }
        }
        let honest = run_trials(n, k, t, 1u64 << cfg.max_log2_n, Policy::Honest, cfg.trials, seed)?;
        tally &= honest.answers_within_tolerance;
        let sda = sda_parameters_unchecked(n, k, t, cfg.ell)?;
        rows.push(ThresholdRow {
            n,
            k,
            t,
            p: planting_rate(n, k, t),
            gap: mean_weight_gap(n, k, t),
            minimal_n: minimal.as_ref().map(|m| m.0),
            success_at_minimal: minimal.map(|m| m.1),
            gap_threshold_n: gap_threshold_n(n, k, t)?,
            honest_sufficient_n: honest_sufficient_n(n, k, t),
            honest_success_at_max: honest.success_rate(),
            sda_ell: cfg.ell,
            sda_vstat_n: sda.vstat_n.to_string(),
            sda_window_violation: sda.violation,
            answers_within_tolerance: tally,
        });
    }
    let mut decreasing_in_kt = true;
    for a in &rows {
        for b in &rows {
            if a.n == b.n && a.k * a.t < b.k * b.t {
                let (x, y) = (a.minimal_n.unwrap_or(u64::MAX), b.minimal_n.unwrap_or(u64::MAX));
                decreasing_in_kt &= y <= x;
            }
        }
    }
    let all_answers_within_tolerance = rows.iter().all(|r| r.answers_within_tolerance);
    Ok(ThresholdReport {
        config: cfg.clone(),
        target_success: target_success(),
        rows,
        decreasing_in_kt,
        all_answers_within_tolerance,
    })
}

/// `|a - b|` for rationals, used by the demo.
pub fn abs_diff(a: &ExactRational, b: &ExactRational) -> ExactRational {
    (a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mixture(n: usize, k: usize, t: usize, seed: u64) -> Distribution {
        Distribution::Mixture(RowMixture::new(random_planting(n, k, t, &mut rng_from_seed(seed)).unwrap()))
    }

    #[test]
    fn constant_query() {
        let q = Query::Constant(ratio(1, 2));
        for policy in [Policy::Honest, Policy::Adversarial] {
            let a = vstat_query(&mixture(8, 2, 2, 1), &q, 10, policy, &mut rng_from_seed(3)).unwrap();
            assert_eq!(a.truth, ratio(1, 2));
            assert!(a.variance.is_zero());
            assert_eq!(a.tolerance_sq, ratio(1, 100));
            assert!(abs_diff(&a.value, &a.truth) <= ratio(1, 10));
        }
    }

    #[test]
    fn range_checked() {
        assert!(Query::Constant(ratio(3, 2)).validate().is_err());
        let q = Query::Affine {
            constant: ratio(1, 2),
            coeffs: vec![ratio(1, 2), ratio(-1, 2)],
        };
        q.validate().unwrap();
        let bad = Query::Affine {
            constant: ratio(1, 2),
            coeffs: vec![ratio(1, 2), ratio(1, 2)],
        };
        assert!(bad.validate().is_err());
        assert!(Query::table(2, vec![int(0); 3]).is_err());
    }

    #[test]
    fn mean_weight_truth_exhaustive() {
        for (n, k, t) in [(4, 2, 1), (6, 2, 2), (8, 2, 3), (9, 3, 2), (12, 2, 3), (12, 4, 3)] {
            assert!(check_mean_weight_truth(n, k, t, 7).unwrap(), "({n},{k},{t})");
        }
    }

    #[test]
    fn null_truth_is_half() {
        let m = query_moments(&Distribution::Null(100), &Query::mean_weight(100)).unwrap();
        assert_eq!(m.mean, ratio(1, 2));
        assert_eq!(m.variance, ratio(1, 400));
    }

    #[test]
    fn gap_example() {
        assert_eq!(planting_rate(100, 4, 4), ratio(4, 25));
        assert_eq!(mean_weight_gap(100, 4, 4), ratio(32, 10_000));
    }

    #[test]
    fn honest_large_n_is_correct() {
        let (n, k, t) = (100, 4, 4);
        let s = run_trials(n, k, t, honest_sufficient_n(n, k, t), Policy::Honest, 50, 9).unwrap();
        assert_eq!((s.planted_correct, s.null_correct), (50, 50));
        assert!(s.answers_within_tolerance);
    }

    #[test]
    fn adversarial_small_n_pins_half() {
        let (n, k, t) = (100, 4, 4);
        let big_n = gap_threshold_n(n, k, t).unwrap();
        let tr = mean_weight_distinguisher(n, k, t, big_n, Policy::Adversarial, Hypothesis::Planted, 4).unwrap();
        assert_eq!(tr.answer.value, ratio(1, 2));
        assert_eq!(tr.decision, Hypothesis::Null);
        let tr = mean_weight_distinguisher(n, k, t, big_n + 1, Policy::Adversarial, Hypothesis::Planted, 4).unwrap();
        assert!(tr.answer.value > ratio(1, 2));
    }

    #[test]
    fn zero_tolerance_policies_agree() {
        let d = mixture(6, 2, 2, 5);
        let q = Query::Constant(ratio(1, 3));
        let a = vstat_query(&d, &q, u32::MAX as u64, Policy::Honest, &mut rng_from_seed(1)).unwrap();
        let b = vstat_query(&d, &q, u32::MAX as u64, Policy::Adversarial, &mut rng_from_seed(1)).unwrap();
        assert!(abs_diff(&a.value, &b.value) <= ratio(2, u32::MAX as i64));
        assert_eq!(inner_radius(&ExactRational::zero()), ExactRational::zero());
    }

    #[test]
    fn sweep_trend() {
        let cfg = ThresholdConfig {
            trials: 5,
            ..ThresholdConfig::default()
        };
        let rep = threshold_sweep(&cfg).unwrap();
        assert!(rep.decreasing_in_kt);
        assert!(rep.all_answers_within_tolerance);
        for r in &rep.rows {
            assert_eq!(r.honest_success_at_max, int(1));
            let m = r.minimal_n.unwrap();
            assert!(m > r.gap_threshold_n);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn answers_in_band(seed in any::<u64>(), log_n in 0u32..50, n in 4usize..30, honest in any::<bool>()) {
            let policy = if honest { Policy::Honest } else { Policy::Adversarial };
            let d = mixture(n, 2, 2, seed);
            let a = vstat_query(&d, &Query::mean_weight(n), 1u64 << log_n, policy, &mut rng_from_seed(seed)).unwrap();
            prop_assert!(a.within_tolerance());
            prop_assert!((a.value_f64() - rational::to_f64(&a.truth)).abs() <= a.tolerance * (1.0 + 1e-9) + 4.0 * f64::EPSILON);
        }
    }
}
