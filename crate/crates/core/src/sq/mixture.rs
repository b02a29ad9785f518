//! Row mixtures `D_S` and their correlations relative to the uniform law.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planted::{enumerate_plantings, Planting};
use crate::rational::{int, pow2, ratio, ExactRational};

/// Largest `n` for which `{0,1}^n` is summed exhaustively.
pub const MAX_EXHAUSTIVE_N: usize = 20;

/// `D_S = (1-p) D_0 + (p/t) sum_i U_i`, where `U_i` is uniform on
/// `{x : x|_{S_i} = 1}` and `p = kt/n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowMixture {
    planting: Planting,
    p: ExactRational,
    block_masks: Vec<u64>,
}

impl RowMixture {
    pub fn new(planting: Planting) -> Self {
        let p = ratio((planting.k() * planting.t()) as i64, planting.n() as i64);
        let block_masks = block_masks(&planting);
        RowMixture {
            planting,
            p,
            block_masks,
        }
    }

    pub fn planting(&self) -> &Planting {
        &self.planting
    }

    pub fn n(&self) -> usize {
        self.planting.n()
    }

    pub fn k(&self) -> usize {
        self.planting.k()
    }

    pub fn t(&self) -> usize {
        self.planting.t()
    }

    pub fn p(&self) -> &ExactRational {
        &self.p
    }

    /// Number of blocks fully contained in `x`.
    pub fn fired_blocks(&self, x: &[u8]) -> Result<usize> {
        self.check_len(x)?;
        Ok(self
            .planting
            .blocks()
            .iter()
            .filter(|b| b.iter().all(|&v| x[v - 1] == 1))
            .count())
    }

    /// [`RowMixture::fired_blocks`] for `x` packed as a bit mask (bit `v-1` is
    /// vertex `v`). Only meaningful for `n <= 64`.
    pub fn fired_blocks_mask(&self, x: u64) -> usize {
        debug_assert!(self.n() <= 64);
        self.block_masks.iter().filter(|&&b| x & b == b).count()
    }

    pub fn pmf(&self, x: &[u8]) -> Result<ExactRational> {
        let f = self.fired_blocks(x)?;
        Ok(self.pmf_from_fired(f))
    }

    pub fn pmf_from_fired(&self, fired: usize) -> ExactRational {
        let n = self.n() as i64;
        let base = (int(1) - &self.p) * pow2(-n);
        let planted = &self.p * ratio(fired as i64, self.t() as i64) * pow2(-(n - self.k() as i64));
        base + planted
    }

    /// `D_S(x) / D_0(x) - 1 = p (2^k Z_S(x) - 1)`.
    pub fn relative_density(&self, x: &[u8]) -> Result<ExactRational> {
        let f = self.fired_blocks(x)?;
        Ok(self.relative_density_from_fired(f))
    }

    pub fn relative_density_from_fired(&self, fired: usize) -> ExactRational {
        &self.p * (pow2(self.k() as i64) * ratio(fired as i64, self.t() as i64) - int(1))
    }

    fn check_len(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::invalid(format!("bit vector has length {}, expected {}", x.len(), self.n())));
        }
        if x.iter().any(|&b| b > 1) {
            return Err(Error::invalid("bit vector entries must be 0 or 1"));
        }
        Ok(())
    }
}

pub fn null_pmf(n: usize) -> ExactRational {
    pow2(-(n as i64))
}

/// Empty when `n > 64`.
fn block_masks(p: &Planting) -> Vec<u64> {
    if p.n() > 64 {
        return Vec::new();
    }
    p.blocks()
        .iter()
        .map(|b| b.iter().fold(0u64, |m, &v| m | (1u64 << (v - 1))))
        .collect()
}

/// `lambda[i][j] = |S_i ∩ T_j|` and their total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapProfile {
    pub lambda: Vec<Vec<usize>>,
    pub total: usize,
}

impl OverlapProfile {
    pub fn between(s: &Planting, u: &Planting) -> Result<Self> {
        check_same_shape(s, u)?;
        let lambda: Vec<Vec<usize>> = s
            .blocks()
            .iter()
            .map(|a| {
                u.blocks()
                    .iter()
                    .map(|b| a.iter().filter(|v| b.binary_search(v).is_ok()).count())
                    .collect()
            })
            .collect();
        let total = lambda.iter().flatten().sum();
        Ok(OverlapProfile { lambda, total })
    }

    /// `sum_{i,j} 2^{lambda_ij}`.
    pub fn power_sum(&self) -> BigInt {
        self.lambda.iter().flatten().map(|&l| BigInt::from(1) << l).sum()
    }

    /// `sum_{i,j} 2^{lambda_ij} <= (t^2 - 1) + 2^Lambda`.
    pub fn convexity_holds(&self) -> bool {
        let t = self.lambda.len();
        self.power_sum() <= BigInt::from(t * t - 1) + (BigInt::from(1) << self.total)
    }

    pub fn is_valid(&self, k: usize) -> bool {
        let t = self.lambda.len();
        let rows_ok = self.lambda.iter().all(|r| r.iter().sum::<usize>() <= k);
        let cols_ok = (0..t).all(|j| self.lambda.iter().map(|r| r[j]).sum::<usize>() <= k);
        rows_ok && cols_ok && self.total <= k * t
    }
}

fn check_same_shape(s: &Planting, u: &Planting) -> Result<()> {
    if (s.n(), s.k(), s.t()) != (u.n(), u.k(), u.t()) {
        return Err(Error::invalid(format!(
            "plantings have shapes ({}, {}, {}) and ({}, {}, {})",
            s.n(),
            s.k(),
            s.t(),
            u.n(),
            u.k(),
            u.t()
        )));
    }
    Ok(())
}

/// `<D̂_S, D̂_U> = p^2 ((1/t^2) sum_{i,j} 2^{lambda_ij} - 1)`.
pub fn correlation_exact(s: &Planting, u: &Planting) -> Result<ExactRational> {
    let prof = OverlapProfile::between(s, u)?;
    let t = s.t() as i64;
    let p = ratio((s.k() * s.t()) as i64, s.n() as i64);
    Ok(&p * &p * (ExactRational::new(prof.power_sum(), BigInt::from(t * t)) - int(1)))
}

/// `(k^2/n^2) 2^Lambda`.
pub fn correlation_bound(s: &Planting, u: &Planting) -> Result<ExactRational> {
    let prof = OverlapProfile::between(s, u)?;
    Ok(ratio((s.k() * s.k()) as i64, (s.n() * s.n()) as i64) * pow2(prof.total as i64))
}

/// `sum_x 2^{-n} D̂_S(x) D̂_U(x)` over all of `{0,1}^n`.
pub fn correlation_bruteforce(s: &Planting, u: &Planting) -> Result<ExactRational> {
    check_same_shape(s, u)?;
    let n = s.n();
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::limit("exhaustive-n", n, MAX_EXHAUSTIVE_N as u64));
    }
    let (k, t) = (s.k() as i64, s.t() as i64);
    let (ms, mu) = (block_masks(s), block_masks(u));
    let fired = |masks: &[u64], x: u64| masks.iter().filter(|&&b| x & b == b).count() as i64;
    // D̂(x) = (p/t)(2^k f(x) - t); accumulate the integer parts.
    let mut acc: i128 = 0;
    for x in 0..(1u64 << n) {
        let a = (1i64 << k) * fired(&ms, x) - t;
        let b = (1i64 << k) * fired(&mu, x) - t;
        acc += (a * b) as i128;
    }
    let p = ratio(k * t, n as i64);
    let scale = &p * &p / int(t * t) * pow2(-(n as i64));
    Ok(scale * ExactRational::from_integer(BigInt::from(acc)))
}

/// Outcome of comparing the identity against the exhaustive inner product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationSweep {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub plantings: usize,
    pub ordered_pairs: u64,
    pub mismatches: u64,
    pub bound_violations: u64,
    pub convexity_violations: u64,
    pub asymmetric_pairs: u64,
    pub negative_self: u64,
    pub first_mismatch: Option<String>,
}

impl CorrelationSweep {
    pub fn all_hold(&self) -> bool {
        self.mismatches == 0
            && self.bound_violations == 0
            && self.convexity_violations == 0
            && self.asymmetric_pairs == 0
            && self.negative_self == 0
    }
}

/// Checks every ordered planting pair at `(n, k, t)`.
pub fn correlation_sweep(n: usize, k: usize, t: usize, cap: u64, pair_budget: u64) -> Result<CorrelationSweep> {
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::limit("exhaustive-n", n, MAX_EXHAUSTIVE_N as u64));
    }
    let fam: Vec<Planting> = enumerate_plantings(n, k, t, cap)?.collect();
    let m = fam.len();
    let pairs = (m as u64) * (m as u64);
    if pairs > pair_budget {
        return Err(Error::limit("pair-budget", pairs, pair_budget));
    }
    // Per-planting relative-density integer vectors over {0,1}^n.
    let vectors: Vec<Vec<i32>> = fam
        .par_iter()
        .map(|s| {
            let masks = block_masks(s);
            (0..(1u64 << n))
                .map(|x| (1i32 << k) * masks.iter().filter(|&&b| x & b == b).count() as i32 - t as i32)
                .collect()
        })
        .collect();
    let p = ratio((k * t) as i64, n as i64);
    let scale = &p * &p / int((t * t) as i64) * pow2(-(n as i64));
    let rows: Vec<(u64, u64, u64, u64, u64, Option<String>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut out = (0, 0, 0, 0, 0, None);
            for j in 0..m {
                let brute: i64 = vectors[i].iter().zip(&vectors[j]).map(|(&a, &b)| a as i64 * b as i64).sum();
                let brute = &scale * ExactRational::from_integer(BigInt::from(brute));
                let exact = correlation_exact(&fam[i], &fam[j]).expect("same shape");
                if brute != exact {
                    out.0 += 1;
                    out.5.get_or_insert(format!("pair ({i}, {j}): {exact} vs {brute}"));
                }
                if exact > correlation_bound(&fam[i], &fam[j]).expect("same shape") {
                    out.1 += 1;
                }
                if !OverlapProfile::between(&fam[i], &fam[j]).expect("same shape").convexity_holds() {
                    out.2 += 1;
                }
                if j < i && exact != correlation_exact(&fam[j], &fam[i]).expect("same shape") {
                    out.3 += 1;
                }
                if i == j && exact < ExactRational::zero() {
                    out.4 += 1;
                }
            }
            out
        })
        .collect();
    let mut sweep = CorrelationSweep {
        n,
        k,
        t,
        plantings: m,
        ordered_pairs: pairs,
        mismatches: 0,
        bound_violations: 0,
        convexity_violations: 0,
        asymmetric_pairs: 0,
        negative_self: 0,
        first_mismatch: None,
    };
    for r in rows {
        sweep.mismatches += r.0;
        sweep.bound_violations += r.1;
        sweep.convexity_violations += r.2;
        sweep.asymmetric_pairs += r.3;
        sweep.negative_self += r.4;
        if sweep.first_mismatch.is_none() {
            sweep.first_mismatch = r.5;
        }
    }
    Ok(sweep)
}
