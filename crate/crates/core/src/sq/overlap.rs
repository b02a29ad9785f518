//! Planting counts and the hypergeometric law of the union overlap.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planted::{enumerate_plantings, Planting};
use crate::rational::{binomial, factorial, from_biguint, pow, ratio, ExactRational};
use crate::sq::OverlapProfile;

fn check_model(n: usize, k: usize, t: usize) -> Result<()> {
    if n == 0 || k == 0 || t == 0 {
        return Err(Error::invalid("n, k and t must be positive"));
    }
    if k * t > n {
        return Err(Error::invalid(format!("kt = {} exceeds n = {n}", k * t)));
    }
    Ok(())
}

/// `m = binom(n, kt) (kt)! / (k!)^t`.
pub fn count_plantings(n: usize, k: usize, t: usize) -> Result<BigUint> {
    check_model(n, k, t)?;
    let kt = (k * t) as u64;
    let kf = factorial(k as u64);
    let denom = (0..t).fold(BigUint::from(1u32), |acc, _| acc * &kf);
    Ok(binomial(n as u64, kt) * factorial(kt) / denom)
}

/// `prod_{i=1}^{t} binom(n - (i-1)k, k)`.
pub fn count_plantings_telescoping(n: usize, k: usize, t: usize) -> Result<BigUint> {
    check_model(n, k, t)?;
    Ok((0..t).fold(BigUint::from(1u32), |acc, i| acc * binomial((n - i * k) as u64, k as u64)))
}

fn check_hypergeometric(n: usize, big_k: usize) -> Result<()> {
    if big_k > n {
        return Err(Error::invalid(format!("K = {big_k} exceeds n = {n}")));
    }
    Ok(())
}

/// `binom(K, l) binom(n-K, K-l) / binom(n, K)`.
pub fn overlap_pmf(n: usize, big_k: usize, ell: usize) -> Result<ExactRational> {
    check_hypergeometric(n, big_k)?;
    if ell > big_k {
        return Err(Error::invalid(format!("overlap {ell} exceeds K = {big_k}")));
    }
    let num = binomial(big_k as u64, ell as u64) * binomial((n - big_k) as u64, (big_k - ell) as u64);
    Ok(from_biguint(&num) / from_biguint(&binomial(n as u64, big_k as u64)))
}

/// `Pr[X >= j]`.
pub fn overlap_tail(n: usize, big_k: usize, j: usize) -> Result<ExactRational> {
    check_hypergeometric(n, big_k)?;
    let mut acc = ExactRational::zero();
    for ell in j..=big_k {
        acc += overlap_pmf(n, big_k, ell)?;
    }
    Ok(acc)
}

/// `binom(K, j) (K/n)^j`.
pub fn overlap_tail_bound(n: usize, big_k: usize, j: usize) -> Result<ExactRational> {
    check_hypergeometric(n, big_k)?;
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    Ok(from_biguint(&binomial(big_k as u64, j as u64)) * pow(&ratio(big_k as i64, n as i64), j as u32))
}

/// Histogram of `Lambda(S_0, T)` over every planting `T`, with `S_0` the
/// first planting in enumeration order.
pub fn overlap_histogram(n: usize, k: usize, t: usize, cap: u64) -> Result<Vec<u64>> {
    let mut it = enumerate_plantings(n, k, t, cap)?;
    let reference: Planting = it.next().expect("at least one planting");
    let mut hist = vec![0u64; k * t + 1];
    hist[OverlapProfile::between(&reference, &reference)?.total] += 1;
    for pl in it {
        hist[OverlapProfile::between(&reference, &pl)?.total] += 1;
    }
    Ok(hist)
}

/// One `(n, k, t)` with its count checked against enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountCheck {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub formula: u64,
    pub telescoping: u64,
    pub enumerated: u64,
}

impl CountCheck {
    pub fn holds(&self) -> bool {
        self.formula == self.telescoping && self.formula == self.enumerated
    }
}

/// Every `(n, k, t)` with `n <= max_n` and `m <= max_m`, counted three ways.
pub fn verify_counts(max_n: usize, max_m: u64) -> Result<Vec<CountCheck>> {
    let mut configs = Vec::new();
    for n in 1..=max_n {
        for k in 1..=n {
            for t in 1..=n / k {
                let m = count_plantings(n, k, t)?;
                if m <= BigUint::from(max_m) {
                    configs.push((n, k, t, m.to_u64().expect("bounded by max_m")));
                }
            }
        }
    }
    use rayon::prelude::*;
    configs
        .into_par_iter()
        .map(|(n, k, t, m)| {
            let tel = count_plantings_telescoping(n, k, t)?.to_u64().expect("equal size");
            let enumerated = enumerate_plantings(n, k, t, max_m)?.count() as u64;
            Ok(CountCheck {
                n,
                k,
                t,
                formula: m,
                telescoping: tel,
                enumerated,
            })
        })
        .collect()
}
