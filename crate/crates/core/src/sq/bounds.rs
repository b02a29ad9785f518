//! Tail inequalities for the overlap law and their grid checks.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, pow2, ExactRational};
use crate::sq::{overlap_pmf, overlap_tail, overlap_tail_bound};

/// Relative slack for comparisons between an exact value and a float series.
const SERIES_SLACK: f64 = 1e-12;

/// `(1/l!) (K^2/n)^l`.
pub fn sparse_asymptotic(n: usize, big_k: usize, ell: usize) -> Result<f64> {
    if ell > big_k {
        return Err(Error::invalid(format!("overlap {ell} exceeds K = {big_k}")));
    }
    let x = (big_k * big_k) as f64 / n as f64;
    Ok((1..=ell).fold(1.0, |acc, j| acc * x / j as f64))
}

/// `sum_{j > l} lambda^j / j!`, summed until the terms stop contributing.
pub fn poisson_tail(lambda: f64, ell: usize) -> f64 {
    series_tail(lambda, ell)
}

fn series_tail(x: f64, ell: usize) -> f64 {
    let mut term = 1.0;
    for j in 1..=ell + 1 {
        term *= x / j as f64;
    }
    let mut sum = 0.0;
    let mut j = ell + 1;
    while term > 0.0 && term > sum * f64::EPSILON * 1e-3 {
        sum += term;
        j += 1;
        term *= x / j as f64;
        if j > 10_000 {
            break;
        }
    }
    sum
}

/// `(lambda^{l+1} / (l+1)!) / (1 - lambda/(l+2))`, valid for `lambda < l + 2`.
pub fn poisson_tail_bound(lambda: f64, ell: usize) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be nonnegative")));
    }
    if lambda >= (ell + 2) as f64 {
        return Err(Error::Domain(format!("lambda = {lambda} must be below l + 2 = {}", ell + 2)));
    }
    let lead = (1..=ell + 1).fold(1.0, |acc, j| acc * lambda / j as f64);
    Ok(lead / (1.0 - lambda / (ell + 2) as f64))
}

/// `sum_{j > l} (2K^2/n)^j / j!`.
pub fn moment_tail_bound(n: usize, big_k: usize, ell: usize) -> Result<f64> {
    if n == 0 || big_k > n {
        return Err(Error::invalid(format!("need 0 <= K <= n, got K = {big_k}, n = {n}")));
    }
    Ok(series_tail(2.0 * (big_k * big_k) as f64 / n as f64, ell))
}

/// `E[2^X 1{X > l}]` for the hypergeometric overlap `X`.
pub fn high_overlap_moment(n: usize, big_k: usize, ell: usize) -> Result<ExactRational> {
    let mut acc = ExactRational::zero();
    for j in (ell + 1)..=big_k {
        acc += pow2(j as i64) * overlap_pmf(n, big_k, j)?;
    }
    Ok(acc)
}

/// Grid axes for the three inequalities and the sparse trend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundGrids {
    pub hypergeom_n: Vec<usize>,
    pub hypergeom_k: Vec<usize>,
    pub poisson_lambda: Vec<f64>,
    pub poisson_ell: Vec<usize>,
    pub moment_n: Vec<usize>,
    pub moment_k: Vec<usize>,
    pub sparse_n: Vec<usize>,
    pub sparse_exponent: f64,
    pub sparse_ell: Vec<usize>,
}

pub fn default_bound_grids() -> BoundGrids {
    BoundGrids {
        hypergeom_n: vec![20, 50],
        hypergeom_k: (2..=6).collect(),
        poisson_lambda: vec![0.0, 0.1, 0.5, 1.0],
        poisson_ell: (0..=5).collect(),
        moment_n: vec![20, 50, 100],
        moment_k: (2..=6).collect(),
        sparse_n: vec![100, 1_000, 10_000],
        sparse_exponent: 0.3,
        sparse_ell: vec![1, 2],
    }
}

impl Default for BoundGrids {
    fn default() -> Self {
        default_bound_grids()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub family: String,
    pub n: Option<usize>,
    pub big_k: Option<usize>,
    pub lambda: Option<f64>,
    pub ell: usize,
    /// Exact left-hand side when available.
    pub exact: Option<String>,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseTrendPoint {
    pub n: usize,
    pub big_k: usize,
    pub ell: usize,
    pub exact: f64,
    pub asymptotic: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
    pub sparse: Vec<SparseTrendPoint>,
    pub all_hold: bool,
    /// `|ratio - 1|` strictly decreases along the `n` grid for every `l`.
    pub sparse_trending: bool,
}

impl BoundGrids {
    pub fn run(&self) -> Result<BoundReport> {
        let mut checks = Vec::new();
        for &n in &self.hypergeom_n {
            for &kk in &self.hypergeom_k {
                for j in 0..=kk + 1 {
                    let tail = overlap_tail(n, kk, j)?;
                    let bound = overlap_tail_bound(n, kk, j)?;
                    checks.push(BoundCheck {
                        family: "hypergeometric-tail".into(),
                        n: Some(n),
                        big_k: Some(kk),
                        lambda: None,
                        ell: j,
                        exact: Some(rational::encode(&tail)),
                        value: rational::to_f64(&tail),
                        bound: rational::to_f64(&bound),
                        holds: tail <= bound,
                    });
                }
            }
        }
        for &lambda in &self.poisson_lambda {
            for &ell in &self.poisson_ell {
                let tail = poisson_tail(lambda, ell);
                let bound = poisson_tail_bound(lambda, ell)?;
                checks.push(BoundCheck {
                    family: "poisson-tail".into(),
                    n: None,
                    big_k: None,
                    lambda: Some(lambda),
                    ell,
                    exact: None,
                    value: tail,
                    bound,
                    holds: tail <= bound * (1.0 + SERIES_SLACK),
                });
            }
        }
        for &n in &self.moment_n {
            for &kk in &self.moment_k {
                for ell in 0..=kk {
                    let exact = high_overlap_moment(n, kk, ell)?;
                    let value = rational::to_f64(&exact);
                    let bound = moment_tail_bound(n, kk, ell)?;
                    checks.push(BoundCheck {
                        family: "moment-tail".into(),
                        n: Some(n),
                        big_k: Some(kk),
                        lambda: None,
                        ell,
                        exact: Some(rational::encode(&exact)),
                        value,
                        bound,
                        holds: value <= bound * (1.0 + SERIES_SLACK),
                    });
                }
            }
        }
        let mut sparse = Vec::new();
        for &ell in &self.sparse_ell {
            for &n in &self.sparse_n {
                let kk = (n as f64).powf(self.sparse_exponent).floor() as usize;
                if ell > kk {
                    continue;
                }
                let exact = rational::to_f64(&overlap_pmf(n, kk, ell)?);
                let asymptotic = sparse_asymptotic(n, kk, ell)?;
                sparse.push(SparseTrendPoint {
                    n,
                    big_k: kk,
                    ell,
                    exact,
                    asymptotic,
                    ratio: asymptotic / exact,
                });
            }
        }
        let sparse_trending = self.sparse_ell.iter().all(|&ell| {
            let devs: Vec<f64> = sparse.iter().filter(|p| p.ell == ell).map(|p| (p.ratio - 1.0).abs()).collect();
            devs.windows(2).all(|w| w[1] < w[0])
        });
        let all_hold = checks.iter().all(|c| c.holds);
        Ok(BoundReport {
            checks,
            sparse,
            all_hold,
            sparse_trending,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson_tail_bound(1.0, 0).unwrap(), 2.0);
        assert!((poisson_tail(1.0, 0) - (std::f64::consts::E - 1.0)).abs() < 1e-14);
        assert_eq!(poisson_tail_bound(0.0, 3).unwrap(), 0.0);
        assert_eq!(poisson_tail(0.0, 3), 0.0);
        assert!(matches!(poisson_tail_bound(2.0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn poisson_tail_oracle() {
        // e^lambda minus the head, for moderate lambda where cancellation is mild.
        for &lambda in &[0.5f64, 1.0, 2.0] {
            for ell in 0..3usize {
                let head: f64 = (0..=ell).map(|j| lambda.powi(j as i32) / (1..=j).product::<usize>() as f64).sum();
                let want = lambda.exp() - head;
                assert!((poisson_tail(lambda, ell) - want).abs() < 1e-12 * want.max(1.0));
            }
        }
    }

    #[test]
    fn sparse_point() {
        assert_eq!(sparse_asymptotic(100, 3, 0).unwrap(), 1.0);
        let exact = rational::to_f64(&overlap_pmf(10_000, 15, 1).unwrap());
        let r = sparse_asymptotic(10_000, 15, 1).unwrap() / exact;
        assert!((r - 1.0).abs() < 0.05, "{r}");
    }

    #[test]
    fn moment_beyond_k_is_zero() {
        assert!(high_overlap_moment(50, 4, 4).unwrap().is_zero());
        assert!(moment_tail_bound(50, 4, 4).unwrap() > 0.0);
        let exact = rational::to_f64(&high_overlap_moment(50, 4, 1).unwrap());
        assert!(exact <= moment_tail_bound(50, 4, 1).unwrap());
    }

    #[test]
    fn default_grid_holds() {
        let rep = default_bound_grids().run().unwrap();
        assert!(rep.all_hold);
        assert!(rep.sparse_trending);
    }
}
