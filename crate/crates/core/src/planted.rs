//! The null model `G(n, 1/2)`, the multi-clique planted model and plantings.
//!
//! Vertices are `1..=n`. Edge signs are `+1` (present) or `-1` (absent) and
//! stored densely in the lexicographic order of canonical pairs `(u, v)`,
//! `u < v`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{Character, Edge};
use crate::sq::count_plantings;

/// Name of the generator behind every seeded draw; embedded in reports.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

/// Default cap on the number of plantings a brute-force enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the canonical pair `(u, v)`, `1 <= u < v <= n`.
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(1 <= u && u < v && v <= n);
    (u - 1) * (2 * n - u) / 2 + (v - u - 1)
}

/// An `n`-vertex graph as a `±1` sign per unordered pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    signs: Vec<i8>,
}

impl Graph {
    pub fn from_signs(n: usize, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != num_pairs(n) {
            return Err(Error::invalid(format!(
                "graph on {n} vertices needs {} signs, got {}",
                num_pairs(n),
                signs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("edge signs must be +1 or -1"));
        }
        Ok(Graph { n, signs })
    }

    /// All signs `+1`.
    pub fn complete(n: usize) -> Self {
        Graph {
            n,
            signs: vec![1; num_pairs(n)],
        }
    }

    /// Graph whose sign at pair index `i` is `+1` iff bit `i` of `mask` is set.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let signs = (0..num_pairs(n))
            .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
            .collect();
        Graph { n, signs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign(&self, e: Edge) -> i8 {
        self.signs[pair_index(self.n, e.u(), e.v())]
    }

    pub fn set_sign(&mut self, e: Edge, s: i8) {
        let i = pair_index(self.n, e.u(), e.v());
        self.signs[i] = s;
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.sign(e) == 1
    }

    /// Canonical pairs in storage order.
    pub fn pairs(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.n;
        (1..=n).flat_map(move |u| ((u + 1)..=n).map(move |v| Edge::new(u, v)))
    }

    pub fn non_edges(&self) -> Vec<Edge> {
        self.pairs().filter(|&e| !self.has_edge(e)).collect()
    }

    pub fn edge_density(&self) -> f64 {
        if self.signs.is_empty() {
            return 0.0;
        }
        self.signs.iter().filter(|&&s| s == 1).count() as f64 / self.signs.len() as f64
    }

    /// Every graph on `n` vertices, in mask order. Refuses when there are
    /// more than `cap` of them.
    pub fn all_graphs(n: usize, cap: u64) -> Result<impl Iterator<Item = Graph>> {
        let pairs = num_pairs(n);
        if pairs >= 63 || (1u64 << pairs) > cap {
            return Err(Error::limit("enumeration", format!("2^{pairs} graphs"), cap));
        }
        Ok((0..(1u64 << pairs)).map(move |mask| Graph::from_mask(n, mask)))
    }
}

/// An ordered tuple of `t` disjoint `k`-subsets of `[n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Planting {
    n: usize,
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl Planting {
    pub fn new(n: usize, k: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 || blocks.is_empty() {
            return Err(Error::invalid("k and t must be positive"));
        }
        if k * blocks.len() > n {
            return Err(Error::invalid(format!(
                "kt = {} exceeds n = {n}",
                k * blocks.len()
            )));
        }
        let mut seen = vec![false; n + 1];
        for b in blocks.iter_mut() {
            b.sort_unstable();
            if b.len() != k {
                return Err(Error::invalid(format!("block {b:?} does not have size {k}")));
            }
            for &v in b.iter() {
                if v == 0 || v > n {
                    return Err(Error::invalid(format!("vertex {v} outside 1..={n}")));
                }
                if seen[v] {
                    return Err(Error::invalid(format!("vertex {v} appears in two blocks")));
                }
                seen[v] = true;
            }
        }
        Ok(Planting { n, k, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.blocks.len()
    }

    /// Sorted blocks; block `r` (0-based here) carries label `r + 1`.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Label (1-based) of the block containing `v`.
    pub fn label_of(&self, v: usize) -> Option<usize> {
        self.blocks
            .iter()
            .position(|b| b.binary_search(&v).is_ok())
            .map(|r| r + 1)
    }

    /// Row `i-1` holds `x_{i,1..t}`.
    pub fn indicator(&self) -> Vec<Vec<u8>> {
        let mut x = vec![vec![0u8; self.t()]; self.n];
        for (r, b) in self.blocks.iter().enumerate() {
            for &v in b {
                x[v - 1][r] = 1;
            }
        }
        x
    }

    /// Union of all blocks, sorted.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        s.sort_unstable();
        s
    }
}

/// `F_X`: every intra-block pair.
pub fn forced_edges(p: &Planting) -> Character {
    let mut edges = Vec::new();
    for b in p.blocks() {
        for (i, &u) in b.iter().enumerate() {
            for &v in &b[i + 1..] {
                edges.push(Edge::new(u, v));
            }
        }
    }
    Character::from_edges(edges)
}

/// A draw `(G, X)` from the planted model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedSample {
    pub graph: Graph,
    pub planting: Planting,
    pub indicator: Vec<Vec<u8>>,
}

pub fn sample_null(n: usize, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    Ok(draw_null(n, &mut rng))
}

fn draw_null<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let signs = (0..num_pairs(n))
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    Graph { n, signs }
}

/// Uniform ordered planting drawn with `rng`.
pub fn random_planting<R: Rng>(n: usize, k: usize, t: usize, rng: &mut R) -> Result<Planting> {
    if k == 0 || t == 0 || n == 0 {
        return Err(Error::invalid("n, k and t must be positive"));
    }
    if k * t > n {
        return Err(Error::invalid(format!("kt = {} exceeds n = {n}", k * t)));
    }
    let mut perm: Vec<usize> = (1..=n).collect();
    perm.shuffle(rng);
    let blocks = perm[..k * t].chunks(k).map(<[usize]>::to_vec).collect();
    Planting::new(n, k, blocks)
}

/// Planting first, then the background graph, then the forced clique edges.
pub fn sample_planted(n: usize, k: usize, t: usize, seed: u64) -> Result<PlantedSample> {
    let mut rng = rng_from_seed(seed);
    let planting = random_planting(n, k, t, &mut rng)?;
    let mut graph = draw_null(n, &mut rng);
    for e in forced_edges(&planting).edges() {
        graph.set_sign(*e, 1);
    }
    let indicator = planting.indicator();
    Ok(PlantedSample {
        graph,
        planting,
        indicator,
    })
}

/// Every ordered planting, lexicographic over the tuple of sorted blocks.
pub fn enumerate_plantings(n: usize, k: usize, t: usize, cap: u64) -> Result<PlantingIter> {
    let m = count_plantings(n, k, t)?;
    if m > BigUint::from(cap) {
        return Err(Error::limit("enumeration", m, cap));
    }
    Ok(PlantingIter::new(n, k, t, m.to_u64().unwrap_or(u64::MAX)))
}

/// Lazy iterator behind [`enumerate_plantings`].
#[derive(Debug, Clone)]
pub struct PlantingIter {
    n: usize,
    k: usize,
    t: usize,
    // pools[r]: vertices still available when choosing block r.
    pools: Vec<Vec<usize>>,
    // combos[r]: positions into pools[r] of the current block r.
    combos: Vec<Vec<usize>>,
    remaining: u64,
    done: bool,
}

impl PlantingIter {
    fn new(n: usize, k: usize, t: usize, total: u64) -> Self {
        let mut it = PlantingIter {
            n,
            k,
            t,
            pools: vec![Vec::new(); t],
            combos: vec![Vec::new(); t],
            remaining: total,
            done: false,
        };
        it.pools[0] = (1..=n).collect();
        it.reset_from(0);
        it
    }

    /// Re-initialise levels `r..` to their first combination.
    fn reset_from(&mut self, r: usize) {
        for level in r..self.t {
            if level > 0 {
                let chosen: Vec<usize> = self.combos[level - 1]
                    .iter()
                    .map(|&i| self.pools[level - 1][i])
                    .collect();
                self.pools[level] = self.pools[level - 1]
                    .iter()
                    .copied()
                    .filter(|v| !chosen.contains(v))
                    .collect();
            }
            self.combos[level] = (0..self.k).collect();
        }
    }

    fn advance(&mut self, level: usize) -> bool {
        let size = self.pools[level].len();
        let c = &mut self.combos[level];
        let k = self.k;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if c[i] < size - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }

    fn current(&self) -> Planting {
        let blocks = self
            .combos
            .iter()
            .zip(&self.pools)
            .map(|(c, pool)| c.iter().map(|&i| pool[i]).collect())
            .collect();
        Planting {
            n: self.n,
            k: self.k,
            blocks,
        }
    }
}

impl Iterator for PlantingIter {
    type Item = Planting;

    fn next(&mut self) -> Option<Planting> {
        if self.done {
            return None;
        }
        let out = self.current();
        self.remaining = self.remaining.saturating_sub(1);
        let mut level = self.t;
        loop {
            if level == 0 {
                self.done = true;
                break;
            }
            level -= 1;
            if self.advance(level) {
                self.reset_from(level + 1);
                break;
            }
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = if self.done { 0 } else { self.remaining as usize };
        (r, Some(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, HashMap};

    #[test]
    fn pair_index_is_dense() {
        let n = 6;
        let g = Graph::complete(n);
        let idx: Vec<usize> = g.pairs().map(|e| pair_index(n, e.u(), e.v())).collect();
        assert_eq!(idx, (0..15).collect::<Vec<_>>());
    }

    #[test]
    fn null_graph_edge_cases() {
        assert_eq!(sample_null(1, 7).unwrap().signs().len(), 0);
        assert!(matches!(sample_null(0, 7), Err(Error::InvalidParameter(_))));
        assert_eq!(sample_null(4, 99).unwrap(), sample_null(4, 99).unwrap());
        assert_eq!(sample_null(4, 99).unwrap().signs().len(), 6);
    }

    #[test]
    fn null_density_over_seeds() {
        let mean: f64 = (0..10_000u64)
            .map(|s| sample_null(20, s).unwrap().edge_density())
            .sum::<f64>()
            / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "density {mean}");
    }

    #[test]
    fn planted_sample_invariants() {
        for seed in 0..50 {
            let s = sample_planted(6, 2, 2, seed).unwrap();
            for e in forced_edges(&s.planting).edges() {
                assert!(s.graph.has_edge(*e));
            }
            let col: Vec<u32> = (0..2)
                .map(|j| s.indicator.iter().map(|row| row[j] as u32).sum())
                .collect();
            assert_eq!(col, vec![2, 2]);
            assert!(s.indicator.iter().all(|row| row.iter().sum::<u8>() <= 1));
        }
        assert!(sample_planted(3, 2, 2, 0).is_err());
    }

    #[test]
    fn two_singleton_blocks_are_balanced() {
        let mut first_is_one = 0;
        for seed in 0..10_000 {
            let s = sample_planted(2, 1, 2, seed).unwrap();
            if s.planting.blocks()[0] == vec![1] {
                first_is_one += 1;
            }
        }
        let f = first_is_one as f64 / 10_000.0;
        assert!((f - 0.5).abs() < 0.05, "{f}");
    }

    #[test]
    fn planted_frequencies_uniform() {
        // n=4, k=2, t=2: m = 6, so each planting should appear ~1/6 of the time.
        let trials = 12_000u64;
        let mut counts: HashMap<Planting, u64> = HashMap::new();
        for seed in 0..trials {
            *counts.entry(sample_planted(4, 2, 2, seed).unwrap().planting).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - trials as f64 * p).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn forced_edge_examples() {
        let p = Planting::new(4, 1, vec![vec![1], vec![2]]).unwrap();
        assert!(forced_edges(&p).is_empty());
        let p = Planting::new(4, 2, vec![vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(
            forced_edges(&p),
            Character::from_edges(vec![Edge::new(1, 2), Edge::new(3, 4)])
        );
        let p = Planting::new(3, 3, vec![vec![1, 2, 3]]).unwrap();
        assert_eq!(forced_edges(&p).len(), 3);
    }

    #[test]
    fn enumeration_counts_and_order() {
        let all: Vec<Planting> = enumerate_plantings(4, 2, 2, 100).unwrap().collect();
        assert_eq!(all.len(), 6);
        let mut sorted = all.clone();
        sorted.sort_by(|a, b| a.blocks().cmp(b.blocks()));
        assert_eq!(all, sorted);
        assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), 6);
        assert_eq!(enumerate_plantings(3, 1, 1, 100).unwrap().count(), 3);
        assert_eq!(enumerate_plantings(5, 2, 1, 100).unwrap().count(), 10);
        assert!(matches!(
            enumerate_plantings(8, 2, 2, 100),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn planting_validation() {
        assert!(Planting::new(4, 2, vec![vec![1, 2], vec![2, 3]]).is_err());
        assert!(Planting::new(4, 2, vec![vec![1, 2, 3]]).is_err());
        assert!(Planting::new(4, 2, vec![vec![1, 5]]).is_err());
    }
}
