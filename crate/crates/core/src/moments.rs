//! Exact planted Fourier coefficients `E[chi_T(G) X_M]` under the planted
//! model, their upper bound, and an enumeration oracle.
//!
//! Conditioning on the planting, `E[chi_T | X]` is `1` when every edge of `T`
//! is forced and `0` otherwise, so the coefficient is
//! `Pr[X_M = 1 and T ⊆ F_X]`. Each component of the test graph must sit
//! inside a single block; summing over label assignments of components gives
//! disjoint events with probability `prod_r (k)_{s_r} / (n)_{|V|}`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{test_graph, Character, Monomial};
use crate::planted::{enumerate_plantings, forced_edges, pair_index, Planting};
use crate::rational::{falling_factorial, from_biguint, int, pow, ratio, ExactRational};

/// The planted model's shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Model {
    pub n: usize,
    pub k: usize,
    pub t: usize,
}

impl Model {
    pub fn new(n: usize, k: usize, t: usize) -> Result<Self> {
        if n == 0 || k == 0 || t == 0 {
            return Err(Error::invalid("n, k and t must be positive"));
        }
        if k * t > n {
            return Err(Error::invalid(format!("kt = {} exceeds n = {n}", k * t)));
        }
        Ok(Model { n, k, t })
    }

    pub fn kt(&self) -> usize {
        self.k * self.t
    }
}

pub fn exact_coefficient(m: &Monomial, t: &Character, n: usize, k: usize, labels: usize) -> Result<ExactRational> {
    let model = Model::new(n, k, labels)?;
    Ok(coefficient(m, t, &model))
}

/// Infallible form of [`exact_coefficient`] for an already validated model.
pub fn coefficient(m: &Monomial, t: &Character, model: &Model) -> ExactRational {
    let tg = test_graph(m, t);
    if tg.vertices.last().is_some_and(|&v| v > model.n) {
        return ExactRational::zero();
    }
    let pins = tg.component_pins(m);
    let mut fixed = vec![0usize; model.t + 1];
    let mut free_sizes = Vec::new();
    for (comp, labels) in tg.components.iter().zip(&pins) {
        if comp.len() > model.k {
            return ExactRational::zero();
        }
        match labels.len() {
            0 => free_sizes.push(comp.len()),
            1 => {
                let r = *labels.iter().next().unwrap();
                if r == 0 || r > model.t {
                    return ExactRational::zero();
                }
                fixed[r] += comp.len();
            }
            _ => return ExactRational::zero(),
        }
    }
    if fixed.iter().any(|&s| s > model.k) {
        return ExactRational::zero();
    }
    // Larger components first prunes the assignment tree sooner.
    free_sizes.sort_unstable_by(|a, b| b.cmp(a));
    let ff: Vec<BigUint> = (0..=model.k as u64).map(|s| falling_factorial(model.k as u64, s)).collect();
    let mut total = BigUint::zero();
    assign(&free_sizes, 0, &mut fixed, model, &ff, &mut total);
    if total.is_zero() {
        return ExactRational::zero();
    }
    let denom = falling_factorial(model.n as u64, tg.num_vertices() as u64);
    ExactRational::new(BigInt::from(total), BigInt::from(denom))
}

fn assign(free: &[usize], i: usize, sizes: &mut [usize], model: &Model, ff: &[BigUint], total: &mut BigUint) {
    if i == free.len() {
        let mut prod = BigUint::one();
        for &s in &sizes[1..] {
            prod *= &ff[s];
        }
        *total += prod;
        return;
    }
    for r in 1..=model.t {
        if sizes[r] + free[i] <= model.k {
            sizes[r] += free[i];
            assign(free, i + 1, sizes, model, ff, total);
            sizes[r] -= free[i];
        }
    }
}

/// `t^c (k / (n - |V| + 1))^{|V|}`.
pub fn coefficient_bound(m: &Monomial, t: &Character, n: usize, k: usize, labels: usize) -> Result<ExactRational> {
    Model::new(n, k, labels)?;
    if !crate::fourier::is_consistent(m, t, labels) {
        return Err(Error::Domain(format!("({m}, {t}) is inconsistent")));
    }
    let tg = test_graph(m, t);
    let v = tg.num_vertices();
    if v >= n {
        return Err(Error::invalid(format!("|V| = {v} must be below n = {n}")));
    }
    let base = ratio(k as i64, (n - v + 1) as i64);
    Ok(pow(&int(labels as i64), tg.num_components() as u32) * pow(&base, v as u32))
}

/// `(kt / (n - |V| + 1))^{|V|}`.
pub fn relaxed_coefficient_bound(m: &Monomial, t: &Character, n: usize, k: usize, labels: usize) -> Result<ExactRational> {
    let v = test_graph(m, t).num_vertices();
    if v >= n {
        return Err(Error::invalid(format!("|V| = {v} must be below n = {n}")));
    }
    Ok(pow(&ratio((k * labels) as i64, (n - v + 1) as i64), v as u32))
}

fn event_holds(p: &Planting, m: &Monomial, forced: &Character, t: &Character) -> bool {
    m.vars().all(|x| p.label_of(x.vertex) == Some(x.label)) && t.is_subset(forced)
}

/// `#{plantings with X_M = 1 and T ⊆ F_X} / m` by enumeration.
pub fn brute_force_coefficient(
    m: &Monomial,
    t: &Character,
    n: usize,
    k: usize,
    labels: usize,
    cap: u64,
) -> Result<ExactRational> {
    Model::new(n, k, labels)?;
    let mut hits = 0u64;
    let mut total = 0u64;
    for p in enumerate_plantings(n, k, labels, cap)? {
        total += 1;
        if event_holds(&p, m, &forced_edges(&p), t) {
            hits += 1;
        }
    }
    Ok(ratio(hits as i64, total as i64))
}

/// Every planting of a model as bitmasks, for repeated oracle queries.
///
/// Variable `x_{v,l}` is bit `(v-1) t + (l-1)`; edge `{u,v}` is its pair index.
#[derive(Debug, Clone)]
pub struct PlantingTable {
    model: Model,
    entries: Vec<(u128, u128)>,
}

impl PlantingTable {
    pub fn new(model: Model, cap: u64) -> Result<Self> {
        if model.n * model.t > 128 || model.n * (model.n - 1) / 2 > 128 {
            return Err(Error::limit("bitmask width", format!("n = {}, t = {}", model.n, model.t), 128));
        }
        let entries = enumerate_plantings(model.n, model.k, model.t, cap)?
            .map(|p| {
                let mut vars = 0u128;
                for (r, b) in p.blocks().iter().enumerate() {
                    for &v in b {
                        vars |= 1 << ((v - 1) * model.t + r);
                    }
                }
                let mut edges = 0u128;
                for e in forced_edges(&p).edges() {
                    edges |= 1 << pair_index(model.n, e.u(), e.v());
                }
                (vars, edges)
            })
            .collect();
        Ok(PlantingTable { model, entries })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn monomial_mask(&self, m: &Monomial) -> Option<u128> {
        let mut mask = 0u128;
        for x in m.vars() {
            if x.vertex == 0 || x.vertex > self.model.n || x.label == 0 || x.label > self.model.t {
                return None;
            }
            mask |= 1 << ((x.vertex - 1) * self.model.t + x.label - 1);
        }
        Some(mask)
    }

    pub fn character_mask(&self, t: &Character) -> Option<u128> {
        let mut mask = 0u128;
        for e in t.edges() {
            if e.v() > self.model.n {
                return None;
            }
            mask |= 1 << pair_index(self.model.n, e.u(), e.v());
        }
        Some(mask)
    }

    /// Number of plantings realising the event, from raw masks.
    pub fn count_masks(&self, vars: u128, edges: u128) -> u64 {
        let hit = |&(v, e): &(u128, u128)| v & vars == vars && e & edges == edges;
        if self.entries.len() > 50_000 {
            self.entries.par_iter().filter(|x| hit(x)).count() as u64
        } else {
            self.entries.iter().filter(|x| hit(x)).count() as u64
        }
    }

    pub fn coefficient(&self, m: &Monomial, t: &Character) -> ExactRational {
        match (self.monomial_mask(m), self.character_mask(t)) {
            (Some(v), Some(e)) => ratio(self.count_masks(v, e) as i64, self.entries.len() as i64),
            _ => ExactRational::zero(),
        }
    }

    /// `E[p(X)]` over the uniform planting for a polynomial given as
    /// `(monomial, coefficient)` terms.
    pub fn expectation<'a, I>(&self, terms: I) -> ExactRational
    where
        I: IntoIterator<Item = (&'a Monomial, &'a ExactRational)>,
    {
        let total = from_biguint(&BigUint::from(self.entries.len()));
        let mut acc = ExactRational::zero();
        for (m, c) in terms {
            if let Some(v) = self.monomial_mask(m) {
                acc += c * ExactRational::from_integer(BigInt::from(self.count_masks(v, 0)));
            }
        }
        acc / total
    }
}

/// Outcome of comparing the closed form with enumeration on every `(M, T)`
/// with `|M| <= max_monomial` and `|V(T) ∪ S_M| <= max_vertices`.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CoefficientSweep {
    pub model: Option<Model>,
    pub max_monomial: usize,
    pub max_vertices: usize,
    pub pairs: u64,
    pub mismatches: u64,
    pub inconsistent: u64,
    pub inconsistent_nonzero: u64,
    pub bound_violations: u64,
    pub relaxed_violations: u64,
    pub first_failure: Option<String>,
}

impl CoefficientSweep {
    pub fn all_hold(&self) -> bool {
        self.mismatches == 0 && self.inconsistent_nonzero == 0 && self.bound_violations == 0 && self.relaxed_violations == 0
    }

    fn merge(mut self, o: CoefficientSweep) -> Self {
        self.pairs += o.pairs;
        self.mismatches += o.mismatches;
        self.inconsistent += o.inconsistent;
        self.inconsistent_nonzero += o.inconsistent_nonzero;
        self.bound_violations += o.bound_violations;
        self.relaxed_violations += o.relaxed_violations;
        self.first_failure = self.first_failure.or(o.first_failure);
        self
    }
}

pub fn coefficient_sweep(model: Model, max_monomial: usize, max_vertices: usize, cap: u64) -> Result<CoefficientSweep> {
    if max_vertices >= model.n {
        return Err(Error::invalid(format!("vertex budget {max_vertices} must be below n = {}", model.n)));
    }
    let table = PlantingTable::new(model, cap)?;
    let params = crate::fourier::TruncationParams {
        tau: max_vertices,
        component_budget: model.n,
        degree: 2,
        epsilon: 0.0,
    };
    let vars: Vec<(usize, usize)> = (1..=model.n).flat_map(|i| (1..=model.t).map(move |j| (i, j))).collect();
    let mut monomials = Vec::new();
    for size in 0..=max_monomial.min(vars.len()) {
        crate::fourier::for_each_combination(&vars, size, |c| monomials.push(Monomial::from_pairs(c.iter().copied())));
    }
    let parts = monomials
        .par_iter()
        .map(|m| {
            let mut s = CoefficientSweep::default();
            let fail = |s: &mut CoefficientSweep, what: &str, t: &Character| {
                s.first_failure.get_or_insert_with(|| format!("{what} at M = {m}, T = {t}"));
            };
            crate::fourier::for_each_feasible_character(m, model.n, &params, cap, |t| {
                s.pairs += 1;
                let exact = coefficient(m, t, &model);
                if exact != table.coefficient(m, t) {
                    s.mismatches += 1;
                    fail(&mut s, "closed form differs from enumeration", t);
                }
                if !crate::fourier::is_consistent(m, t, model.t) {
                    s.inconsistent += 1;
                    if !exact.is_zero() {
                        s.inconsistent_nonzero += 1;
                        fail(&mut s, "inconsistent pair with nonzero coefficient", t);
                    }
                    return;
                }
                let bound = coefficient_bound(m, t, model.n, model.k, model.t).expect("consistent, |V| < n");
                let relaxed = relaxed_coefficient_bound(m, t, model.n, model.k, model.t).expect("|V| < n");
                if exact > bound {
                    s.bound_violations += 1;
                    fail(&mut s, "coefficient exceeds its bound", t);
                }
                if bound > relaxed {
                    s.relaxed_violations += 1;
                    fail(&mut s, "bound exceeds the relaxed bound", t);
                }
            })?;
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = parts.into_iter().fold(CoefficientSweep::default(), CoefficientSweep::merge);
    out.model = Some(model);
    out.max_monomial = max_monomial;
    out.max_vertices = max_vertices;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::Edge;

    fn ch(edges: &[(usize, usize)]) -> Character {
        Character::from_edges(edges.iter().map(|&(a, b)| Edge::new(a, b)))
    }

    #[test]
    fn single_pin_is_k_over_n() {
        let c = exact_coefficient(&Monomial::var(1, 1), &Character::empty(), 10, 3, 2).unwrap();
        assert_eq!(c, ratio(3, 10));
    }

    #[test]
    fn pinned_edge_coefficient() {
        let m = Monomial::from_pairs([(1, 1), (2, 1)]);
        let c = exact_coefficient(&m, &ch(&[(1, 2)]), 10, 3, 2).unwrap();
        assert_eq!(c, ratio(1, 15));
        // oracle: all 4200 plantings of (10, 3, 2)
        let brute = brute_force_coefficient(&m, &ch(&[(1, 2)]), 10, 3, 2, 100_000).unwrap();
        assert_eq!(brute, ratio(1, 15));
    }

    #[test]
    fn inconsistent_vanishes() {
        let m = Monomial::from_pairs([(1, 1), (1, 2)]);
        for t in [Character::empty(), ch(&[(1, 2)]), ch(&[(2, 3), (3, 4)])] {
            assert!(exact_coefficient(&m, &t, 10, 3, 2).unwrap().is_zero());
            assert!(brute_force_coefficient(&m, &t, 6, 2, 2, 1000).unwrap().is_zero());
        }
        assert!(exact_coefficient(&m, &Character::empty(), 3, 2, 2).is_err());
    }

    #[test]
    fn bound_examples() {
        let m = Monomial::var(1, 1);
        let b = coefficient_bound(&m, &Character::empty(), 10, 3, 2).unwrap();
        assert_eq!(b, ratio(3, 5));
        assert_eq!(coefficient_bound(&Monomial::one(), &Character::empty(), 10, 3, 2).unwrap(), int(1));
        let bad = Monomial::from_pairs([(1, 1), (1, 2)]);
        assert!(matches!(coefficient_bound(&bad, &Character::empty(), 10, 3, 2), Err(Error::Domain(_))));
        assert!(coefficient_bound(&Monomial::one(), &ch(&[(1, 2), (3, 4)]), 4, 2, 2).is_err());
    }

    #[test]
    fn brute_force_small() {
        let c = brute_force_coefficient(&Monomial::var(1, 1), &Character::empty(), 4, 2, 2, 100).unwrap();
        assert_eq!(c, ratio(1, 2));
        assert!(brute_force_coefficient(&Monomial::one(), &Character::empty(), 20, 2, 5, 100).is_err());
    }

    #[test]
    fn table_agrees_with_direct_oracle() {
        let model = Model::new(6, 2, 2).unwrap();
        let table = PlantingTable::new(model, 1000).unwrap();
        assert_eq!(table.len(), 90);
        for (m, t) in [
            (Monomial::var(3, 2), Character::empty()),
            (Monomial::from_pairs([(1, 1), (2, 1)]), ch(&[(1, 2), (3, 4)])),
            (Monomial::one(), ch(&[(1, 2), (2, 3)])),
        ] {
            assert_eq!(table.coefficient(&m, &t), brute_force_coefficient(&m, &t, 6, 2, 2, 1000).unwrap());
        }
    }

    #[test]
    fn random_sweep_bound_dominates() {
        use rand::Rng;
        let mut rng = crate::planted::rng_from_seed(2024);
        let mut checked = 0;
        while checked < 50 {
            let nv = rng.random_range(0..4);
            let m = Monomial::from_pairs((0..nv).map(|_| (rng.random_range(1..=6), rng.random_range(1..=2))));
            let ne = rng.random_range(0..3);
            let t = Character::from_edges((0..ne).filter_map(|_| {
                let (a, b) = (rng.random_range(1..=6), rng.random_range(1..=6));
                (a != b).then(|| Edge::new(a, b))
            }));
            let params = crate::fourier::TruncationParams::for_model(6, 2, 2, 4, 5);
            if !crate::fourier::is_truncation_feasible(&m, &t, &params) || !crate::fourier::is_consistent(&m, &t, 2) {
                continue;
            }
            let exact = exact_coefficient(&m, &t, 6, 2, 2).unwrap();
            let bound = coefficient_bound(&m, &t, 6, 2, 2).unwrap();
            assert!(exact <= bound, "{m} {t}: {exact} > {bound}");
            checked += 1;
        }
    }

    #[test]
    fn small_sweep_holds() {
        let s = coefficient_sweep(Model::new(5, 2, 2).unwrap(), 2, 3, 1 << 20).unwrap();
        assert!(s.all_hold(), "{s:?}");
        assert!(s.pairs > 0 && s.inconsistent > 0);
        assert!(coefficient_sweep(Model::new(5, 2, 2).unwrap(), 2, 5, 1 << 20).is_err());
    }
}
