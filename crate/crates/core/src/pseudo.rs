//! The truncated pseudoexpectation `Ẽ_G`, its normalisation `Ẽ*_G`, and
//! exact checks of the constraint, calibration and concentration statements.
//!
//! `Ẽ_G[X_M] = sum_T coef(M, T) chi_T(G)` where `T` ranges over the
//! truncation-feasible characters of `M`. The expansion of a monomial does not
//! depend on `G`, so it is computed once in a shared [`FourierTable`] and
//! evaluated per graph. All coefficients for a monomial share the denominator
//! `(n)_{tau'}` with `tau' = min(tau, n)`, so evaluation is an integer sum.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{for_each_feasible_character, Character, Monomial, TruncationParams, Var};
use crate::moments::{coefficient, Model, PlantingTable};
use crate::planted::{pair_index, rng_from_seed, sample_null, Graph, Planting};
use crate::rational::{self, binomial, falling_factorial, from_biguint, int, pow, pow2, ratio, ExactRational};

/// Multilinear polynomial with graph-independent rational coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, ExactRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: ExactRational) -> Self {
        Polynomial::term(Monomial::one(), c)
    }

    pub fn one() -> Self {
        Polynomial::constant(ExactRational::one())
    }

    pub fn term(m: Monomial, c: ExactRational) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(vertex: usize, label: usize) -> Self {
        Polynomial::term(Monomial::var(vertex, label), ExactRational::one())
    }

    /// `sum_i x_{i,label}`.
    pub fn label_size(n: usize, label: usize) -> Self {
        (1..=n).fold(Polynomial::zero(), |acc, i| acc + Polynomial::var(i, label))
    }

    /// `sum_{j,i} x_{i,j}`: the total planted size.
    pub fn total_size(n: usize, t: usize) -> Self {
        (1..=t).fold(Polynomial::zero(), |acc, j| acc + Polynomial::label_size(n, j))
    }

    pub fn add_term(&mut self, m: Monomial, c: ExactRational) {
        let entry = self.terms.entry(m).or_insert_with(ExactRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ExactRational)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::len).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &ExactRational) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// `p(X)` for the indicator matrix of `planting`.
    pub fn eval_planting(&self, planting: &Planting) -> ExactRational {
        let mut acc = ExactRational::zero();
        for (m, c) in &self.terms {
            if m.vars().all(|x| planting.label_of(x.vertex) == Some(x.label)) {
                acc += c;
            }
        }
        acc
    }
}

impl std::ops::Add for Polynomial {
    type Output = Polynomial;

    fn add(mut self, rhs: Polynomial) -> Polynomial {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl std::ops::Sub for Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: Polynomial) -> Polynomial {
        self + rhs.scale(&int(-1))
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;

    /// Product with `x^2 = x`.
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.union(b), ca * cb);
            }
        }
        out
    }
}

/// Graph-independent truncated expansion of one monomial: pairs of
/// `(pair indices of T, numerator over the shared denominator)`.
#[derive(Debug, Clone, Default)]
pub struct Expansion {
    pub terms: Vec<(Vec<usize>, BigInt)>,
}

/// Cache of truncated expansions for one `(model, params)`.
#[derive(Debug)]
pub struct FourierTable {
    model: Model,
    params: TruncationParams,
    cap: u64,
    denominator: BigInt,
    cache: RwLock<HashMap<Monomial, Arc<Expansion>>>,
}

impl FourierTable {
    pub fn new(model: Model, params: TruncationParams, cap: u64) -> Result<Self> {
        params.validate()?;
        let denominator = BigInt::from(falling_factorial(model.n as u64, params.tau.min(model.n) as u64));
        Ok(FourierTable {
            model,
            params,
            cap,
            denominator,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn params(&self) -> &TruncationParams {
        &self.params
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn expansion(&self, m: &Monomial) -> Result<Arc<Expansion>> {
        if let Some(e) = self.cache.read().expect("fourier cache poisoned").get(m) {
            return Ok(Arc::clone(e));
        }
        m.validate(self.model.n, self.model.t)?;
        let mut terms = Vec::new();
        let n = self.model.n;
        for_each_feasible_character(m, n, &self.params, self.cap, |t| {
            let c = coefficient(m, t, &self.model);
            if c.is_zero() {
                return;
            }
            let scaled = c * ExactRational::from_integer(self.denominator.clone());
            debug_assert!(scaled.is_integer());
            let idx = t.edges().iter().map(|e| pair_index(n, e.u(), e.v())).collect();
            terms.push((idx, scaled.to_integer()));
        })?;
        let e = Arc::new(Expansion { terms });
        self.cache
            .write()
            .expect("fourier cache poisoned")
            .insert(m.clone(), Arc::clone(&e));
        Ok(e)
    }

    /// Truncated coefficients of `m` as exact rationals, keyed by character.
    pub fn coefficients(&self, m: &Monomial) -> Result<Vec<(Character, ExactRational)>> {
        let mut out = Vec::new();
        for_each_feasible_character(m, self.model.n, &self.params, self.cap, |t| {
            out.push((t.clone(), coefficient(m, t, &self.model)));
        })?;
        Ok(out)
    }

    pub fn cached_monomials(&self) -> usize {
        self.cache.read().expect("fourier cache poisoned").len()
    }
}

/// A linear functional on monomials of bounded degree.
pub trait MomentFunctional {
    fn moment(&self, m: &Monomial) -> Result<ExactRational>;

    fn degree_budget(&self) -> usize;

    fn expect(&self, p: &Polynomial) -> Result<ExactRational> {
        let deg = p.degree();
        if deg > self.degree_budget() {
            return Err(Error::DegreeBudget {
                degree: deg,
                budget: self.degree_budget(),
            });
        }
        let mut acc = ExactRational::zero();
        for (m, c) in p.terms() {
            acc += c * self.moment(m)?;
        }
        Ok(acc)
    }
}

/// `Ẽ_G` for one graph, memoised per monomial.
#[derive(Debug)]
pub struct PseudoExpectation {
    graph: Graph,
    table: Arc<FourierTable>,
    cache: RwLock<HashMap<Monomial, ExactRational>>,
}

impl PseudoExpectation {
    pub fn new(graph: Graph, table: Arc<FourierTable>) -> Result<Self> {
        if graph.n() != table.model().n {
            return Err(Error::invalid(format!(
                "graph has {} vertices, model expects {}",
                graph.n(),
                table.model().n
            )));
        }
        Ok(PseudoExpectation {
            graph,
            table,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Builds a private table; prefer sharing one [`FourierTable`] across graphs.
    pub fn standalone(graph: Graph, model: Model, params: TruncationParams, cap: u64) -> Result<Self> {
        PseudoExpectation::new(graph, Arc::new(FourierTable::new(model, params, cap)?))
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn model(&self) -> Model {
        self.table.model()
    }

    pub fn params(&self) -> &TruncationParams {
        self.table.params()
    }

    pub fn table(&self) -> &Arc<FourierTable> {
        &self.table
    }

    pub fn pseudo_moment(&self, m: &Monomial) -> Result<ExactRational> {
        if m.len() > self.params().degree {
            return Err(Error::DegreeBudget {
                degree: m.len(),
                budget: self.params().degree,
            });
        }
        if let Some(v) = self.cache.read().expect("moment cache poisoned").get(m) {
            return Ok(v.clone());
        }
        let exp = self.table.expansion(m)?;
        let signs = self.graph.signs();
        let mut acc = BigInt::zero();
        for (edges, num) in &exp.terms {
            let s: i8 = edges.iter().map(|&i| signs[i]).product();
            if s > 0 {
                acc += num;
            } else {
                acc -= num;
            }
        }
        let v = ExactRational::new(acc, self.table.denominator().clone());
        self.cache
            .write()
            .expect("moment cache poisoned")
            .insert(m.clone(), v.clone());
        Ok(v)
    }

    pub fn pseudo_expect(&self, p: &Polynomial) -> Result<ExactRational> {
        self.expect(p)
    }
}

impl MomentFunctional for PseudoExpectation {
    fn moment(&self, m: &Monomial) -> Result<ExactRational> {
        self.pseudo_moment(m)
    }

    fn degree_budget(&self) -> usize {
        self.params().degree
    }
}

/// `Ẽ*[p] = Ẽ[p] / Ẽ[1]`.
#[derive(Debug)]
pub struct Normalized<'a, F: MomentFunctional> {
    inner: &'a F,
    norm: ExactRational,
}

pub fn normalized<F: MomentFunctional>(inner: &F) -> Result<Normalized<'_, F>> {
    let norm = inner.moment(&Monomial::one())?;
    if norm.is_zero() {
        return Err(Error::DegenerateNormalization);
    }
    Ok(Normalized { inner, norm })
}

impl<F: MomentFunctional> Normalized<'_, F> {
    /// The un-normalised `Ẽ[1]`.
    pub fn normalizer(&self) -> &ExactRational {
        &self.norm
    }
}

impl<F: MomentFunctional> MomentFunctional for Normalized<'_, F> {
    fn moment(&self, m: &Monomial) -> Result<ExactRational> {
        Ok(self.inner.moment(m)? / &self.norm)
    }

    fn degree_budget(&self) -> usize {
        self.inner.degree_budget()
    }
}

/// A functional multiplied by a constant. Used to exercise rescaling invariance.
#[derive(Debug)]
pub struct Scaled<'a, F: MomentFunctional> {
    pub inner: &'a F,
    pub factor: ExactRational,
}

impl<F: MomentFunctional> MomentFunctional for Scaled<'_, F> {
    fn moment(&self, m: &Monomial) -> Result<ExactRational> {
        Ok(self.inner.moment(m)? * &self.factor)
    }

    fn degree_budget(&self) -> usize {
        self.inner.degree_budget()
    }
}

/// `Ẽ_G[x_{u,r} x_{v,r} X_{M'}]` for a non-edge `{u, v}`.
pub fn check_nonedge_constraint(
    pe: &PseudoExpectation,
    u: usize,
    v: usize,
    r: usize,
    rest: &Monomial,
) -> Result<ExactRational> {
    if u == v {
        return Err(Error::Precondition("u and v must differ".into()));
    }
    let e = crate::fourier::Edge::new(u, v);
    if e.v() > pe.graph().n() {
        return Err(Error::invalid(format!("pair {e} outside the graph")));
    }
    if pe.graph().has_edge(e) {
        return Err(Error::Precondition(format!("{e} is an edge of the graph")));
    }
    let budget = pe.params().degree.saturating_sub(2);
    if rest.len() > budget {
        return Err(Error::DegreeBudget {
            degree: rest.len() + 2,
            budget: pe.params().degree,
        });
    }
    let mut m = rest.clone();
    m.insert(Var::new(u, r));
    m.insert(Var::new(v, r));
    pe.pseudo_moment(&m)
}

/// `Ẽ_G[x_{i,j1} x_{i,j2} X_{M'}]` with `j1 != j2`.
pub fn check_disjointness(
    pe: &PseudoExpectation,
    i: usize,
    j1: usize,
    j2: usize,
    rest: &Monomial,
) -> Result<ExactRational> {
    if j1 == j2 {
        return Err(Error::Precondition("labels j1 and j2 must differ".into()));
    }
    if rest.len() > pe.params().degree.saturating_sub(2) {
        return Err(Error::DegreeBudget {
            degree: rest.len() + 2,
            budget: pe.params().degree,
        });
    }
    let mut m = rest.clone();
    m.insert(Var::new(i, j1));
    m.insert(Var::new(i, j2));
    pe.pseudo_moment(&m)
}

/// Every monomial over `[n] x [t]` with at most `max_len` variables, ordered by
/// size and then lexicographically.
pub fn monomials_up_to(n: usize, t: usize, max_len: usize) -> Vec<Monomial> {
    let vars: Vec<(usize, usize)> = (1..=n).flat_map(|i| (1..=t).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for size in 0..=max_len.min(vars.len()) {
        crate::fourier::for_each_combination(&vars, size, |c| out.push(Monomial::from_pairs(c.iter().copied())));
    }
    out
}

/// Tally of all constraint evaluations on one graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintTally {
    pub nonedge_checks: u64,
    pub disjointness_checks: u64,
    pub nonzero: u64,
    pub first_violation: Option<String>,
}

impl ConstraintTally {
    pub fn all_zero(&self) -> bool {
        self.nonzero == 0
    }
}

/// Evaluates every non-edge product and every disjointness product with
/// `|M'| <= min(d - 2, max_rest)`.
pub fn audit_constraints(pe: &PseudoExpectation, max_rest: usize) -> Result<ConstraintTally> {
    let Model { n, t, .. } = pe.model();
    let rest_len = pe.params().degree.saturating_sub(2).min(max_rest);
    let rests = monomials_up_to(n, t, rest_len);
    let mut tally = ConstraintTally::default();
    let record = |tally: &mut ConstraintTally, v: ExactRational, what: String| {
        if !v.is_zero() {
            tally.nonzero += 1;
            tally.first_violation.get_or_insert(format!("{what} = {}", rational::encode(&v)));
        }
    };
    for e in pe.graph().non_edges() {
        for r in 1..=t {
            for rest in &rests {
                let v = check_nonedge_constraint(pe, e.u(), e.v(), r, rest)?;
                tally.nonedge_checks += 1;
                record(&mut tally, v, format!("E[x{},{} x{},{} {rest}]", e.u(), r, e.v(), r));
            }
        }
    }
    for i in 1..=n {
        for j1 in 1..=t {
            for j2 in (j1 + 1)..=t {
                for rest in &rests {
                    let v = check_disjointness(pe, i, j1, j2, rest)?;
                    tally.disjointness_checks += 1;
                    record(&mut tally, v, format!("E[x{i},{j1} x{i},{j2} {rest}]"));
                }
            }
        }
    }
    Ok(tally)
}

/// Calibration: the average of `Ẽ_G[p]` over every graph on `n` vertices
/// against `E[p(X)]` over the planted model. Returns `(lhs, rhs)`.
///
/// `p` has constant coefficients, so its Fourier support is `{∅}`. The
/// planted side averages over plantings only: `p(X)` does not depend on the
/// background graph.
pub fn calibration_check(
    model: Model,
    params: &TruncationParams,
    p: &Polynomial,
    cap: u64,
) -> Result<(ExactRational, ExactRational)> {
    let table = Arc::new(FourierTable::new(model, params.clone(), cap)?);
    let graphs = Graph::all_graphs(model.n, cap)?;
    let mut sum = ExactRational::zero();
    let mut count = 0u64;
    for g in graphs {
        let pe = PseudoExpectation::new(g, Arc::clone(&table))?;
        sum += pe.pseudo_expect(p)?;
        count += 1;
    }
    let lhs = sum / int(count as i64);
    let rhs = PlantingTable::new(model, cap)
        .map(|tab| tab.expectation(p.terms()))
        .or_else(|_| planted_expectation_by_enumeration(model, p, cap))?;
    Ok((lhs, rhs))
}

fn planted_expectation_by_enumeration(model: Model, p: &Polynomial, cap: u64) -> Result<ExactRational> {
    let mut acc = ExactRational::zero();
    let mut count = 0i64;
    for pl in crate::planted::enumerate_plantings(model.n, model.k, model.t, cap)? {
        acc += p.eval_planting(&pl);
        count += 1;
    }
    Ok(acc / int(count))
}

/// Exact mean, population variance, minimum and maximum of a sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactStats {
    pub count: u64,
    #[serde(with = "rational::serde_str")]
    pub mean: ExactRational,
    #[serde(with = "rational::serde_str")]
    pub variance: ExactRational,
    #[serde(with = "rational::serde_str")]
    pub min: ExactRational,
    #[serde(with = "rational::serde_str")]
    pub max: ExactRational,
}

impl ExactStats {
    pub fn from_values(values: &[ExactRational]) -> Option<Self> {
        let first = values.first()?;
        let count = values.len() as i64;
        let mean: ExactRational = values.iter().sum::<ExactRational>() / int(count);
        let variance = values
            .iter()
            .map(|v| {
                let d = v - &mean;
                &d * &d
            })
            .sum::<ExactRational>()
            / int(count);
        let min = values.iter().fold(first.clone(), |a, b| if b < &a { b.clone() } else { a });
        let max = values.iter().fold(first.clone(), |a, b| if b > &a { b.clone() } else { a });
        Some(ExactStats {
            count: count as u64,
            mean,
            variance,
            min,
            max,
        })
    }
}

/// Where the graphs of a Monte Carlo summary come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphSource {
    Seeds(Vec<u64>),
    /// Every graph on `n` vertices.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    pub normalizer: ExactStats,
    pub label_sizes: Vec<ExactStats>,
    /// `Var_G(Ẽ_G[1]) = sum_{T != ∅} coef(∅, T)^2`.
    #[serde(with = "rational::serde_str")]
    pub fourier_variance: ExactRational,
    /// `sum_s binom(n,s) 2^{s(s-1)/2} (kt/(n-tau))^{2s}`.
    #[serde(with = "rational::serde_str")]
    pub variance_bound: ExactRational,
    pub degenerate_samples: u64,
}

/// `sum_{s=1}^{tau} binom(n, s) 2^{s(s-1)/2} (kt / (n - tau))^{2s}`.
pub fn fourier_variance_bound(model: Model, tau: usize) -> Result<ExactRational> {
    if tau >= model.n {
        return Err(Error::invalid(format!("tau = {tau} must be below n = {}", model.n)));
    }
    let base = ratio(model.kt() as i64, (model.n - tau) as i64);
    let mut acc = ExactRational::zero();
    for s in 1..=tau {
        let term = from_biguint(&binomial(model.n as u64, s as u64))
            * pow2((s * (s - 1) / 2) as i64)
            * pow(&base, 2 * s as u32);
        acc += term;
    }
    Ok(acc)
}

pub fn concentration_stats(
    model: Model,
    params: &TruncationParams,
    source: &GraphSource,
    cap: u64,
) -> Result<ConcentrationSummary> {
    let table = Arc::new(FourierTable::new(model, params.clone(), cap)?);
    let graphs: Vec<Graph> = match source {
        GraphSource::Seeds(seeds) => seeds.iter().map(|&s| sample_null(model.n, s)).collect::<Result<_>>()?,
        GraphSource::Exhaustive => Graph::all_graphs(model.n, cap)?.collect(),
    };
    if graphs.is_empty() {
        return Err(Error::invalid("at least one graph is required"));
    }
    let sizes: Vec<Polynomial> = (1..=model.t).map(|j| Polynomial::label_size(model.n, j)).collect();
    let mut norms = Vec::with_capacity(graphs.len());
    let mut per_label = vec![Vec::with_capacity(graphs.len()); model.t];
    let mut degenerate = 0;
    for g in graphs {
        let pe = PseudoExpectation::new(g, Arc::clone(&table))?;
        let e1 = pe.pseudo_moment(&Monomial::one())?;
        if e1.is_zero() {
            degenerate += 1;
        }
        norms.push(e1);
        for (j, p) in sizes.iter().enumerate() {
            per_label[j].push(pe.pseudo_expect(p)?);
        }
    }
    let fourier_variance = table
        .coefficients(&Monomial::one())?
        .into_iter()
        .filter(|(t, _)| !t.is_empty())
        .map(|(_, c)| &c * &c)
        .sum();
    Ok(ConcentrationSummary {
        normalizer: ExactStats::from_values(&norms).expect("non-empty"),
        label_sizes: per_label
            .iter()
            .map(|v| ExactStats::from_values(v).expect("non-empty"))
            .collect(),
        fourier_variance,
        variance_bound: fourier_variance_bound(model, params.tau)?,
        degenerate_samples: degenerate,
    })
}

/// `count` seeds drawn from a master seed.
pub fn derive_seeds(master: u64, count: usize) -> Vec<u64> {
    use rand::Rng;
    let mut rng = rng_from_seed(master);
    (0..count).map(|_| rng.random()).collect()
}

/// Absolute value helper for reports.
pub fn abs_max<'a, I: IntoIterator<Item = &'a ExactRational>>(values: I) -> ExactRational {
    values
        .into_iter()
        .map(|v| v.abs())
        .fold(ExactRational::zero(), |a, b| if b > a { b } else { a })
}
