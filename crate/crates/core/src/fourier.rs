//! Characters, monomials, implied edges and test graphs.
//!
//! A [`Monomial`] is a set of `(vertex, label)` pairs standing for the product
//! of the corresponding indicator variables; a [`Character`] is an edge set
//! `T` standing for `chi_T(G) = prod_{e in T} G_e`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planted::Graph;
use crate::rational::binomial;

/// Canonical unordered pair `{u, v}` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(usize, usize);

impl Edge {
    /// Panics on a self-loop.
    pub fn new(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "self-loop {{{a},{a}}}");
        if a < b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn u(self) -> usize {
        self.0
    }

    pub fn v(self) -> usize {
        self.1
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

/// Indicator variable `x_{vertex,label}`; both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var {
    pub vertex: usize,
    pub label: usize,
}

impl Var {
    pub fn new(vertex: usize, label: usize) -> Self {
        Var { vertex, label }
    }
}

/// A multilinear monomial `X_M`. Duplicates collapse (`x^2 = x`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(BTreeSet<Var>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeSet::new())
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        Monomial(pairs.into_iter().map(|(v, l)| Var::new(v, l)).collect())
    }

    pub fn var(vertex: usize, label: usize) -> Self {
        Monomial::from_pairs([(vertex, label)])
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: Var) {
        self.0.insert(v);
    }

    /// Product in the Boolean quotient.
    pub fn union(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.union(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &Monomial) -> bool {
        self.0.is_subset(&other.0)
    }

    /// `S_M`.
    pub fn support(&self) -> BTreeSet<usize> {
        self.0.iter().map(|x| x.vertex).collect()
    }

    /// `S_r(M)`.
    pub fn label_class(&self, r: usize) -> BTreeSet<usize> {
        self.0
            .iter()
            .filter(|x| x.label == r)
            .map(|x| x.vertex)
            .collect()
    }

    pub fn labels(&self) -> BTreeSet<usize> {
        self.0.iter().map(|x| x.label).collect()
    }

    /// False when some vertex carries two labels.
    pub fn is_label_consistent(&self) -> bool {
        self.support().len() == self.0.len()
    }

    pub fn validate(&self, n: usize, t: usize) -> Result<()> {
        for x in &self.0 {
            if x.vertex == 0 || x.vertex > n || x.label == 0 || x.label > t {
                return Err(Error::invalid(format!(
                    "variable x_{{{},{}}} outside [{n}]x[{t}]",
                    x.vertex, x.label
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|x| format!("x{},{}", x.vertex, x.label))
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Edge set `T` kept as a sorted list of canonical pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Character(Vec<Edge>);

impl Character {
    pub fn empty() -> Self {
        Character(Vec::new())
    }

    pub fn from_edges<I: IntoIterator<Item = Edge>>(edges: I) -> Self {
        let mut v: Vec<Edge> = edges.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Character(v)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    /// `V(T)`.
    pub fn endpoints(&self) -> BTreeSet<usize> {
        self.0.iter().flat_map(|e| [e.u(), e.v()]).collect()
    }

    pub fn union(&self, other: &Character) -> Character {
        Character::from_edges(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn symmetric_difference(&self, other: &Character) -> Character {
        let a: BTreeSet<Edge> = self.0.iter().copied().collect();
        let b: BTreeSet<Edge> = other.0.iter().copied().collect();
        Character(a.symmetric_difference(&b).copied().collect())
    }

    pub fn is_subset(&self, other: &Character) -> bool {
        self.0.iter().all(|e| other.contains(*e))
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Edge::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `E_M`: pairs of vertices sharing a label in `m`.
pub fn implied_edges(m: &Monomial) -> Character {
    let mut edges = Vec::new();
    for r in m.labels() {
        let class: Vec<usize> = m.label_class(r).into_iter().collect();
        for (i, &u) in class.iter().enumerate() {
            for &v in &class[i + 1..] {
                edges.push(Edge::new(u, v));
            }
        }
    }
    Character::from_edges(edges)
}

/// `chi_T(G)`; the empty product is `+1`.
pub fn chi(t: &Character, g: &Graph) -> Result<i8> {
    let mut s = 1i8;
    for &e in t.edges() {
        if e.v() > g.n() {
            return Err(Error::invalid(format!(
                "edge {e} outside a graph on {} vertices",
                g.n()
            )));
        }
        s *= g.sign(e);
    }
    Ok(s)
}

/// `G_{M,T} = (V(T) ∪ S_M, T ∪ E_M)` with its connected components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestGraph {
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
    /// Sorted components, ordered by their smallest vertex.
    pub components: Vec<Vec<usize>>,
}

impl TestGraph {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn max_component(&self) -> usize {
        self.components.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The distinct labels pinned by `m` inside each component.
    pub fn component_pins(&self, m: &Monomial) -> Vec<BTreeSet<usize>> {
        self.components
            .iter()
            .map(|c| {
                m.vars()
                    .filter(|x| c.binary_search(&x.vertex).is_ok())
                    .map(|x| x.label)
                    .collect()
            })
            .collect()
    }
}

/// Connected components by iterative depth-first search, visiting vertices in
/// increasing index order.
pub fn components(vertices: &[usize], edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = vertices.iter().map(|&v| (v, Vec::new())).collect();
    for e in edges {
        adj.entry(e.u()).or_default().push(e.v());
        adj.entry(e.v()).or_default().push(e.u());
    }
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::new();
    for &start in adj.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adj[&v] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn test_graph(m: &Monomial, t: &Character) -> TestGraph {
    let implied = implied_edges(m);
    let mut vertices: BTreeSet<usize> = t.endpoints();
    vertices.extend(m.support());
    let vertices: Vec<usize> = vertices.into_iter().collect();
    let edges = t.union(&implied).edges().to_vec();
    let components = components(&vertices, &edges);
    TestGraph {
        vertices,
        edges,
        components,
    }
}

/// Truncation and degree budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    /// Vertex budget `tau`.
    pub tau: usize,
    /// Largest admissible test-graph component (the clique size `k`).
    pub component_budget: usize,
    /// SoS degree `d`.
    pub degree: usize,
    /// `epsilon` with `kt = n^{1/2 - epsilon}`.
    pub epsilon: f64,
}

impl TruncationParams {
    /// Derives `epsilon` from `(n, k, t)`.
    pub fn for_model(n: usize, k: usize, t: usize, degree: usize, tau: usize) -> Self {
        TruncationParams {
            tau,
            component_budget: k,
            degree,
            epsilon: implied_epsilon(n, k * t),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau < 1 {
            return Err(Error::invalid("tau must be at least 1"));
        }
        if self.degree < 2 {
            return Err(Error::invalid("degree d must be at least 2"));
        }
        if self.component_budget < 1 {
            return Err(Error::invalid("component budget must be at least 1"));
        }
        Ok(())
    }

    /// The asymptotic parameter window evaluated at constant `C = 1`.
    pub fn window(&self, n: usize, t: usize) -> ParamWindow {
        ParamWindow::evaluate(n, t, self.degree, self.tau, self.epsilon)
    }
}

/// `epsilon = 1/2 - ln(kt) / ln(n)`.
pub fn implied_epsilon(n: usize, kt: usize) -> f64 {
    if n < 2 {
        return f64::NAN;
    }
    0.5 - (kt as f64).ln() / (n as f64).ln()
}

/// Evaluation of `C t d / eps <= tau <= (eps / C) ln n` and
/// `eps > C ln ln n / ln n` at `C = 1`. A violation at `C = 1` is a violation
/// for every `C >= 1`; satisfying it at `C = 1` is necessary, not sufficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamWindow {
    pub constant: f64,
    pub epsilon: f64,
    pub tau_lower: f64,
    pub tau_upper: f64,
    pub epsilon_lower: f64,
    pub satisfied: bool,
    pub note: String,
}

impl ParamWindow {
    pub fn evaluate(n: usize, t: usize, d: usize, tau: usize, epsilon: f64) -> Self {
        let c = 1.0;
        let ln_n = (n as f64).ln();
        let tau_lower = c * t as f64 * d as f64 / epsilon;
        let tau_upper = epsilon / c * ln_n;
        let epsilon_lower = c * ln_n.ln() / ln_n;
        let tau = tau as f64;
        let satisfied = epsilon > 0.0
            && epsilon < 0.5
            && tau_lower <= tau
            && tau <= tau_upper
            && epsilon > epsilon_lower;
        let note = if satisfied {
            "window holds at C=1 (necessary only; the constant is unspecified)".to_string()
        } else {
            "parameter window violated: desk-scale run outside the asymptotic regime".to_string()
        };
        ParamWindow {
            constant: c,
            epsilon,
            tau_lower,
            tau_upper,
            epsilon_lower,
            satisfied,
            note,
        }
    }
}

/// `|V| <= tau` and every component has size at most the component budget.
pub fn is_truncation_feasible(m: &Monomial, t: &Character, params: &TruncationParams) -> bool {
    let tg = test_graph(m, t);
    tg.num_vertices() <= params.tau && tg.max_component() <= params.component_budget
}

/// Whether the components of the test graph admit a label assignment agreeing
/// with every pin in `m`.
pub fn is_consistent(m: &Monomial, t: &Character, num_labels: usize) -> bool {
    if m.vars().any(|x| x.label == 0 || x.label > num_labels) {
        return false;
    }
    let tg = test_graph(m, t);
    tg.component_pins(m).iter().all(|pins| pins.len() <= 1)
}

/// Upper estimate of the candidates [`enumerate_feasible_characters`] visits.
pub fn candidate_count(support: usize, n: usize, tau: usize) -> f64 {
    if support > tau || support > n {
        return 0.0;
    }
    let free = n - support;
    (0..=(tau - support).min(free))
        .map(|s| {
            let v = support + s;
            let ways = binomial(free as u64, s as u64);
            crate::rational::to_f64(&crate::rational::from_biguint(&ways))
                * 2f64.powi((v * v.saturating_sub(1) / 2) as i32)
        })
        .sum()
}

/// Every `T` with `is_truncation_feasible(m, T, params)`, each exactly once.
///
/// For each vertex set `V ⊇ S_M` with `|V| <= tau`, yields the edge sets
/// `T ⊆ binom(V, 2)` with `V(T) ∪ S_M = V`, pruning any branch whose test
/// graph grows a component beyond the budget.
pub fn enumerate_feasible_characters(
    m: &Monomial,
    n: usize,
    params: &TruncationParams,
    cap: u64,
) -> Result<Vec<Character>> {
    let mut out = Vec::new();
    for_each_feasible_character(m, n, params, cap, |t| out.push(t.clone()))?;
    Ok(out)
}

/// Visitor form of [`enumerate_feasible_characters`].
pub fn for_each_feasible_character<F: FnMut(&Character)>(
    m: &Monomial,
    n: usize,
    params: &TruncationParams,
    cap: u64,
    mut visit: F,
) -> Result<()> {
    let support: Vec<usize> = m.support().into_iter().collect();
    if support.iter().any(|&v| v == 0 || v > n) {
        return Err(Error::invalid(format!("monomial {m} has a vertex outside [{n}]")));
    }
    if support.len() > params.tau {
        return Ok(());
    }
    let estimate = candidate_count(support.len(), n, params.tau);
    if estimate > cap as f64 {
        return Err(Error::limit("enumeration", format!("{estimate:.0} candidate characters"), cap));
    }
    let implied = implied_edges(m);
    let free: Vec<usize> = (1..=n).filter(|v| support.binary_search(v).is_err()).collect();
    let max_extra = (params.tau - support.len()).min(free.len());
    for extra_size in 0..=max_extra {
        for_each_combination(&free, extra_size, |extra| {
            let mut vertices: Vec<usize> = support.iter().chain(extra.iter()).copied().collect();
            vertices.sort_unstable();
            let mut search = CharacterSearch::new(&vertices, extra, &implied, params.component_budget);
            if let Some(search) = search.as_mut() {
                search.run(&mut visit);
            }
        });
    }
    Ok(())
}

/// Calls `f` on every `size`-combination of `items` in lexicographic order.
pub fn for_each_combination<T: Copy, F: FnMut(&[T])>(items: &[T], size: usize, mut f: F) {
    if size > items.len() {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    let mut buf: Vec<T> = Vec::with_capacity(size);
    loop {
        buf.clear();
        buf.extend(idx.iter().map(|&i| items[i]));
        f(&buf);
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < items.len() - size + i {
                idx[i] += 1;
                for j in i + 1..size {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Backtracking over subsets of `binom(V, 2)` with a union-find that tracks
/// component sizes of the test graph.
struct CharacterSearch {
    pairs: Vec<(usize, usize)>,
    // local index per vertex position in `vertices`
    parent: Vec<usize>,
    size: Vec<usize>,
    budget: usize,
    must_cover: Vec<bool>,
    // remaining pairs touching each local vertex, from position i onward
    touch_after: Vec<Vec<u32>>,
    labels: Vec<Edge>,
    chosen: Vec<usize>,
}

impl CharacterSearch {
    fn new(vertices: &[usize], extra: &[usize], implied: &Character, budget: usize) -> Option<Self> {
        let local = |v: usize| vertices.binary_search(&v).expect("vertex in V");
        let nv = vertices.len();
        let mut parent: Vec<usize> = (0..nv).collect();
        let mut size = vec![1usize; nv];
        for e in implied.edges() {
            let (a, b) = (find(&mut parent, local(e.u())), find(&mut parent, local(e.v())));
            if a != b {
                parent[b] = a;
                size[a] += size[b];
                if size[a] > budget {
                    return None;
                }
            }
        }
        if size.iter().any(|&s| s > budget) {
            return None;
        }
        let mut pairs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..nv {
            for j in i + 1..nv {
                pairs.push((i, j));
                labels.push(Edge::new(vertices[i], vertices[j]));
            }
        }
        let mut touch_after = vec![vec![0u32; nv]; pairs.len() + 1];
        for p in (0..pairs.len()).rev() {
            let mut row = touch_after[p + 1].clone();
            row[pairs[p].0] += 1;
            row[pairs[p].1] += 1;
            touch_after[p] = row;
        }
        let must_cover = (0..nv).map(|i| extra.contains(&vertices[i])).collect();
        Some(CharacterSearch {
            pairs,
            parent,
            size,
            budget,
            must_cover,
            touch_after,
            labels,
            chosen: Vec::new(),
        })
    }

    fn run<F: FnMut(&Character)>(&mut self, visit: &mut F) {
        let covered = vec![0u32; self.must_cover.len()];
        self.step(0, covered, visit);
    }

    fn step<F: FnMut(&Character)>(&mut self, pos: usize, covered: Vec<u32>, visit: &mut F) {
        // An uncovered extra vertex with no pair left to cover it is a dead end.
        for (i, &need) in self.must_cover.iter().enumerate() {
            if need && covered[i] == 0 && self.touch_after[pos][i] == 0 {
                return;
            }
        }
        if pos == self.pairs.len() {
            let t = Character(self.chosen.iter().map(|&p| self.labels[p]).collect());
            visit(&t);
            return;
        }
        // exclude
        self.step(pos + 1, covered.clone(), visit);
        // include
        let (a, b) = self.pairs[pos];
        let saved_parent = self.parent.clone();
        let saved_size = self.size.clone();
        let (ra, rb) = (find(&mut self.parent, a), find(&mut self.parent, b));
        let ok = if ra != rb {
            self.parent[rb] = ra;
            self.size[ra] += self.size[rb];
            self.size[ra] <= self.budget
        } else {
            true
        };
        if ok {
            let mut covered = covered;
            covered[a] += 1;
            covered[b] += 1;
            self.chosen.push(pos);
            self.step(pos + 1, covered, visit);
            self.chosen.pop();
        }
        self.parent = saved_parent;
        self.size = saved_size;
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ch(edges: &[(usize, usize)]) -> Character {
        Character::from_edges(edges.iter().map(|&(a, b)| Edge::new(a, b)))
    }

    fn params(tau: usize, k: usize) -> TruncationParams {
        TruncationParams {
            tau,
            component_budget: k,
            degree: 4,
            epsilon: 0.1,
        }
    }

    #[test]
    fn implied_edge_examples() {
        assert!(implied_edges(&Monomial::from_pairs([(1, 1)])).is_empty());
        assert_eq!(implied_edges(&Monomial::from_pairs([(1, 1), (2, 1)])), ch(&[(1, 2)]));
        assert!(implied_edges(&Monomial::from_pairs([(1, 1), (2, 2)])).is_empty());
    }

    #[test]
    fn chi_examples() {
        let g = Graph::from_signs(3, vec![-1, -1, 1]).unwrap();
        assert_eq!(chi(&Character::empty(), &g).unwrap(), 1);
        assert_eq!(chi(&ch(&[(1, 2)]), &g).unwrap(), -1);
        assert_eq!(chi(&ch(&[(1, 2), (1, 3)]), &g).unwrap(), 1);
        assert!(chi(&ch(&[(1, 4)]), &g).is_err());
    }

    #[test]
    fn test_graph_examples() {
        let tg = test_graph(&Monomial::var(1, 1), &Character::empty());
        assert_eq!(tg.vertices, vec![1]);
        assert_eq!(tg.components, vec![vec![1]]);

        let tg = test_graph(&Monomial::from_pairs([(1, 1), (2, 1)]), &ch(&[(2, 3)]));
        assert_eq!(tg.vertices, vec![1, 2, 3]);
        assert_eq!(tg.components, vec![vec![1, 2, 3]]);

        let tg = test_graph(&Monomial::one(), &ch(&[(1, 2), (3, 4)]));
        assert_eq!(tg.components, vec![vec![1, 2], vec![3, 4]]);
    }

    #[test]
    fn feasibility_examples() {
        assert!(is_truncation_feasible(&Monomial::one(), &Character::empty(), &params(2, 2)));
        let t = ch(&[(1, 2), (3, 4)]);
        assert!(!is_truncation_feasible(&Monomial::one(), &t, &params(3, 2)));
        let path = ch(&[(1, 2), (2, 3)]);
        assert!(!is_truncation_feasible(&Monomial::one(), &path, &params(5, 2)));
    }

    #[test]
    fn consistency_examples() {
        assert!(!is_consistent(&Monomial::from_pairs([(1, 1), (1, 2)]), &Character::empty(), 2));
        assert!(!is_consistent(&Monomial::from_pairs([(1, 1), (2, 2)]), &ch(&[(1, 2)]), 2));
        assert!(is_consistent(&Monomial::one(), &ch(&[(1, 2), (2, 5)]), 2));
        assert!(is_consistent(&Monomial::from_pairs([(1, 1), (2, 2)]), &Character::empty(), 2));
    }

    #[test]
    fn feasible_enumeration_examples() {
        let none = enumerate_feasible_characters(&Monomial::one(), 4, &params(0, 3), 1000).unwrap();
        assert_eq!(none, vec![Character::empty()]);

        let mut got = enumerate_feasible_characters(&Monomial::var(1, 1), 3, &params(2, 2), 1000).unwrap();
        got.sort();
        // {2,3} would need |V| = 3 > tau.
        let mut want = vec![Character::empty(), ch(&[(1, 2)]), ch(&[(1, 3)])];
        want.sort();
        assert_eq!(got, want);
    }

    /// Oracle: filter every subset of `binom([n], 2)`.
    fn brute_feasible(m: &Monomial, n: usize, p: &TruncationParams) -> Vec<Character> {
        let all: Vec<Edge> = Graph::complete(n).pairs().collect();
        let mut out = Vec::new();
        for mask in 0u64..(1 << all.len()) {
            let t = Character::from_edges((0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| all[i]));
            if is_truncation_feasible(m, &t, p) {
                out.push(t);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn enumeration_matches_filter_oracle() {
        let p = params(3, 3);
        let brute = brute_feasible(&Monomial::one(), 4, &p);
        let mut got = enumerate_feasible_characters(&Monomial::one(), 4, &p, 1 << 20).unwrap();
        got.sort();
        assert_eq!(got, brute);

        for (m, tau, k) in [
            (Monomial::from_pairs([(1, 1), (2, 1)]), 4, 2),
            (Monomial::from_pairs([(1, 1), (3, 2)]), 4, 2),
            (Monomial::from_pairs([(2, 1)]), 3, 3),
            (Monomial::from_pairs([(1, 1), (2, 1), (3, 1)]), 4, 2),
            (Monomial::from_pairs([(1, 1), (1, 2)]), 4, 3),
        ] {
            let p = params(tau, k);
            let mut got = enumerate_feasible_characters(&m, 5, &p, 1 << 20).unwrap();
            got.sort();
            assert_eq!(got, brute_feasible(&m, 5, &p), "m = {m}");
        }
    }

    #[test]
    fn enumeration_refuses_over_cap() {
        let r = enumerate_feasible_characters(&Monomial::one(), 30, &params(6, 6), 1000);
        assert!(matches!(r, Err(Error::ResourceLimit { .. })));
    }

    fn arb_monomial(n: usize, t: usize) -> impl Strategy<Value = Monomial> {
        proptest::collection::btree_set((1..=n, 1..=t), 0..5).prop_map(Monomial::from_pairs)
    }

    fn arb_character(n: usize) -> impl Strategy<Value = Character> {
        proptest::collection::vec((1..=n, 1..=n), 0..6).prop_map(|v| {
            Character::from_edges(v.into_iter().filter(|(a, b)| a != b).map(|(a, b)| Edge::new(a, b)))
        })
    }

    proptest! {
        #[test]
        fn enumeration_equals_filter(m in arb_monomial(5, 2), tau in 0usize..4, k in 1usize..4) {
            let p = params(tau, k);
            let mut got = enumerate_feasible_characters(&m, 5, &p, 1 << 20).unwrap();
            got.sort();
            prop_assert_eq!(got, brute_feasible(&m, 5, &p));
        }

        #[test]
        fn implied_edges_monotone(a in arb_monomial(6, 3), b in arb_monomial(6, 3)) {
            let big = a.union(&b);
            prop_assert!(implied_edges(&a).is_subset(&implied_edges(&big)));
        }

        #[test]
        fn chi_multiplicative(t1 in arb_character(6), t2 in arb_character(6), mask in 0u64..(1 << 15)) {
            let g = Graph::from_mask(6, mask);
            let lhs = chi(&t1, &g).unwrap() * chi(&t2, &g).unwrap();
            prop_assert_eq!(lhs, chi(&t1.symmetric_difference(&t2), &g).unwrap());
        }

        #[test]
        fn components_partition_vertices(m in arb_monomial(6, 2), t in arb_character(6)) {
            let tg = test_graph(&m, &t);
            let mut all: Vec<usize> = tg.components.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(&all, &tg.vertices);
            for e in &tg.edges {
                prop_assert!(tg.components.iter().any(|c| c.contains(&e.u()) && c.contains(&e.v())));
            }
        }
    }
}
