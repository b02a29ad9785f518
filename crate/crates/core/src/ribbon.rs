//! Ribbons, minimum vertex separators, the leftmost and rightmost minimum
//! separators, and the canonical three-part factorization.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{implied_edges, Character, Edge, Monomial};
use crate::planted::rng_from_seed;

/// A graph on `vertices` with left endpoints `U`, right endpoints `V` and
/// pinned edges `K ⊆ E(R)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ribbon {
    pub vertices: BTreeSet<usize>,
    pub edges: Character,
    pub left: BTreeSet<usize>,
    pub right: BTreeSet<usize>,
    pub pinned: Character,
}

impl Ribbon {
    pub fn new(
        vertices: BTreeSet<usize>,
        edges: Character,
        left: BTreeSet<usize>,
        right: BTreeSet<usize>,
        pinned: Character,
    ) -> Result<Self> {
        let r = Ribbon {
            vertices,
            edges,
            left,
            right,
            pinned,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.left.is_subset(&self.vertices) || !self.right.is_subset(&self.vertices) {
            return Err(Error::invalid("endpoint sets must lie in the vertex set"));
        }
        if !self.pinned.is_subset(&self.edges) {
            return Err(Error::invalid("pinned edges must be edges of the ribbon"));
        }
        let ends = self.edges.endpoints();
        if !ends.is_subset(&self.vertices) {
            return Err(Error::invalid("edge endpoint outside the vertex set"));
        }
        if let Some(v) = self
            .vertices
            .iter()
            .find(|v| !ends.contains(v) && !self.left.contains(v) && !self.right.contains(v))
        {
            return Err(Error::invalid(format!("vertex {v} is neither an endpoint nor covered by an edge")));
        }
        Ok(())
    }

    /// `W_R = E(R) \ K`.
    pub fn free_edges(&self) -> Character {
        Character::from_edges(self.edges.edges().iter().copied().filter(|e| !self.pinned.contains(*e)))
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
}

/// `U = supp(a)`, `V = supp(b)`, `K = ℰ_a ∪ ℰ_b`, `E = w ∪ K`.
pub fn ribbon_from_monomials(a: &Monomial, b: &Monomial, w: &Character) -> Ribbon {
    let pinned = implied_edges(a).union(&implied_edges(b));
    let edges = w.union(&pinned);
    let left = a.support();
    let right = b.support();
    let mut vertices = w.endpoints();
    vertices.extend(left.iter().copied());
    vertices.extend(right.iter().copied());
    Ribbon {
        vertices,
        edges,
        left,
        right,
        pinned,
    }
}

/// Ribbon with vertices relabelled `0..nv` and adjacency lists.
struct Local {
    verts: Vec<usize>,
    adj: Vec<Vec<usize>>,
    left: Vec<bool>,
    right: Vec<bool>,
}

impl Local {
    fn new(r: &Ribbon) -> Self {
        let verts: Vec<usize> = r.vertices.iter().copied().collect();
        let idx = |v: usize| verts.binary_search(&v).expect("edge endpoint in vertex set");
        let mut adj = vec![Vec::new(); verts.len()];
        for e in r.edges.edges() {
            let (a, b) = (idx(e.u()), idx(e.v()));
            adj[a].push(b);
            adj[b].push(a);
        }
        let left = verts.iter().map(|v| r.left.contains(v)).collect();
        let right = verts.iter().map(|v| r.right.contains(v)).collect();
        Local { verts, adj, left, right }
    }

    fn nv(&self) -> usize {
        self.verts.len()
    }

    /// Vertices reachable from `from \ removed` in the graph minus `removed`.
    fn reach(&self, from: &[bool], removed: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.nv()];
        let mut queue = VecDeque::new();
        for v in 0..self.nv() {
            if from[v] && !removed[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if !removed[y] && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    fn separates(&self, removed: &[bool]) -> bool {
        let seen = self.reach(&self.left, removed);
        !(0..self.nv()).any(|v| seen[v] && self.right[v])
    }

    fn to_set(&self, mask: &[bool]) -> BTreeSet<usize> {
        (0..self.nv()).filter(|&v| mask[v]).map(|v| self.verts[v]).collect()
    }
}

/// Unit-capacity vertex-split network: `v_in = 2v`, `v_out = 2v + 1`.
struct Flow {
    cap: Vec<Vec<i32>>,
    source: usize,
    sink: usize,
}

impl Flow {
    fn new(l: &Local) -> Self {
        let nv = l.nv();
        let nodes = 2 * nv + 2;
        let (source, sink) = (2 * nv, 2 * nv + 1);
        let inf = nv as i32 + 1;
        let mut cap = vec![vec![0i32; nodes]; nodes];
        for v in 0..nv {
            cap[2 * v][2 * v + 1] = 1;
            if l.left[v] {
                cap[source][2 * v] = inf;
            }
            if l.right[v] {
                cap[2 * v + 1][sink] = inf;
            }
            for &w in &l.adj[v] {
                cap[2 * v + 1][2 * w] = inf;
            }
        }
        Flow { cap, source, sink }
    }

    fn augment(&mut self) -> bool {
        let n = self.cap.len();
        let mut prev = vec![usize::MAX; n];
        prev[self.source] = self.source;
        let mut queue = VecDeque::from([self.source]);
        while let Some(x) = queue.pop_front() {
            if x == self.sink {
                break;
            }
            for y in 0..n {
                if self.cap[x][y] > 0 && prev[y] == usize::MAX {
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
        if prev[self.sink] == usize::MAX {
            return false;
        }
        let mut y = self.sink;
        while y != self.source {
            let x = prev[y];
            self.cap[x][y] -= 1;
            self.cap[y][x] += 1;
            y = x;
        }
        true
    }

    fn max_flow(&mut self) -> usize {
        let mut f = 0;
        while self.augment() {
            f += 1;
        }
        f
    }

    /// Residual reachability from the source (`forward`) or to the sink.
    fn residual(&self, forward: bool) -> Vec<bool> {
        let n = self.cap.len();
        let start = if forward { self.source } else { self.sink };
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for y in 0..n {
                let open = if forward { self.cap[x][y] > 0 } else { self.cap[y][x] > 0 };
                if open && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }
}

/// Minimum `|Q|`, `Q ⊆ V(R)`, such that removing `Q` leaves no path from `U`
/// to `V`. Endpoints may be removed.
pub fn min_separator_size(r: &Ribbon) -> usize {
    Flow::new(&Local::new(r)).max_flow()
}

/// Minimum over all `2^{|V(R)|}` subsets.
pub fn brute_force_separator_size(r: &Ribbon) -> Result<usize> {
    Ok(brute_force_min_separators(r)?.0)
}

/// The minimum size and every minimum separator.
pub fn brute_force_min_separators(r: &Ribbon) -> Result<(usize, Vec<BTreeSet<usize>>)> {
    let l = Local::new(r);
    let nv = l.nv();
    if nv > 20 {
        return Err(Error::limit("brute-force-vertices", nv, 20));
    }
    let mut best = usize::MAX;
    let mut all = Vec::new();
    for mask in 0u32..(1u32 << nv) {
        let size = mask.count_ones() as usize;
        if size > best {
            continue;
        }
        let removed: Vec<bool> = (0..nv).map(|v| mask >> v & 1 == 1).collect();
        if l.separates(&removed) {
            if size < best {
                best = size;
                all.clear();
            }
            all.push(l.to_set(&removed));
        }
    }
    Ok((best, all))
}

/// Vertices reachable from `U \ Q` in `R - Q`.
pub fn left_region(r: &Ribbon, q: &BTreeSet<usize>) -> BTreeSet<usize> {
    region(r, q, true)
}

/// Vertices reachable from `V \ Q` in `R - Q`.
pub fn right_region(r: &Ribbon, q: &BTreeSet<usize>) -> BTreeSet<usize> {
    region(r, q, false)
}

fn region(r: &Ribbon, q: &BTreeSet<usize>, left: bool) -> BTreeSet<usize> {
    let l = Local::new(r);
    let removed: Vec<bool> = l.verts.iter().map(|v| q.contains(v)).collect();
    let from = if left { &l.left } else { &l.right };
    l.to_set(&l.reach(from, &removed))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalSeparators {
    pub size: usize,
    pub leftmost: BTreeSet<usize>,
    pub rightmost: BTreeSet<usize>,
}

/// Leftmost: the cut of split vertices at the frontier of residual
/// reachability from the source. Rightmost: the same from the sink.
pub fn extremal_separators(r: &Ribbon) -> ExtremalSeparators {
    let l = Local::new(r);
    let mut flow = Flow::new(&l);
    let size = flow.max_flow();
    let from_s = flow.residual(true);
    let to_t = flow.residual(false);
    let leftmost: Vec<bool> = (0..l.nv()).map(|v| from_s[2 * v] && !from_s[2 * v + 1]).collect();
    let rightmost: Vec<bool> = (0..l.nv()).map(|v| to_t[2 * v + 1] && !to_t[2 * v]).collect();
    ExtremalSeparators {
        size,
        leftmost: l.to_set(&leftmost),
        rightmost: l.to_set(&rightmost),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub separators: ExtremalSeparators,
    /// `(U, S_L)`-ribbon.
    pub left: Ribbon,
    /// `(S_L, S_R)`-ribbon.
    pub middle: Ribbon,
    /// `(S_R, V)`-ribbon.
    pub right: Ribbon,
}

fn induced(r: &Ribbon, verts: BTreeSet<usize>, left: BTreeSet<usize>, right: BTreeSet<usize>) -> Ribbon {
    let keep = |e: &Edge| verts.contains(&e.u()) && verts.contains(&e.v());
    Ribbon {
        edges: Character::from_edges(r.edges.edges().iter().copied().filter(keep)),
        pinned: Character::from_edges(r.pinned.edges().iter().copied().filter(keep)),
        vertices: verts,
        left,
        right,
    }
}

pub fn canonical_factorization(r: &Ribbon) -> Factorization {
    let seps = extremal_separators(r);
    let l_region = left_region(r, &seps.leftmost);
    let r_region = right_region(r, &seps.rightmost);
    let left_verts: BTreeSet<usize> = l_region.union(&seps.leftmost).copied().collect();
    let right_verts: BTreeSet<usize> = r_region.union(&seps.rightmost).copied().collect();
    let mut mid_verts: BTreeSet<usize> = r
        .vertices
        .iter()
        .filter(|v| !l_region.contains(v) && !r_region.contains(v))
        .copied()
        .collect();
    mid_verts.extend(seps.leftmost.iter().copied());
    mid_verts.extend(seps.rightmost.iter().copied());
    Factorization {
        left: induced(r, left_verts, r.left.clone(), seps.leftmost.clone()),
        middle: induced(r, mid_verts, seps.leftmost.clone(), seps.rightmost.clone()),
        right: induced(r, right_verts, seps.rightmost.clone(), r.right.clone()),
        separators: seps,
    }
}

/// `|V(R)| = |V(R_l)| + |V(R_m)| + |V(R_r)| - |S_L| - |S_R|`.
pub fn verify_vertex_count(r: &Ribbon, f: &Factorization) -> bool {
    let lhs = r.num_vertices() as i64;
    let rhs = f.left.num_vertices() as i64 + f.middle.num_vertices() as i64 + f.right.num_vertices() as i64
        - f.separators.leftmost.len() as i64
        - f.separators.rightmost.len() as i64;
    lhs == rhs
}

/// `sep(R) <= min(|supp a|, |supp b|)`.
pub fn separator_upper_bound_check(a: &Monomial, b: &Monomial, w: &Character) -> bool {
    let r = ribbon_from_monomials(a, b, w);
    min_separator_size(&r) <= a.support().len().min(b.support().len())
}

/// Random `(a, b, w)` over `[max_vertices] x [labels]`.
pub fn random_triple<R: Rng>(rng: &mut R, max_vertices: usize, labels: usize) -> (Monomial, Monomial, Character) {
    let nv = rng.random_range(1..=max_vertices);
    let mono = |rng: &mut R| {
        let size = rng.random_range(0..=nv.min(4));
        Monomial::from_pairs((0..size).map(|_| (rng.random_range(1..=nv), rng.random_range(1..=labels))))
    };
    let a = mono(rng);
    let b = mono(rng);
    let density = rng.random_range(0.0..0.6);
    let mut edges = Vec::new();
    for u in 1..=nv {
        for v in u + 1..=nv {
            if rng.random_bool(density) {
                edges.push(Edge::new(u, v));
            }
        }
    }
    (a, b, Character::from_edges(edges))
}

/// Aggregate outcome of a random ribbon sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RibbonSweep {
    pub instances: usize,
    pub max_vertices_seen: usize,
    pub oracle_mismatches: usize,
    pub extremal_not_minimum: usize,
    pub leftmost_not_minimal: usize,
    pub rightmost_not_minimal: usize,
    pub identity_failures: usize,
    pub bound_failures: usize,
    /// Incomparable or tied extremal candidates, recorded rather than tie-broken.
    pub findings: Vec<String>,
}

impl RibbonSweep {
    pub fn all_hold(&self) -> bool {
        self.oracle_mismatches == 0
            && self.extremal_not_minimum == 0
            && self.leftmost_not_minimal == 0
            && self.rightmost_not_minimal == 0
            && self.identity_failures == 0
            && self.bound_failures == 0
    }
}

/// One instance checked against every invariant; returns failure tags.
pub fn check_instance(a: &Monomial, b: &Monomial, w: &Character) -> Result<Vec<&'static str>> {
    let r = ribbon_from_monomials(a, b, w);
    let mut fails = Vec::new();
    let (best, mins) = brute_force_min_separators(&r)?;
    let sep = min_separator_size(&r);
    if sep != best {
        fails.push("oracle");
    }
    let ext = extremal_separators(&r);
    if ext.size != best || !mins.contains(&ext.leftmost) || !mins.contains(&ext.rightmost) {
        fails.push("extremal");
    }
    let lreg = left_region(&r, &ext.leftmost);
    let rreg = right_region(&r, &ext.rightmost);
    for q in &mins {
        let lq = left_region(&r, q);
        if !lreg.is_subset(&lq) || (q != &ext.leftmost && lq.is_subset(&lreg)) {
            fails.push("leftmost");
        }
        let rq = right_region(&r, q);
        if !rreg.is_subset(&rq) || (q != &ext.rightmost && rq.is_subset(&rreg)) {
            fails.push("rightmost");
        }
    }
    let f = canonical_factorization(&r);
    if !verify_vertex_count(&r, &f) {
        fails.push("identity");
    }
    if sep > r.left.len().min(r.right.len()) {
        fails.push("bound");
    }
    fails.dedup();
    Ok(fails)
}

pub fn ribbon_sweep(triples: usize, max_vertices: usize, labels: usize, seed: u64) -> Result<RibbonSweep> {
    let mut rng = rng_from_seed(seed);
    let mut out = RibbonSweep::default();
    for i in 0..triples {
        let (a, b, w) = random_triple(&mut rng, max_vertices, labels);
        let r = ribbon_from_monomials(&a, &b, &w);
        out.instances += 1;
        out.max_vertices_seen = out.max_vertices_seen.max(r.num_vertices());
        for tag in check_instance(&a, &b, &w)? {
            match tag {
                "oracle" => out.oracle_mismatches += 1,
                "extremal" => out.extremal_not_minimum += 1,
                "leftmost" => out.leftmost_not_minimal += 1,
                "rightmost" => out.rightmost_not_minimal += 1,
                "identity" => out.identity_failures += 1,
                _ => out.bound_failures += 1,
            }
            if matches!(tag, "leftmost" | "rightmost") {
                out.findings.push(format!("instance {i}: {tag} separator not the unique minimal one (a={a}, b={b}, w={w})"));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    fn ch(edges: &[(usize, usize)]) -> Character {
        Character::from_edges(edges.iter().map(|&(a, b)| Edge::new(a, b)))
    }

    fn plain(vertices: &[usize], edges: &[(usize, usize)], u: &[usize], v: &[usize]) -> Ribbon {
        Ribbon::new(set(vertices), ch(edges), set(u), set(v), Character::empty()).unwrap()
    }

    #[test]
    fn construction_examples() {
        let r = ribbon_from_monomials(&Monomial::one(), &Monomial::one(), &Character::empty());
        assert!(r.vertices.is_empty() && r.edges.is_empty());
        let a = Monomial::from_pairs([(1, 1), (2, 1)]);
        let b = Monomial::var(3, 1);
        let r = ribbon_from_monomials(&a, &b, &ch(&[(2, 3)]));
        assert_eq!(r.pinned, ch(&[(1, 2)]));
        assert_eq!(r.vertices, set(&[1, 2, 3]));
        assert_eq!(r.free_edges(), ch(&[(2, 3)]));
        r.validate().unwrap();
        assert_eq!(min_separator_size(&r), 1);
    }

    #[test]
    fn invalid_ribbon_rejected() {
        assert!(Ribbon::new(set(&[1, 2]), Character::empty(), set(&[1]), set(&[1]), Character::empty()).is_err());
        assert!(Ribbon::new(set(&[1]), Character::empty(), set(&[2]), set(&[1]), Character::empty()).is_err());
    }

    #[test]
    fn separator_examples() {
        assert_eq!(min_separator_size(&plain(&[1], &[], &[1], &[1])), 1);
        assert_eq!(min_separator_size(&plain(&[1, 2, 3], &[(1, 2), (2, 3)], &[1], &[3])), 1);
        let diamond = plain(&[1, 2, 3, 4], &[(1, 2), (2, 4), (1, 3), (3, 4)], &[1], &[4]);
        assert_eq!(min_separator_size(&diamond), 1);
        let diamond2 = plain(&[1, 2, 3, 4, 5, 6], &[(1, 2), (2, 4), (1, 3), (3, 4), (5, 2), (6, 3)], &[1, 5, 6], &[4]);
        assert_eq!(min_separator_size(&diamond2), 1);
        let two = plain(&[1, 2, 3, 4, 5], &[(1, 2), (2, 4), (5, 3), (3, 4), (4, 1)], &[1, 5], &[4]);
        assert_eq!(brute_force_separator_size(&two).unwrap(), 1);
        let paths = plain(&[1, 2, 3, 4, 5, 6], &[(1, 2), (2, 4), (3, 5), (5, 6)], &[1, 3], &[4, 6]);
        assert_eq!(min_separator_size(&paths), 2);
        assert_eq!(brute_force_separator_size(&paths).unwrap(), 2);
    }

    #[test]
    fn path_extremal_and_factorization() {
        let r = plain(&[1, 2, 3, 4, 5], &[(1, 2), (2, 3), (3, 4), (4, 5)], &[1], &[5]);
        let e = extremal_separators(&r);
        // Endpoints are removable, so {1} and {5} are also minimum separators.
        assert_eq!(e.size, 1);
        assert_eq!(e.leftmost, set(&[1]));
        assert_eq!(e.rightmost, set(&[5]));
        let f = canonical_factorization(&r);
        assert!(verify_vertex_count(&r, &f));
        assert!(check_instance(&Monomial::var(1, 1), &Monomial::var(5, 1), &r.edges).unwrap().is_empty());
    }

    #[test]
    fn interior_separators_when_endpoints_are_wide() {
        // Two left and two right endpoints funnel through 3 - 4 - 5.
        let r = plain(
            &[1, 2, 3, 4, 5, 6, 7],
            &[(1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (5, 7)],
            &[1, 2],
            &[6, 7],
        );
        let e = extremal_separators(&r);
        assert_eq!(e.leftmost, set(&[3]));
        assert_eq!(e.rightmost, set(&[5]));
        let f = canonical_factorization(&r);
        assert_eq!(f.left.vertices, set(&[1, 2, 3]));
        assert_eq!(f.middle.vertices, set(&[3, 4, 5]));
        assert_eq!(f.right.vertices, set(&[5, 6, 7]));
        assert!(verify_vertex_count(&r, &f));
    }

    #[test]
    fn degenerate_cases() {
        let r = plain(&[1], &[], &[1], &[1]);
        let e = extremal_separators(&r);
        assert_eq!((e.leftmost.clone(), e.rightmost.clone()), (set(&[1]), set(&[1])));
        let f = canonical_factorization(&r);
        assert_eq!(f.middle.vertices, set(&[1]));
        assert!(verify_vertex_count(&r, &f));
        let empty = ribbon_from_monomials(&Monomial::one(), &Monomial::one(), &Character::empty());
        let f = canonical_factorization(&empty);
        assert!(verify_vertex_count(&empty, &f));
        assert_eq!(min_separator_size(&empty), 0);
    }

    #[test]
    fn upper_bound_examples() {
        let w = ch(&[(1, 2), (2, 3)]);
        assert!(separator_upper_bound_check(&Monomial::one(), &Monomial::var(3, 1), &w));
        let r = ribbon_from_monomials(&Monomial::one(), &Monomial::var(3, 1), &w);
        assert_eq!(min_separator_size(&r), 0);
        let r = ribbon_from_monomials(&Monomial::var(1, 2), &Monomial::from_pairs([(3, 1), (2, 1)]), &w);
        assert!(min_separator_size(&r) <= 1);
    }

    #[test]
    fn small_sweep() {
        let s = ribbon_sweep(200, 7, 2, 5).unwrap();
        assert!(s.all_hold(), "{s:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn all_invariants(seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let (a, b, w) = random_triple(&mut rng, 8, 2);
            prop_assert!(check_instance(&a, &b, &w).unwrap().is_empty());
            prop_assert!(separator_upper_bound_check(&a, &b, &w));
        }
    }
}
