//! The degree-`d` moment matrix `M(A, B) = Ẽ_G[X_{A ∪ B}]`, PSD audits and the
//! objective experiment.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{Monomial, ParamWindow, TruncationParams};
use crate::moments::Model;
use crate::planted::{rng_from_seed, sample_null};
use crate::pseudo::{audit_constraints, monomials_up_to, normalized, FourierTable, MomentFunctional, Polynomial, PseudoExpectation};
use crate::rational::{self, int, ExactRational};

/// Largest dimension accepted by [`exact_psd_certificate`].
pub const EXACT_CERTIFY_LIMIT: usize = 200;

/// Dense symmetric matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<ExactRational>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            entries: vec![ExactRational::zero(); dim * dim],
        }
    }

    pub fn from_rows(rows: Vec<Vec<ExactRational>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("matrix must be square"));
        }
        let m = SymMatrix {
            dim,
            entries: rows.into_iter().flatten().collect(),
        };
        if !m.is_symmetric() {
            return Err(Error::invalid("matrix must be symmetric"));
        }
        Ok(m)
    }

    /// `L L^T` for a `dim x cols` factor.
    pub fn gram(l: &[Vec<ExactRational>]) -> Self {
        let dim = l.len();
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.entries[i * dim + j] = l[i].iter().zip(&l[j]).map(|(a, b)| a * b).sum();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &ExactRational {
        &self.entries[i * self.dim + j]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (i + 1..self.dim).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn max_abs(&self) -> ExactRational {
        self.entries
            .iter()
            .map(Signed::abs)
            .fold(ExactRational::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn to_f64(&self) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::<f64>::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = rational::to_f64(self.get(i, j));
                if !v.is_finite() {
                    return Err(Error::NumericOverflow(format!("entry ({i}, {j}) is not representable as f64")));
                }
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }
}

/// Moment matrix with its index of monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentMatrix {
    pub index: Vec<Monomial>,
    pub matrix: SymMatrix,
}

impl MomentMatrix {
    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn entry(&self, a: &Monomial, b: &Monomial) -> Option<&ExactRational> {
        let i = self.index.iter().position(|m| m == a)?;
        let j = self.index.iter().position(|m| m == b)?;
        Some(self.matrix.get(i, j))
    }
}

/// Index: every monomial with at most `floor(d/2)` variables, inconsistent
/// ones included.
pub fn build_moment_matrix(pe: &PseudoExpectation, cap: u64) -> Result<MomentMatrix> {
    let Model { n, t, .. } = pe.model();
    let half = pe.params().degree / 2;
    let vars = (n * t) as u64;
    let dim_estimate: u64 = (0..=half as u64).try_fold(0u64, |acc, s| {
        let c = rational::binomial(vars, s);
        num_traits::ToPrimitive::to_u64(&c).and_then(|c| acc.checked_add(c))
    })
    .unwrap_or(u64::MAX);
    if dim_estimate > cap {
        return Err(Error::limit("matrix-index", dim_estimate, cap));
    }
    let index = monomials_up_to(n, t, half);
    let dim = index.len();
    let unions: BTreeSet<Monomial> = (0..dim)
        .flat_map(|i| (i..dim).map(move |j| (i, j)))
        .map(|(i, j)| index[i].union(&index[j]))
        .collect();
    let unions: Vec<Monomial> = unions.into_iter().collect();
    let values: Vec<ExactRational> = unions
        .par_iter()
        .map(|m| pe.pseudo_moment(m))
        .collect::<Result<_>>()?;
    let lookup: HashMap<&Monomial, &ExactRational> = unions.iter().zip(&values).collect();
    let mut matrix = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let v = lookup[&index[i].union(&index[j])].clone();
            matrix.entries[j * dim + i] = v.clone();
            matrix.entries[i * dim + j] = v;
        }
    }
    Ok(MomentMatrix { index, matrix })
}

/// Structural checks on an assembled moment matrix.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureAudit {
    pub dim: usize,
    pub symmetric: bool,
    pub distinct_unions: usize,
    /// Entry pairs with the same `A ∪ B` but different values.
    pub incoherent_pairs: u64,
    /// Entries whose `A ∪ B` puts one vertex in two labels.
    pub disjointness_entries: u64,
    pub disjointness_nonzero: u64,
    /// Entries differing from `reference(A ∪ B)`.
    pub reference_mismatches: u64,
}

impl StructureAudit {
    pub fn holds(&self) -> bool {
        self.symmetric && self.incoherent_pairs == 0 && self.disjointness_nonzero == 0 && self.reference_mismatches == 0
    }
}

/// Symmetry, dependence on `A ∪ B` only, zeros at disjointness-violating
/// pairs, and agreement with an independently computed `reference`.
pub fn structure_audit<F>(mm: &MomentMatrix, reference: F) -> Result<StructureAudit>
where
    F: Fn(&Monomial) -> Result<ExactRational>,
{
    let dim = mm.dim();
    let mut out = StructureAudit {
        dim,
        symmetric: mm.matrix.is_symmetric(),
        ..StructureAudit::default()
    };
    let mut seen: HashMap<Monomial, ExactRational> = HashMap::new();
    for i in 0..dim {
        for j in 0..dim {
            let u = mm.index[i].union(&mm.index[j]);
            let v = mm.matrix.get(i, j);
            if !u.is_label_consistent() {
                out.disjointness_entries += 1;
                if !v.is_zero() {
                    out.disjointness_nonzero += 1;
                }
            }
            match seen.get(&u) {
                Some(prev) => {
                    if prev != v {
                        out.incoherent_pairs += 1;
                    }
                }
                None => {
                    if reference(&u)? != *v {
                        out.reference_mismatches += 1;
                    }
                    seen.insert(u, v.clone());
                }
            }
        }
    }
    out.distinct_unions = seen.len();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdAudit {
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub is_psd: bool,
    pub diag_nonneg: bool,
}

/// `1e-9 * dim * max |entry|`.
pub fn default_tolerance(m: &SymMatrix) -> f64 {
    1e-9 * m.dim() as f64 * rational::to_f64(&m.max_abs())
}

pub fn psd_audit(m: &SymMatrix, tolerance: f64) -> Result<PsdAudit> {
    if !(tolerance >= 0.0) {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    let diag_nonneg = (0..m.dim()).all(|i| !m.get(i, i).is_negative());
    if m.dim() == 0 {
        return Ok(PsdAudit {
            min_eigenvalue: 0.0,
            tolerance,
            is_psd: true,
            diag_nonneg,
        });
    }
    let a = m.to_f64()?;
    let sym = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !min_eigenvalue.is_finite() {
        return Err(Error::NumericOverflow("eigenvalue computation produced a non-finite value".into()));
    }
    Ok(PsdAudit {
        min_eigenvalue,
        tolerance,
        is_psd: min_eigenvalue >= -tolerance,
        diag_nonneg,
    })
}

/// Exact PSD decision by fraction-free symmetric elimination with diagonal
/// pivoting.
pub fn exact_psd_certificate(m: &SymMatrix) -> Result<bool> {
    let dim = m.dim();
    if dim > EXACT_CERTIFY_LIMIT {
        return Err(Error::limit("exact-certify-dim", dim, EXACT_CERTIFY_LIMIT as u64));
    }
    // Clear denominators; a positive scale preserves PSD.
    let lcm = m.entries.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut a: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| (0..dim).map(|j| (m.get(i, j) * &lcm).to_integer()).collect())
        .collect();
    let mut active: Vec<usize> = (0..dim).collect();
    let mut prev = BigInt::one();
    loop {
        if active.iter().any(|&i| a[i][i].is_negative()) {
            return Ok(false);
        }
        // Zero diagonal forces a zero row in a PSD matrix.
        let mut keep = Vec::with_capacity(active.len());
        for &i in &active {
            if a[i][i].is_zero() {
                if active.iter().any(|&j| !a[i][j].is_zero()) {
                    return Ok(false);
                }
            } else {
                keep.push(i);
            }
        }
        active = keep;
        let Some(pos) = (0..active.len()).max_by(|&x, &y| a[active[x]][active[x]].cmp(&a[active[y]][active[y]])) else {
            return Ok(true);
        };
        let p = active.swap_remove(pos);
        let piv = a[p][p].clone();
        let rows: Vec<Vec<BigInt>> = active
            .par_iter()
            .map(|&i| {
                active
                    .iter()
                    .map(|&j| {
                        let num = &piv * &a[i][j] - &a[i][p] * &a[p][j];
                        debug_assert!((&num % &prev).is_zero());
                        num / &prev
                    })
                    .collect()
            })
            .collect();
        for (r, &i) in active.iter().enumerate() {
            for (c, &j) in active.iter().enumerate() {
                a[i][j] = rows[r][c].clone();
            }
        }
        prev = piv;
    }
}

/// `Ẽ*[sum_{j,i} x_{i,j}]`.
pub fn objective_value(pe: &PseudoExpectation) -> Result<ExactRational> {
    let Model { n, t, .. } = pe.model();
    normalized(pe)?.expect(&Polynomial::total_size(n, t))
}

/// Random rational `L` with entries in `[-bound, bound] / den`.
pub fn random_gram(dim: usize, cols: usize, bound: i64, den: i64, seed: u64) -> SymMatrix {
    let mut rng = rng_from_seed(seed);
    let l: Vec<Vec<ExactRational>> = (0..dim)
        .map(|_| {
            (0..cols)
                .map(|_| rational::ratio(rng.random_range(-bound..=bound), den))
                .collect()
        })
        .collect();
    SymMatrix::gram(&l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SosExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub d: usize,
    pub tau: usize,
    pub seeds: Vec<u64>,
    pub enumeration_cap: u64,
    /// `None` selects [`default_tolerance`] per matrix.
    pub tolerance: Option<f64>,
    pub exact_certify: bool,
    /// Largest `|M'|` in the constraint audit, capped at `d - 2`.
    pub constraint_rest: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    pub normalizer: String,
    pub degenerate: bool,
    pub constraint_checks: u64,
    pub constraint_nonzero: u64,
    pub objective: Option<String>,
    pub objective_over_kt: Option<f64>,
    pub dim: usize,
    pub min_eigenvalue: Option<f64>,
    pub tolerance: Option<f64>,
    pub is_psd: Option<bool>,
    pub diag_nonneg: Option<bool>,
    pub exact_psd: Option<bool>,
    pub symmetric: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub count: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
}

impl Distribution {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let mid = v.len() / 2;
        let median = if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 };
        Some(Distribution {
            count: v.len(),
            min: v[0],
            median,
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SosExperimentReport {
    pub config: SosExperimentConfig,
    pub window: ParamWindow,
    pub window_violated: bool,
    pub rows: Vec<SeedRow>,
    pub degenerate_samples: usize,
    pub psd_fraction: Option<f64>,
    pub min_eigenvalue: Option<Distribution>,
    pub objective_over_kt: Option<Distribution>,
    pub all_constraints_zero: bool,
}

pub fn sos_experiment(cfg: &SosExperimentConfig) -> Result<SosExperimentReport> {
    let model = Model::new(cfg.n, cfg.k, cfg.t)?;
    let params = TruncationParams::for_model(cfg.n, cfg.k, cfg.t, cfg.d, cfg.tau);
    let table = Arc::new(FourierTable::new(model, params.clone(), cfg.enumeration_cap)?);
    let window = params.window(cfg.n, cfg.t);
    let kt = int((cfg.k * cfg.t) as i64);
    let mut rows = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let mut row = SeedRow {
            seed,
            normalizer: String::new(),
            degenerate: false,
            constraint_checks: 0,
            constraint_nonzero: 0,
            objective: None,
            objective_over_kt: None,
            dim: 0,
            min_eigenvalue: None,
            tolerance: None,
            is_psd: None,
            diag_nonneg: None,
            exact_psd: None,
            symmetric: false,
            error: None,
        };
        if let Err(e) = run_seed(cfg, &table, &kt, seed, &mut row) {
            row.error = Some(e.to_string());
        }
        rows.push(row);
    }
    let audited: Vec<&SeedRow> = rows.iter().filter(|r| r.is_psd.is_some()).collect();
    let psd_fraction = (!audited.is_empty())
        .then(|| audited.iter().filter(|r| r.is_psd == Some(true)).count() as f64 / audited.len() as f64);
    let eigs: Vec<f64> = rows.iter().filter_map(|r| r.min_eigenvalue).collect();
    let objs: Vec<f64> = rows.iter().filter_map(|r| r.objective_over_kt).collect();
    Ok(SosExperimentReport {
        config: cfg.clone(),
        window_violated: !window.satisfied,
        window,
        degenerate_samples: rows.iter().filter(|r| r.degenerate).count(),
        psd_fraction,
        min_eigenvalue: Distribution::of(&eigs),
        objective_over_kt: Distribution::of(&objs),
        all_constraints_zero: rows.iter().all(|r| r.constraint_nonzero == 0),
        rows,
    })
}

fn run_seed(
    cfg: &SosExperimentConfig,
    table: &Arc<FourierTable>,
    kt: &ExactRational,
    seed: u64,
    row: &mut SeedRow,
) -> Result<()> {
    let g = sample_null(cfg.n, seed)?;
    let pe = PseudoExpectation::new(g, Arc::clone(table))?;
    let e1 = pe.pseudo_moment(&Monomial::one())?;
    row.normalizer = rational::encode(&e1);
    let tally = audit_constraints(&pe, cfg.constraint_rest)?;
    row.constraint_checks = tally.nonedge_checks + tally.disjointness_checks;
    row.constraint_nonzero = tally.nonzero;
    if e1.is_zero() {
        row.degenerate = true;
    } else {
        let obj = objective_value(&pe)?;
        row.objective_over_kt = Some(rational::to_f64(&(&obj / kt)));
        row.objective = Some(rational::encode(&obj));
    }
    let mm = build_moment_matrix(&pe, cfg.enumeration_cap)?;
    row.dim = mm.dim();
    row.symmetric = mm.matrix.is_symmetric();
    let tol = cfg.tolerance.unwrap_or_else(|| default_tolerance(&mm.matrix));
    let audit = psd_audit(&mm.matrix, tol)?;
    row.min_eigenvalue = Some(audit.min_eigenvalue);
    row.tolerance = Some(tol);
    row.is_psd = Some(audit.is_psd);
    row.diag_nonneg = Some(audit.diag_nonneg);
    if cfg.exact_certify && mm.dim() <= EXACT_CERTIFY_LIMIT {
        row.exact_psd = Some(exact_psd_certificate(&mm.matrix)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planted::Graph;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn pe(n: usize, k: usize, t: usize, d: usize, tau: usize, g: Graph) -> PseudoExpectation {
        let model = Model::new(n, k, t).unwrap();
        PseudoExpectation::standalone(g, model, TruncationParams::for_model(n, k, t, d, tau), 1 << 22).unwrap()
    }

    #[test]
    fn dimension_and_structure_degree_two() {
        let p = pe(5, 2, 2, 2, 3, sample_null(5, 4).unwrap());
        let mm = build_moment_matrix(&p, 1 << 20).unwrap();
        assert_eq!(mm.dim(), 1 + 5 * 2);
        assert!(mm.matrix.is_symmetric());
        assert_eq!(mm.matrix.get(0, 0), &p.pseudo_moment(&Monomial::one()).unwrap());
        let a = Monomial::var(1, 1);
        let b = Monomial::var(1, 2);
        assert!(mm.entry(&a, &b).unwrap().is_zero());
    }

    #[test]
    fn cap_enforced() {
        let p = pe(5, 2, 2, 2, 3, Graph::complete(5));
        assert!(matches!(build_moment_matrix(&p, 5), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn coherence_and_zero_rows_degree_four() {
        let mut g = Graph::complete(5);
        g.set_sign(crate::fourier::Edge::new(1, 3), -1);
        let p = pe(5, 2, 2, 4, 4, g);
        let mm = build_moment_matrix(&p, 1 << 20).unwrap();
        let mut seen: HashMap<Monomial, ExactRational> = HashMap::new();
        for i in 0..mm.dim() {
            for j in 0..mm.dim() {
                let u = mm.index[i].union(&mm.index[j]);
                let v = mm.matrix.get(i, j);
                if let Some(prev) = seen.get(&u) {
                    assert_eq!(prev, v);
                }
                seen.insert(u.clone(), v.clone());
                if !u.is_label_consistent() {
                    assert!(v.is_zero());
                }
            }
        }
        for r in 1..=2 {
            assert!(mm.entry(&Monomial::var(1, r), &Monomial::var(3, r)).unwrap().is_zero());
        }
        let bad = Monomial::from_pairs([(2, 1), (2, 2)]);
        let i = mm.index.iter().position(|m| m == &bad).unwrap();
        assert!((0..mm.dim()).all(|j| mm.matrix.get(i, j).is_zero()));
        let audit = psd_audit(&mm.matrix, default_tolerance(&mm.matrix)).unwrap();
        assert!(audit.diag_nonneg || !audit.is_psd);
    }

    #[test]
    fn structure_audit_against_fresh_table() {
        let g = sample_null(5, 11).unwrap();
        let p = pe(5, 2, 2, 4, 4, g.clone());
        let fresh = pe(5, 2, 2, 4, 4, g);
        let mm = build_moment_matrix(&p, 1 << 20).unwrap();
        let a = structure_audit(&mm, |m| fresh.pseudo_moment(m)).unwrap();
        assert!(a.holds(), "{a:?}");
        assert!(a.disjointness_entries > 0);
        let off = structure_audit(&mm, |m| Ok(fresh.pseudo_moment(m)? + ratio(1, 7))).unwrap();
        assert_eq!(off.reference_mismatches as usize, off.distinct_unions);
    }

    #[test]
    fn trivial_audits() {
        let one = SymMatrix::from_rows(vec![vec![ratio(3, 2)]]).unwrap();
        assert!(psd_audit(&one, 0.0).unwrap().is_psd);
        assert!(exact_psd_certificate(&one).unwrap());
        let z = SymMatrix::zeros(4);
        let a = psd_audit(&z, 0.0).unwrap();
        assert_eq!(a.min_eigenvalue, 0.0);
        assert!(a.is_psd);
        assert!(exact_psd_certificate(&z).unwrap());
        assert!(SymMatrix::from_rows(vec![vec![int(1), int(2)], vec![int(3), int(1)]]).is_err());
    }

    #[test]
    fn exact_certifier_rejects_indefinite() {
        let m = SymMatrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(1)]]).unwrap();
        assert!(!exact_psd_certificate(&m).unwrap());
        assert!(!psd_audit(&m, 1e-9).unwrap().is_psd);
        let zero_diag = SymMatrix::from_rows(vec![vec![int(0), int(1)], vec![int(1), int(5)]]).unwrap();
        assert!(!exact_psd_certificate(&zero_diag).unwrap());
        // Singular PSD: rank one.
        let r1 = SymMatrix::gram(&[vec![int(1)], vec![int(2)], vec![int(-3)]]);
        assert!(exact_psd_certificate(&r1).unwrap());
    }

    #[test]
    fn objective_on_small_graph() {
        let p = pe(60, 2, 2, 2, 3, sample_null(60, 1).unwrap());
        let obj = objective_value(&p).unwrap();
        assert!(rational::to_f64(&obj).is_finite());
    }

    #[test]
    fn experiment_report_round_trips() {
        let cfg = SosExperimentConfig {
            n: 6,
            k: 2,
            t: 2,
            d: 2,
            tau: 3,
            seeds: vec![1, 2, 3],
            enumeration_cap: 1 << 20,
            tolerance: None,
            exact_certify: true,
            constraint_rest: 0,
        };
        let rep = sos_experiment(&cfg).unwrap();
        assert!(rep.all_constraints_zero);
        assert!(rep.window_violated);
        for r in &rep.rows {
            assert!(r.error.is_none(), "{:?}", r.error);
            assert!(r.symmetric);
            assert_eq!(r.exact_psd, r.is_psd);
        }
        let s = serde_json::to_string(&rep).unwrap();
        let back: SosExperimentReport = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn gram_matrices_are_psd(dim in 1usize..12, cols in 1usize..6, seed in any::<u64>()) {
            let g = random_gram(dim, cols, 9, 4, seed);
            let audit = psd_audit(&g, 1e-9).unwrap();
            prop_assert!(audit.is_psd, "{audit:?}");
            prop_assert!(audit.diag_nonneg);
            prop_assert!(exact_psd_certificate(&g).unwrap());
        }
    }
}
