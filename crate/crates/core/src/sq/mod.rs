//! Statistical-query side: row mixtures, exact pairwise correlations,
//! planting counts, the hypergeometric overlap law, tail inequalities and the
//! statistical-dimension parameters.

mod bounds;
mod mixture;
mod overlap;
mod sda;

pub use bounds::{
    default_bound_grids, high_overlap_moment, moment_tail_bound, poisson_tail, poisson_tail_bound, sparse_asymptotic,
    BoundCheck, BoundGrids, BoundReport, SparseTrendPoint,
};
pub use mixture::{
    correlation_bound, correlation_bruteforce, correlation_exact, correlation_sweep, null_pmf, CorrelationSweep, MAX_EXHAUSTIVE_N,
    OverlapProfile, RowMixture,
};
pub use overlap::{
    count_plantings, count_plantings_telescoping, overlap_histogram, overlap_pmf, overlap_tail, overlap_tail_bound,
    verify_counts, CountCheck,
};
pub use sda::{
    avg_corr, ell_from_delta, floor_log2_ratio, sda_audit, sda_parameters, sda_parameters_unchecked, SdaAudit,
    SdaParameters, ASYMPTOTIC_CONDITIONS,
};
