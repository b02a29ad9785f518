//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use multiplant::cli::{report::strip_metadata, run_cli};
use multiplant::fourier::TruncationParams;
use multiplant::matrix::{
    build_moment_matrix, psd_audit, random_gram, sos_experiment, structure_audit, SosExperimentConfig,
    SymMatrix,
};
use multiplant::moments::coefficient_sweep;
use multiplant::planted::{sample_null, Planting};
use multiplant::pseudo::{audit_constraints, calibration_check, FourierTable, Polynomial, PseudoExpectation};
use multiplant::rational::{self, from_biguint, int, pow2, ratio};
use multiplant::ribbon::ribbon_sweep;
use multiplant::sq::{
    correlation_bruteforce, correlation_exact, correlation_sweep, count_plantings, default_bound_grids,
    overlap_histogram, overlap_pmf, sda_parameters, verify_counts,
};
use multiplant::vstat::{
    check_mean_weight_truth, gap_threshold_n, honest_sufficient_n, run_trials, Policy,
};
use multiplant::{Error, Model};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s(e: Error) -> String {
    e.to_string()
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, format!("took {:?}, limit {limit:?}", start.elapsed()))
}

const CAP: u64 = 1 << 26;

fn c1() -> Result<String, String> {
    let start = Instant::now();
    let s = coefficient_sweep(Model::new(6, 2, 2).map_err(e2s)?, 3, 5, CAP).map_err(e2s)?;
    ensure(s.pairs > 0, "empty sweep")?;
    ensure(s.mismatches == 0, format!("{} mismatches, first: {:?}", s.mismatches, s.first_failure))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("{} (M, T) pairs, 0 mismatches", s.pairs))
}

fn c2() -> Result<String, String> {
    let s = coefficient_sweep(Model::new(6, 2, 2).map_err(e2s)?, 3, 5, CAP).map_err(e2s)?;
    ensure(s.inconsistent > 0, "no inconsistent pairs in the sweep")?;
    ensure(s.inconsistent_nonzero == 0, format!("{} inconsistent nonzero", s.inconsistent_nonzero))?;
    ensure(s.bound_violations == 0, format!("{} bound violations", s.bound_violations))?;
    ensure(s.relaxed_violations == 0, format!("{} relaxed-bound violations", s.relaxed_violations))?;
    Ok(format!(
        "{} inconsistent pairs all zero; bound chain holds on {} consistent pairs",
        s.inconsistent,
        s.pairs - s.inconsistent
    ))
}

fn c3() -> Result<String, String> {
    let start = Instant::now();
    let (n, k, t) = (8, 2, 2);
    let model = Model::new(n, k, t).map_err(e2s)?;
    let table = Arc::new(FourierTable::new(model, TruncationParams::for_model(n, k, t, 4, 4), CAP).map_err(e2s)?);
    let mut checks = 0;
    for seed in 1..=30u64 {
        let pe = PseudoExpectation::new(sample_null(n, seed).map_err(e2s)?, Arc::clone(&table)).map_err(e2s)?;
        let tally = audit_constraints(&pe, 2).map_err(e2s)?;
        ensure(tally.nonzero == 0, format!("seed {seed}: {:?}", tally.first_violation))?;
        checks += tally.nonedge_checks + tally.disjointness_checks;
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!("30 graphs, {checks} constraint products, all exactly 0"))
}

fn c4() -> Result<String, String> {
    let start = Instant::now();
    let model = Model::new(4, 2, 2).map_err(e2s)?;
    let params = TruncationParams::for_model(4, 2, 2, 2, 3);
    let mut got = Vec::new();
    for (p, want) in [
        (Polynomial::one(), 1),
        (Polynomial::label_size(4, 1), 2),
        (Polynomial::total_size(4, 2), 4),
    ] {
        let (lhs, rhs) = calibration_check(model, &params, &p, CAP).map_err(e2s)?;
        ensure(lhs == int(want) && rhs == int(want), format!("lhs {lhs}, rhs {rhs}, want {want}"))?;
        got.push(rational::encode(&lhs));
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("averages over 64 graphs: {}", got.join(", ")))
}

fn c5() -> Result<String, String> {
    let (n, k, t, d, tau) = (6, 2, 2, 4, 4);
    let model = Model::new(n, k, t).map_err(e2s)?;
    let params = TruncationParams::for_model(n, k, t, d, tau);
    let mut dims = 0;
    for seed in [3u64, 8] {
        let g = sample_null(n, seed).map_err(e2s)?;
        let pe = PseudoExpectation::standalone(g.clone(), model, params.clone(), CAP).map_err(e2s)?;
        let fresh = PseudoExpectation::standalone(g, model, params.clone(), CAP).map_err(e2s)?;
        let mm = build_moment_matrix(&pe, CAP).map_err(e2s)?;
        let a = structure_audit(&mm, |m| fresh.pseudo_moment(m)).map_err(e2s)?;
        ensure(a.holds(), format!("seed {seed}: {a:?}"))?;
        ensure(a.disjointness_entries > 0, "no disjointness-violating pairs indexed")?;
        dims = a.dim;
    }
    for seed in 0..10u64 {
        let g = random_gram(12, 4, 9, 7, seed);
        let audit = psd_audit(&g, 1e-9).map_err(e2s)?;
        ensure(audit.is_psd, format!("Gram seed {seed}: min eigenvalue {}", audit.min_eigenvalue))?;
    }
    let g = random_gram(6, 2, 5, 3, 1);
    let shift = int(1) + g.max_abs() * int(12);
    let rows = (0..g.dim())
        .map(|i| (0..g.dim()).map(|j| if i == j { g.get(i, j) - &shift } else { g.get(i, j).clone() }).collect())
        .collect();
    let neg = SymMatrix::from_rows(rows).map_err(e2s)?;
    ensure(!psd_audit(&neg, 1e-9).map_err(e2s)?.is_psd, "shifted Gram not rejected")?;
    Ok(format!("dim {dims}: symmetric, coherent in A∪B, disjointness zeros; Gram self-test at 1e-9"))
}

fn c6() -> Result<String, String> {
    let cfg = SosExperimentConfig {
        n: 60,
        k: 2,
        t: 2,
        d: 2,
        tau: 3,
        seeds: (1..=20).collect(),
        enumeration_cap: CAP,
        tolerance: None,
        exact_certify: false,
        constraint_rest: 0,
    };
    let rep = sos_experiment(&cfg).map_err(e2s)?;
    ensure(rep.rows.len() == 20, "missing rows")?;
    ensure(rep.window_violated, "parameter window not flagged")?;
    let errs: Vec<_> = rep.rows.iter().filter_map(|r| r.error.clone()).collect();
    ensure(errs.is_empty(), format!("seed errors: {errs:?}"))?;
    let eig = rep.min_eigenvalue.as_ref().ok_or("no eigenvalues")?;
    Ok(format!(
        "window violated (flagged); PSD frequency {:.2}; min eigenvalue min {:.3e} median {:.3e} max {:.3e}",
        rep.psd_fraction.unwrap_or(f64::NAN),
        eig.min,
        eig.median,
        eig.max
    ))
}

fn c7() -> Result<String, String> {
    let start = Instant::now();
    let s = ribbon_sweep(500, 10, 2, 7).map_err(e2s)?;
    ensure(s.instances == 500 && s.max_vertices_seen <= 10, format!("{s:?}"))?;
    ensure(s.all_hold(), format!("{s:?}"))?;
    ensure(s.findings.is_empty(), format!("findings: {:?}", s.findings))?;
    within(start, Duration::from_secs(300))?;
    Ok(format!("500 ribbons (max {} vertices): all invariants hold", s.max_vertices_seen))
}

fn c8() -> Result<String, String> {
    let start = Instant::now();
    let s = correlation_sweep(8, 2, 2, 1 << 20, 1 << 20).map_err(e2s)?;
    ensure(s.all_hold(), format!("{s:?}"))?;
    ensure(s.plantings == 420 && s.ordered_pairs == 420 * 420, format!("{} plantings", s.plantings))?;
    let p = Planting::new(8, 2, vec![vec![1, 2]]).map_err(e2s)?;
    let exact = correlation_exact(&p, &p).map_err(e2s)?;
    let brute = correlation_bruteforce(&p, &p).map_err(e2s)?;
    ensure(exact == ratio(3, 16) && brute == ratio(3, 16), format!("spot value {exact} / {brute}"))?;
    within(start, Duration::from_secs(600))?;
    Ok(format!("{} plantings, {} ordered pairs exact; spot value 3/16", s.plantings, s.ordered_pairs))
}

fn c9() -> Result<String, String> {
    let checks = verify_counts(40, 1_000_000).map_err(e2s)?;
    let bad: Vec<_> = checks.iter().filter(|c| !c.holds()).collect();
    ensure(bad.is_empty(), format!("{bad:?}"))?;
    for (n, k, t) in [(6, 2, 2), (8, 2, 2)] {
        let m = from_biguint(&count_plantings(n, k, t).map_err(e2s)?);
        let h = overlap_histogram(n, k, t, CAP).map_err(e2s)?;
        for (ell, &c) in h.iter().enumerate() {
            let want = &m * overlap_pmf(n, k * t, ell).map_err(e2s)?;
            ensure(int(c as i64) == want, format!("({n},{k},{t}) overlap {ell}: {c} vs {want}"))?;
        }
    }
    Ok(format!("{} configs (n <= 40, m <= 10^6) counted three ways; histograms exact", checks.len()))
}

fn c10() -> Result<String, String> {
    let rep = default_bound_grids().run().map_err(e2s)?;
    let bad: Vec<_> = rep.checks.iter().filter(|c| !c.holds).collect();
    ensure(bad.is_empty(), format!("{bad:?}"))?;
    let spot = rep
        .checks
        .iter()
        .find(|c| c.family == "poisson-tail" && c.lambda == Some(1.0) && c.ell == 0)
        .ok_or("λ=1, ℓ=0 point missing")?;
    ensure(
        (spot.value - (std::f64::consts::E - 1.0)).abs() < 1e-12 && spot.bound == 2.0,
        format!("{spot:?}"),
    )?;
    let sp = rep
        .sparse
        .iter()
        .find(|p| p.n == 10_000 && p.ell == 1)
        .ok_or("sparse point missing")?;
    ensure(sp.big_k == 15 && (sp.ratio - 1.0).abs() <= 0.05, format!("{sp:?}"))?;
    ensure(rep.sparse_trending, "sparse ratio not trending toward 1")?;
    Ok(format!("{} grid points hold; sparse ratio at n=10^4 is {:.4}", rep.checks.len(), sp.ratio))
}

fn c11() -> Result<String, String> {
    let n = 1usize << 20;
    let p0 = sda_parameters(n, 4, 4, 0).map_err(e2s)?;
    let want_gamma = ratio(2 * 16, 1) * pow2(-40);
    ensure(p0.d == 1u32.into() && p0.gamma_bar == want_gamma, format!("{p0:?}"))?;
    let p2 = sda_parameters(n, 4, 4, 2).map_err(e2s)?;
    ensure(p2.d == 33_554_432u32.into() && p2.gamma_bar == pow2(-33), format!("{p2:?}"))?;
    let p1 = sda_parameters(1 << 16, 2, 2, 1).map_err(e2s)?;
    // d = 1! * 2^16 / 16, gamma = 2 * 4 * 2 / 2^32.
    ensure(p1.d == 4096u32.into() && p1.gamma_bar == pow2(-28), format!("{p1:?}"))?;
    match sda_parameters(n, 4, 4, 12) {
        Err(Error::Domain(m)) if m.contains("⌊log₂(n/(k²t²))⌋ − 1") => {}
        other => return Err(format!("window bound not named: {other:?}")),
    }
    match sda_parameters(1 << 30, 1, 2, 3) {
        Err(Error::Domain(m)) if m.contains("exceeds kt") => {}
        other => return Err(format!("kt bound not named: {other:?}")),
    }
    Ok("ℓ=0 gives d=1, γ̄=2k²/n²; documented configs exact; violations name their bound".into())
}

fn c12() -> Result<String, String> {
    for (n, k, t) in [(4, 2, 1), (6, 2, 2), (8, 2, 3), (9, 3, 3), (12, 3, 2), (12, 4, 3)] {
        ensure(check_mean_weight_truth(n, k, t, 5).map_err(e2s)?, format!("truth mismatch at ({n},{k},{t})"))?;
    }
    let (n, k, t) = (100, 4, 4);
    let hn = honest_sufficient_n(n, k, t);
    let honest = run_trials(n, k, t, hn, Policy::Honest, 100, 17).map_err(e2s)?;
    ensure(honest.answers_within_tolerance, "honest answer outside band")?;
    ensure(
        honest.planted_correct == 100 && honest.null_correct == 100,
        format!("honest: {honest:?}"),
    )?;
    let gn = gap_threshold_n(n, k, t).map_err(e2s)?;
    let adv = run_trials(n, k, t, gn, Policy::Adversarial, 100, 18).map_err(e2s)?;
    ensure(adv.answers_within_tolerance, "adversarial answer outside band")?;
    ensure(adv.planted_correct == 0, format!("adversarial detected {} times", adv.planted_correct))?;
    Ok(format!("truth exact for n <= 12; honest N={hn}: 200/200 correct; adversarial N={gn}: 0/100 detected"))
}

fn c13() -> Result<String, String> {
    let dir = std::env::temp_dir().join(format!("multiplant-acceptance-{}", std::process::id()));
    let cfg_path = dir.join("repro.toml");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let cfgs = [
        ("sos-matrix", "[model]\nn = 8\nk = 2\nt = 2\n[sos]\nd = 2\ntau = 3\n"),
        ("vstat-demo", "[vstat]\nmodels = [[100, 2, 2], [100, 4, 4]]\nmax_log2_n = 40\ntrials = 10\nseed = 3\nell = 0\n"),
        ("ribbon", "[ribbon]\ntriples = 50\nmax_vertices = 8\nlabels = 2\n"),
        ("sq-sda", "[model]\nn = 12\nk = 2\nt = 2\n[sq]\nell = 1\nallow_outside_window = true\nnum_subsets = 5\n"),
    ];
    let mut compared = 0;
    for (cmd, text) in cfgs {
        std::fs::write(&cfg_path, text).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.join(format!("{cmd}-{rep}"));
            let args = [
                "workbench",
                cmd,
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seeds",
                "4,5,6",
            ];
            let o = run_cli(args).map_err(e2s)?;
            let report = std::fs::read_to_string(&o.report).map_err(|e| e.to_string())?;
            let table = std::fs::read(o.table.as_ref().ok_or("no table")?).map_err(|e| e.to_string())?;
            outputs.push((report, table));
        }
        ensure(
            strip_metadata(&outputs[0].0) == strip_metadata(&outputs[1].0),
            format!("{cmd}: reports differ"),
        )?;
        ensure(outputs[0].1 == outputs[1].1, format!("{cmd}: tables differ"))?;
        compared += 1;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{compared} subcommands byte-identical across two runs (metadata excluded)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 13] = [
        ("coefficient oracle equivalence", c1),
        ("inconsistency vanishing and coefficient bound", c2),
        ("constraint exactness", c3),
        ("calibration identity", c4),
        ("moment-matrix structure", c5),
        ("PSD trend report", c6),
        ("ribbon suite", c7),
        ("SQ correlation identity", c8),
        ("counting and overlap law", c9),
        ("inequality grids", c10),
        ("SDA parameters", c11),
        ("VSTAT contract", c12),
        ("reproducibility", c13),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} {name} ... PASS ({secs:.1}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name} ... FAIL ({secs:.1}s) {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
