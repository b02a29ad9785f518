//! Build a moment matrix and report its smallest eigenvalue.

use multiplant::matrix::{sos_experiment, SosExperimentConfig};

fn main() -> multiplant::Result<()> {
    let cfg = SosExperimentConfig {
        n: 40,
        k: 2,
        t: 2,
        d: 2,
        tau: 3,
        seeds: (1..=6).collect(),
        enumeration_cap: 1 << 26,
        tolerance: None,
        exact_certify: false,
        constraint_rest: 0,
    };
    let rep = sos_experiment(&cfg)?;
    println!("window violated: {}", rep.window_violated);
    for r in &rep.rows {
        println!(
            "seed {}: dim {}, min eigenvalue {:?}, psd {:?}",
            r.seed, r.dim, r.min_eigenvalue, r.is_psd
        );
    }
    println!("psd fraction {:?}", rep.psd_fraction);
    Ok(())
}
