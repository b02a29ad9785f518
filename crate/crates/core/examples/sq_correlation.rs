//! Pairwise correlations of planted mixtures: closed form, brute force and bound.

use multiplant::planted::enumerate_plantings;
use multiplant::sq::{correlation_bound, correlation_bruteforce, correlation_exact, correlation_sweep, OverlapProfile};

fn main() -> multiplant::Result<()> {
    let fam: Vec<_> = enumerate_plantings(6, 2, 2, 1 << 20)?.collect();
    for u in fam.iter().step_by(37).take(5) {
        let s = &fam[0];
        let prof = OverlapProfile::between(s, u)?;
        println!(
            "overlap {:?}: exact {}, brute {}, bound {}",
            prof.lambda,
            correlation_exact(s, u)?,
            correlation_bruteforce(s, u)?,
            correlation_bound(s, u)?
        );
    }
    let sw = correlation_sweep(6, 2, 2, 1 << 20, 1 << 20)?;
    println!("{} ordered pairs, all hold {}", sw.ordered_pairs, sw.all_hold());
    Ok(())
}
