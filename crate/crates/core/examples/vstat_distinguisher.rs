//! The mean-weight distinguisher against honest and adversarial VSTAT oracles.

use multiplant::vstat::{gap_threshold_n, honest_sufficient_n, run_trials, Policy};

fn main() -> multiplant::Result<()> {
    let (n, k, t) = (100, 2, 4);
    let honest = honest_sufficient_n(n, k, t);
    let gap = gap_threshold_n(n, k, t)?;
    println!("honest sufficient N = {honest}, gap threshold N = {gap}");
    for (policy, size) in [(Policy::Honest, honest), (Policy::Adversarial, gap), (Policy::Adversarial, 5 * gap)] {
        let s = run_trials(n, k, t, size, policy, 50, 3)?;
        println!(
            "{policy:?} N={size}: planted {}/{}, null {}/{}, success {}",
            s.planted_correct,
            s.trials,
            s.null_correct,
            s.trials,
            s.success_rate()
        );
    }
    Ok(())
}
