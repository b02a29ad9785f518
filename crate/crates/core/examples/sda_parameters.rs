//! Statistical dimension parameters and a small audit of average correlations.

use multiplant::sq::{sda_audit, sda_parameters, sda_parameters_unchecked};

fn main() -> multiplant::Result<()> {
    for ell in 1..=3 {
        let p = sda_parameters(1 << 20, 4, 4, ell)?;
        println!("l={ell}: d={}, gamma_bar={}, vstat n={}", p.d, p.gamma_bar, p.vstat_n);
    }
    if let Err(e) = sda_parameters(1 << 20, 4, 4, 12) {
        println!("l=12 rejected: {e}");
    }
    let p = sda_parameters_unchecked(12, 2, 2, 1)?;
    println!("outside the window: {:?}", p.violation);
    let audit = sda_audit(12, 2, 2, 1, 5, 1, 1 << 24)?;
    println!(
        "{} plantings, subsets of size {}, {} sampled above gamma_bar",
        audit.plantings, audit.subset_size, audit.sampled_exceeding_gamma_bar
    );
    Ok(())
}
