//! The non-edge and disjointness constraints vanish exactly on a random graph.

use multiplant::planted::sample_null;
use multiplant::pseudo::{audit_constraints, PseudoExpectation};
use multiplant::{Model, Monomial, TruncationParams};

fn main() -> multiplant::Result<()> {
    let model = Model::new(6, 2, 2)?;
    let params = TruncationParams::for_model(6, 2, 2, 4, 4);
    let g = sample_null(6, 3)?;
    let pe = PseudoExpectation::standalone(g, model, params, 1 << 24)?;
    println!("E[1] = {}", pe.pseudo_moment(&Monomial::one())?);
    println!("E[x_1,1] = {}", pe.pseudo_moment(&Monomial::var(1, 1))?);
    let tally = audit_constraints(&pe, 2)?;
    println!(
        "{} non-edge and {} disjointness checks, {} nonzero",
        tally.nonedge_checks, tally.disjointness_checks, tally.nonzero
    );
    assert!(tally.all_zero());
    Ok(())
}
