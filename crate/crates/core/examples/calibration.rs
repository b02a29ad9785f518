//! Averages of pseudo-expectations over every graph match the planted truth.

use multiplant::pseudo::{calibration_check, Polynomial};
use multiplant::{Model, TruncationParams};

fn main() -> multiplant::Result<()> {
    let model = Model::new(4, 2, 2)?;
    let params = TruncationParams::for_model(4, 2, 2, 2, 3);
    let polys = [
        ("1", Polynomial::one()),
        ("|S_1|", Polynomial::label_size(4, 1)),
        ("|S|", Polynomial::total_size(4, 2)),
    ];
    for (name, p) in &polys {
        let (avg, truth) = calibration_check(model, &params, p, 1 << 20)?;
        println!("{name}: average {avg}, planted {truth}");
        assert_eq!(avg, truth);
    }
    Ok(())
}
