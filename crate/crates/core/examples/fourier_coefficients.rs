//! Closed-form Fourier coefficients of planted moments against brute force.

use multiplant::moments::{brute_force_coefficient, coefficient, coefficient_bound};
use multiplant::{Character, Edge, Model, Monomial};

fn main() -> multiplant::Result<()> {
    let model = Model::new(6, 2, 2)?;
    let m = Monomial::from_pairs([(1, 1), (2, 1), (3, 2)]);
    let chars = [
        Character::empty(),
        Character::from_edges([Edge::new(1, 2)]),
        Character::from_edges([Edge::new(1, 2), Edge::new(3, 4)]),
        Character::from_edges([Edge::new(4, 5)]),
    ];
    for w in &chars {
        let closed = coefficient(&m, w, &model);
        let brute = brute_force_coefficient(&m, w, model.n, model.k, model.t, 1 << 24)?;
        let bound = coefficient_bound(&m, w, model.n, model.k, model.t)?;
        println!("{:?}: {closed} (brute {brute}, bound {bound})", w.edges());
        assert_eq!(closed, brute);
    }
    Ok(())
}
