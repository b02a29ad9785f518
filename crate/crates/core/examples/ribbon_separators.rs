//! Minimum vertex separators of a small ribbon and its canonical factorization.

use multiplant::ribbon::{
    brute_force_separator_size, canonical_factorization, extremal_separators, ribbon_from_monomials, ribbon_sweep,
    verify_vertex_count,
};
use multiplant::{Character, Edge, Monomial};

fn main() -> multiplant::Result<()> {
    let a = Monomial::from_pairs([(0, 0), (1, 1)]);
    let b = Monomial::from_pairs([(5, 0), (6, 1)]);
    let w = Character::from_edges([
        Edge::new(0, 2),
        Edge::new(1, 2),
        Edge::new(2, 3),
        Edge::new(3, 4),
        Edge::new(4, 5),
        Edge::new(4, 6),
    ]);
    let r = ribbon_from_monomials(&a, &b, &w);
    let ex = extremal_separators(&r);
    println!("separator size {} (brute force {})", ex.size, brute_force_separator_size(&r)?);
    println!("leftmost {:?}, rightmost {:?}", ex.leftmost, ex.rightmost);
    let f = canonical_factorization(&r);
    println!("left {:?}", f.left.vertices);
    println!("middle {:?}", f.middle.vertices);
    println!("right {:?}", f.right.vertices);
    assert!(verify_vertex_count(&r, &f));

    let sweep = ribbon_sweep(200, 9, 2, 11)?;
    println!("random sweep: {} instances, all hold {}", sweep.instances, sweep.all_hold());
    Ok(())
}
