//! Planting counts and the overlap tail inequalities.

use multiplant::sq::{count_plantings, default_bound_grids, overlap_histogram, overlap_tail, overlap_tail_bound};

fn main() -> multiplant::Result<()> {
    println!("m(8,2,2) = {}", count_plantings(8, 2, 2)?);
    println!("overlap histogram (8,2,2): {:?}", overlap_histogram(8, 2, 2, 1 << 20)?);
    for j in 0..=4 {
        println!("tail n=30 K=4 j={j}: {} <= {}", overlap_tail(30, 4, j)?, overlap_tail_bound(30, 4, j)?);
    }
    let rep = default_bound_grids().run()?;
    println!("{} bound checks, all hold {}", rep.checks.len(), rep.all_hold);
    for p in rep.sparse.iter().take(4) {
        println!("{p:?}");
    }
    Ok(())
}
