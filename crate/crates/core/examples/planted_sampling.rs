//! Draw a planted graph and a null graph and compare them.

use multiplant::fourier::chi;
use multiplant::planted::{forced_edges, sample_null, sample_planted};

fn main() -> multiplant::Result<()> {
    let (n, k, t) = (12, 3, 2);
    let s = sample_planted(n, k, t, 7)?;
    println!("blocks: {:?}", s.planting.blocks());
    for (i, row) in s.indicator.iter().enumerate() {
        println!("vertex {}: {row:?}", i + 1);
    }
    let forced = forced_edges(&s.planting);
    println!("forced edges: {}", forced.len());
    for e in forced.edges() {
        assert_eq!(chi(&multiplant::Character::from_edges([*e]), &s.graph)?, 1);
    }
    let g0 = sample_null(n, 7)?;
    println!("density planted {:.3}, null {:.3}", s.graph.edge_density(), g0.edge_density());
    Ok(())
}
