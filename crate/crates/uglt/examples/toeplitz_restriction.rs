//! Build a reduced Toeplitz matrix two ways — directly from the Fourier
//! coefficients on the domain grid, and by cutting the full hypercube
//! Toeplitz matrix with a selection operator — and confirm they agree
//! entry by entry.
//!
//!     cargo run --example toeplitz_restriction

use std::sync::Arc;

use uglt::generators::{builtin_table, reduced_toeplitz_real};
use uglt::grid::{domain_grid, hypercube_grid, DomainSpec, Hypercube, MultiIndex};
use uglt::selection::{restrict, SelectionMap};

fn main() -> uglt::Result<()> {
    let table = builtin_table("laplace_2d", 1)?;
    let n = MultiIndex::square(2, 12);

    let disk = Arc::new(domain_grid(&n, &DomainSpec::disk())?);
    let cube = Arc::new(hypercube_grid(&n, &Hypercube::unit(2))?);
    println!("disk grid: {} points inside a {}-point hypercube grid", disk.dim(), cube.dim());

    let direct = reduced_toeplitz_real(&disk, &table)?;
    let map = SelectionMap::new(disk.clone(), cube.clone())?;
    let full = reduced_toeplitz_real(&cube, &table)?;
    let cut = restrict(&map, &full)?;

    let defect = (&direct - &cut).abs().max();
    println!("max |direct - Π T Πᵀ| = {defect:.1e}");
    assert_eq!(defect, 0.0);

    // a few sample rows of the stencil structure
    for k in [0usize, disk.dim() / 2] {
        let nnz = direct.row(k).iter().filter(|&&v| v != 0.0).count();
        println!("row {k}: {nnz} nonzeros, diagonal {}", direct[(k, k)]);
    }
    Ok(())
}
