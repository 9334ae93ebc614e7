//! Enumerate the grids Θ_{n,Ω} of the built-in domains and watch the
//! point-count ratio d_n/N(n) converge to the domain measure.
//!
//!     cargo run --example dims

use uglt::grid::{domain_grid, DomainSpec, MultiIndex};

fn main() -> uglt::Result<()> {
    for name in DomainSpec::builtin_names() {
        let dom = DomainSpec::builtin(name)?;
        println!("{name} (measure {:.6}):", dom.measure);
        println!("  {:>5} {:>9} {:>10} {:>10}", "m", "d_n", "ratio", "abs err");
        for m in [8usize, 16, 32, 64, 128] {
            let n = MultiIndex::square(dom.d(), m);
            let grid = domain_grid(&n, &dom)?;
            let ratio = grid.dim() as f64 / n.n_total() as f64;
            println!(
                "  {m:>5} {:>9} {ratio:>10.6} {:>10.6}",
                grid.dim(),
                (ratio - dom.measure).abs()
            );
        }
    }
    Ok(())
}
