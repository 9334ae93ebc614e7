//! The sequence pseudo-metric p(A_n) converges to the measure
//! pseudo-metric p_m(κ) of the tracked symbol — here for a diagonal
//! sampling sequence on the unit square.
//!
//!     cargo run --example isometry

use std::sync::Arc;

use uglt::experiment::builtin_coefficient;
use uglt::grid::{DomainSpec, MultiIndex};
use uglt::sequence::{isometry_check, unbounded_diag};

fn main() -> uglt::Result<()> {
    let dom = DomainSpec::unit_square();
    let base = builtin_coefficient();
    let a: uglt::generators::SpaceFn = Arc::new(move |x: &[f64]| base(x) / 10.0);
    let seq = unbounded_diag(a, "a/10", &dom, f64::INFINITY)?;

    let ns: Vec<MultiIndex> = [16usize, 32, 64, 128]
        .iter()
        .map(|&m| MultiIndex::square(2, m))
        .collect();
    let rep = isometry_check(&seq, &ns, 2000, 256, 1)?;
    println!("p_m(symbol) = {:.6}", rep.d_m_value);
    for (n, p) in &rep.d_acs_profile {
        println!("n = {n}: p(D_n) = {p:.6}, gap = {:.6}", (p - rep.d_m_value).abs());
    }
    println!("final gap: {:.6}", rep.gap);
    Ok(())
}
