//! Distance profiles in the approximating-class pseudo-metric: a Toeplitz
//! sequence against its diagonal-scaled perturbations.
//!
//!     cargo run --example acs_profile

use std::sync::Arc;

use uglt::generators::builtin_table;
use uglt::grid::{DomainSpec, MultiIndex};
use uglt::sequence::{acs_distance_profile, seq_add, unbounded_diag, unbounded_toeplitz};

fn main() -> uglt::Result<()> {
    let dom = DomainSpec::unit_square();
    let table = builtin_table("laplace_2d", 1)?;
    let t = unbounded_toeplitz(&table, &dom, f64::INFINITY)?;

    // perturb by epsilon times a diagonal sequence
    let d = unbounded_diag(Arc::new(|x: &[f64]| x[0] * x[1]), "xy", &dom, f64::INFINITY)?;
    let ns: Vec<MultiIndex> = [8usize, 16, 24].iter().map(|&m| MultiIndex::square(2, m)).collect();

    for eps in [0.5, 0.1, 0.02] {
        let perturbed = seq_add(&t, &d, 1.0, eps)?;
        let profile = acs_distance_profile(&t, &perturbed, &ns, 2000)?;
        let line: Vec<String> =
            profile.iter().map(|(n, p)| format!("{n}:{p:.4}")).collect();
        println!("eps = {eps:<5} p-profile  {}", line.join("  "));
    }
    println!("identical sequences for reference:");
    let profile = acs_distance_profile(&t, &t, &ns, 2000)?;
    for (n, p) in profile {
        assert_eq!(p, 0.0);
        println!("  {n}: p = {p}");
    }
    Ok(())
}
