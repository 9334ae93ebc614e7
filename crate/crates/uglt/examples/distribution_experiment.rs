//! A scaled-down run of the spectral-distribution experiment: eigenvalues
//! of the variable-coefficient operator on the cusp domain against samples
//! of its symbol, with CSV output.
//!
//!     cargo run --example distribution_experiment

use uglt::experiment::{run_experiment, ExperimentConfig};

fn main() -> uglt::Result<()> {
    let out = std::env::temp_dir().join("uglt_distribution_example");
    let cfg = ExperimentConfig {
        m_list: vec![12, 16, 20],
        t_list: vec![2.0, 4.0],
        theta_per_axis: 8,
        eig_cap: 2000,
        emit_svg: true,
    };
    let report = run_experiment(&out, &cfg)?;
    println!("{:>4} {:>5} {:>6} {:>7} {:>8} {:>10}", "m", "t", "dim", "defect", "zeros", "W1");
    for r in &report.rows {
        println!(
            "{:>4} {:>5} {:>6} {:>7} {:>8.4} {:>10.4}",
            r.m, r.t, r.dim, r.dim_defect, r.zero_fraction, r.w1_eigs_vs_symbol
        );
    }
    println!("{} files written under {}", report.files.len(), out.display());
    Ok(())
}
