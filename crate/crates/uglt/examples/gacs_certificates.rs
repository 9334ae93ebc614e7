//! Decompose the model-problem sequence along its canonical exhaustion and
//! print the approximation certificates: dimension defect, exact rank of
//! the correction, and their rates.
//!
//!     cargo run --example gacs_certificates

use uglt::experiment::model_sequence;
use uglt::grid::MultiIndex;
use uglt::sequence::gacs_decompose;

fn main() -> uglt::Result<()> {
    let seq = model_sequence();
    let n = MultiIndex::square(2, 24);
    println!("{:>4} {:>8} {:>8} {:>8} {:>8}", "t", "defect", "rank", "m(t)", "c(t)");
    for t in [1.0, 2.0, 4.0, 8.0] {
        let (b, cert) = gacs_decompose(&seq, t, &n)?;
        assert!(cert.rank_correction <= 2 * cert.dim_defect);
        println!(
            "{t:>4} {:>8} {:>8} {:>8.4} {:>8.4}   (approximant dim {})",
            cert.dim_defect, cert.rank_correction, cert.m_rate, cert.c_rate, b.dim()
        );
    }
    println!("rank(S) <= 2 * defect held for every step; norm correction is 0.");
    Ok(())
}
