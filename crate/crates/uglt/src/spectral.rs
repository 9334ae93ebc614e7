//! Empirical spectral measures, pseudo-metrics and distribution comparison.
//!
//! `p_metric` is the a.c.s. pseudo-metric evaluated at one matrix,
//! `pm_metric` its measure-theoretic counterpart on sampled symbols, and
//! `w1_distance` the Wasserstein-1 distance between empirical measures via
//! a common quantile grid.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::generators::SymbolFn;
use crate::grid::{DomainSpec, Grid};

/// Default full-spectrum eigendecomposition cap.
pub const DEFAULT_EIG_CAP: usize = 3000;
/// Default dense SVD cap.
pub const DEFAULT_SVD_CAP: usize = 2000;
/// Number of quantiles used by [`w1_distance`].
pub const W1_QUANTILES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Eigenvalues,
    SingularValues,
}

/// Sorted spectrum of one matrix: ascending for eigenvalues, descending for
/// singular values.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    pub kind: SpectrumKind,
    pub values: Vec<f64>,
    pub dim: usize,
}

impl SpectralMeasure {
    pub fn eigenvalues(mut values: Vec<f64>) -> SpectralMeasure {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let dim = values.len();
        SpectralMeasure { kind: SpectrumKind::Eigenvalues, values, dim }
    }

    pub fn singular(mut values: Vec<f64>) -> SpectralMeasure {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let dim = values.len();
        SpectralMeasure { kind: SpectrumKind::SingularValues, values, dim }
    }

    /// CSV export, one value per row.
    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let head = match self.kind {
            SpectrumKind::Eigenvalues => "eigenvalue",
            SpectrumKind::SingularValues => "singular_value",
        };
        wtr.write_record([head])?;
        for v in &self.values {
            wtr.write_record(&[v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Full spectrum of a real symmetric matrix, ascending.
///
/// The input must be symmetric within `1e-12` and within the size cap.
/// Accuracy contract: max relative error `<= 1e-8` against closed-form
/// oracles (verified by the acceptance suite with large margin).
pub fn sym_eigenvalues(a: &DMatrix<f64>, cap: usize) -> Result<SpectralMeasure> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("sym_eigenvalues: matrix not square".into()));
    }
    if a.nrows() > cap {
        return Err(Error::SizeCap(format!(
            "sym_eigenvalues: dim {} exceeds cap {cap}",
            a.nrows()
        )));
    }
    let defect = (a - a.transpose()).abs().max();
    if defect > 1e-12 {
        return Err(Error::Evaluation(format!(
            "sym_eigenvalues: asymmetry {defect:.3e} exceeds 1e-12"
        )));
    }
    let ev = a.symmetric_eigenvalues();
    Ok(SpectralMeasure::eigenvalues(ev.iter().copied().collect()))
}

/// Full set of singular values of a real matrix, descending.
pub fn singular_values(a: &DMatrix<f64>, cap: usize) -> Result<SpectralMeasure> {
    if a.nrows().max(a.ncols()) > cap {
        return Err(Error::SizeCap(format!(
            "singular_values: dim {} exceeds cap {cap}",
            a.nrows().max(a.ncols())
        )));
    }
    let sv = a.singular_values();
    Ok(SpectralMeasure::singular(sv.iter().copied().collect()))
}

/// Singular values of a diagonal matrix: the magnitudes of its entries.
pub fn diag_singular_values(diag: &[f64]) -> SpectralMeasure {
    SpectralMeasure::singular(diag.iter().map(|v| v.abs()).collect())
}

/// The pseudo-metric `p(A) = min_{i=1..d+1} {(i−1)/d + σ_i}` with the
/// singular values sorted descending and `σ_{d+1} = 0`.
pub fn p_metric(sv: &SpectralMeasure) -> Result<f64> {
    if sv.kind != SpectrumKind::SingularValues {
        return Err(Error::Evaluation("p_metric expects singular values".into()));
    }
    Ok(p_of_values(&sv.values))
}

/// `p` evaluated on any list of singular values (sorted internally).
pub fn p_of_values(values: &[f64]) -> f64 {
    let d = values.len();
    if d == 0 {
        return 0.0;
    }
    let mut s: Vec<f64> = values.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut best = f64::INFINITY;
    for i in 0..=d {
        let sigma = if i < d { s[i] } else { 0.0 };
        best = best.min(i as f64 / d as f64 + sigma);
    }
    best
}

/// Equal-weight sampling of a symbol `κ(x,θ)` over grid points × a uniform
/// (midpoint) tensor grid in `[−π,π]^d`.
#[derive(Debug, Clone)]
pub struct SymbolSample {
    pub values: Vec<f64>,
    /// (space points, frequency points)
    pub counts: (usize, usize),
}

impl SymbolSample {
    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["symbol_value"])?;
        for v in &self.values {
            wtr.write_record(&[v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn theta_axis(q: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    (0..q)
        .map(|k| -PI + (2.0 * k as f64 + 1.0) * PI / q as f64)
        .collect()
}

/// Sample `κ` at every grid point crossed with a `theta_per_axis^d`
/// frequency grid (midpoint rule, so symmetric zeros of trigonometric
/// polynomials are not oversampled).
pub fn sample_symbol(symbol: &SymbolFn, grid: &Grid, theta_per_axis: usize) -> SymbolSample {
    let d = grid.n.d();
    let axis = theta_axis(theta_per_axis);
    let mut thetas: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::with_capacity(thetas.len() * axis.len());
        for t in &thetas {
            for &v in &axis {
                let mut t2 = t.clone();
                t2.push(v);
                next.push(t2);
            }
        }
        thetas = next;
    }
    let mut values = Vec::with_capacity(grid.dim() * thetas.len());
    for k in 0..grid.dim() {
        let x = grid.point(k);
        for t in &thetas {
            values.push(symbol.eval(&x, t));
        }
    }
    SymbolSample { values, counts: (grid.dim(), thetas.len()) }
}

/// Dense `n`-independent sample of a symbol over a bounded domain: midpoint
/// space grid of `space_per_axis^d` cells over the bounding box, filtered by
/// the exact indicator, crossed with a frequency grid.  Used as the
/// reference measure for `pm_metric`.
pub fn dense_symbol_sample(
    symbol: &SymbolFn,
    domain: &DomainSpec,
    space_per_axis: usize,
    theta_per_axis: usize,
) -> Result<SymbolSample> {
    let bb = domain
        .bounding_box
        .as_ref()
        .ok_or_else(|| Error::Config("dense sample needs a bounded domain".into()))?
        .clone();
    let d = domain.d();
    let axis = theta_axis(theta_per_axis);
    let mut thetas: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::with_capacity(thetas.len() * axis.len());
        for t in &thetas {
            for &v in &axis {
                let mut t2 = t.clone();
                t2.push(v);
                next.push(t2);
            }
        }
        thetas = next;
    }
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0usize; d];
    'outer: loop {
        let p: Vec<f64> = (0..d)
            .map(|j| {
                bb.anchor[j] as f64
                    + (idx[j] as f64 + 0.5) * bb.side as f64 / space_per_axis as f64
            })
            .collect();
        if domain.indicator(&p) {
            pts.push(p);
        }
        for j in (0..d).rev() {
            idx[j] += 1;
            if idx[j] < space_per_axis {
                continue 'outer;
            }
            idx[j] = 0;
        }
        break;
    }
    let mut values = Vec::with_capacity(pts.len() * thetas.len());
    for p in &pts {
        for t in &thetas {
            values.push(symbol.eval(p, t));
        }
    }
    Ok(SymbolSample { values, counts: (pts.len(), thetas.len()) })
}

/// The measure pseudo-metric on equal-weight cells:
/// `p_m(f) = min_{k=0..M} { k/M + s_{k+1} }` with `s` the magnitudes sorted
/// descending and `s_{M+1} = 0`.  This is the exact infimum of
/// `measure(E) + esssup_{E^c} |f|` over unions of sample cells.
pub fn pm_metric(samples: &SymbolSample) -> Result<f64> {
    if samples.values.is_empty() {
        return Err(Error::Evaluation("pm_metric on empty sample".into()));
    }
    Ok(p_of_values(
        &samples.values.iter().map(|v| v.abs()).collect::<Vec<_>>(),
    ))
}

/// Wasserstein-1 distance between two empirical measures given by value
/// lists: both are resampled onto the midpoints of a common 1024-quantile
/// grid of the empirical CDF inverse, and the mean absolute difference of
/// the quantile functions is returned.
pub fn w1_distance(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "w1_distance on empty list");
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let q = W1_QUANTILES;
    let mut acc = 0.0;
    for j in 0..q {
        let u = (j as f64 + 0.5) / q as f64;
        let qa = sa[((u * sa.len() as f64) as usize).min(sa.len() - 1)];
        let qb = sb[((u * sb.len() as f64) as usize).min(sb.len() - 1)];
        acc += (qa - qb).abs();
    }
    acc / q as f64
}

/// Fractions of singular values below `eps` and above `big` (sparsely
/// vanishing / sparsely unbounded diagnostics).
pub fn sv_tail_fractions(sv: &SpectralMeasure, eps: f64, big: f64) -> (f64, f64) {
    let d = sv.dim.max(1) as f64;
    let below = sv.values.iter().filter(|&&v| v < eps).count() as f64 / d;
    let above = sv.values.iter().filter(|&&v| v > big).count() as f64 / d;
    (below, above)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{builtin_table, toeplitz_real};
    use crate::grid::MultiIndex;
    use std::f64::consts::PI;

    #[test]
    fn eigensolver_small_oracle() {
        let t = builtin_table("laplace_1d", 1).unwrap();
        let m = toeplitz_real(&MultiIndex::new(vec![5]).unwrap(), &t).unwrap();
        let ev = sym_eigenvalues(&m, DEFAULT_EIG_CAP).unwrap();
        for (k, v) in ev.values.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k as f64 + 1.0) * PI / 6.0).cos();
            assert!((v - want).abs() < 1e-12, "k={k}: {v} vs {want}");
        }
    }

    #[test]
    fn eigensolver_diagonal_and_identity() {
        let ev = sym_eigenvalues(&DMatrix::identity(4, 4), 10).unwrap();
        assert!(ev.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let ev = sym_eigenvalues(&d, 10).unwrap();
        assert_eq!(ev.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigensolver_rejects_asymmetry_and_cap() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 1)] = 1e-6;
        assert!(sym_eigenvalues(&m, 10).is_err());
        assert!(sym_eigenvalues(&DMatrix::identity(11, 11), 10).is_err());
    }

    #[test]
    fn singular_value_basics() {
        let z = DMatrix::<f64>::zeros(3, 3);
        let sv = singular_values(&z, 10).unwrap();
        assert!(sv.values.iter().all(|&v| v == 0.0));
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-2.0, 1.0]));
        let sv = singular_values(&d, 10).unwrap();
        assert!((sv.values[0] - 2.0).abs() < 1e-14);
        assert!((sv.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn p_metric_examples() {
        assert_eq!(p_of_values(&[0.0, 0.0]), 0.0);
        for d in [1usize, 5, 50] {
            assert!((p_of_values(&vec![1.0; d]) - 1.0).abs() < 1e-15);
        }
        assert!((p_of_values(&[1.0, 0.0]) - 0.5).abs() < 1e-15);
        // p <= min(σ₁, 1)
        assert!(p_of_values(&[0.25, 0.25]) <= 0.25);
    }

    #[test]
    fn pm_metric_examples() {
        let s = |v: Vec<f64>| SymbolSample { counts: (v.len(), 1), values: v };
        assert_eq!(pm_metric(&s(vec![0.0; 8])).unwrap(), 0.0);
        assert!((pm_metric(&s(vec![0.3; 10])).unwrap() - 0.3).abs() < 1e-15);
        assert!((pm_metric(&s(vec![3.0, 0.5, 0.5, 0.5])).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn w1_examples() {
        let a = vec![0.1, 0.7, 0.3];
        assert_eq!(w1_distance(&a, &a), 0.0);
        let b: Vec<f64> = a.iter().map(|v| v + 0.25).collect();
        assert!((w1_distance(&a, &b) - 0.25).abs() < 1e-12);
        // identical empirical CDFs at different sample counts
        assert!(w1_distance(&[0.0, 1.0], &[0.0, 0.0, 1.0, 1.0]) < 1e-3);
    }

    #[test]
    fn sv_tail_examples() {
        let id = SpectralMeasure::singular(vec![1.0; 4]);
        assert_eq!(sv_tail_fractions(&id, 0.5, 2.0), (0.0, 0.0));
        let d = SpectralMeasure::singular(vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(sv_tail_fractions(&d, 0.5, 2.0).0, 0.75);
    }

    #[test]
    fn symbol_sampling_counts() {
        let g = crate::grid::domain_grid(
            &MultiIndex::square(2, 4),
            &crate::grid::DomainSpec::unit_square(),
        )
        .unwrap();
        let sym = SymbolFn::constant(1.5);
        let s = sample_symbol(&sym, &g, 4);
        assert_eq!(s.counts, (9, 16));
        assert!(s.values.iter().all(|&v| v == 1.5));
    }
}
