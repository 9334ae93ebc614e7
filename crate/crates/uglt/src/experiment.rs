//! Model-problem experiment: a variable-coefficient diffusion operator
//! discretized on the grids of a cusp-shaped unbounded domain, compared
//! against its predicted symbol `κ(x,θ) = a(x)·(4 − 2cosθ₁ − 2cosθ₂)`.
//!
//! For each grid size the experiment computes the eigenvalues of the full
//! matrix, the eigenvalues of its restrictions along the canonical
//! exhaustion (padded with the dimension-defect zeros), symbol samples on
//! the matching grids, and Wasserstein-1 distances between the two sides.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{SpaceFn, SymbolFn};
use crate::grid::{domain_grid, exhaustion_domain, DomainSpec, Grid, MultiIndex};
use crate::selection::SelectionMap;
use crate::spectral::{sym_eigenvalues, w1_distance, SpectralMeasure};

/// Default grid sizes `n = (m,m)` of the experiment.
pub const DEFAULT_M_LIST: [usize; 4] = [16, 24, 32, 40];
/// Default exhaustion steps.
pub const DEFAULT_T_LIST: [f64; 3] = [2.0, 4.0, 8.0];
/// Frequency samples per axis for symbol evaluation.
pub const DEFAULT_THETA_PER_AXIS: usize = 16;

/// The built-in diffusion coefficient
/// `a(x,y) = (10 + x² + 2y² + sin²(x+y)) / (1 + x² + y²)`:
/// smooth, bounded, bounded away from zero.
pub fn builtin_coefficient() -> SpaceFn {
    Arc::new(|x: &[f64]| {
        let (u, v) = (x[0], x[1]);
        let s = (u + v).sin();
        (10.0 + u * u + 2.0 * v * v + s * s) / (1.0 + u * u + v * v)
    })
}

/// Predicted symbol of the discretization: `a(x)·(4 − 2cosθ₁ − 2cosθ₂)`.
pub fn model_symbol(a: SpaceFn) -> SymbolFn {
    SymbolFn::new(
        Arc::new(move |x: &[f64], th: &[f64]| {
            a(x) * (4.0 - 2.0 * th[0].cos() - 2.0 * th[1].cos())
        }),
        "a(x)·(4−2cosθ₁−2cosθ₂)",
    )
}

/// Assemble the five-point finite-difference matrix of `−∇·(a∇u)` on the
/// grid `Θ_{n,Ω}` with `n = (m,m)`, step `h = 1/m`, midpoint coefficient
/// sampling and Dirichlet elimination of points outside the grid.  The
/// entries carry no `h²` scaling, so for `a ≡ 1` the matrix is the plain
/// five-point Laplacian stencil.
pub fn assemble(grid: &Grid, a: &SpaceFn) -> Result<DMatrix<f64>> {
    let n = &grid.n;
    if n.d() != 2 || n.entries()[0] != n.entries()[1] {
        return Err(Error::Config(format!(
            "experiment assembly needs a square 2-d grid size, got {n}"
        )));
    }
    let m = n.entries()[0] as f64;
    
    let dim = grid.dim();
    let mut out = DMatrix::<f64>::zeros(dim, dim);
    let offsets: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    for k in 0..dim {
        let idx = grid.index(k);
        let mut diag = 0.0;
        for (dx, dy) in offsets {
            // midpoint between p and its neighbor, computed from the lattice
            // index so the two sides of an edge get the same float exactly
            let mid = [
                (2 * idx[0] + dx) as f64 / (2.0 * m),
                (2 * idx[1] + dy) as f64 / (2.0 * m),
            ];
            let coeff = a(&mid);
            if !coeff.is_finite() {
                return Err(Error::Evaluation(format!(
                    "coefficient not finite at ({}, {})",
                    mid[0], mid[1]
                )));
            }
            diag += coeff;
            let nb = [idx[0] + dx, idx[1] + dy];
            if let Some(j) = grid.find(&nb) {
                out[(k, j)] = -coeff;
            }
        }
        out[(k, k)] = diag;
    }
    Ok(out)
}

/// The model-problem operator as a symbol-tracked sequence over the cusp
/// domain: `n ↦` five-point assembly of `−∇·(a∇u)` on `Θ_{n,Ω}`.
pub fn model_sequence() -> crate::sequence::GltSequence {
    let domain = DomainSpec::cusp();
    let a = builtin_coefficient();
    let symbol = model_symbol(a.clone());
    let dom = domain.clone();
    crate::sequence::GltSequence::new(
        domain,
        Arc::new(move |n: &MultiIndex| {
            let grid = domain_grid(n, &dom)?;
            Ok(crate::sequence::MatrixRep::Dense(assemble(&grid, &a)?))
        }),
        symbol,
        true,
        crate::sequence::Provenance::Discretization {
            scheme: "five-point midpoint finite differences".into(),
            domain: "cusp".into(),
        },
    )
}

/// Symbol samples over `Θ_{n,Ω}` where the space part is capped by grid
/// membership in `Θ_{n,Ω_t}`: points of the defect contribute exact zeros,
/// so the zero fraction matches the zero-padded restricted spectrum.
pub fn capped_symbol_samples(
    symbol: &SymbolFn,
    grid: &Grid,
    small: Option<&Grid>,
    theta_per_axis: usize,
) -> Vec<f64> {
    let q = theta_per_axis;
    let d = grid.n.d();
    let axis: Vec<f64> = (0..q)
        .map(|k| -std::f64::consts::PI + (2 * k + 1) as f64 * std::f64::consts::PI / q as f64)
        .collect();
    let mut values = Vec::with_capacity(grid.dim() * q.pow(d as u32));
    let mut theta = vec![0usize; d];
    for k in 0..grid.dim() {
        let inside = match small {
            Some(s) => s.find(grid.index(k)).is_some(),
            None => true,
        };
        let p = grid.point(k);
        'outer: loop {
            if inside {
                let th: Vec<f64> = theta.iter().map(|&j| axis[j]).collect();
                values.push(symbol.eval(&p, &th));
            } else {
                values.push(0.0);
            }
            for j in (0..d).rev() {
                theta[j] += 1;
                if theta[j] < q {
                    continue 'outer;
                }
                theta[j] = 0;
            }
            break;
        }
    }
    values
}

/// One row of the Wasserstein-1 summary table.
#[derive(Debug, Clone, Serialize)]
pub struct W1Row {
    pub m: usize,
    /// exhaustion step; `"inf"` for the unrestricted row
    pub t: String,
    pub dim: usize,
    pub dim_defect: usize,
    /// fraction of exact zeros on each side of the comparison
    pub zero_fraction: f64,
    pub w1_eigs_vs_symbol: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub m_list: Vec<usize>,
    pub t_list: Vec<f64>,
    pub theta_per_axis: usize,
    pub eig_cap: usize,
    pub emit_svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m_list: DEFAULT_M_LIST.to_vec(),
            t_list: DEFAULT_T_LIST.to_vec(),
            theta_per_axis: DEFAULT_THETA_PER_AXIS,
            eig_cap: crate::spectral::DEFAULT_EIG_CAP,
            emit_svg: false,
        }
    }
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub rows: Vec<W1Row>,
    pub files: Vec<PathBuf>,
}

fn t_file_label(t: &str) -> String {
    t.replace('.', "p")
}

/// Run the full experiment on the cusp domain and write
/// `eigenvalues_{m}_{t}.csv`, `symbol_samples_{m}_{t}.csv` and
/// `w1_summary.csv` under `out`.  Output is deterministic: every quantity
/// is a closed-form evaluation or an eigensolve of a fixed matrix.
pub fn run_experiment(out: &Path, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let domain = DomainSpec::cusp();
    let a = builtin_coefficient();
    let symbol = model_symbol(a.clone());
    fs::create_dir_all(out)?;
    let mut rows = Vec::new();
    let mut files = Vec::new();

    for &m in &cfg.m_list {
        let n = MultiIndex::square(2, m);
        let grid = Arc::new(domain_grid(&n, &domain)?);
        let full = assemble(&grid, &a)?;
        let full_eigs = sym_eigenvalues(&full, cfg.eig_cap)?;

        for &t in &cfg.t_list {
            let omega_t = exhaustion_domain(&domain, t)?;
            let small = Arc::new(domain_grid(&n, &omega_t)?);
            let map = SelectionMap::new(small.clone(), grid.clone())?;
            let restricted = crate::selection::restrict(&map, &full)?;
            let defect = grid.dim() - small.dim();
            // spectrum of E(R(A)): eigenvalues of the restriction plus
            // one zero per defect dimension
            let mut eigs = sym_eigenvalues(&restricted, cfg.eig_cap)?.values;
            eigs.extend(std::iter::repeat_n(0.0, defect));
            let eigs = SpectralMeasure::eigenvalues(eigs);
            let samples =
                capped_symbol_samples(&symbol, &grid, Some(&small), cfg.theta_per_axis);
            let w1 = w1_distance(&eigs.values, &samples);
            let label = format!("{t}");
            write_eig_csv(out, m, &label, &eigs, &mut files)?;
            write_sample_csv(out, m, &label, &samples, &mut files)?;
            rows.push(W1Row {
                m,
                t: label,
                dim: grid.dim(),
                dim_defect: defect,
                zero_fraction: defect as f64 / grid.dim() as f64,
                w1_eigs_vs_symbol: w1,
            });
        }

        let samples = capped_symbol_samples(&symbol, &grid, None, cfg.theta_per_axis);
        let w1 = w1_distance(&full_eigs.values, &samples);
        write_eig_csv(out, m, "inf", &full_eigs, &mut files)?;
        write_sample_csv(out, m, "inf", &samples, &mut files)?;
        rows.push(W1Row {
            m,
            t: "inf".into(),
            dim: grid.dim(),
            dim_defect: 0,
            zero_fraction: 0.0,
            w1_eigs_vs_symbol: w1,
        });
    }

    let summary = out.join("w1_summary.csv");
    {
        let mut wtr = csv::Writer::from_path(&summary)?;
        wtr.write_record(["m", "t", "dim", "dim_defect", "zero_fraction", "w1_eigs_vs_symbol"])?;
        for r in &rows {
            wtr.write_record([
                r.m.to_string(),
                r.t.clone(),
                r.dim.to_string(),
                r.dim_defect.to_string(),
                format!("{:.6}", r.zero_fraction),
                format!("{:.6}", r.w1_eigs_vs_symbol),
            ])?;
        }
        wtr.flush()?;
    }
    files.push(summary);

    if cfg.emit_svg {
        for &m in &cfg.m_list {
            let n = MultiIndex::square(2, m);
            let grid = domain_grid(&n, &domain)?;
            let full = assemble(&grid, &a)?;
            let eigs = sym_eigenvalues(&full, cfg.eig_cap)?;
            let samples = capped_symbol_samples(&symbol, &grid, None, cfg.theta_per_axis);
            let path = out.join(format!("quantiles_{m}_inf.svg"));
            write_quantile_svg(&path, &eigs.values, &samples)?;
            files.push(path);
        }
    }

    Ok(ExperimentReport { rows, files })
}

fn write_eig_csv(
    out: &Path,
    m: usize,
    t: &str,
    eigs: &SpectralMeasure,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let path = out.join(format!("eigenvalues_{m}_{}.csv", t_file_label(t)));
    let f = fs::File::create(&path)?;
    eigs.to_csv(f)?;
    files.push(path);
    Ok(())
}

fn write_sample_csv(
    out: &Path,
    m: usize,
    t: &str,
    samples: &[f64],
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let path = out.join(format!("symbol_samples_{m}_{}.csv", t_file_label(t)));
    let mut wtr = csv::Writer::from_path(&path)?;
    wtr.write_record(["value"])?;
    for v in samples {
        wtr.write_record([format!("{v:.12e}")])?;
    }
    wtr.flush()?;
    files.push(path);
    Ok(())
}

/// Overlaid quantile curves (empirical inverse CDFs) of the two value sets.
fn write_quantile_svg(path: &Path, eigs: &[f64], samples: &[f64]) -> Result<()> {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let q = 256usize;
    let quantiles = |vals: &[f64]| -> Vec<f64> {
        let mut s = vals.to_vec();
        s.sort_by(f64::total_cmp);
        (0..q)
            .map(|j| {
                let u = (j as f64 + 0.5) / q as f64;
                s[((u * s.len() as f64) as usize).min(s.len() - 1)]
            })
            .collect()
    };
    let qa = quantiles(eigs);
    let qb = quantiles(samples);
    let lo = qa.iter().chain(&qb).fold(f64::INFINITY, |m, &v| m.min(v));
    let hi = qa.iter().chain(&qb).fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let span = (hi - lo).max(1e-12);
    let poly = |vals: &[f64]| -> String {
        vals.iter()
            .enumerate()
            .map(|(j, &v)| {
                let x = PAD + (W - 2.0 * PAD) * j as f64 / (q - 1) as f64;
                let y = H - PAD - (H - 2.0 * PAD) * (v - lo) / span;
                format!("{x:.1},{y:.1}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let svg = format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<polyline points=\"{pa}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n",
            "<polyline points=\"{pb}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6 3\"/>\n",
            "<text x=\"{tx}\" y=\"20\" font-size=\"13\">eigenvalue quantiles (blue) vs symbol quantiles (red)</text>\n",
            "</svg>\n"
        ),
        w = W,
        h = H,
        pa = poly(&qa),
        pb = poly(&qb),
        tx = PAD,
    );
    fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::extend;

    #[test]
    fn coefficient_values_and_positivity() {
        let a = builtin_coefficient();
        assert!((a(&[0.0, 0.0]) - 10.0).abs() < 1e-15);
        let want = (11.0 + 1.0f64.sin().powi(2)) / 2.0;
        assert!((a(&[1.0, 0.0]) - want).abs() < 1e-15);
        // positive on a large seeded sample of the plane
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let x = [rng.random::<f64>() * 20.0, rng.random::<f64>() * 20.0];
            let v = a(&x);
            assert!(v > 0.0 && v.is_finite());
        }
    }

    #[test]
    fn constant_coefficient_reduces_to_laplacian() {
        // a ≡ 1 on the unit square: eigenvalues are
        // 4 − 2cos(jπ/m) − 2cos(kπ/m), j,k = 1..m−1
        let m = 8usize;
        let dom = DomainSpec::unit_square();
        let grid = domain_grid(&MultiIndex::square(2, m), &dom).unwrap();
        assert_eq!(grid.dim(), (m - 1) * (m - 1));
        let one: SpaceFn = Arc::new(|_: &[f64]| 1.0);
        let mat = assemble(&grid, &one).unwrap();
        let eigs = sym_eigenvalues(&mat, 1000).unwrap();
        let mut want: Vec<f64> = (1..m)
            .flat_map(|j| {
                (1..m).map(move |k| {
                    4.0 - 2.0 * (j as f64 * std::f64::consts::PI / m as f64).cos()
                        - 2.0 * (k as f64 * std::f64::consts::PI / m as f64).cos()
                })
            })
            .collect();
        want.sort_by(f64::total_cmp);
        for (got, want) in eigs.values.iter().zip(&want) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn assembly_is_symmetric() {
        let dom = DomainSpec::cusp();
        let grid = domain_grid(&MultiIndex::square(2, 12), &dom).unwrap();
        let a = builtin_coefficient();
        let mat = assemble(&grid, &a).unwrap();
        assert_eq!((&mat - mat.transpose()).abs().max(), 0.0);
    }

    #[test]
    fn interior_row_sums_vanish() {
        // rows whose four neighbors all lie in the grid have zero sum
        let dom = DomainSpec::cusp();
        let grid = domain_grid(&MultiIndex::square(2, 12), &dom).unwrap();
        let a = builtin_coefficient();
        let mat = assemble(&grid, &a).unwrap();
        let mut interior_rows = 0;
        for k in 0..grid.dim() {
            let idx = grid.index(k);
            let all_in = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .all(|(dx, dy)| grid.find(&[idx[0] + dx, idx[1] + dy]).is_some());
            if all_in {
                interior_rows += 1;
                let sum: f64 = mat.row(k).iter().sum();
                assert!(sum.abs() < 1e-12, "row {k}: {sum}");
            }
        }
        assert!(interior_rows > 10);
    }

    #[test]
    fn rejects_non_square_sizes() {
        let dom = DomainSpec::unit_square();
        let n = MultiIndex::new(vec![4, 8]).unwrap();
        let grid = domain_grid(&n, &dom).unwrap();
        let one: SpaceFn = Arc::new(|_: &[f64]| 1.0);
        assert!(matches!(assemble(&grid, &one), Err(Error::Config(_))));
    }

    #[test]
    fn padded_spectrum_is_spectrum_of_extension() {
        // multiset check: eigs(E(R(A))) = eigs(R(A)) ∪ {0}^defect
        let dom = DomainSpec::cusp();
        let n = MultiIndex::square(2, 10);
        let grid = Arc::new(domain_grid(&n, &dom).unwrap());
        let a = builtin_coefficient();
        let full = assemble(&grid, &a).unwrap();
        let omega = exhaustion_domain(&dom, 1.0).unwrap();
        let small = Arc::new(domain_grid(&n, &omega).unwrap());
        let map = SelectionMap::new(small.clone(), grid.clone()).unwrap();
        let b = crate::selection::restrict(&map, &full).unwrap();
        let ext = extend(&map, &b).unwrap();
        let direct = sym_eigenvalues(&ext, 1000).unwrap();
        let mut padded = sym_eigenvalues(&b, 1000).unwrap().values;
        padded.extend(std::iter::repeat_n(0.0, grid.dim() - small.dim()));
        padded.sort_by(f64::total_cmp);
        for (x, y) in direct.values.iter().zip(&padded) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn experiment_small_run_writes_outputs() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            m_list: vec![8, 12],
            t_list: vec![1.0, 2.0],
            theta_per_axis: 4,
            eig_cap: 1000,
            emit_svg: true,
        };
        let rep = run_experiment(tmp.path(), &cfg).unwrap();
        // |m|·|t| + |m| rows
        assert_eq!(rep.rows.len(), 2 * 2 + 2);
        assert!(tmp.path().join("w1_summary.csv").exists());
        assert!(tmp.path().join("eigenvalues_8_1.csv").exists());
        assert!(tmp.path().join("symbol_samples_12_inf.csv").exists());
        assert!(tmp.path().join("quantiles_8_inf.svg").exists());
        for r in &rep.rows {
            assert!(r.w1_eigs_vs_symbol.is_finite());
            if r.t == "inf" {
                assert_eq!(r.dim_defect, 0);
            }
        }
    }

    #[test]
    fn experiment_outputs_are_deterministic() {
        let run = |dir: &Path| {
            let cfg = ExperimentConfig {
                m_list: vec![8],
                t_list: vec![1.0],
                theta_per_axis: 4,
                eig_cap: 500,
                emit_svg: false,
            };
            run_experiment(dir, &cfg).unwrap();
        };
        let (t1, t2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run(t1.path());
        run(t2.path());
        for name in ["w1_summary.csv", "eigenvalues_8_1.csv", "symbol_samples_8_inf.csv"] {
            let a = fs::read(t1.path().join(name)).unwrap();
            let b = fs::read(t2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between runs");
        }
    }
}
