//! Fourier tables, multilevel Toeplitz matrices `T_n(f)`, diagonal sampling
//! matrices `D_n(a)` and direct reduced-Toeplitz assembly on domain grids.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, MultiIndex};

/// Evaluable frequency function `f(θ)` on `[−π,π]^d`.
pub type FreqFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
/// Evaluable space function `a(x)` on `Ω`.
pub type SpaceFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

// ---------------------------------------------------------------------------
// SymbolFn
// ---------------------------------------------------------------------------

/// A tracked canonical symbol `κ(x,θ)`, kept as a composable closure.
#[derive(Clone)]
pub struct SymbolFn {
    combined: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>,
    pub desc: String,
}

impl SymbolFn {
    pub fn new(
        combined: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>,
        desc: impl Into<String>,
    ) -> Self {
        SymbolFn { combined, desc: desc.into() }
    }

    /// Separable symbol `κ(x,θ) = a(x)·f(θ)` (real part of `f`).
    pub fn separable(a: SpaceFn, f: FreqFn, desc: impl Into<String>) -> Self {
        SymbolFn::new(Arc::new(move |x, th| a(x) * f(th).re), desc)
    }

    /// Pure frequency symbol `κ(x,θ) = f(θ)`.
    pub fn frequency(f: FreqFn, desc: impl Into<String>) -> Self {
        SymbolFn::new(Arc::new(move |_x, th| f(th).re), desc)
    }

    /// Pure space symbol `κ(x,θ) = a(x)`.
    pub fn space(a: SpaceFn, desc: impl Into<String>) -> Self {
        SymbolFn::new(Arc::new(move |x, _th| a(x)), desc)
    }

    pub fn constant(c: f64) -> Self {
        SymbolFn::new(Arc::new(move |_x, _th| c), format!("{c}"))
    }

    pub fn eval(&self, x: &[f64], theta: &[f64]) -> f64 {
        (self.combined)(x, theta)
    }

    /// `α·self + β·other`.
    pub fn add(&self, other: &SymbolFn, alpha: f64, beta: f64) -> SymbolFn {
        let a = self.combined.clone();
        let b = other.combined.clone();
        SymbolFn::new(
            Arc::new(move |x, th| alpha * a(x, th) + beta * b(x, th)),
            format!("({}*{} + {}*{})", alpha, self.desc, beta, other.desc),
        )
    }

    pub fn mul(&self, other: &SymbolFn) -> SymbolFn {
        let a = self.combined.clone();
        let b = other.combined.clone();
        SymbolFn::new(
            Arc::new(move |x, th| a(x, th) * b(x, th)),
            format!("({})*({})", self.desc, other.desc),
        )
    }

    /// Complex conjugate; the identity on real-valued symbols.
    pub fn conj(&self) -> SymbolFn {
        SymbolFn::new(self.combined.clone(), format!("conj({})", self.desc))
    }

    /// Pointwise pseudo-inverse `κ⁻¹` with `0 ↦ 0`.
    pub fn pinv(&self) -> SymbolFn {
        let a = self.combined.clone();
        SymbolFn::new(
            Arc::new(move |x, th| {
                let v = a(x, th);
                if v == 0.0 {
                    0.0
                } else {
                    1.0 / v
                }
            }),
            format!("pinv({})", self.desc),
        )
    }

    /// Multiply by the indicator of a domain (in the space variable).
    pub fn restrict_space(&self, domain: Arc<crate::grid::DomainSpec>) -> SymbolFn {
        let a = self.combined.clone();
        let name = domain.name.clone();
        SymbolFn::new(
            Arc::new(move |x, th| if domain.indicator(x) { a(x, th) } else { 0.0 }),
            format!("({})*ind({})", self.desc, name),
        )
    }
}

// ---------------------------------------------------------------------------
// FourierTable
// ---------------------------------------------------------------------------

/// Truncated table of Fourier coefficients `f_k`, `|k_j| <= cutoff_j`.
#[derive(Clone, Debug)]
pub struct FourierTable {
    pub cutoff: Vec<usize>,
    /// row-major over `k_j + cutoff_j`, axis 0 most significant
    data: Vec<Complex64>,
    pub source: String,
}

impl FourierTable {
    pub fn zero(cutoff: Vec<usize>, source: impl Into<String>) -> Self {
        let len = cutoff.iter().map(|&c| 2 * c + 1).product();
        FourierTable { cutoff, data: vec![Complex64::ZERO; len], source: source.into() }
    }

    pub fn d(&self) -> usize {
        self.cutoff.len()
    }

    fn offset(&self, k: &[i64]) -> Option<usize> {
        let mut off = 0usize;
        for (j, (&kj, &cj)) in k.iter().zip(&self.cutoff).enumerate() {
            if kj.unsigned_abs() as usize > cj {
                return None;
            }
            let _ = j;
            off = off * (2 * cj + 1) + (kj + cj as i64) as usize;
        }
        Some(off)
    }

    /// `f_k`, zero outside the cutoff.
    pub fn get(&self, k: &[i64]) -> Complex64 {
        match self.offset(k) {
            Some(off) => self.data[off],
            None => Complex64::ZERO,
        }
    }

    pub fn set(&mut self, k: &[i64], v: Complex64) {
        let off = self.offset(k).expect("k within cutoff");
        self.data[off] = v;
    }

    /// Max deviation from conjugate symmetry `f_{−k} = conj(f_k)`
    /// (zero within 1e−12 for real-valued generating functions).
    pub fn conj_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        self.for_each_k(|k, v| {
            let neg: Vec<i64> = k.iter().map(|&x| -x).collect();
            worst = worst.max((self.get(&neg) - v.conj()).norm());
        });
        worst
    }

    fn for_each_k(&self, mut f: impl FnMut(&[i64], Complex64)) {
        let d = self.d();
        let mut k: Vec<i64> = self.cutoff.iter().map(|&c| -(c as i64)).collect();
        'outer: loop {
            f(&k, self.get(&k));
            for j in (0..d).rev() {
                k[j] += 1;
                if k[j] <= self.cutoff[j] as i64 {
                    continue 'outer;
                }
                k[j] = -(self.cutoff[j] as i64);
            }
            break;
        }
    }

    /// JSON export: map `"k1,...,kd" → [re, im]` (sorted keys).
    pub fn to_json(&self) -> String {
        let mut map = BTreeMap::new();
        self.for_each_k(|k, v| {
            if v.norm() > 0.0 {
                let key: Vec<String> = k.iter().map(|x| x.to_string()).collect();
                map.insert(key.join(","), vec![v.re, v.im]);
            }
        });
        serde_json::to_string_pretty(&map).expect("serializable map")
    }
}

/// Fourier coefficients `f_k = (2π)^{-d} ∫ f(θ) e^{-i k·θ} dθ` computed by
/// the trapezoid rule on the uniform periodic grid, which is the discrete
/// Fourier transform and is exact for trigonometric polynomials of degree
/// `<= cutoff` once `quad_points >= 2·cutoff + 2` per axis.
pub fn fourier_coeffs(
    f: &dyn Fn(&[f64]) -> Complex64,
    cutoff: &[usize],
    quad_points: &[usize],
    source: impl Into<String>,
) -> Result<FourierTable> {
    if cutoff.len() != quad_points.len() || cutoff.is_empty() {
        return Err(Error::Config("cutoff/quad_points length mismatch".into()));
    }
    for (&c, &q) in cutoff.iter().zip(quad_points) {
        if q < 2 * c + 2 {
            return Err(Error::Config(format!(
                "quad_points {q} undersized for cutoff {c} (needs >= {})",
                2 * c + 2
            )));
        }
    }
    let d = cutoff.len();
    let mut table = FourierTable::zero(cutoff.to_vec(), source);
    // evaluate f on the periodic grid once
    let total: usize = quad_points.iter().product();
    let mut values = Vec::with_capacity(total);
    let mut q_idx = vec![0usize; d];
    let mut theta = vec![0.0; d];
    'eval: loop {
        for j in 0..d {
            theta[j] = -PI + 2.0 * PI * q_idx[j] as f64 / quad_points[j] as f64;
        }
        values.push(f(&theta));
        for j in (0..d).rev() {
            q_idx[j] += 1;
            if q_idx[j] < quad_points[j] {
                continue 'eval;
            }
            q_idx[j] = 0;
        }
        break;
    }
    // accumulate each coefficient
    let mut k: Vec<i64> = cutoff.iter().map(|&c| -(c as i64)).collect();
    'coef: loop {
        let mut acc = Complex64::ZERO;
        let mut q_idx = vec![0usize; d];
        for v in &values {
            let mut phase = 0.0;
            for j in 0..d {
                let th = -PI + 2.0 * PI * q_idx[j] as f64 / quad_points[j] as f64;
                phase -= k[j] as f64 * th;
            }
            acc += v * Complex64::from_polar(1.0, phase);
            for j in (0..d).rev() {
                q_idx[j] += 1;
                if q_idx[j] < quad_points[j] {
                    break;
                }
                q_idx[j] = 0;
            }
        }
        // snap quadrature round-off to an exact zero so trig polynomials
        // keep their true sparsity pattern
        let mut coeff = acc / total as f64;
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if coeff.re.abs() <= 1e-14 * scale {
            coeff.re = 0.0;
        }
        if coeff.im.abs() <= 1e-14 * scale {
            coeff.im = 0.0;
        }
        table.set(&k, coeff);
        for j in (0..d).rev() {
            k[j] += 1;
            if k[j] <= cutoff[j] as i64 {
                continue 'coef;
            }
            k[j] = -(cutoff[j] as i64);
        }
        break;
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Matrix generators
// ---------------------------------------------------------------------------

/// Decode the lex position of a multi-index `1 ⪯ i ⪯ n` (axis 0 most
/// significant).
fn decode(mut pos: usize, n: &MultiIndex) -> Vec<i64> {
    let d = n.d();
    let mut out = vec![0i64; d];
    for j in (0..d).rev() {
        let nj = n.entries()[j];
        out[j] = (pos % nj) as i64 + 1;
        pos /= nj;
    }
    out
}

/// The multilevel Toeplitz matrix `T_n(f) = [f_{i−j}]` under lexicographic
/// ordering of the index set `{1 ⪯ i ⪯ n}`.
pub fn toeplitz(n: &MultiIndex, table: &FourierTable) -> Result<DMatrix<Complex64>> {
    if n.d() != table.d() {
        return Err(Error::Dimension(format!(
            "multi-index d={} vs table d={}",
            n.d(),
            table.d()
        )));
    }
    let size = n.n_total();
    let idx: Vec<Vec<i64>> = (0..size).map(|p| decode(p, n)).collect();
    let mut diff = vec![0i64; n.d()];
    Ok(DMatrix::from_fn(size, size, |r, c| {
        for j in 0..n.d() {
            diff[j] = idx[r][j] - idx[c][j];
        }
        table.get(&diff)
    }))
}

/// Real multilevel Toeplitz matrix; requires (and checks) that the table
/// coefficients have negligible imaginary parts after symmetrization.
pub fn toeplitz_real(n: &MultiIndex, table: &FourierTable) -> Result<DMatrix<f64>> {
    let t = toeplitz(n, table)?;
    to_real(t)
}

/// The reduced Toeplitz matrix on a domain grid: entry `(p,q) = f_{n·(p−q)}`.
/// Coincides with `Π T_{Q}(f) Πᵀ` for any enclosing hypercube `Q`, without
/// forming the big matrix.
pub fn reduced_toeplitz(grid: &Grid, table: &FourierTable) -> Result<DMatrix<Complex64>> {
    if grid.n.d() != table.d() {
        return Err(Error::Dimension(format!(
            "grid d={} vs table d={}",
            grid.n.d(),
            table.d()
        )));
    }
    let size = grid.dim();
    let mut diff = vec![0i64; grid.n.d()];
    Ok(DMatrix::from_fn(size, size, |r, c| {
        let (ir, ic) = (grid.index(r), grid.index(c));
        for j in 0..diff.len() {
            diff[j] = ir[j] - ic[j];
        }
        table.get(&diff)
    }))
}

pub fn reduced_toeplitz_real(grid: &Grid, table: &FourierTable) -> Result<DMatrix<f64>> {
    let t = reduced_toeplitz(grid, table)?;
    to_real(t)
}

fn to_real(m: DMatrix<Complex64>) -> Result<DMatrix<f64>> {
    let worst = m.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    if worst > 1e-12 {
        return Err(Error::Evaluation(format!(
            "matrix has imaginary parts up to {worst:.3e}; not real"
        )));
    }
    Ok(m.map(|z| z.re))
}

/// The diagonal sampling matrix `D(a) = diag(a(p))` over the grid points in
/// lexicographic order, returned as the vector of diagonal entries.
pub fn diag_sampling(grid: &Grid, a: &dyn Fn(&[f64]) -> f64) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(grid.dim());
    for k in 0..grid.dim() {
        let p = grid.point(k);
        let v = a(&p);
        if !v.is_finite() {
            return Err(Error::Evaluation(format!(
                "coefficient not finite at point {p:?}"
            )));
        }
        out[k] = v;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Symbol registry
// ---------------------------------------------------------------------------

/// Registered frequency functions: `(dimension, f(θ))`.
pub fn builtin_frequency(name: &str) -> Result<(usize, FreqFn)> {
    match name {
        "laplace_1d" => Ok((
            1,
            Arc::new(|th: &[f64]| Complex64::new(2.0 - 2.0 * th[0].cos(), 0.0)),
        )),
        "laplace_2d" => Ok((
            2,
            Arc::new(|th: &[f64]| {
                Complex64::new(4.0 - 2.0 * th[0].cos() - 2.0 * th[1].cos(), 0.0)
            }),
        )),
        "shift_1d" => Ok((1, Arc::new(|th: &[f64]| Complex64::from_polar(1.0, th[0])))),
        "one_1d" => Ok((1, Arc::new(|_: &[f64]| Complex64::ONE))),
        "one_2d" => Ok((2, Arc::new(|_: &[f64]| Complex64::ONE))),
        other => Err(Error::Config(format!("unknown symbol '{other}'"))),
    }
}

pub fn builtin_frequency_names() -> &'static [&'static str] {
    &["laplace_1d", "laplace_2d", "shift_1d", "one_1d", "one_2d"]
}

/// Exact Fourier table of a registered symbol (trig polynomials and the
/// complex exponential have closed-form coefficients; computed by the DFT
/// rule, which is exact for them).
pub fn builtin_table(name: &str, cutoff: usize) -> Result<FourierTable> {
    let (d, f) = builtin_frequency(name)?;
    let cut = vec![cutoff; d];
    let quad = vec![2 * cutoff + 2; d];
    fourier_coeffs(&*f, &cut, &quad, name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{domain_grid, DomainSpec, Hypercube};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn fourier_laplace_1d() {
        let t = builtin_table("laplace_1d", 2).unwrap();
        assert!(close(t.get(&[0]), Complex64::new(2.0, 0.0), 1e-13));
        assert!(close(t.get(&[1]), Complex64::new(-1.0, 0.0), 1e-13));
        assert!(close(t.get(&[-1]), Complex64::new(-1.0, 0.0), 1e-13));
        assert!(close(t.get(&[2]), Complex64::ZERO, 1e-13));
        assert!(t.conj_symmetry_defect() < 1e-12);
    }

    #[test]
    fn fourier_constant() {
        let t = builtin_table("one_1d", 3).unwrap();
        assert!(close(t.get(&[0]), Complex64::ONE, 1e-13));
        for k in [-3i64, -2, -1, 1, 2, 3] {
            assert!(close(t.get(&[k]), Complex64::ZERO, 1e-13));
        }
    }

    #[test]
    fn fourier_laplace_2d() {
        let t = builtin_table("laplace_2d", 1).unwrap();
        assert!(close(t.get(&[0, 0]), Complex64::new(4.0, 0.0), 1e-13));
        for k in [[1i64, 0], [-1, 0], [0, 1], [0, -1]] {
            assert!(close(t.get(&k), Complex64::new(-1.0, 0.0), 1e-13));
        }
        assert!(close(t.get(&[1, 1]), Complex64::ZERO, 1e-13));
    }

    #[test]
    fn fourier_shift() {
        let t = builtin_table("shift_1d", 2).unwrap();
        assert!(close(t.get(&[1]), Complex64::ONE, 1e-13));
        for k in [-2i64, -1, 0, 2] {
            assert!(close(t.get(&[k]), Complex64::ZERO, 1e-13));
        }
    }

    #[test]
    fn quadrature_precondition() {
        let (_, f) = builtin_frequency("laplace_1d").unwrap();
        assert!(fourier_coeffs(&*f, &[2], &[5], "x").is_err());
    }

    #[test]
    fn toeplitz_tridiagonal() {
        let n = MultiIndex::new(vec![3]).unwrap();
        let t = builtin_table("laplace_1d", 2).unwrap();
        let m = toeplitz_real(&n, &t).unwrap();
        let want = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0],
        );
        assert!((m - want).abs().max() < 1e-13);
    }

    #[test]
    fn toeplitz_identity_from_one() {
        let n = MultiIndex::new(vec![3]).unwrap();
        let t = builtin_table("one_1d", 1).unwrap();
        let m = toeplitz_real(&n, &t).unwrap();
        assert!((m - DMatrix::identity(3, 3)).abs().max() < 1e-13);
    }

    #[test]
    fn toeplitz_2d_block_structure() {
        let n = MultiIndex::new(vec![2, 2]).unwrap();
        let t = builtin_table("laplace_2d", 1).unwrap();
        let m = toeplitz_real(&n, &t).unwrap();
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[
                4.0, -1.0, -1.0, 0.0, //
                -1.0, 4.0, 0.0, -1.0, //
                -1.0, 0.0, 4.0, -1.0, //
                0.0, -1.0, -1.0, 4.0,
            ],
        );
        assert!((m - want).abs().max() < 1e-13);
    }

    #[test]
    fn reduced_toeplitz_is_interior_laplacian() {
        // (0,1)², n=(4,4): the 9-point grid gives the classical 5-point
        // Laplacian of the 3×3 interior lattice
        let g = domain_grid(&MultiIndex::square(2, 4), &DomainSpec::unit_square()).unwrap();
        let t = builtin_table("laplace_2d", 1).unwrap();
        let m = reduced_toeplitz_real(&g, &t).unwrap();
        assert_eq!(m.nrows(), 9);
        // oracle: explicit Π T_{(4,4)} Πᵀ
        let big = toeplitz_real(&MultiIndex::square(2, 4), &t).unwrap();
        let hg = crate::grid::hypercube_grid(&MultiIndex::square(2, 4), &Hypercube::unit(2))
            .unwrap();
        let positions: Vec<usize> =
            (0..g.dim()).map(|k| hg.find(g.index(k)).unwrap()).collect();
        for r in 0..9 {
            for c in 0..9 {
                assert_eq!(m[(r, c)], big[(positions[r], positions[c])]);
            }
        }
        // symmetry is exact for real even f
        assert_eq!((m.clone() - m.transpose()).abs().max(), 0.0);
    }

    #[test]
    fn diag_sampling_examples() {
        let g = crate::grid::hypercube_grid(
            &MultiIndex::new(vec![2]).unwrap(),
            &Hypercube::unit(1),
        )
        .unwrap();
        let d = diag_sampling(&g, &|p: &[f64]| p[0]).unwrap();
        assert_eq!(d.as_slice(), &[0.5, 1.0]);

        let g9 = domain_grid(&MultiIndex::square(2, 4), &DomainSpec::unit_square()).unwrap();
        let ind = diag_sampling(&g9, &|p: &[f64]| if p[0] < 0.5 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(ind.iter().filter(|&&v| v == 1.0).count(), 3);
    }

    #[test]
    fn diag_sampling_rejects_nonfinite() {
        let g = domain_grid(&MultiIndex::square(2, 4), &DomainSpec::unit_square()).unwrap();
        assert!(diag_sampling(&g, &|p: &[f64]| 1.0 / (p[0] - p[0])).is_err());
    }

    #[test]
    fn symbol_combinators() {
        let s = SymbolFn::constant(2.0);
        let t = SymbolFn::constant(3.0);
        assert_eq!(s.add(&t, 1.0, 2.0).eval(&[0.0], &[0.0]), 8.0);
        assert_eq!(s.mul(&t).eval(&[0.0], &[0.0]), 6.0);
        assert_eq!(s.pinv().eval(&[0.0], &[0.0]), 0.5);
        assert_eq!(SymbolFn::constant(0.0).pinv().eval(&[0.0], &[0.0]), 0.0);
    }
}
