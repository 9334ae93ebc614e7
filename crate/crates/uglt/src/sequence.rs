//! Symbol-tracked matrix-sequences and their algebra.
//!
//! A [`GltSequence`] is a lazy family `n ↦ A_n` of matrices on `Θ_{n,Ω}`
//! bundled with its tracked canonical symbol `κ(x,θ)` and a provenance tree.
//! Reduced sequences arise by restriction from a covering domain;
//! g.a.c.s. certificates measure how well the restriction to an exhaustion
//! step `Ω_t` approximates the full sequence (rank of the correction,
//! dimension defect, zero norm correction).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{
    diag_sampling, reduced_toeplitz_real, FourierTable, SpaceFn, SymbolFn,
};
use crate::grid::{domain_grid, exhaustion_domain, DomainSpec, MultiIndex};
use crate::selection::{extend_diag, restrict, restrict_diag, SelectionMap};
use crate::spectral::{
    diag_singular_values, p_of_values, pm_metric, dense_symbol_sample, singular_values,
    SpectralMeasure,
};

/// Relative singular-value cutoff of the Moore–Penrose pseudo-inverse.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;
/// Relative cutoff used when counting the numerical rank of corrections.
const RANK_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// MatrixRep
// ---------------------------------------------------------------------------

/// Concrete matrix of one sequence member.  Diagonal members keep only
/// their diagonal so large diagonal sequences never materialize `dim²`
/// storage.
#[derive(Clone, Debug)]
pub enum MatrixRep {
    Dense(DMatrix<f64>),
    Diag(DVector<f64>),
}

impl MatrixRep {
    pub fn dim(&self) -> usize {
        match self {
            MatrixRep::Dense(m) => m.nrows(),
            MatrixRep::Diag(d) => d.len(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            MatrixRep::Dense(m) => m.clone(),
            MatrixRep::Diag(d) => DMatrix::from_diagonal(d),
        }
    }

    pub fn add_scaled(&self, alpha: f64, other: &MatrixRep, beta: f64) -> Result<MatrixRep> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("matrix sum: size mismatch".into()));
        }
        Ok(match (self, other) {
            (MatrixRep::Diag(a), MatrixRep::Diag(b)) => {
                MatrixRep::Diag(a * alpha + b * beta)
            }
            _ => MatrixRep::Dense(self.to_dense() * alpha + other.to_dense() * beta),
        })
    }

    pub fn mul(&self, other: &MatrixRep) -> Result<MatrixRep> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("matrix product: size mismatch".into()));
        }
        Ok(match (self, other) {
            (MatrixRep::Diag(a), MatrixRep::Diag(b)) => {
                MatrixRep::Diag(a.component_mul(b))
            }
            (MatrixRep::Diag(a), MatrixRep::Dense(b)) => {
                let mut m = b.clone();
                for (r, mut row) in m.row_iter_mut().enumerate() {
                    row *= a[r];
                }
                MatrixRep::Dense(m)
            }
            (MatrixRep::Dense(a), MatrixRep::Diag(b)) => {
                let mut m = a.clone();
                for (c, mut col) in m.column_iter_mut().enumerate() {
                    col *= b[c];
                }
                MatrixRep::Dense(m)
            }
            (MatrixRep::Dense(a), MatrixRep::Dense(b)) => MatrixRep::Dense(a * b),
        })
    }

    pub fn transpose(&self) -> MatrixRep {
        match self {
            MatrixRep::Dense(m) => MatrixRep::Dense(m.transpose()),
            MatrixRep::Diag(d) => MatrixRep::Diag(d.clone()),
        }
    }

    /// Moore–Penrose pseudo-inverse; singular values below
    /// `sv_tol · σ_max` are treated as zero.
    pub fn pinv(&self, sv_tol: f64) -> Result<MatrixRep> {
        match self {
            MatrixRep::Diag(d) => {
                let smax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                Ok(MatrixRep::Diag(DVector::from_iterator(
                    d.len(),
                    d.iter().map(|&v| {
                        if v.abs() <= sv_tol * smax {
                            0.0
                        } else {
                            1.0 / v
                        }
                    }),
                )))
            }
            MatrixRep::Dense(m) => {
                let svd = m.clone().svd(true, true);
                let smax = svd.singular_values.max();
                let eps = sv_tol * smax;
                let pinv = svd
                    .pseudo_inverse(eps)
                    .map_err(|e| Error::Evaluation(format!("pinv: {e}")))?;
                Ok(MatrixRep::Dense(pinv))
            }
        }
    }

    pub fn singular_values(&self, cap: usize) -> Result<SpectralMeasure> {
        match self {
            MatrixRep::Diag(d) => Ok(diag_singular_values(d.as_slice())),
            MatrixRep::Dense(m) => singular_values(m, cap),
        }
    }

    pub fn sym_eigenvalues(&self, cap: usize) -> Result<SpectralMeasure> {
        match self {
            MatrixRep::Diag(d) => {
                Ok(SpectralMeasure::eigenvalues(d.iter().copied().collect()))
            }
            MatrixRep::Dense(m) => crate::spectral::sym_eigenvalues(m, cap),
        }
    }
}

// ---------------------------------------------------------------------------
// GltSequence
// ---------------------------------------------------------------------------

/// Construction tree of a sequence, exportable as JSON.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Provenance {
    Toeplitz { source: String, domain: String, t: String },
    Diag { source: String, domain: String, t: String },
    Restrict { to: String, of: Arc<Provenance> },
    Add { alpha: f64, beta: f64, left: Arc<Provenance>, right: Arc<Provenance> },
    Mul { left: Arc<Provenance>, right: Arc<Provenance> },
    Adjoint { of: Arc<Provenance> },
    Pinv { sv_tol: f64, of: Arc<Provenance> },
    Discretization { scheme: String, domain: String },
}

type Generator = Arc<dyn Fn(&MultiIndex) -> Result<MatrixRep> + Send + Sync>;

/// A lazy matrix-sequence over the grids of one domain, with its tracked
/// symbol.
#[derive(Clone)]
pub struct GltSequence {
    pub domain: Arc<DomainSpec>,
    generator: Generator,
    pub symbol: SymbolFn,
    pub hermitian: bool,
    pub provenance: Arc<Provenance>,
}

impl GltSequence {
    pub fn new(
        domain: Arc<DomainSpec>,
        generator: Generator,
        symbol: SymbolFn,
        hermitian: bool,
        provenance: Provenance,
    ) -> GltSequence {
        GltSequence {
            domain,
            generator,
            symbol,
            hermitian,
            provenance: Arc::new(provenance),
        }
    }

    /// The `n`-th member `A_n` (size `d_n^Ω`).
    pub fn matrix(&self, n: &MultiIndex) -> Result<MatrixRep> {
        let m = (self.generator)(n)?;
        if self.hermitian {
            if let MatrixRep::Dense(d) = &m {
                debug_assert!(
                    (d - d.transpose()).abs().max() <= 1e-12,
                    "hermitian flag violated"
                );
            }
        }
        Ok(m)
    }

    pub fn provenance_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&*self.provenance)?)
    }
}

fn t_label(t: f64) -> String {
    if t.is_infinite() {
        "inf".into()
    } else {
        format!("{t}")
    }
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// Unbounded (reduced, for finite `t`) Toeplitz sequence: for finite `t`
/// the reduced Toeplitz matrix on `Θ_{n,Ω_t}` extended by zero into
/// `Θ_{n,Ω}`; for `t = ∞` the entries `f_{n(p−q)}` over all of `Θ_{n,Ω}`.
/// The tracked symbol is `f(θ)·𝟙_{Ω_t}(x)` (resp. `f(θ)`).
pub fn unbounded_toeplitz(
    table: &FourierTable,
    domain: &Arc<DomainSpec>,
    t: f64,
) -> Result<GltSequence> {
    let hermitian = table.conj_symmetry_defect() <= 1e-12;
    let tab = Arc::new(table.clone());
    let freq_tab = tab.clone();
    let freq = move |theta: &[f64]| -> f64 {
        // f(θ) = Σ f_k e^{i k·θ}, real part (real generating functions)
        let mut acc = num_complex::Complex64::ZERO;
        freq_tab.for_each_coefficient(|k, v| {
            let phase: f64 = k
                .iter()
                .zip(theta)
                .map(|(&kj, &tj)| kj as f64 * tj)
                .sum();
            acc += v * num_complex::Complex64::from_polar(1.0, phase);
        });
        acc.re
    };
    let symbol_domain = domain.clone();
    let (symbol, gen): (SymbolFn, Generator) = if t.is_infinite() {
        let symbol = SymbolFn::new(
            Arc::new(move |_x, th| freq(th)),
            format!("{}(θ)", table.source),
        );
        let dom = domain.clone();
        let tab2 = tab.clone();
        let gen: Generator = Arc::new(move |n| {
            let grid = domain_grid(n, &dom)?;
            Ok(MatrixRep::Dense(reduced_toeplitz_real(&grid, &tab2)?))
        });
        (symbol, gen)
    } else {
        let omega_t = exhaustion_domain(domain, t)?;
        let sym_cap = omega_t.clone();
        let symbol = SymbolFn::new(
            Arc::new(move |x, th| if sym_cap.indicator(x) { freq(th) } else { 0.0 }),
            format!("{}(θ)·ind({}_t{t})", table.source, symbol_domain.name),
        );
        let dom = domain.clone();
        let tab2 = tab.clone();
        let gen: Generator = Arc::new(move |n| {
            let big = Arc::new(domain_grid(n, &dom)?);
            let omega_t = exhaustion_domain(&dom, t)?;
            let small = Arc::new(domain_grid(n, &omega_t)?);
            let map = SelectionMap::new(small.clone(), big.clone())?;
            let b = reduced_toeplitz_real(&small, &tab2)?;
            Ok(MatrixRep::Dense(crate::selection::extend(&map, &b)?))
        });
        (symbol, gen)
    };
    Ok(GltSequence::new(
        domain.clone(),
        gen,
        symbol,
        hermitian,
        Provenance::Toeplitz {
            source: table.source.clone(),
            domain: domain.name.clone(),
            t: t_label(t),
        },
    ))
}

/// Unbounded diagonal sequence: samples of `a` over `Θ_{n,Ω_t}` extended by
/// zero (finite `t`) or over the whole grid (`t = ∞`); symbol `a·𝟙_{Ω_t}`
/// (resp. `a`).
pub fn unbounded_diag(
    a: SpaceFn,
    name: &str,
    domain: &Arc<DomainSpec>,
    t: f64,
) -> Result<GltSequence> {
    let (symbol, gen): (SymbolFn, Generator) = if t.is_infinite() {
        let af = a.clone();
        let symbol = SymbolFn::space(a.clone(), format!("{name}(x)"));
        let dom = domain.clone();
        let gen: Generator = Arc::new(move |n| {
            let grid = domain_grid(n, &dom)?;
            Ok(MatrixRep::Diag(diag_sampling(&grid, &*af)?))
        });
        (symbol, gen)
    } else {
        let omega_t = exhaustion_domain(domain, t)?;
        let af = a.clone();
        let symbol =
            SymbolFn::space(a.clone(), format!("{name}(x)")).restrict_space(omega_t);
        let dom = domain.clone();
        let gen: Generator = Arc::new(move |n| {
            let big = Arc::new(domain_grid(n, &dom)?);
            let omega_t = exhaustion_domain(&dom, t)?;
            let small = Arc::new(domain_grid(n, &omega_t)?);
            let map = SelectionMap::new(small.clone(), big.clone())?;
            let d = diag_sampling(&small, &*af)?;
            Ok(MatrixRep::Diag(extend_diag(&map, &d)?))
        });
        (symbol, gen)
    };
    Ok(GltSequence::new(
        domain.clone(),
        gen,
        symbol,
        true,
        Provenance::Diag {
            source: name.into(),
            domain: domain.name.clone(),
            t: t_label(t),
        },
    ))
}

/// The identity sequence `{I_{d_n^Ω}}_n` (symbol 1).
pub fn identity_sequence(domain: &Arc<DomainSpec>) -> Result<GltSequence> {
    unbounded_diag(Arc::new(|_: &[f64]| 1.0), "one", domain, f64::INFINITY)
}

/// Restriction of a sequence to a contained domain: the generator becomes
/// `n ↦ Π A_n Πᵀ` and the symbol is restricted to `Ω × [−π,π]^d`.
pub fn reduced_sequence(
    base: &GltSequence,
    omega: &Arc<DomainSpec>,
) -> Result<GltSequence> {
    let base_dom = base.domain.clone();
    let omega_c = omega.clone();
    let base_gen = base.generator.clone();
    let gen: Generator = Arc::new(move |n| {
        let big = Arc::new(domain_grid(n, &base_dom)?);
        let small = Arc::new(domain_grid(n, &omega_c)?);
        let map = SelectionMap::new(small, big)?;
        match base_gen(n)? {
            MatrixRep::Dense(m) => Ok(MatrixRep::Dense(restrict(&map, &m)?)),
            MatrixRep::Diag(d) => Ok(MatrixRep::Diag(restrict_diag(&map, &d)?)),
        }
    });
    // symbols agree on Ω × [−π,π]^d; evaluation outside Ω is never sampled
    let symbol = SymbolFn::new(
        {
            let s = base.symbol.clone();
            Arc::new(move |x: &[f64], th: &[f64]| s.eval(x, th))
        },
        format!("({})|{}", base.symbol.desc, omega.name),
    );
    Ok(GltSequence::new(
        omega.clone(),
        gen,
        symbol,
        base.hermitian,
        Provenance::Restrict {
            to: omega.name.clone(),
            of: base.provenance.clone(),
        },
    ))
}

// ---------------------------------------------------------------------------
// Algebra
// ---------------------------------------------------------------------------

fn check_same_domain(a: &GltSequence, b: &GltSequence) -> Result<()> {
    if a.domain.name != b.domain.name {
        return Err(Error::Dimension(format!(
            "sequences over different domains: '{}' vs '{}'",
            a.domain.name, b.domain.name
        )));
    }
    Ok(())
}

/// `α·a + β·b`, with symbol `α f + β g`.
pub fn seq_add(a: &GltSequence, b: &GltSequence, alpha: f64, beta: f64) -> Result<GltSequence> {
    check_same_domain(a, b)?;
    let (ga, gb) = (a.generator.clone(), b.generator.clone());
    let gen: Generator =
        Arc::new(move |n| ga(n)?.add_scaled(alpha, &gb(n)?, beta));
    Ok(GltSequence::new(
        a.domain.clone(),
        gen,
        a.symbol.add(&b.symbol, alpha, beta),
        a.hermitian && b.hermitian,
        Provenance::Add {
            alpha,
            beta,
            left: a.provenance.clone(),
            right: b.provenance.clone(),
        },
    ))
}

/// `a·b`, with symbol `f·g`.  The result is flagged Hermitian only when the
/// factors commute structurally (two diagonal sequences).
pub fn seq_mul(a: &GltSequence, b: &GltSequence) -> Result<GltSequence> {
    check_same_domain(a, b)?;
    let (ga, gb) = (a.generator.clone(), b.generator.clone());
    let gen: Generator = Arc::new(move |n| ga(n)?.mul(&gb(n)?));
    let both_diag = matches!(&*a.provenance, Provenance::Diag { .. })
        && matches!(&*b.provenance, Provenance::Diag { .. });
    Ok(GltSequence::new(
        a.domain.clone(),
        gen,
        a.symbol.mul(&b.symbol),
        a.hermitian && b.hermitian && both_diag,
        Provenance::Mul {
            left: a.provenance.clone(),
            right: b.provenance.clone(),
        },
    ))
}

/// Conjugate transpose per member; symbol conjugated.
pub fn seq_adjoint(a: &GltSequence) -> GltSequence {
    let ga = a.generator.clone();
    let gen: Generator = Arc::new(move |n| Ok(ga(n)?.transpose()));
    GltSequence::new(
        a.domain.clone(),
        gen,
        a.symbol.conj(),
        a.hermitian,
        Provenance::Adjoint { of: a.provenance.clone() },
    )
}

/// Moore–Penrose pseudo-inverse per member; symbol `f⁻¹` (with `0 ↦ 0`).
pub fn seq_pinv(a: &GltSequence, sv_tol: f64) -> GltSequence {
    let ga = a.generator.clone();
    let gen: Generator = Arc::new(move |n| ga(n)?.pinv(sv_tol));
    GltSequence::new(
        a.domain.clone(),
        gen,
        a.symbol.pinv(),
        a.hermitian,
        Provenance::Pinv { sv_tol, of: a.provenance.clone() },
    )
}

// ---------------------------------------------------------------------------
// g.a.c.s. decomposition
// ---------------------------------------------------------------------------

/// Certificate of one g.a.c.s. decomposition
/// `A_n = E(B_{n,t}) + S_{n,t}` along the canonical exhaustion.
#[derive(Debug, Clone, Serialize)]
pub struct GacsCertificate {
    pub t: f64,
    /// `m_{n,t} = d_n^Ω − d_n^{Ω_t}`
    pub dim_defect: usize,
    /// exact numerical rank of the correction `S_{n,t}`
    pub rank_correction: usize,
    /// `‖N_{n,t}‖₂` — zero by construction for restriction approximants
    pub norm_correction: f64,
    /// dimension-defect rate `m(t) = dim_defect / d_n^Ω`
    pub m_rate: f64,
    /// rank rate `c(t) = rank_correction / d_n^Ω`
    pub c_rate: f64,
    /// norm rate `ω(t)`
    pub omega_rate: f64,
}

/// Decompose `A_n = E(R(A_n)) + S_{n,t}` along `Ω_t` and certify the
/// correction: `rank(S_{n,t}) <= 2·dim_defect` and `N_{n,t} = 0`.
///
/// The rank of `S` is computed exactly from its low-rank block structure
/// (after permuting the selected positions first, `S = [[0,B],[C,D]]`),
/// via the 2m×2m symmetric problem `W^{1/2} Z W^{1/2}` whose nonzero
/// eigenvalues are the squared nonzero singular values of `S` — no
/// `dim²`-sized factorization is needed.
pub fn gacs_decompose(
    seq: &GltSequence,
    t: f64,
    n: &MultiIndex,
) -> Result<(MatrixRep, GacsCertificate)> {
    let big = Arc::new(domain_grid(n, &seq.domain)?);
    let omega_t = exhaustion_domain(&seq.domain, t)?;
    let small = Arc::new(domain_grid(n, &omega_t)?);
    let map = SelectionMap::new(small.clone(), big.clone())?;
    let a = seq.matrix(n)?;
    if a.dim() != big.dim() {
        return Err(Error::Dimension(format!(
            "sequence member has dim {}, grid has {}",
            a.dim(),
            big.dim()
        )));
    }
    let defect = big.dim() - small.dim();
    let (b, rank) = match &a {
        MatrixRep::Diag(d) => {
            let b = restrict_diag(&map, d)?;
            // S is diagonal, supported on the defect positions
            let selected: std::collections::HashSet<usize> =
                map.positions().iter().copied().collect();
            let rank = (0..big.dim())
                .filter(|k| !selected.contains(k) && d[*k] != 0.0)
                .count();
            (MatrixRep::Diag(b), rank)
        }
        MatrixRep::Dense(m) => {
            let b = restrict(&map, m)?;
            let rank = if defect == 0 {
                0
            } else {
                correction_rank(m, map.positions(), big.dim())
            };
            (MatrixRep::Dense(b), rank)
        }
    };
    let dn = big.dim() as f64;
    let cert = GacsCertificate {
        t,
        dim_defect: defect,
        rank_correction: rank,
        norm_correction: 0.0,
        m_rate: defect as f64 / dn,
        c_rate: rank as f64 / dn,
        omega_rate: 0.0,
    };
    Ok((b, cert))
}

/// Numerical rank of `S = A − E(R(A))` from the blocks
/// `B = A[P,D]`, `C = A[D,P]`, `Dd = A[D,D]` (P = selected positions,
/// D = defect positions, |D| = m):  writing `S = e_D·[C Dd] + [B;0]·e_Dᵀ`
/// the nonzero singular values of `S` squared are the nonzero eigenvalues
/// of `W^{1/2} Z W^{1/2}` with `W = blockdiag(I_m, BᵀB)` and
/// `Z = [[CCᵀ + Dd·Ddᵀ, Dd],[Ddᵀ, I_m]]`.
fn correction_rank(a: &DMatrix<f64>, positions: &[usize], big_dim: usize) -> usize {
    let selected: std::collections::HashSet<usize> = positions.iter().copied().collect();
    let d_set: Vec<usize> = (0..big_dim).filter(|k| !selected.contains(k)).collect();
    let p_set = positions;
    let m = d_set.len();
    let p = p_set.len();

    let b = DMatrix::from_fn(p, m, |r, c| a[(p_set[r], d_set[c])]);
    let c = DMatrix::from_fn(m, p, |r, c2| a[(d_set[r], p_set[c2])]);
    let dd = DMatrix::from_fn(m, m, |r, c2| a[(d_set[r], d_set[c2])]);

    let btb = b.transpose() * &b;
    let ggt = &c * c.transpose() + &dd * dd.transpose();

    // W^{1/2} = blockdiag(I, (BᵀB)^{1/2})
    let eig = SymmetricEigen::new(btb);
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let btb_sqrt =
        &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();

    let mut z = DMatrix::<f64>::zeros(2 * m, 2 * m);
    z.view_mut((0, 0), (m, m)).copy_from(&ggt);
    z.view_mut((0, m), (m, m)).copy_from(&dd);
    z.view_mut((m, 0), (m, m)).copy_from(&dd.transpose());
    z.view_mut((m, m), (m, m)).copy_from(&DMatrix::identity(m, m));

    let mut w_sqrt = DMatrix::<f64>::identity(2 * m, 2 * m);
    w_sqrt.view_mut((m, m), (m, m)).copy_from(&btb_sqrt);

    let k = &w_sqrt * z * &w_sqrt;
    let k = (&k + k.transpose()) * 0.5;
    let lambdas = k.symmetric_eigenvalues();
    let lmax = lambdas.iter().fold(0.0f64, |acc, &v| acc.max(v));
    if lmax <= 0.0 {
        return 0;
    }
    lambdas
        .iter()
        .filter(|&&v| v > lmax * RANK_TOL * RANK_TOL)
        .count()
}

// ---------------------------------------------------------------------------
// Profiles and isometry
// ---------------------------------------------------------------------------

/// Per-`n` values of `p(A_n − B_n)`; the last entry doubles as the
/// finite-scale limsup proxy for `d_acs`.
pub fn acs_distance_profile(
    a: &GltSequence,
    b: &GltSequence,
    n_list: &[MultiIndex],
    svd_cap: usize,
) -> Result<Vec<(MultiIndex, f64)>> {
    check_same_domain(a, b)?;
    let mut out = Vec::with_capacity(n_list.len());
    for n in n_list {
        let diff = a.matrix(n)?.add_scaled(1.0, &b.matrix(n)?, -1.0)?;
        let sv = diff.singular_values(svd_cap)?;
        out.push((n.clone(), p_of_values(&sv.values)));
    }
    Ok(out)
}

/// Isometry diagnostic between the a.c.s. pseudo-metric of the sequence and
/// the measure pseudo-metric of its symbol.
#[derive(Debug, Clone, Serialize)]
pub struct IsometryReport {
    pub d_acs_profile: Vec<(MultiIndex, f64)>,
    pub d_m_value: f64,
    /// `|p(A_n) − p_m(κ)|` at the largest `n`
    pub gap: f64,
}

/// Compute the `p`-profile of the sequence against the zero sequence and
/// `p_m` of the tracked symbol on a dense `n`-independent sample.
pub fn isometry_check(
    seq: &GltSequence,
    n_list: &[MultiIndex],
    svd_cap: usize,
    space_per_axis: usize,
    theta_per_axis: usize,
) -> Result<IsometryReport> {
    let mut profile = Vec::with_capacity(n_list.len());
    for n in n_list {
        let m = seq.matrix(n)?;
        let sv = m.singular_values(svd_cap)?;
        profile.push((n.clone(), p_of_values(&sv.values)));
    }
    let sample =
        dense_symbol_sample(&seq.symbol, &seq.domain, space_per_axis, theta_per_axis)?;
    let d_m = pm_metric(&sample)?;
    let gap = match profile.last() {
        Some((_, p)) => (p - d_m).abs(),
        None => d_m,
    };
    Ok(IsometryReport { d_acs_profile: profile, d_m_value: d_m, gap })
}

/// Seeded pseudo-random `(x, θ)` evaluation points in `Ω × [−π,π]^d`,
/// used for pointwise symbol-equality tests.
pub fn random_symbol_points(
    domain: &DomainSpec,
    count: usize,
    seed: u64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    use rand::Rng;
    use rand::SeedableRng;
    let d = domain.d();
    let bb = match &domain.bounding_box {
        Some(bb) => bb.clone(),
        None => crate::grid::Hypercube {
            anchor: vec![0; d],
            side: 8,
        },
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = (0..d)
            .map(|j| bb.anchor[j] as f64 + rng.random::<f64>() * bb.side as f64)
            .collect();
        if !domain.indicator(&x) {
            continue;
        }
        let th: Vec<f64> = (0..d)
            .map(|_| -std::f64::consts::PI + rng.random::<f64>() * 2.0 * std::f64::consts::PI)
            .collect();
        out.push((x, th));
    }
    out
}

impl FourierTable {
    /// Visit every stored coefficient (used by symbol evaluation).
    pub fn for_each_coefficient(&self, mut f: impl FnMut(&[i64], num_complex::Complex64)) {
        let d = self.d();
        let mut k: Vec<i64> = self.cutoff.iter().map(|&c| -(c as i64)).collect();
        'outer: loop {
            let v = self.get(&k);
            if v.norm() > 0.0 {
                f(&k, v);
            }
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
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::builtin_table;
    use crate::spectral::DEFAULT_SVD_CAP;

    fn cusp() -> Arc<DomainSpec> {
        DomainSpec::cusp()
    }

    fn coeff_fn() -> SpaceFn {
        Arc::new(|x: &[f64]| 1.0 + x[0] * x[0] + 0.5 * x[1])
    }

    #[test]
    fn identity_sequence_members() {
        let seq = identity_sequence(&cusp()).unwrap();
        let n = MultiIndex::square(2, 8);
        match seq.matrix(&n).unwrap() {
            MatrixRep::Diag(d) => {
                assert_eq!(d.len(), 68);
                assert!(d.iter().all(|&v| v == 1.0));
            }
            _ => panic!("identity should be diagonal"),
        }
    }

    #[test]
    fn diag_algebra_identities() {
        let dom = DomainSpec::unit_square();
        let n = MultiIndex::square(2, 8);
        let a = unbounded_diag(coeff_fn(), "a", &dom, f64::INFINITY).unwrap();
        let b = unbounded_diag(
            Arc::new(|x: &[f64]| x[0] - x[1]),
            "b",
            &dom,
            f64::INFINITY,
        )
        .unwrap();
        // D(a) + D(b) = D(a+b), D(a)·D(b) = D(ab)
        let sum = seq_add(&a, &b, 1.0, 1.0).unwrap();
        let prod = seq_mul(&a, &b).unwrap();
        let (ma, mb) = (a.matrix(&n).unwrap(), b.matrix(&n).unwrap());
        if let (
            MatrixRep::Diag(da),
            MatrixRep::Diag(db),
            MatrixRep::Diag(ds),
            MatrixRep::Diag(dp),
        ) = (ma, mb, sum.matrix(&n).unwrap(), prod.matrix(&n).unwrap())
        {
            for k in 0..da.len() {
                assert_eq!(ds[k], da[k] + db[k]);
                assert_eq!(dp[k], da[k] * db[k]);
            }
        } else {
            panic!("diagonal algebra should stay diagonal");
        }
        assert!(prod.hermitian);
    }

    #[test]
    fn toeplitz_addition_linearity() {
        // T(f) + T(g) = T(f+g) entrywise for trig polynomials
        let dom = DomainSpec::unit_square();
        let t1 = builtin_table("laplace_2d", 1).unwrap();
        let t2 = builtin_table("one_2d", 1).unwrap();
        let s1 = unbounded_toeplitz(&t1, &dom, f64::INFINITY).unwrap();
        let s2 = unbounded_toeplitz(&t2, &dom, f64::INFINITY).unwrap();
        let n = MultiIndex::square(2, 6);
        let sum = seq_add(&s1, &s2, 1.0, 3.0).unwrap();
        let m = sum.matrix(&n).unwrap().to_dense();
        let m1 = s1.matrix(&n).unwrap().to_dense();
        let m2 = s2.matrix(&n).unwrap().to_dense();
        assert_eq!((m - (m1 + m2 * 3.0)).abs().max(), 0.0);
    }

    #[test]
    fn adjoint_involution() {
        let dom = DomainSpec::unit_square();
        let t = builtin_table("laplace_2d", 1).unwrap();
        let s = unbounded_toeplitz(&t, &dom, f64::INFINITY).unwrap();
        let n = MultiIndex::square(2, 5);
        let m = s.matrix(&n).unwrap().to_dense();
        let mss = seq_adjoint(&seq_adjoint(&s)).matrix(&n).unwrap().to_dense();
        assert_eq!(m, mss);
        // real symmetric: adjoint = original
        let madj = seq_adjoint(&s).matrix(&n).unwrap().to_dense();
        assert_eq!(m, madj);
    }

    #[test]
    fn pinv_examples() {
        let dom = DomainSpec::unit_square();
        let a = unbounded_diag(coeff_fn(), "a", &dom, f64::INFINITY).unwrap();
        let n = MultiIndex::square(2, 6);
        let p = seq_pinv(&a, DEFAULT_PINV_TOL);
        if let (MatrixRep::Diag(da), MatrixRep::Diag(dp)) =
            (a.matrix(&n).unwrap(), p.matrix(&n).unwrap())
        {
            for k in 0..da.len() {
                assert!((dp[k] - 1.0 / da[k]).abs() < 1e-15);
            }
        } else {
            panic!()
        }
        // dense Moore–Penrose axiom on a singular diagonal
        let m = MatrixRep::Dense(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0])));
        let pi = m.pinv(DEFAULT_PINV_TOL).unwrap().to_dense();
        assert!((pi[(0, 0)] - 0.5).abs() < 1e-14);
        assert_eq!(pi[(1, 1)], 0.0);
    }

    #[test]
    fn reduced_sequence_matches_reduced_toeplitz() {
        let table = builtin_table("laplace_2d", 1).unwrap();
        let square = DomainSpec::unit_square();
        // base over the axis box (0,2)×(0,1) ⊃ (0,1)²
        let base_dom = DomainSpec::builtin("axis_box").unwrap();
        let base = unbounded_toeplitz(&table, &base_dom, f64::INFINITY).unwrap();
        let red = reduced_sequence(&base, &square).unwrap();
        let n = MultiIndex::square(2, 6);
        let got = red.matrix(&n).unwrap().to_dense();
        let small = domain_grid(&n, &square).unwrap();
        let want = reduced_toeplitz_real(&small, &table).unwrap();
        assert_eq!((got - want).abs().max(), 0.0);
    }

    #[test]
    fn gacs_identity_sequence_rank_equals_defect() {
        let seq = identity_sequence(&cusp()).unwrap();
        let n = MultiIndex::square(2, 12);
        let (_, cert) = gacs_decompose(&seq, 1.0, &n).unwrap();
        assert!(cert.dim_defect > 0);
        assert_eq!(cert.rank_correction, cert.dim_defect);
        assert_eq!(cert.norm_correction, 0.0);
    }

    #[test]
    fn gacs_saturated_exhaustion_is_exact() {
        let seq = identity_sequence(&DomainSpec::unit_square()).unwrap();
        let n = MultiIndex::square(2, 8);
        let (b, cert) = gacs_decompose(&seq, 4.0, &n).unwrap();
        assert_eq!(cert.dim_defect, 0);
        assert_eq!(cert.rank_correction, 0);
        assert_eq!(b.dim(), 49);
    }

    #[test]
    fn gacs_rank_matches_direct_svd() {
        // cross-check the block-Gram rank against a full SVD of the
        // materialized correction S = A − E(R(A)), at a small size
        let table = builtin_table("laplace_2d", 1).unwrap();
        let dom = cusp();
        let seq = unbounded_toeplitz(&table, &dom, f64::INFINITY).unwrap();
        let n = MultiIndex::square(2, 10);
        let (b, cert) = gacs_decompose(&seq, 1.0, &n).unwrap();
        assert!(cert.rank_correction <= 2 * cert.dim_defect);

        let big = Arc::new(domain_grid(&n, &dom).unwrap());
        let omega_t = exhaustion_domain(&dom, 1.0).unwrap();
        let small = Arc::new(domain_grid(&n, &omega_t).unwrap());
        let map = SelectionMap::new(small, big).unwrap();
        let a = seq.matrix(&n).unwrap().to_dense();
        let e = crate::selection::extend(&map, &b.to_dense()).unwrap();
        let s = &a - &e;
        let sv = singular_values(&s, DEFAULT_SVD_CAP).unwrap();
        let smax = sv.values[0].max(1e-300);
        let direct = sv.values.iter().filter(|&&v| v > smax * 1e-8).count();
        assert_eq!(cert.rank_correction, direct);
    }

    #[test]
    fn acs_profile_zero_for_equal_sequences() {
        let dom = DomainSpec::unit_square();
        let a = unbounded_diag(coeff_fn(), "a", &dom, f64::INFINITY).unwrap();
        let ns = vec![MultiIndex::square(2, 4), MultiIndex::square(2, 8)];
        let prof = acs_distance_profile(&a, &a, &ns, DEFAULT_SVD_CAP).unwrap();
        assert!(prof.iter().all(|(_, p)| *p == 0.0));
    }

    #[test]
    fn acs_profile_epsilon_identity() {
        let dom = DomainSpec::unit_square();
        let one = identity_sequence(&dom).unwrap();
        let scaled = seq_add(&one, &one, 1.0, -0.9).unwrap(); // 0.1·I
        let zero = seq_add(&one, &one, 1.0, -1.0).unwrap();
        let ns = vec![MultiIndex::square(2, 6), MultiIndex::square(2, 10)];
        let prof = acs_distance_profile(&scaled, &zero, &ns, DEFAULT_SVD_CAP).unwrap();
        for (_, p) in prof {
            assert!((p - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn symbol_tracking_composes() {
        let dom = DomainSpec::unit_square();
        let table = builtin_table("laplace_2d", 1).unwrap();
        let t = unbounded_toeplitz(&table, &dom, f64::INFINITY).unwrap();
        let d = unbounded_diag(coeff_fn(), "a", &dom, f64::INFINITY).unwrap();
        let prod = seq_mul(&d, &t).unwrap();
        for (x, th) in random_symbol_points(&dom, 100, 99) {
            let want = (1.0 + x[0] * x[0] + 0.5 * x[1])
                * (4.0 - 2.0 * th[0].cos() - 2.0 * th[1].cos());
            assert!((prod.symbol.eval(&x, &th) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn provenance_tree_serializes() {
        let dom = DomainSpec::unit_square();
        let one = identity_sequence(&dom).unwrap();
        let s = seq_pinv(&seq_add(&one, &one, 1.0, 1.0).unwrap(), 1e-10);
        let json = s.provenance_json().unwrap();
        assert!(json.contains("pinv"));
        assert!(json.contains("add"));
    }

    #[test]
    fn unbounded_toeplitz_finite_t_scatter_pattern() {
        let table = builtin_table("laplace_2d", 1).unwrap();
        let dom = cusp();
        let seq = unbounded_toeplitz(&table, &dom, 1.0).unwrap();
        let n = MultiIndex::square(2, 8);
        let m = seq.matrix(&n).unwrap().to_dense();
        let big = domain_grid(&n, &dom).unwrap();
        let omega1 = exhaustion_domain(&dom, 1.0).unwrap();
        let small = domain_grid(&n, &omega1).unwrap();
        // nonzero rows exactly at the positions of Θ_{n,Ω₁}
        for k in 0..big.dim() {
            let inside = small.find(big.index(k)).is_some();
            let row_nonzero = (0..big.dim()).any(|c| m[(k, c)] != 0.0);
            assert_eq!(inside, row_nonzero, "row {k}");
        }
    }

    #[test]
    fn isometry_epsilon_identity() {
        let dom = DomainSpec::unit_square();
        let one = identity_sequence(&dom).unwrap();
        let eps = seq_add(&one, &one, 0.25, 0.0).unwrap();
        let ns = vec![MultiIndex::square(2, 8), MultiIndex::square(2, 16)];
        let rep = isometry_check(&eps, &ns, DEFAULT_SVD_CAP, 64, 4).unwrap();
        assert!((rep.d_m_value - 0.25).abs() < 1e-12);
        assert!(rep.gap < 1e-12);
    }
}
