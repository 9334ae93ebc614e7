//! Selection operators between grids sharing the same `n`.
//!
//! The selection matrix `Π` of a grid inclusion is never materialized:
//! restriction `R(A) = Π A Πᵀ` and extension `E(B) = Πᵀ B Π` are gathers and
//! scatters on the strictly increasing position list of the small grid
//! inside the big one, so the operator identities hold with tolerance zero.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Scalar};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::grid::{domain_grid, DomainSpec, Grid, MultiIndex};

/// The order-preserving embedding of `small` into `big` (the executable
/// form of `Π`): `positions[i]` is where the `i`-th small point sits in the
/// big grid, and the list is strictly increasing.
#[derive(Clone, Debug)]
pub struct SelectionMap {
    pub small: Arc<Grid>,
    pub big: Arc<Grid>,
    positions: Vec<usize>,
}

impl SelectionMap {
    /// Build the map by exact integer binary search of every small lattice
    /// index in the lex-sorted big grid.
    pub fn new(small: Arc<Grid>, big: Arc<Grid>) -> Result<SelectionMap> {
        if small.n != big.n {
            return Err(Error::Dimension(format!(
                "selection between grids with different n: {} vs {}",
                small.n, big.n
            )));
        }
        let mut positions = Vec::with_capacity(small.dim());
        for k in 0..small.dim() {
            let idx = small.index(k);
            match big.find(idx) {
                Some(pos) => positions.push(pos),
                None => {
                    return Err(Error::Containment(format!(
                        "point {:?} of grid '{}' not present in grid '{}'",
                        small.point(k),
                        small.domain.name,
                        big.domain.name
                    )))
                }
            }
        }
        // lex-sorted inputs make this automatic; assert it anyway
        debug_assert!(positions.windows(2).all(|w| w[0] < w[1]));
        Ok(SelectionMap { small, big, positions })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn small_dim(&self) -> usize {
        self.small.dim()
    }

    pub fn big_dim(&self) -> usize {
        self.big.dim()
    }

    /// CSV audit dump: rows of `(small_index, big_index)`.
    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["small_index", "big_index"])?;
        for (i, &p) in self.positions.iter().enumerate() {
            wtr.write_record(&[i.to_string(), p.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `R(A) = Π A Πᵀ`: gather the rows and columns at the mapped positions.
pub fn restrict<T: Scalar + Zero + Copy>(
    map: &SelectionMap,
    a: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    if a.nrows() != map.big_dim() || a.ncols() != map.big_dim() {
        return Err(Error::Dimension(format!(
            "restrict: matrix is {}x{}, big grid has dim {}",
            a.nrows(),
            a.ncols(),
            map.big_dim()
        )));
    }
    let m = map.small_dim();
    let mut out = DMatrix::<T>::zeros(m, m);
    for (r, &pr) in map.positions.iter().enumerate() {
        for (c, &pc) in map.positions.iter().enumerate() {
            out[(r, c)] = a[(pr, pc)];
        }
    }
    Ok(out)
}

/// `E(B) = Πᵀ B Π`: scatter `B` into the big grid, zero elsewhere.
pub fn extend<T: Scalar + Zero + Copy>(
    map: &SelectionMap,
    b: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    if b.nrows() != map.small_dim() || b.ncols() != map.small_dim() {
        return Err(Error::Dimension(format!(
            "extend: matrix is {}x{}, small grid has dim {}",
            b.nrows(),
            b.ncols(),
            map.small_dim()
        )));
    }
    let n = map.big_dim();
    let mut out = DMatrix::<T>::zeros(n, n);
    for (r, &pr) in map.positions.iter().enumerate() {
        for (c, &pc) in map.positions.iter().enumerate() {
            out[(pr, pc)] = b[(r, c)];
        }
    }
    Ok(out)
}

/// Diagonal-matrix restriction (gather of the diagonal).
pub fn restrict_diag(map: &SelectionMap, a: &DVector<f64>) -> Result<DVector<f64>> {
    if a.len() != map.big_dim() {
        return Err(Error::Dimension("restrict_diag: size mismatch".into()));
    }
    Ok(DVector::from_iterator(
        map.small_dim(),
        map.positions.iter().map(|&p| a[p]),
    ))
}

/// Diagonal-matrix extension (scatter of the diagonal, zero elsewhere).
pub fn extend_diag(map: &SelectionMap, b: &DVector<f64>) -> Result<DVector<f64>> {
    if b.len() != map.small_dim() {
        return Err(Error::Dimension("extend_diag: size mismatch".into()));
    }
    let mut out = DVector::zeros(map.big_dim());
    for (i, &p) in map.positions.iter().enumerate() {
        out[p] = b[i];
    }
    Ok(out)
}

/// Report of the Gram identities of `Π`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramReport {
    /// `Π Πᵀ = I` (always true for a valid map; re-verified structurally).
    pub left_identity: bool,
    /// Rank of `S` in `Πᵀ Π = D(𝟙_Ω_small) + S`: the number of big-grid
    /// points whose membership in the small *domain* disagrees with their
    /// membership in the small *grid* (a boundary-layer count).
    pub right_diag_defect: usize,
}

/// Verify `Π Πᵀ = I` and measure the diagonal defect of `Πᵀ Π` against the
/// indicator of the small domain sampled on the big grid.
pub fn gram_identities(map: &SelectionMap) -> GramReport {
    let strictly_increasing = map.positions.windows(2).all(|w| w[0] < w[1]);
    let consistent = (0..map.small_dim())
        .all(|k| map.big.index(map.positions[k]) == map.small.index(k));
    let left_identity = strictly_increasing && consistent;

    let selected: std::collections::HashSet<usize> =
        map.positions.iter().copied().collect();
    let mut defect = 0usize;
    for k in 0..map.big_dim() {
        let p = map.big.point(k);
        let in_domain = map.small.domain.indicator(&p);
        let in_grid = selected.contains(&k);
        if in_domain != in_grid {
            defect += 1;
        }
    }
    GramReport { left_identity, right_diag_defect: defect }
}

/// The two routes of the commuting square between `Θ_{n,Ω₁}` and `Θ_{n,Ω₂}`:
/// extend into the union grid then restrict, versus restrict to the
/// intersection grid then extend.  Both are returned on `Θ_{n,Ω₂}` and must
/// be entrywise equal; with an empty intersection grid both routes are the
/// zero matrix.
pub fn commuting_square(
    omega1: &Arc<DomainSpec>,
    omega2: &Arc<DomainSpec>,
    n: &MultiIndex,
    a: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let g1 = Arc::new(domain_grid(n, omega1)?);
    let g2 = Arc::new(domain_grid(n, omega2)?);
    if a.nrows() != g1.dim() {
        return Err(Error::Dimension(format!(
            "commuting_square: matrix dim {} vs Θ_(n,Ω₁) dim {}",
            a.nrows(),
            g1.dim()
        )));
    }
    let union = DomainSpec::union(omega1, omega2)?;
    let inter = DomainSpec::intersection(omega1, omega2)?;
    let gu = Arc::new(domain_grid(n, &union)?);
    let gi = Arc::new(domain_grid(n, &inter)?);

    // up: Ω₁ → ∪ → Ω₂
    let up = {
        let e = extend(&SelectionMap::new(g1.clone(), gu.clone())?, a)?;
        restrict(&SelectionMap::new(g2.clone(), gu.clone())?, &e)?
    };
    // down: Ω₁ → ∩ → Ω₂
    let down = {
        let r = restrict(&SelectionMap::new(gi.clone(), g1.clone())?, a)?;
        extend(&SelectionMap::new(gi, g2.clone())?, &r)?
    };
    Ok((up, down))
}

/// Completion of `Π` to a permutation of the big index set: the selected
/// positions first (in order), the complement after (in order).  Conjugating
/// `E(B)` by it yields `blockdiag(B, 0)` exactly.
#[derive(Clone, Debug)]
pub struct PermutationCompletion {
    pub order: Vec<usize>,
    big_dim: usize,
}

impl PermutationCompletion {
    pub fn new(map: &SelectionMap) -> PermutationCompletion {
        let selected: std::collections::HashSet<usize> =
            map.positions.iter().copied().collect();
        let mut order = map.positions.to_vec();
        order.extend((0..map.big_dim()).filter(|k| !selected.contains(k)));
        PermutationCompletion { order, big_dim: map.big_dim() }
    }

    /// `Pᵀ M P`, i.e. `M` with rows and columns reordered by `order`.
    pub fn conjugate<T: Scalar + Zero + Copy>(&self, m: &DMatrix<T>) -> Result<DMatrix<T>> {
        if m.nrows() != self.big_dim {
            return Err(Error::Dimension("permutation completion: size mismatch".into()));
        }
        let n = self.big_dim;
        let mut out = DMatrix::<T>::zeros(n, n);
        for (r, &pr) in self.order.iter().enumerate() {
            for (c, &pc) in self.order.iter().enumerate() {
                out[(r, c)] = m[(pr, pc)];
            }
        }
        Ok(out)
    }
}

/// Naive triple-loop matrix product, used by exactness tests that compare
/// sums term by term (fixed accumulation order on both sides).
pub fn matmul_naive(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    assert_eq!(k, b.nrows());
    let mut out = DMatrix::zeros(n, m);
    for r in 0..n {
        for c in 0..m {
            let mut acc = 0.0;
            for t in 0..k {
                acc += a[(r, t)] * b[(t, c)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}
