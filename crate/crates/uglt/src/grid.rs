//! Multi-indices, hypercubes, domains and lattice grids.
//!
//! A grid `Θ_{n,Ω}` collects the lattice points `p = i/n` (componentwise,
//! `i ∈ ℤ^d`) whose surrounding box of halfwidth `1/n_j` per axis fits
//! inside the open set `Ω`.  Points are stored as exact integer lattice
//! indices and kept in lexicographic order, so set operations between grids
//! never touch floating point.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Hard cap on the number of candidate cells scanned while building a grid.
const SCAN_CAP: u128 = 200_000_000;

/// Seed and sample count used for Monte-Carlo measure estimates.
pub const MEASURE_MC_SAMPLES: u64 = 1_000_000;
pub const MEASURE_MC_SEED: u64 = 0x6c74_6721;

// ---------------------------------------------------------------------------
// MultiIndex
// ---------------------------------------------------------------------------

/// A `d`-tuple of positive integers giving the grid subdivisions per axis.
///
/// Comparison is lexicographic with the first coordinate most significant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("multi-index must have d >= 1".into()));
        }
        if entries.contains(&0) {
            return Err(Error::Config("multi-index entries must be >= 1".into()));
        }
        Ok(MultiIndex(entries))
    }

    /// Convenience constructor for the common square case `(m, m, ..., m)`.
    pub fn square(d: usize, m: usize) -> Self {
        MultiIndex::new(vec![m; d]).expect("square multi-index")
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// `N(n) = ∏ n_i`.
    pub fn n_total(&self) -> usize {
        self.0.iter().product()
    }

    /// Componentwise scaling `l·n`.
    pub fn scaled(&self, l: usize) -> Self {
        MultiIndex(self.0.iter().map(|&e| e * l).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

// ---------------------------------------------------------------------------
// Hypercube
// ---------------------------------------------------------------------------

/// The hypercube `Q_{y,l} = y + l·(0,1]^d` with integer anchor and side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hypercube {
    pub anchor: Vec<i64>,
    pub side: u64,
}

impl Hypercube {
    pub fn new(anchor: Vec<i64>, side: u64) -> Result<Self> {
        if anchor.is_empty() || side == 0 {
            return Err(Error::Config("hypercube needs d >= 1 and side >= 1".into()));
        }
        Ok(Hypercube { anchor, side })
    }

    /// The reference cube `(0,1]^d`.
    pub fn unit(d: usize) -> Self {
        Hypercube { anchor: vec![0; d], side: 1 }
    }

    pub fn d(&self) -> usize {
        self.anchor.len()
    }

    /// Exact containment `Q_self ⊂ Q_other`, decided on the integer data.
    pub fn contained_in(&self, other: &Hypercube) -> bool {
        self.d() == other.d()
            && self.anchor.iter().zip(&other.anchor).all(|(&a, &b)| b <= a)
            && self
                .anchor
                .iter()
                .zip(&other.anchor)
                .all(|(&a, &b)| a + self.side as i64 <= b + other.side as i64)
    }

    /// Does the lattice point `i/n` lie in `Q_{y,l}`?  Exact integer test:
    /// `y_j n_j < i_j <= (y_j + l) n_j`.
    pub fn contains_lattice(&self, i: &[i64], n: &MultiIndex) -> bool {
        i.iter()
            .zip(&self.anchor)
            .zip(n.entries())
            .all(|((&ij, &yj), &nj)| {
                let nj = nj as i64;
                yj * nj < ij && ij <= (yj + self.side as i64) * nj
            })
    }
}

// ---------------------------------------------------------------------------
// DomainSpec
// ---------------------------------------------------------------------------

/// Provenance of a domain's measure value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MeasureProvenance {
    Analytic,
    MonteCarlo { samples: u64, seed: u64, std_error: f64 },
}

/// Shape of a built-in domain; every predicate is exact (corner tests
/// justified by per-axis monotonicity; the disk uses the farthest corner).
#[derive(Clone)]
enum DomainKind {
    /// Open axis-aligned box `∏ (lo_j, hi_j)`.
    AxisBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Open disk (2-d).
    Disk { center: [f64; 2], radius: f64 },
    /// The unbounded cusp domain `{x > 0, y > 0, y < g(x)}` with
    /// `g(x) = 1` for `x < 1` and `g(x) = 1/x²` for `x >= 1`; measure 2.
    Cusp,
    /// `Ω ∩ {‖x‖_∞ < t}` — one step of the canonical regular exhaustion.
    Capped { base: Arc<DomainSpec>, t: f64 },
    Union(Arc<DomainSpec>, Arc<DomainSpec>),
    Intersection(Arc<DomainSpec>, Arc<DomainSpec>),
}

/// An open set `Ω` with exact membership and box-inclusion predicates and
/// measure metadata.
#[derive(Clone)]
pub struct DomainSpec {
    pub name: String,
    kind: DomainKind,
    pub measure: f64,
    pub provenance: MeasureProvenance,
    pub bounded: bool,
    pub bounding_box: Option<Hypercube>,
    dim: usize,
}

/// `g(x)` of the cusp domain.
pub fn cusp_profile(x: f64) -> f64 {
    if x < 1.0 {
        1.0
    } else {
        1.0 / (x * x)
    }
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainSpec")
            .field("name", &self.name)
            .field("measure", &self.measure)
            .field("bounded", &self.bounded)
            .finish()
    }
}

impl DomainSpec {
    pub fn d(&self) -> usize {
        self.dim
    }

    /// Open unit square `(0,1)²`.
    pub fn unit_square() -> Arc<DomainSpec> {
        Arc::new(DomainSpec {
            name: "unit_square".into(),
            kind: DomainKind::AxisBox { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] },
            measure: 1.0,
            provenance: MeasureProvenance::Analytic,
            bounded: true,
            bounding_box: Some(Hypercube::unit(2)),
            dim: 2,
        })
    }

    /// Open axis-aligned box with the given corners.
    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Arc<DomainSpec>> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Config("axis box corners must match and d >= 1".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(Error::Config("axis box needs lo < hi per axis".into()));
        }
        let measure: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let anchor: Vec<i64> = lo.iter().map(|&a| a.floor() as i64).collect();
        let side = lo
            .iter()
            .zip(&hi)
            .zip(&anchor)
            .map(|((_, &b), &y)| (b.ceil() as i64 - y).max(1) as u64)
            .max()
            .unwrap();
        let dim = lo.len();
        Ok(Arc::new(DomainSpec {
            name: "axis_box".into(),
            kind: DomainKind::AxisBox { lo, hi },
            measure,
            provenance: MeasureProvenance::Analytic,
            bounded: true,
            bounding_box: Some(Hypercube { anchor, side }),
            dim,
        }))
    }

    /// Open disk of radius 1/2 centered at (1/2, 1/2); measure π/4.
    pub fn disk() -> Arc<DomainSpec> {
        Arc::new(DomainSpec {
            name: "disk".into(),
            kind: DomainKind::Disk { center: [0.5, 0.5], radius: 0.5 },
            measure: std::f64::consts::FRAC_PI_4,
            provenance: MeasureProvenance::Analytic,
            bounded: true,
            bounding_box: Some(Hypercube::unit(2)),
            dim: 2,
        })
    }

    /// The unbounded cusp domain; measure `1 + ∫_1^∞ x⁻² dx = 2`.
    pub fn cusp() -> Arc<DomainSpec> {
        Arc::new(DomainSpec {
            name: "cusp".into(),
            kind: DomainKind::Cusp,
            measure: 2.0,
            provenance: MeasureProvenance::Analytic,
            bounded: false,
            bounding_box: None,
            dim: 2,
        })
    }

    /// Resolve a registry name used by config files.
    pub fn builtin(name: &str) -> Result<Arc<DomainSpec>> {
        match name {
            "unit_square" => Ok(DomainSpec::unit_square()),
            "axis_box" => DomainSpec::axis_box(vec![0.0, 0.0], vec![2.0, 1.0]),
            "disk" => Ok(DomainSpec::disk()),
            "cusp" => Ok(DomainSpec::cusp()),
            other => Err(Error::Config(format!("unknown domain '{other}'"))),
        }
    }

    /// Names accepted by [`DomainSpec::builtin`].
    pub fn builtin_names() -> &'static [&'static str] {
        &["unit_square", "axis_box", "disk", "cusp"]
    }

    /// Membership of a point in the open set.
    pub fn indicator(&self, p: &[f64]) -> bool {
        match &self.kind {
            DomainKind::AxisBox { lo, hi } => p
                .iter()
                .zip(lo)
                .zip(hi)
                .all(|((&x, &a), &b)| a < x && x < b),
            DomainKind::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                (dx * dx + dy * dy).sqrt() < *radius
            }
            DomainKind::Cusp => p[0] > 0.0 && p[1] > 0.0 && p[1] < cusp_profile(p[0]),
            DomainKind::Capped { base, t } => {
                base.indicator(p) && p.iter().all(|&x| x.abs() < *t)
            }
            DomainKind::Union(a, b) => a.indicator(p) || b.indicator(p),
            DomainKind::Intersection(a, b) => a.indicator(p) && b.indicator(p),
        }
    }

    /// Exact test "the box of center `p` and per-axis halfwidth `h` fits in
    /// `Ω`".  Boundary-touching boxes count as inside (the open box
    /// `∏(p_j−h_j, p_j+h_j)` is contained in the open domain).
    pub fn box_inside(&self, p: &[f64], h: &[f64]) -> bool {
        match &self.kind {
            DomainKind::AxisBox { lo, hi } => p
                .iter()
                .zip(h)
                .zip(lo.iter().zip(hi))
                .all(|((&x, &hw), (&a, &b))| x - hw >= a && x + hw <= b),
            DomainKind::Disk { center, radius } => {
                // farthest corner of the box from the center
                let dx = (p[0] - center[0]).abs() + h[0];
                let dy = (p[1] - center[1]).abs() + h[1];
                (dx * dx + dy * dy).sqrt() <= *radius
            }
            DomainKind::Cusp => {
                // g is nonincreasing, so the binding corner is (x+h, y+h)
                p[0] - h[0] >= 0.0
                    && p[1] - h[1] >= 0.0
                    && p[1] + h[1] <= cusp_profile(p[0] + h[0])
            }
            DomainKind::Capped { base, t } => {
                base.box_inside(p, h)
                    && p.iter().zip(h).all(|(&x, &hw)| x.abs() + hw <= *t)
            }
            DomainKind::Union(a, b) => a.box_inside(p, h) || b.box_inside(p, h),
            DomainKind::Intersection(a, b) => a.box_inside(p, h) && b.box_inside(p, h),
        }
    }

    /// Inclusive per-axis ranges of candidate lattice indices for `Θ_{n,Ω}`.
    /// For the unbounded cusp the x-strip is bounded by the smallest `x`
    /// with `g(x) < 2/n₂` (i.e. `x_max = sqrt(n₂/2)`) plus one cell of
    /// slack; `box_inside` filters exactly inside the strip.
    fn scan_range(&self, n: &MultiIndex) -> Result<Vec<(i64, i64)>> {
        let slack = 2;
        match &self.kind {
            DomainKind::AxisBox { lo, hi } => Ok(lo
                .iter()
                .zip(hi)
                .zip(n.entries())
                .map(|((&a, &b), &nj)| {
                    let nj = nj as f64;
                    ((a * nj).floor() as i64 - slack, (b * nj).ceil() as i64 + slack)
                })
                .collect()),
            DomainKind::Disk { center, radius } => Ok(center
                .iter()
                .zip(n.entries())
                .map(|(&c, &nj)| {
                    let nj = nj as f64;
                    (
                        ((c - radius) * nj).floor() as i64 - slack,
                        ((c + radius) * nj).ceil() as i64 + slack,
                    )
                })
                .collect()),
            DomainKind::Cusp => {
                let n1 = n.entries()[0] as f64;
                let n2 = n.entries()[1] as f64;
                let x_max = (n2 / 2.0).sqrt() + 1.0 / n1;
                Ok(vec![
                    (1, (n1 * x_max).ceil() as i64 + slack),
                    (1, n.entries()[1] as i64 + slack),
                ])
            }
            DomainKind::Capped { base, t } => {
                let base_range = base.scan_range(n)?;
                Ok(base_range
                    .into_iter()
                    .zip(n.entries())
                    .map(|((lo, hi), &nj)| {
                        let cap = (*t * nj as f64).ceil() as i64 + slack;
                        (lo.max(-cap), hi.min(cap))
                    })
                    .collect())
            }
            DomainKind::Union(a, b) => {
                let ra = a.scan_range(n)?;
                let rb = b.scan_range(n)?;
                Ok(ra
                    .into_iter()
                    .zip(rb)
                    .map(|((la, ha), (lb, hb))| (la.min(lb), ha.max(hb)))
                    .collect())
            }
            DomainKind::Intersection(a, b) => {
                let ra = a.scan_range(n)?;
                let rb = b.scan_range(n)?;
                Ok(ra
                    .into_iter()
                    .zip(rb)
                    .map(|((la, ha), (lb, hb))| (la.max(lb), ha.min(hb)))
                    .collect())
            }
        }
    }

    fn mc_bounding_box(&self) -> Option<Hypercube> {
        self.bounding_box.clone()
    }

    /// Union of two domains (of equal dimension).  `box_inside` is the
    /// disjunction of the member predicates, which yields a sub-grid of the
    /// true union grid sandwiched between the member grids and their hull;
    /// every selection identity that matters holds for any such super-grid.
    pub fn union(a: &Arc<DomainSpec>, b: &Arc<DomainSpec>) -> Result<Arc<DomainSpec>> {
        if a.d() != b.d() {
            return Err(Error::Config("union of domains with different d".into()));
        }
        let inter = DomainSpec::intersection(a, b)?;
        let measure = a.measure + b.measure - inter.measure;
        let bounded = a.bounded && b.bounded;
        let bounding_box = match (&a.bounding_box, &b.bounding_box) {
            (Some(ba), Some(bb)) => Some(hull(ba, bb)),
            _ => None,
        };
        Ok(Arc::new(DomainSpec {
            name: format!("union({},{})", a.name, b.name),
            kind: DomainKind::Union(a.clone(), b.clone()),
            measure,
            provenance: inter.provenance.clone(),
            bounded,
            bounding_box,
            dim: a.d(),
        }))
    }

    /// Intersection of two domains; both predicates are exact, so the grid
    /// of the intersection is exactly the set intersection of the grids.
    pub fn intersection(a: &Arc<DomainSpec>, b: &Arc<DomainSpec>) -> Result<Arc<DomainSpec>> {
        if a.d() != b.d() {
            return Err(Error::Config("intersection of domains with different d".into()));
        }
        let bounding_box = match (&a.bounding_box, &b.bounding_box) {
            (Some(ba), Some(bb)) => Some(ba.clone().min_hull(bb)),
            (Some(ba), None) => Some(ba.clone()),
            (None, Some(bb)) => Some(bb.clone()),
            (None, None) => None,
        };
        let kind = DomainKind::Intersection(a.clone(), b.clone());
        let (measure, provenance) = match &bounding_box {
            Some(bb) => monte_carlo_measure(
                |p| a.indicator(p) && b.indicator(p),
                bb,
                MEASURE_MC_SAMPLES,
                MEASURE_MC_SEED,
            ),
            // both unbounded: only happens for identical unbounded builtins
            None => (a.measure.min(b.measure), MeasureProvenance::Analytic),
        };
        Ok(Arc::new(DomainSpec {
            name: format!("intersection({},{})", a.name, b.name),
            kind,
            measure,
            provenance,
            bounded: a.bounded || b.bounded,
            bounding_box,
            dim: a.d(),
        }))
    }
}

impl Hypercube {
    /// Smallest hypercube of this anchor covering the overlap with `other`
    /// (used only as a Monte-Carlo sampling box; being too large is fine).
    fn min_hull(self, other: &Hypercube) -> Hypercube {
        let anchor: Vec<i64> = self
            .anchor
            .iter()
            .zip(&other.anchor)
            .map(|(&a, &b)| a.max(b))
            .collect();
        let hi: i64 = self
            .anchor
            .iter()
            .zip(&other.anchor)
            .map(|(&a, &b)| (a + self.side as i64).min(b + other.side as i64))
            .max()
            .unwrap();
        let side = anchor.iter().map(|&a| (hi - a).max(1) as u64).max().unwrap();
        Hypercube { anchor, side }
    }
}

fn hull(a: &Hypercube, b: &Hypercube) -> Hypercube {
    let anchor: Vec<i64> = a
        .anchor
        .iter()
        .zip(&b.anchor)
        .map(|(&x, &y)| x.min(y))
        .collect();
    let side = a
        .anchor
        .iter()
        .zip(&b.anchor)
        .zip(&anchor)
        .map(|((&x, &y), &z)| ((x + a.side as i64).max(y + b.side as i64) - z) as u64)
        .max()
        .unwrap();
    Hypercube { anchor, side }
}

fn monte_carlo_measure(
    inside: impl Fn(&[f64]) -> bool,
    bb: &Hypercube,
    samples: u64,
    seed: u64,
) -> (f64, MeasureProvenance) {
    let d = bb.d();
    let vol = (bb.side as f64).powi(d as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    let mut p = vec![0.0; d];
    for _ in 0..samples {
        for (j, pj) in p.iter_mut().enumerate() {
            *pj = bb.anchor[j] as f64 + rng.random::<f64>() * bb.side as f64;
        }
        if inside(&p) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let std_error = vol * (frac * (1.0 - frac) / samples as f64).sqrt();
    (
        vol * frac,
        MeasureProvenance::MonteCarlo { samples, seed, std_error },
    )
}

/// Registered measure of a domain (analytic where available, Monte-Carlo
/// otherwise — the provenance tag says which).
pub fn domain_measure(domain: &DomainSpec) -> f64 {
    domain.measure
}

/// The bounded domain `Ω_t = Ω ∩ {‖x‖_∞ < t}` of the canonical regular
/// exhaustion, with analytic measure where the base domain permits.
pub fn exhaustion_domain(domain: &Arc<DomainSpec>, t: f64) -> Result<Arc<DomainSpec>> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Config(format!("exhaustion parameter t={t} must be > 0")));
    }
    // collapse nested caps
    if let DomainKind::Capped { base, t: t0 } = &domain.kind {
        let base = base.clone();
        let tmin = t.min(*t0);
        return exhaustion_core(&base, tmin);
    }
    exhaustion_core(domain, t)
}

fn exhaustion_core(base: &Arc<DomainSpec>, t: f64) -> Result<Arc<DomainSpec>> {
    let d = base.d();
    let cap_cube = Hypercube {
        anchor: vec![-(t.ceil() as i64); d],
        side: 2 * t.ceil() as u64,
    };
    let bounding_box = match &base.bounding_box {
        Some(bb) => Some(bb.clone().min_hull(&cap_cube)),
        None => Some(cap_cube),
    };
    let (measure, provenance) = match &base.kind {
        DomainKind::Cusp => {
            let m = if t <= 1.0 { t * t } else { 2.0 - 1.0 / t };
            (m, MeasureProvenance::Analytic)
        }
        DomainKind::AxisBox { lo, hi } => {
            let m = lo
                .iter()
                .zip(hi)
                .map(|(&a, &b)| (b.min(t) - a.max(-t)).max(0.0))
                .product();
            (m, MeasureProvenance::Analytic)
        }
        DomainKind::Disk { center, radius } => {
            let saturated = center
                .iter()
                .all(|&c| c - radius >= -t && c + radius <= t);
            if saturated {
                (base.measure, MeasureProvenance::Analytic)
            } else {
                monte_carlo_measure(
                    |p| base.indicator(p) && p.iter().all(|&x| x.abs() < t),
                    bounding_box.as_ref().unwrap(),
                    MEASURE_MC_SAMPLES,
                    MEASURE_MC_SEED,
                )
            }
        }
        _ => monte_carlo_measure(
            |p| base.indicator(p) && p.iter().all(|&x| x.abs() < t),
            bounding_box.as_ref().unwrap(),
            MEASURE_MC_SAMPLES,
            MEASURE_MC_SEED,
        ),
    };
    Ok(Arc::new(DomainSpec {
        name: format!("{}_t{}", base.name, t),
        kind: DomainKind::Capped { base: base.clone(), t },
        measure,
        provenance,
        bounded: true,
        bounding_box,
        dim: d,
    }))
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

/// The ordered finite point set `Θ_{n,Ω}`: integer lattice indices `i`
/// (so `p = i/n`), strictly increasing in lexicographic order.
#[derive(Clone)]
pub struct Grid {
    pub n: MultiIndex,
    pub domain: Arc<DomainSpec>,
    indices: Vec<Vec<i64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("domain", &self.domain.name)
            .field("dim", &self.dim())
            .finish()
    }
}

impl Grid {
    /// Number of points `d_n^Ω`.
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[Vec<i64>] {
        &self.indices
    }

    pub fn index(&self, k: usize) -> &[i64] {
        &self.indices[k]
    }

    /// Coordinates of the `k`-th point, `p_j = i_j / n_j`.
    pub fn point(&self, k: usize) -> Vec<f64> {
        self.indices[k]
            .iter()
            .zip(self.n.entries())
            .map(|(&i, &nj)| i as f64 / nj as f64)
            .collect()
    }

    /// Per-axis box halfwidths `1/n_j`.
    pub fn halfwidths(&self) -> Vec<f64> {
        self.n.entries().iter().map(|&nj| 1.0 / nj as f64).collect()
    }

    /// Position of a lattice index in the grid, by binary search.
    pub fn find(&self, idx: &[i64]) -> Option<usize> {
        self.indices
            .binary_search_by(|probe| probe.as_slice().cmp(idx))
            .ok()
    }

    /// Smallest hypercube `Q_{y,l}` whose grid contains this grid.
    pub fn enclosing_hypercube(&self) -> Hypercube {
        let d = self.n.d();
        let mut anchor = vec![0i64; d];
        let mut side = 1u64;
        if self.indices.is_empty() {
            return Hypercube { anchor, side };
        }
        for j in 0..d {
            let nj = self.n.entries()[j] as i64;
            let min = self.indices.iter().map(|i| i[j]).min().unwrap();
            // y_j n_j < i  for all i  ⇔  y_j <= ceil(min/n) - 1 … use floor div
            anchor[j] = (min - 1).div_euclid(nj);
        }
        for j in 0..d {
            let nj = self.n.entries()[j] as i64;
            let max = self.indices.iter().map(|i| i[j]).max().unwrap();
            let need = (max - anchor[j] * nj + nj - 1).div_euclid(nj);
            side = side.max(need.max(1) as u64);
        }
        Hypercube { anchor, side }
    }

    /// Write the grid as CSV (one row per point, columns `x1..xd`).
    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let header: Vec<String> = (1..=self.n.d()).map(|j| format!("x{j}")).collect();
        wtr.write_record(&header)?;
        for k in 0..self.dim() {
            let rec: Vec<String> = self.point(k).iter().map(|v| v.to_string()).collect();
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// The full lattice grid of a hypercube: `Θ_{n,y,l} = {y + i/n, 1 ⪯ i ⪯ l·n}`,
/// of cardinality `l^d · N(n)`.
pub fn hypercube_grid(n: &MultiIndex, q: &Hypercube) -> Result<Grid> {
    if q.d() != n.d() {
        return Err(Error::Dimension(format!(
            "hypercube d={} vs multi-index d={}",
            q.d(),
            n.d()
        )));
    }
    let count = (q.side as u128).pow(n.d() as u32)
        * n.entries().iter().map(|&e| e as u128).product::<u128>();
    if count > SCAN_CAP {
        return Err(Error::SizeCap(format!(
            "hypercube grid would have {count} points"
        )));
    }
    let lo: Vec<f64> = q.anchor.iter().map(|&a| a as f64).collect();
    let hi: Vec<f64> = q.anchor.iter().map(|&a| (a + q.side as i64) as f64).collect();
    let domain = Arc::new(DomainSpec {
        name: format!("hypercube(y={:?},l={})", q.anchor, q.side),
        kind: DomainKind::AxisBox { lo, hi },
        measure: (q.side as f64).powi(n.d() as i32),
        provenance: MeasureProvenance::Analytic,
        bounded: true,
        bounding_box: Some(q.clone()),
        dim: n.d(),
    });
    let mut indices = Vec::with_capacity(count as usize);
    let d = n.d();
    let mut cur: Vec<i64> = (0..d)
        .map(|j| q.anchor[j] * n.entries()[j] as i64 + 1)
        .collect();
    let los: Vec<i64> = cur.clone();
    let his: Vec<i64> = (0..d)
        .map(|j| (q.anchor[j] + q.side as i64) * n.entries()[j] as i64)
        .collect();
    'outer: loop {
        indices.push(cur.clone());
        // odometer increment, last axis fastest (lexicographic emission)
        for j in (0..d).rev() {
            cur[j] += 1;
            if cur[j] <= his[j] {
                continue 'outer;
            }
            cur[j] = los[j];
        }
        break;
    }
    Ok(Grid { n: n.clone(), domain, indices })
}

/// The grid `Θ_{n,Ω}` of a domain: all lattice points whose box of per-axis
/// halfwidth `1/n_j` fits inside `Ω`.
pub fn domain_grid(n: &MultiIndex, domain: &Arc<DomainSpec>) -> Result<Grid> {
    if domain.d() != n.d() {
        return Err(Error::Dimension(format!(
            "domain d={} vs multi-index d={}",
            domain.d(),
            n.d()
        )));
    }
    if !domain.bounded && !matches!(domain.kind, DomainKind::Cusp | DomainKind::Capped { .. })
    {
        // unions involving the cusp inherit its strip through scan_range
        if domain.mc_bounding_box().is_none()
            && domain.scan_range(n).is_err()
        {
            return Err(Error::Config(format!(
                "unbounded domain '{}' has no scan extent data",
                domain.name
            )));
        }
    }
    let ranges = domain.scan_range(n)?;
    let count: u128 = ranges
        .iter()
        .map(|&(lo, hi)| ((hi - lo + 1).max(0)) as u128)
        .product();
    if count > SCAN_CAP {
        return Err(Error::SizeCap(format!(
            "domain grid scan would visit {count} cells"
        )));
    }
    let d = n.d();
    let h = n
        .entries()
        .iter()
        .map(|&nj| 1.0 / nj as f64)
        .collect::<Vec<_>>();
    let mut indices = Vec::new();
    if count == 0 {
        return Ok(Grid { n: n.clone(), domain: domain.clone(), indices });
    }
    let los: Vec<i64> = ranges.iter().map(|&(lo, _)| lo).collect();
    let his: Vec<i64> = ranges.iter().map(|&(_, hi)| hi).collect();
    let mut cur = los.clone();
    let mut p = vec![0.0; d];
    'outer: loop {
        for j in 0..d {
            p[j] = cur[j] as f64 / n.entries()[j] as f64;
        }
        if domain.box_inside(&p, &h) {
            indices.push(cur.clone());
        }
        for j in (0..d).rev() {
            cur[j] += 1;
            if cur[j] <= his[j] {
                continue 'outer;
            }
            cur[j] = los[j];
        }
        break;
    }
    Ok(Grid { n: n.clone(), domain: domain.clone(), indices })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_total_examples() {
        assert_eq!(MultiIndex::new(vec![2, 3]).unwrap().n_total(), 6);
        assert_eq!(MultiIndex::new(vec![1]).unwrap().n_total(), 1);
        assert_eq!(MultiIndex::new(vec![4, 4]).unwrap().n_total(), 16);
    }

    #[test]
    fn multi_index_validation() {
        assert!(MultiIndex::new(vec![]).is_err());
        assert!(MultiIndex::new(vec![2, 0]).is_err());
    }

    #[test]
    fn lex_order_first_axis_most_significant() {
        let a = MultiIndex::new(vec![2, 9]).unwrap();
        let b = MultiIndex::new(vec![3, 1]).unwrap();
        assert!(a < b);
    }

    #[test]
    fn hypercube_grid_1d() {
        let n = MultiIndex::new(vec![2]).unwrap();
        let g = hypercube_grid(&n, &Hypercube::unit(1)).unwrap();
        let pts: Vec<f64> = (0..g.dim()).map(|k| g.point(k)[0]).collect();
        assert_eq!(pts, vec![0.5, 1.0]);

        let q = Hypercube::new(vec![1], 2).unwrap();
        let g = hypercube_grid(&n, &q).unwrap();
        let pts: Vec<f64> = (0..g.dim()).map(|k| g.point(k)[0]).collect();
        assert_eq!(pts, vec![1.5, 2.0, 2.5, 3.0]);
    }

    #[test]
    fn hypercube_grid_single_point() {
        let n = MultiIndex::new(vec![1, 1]).unwrap();
        let g = hypercube_grid(&n, &Hypercube::unit(2)).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.point(0), vec![1.0, 1.0]);
    }

    #[test]
    fn unit_square_grids() {
        let sq = DomainSpec::unit_square();
        let g = domain_grid(&MultiIndex::square(2, 4), &sq).unwrap();
        // the 9 interior points {1,2,3}/4 × {1,2,3}/4
        assert_eq!(g.dim(), 9);
        for k in 0..9 {
            let i = g.index(k);
            assert!(i.iter().all(|&v| (1..=3).contains(&v)));
        }
        let g2 = domain_grid(&MultiIndex::square(2, 2), &sq).unwrap();
        assert_eq!(g2.dim(), 1);
        assert_eq!(g2.point(0), vec![0.5, 0.5]);
    }

    #[test]
    fn cusp_grid_small() {
        // frozen against an independent enumeration oracle
        let cusp = DomainSpec::cusp();
        let g = domain_grid(&MultiIndex::square(2, 4), &cusp).unwrap();
        assert_eq!(g.dim(), 10);
        let expected: Vec<Vec<i64>> = vec![
            vec![1, 1], vec![1, 2], vec![1, 3],
            vec![2, 1], vec![2, 2], vec![2, 3],
            vec![3, 1], vec![3, 2], vec![3, 3],
            vec![4, 1],
        ];
        assert_eq!(g.indices(), expected.as_slice());
        assert_eq!(
            domain_grid(&MultiIndex::square(2, 8), &cusp).unwrap().dim(),
            68
        );
        assert_eq!(
            domain_grid(&MultiIndex::square(2, 16), &cusp).unwrap().dim(),
            342
        );
    }

    #[test]
    fn cusp_dim_bounded_by_measure() {
        let cusp = DomainSpec::cusp();
        for m in [8usize, 16, 32] {
            let n = MultiIndex::square(2, m);
            let g = domain_grid(&n, &cusp).unwrap();
            assert!(g.dim() as f64 <= cusp.measure * n.n_total() as f64);
        }
    }

    #[test]
    fn disk_dims_frozen() {
        let disk = DomainSpec::disk();
        for (m, want) in [(16usize, 137usize), (32, 673), (64, 2957)] {
            let g = domain_grid(&MultiIndex::square(2, m), &disk).unwrap();
            assert_eq!(g.dim(), want);
        }
    }

    #[test]
    fn exhaustion_measures() {
        let cusp = DomainSpec::cusp();
        let o1 = exhaustion_domain(&cusp, 1.0).unwrap();
        assert!((o1.measure - 1.0).abs() < 1e-15);
        let o2 = exhaustion_domain(&cusp, 2.0).unwrap();
        assert!((o2.measure - 1.5).abs() < 1e-15);
        // saturated exhaustion of a bounded domain
        let sq = DomainSpec::unit_square();
        let st = exhaustion_domain(&sq, 5.0).unwrap();
        assert!((st.measure - 1.0).abs() < 1e-15);
        let g_full = domain_grid(&MultiIndex::square(2, 8), &sq).unwrap();
        let g_t = domain_grid(&MultiIndex::square(2, 8), &st).unwrap();
        assert_eq!(g_full.indices(), g_t.indices());
    }

    #[test]
    fn exhaustion_grids_nested() {
        let cusp = DomainSpec::cusp();
        let n = MultiIndex::square(2, 12);
        let full = domain_grid(&n, &cusp).unwrap();
        let mut prev: Option<Grid> = None;
        for t in [1.0, 2.0, 4.0, 8.0] {
            let gt = domain_grid(&n, &exhaustion_domain(&cusp, t).unwrap()).unwrap();
            for idx in gt.indices() {
                assert!(full.find(idx).is_some());
            }
            if let Some(p) = &prev {
                for idx in p.indices() {
                    assert!(gt.find(idx).is_some());
                }
            }
            prev = Some(gt);
        }
    }

    #[test]
    fn measures_registry() {
        assert!((DomainSpec::unit_square().measure - 1.0).abs() < 1e-15);
        assert!((DomainSpec::cusp().measure - 2.0).abs() < 1e-15);
        assert!((DomainSpec::disk().measure - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_measure_of_disk_intersection() {
        // disk ∩ unit square = disk; the MC estimate must hit π/4 within
        // a few standard errors
        let inter =
            DomainSpec::intersection(&DomainSpec::disk(), &DomainSpec::unit_square()).unwrap();
        match inter.provenance {
            MeasureProvenance::MonteCarlo { std_error, .. } => {
                assert!((inter.measure - std::f64::consts::FRAC_PI_4).abs() < 5.0 * std_error);
            }
            _ => panic!("expected Monte-Carlo provenance"),
        }
    }

    #[test]
    fn box_inside_implies_indicator() {
        for name in DomainSpec::builtin_names() {
            let dom = DomainSpec::builtin(name).unwrap();
            let g = domain_grid(&MultiIndex::square(2, 8), &dom).unwrap();
            let h = g.halfwidths();
            for k in 0..g.dim() {
                let p = g.point(k);
                assert!(dom.box_inside(&p, &h));
                assert!(dom.indicator(&p), "{name} point {p:?}");
            }
        }
    }

    #[test]
    fn hypercube_containment() {
        let q1 = Hypercube::new(vec![1, 1], 1).unwrap();
        let q2 = Hypercube::new(vec![0, 0], 2).unwrap();
        assert!(q1.contained_in(&q2));
        assert!(!q2.contained_in(&q1));
    }

    #[test]
    fn enclosing_hypercube_covers_grid() {
        let cusp = DomainSpec::cusp();
        let n = MultiIndex::square(2, 8);
        let g = domain_grid(&n, &cusp).unwrap();
        let q = g.enclosing_hypercube();
        for idx in g.indices() {
            assert!(q.contains_lattice(idx, &n));
        }
    }

    #[test]
    fn dimension_ratio_improves_under_refinement() {
        for name in ["unit_square", "disk", "axis_box"] {
            let dom = DomainSpec::builtin(name).unwrap();
            let mut errs = Vec::new();
            for m in [8usize, 16, 32, 64, 128] {
                let n = MultiIndex::square(2, m);
                let g = domain_grid(&n, &dom).unwrap();
                errs.push((g.dim() as f64 / n.n_total() as f64 - dom.measure).abs());
            }
            for w in errs.windows(2) {
                assert!(w[1] < w[0] + 1e-9, "{name}: {errs:?}");
            }
            assert!(*errs.last().unwrap() < 0.05, "{name}: {errs:?}");
        }
    }
}
