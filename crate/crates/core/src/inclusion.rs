//! Concrete *-subalgebras of `M_N`, unital inclusions, relative commutants,
//! Wedderburn block data and inclusion matrices.
//!
//! A [`ConcreteAlgebra`] stores an orthonormal basis of its underlying
//! subspace as the columns of an `N² x d` matrix of vectorized elements, so
//! subspace questions reduce to dense linear algebra on those columns.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, seeded_rng, CMat, CVec, Orthonormalizer, RANK_TOL};

/// Subspace tolerance for membership and containment checks.
pub const SUBSPACE_TOL: f64 = 1e-9;

const BLOCK_ATTEMPTS: u64 = 12;
const DEFAULT_BLOCK_SEED: u64 = 0x0b10c5;

#[derive(Debug, Clone)]
pub struct ConcreteAlgebra {
    size: usize,
    q: CMat,
    unital: bool,
}

impl ConcreteAlgebra {
    /// Wraps orthonormal columns of vectorized `size x size` matrices.
    pub(crate) fn from_columns(size: usize, q: CMat) -> Self {
        let mut alg = ConcreteAlgebra {
            size,
            q,
            unital: false,
        };
        alg.unital = alg.contains(&linalg::identity(size), SUBSPACE_TOL);
        alg
    }

    /// Orthonormalized span of `elements`, without any closure check.
    pub fn span_unchecked(size: usize, elements: &[CMat]) -> Self {
        let cols: Vec<CVec> = elements.iter().map(linalg::vectorize).collect();
        let stacked = linalg::stack_columns(&cols, size * size);
        Self::from_columns(size, linalg::column_span(&stacked, RANK_TOL))
    }

    /// Span of `elements`, which must already be a unital *-algebra.
    pub fn span(size: usize, elements: &[CMat]) -> Result<Self> {
        let alg = Self::span_unchecked(size, elements);
        alg.verify()?;
        Ok(alg)
    }

    /// All of `M_n`.
    pub fn full(n: usize) -> Self {
        Self::from_columns(n, linalg::identity(n * n))
    }

    /// `ℂ·1` in `M_n`.
    pub fn scalars(n: usize) -> Self {
        Self::span_unchecked(n, &[linalg::identity(n)])
    }

    /// Block-diagonal algebra `⊕ M_{n_j}` inside `M_N`.
    pub fn from_ambient(ambient: &crate::multimatrix::AmbientAlgebra) -> Self {
        Self::span_unchecked(ambient.size(), &ambient.matrix_units())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    /// Orthonormal columns (vectorized, Euclidean norm 1).
    pub fn basis_matrix(&self) -> &CMat {
        &self.q
    }

    /// Basis element `k`, normalized so that `Tr(b* b)/N = 1`.
    pub fn element(&self, k: usize) -> CMat {
        let col: CVec = self.q.column(k).into_owned();
        linalg::unvectorize(&col, self.size).scale(linalg::sqrt(self.size as f64))
    }

    /// Basis orthonormal under the normalized Hilbert-Schmidt product.
    pub fn basis(&self) -> Vec<CMat> {
        (0..self.dim()).map(|k| self.element(k)).collect()
    }

    /// Real-linear Hermitian spanning set.
    pub fn hermitian_basis(&self) -> Vec<CMat> {
        let mut out = Vec::new();
        let mut gs = Orthonormalizer::new(self.size * self.size);
        for b in self.basis() {
            let re = linalg::hermitian_part(&b);
            let im = (&b - b.adjoint()).scale(0.5) * Complex64::new(0.0, -1.0);
            let reference = linalg::frobenius(&b);
            for h in [re, im] {
                if gs.try_add_against(&linalg::vectorize(&h), reference).is_some() {
                    out.push(h);
                }
            }
        }
        out
    }

    pub fn coordinates(&self, x: &CMat) -> CVec {
        self.q.ad_mul(&linalg::vectorize(x))
    }

    /// Orthogonal (Hilbert-Schmidt) projection onto the span.
    pub fn project(&self, x: &CMat) -> CMat {
        let v = &self.q * self.coordinates(x);
        linalg::unvectorize(&v, self.size)
    }

    /// `‖x − P x‖ / ‖x‖` in Frobenius norm; 0 for `x = 0`.
    pub fn residual(&self, x: &CMat) -> f64 {
        let nx = linalg::frobenius(x);
        if nx == 0.0 {
            return 0.0;
        }
        linalg::frobenius(&(x - self.project(x))) / nx
    }

    pub fn contains(&self, x: &CMat, tol: f64) -> bool {
        x.nrows() == self.size && x.ncols() == self.size && self.residual(x) <= tol
    }

    /// Largest relative distance from a basis vector of `other` to `self`.
    pub fn containment_residual(&self, other: &ConcreteAlgebra) -> f64 {
        if other.size != self.size {
            return 1.0;
        }
        linalg::containment_residual(&other.q, &self.q)
    }

    pub fn contains_algebra(&self, other: &ConcreteAlgebra, tol: f64) -> bool {
        self.containment_residual(other) <= tol
    }

    /// Sine of the largest principal angle between the two subspaces.
    pub fn distance(&self, other: &ConcreteAlgebra) -> f64 {
        if other.size != self.size {
            return 1.0;
        }
        linalg::subspace_distance(&self.q, &other.q)
    }

    pub fn gram_residual(&self) -> f64 {
        let g = self.q.adjoint() * &self.q - CMat::identity(self.dim(), self.dim());
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest relative residual of adjoints and products projected back
    /// onto the span. Exhaustive for small dimension, sampled otherwise.
    pub fn closure_residual(&self) -> f64 {
        let basis = self.basis();
        let mut worst = basis
            .iter()
            .map(|b| self.residual(&b.adjoint()))
            .fold(0.0, f64::max);
        if basis.len() <= 16 {
            for x in &basis {
                for y in &basis {
                    worst = worst.max(self.product_residual(x, y));
                }
            }
        } else {
            let mut rng = seeded_rng(0xc105);
            for _ in 0..48 {
                let x = self.random_element(&mut rng);
                let y = self.random_element(&mut rng);
                worst = worst.max(self.product_residual(&x, &y));
            }
        }
        worst
    }

    /// `‖xy − P(xy)‖` relative to `‖x‖‖y‖/√size`, so that products vanishing
    /// up to rounding are not amplified.
    fn product_residual(&self, x: &CMat, y: &CMat) -> f64 {
        let xy = x * y;
        let scale = linalg::frobenius(x) * linalg::frobenius(y) / linalg::sqrt(self.size as f64);
        if scale == 0.0 {
            return 0.0;
        }
        linalg::frobenius(&(&xy - self.project(&xy))) / scale
    }

    pub fn verify(&self) -> Result<()> {
        if !self.unital {
            return Err(Error::NotAnAlgebra(self.residual(&linalg::identity(self.size))));
        }
        let r = self.closure_residual().max(self.gram_residual());
        if r > SUBSPACE_TOL {
            return Err(Error::NotAnAlgebra(r));
        }
        Ok(())
    }

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> CMat {
        let coeffs = linalg::random_complex_matrix(rng, self.dim(), 1);
        let v = &self.q * coeffs.column(0);
        linalg::unvectorize(&v, self.size).scale(linalg::sqrt(self.size as f64))
    }

    pub fn random_hermitian<R: Rng>(&self, rng: &mut R) -> CMat {
        linalg::hermitian_part(&self.random_element(rng))
    }
}

/// Smallest unital *-subalgebra of `M_size` containing `generators`.
///
/// Grows an orthonormal basis from the unit by right multiplication with the
/// generators and their adjoints until no new direction appears.
pub fn subalgebra_from_generators(size: usize, generators: &[CMat]) -> ConcreteAlgebra {
    let mut gens: Vec<CMat> = Vec::new();
    for g in generators {
        if linalg::frobenius(g) == 0.0 {
            continue;
        }
        gens.push(g.clone());
        gens.push(g.adjoint());
    }
    let norms: Vec<f64> = gens.iter().map(linalg::spectral_norm).collect();
    let mut gs = Orthonormalizer::new(size * size);
    let one = linalg::identity(size);
    let first = gs.try_add(&linalg::vectorize(&one)).expect("unit is nonzero");
    let mut frontier = vec![first];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for w in &frontier {
            let wm = linalg::unvectorize(w, size);
            for (g, gn) in gens.iter().zip(&norms) {
                // w has unit Frobenius norm, so ‖w g‖ ≤ ‖g‖.
                if let Some(q) = gs.try_add_against(&linalg::vectorize(&(&wm * g)), *gn) {
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    ConcreteAlgebra::from_columns(size, gs.into_matrix())
}

/// `C ∨ D`, the *-algebra generated by both.
pub fn join(c_alg: &ConcreteAlgebra, d_alg: &ConcreteAlgebra) -> ConcreteAlgebra {
    let mut gens = c_alg.basis();
    gens.extend(d_alg.basis());
    subalgebra_from_generators(c_alg.size, &gens)
}

/// `C ∧ D = C ∩ D` as subspaces.
pub fn intersect(c_alg: &ConcreteAlgebra, d_alg: &ConcreteAlgebra) -> Result<ConcreteAlgebra> {
    if c_alg.size != d_alg.size {
        return Err(Error::ShapeMismatch {
            expected: c_alg.size,
            got_rows: d_alg.size,
            got_cols: d_alg.size,
        });
    }
    let qc = &c_alg.q;
    let qd = &d_alg.q;
    // Directions of C with (numerically) zero distance to D.
    let residual = qc - qd * (qd.adjoint() * qc);
    let kernel = absolute_null_space(&residual, RANK_TOL);
    let q = linalg::column_span(&(qc * kernel), RANK_TOL);
    Ok(ConcreteAlgebra::from_columns(c_alg.size, q))
}

/// `{x ∈ T : xs = sx for all s ∈ S}`.
pub fn relative_commutant(s_alg: &ConcreteAlgebra, t_alg: &ConcreteAlgebra) -> Result<ConcreteAlgebra> {
    if s_alg.size != t_alg.size {
        return Err(Error::ShapeMismatch {
            expected: t_alg.size,
            got_rows: s_alg.size,
            got_cols: s_alg.size,
        });
    }
    Ok(commutant_of(&s_alg.basis(), t_alg))
}

/// `{x ∈ T : xs = sx for every s in elements}`.
pub fn commutant_of(elements: &[CMat], t_alg: &ConcreteAlgebra) -> ConcreteAlgebra {
    let n = t_alg.size;
    let t_basis = t_alg.basis();
    let rows = elements.len() * n * n;
    let mut m = CMat::zeros(rows, t_basis.len());
    for (j, x) in t_basis.iter().enumerate() {
        for (k, s) in elements.iter().enumerate() {
            let comm = linalg::commutator(x, s);
            let off = k * n * n;
            for (r, z) in comm.iter().enumerate() {
                m[(off + r, j)] = *z;
            }
        }
    }
    // Basis elements have Frobenius norm sqrt(n); a commutator that vanishes
    // exactly is measured against that scale.
    let scale = elements.iter().map(linalg::frobenius).fold(1.0, f64::max);
    let kernel = absolute_null_space(&m, RANK_TOL * scale * linalg::sqrt(n as f64));
    let q = linalg::column_span(&(&t_alg.q * kernel), RANK_TOL);
    ConcreteAlgebra::from_columns(n, q)
}

/// Right null space with an absolute singular-value cut.
pub(crate) fn absolute_null_space(m: &CMat, cut: f64) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    let reduced = if m.nrows() < cols {
        let mut padded = CMat::zeros(cols, cols);
        padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let f = linalg::svd(&reduced);
    let keep: Vec<usize> = (0..f.s.len()).filter(|&k| f.s[k] <= cut).collect();
    linalg::select_columns(&f.v, &keep)
}

/// Wedderburn data of a finite-dimensional *-algebra `S ⊆ M_N`.
///
/// Block `j` is `M_{n_j}` acting with multiplicity `mult_j`. `units[j]`
/// holds the matrix units `e_ab` (row-major, `a * n_j + b`). The columns of
/// `unitary` are ordered block by block, copy-major, so that `U* s U` is
/// `⊕_j 1_{mult_j} ⊗ s_j`.
#[derive(Debug, Clone)]
pub struct BlockStructure {
    pub dims: crate::multimatrix::DimensionVector,
    pub multiplicities: Vec<usize>,
    pub central: Vec<CMat>,
    pub units: Vec<Vec<CMat>>,
    pub unitary: CMat,
}

impl BlockStructure {
    pub fn unit(&self, block: usize, a: usize, b: usize) -> &CMat {
        let n = self.dims.dims()[block];
        &self.units[block][a * n + b]
    }

    /// A minimal projection in block `j`.
    pub fn minimal_projection(&self, block: usize) -> &CMat {
        self.unit(block, 0, 0)
    }
}

pub fn block_structure(s_alg: &ConcreteAlgebra) -> Result<BlockStructure> {
    block_structure_seeded(s_alg, DEFAULT_BLOCK_SEED)
}

/// Block extraction with an explicit seed for the random splitting elements.
/// Retries with derived seeds when a random element fails to separate.
pub fn block_structure_seeded(s_alg: &ConcreteAlgebra, seed: u64) -> Result<BlockStructure> {
    s_alg.verify()?;
    let center = center_of(s_alg, seed);
    let mut last = Error::NotAnAlgebra(f64::NAN);
    for attempt in 0..BLOCK_ATTEMPTS {
        match try_block_structure(s_alg, &center, seed.wrapping_add(attempt * 7919)) {
            Ok(bs) => return Ok(bs),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// `Z(S)`, as the commutant in `S` of its basis or of four seeded random
/// elements (which generate `S` generically).
fn center_of(s_alg: &ConcreteAlgebra, seed: u64) -> ConcreteAlgebra {
    if s_alg.dim() <= 8 {
        return commutant_of(&s_alg.basis(), s_alg);
    }
    let mut rng = seeded_rng(seed ^ 0xc3);
    let gens: Vec<CMat> = (0..4).map(|_| s_alg.random_element(&mut rng)).collect();
    commutant_of(&gens, s_alg)
}

/// Groups sorted values whose consecutive gaps are at most `tol`.
fn cluster(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if v - values[*g.last().unwrap()] <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

fn spectral_tol(values: &[f64]) -> f64 {
    let spread = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    1e-6 * spread.max(1.0)
}

fn columns(m: &CMat, idx: &[usize]) -> CMat {
    let mut out = CMat::zeros(m.nrows(), idx.len());
    for (j, &k) in idx.iter().enumerate() {
        out.set_column(j, &m.column(k));
    }
    out
}

fn compare_projections(p: &CMat, q: &CMat) -> Ordering {
    let first = |m: &CMat| (0..m.nrows()).find(|&i| m[(i, i)].re > 1e-9).unwrap_or(m.nrows());
    first(p).cmp(&first(q)).then_with(|| {
        for (x, y) in p.iter().zip(q.iter()) {
            for (a, b) in [(x.re, y.re), (x.im, y.im)] {
                if (a - b).abs() > 1e-9 {
                    return a.total_cmp(&b);
                }
            }
        }
        Ordering::Equal
    })
}

fn try_block_structure(s_alg: &ConcreteAlgebra, center: &ConcreteAlgebra, seed: u64) -> Result<BlockStructure> {
    let n = s_alg.size();
    let mut rng = seeded_rng(seed);
    let tol = 1e-7;

    // Minimal central projections from a generic central Hermitian element.
    let z = center.random_hermitian(&mut rng);
    let (values, vectors) = linalg::herm_eigen(&z);
    let groups = cluster(&values, spectral_tol(&values));
    if groups.len() != center.dim() {
        return Err(Error::NotAnAlgebra(groups.len() as f64));
    }
    struct Block {
        p: CMat,
        frame: CMat,
        n: usize,
        mult: usize,
    }
    let s_basis = s_alg.basis();
    let mut blocks = Vec::new();
    for g in &groups {
        let frame = columns(&vectors, g);
        let p = &frame * frame.adjoint();
        if !s_alg.contains(&p, tol) || !center.contains(&p, tol) {
            return Err(Error::NotAnAlgebra(s_alg.residual(&p)));
        }
        let compressed: Vec<CVec> = s_basis.iter().map(|s| linalg::vectorize(&(s * &p))).collect();
        let rank = linalg::column_span(&linalg::stack_columns(&compressed, n * n), RANK_TOL).ncols();
        let nj = isqrt(rank);
        if nj * nj != rank || g.len() % nj != 0 {
            return Err(Error::NotAnAlgebra(rank as f64));
        }
        blocks.push(Block {
            p,
            frame,
            n: nj,
            mult: g.len() / nj,
        });
    }
    let total: usize = blocks.iter().map(|b| b.n * b.n).sum();
    if total != s_alg.dim() {
        return Err(Error::NotAnAlgebra((total as f64 - s_alg.dim() as f64).abs()));
    }
    blocks.sort_by(|a, b| {
        let ka = (0..n).find(|&i| a.p[(i, i)].re > 1e-9);
        let kb = (0..n).find(|&i| b.p[(i, i)].re > 1e-9);
        ka.cmp(&kb)
            .then(a.n.cmp(&b.n))
            .then_with(|| compare_projections(&a.p, &b.p))
    });

    let mut dims = Vec::new();
    let mut multiplicities = Vec::new();
    let mut central = Vec::new();
    let mut units = Vec::new();
    let mut unitary = CMat::zeros(n, n);
    let mut col = 0;
    for blk in blocks {
        let (nj, mult) = (blk.n, blk.mult);
        // Split the block into n_j minimal projections of rank mult.
        let a = s_alg.random_hermitian(&mut rng);
        let compressed = blk.frame.adjoint() * &a * &blk.frame;
        let (vals, vecs) = linalg::herm_eigen(&compressed);
        let parts = cluster(&vals, spectral_tol(&vals));
        if parts.len() != nj || parts.iter().any(|p| p.len() != mult) {
            return Err(Error::NotAnAlgebra(parts.len() as f64));
        }
        let frames: Vec<CMat> = parts.iter().map(|p| &blk.frame * columns(&vecs, p)).collect();
        // Partial isometries from the polar part of q_1 y q_a.
        let y = s_alg.random_element(&mut rng);
        let mut polar: Vec<CMat> = vec![CMat::identity(mult, mult)];
        for fa in frames.iter().skip(1) {
            let m = frames[0].adjoint() * &y * fa;
            let f = linalg::svd(&m);
            let smin = f.s.iter().cloned().fold(f64::INFINITY, f64::min);
            if smin <= 1e-6 * f.top() {
                return Err(Error::NotAnAlgebra(smin));
            }
            polar.push(&f.u * f.v.adjoint());
        }
        let mut block_units = Vec::with_capacity(nj * nj);
        for a_idx in 0..nj {
            for b_idx in 0..nj {
                let left = &frames[a_idx] * polar[a_idx].adjoint();
                let right = &frames[b_idx] * polar[b_idx].adjoint();
                block_units.push(left * right.adjoint());
            }
        }
        for u in block_units.iter().take(nj) {
            if !s_alg.contains(u, tol) {
                return Err(Error::NotAnAlgebra(s_alg.residual(u)));
            }
        }
        for r in 0..mult {
            for a_idx in 0..nj {
                let v = &frames[a_idx] * polar[a_idx].adjoint().column(r);
                unitary.set_column(col, &v);
                col += 1;
            }
        }
        dims.push(nj);
        multiplicities.push(mult);
        central.push(blk.p);
        units.push(block_units);
    }
    let defect = (unitary.adjoint() * &unitary - CMat::identity(n, n)).norm();
    if defect > 1e-8 {
        return Err(Error::NotAnAlgebra(defect));
    }
    Ok(BlockStructure {
        dims: crate::multimatrix::DimensionVector::new(dims)?,
        multiplicities,
        central,
        units,
        unitary,
    })
}

fn isqrt(k: usize) -> usize {
    let mut r = linalg::sqrt(k as f64) as usize;
    while r * r > k {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= k {
        r += 1;
    }
    r
}

/// `B ⊂ A` inside a common `M_N`, sharing the unit.
#[derive(Debug, Clone)]
pub struct UnitalInclusion {
    sub: ConcreteAlgebra,
    sup: ConcreteAlgebra,
    label: String,
}

impl UnitalInclusion {
    pub fn new(sub: ConcreteAlgebra, sup: ConcreteAlgebra, label: impl Into<String>) -> Result<Self> {
        if sub.size != sup.size {
            return Err(Error::ShapeMismatch {
                expected: sup.size,
                got_rows: sub.size,
                got_cols: sub.size,
            });
        }
        if !sub.is_unital() || !sup.is_unital() {
            return Err(Error::NotUnital("both algebras must contain the ambient unit".into()));
        }
        let r = sup.containment_residual(&sub);
        if r > SUBSPACE_TOL {
            return Err(Error::NotSubalgebra(r));
        }
        Ok(UnitalInclusion {
            sub,
            sup,
            label: label.into(),
        })
    }

    pub fn sub(&self) -> &ConcreteAlgebra {
        &self.sub
    }

    pub fn sup(&self) -> &ConcreteAlgebra {
        &self.sup
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn size(&self) -> usize {
        self.sup.size
    }

    /// Checks `B ⊆ C ⊆ A`.
    pub fn check_intermediate(&self, c_alg: &ConcreteAlgebra) -> Result<()> {
        if c_alg.size != self.size() {
            return Err(Error::NotIntermediate("size differs from the inclusion".into()));
        }
        let lower = c_alg.containment_residual(&self.sub);
        let upper = self.sup.containment_residual(c_alg);
        if lower > SUBSPACE_TOL || upper > SUBSPACE_TOL {
            return Err(Error::NotIntermediate(format!(
                "B ⊆ C residual {lower:e}, C ⊆ A residual {upper:e}"
            )));
        }
        Ok(())
    }
}

/// Inclusion matrix with rows indexed by blocks of the subalgebra and
/// columns by blocks of the ambient algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionMatrixData {
    pub lambda: Vec<Vec<usize>>,
    pub sub_dims: crate::multimatrix::DimensionVector,
    pub sup_dims: crate::multimatrix::DimensionVector,
}

impl InclusionMatrixData {
    /// Builds and checks `sup_dims = Λᵀ sub_dims`.
    pub fn new(
        lambda: Vec<Vec<usize>>,
        sub_dims: crate::multimatrix::DimensionVector,
        sup_dims: crate::multimatrix::DimensionVector,
    ) -> Result<Self> {
        if lambda.len() != sub_dims.len() || lambda.iter().any(|row| row.len() != sup_dims.len()) {
            return Err(Error::InvalidDimensions(format!(
                "inclusion matrix shape does not match {} x {} blocks",
                sub_dims.len(),
                sup_dims.len()
            )));
        }
        for (j, &nj) in sup_dims.dims().iter().enumerate() {
            let got: usize = lambda.iter().zip(sub_dims.dims()).map(|(row, &k)| row[j] * k).sum();
            if got != nj {
                return Err(Error::NotUnital(format!(
                    "block {j}: Σ λ_ij k_i = {got}, expected {nj}"
                )));
            }
        }
        Ok(InclusionMatrixData {
            lambda,
            sub_dims,
            sup_dims,
        })
    }

    pub fn rows(&self) -> usize {
        self.lambda.len()
    }

    pub fn cols(&self) -> usize {
        self.sup_dims.len()
    }

    pub fn as_real_matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows(), self.cols(), |i, j| self.lambda[i][j] as f64)
    }
}

pub fn inclusion_matrix(inc: &UnitalInclusion) -> Result<InclusionMatrixData> {
    let sub = block_structure(&inc.sub)?;
    let sup = block_structure(&inc.sup)?;
    inclusion_matrix_from(&sub, &sup)
}

/// `λ_ij = rank(q_i P_j) / mult_j` for minimal projections `q_i` of the sub
/// blocks and minimal central projections `P_j` of the sup blocks.
pub fn inclusion_matrix_from(sub: &BlockStructure, sup: &BlockStructure) -> Result<InclusionMatrixData> {
    let mut lambda = Vec::new();
    for i in 0..sub.dims.len() {
        let q = sub.minimal_projection(i);
        let mut row = Vec::new();
        for (p, &mult) in sup.central.iter().zip(&sup.multiplicities) {
            let x = linalg::trace(&(q * p)).re / mult as f64;
            let rounded = libm::round(x);
            if (x - rounded).abs() > 1e-6 || rounded < 0.0 {
                return Err(Error::NotUnital(format!("non-integral multiplicity {x}")));
            }
            row.push(rounded as usize);
        }
        lambda.push(row);
    }
    InclusionMatrixData::new(lambda, sub.dims.clone(), sup.dims.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::multimatrix::AmbientAlgebra;

    fn unit(n: usize, i: usize, j: usize) -> CMat {
        let mut m = CMat::zeros(n, n);
        m[(i, j)] = c(1.0);
        m
    }

    fn left_m2(n2: usize) -> ConcreteAlgebra {
        let gens: Vec<CMat> = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| linalg::kron(&unit(2, i, j), &linalg::identity(n2)))
            .collect();
        ConcreteAlgebra::span(2 * n2, &gens).unwrap()
    }

    fn right_m2() -> ConcreteAlgebra {
        let gens: Vec<CMat> = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| linalg::kron(&linalg::identity(2), &unit(2, i, j)))
            .collect();
        ConcreteAlgebra::span(4, &gens).unwrap()
    }

    #[test]
    fn empty_generators_give_scalars() {
        let alg = subalgebra_from_generators(2, &[]);
        assert_eq!(alg.dim(), 1);
        assert!(alg.is_unital());
    }

    #[test]
    fn single_matrix_unit_generates_m2() {
        let alg = subalgebra_from_generators(2, &[unit(2, 0, 1)]);
        assert_eq!(alg.dim(), 4);
        assert!(alg.verify().is_ok());
    }

    #[test]
    fn commuting_tensor_factors_generate_m4() {
        let j = join(&left_m2(2), &right_m2());
        assert_eq!(j.dim(), 16);
    }

    #[test]
    fn intersections() {
        let c_alg = left_m2(2);
        let d_alg = right_m2();
        assert!(intersect(&c_alg, &c_alg).unwrap().distance(&c_alg) < 1e-12);
        let meet = intersect(&c_alg, &d_alg).unwrap();
        assert_eq!(meet.dim(), 1);
        assert!(meet.contains(&linalg::identity(4), 1e-12));
        let full = ConcreteAlgebra::full(4);
        assert!(intersect(&c_alg, &full).unwrap().distance(&c_alg) < 1e-10);
    }

    #[test]
    fn commutants() {
        let m2 = ConcreteAlgebra::full(2);
        assert_eq!(relative_commutant(&m2, &m2).unwrap().dim(), 1);
        let comm = relative_commutant(&left_m2(2), &ConcreteAlgebra::full(4)).unwrap();
        assert_eq!(comm.dim(), 4);
        assert!(comm.distance(&right_m2()) < 1e-10);
        let full = ConcreteAlgebra::full(3);
        assert_eq!(relative_commutant(&ConcreteAlgebra::scalars(3), &full).unwrap().dim(), 9);
    }

    #[test]
    fn block_structure_examples() {
        let bs = block_structure(&ConcreteAlgebra::full(3)).unwrap();
        assert_eq!(bs.dims.dims(), &[3]);
        let mut d = CMat::identity(2, 2);
        d[(1, 1)] = c(-1.0);
        let diag = ConcreteAlgebra::span(2, &[linalg::identity(2), d]).unwrap();
        let bs = block_structure(&diag).unwrap();
        assert_eq!(bs.dims.dims(), &[1, 1]);
    }

    #[test]
    fn block_unitary_diagonalizes_tensor_factor() {
        let alg = left_m2(3);
        let bs = block_structure(&alg).unwrap();
        assert_eq!(bs.dims.dims(), &[2]);
        assert_eq!(bs.multiplicities, vec![3]);
        let mut rng = seeded_rng(3);
        let x = alg.random_element(&mut rng);
        let y = bs.unitary.adjoint() * &x * &bs.unitary;
        // Copy-major layout: three identical 2x2 diagonal blocks.
        for r in 0..3 {
            for s in 0..3 {
                let blk = y.view((2 * r, 2 * s), (2, 2)).into_owned();
                if r == s {
                    let first = y.view((0, 0), (2, 2)).into_owned();
                    assert!((blk - first).norm() < 1e-9);
                } else {
                    assert!(blk.norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn scalar_inclusion_matrix_is_row() {
        let amb = AmbientAlgebra::from_dims(&[2, 3]).unwrap();
        let sup = ConcreteAlgebra::from_ambient(&amb);
        let inc = UnitalInclusion::new(ConcreteAlgebra::scalars(5), sup, "c in m2+m3").unwrap();
        let lam = inclusion_matrix(&inc).unwrap();
        assert_eq!(lam.lambda, vec![vec![2, 3]]);
    }

    #[test]
    fn tensor_factor_inclusion_matrix() {
        let inc = UnitalInclusion::new(left_m2(2), ConcreteAlgebra::full(4), "m2 in m4").unwrap();
        assert_eq!(inclusion_matrix(&inc).unwrap().lambda, vec![vec![2]]);
    }

    #[test]
    fn non_subalgebra_rejected() {
        let amb = AmbientAlgebra::from_dims(&[1, 1]).unwrap();
        let diag = ConcreteAlgebra::from_ambient(&amb);
        let mut x = CMat::zeros(2, 2);
        x[(0, 1)] = c(1.0);
        x[(1, 0)] = c(1.0);
        let other = ConcreteAlgebra::span(2, &[linalg::identity(2), x]).unwrap();
        assert!(matches!(
            UnitalInclusion::new(other, diag, "bad"),
            Err(Error::NotSubalgebra(_))
        ));
    }

    #[test]
    fn non_algebra_span_rejected() {
        let e = unit(2, 0, 1);
        assert!(ConcreteAlgebra::span(2, &[linalg::identity(2), e]).is_err());
    }
}
