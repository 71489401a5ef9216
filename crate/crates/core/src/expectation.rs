//! Conditional expectations, quasi-bases, Watatani indices, Pimsner-Popa
//! constants and the minimal-index search.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::inclusion::{self, BlockStructure, ConcreteAlgebra, InclusionMatrixData, UnitalInclusion};
use crate::linalg::{self, c, seeded_rng, CMat, CVec};
use crate::multimatrix::TraceFunctional;

/// Reconstruction and independence tolerance for quasi-bases.
pub const QUASI_BASIS_TOL: f64 = 1e-8;
/// Default sample budget for [`pp_constant`].
pub const PP_SAMPLES: usize = 10_000;
/// Default refinement steps for [`pp_constant`].
pub const PP_REFINE_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectationKind {
    /// Orthogonal projection in the GNS inner product of a trace.
    TracePreserving,
    /// Dual expectation of a basic construction.
    Dual,
    /// Arbitrary linear map given by images of a source basis.
    Linear,
}

/// Pushdown data for a dual expectation `E₁: A₁ → L_A`.
///
/// With `{λᵢ}` a quasi-basis for `E` and `Ind` central, every `y ∈ A₁`
/// satisfies `E₁(y) = Σᵢ L(y λ̂ᵢ) L(Ind⁻¹ λᵢ*)` where `L(â)` is the left
/// multiplication operator of the vector `â`.
#[derive(Debug, Clone)]
pub(crate) struct Pushdown {
    pub left_ons: Vec<CMat>,
    pub vectors: Vec<CVec>,
    pub tails: Vec<CMat>,
}

impl Pushdown {
    fn left_of(&self, w: &CVec) -> CMat {
        let d = self.left_ons[0].nrows();
        let mut out = CMat::zeros(d, d);
        for (l, z) in self.left_ons.iter().zip(w.iter()) {
            if z.norm_sqr() != 0.0 {
                out += l * *z;
            }
        }
        out
    }

    fn apply(&self, y: &CMat) -> CMat {
        let d = y.nrows();
        let mut out = CMat::zeros(d, d);
        for (v, tail) in self.vectors.iter().zip(&self.tails) {
            out += self.left_of(&(y * v)) * tail;
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Repr {
    /// `E(x) = unvec(ons · functionals · vec x)`.
    Orthogonal { ons: CMat, functionals: CMat },
    Pushdown(Pushdown),
    /// `E(x) = Σ_k ⟨q_k, vec x⟩ images_k` over the source basis `q_k`.
    Images { images: Vec<CMat> },
}

#[derive(Debug, Clone)]
pub struct ConditionalExpectation {
    kind: ExpectationKind,
    size: usize,
    source: Option<ConcreteAlgebra>,
    target: ConcreteAlgebra,
    trace: Option<TraceFunctional>,
    repr: Repr,
}

impl ConditionalExpectation {
    pub(crate) fn from_pushdown(
        source: Option<ConcreteAlgebra>,
        target: ConcreteAlgebra,
        pushdown: Pushdown,
    ) -> Self {
        ConditionalExpectation {
            kind: ExpectationKind::Dual,
            size: target.size(),
            source,
            target,
            trace: None,
            repr: Repr::Pushdown(pushdown),
        }
    }

    /// Linear map fixed by the images of the source's orthonormal basis
    /// elements (as returned by [`ConcreteAlgebra::basis`]).
    pub fn from_images(source: ConcreteAlgebra, target: ConcreteAlgebra, images: Vec<CMat>) -> Result<Self> {
        if images.len() != source.dim() {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} images for a {}-dimensional source",
                images.len(),
                source.dim()
            )));
        }
        // Stored against the unit-norm vectorized basis.
        let scale = 1.0 / linalg::sqrt(source.size() as f64);
        let images = images.into_iter().map(|m| m.scale(scale)).collect();
        Ok(ConditionalExpectation {
            kind: ExpectationKind::Linear,
            size: source.size(),
            source: Some(source),
            target,
            trace: None,
            repr: Repr::Images { images },
        })
    }

    pub fn kind(&self) -> ExpectationKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn source(&self) -> Option<&ConcreteAlgebra> {
        self.source.as_ref()
    }

    pub fn target(&self) -> &ConcreteAlgebra {
        &self.target
    }

    pub fn trace(&self) -> Option<&TraceFunctional> {
        self.trace.as_ref()
    }

    fn require_source(&self) -> Result<&ConcreteAlgebra> {
        self.source
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("expectation has no materialized source".into()))
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        match &self.repr {
            Repr::Orthogonal { ons, functionals } => {
                let v = ons * (functionals * linalg::vectorize(x));
                linalg::unvectorize(&v, self.size)
            }
            Repr::Pushdown(p) => p.apply(x),
            Repr::Images { images } => {
                let src = self.source.as_ref().expect("image form always has a source");
                let coords = src.coordinates(x);
                let mut out = CMat::zeros(self.size, self.size);
                for (z, img) in coords.iter().zip(images) {
                    out += img * *z;
                }
                out
            }
        }
    }

    /// Dense matrix of `E` from source coordinates to target coordinates.
    pub fn map_matrix(&self) -> Result<CMat> {
        let src = self.require_source()?;
        let mut m = CMat::zeros(self.target.dim(), src.dim());
        for (k, b) in src.basis().iter().enumerate() {
            let img = self.target.coordinates(&self.apply(b));
            m.set_column(k, &img);
        }
        Ok(m)
    }

    /// Restriction to a subalgebra `R` of the source, with codomain `target`.
    pub fn restrict(&self, r_alg: &ConcreteAlgebra, target: ConcreteAlgebra) -> Result<Self> {
        let images: Vec<CMat> = r_alg.basis().iter().map(|b| self.apply(b)).collect();
        Self::from_images(r_alg.clone(), target, images)
    }

    /// Sampled verification of the defining properties.
    pub fn check(&self, samples: usize, seed: u64) -> Result<ExpectationChecks> {
        let src = self.require_source()?;
        let mut rng = seeded_rng(seed);
        let one = linalg::identity(self.size);
        let unital = linalg::frobenius(&(self.apply(&one) - &one)) / linalg::sqrt(self.size as f64);
        let mut idempotence: f64 = 0.0;
        let mut range: f64 = 0.0;
        let mut bimodular: f64 = 0.0;
        let mut positivity: f64 = 0.0;
        for _ in 0..samples {
            let a = src.random_element(&mut rng);
            let ea = self.apply(&a);
            let scale = linalg::frobenius(&a).max(1e-300);
            idempotence = idempotence.max(linalg::frobenius(&(self.apply(&ea) - &ea)) / scale);
            range = range.max(self.target.residual(&ea) * linalg::frobenius(&ea) / scale);
            let s1 = self.target.random_element(&mut rng);
            let s2 = self.target.random_element(&mut rng);
            let lhs = self.apply(&(&s1 * &a * &s2));
            let rhs = &s1 * &ea * &s2;
            let bscale = (linalg::frobenius(&s1) * scale * linalg::frobenius(&s2)).max(1e-300);
            bimodular = bimodular.max(linalg::frobenius(&(lhs - rhs)) / bscale);
            let pos = self.apply(&(a.adjoint() * &a));
            let herm = linalg::frobenius(&(&pos - pos.adjoint())) / (scale * scale);
            let low = -linalg::min_eigenvalue(&pos) / (scale * scale);
            positivity = positivity.max(herm).max(low);
        }
        Ok(ExpectationChecks {
            unital,
            idempotence,
            range,
            bimodular,
            positivity,
        })
    }
}

/// Worst residuals of the expectation axioms over a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationChecks {
    pub unital: f64,
    pub idempotence: f64,
    pub range: f64,
    pub bimodular: f64,
    /// Largest negative part (or non-Hermitian part) of `E(a*a)`.
    pub positivity: f64,
}

impl ExpectationChecks {
    pub fn max(&self) -> f64 {
        self.unital
            .max(self.idempotence)
            .max(self.range)
            .max(self.bimodular)
            .max(self.positivity)
    }
}

/// Löwdin-orthonormalizes `basis` in the inner product `τ(x*y)`.
pub(crate) fn trace_orthonormal(basis: &[CMat], tau: &TraceFunctional) -> Result<Vec<CMat>> {
    let d = basis.len();
    if d == 0 {
        return Ok(Vec::new());
    }
    let n = basis[0].nrows();
    let h = tau.density();
    // τ(x*y) = Tr(x* y h) = vec(x)ᴴ vec(y h).
    let mut x = CMat::zeros(n * n, d);
    let mut yh = CMat::zeros(n * n, d);
    for (k, b) in basis.iter().enumerate() {
        x.set_column(k, &linalg::vectorize(b));
        yh.set_column(k, &linalg::vectorize(&(b * h)));
    }
    let gram = linalg::hermitian_part(&(x.adjoint() * yh));
    let (values, _) = linalg::herm_eigen(&gram);
    let lo = values.first().copied().unwrap_or(0.0);
    let hi = values.last().copied().unwrap_or(0.0);
    if !(lo > 1e-12 * hi.max(1e-300)) {
        return Err(Error::TraceNotFaithful(lo));
    }
    let inv_sqrt = linalg::herm_function(&gram, |v| 1.0 / linalg::sqrt(v));
    let combined = x * inv_sqrt;
    Ok((0..d)
        .map(|k| linalg::unvectorize(&combined.column(k).into_owned(), n))
        .collect())
}

/// The `τ`-preserving conditional expectation of `A` onto `S`.
pub fn trace_preserving_expectation(
    a_alg: &ConcreteAlgebra,
    s_alg: &ConcreteAlgebra,
    tau: &TraceFunctional,
) -> Result<ConditionalExpectation> {
    let n = a_alg.size();
    if s_alg.size() != n || tau.size() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got_rows: s_alg.size(),
            got_cols: tau.size(),
        });
    }
    let r = a_alg.containment_residual(s_alg);
    if r > inclusion::SUBSPACE_TOL {
        return Err(Error::NotSubalgebra(r));
    }
    if a_alg.dim() <= 400 {
        trace_orthonormal(&a_alg.basis(), tau)?;
    }
    let ons = trace_orthonormal(&s_alg.basis(), tau)?;
    let h = tau.density();
    let mut ons_mat = CMat::zeros(n * n, ons.len());
    let mut functionals = CMat::zeros(ons.len(), n * n);
    for (k, s) in ons.iter().enumerate() {
        ons_mat.set_column(k, &linalg::vectorize(s));
        // τ(s* x) = Σ_{ij} (h s*)_{ij} x_{ji}.
        let w = (h * s.adjoint()).transpose();
        for (idx, z) in w.iter().enumerate() {
            functionals[(k, idx)] = *z;
        }
    }
    Ok(ConditionalExpectation {
        kind: ExpectationKind::TracePreserving,
        size: n,
        source: Some(a_alg.clone()),
        target: s_alg.clone(),
        trace: Some(tau.clone()),
        repr: Repr::Orthogonal {
            ons: ons_mat,
            functionals,
        },
    })
}

#[derive(Debug, Clone)]
pub struct QuasiBasis {
    pub elements: Vec<CMat>,
    /// `max ‖x − Σ E(xλᵢ)λᵢ*‖` over the source basis.
    pub left_residual: f64,
    /// `max ‖x − Σ λᵢE(λᵢ*x)‖` over the source basis.
    pub right_residual: f64,
}

pub fn quasi_basis(e: &ConditionalExpectation) -> Result<QuasiBasis> {
    quasi_basis_pivoted(e, None)
}

/// Module Gram-Schmidt over the source basis, visited in natural order or
/// in a seeded random order.
pub fn quasi_basis_pivoted(e: &ConditionalExpectation, seed: Option<u64>) -> Result<QuasiBasis> {
    let src = e.require_source()?;
    let mut order: Vec<usize> = (0..src.dim()).collect();
    if let Some(s) = seed {
        order.shuffle(&mut seeded_rng(s));
    }
    let basis = src.basis();
    let mut lambdas: Vec<CMat> = Vec::new();
    for &k in &order {
        let u = &basis[k];
        let mut r = u.clone();
        for _ in 0..2 {
            let mut correction = CMat::zeros(e.size, e.size);
            for l in &lambdas {
                correction += l * e.apply(&(l.adjoint() * &r));
            }
            r -= correction;
        }
        if linalg::frobenius(&r) <= 1e-9 * linalg::frobenius(u) {
            continue;
        }
        let g = e.apply(&(r.adjoint() * &r));
        let (_, inv_sqrt, rank) = linalg::psd_support_and_inv_sqrt(&g, 1e-10);
        if rank == 0 {
            continue;
        }
        let lam = &r * inv_sqrt;
        lambdas.push(lam);
    }
    let (left, right) = reconstruction_residuals(e, &lambdas, &basis);
    if left.max(right) > QUASI_BASIS_TOL {
        return Err(Error::DegenerateModule(left.max(right)));
    }
    Ok(QuasiBasis {
        elements: lambdas,
        left_residual: left,
        right_residual: right,
    })
}

/// Left and right reconstruction residuals of `lambdas` on `basis`,
/// relative to the Frobenius norm of each basis element.
pub fn reconstruction_residuals(e: &ConditionalExpectation, lambdas: &[CMat], basis: &[CMat]) -> (f64, f64) {
    let mut left: f64 = 0.0;
    let mut right: f64 = 0.0;
    for x in basis {
        let scale = linalg::frobenius(x).max(1e-300);
        let mut lsum = CMat::zeros(e.size, e.size);
        let mut rsum = CMat::zeros(e.size, e.size);
        for l in lambdas {
            lsum += e.apply(&(x * l)) * l.adjoint();
            rsum += l * e.apply(&(l.adjoint() * x));
        }
        left = left.max(linalg::frobenius(&(x - lsum)) / scale);
        right = right.max(linalg::frobenius(&(x - rsum)) / scale);
    }
    (left, right)
}

/// `Ind_w(E) = Σ λᵢλᵢ*` with its structural checks.
#[derive(Debug, Clone)]
pub struct IndexValue {
    pub element: CMat,
    /// Set when the element is a multiple of the unit.
    pub scalar: Option<f64>,
    /// Distinct eigenvalues of the element, ascending.
    pub block_values: Vec<f64>,
    pub norm: f64,
    pub min_eigenvalue: f64,
    pub centrality_residual: f64,
    /// Distance to the index from a differently pivoted quasi-basis.
    pub independence_residual: f64,
}

impl IndexValue {
    /// Classifies a central positive element.
    pub fn from_element(element: CMat) -> Self {
        let (values, _) = linalg::herm_eigen(&element);
        let lo = values.first().copied().unwrap_or(0.0);
        let hi = values.last().copied().unwrap_or(0.0);
        let mut block_values: Vec<f64> = Vec::new();
        for v in &values {
            match block_values.last() {
                Some(&last) if (v - last).abs() <= 1e-8 * hi.abs().max(1.0) => {}
                _ => block_values.push(*v),
            }
        }
        let n = element.nrows() as f64;
        let mean = linalg::trace(&element).re / n;
        let spread = linalg::spectral_norm(&(&element - linalg::identity(element.nrows()).scale(mean)));
        let scalar = (spread <= 1e-8 * hi.abs().max(1.0)).then_some(mean);
        IndexValue {
            norm: linalg::spectral_norm(&element),
            element,
            scalar,
            block_values,
            min_eigenvalue: lo,
            centrality_residual: 0.0,
            independence_residual: 0.0,
        }
    }

    pub fn scalar_multiple(n: usize, value: f64) -> Self {
        Self::from_element(linalg::identity(n).scale(value))
    }

    pub fn inverse(&self) -> CMat {
        linalg::herm_function(&self.element, |v| 1.0 / v)
    }
}

/// Index element of a given quasi-basis, checked for centrality, positivity
/// and invertibility.
pub fn index_from_quasi_basis(e: &ConditionalExpectation, qb: &QuasiBasis) -> Result<IndexValue> {
    let src = e.require_source()?;
    let mut ind = CMat::zeros(e.size, e.size);
    for l in &qb.elements {
        ind += l * l.adjoint();
    }
    let ind = linalg::hermitian_part(&ind);
    let scale = linalg::spectral_norm(&ind).max(1.0);
    let mut centrality: f64 = 0.0;
    for b in src.basis() {
        let comm = linalg::commutator(&ind, &b);
        centrality = centrality.max(linalg::spectral_norm(&comm) / (scale * linalg::spectral_norm(&b).max(1e-300)));
    }
    if centrality > QUASI_BASIS_TOL {
        return Err(Error::NotCentral(centrality));
    }
    let mut value = IndexValue::from_element(ind);
    value.centrality_residual = centrality;
    if value.min_eigenvalue <= 1e-10 {
        return Err(Error::DegenerateModule(value.min_eigenvalue));
    }
    Ok(value)
}

/// Watatani index, cross-checked against a second, randomly pivoted
/// quasi-basis.
pub fn watatani_index(e: &ConditionalExpectation) -> Result<IndexValue> {
    let first = quasi_basis(e)?;
    let mut value = index_from_quasi_basis(e, &first)?;
    let second = quasi_basis_pivoted(e, Some(0x9e37_79b9))?;
    let other = index_from_quasi_basis(e, &second)?;
    let diff = linalg::spectral_norm(&(&value.element - &other.element)) / value.norm.max(1.0);
    if diff > QUASI_BASIS_TOL {
        return Err(Error::NotCentral(diff));
    }
    value.independence_residual = diff;
    Ok(value)
}

/// Best constant `λ` with `E(x) ≥ λx` on the positive cone, with the
/// minimal projection attaining it.
#[derive(Debug, Clone)]
pub struct PpConstant {
    pub value: f64,
    pub certificate: CMat,
    pub block: usize,
    pub evaluations: usize,
}

impl PpConstant {
    pub fn probabilistic_index(&self) -> f64 {
        if self.value > 0.0 {
            1.0 / self.value
        } else {
            f64::INFINITY
        }
    }
}

struct PpBlock {
    /// Target coordinates of `E(e_ab)`, one column per row-major pair.
    coeffs: CMat,
    /// Orthonormal vectorized basis of the target.
    target: CMat,
    /// Isometries `G_a` with `e_ab = G_a G_b*`.
    legs: Vec<CMat>,
    n: usize,
}

impl PpBlock {
    fn new(e: &ConditionalExpectation, bs: &BlockStructure, j: usize) -> Self {
        let n = bs.dims.dims()[j];
        let mult = bs.multiplicities[j];
        let offset: usize = (0..j).map(|i| bs.dims.dims()[i] * bs.multiplicities[i]).sum();
        let legs = (0..n)
            .map(|a| {
                let mut g = CMat::zeros(e.size, mult);
                for r in 0..mult {
                    g.set_column(r, &bs.unitary.column(offset + r * n + a));
                }
                g
            })
            .collect();
        let target = e.target.basis_matrix().clone();
        let mut coeffs = CMat::zeros(target.ncols(), n * n);
        for (k, u) in bs.units[j].iter().enumerate() {
            coeffs.set_column(k, &e.target.coordinates(&e.apply(u)));
        }
        PpBlock { coeffs, target, legs, n }
    }

    /// `λ_max(W* E(p_v)⁺ W)` for the minimal projection `p_v = W W*`.
    fn value(&self, v: &CVec) -> f64 {
        let size = self.legs[0].nrows();
        let mut outer = CVec::zeros(self.n * self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                outer[a * self.n + b] = v[a] * v[b].conj();
            }
        }
        let y = &self.coeffs * outer;
        let mut w = CMat::zeros(size, self.legs[0].ncols());
        for a in 0..self.n {
            w += &self.legs[a] * v[a];
        }
        let x = linalg::unvectorize(&(&self.target * y), size);
        if self.target.ncols() == 1 {
            // Scalar target: E(p) = x·1.
            let s = x[(0, 0)].re;
            if s <= 1e-300 {
                return f64::INFINITY;
            }
            return top_eigen(&(w.adjoint() * &w)) / s;
        }
        schur_value(&linalg::hermitian_part(&x), &w)
    }
}

/// `λ_max(W* X⁺ W)`, or infinity when `W` leaves the range of `X`.
fn schur_value(x: &CMat, w: &CMat) -> f64 {
    if let Some(chol) = x.clone().cholesky() {
        let l = chol.l_dirty();
        let diag: Vec<f64> = (0..l.nrows()).map(|i| l[(i, i)].re).collect();
        let hi = diag.iter().cloned().fold(0.0, f64::max);
        let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if lo * lo > 1e-12 * hi * hi {
            let y = chol.l_dirty().solve_lower_triangular(w).expect("nonsingular factor");
            let m = y.adjoint() * y;
            return top_eigen(&m);
        }
    }
    let (support, _, _) = linalg::psd_support_and_inv_sqrt(x, 1e-10);
    let leak = linalg::frobenius(&(w - &support * w)) / linalg::frobenius(w).max(1e-300);
    if leak > 1e-6 {
        return f64::INFINITY;
    }
    let pinv = linalg::psd_pinv(x, 1e-10);
    top_eigen(&(w.adjoint() * pinv * w))
}

fn top_eigen(m: &CMat) -> f64 {
    if m.nrows() == 1 {
        m[(0, 0)].re
    } else {
        linalg::max_eigenvalue(m)
    }
}

pub fn pp_constant(e: &ConditionalExpectation) -> Result<PpConstant> {
    pp_constant_with(e, PP_SAMPLES, PP_REFINE_STEPS, 0x7070)
}

/// Samples minimal projections of the source, then refines the worst one by
/// projected gradient ascent on the unit sphere.
pub fn pp_constant_with(e: &ConditionalExpectation, samples: usize, steps: usize, seed: u64) -> Result<PpConstant> {
    let src = e.require_source()?;
    let bs = inclusion::block_structure(src)?;
    let blocks: Vec<PpBlock> = (0..bs.dims.len()).map(|j| PpBlock::new(e, &bs, j)).collect();
    let wide = blocks.iter().filter(|b| b.n > 1).count().max(1);
    let per_block = samples / wide;
    let mut rng = seeded_rng(seed);
    let mut evaluations = 0;
    let mut best = (f64::NEG_INFINITY, 0usize, CVec::zeros(1));
    for (j, blk) in blocks.iter().enumerate() {
        let mut candidates: Vec<CVec> = (0..blk.n)
            .map(|a| {
                let mut v = CVec::zeros(blk.n);
                v[a] = c(1.0);
                v
            })
            .collect();
        if blk.n > 1 {
            candidates.extend((0..per_block).map(|_| linalg::random_unit_vector(&mut rng, blk.n)));
        }
        let mut local = (f64::NEG_INFINITY, candidates[0].clone());
        for v in candidates {
            let f = blk.value(&v);
            evaluations += 1;
            if f > local.0 {
                local = (f, v);
            }
        }
        if blk.n > 1 && local.0.is_finite() {
            let (f, v, count) = refine(blk, local.1.clone(), local.0, steps);
            evaluations += count;
            local = (f, v);
        }
        if local.0 > best.0 {
            best = (local.0, j, local.1);
        }
    }
    let (f, j, v) = best;
    let value = if f.is_finite() && f > 0.0 { 1.0 / f } else { 0.0 };
    let blk = &blocks[j];
    let mut w = CMat::zeros(e.size, blk.legs[0].ncols());
    for a in 0..blk.n {
        w += &blk.legs[a] * v[a];
    }
    Ok(PpConstant {
        value: value.min(1.0),
        certificate: &w * w.adjoint(),
        block: j,
        evaluations,
    })
}

fn refine(blk: &PpBlock, mut v: CVec, mut f: f64, steps: usize) -> (f64, CVec, usize) {
    let h = 1e-7;
    let mut eta = 0.1;
    let mut count = 0;
    for _ in 0..steps {
        let mut grad = CVec::zeros(blk.n);
        for a in 0..blk.n {
            for dir in [c(1.0), Complex64::new(0.0, 1.0)] {
                let mut probe = v.clone();
                probe[a] += dir * h;
                let fp = blk.value(&probe.unscale(probe.norm()));
                count += 1;
                grad[a] += dir * ((fp - f) / h);
            }
        }
        // Tangential part only.
        let radial = v.dotc(&grad);
        let tangent = &grad - &v * radial;
        if tangent.norm() < 1e-12 {
            break;
        }
        loop {
            let cand = &v + &tangent * c(eta);
            let cand = cand.unscale(cand.norm());
            let fc = blk.value(&cand);
            count += 1;
            if fc > f {
                v = cand;
                f = fc;
                eta *= 1.5;
                break;
            }
            eta *= 0.5;
            if eta < 1e-12 {
                return (f, v, count);
            }
        }
    }
    (f, v, count)
}

/// `Ind_p(E) = 1 / pp_constant(E)`.
pub fn probabilistic_index(e: &ConditionalExpectation) -> Result<f64> {
    Ok(pp_constant(e)?.probabilistic_index())
}

/// How a minimal-index value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchRegime {
    /// `ℂ ⊂ ⊕M_{n_j}`: closed form `(Σ n_j)²`.
    ExactScalar,
    /// Simple subalgebra: `(Σ_j λ_j)²` over the single row of `Λ`.
    ExactFactor,
    /// Minimum of `‖Ind_w(E_τ)‖` over block-weight traces.
    Heuristic,
}

impl SearchRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchRegime::ExactScalar => "exact-scalar",
            SearchRegime::ExactFactor => "exact-factor",
            SearchRegime::Heuristic => "heuristic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimalIndex {
    pub value: f64,
    pub index: IndexValue,
    pub trace: TraceFunctional,
    pub weights: Vec<f64>,
    pub regime: SearchRegime,
    /// Relative gap to the Collatz-Wielandt lower bound (heuristic regime).
    pub gap: f64,
    pub restarts: usize,
}

/// Minimal index of a unital inclusion together with a trace realizing it.
pub fn minimal_index_search(inc: &UnitalInclusion) -> Result<MinimalIndex> {
    let sub_bs = inclusion::block_structure(inc.sub())?;
    let sup_bs = inclusion::block_structure(inc.sup())?;
    let lambda = inclusion::inclusion_matrix_from(&sub_bs, &sup_bs)?;
    minimal_index_with(inc, &sup_bs, &lambda)
}

pub(crate) fn trace_from_weights(sup_bs: &BlockStructure, weights: &[f64]) -> Result<TraceFunctional> {
    TraceFunctional::from_central_weights(&sup_bs.central, sup_bs.dims.dims(), &sup_bs.multiplicities, weights)
}

pub fn minimal_index_with(
    inc: &UnitalInclusion,
    sup_bs: &BlockStructure,
    lambda: &InclusionMatrixData,
) -> Result<MinimalIndex> {
    let n = inc.size();
    let dims = sup_bs.dims.dims();
    if lambda.rows() == 1 {
        // Simple subalgebra: uniform density on the underlying algebra.
        let row = &lambda.lambda[0];
        let total: usize = row.iter().sum();
        let value = (total * total) as f64;
        let width: usize = dims.iter().sum();
        let weights = vec![1.0 / width as f64; dims.len()];
        let trace = trace_from_weights(sup_bs, &weights)?;
        let regime = if inc.sub().dim() == 1 {
            SearchRegime::ExactScalar
        } else {
            SearchRegime::ExactFactor
        };
        return Ok(MinimalIndex {
            value,
            index: IndexValue::scalar_multiple(n, value),
            trace,
            weights,
            regime,
            gap: 0.0,
            restarts: 0,
        });
    }
    let m = {
        let l = lambda.as_real_matrix();
        l.transpose() * l
    };
    let (weights, gap, restarts) = perron_search(&m, dims)?;
    let trace = trace_from_weights(sup_bs, &weights)?;
    let e = trace_preserving_expectation(inc.sup(), inc.sub(), &trace)?;
    let index = watatani_index(&e)?;
    Ok(MinimalIndex {
        value: index.norm,
        index,
        trace,
        weights,
        regime: SearchRegime::Heuristic,
        gap,
        restarts,
    })
}

/// `g_j(t) = (M t)_j / t_j`.
fn ratios(m: &DMatrix<f64>, t: &[f64]) -> Vec<f64> {
    let tv = nalgebra::DVector::from_column_slice(t);
    let mt = m * tv;
    (0..t.len()).map(|j| mt[j] / t[j]).collect()
}

/// Smoothed `max_j log g_j` and its gradient in log-coordinates `u`.
fn smoothed(m: &DMatrix<f64>, u: &[f64], beta: f64) -> (f64, Vec<f64>) {
    let k = u.len();
    let t: Vec<f64> = u.iter().map(|x| libm::exp(*x)).collect();
    let tv = nalgebra::DVector::from_column_slice(&t);
    let mt = m * tv;
    let logs: Vec<f64> = (0..k).map(|j| libm::log(mt[j]) - u[j]).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| libm::exp(beta * (l - top))).collect();
    let z: f64 = weights.iter().sum();
    let value = top + libm::log(z) / beta;
    let mut grad = vec![0.0; k];
    for j in 0..k {
        let w = weights[j] / z;
        for (l, g) in grad.iter_mut().enumerate() {
            let d = m[(j, l)] * t[l] / mt[j] - if j == l { 1.0 } else { 0.0 };
            *g += w * d;
        }
    }
    (value, grad)
}

fn bfgs(m: &DMatrix<f64>, mut u: Vec<f64>, beta: f64, iters: usize) -> Vec<f64> {
    let k = u.len();
    let mut h = DMatrix::<f64>::identity(k, k);
    let (mut f, mut g) = smoothed(m, &u, beta);
    for _ in 0..iters {
        let gv = nalgebra::DVector::from_column_slice(&g);
        if gv.norm() < 1e-12 {
            break;
        }
        let mut p = -(&h * &gv);
        if p.dot(&gv) >= 0.0 {
            h = DMatrix::identity(k, k);
            p = -gv.clone();
        }
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-14 {
            let cand: Vec<f64> = (0..k).map(|i| u[i] + step * p[i]).collect();
            let (fc, gc) = smoothed(m, &cand, beta);
            if fc <= f + 1e-4 * step * p.dot(&gv) {
                accepted = Some((cand, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc, gc)) = accepted else { break };
        let s = nalgebra::DVector::from_fn(k, |i, _| cand[i] - u[i]);
        let y = nalgebra::DVector::from_fn(k, |i, _| gc[i] - g[i]);
        let sy = s.dot(&y);
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let id = DMatrix::<f64>::identity(k, k);
            let left = &id - (&s * y.transpose()) * rho;
            let right = &id - (&y * s.transpose()) * rho;
            h = &left * &h * &right + (&s * s.transpose()) * rho;
        }
        u = cand;
        f = fc;
        g = gc;
    }
    u
}

/// Minimizes `max_j g_j(t)` over positive `t` with `Σ n_j t_j = 1`.
///
/// Quasi-Newton descent on a log-sum-exp smoothing from ten seeded starts,
/// then each connected component of `M` is polished to its Perron vector
/// while keeping the component mass found by the search.
fn perron_search(m: &DMatrix<f64>, dims: &[usize]) -> Result<(Vec<f64>, f64, usize)> {
    let k = dims.len();
    let normalize = |t: &mut Vec<f64>| {
        let s: f64 = t.iter().zip(dims).map(|(x, &n)| x * n as f64).sum();
        for x in t.iter_mut() {
            *x /= s;
        }
    };
    let mut rng = seeded_rng(0x5ea7c4);
    let restarts = 10;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..restarts {
        let mut u: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        for beta in [4.0, 16.0, 64.0, 256.0, 1024.0] {
            u = bfgs(m, u, beta, 200);
        }
        let mut t: Vec<f64> = u.iter().map(|x| libm::exp(*x)).collect();
        normalize(&mut t);
        let top = ratios(m, &t).into_iter().fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(b, _)| top < *b) {
            best = Some((top, t));
        }
    }
    let (_, mut t) = best.expect("at least one restart");
    for comp in components(m) {
        let sub = DMatrix::from_fn(comp.len(), comp.len(), |i, j| m[(comp[i], comp[j])]);
        let eig = sub.symmetric_eigen();
        let top = (0..comp.len())
            .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .expect("component is non-empty");
        let mut v: Vec<f64> = eig.eigenvectors.column(top).iter().map(|x| x.abs()).collect();
        if v.iter().any(|x| *x <= 1e-14) {
            return Err(Error::DegeneratePerron("Perron vector has a zero entry".into()));
        }
        let mass: f64 = comp.iter().map(|&j| t[j] * dims[j] as f64).sum();
        let vmass: f64 = comp.iter().zip(&v).map(|(&j, x)| x * dims[j] as f64).sum();
        for x in v.iter_mut() {
            *x *= mass / vmass;
        }
        for (&j, x) in comp.iter().zip(v) {
            t[j] = x;
        }
    }
    normalize(&mut t);
    let rho = m.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(0.0, f64::max);
    let top = ratios(m, &t).into_iter().fold(0.0, f64::max);
    let gap = top / rho - 1.0;
    if gap > 1e-6 {
        return Err(Error::SearchDidNotConverge(gap));
    }
    Ok((t, gap.max(0.0), restarts))
}

/// Connected components of the support graph of a symmetric matrix.
fn components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let k = m.nrows();
    let mut seen = vec![false; k];
    let mut out = Vec::new();
    for start in 0..k {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(i) = stack.pop() {
            comp.push(i);
            for j in 0..k {
                if !seen[j] && m[(i, j)] != 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Short description of a regime for reports.
pub fn regime_note(regime: SearchRegime) -> String {
    match regime {
        SearchRegime::ExactScalar => "closed form (Σ n_j)² for a scalar subalgebra".into(),
        SearchRegime::ExactFactor => "closed form (Σ_j λ_j)² for a simple subalgebra".into(),
        SearchRegime::Heuristic => "minimum of ‖Ind_w‖ over block-weight traces".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multimatrix::AmbientAlgebra;

    fn unit(n: usize, i: usize, j: usize) -> CMat {
        let mut m = CMat::zeros(n, n);
        m[(i, j)] = c(1.0);
        m
    }

    fn left_m2() -> ConcreteAlgebra {
        let gens: Vec<CMat> = (0..4)
            .map(|k| linalg::kron(&unit(2, k / 2, k % 2), &linalg::identity(2)))
            .collect();
        ConcreteAlgebra::span(4, &gens).unwrap()
    }

    fn scalar_in_m2() -> ConditionalExpectation {
        trace_preserving_expectation(
            &ConcreteAlgebra::full(2),
            &ConcreteAlgebra::scalars(2),
            &TraceFunctional::normalized(2),
        )
        .unwrap()
    }

    #[test]
    fn identity_expectation() {
        let a = ConcreteAlgebra::full(2);
        let e = trace_preserving_expectation(&a, &a, &TraceFunctional::normalized(2)).unwrap();
        let mut rng = seeded_rng(1);
        let x = a.random_element(&mut rng);
        assert!(linalg::frobenius(&(e.apply(&x) - &x)) < 1e-12);
        let qb = quasi_basis(&e).unwrap();
        assert!(qb.left_residual < 1e-12 && qb.right_residual < 1e-12);
        let ind = watatani_index(&e).unwrap();
        assert!((ind.scalar.unwrap() - 1.0).abs() < 1e-12);
        assert!((pp_constant(&e).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_expectation_is_trace() {
        let e = scalar_in_m2();
        let x = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(5.0)]);
        assert!(linalg::frobenius(&(e.apply(&x) - linalg::identity(2).scale(3.0))) < 1e-12);
        assert!(e.check(20, 4).unwrap().max() < 1e-10);
    }

    #[test]
    fn partial_trace_oracle() {
        let a = ConcreteAlgebra::full(4);
        let e = trace_preserving_expectation(&a, &left_m2(), &TraceFunctional::normalized(4)).unwrap();
        let mut rng = seeded_rng(9);
        let x = a.random_element(&mut rng);
        // (id ⊗ tr)(x) ⊗ 1, entrywise.
        let mut expected = CMat::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                let v = (x[(2 * i, 2 * j)] + x[(2 * i + 1, 2 * j + 1)]) * 0.5;
                expected[(2 * i, 2 * j)] = v;
                expected[(2 * i + 1, 2 * j + 1)] = v;
            }
        }
        assert!(linalg::frobenius(&(e.apply(&x) - expected)) < 1e-12);
    }

    #[test]
    fn scalar_index_of_m2_is_four() {
        let e = scalar_in_m2();
        let qb = quasi_basis(&e).unwrap();
        assert!(qb.left_residual < 1e-12 && qb.right_residual < 1e-12);
        let ind = watatani_index(&e).unwrap();
        assert!((ind.scalar.unwrap() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn explicit_matrix_units_form_a_quasi_basis() {
        let e = scalar_in_m2();
        let lambdas: Vec<CMat> = (0..4)
            .map(|k| unit(2, k / 2, k % 2).scale(linalg::sqrt(2.0)))
            .collect();
        let basis = ConcreteAlgebra::full(2).basis();
        let (l, r) = reconstruction_residuals(&e, &lambdas, &basis);
        assert!(l < 1e-12 && r < 1e-12);
    }

    #[test]
    fn tensor_factor_index_is_four() {
        let e = trace_preserving_expectation(&ConcreteAlgebra::full(4), &left_m2(), &TraceFunctional::normalized(4))
            .unwrap();
        let ind = watatani_index(&e).unwrap();
        assert!((ind.scalar.unwrap() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn pp_constant_scalar_cases() {
        let e = scalar_in_m2();
        let pp = pp_constant_with(&e, 500, 50, 1).unwrap();
        assert!((pp.value - 0.5).abs() < 1e-8);
        assert!((pp.probabilistic_index() - 2.0).abs() < 1e-7);

        let amb = AmbientAlgebra::from_dims(&[2, 3]).unwrap();
        let tau = TraceFunctional::from_block_weights(&amb, &[2.0 / 13.0, 3.0 / 13.0]).unwrap();
        let a = ConcreteAlgebra::from_ambient(&amb);
        let e = trace_preserving_expectation(&a, &ConcreteAlgebra::scalars(5), &tau).unwrap();
        let pp = pp_constant_with(&e, 500, 50, 1).unwrap();
        assert!((pp.value - 2.0 / 13.0).abs() < 1e-8);
        assert!((pp.probabilistic_index() - 6.5).abs() < 1e-6);
    }

    #[test]
    fn minimal_index_closed_forms() {
        for n in 1..4 {
            let inc = UnitalInclusion::new(ConcreteAlgebra::scalars(n), ConcreteAlgebra::full(n), "c in mn").unwrap();
            let mi = minimal_index_search(&inc).unwrap();
            assert_eq!(mi.value, (n * n) as f64);
            assert_eq!(mi.regime, SearchRegime::ExactScalar);
        }
        let amb = AmbientAlgebra::from_dims(&[2, 3]).unwrap();
        let inc = UnitalInclusion::new(ConcreteAlgebra::scalars(5), ConcreteAlgebra::from_ambient(&amb), "c").unwrap();
        assert_eq!(minimal_index_search(&inc).unwrap().value, 25.0);
        let inc = UnitalInclusion::new(left_m2(), ConcreteAlgebra::full(4), "m2 in m4").unwrap();
        let mi = minimal_index_search(&inc).unwrap();
        assert_eq!(mi.value, 4.0);
        assert_eq!(mi.regime, SearchRegime::ExactFactor);
    }

    #[test]
    fn heuristic_search_finds_markov_value() {
        // ℂ² ⊂ M₂ has Λ = (1 1)ᵀ and ‖Λ‖² = 2.
        let amb = AmbientAlgebra::from_dims(&[1, 1]).unwrap();
        let diag = ConcreteAlgebra::from_ambient(&amb);
        let inc = UnitalInclusion::new(diag, ConcreteAlgebra::full(2), "diag").unwrap();
        let mi = minimal_index_search(&inc).unwrap();
        assert_eq!(mi.regime, SearchRegime::Heuristic);
        assert!((mi.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn unfaithful_trace_rejected() {
        let amb = AmbientAlgebra::from_dims(&[1, 1]).unwrap();
        assert!(matches!(
            TraceFunctional::from_block_weights(&amb, &[1.0, 0.0]),
            Err(Error::TraceNotFaithful(_))
        ));
    }

    #[test]
    fn restriction_keeps_values() {
        let e = scalar_in_m2();
        let diag = ConcreteAlgebra::from_ambient(&AmbientAlgebra::from_dims(&[1, 1]).unwrap());
        let f = e.restrict(&diag, ConcreteAlgebra::scalars(2)).unwrap();
        let x = CMat::from_diagonal(&CVec::from_column_slice(&[c(3.0), c(1.0)]));
        assert!(linalg::frobenius(&(f.apply(&x) - e.apply(&x))) < 1e-12);
    }
}
