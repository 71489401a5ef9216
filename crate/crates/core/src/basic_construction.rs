//! GNS realization `L²(A, τ)`, Jones projections, the basic construction
//! `A₁ = span{x e_B y}`, its dual expectation and the higher relative
//! commutant `B′ ∩ A₁`.
//!
//! Operators on the GNS space are `d x d` matrices in coordinates of a
//! `τ`-orthonormal basis of `A`, so `A₁` lives in `M_d`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expectation::{
    self, trace_orthonormal, trace_preserving_expectation, ConditionalExpectation, IndexValue, Pushdown,
    QuasiBasis,
};
use crate::inclusion::{self, BlockStructure, ConcreteAlgebra, UnitalInclusion};
use crate::linalg::{self, seeded_rng, CMat, CVec, RANK_TOL};
use crate::multimatrix::TraceFunctional;

/// Largest GNS dimension for which `A₁` is materialized as a subspace of
/// `M_d` (its dimension can reach `d²`, stored as `d²`-long vectors).
pub const A1_CAP: usize = 24;

/// Largest GNS dimension for which operators are assembled at all.
pub const GNS_CAP: usize = 144;

#[derive(Debug, Clone)]
pub struct GnsRealization {
    algebra: ConcreteAlgebra,
    trace: TraceFunctional,
    ons: Vec<CMat>,
    ons_mat: CMat,
    functionals: CMat,
    left_ons: Vec<CMat>,
}

pub fn gns(a_alg: &ConcreteAlgebra, tau: &TraceFunctional) -> Result<GnsRealization> {
    if a_alg.dim() > GNS_CAP {
        return Err(Error::SizeCap(format!("GNS dimension {} exceeds {GNS_CAP}", a_alg.dim())));
    }
    let n = a_alg.size();
    let ons = trace_orthonormal(&a_alg.basis(), tau)?;
    let d = ons.len();
    let h = tau.density();
    let mut ons_mat = CMat::zeros(n * n, d);
    let mut functionals = CMat::zeros(d, n * n);
    for (k, s) in ons.iter().enumerate() {
        ons_mat.set_column(k, &linalg::vectorize(s));
        let w = (h * s.adjoint()).transpose();
        for (idx, z) in w.iter().enumerate() {
            functionals[(k, idx)] = *z;
        }
    }
    let mut g = GnsRealization {
        algebra: a_alg.clone(),
        trace: tau.clone(),
        ons,
        ons_mat,
        functionals,
        left_ons: Vec::new(),
    };
    g.left_ons = g.ons.iter().map(|x| g.left(x)).collect();
    Ok(g)
}

impl GnsRealization {
    pub fn dim(&self) -> usize {
        self.ons.len()
    }

    pub fn algebra(&self) -> &ConcreteAlgebra {
        &self.algebra
    }

    pub fn trace(&self) -> &TraceFunctional {
        &self.trace
    }

    pub fn ons(&self) -> &[CMat] {
        &self.ons
    }

    /// `L_{ons_r}` for every basis vector.
    pub fn left_ons(&self) -> &[CMat] {
        &self.left_ons
    }

    /// Coordinates `(τ(ons_r* x))_r`.
    pub fn coords(&self, x: &CMat) -> CVec {
        &self.functionals * linalg::vectorize(x)
    }

    pub fn synthesize(&self, v: &CVec) -> CMat {
        linalg::unvectorize(&(&self.ons_mat * v), self.algebra.size())
    }

    pub fn one_hat(&self) -> CVec {
        self.coords(&linalg::identity(self.algebra.size()))
    }

    /// Left multiplication by `a` on `L²(A, τ)`.
    pub fn left(&self, a: &CMat) -> CMat {
        let d = self.dim();
        let mut m = CMat::zeros(d, d);
        for (r, s) in self.ons.iter().enumerate() {
            m.set_column(r, &self.coords(&(a * s)));
        }
        m
    }

    /// Right multiplication by `b`.
    pub fn right(&self, b: &CMat) -> CMat {
        let d = self.dim();
        let mut m = CMat::zeros(d, d);
        for (r, s) in self.ons.iter().enumerate() {
            m.set_column(r, &self.coords(&(s * b)));
        }
        m
    }

    /// `L_v` for a GNS vector `v`.
    pub fn left_of_vector(&self, v: &CVec) -> CMat {
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for (l, z) in self.left_ons.iter().zip(v.iter()) {
            if z.norm_sqr() != 0.0 {
                out += l * *z;
            }
        }
        out
    }

    /// `L_S` as a subalgebra of `M_d`.
    pub fn left_algebra(&self, s_alg: &ConcreteAlgebra) -> ConcreteAlgebra {
        let ops: Vec<CMat> = s_alg.basis().iter().map(|b| self.left(b)).collect();
        ConcreteAlgebra::span_unchecked(self.dim(), &ops)
    }

    /// `R_S` as a subalgebra of `M_d`.
    pub fn right_algebra(&self, s_alg: &ConcreteAlgebra) -> ConcreteAlgebra {
        let ops: Vec<CMat> = s_alg.basis().iter().map(|b| self.right(b)).collect();
        ConcreteAlgebra::span_unchecked(self.dim(), &ops)
    }

    /// Orthonormality and homomorphism residuals on seeded samples.
    pub fn check(&self, samples: usize, seed: u64) -> GnsChecks {
        let d = self.dim();
        let gram = CMat::from_fn(d, d, |i, j| self.trace.inner(&self.ons[i], &self.ons[j]));
        let orthonormality = (gram - CMat::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut rng = seeded_rng(seed);
        let mut homomorphism: f64 = 0.0;
        let mut star: f64 = 0.0;
        let mut isometry: f64 = 0.0;
        for _ in 0..samples {
            let a = self.algebra.random_element(&mut rng);
            let b = self.algebra.random_element(&mut rng);
            let la = self.left(&a);
            let lb = self.left(&b);
            let lab = self.left(&(&a * &b));
            let scale = linalg::spectral_norm(&la) * linalg::spectral_norm(&lb);
            homomorphism = homomorphism.max(linalg::spectral_norm(&(lab - &la * &lb)) / scale.max(1e-300));
            let la_star = self.left(&a.adjoint());
            star = star.max(linalg::spectral_norm(&(la_star - la.adjoint())) / linalg::spectral_norm(&la).max(1e-300));
            let na = linalg::spectral_norm(&a);
            isometry = isometry.max((linalg::spectral_norm(&la) - na).abs() / na.max(1e-300));
        }
        GnsChecks {
            orthonormality,
            homomorphism,
            star,
            isometry,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnsChecks {
    pub orthonormality: f64,
    pub homomorphism: f64,
    pub star: f64,
    /// `|‖L_a‖ − ‖a‖| / ‖a‖`.
    pub isometry: f64,
}

#[derive(Debug, Clone)]
pub struct JonesProjection {
    pub matrix: CMat,
    pub target: ConcreteAlgebra,
    pub rank: usize,
}

pub fn jones_projection(g: &GnsRealization, s_alg: &ConcreteAlgebra) -> Result<JonesProjection> {
    let r = g.algebra.containment_residual(s_alg);
    if r > inclusion::SUBSPACE_TOL {
        return Err(Error::NotSubalgebra(r));
    }
    let cols: Vec<CVec> = s_alg.basis().iter().map(|s| g.coords(s)).collect();
    let q = linalg::column_span(&linalg::stack_columns(&cols, g.dim()), RANK_TOL);
    Ok(JonesProjection {
        rank: q.ncols(),
        matrix: &q * q.adjoint(),
        target: s_alg.clone(),
    })
}

impl JonesProjection {
    /// `max ‖e L_a e − L_{E(a)} e‖` over seeded samples of `A`.
    pub fn compression_residual(&self, g: &GnsRealization, e: &ConditionalExpectation, samples: usize, seed: u64) -> f64 {
        let mut rng = seeded_rng(seed);
        let p = &self.matrix;
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let a = g.algebra.random_element(&mut rng);
            let lhs = p * g.left(&a) * p;
            let rhs = g.left(&e.apply(&a)) * p;
            worst = worst.max(linalg::spectral_norm(&(lhs - rhs)) / linalg::spectral_norm(&a).max(1e-300));
        }
        worst
    }

    pub fn idempotence_residual(&self) -> f64 {
        let p = &self.matrix;
        linalg::spectral_norm(&(p * p - p)).max(linalg::spectral_norm(&(p - p.adjoint())))
    }
}

/// Structural residuals of a basic construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicChecks {
    /// `‖Σ L_λ e L_λ* − 1‖`.
    pub unit_residual: f64,
    /// `‖Ind · E₁(e) − 1‖`.
    pub markov_residual: f64,
    /// `max ‖e y e − L_{E(y 1̂)} e‖` over sampled `y ∈ A₁`.
    pub pushdown_residual: f64,
    /// `max ‖e L_s − L_s e‖` over the subalgebra basis.
    pub jones_commutation: f64,
    /// Distance between `a1` and `span{L_x e L_y} + L_A`.
    pub span_distance: Option<f64>,
    /// Distance between `a1` and `(R_B)′`.
    pub commutant_distance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BasicConstructionData {
    pub gns: GnsRealization,
    pub e: JonesProjection,
    pub expectation: ConditionalExpectation,
    pub quasi_basis: QuasiBasis,
    pub index: IndexValue,
    pub left_sup: ConcreteAlgebra,
    pub left_sub: ConcreteAlgebra,
    pub a1: Option<ConcreteAlgebra>,
    pub dual: ConditionalExpectation,
    pub checks: BasicChecks,
}

pub fn basic_construction(inc: &UnitalInclusion, tau: &TraceFunctional) -> Result<BasicConstructionData> {
    let materialize = inc.sup().dim() <= A1_CAP;
    basic_construction_with(inc, tau, materialize)
}

/// Basic construction; `A₁` itself is only built when `materialize` is set.
pub fn basic_construction_with(
    inc: &UnitalInclusion,
    tau: &TraceFunctional,
    materialize: bool,
) -> Result<BasicConstructionData> {
    let g = gns(inc.sup(), tau)?;
    let d = g.dim();
    if materialize && d > A1_CAP {
        return Err(Error::SizeCap(format!("GNS dimension {d} exceeds {A1_CAP} for A₁")));
    }
    let expectation = trace_preserving_expectation(inc.sup(), inc.sub(), tau)?;
    let qb = expectation::quasi_basis(&expectation)?;
    let index = expectation::watatani_index(&expectation)?;
    let e = jones_projection(&g, inc.sub())?;
    let left_sup = ConcreteAlgebra::span_unchecked(d, g.left_ons());
    let left_sub = g.left_algebra(inc.sub());

    let ind_inv = index.inverse();
    let pushdown = Pushdown {
        left_ons: g.left_ons().to_vec(),
        vectors: qb.elements.iter().map(|l| g.coords(l)).collect(),
        tails: qb.elements.iter().map(|l| g.left(&(&ind_inv * l.adjoint()))).collect(),
    };

    let ident = CMat::identity(d, d);
    let mut unit = CMat::zeros(d, d);
    for l in &qb.elements {
        let ll = g.left(l);
        unit += &ll * &e.matrix * ll.adjoint();
    }
    let unit_residual = linalg::spectral_norm(&(unit - &ident));

    let jones_commutation = left_sub
        .basis()
        .iter()
        .map(|s| linalg::spectral_norm(&linalg::commutator(&e.matrix, s)))
        .fold(0.0, f64::max);

    let a1 = if materialize {
        Some(build_a1(&g, &e, &left_sup))
    } else {
        None
    };
    let dual = ConditionalExpectation::from_pushdown(a1.clone(), left_sup.clone(), pushdown);

    let e1_e = dual.apply(&e.matrix);
    let markov_residual = linalg::spectral_norm(&(g.left(&index.element) * e1_e - &ident));

    let mut rng = seeded_rng(0xa1);
    let mut pushdown_residual: f64 = 0.0;
    let one_hat = g.one_hat();
    for _ in 0..6 {
        let y = random_a1_element(&g, &e, &mut rng);
        let a = g.synthesize(&(&y * &one_hat));
        let lhs = &e.matrix * &y * &e.matrix;
        let rhs = g.left(&expectation.apply(&a)) * &e.matrix;
        pushdown_residual = pushdown_residual.max(linalg::spectral_norm(&(lhs - rhs)) / linalg::spectral_norm(&y).max(1e-300));
    }

    let (span_distance, commutant_distance) = match &a1 {
        Some(alg) => {
            let spanned = spanning_algebra(&g, &e, &left_sup);
            let right_sub = g.right_algebra(inc.sub());
            let comm = inclusion::commutant_of(&generators_of(&right_sub), &ConcreteAlgebra::full(d));
            (Some(alg.distance(&spanned)), Some(alg.distance(&comm)))
        }
        None => (None, None),
    };

    Ok(BasicConstructionData {
        gns: g,
        e,
        expectation,
        quasi_basis: qb,
        index,
        left_sup,
        left_sub,
        a1,
        dual,
        checks: BasicChecks {
            unit_residual,
            markov_residual,
            pushdown_residual,
            jones_commutation,
            span_distance,
            commutant_distance,
        },
    })
}

/// Basis of a small algebra, or three seeded elements of a larger one.
fn generators_of(alg: &ConcreteAlgebra) -> Vec<CMat> {
    if alg.dim() <= 8 {
        return alg.basis();
    }
    let mut rng = seeded_rng(0x6e);
    (0..3).map(|_| alg.random_element(&mut rng)).collect()
}

/// `A₁` generated by `L_A` and `e`.
fn build_a1(g: &GnsRealization, e: &JonesProjection, left_sup: &ConcreteAlgebra) -> ConcreteAlgebra {
    let mut gens = generators_of(left_sup);
    gens.push(e.matrix.clone());
    inclusion::subalgebra_from_generators(g.dim(), &gens)
}

/// `span{L_x e L_y} + L_A`.
fn spanning_algebra(g: &GnsRealization, e: &JonesProjection, left_sup: &ConcreteAlgebra) -> ConcreteAlgebra {
    let mut ops = left_sup.basis();
    let d = g.dim();
    let pairs = d * d;
    if pairs <= 64 {
        for lx in g.left_ons() {
            let le = lx * &e.matrix;
            for ly in g.left_ons() {
                ops.push(&le * ly);
            }
        }
    } else {
        // d² + 16 generic products x e y.
        let mut rng = seeded_rng(0x5a);
        for _ in 0..pairs + 16 {
            let x = g.left(&g.algebra.random_element(&mut rng));
            let y = g.left(&g.algebra.random_element(&mut rng));
            ops.push(x * &e.matrix * y);
        }
    }
    ConcreteAlgebra::span_unchecked(d, &ops)
}

/// `L_a + Σ L_x e L_y` with random coefficients.
fn random_a1_element<R: rand::Rng>(g: &GnsRealization, e: &JonesProjection, rng: &mut R) -> CMat {
    let a = g.algebra.random_element(rng);
    let mut y = g.left(&a);
    for _ in 0..3 {
        let x = g.algebra.random_element(rng);
        let z = g.algebra.random_element(rng);
        y += g.left(&x) * &e.matrix * g.left(&z);
    }
    y
}

/// Least-squares realization of `E₁` and its consistency residuals.
#[derive(Debug, Clone)]
pub struct DualReport {
    /// `‖M C − V‖ / ‖V‖` for the overdetermined system.
    pub extension_residual: f64,
    /// Relative distance between the least-squares map and the pushdown
    /// formula on a basis of `A₁`.
    pub agreement: f64,
    /// `‖Ind · E₁(e) − 1‖`.
    pub markov_residual: f64,
    /// `‖E₁(e) − Ind⁻¹‖`.
    pub e1_of_e: f64,
}

pub fn dual_expectation(bc: &BasicConstructionData) -> Result<DualReport> {
    let a1 = bc
        .a1
        .as_ref()
        .ok_or_else(|| Error::SizeCap("A₁ was not materialized".into()))?;
    let g = &bc.gns;
    let la = &bc.left_sup;
    let ind_inv = bc.index.inverse();
    let mut ops_coords: Vec<CVec> = Vec::new();
    let mut values: Vec<CVec> = Vec::new();
    for (i, x) in g.ons().iter().enumerate() {
        let le = &g.left_ons()[i] * &bc.e.matrix;
        for (j, y) in g.ons().iter().enumerate() {
            let op = &le * &g.left_ons()[j];
            ops_coords.push(a1.coordinates(&op));
            values.push(la.coordinates(&g.left(&(&ind_inv * x * y))));
        }
    }
    for b in la.basis() {
        ops_coords.push(a1.coordinates(&b));
        values.push(la.coordinates(&b));
    }
    let c_mat = linalg::stack_columns(&ops_coords, a1.dim());
    let v_mat = linalg::stack_columns(&values, la.dim());
    let f = linalg::svd(&c_mat);
    let pinv = f.pseudo_inverse(RANK_TOL * f.top());
    let m = &v_mat * pinv;
    let extension_residual = (&m * &c_mat - &v_mat).norm() / v_mat.norm().max(1e-300);
    if extension_residual > 1e-8 {
        return Err(Error::InconsistentExtension(extension_residual));
    }
    let mut agreement: f64 = 0.0;
    for (k, b) in a1.basis().iter().enumerate() {
        let ls = la.basis_matrix() * m.column(k);
        let ls = linalg::unvectorize(&ls, g.dim()).scale(linalg::sqrt(g.dim() as f64));
        let push = bc.dual.apply(b);
        agreement = agreement.max(linalg::frobenius(&(ls - push)) / linalg::frobenius(b));
    }
    let e1_e = bc.dual.apply(&bc.e.matrix);
    let e1_of_e = linalg::spectral_norm(&(&e1_e - g.left(&ind_inv)));
    Ok(DualReport {
        extension_residual,
        agreement,
        markov_residual: bc.checks.markov_residual,
        e1_of_e,
    })
}

#[derive(Debug, Clone)]
pub struct DualIndex {
    pub original: IndexValue,
    pub dual: IndexValue,
    pub equal: bool,
    pub reconstruction: f64,
}

/// Compares `Ind_w(E₁)`, computed from the quasi-basis
/// `{L_λ e Ind^{1/2}}`, with `Ind_w(E)`.
pub fn dual_index_check(bc: &BasicConstructionData) -> Result<DualIndex> {
    let Some(ind) = bc.index.scalar else {
        return Err(Error::IndexNotScalar(
            bc.index.block_values.last().copied().unwrap_or(0.0) - bc.index.block_values.first().copied().unwrap_or(0.0),
        ));
    };
    let g = &bc.gns;
    let root = linalg::sqrt(ind);
    let mus: Vec<CMat> = bc
        .quasi_basis
        .elements
        .iter()
        .map(|l| (g.left(l) * &bc.e.matrix).scale(root))
        .collect();
    let test: Vec<CMat> = match &bc.a1 {
        Some(a1) => a1.basis(),
        None => {
            let mut rng = seeded_rng(0xd1);
            (0..8).map(|_| random_a1_element(g, &bc.e, &mut rng)).collect()
        }
    };
    let (l, r) = expectation::reconstruction_residuals(&bc.dual, &mus, &test);
    let d = g.dim();
    let mut element = CMat::zeros(d, d);
    for m in &mus {
        element += m * m.adjoint();
    }
    let dual = IndexValue::from_element(linalg::hermitian_part(&element));
    let equal = match dual.scalar {
        Some(v) => (v - ind).abs() <= 1e-7,
        None => false,
    };
    Ok(DualIndex {
        original: bc.index.clone(),
        dual,
        equal,
        reconstruction: l.max(r),
    })
}

/// `B′ ∩ A₁` with its Wedderburn data.
pub fn higher_commutant(bc: &BasicConstructionData) -> Result<(ConcreteAlgebra, BlockStructure)> {
    let a1 = bc
        .a1
        .as_ref()
        .ok_or_else(|| Error::SizeCap("A₁ was not materialized".into()))?;
    let comm = inclusion::commutant_of(&generators_of(&bc.left_sub), a1);
    let bs = inclusion::block_structure(&comm)?;
    Ok((comm, bs))
}

/// `B′ ∩ A` realized inside `L_A`.
pub fn lower_commutant(bc: &BasicConstructionData) -> ConcreteAlgebra {
    inclusion::commutant_of(&generators_of(&bc.left_sub), &bc.left_sup)
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

    fn scalar_in_m2() -> (UnitalInclusion, TraceFunctional) {
        let inc = UnitalInclusion::new(ConcreteAlgebra::scalars(2), ConcreteAlgebra::full(2), "c in m2").unwrap();
        (inc, TraceFunctional::normalized(2))
    }

    fn m2_in_m4() -> (UnitalInclusion, TraceFunctional) {
        let gens: Vec<CMat> = (0..4)
            .map(|k| linalg::kron(&unit(2, k / 2, k % 2), &linalg::identity(2)))
            .collect();
        let sub = ConcreteAlgebra::span(4, &gens).unwrap();
        let inc = UnitalInclusion::new(sub, ConcreteAlgebra::full(4), "m2 in m4").unwrap();
        (inc, TraceFunctional::normalized(4))
    }

    #[test]
    fn gns_of_m2() {
        let g = gns(&ConcreteAlgebra::full(2), &TraceFunctional::normalized(2)).unwrap();
        assert_eq!(g.dim(), 4);
        let l = g.left(&unit(2, 0, 0));
        let rank = linalg::column_span(&l, 1e-10).ncols();
        assert_eq!(rank, 2);
        let checks = g.check(5, 2);
        assert!(checks.orthonormality < 1e-12);
        assert!(checks.homomorphism < 1e-12 && checks.star < 1e-12 && checks.isometry < 1e-10);
    }

    #[test]
    fn gns_of_scalars() {
        let g = gns(&ConcreteAlgebra::scalars(3), &TraceFunctional::normalized(3)).unwrap();
        assert_eq!(g.dim(), 1);
        assert!((g.left(&linalg::identity(3))[(0, 0)] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn jones_projection_examples() {
        let (inc, tau) = scalar_in_m2();
        let g = gns(inc.sup(), &tau).unwrap();
        let e = jones_projection(&g, inc.sub()).unwrap();
        assert_eq!(e.rank, 1);
        let full = jones_projection(&g, inc.sup()).unwrap();
        assert!((full.matrix - CMat::identity(4, 4)).norm() < 1e-12);

        let (inc, tau) = m2_in_m4();
        let g = gns(inc.sup(), &tau).unwrap();
        let e = jones_projection(&g, inc.sub()).unwrap();
        assert_eq!(e.rank, 4);
        let exp = trace_preserving_expectation(inc.sup(), inc.sub(), &tau).unwrap();
        assert!(e.compression_residual(&g, &exp, 5, 1) < 1e-10);
        assert!(e.idempotence_residual() < 1e-12);
    }

    #[test]
    fn scalar_in_m2_fills_operator_space() {
        let (inc, tau) = scalar_in_m2();
        let bc = basic_construction(&inc, &tau).unwrap();
        assert_eq!(bc.a1.as_ref().unwrap().dim(), 16);
        assert!(bc.checks.unit_residual < 1e-10);
        assert!(bc.checks.markov_residual < 1e-10);
        assert!(bc.checks.span_distance.unwrap() < 1e-8);
        assert!(bc.checks.commutant_distance.unwrap() < 1e-8);
        let (comm, bs) = higher_commutant(&bc).unwrap();
        assert_eq!(comm.dim(), 16);
        assert_eq!(bs.dims.dims(), &[4]);
    }

    #[test]
    fn factor_inclusion_dimension() {
        let (inc, tau) = m2_in_m4();
        let bc = basic_construction(&inc, &tau).unwrap();
        assert_eq!(bc.a1.as_ref().unwrap().dim(), 64);
        assert!(bc.checks.commutant_distance.unwrap() < 1e-8);
        let dual = dual_index_check(&bc).unwrap();
        assert!(dual.equal);
        assert!((dual.dual.scalar.unwrap() - 4.0).abs() < 1e-8);
    }

    #[test]
    fn trivial_inclusion() {
        let a = ConcreteAlgebra::full(2);
        let inc = UnitalInclusion::new(a.clone(), a, "a in a").unwrap();
        let bc = basic_construction(&inc, &TraceFunctional::normalized(2)).unwrap();
        assert!((bc.e.matrix.clone() - CMat::identity(4, 4)).norm() < 1e-12);
        assert!(bc.a1.as_ref().unwrap().distance(&bc.left_sup) < 1e-10);
        let dual = dual_index_check(&bc).unwrap();
        assert!(dual.equal);
        let (_, bs) = higher_commutant(&bc).unwrap();
        assert_eq!(bs.dims.dims(), &[1]);
    }

    #[test]
    fn dual_expectation_formula() {
        let (inc, tau) = scalar_in_m2();
        let bc = basic_construction(&inc, &tau).unwrap();
        let report = dual_expectation(&bc).unwrap();
        assert!(report.extension_residual < 1e-8);
        assert!(report.agreement < 1e-8);
        assert!(report.e1_of_e < 1e-10);
        let g = &bc.gns;
        let l11 = g.left(&unit(2, 0, 0));
        let got = bc.dual.apply(&(&l11 * &bc.e.matrix * &l11));
        assert!(linalg::spectral_norm(&(got - l11.scale(0.25))) < 1e-10);
    }

    #[test]
    fn scalars_in_two_points() {
        let amb = AmbientAlgebra::from_dims(&[1, 1]).unwrap();
        let inc = UnitalInclusion::new(ConcreteAlgebra::scalars(2), ConcreteAlgebra::from_ambient(&amb), "c in c2").unwrap();
        let tau = TraceFunctional::from_block_weights(&amb, &[0.5, 0.5]).unwrap();
        let bc = basic_construction(&inc, &tau).unwrap();
        assert_eq!(bc.a1.as_ref().unwrap().dim(), 4);
        let (_, bs) = higher_commutant(&bc).unwrap();
        assert_eq!(bs.dims.dims(), &[2]);
    }
}
