//! Tensoring an inclusion by a full matrix algebra `M_m`, the de-tensoring
//! correspondence for intermediates, and the stability checks at level `m`.

use alloc::format;
use alloc::vec::Vec;

use crate::angle::{self, AngleReport};
use crate::basic_construction::{self, GnsRealization};
use crate::error::{Error, Result};
use crate::expectation::{self, IndexValue};
use crate::inclusion::{self, ConcreteAlgebra, UnitalInclusion};
use crate::linalg::{self, seeded_rng, CMat, RANK_TOL};
use crate::multimatrix::TraceFunctional;

/// Largest dimension of `A ⊗ M_m` accepted by [`tensor_inclusion`].
pub const TENSOR_CAP: usize = 4096;
pub const INDEX_TOL: f64 = 1e-8;
pub const DETENSOR_TOL: f64 = 1e-8;
pub const BASIC_TOL: f64 = 1e-7;

fn unit(m: usize, k: usize, l: usize) -> CMat {
    let mut u = CMat::zeros(m, m);
    u[(k, l)] = linalg::c(1.0);
    u
}

/// `S ⊗ M_m` with basis `s_r ⊗ e_kl`, `r` outermost.
pub fn tensor_algebra(s_alg: &ConcreteAlgebra, m: usize) -> ConcreteAlgebra {
    let n = s_alg.size();
    let q = s_alg.basis_matrix();
    let big = n * m;
    let mut out = CMat::zeros(big * big, q.ncols() * m * m);
    let mut col = 0;
    for r in 0..q.ncols() {
        let s = linalg::unvectorize(&q.column(r).into_owned(), n);
        for k in 0..m {
            for l in 0..m {
                out.set_column(col, &linalg::vectorize(&linalg::kron(&s, &unit(m, k, l))));
                col += 1;
            }
        }
    }
    ConcreteAlgebra::from_columns(big, out)
}

#[derive(Debug, Clone)]
pub struct TensorInstance {
    pub base: UnitalInclusion,
    pub tau: TraceFunctional,
    pub m: usize,
    pub tensored: UnitalInclusion,
    pub tensored_tau: TraceFunctional,
    pub base_index: IndexValue,
    /// Index of `E ⊗ id` computed from its own quasi-basis.
    pub tensored_index: IndexValue,
    /// Reconstruction residual of `{λᵢ ⊗ e_kl / √m}` for `E ⊗ id`.
    pub reconstruction_residual: f64,
    /// `‖Σ μμ* − Ind_w(E) ⊗ 1‖` for the tensored quasi-basis `μ`.
    pub formula_residual: f64,
    /// `‖Ind_w(E ⊗ id) − Ind_w(E) ⊗ 1‖`.
    pub index_residual: f64,
}

impl TensorInstance {
    /// Element index of `a ⊗ x` for base coordinates: `(a ⊗ x)` as a matrix.
    pub fn embed(&self, a: &CMat, x: &CMat) -> CMat {
        linalg::kron(a, x)
    }

    pub fn tensor_intermediate(&self, c_alg: &ConcreteAlgebra) -> ConcreteAlgebra {
        tensor_algebra(c_alg, self.m)
    }
}

pub fn tensor_inclusion(inc: &UnitalInclusion, tau: &TraceFunctional, m: usize) -> Result<TensorInstance> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("tensor level m = {m} must be at least 2")));
    }
    let dim = inc.sup().dim() * m * m;
    if dim > TENSOR_CAP {
        return Err(Error::SizeCap(format!("tensored dimension {dim} exceeds {TENSOR_CAP}")));
    }
    let sub_t = tensor_algebra(inc.sub(), m);
    let sup_t = tensor_algebra(inc.sup(), m);
    let tensored = UnitalInclusion::new(sub_t, sup_t, format!("{} ⊗ M{m}", inc.label()))?;
    let tensored_tau = tau.tensor_normalized(m);

    let e = expectation::trace_preserving_expectation(inc.sup(), inc.sub(), tau)?;
    let base_qb = expectation::quasi_basis(&e)?;
    let base_index = expectation::index_from_quasi_basis(&e, &base_qb)?;
    let e_t = expectation::trace_preserving_expectation(tensored.sup(), tensored.sub(), &tensored_tau)?;

    let scale = 1.0 / linalg::sqrt(m as f64);
    let mut mus = Vec::with_capacity(base_qb.elements.len() * m * m);
    for l in &base_qb.elements {
        for k in 0..m {
            for j in 0..m {
                mus.push(linalg::kron(l, &unit(m, k, j)).scale(scale));
            }
        }
    }
    let (left, right) = expectation::reconstruction_residuals(&e_t, &mus, &tensored.sup().basis());
    let big = inc.size() * m;
    let mut sum = CMat::zeros(big, big);
    for mu in &mus {
        sum += mu * mu.adjoint();
    }
    let expected = linalg::kron(&base_index.element, &linalg::identity(m));
    let formula_residual = linalg::spectral_norm(&(sum - &expected));
    let tensored_index = expectation::watatani_index(&e_t)?;
    let index_residual = linalg::spectral_norm(&(&tensored_index.element - &expected));
    if left.max(right) > INDEX_TOL || formula_residual > INDEX_TOL || index_residual > INDEX_TOL {
        return Err(Error::IndexNotScalar(left.max(right).max(formula_residual).max(index_residual)));
    }
    Ok(TensorInstance {
        base: inc.clone(),
        tau: tau.clone(),
        m,
        tensored,
        tensored_tau,
        base_index,
        tensored_index,
        reconstruction_residual: left.max(right),
        formula_residual,
        index_residual,
    })
}

/// `C = {a ∈ A : a ⊗ e₀₀ ∈ M}`, verified against `M = C ⊗ M_m`.
pub fn detensor(m_alg: &ConcreteAlgebra, ti: &TensorInstance) -> Result<ConcreteAlgebra> {
    ti.tensored.check_intermediate(m_alg)?;
    let m = ti.m;
    let qa = ti.base.sup().basis_matrix();
    let n = ti.base.size();
    let big = n * m;
    let e00 = unit(m, 0, 0);
    let mut v = CMat::zeros(big * big, qa.ncols());
    for r in 0..qa.ncols() {
        let a = linalg::unvectorize(&qa.column(r).into_owned(), n);
        v.set_column(r, &linalg::vectorize(&linalg::kron(&a, &e00)));
    }
    let qm = m_alg.basis_matrix();
    let residual = &v - qm * (qm.adjoint() * &v);
    let kernel = inclusion::absolute_null_space(&residual, RANK_TOL);
    let c_alg = ConcreteAlgebra::from_columns(n, qa * kernel);
    let back = tensor_algebra(&c_alg, m);
    let distance = back.distance(m_alg);
    if distance > DETENSOR_TOL {
        return Err(Error::CorrespondenceViolation(distance));
    }
    Ok(c_alg)
}

/// `L²(A ⊗ M_m, τ ⊗ tr) ≅ L²(A, τ) ⊗ L²(M_m, tr)` sending `ŝ_r ⊗ (√m e_kl)` to
/// the class of `s_r ⊗ √m e_kl`.
pub fn identification_unitary(base: &GnsRealization, tensored: &GnsRealization, m: usize) -> CMat {
    let d = base.dim();
    let mm = m * m;
    let root = linalg::sqrt(m as f64);
    let mut u = CMat::zeros(tensored.dim(), d * mm);
    for (r, s) in base.ons().iter().enumerate() {
        for k in 0..m {
            for l in 0..m {
                let x = linalg::kron(s, &unit(m, k, l).scale(root));
                u.set_column(r * mm + k * m + l, &tensored.coords(&x));
            }
        }
    }
    u
}

fn with_norm(x: CMat) -> (CMat, f64) {
    let n = linalg::spectral_norm(&x);
    (x, n)
}

/// Left multiplication by `x` on `L²(M_m, tr)` in the basis `√m e_kl`.
fn left_mm(x: &CMat, m: usize) -> CMat {
    linalg::kron(x, &linalg::identity(m))
}

/// Right multiplication by `y` on `L²(M_m, tr)`.
fn right_mm(y: &CMat, m: usize) -> CMat {
    linalg::kron(&linalg::identity(m), &y.transpose())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorBasicReport {
    /// `‖U*U − 1‖`.
    pub unitary_residual: f64,
    /// `‖e' − U (e_B ⊗ 1) U*‖` for the tensored Jones projection `e'`.
    pub jones_residual: f64,
    /// `max ‖L'_{a⊗x} − U (L_a ⊗ L_x) U*‖_F` over generators.
    pub generator_residual: f64,
    /// Relative Frobenius commutators of sampled elements of `U (A₁ ⊗ M_m) U*` with
    /// `R'_{B⊗M_m}`.
    pub forward_residual: f64,
    /// Sampled elements `L'_x e' L'_y` failing to commute with
    /// `U (R_B ⊗ 1)U*` and `U (1 ⊗ R_{M_m}) U*`.
    pub backward_residual: f64,
    /// Subspace distance when both sides are small enough to materialize.
    pub subspace_distance: Option<f64>,
    pub distance: f64,
    pub passed: bool,
}

pub fn tensor_basic_check(ti: &TensorInstance) -> Result<TensorBasicReport> {
    let m = ti.m;
    let mm = m * m;
    let base = basic_construction::basic_construction_with(&ti.base, &ti.tau, false)?;
    let tens = basic_construction::basic_construction_with(&ti.tensored, &ti.tensored_tau, false)?;
    let g = &base.gns;
    let gt = &tens.gns;
    let d = g.dim();
    let u = identification_unitary(g, gt, m);
    let ud = u.adjoint();
    let conj = |x: &CMat| &u * x * &ud;
    let unitary_residual = linalg::spectral_norm(&(&ud * &u - CMat::identity(d * mm, d * mm)));
    let one_mm = CMat::identity(mm, mm);
    let jones_residual = linalg::spectral_norm(&(&tens.e.matrix - conj(&linalg::kron(&base.e.matrix, &one_mm))));

    let mut generator_residual: f64 = 0.0;
    for a in ti.base.sup().basis() {
        for k in 0..m {
            for l in 0..m {
                let x = unit(m, k, l);
                let lhs = gt.left(&linalg::kron(&a, &x));
                let rhs = conj(&linalg::kron(&g.left(&a), &left_mm(&x, m)));
                generator_residual = generator_residual.max(linalg::frobenius(&(lhs - rhs)));
            }
        }
    }

    let right_sub_t: Vec<(CMat, f64)> = ti
        .tensored
        .sub()
        .basis()
        .iter()
        .map(|b| with_norm(gt.right(b)))
        .collect();
    let mut shifted: Vec<(CMat, f64)> = ti
        .base
        .sub()
        .basis()
        .iter()
        .map(|b| with_norm(conj(&linalg::kron(&g.right(b), &one_mm))))
        .collect();
    for k in 0..m {
        for l in 0..m {
            shifted.push(with_norm(conj(&linalg::kron(&CMat::identity(d, d), &right_mm(&unit(m, k, l), m)))));
        }
    }
    let mut rng = seeded_rng(0x7e);
    let mut forward_residual: f64 = 0.0;
    let mut backward_residual: f64 = 0.0;
    for _ in 0..4 {
        let mut y = g.left(&ti.base.sup().random_element(&mut rng));
        for _ in 0..2 {
            let x = g.left(&ti.base.sup().random_element(&mut rng));
            let z = g.left(&ti.base.sup().random_element(&mut rng));
            y += x * &base.e.matrix * z;
        }
        let w = linalg::random_complex_matrix(&mut rng, m, m);
        let s = conj(&linalg::kron(&y, &left_mm(&w, m)));
        let ns = linalg::spectral_norm(&s);
        for (r, nr) in &right_sub_t {
            let c = linalg::frobenius(&linalg::commutator(&s, r)) / (ns * nr).max(1e-300);
            forward_residual = forward_residual.max(c);
        }

        let x = gt.left(&ti.tensored.sup().random_element(&mut rng));
        let z = gt.left(&ti.tensored.sup().random_element(&mut rng));
        let t = gt.left(&ti.tensored.sup().random_element(&mut rng)) + x * &tens.e.matrix * z;
        let nt = linalg::spectral_norm(&t);
        for (r, nr) in &shifted {
            let c = linalg::frobenius(&linalg::commutator(&t, r)) / (nt * nr).max(1e-300);
            backward_residual = backward_residual.max(c);
        }
    }

    let subspace_distance = if d * mm <= basic_construction::A1_CAP {
        let direct = basic_construction::basic_construction(&ti.tensored, &ti.tensored_tau)?
            .a1
            .expect("materialized under the cap");
        let base_a1 = basic_construction::basic_construction(&ti.base, &ti.tau)?
            .a1
            .expect("materialized under the cap");
        let mut ops = Vec::new();
        for y in base_a1.basis() {
            for k in 0..m {
                for l in 0..m {
                    ops.push(conj(&linalg::kron(&y, &left_mm(&unit(m, k, l), m))));
                }
            }
        }
        let identified = ConcreteAlgebra::span_unchecked(d * mm, &ops);
        Some(identified.distance(&direct))
    } else {
        None
    };

    let distance = [
        unitary_residual,
        jones_residual,
        generator_residual,
        forward_residual,
        backward_residual,
        subspace_distance.unwrap_or(0.0),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(TensorBasicReport {
        unitary_residual,
        jones_residual,
        generator_residual,
        forward_residual,
        backward_residual,
        subspace_distance,
        distance,
        passed: distance <= BASIC_TOL,
    })
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub base: AngleReport,
    pub tensored: AngleReport,
    pub difference: f64,
}

pub fn stability_check(
    inc: &UnitalInclusion,
    c_alg: &ConcreteAlgebra,
    d_alg: &ConcreteAlgebra,
    tau: &TraceFunctional,
    m: usize,
) -> Result<StabilityReport> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("tensor level m = {m} must be at least 2")));
    }
    let base = angle::angle(inc, c_alg, d_alg, tau)?;
    let sub_t = tensor_algebra(inc.sub(), m);
    let sup_t = tensor_algebra(inc.sup(), m);
    let tensored_inc = UnitalInclusion::new(sub_t, sup_t, format!("{} ⊗ M{m}", inc.label()))?;
    let tensored = angle::angle(
        &tensored_inc,
        &tensor_algebra(c_alg, m),
        &tensor_algebra(d_alg, m),
        &tau.tensor_normalized(m),
    )?;
    let difference = (base.angle - tensored.angle).abs();
    Ok(StabilityReport {
        base,
        tensored,
        difference,
    })
}

/// Stability reports for every pair `i ≤ j` of `family`, sharing one basic
/// construction per level.
pub fn stability_family(
    inc: &UnitalInclusion,
    family: &[ConcreteAlgebra],
    tau: &TraceFunctional,
    m: usize,
) -> Result<Vec<(usize, usize, StabilityReport)>> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("tensor level m = {m} must be at least 2")));
    }
    let base_bc = basic_construction::basic_construction_with(inc, tau, false)?;
    let sub_t = tensor_algebra(inc.sub(), m);
    let sup_t = tensor_algebra(inc.sup(), m);
    let tensored_inc = UnitalInclusion::new(sub_t, sup_t, format!("{} ⊗ M{m}", inc.label()))?;
    let tensored_bc = basic_construction::basic_construction_with(&tensored_inc, &tau.tensor_normalized(m), false)?;
    let lifted: Vec<ConcreteAlgebra> = family.iter().map(|c| tensor_algebra(c, m)).collect();
    let mut out = Vec::new();
    for i in 0..family.len() {
        for j in i..family.len() {
            let base = angle::angle_in(inc, &base_bc, &family[i], &family[j])?;
            let tensored = angle::angle_in(&tensored_inc, &tensored_bc, &lifted[i], &lifted[j])?;
            let difference = (base.angle - tensored.angle).abs();
            out.push((
                i,
                j,
                StabilityReport {
                    base,
                    tensored,
                    difference,
                },
            ));
        }
    }
    Ok(out)
}
