//! Angles between intermediate subalgebras `B ⊆ C, D ⊆ A`, measured with the
//! `A`-valued inner product `⟨x, y⟩_A = E₁(x*y)` on the basic construction.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::basic_construction::{self, BasicConstructionData, JonesProjection};
use crate::error::{Error, Result};
use crate::expectation::ConditionalExpectation;
use crate::inclusion::{self, ConcreteAlgebra, UnitalInclusion};
use crate::linalg::{self, seeded_rng, CMat};
use crate::multimatrix::TraceFunctional;

/// Membership tolerance for operators handed to the `A`-valued forms.
pub const A1_MEMBER_TOL: f64 = 1e-8;
/// Slack allowed above 1 before the cosine is clamped.
pub const COS_TOL: f64 = 1e-9;
/// Cosines within `COS_SNAP` of 1 report angle 0 (the resolution of `acos`
/// there is about `√(2ε)`).
pub const COS_SNAP: f64 = 1e-14;
/// Below this `A`-norm an intermediate is treated as equal to `B`.
pub const DEGENERATE_TOL: f64 = 1e-10;
/// Eigenvalues of `e_C + e_D` at least `2 − MEET_TOL` span the meet.
pub const MEET_TOL: f64 = 1e-9;
pub const ALTERNATING_MAX: usize = 200;
pub const ALTERNATING_TOL: f64 = 1e-6;

fn check_member(e1: &ConditionalExpectation, x: &CMat) -> Result<()> {
    if let Some(src) = e1.source() {
        let r = src.residual(x);
        if r > A1_MEMBER_TOL {
            return Err(Error::NotInBasicConstruction(r));
        }
    }
    Ok(())
}

/// `⟨x, y⟩_A = E₁(x*y)`.
pub fn a_valued_inner(e1: &ConditionalExpectation, x: &CMat, y: &CMat) -> Result<CMat> {
    check_member(e1, x)?;
    check_member(e1, y)?;
    Ok(e1.apply(&(x.adjoint() * y)))
}

/// `‖x‖_A = ‖E₁(x*x)‖^{1/2}`.
pub fn a_norm(e1: &ConditionalExpectation, x: &CMat) -> Result<f64> {
    let g = a_valued_inner(e1, x, x)?;
    Ok(linalg::sqrt(linalg::spectral_norm(&g)))
}

#[derive(Debug, Clone)]
pub struct AngleReport {
    pub cos_value: f64,
    pub angle: f64,
    /// Cosine before clamping to `[0, 1]`.
    pub raw_cos: f64,
    pub numerator: f64,
    pub denom_c: f64,
    pub denom_d: f64,
    pub trace_used: TraceFunctional,
}

pub fn angle(
    inc: &UnitalInclusion,
    c_alg: &ConcreteAlgebra,
    d_alg: &ConcreteAlgebra,
    tau: &TraceFunctional,
) -> Result<AngleReport> {
    let bc = basic_construction::basic_construction_with(inc, tau, false)?;
    angle_in(inc, &bc, c_alg, d_alg)
}

/// Angle computed against an existing basic construction of `inc`.
pub fn angle_in(
    inc: &UnitalInclusion,
    bc: &BasicConstructionData,
    c_alg: &ConcreteAlgebra,
    d_alg: &ConcreteAlgebra,
) -> Result<AngleReport> {
    inc.check_intermediate(c_alg)?;
    inc.check_intermediate(d_alg)?;
    let e_c = basic_construction::jones_projection(&bc.gns, c_alg)?;
    let e_d = basic_construction::jones_projection(&bc.gns, d_alg)?;
    angle_from_projections(bc, &e_c, &e_d)
}

fn angle_from_projections(bc: &BasicConstructionData, e_c: &JonesProjection, e_d: &JonesProjection) -> Result<AngleReport> {
    let x = &e_c.matrix - &bc.e.matrix;
    let y = &e_d.matrix - &bc.e.matrix;
    let denom_c = a_norm(&bc.dual, &x)?;
    if denom_c <= DEGENERATE_TOL {
        return Err(Error::DegenerateIntermediate(denom_c));
    }
    let denom_d = a_norm(&bc.dual, &y)?;
    if denom_d <= DEGENERATE_TOL {
        return Err(Error::DegenerateIntermediate(denom_d));
    }
    let same = linalg::spectral_norm(&(&e_c.matrix - &e_d.matrix)) <= 1e-12;
    let numerator = if same {
        denom_c * denom_d
    } else {
        linalg::spectral_norm(&a_valued_inner(&bc.dual, &x, &y)?)
    };
    let raw_cos = if same { 1.0 } else { numerator / (denom_c * denom_d) };
    if raw_cos > 1.0 + COS_TOL {
        return Err(Error::InvalidParameter(format!("cosine {raw_cos} exceeds 1")));
    }
    let cos_value = if raw_cos >= 1.0 - COS_SNAP { 1.0 } else { raw_cos.clamp(0.0, 1.0) };
    Ok(AngleReport {
        cos_value,
        angle: libm::acos(cos_value),
        raw_cos,
        numerator,
        denom_c,
        denom_d,
        trace_used: bc.gns.trace().clone(),
    })
}

/// `max ‖E(x*y)‖ − ‖x‖_E ‖y‖_E` over seeded pairs of unit Frobenius norm.
pub fn cauchy_schwarz_check(e: &ConditionalExpectation, samples: usize, seed: u64) -> Result<f64> {
    let src = e
        .source()
        .ok_or_else(|| Error::InvalidParameter("expectation has no materialized source".into()))?;
    let mut rng = seeded_rng(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let x = src.random_element(&mut rng);
        let y = src.random_element(&mut rng);
        let x = x.unscale(linalg::frobenius(&x));
        let y = y.unscale(linalg::frobenius(&y));
        let lhs = linalg::spectral_norm(&e.apply(&(x.adjoint() * &y)));
        let nx = linalg::sqrt(linalg::spectral_norm(&e.apply(&(x.adjoint() * &x))));
        let ny = linalg::sqrt(linalg::spectral_norm(&e.apply(&(y.adjoint() * &y))));
        worst = worst.max(lhs - nx * ny);
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct MeetReport {
    /// `‖e_C ∧ e_D − e_{C∩D}‖`.
    pub difference: f64,
    pub passed: bool,
    pub meet_rank: usize,
    pub intersection_dim: usize,
    /// `‖(e_C e_D e_C)ⁿ − e_C ∧ e_D‖` for `n = 1, 2, …` until it drops
    /// below the tolerance.
    pub alternating: Vec<f64>,
    pub alternating_monotone: bool,
    pub alternating_converged: bool,
}

pub fn meet_projection_check(
    inc: &UnitalInclusion,
    c_alg: &ConcreteAlgebra,
    d_alg: &ConcreteAlgebra,
    tau: &TraceFunctional,
) -> Result<MeetReport> {
    let bc = basic_construction::basic_construction_with(inc, tau, false)?;
    meet_in(inc, &bc, c_alg, d_alg)
}

pub fn meet_in(
    inc: &UnitalInclusion,
    bc: &BasicConstructionData,
    c_alg: &ConcreteAlgebra,
    d_alg: &ConcreteAlgebra,
) -> Result<MeetReport> {
    inc.check_intermediate(c_alg)?;
    inc.check_intermediate(d_alg)?;
    let g = &bc.gns;
    let e_c = basic_construction::jones_projection(g, c_alg)?.matrix;
    let e_d = basic_construction::jones_projection(g, d_alg)?.matrix;
    let (vals, vecs) = linalg::herm_eigen(&(&e_c + &e_d));
    let top: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] >= 2.0 - MEET_TOL).collect();
    let d = g.dim();
    let mut meet = CMat::zeros(d, d);
    for &k in &top {
        let v = vecs.column(k);
        meet += &v * v.adjoint();
    }
    let cap = inclusion::intersect(c_alg, d_alg)?;
    let e_cap = basic_construction::jones_projection(g, &cap)?.matrix;
    let difference = linalg::spectral_norm(&(&meet - &e_cap));

    let step = &e_c * &e_d * &e_c;
    let mut power = step.clone();
    let mut alternating = Vec::new();
    for _ in 0..ALTERNATING_MAX {
        let err = linalg::spectral_norm(&(&power - &meet));
        alternating.push(err);
        if err < ALTERNATING_TOL {
            break;
        }
        power = &power * &step;
    }
    let alternating_monotone = alternating.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let alternating_converged = alternating.last().is_some_and(|e| *e < ALTERNATING_TOL);
    Ok(MeetReport {
        difference,
        passed: difference <= 1e-8,
        meet_rank: top.len(),
        intersection_dim: cap.dim(),
        alternating,
        alternating_monotone,
        alternating_converged,
    })
}

#[derive(Debug, Clone)]
pub struct RigidityPair {
    pub first: usize,
    pub second: usize,
    pub angle: f64,
    pub above_threshold: bool,
}

#[derive(Debug, Clone)]
pub struct RigidityReport {
    /// Indices into the input family of its minimal members, excluding
    /// members equal to `B`.
    pub minimal: Vec<usize>,
    pub pairs: Vec<RigidityPair>,
    pub threshold: f64,
    pub hypotheses_met: bool,
    pub note: String,
}

/// Pairwise angles among the minimal members of `family`, compared with `π/3`.
pub fn rigidity_report(inc: &UnitalInclusion, family: &[ConcreteAlgebra], tau: &TraceFunctional) -> Result<RigidityReport> {
    let bc = basic_construction::basic_construction_with(inc, tau, false)?;
    rigidity_in(inc, &bc, family)
}

pub fn rigidity_in(inc: &UnitalInclusion, bc: &BasicConstructionData, family: &[ConcreteAlgebra]) -> Result<RigidityReport> {
    let b_dim = inc.sub().dim();
    let candidates: Vec<usize> = (0..family.len()).filter(|&i| family[i].dim() > b_dim).collect();
    let mut minimal = Vec::new();
    for &i in &candidates {
        let dominated = candidates.iter().any(|&j| {
            j != i
                && family[j].dim() < family[i].dim()
                && family[i].contains_algebra(&family[j], inclusion::SUBSPACE_TOL)
        });
        let duplicate = minimal
            .iter()
            .any(|&k: &usize| family[k].distance(&family[i]) <= inclusion::SUBSPACE_TOL);
        if !dominated && !duplicate {
            minimal.push(i);
        }
    }
    let projections = minimal
        .iter()
        .map(|&i| basic_construction::jones_projection(&bc.gns, &family[i]))
        .collect::<Result<Vec<_>>>()?;
    let threshold = core::f64::consts::FRAC_PI_3;
    let mut pairs = Vec::new();
    for a in 0..minimal.len() {
        for b in a + 1..minimal.len() {
            let r = angle_from_projections(bc, &projections[a], &projections[b])?;
            pairs.push(RigidityPair {
                first: minimal[a],
                second: minimal[b],
                angle: r.angle,
                above_threshold: r.angle > threshold,
            });
        }
    }
    let irreducible = basic_construction::lower_commutant(bc).dim() == 1;
    let sub_simple = inclusion::block_structure(inc.sub())?.dims.len() == 1;
    let sup_simple = inclusion::block_structure(inc.sup())?.dims.len() == 1;
    let hypotheses_met = irreducible && sub_simple && sup_simple;
    let mut reasons = Vec::new();
    if !irreducible {
        reasons.push("B′∩A ≠ ℂ");
    }
    if !sub_simple {
        reasons.push("B is not simple");
    }
    if !sup_simple {
        reasons.push("A is not simple");
    }
    let note = if hypotheses_met {
        String::from("hypotheses met")
    } else {
        format!("hypotheses not met ({})", reasons.join(", "))
    };
    Ok(RigidityReport {
        minimal,
        pairs,
        threshold,
        hypotheses_met,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;

    fn m4_square() -> (UnitalInclusion, ConcreteAlgebra, ConcreteAlgebra, TraceFunctional) {
        let i2 = linalg::identity(2);
        let mut left = Vec::new();
        let mut right = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                let mut u = CMat::zeros(2, 2);
                u[(i, j)] = linalg::c(1.0);
                left.push(kron(&u, &i2));
                right.push(kron(&i2, &u));
            }
        }
        let c_alg = ConcreteAlgebra::span(4, &left).unwrap();
        let d_alg = ConcreteAlgebra::span(4, &right).unwrap();
        let inc = UnitalInclusion::new(ConcreteAlgebra::scalars(4), ConcreteAlgebra::full(4), "c in m4").unwrap();
        (inc, c_alg, d_alg, TraceFunctional::normalized(4))
    }

    #[test]
    fn inner_products_of_e_and_one() {
        let (inc, _, _, tau) = m4_square();
        let bc = basic_construction::basic_construction_with(&inc, &tau, false).unwrap();
        let d = bc.gns.dim();
        let one = CMat::identity(d, d);
        let g = a_valued_inner(&bc.dual, &one, &one).unwrap();
        assert!(linalg::spectral_norm(&(g - &one)) < 1e-10);
        let ge = a_valued_inner(&bc.dual, &bc.e.matrix, &bc.e.matrix).unwrap();
        assert!(linalg::spectral_norm(&(ge - one.scale(1.0 / 16.0))) < 1e-10);
        assert!((a_norm(&bc.dual, &bc.e.matrix).unwrap() - 0.25).abs() < 1e-10);
        assert_eq!(a_norm(&bc.dual, &CMat::zeros(d, d)).unwrap(), 0.0);
    }

    #[test]
    fn commuting_square_is_right_angle() {
        let (inc, c_alg, d_alg, tau) = m4_square();
        let r = angle(&inc, &c_alg, &d_alg, &tau).unwrap();
        assert!((r.angle - core::f64::consts::FRAC_PI_2).abs() < 1e-8);
        let bc = basic_construction::basic_construction_with(&inc, &tau, false).unwrap();
        let e_c = basic_construction::jones_projection(&bc.gns, &c_alg).unwrap().matrix;
        let e_d = basic_construction::jones_projection(&bc.gns, &d_alg).unwrap().matrix;
        let ip = a_valued_inner(&bc.dual, &e_c, &e_d).unwrap();
        let d = bc.gns.dim();
        assert!(linalg::spectral_norm(&(ip - CMat::identity(d, d).scale(1.0 / 16.0))) < 1e-10);
    }

    #[test]
    fn self_angle_is_zero() {
        let (inc, c_alg, _, tau) = m4_square();
        let r = angle(&inc, &c_alg, &c_alg, &tau).unwrap();
        assert_eq!(r.angle, 0.0);
        assert_eq!(r.cos_value, 1.0);
    }

    #[test]
    fn degenerate_intermediate_rejected() {
        let (inc, c_alg, _, tau) = m4_square();
        let b = inc.sub().clone();
        assert!(matches!(angle(&inc, &b, &c_alg, &tau), Err(Error::DegenerateIntermediate(_))));
    }

    #[test]
    fn non_intermediate_rejected() {
        let inc = UnitalInclusion::new(ConcreteAlgebra::full(2), ConcreteAlgebra::full(2), "m2").unwrap();
        let s = ConcreteAlgebra::scalars(2);
        let tau = TraceFunctional::normalized(2);
        assert!(matches!(angle(&inc, &s, &s, &tau), Err(Error::NotIntermediate(_))));
    }

    #[test]
    fn meet_of_square_is_bottom() {
        let (inc, c_alg, d_alg, tau) = m4_square();
        let r = meet_projection_check(&inc, &c_alg, &d_alg, &tau).unwrap();
        assert!(r.difference <= 1e-10, "{}", r.difference);
        assert_eq!(r.meet_rank, 1);
        assert_eq!(r.intersection_dim, 1);
        assert!(r.alternating_converged && r.alternating_monotone);
        let same = meet_projection_check(&inc, &c_alg, &c_alg, &tau).unwrap();
        assert!(same.difference <= 1e-10);
        assert_eq!(same.meet_rank, 4);
    }

    #[test]
    fn cauchy_schwarz_partial_trace() {
        let (inc, c_alg, _, tau) = m4_square();
        let e = crate::expectation::trace_preserving_expectation(inc.sup(), &c_alg, &tau).unwrap();
        assert!(cauchy_schwarz_check(&e, 1000, 7).unwrap() <= 1e-9);
    }

    #[test]
    fn rigidity_of_square() {
        let (inc, c_alg, d_alg, tau) = m4_square();
        let r = rigidity_report(&inc, &[c_alg.clone(), d_alg], &tau).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert!(r.pairs[0].above_threshold);
        assert!(!r.hypotheses_met);
        assert!(r.note.contains("B′∩A ≠ ℂ"));
        let single = rigidity_report(&inc, &[c_alg], &tau).unwrap();
        assert!(single.pairs.is_empty());
    }
}
