//! Markov traces of inclusion matrices, closed forms for `ℂ ⊂ ⊕M_{n_j}`,
//! and the cardinality-bound pipeline
//! `λ_{E₁} ≤ λ_F ≤ λ_τ = min_j n_j / Σ n_j²`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::basic_construction::{self, BasicConstructionData};
use crate::error::{Error, Result};
use crate::expectation::{self, MinimalIndex, SearchRegime};
use crate::inclusion::{self, ConcreteAlgebra, InclusionMatrixData, UnitalInclusion};
use crate::linalg::{self, seeded_rng};
use crate::multimatrix::{DimensionVector, TraceFunctional};

/// A reduced fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Rational {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl core::fmt::Display for Rational {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Continued-fraction approximation of a nonnegative `x` within `tol`,
/// with denominators up to `10⁹`.
pub fn rationalize(x: f64, tol: f64) -> Option<Rational> {
    if !(x >= 0.0) || !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = libm::floor(r);
        if a > 1e12 {
            break;
        }
        let a = a as u64;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > 1_000_000_000 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (p1 as f64 / q1 as f64 - x).abs() <= tol {
            return Some(Rational::new(p1, q1));
        }
        let frac = r - a as f64;
        if frac <= 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

#[derive(Debug, Clone)]
pub struct MarkovData {
    pub lambda: InclusionMatrixData,
    pub alpha: f64,
    pub t_sub: Vec<f64>,
    pub t_sup: Vec<f64>,
    pub alpha_rational: Option<Rational>,
    pub t_sup_rational: Option<Vec<Rational>>,
    /// `‖ΛᵀΛ t − α t‖`.
    pub sup_residual: f64,
    /// `‖ΛΛᵀ s − α s‖` for `s = Λ t`.
    pub sub_residual: f64,
    /// `|α − ‖Λ‖²|` with `‖Λ‖` from a singular value decomposition.
    pub norm_residual: f64,
}

/// Perron data of `ΛᵀΛ`, normalized by `Σ n_j t_j = 1`.
pub fn markov_trace(lambda: &InclusionMatrixData) -> Result<MarkovData> {
    let l = lambda.as_real_matrix();
    for i in 0..l.nrows() {
        if l.row(i).iter().all(|x| *x == 0.0) {
            return Err(Error::DegeneratePerron(format!("row {i} of the inclusion matrix is zero")));
        }
    }
    for j in 0..l.ncols() {
        if l.column(j).iter().all(|x| *x == 0.0) {
            return Err(Error::DegeneratePerron(format!("column {j} of the inclusion matrix is zero")));
        }
    }
    let m = l.transpose() * &l;
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let alpha = eig.eigenvalues[order[0]];
    if order.len() > 1 && alpha - eig.eigenvalues[order[1]] <= 1e-9 * alpha.max(1.0) {
        return Err(Error::DegeneratePerron(format!(
            "top eigenvalue {alpha} of ΛᵀΛ is not simple"
        )));
    }
    let dims = lambda.sup_dims.dims();
    let mut t: Vec<f64> = eig.eigenvectors.column(order[0]).iter().map(|x| x.abs()).collect();
    let total: f64 = t.iter().zip(dims).map(|(x, &n)| x * n as f64).sum();
    for x in t.iter_mut() {
        *x /= total;
    }
    if let Some(j) = t.iter().position(|&x| x <= 1e-12) {
        return Err(Error::DegeneratePerron(format!(
            "Perron vector vanishes on block {j} (disconnected inclusion matrix)"
        )));
    }
    let tv = nalgebra::DVector::from_column_slice(&t);
    let s = &l * &tv;
    let sup_residual = (&m * &tv - &tv * alpha).norm();
    let sub_residual = (&l * l.transpose() * &s - &s * alpha).norm();
    let sv = l.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    let norm_residual = (alpha - top * top).abs();
    let t_sup_rational = t.iter().map(|x| rationalize(*x, 1e-9)).collect::<Option<Vec<_>>>();
    Ok(MarkovData {
        lambda: lambda.clone(),
        alpha,
        t_sub: s.iter().copied().collect(),
        t_sup: t,
        alpha_rational: rationalize(alpha, 1e-9),
        t_sup_rational,
        sup_residual,
        sub_residual,
        norm_residual,
    })
}

/// Exact Markov data for `ℂ ⊂ ⊕M_{n_j}`: `t_j = n_j / Σ n_i²`, `α = Σ n_i²`.
pub fn scalar_markov_closed_form(n: &DimensionVector) -> (Vec<Rational>, u64) {
    let alpha: u64 = n.dims().iter().map(|&d| (d * d) as u64).sum();
    (n.dims().iter().map(|&d| Rational::new(d as u64, alpha)).collect(), alpha)
}

/// `λ_τ(ℂ ⊂ ⊕M_{n_j}) = min_j t_j`.
pub fn pp_constant_closed_form(t: &[f64]) -> f64 {
    t.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn pp_constant_closed_form_exact(t: &[Rational]) -> Option<Rational> {
    t.iter().copied().min()
}

/// Row matrix `(n₁ … n_k)` for `ℂ ⊂ ⊕M_{n_j}`.
pub fn scalar_inclusion_matrix(n: &DimensionVector) -> InclusionMatrixData {
    InclusionMatrixData::new(
        alloc::vec![n.dims().to_vec()],
        DimensionVector::new(alloc::vec![1]).expect("nonempty"),
        n.clone(),
    )
    .expect("row matrix of a scalar inclusion is consistent")
}

/// One inequality or identity of the bound argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Set when the link was not verified, with the reason.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub commutant_dims: DimensionVector,
    pub dim_total: usize,
    pub min_block: usize,
    pub ratio: Rational,
    pub minimal_index: f64,
    pub regime: SearchRegime,
    /// `‖Λ‖²` of the inclusion, when its Perron vector is simple.
    pub markov_index: Option<f64>,
    pub markov_note: Option<String>,
    /// `[A:B]₀ · log₁₀ 9`.
    pub bound_log10: f64,
    /// `ratio · log₁₀ 9`.
    pub ratio_log10: f64,
    /// Decimal expansion of `9^⌈ratio⌉` when `ratio ≤ 32`.
    pub nine_power: Option<String>,
    pub lambda_e1: f64,
    pub lambda_f: f64,
    pub lambda_tau: f64,
    /// `max ‖F(xy) − F(yx)‖` on sampled pairs.
    pub f_trace_residual: f64,
    /// `F` takes scalar values (`B′ ∩ A = ℂ`).
    pub f_scalar: bool,
    pub irreducible: bool,
    pub sub_simple: bool,
    pub chain: Vec<ChainLink>,
}

impl BoundReport {
    pub fn link(&self, name: &str) -> Option<&ChainLink> {
        self.chain.iter().find(|l| l.name == name)
    }
}

/// `9^k` in decimal for `k ≤ 32` (`9³² < 2¹²⁸`).
pub fn nine_power_decimal(k: u64) -> Option<String> {
    if k > 32 {
        return None;
    }
    Some(9u128.pow(k as u32).to_string())
}

pub fn bound_pipeline(inc: &UnitalInclusion, tau: &TraceFunctional) -> Result<BoundReport> {
    let bc = basic_construction::basic_construction(inc, tau)?;
    bound_pipeline_from(inc, &bc)
}

pub fn bound_pipeline_from(inc: &UnitalInclusion, bc: &BasicConstructionData) -> Result<BoundReport> {
    let (comm, comm_bs) = basic_construction::higher_commutant(bc)?;
    let dims = comm_bs.dims.clone();
    let dim_total = dims.linear_dim();
    let min_block = dims.min_block();
    let ratio = Rational::new(dim_total as u64, min_block as u64);

    let sub_bs = inclusion::block_structure(inc.sub())?;
    let sup_bs = inclusion::block_structure(inc.sup())?;
    let lambda = inclusion::inclusion_matrix_from(&sub_bs, &sup_bs)?;
    let mi: MinimalIndex = expectation::minimal_index_with(inc, &sup_bs, &lambda)?;
    let (markov_index, markov_note) = match markov_trace(&lambda) {
        Ok(m) => (Some(m.alpha), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let lower = basic_construction::lower_commutant(bc);
    let f_scalar = lower.dim() == 1;
    let f = bc.dual.restrict(&comm, lower.clone())?;
    let lambda_e1 = expectation::pp_constant(&bc.dual)?.value;
    let lambda_f = expectation::pp_constant(&f)?.value;
    let lambda_tau = Rational::new(min_block as u64, dim_total as u64).value();

    let mut rng = seeded_rng(0xf7);
    let mut f_trace_residual: f64 = 0.0;
    for _ in 0..16 {
        let x = comm.random_element(&mut rng);
        let y = comm.random_element(&mut rng);
        let diff = f.apply(&(&x * &y)) - f.apply(&(&y * &x));
        let scale = linalg::spectral_norm(&x) * linalg::spectral_norm(&y);
        f_trace_residual = f_trace_residual.max(linalg::spectral_norm(&diff) / scale.max(1e-300));
    }

    let ln9 = libm::log10(9.0);
    let mut chain = Vec::new();
    chain.push(ChainLink {
        name: "restriction",
        lhs: lambda_e1,
        rhs: lambda_f,
        holds: lambda_e1 <= lambda_f + 1e-8,
        skipped: None,
    });
    let popa = if f_scalar && f_trace_residual <= 1e-8 {
        ChainLink {
            name: "trace_comparison",
            lhs: lambda_f,
            rhs: lambda_tau,
            holds: lambda_f <= lambda_tau + 1e-8,
            skipped: None,
        }
    } else {
        ChainLink {
            name: "trace_comparison",
            lhs: lambda_f,
            rhs: lambda_tau,
            holds: false,
            skipped: Some(if f_scalar {
                format!("F is not tracial (residual {f_trace_residual:e})")
            } else {
                format!("F takes values in a {}-dimensional relative commutant", lower.dim())
            }),
        }
    };
    chain.push(popa);
    chain.push(ChainLink {
        name: "combined",
        lhs: lambda_e1,
        rhs: lambda_tau,
        holds: lambda_e1 <= lambda_tau + 1e-8,
        skipped: None,
    });
    chain.push(ChainLink {
        name: "ratio_vs_minimal_index",
        lhs: ratio.value(),
        rhs: mi.value,
        holds: ratio.value() <= mi.value + 1e-6,
        skipped: None,
    });
    chain.push(ChainLink {
        name: "min_block_is_one",
        lhs: min_block as f64,
        rhs: 1.0,
        holds: min_block == 1,
        skipped: None,
    });

    let nine_power = if ratio.den == 1 || ratio.value() <= 32.0 {
        let k = ratio.num.div_ceil(ratio.den);
        nine_power_decimal(k)
    } else {
        None
    };

    Ok(BoundReport {
        commutant_dims: dims,
        dim_total,
        min_block,
        ratio,
        minimal_index: mi.value,
        regime: mi.regime,
        markov_index,
        markov_note,
        bound_log10: mi.value * ln9,
        ratio_log10: ratio.value() * ln9,
        nine_power,
        lambda_e1,
        lambda_f,
        lambda_tau,
        f_trace_residual,
        f_scalar,
        irreducible: f_scalar,
        sub_simple: lambda.rows() == 1,
        chain,
    })
}

/// `B′ ∩ A` for an inclusion, directly in the ambient matrices.
pub fn relative_commutant_of(inc: &UnitalInclusion) -> Result<ConcreteAlgebra> {
    inclusion::relative_commutant(inc.sub(), inc.sup())
}

/// Dense `ΛᵀΛ`.
pub fn gram(lambda: &InclusionMatrixData) -> DMatrix<f64> {
    let l = lambda.as_real_matrix();
    l.transpose() * l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multimatrix::AmbientAlgebra;

    fn dv(d: &[usize]) -> DimensionVector {
        DimensionVector::new(d.to_vec()).unwrap()
    }

    #[test]
    fn rationalize_examples() {
        assert_eq!(rationalize(2.0 / 13.0, 1e-12), Some(Rational::new(2, 13)));
        assert_eq!(rationalize(13.0, 1e-12), Some(Rational::new(13, 1)));
        assert_eq!(rationalize(0.5, 1e-12), Some(Rational::new(1, 2)));
    }

    #[test]
    fn trivial_markov() {
        let lam = scalar_inclusion_matrix(&dv(&[1]));
        let m = markov_trace(&lam).unwrap();
        assert!((m.alpha - 1.0).abs() < 1e-12);
        assert!((m.t_sup[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_matrix_markov() {
        let lam = scalar_inclusion_matrix(&dv(&[2, 3]));
        let m = markov_trace(&lam).unwrap();
        assert!((m.alpha - 13.0).abs() < 1e-10);
        assert!((m.t_sup[0] - 2.0 / 13.0).abs() < 1e-12);
        assert!((m.t_sup[1] - 3.0 / 13.0).abs() < 1e-12);
        assert_eq!(m.alpha_rational, Some(Rational::new(13, 1)));
        assert_eq!(m.t_sup_rational.unwrap(), vec![Rational::new(2, 13), Rational::new(3, 13)]);
    }

    #[test]
    fn column_matrix_markov() {
        let lam = InclusionMatrixData::new(vec![vec![1], vec![1]], dv(&[1, 1]), dv(&[2])).unwrap();
        let m = markov_trace(&lam).unwrap();
        assert!((m.alpha - 2.0).abs() < 1e-12);
        assert!((m.t_sup[0] - 0.5).abs() < 1e-12);
        assert!((m.t_sub[0] - 0.5).abs() < 1e-12 && (m.t_sub[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_perron_rejected() {
        let lam = InclusionMatrixData::new(vec![vec![1, 0], vec![0, 1]], dv(&[1, 1]), dv(&[1, 1])).unwrap();
        assert!(matches!(markov_trace(&lam), Err(Error::DegeneratePerron(_))));
    }

    #[test]
    fn disconnected_diagram_rejected() {
        let lam = InclusionMatrixData::new(vec![vec![2, 0], vec![0, 1]], dv(&[1, 2]), dv(&[2, 2])).unwrap();
        assert!(matches!(markov_trace(&lam), Err(Error::DegeneratePerron(_))));
    }

    #[test]
    fn closed_forms() {
        let (t, a) = scalar_markov_closed_form(&dv(&[2, 3]));
        assert_eq!(a, 13);
        assert_eq!(t, vec![Rational::new(2, 13), Rational::new(3, 13)]);
        assert_eq!(pp_constant_closed_form_exact(&t), Some(Rational::new(2, 13)));
        let (t, a) = scalar_markov_closed_form(&dv(&[1, 1]));
        assert_eq!(a, 2);
        assert_eq!(t, vec![Rational::new(1, 2); 2]);
        assert_eq!(pp_constant_closed_form(&[1.0]), 1.0);
    }

    #[test]
    fn nine_powers() {
        assert_eq!(nine_power_decimal(1).unwrap(), "9");
        assert_eq!(nine_power_decimal(4).unwrap(), "6561");
        assert_eq!(nine_power_decimal(32).unwrap(), "3433683820292512484657849089281");
        assert!(nine_power_decimal(33).is_none());
    }

    #[test]
    fn pipeline_scalar_in_m2() {
        let inc = UnitalInclusion::new(ConcreteAlgebra::scalars(2), ConcreteAlgebra::full(2), "c in m2").unwrap();
        let r = bound_pipeline(&inc, &TraceFunctional::normalized(2)).unwrap();
        assert_eq!(r.commutant_dims.dims(), &[4]);
        assert_eq!(r.dim_total, 16);
        assert_eq!(r.min_block, 4);
        assert_eq!(r.ratio, Rational::new(4, 1));
        assert_eq!(r.minimal_index, 4.0);
        assert!((r.lambda_e1 - 0.25).abs() < 1e-8);
        assert!((r.lambda_f - 0.25).abs() < 1e-8);
        assert!((r.lambda_tau - 0.25).abs() < 1e-12);
        assert!(!r.f_scalar);
        assert!(r.link("trace_comparison").unwrap().skipped.is_some());
        for name in ["restriction", "combined", "ratio_vs_minimal_index"] {
            assert!(r.link(name).unwrap().holds, "{name}");
        }
        assert_eq!(r.nine_power.as_deref(), Some("6561"));
    }

    #[test]
    fn pipeline_scalar_in_two_points() {
        let amb = AmbientAlgebra::from_dims(&[1, 1]).unwrap();
        let inc = UnitalInclusion::new(ConcreteAlgebra::scalars(2), ConcreteAlgebra::from_ambient(&amb), "c in c2").unwrap();
        let tau = TraceFunctional::from_block_weights(&amb, &[0.5, 0.5]).unwrap();
        let r = bound_pipeline(&inc, &tau).unwrap();
        assert_eq!(r.commutant_dims.dims(), &[2]);
        assert_eq!(r.ratio, Rational::new(2, 1));
        assert_eq!(r.minimal_index, 4.0);
        assert!(r.link("ratio_vs_minimal_index").unwrap().holds);
    }

    #[test]
    fn pipeline_trivial_inclusion() {
        let a = ConcreteAlgebra::full(2);
        let inc = UnitalInclusion::new(a.clone(), a, "a in a").unwrap();
        let r = bound_pipeline(&inc, &TraceFunctional::normalized(2)).unwrap();
        assert_eq!(r.commutant_dims.dims(), &[1]);
        assert_eq!(r.ratio, Rational::new(1, 1));
        assert_eq!(r.minimal_index, 1.0);
        assert_eq!(r.nine_power.as_deref(), Some("9"));
    }
}
