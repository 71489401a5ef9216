//! The ambient multi-matrix algebra `⊕_j M_{n_j}` and its elements.
//!
//! Elements are stored as dense `N x N` complex matrices with `N = Σ n_j`,
//! block-diagonal when they belong to an [`AmbientAlgebra`]. Traces are
//! stored through their density so that the same type serves block-weight
//! traces on the ambient algebra and central-weight traces on subalgebras.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

/// Default absolute tolerance for element-level checks.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DimensionVector(Vec<usize>);

impl DimensionVector {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDimensions("empty dimension vector".into()));
        }
        if let Some(bad) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidDimensions(format!("block size {bad} < 1")));
        }
        Ok(DimensionVector(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Ambient matrix size `Σ n_j`.
    pub fn total_size(&self) -> usize {
        self.0.iter().sum()
    }

    /// Linear dimension `Σ n_j²`.
    pub fn linear_dim(&self) -> usize {
        self.0.iter().map(|n| n * n).sum()
    }

    pub fn min_block(&self) -> usize {
        *self.0.iter().min().expect("non-empty")
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.0
            .iter()
            .map(|n| {
                let o = acc;
                acc += n;
                o
            })
            .collect()
    }
}

/// `⊕_j M_{n_j}` realized block-diagonally inside `M_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientAlgebra {
    dims: DimensionVector,
}

impl AmbientAlgebra {
    pub fn new(dims: DimensionVector) -> Self {
        AmbientAlgebra { dims }
    }

    pub fn from_dims(dims: &[usize]) -> Result<Self> {
        Ok(AmbientAlgebra::new(DimensionVector::new(dims.to_vec())?))
    }

    /// The full matrix algebra `M_n`.
    pub fn full(n: usize) -> Result<Self> {
        AmbientAlgebra::from_dims(&[n])
    }

    pub fn dims(&self) -> &DimensionVector {
        &self.dims
    }

    pub fn size(&self) -> usize {
        self.dims.total_size()
    }

    pub fn block_range(&self, block: usize) -> Range<usize> {
        let start = self.dims.offsets()[block];
        start..start + self.dims.dims()[block]
    }

    pub fn identity(&self) -> CMat {
        linalg::identity(self.size())
    }

    pub fn zero(&self) -> CMat {
        CMat::zeros(self.size(), self.size())
    }

    /// Matrix unit `e_{ij}` inside block `block`.
    pub fn matrix_unit(&self, block: usize, i: usize, j: usize) -> CMat {
        let r = self.block_range(block);
        let mut m = self.zero();
        m[(r.start + i, r.start + j)] = c(1.0);
        m
    }

    /// Projection onto block `block`.
    pub fn block_projection(&self, block: usize) -> CMat {
        let mut m = self.zero();
        for i in self.block_range(block) {
            m[(i, i)] = c(1.0);
        }
        m
    }

    /// Canonical basis of matrix units, block-major and row-major inside
    /// each block.
    pub fn matrix_units(&self) -> Vec<CMat> {
        let mut out = Vec::with_capacity(self.dims.linear_dim());
        for (b, &n) in self.dims.dims().iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    out.push(self.matrix_unit(b, i, j));
                }
            }
        }
        out
    }

    /// Frobenius mass of `a` outside the diagonal blocks.
    pub fn off_block_mass(&self, a: &CMat) -> f64 {
        let mut block_of = Vec::with_capacity(self.size());
        for (b, &n) in self.dims.dims().iter().enumerate() {
            block_of.extend(core::iter::repeat(b).take(n));
        }
        let mut mass = 0.0;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if block_of[i] != block_of[j] {
                    mass += a[(i, j)].norm_sqr();
                }
            }
        }
        linalg::sqrt(mass)
    }

    pub fn check_member(&self, a: &CMat) -> Result<()> {
        check_square(a, self.size())?;
        let off = self.off_block_mass(a);
        if off > DEFAULT_TOL * (1.0 + linalg::frobenius(a)) {
            return Err(Error::OffBlock(off));
        }
        Ok(())
    }

    pub fn block(&self, a: &CMat, block: usize) -> CMat {
        let r = self.block_range(block);
        a.view((r.start, r.start), (r.len(), r.len())).into_owned()
    }

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> CMat {
        let mut m = self.zero();
        for b in 0..self.dims.len() {
            let r = self.block_range(b);
            let blk = linalg::random_complex_matrix(rng, r.len(), r.len());
            m.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&blk);
        }
        m
    }
}

pub(crate) fn check_square(a: &CMat, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got_rows: a.nrows(),
            got_cols: a.ncols(),
        });
    }
    Ok(())
}

/// Product of two elements of the same home algebra.
pub fn product(home: &AmbientAlgebra, a: &CMat, b: &CMat) -> Result<CMat> {
    home.check_member(a)?;
    home.check_member(b)?;
    Ok(a * b)
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint()
}

pub fn operator_norm(a: &CMat) -> f64 {
    linalg::spectral_norm(a)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    let scale = operator_norm(a).max(1.0);
    operator_norm(&(a - a.adjoint())) <= tol * scale
}

pub fn is_positive(a: &CMat, tol: f64) -> bool {
    is_hermitian(a, tol) && linalg::min_eigenvalue(a) >= -tol
}

/// A faithful positive tracial state `τ(x) = Tr(h x)`.
///
/// `weights[j]` is the value of `τ` on a minimal projection of block `j` of
/// the decomposition it was built from; `density` is the matrix `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFunctional {
    weights: Vec<f64>,
    block_sizes: Vec<usize>,
    density: CMat,
}

impl TraceFunctional {
    /// Block-weight trace on an ambient algebra; `Σ n_j t_j` must be 1.
    pub fn from_block_weights(ambient: &AmbientAlgebra, weights: &[f64]) -> Result<Self> {
        let dims = ambient.dims().dims();
        if weights.len() != dims.len() {
            return Err(Error::InvalidDimensions(format!(
                "{} weights for {} blocks",
                weights.len(),
                dims.len()
            )));
        }
        if let Some(w) = weights.iter().find(|&&w| !(w > 0.0)) {
            return Err(Error::TraceNotFaithful(*w));
        }
        let total: f64 = dims.iter().zip(weights).map(|(&n, &t)| n as f64 * t).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::TraceNotNormalized(total));
        }
        let mut density = ambient.zero();
        for (b, &t) in weights.iter().enumerate() {
            for i in ambient.block_range(b) {
                density[(i, i)] = c(t);
            }
        }
        Ok(TraceFunctional {
            weights: weights.to_vec(),
            block_sizes: dims.to_vec(),
            density,
        })
    }

    /// Normalized trace `Tr/N` on `M_N`, restricted to whatever lives there.
    pub fn normalized(n: usize) -> Self {
        TraceFunctional {
            weights: alloc::vec![1.0 / n as f64],
            block_sizes: alloc::vec![n],
            density: linalg::identity(n).scale(1.0 / n as f64),
        }
    }

    /// Trace with value `weights[j]` on minimal projections of block `j` of
    /// an algebra whose minimal central projections are `central` (rank
    /// `n_j * mult_j` in the ambient space).
    pub fn from_central_weights(
        central: &[CMat],
        block_sizes: &[usize],
        multiplicities: &[usize],
        weights: &[f64],
    ) -> Result<Self> {
        if let Some(w) = weights.iter().find(|&&w| !(w > 0.0)) {
            return Err(Error::TraceNotFaithful(*w));
        }
        let total: f64 = block_sizes
            .iter()
            .zip(weights)
            .map(|(&n, &t)| n as f64 * t)
            .sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::TraceNotNormalized(total));
        }
        let n = central[0].nrows();
        let mut density = CMat::zeros(n, n);
        for ((p, &t), &m) in central.iter().zip(weights).zip(multiplicities) {
            density += p.scale(t / m as f64);
        }
        Ok(TraceFunctional {
            weights: weights.to_vec(),
            block_sizes: block_sizes.to_vec(),
            density,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn density(&self) -> &CMat {
        &self.density
    }

    pub fn size(&self) -> usize {
        self.density.nrows()
    }

    pub fn apply(&self, a: &CMat) -> Complex64 {
        // Tr(h a) without forming the product.
        let h = &self.density;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                acc += h[(i, j)] * a[(j, i)];
            }
        }
        acc
    }

    /// GNS inner product `τ(x* y)`.
    pub fn inner(&self, x: &CMat, y: &CMat) -> Complex64 {
        self.apply(&(x.adjoint() * y))
    }

    /// `τ ⊗ tr_m` on `M_N ⊗ M_m`.
    pub fn tensor_normalized(&self, m: usize) -> Self {
        let weights = self.weights.iter().map(|t| t / m as f64).collect();
        let block_sizes = self.block_sizes.iter().map(|n| n * m).collect();
        let density = linalg::kron(&self.density, &linalg::identity(m).scale(1.0 / m as f64));
        TraceFunctional {
            weights,
            block_sizes,
            density,
        }
    }
}

/// `Σ_j t_j · Tr(block_j(a))`, checking that `a` matches the block layout.
pub fn apply_trace(tau: &TraceFunctional, home: &AmbientAlgebra, a: &CMat) -> Result<Complex64> {
    if tau.size() != home.size() {
        return Err(Error::ShapeMismatch {
            expected: tau.size(),
            got_rows: home.size(),
            got_cols: home.size(),
        });
    }
    home.check_member(a)?;
    Ok(tau.apply(a))
}
