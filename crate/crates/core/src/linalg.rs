//! Dense complex helpers shared by every module: vectorization, Hermitian
//! spectral calculus, rank-revealing orthonormalization and subspace
//! geometry. Matrices are column-major `DMatrix<Complex64>`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Relative singular-value threshold for rank and closure decisions.
pub const RANK_TOL: f64 = 1e-8;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Column-major flattening of a square matrix.
pub fn vectorize(a: &CMat) -> CVec {
    CVec::from_column_slice(a.as_slice())
}

pub fn unvectorize(v: &CVec, n: usize) -> CMat {
    CMat::from_column_slice(n, n, v.as_slice())
}

pub fn frobenius(a: &CMat) -> f64 {
    sqrt(a.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(a: &CMat) -> Complex64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

fn to_faer(m: &CMat) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

const JACOBI_SWEEPS: usize = 80;

/// Thin singular value decomposition `m = u · diag(s) · vᴴ`, singular values
/// descending. Columns of `u` belonging to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

impl Svd {
    pub fn top(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Pseudo-inverse with singular values at or below `cut` dropped.
    pub fn pseudo_inverse(&self, cut: f64) -> CMat {
        let mut scaled = self.v.clone();
        for (k, &sv) in self.s.iter().enumerate() {
            let f = if sv > cut { 1.0 / sv } else { 0.0 };
            for r in 0..scaled.nrows() {
                scaled[(r, k)] *= f;
            }
        }
        scaled * self.u.adjoint()
    }
}

/// Backward-error tolerance for a factorization of an `n`-sized problem.
fn factor_tol(n: usize, scale: f64) -> f64 {
    32.0 * n.max(1) as f64 * f64::EPSILON * scale
}

fn orthonormal_defect(q: faer::MatRef<'_, Complex64>) -> f64 {
    let k = q.ncols();
    (q.adjoint() * q - faer::Mat::<Complex64>::identity(k, k)).norm_l2()
}

/// Thin SVD: the library factorization when its backward error and
/// orthogonality check out, one-sided Jacobi otherwise.
pub fn svd(m: &CMat) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return jacobi_path(m);
    }
    let fm = to_faer(m);
    if let Ok(f) = fm.thin_svd() {
        let scale = fm.norm_l2();
        let tol = factor_tol(r.max(c), scale.max(f64::MIN_POSITIVE));
        let k = r.min(c);
        let rec = f.U() * f.S() * f.V().adjoint();
        let ok = (&rec - &fm).norm_l2() <= tol
            && orthonormal_defect(f.U()) <= factor_tol(r, 1.0)
            && orthonormal_defect(f.V()) <= factor_tol(c, 1.0);
        if ok {
            let s: Vec<f64> = (0..k).map(|i| f.S()[i].re).collect();
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
            let (u, v) = (from_faer(f.U()), from_faer(f.V()));
            return Svd {
                u: select_columns(&u, &order),
                s: order.iter().map(|&i| s[i]).collect(),
                v: select_columns(&v, &order),
            };
        }
    }
    jacobi_path(m)
}

/// One-sided Jacobi SVD, after a Householder QR for tall inputs.
fn jacobi_path(m: &CMat) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        let k = r.min(c);
        return Svd {
            u: CMat::zeros(r, k),
            s: Vec::new(),
            v: CMat::zeros(c, k),
        };
    }
    if r < c {
        let t = jacobi_path(&m.adjoint());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    if r == c {
        return jacobi_svd(m.clone());
    }
    let qr = to_faer(m).qr();
    let q = from_faer(qr.compute_thin_Q().as_ref());
    let reduced = from_faer(qr.thin_R());
    let mut out = jacobi_svd(reduced);
    out.u = q * out.u;
    out
}

/// Hestenes iteration on the columns of a square or tall `a`.
fn jacobi_svd(mut a: CMat) -> Svd {
    let (n, k) = a.shape();
    let mut v = CMat::identity(k, k);
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (alpha, beta, gamma) = {
                    let data = a.as_slice();
                    let (cp, cq) = (&data[p * n..(p + 1) * n], &data[q * n..(q + 1) * n]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = Complex64::new(0.0, 0.0);
                    for (x, y) in cp.iter().zip(cq) {
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let (cs, sn) = real_rotation(alpha, beta, g);
                let phase = (gamma / g).conj();
                rotate_columns(a.as_mut_slice(), n, p, q, cs, sn, phase);
                rotate_columns(v.as_mut_slice(), k, p, q, cs, sn, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = CMat::zeros(n, k);
    let mut vv = CMat::zeros(k, k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let sv = norms[src];
        if sv > 0.0 {
            u.set_column(dst, &a.column(src).unscale(sv));
        }
        vv.set_column(dst, &v.column(src));
        s.push(sv);
    }
    Svd { u, s, v: vv }
}

/// `(c, s)` diagonalizing the real symmetric `[[alpha, g], [g, beta]]`.
fn real_rotation(alpha: f64, beta: f64, g: f64) -> (f64, f64) {
    let zeta = (beta - alpha) / (2.0 * g);
    let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
    let t = sign / (zeta.abs() + sqrt(1.0 + zeta * zeta));
    let cs = 1.0 / sqrt(1.0 + t * t);
    (cs, cs * t)
}

/// Columns `p`, `q` of a column-major matrix with `rows` rows:
/// `b_q = phase · a_q`, then `(a_p, b_q) ← (c a_p − s b_q, s a_p + c b_q)`.
fn rotate_columns(data: &mut [Complex64], rows: usize, p: usize, q: usize, cs: f64, sn: f64, phase: Complex64) {
    let (head, tail) = data.split_at_mut(q * rows);
    let cp = &mut head[p * rows..(p + 1) * rows];
    let cq = &mut tail[..rows];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *x;
        let b = *y * phase;
        *x = a * cs - b * sn;
        *y = a * sn + b * cs;
    }
}

/// Eigen-decomposition of the Hermitian part of `h`, eigenvalues ascending:
/// the library solver when its residual and orthogonality check out, cyclic
/// Jacobi otherwise.
pub fn herm_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let hh = hermitian_part(h);
    let fh = to_faer(&hh);
    if let Ok(eig) = fh.self_adjoint_eigen(faer::Side::Lower) {
        let tol = factor_tol(n, fh.norm_l2().max(f64::MIN_POSITIVE));
        let residual = (&fh * eig.U() - eig.U() * eig.S()).norm_l2();
        if residual <= tol && orthonormal_defect(eig.U()) <= factor_tol(n, 1.0) {
            let values: Vec<f64> = (0..n).map(|k| eig.S()[k].re).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
            return (order.iter().map(|&i| values[i]).collect(), select_columns(&from_faer(eig.U()), &order));
        }
    }
    jacobi_eigen(hh)
}

/// Cyclic two-sided Jacobi on a Hermitian matrix.
fn jacobi_eigen(mut a: CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let mut v = CMat::identity(n, n);
    let scale = frobenius(&a);
    let floor = f64::EPSILON * scale / n as f64;
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= floor || g <= f64::EPSILON * sqrt((a[(p, p)].re * a[(q, q)].re).abs()) {
                    continue;
                }
                rotated = true;
                let (cs, sn) = real_rotation(a[(p, p)].re, a[(q, q)].re, g);
                let phase = (apq / g).conj();
                // Columns of A V, then the matching rows.
                rotate_columns(a.as_mut_slice(), n, p, q, cs, sn, phase);
                let pc = phase.conj();
                for j in 0..n {
                    let x = a[(p, j)];
                    let y = a[(q, j)] * pc;
                    a[(p, j)] = x * cs - y * sn;
                    a[(q, j)] = x * sn + y * cs;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                rotate_columns(v.as_mut_slice(), n, p, q, cs, sn, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &v.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(h: &CMat) -> f64 {
    herm_eigen(h).0.first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(h: &CMat) -> f64 {
    herm_eigen(h).0.last().copied().unwrap_or(0.0)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn herm_function(h: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, vectors) = herm_eigen(h);
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let fv = f(v);
        for r in 0..scaled.nrows() {
            scaled[(r, k)] *= fv;
        }
    }
    scaled * vectors.adjoint()
}

/// Support projection and pseudo-inverse square root of a positive
/// semidefinite matrix; eigenvalues at or below `rel_tol * max` are treated
/// as zero.
pub fn psd_support_and_inv_sqrt(h: &CMat, rel_tol: f64) -> (CMat, CMat, usize) {
    let (values, vectors) = herm_eigen(h);
    let top = values.last().copied().unwrap_or(0.0).max(0.0);
    let cut = rel_tol * top;
    let n = h.nrows();
    let mut support = CMat::zeros(n, n);
    let mut inv_sqrt = CMat::zeros(n, n);
    let mut rank = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > cut && v > 0.0 {
            rank += 1;
            let col = vectors.column(k);
            let outer = &col * col.adjoint();
            inv_sqrt += outer.scale(1.0 / sqrt(v));
            support += outer;
        }
    }
    (support, inv_sqrt, rank)
}

pub fn psd_pinv(h: &CMat, rel_tol: f64) -> CMat {
    let (values, vectors) = herm_eigen(h);
    let top = values.last().copied().unwrap_or(0.0).max(0.0);
    let cut = rel_tol * top;
    let n = h.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &v) in values.iter().enumerate() {
        if v > cut && v > 0.0 {
            let col = vectors.column(k);
            out += (&col * col.adjoint()).scale(1.0 / v);
        }
    }
    out
}

pub fn psd_sqrt(h: &CMat) -> CMat {
    herm_function(h, |v| sqrt(v.max(0.0)))
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    svd(a).top()
}

/// Right null space of `m` (columns orthonormal), with singular values at or
/// below `rel_tol * sigma_max` counted as zero.
pub fn null_space(m: &CMat, rel_tol: f64) -> CMat {
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
    let f = svd(&reduced);
    let top = f.top();
    let cut = if top == 0.0 { 0.0 } else { rel_tol * top };
    let keep: Vec<usize> = (0..f.s.len()).filter(|&k| top == 0.0 || f.s[k] <= cut).collect();
    select_columns(&f.v, &keep)
}

/// Orthonormal basis for the column span of `m`.
pub fn column_span(m: &CMat, rel_tol: f64) -> CMat {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let f = svd(m);
    let top = f.top();
    if top == 0.0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let keep: Vec<usize> = (0..f.s.len()).filter(|&k| f.s[k] > rel_tol * top).collect();
    select_columns(&f.u, &keep)
}

pub fn select_columns(m: &CMat, keep: &[usize]) -> CMat {
    let mut out = CMat::zeros(m.nrows(), keep.len());
    for (j, &k) in keep.iter().enumerate() {
        out.set_column(j, &m.column(k));
    }
    out
}

/// Stacks vectors as columns.
pub fn stack_columns(vectors: &[CVec], len: usize) -> CMat {
    let mut m = CMat::zeros(len, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Distance between the subspaces spanned by orthonormal columns `q1`, `q2`:
/// the sine of the largest principal angle, or 1 when dimensions differ.
pub fn subspace_distance(q1: &CMat, q2: &CMat) -> f64 {
    if q1.ncols() != q2.ncols() {
        return 1.0;
    }
    if q1.ncols() == 0 {
        return 0.0;
    }
    // ‖(1 - P1) Q2‖ avoids the cancellation in sqrt(1 - cos^2).
    let residual = q2 - q1 * (q1.adjoint() * q2);
    spectral_norm(&residual).min(1.0)
}

/// Largest distance from a column of `q_inner` to the span of `q_outer`.
pub fn containment_residual(q_inner: &CMat, q_outer: &CMat) -> f64 {
    if q_inner.ncols() == 0 {
        return 0.0;
    }
    let proj = q_outer * (q_outer.adjoint() * q_inner);
    let diff = q_inner - proj;
    (0..diff.ncols())
        .map(|j| diff.column(j).norm())
        .fold(0.0, f64::max)
}

/// Incremental Gram-Schmidt (two passes) over vectors of a fixed length.
/// A candidate is accepted when its residual exceeds `RANK_TOL` times its
/// original norm.
#[derive(Debug, Clone)]
pub struct Orthonormalizer {
    len: usize,
    data: Vec<Complex64>,
    count: usize,
}

impl Orthonormalizer {
    pub fn new(len: usize) -> Self {
        Orthonormalizer {
            len,
            data: Vec::new(),
            count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    fn basis_view(&self) -> nalgebra::DMatrixView<'_, Complex64> {
        nalgebra::DMatrixView::from_slice(&self.data, self.len, self.count)
    }

    /// Residual of `v` after removing its component in the current span.
    pub fn residual(&self, v: &CVec) -> CVec {
        if self.count == 0 {
            return v.clone();
        }
        let q = self.basis_view();
        let mut r = v - &q * q.ad_mul(v);
        let again = q.ad_mul(&r);
        r -= &q * again;
        r
    }

    /// Adds `v` if it is independent; returns the new orthonormal vector.
    pub fn try_add(&mut self, v: &CVec) -> Option<CVec> {
        self.try_add_against(v, v.norm())
    }

    /// Like [`Self::try_add`], with independence measured against
    /// `reference` instead of `‖v‖` (for candidates that may be pure noise).
    pub fn try_add_against(&mut self, v: &CVec, reference: f64) -> Option<CVec> {
        let norm0 = v.norm();
        if norm0 == 0.0 || self.count >= self.len {
            return None;
        }
        let r = self.residual(v);
        let rn = r.norm();
        if rn <= RANK_TOL * reference.max(norm0) {
            return None;
        }
        let q = r.unscale(rn);
        self.data.extend_from_slice(q.as_slice());
        self.count += 1;
        Some(q)
    }

    pub fn into_matrix(self) -> CMat {
        CMat::from_vec(self.len, self.count, self.data)
    }

    pub fn matrix(&self) -> CMat {
        CMat::from_column_slice(self.len, self.count, &self.data)
    }
}

pub fn random_complex_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> CVec {
    loop {
        let v = CVec::from_fn(n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let norm = v.norm();
        if norm > 1e-12 {
            return v.unscale(norm);
        }
    }
}

pub fn random_gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_deficient_matrix() {
        let m = CMat::from_row_slice(2, 3, &[c(1.0), c(2.0), c(3.0), c(2.0), c(4.0), c(6.0)]);
        let ns = null_space(&m, RANK_TOL);
        assert_eq!(ns.ncols(), 2);
        assert!((m * ns).norm() < 1e-12);
    }

    #[test]
    fn subspace_distance_detects_rotation() {
        let e1 = CMat::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
        let t = core::f64::consts::FRAC_PI_6;
        let r = CMat::from_column_slice(2, 1, &[c(libm::cos(t)), c(libm::sin(t))]);
        assert!((subspace_distance(&e1, &r) - libm::sin(t)).abs() < 1e-12);
        assert_eq!(subspace_distance(&e1, &e1), 0.0);
    }

    #[test]
    fn pinv_sqrt_of_projection_is_projection() {
        let p = CMat::from_diagonal(&CVec::from_column_slice(&[c(1.0), c(0.0), c(1.0)]));
        let (support, inv_sqrt, rank) = psd_support_and_inv_sqrt(&p, 1e-12);
        assert_eq!(rank, 2);
        assert!((support - &p).norm() < 1e-12);
        assert!((inv_sqrt - p).norm() < 1e-12);
    }

    fn check_svd(m: &CMat, f: &Svd) {
        let k = m.nrows().min(m.ncols());
        assert_eq!(f.s.len(), k);
        assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
        let mut us = f.u.clone();
        for (j, &sv) in f.s.iter().enumerate() {
            for r in 0..us.nrows() {
                us[(r, j)] *= sv;
            }
        }
        assert!((us * f.v.adjoint() - m).norm() <= 1e-12 * m.norm().max(1.0));
        assert!((f.v.adjoint() * &f.v - CMat::identity(k, k)).norm() < 1e-12);
    }

    /// `x ↦ [x, s]` on `M_4` for the right regular copy of `M_2`: 32-fold
    /// repeated singular values and a 4·4-dimensional kernel.
    fn degenerate_commutator_matrix() -> CMat {
        let n = 4;
        let gens: Vec<CMat> = (0..4)
            .map(|k| {
                let mut e = CMat::zeros(2, 2);
                e[(k / 2, k % 2)] = c(1.0);
                kron(&identity(2), &e)
            })
            .collect();
        let mut m = CMat::zeros(gens.len() * n * n, n * n);
        for j in 0..n * n {
            let mut x = CMat::zeros(n, n);
            x[(j % n, j / n)] = c(1.0);
            for (k, g) in gens.iter().enumerate() {
                for (r, z) in commutator(&x, g).iter().enumerate() {
                    m[(k * n * n + r, j)] = *z;
                }
            }
        }
        m
    }

    #[test]
    fn svd_paths_agree_on_random_shapes() {
        let mut rng = seeded_rng(3);
        for (r, cc) in [(1, 1), (5, 3), (3, 5), (7, 7)] {
            let m = random_complex_matrix(&mut rng, r, cc);
            let a = svd(&m);
            let b = jacobi_path(&m);
            check_svd(&m, &a);
            check_svd(&m, &b);
            for (x, y) in a.s.iter().zip(&b.s) {
                assert!((x - y).abs() < 1e-12 * a.top());
            }
        }
    }

    #[test]
    fn svd_on_degenerate_spectrum() {
        let m = degenerate_commutator_matrix();
        for f in [svd(&m), jacobi_path(&m)] {
            check_svd(&m, &f);
            let zero = f.s.iter().filter(|&&x| x <= 1e-10).count();
            assert_eq!(zero, 4);
        }
        assert_eq!(null_space(&m, RANK_TOL).ncols(), 4);
    }

    #[test]
    fn eigen_paths_agree() {
        let mut rng = seeded_rng(5);
        let a = random_complex_matrix(&mut rng, 6, 6);
        let mut h = hermitian_part(&a);
        // A repeated eigenvalue.
        h = &h * &h;
        let (v1, q1) = herm_eigen(&h);
        let (v2, q2) = jacobi_eigen(h.clone());
        for (x, y) in v1.iter().zip(&v2) {
            assert!((x - y).abs() < 1e-10);
        }
        for (vals, q) in [(&v1, &q1), (&v2, &q2)] {
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let d = CMat::from_diagonal(&CVec::from_iterator(6, vals.iter().map(|&x| c(x))));
            assert!((&h * q - q * d).norm() < 1e-10);
            assert!((q.adjoint() * q - CMat::identity(6, 6)).norm() < 1e-12);
        }
    }
}
