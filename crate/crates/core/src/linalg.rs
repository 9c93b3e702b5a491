//! Dense complex linear algebra kernel.
//!
//! Everything downstream works with complex matrices; real inputs are
//! embedded with zero imaginary parts. The kernel provides the matrix
//! exponential, the SVD-based pseudo-inverse and nullspace, and the
//! Hilbert-Schmidt geometry of operator subspaces (orthonormalization and
//! orthogonal projection) that the compatibility checks are built on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;

use crate::error::{CgError, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Default relative tolerance (Frobenius, relative to input norm).
pub const REL_TOL: f64 = 1e-9;
/// Default absolute tolerance floor.
pub const ABS_TOL: f64 = 1e-12;
/// Singular values below `SVD_RANK_REL * sigma_max` are treated as zero.
pub const SVD_RANK_REL: f64 = 1e-10;

pub fn cplx(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Embed a real matrix as a complex one.
pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| cplx(x, 0.0))
}

/// Real part of a complex matrix.
pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn is_finite_mat(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert-Schmidt inner product `tr(A^dag B)`; antilinear in the first slot.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `‖M - M^dag‖_F`, zero for Hermitian matrices.
pub fn hermitian_defect(m: &CMat) -> f64 {
    fro_norm(&(m - m.adjoint()))
}

/// `‖U^dag U - I‖_F`, zero for unitary matrices.
pub fn unitary_defect(u: &CMat) -> f64 {
    let d = u.ncols();
    fro_norm(&(u.adjoint() * u - CMat::identity(d, d)))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Column-major vectorization. `nalgebra` stores column-major, so this is a
/// plain copy of the backing slice.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`] for square matrices of side `d`.
pub fn devectorize(v: &CVec, d: usize) -> CMat {
    assert_eq!(v.len(), d * d, "vector length must be d^2");
    CMat::from_column_slice(d, d, v.as_slice())
}

fn ensure_finite(m: &CMat) -> Result<()> {
    if is_finite_mat(m) {
        Ok(())
    } else {
        Err(CgError::NonFinite)
    }
}

fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

// Padé coefficients for the [m/m] approximants used by expm.
const PADE_3: [f64; 4] = [120., 60., 12., 1.];
const PADE_5: [f64; 6] = [30240., 15120., 3360., 420., 30., 1.];
const PADE_7: [f64; 8] = [17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.];
const PADE_9: [f64; 10] = [
    17643225600.,
    8821612800.,
    2075673600.,
    302702400.,
    30270240.,
    2162160.,
    110880.,
    3960.,
    90.,
    1.,
];
const PADE_13: [f64; 14] = [
    64764752532480000.,
    32382376266240000.,
    7771770303897600.,
    1187353796428800.,
    129060195264000.,
    10559470521600.,
    670442572800.,
    33522128640.,
    1323241920.,
    40840800.,
    960960.,
    16380.,
    182.,
    1.,
];

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

/// Evaluate the [m/m] Padé approximant of `exp` at `a` for m in {3,5,7,9}.
fn pade_low(a: &CMat, b: &[f64]) -> CMat {
    let d = a.nrows();
    let id = CMat::identity(d, d);
    let a2 = a * a;
    let mut even = &id * cplx(b[0], 0.0);
    let mut odd = &id * cplx(b[1], 0.0);
    let mut pow = id;
    for k in (2..b.len()).step_by(2) {
        pow = &pow * &a2;
        even += &pow * cplx(b[k], 0.0);
        if k + 1 < b.len() {
            odd += &pow * cplx(b[k + 1], 0.0);
        }
    }
    let u = a * odd;
    solve_rational(&u, &even)
}

fn pade_13(a: &CMat) -> CMat {
    let d = a.nrows();
    let b = &PADE_13;
    let id = CMat::identity(d, d);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &a6 * (&a6 * cplx(b[13], 0.0) + &a4 * cplx(b[11], 0.0) + &a2 * cplx(b[9], 0.0));
    let u_lo = &a6 * cplx(b[7], 0.0) + &a4 * cplx(b[5], 0.0) + &a2 * cplx(b[3], 0.0)
        + &id * cplx(b[1], 0.0);
    let u = a * (u_hi + u_lo);
    let v_hi = &a6 * (&a6 * cplx(b[12], 0.0) + &a4 * cplx(b[10], 0.0) + &a2 * cplx(b[8], 0.0));
    let v = v_hi
        + &a6 * cplx(b[6], 0.0)
        + &a4 * cplx(b[4], 0.0)
        + &a2 * cplx(b[2], 0.0)
        + &id * cplx(b[0], 0.0);
    solve_rational(&u, &v)
}

/// Solve `(V - U) X = (U + V)` for the rational approximant `X`.
fn solve_rational(u: &CMat, v: &CMat) -> CMat {
    let lhs = v - u;
    let rhs = u + v;
    lhs.lu()
        .solve(&rhs)
        .expect("Padé denominator is singular; input norm outside supported range")
}

/// Matrix exponential `exp(tA)` by scaling-and-squaring with Padé
/// approximants (Higham's degree selection on the 1-norm).
///
/// Accurate to better than 1e-10 relative Frobenius error for `‖tA‖ ≤ 50`.
pub fn matrix_exp(a: &CMat, t: f64) -> Result<CMat> {
    if a.nrows() != a.ncols() {
        return Err(CgError::ShapeMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    if !t.is_finite() {
        return Err(CgError::NonFinite);
    }
    ensure_finite(a)?;
    let m = a * cplx(t, 0.0);
    let norm = one_norm(&m);
    if norm == 0.0 {
        return Ok(CMat::identity(a.nrows(), a.ncols()));
    }
    let result = if norm <= THETA_3 {
        pade_low(&m, &PADE_3)
    } else if norm <= THETA_5 {
        pade_low(&m, &PADE_5)
    } else if norm <= THETA_7 {
        pade_low(&m, &PADE_7)
    } else if norm <= THETA_9 {
        pade_low(&m, &PADE_9)
    } else if norm <= THETA_13 {
        pade_13(&m)
    } else {
        let s = ((norm / THETA_13).log2().ceil()).max(0.0) as u32;
        let scaled = &m * cplx(0.5f64.powi(s as i32), 0.0);
        let mut r = pade_13(&scaled);
        for _ in 0..s {
            r = &r * &r;
        }
        r
    };
    Ok(result)
}

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// `tol * sigma_max` are treated as zero.
pub fn pseudo_inverse(a: &CMat, tol: f64) -> Result<CMat> {
    ensure_finite(a)?;
    let (m, n) = (a.nrows(), a.ncols());
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * sigma_max;
    let r = svd.singular_values.len();
    let mut sigma_inv = CMat::zeros(r, r);
    for i in 0..r {
        let s = svd.singular_values[i];
        if s > cutoff && s > 0.0 {
            sigma_inv[(i, i)] = cplx(1.0 / s, 0.0);
        }
    }
    let pinv = v_t.adjoint() * sigma_inv * u.adjoint();
    debug_assert_eq!(pinv.nrows(), n);
    debug_assert_eq!(pinv.ncols(), m);
    Ok(pinv)
}

/// Numerical rank: number of singular values above `tol * sigma_max`.
pub fn svd_rank(a: &CMat, tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let svd = a.clone().svd(false, false);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .filter(|&&s| s > tol * sigma_max && s > 0.0)
        .count()
}

/// Orthonormal basis of `{x : ‖Ax‖ ≤ tol ‖A‖}` (right nullspace).
pub fn nullspace(a: &CMat, tol: f64) -> Vec<CVec> {
    nullspace_impl(a, |sigma_max| tol * sigma_max)
}

/// Nullspace with an absolute singular-value cutoff. Needed when the
/// input may be numerically zero as a whole, where a relative cutoff
/// keeps nothing.
pub fn nullspace_abs(a: &CMat, cutoff: f64) -> Vec<CVec> {
    nullspace_impl(a, |_| cutoff)
}

fn nullspace_impl<F: Fn(f64) -> f64>(a: &CMat, cutoff_of: F) -> Vec<CVec> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    // Pad with zero rows so the SVD returns a complete set of right
    // singular vectors even for wide inputs.
    let work = if a.nrows() < n {
        let mut padded = CMat::zeros(n, n);
        padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = cutoff_of(sigma_max);
    let mut basis = Vec::new();
    for i in 0..v_t.nrows() {
        if svd.singular_values[i] <= cutoff {
            let row = v_t.row(i);
            basis.push(CVec::from_iterator(n, row.iter().map(|z| z.conj())));
        }
    }
    basis
}

/// An orthonormal (Hilbert-Schmidt) basis of a span of operators on a
/// `d`-dimensional space.
#[derive(Debug, Clone)]
pub struct OperatorSubspace {
    ambient_dim: usize,
    basis: Vec<CMat>,
}

impl OperatorSubspace {
    pub fn from_orthonormal(ambient_dim: usize, basis: Vec<CMat>) -> Self {
        Self { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    /// Worst deviation `|⟨B_i,B_j⟩ - δ_ij|` over all basis pairs.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let g = hs_inner(a, b);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - cplx(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Membership test: residual of projecting `o` onto the span, relative
    /// to `max(1, ‖o‖)`.
    pub fn contains(&self, o: &CMat, tol: f64) -> (bool, f64) {
        let (_, residual) = project_to_span(o, self);
        let rel = residual / fro_norm(o).max(1.0);
        (rel <= tol, rel)
    }
}

/// Gram-Schmidt under the Hilbert-Schmidt inner product. Inputs whose
/// residual after projection falls below `tol * max(1, ‖op‖)` are dropped as
/// linearly dependent, so the output dimension equals the rank of the span.
pub fn span_orthonormalize(ops: &[CMat], tol: f64) -> Result<OperatorSubspace> {
    if ops.is_empty() {
        return Ok(OperatorSubspace::from_orthonormal(0, Vec::new()));
    }
    let shape = ops[0].shape();
    if shape.0 != shape.1 {
        return Err(CgError::ShapeMismatch {
            expected: "square operators".into(),
            got: format!("{}x{}", shape.0, shape.1),
        });
    }
    let mut basis: Vec<CMat> = Vec::new();
    for op in ops {
        if op.shape() != shape {
            return Err(CgError::ShapeMismatch {
                expected: format!("{}x{}", shape.0, shape.1),
                got: format!("{}x{}", op.nrows(), op.ncols()),
            });
        }
        ensure_finite(op)?;
        let mut v = op.clone();
        // Two passes of modified Gram-Schmidt keep the basis orthonormal to
        // machine precision even for nearly dependent inputs.
        for _ in 0..2 {
            for b in &basis {
                let c = hs_inner(b, &v);
                v -= b * c;
            }
        }
        let residual = fro_norm(&v);
        if residual > tol * fro_norm(op).max(1.0) {
            v /= cplx(residual, 0.0);
            basis.push(v);
        }
    }
    Ok(OperatorSubspace::from_orthonormal(shape.0, basis))
}

/// Orthogonal projection of `o` onto the subspace, with the Frobenius norm
/// of what is left over. `o` lies in the span iff the residual is at most
/// `tol * max(1, ‖o‖)`.
pub fn project_to_span(o: &CMat, s: &OperatorSubspace) -> (CMat, f64) {
    assert!(
        s.basis.is_empty() || o.shape() == s.basis[0].shape(),
        "operator shape {:?} does not match subspace ambient shape",
        o.shape()
    );
    let mut proj = CMat::zeros(o.nrows(), o.ncols());
    for b in &s.basis {
        let c = hs_inner(b, o);
        proj += b * c;
    }
    let residual = fro_norm(&(o - &proj));
    (proj, residual)
}

/// Stack the vectorizations of `ops` as rows (used for rank cross-checks).
pub fn stack_vectorized(ops: &[CMat]) -> CMat {
    if ops.is_empty() {
        return CMat::zeros(0, 0);
    }
    let n = ops[0].len();
    let mut m = CMat::zeros(ops.len(), n);
    for (i, op) in ops.iter().enumerate() {
        let v = vectorize(op);
        for j in 0..n {
            m[(i, j)] = v[j];
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Random matrix helpers (tests, benchmarks, randomized block extraction).
// ---------------------------------------------------------------------------

pub fn random_complex_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        cplx(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
    })
}

pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let m = random_complex_matrix(d, d, rng);
    (&m + m.adjoint()) * cplx(0.5, 0.0)
}

/// Haar-ish random unitary from the QR decomposition of a complex Gaussian.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let m = random_complex_matrix(d, d, rng);
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix column phases so the distribution does not depend on the QR sign
    // conventions.
    for j in 0..d {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / cplx(rjj.norm(), 0.0);
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Random density matrix (PSD, unit trace).
pub fn random_density<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let m = random_complex_matrix(d, d, rng);
    let rho = &m * m.adjoint();
    let tr: C64 = (0..d).map(|i| rho[(i, i)]).sum();
    rho / tr
}
