//! Quantum compatibility and reduction of dynamics.
//!
//! Generators act on column-major vectorized operators as `d^2 x d^2`
//! matrices. The compatibility condition is `P L = P L P` with `P` the
//! coarse-graining projection as a superoperator; for Hamiltonian
//! generators the equivalent commutator test `[H, S] ∈ span{S_kl}` is
//! implemented independently in operator space, and the two are
//! cross-checked in the test suite. On success the reduced generator
//! `tr_(A) ∘ L ∘ tr_(A)^+` drives the coarse-grained trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{CgError, Result};
use crate::linalg::{
    commutator, cplx, devectorize, fro_norm, hermitian_defect, is_finite_mat, matrix_exp,
    project_to_span, span_orthonormalize, vectorize, CMat, REL_TOL,
};
use crate::quantum::{
    bipartition_operators, qcg_apply_operator, qcg_projection, qcg_pseudoinverse,
    BipartitionTable,
};
pub use crate::stochastic::Compat;

/// A linear map on operators, stored as its matrix on column-major
/// vectorizations.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    mat: CMat,
}

impl Superoperator {
    pub fn new(dim: usize, mat: CMat) -> Result<Self> {
        let d2 = dim * dim;
        if mat.nrows() != d2 || mat.ncols() != d2 {
            return Err(CgError::ShapeMismatch {
                expected: format!("{d2}x{d2}"),
                got: format!("{}x{}", mat.nrows(), mat.ncols()),
            });
        }
        if !is_finite_mat(&mat) {
            return Err(CgError::NonFinite);
        }
        Ok(Superoperator { dim, mat })
    }

    pub fn zero(dim: usize) -> Self {
        Superoperator {
            dim,
            mat: CMat::zeros(dim * dim, dim * dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn apply(&self, o: &CMat) -> CMat {
        devectorize(&(&self.mat * vectorize(o)), self.dim)
    }

    /// `‖L^dag + L‖ / max(1, ‖L‖)`: zero for generators of unitary
    /// dynamics, which are anti-Hermitian under the HS inner product.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        fro_norm(&(self.mat.adjoint() + &self.mat)) / fro_norm(&self.mat).max(1.0)
    }
}

/// Generator of unitary dynamics: the superoperator of `rho -> -i[H, rho]`.
pub fn hamiltonian_generator(h: &CMat) -> Result<Superoperator> {
    let d = h.nrows();
    if h.ncols() != d {
        return Err(CgError::ShapeMismatch {
            expected: "square".into(),
            got: format!("{}x{}", h.nrows(), h.ncols()),
        });
    }
    let defect = hermitian_defect(h);
    if defect > REL_TOL * fro_norm(h).max(1.0) {
        return Err(CgError::NotHermitian { defect });
    }
    let id = CMat::identity(d, d);
    // vec(H rho - rho H) = (I ⊗ H - H^T ⊗ I) vec(rho), column-major.
    let mat = (id.kronecker(h) - h.transpose().kronecker(&id)) * cplx(0.0, -1.0);
    Superoperator::new(d, mat)
}

fn matrix_unit(d: usize, r: usize, c: usize) -> CMat {
    let mut e = CMat::zeros(d, d);
    e[(r, c)] = cplx(1.0, 0.0);
    e
}

/// Assemble the matrix of an operator map by applying it to matrix units.
fn superop_matrix_of<F: Fn(&CMat) -> Result<CMat>>(
    in_dim: usize,
    out_dim: usize,
    f: F,
) -> Result<CMat> {
    let mut mat = CMat::zeros(out_dim * out_dim, in_dim * in_dim);
    for j in 0..in_dim * in_dim {
        let (r, c) = (j % in_dim, j / in_dim);
        let image = f(&matrix_unit(in_dim, r, c))?;
        let v = vectorize(&image);
        mat.column_mut(j).copy_from(&v);
    }
    Ok(mat)
}

/// The coarse-graining projection `P` of a table as a `d^2 x d^2`
/// superoperator.
pub fn projection_superoperator(t: &BipartitionTable) -> Result<Superoperator> {
    let d = t.dim();
    let mat = superop_matrix_of(d, d, |e| qcg_projection(t, e))?;
    Superoperator::new(d, mat)
}

/// The channel `tr_(A)` as an `m^2 x d^2` matrix.
pub fn cg_superoperator_matrix(t: &BipartitionTable) -> Result<CMat> {
    let d = t.dim();
    let m = t.reduced_dim();
    let mut mat = CMat::zeros(m * m, d * d);
    for j in 0..d * d {
        let (r, c) = (j % d, j / d);
        let image = qcg_apply_operator(t, &matrix_unit(d, r, c))?;
        mat.column_mut(j).copy_from(&vectorize(&image));
    }
    Ok(mat)
}

/// The pseudo-inverse `tr_(A)^+` as a `d^2 x m^2` matrix.
pub fn cg_pinv_superoperator_matrix(t: &BipartitionTable) -> Result<CMat> {
    let d = t.dim();
    let m = t.reduced_dim();
    let mut mat = CMat::zeros(d * d, m * m);
    for j in 0..m * m {
        let (r, c) = (j % m, j / m);
        let image = qcg_pseudoinverse(t, &matrix_unit(m, r, c))?;
        mat.column_mut(j).copy_from(&vectorize(&image));
    }
    Ok(mat)
}

/// General compatibility condition `P L = P L P`, valid for arbitrary
/// generators (not only Hamiltonian ones). Residual relative to
/// `max(1, ‖L‖)`.
pub fn check_superop_compatibility(
    l: &Superoperator,
    t: &BipartitionTable,
    tol: f64,
) -> Result<Compat> {
    if l.dim() != t.dim() {
        return Err(CgError::ShapeMismatch {
            expected: format!("dim {}", t.dim()),
            got: format!("dim {}", l.dim()),
        });
    }
    let p = projection_superoperator(t)?;
    let pl = p.matrix() * l.matrix();
    let defect = &pl - &pl * p.matrix();
    let residual = fro_norm(&defect) / fro_norm(l.matrix()).max(1.0);
    Ok(Compat {
        compatible: residual <= tol,
        residual,
    })
}

/// Per-operator entry of the commutator-based compatibility check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorResidual {
    pub block: usize,
    pub col_from: usize,
    pub col_to: usize,
    /// Residual of projecting `[H, S]` onto the span, relative to
    /// `max(1, ‖[H, S]‖)`.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianCompat {
    pub compatible: bool,
    /// Aggregate residual over an orthonormal basis of the span,
    /// normalized so that it matches the `P L = P L P` residual of the
    /// superoperator route for Hamiltonian generators.
    pub residual: f64,
    pub worst_operator_residual: f64,
    pub per_operator: Vec<OperatorResidual>,
}

/// Commutator test for unitary dynamics: `[H, S] ∈ span{S_kl}` for every
/// bipartition operator. Runs entirely in operator space; the
/// superoperator route is never constructed, so the two checks are
/// independent implementations of the same condition.
///
/// This presumes Hamiltonian dynamics (the proof of equivalence with the
/// projection condition uses anti-Hermiticity of the generator); for
/// general superoperators use [`check_superop_compatibility`].
pub fn check_hamiltonian_compatibility(
    h: &CMat,
    t: &BipartitionTable,
    tol: f64,
) -> Result<HamiltonianCompat> {
    let d = t.dim();
    if h.nrows() != d || h.ncols() != d {
        return Err(CgError::ShapeMismatch {
            expected: format!("{d}x{d}"),
            got: format!("{}x{}", h.nrows(), h.ncols()),
        });
    }
    let defect = hermitian_defect(h);
    if defect > REL_TOL * fro_norm(h).max(1.0) {
        return Err(CgError::NotHermitian { defect });
    }
    let ops = bipartition_operators(t);
    let flattened = ops.flattened();
    let span = span_orthonormalize(&flattened, REL_TOL)?;

    let mut per_operator = Vec::new();
    let mut worst: f64 = 0.0;
    for (q, k, l_idx, s) in ops.labeled() {
        let c = commutator(h, s);
        let (_, res) = project_to_span(&c, &span);
        let rel = res / fro_norm(&c).max(1.0);
        worst = worst.max(rel);
        per_operator.push(OperatorResidual {
            block: q,
            col_from: k,
            col_to: l_idx,
            residual: rel,
        });
    }

    // Aggregate over an orthonormal basis of the span. The normalization
    // ‖-i(I⊗H - H^T⊗I)‖_F = sqrt(2 d ‖H‖² - 2 |tr H|²) is computed in
    // closed form so this route never touches superoperator matrices.
    let h_norm2 = fro_norm(h).powi(2);
    let tr: crate::linalg::C64 = (0..d).map(|i| h[(i, i)]).sum();
    let l_norm = (2.0 * d as f64 * h_norm2 - 2.0 * tr.norm_sqr()).max(0.0).sqrt();
    let mut sum_sq = 0.0;
    for b in span.basis() {
        let c = commutator(h, b);
        let (_, res) = project_to_span(&c, &span);
        sum_sq += res * res;
    }
    let residual = sum_sq.sqrt() / l_norm.max(1.0);
    Ok(HamiltonianCompat {
        compatible: residual <= tol,
        residual,
        worst_operator_residual: worst,
        per_operator,
    })
}

/// Reduced generator `tr_(A) ∘ L ∘ tr_(A)^+` on the coarse-grained space.
/// Errors on incompatible input unless `force` is set.
pub fn reduced_generator(
    l: &Superoperator,
    t: &BipartitionTable,
    force: bool,
) -> Result<Superoperator> {
    let compat = check_superop_compatibility(l, t, REL_TOL)?;
    if !compat.compatible && !force {
        return Err(CgError::Incompatible {
            residual: compat.residual,
        });
    }
    let cg = cg_superoperator_matrix(t)?;
    let pinv = cg_pinv_superoperator_matrix(t)?;
    Superoperator::new(t.reduced_dim(), cg * l.matrix() * pinv)
}

/// Evolve `rho(t) = devec(exp(tL) vec(rho0))` for each requested time.
pub fn evolve_quantum(l: &Superoperator, rho0: &CMat, times: &[f64]) -> Result<Vec<CMat>> {
    if rho0.nrows() != l.dim() || rho0.ncols() != l.dim() {
        return Err(CgError::ShapeMismatch {
            expected: format!("{0}x{0}", l.dim()),
            got: format!("{}x{}", rho0.nrows(), rho0.ncols()),
        });
    }
    let v0 = vectorize(rho0);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let propagator = matrix_exp(l.matrix(), t)?;
        out.push(devectorize(&(propagator * &v0), l.dim()));
    }
    Ok(out)
}

/// Largest trajectory defect
/// `‖tr_(A)(e^{tL} rho0) - e^{t L~}(tr_(A) rho0)‖_F` over the requested
/// times. Stays below ~1e-8 exactly when the coarse-graining is
/// compatible; the reduction is forced so that incompatible inputs
/// exhibit their defect instead of erroring.
pub fn verify_reduction_by_trajectory(
    l: &Superoperator,
    t: &BipartitionTable,
    rho0: &CMat,
    times: &[f64],
) -> Result<f64> {
    let reduced = reduced_generator(l, t, true)?;
    let rho_b0 = qcg_apply_operator(t, rho0)?;
    let full = evolve_quantum(l, rho0, times)?;
    let coarse = evolve_quantum(&reduced, &rho_b0, times)?;
    let mut worst: f64 = 0.0;
    for (rho_t, rho_b_t) in full.iter().zip(&coarse) {
        let defect = fro_norm(&(qcg_apply_operator(t, rho_t)? - rho_b_t));
        worst = worst.max(defect);
    }
    Ok(worst)
}
