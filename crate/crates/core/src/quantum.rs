//! Bipartition tables and the quantum coarse-graining channel.
//!
//! A [`BipartitionTable`] arranges an orthonormal basis into left-justified
//! columns (grouped into hybrid blocks); the columns are the macro states.
//! The table induces the bipartition operators `S_kl` that map between
//! columns preserving the row index, and with them the coarse-graining
//! channel, its adjoint, its pseudo-inverse and the orthogonal projection
//! onto `span{S_kl}`.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{CgError, Result};
use crate::linalg::{
    cplx, fro_norm, hermitian_defect, is_finite_mat, unitary_defect, C64, CMat, REL_TOL,
};

/// One block of a (possibly hybrid) bipartition table. `columns[k]` lists
/// the basis indices of column `k` from top to bottom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableBlock {
    pub columns: Vec<Vec<usize>>,
}

impl TableBlock {
    pub fn heights(&self) -> Vec<usize> {
        self.columns.iter().map(|c| c.len()).collect()
    }
}

/// A bipartition table over a `dim`-dimensional space.
///
/// `basis`, when present, holds the orthonormal ambient basis as columns;
/// table cells index into it. Without a basis the computational basis is
/// used. Column heights are non-increasing left-to-right inside each block;
/// constructors re-sort violating input (stable) instead of rejecting it.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitionTable {
    dim: usize,
    basis: Option<CMat>,
    blocks: Vec<TableBlock>,
    resorted: bool,
}

impl BipartitionTable {
    pub fn new(dim: usize, basis: Option<CMat>, blocks: Vec<TableBlock>) -> Result<Self> {
        if let Some(b) = &basis {
            if b.nrows() != dim || b.ncols() != dim {
                return Err(CgError::InvalidTable(format!(
                    "basis must be {dim}x{dim}, got {}x{}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            if !is_finite_mat(b) {
                return Err(CgError::NonFinite);
            }
            let defect = unitary_defect(b);
            if defect > 1e-8 {
                return Err(CgError::InvalidTable(format!(
                    "basis columns are not orthonormal (defect {defect:.3e})"
                )));
            }
        }
        let mut seen = vec![false; dim];
        for block in &blocks {
            if block.columns.is_empty() {
                return Err(CgError::InvalidTable("block with no columns".into()));
            }
            for col in &block.columns {
                if col.is_empty() {
                    return Err(CgError::InvalidTable("empty column".into()));
                }
                for &idx in col {
                    if idx >= dim {
                        return Err(CgError::InvalidTable(format!(
                            "basis index {idx} out of range for dim {dim}"
                        )));
                    }
                    if seen[idx] {
                        return Err(CgError::InvalidTable(format!(
                            "basis index {idx} appears more than once"
                        )));
                    }
                    seen[idx] = true;
                }
            }
        }
        if let Some(idx) = seen.iter().position(|&s| !s) {
            return Err(CgError::InvalidTable(format!(
                "basis index {idx} does not appear in any column"
            )));
        }
        let mut resorted = false;
        let mut sorted_blocks = blocks;
        for block in &mut sorted_blocks {
            let ordered = block
                .columns
                .windows(2)
                .all(|w| w[0].len() >= w[1].len());
            if !ordered {
                block.columns.sort_by_key(|c| std::cmp::Reverse(c.len()));
                resorted = true;
            }
        }
        Ok(BipartitionTable {
            dim,
            basis,
            blocks: sorted_blocks,
            resorted,
        })
    }

    /// Single-block table in the computational basis.
    pub fn from_columns(dim: usize, columns: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(dim, None, vec![TableBlock { columns }])
    }

    /// Trivial table: one row containing every index (a pure change of
    /// basis when a basis is supplied, the identity channel otherwise).
    pub fn trivial(dim: usize, basis: Option<CMat>) -> Result<Self> {
        let columns = (0..dim).map(|i| vec![i]).collect();
        Self::new(dim, basis, vec![TableBlock { columns }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> Option<&CMat> {
        self.basis.as_ref()
    }

    pub fn blocks(&self) -> &[TableBlock] {
        &self.blocks
    }

    /// True if the constructor had to re-sort columns by height.
    pub fn was_resorted(&self) -> bool {
        self.resorted
    }

    /// Number of macro states: total number of columns across blocks.
    pub fn reduced_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.columns.len()).sum()
    }

    /// Flat reduced-space index of column `k` of block `q` (block-major).
    pub fn flat_column(&self, q: usize, k: usize) -> usize {
        self.blocks[..q]
            .iter()
            .map(|b| b.columns.len())
            .sum::<usize>()
            + k
    }

    /// Rotate an ambient operator into the table basis (no-op without one).
    fn to_table_basis(&self, o: &CMat) -> CMat {
        match &self.basis {
            Some(b) => b.adjoint() * o * b,
            None => o.clone(),
        }
    }

    /// Rotate an operator expressed in the table basis back to the ambient
    /// basis.
    fn to_ambient_basis(&self, o: CMat) -> CMat {
        match &self.basis {
            Some(b) => b * o * b.adjoint(),
            None => o,
        }
    }

    fn check_operator_shape(&self, o: &CMat) -> Result<()> {
        if o.nrows() != self.dim || o.ncols() != self.dim {
            return Err(CgError::ShapeMismatch {
                expected: format!("{0}x{0}", self.dim),
                got: format!("{}x{}", o.nrows(), o.ncols()),
            });
        }
        Ok(())
    }

    fn check_reduced_shape(&self, o: &CMat) -> Result<()> {
        let m = self.reduced_dim();
        if o.nrows() != m || o.ncols() != m {
            return Err(CgError::ShapeMismatch {
                expected: format!("{m}x{m}"),
                got: format!("{}x{}", o.nrows(), o.ncols()),
            });
        }
        Ok(())
    }
}

/// The bipartition operators `S_{q,kl}` of a table, in the ambient basis.
#[derive(Debug, Clone)]
pub struct BipartitionOperators {
    pub dim: usize,
    pub reduced_dim: usize,
    pub blocks: Vec<BlockOperators>,
}

#[derive(Debug, Clone)]
pub struct BlockOperators {
    pub ncols: usize,
    ops: Vec<CMat>,
}

impl BlockOperators {
    pub fn op(&self, k: usize, l: usize) -> &CMat {
        &self.ops[k * self.ncols + l]
    }
}

impl BipartitionOperators {
    /// All operators flattened in `(q, k, l)` lexicographic order.
    pub fn labeled(&self) -> Vec<(usize, usize, usize, &CMat)> {
        let mut out = Vec::new();
        for (q, block) in self.blocks.iter().enumerate() {
            for k in 0..block.ncols {
                for l in 0..block.ncols {
                    out.push((q, k, l, block.op(k, l)));
                }
            }
        }
        out
    }

    pub fn flattened(&self) -> Vec<CMat> {
        self.labeled().into_iter().map(|(_, _, _, s)| s.clone()).collect()
    }
}

/// Construct `S_{q,kl} = sum_i |γ_{i,k}><γ_{i,l}|` summed up to the shorter
/// of the two column heights, conjugated into the ambient basis when the
/// table carries one.
pub fn bipartition_operators(t: &BipartitionTable) -> BipartitionOperators {
    let d = t.dim();
    let mut blocks = Vec::with_capacity(t.blocks().len());
    for block in t.blocks() {
        let m = block.columns.len();
        let mut ops = Vec::with_capacity(m * m);
        for k in 0..m {
            for l in 0..m {
                let h = block.columns[k].len().min(block.columns[l].len());
                let mut s = CMat::zeros(d, d);
                for i in 0..h {
                    s[(block.columns[k][i], block.columns[l][i])] = cplx(1.0, 0.0);
                }
                ops.push(t.to_ambient_basis(s));
            }
        }
        blocks.push(BlockOperators { ncols: m, ops });
    }
    BipartitionOperators {
        dim: d,
        reduced_dim: t.reduced_dim(),
        blocks,
    }
}

/// Residuals of a density-matrix validity check.
#[derive(Debug, Clone, Copy)]
pub struct StateDefects {
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

/// Validate `rho` as a density matrix: Hermitian, unit trace, PSD.
/// Small negativity (eigenvalues down to -1e-9) is tolerated since
/// round-trips through exponentials introduce it.
pub fn validate_state(rho: &CMat) -> std::result::Result<(), StateDefects> {
    let herm = hermitian_defect(rho) / fro_norm(rho).max(1.0);
    let tr: C64 = (0..rho.nrows()).map(|i| rho[(i, i)]).sum();
    let trace_defect = (tr - cplx(1.0, 0.0)).norm();
    let symmetrized = (rho + rho.adjoint()) * cplx(0.5, 0.0);
    let eig = SymmetricEigen::new(symmetrized);
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if herm <= REL_TOL && trace_defect <= 1e-9 && min_eig >= -1e-9 {
        Ok(())
    } else {
        Err(StateDefects {
            hermiticity: herm,
            trace: trace_defect,
            min_eigenvalue: min_eig,
        })
    }
}

/// Apply the coarse-graining channel to an arbitrary operator (no state
/// validation): `O_B = sum_{q,k,l} tr(S_{q,kl} O) |β_l><β_k|`.
pub fn qcg_apply_operator(t: &BipartitionTable, o: &CMat) -> Result<CMat> {
    t.check_operator_shape(o)?;
    let work = t.to_table_basis(o);
    let m = t.reduced_dim();
    let mut out = CMat::zeros(m, m);
    for (q, block) in t.blocks().iter().enumerate() {
        for (k, col_k) in block.columns.iter().enumerate() {
            for (l, col_l) in block.columns.iter().enumerate() {
                let h = col_k.len().min(col_l.len());
                // tr(S_kl O) = sum_i <γ_{i,l}| O |γ_{i,k}>
                let val: C64 = (0..h).map(|i| work[(col_l[i], col_k[i])]).sum();
                out[(t.flat_column(q, l), t.flat_column(q, k))] = val;
            }
        }
    }
    Ok(out)
}

/// Coarse-grain a density matrix. Invalid states are rejected with their
/// defect residuals unless `force` is set.
pub fn qcg_apply(t: &BipartitionTable, rho: &CMat, force: bool) -> Result<CMat> {
    t.check_operator_shape(rho)?;
    if let Err(defects) = validate_state(rho) {
        if !force {
            return Err(CgError::InvalidState(format!(
                "hermiticity defect {:.3e}, trace defect {:.3e}, min eigenvalue {:.3e}",
                defects.hermiticity, defects.trace, defects.min_eigenvalue
            )));
        }
    }
    qcg_apply_operator(t, rho)
}

/// Adjoint of the channel with respect to the Hilbert-Schmidt inner
/// product: lifts a reduced observable to the full space,
/// `sum_{q,k,l} S_{q,kl} <β_k| O_B |β_l>`.
pub fn qcg_adjoint(t: &BipartitionTable, o_b: &CMat) -> Result<CMat> {
    t.check_reduced_shape(o_b)?;
    let d = t.dim();
    let mut out = CMat::zeros(d, d);
    for (q, block) in t.blocks().iter().enumerate() {
        for (k, col_k) in block.columns.iter().enumerate() {
            for (l, col_l) in block.columns.iter().enumerate() {
                let c = o_b[(t.flat_column(q, k), t.flat_column(q, l))];
                let h = col_k.len().min(col_l.len());
                for i in 0..h {
                    out[(col_k[i], col_l[i])] += c;
                }
            }
        }
    }
    Ok(t.to_ambient_basis(out))
}

/// Moore-Penrose pseudo-inverse of the channel (its right inverse):
/// `sum_{q,k,l} <β_k| O_B |β_l> / min(h_k, h_l) * S_{q,kl}`.
pub fn qcg_pseudoinverse(t: &BipartitionTable, o_b: &CMat) -> Result<CMat> {
    t.check_reduced_shape(o_b)?;
    let d = t.dim();
    let mut out = CMat::zeros(d, d);
    for (q, block) in t.blocks().iter().enumerate() {
        for (k, col_k) in block.columns.iter().enumerate() {
            for (l, col_l) in block.columns.iter().enumerate() {
                let h = col_k.len().min(col_l.len());
                let c = o_b[(t.flat_column(q, k), t.flat_column(q, l))] / h as f64;
                for i in 0..h {
                    out[(col_k[i], col_l[i])] += c;
                }
            }
        }
    }
    Ok(t.to_ambient_basis(out))
}

/// Orthogonal projection onto `span{S_{q,kl}}`:
/// `P(O) = sum_{q,k,l} tr(S_{q,kl} O) / min(h_k, h_l) * S_{q,lk}`.
pub fn qcg_projection(t: &BipartitionTable, o: &CMat) -> Result<CMat> {
    t.check_operator_shape(o)?;
    let work = t.to_table_basis(o);
    let d = t.dim();
    let mut out = CMat::zeros(d, d);
    for block in t.blocks() {
        for col_k in &block.columns {
            for col_l in &block.columns {
                let h = col_k.len().min(col_l.len());
                let trace: C64 = (0..h).map(|i| work[(col_l[i], col_k[i])]).sum();
                let c = trace / h as f64;
                // S_lk has terms |γ_{i,l}><γ_{i,k}|
                for i in 0..h {
                    out[(col_l[i], col_k[i])] += c;
                }
            }
        }
    }
    Ok(t.to_ambient_basis(out))
}

/// Purely classical coarse-graining: `rho -> diag(tr(Π_k rho))` for a
/// complete family of orthogonal projections.
pub fn classical_cg_density(projections: &[CMat], rho: &CMat) -> Result<CMat> {
    if projections.is_empty() {
        return Err(CgError::InvalidTable("no projections given".into()));
    }
    let d = projections[0].nrows();
    let mut sum = CMat::zeros(d, d);
    for p in projections {
        if p.nrows() != d || p.ncols() != d {
            return Err(CgError::ShapeMismatch {
                expected: format!("{d}x{d}"),
                got: format!("{}x{}", p.nrows(), p.ncols()),
            });
        }
        let idem = fro_norm(&(p * p - p));
        let herm = hermitian_defect(p);
        if idem > 1e-9 * fro_norm(p).max(1.0) || herm > 1e-9 * fro_norm(p).max(1.0) {
            return Err(CgError::InvalidTable(format!(
                "not an orthogonal projection (idempotency defect {idem:.3e}, hermiticity defect {herm:.3e})"
            )));
        }
        sum += p;
    }
    let completeness = fro_norm(&(&sum - CMat::identity(d, d)));
    if completeness > 1e-9 * (d as f64).sqrt() {
        return Err(CgError::InvalidTable(format!(
            "projections do not sum to the identity (defect {completeness:.3e})"
        )));
    }
    if rho.nrows() != d || rho.ncols() != d {
        return Err(CgError::ShapeMismatch {
            expected: format!("{d}x{d}"),
            got: format!("{}x{}", rho.nrows(), rho.ncols()),
        });
    }
    let m = projections.len();
    let mut out = CMat::zeros(m, m);
    for (k, p) in projections.iter().enumerate() {
        let prod = p * rho;
        out[(k, k)] = (0..d).map(|i| prod[(i, i)]).sum();
    }
    Ok(out)
}

/// Kraus operators of the channel: one per table row (per block), mapping
/// the row into the reduced space. Their completeness `sum V^dag V = I` is
/// verified before returning.
pub fn kraus_operators(t: &BipartitionTable) -> Result<Vec<CMat>> {
    let d = t.dim();
    let m = t.reduced_dim();
    let mut out = Vec::new();
    for (q, block) in t.blocks().iter().enumerate() {
        let n_rows = block.columns[0].len();
        for i in 0..n_rows {
            let mut v = CMat::zeros(m, d);
            for (k, col) in block.columns.iter().enumerate() {
                if i < col.len() {
                    v[(t.flat_column(q, k), col[i])] = cplx(1.0, 0.0);
                }
            }
            let v = match t.basis() {
                Some(b) => v * b.adjoint(),
                None => v,
            };
            out.push(v);
        }
    }
    let mut certificate = CMat::zeros(d, d);
    for v in &out {
        certificate += v.adjoint() * v;
    }
    let defect = fro_norm(&(certificate - CMat::identity(d, d)));
    if defect > 1e-9 * (d as f64).sqrt() {
        return Err(CgError::InvalidTable(format!(
            "Kraus completeness defect {defect:.3e}"
        )));
    }
    Ok(out)
}

/// Rotate a rectangular single-block table by 90 degrees, swapping the
/// roles of the two partial subsystems. The transpose of a staircase table
/// would not be left-justified, so non-rectangular input is rejected.
pub fn table_transpose(t: &BipartitionTable) -> Result<BipartitionTable> {
    if t.blocks().len() != 1 {
        return Err(CgError::InvalidTable(
            "transpose is defined for single-block tables only".into(),
        ));
    }
    let block = &t.blocks()[0];
    let h = block.columns[0].len();
    if block.columns.iter().any(|c| c.len() != h) {
        return Err(CgError::InvalidTable(
            "transpose is defined for rectangular tables only".into(),
        ));
    }
    let columns: Vec<Vec<usize>> = (0..h)
        .map(|i| block.columns.iter().map(|c| c[i]).collect())
        .collect();
    BipartitionTable::new(t.dim(), t.basis().cloned(), vec![TableBlock { columns }])
}
