//! Classical coarse-graining of continuous-time Markov processes.
//!
//! A coarse-graining is a [`Partition`] of the state indices. The module
//! builds the aggregation matrix `M`, its pseudo-inverse `M+` and the
//! projection `P = M+ M`, decides compatibility of a rate matrix with a
//! partition (`P Q = P Q P`), constructs the reduced generator `M Q M+`,
//! reports per-block rate uniformity, refines partitions to equitable ones,
//! and coarse-grains by the orbits of a permutation group.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{CgError, Result};
use crate::linalg::{self, matrix_exp, to_complex, RMat, RVec, ABS_TOL, REL_TOL};

/// Partition of `{0, .., n_states-1}` into disjoint nonempty blocks.
///
/// Blocks keep the order they were given in; indices inside a block are
/// stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionData", into = "PartitionData")]
pub struct Partition {
    n_states: usize,
    blocks: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize, Clone)]
struct PartitionData {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<PartitionData> for Partition {
    type Error = CgError;
    fn try_from(d: PartitionData) -> Result<Self> {
        Partition::new(d.n, d.blocks)
    }
}

impl From<Partition> for PartitionData {
    fn from(p: Partition) -> Self {
        PartitionData {
            n: p.n_states,
            blocks: p.blocks,
        }
    }
}

impl Partition {
    pub fn new(n_states: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n_states];
        let mut sorted_blocks = Vec::with_capacity(blocks.len());
        for block in blocks {
            if block.is_empty() {
                return Err(CgError::InvalidPartition("empty block".into()));
            }
            let mut b = block;
            b.sort_unstable();
            for &i in &b {
                if i >= n_states {
                    return Err(CgError::InvalidPartition(format!(
                        "index {i} out of range for n={n_states}"
                    )));
                }
                if seen[i] {
                    return Err(CgError::InvalidPartition(format!(
                        "index {i} appears in more than one block"
                    )));
                }
                seen[i] = true;
            }
            sorted_blocks.push(b);
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(CgError::InvalidPartition(format!(
                "index {i} is not covered by any block"
            )));
        }
        Ok(Partition {
            n_states,
            blocks: sorted_blocks,
        })
    }

    /// One block per state.
    pub fn identity(n_states: usize) -> Self {
        Partition {
            n_states,
            blocks: (0..n_states).map(|i| vec![i]).collect(),
        }
    }

    /// Everything in one block.
    pub fn single_block(n_states: usize) -> Self {
        Partition {
            n_states,
            blocks: vec![(0..n_states).collect()],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Map from state index to block index.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_states];
        for (k, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = k;
            }
        }
        out
    }

    /// True if every block of `self` is contained in a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        if self.n_states != other.n_states {
            return false;
        }
        let coarse = other.block_of();
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&i| coarse[i] == coarse[b[0]]))
    }

    /// Canonical form: blocks ordered by smallest contained index.
    pub fn canonicalized(&self) -> Partition {
        let mut blocks = self.blocks.clone();
        blocks.sort_by_key(|b| b[0]);
        Partition {
            n_states: self.n_states,
            blocks,
        }
    }
}

/// Transition-rate matrix of a CTMP: `Q[i][j]` is the rate of `j -> i`
/// transitions for `i != j`, and each column sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    q: RMat,
}

impl RateMatrix {
    /// Validates shape, finiteness, sign of off-diagonal entries and the
    /// column-sum-zero structure (tolerances scale with the largest entry).
    pub fn new(q: RMat) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(CgError::InvalidRateMatrix(format!(
                "not square: {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if !q.iter().all(|x| x.is_finite()) {
            return Err(CgError::NonFinite);
        }
        let scale = q.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1.0);
        let n = q.nrows();
        for j in 0..n {
            for i in 0..n {
                if i != j && q[(i, j)] < -ABS_TOL * scale {
                    return Err(CgError::InvalidRateMatrix(format!(
                        "negative off-diagonal rate Q[{i}][{j}] = {}",
                        q[(i, j)]
                    )));
                }
            }
            let col_sum: f64 = (0..n).map(|i| q[(i, j)]).sum();
            if col_sum.abs() > REL_TOL * scale {
                return Err(CgError::InvalidRateMatrix(format!(
                    "column {j} sums to {col_sum}, expected 0"
                )));
            }
        }
        Ok(RateMatrix { q })
    }

    /// Skip validation (used when compatibility is force-bypassed).
    pub fn new_unchecked(q: RMat) -> Self {
        RateMatrix { q }
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &RMat {
        &self.q
    }

    pub fn into_matrix(self) -> RMat {
        self.q
    }
}

/// Finite permutation group given by its generators; `generators[g][i]`
/// holds the image of state `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PermRepData", into = "PermRepData")]
pub struct PermRep {
    n_states: usize,
    generators: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize, Clone)]
struct PermRepData {
    n: usize,
    generators: Vec<Vec<usize>>,
}

impl TryFrom<PermRepData> for PermRep {
    type Error = CgError;
    fn try_from(d: PermRepData) -> Result<Self> {
        PermRep::new(d.n, d.generators)
    }
}

impl From<PermRep> for PermRepData {
    fn from(r: PermRep) -> Self {
        PermRepData {
            n: r.n_states,
            generators: r.generators,
        }
    }
}

impl PermRep {
    pub fn new(n_states: usize, generators: Vec<Vec<usize>>) -> Result<Self> {
        for g in &generators {
            if g.len() != n_states {
                return Err(CgError::InvalidPermutation(format!(
                    "generator has length {}, expected {n_states}",
                    g.len()
                )));
            }
            let mut seen = vec![false; n_states];
            for &img in g {
                if img >= n_states || seen[img] {
                    return Err(CgError::InvalidPermutation(
                        "generator is not a bijection".into(),
                    ));
                }
                seen[img] = true;
            }
        }
        Ok(PermRep {
            n_states,
            generators,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    /// Breadth-first closure of the generated group as permutation arrays.
    pub fn closure(&self, cap: usize) -> Result<Vec<Vec<usize>>> {
        let identity: Vec<usize> = (0..self.n_states).collect();
        let mut elements = vec![identity.clone()];
        let mut seen: HashSet<Vec<usize>> = HashSet::from([identity.clone()]);
        let mut frontier = vec![identity];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for e in &frontier {
                for g in &self.generators {
                    // (g ∘ e)(i) = g[e[i]]
                    let prod: Vec<usize> = e.iter().map(|&i| g[i]).collect();
                    if seen.insert(prod.clone()) {
                        if elements.len() >= cap {
                            return Err(CgError::ClosureCapExceeded { cap });
                        }
                        elements.push(prod.clone());
                        next.push(prod);
                    }
                }
            }
            frontier = next;
        }
        Ok(elements)
    }
}

/// Outcome of a compatibility check; the residual is always reported.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Compat {
    pub compatible: bool,
    pub residual: f64,
}

/// Coarse-graining matrix `M`: row `k` has ones at the indices of block `k`.
pub fn cg_matrix(p: &Partition) -> RMat {
    let mut m = RMat::zeros(p.n_blocks(), p.n_states());
    for (k, block) in p.blocks().iter().enumerate() {
        for &i in block {
            m[(k, i)] = 1.0;
        }
    }
    m
}

/// Moore-Penrose pseudo-inverse of [`cg_matrix`]: column `k` has `1/|b_k|`
/// at the indices of block `k`.
pub fn cg_pseudoinverse(p: &Partition) -> RMat {
    let mut m = RMat::zeros(p.n_states(), p.n_blocks());
    for (k, block) in p.blocks().iter().enumerate() {
        let w = 1.0 / block.len() as f64;
        for &i in block {
            m[(i, k)] = w;
        }
    }
    m
}

/// Coarse-graining projection `P = M+ M`: averages over each block.
pub fn cg_projection(p: &Partition) -> RMat {
    let mut m = RMat::zeros(p.n_states(), p.n_states());
    for block in p.blocks() {
        let w = 1.0 / block.len() as f64;
        for &i in block {
            for &j in block {
                m[(i, j)] = w;
            }
        }
    }
    m
}

/// Compatibility of a rate matrix with a partition: residual of
/// `P Q = P Q P` relative to `max(1, ‖Q‖_F)`.
pub fn check_stochastic_compatibility(
    q: &RateMatrix,
    p: &Partition,
    tol: f64,
) -> Result<Compat> {
    if q.n() != p.n_states() {
        return Err(CgError::ShapeMismatch {
            expected: format!("{} states", p.n_states()),
            got: format!("{} states", q.n()),
        });
    }
    let proj = cg_projection(p);
    let pq = &proj * q.matrix();
    let defect = &pq - &pq * &proj;
    let residual = defect.norm() / q.matrix().norm().max(1.0);
    Ok(Compat {
        compatible: residual <= tol,
        residual,
    })
}

/// Reduced generator `M Q M+`. Errors on incompatible input unless `force`
/// is set; the product is a valid rate matrix either way, compatibility
/// gates only its interpretation as the generator of the reduced process.
pub fn reduced_rate_matrix(q: &RateMatrix, p: &Partition, force: bool) -> Result<RateMatrix> {
    let compat = check_stochastic_compatibility(q, p, REL_TOL)?;
    if !compat.compatible && !force {
        return Err(CgError::Incompatible {
            residual: compat.residual,
        });
    }
    let reduced = cg_matrix(p) * q.matrix() * cg_pseudoinverse(p);
    Ok(RateMatrix::new_unchecked(reduced))
}

/// Total transition rates `r(state -> target block)` grouped by the source
/// block, with the min/max spread for each (source, target) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformityEntry {
    pub from_block: usize,
    pub to_block: usize,
    /// One total rate per state of the source block, in stored block order.
    pub rates: Vec<f64>,
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformityReport {
    pub entries: Vec<UniformityEntry>,
    pub max_spread: f64,
}

impl UniformityReport {
    pub fn uniform(&self, tol: f64) -> bool {
        self.max_spread <= tol
    }
}

/// Per-block rate uniformity. The diagonal pairs `k = k'` are included for
/// transparency; their spread is implied by the off-diagonal ones together
/// with the column sums.
pub fn rate_uniformity_report(q: &RateMatrix, p: &Partition) -> Result<UniformityReport> {
    if q.n() != p.n_states() {
        return Err(CgError::ShapeMismatch {
            expected: format!("{} states", p.n_states()),
            got: format!("{} states", q.n()),
        });
    }
    let mut entries = Vec::new();
    let mut max_spread: f64 = 0.0;
    for (k, source) in p.blocks().iter().enumerate() {
        for (kp, target) in p.blocks().iter().enumerate() {
            let rates: Vec<f64> = source
                .iter()
                .map(|&i| target.iter().map(|&j| q.matrix()[(j, i)]).sum())
                .collect();
            let lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let spread = hi - lo;
            max_spread = max_spread.max(spread);
            entries.push(UniformityEntry {
                from_block: k,
                to_block: kp,
                rates,
                spread,
            });
        }
    }
    Ok(UniformityReport {
        entries,
        max_spread,
    })
}

/// Coarsest equitable refinement of `seed`: repeatedly split blocks by the
/// signature of total rates into the current blocks until stable.
///
/// Signatures are compared entrywise with absolute tolerance 1e-9; new
/// blocks are ordered by their smallest contained index, so the output is
/// deterministic. Terminates in at most `n` rounds (worst case the identity
/// partition).
pub fn coarsest_equitable_refinement(q: &RateMatrix, seed: &Partition) -> Result<Partition> {
    if q.n() != seed.n_states() {
        return Err(CgError::ShapeMismatch {
            expected: format!("{} states", seed.n_states()),
            got: format!("{} states", q.n()),
        });
    }
    const SIG_TOL: f64 = 1e-9;
    let n = q.n();
    let mut part = seed.clone();
    for _ in 0..=n {
        // signature[i][k'] = total rate from state i into block k'
        let signature: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                part.blocks()
                    .iter()
                    .map(|target| target.iter().map(|&j| q.matrix()[(j, i)]).sum())
                    .collect()
            })
            .collect();
        let mut new_blocks: Vec<Vec<usize>> = Vec::new();
        for block in part.blocks() {
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for &i in block {
                let found = groups.iter_mut().find(|g| {
                    let rep = g[0];
                    signature[rep]
                        .iter()
                        .zip(&signature[i])
                        .all(|(a, b)| (a - b).abs() <= SIG_TOL)
                });
                match found {
                    Some(g) => g.push(i),
                    None => groups.push(vec![i]),
                }
            }
            // Block indices are stored sorted, so groups are already ordered
            // by smallest contained index.
            new_blocks.extend(groups);
        }
        if new_blocks.len() == part.n_blocks() {
            return Ok(part);
        }
        part = Partition::new(n, new_blocks)?;
    }
    Ok(part)
}

/// Evolve `p(t) = exp(tQ) p0` for each requested time.
pub fn evolve_stochastic(q: &RateMatrix, p0: &RVec, times: &[f64]) -> Result<Vec<RVec>> {
    if p0.len() != q.n() {
        return Err(CgError::ShapeMismatch {
            expected: format!("{} states", q.n()),
            got: format!("{} entries", p0.len()),
        });
    }
    let sum: f64 = p0.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || p0.iter().any(|&x| x < -1e-9) {
        return Err(CgError::InvalidState(format!(
            "not a probability vector (sum {sum})"
        )));
    }
    let qc = to_complex(q.matrix());
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let propagator = matrix_exp(&qc, t)?;
        let p = linalg::real_part(&propagator) * p0;
        out.push(p);
    }
    Ok(out)
}

/// Partition of the state-space into orbits of the generated group,
/// computed by union-find over the generator action (the closure is never
/// materialized).
pub fn orbit_partition(rep: &PermRep) -> Partition {
    let n = rep.n_states();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for g in rep.generators() {
        for (i, &image) in g.iter().enumerate() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, image));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut blocks_by_root: Vec<Vec<usize>> = Vec::new();
    let mut root_index = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_index[r] == usize::MAX {
            root_index[r] = blocks_by_root.len();
            blocks_by_root.push(Vec::new());
        }
        blocks_by_root[root_index[r]].push(i);
    }
    Partition::new(n, blocks_by_root).expect("orbits form a valid partition")
}

/// The symmetrizer `|G|^{-1} sum_g D(g)`, summed over the full closure
/// (capped). Equals [`cg_projection`] of the orbit partition.
pub fn symmetrizer(rep: &PermRep, cap: usize) -> Result<RMat> {
    let closure = rep.closure(cap)?;
    let n = rep.n_states();
    let mut acc = RMat::zeros(n, n);
    for g in &closure {
        for i in 0..n {
            acc[(g[i], i)] += 1.0;
        }
    }
    Ok(acc / closure.len() as f64)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GroupCompat {
    pub compatible: bool,
    pub residual: f64,
    pub symmetric_shortcut_used: bool,
}

/// Group-compatibility test: for symmetric `Q` checks
/// `sum_g [D(g),Q] = 0`; otherwise checks `P sum_g [D(g),Q] = 0`. Agrees
/// with [`check_stochastic_compatibility`] over the orbit partition.
pub fn check_group_compatibility(
    q: &RateMatrix,
    rep: &PermRep,
    tol: f64,
    cap: usize,
) -> Result<GroupCompat> {
    if q.n() != rep.n_states() {
        return Err(CgError::ShapeMismatch {
            expected: format!("{} states", rep.n_states()),
            got: format!("{} states", q.n()),
        });
    }
    let n = q.n();
    let closure = rep.closure(cap)?;
    let qm = q.matrix();
    let scale = qm.norm().max(1.0);
    let symmetric = (qm - qm.transpose()).norm() <= tol * scale;

    // C = sum_g [D(g), Q], assembled by index remapping: D(g) Q permutes
    // rows by g^{-1}, Q D(g) permutes columns by g.
    let mut c = RMat::zeros(n, n);
    for g in &closure {
        let mut g_inv = vec![0usize; n];
        for (i, &gi) in g.iter().enumerate() {
            g_inv[gi] = i;
        }
        for (j, &gj) in g.iter().enumerate() {
            for (i, &gi_inv) in g_inv.iter().enumerate() {
                c[(i, j)] += qm[(gi_inv, j)] - qm[(i, gj)];
            }
        }
    }

    let residual = if symmetric {
        c.norm() / (closure.len() as f64 * scale)
    } else {
        // Apply the symmetrizer P by averaging rows over orbits.
        let orbits = orbit_partition(rep);
        let mut pc = RMat::zeros(n, n);
        for block in orbits.blocks() {
            let w = 1.0 / block.len() as f64;
            for j in 0..n {
                let avg: f64 = block.iter().map(|&i| c[(i, j)]).sum::<f64>() * w;
                for &i in block {
                    pc[(i, j)] = avg;
                }
            }
        }
        pc.norm() / (closure.len() as f64 * scale)
    };
    Ok(GroupCompat {
        compatible: residual <= tol,
        residual,
        symmetric_shortcut_used: symmetric,
    })
}
