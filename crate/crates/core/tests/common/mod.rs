//! Shared generators for randomized integration tests. Everything is
//! driven by a seeded RNG so failures are reproducible.

#![allow(dead_code)]

use cgr_core::linalg::{cplx, random_hermitian, random_unitary, CMat, RMat};
use cgr_core::quantum::{BipartitionTable, TableBlock};
use cgr_core::stochastic::{Partition, PermRep, RateMatrix};
use cgr_core::symmetry::UnitaryRep;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_partition(n: usize, rng: &mut ChaCha8Rng) -> Partition {
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(rng);
    let n_blocks = rng.random_range(1..=n);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n_blocks];
    // Guarantee non-empty blocks, then scatter the rest.
    for (k, block) in blocks.iter_mut().enumerate() {
        block.push(indices[k]);
    }
    for &i in &indices[n_blocks..] {
        let k = rng.random_range(0..n_blocks);
        blocks[k].push(i);
    }
    Partition::new(n, blocks).expect("generated partition is valid")
}

/// Generic random rate matrix: sparse-ish non-negative off-diagonals.
pub fn random_rate_matrix(n: usize, rng: &mut ChaCha8Rng) -> RateMatrix {
    let mut q = RMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i != j && rng.random::<f64>() < 0.7 {
                q[(i, j)] = rng.random::<f64>();
            }
        }
        let col_sum: f64 = (0..n).map(|i| q[(i, j)]).sum();
        q[(j, j)] = -col_sum;
    }
    RateMatrix::new_unchecked(q)
}

/// A rate matrix built to be compatible with the returned partition: the
/// total rate from any state of a block into each other block is constant
/// by construction, while the per-edge rates inside those budgets are
/// random.
pub fn random_compatible_pair(n: usize, rng: &mut ChaCha8Rng) -> (RateMatrix, Partition) {
    let p = random_partition(n, rng);
    let mut q = RMat::zeros(n, n);
    let blocks = p.blocks().to_vec();
    for (k, source) in blocks.iter().enumerate() {
        for (kp, target) in blocks.iter().enumerate() {
            if k == kp {
                // Intra-block rates are unconstrained.
                for &i in source {
                    for &j in target {
                        if i != j {
                            q[(j, i)] = rng.random::<f64>();
                        }
                    }
                }
            } else {
                let total = 2.0 * rng.random::<f64>();
                for &i in source {
                    let weights: Vec<f64> =
                        (0..target.len()).map(|_| rng.random::<f64>() + 1e-3).collect();
                    let wsum: f64 = weights.iter().sum();
                    for (&j, w) in target.iter().zip(&weights) {
                        q[(j, i)] = total * w / wsum;
                    }
                }
            }
        }
    }
    for j in 0..n {
        let col_sum: f64 = (0..n).map(|i| if i == j { 0.0 } else { q[(i, j)] }).sum();
        q[(j, j)] = -col_sum;
    }
    (RateMatrix::new_unchecked(q), p)
}

pub fn random_perm_rep(n: usize, n_gens: usize, rng: &mut ChaCha8Rng) -> PermRep {
    let mut gens = Vec::with_capacity(n_gens);
    for _ in 0..n_gens {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        gens.push(perm);
    }
    PermRep::new(n, gens).expect("shuffles are bijections")
}

/// Random bipartition table on `d` indices: 1..=max_blocks hybrid blocks,
/// each with non-increasing column heights, optionally with a random
/// orthonormal ambient basis.
pub fn random_table(
    d: usize,
    max_blocks: usize,
    with_basis: bool,
    rng: &mut ChaCha8Rng,
) -> BipartitionTable {
    let mut indices: Vec<usize> = (0..d).collect();
    indices.shuffle(rng);
    let n_blocks = rng.random_range(1..=max_blocks.min(d));
    // Random block sizes summing to d, each at least 1.
    let mut sizes = vec![1usize; n_blocks];
    for _ in 0..(d - n_blocks) {
        let k = rng.random_range(0..n_blocks);
        sizes[k] += 1;
    }
    let mut pos = 0;
    let mut blocks = Vec::with_capacity(n_blocks);
    for size in sizes {
        let pool = &indices[pos..pos + size];
        pos += size;
        let mut columns: Vec<Vec<usize>> = Vec::new();
        let mut used = 0;
        let mut max_height = size;
        while used < size {
            let remaining = size - used;
            let h = rng.random_range(1..=max_height.min(remaining));
            columns.push(pool[used..used + h].to_vec());
            used += h;
            max_height = h;
        }
        blocks.push(TableBlock { columns });
    }
    let basis = if with_basis {
        Some(random_unitary(d, rng))
    } else {
        None
    };
    BipartitionTable::new(d, basis, blocks).expect("generated table is valid")
}

/// Rectangular single-block table of shape `rows x cols` with a virtual
/// tensor-product compatible Hamiltonian `A ⊗ I + I ⊗ B` expressed on it.
pub fn rectangular_table_with_compatible_h(
    rows: usize,
    cols: usize,
    with_basis: bool,
    rng: &mut ChaCha8Rng,
) -> (BipartitionTable, CMat) {
    let d = rows * cols;
    let mut indices: Vec<usize> = (0..d).collect();
    indices.shuffle(rng);
    let columns: Vec<Vec<usize>> = (0..cols)
        .map(|k| (0..rows).map(|i| indices[i * cols + k]).collect())
        .collect();
    let basis = if with_basis {
        Some(random_unitary(d, rng))
    } else {
        None
    };
    let table = BipartitionTable::new(d, basis, vec![TableBlock { columns }]).unwrap();
    let a = random_hermitian(rows, rng);
    let b = random_hermitian(cols, rng);
    // H[γ(i,k), γ(j,l)] = A[i,j] δ_kl + δ_ij B[k,l] in the table basis.
    let mut h = CMat::zeros(d, d);
    for i in 0..rows {
        for j in 0..rows {
            for k in 0..cols {
                for l in 0..cols {
                    let mut v = cplx(0.0, 0.0);
                    if k == l {
                        v += a[(i, j)];
                    }
                    if i == j {
                        v += b[(k, l)];
                    }
                    h[(indices[i * cols + k], indices[j * cols + l])] = v;
                }
            }
        }
    }
    let h = match table.basis() {
        Some(u) => u * h * u.adjoint(),
        None => h,
    };
    (table, h)
}

/// Random small unitary representation: either a permutation group or a
/// conjugated group of diagonal sign patterns.
pub fn random_unitary_rep(d: usize, rng: &mut ChaCha8Rng) -> UnitaryRep {
    if rng.random::<bool>() {
        let perms = random_perm_rep(d, rng.random_range(1..=2), rng);
        UnitaryRep::from_permutations(d, perms.generators()).unwrap()
    } else {
        let u = random_unitary(d, rng);
        let n_gens = rng.random_range(1..=2);
        let mut gens = Vec::new();
        for _ in 0..n_gens {
            let mut diag = CMat::zeros(d, d);
            for i in 0..d {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                diag[(i, i)] = cplx(sign, 0.0);
            }
            gens.push(&u * diag * u.adjoint());
        }
        UnitaryRep::new(d, gens).unwrap()
    }
}

/// All set partitions of `{0..n}` (for brute-force cross-checks; Bell
/// numbers stay small for n <= 6).
pub fn all_partitions(n: usize) -> Vec<Partition> {
    fn recurse(n: usize, i: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Partition>) {
        if i == n {
            out.push(Partition::new(n, blocks.clone()).unwrap());
            return;
        }
        for k in 0..blocks.len() {
            blocks[k].push(i);
            recurse(n, i + 1, blocks, out);
            blocks[k].pop();
        }
        blocks.push(vec![i]);
        recurse(n, i + 1, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    recurse(n, 0, &mut Vec::new(), &mut out);
    out
}
