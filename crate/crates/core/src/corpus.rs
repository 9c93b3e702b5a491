//! Constructors and golden data for the worked example systems: the
//! six-vertex random walk, the Glauber-Ising chain, the operationally
//! motivated bipartition tables on few spins, and the continuous-time
//! quantum walk on a binary tree with an optional symmetry-breaking edge.

use nalgebra::DVector;

use crate::error::{CgError, Result};
use crate::linalg::{cplx, CMat, CVec, RMat, RVec, SVD_RANK_REL};
use crate::quantum::{BipartitionTable, TableBlock};
use crate::stochastic::{PermRep, RateMatrix};
use crate::symmetry::UnitaryRep;

/// Parameters of the six-vertex random walk: three columns of sizes
/// 1, 2, 3 with inter-column rates `a` and `c` (perturbed by `delta`,
/// `epsilon`), and intra-column rates `b`, `d`, `e`.
#[derive(Debug, Clone, Copy)]
pub struct Fig2Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// When set, replaces the rate on the edge between the first two
    /// vertices by a different value, which breaks column compatibility.
    pub atilde: Option<f64>,
}

impl Fig2Params {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, delta: f64, epsilon: f64) -> Self {
        Fig2Params {
            a,
            b,
            c,
            d,
            e,
            delta,
            epsilon,
            atilde: None,
        }
    }

    pub fn with_atilde(mut self, atilde: f64) -> Self {
        self.atilde = Some(atilde);
        self
    }
}

/// The 6x6 rate matrix of the three-column random walk (diagonals are the
/// negative column sums).
pub fn build_fig2_walk(p: Fig2Params) -> Result<RateMatrix> {
    for (name, v) in [("a", p.a), ("b", p.b), ("c", p.c), ("d", p.d), ("e", p.e)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(CgError::InvalidRateMatrix(format!(
                "parameter {name} must be positive, got {v}"
            )));
        }
    }
    if p.delta.abs() > p.c / 2.0 || p.epsilon.abs() > p.c / 2.0 {
        return Err(CgError::InvalidRateMatrix(
            "|delta| and |epsilon| must be at most c/2 so all rates are non-negative".into(),
        ));
    }
    let (a, b, c, d, e, dl, ep) = (p.a, p.b, p.c, p.d, p.e, p.delta, p.epsilon);
    let a12 = p.atilde.unwrap_or(a);
    let mut q = RMat::from_row_slice(
        6,
        6,
        &[
            0.0, a12, a, 0.0, 0.0, 0.0, //
            a12, 0.0, b, c - dl, c - ep, c + dl + ep, //
            a, b, 0.0, c + dl, c + ep, c - dl - ep, //
            0.0, c - dl, c + dl, 0.0, d, 0.0, //
            0.0, c - ep, c + ep, d, 0.0, e, //
            0.0, c + dl + ep, c - dl - ep, 0.0, e, 0.0,
        ],
    );
    for j in 0..6 {
        let col_sum: f64 = (0..6).map(|i| q[(i, j)]).sum();
        q[(j, j)] = -col_sum;
    }
    RateMatrix::new(q)
}

/// The column partition `{v1}, {v2,v3}, {v4,v5,v6}` of the walk.
pub fn fig2_column_partition() -> crate::stochastic::Partition {
    crate::stochastic::Partition::new(6, vec![vec![0], vec![1, 2], vec![3, 4, 5]])
        .expect("static partition")
}

/// Ising chain with single-spin-flip thermal dynamics. `gamma` is the
/// temperature parameter `tanh(2J/T)` in `[0, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct IsingConfig {
    pub n: usize,
    pub gamma: f64,
}

impl IsingConfig {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if !(2..=12).contains(&n) {
            return Err(CgError::InvalidRateMatrix(format!(
                "chain length {n} outside the supported range 2..=12"
            )));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(CgError::InvalidRateMatrix(format!(
                "gamma must lie in [0, 1), got {gamma}"
            )));
        }
        Ok(IsingConfig { n, gamma })
    }

    /// Derive `gamma = tanh(2J/T)` from the coupling and temperature.
    pub fn from_temperature(n: usize, j: f64, t: f64) -> Result<Self> {
        if !j.is_finite() || !t.is_finite() || j <= 0.0 || t <= 0.0 {
            return Err(CgError::InvalidRateMatrix(
                "coupling and temperature must be positive".into(),
            ));
        }
        Self::new(n, (2.0 * j / t).tanh())
    }
}

fn spin(state: usize, site: usize) -> i64 {
    if (state >> site) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Rate matrix of the Glauber dynamics on `2^N` spin configurations.
/// Transitions connect configurations at Hamming distance one; the rate is
/// `1 - gamma`, `1` or `1 + gamma` depending on whether the flip raises,
/// keeps or lowers the cyclic nearest-neighbour energy.
pub fn build_glauber_ising(cfg: IsingConfig) -> RateMatrix {
    let n = cfg.n;
    let size = 1usize << n;
    let mut q = RMat::zeros(size, size);
    for s in 0..size {
        for x in 0..n {
            let left = spin(s, (x + n - 1) % n);
            let right = spin(s, (x + 1) % n);
            // Energy change of flipping site x, in units of 2J.
            let delta = spin(s, x) * (left + right);
            let rate = if delta > 0 {
                1.0 - cfg.gamma
            } else if delta == 0 {
                1.0
            } else {
                1.0 + cfg.gamma
            };
            let target = s ^ (1 << x);
            q[(target, s)] = rate;
        }
        let col_sum: f64 = (0..size).map(|i| q[(i, s)]).sum();
        q[(s, s)] = -col_sum;
    }
    RateMatrix::new_unchecked(q)
}

/// Lattice translations and the global spin flip on `2^N` configurations:
/// the group `Z_N x Z_2`, represented by two permutation generators.
pub fn ising_symmetry_group(n: usize) -> Result<PermRep> {
    if !(2..=12).contains(&n) {
        return Err(CgError::InvalidPermutation(format!(
            "chain length {n} outside the supported range 2..=12"
        )));
    }
    let size = 1usize << n;
    let mask = size - 1;
    let translation: Vec<usize> = (0..size)
        .map(|s| ((s << 1) | (s >> (n - 1))) & mask)
        .collect();
    let flip: Vec<usize> = (0..size).map(|s| s ^ mask).collect();
    PermRep::new(size, vec![translation, flip])
}

#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub stationary: RVec,
    pub relaxation_time: f64,
}

/// Stationary distribution (kernel vector normalized to a probability) and
/// the relaxation time `-1/lambda_1` from the slowest nonzero eigenvalue.
pub fn equilibrium_analysis(qr: &RateMatrix) -> Result<EquilibriumReport> {
    let qc = crate::linalg::to_complex(qr.matrix());
    let kernel = crate::linalg::nullspace(&qc, SVD_RANK_REL);
    if kernel.is_empty() {
        return Err(CgError::InvalidRateMatrix(
            "rate matrix has no stationary vector".into(),
        ));
    }
    if kernel.len() > 1 {
        return Err(CgError::InvalidRateMatrix(
            "stationary distribution is not unique (reducible chain)".into(),
        ));
    }
    let mut stationary: RVec = crate::linalg::real_part(&CMat::from_columns(&[kernel[0].clone()]))
        .column(0)
        .into();
    let sum: f64 = stationary.iter().sum();
    if sum.abs() < 1e-12 {
        return Err(CgError::InvalidRateMatrix(
            "stationary vector has zero total mass".into(),
        ));
    }
    stationary /= sum;

    let eigenvalues = qr.matrix().clone().complex_eigenvalues();
    let scale = qr.matrix().norm().max(1.0);
    let lambda1 = eigenvalues
        .iter()
        .map(|z| z.re)
        .filter(|&re| re < -1e-12 * scale)
        .fold(f64::NEG_INFINITY, f64::max);
    if !lambda1.is_finite() {
        return Err(CgError::InvalidRateMatrix(
            "no decaying eigenvalue found".into(),
        ));
    }
    Ok(EquilibriumReport {
        stationary,
        relaxation_time: -1.0 / lambda1,
    })
}

/// Continuous-time quantum walk on a complete binary tree. Vertices are
/// numbered in level order (root first), matching the golden matrices.
#[derive(Debug, Clone)]
pub struct TreeConfig {
    /// Depth of the complete binary tree; the worked instance has depth 2
    /// (7 vertices).
    pub depth: usize,
    /// Extra edges (0-based vertex pairs) added when `broken` is set. The
    /// worked instance adds the leaf edge (3, 4).
    pub extra_edges: Vec<(usize, usize)>,
    pub broken: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            depth: 2,
            extra_edges: vec![(3, 4)],
            broken: false,
        }
    }
}

impl TreeConfig {
    pub fn broken() -> Self {
        TreeConfig {
            broken: true,
            ..Default::default()
        }
    }

    /// Breaking variant with a caller-chosen extra edge.
    pub fn broken_with_edge(edge: (usize, usize)) -> Self {
        TreeConfig {
            extra_edges: vec![edge],
            broken: true,
            depth: 2,
        }
    }

    fn n_vertices(&self) -> usize {
        (1 << (self.depth + 1)) - 1
    }

    fn edges(&self) -> Result<Vec<(usize, usize)>> {
        let n = self.n_vertices();
        let mut edges = Vec::new();
        for i in 0..n {
            for child in [2 * i + 1, 2 * i + 2] {
                if child < n {
                    edges.push((i, child));
                }
            }
        }
        if self.broken {
            for &(u, v) in &self.extra_edges {
                if u >= n || v >= n || u == v {
                    return Err(CgError::ShapeMismatch {
                        expected: format!("edge inside 0..{n}"),
                        got: format!("({u}, {v})"),
                    });
                }
                let (u, v) = (u.min(v), u.max(v));
                if edges.contains(&(u, v)) {
                    return Err(CgError::InvalidTable(format!(
                        "edge ({u}, {v}) already present"
                    )));
                }
                edges.push((u, v));
            }
        }
        Ok(edges)
    }
}

/// Hamiltonian and symmetry group of the tree walk.
///
/// `H` is the graph Laplacian (vertex degree on the diagonal, -1 on
/// edges), which keeps the diagonal entries of the golden blocks. The
/// group is generated by the two permutations that exhaust the tree
/// automorphisms at depth 2: the swap of the two deepest-left leaves and
/// the mirror flip of the whole tree. For other depths one elementary
/// subtree swap per internal vertex is returned.
pub fn build_ctqw_tree(cfg: &TreeConfig) -> Result<(CMat, UnitaryRep)> {
    if cfg.depth == 0 || cfg.depth > 4 {
        return Err(CgError::ShapeMismatch {
            expected: "depth in 1..=4".into(),
            got: format!("{}", cfg.depth),
        });
    }
    let n = cfg.n_vertices();
    let mut h = CMat::zeros(n, n);
    for (u, v) in cfg.edges()? {
        h[(u, v)] = cplx(-1.0, 0.0);
        h[(v, u)] = cplx(-1.0, 0.0);
        h[(u, u)] += cplx(1.0, 0.0);
        h[(v, v)] += cplx(1.0, 0.0);
    }
    let perms = if cfg.depth == 2 {
        let a = vec![0, 1, 2, 4, 3, 5, 6]; // swap v4, v5
        let b = vec![0, 2, 1, 6, 5, 4, 3]; // mirror: v2<->v3, v4<->v7, v5<->v6
        vec![a, b]
    } else {
        // Elementary subtree swaps generate the full automorphism group.
        let mut perms = Vec::new();
        for i in 0..n {
            if 2 * i + 2 < n {
                perms.push(subtree_swap(n, 2 * i + 1, 2 * i + 2));
            }
        }
        perms
    };
    let rep = UnitaryRep::from_permutations(n, &perms)?;
    Ok((h, rep))
}

/// Permutation exchanging the complete subtrees rooted at `left` and
/// `right` (which must be siblings at the same depth).
fn subtree_swap(n: usize, left: usize, right: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut level_l = vec![left];
    let mut level_r = vec![right];
    while level_l[0] < n {
        for (&l, &r) in level_l.iter().zip(&level_r) {
            perm[l] = r;
            perm[r] = l;
        }
        level_l = level_l
            .iter()
            .flat_map(|&v| [2 * v + 1, 2 * v + 2])
            .filter(|&v| v < n)
            .collect();
        level_r = level_r
            .iter()
            .flat_map(|&v| [2 * v + 1, 2 * v + 2])
            .filter(|&v| v < n)
            .collect();
    }
    perm
}

/// The classical random walk on the same tree (unit rates on edges).
pub fn tree_classical_walk(cfg: &TreeConfig) -> Result<RateMatrix> {
    let n = cfg.n_vertices();
    let mut q = RMat::zeros(n, n);
    for (u, v) in cfg.edges()? {
        q[(u, v)] = 1.0;
        q[(v, u)] = 1.0;
        q[(u, u)] -= 1.0;
        q[(v, v)] -= 1.0;
    }
    RateMatrix::new(q)
}

/// The orthonormal basis adapted to the tree symmetry: column states and
/// their signed companions.
pub fn tree_irrep_basis() -> CMat {
    let s2 = 1.0 / 2f64.sqrt();
    let mut b = CMat::zeros(7, 7);
    let assign = |b: &mut CMat, col: usize, entries: &[(usize, f64)]| {
        for &(row, v) in entries {
            b[(row, col)] = cplx(v, 0.0);
        }
    };
    assign(&mut b, 0, &[(0, 1.0)]); // root
    assign(&mut b, 1, &[(1, s2), (2, s2)]); // second column, symmetric
    assign(&mut b, 2, &[(3, 0.5), (4, 0.5), (5, 0.5), (6, 0.5)]); // leaves, symmetric
    assign(&mut b, 3, &[(1, s2), (2, -s2)]);
    assign(&mut b, 4, &[(3, 0.5), (4, 0.5), (5, -0.5), (6, -0.5)]);
    assign(&mut b, 5, &[(3, 0.5), (4, -0.5), (5, 0.5), (6, -0.5)]);
    assign(&mut b, 6, &[(3, -0.5), (4, 0.5), (5, 0.5), (6, -0.5)]);
    b
}

/// The hybrid symmetrization table of the tree walk, built on
/// [`tree_irrep_basis`]: sector shapes 1x3, 1x2 and 2x1.
pub fn tree_symmetrization_table() -> Result<BipartitionTable> {
    BipartitionTable::new(
        7,
        Some(tree_irrep_basis()),
        vec![
            TableBlock {
                columns: vec![vec![0], vec![1], vec![2]],
            },
            TableBlock {
                columns: vec![vec![3], vec![4]],
            },
            TableBlock {
                columns: vec![vec![5, 6]],
            },
        ],
    )
}

/// Golden block matrices of the tree Hamiltonian in the adapted basis:
/// `(H1, H2, H3)` for the plain tree, with `H3` replaced by its broken
/// variant when `broken` is set.
pub fn tree_golden_blocks(broken: bool) -> (CMat, CMat, CMat) {
    let s2 = 2f64.sqrt();
    let h1 = CMat::from_row_slice(
        3,
        3,
        &[
            cplx(2., 0.),
            cplx(-s2, 0.),
            cplx(0., 0.),
            cplx(-s2, 0.),
            cplx(3., 0.),
            cplx(-s2, 0.),
            cplx(0., 0.),
            cplx(-s2, 0.),
            cplx(1., 0.),
        ],
    );
    let h2 = CMat::from_row_slice(
        2,
        2,
        &[cplx(3., 0.), cplx(-s2, 0.), cplx(-s2, 0.), cplx(1., 0.)],
    );
    let h3 = if broken {
        CMat::from_row_slice(
            2,
            2,
            &[cplx(2., 0.), cplx(-1., 0.), cplx(-1., 0.), cplx(2., 0.)],
        )
    } else {
        CMat::identity(2, 2)
    };
    (h1, h2, h3)
}

/// A named bipartition table from the special-case catalogue.
#[derive(Debug, Clone)]
pub struct NamedTable {
    pub name: &'static str,
    pub table: BipartitionTable,
}

/// The five operationally motivated tables on two and three spins:
/// a pure change of basis, a projective measurement, a partial trace,
/// the repetition code, and the rotational reference-frame table.
/// Spin configurations index basis states with the first spin as the
/// most significant bit and up = 0.
pub fn special_case_tables() -> Result<Vec<NamedTable>> {
    let s2 = 1.0 / 2f64.sqrt();
    let mut out = Vec::new();

    // Change of basis: the total-spin basis of two spins in a single row.
    let mut basis = CMat::zeros(4, 4);
    basis[(0, 0)] = cplx(1., 0.); // |1,1> = uu
    basis[(1, 1)] = cplx(s2, 0.); // |1,0> = (ud + du)/sqrt(2)
    basis[(2, 1)] = cplx(s2, 0.);
    basis[(3, 2)] = cplx(1., 0.); // |1,-1> = dd
    basis[(1, 3)] = cplx(s2, 0.); // |0,0> = (ud - du)/sqrt(2)
    basis[(2, 3)] = cplx(-s2, 0.);
    out.push(NamedTable {
        name: "change_of_basis",
        table: BipartitionTable::trivial(4, Some(basis))?,
    });

    // Projective measurement of total spin z on two spins: classical
    // column-diagonal table with sectors {uu}, {ud, du}, {dd}.
    out.push(NamedTable {
        name: "measurement",
        table: BipartitionTable::new(
            4,
            None,
            vec![
                TableBlock { columns: vec![vec![0]] },
                TableBlock { columns: vec![vec![1, 2]] },
                TableBlock { columns: vec![vec![3]] },
            ],
        )?,
    });

    // Partial trace over the first spin: rows constant in the first
    // spin's state, columns constant in the second's.
    out.push(NamedTable {
        name: "partial_trace",
        table: BipartitionTable::from_columns(4, vec![vec![0, 2], vec![1, 3]])?,
    });

    // Repetition code on three spins: columns are the logical states,
    // rows the error syndromes (no error, then single flips of sites
    // 1, 2, 3).
    out.push(NamedTable {
        name: "repetition_code",
        table: BipartitionTable::from_columns(8, vec![vec![0, 4, 2, 1], vec![7, 3, 5, 6]])?,
    });

    // Reference frame of direction on three spins: total spin 3/2 block
    // (single column) plus the doubly degenerate spin-1/2 block.
    let t3 = 1.0 / 3f64.sqrt();
    let t6 = 1.0 / 6f64.sqrt();
    let t23 = (2.0 / 3.0f64).sqrt();
    let mut rf = CMat::zeros(8, 8);
    // |3/2, 3/2> .. |3/2, -3/2>
    rf[(0, 0)] = cplx(1., 0.);
    for &i in &[1usize, 2, 4] {
        rf[(i, 1)] = cplx(t3, 0.);
    }
    for &i in &[6usize, 5, 3] {
        rf[(i, 2)] = cplx(t3, 0.);
    }
    rf[(7, 3)] = cplx(1., 0.);
    // |1/2, +1/2, 0>, |1/2, -1/2, 0> (from the triplet of spins 1,2)
    rf[(1, 4)] = cplx(t23, 0.);
    rf[(2, 4)] = cplx(-t6, 0.);
    rf[(4, 4)] = cplx(-t6, 0.);
    rf[(3, 5)] = cplx(t6, 0.);
    rf[(5, 5)] = cplx(t6, 0.);
    rf[(6, 5)] = cplx(-t23, 0.);
    // |1/2, +1/2, 1>, |1/2, -1/2, 1> (from the singlet of spins 1,2)
    rf[(2, 6)] = cplx(s2, 0.);
    rf[(4, 6)] = cplx(-s2, 0.);
    rf[(3, 7)] = cplx(s2, 0.);
    rf[(5, 7)] = cplx(-s2, 0.);
    out.push(NamedTable {
        name: "reference_frame",
        table: BipartitionTable::new(
            8,
            Some(rf),
            vec![
                TableBlock { columns: vec![vec![0, 1, 2, 3]] },
                TableBlock { columns: vec![vec![4, 5], vec![6, 7]] },
            ],
        )?,
    });
    Ok(out)
}

/// Unitary sampling of the global rotation group on three spins:
/// `exp(-i theta J_alpha)` for alpha in {x, y, z}. The commutant of these
/// three generators is the algebra of rotationally invariant operators.
pub fn rotation_generators(theta: f64) -> Result<UnitaryRep> {
    let sx = CMat::from_row_slice(
        2,
        2,
        &[cplx(0., 0.), cplx(1., 0.), cplx(1., 0.), cplx(0., 0.)],
    );
    let sy = CMat::from_row_slice(
        2,
        2,
        &[cplx(0., 0.), cplx(0., -1.), cplx(0., 1.), cplx(0., 0.)],
    );
    let sz = CMat::from_diagonal(&CVec::from_vec(vec![cplx(1., 0.), cplx(-1., 0.)]));
    let id = CMat::identity(2, 2);
    let mut gens = Vec::new();
    for pauli in [sx, sy, sz] {
        let j = pauli.kronecker(&id).kronecker(&id)
            + id.kronecker(&pauli).kronecker(&id)
            + id.kronecker(&id).kronecker(&pauli);
        let exponent = j * cplx(0.0, -0.5 * theta);
        gens.push(crate::linalg::matrix_exp(&exponent, 1.0)?);
    }
    UnitaryRep::new(8, gens)
}

/// Reduced two-block Glauber generator `[[-3(1-g), 1+g], [3(1-g), -1-g]]`.
pub fn glauber_reduced_golden(gamma: f64) -> RateMatrix {
    RateMatrix::new_unchecked(RMat::from_row_slice(
        2,
        2,
        &[
            -3.0 * (1.0 - gamma),
            1.0 + gamma,
            3.0 * (1.0 - gamma),
            -(1.0 + gamma),
        ],
    ))
}

/// Projector onto the state `|u3>` (uniform superposition over the
/// leaves), the starting state of the worked quantum walk.
pub fn tree_leaf_column_state() -> CMat {
    let basis = tree_irrep_basis();
    let u3: CVec = basis.column(2).into();
    let u3m = CMat::from_columns(&[u3]);
    &u3m * u3m.adjoint()
}

/// Probability-vector form of the leaf column for the classical walk:
/// uniform over the four leaves.
pub fn tree_leaf_block_distribution() -> RVec {
    let mut p = DVector::zeros(7);
    for i in 3..7 {
        p[i] = 0.25;
    }
    p
}
