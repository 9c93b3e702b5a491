//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `--nocapture` to see them). Tolerances are pinned in
//! the assertions.

mod common;

use cgr_core::corpus::{
    self, build_ctqw_tree, build_fig2_walk, build_glauber_ising, equilibrium_analysis,
    fig2_column_partition, ising_symmetry_group, Fig2Params, IsingConfig, TreeConfig,
};
use cgr_core::dynamics::{
    check_hamiltonian_compatibility, check_superop_compatibility, hamiltonian_generator,
    projection_superoperator, verify_reduction_by_trajectory,
};
use cgr_core::linalg::{
    cplx, fro_norm, matrix_exp, random_density, random_hermitian, stack_vectorized, svd_rank,
    to_complex, CMat, REL_TOL, SVD_RANK_REL,
};
use cgr_core::quantum::{bipartition_operators, kraus_operators, qcg_apply, qcg_apply_operator};
use cgr_core::stochastic::{
    cg_matrix, cg_projection, check_group_compatibility, check_stochastic_compatibility,
    coarsest_equitable_refinement, orbit_partition, rate_uniformity_report, reduced_rate_matrix,
    symmetrizer, Partition, RateMatrix,
};
use cgr_core::symmetry::{
    bicommutant, block_structure, check_symmetrization_compatibility, commutant,
    symmetrization_table,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn criterion<F: FnOnce() + std::panic::UnwindSafe>(number: u32, name: &str, body: F) {
    let outcome = std::panic::catch_unwind(body);
    match outcome {
        Ok(()) => println!("criterion {number} ({name}): PASS"),
        Err(payload) => {
            println!("criterion {number} ({name}): FAIL");
            std::panic::resume_unwind(payload);
        }
    }
}

#[test]
fn criterion_1_fig2_reduction() {
    criterion(1, "six-vertex walk reduction", || {
        let q = build_fig2_walk(Fig2Params::new(1., 2., 1., 1., 1., 0.3, -0.2)).unwrap();
        let columns = fig2_column_partition();
        let compat = check_stochastic_compatibility(&q, &columns, REL_TOL).unwrap();
        assert!(compat.compatible && compat.residual <= 1e-12, "residual {}", compat.residual);
        let reduced = reduced_rate_matrix(&q, &columns, false).unwrap();
        let golden = DMatrix::from_row_slice(3, 3, &[-2., 1., 0., 2., -4., 2., 0., 3., -2.]);
        assert!((reduced.matrix() - golden).norm() <= 1e-12);

        // Both negative variants must fail loudly.
        let halves = Partition::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let c = check_stochastic_compatibility(&q, &halves, REL_TOL).unwrap();
        assert!(!c.compatible && c.residual > 1e-2, "residual {}", c.residual);

        let q_tilde =
            build_fig2_walk(Fig2Params::new(1., 2., 1., 1., 1., 0.3, -0.2).with_atilde(1.5))
                .unwrap();
        let c = check_stochastic_compatibility(&q_tilde, &columns, REL_TOL).unwrap();
        assert!(!c.compatible && c.residual > 1e-2, "residual {}", c.residual);
    });
}

#[test]
fn criterion_2_glauber_n3() {
    criterion(2, "Glauber chain N=3", || {
        // gamma = tanh(2J/T) at J/T = 1/2.
        let gamma = 1.0f64.tanh();
        let q = build_glauber_ising(IsingConfig::new(3, gamma).unwrap());
        let orbits = orbit_partition(&ising_symmetry_group(3).unwrap());
        let reduced = reduced_rate_matrix(&q, &orbits, false).unwrap();
        let golden = corpus::glauber_reduced_golden(gamma);
        assert!((reduced.matrix() - golden.matrix()).norm() <= 1e-12);

        // Eigenvalues {0, 2(gamma - 2)}.
        let mut eigs: Vec<f64> = reduced
            .matrix()
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eigs[0] - 2.0 * (gamma - 2.0)).abs() <= 1e-10);
        assert!(eigs[1].abs() <= 1e-10);

        // Equilibrium and relaxation against the closed forms at J/T = 1/2.
        let report = equilibrium_analysis(&reduced).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        let excited_golden = 3.0 / (3.0 + e2);
        let relax_golden = 0.5 * (1.0 + e2) / (3.0 + e2);
        assert!((report.stationary[1] - excited_golden).abs() <= 1e-9);
        assert!((report.relaxation_time - relax_golden).abs() <= 1e-9);
    });
}

#[test]
fn criterion_3_glauber_n4() {
    criterion(3, "Glauber chain N=4", || {
        let gamma = 0.4;
        let q = build_glauber_ising(IsingConfig::new(4, gamma).unwrap());
        let orbits = orbit_partition(&ising_symmetry_group(4).unwrap()).canonicalized();
        // The four orbits: uniform pair, single defects, adjacent pairs,
        // alternating pair.
        let expected = Partition::new(
            16,
            vec![
                vec![0, 15],
                vec![1, 2, 4, 7, 8, 11, 13, 14],
                vec![3, 6, 9, 12],
                vec![5, 10],
            ],
        )
        .unwrap();
        assert_eq!(orbits, expected);

        let energy_levels = Partition::new(
            16,
            vec![
                vec![0, 15],
                vec![1, 2, 3, 4, 6, 7, 8, 9, 11, 12, 13, 14],
                vec![5, 10],
            ],
        )
        .unwrap();
        let c = check_stochastic_compatibility(&q, &energy_levels, REL_TOL).unwrap();
        assert!(!c.compatible && c.residual > 1e-3, "residual {}", c.residual);

        let c = check_stochastic_compatibility(&q, &orbits, REL_TOL).unwrap();
        assert!(c.compatible && c.residual <= 1e-12, "residual {}", c.residual);

        let refined = coarsest_equitable_refinement(&q, &energy_levels)
            .unwrap()
            .canonicalized();
        assert_eq!(refined, expected);
    });
}

#[test]
fn criterion_4_qcg_worked_example() {
    criterion(4, "staircase channel vs elementwise oracle", || {
        let t = cgr_core::quantum::BipartitionTable::from_columns(
            6,
            vec![vec![0, 3, 5], vec![1, 4], vec![2]],
        )
        .unwrap();
        // Independent oracle: embed into the 3x3 virtual product space with
        // the isometry |γ_{i,k}> -> |i>|k>, then take the literal partial
        // trace over the row factor.
        let gamma: [[Option<usize>; 3]; 3] = [
            [Some(0), Some(1), Some(2)],
            [Some(3), Some(4), None],
            [Some(5), None, None],
        ];
        let oracle = |rho: &CMat| -> CMat {
            let mut embedded = CMat::zeros(9, 9);
            let mut v = CMat::zeros(9, 6);
            for (i, row) in gamma.iter().enumerate() {
                for (k, idx) in row.iter().enumerate() {
                    if let Some(g) = idx {
                        v[(i * 3 + k, *g)] = cplx(1.0, 0.0);
                    }
                }
            }
            embedded.copy_from(&(&v * rho * v.adjoint()));
            let mut out = CMat::zeros(3, 3);
            for k in 0..3 {
                for l in 0..3 {
                    for i in 0..3 {
                        out[(k, l)] += embedded[(i * 3 + k, i * 3 + l)];
                    }
                }
            }
            out
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4004);
        for _ in 0..20 {
            let rho = random_density(6, &mut rng);
            let via_channel = qcg_apply(&t, &rho, false).unwrap();
            let via_oracle = oracle(&rho);
            let worst = (&via_channel - &via_oracle)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(worst <= 1e-12, "entrywise defect {worst}");
            // Spot-check the displayed entries.
            assert!((via_channel[(0, 0)] - (rho[(0, 0)] + rho[(3, 3)] + rho[(5, 5)])).norm() <= 1e-13);
            assert!((via_channel[(0, 1)] - (rho[(0, 1)] + rho[(3, 4)])).norm() <= 1e-13);
            assert!((via_channel[(0, 2)] - rho[(0, 2)]).norm() <= 1e-13);
            assert!((via_channel[(1, 1)] - (rho[(1, 1)] + rho[(4, 4)])).norm() <= 1e-13);
            assert!((via_channel[(2, 1)] - rho[(2, 1)]).norm() <= 1e-13);
        }
    });
}

#[test]
fn criterion_5_channel_laws() {
    criterion(5, "channel laws on random tables", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5005);
        for _ in 0..50 {
            let d = rng.random_range(2..=12);
            let t = common::random_table(d, 3, rng.random::<bool>(), &mut rng);
            let ops = bipartition_operators(&t);
            for (q, k, l, s) in ops.labeled() {
                let heights = t.blocks()[q].heights();
                let reduced = qcg_apply_operator(&t, s).unwrap();
                let mut expected = CMat::zeros(t.reduced_dim(), t.reduced_dim());
                expected[(t.flat_column(q, k), t.flat_column(q, l))] =
                    cplx(heights[k].min(heights[l]) as f64, 0.0);
                assert!(fro_norm(&(reduced - expected)) <= 1e-10);
            }
            let p = projection_superoperator(&t).unwrap();
            let m = p.matrix();
            assert!(fro_norm(&(m * m - m)) <= 1e-10);
            assert!(fro_norm(&(m.adjoint() - m)) <= 1e-10);
            let vs = kraus_operators(&t).unwrap();
            let mut cert = CMat::zeros(d, d);
            for v in &vs {
                cert += v.adjoint() * v;
            }
            assert!(fro_norm(&(cert - CMat::identity(d, d))) <= 1e-10);
        }
    });
}

#[test]
fn criterion_6_ctqw_tree() {
    criterion(6, "quantum walk on the binary tree", || {
        // Golden blocks under the adapted basis.
        let (h, rep) = build_ctqw_tree(&TreeConfig::default()).unwrap();
        let basis = corpus::tree_irrep_basis();
        let (h1, h2, h3) = corpus::tree_golden_blocks(false);
        let rotated = basis.adjoint() * &h * &basis;
        let mut expected = CMat::zeros(7, 7);
        expected.view_mut((0, 0), (3, 3)).copy_from(&h1);
        expected.view_mut((3, 3), (2, 2)).copy_from(&h2);
        expected.view_mut((5, 5), (2, 2)).copy_from(&h3);
        assert!(fro_norm(&(rotated - expected)) <= 1e-12);

        // Broken variant: H3 -> [[2,-1],[-1,2]], H1 and H2 unchanged.
        let (hp, _) = build_ctqw_tree(&TreeConfig::broken()).unwrap();
        let (_, _, h3p) = corpus::tree_golden_blocks(true);
        let rotated_p = basis.adjoint() * &hp * &basis;
        let mut expected_p = CMat::zeros(7, 7);
        expected_p.view_mut((0, 0), (3, 3)).copy_from(&h1);
        expected_p.view_mut((3, 3), (2, 2)).copy_from(&h2);
        expected_p.view_mut((5, 5), (2, 2)).copy_from(&h3p);
        assert!(fro_norm(&(rotated_p - expected_p)) <= 1e-12);

        // Symmetrization compatibility: plain and broken pass, the other
        // breaking edge fails.
        let c = check_symmetrization_compatibility(&h, &rep, REL_TOL).unwrap();
        assert!(c.compatible && c.generator_residual <= 1e-10);
        let c = check_symmetrization_compatibility(&hp, &rep, REL_TOL).unwrap();
        assert!(c.compatible, "broken tree residual {}", c.generator_residual);
        let (hpp, _) = build_ctqw_tree(&TreeConfig::broken_with_edge((4, 5))).unwrap();
        let c = check_symmetrization_compatibility(&hpp, &rep, REL_TOL).unwrap();
        assert!(!c.compatible);

        // Full versus reduced trajectories from the leaf column state.
        let table = corpus::tree_symmetrization_table().unwrap();
        let rho0 = corpus::tree_leaf_column_state();
        for hamiltonian in [&h, &hp] {
            let l = hamiltonian_generator(hamiltonian).unwrap();
            let defect =
                verify_reduction_by_trajectory(&l, &table, &rho0, &[0.5, 1.0, 2.0, 5.0]).unwrap();
            assert!(defect <= 1e-8, "defect {defect}");
        }
    });
}

#[test]
fn criterion_7_theorem_equivalences() {
    criterion(7, "theorem equivalences on random instances", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7007);
        // Rate uniformity <=> projection condition.
        for i in 0..100 {
            let n = rng.random_range(2..=8);
            let (q, p) = if i % 2 == 0 {
                common::random_compatible_pair(n, &mut rng)
            } else {
                (
                    common::random_rate_matrix(n, &mut rng),
                    common::random_partition(n, &mut rng),
                )
            };
            let compat = check_stochastic_compatibility(&q, &p, 1e-9).unwrap();
            let report = rate_uniformity_report(&q, &p).unwrap();
            assert_eq!(report.uniform(1e-9), compat.compatible);
        }
        // Commutator condition <=> projection condition for Hamiltonians.
        for i in 0..100 {
            let (t, h) = if i % 3 == 0 {
                common::rectangular_table_with_compatible_h(
                    rng.random_range(2..=3),
                    rng.random_range(2..=3),
                    rng.random::<bool>(),
                    &mut rng,
                )
            } else {
                let d = rng.random_range(2..=8);
                (
                    common::random_table(d, 2, rng.random::<bool>(), &mut rng),
                    random_hermitian(d, &mut rng),
                )
            };
            let a = check_hamiltonian_compatibility(&h, &t, 1e-9).unwrap();
            let b =
                check_superop_compatibility(&hamiltonian_generator(&h).unwrap(), &t, 1e-9).unwrap();
            assert_eq!(a.compatible, b.compatible);
        }
        // Group condition <=> commutator condition over the symmetrization
        // table.
        for i in 0..100 {
            let d = rng.random_range(2..=8);
            let rep = common::random_unitary_rep(d, &mut rng);
            let h = if i % 2 == 0 {
                // Compatible by construction: commutant + bicommutant parts.
                let comm = commutant(&rep);
                let bic = bicommutant(&rep);
                let mut h = CMat::zeros(d, d);
                for basis_op in comm.basis().iter().chain(bic.basis()) {
                    let c = cplx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    h += basis_op * c;
                }
                (&h + h.adjoint()) * cplx(0.5, 0.0)
            } else {
                random_hermitian(d, &mut rng)
            };
            let via_group = check_symmetrization_compatibility(&h, &rep, 1e-9).unwrap();
            let table = symmetrization_table(&block_structure(&rep).unwrap()).unwrap();
            let via_table = check_hamiltonian_compatibility(&h, &table, 1e-9).unwrap();
            assert_eq!(
                via_group.compatible, via_table.compatible,
                "group residual {} table residual {}",
                via_group.generator_residual, via_table.residual
            );
        }
        // Symmetrizer = orbit projection.
        for _ in 0..100 {
            let n = rng.random_range(2..=8);
            let rep = common::random_perm_rep(n, rng.random_range(1..=2), &mut rng);
            if let Ok(s) = symmetrizer(&rep, 1 << 20) {
                let p = cg_projection(&orbit_partition(&rep));
                assert!((s - p).norm() <= 1e-9);
            }
        }
    });
}

#[test]
fn criterion_8_intertwining_oracle() {
    criterion(8, "compatibility verdicts vs semigroup intertwining", || {
        let times = [0.1, 1.0, 10.0];
        let mut rng = ChaCha8Rng::seed_from_u64(8008);

        // Stochastic side: verdict must match the intertwining defect.
        let stochastic_defect = |q: &RateMatrix, p: &Partition| -> f64 {
            let reduced = reduced_rate_matrix(q, p, true).unwrap();
            let m = to_complex(&cg_matrix(p));
            times
                .iter()
                .map(|&t| {
                    let full = matrix_exp(&to_complex(q.matrix()), t).unwrap();
                    let coarse = matrix_exp(&to_complex(reduced.matrix()), t).unwrap();
                    fro_norm(&(&m * &full - &coarse * &m))
                })
                .fold(0.0, f64::max)
        };
        let mut stochastic_cases: Vec<(RateMatrix, Partition)> = vec![
            (
                build_fig2_walk(Fig2Params::new(1., 2., 1., 1., 1., 0.3, -0.2)).unwrap(),
                fig2_column_partition(),
            ),
            (
                build_fig2_walk(Fig2Params::new(1., 2., 1., 1., 1., 0.3, -0.2)).unwrap(),
                Partition::new(6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap(),
            ),
            (
                build_fig2_walk(Fig2Params::new(1., 2., 1., 1., 1., 0.3, -0.2).with_atilde(1.5))
                    .unwrap(),
                fig2_column_partition(),
            ),
            (
                build_glauber_ising(IsingConfig::new(3, 0.5).unwrap()),
                orbit_partition(&ising_symmetry_group(3).unwrap()),
            ),
            (
                build_glauber_ising(IsingConfig::new(4, 0.5).unwrap()),
                Partition::new(
                    16,
                    vec![
                        vec![0, 15],
                        vec![1, 2, 3, 4, 6, 7, 8, 9, 11, 12, 13, 14],
                        vec![5, 10],
                    ],
                )
                .unwrap(),
            ),
        ];
        for i in 0..25 {
            let n = rng.random_range(2..=8);
            if i % 2 == 0 {
                stochastic_cases.push(common::random_compatible_pair(n, &mut rng));
            } else {
                stochastic_cases.push((
                    common::random_rate_matrix(n, &mut rng),
                    common::random_partition(n, &mut rng),
                ));
            }
        }
        for (q, p) in &stochastic_cases {
            let verdict = check_stochastic_compatibility(q, p, 1e-9).unwrap();
            let defect = stochastic_defect(q, p);
            if verdict.compatible {
                assert!(defect <= 1e-8, "compatible but defect {defect}");
            } else {
                assert!(defect > 1e-3, "incompatible but defect only {defect}");
            }
        }

        // Quantum side: map-level intertwining
        // ‖tr_(A) ∘ exp(tL) - exp(tL~) ∘ tr_(A)‖ over the requested times
        // (a single trajectory can accidentally intertwine even for an
        // incompatible scheme, the map norm cannot).
        let quantum_defect = |h: &CMat, t: &cgr_core::BipartitionTable| -> f64 {
            let l = hamiltonian_generator(h).unwrap();
            let reduced = cgr_core::dynamics::reduced_generator(&l, t, true).unwrap();
            let cg = cgr_core::dynamics::cg_superoperator_matrix(t).unwrap();
            times
                .iter()
                .map(|&time| {
                    let full = matrix_exp(l.matrix(), time).unwrap();
                    let coarse = matrix_exp(reduced.matrix(), time).unwrap();
                    fro_norm(&(&cg * full - coarse * &cg))
                })
                .fold(0.0, f64::max)
        };
        let (h_tree, _) = build_ctqw_tree(&TreeConfig::default()).unwrap();
        let (h_broken, _) = build_ctqw_tree(&TreeConfig::broken()).unwrap();
        let (h_bad, _) = build_ctqw_tree(&TreeConfig::broken_with_edge((4, 5))).unwrap();
        let table = corpus::tree_symmetrization_table().unwrap();
        let mut quantum_cases: Vec<(CMat, cgr_core::BipartitionTable)> = vec![
            (h_tree, table.clone()),
            (h_broken, table.clone()),
            (h_bad, table),
        ];
        for i in 0..25 {
            if i % 2 == 0 {
                let (t, h) = common::rectangular_table_with_compatible_h(
                    rng.random_range(2..=3),
                    rng.random_range(2..=3),
                    rng.random::<bool>(),
                    &mut rng,
                );
                quantum_cases.push((h, t));
            } else {
                let d = rng.random_range(2..=6);
                quantum_cases.push((
                    random_hermitian(d, &mut rng),
                    common::random_table(d, 2, false, &mut rng),
                ));
            }
        }
        for (h, t) in &quantum_cases {
            let verdict = check_hamiltonian_compatibility(h, t, 1e-9).unwrap();
            let defect = quantum_defect(h, t);
            if verdict.compatible {
                assert!(defect <= 1e-8, "compatible but defect {defect}");
            } else {
                assert!(defect > 1e-3, "incompatible but defect only {defect}");
            }
        }
    });
}

#[test]
fn criterion_9_commutant_dimensions() {
    criterion(9, "tree commutant structure", || {
        let (_, rep) = build_ctqw_tree(&TreeConfig::default()).unwrap();
        let comm = commutant(&rep);
        assert_eq!(comm.dim(), 14);
        let bic = bicommutant(&rep);
        assert_eq!(bic.dim(), 6);

        // Independent cross-checks: the commutant dimension is the
        // character sum |G|^{-1} sum_g |tr U(g)|^2, and the bicommutant
        // dimension is the rank of the span of the group elements.
        let closure = rep.closure(64).unwrap();
        let char_sum: f64 = closure
            .iter()
            .map(|u| {
                let tr: cgr_core::C64 = (0..7).map(|i| u[(i, i)]).sum();
                tr.norm_sqr()
            })
            .sum::<f64>()
            / closure.len() as f64;
        assert!((char_sum - 14.0).abs() < 1e-9);
        let group_span_rank = svd_rank(&stack_vectorized(closure), SVD_RANK_REL);
        assert_eq!(group_span_rank, 6);

        let bs = block_structure(&rep).unwrap();
        assert_eq!(bs.shape(), vec![(1, 3), (1, 2), (2, 1)]);
    });
}

#[test]
fn glauber_cross_check_group_route() {
    // Supplementary: the group-compatibility route agrees with the
    // partition route on the Ising instances used above.
    for n in [3usize, 4] {
        let q = build_glauber_ising(IsingConfig::new(n, 0.5).unwrap());
        let rep = ising_symmetry_group(n).unwrap();
        let via_group = check_group_compatibility(&q, &rep, REL_TOL, 1 << 20).unwrap();
        let via_partition =
            check_stochastic_compatibility(&q, &orbit_partition(&rep), REL_TOL).unwrap();
        assert_eq!(via_group.compatible, via_partition.compatible);
        assert!(via_group.compatible);
    }
}
