use entcert::hermitian::{eigenvalues, symmetric_eigen};
use entcert::sdp::negativity_of_solution;
use entcert::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hermitian_from(dim: usize, raw: &[(f64, f64)]) -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    let mut k = 0;
    for i in 0..dim {
        for j in i..dim {
            let (re, im) = raw[k];
            k += 1;
            if i == j {
                m[(i, i)] = c(re, 0.0);
            } else {
                m[(i, j)] = c(re, im);
                m[(j, i)] = c(re, -im);
            }
        }
    }
    HermitianMatrix::new(m).unwrap()
}

fn hermitian(dim: usize) -> impl Strategy<Value = HermitianMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * (dim + 1) / 2)
        .prop_map(move |raw| hermitian_from(dim, &raw))
}

fn unit_vector(dim: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim).prop_filter_map("zero vector", |raw| {
        let norm = raw.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| raw.iter().map(|&(a, b)| c(a / norm, b / norm)).collect())
    })
}

fn unitary(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    (hermitian(dim), prop::collection::vec(0.0..std::f64::consts::TAU, dim)).prop_map(move |(h, phases)| {
        let spec = eig_hermitian(&h).unwrap();
        let mut u = ComplexMatrix::zeros(dim);
        for (v, th) in spec.eigenvectors.iter().zip(&phases) {
            let ph = Complex64::from_polar(1.0, *th);
            for i in 0..dim {
                for j in 0..dim {
                    u[(i, j)] += v[i] * v[j].conj() * ph;
                }
            }
        }
        u
    })
}

/// Convex mixture of up to six pure product states.
fn separable_state() -> impl Strategy<Value = HermitianMatrix> {
    prop::collection::vec((unit_vector(2), unit_vector(2), 0.01..1.0f64), 1..6).prop_map(|terms| {
        let total: f64 = terms.iter().map(|t| t.2).sum();
        let mut rho = ComplexMatrix::zeros(4);
        for (a, b, w) in &terms {
            let psi: Vec<Complex64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
            rho = &rho + &ComplexMatrix::outer(&psi).scale(c(w / total, 0.0));
        }
        HermitianMatrix::symmetrized(&rho)
    })
}

fn density_matrix() -> impl Strategy<Value = HermitianMatrix> {
    hermitian(4).prop_map(|h| {
        let sq = h.matrix() * &h.matrix().adjoint();
        let tr = sq.trace().re;
        HermitianMatrix::symmetrized(&sq.scale(c(1.0 / tr, 0.0)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigendecomposition_reconstructs(dim in 1usize..=8, seed in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 36)) {
        let m = hermitian_from(dim, &seed);
        let spec = eig_hermitian(&m).unwrap();
        prop_assert!(spec.reconstruct().max_abs_diff(m.matrix()) <= 1e-10);
        prop_assert!(spec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn real_symmetric_eigenvectors_are_orthonormal(dim in 1usize..=6, raw in prop::collection::vec(-1.0..1.0f64, 36)) {
        let a: Vec<f64> = (0..dim * dim).map(|k| { let (i, j) = (k / dim, k % dim); raw[i.min(j) * 6 + i.max(j)] }).collect();
        let (_, vecs) = symmetric_eigen(&a, dim).unwrap();
        for p in 0..dim {
            for q in 0..dim {
                let dot: f64 = (0..dim).map(|i| vecs[i * dim + p] * vecs[i * dim + q]).sum();
                let want = if p == q { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_transpose_is_trace_preserving_involution(m in hermitian(4)) {
        let pt = partial_transpose_a(&m).unwrap();
        prop_assert_eq!(pt.trace(), m.trace());
        prop_assert!(pt.matrix().max_asymmetry() == 0.0);
        prop_assert_eq!(partial_transpose_a(&pt).unwrap(), m);
    }

    #[test]
    fn separable_states_have_zero_negativity(rho in separable_state()) {
        prop_assert!(negativity(&rho).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn negativity_is_local_unitary_invariant(rho in density_matrix(), ua in unitary(2), ub in unitary(2)) {
        let u = ua.kron(&ub);
        let moved = rho.conjugate_by(&u);
        prop_assert!((negativity(&moved).unwrap() - negativity(&rho).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn trace_norm_is_a_norm(a in hermitian(4), b in hermitian(4), k in -3.0..3.0f64) {
        let na = trace_norm(&a).unwrap();
        prop_assert!((trace_norm(&a.scale(k)).unwrap() - k.abs() * na).abs() <= 1e-9);
        prop_assert!(trace_norm(&a.add(&b)).unwrap() <= na + trace_norm(&b).unwrap() + 1e-9);
    }

    #[test]
    fn relaxed_window_contains_full_window(
        kappa in 0.0..1.0f64,
        eps0 in 0.0..0.45f64,
        eps1 in 0.0..0.45f64,
        f0 in 0.0..1.0f64,
        f1 in 0.0..1.0f64,
    ) {
        let (et0, et1) = (f0 * eps0, f1 * eps1);
        let (bl, bu) = overlap_window_relaxed(eps0, eps1, kappa).unwrap();
        let (cl, cu) = overlap_window_full(kappa, eps0, eps1, et0, et1).unwrap();
        prop_assert!(bl <= cl + 1e-12, "b_l {bl} > c_l {cl}");
        prop_assert!(cu <= bu + 1e-12, "c_u {cu} > b_u {bu}");
        prop_assert!(bl <= bu);
    }

    #[test]
    fn window_widens_with_defect(kappa in 0.0..1.0f64, u in 0.0..0.45f64, other in 0.0..0.45f64, du in 0.0..0.04f64) {
        let (l0, h0) = overlap_window_relaxed(u, other, kappa).unwrap();
        let (l1, h1) = overlap_window_relaxed(u + du, other, kappa).unwrap();
        prop_assert!(h1 >= h0 - 1e-15 && l1 <= l0 + 1e-15);
        let (l0, h0) = overlap_window_relaxed(other, u, kappa).unwrap();
        let (l1, h1) = overlap_window_relaxed(other, u + du, kappa).unwrap();
        prop_assert!(h1 >= h0 - 1e-15 && l1 <= l0 + 1e-15);
    }

    #[test]
    fn floors_decrease_with_defect(cc in 0.0..1.0f64, s in 0.0..0.99f64, u in 0.0..0.45f64, du in 1e-4..0.04f64) {
        let at_zero = offdiag_floors(cc, 0.0, 0.0, s).unwrap();
        prop_assert!(at_zero.r0 == cc && at_zero.r1 == cc);
        let a = offdiag_floors(cc, u, u, s).unwrap();
        let b = offdiag_floors(cc, u + du, u, s).unwrap();
        let d = offdiag_floors(cc, u, u + du, s).unwrap();
        prop_assert!(b.r0 < a.r0 && d.r1 < a.r1);
    }

    #[test]
    fn polygon_covers_disk_exterior(r in 0.01..1.0f64, excess in 0.0..2.0f64, phi in 0.0..std::f64::consts::TAU) {
        let z = Complex64::from_polar(r + excess, phi);
        for sides in [4, 8] {
            let regions = polygon_regions(r, sides).unwrap();
            prop_assert!(regions.iter().any(|g| g.contains(z, 0.0)));
        }
    }

    #[test]
    fn square_region_membership_implies_l1_floor(r in 0.01..1.0f64, re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let z = c(re, im);
        if polygon_regions(r, 4).unwrap().iter().any(|g| g.contains(z, 0.0)) {
            prop_assert!(re.abs() + im.abs() >= r - 1e-12);
        }
    }

    #[test]
    fn constraints_are_affine(cc in 0.05..0.95f64, v in 0.0..0.1f64, x in density_matrix(), y in density_matrix(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let probe = simulate_loss_noise(InputSpec::from_overlap(cc).unwrap(), LossNoiseChannel::new(0.8, v).unwrap());
        let Ok(template) = assemble_constraints(&probe, &estimate(&probe).unwrap()) else { return Ok(()) };
        let mut all = template.constraints.clone();
        for region in polygon_regions(template.polygon_floor(), 8).unwrap() {
            all.extend(region.constraints(&template.basis));
        }
        let combo = x.scale(a).add(&y.scale(b));
        for k in &all {
            let lhs = k.evaluate(&combo);
            let rhs = a * k.evaluate(&x) + b * k.evaluate(&y);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{}: {lhs} vs {rhs}", k.label);
        }
    }

    #[test]
    fn initial_negativity_monotone(c1 in 0.01..0.99f64, dc in 1e-3..0.5f64, t in 0.05..1.0f64, dt in 1e-3..0.5f64) {
        let c2 = (c1 + dc).min(0.999);
        prop_assert!(initial_negativity(c2, t) < initial_negativity(c1, t));
        let t2 = (t + dt).min(1.0);
        if t2 > t {
            prop_assert!(initial_negativity(c1, t2) > initial_negativity(c1, t));
        }
    }

    #[test]
    fn loss_noise_kappa_is_attenuated_overlap(alpha in 0.05..2.0f64, t in 0.01..1.0f64, v in 0.0..0.3f64) {
        let input = InputSpec::new(alpha).unwrap();
        let p = simulate_loss_noise(input, LossNoiseChannel::new(t, v).unwrap());
        let kappa = kappa_from_means(&p.state0, &p.state1);
        prop_assert!((kappa - input.overlap().powf(t)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thermal_estimates_contain_exact_parameters(n_bar in 0.0..0.3f64, alpha in 0.2..1.5f64) {
        let (probe, exact) = simulate_thermal_splitter(InputSpec::new(alpha).unwrap(), ThermalSplitterChannel::new(n_bar).unwrap());
        let est = estimate(&probe).unwrap();
        prop_assert!(est.b_lower - 1e-9 <= exact.overlap_s && exact.overlap_s <= est.b_upper + 1e-9);
        prop_assert!(1.0 - exact.lambda0 <= est.defects.u0 + 1e-12);
        prop_assert!(1.0 - exact.lambda1 <= est.defects.u1 + 1e-12);
    }

    #[test]
    fn thermal_state_satisfies_exact_template(n_bar in 0.0..0.3f64, alpha in 0.2..1.5f64) {
        let input = InputSpec::new(alpha).unwrap();
        let ch = ThermalSplitterChannel::new(n_bar).unwrap();
        let (probe, _) = simulate_thermal_splitter(input, ch);
        let template = assemble_constraints(&probe, &estimate_exact(&probe).unwrap()).unwrap();
        let rho = thermal_projected_state(input, ch).unwrap();
        prop_assert!(template.max_violation(&rho) <= 1e-9, "violation {}", template.max_violation(&rho));
        prop_assert!(eigenvalues(&rho).unwrap()[3] >= -1e-12);
        prop_assert!(rho.trace() <= 1.0 + 1e-12);
    }

    #[test]
    fn gauge_phases_leave_constraints_unchanged(cc in 0.1..0.9f64, v in 0.0..0.08f64, x in density_matrix(), th_b in 0.0..std::f64::consts::TAU, th_a in 0.0..std::f64::consts::TAU) {
        let probe = simulate_loss_noise(InputSpec::from_overlap(cc).unwrap(), LossNoiseChannel::new(1.0, v).unwrap());
        let Ok(template) = assemble_constraints(&probe, &estimate(&probe).unwrap()) else { return Ok(()) };
        // A global phase on the B basis, then the A = |1> phase, then undo both.
        let ub = ComplexMatrix::identity(2).scale(Complex64::from_polar(1.0, th_b));
        let mut ua = ComplexMatrix::identity(2);
        ua[(1, 1)] = Complex64::from_polar(1.0, th_a);
        let forward = x.conjugate_by(&ua.kron(&ub));
        let back = forward.conjugate_by(&ua.adjoint().kron(&ub.adjoint()));
        for k in &template.constraints {
            prop_assert!((k.evaluate(&back) - k.evaluate(&x)).abs() <= 1e-9);
        }
        // A B-basis phase alone does not move any constraint.
        let b_only = x.conjugate_by(&ComplexMatrix::identity(2).kron(&ub));
        for k in &template.constraints {
            prop_assert!((k.evaluate(&b_only) - k.evaluate(&x)).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bound_is_deterministic_and_non_negative(cc in 0.1..0.9f64, t in 0.3..1.0f64, v in 0.0..0.08f64) {
        let probe = simulate_loss_noise(InputSpec::from_overlap(cc).unwrap(), LossNoiseChannel::new(t, v).unwrap());
        let opts = BoundOptions::default();
        let a = min_negativity(&probe, &opts).unwrap();
        let b = min_negativity(&probe, &opts).unwrap();
        prop_assert!(a.bound >= 0.0);
        prop_assert!((a.bound - b.bound).abs() <= 1e-12);
        prop_assert!(a.bound <= initial_negativity(cc, t) + 1e-6);
    }

    #[test]
    fn solution_negativity_matches_objective(cc in 0.2..0.9f64) {
        let probe = simulate_loss_noise(InputSpec::from_overlap(cc).unwrap(), LossNoiseChannel::new(1.0, 0.0).unwrap());
        let template = assemble_constraints(&probe, &estimate(&probe).unwrap()).unwrap();
        for region in polygon_regions(template.polygon_floor(), 4).unwrap() {
            let sol = solve(&compile(&template, &region));
            if sol.status == SolveStatus::Optimal {
                let direct = negativity_of_solution(&sol).unwrap();
                prop_assert!((direct - sol.objective).abs() <= 1e-5, "{direct} vs {}", sol.objective);
            }
        }
    }
}

#[test]
fn classical_mixture_probe_gives_exact_zero() {
    // Identical branches: nothing distinguishes the two inputs.
    let probe = simulate_loss_noise(InputSpec::from_overlap(1.0).unwrap(), LossNoiseChannel::new(1.0, 0.0).unwrap());
    assert_eq!(min_negativity(&probe, &BoundOptions::default()).unwrap().bound, 0.0);
    // Heavy noise: the separable witness is feasible.
    let probe = simulate_loss_noise(InputSpec::from_overlap(0.6).unwrap(), LossNoiseChannel::new(1.0, 0.5).unwrap());
    let r = min_negativity(&probe, &BoundOptions::default()).unwrap();
    assert_eq!(r.bound, 0.0);
}
