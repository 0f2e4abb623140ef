use cptkit::alignment_protocol::helstrom_error;
use cptkit::cpt_operators::{build_cpt, cpt_eigensectors, PhaseConvention, Sector};
use cptkit::dfs_codec::{build_code, decode, encode, random_message};
use cptkit::linalg::{self, CMatrix, CVector};
use cptkit::momentum_grid::{cpt_on_testfn, GridLayout, MomentumGrid, TestFunction};
use cptkit::resource_theory::{
    alignment_rate, is_g_invariant, standard_form, tau_measure, twirl, unitary_consistency_check,
    GroupRep,
};
use cptkit::seeding::{domain, stream_rng};
use cptkit::spin_spaces::dicke::{dicke_reduced_state, transposition};
use cptkit::spin_spaces::{dicke_state, Spin};
use cptkit::suites::space;
use num_complex::Complex64;
use proptest::prelude::*;

fn cmatrix(d: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d)
        .prop_map(move |v| CMatrix::from_iterator(d, d, v.into_iter().map(|(a, b)| Complex64::new(a, b))))
}

/// Gaussian-integer entries: products are exact, so index bookkeeping can
/// be compared bit-for-bit.
fn integer_cmatrix(d: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-8i32..=8, -8i32..=8), d * d).prop_map(move |v| {
        CMatrix::from_iterator(d, d, v.into_iter().map(|(a, b)| Complex64::new(a as f64, b as f64)))
    })
}

fn hermitian(d: usize) -> impl Strategy<Value = CMatrix> {
    cmatrix(d).prop_map(|g| (&g + g.adjoint()).scale(0.5))
}

fn density(d: usize) -> impl Strategy<Value = CMatrix> {
    cmatrix(d).prop_map(|g| {
        let rho = &g * g.adjoint();
        let tr = linalg::trace(&rho).re;
        rho.unscale(tr.max(1e-300))
    })
}

fn sorted_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let (mut v, _) = linalg::hermitian_eigen(m).unwrap();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn spin_space(twice: u32, massive: bool) -> cptkit::spin_spaces::SpinSpace {
    space(Spin::from_twice(twice).unwrap(), massive).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_is_associative(a in integer_cmatrix(2), b in integer_cmatrix(3), c in integer_cmatrix(2)) {
        let left = linalg::tensor(&linalg::tensor(&a, &b).unwrap(), &c).unwrap();
        let right = linalg::tensor(&a, &linalg::tensor(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn partial_trace_keep_all_is_identity(a in density(2), b in density(3)) {
        let rho = linalg::tensor(&a, &b).unwrap();
        prop_assert_eq!(linalg::partial_trace(&rho, &[2, 3], &[0, 1]).unwrap(), rho);
    }

    #[test]
    fn evolve_preserves_density_invariants(rho in density(4), h in hermitian(4), t in -5.0f64..5.0) {
        let out = linalg::evolve(&rho, &h, t).unwrap();
        prop_assert!(linalg::hermiticity_residual(&out) <= 1e-12);
        prop_assert!((linalg::trace(&out) - linalg::trace(&rho)).norm() <= 1e-12);
        for (x, y) in sorted_eigenvalues(&out).iter().zip(sorted_eigenvalues(&rho)) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn entropy_is_unitarily_invariant(rho in density(4), h in hermitian(4), t in -3.0f64..3.0) {
        let u = linalg::propagator(&h, t).unwrap();
        let conj = &u * &rho * u.adjoint();
        let a = linalg::von_neumann_entropy(&rho).unwrap();
        let b = linalg::von_neumann_entropy(&conj).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn alignment_rate_symmetric_and_monotone(a in 0.0f64..0.5, b in 0.0f64..0.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if lo < hi {
            prop_assert!(alignment_rate(lo).unwrap().value() < alignment_rate(hi).unwrap().value());
        }
        // 1 − (1 − q) is exact for these q
        let q = 1.0 - hi;
        prop_assert_eq!(alignment_rate(q).unwrap(), alignment_rate(1.0 - q).unwrap());
    }

    #[test]
    fn helstrom_error_bounded_and_non_increasing(c in 0.0f64..=1.0, n in 1u32..30) {
        let e = helstrom_error(c, n).unwrap();
        let next = helstrom_error(c, n + 1).unwrap();
        prop_assert!((0.0..=0.5).contains(&e));
        prop_assert!(next <= e);
    }

    #[test]
    fn tau_is_global_phase_invariant(re in prop::collection::vec(-1.0f64..1.0, 4),
                                     im in prop::collection::vec(-1.0f64..1.0, 4),
                                     phi in 0.0f64..std::f64::consts::TAU) {
        let v = CVector::from_iterator(4, re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)));
        prop_assume!(linalg::vec_norm(&v) > 1e-3);
        let psi = v.unscale(linalg::vec_norm(&v));
        let rotated = psi.map(|z| z * linalg::phase(phi));
        let a = tau_measure(&psi, None).unwrap();
        let b = tau_measure(&rotated, None).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dicke_states_are_symmetric_and_orthonormal(n in 1usize..=6, k in 0usize..=6, a in 0usize..6, b in 0usize..6) {
        let k = k.min(n);
        let (a, b) = (a % n, b % n);
        let psi = dicke_state(n, k).unwrap();
        prop_assert_eq!(transposition(n, a, b) * &psi, psi.clone());
        for k2 in 0..=n {
            let overlap = linalg::inner(&dicke_state(n, k2).unwrap(), &psi).norm();
            let expected = if k2 == k { 1.0 } else { 0.0 };
            prop_assert!((overlap - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn dicke_reduced_state_matches_counting(n in 1usize..=8, k in 0usize..=8) {
        let k = k.min(n);
        let rho = dicke_reduced_state(n, k).unwrap();
        // choose(n-1, k) of the choose(n, k) basis strings have the first site up
        let up = (n - k) as f64 / n as f64;
        prop_assert!((rho[(0, 0)].re - up).abs() <= 1e-12);
        prop_assert!((rho[(1, 1)].re - (1.0 - up)).abs() <= 1e-12);
        prop_assert!(rho[(0, 1)].norm() <= 1e-12);
        let pure = (linalg::purity(&rho) - 1.0).abs() <= 1e-12;
        prop_assert_eq!(pure, k == 0 || k == n);
    }

    #[test]
    fn random_admissible_cpt_is_unitary(twice in 1u32..=6, massive: bool, seed: u64) {
        let sp = spin_space(twice, massive);
        let conv = PhaseConvention::random_admissible(&sp, &mut stream_rng(seed, domain::PHASES, 0));
        prop_assert!(conv.admissibility_residual(&sp.basis) <= 1e-12);
        let cpt = build_cpt(&sp, &conv).unwrap();
        prop_assert!(linalg::unitarity_residual(&cpt) <= 1e-12);
        prop_assert!(cpt_eigensectors(&cpt).is_ok());
    }

    #[test]
    fn zero_phase_sectors_are_balanced(twice in 1u32..=8, massive: bool) {
        let sp = spin_space(twice, massive);
        let cpt = build_cpt(&sp, &PhaseConvention::zero()).unwrap();
        let d = sp.dim();
        prop_assert_eq!(&cpt * &cpt, linalg::identity(d));
        let id = linalg::identity(d);
        let p = (&id + &cpt).scale(0.5);
        let m = (&id - &cpt).scale(0.5);
        prop_assert!(linalg::max_abs_diff(&(&p * &p), &p) <= 1e-12);
        prop_assert!(linalg::max_abs(&(&p * &m)) <= 1e-12);
        prop_assert!(linalg::max_abs_diff(&(&p + &m), &id) <= 1e-12);
        let dec = cpt_eigensectors(&cpt).unwrap();
        prop_assert_eq!(dec.basis(Sector::Plus).len(), d / 2);
        prop_assert_eq!(dec.basis(Sector::Minus).len(), d / 2);
    }

    #[test]
    fn rate_is_cpt_invariant(twice in 1u32..=4, massive: bool, seed: u64) {
        let sp = spin_space(twice, massive);
        let cpt = build_cpt(&sp, &PhaseConvention::zero()).unwrap();
        let psi = random_message(sp.dim(), &mut stream_rng(seed, domain::MESSAGES, 0));
        let a = alignment_rate(standard_form(&psi, &cpt).unwrap().q0).unwrap();
        let b = alignment_rate(standard_form(&(&cpt * &psi), &cpt).unwrap().q0).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn twirl_output_is_invariant(rho in density(8), seed: u64) {
        let sp = spin_space(1, true);
        let conv = PhaseConvention::random_admissible(&sp, &mut stream_rng(seed, domain::PHASES, 0));
        let rep = GroupRep::z2("CPT", build_cpt(&sp, &conv).unwrap()).unwrap();
        let (ok, _) = is_g_invariant(&twirl(&rho, &rep).unwrap(), &rep, 1e-12).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn invariant_states_stay_invariant(rho in density(8), x in hermitian(8), t in 0.0f64..10.0) {
        let sp = spin_space(1, true);
        let cpt = build_cpt(&sp, &PhaseConvention::zero()).unwrap();
        let id = linalg::identity(8);
        let p = (&id + &cpt).scale(0.5);
        let m = (&id - &cpt).scale(0.5);
        let h = &p * &x * &p + &m * &x * &m;
        let rep = GroupRep::z2("CPT", cpt).unwrap();
        let rho0 = twirl(&rho, &rep).unwrap();
        let report = unitary_consistency_check(&rho0, &h, &[t], &rep).unwrap();
        prop_assert!(report.passed());
    }

    #[test]
    fn encode_decode_round_trip(twice in 1u32..=4, massive: bool, minus: bool, seed: u64) {
        let sp = spin_space(twice, massive);
        let conv = PhaseConvention::random_admissible(&sp, &mut stream_rng(seed, domain::PHASES, 0));
        let sector = if minus { Sector::Minus } else { Sector::Plus };
        let code = build_code(&sp, &build_cpt(&sp, &conv).unwrap(), sector).unwrap();
        let m = random_message(code.logical_dim, &mut stream_rng(seed, domain::MESSAGES, 0));
        let psi = encode(&m, &code).unwrap();
        let (back, residual) = decode(&psi, &code).unwrap();
        prop_assert!(residual <= 1e-12);
        prop_assert!(back.iter().zip(m.iter()).all(|(a, b)| (a - b).norm() <= 1e-12));
        let (ok, _) = is_g_invariant(&linalg::projector(&psi), &code.rep().unwrap(), 1e-12).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn grid_cpt_is_linear_and_isometric(seed: u64, a_re in -2.0f64..2.0, a_im in -2.0f64..2.0) {
        let sp = spin_space(1, true);
        let layout = GridLayout::from_space(&sp, MomentumGrid::default()).unwrap();
        let conv = PhaseConvention::random_admissible(&sp, &mut stream_rng(seed, domain::PHASES, 0));
        let f = TestFunction::random_wavepacket(&layout, &mut stream_rng(seed, domain::MOMENTUM, 0));
        let g = TestFunction::random_wavepacket(&layout, &mut stream_rng(seed, domain::MOMENTUM, 1));
        let a = Complex64::new(a_re, a_im);
        let lhs = cpt_on_testfn(&f.scaled(a).add(&g).unwrap(), &conv).unwrap();
        let rhs = cpt_on_testfn(&f, &conv).unwrap().scaled(a).add(&cpt_on_testfn(&g, &conv).unwrap()).unwrap();
        let diff = lhs.values.iter().zip(rhs.values.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-12);
        let cf = cpt_on_testfn(&f, &conv).unwrap();
        let cg = cpt_on_testfn(&g, &conv).unwrap();
        prop_assert!((cf.inner(&cg).unwrap() - f.inner(&g).unwrap()).norm() <= 1e-12);
    }
}

#[test]
fn capacities_for_all_spins_up_to_eight() {
    for twice in 1..=16u32 {
        for massive in [true, false] {
            let sp = spin_space(twice, massive);
            let code = build_code(&sp, &build_cpt(&sp, &PhaseConvention::zero()).unwrap(), Sector::Plus).unwrap();
            let expected = if massive {
                (2.0 * (twice as f64 + 1.0)).log2()
            } else {
                2.0
            };
            assert_eq!(code.capacity(), expected, "2s={twice} massive={massive}");
            if !massive {
                assert_eq!(sp.dim(), 8);
            }
        }
    }
}

#[test]
fn random_messages_are_unit_vectors() {
    let mut rng = stream_rng(3, domain::MESSAGES, 0);
    for d in 1..10 {
        let m = random_message(d, &mut rng);
        assert!((linalg::vec_norm(&m) - 1.0).abs() < 1e-12);
    }
}
