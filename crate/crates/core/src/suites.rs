//! Verification suites. Each runner is deterministic given its arguments
//! and returns a single [`Report`] with timestamp 0; callers stamp it.

use rand::Rng;

use crate::alignment_protocol::{
    copies_for_one_percent, helstrom_error, run_experiment, AlignmentExperiment, SimulationMode,
};
use crate::cpt_operators::{
    build_cpt, cpt_eigensectors, klein_group_report, normalized_cpt, PhaseConvention, Sector,
};
use crate::dfs_codec::{
    build_code, covariant_noise_trial, decode, encode, fidelity, random_message, MessageSpec,
    NoiseModel,
};
use crate::error::Result;
use crate::linalg::{self, CMatrix, CVector};
use crate::momentum_grid::{
    cpt_on_testfn, grid_cpt_matrix, no_shell_mixing_check, shell_agreement, GridLayout,
    MomentumGrid, TestFunction, DECAY_RATIO,
};
use crate::report::Report;
use crate::resource_theory::{
    alignment_rate, is_g_invariant, reference_qubit, standard_antiunitary_demo, standard_form,
    standard_form_state, tau_measure, twirl, unitary_consistency_check, AlignmentRate, GroupRep,
};
use crate::seeding::{domain, stream_rng};
use crate::spin_spaces::{
    dicke_reduction_report, massive_spin_s_space, massless_allowed_states, EmbeddingMode, Spin,
    SpinSpace,
};

pub fn space(spin: Spin, massive: bool) -> Result<SpinSpace> {
    if massive {
        massive_spin_s_space(spin, EmbeddingMode::Combinatorial)
    } else {
        massless_allowed_states(spin, EmbeddingMode::Combinatorial)
    }
}

fn space_name(space: &SpinSpace) -> String {
    format!(
        "s={} {}",
        space.spin,
        if space.massive { "massive" } else { "massless" }
    )
}

fn anti_diagonal(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| if r + c == d - 1 { linalg::ONE } else { linalg::ZERO })
}

/// Space dimensions and the zero-phase CPT form: massive 4(2s+1) for
/// 2s ≤ 8, massless 8 for 2s ≤ 16.
pub fn dimensions_suite() -> Result<Report> {
    let mut report = Report::new("dimensions", 0);
    let zero = PhaseConvention::zero();
    let cases = (1..=8u32)
        .map(|t| (t, true))
        .chain((1..=16u32).map(|t| (t, false)));
    for (twice, massive) in cases {
        let spin = Spin::from_twice(twice)?;
        let sp = space(spin, massive)?;
        let expected = if massive { 4 * (twice as usize + 1) } else { 8 };
        let name = space_name(&sp);
        report.check_bool(
            format!("{name} dimension"),
            sp.dim() == expected,
            format!("dim {} (expected {expected})", sp.dim()),
        );
        let cpt = build_cpt(&sp, &zero)?;
        report.check_bool(
            format!("{name} zero-phase CPT anti-diagonal"),
            cpt == anti_diagonal(sp.dim()),
            format!("{0}x{0}", cpt.nrows()),
        );
    }
    Ok(report)
}

/// Which phase conventions the Klein suite runs over.
#[derive(Debug, Clone)]
pub enum PhaseChoice {
    Zero,
    Random(usize),
    Given(PhaseConvention),
}

/// Klein four-group law. A single convention reports every product; a
/// random sweep reports unitarity and group-law residuals per convention.
pub fn klein_suite(space: &SpinSpace, phases: &PhaseChoice, seed: u64, tol: f64) -> Result<Report> {
    let mut report = Report::new("klein", seed);
    let name = space_name(space);
    match phases {
        PhaseChoice::Zero | PhaseChoice::Given(_) => {
            let conv = match phases {
                PhaseChoice::Given(c) => c.clone(),
                _ => PhaseConvention::zero(),
            };
            // every check here is residual <= tolerance
            for mut c in klein_group_report(space, &conv)?.checks {
                c.name = format!("{name} {}", c.name);
                if let Some(r) = c.residual {
                    c.tolerance = Some(tol);
                    c.pass = r <= tol;
                }
                report.push(c);
            }
        }
        PhaseChoice::Random(count) => {
            let mut worst_unitary: f64 = 0.0;
            let mut worst_law: f64 = 0.0;
            for i in 0..*count {
                let conv =
                    PhaseConvention::random_admissible(space, &mut stream_rng(seed, domain::PHASES, i as u64));
                let r = klein_group_report(space, &conv)?;
                let (unitary, law): (Vec<_>, Vec<_>) =
                    r.checks.iter().partition(|c| c.name.starts_with("unitary"));
                let max = |cs: &[&crate::report::Check]| {
                    cs.iter().filter_map(|c| c.residual).fold(0.0, f64::max)
                };
                let failed: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
                let cocycle = r
                    .check("{1,CPT} projective Z2")
                    .map(|c| c.notes.clone())
                    .unwrap_or_default();
                let u = max(&unitary);
                let l = max(&law);
                worst_unitary = worst_unitary.max(u);
                worst_law = worst_law.max(l);
                report.check_le(format!("{name} convention {i} unitary"), u, tol, "");
                report.check_le(
                    format!("{name} convention {i} group law"),
                    l,
                    tol,
                    if failed.is_empty() {
                        cocycle
                    } else {
                        format!("{cocycle}; failing: {}", failed.join(", "))
                    },
                );
            }
            report.check_le(
                format!("{name} worst unitarity over {count} conventions"),
                worst_unitary,
                tol,
                "",
            );
            report.check_le(
                format!("{name} worst group law over {count} conventions"),
                worst_law,
                tol,
                "",
            );
        }
    }
    Ok(report)
}

/// Single-site reduction of Dicke states for the given spin; explicit
/// tensor products are capped at `max_primitives` factors.
pub fn dicke_reduction_suite(spin: Spin, max_primitives: u32) -> Result<Report> {
    let mut report = dicke_reduction_report(spin, max_primitives)?;
    report.suite = "dicke-reduction".into();
    for c in &mut report.checks {
        c.name = format!("s={spin} {}", c.name);
    }
    Ok(report)
}

fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        linalg::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&g + g.adjoint()).scale(0.5)
}

fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        linalg::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let rho = &g * g.adjoint();
    let tr = linalg::trace(&rho).re;
    rho.unscale(tr)
}

/// Randomised unitary consistency: per trial a random admissible
/// convention, H = P₊XP₊ + P₋XP₋ for random Hermitian X, ρ₀ the twirl of
/// a random density matrix, t uniform in [0, 10).
pub fn unitary_consistency_suite(space: &SpinSpace, trials: usize, seed: u64, tol: f64) -> Result<Report> {
    let mut report = Report::new("unitary-consistency", seed);
    let d = space.dim();
    let id = linalg::identity(d);
    let mut worst: f64 = 0.0;
    for i in 0..trials {
        let mut rng = stream_rng(seed, domain::CONSISTENCY, i as u64);
        let conv = PhaseConvention::random_admissible(space, &mut rng);
        let cpt = build_cpt(space, &conv)?;
        let a = normalized_cpt(&cpt, cpt_eigensectors(&cpt)?.half_phase);
        let p_plus = (&id + &a).scale(0.5);
        let p_minus = (&id - &a).scale(0.5);
        let x = random_hermitian(d, &mut rng);
        let h = &p_plus * &x * &p_plus + &p_minus * &x * &p_minus;
        let rep = GroupRep::z2("CPT", cpt)?;
        let rho0 = twirl(&random_density(d, &mut rng), &rep)?;
        let t = rng.gen_range(0.0..10.0);
        let r = unitary_consistency_check(&rho0, &h, &[t], &rep)?;
        let res = r.max_residual();
        worst = worst.max(res);
        report.check_le(format!("trial {i} invariance preserved"), res, tol, format!("t = {t}"));
    }
    report.check_le(
        "max invariance residual",
        worst,
        tol,
        format!("{trials} trials on {}", space_name(space)),
    );
    Ok(report)
}

/// Pure and mixed anti-unitary demonstrations at time `t`.
pub fn antiunitary_suite(t: f64) -> Result<Report> {
    standard_antiunitary_demo(t)
}

/// Alignment-rate endpoints, symmetry and monotonicity, invariance of R
/// under CPT, and the basis dependence of τ.
pub fn measures_suite() -> Result<Report> {
    let mut report = Report::new("measures", 0);
    let r1 = alignment_rate(1.0)?;
    report.check_bool("R(1) = 0", r1 == AlignmentRate::Finite(0.0), format!("R(1) = {r1}"));
    let rh = alignment_rate(0.5)?;
    report.check_bool("R(1/2) infinite", rh.is_infinite(), format!("R(1/2) = {rh}"));
    let r34 = alignment_rate(0.75)?;
    report.check_bool(
        "R(3/4) = 2 bits",
        r34 == AlignmentRate::Finite(2.0),
        format!("R(3/4) = {r34}"),
    );

    let grid = symmetry_grid();
    let mut asym = Vec::new();
    for &q in &grid {
        if alignment_rate(q)? != alignment_rate(1.0 - q)? {
            asym.push(q);
        }
    }
    report.check_bool(
        format!("symmetry on {}-point grid", grid.len()),
        asym.is_empty(),
        if asym.is_empty() {
            "R(q0) == R(1 - q0) bit-exact".to_string()
        } else {
            format!("asymmetric at {asym:?}")
        },
    );

    let mono: Vec<f64> = (0..500).map(|k| k as f64 / 1000.0).collect();
    let mut breaks = Vec::new();
    for w in mono.windows(2) {
        if alignment_rate(w[0])?.value() >= alignment_rate(w[1])?.value() {
            breaks.push(w[1]);
        }
    }
    report.check_bool(
        "strictly increasing on [0, 1/2)",
        breaks.is_empty(),
        format!("{} grid points; breaks at {breaks:?}", mono.len()),
    );

    let mut mismatches = 0;
    let mut total = 0;
    for (psi, cpt) in cpt_invariance_states()? {
        let before = alignment_rate(standard_form(&psi, &cpt)?.q0)?;
        let after = alignment_rate(standard_form(&(&cpt * &psi), &cpt)?.q0)?;
        total += 1;
        if before != after {
            mismatches += 1;
        }
    }
    report.check_bool(
        "R invariant under CPT",
        mismatches == 0,
        format!("{mismatches} of {total} states differ"),
    );

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = CVector::from_vec(vec![linalg::c(s, 0.0), linalg::c(0.0, s)]);
    // e^{iπσˣ/4}
    let v = CMatrix::from_row_slice(
        2,
        2,
        &[linalg::c(s, 0.0), linalg::c(0.0, s), linalg::c(0.0, s), linalg::c(s, 0.0)],
    );
    let before = tau_measure(&psi, None)?;
    let after = tau_measure(&psi, Some(&v))?;
    report.check_gt(
        "tau basis dependence",
        (before - after).abs(),
        0.1,
        format!("tau = {before} in the computational basis, {after} after exp(i*pi*sigma_x/4)"),
    );
    let phased = psi.map(|z| z * linalg::phase(0.7));
    let tau_phased = tau_measure(&phased, None)?;
    report.check_le(
        "tau global-phase invariant",
        (tau_phased - before).abs(),
        linalg::ALGEBRAIC_TOL,
        "phase 0.7 rad",
    );
    Ok(report)
}

/// {1/2} ∪ {k/100, 1 − k/100 : k = 51..99}; closed under floating-point
/// complement.
pub fn symmetry_grid() -> Vec<f64> {
    let mut grid = vec![0.5];
    for k in 51..100 {
        let q = k as f64 / 100.0;
        grid.push(q);
        grid.push(1.0 - q);
    }
    grid
}

/// Standard-form states on the reference qubit and random states on
/// zero-phase spin spaces.
fn cpt_invariance_states() -> Result<Vec<(CVector, CMatrix)>> {
    let (x, plus, minus) = reference_qubit();
    let mut out = Vec::new();
    for q in symmetry_grid() {
        out.push((standard_form_state(q, &plus, &minus)?, x.clone()));
    }
    let zero = PhaseConvention::zero();
    let spaces = [(1, true), (2, true), (3, true), (2, false)];
    for (j, (twice, massive)) in spaces.into_iter().enumerate() {
        let sp = space(Spin::from_twice(twice)?, massive)?;
        let cpt = build_cpt(&sp, &zero)?;
        for i in 0..10 {
            let mut rng = stream_rng(0, domain::MESSAGES, (j * 10 + i) as u64);
            out.push((random_message(sp.dim(), &mut rng), cpt.clone()));
        }
    }
    Ok(out)
}

/// Monte-Carlo alignment against the Helstrom closed form on the
/// reference qubit.
pub fn alignment_suite(q0_grid: &[f64], copies: &[u32], trials: u64, seed: u64) -> Result<Report> {
    let mut report = Report::new("alignment", seed);
    let (cpt, plus, minus) = reference_qubit();
    let mut row = 0u64;
    for &q0 in q0_grid {
        let psi = standard_form_state(q0, &plus, &minus)?;
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        for &n in copies {
            let row_seed: u64 = stream_rng(seed, domain::ALIGNMENT, 1 << 31 | row).gen();
            row += 1;
            let exp = AlignmentExperiment::new(psi.clone(), n, row_seed)?;
            let (summary, r) = run_experiment(&exp, &cpt, SimulationMode::Span, trials)?;
            for mut c in r.checks {
                c.name = format!("q0={q0} {}", c.name);
                report.push(c);
            }
            monotone &= summary.closed_form_error <= prev;
            prev = summary.closed_form_error;
        }
        report.check_bool(
            format!("q0={q0} closed-form error non-increasing in N"),
            monotone,
            format!("N in {copies:?}"),
        );
        if let Some(n_star) = copies_for_one_percent(q0)? {
            let c = (2.0 * q0 - 1.0).abs();
            let e = helstrom_error(c, n_star)?;
            report.check_le(
                format!("q0={q0} closed-form error below 1% at N*"),
                e,
                0.01,
                format!("N* = {n_star}"),
            );
        }
    }

    let balanced = standard_form_state(0.5, &plus, &minus)?;
    let row_seed: u64 = stream_rng(seed, domain::ALIGNMENT, 1 << 31 | row).gen();
    let exp = AlignmentExperiment::new(balanced, 1, row_seed)?;
    let (summary, _) = run_experiment(&exp, &cpt, SimulationMode::Span, trials)?;
    report.check_le(
        "q0=0.5 N=1 zero empirical error",
        summary.empirical_error,
        0.0,
        format!("{} errors in {} trials", summary.errors, summary.trials),
    );

    let psi = standard_form_state(0.9, &plus, &minus)?;
    let exp = AlignmentExperiment::new(psi, 4, seed)?;
    let (span, _) = run_experiment(&exp, &cpt, SimulationMode::Span, trials)?;
    let (explicit, _) = run_experiment(&exp, &cpt, SimulationMode::Explicit, trials)?;
    report.check_le(
        "span and explicit simulations agree",
        (span.empirical_error - explicit.empirical_error).abs(),
        linalg::SPECTRAL_TOL,
        format!("q0=0.9 N=4, both {} errors", span.errors),
    );
    Ok(report)
}

/// Grid CPT on `grid`: norm and inner-product preservation over random
/// wavepackets, agreement of the pointwise and matrix actions, exact
/// shell structure, and agreement of every shell block with the fixed-p
/// CPT. Runs with zero phases and with a random admissible convention.
pub fn momentum_suite(
    space: &SpinSpace,
    grid: &MomentumGrid,
    wavepackets: usize,
    seed: u64,
    tol: f64,
) -> Result<Report> {
    let mut report = Report::new("momentum", seed);
    let layout = GridLayout::from_space(space, grid.clone())?;
    let packets: Vec<TestFunction> = (0..wavepackets)
        .map(|i| TestFunction::random_wavepacket(&layout, &mut stream_rng(seed, domain::MOMENTUM, i as u64)))
        .collect();
    let decay = packets.iter().map(TestFunction::decay_ratio).fold(0.0, f64::max);
    report.check_le(
        "wavepackets rapidly decreasing",
        decay,
        DECAY_RATIO,
        format!("{wavepackets} packets, {} grid points", grid.len()),
    );

    let conventions = [
        ("zero phases", PhaseConvention::zero()),
        (
            "random phases",
            PhaseConvention::random_admissible(space, &mut stream_rng(seed, domain::PHASES, 0)),
        ),
    ];
    for (label, conv) in &conventions {
        let mat = grid_cpt_matrix(&layout, conv)?;
        let images: Vec<TestFunction> = packets
            .iter()
            .map(|f| cpt_on_testfn(f, conv))
            .collect::<Result<_>>()?;
        let mut norm_worst: f64 = 0.0;
        let mut action_worst: f64 = 0.0;
        for (f, g) in packets.iter().zip(&images) {
            norm_worst = norm_worst.max((g.norm() - f.norm()).abs());
            let via_matrix = &mat * &f.values;
            action_worst = action_worst.max(
                via_matrix
                    .iter()
                    .zip(g.values.iter())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max),
            );
        }
        let mut inner_worst: f64 = 0.0;
        for (j, (fj, gj)) in packets.iter().zip(&images).enumerate() {
            for (fk, gk) in packets.iter().zip(&images).skip(j + 1) {
                inner_worst = inner_worst.max((gj.inner(gk)? - fj.inner(fk)?).norm());
            }
        }
        report.check_le(format!("{label} norm preserved"), norm_worst, tol, "");
        report.check_le(format!("{label} inner products preserved"), inner_worst, tol, "");
        report.check_le(
            format!("{label} pointwise and matrix actions agree"),
            action_worst,
            tol,
            "",
        );
        for mut c in no_shell_mixing_check(conv, space, grid)?.checks {
            c.name = format!("{label} {}", c.name);
            report.push(c);
        }
        report.check_le(
            format!("{label} shell blocks equal fixed-p CPT"),
            shell_agreement(conv, space, grid)?,
            0.0,
            format!("{} shells, {}", grid.shells().len(), space_name(space)),
        );
    }
    Ok(report)
}

/// The spaces exercised by the DFS suite.
pub fn dfs_spaces() -> Result<Vec<SpinSpace>> {
    [(1, true), (2, true), (3, true), (2, false), (4, false)]
        .into_iter()
        .map(|(t, m)| space(Spin::from_twice(t)?, m))
        .collect()
}

/// DFS codes in the +1 sector: exact capacity, round trips of random
/// messages, invariance of encoded projectors, and covariant-noise trials
/// on the first space.
pub fn dfs_suite(spaces: &[SpinSpace], messages: usize, noise_trials: u64, seed: u64, tol: f64) -> Result<Report> {
    let mut report = Report::new("dfs", seed);
    for (j, sp) in spaces.iter().enumerate() {
        let name = space_name(sp);
        let conv = PhaseConvention::random_admissible(sp, &mut stream_rng(seed, domain::PHASES, j as u64));
        let cpt = build_cpt(sp, &conv)?;
        let code = build_code(sp, &cpt, Sector::Plus)?;
        let expected = if sp.massive {
            (2.0 * (sp.spin.twice() as f64 + 1.0)).log2()
        } else {
            2.0
        };
        report.check_bool(
            format!("{name} capacity"),
            code.capacity() == expected,
            format!("log2({}) = {} bits", code.logical_dim, code.capacity()),
        );

        let rep = code.rep()?;
        let mut round_trip: f64 = 0.0;
        let mut invariance: f64 = 0.0;
        for i in 0..messages {
            let index = (j as u64) << 16 | i as u64;
            let m = random_message(code.logical_dim, &mut stream_rng(seed, domain::MESSAGES, index));
            let psi = encode(&m, &code)?;
            let (back, residual) = decode(&psi, &code)?;
            round_trip = round_trip.max(1.0 - fidelity(&m, &back)).max(residual);
            let (_, r) = is_g_invariant(&linalg::projector(&psi), &rep, tol)?;
            invariance = invariance.max(r);
        }
        report.check_le(
            format!("{name} round trip"),
            round_trip,
            tol,
            format!("{messages} random messages; max of 1 - fidelity and residual"),
        );
        report.check_le(format!("{name} encoded projectors invariant"), invariance, tol, "");
    }

    if let Some(sp) = spaces.first() {
        let code = build_code(sp, &build_cpt(sp, &PhaseConvention::zero())?, Sector::Plus)?;
        let name = space_name(sp);
        for noise in [NoiseModel::Twirl, NoiseModel::Dephase, NoiseModel::Depolarize(0.2)] {
            let r = covariant_noise_trial(&code, &MessageSpec::Random, &noise, noise_trials, seed)?;
            let prefix = format!("{name} {}", r.suite.trim_start_matches("dfs "));
            for mut c in r.checks {
                c.name = format!("{prefix} {}", c.name);
                report.push(c);
            }
        }
    }
    Ok(report)
}
