//! Two-party reference-frame alignment: Alice sends N copies of ψ in her
//! frame, Bob receives either ψ^⊗N or (CPTψ)^⊗N and guesses which with the
//! optimal two-outcome measurement.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CptError, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::report::Report;
use crate::resource_theory::{alignment_rate, reference_qubit, standard_form_state, AlignmentRate};
use crate::seeding::{domain, stream_rng};

/// Largest N·log₂(dim) for which the N-copy states are materialised.
pub const EXPLICIT_QUBIT_CAP: f64 = 20.0;

/// ⟨ψ|CPT|ψ⟩
pub fn overlap(psi: &CVector, cpt: &CMatrix) -> Result<Complex64> {
    if cpt.shape() != (psi.len(), psi.len()) {
        return Err(CptError::Shape(format!(
            "CPT is {}x{}, state has {} components",
            cpt.nrows(),
            cpt.ncols(),
            psi.len()
        )));
    }
    Ok(linalg::inner(psi, &(cpt * psi)))
}

/// Minimum error for discriminating two equiprobable pure states with
/// single-copy overlap magnitude `c`, given N copies:
/// (1 − √(1 − c^{2N}))/2.
pub fn helstrom_error(overlap_mag: f64, copies: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&overlap_mag) {
        return Err(CptError::Domain(format!(
            "overlap magnitude {overlap_mag} outside [0, 1]"
        )));
    }
    let c2n = overlap_mag.powi(2 * copies as i32);
    Ok((1.0 - (1.0 - c2n).max(0.0).sqrt()) / 2.0)
}

#[derive(Debug, Clone)]
pub struct AlignmentExperiment {
    pub psi: CVector,
    pub copies: u32,
    /// Fixed group element sent every trial; uniformly random when `None`.
    pub g_true: Option<bool>,
    pub seed: u64,
}

impl AlignmentExperiment {
    pub fn new(psi: CVector, copies: u32, seed: u64) -> Result<Self> {
        if copies == 0 {
            return Err(CptError::Validation("copy count N must be at least 1".into()));
        }
        let n = linalg::vec_norm(&psi);
        if (n - 1.0).abs() > linalg::ALGEBRAIC_TOL {
            return Err(CptError::Validation(format!("state has norm {n}, expected 1")));
        }
        Ok(AlignmentExperiment {
            psi,
            copies,
            g_true: None,
            seed,
        })
    }
}

/// How Bob's measurement statistics are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulationMode {
    /// Work in the two-dimensional span of the N-copy states using their
    /// Gram matrix only; no cap on N.
    Span,
    /// Materialise ψ^⊗N and (CPTψ)^⊗N and build the measurement from them.
    Explicit,
}

/// Probability that Bob's outcome equals the element sent, for g = 1 and
/// g = CPT respectively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuessProbabilities {
    pub correct_given_identity: f64,
    pub correct_given_cpt: f64,
}

/// Helstrom measurement in an orthonormal basis {e0, e1} of the span, given
/// the coordinates of the two signal states. Returns the unit vector
/// spanning the "guess identity" projector, or `None` when the signals
/// coincide and no measurement beats a coin.
fn helstrom_vector(a: [Complex64; 2], b: [Complex64; 2]) -> Option<[Complex64; 2]> {
    // Γ = ½(|a⟩⟨a| − |b⟩⟨b|), Hermitian 2×2
    let g00 = (a[0].norm_sqr() - b[0].norm_sqr()) / 2.0;
    let g11 = (a[1].norm_sqr() - b[1].norm_sqr()) / 2.0;
    let g01 = (a[0] * a[1].conj() - b[0] * b[1].conj()) / 2.0;
    let gamma = CMatrix::from_row_slice(
        2,
        2,
        &[linalg::c(g00, 0.0), g01, g01.conj(), linalg::c(g11, 0.0)],
    );
    if linalg::max_abs(&gamma) < 1e-15 {
        return None;
    }
    let (values, vectors) = linalg::hermitian_eigen(&gamma).ok()?;
    if values[1] <= 0.0 {
        return None;
    }
    Some([vectors[(0, 1)], vectors[(1, 1)]])
}

fn probabilities_from(v: Option<[Complex64; 2]>, a: [Complex64; 2], b: [Complex64; 2]) -> GuessProbabilities {
    match v {
        None => GuessProbabilities {
            correct_given_identity: 0.5,
            correct_given_cpt: 0.5,
        },
        Some(v) => {
            let pa = (v[0].conj() * a[0] + v[1].conj() * a[1]).norm_sqr();
            let pb = (v[0].conj() * b[0] + v[1].conj() * b[1]).norm_sqr();
            GuessProbabilities {
                correct_given_identity: pa.clamp(0.0, 1.0),
                correct_given_cpt: (1.0 - pb).clamp(0.0, 1.0),
            }
        }
    }
}

/// Outcome statistics from the Gram matrix of the N-copy signals alone:
/// ⟨Ψ₀|Ψ₁⟩ = ⟨ψ|CPTψ⟩^N.
pub fn span_probabilities(psi: &CVector, cpt: &CMatrix, copies: u32) -> Result<GuessProbabilities> {
    let s = overlap(psi, cpt)?.powu(copies);
    let perp = (1.0 - s.norm_sqr()).max(0.0).sqrt();
    let a = [linalg::ONE, linalg::ZERO];
    let b = [s, linalg::c(perp, 0.0)];
    Ok(probabilities_from(helstrom_vector(a, b), a, b))
}

/// Same statistics computed on explicitly built ψ^⊗N and (CPTψ)^⊗N.
pub fn explicit_probabilities(psi: &CVector, cpt: &CMatrix, copies: u32) -> Result<GuessProbabilities> {
    let dim = psi.len();
    let qubits = copies as f64 * (dim as f64).log2();
    if qubits > EXPLICIT_QUBIT_CAP {
        return Err(CptError::Capacity(format!(
            "N·log2(dim) = {qubits:.2} exceeds {EXPLICIT_QUBIT_CAP}; use span mode"
        )));
    }
    let phi = cpt * psi;
    let mut big0 = psi.clone();
    let mut big1 = phi.clone();
    for _ in 1..copies {
        big0 = linalg::kron_vec(&big0, psi);
        big1 = linalg::kron_vec(&big1, &phi);
    }
    let e0 = big0.clone();
    let s = linalg::inner(&e0, &big1);
    let resid = &big1 - e0.map(|z| z * s);
    let rn = linalg::vec_norm(&resid);
    let a = [linalg::ONE, linalg::ZERO];
    let (b, v) = if rn < 1e-15 {
        ([s, linalg::ZERO], helstrom_vector(a, [s, linalg::ZERO]))
    } else {
        let e1 = resid.unscale(rn);
        let b = [linalg::inner(&e0, &big1), linalg::inner(&e1, &big1)];
        (b, helstrom_vector(a, b))
    };
    let Some(v) = v else {
        return Ok(probabilities_from(None, a, b));
    };
    // lift the measurement vector back to the full space and evaluate
    // Born probabilities there
    let lifted = if rn < 1e-15 {
        e0.map(|z| z * v[0])
    } else {
        e0.map(|z| z * v[0]) + resid.unscale(rn).map(|z| z * v[1])
    };
    let pa = linalg::inner(&lifted, &big0).norm_sqr();
    let pb = linalg::inner(&lifted, &big1).norm_sqr();
    Ok(GuessProbabilities {
        correct_given_identity: pa.clamp(0.0, 1.0),
        correct_given_cpt: (1.0 - pb).clamp(0.0, 1.0),
    })
}

/// Monte-Carlo summary of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub copies: u32,
    pub trials: u64,
    pub errors: u64,
    pub closed_form_error: f64,
    pub empirical_error: f64,
    /// √(ê(1 − ê)/trials)
    pub stderr: f64,
    /// Binomial standard deviation around the closed form.
    pub sigma: f64,
    /// Bits, from the empirical joint distribution of (g, guess).
    pub mutual_information: f64,
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// I(g; g′) in bits from counts[g][guess].
pub fn mutual_information(counts: [[u64; 2]; 2]) -> f64 {
    let total: u64 = counts.iter().flatten().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let row = |g: usize| (counts[g][0] + counts[g][1]) as f64 / n;
    let col = |h: usize| (counts[0][h] + counts[1][h]) as f64 / n;
    let mut info = 0.0;
    for g in 0..2 {
        for h in 0..2 {
            let p = counts[g][h] as f64 / n;
            if p > 0.0 {
                info += p * (p / (row(g) * col(h))).log2();
            }
        }
    }
    info.max(0.0)
}

/// Runs `trials` independent rounds; trial i draws from its own stream so
/// the result does not depend on scheduling.
pub fn run_experiment(
    exp: &AlignmentExperiment,
    cpt: &CMatrix,
    mode: SimulationMode,
    trials: u64,
) -> Result<(ExperimentSummary, Report)> {
    if trials == 0 {
        return Err(CptError::Validation("trial count must be positive".into()));
    }
    let probs = match mode {
        SimulationMode::Span => span_probabilities(&exp.psi, cpt, exp.copies)?,
        SimulationMode::Explicit => explicit_probabilities(&exp.psi, cpt, exp.copies)?,
    };
    let c = overlap(&exp.psi, cpt)?.norm().min(1.0);
    let closed = helstrom_error(c, exp.copies)?;

    let seed = exp.seed;
    let fixed = exp.g_true;
    let counts = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, domain::ALIGNMENT, i);
            let g = fixed.unwrap_or_else(|| rng.gen::<bool>());
            let p_correct = if g {
                probs.correct_given_cpt
            } else {
                probs.correct_given_identity
            };
            let correct = rng.gen::<f64>() < p_correct;
            let guess = if correct { g } else { !g };
            let mut c = [[0u64; 2]; 2];
            c[g as usize][guess as usize] = 1;
            c
        })
        .reduce(
            || [[0u64; 2]; 2],
            |a, b| [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]],
        );
    let errors = counts[0][1] + counts[1][0];
    let n = trials as f64;
    let empirical = errors as f64 / n;
    let summary = ExperimentSummary {
        copies: exp.copies,
        trials,
        errors,
        closed_form_error: closed,
        empirical_error: empirical,
        stderr: (empirical * (1.0 - empirical) / n).sqrt(),
        sigma: (closed * (1.0 - closed) / n).sqrt(),
        mutual_information: mutual_information(counts),
    };

    let mut report = Report::new("alignment", exp.seed);
    report.check_le(
        format!("N={} measurement matches closed form", exp.copies),
        (1.0 - (probs.correct_given_identity + probs.correct_given_cpt) / 2.0 - closed).abs(),
        linalg::SPECTRAL_TOL,
        format!("{mode:?} mode"),
    );
    report.check_le(
        format!("N={} empirical error within 3 sigma", exp.copies),
        (empirical - closed).abs(),
        3.0 * summary.sigma,
        format!(
            "empirical {empirical:.6} ({errors}/{trials}), closed form {closed:.6}, \
             mutual information {:.6} bits (closed form {:.6})",
            summary.mutual_information,
            if fixed.is_none() { 1.0 - binary_entropy(closed) } else { 0.0 },
        ),
    );
    Ok((summary, report))
}

/// N* = ⌈7/R⌉ copies; for finite positive R the closed-form error there
/// (and beyond, by monotonicity) should be below 1%.
pub fn copies_for_one_percent(q0: f64) -> Result<Option<u32>> {
    match alignment_rate(q0)? {
        AlignmentRate::Infinite => Ok(Some(1)),
        AlignmentRate::Finite(r) if r > 0.0 => Ok(Some((7.0 / r).ceil() as u32)),
        AlignmentRate::Finite(_) => Ok(None),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub q0: f64,
    pub copies: u32,
    pub alignment_rate: AlignmentRate,
    pub closed_form_error: f64,
    pub empirical_error: f64,
    pub stderr: f64,
}

/// Alignment sweep on the reference qubit (CPT = σˣ) with standard-form
/// inputs √q0|+⟩ + √q1|−⟩. Row r seeds its trials from the r-th stream of
/// the alignment domain.
pub fn sweep(q0_grid: &[f64], copies_grid: &[u32], trials: u64, seed: u64) -> Result<Vec<SweepRow>> {
    if q0_grid.is_empty() || copies_grid.is_empty() {
        return Err(CptError::Validation("sweep grids must be non-empty".into()));
    }
    let (cpt, plus, minus) = reference_qubit();
    let mut rows = Vec::with_capacity(q0_grid.len() * copies_grid.len());
    for &q0 in q0_grid {
        let rate = alignment_rate(q0)?;
        let psi = standard_form_state(q0, &plus, &minus)?;
        for &n in copies_grid {
            let row_seed: u64 = stream_rng(seed, domain::ALIGNMENT, 1 << 31 | rows.len() as u64).gen();
            let exp = AlignmentExperiment::new(psi.clone(), n, row_seed)?;
            let (s, _) = run_experiment(&exp, &cpt, SimulationMode::Span, trials)?;
            rows.push(SweepRow {
                q0,
                copies: n,
                alignment_rate: rate,
                closed_form_error: s.closed_form_error,
                empirical_error: s.empirical_error,
                stderr: s.stderr,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("q0,N,alignment_rate,closed_form_error,empirical_error,stderr\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.q0, r.copies, r.alignment_rate, r.closed_form_error, r.empirical_error, r.stderr
        );
    }
    out
}
