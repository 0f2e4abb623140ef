//! C, PT and CPT as phase-decorated permutation matrices over a
//! [`SpinSpace`], the Klein four-group check, and the CPT eigensectors.
//!
//! Matrix convention: `O|l⟩ = e^{iθ_O(l)} |O(l)⟩`, so column `index(l)`
//! carries a single entry at row `index(O(l))`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CptError, Result};
use crate::linalg::{self, CMatrix, CVector, ALGEBRAIC_TOL};
use crate::report::Report;
use crate::spin_spaces::{BasisLabel, LabelKey, Momentum, SpinSpace};

pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Smallest distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// θ^C and θ^PT per label key; missing keys carry phase 0.
/// θ^CPT(l) := θ^C(l) + θ^PT(l), and admissibility requires
/// θ^CPT(u, s, p) = θ^CPT(−u, −s, −p).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhaseConvention {
    phases: BTreeMap<LabelKey, (f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEntry {
    pub u_sign: i8,
    pub spin_z2: i32,
    pub p: Momentum,
    pub theta_c: f64,
    pub theta_pt: f64,
}

fn cpt_key(key: LabelKey) -> LabelKey {
    (-key.0, -key.1, key.2.flipped())
}

impl PhaseConvention {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.phases.values().all(|&(c, pt)| c == 0.0 && pt == 0.0)
    }

    pub fn set(&mut self, key: LabelKey, theta_c: f64, theta_pt: f64) {
        self.phases.insert(key, (wrap_angle(theta_c), wrap_angle(theta_pt)));
    }

    pub fn theta_c(&self, key: LabelKey) -> f64 {
        self.phases.get(&key).map_or(0.0, |p| p.0)
    }

    pub fn theta_pt(&self, key: LabelKey) -> f64 {
        self.phases.get(&key).map_or(0.0, |p| p.1)
    }

    pub fn theta_cpt(&self, key: LabelKey) -> f64 {
        wrap_angle(self.theta_c(key) + self.theta_pt(key))
    }

    /// Largest violation of θ^CPT(l) = θ^CPT(cpt(l)) over the given labels.
    pub fn admissibility_residual<'a>(&self, labels: impl IntoIterator<Item = &'a BasisLabel>) -> f64 {
        labels
            .into_iter()
            .map(|l| {
                let k = l.key();
                angle_distance(self.theta_cpt(k), self.theta_cpt(cpt_key(k)))
            })
            .fold(0.0, f64::max)
    }

    pub fn validate(&self, space: &SpinSpace) -> Result<()> {
        let r = self.admissibility_residual(&space.basis);
        if r > ALGEBRAIC_TOL {
            return Err(CptError::Admissibility(format!(
                "theta_CPT differs between CPT partners by {r:.3e} rad"
            )));
        }
        Ok(())
    }

    /// Draws a convention under which {1, C, PT, CPT} is a projective
    /// representation of the Klein group and θ^CPT is CPT-symmetric.
    ///
    /// Labels fall into orbits {l, C l, PT l, CPT l}. With global angles
    /// φ_CC, φ_PP, signs ε₁, ε₂ ∈ {0, π} and per-orbit bits n₁, n₂:
    ///
    /// ```text
    /// θ^C  on the orbit: a, φ_CC − a, a + ε₁, φ_CC − a + ε₁
    /// θ^PT on the orbit: b, b + ε₂, φ_PP − b, φ_PP − b + ε₂
    /// a + b = Σ/2 + n₁π,  b − a = Δ/2 + n₂π
    /// Σ = φ_CC + φ_PP + ε₁ + ε₂,  Δ = φ_PP − φ_CC + ε₁ − ε₂
    /// ```
    ///
    /// which makes C², PT², CPT² and every cross product proportional to
    /// the expected group element.
    pub fn random_admissible<R: Rng + ?Sized>(space: &SpinSpace, rng: &mut R) -> Self {
        let phi_cc = rng.gen_range(0.0..TAU);
        let phi_pp = rng.gen_range(0.0..TAU);
        let eps1 = if rng.gen::<bool>() { PI } else { 0.0 };
        let eps2 = if rng.gen::<bool>() { PI } else { 0.0 };
        let sum = phi_cc + phi_pp + eps1 + eps2;
        let diff = phi_pp - phi_cc + eps1 - eps2;

        let mut conv = PhaseConvention::zero();
        for label in &space.basis {
            let key = label.key();
            if conv.phases.contains_key(&key) {
                continue;
            }
            let n1 = if rng.gen::<bool>() { PI } else { 0.0 };
            let n2 = if rng.gen::<bool>() { PI } else { 0.0 };
            let a = (sum / 2.0 + n1 - diff / 2.0 - n2) / 2.0;
            let b = (sum / 2.0 + n1 + diff / 2.0 + n2) / 2.0;
            let c_key = label.charge_flipped().key();
            let pt_key = label.pt_flipped().key();
            let cpt = cpt_key(key);
            conv.set(key, a, b);
            conv.set(c_key, phi_cc - a, b + eps2);
            conv.set(pt_key, a + eps1, phi_pp - b);
            conv.set(cpt, phi_cc - a + eps1, phi_pp - b + eps2);
        }
        conv
    }

    pub fn entries(&self) -> Vec<PhaseEntry> {
        self.phases
            .iter()
            .map(|(&(u_sign, spin_z2, p), &(theta_c, theta_pt))| PhaseEntry {
                u_sign,
                spin_z2,
                p,
                theta_c,
                theta_pt,
            })
            .collect()
    }

    pub fn from_entries(entries: &[PhaseEntry]) -> Self {
        let mut conv = PhaseConvention::zero();
        for e in entries {
            conv.set((e.u_sign, e.spin_z2, e.p), e.theta_c, e.theta_pt);
        }
        conv
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries()).expect("phase entries serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<PhaseEntry> =
            serde_json::from_str(text).map_err(|e| CptError::Parse(e.to_string()))?;
        Ok(Self::from_entries(&entries))
    }
}

fn build_permutation(
    space: &SpinSpace,
    image: impl Fn(&BasisLabel) -> BasisLabel,
    theta: impl Fn(LabelKey) -> f64,
) -> Result<CMatrix> {
    let d = space.dim();
    let mut m = CMatrix::zeros(d, d);
    let mut hit = vec![false; d];
    for (col, label) in space.basis.iter().enumerate() {
        let target = image(label);
        let row = space
            .index_of(&target)
            .ok_or_else(|| CptError::Closure(label.to_string()))?;
        if hit[row] {
            return Err(CptError::Structure(format!(
                "two labels map onto {target}; the map is not a permutation"
            )));
        }
        hit[row] = true;
        m[(row, col)] = linalg::phase(theta(label.key()));
    }
    Ok(m)
}

/// C|u,s,p⟩ = e^{iθ^C}|−u,s,p⟩
pub fn build_c(space: &SpinSpace, phases: &PhaseConvention) -> Result<CMatrix> {
    phases.validate(space)?;
    build_permutation(space, BasisLabel::charge_flipped, |k| phases.theta_c(k))
}

/// PT|u,s,p⟩ = e^{iθ^PT}|u,−s,−p⟩
pub fn build_pt(space: &SpinSpace, phases: &PhaseConvention) -> Result<CMatrix> {
    phases.validate(space)?;
    build_permutation(space, BasisLabel::pt_flipped, |k| phases.theta_pt(k))
}

/// CPT|u,s,p⟩ = e^{iθ^CPT}|−u,−s,−p⟩
pub fn build_cpt(space: &SpinSpace, phases: &PhaseConvention) -> Result<CMatrix> {
    phases.validate(space)?;
    build_permutation(space, BasisLabel::cpt_flipped, |k| phases.theta_cpt(k))
}

/// The four representation operators, indexed so that the group product
/// is XOR of indices: 0 = 1, 1 = C, 2 = PT, 3 = CPT.
#[derive(Debug, Clone)]
pub struct KleinOperators {
    pub ops: [CMatrix; 4],
}

pub const KLEIN_NAMES: [&str; 4] = ["1", "C", "PT", "CPT"];

impl KleinOperators {
    pub fn build(space: &SpinSpace, phases: &PhaseConvention) -> Result<Self> {
        Ok(KleinOperators {
            ops: [
                linalg::identity(space.dim()),
                build_c(space, phases)?,
                build_pt(space, phases)?,
                build_cpt(space, phases)?,
            ],
        })
    }

    pub fn c(&self) -> &CMatrix {
        &self.ops[1]
    }

    pub fn pt(&self) -> &CMatrix {
        &self.ops[2]
    }

    pub fn cpt(&self) -> &CMatrix {
        &self.ops[3]
    }
}

/// Best phase φ with `a ≈ e^{iφ} b` and the residual ‖a − e^{iφ}b‖_max.
pub fn proportional_phase(a: &CMatrix, b: &CMatrix) -> (f64, f64) {
    assert_eq!(a.shape(), b.shape());
    let (idx, _) = b
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
    let ratio = a.as_slice()[idx] / b.as_slice()[idx];
    let phi = if ratio.norm() > 0.0 { ratio.arg() } else { 0.0 };
    let scaled = b.map(|z| z * linalg::phase(phi));
    (phi, linalg::max_abs_diff(a, &scaled))
}

/// Verifies the Klein four-group law for {1, C, PT, CPT} up to recorded
/// global phases, abelian-ness, unitarity, and that {1, CPT} alone is a
/// projective representation of Z₂. Failures are reported, not raised.
pub fn klein_group_report(space: &SpinSpace, phases: &PhaseConvention) -> Result<Report> {
    let ops = KleinOperators::build(space, phases)?;
    let mut report = Report::new(
        format!(
            "klein s={} {}",
            space.spin,
            if space.massive { "massive" } else { "massless" }
        ),
        0,
    );
    report.check_le(
        "admissible phases",
        phases.admissibility_residual(&space.basis),
        ALGEBRAIC_TOL,
        "theta_CPT(u,s,p) = theta_CPT(-u,-s,-p)",
    );
    for (name, op) in KLEIN_NAMES.iter().zip(ops.ops.iter()) {
        report.check_le(
            format!("unitary {name}"),
            linalg::unitarity_residual(op),
            ALGEBRAIC_TOL,
            "",
        );
    }
    for g in 0..4 {
        for h in 0..4 {
            let product = &ops.ops[g] * &ops.ops[h];
            let (phi, res) = proportional_phase(&product, &ops.ops[g ^ h]);
            report.check_le(
                format!("{}*{} = {}", KLEIN_NAMES[g], KLEIN_NAMES[h], KLEIN_NAMES[g ^ h]),
                res,
                ALGEBRAIC_TOL,
                format!("global phase {:.15} rad", wrap_angle(phi)),
            );
        }
    }
    let cp = ops.c() * ops.pt();
    let pc = ops.pt() * ops.c();
    let (phi, res) = proportional_phase(&cp, &pc);
    report.check_le(
        "C*PT vs PT*C",
        res,
        ALGEBRAIC_TOL,
        format!("commute up to phase {:.15} rad", wrap_angle(phi)),
    );
    let sq = ops.cpt() * ops.cpt();
    let (phi, res) = proportional_phase(&sq, &ops.ops[0]);
    report.check_le(
        "{1,CPT} projective Z2",
        res,
        ALGEBRAIC_TOL,
        format!("CPT^2 = exp(i*{:.15}) * 1", wrap_angle(phi)),
    );
    Ok(report)
}

/// Orthonormal ±1 eigenbases of CPT after removing the projective phase.
#[derive(Debug, Clone)]
pub struct CptSectorDecomposition {
    pub plus_basis: Vec<CVector>,
    pub minus_basis: Vec<CVector>,
    /// φ/2 where CPT² = e^{iφ}·1; the sectors are those of e^{−iφ/2}·CPT.
    pub half_phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sector {
    pub fn sign(self) -> f64 {
        match self {
            Sector::Plus => 1.0,
            Sector::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Sector::Plus => Sector::Minus,
            Sector::Minus => Sector::Plus,
        }
    }
}

impl std::str::FromStr for Sector {
    type Err = CptError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "+1" => Ok(Sector::Plus),
            "-" | "minus" | "-1" => Ok(Sector::Minus),
            _ => Err(CptError::Parse(format!("unknown sector {s:?}"))),
        }
    }
}

fn gram_schmidt(candidates: impl Iterator<Item = CVector>, threshold: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::new();
    for mut v in candidates {
        let scale = linalg::vec_norm(&v);
        if scale <= threshold {
            continue;
        }
        // two passes keep the basis orthogonal to machine precision
        for _ in 0..2 {
            for b in &basis {
                let overlap = linalg::inner(b, &v);
                v -= b.map(|z| z * overlap);
            }
        }
        let n = linalg::vec_norm(&v);
        if n > threshold * scale.max(1.0) {
            basis.push(v.unscale(n));
        }
    }
    basis
}

impl CptSectorDecomposition {
    pub fn basis(&self, sector: Sector) -> &[CVector] {
        match sector {
            Sector::Plus => &self.plus_basis,
            Sector::Minus => &self.minus_basis,
        }
    }

    pub fn dim(&self) -> usize {
        self.plus_basis.len() + self.minus_basis.len()
    }

    /// Σ |v⟩⟨v| over the sector basis.
    pub fn projector(&self, sector: Sector) -> CMatrix {
        let d = self.dim();
        self.basis(sector)
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, v| acc + linalg::projector(v))
    }
}

/// ±1 eigensectors of `e^{−iφ/2}·CPT` where CPT² = e^{iφ}·1.
pub fn cpt_eigensectors(cpt: &CMatrix) -> Result<CptSectorDecomposition> {
    let d = linalg::require_square(cpt, "CPT")?;
    let sq = cpt * cpt;
    let (phi, res) = proportional_phase(&sq, &linalg::identity(d));
    if res > ALGEBRAIC_TOL {
        return Err(CptError::Structure(format!(
            "CPT^2 is not proportional to the identity (residual {res:.3e})"
        )));
    }
    let half_phase = phi / 2.0;
    let normalized = cpt.map(|z| z * linalg::phase(-half_phase));
    let id = linalg::identity(d);
    let p_plus = (&id + &normalized).scale(0.5);
    let p_minus = (&id - &normalized).scale(0.5);
    let threshold = 1e-8;
    let plus_basis = gram_schmidt(p_plus.column_iter().map(|c| c.into_owned()), threshold);
    let minus_basis = gram_schmidt(p_minus.column_iter().map(|c| c.into_owned()), threshold);
    if plus_basis.len() + minus_basis.len() != d {
        return Err(CptError::Structure(format!(
            "sector dimensions {} + {} do not add up to {d}",
            plus_basis.len(),
            minus_basis.len()
        )));
    }
    Ok(CptSectorDecomposition {
        plus_basis,
        minus_basis,
        half_phase,
    })
}

/// CPT with its projective phase removed, so that its square is exactly
/// the identity up to rounding.
pub fn normalized_cpt(cpt: &CMatrix, half_phase: f64) -> CMatrix {
    cpt.map(|z| z * linalg::phase(-half_phase))
}
