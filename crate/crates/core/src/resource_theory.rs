//! Invariance, covariance and twirling under a finite symmetry group, the
//! consistency of unitary dynamics with the superselection rule, the
//! failure of that consistency for anti-unitary representations, and the
//! frameness measures τ and the alignment rate.
//!
//! Residuals use the max-abs entry norm throughout.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cpt_operators::{proportional_phase, Sector};
use crate::error::{CptError, Result};
use crate::linalg::{self, CMatrix, CVector, ALGEBRAIC_TOL, SPECTRAL_TOL};
use crate::report::Report;

/// Group table of the representation. Both groups used here have a
/// product given by XOR of element indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Z2,
    Klein,
}

impl GroupKind {
    pub fn order(self) -> usize {
        match self {
            GroupKind::Z2 => 2,
            GroupKind::Klein => 4,
        }
    }
}

/// One representation operator. An anti-unitary element is `U·K_B`, where
/// `K_B` conjugates coefficients in the declared orthonormal basis `B`
/// (columns of `basis`): `K_B ψ = B·conj(B†ψ)`.
#[derive(Debug, Clone)]
pub struct RepElement {
    pub label: String,
    pub core: CMatrix,
    pub conjugation_basis: Option<CMatrix>,
}

impl RepElement {
    pub fn unitary(label: impl Into<String>, op: CMatrix) -> Self {
        RepElement {
            label: label.into(),
            core: op,
            conjugation_basis: None,
        }
    }

    pub fn antiunitary(label: impl Into<String>, core: CMatrix, basis: CMatrix) -> Self {
        RepElement {
            label: label.into(),
            core,
            conjugation_basis: Some(basis),
        }
    }

    pub fn is_antiunitary(&self) -> bool {
        self.conjugation_basis.is_some()
    }

    /// Writes the element as `L·K₀^a` with `K₀` conjugation in the
    /// computational basis: `U·K_B = U·B·Bᵀ·K₀`.
    fn normal_form(&self) -> (CMatrix, bool) {
        match &self.conjugation_basis {
            None => (self.core.clone(), false),
            Some(b) => (&self.core * b * b.transpose(), true),
        }
    }

    /// T ρ T⁻¹
    pub fn conjugate(&self, rho: &CMatrix) -> CMatrix {
        let (l, anti) = self.normal_form();
        if anti {
            &l * rho.conjugate() * l.adjoint()
        } else {
            &l * rho * l.adjoint()
        }
    }

    /// T ψ
    pub fn apply(&self, psi: &CVector) -> CVector {
        let (l, anti) = self.normal_form();
        if anti {
            l * psi.conjugate()
        } else {
            l * psi
        }
    }
}

/// A (projective) representation of Z₂ or the Klein four-group, element 0
/// being the identity.
#[derive(Debug, Clone)]
pub struct GroupRep {
    pub kind: GroupKind,
    pub elements: Vec<RepElement>,
    /// Global phase ω(g, h) with T(g)T(h) = e^{iω} T(gh), row-major.
    pub cocycle: Vec<f64>,
}

impl GroupRep {
    pub fn new(kind: GroupKind, elements: Vec<RepElement>) -> Result<Self> {
        if elements.len() != kind.order() {
            return Err(CptError::Validation(format!(
                "{kind:?} needs {} elements, got {}",
                kind.order(),
                elements.len()
            )));
        }
        let d = linalg::require_square(&elements[0].core, "representation operator")?;
        for e in &elements {
            if e.core.shape() != (d, d) {
                return Err(CptError::Shape(format!(
                    "operator {} is {}x{}, expected {d}x{d}",
                    e.label,
                    e.core.nrows(),
                    e.core.ncols()
                )));
            }
            let r = linalg::unitarity_residual(&e.core);
            if r > ALGEBRAIC_TOL {
                return Err(CptError::Validation(format!(
                    "operator {} is not unitary (residual {r:.3e})",
                    e.label
                )));
            }
            if let Some(b) = &e.conjugation_basis {
                if b.shape() != (d, d) || linalg::unitarity_residual(b) > ALGEBRAIC_TOL {
                    return Err(CptError::Validation(format!(
                        "conjugation basis of {} is not an orthonormal basis of C^{d}",
                        e.label
                    )));
                }
            }
        }
        if elements[0].is_antiunitary() || linalg::max_abs_diff(&elements[0].core, &linalg::identity(d)) > ALGEBRAIC_TOL {
            return Err(CptError::Validation("element 0 must be the identity".into()));
        }

        let forms: Vec<(CMatrix, bool)> = elements.iter().map(RepElement::normal_form).collect();
        let n = kind.order();
        let mut cocycle = Vec::with_capacity(n * n);
        for g in 0..n {
            for h in 0..n {
                let (lg, ag) = &forms[g];
                let (lh, ah) = &forms[h];
                let (lgh, agh) = &forms[g ^ h];
                if (ag ^ ah) != *agh {
                    return Err(CptError::Validation(format!(
                        "{}*{} = {} mixes unitary and anti-unitary elements",
                        elements[g].label, elements[h].label, elements[g ^ h].label
                    )));
                }
                let product = if *ag { lg * lh.conjugate() } else { lg * lh };
                let (phi, res) = proportional_phase(&product, lgh);
                if res > ALGEBRAIC_TOL {
                    return Err(CptError::Validation(format!(
                        "{}*{} is not proportional to {} (residual {res:.3e})",
                        elements[g].label, elements[h].label, elements[g ^ h].label
                    )));
                }
                cocycle.push(phi);
            }
        }
        Ok(GroupRep {
            kind,
            elements,
            cocycle,
        })
    }

    /// {1, op}
    pub fn z2(label: impl Into<String>, op: CMatrix) -> Result<Self> {
        let d = op.nrows();
        GroupRep::new(
            GroupKind::Z2,
            vec![
                RepElement::unitary("1", linalg::identity(d)),
                RepElement::unitary(label, op),
            ],
        )
    }

    /// {1, U·K_B}
    pub fn z2_antiunitary(label: impl Into<String>, core: CMatrix, basis: CMatrix) -> Result<Self> {
        let d = core.nrows();
        GroupRep::new(
            GroupKind::Z2,
            vec![
                RepElement::unitary("1", linalg::identity(d)),
                RepElement::antiunitary(label, core, basis),
            ],
        )
    }

    /// {1, C, PT, CPT}, all unitary.
    pub fn klein(c: CMatrix, pt: CMatrix, cpt: CMatrix) -> Result<Self> {
        let d = c.nrows();
        GroupRep::new(
            GroupKind::Klein,
            vec![
                RepElement::unitary("1", linalg::identity(d)),
                RepElement::unitary("C", c),
                RepElement::unitary("PT", pt),
                RepElement::unitary("CPT", cpt),
            ],
        )
    }

    pub fn dim(&self) -> usize {
        self.elements[0].core.nrows()
    }

    pub fn has_antiunitary(&self) -> bool {
        self.elements.iter().any(RepElement::is_antiunitary)
    }

    /// Human-readable record of every declared conjugation basis.
    pub fn conjugation_bases(&self) -> String {
        self.elements
            .iter()
            .filter_map(|e| {
                e.conjugation_basis
                    .as_ref()
                    .map(|b| format!("{}: conjugation in basis {}", e.label, format_matrix(b)))
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn require_dim(&self, m: &CMatrix, what: &str) -> Result<()> {
        let d = self.dim();
        if m.shape() != (d, d) {
            return Err(CptError::Shape(format!(
                "{what} is {}x{}, representation acts on C^{d}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    }

    /// max over g of ‖T(g) ρ T(g)⁻¹ − ρ‖_max
    pub fn invariance_residual(&self, rho: &CMatrix) -> Result<f64> {
        self.require_dim(rho, "state")?;
        Ok(self
            .elements
            .iter()
            .map(|e| linalg::max_abs_diff(&e.conjugate(rho), rho))
            .fold(0.0, f64::max))
    }
}

fn format_matrix(m: &CMatrix) -> String {
    let rows: Vec<String> = m
        .row_iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|z| format!("{:.4}{:+.4}i", z.re, z.im)).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Completely positive map in Kraus form, trace preserving within 1e-10.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| CptError::Validation("channel needs at least one Kraus operator".into()))?;
        let d = first.ncols();
        let out = first.nrows();
        if out != d {
            return Err(CptError::Shape("Kraus operators must be square".into()));
        }
        let mut sum = CMatrix::zeros(d, d);
        for k in &kraus {
            if k.shape() != (d, d) {
                return Err(CptError::Shape(format!(
                    "Kraus operator is {}x{}, expected {d}x{d}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            sum += k.adjoint() * k;
        }
        let r = linalg::max_abs_diff(&sum, &linalg::identity(d));
        if r > SPECTRAL_TOL {
            return Err(CptError::Validation(format!(
                "channel is not trace preserving (residual {r:.3e})"
            )));
        }
        Ok(QuantumChannel { kraus })
    }

    pub fn identity(d: usize) -> Self {
        QuantumChannel {
            kraus: vec![linalg::identity(d)],
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        QuantumChannel::new(vec![u])
    }

    /// ρ → (1/|G|) Σ_g T(g) ρ T(g)†
    pub fn twirl(rep: &GroupRep) -> Result<Self> {
        if rep.has_antiunitary() {
            return Err(CptError::Unsupported(
                "twirling over anti-unitary elements is not a linear channel".into(),
            ));
        }
        let w = (1.0 / rep.elements.len() as f64).sqrt();
        QuantumChannel::new(rep.elements.iter().map(|e| e.core.scale(w)).collect())
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.dim();
        if rho.shape() != (d, d) {
            return Err(CptError::Shape(format!(
                "state is {}x{}, channel acts on C^{d}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(self
            .kraus
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k * rho * k.adjoint()))
    }
}

/// (invariant?, residual)
pub fn is_g_invariant(rho: &CMatrix, rep: &GroupRep, tol: f64) -> Result<(bool, f64)> {
    let r = rep.invariance_residual(rho)?;
    Ok((r <= tol, r))
}

/// Densities spanning all d×d matrices: |i⟩⟨i|, and the projectors onto
/// (|i⟩ + |j⟩)/√2 and (|i⟩ + i|j⟩)/√2 for i < j.
pub fn spanning_densities(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        let mut e = CVector::zeros(d);
        e[i] = linalg::ONE;
        out.push(linalg::projector(&e));
        for j in i + 1..d {
            let mut re = CVector::zeros(d);
            re[i] = linalg::c(s, 0.0);
            re[j] = linalg::c(s, 0.0);
            out.push(linalg::projector(&re));
            let mut im = CVector::zeros(d);
            im[i] = linalg::c(s, 0.0);
            im[j] = linalg::c(0.0, s);
            out.push(linalg::projector(&im));
        }
    }
    out
}

/// max over g and spanning densities of ‖T𝓔(ρ)T⁻¹ − 𝓔(TρT⁻¹)‖_max
pub fn is_g_covariant(channel: &QuantumChannel, rep: &GroupRep, tol: f64) -> Result<(bool, f64)> {
    if channel.dim() != rep.dim() {
        return Err(CptError::Shape(format!(
            "channel acts on C^{}, representation on C^{}",
            channel.dim(),
            rep.dim()
        )));
    }
    let mut worst: f64 = 0.0;
    for rho in spanning_densities(rep.dim()) {
        let out = channel.apply(&rho)?;
        for e in &rep.elements[1..] {
            let lhs = e.conjugate(&out);
            let rhs = channel.apply(&e.conjugate(&rho))?;
            worst = worst.max(linalg::max_abs_diff(&lhs, &rhs));
        }
    }
    Ok((worst <= tol, worst))
}

/// Uniform group average (1/|G|) Σ_g T(g) ρ T(g)†.
pub fn twirl(rho: &CMatrix, rep: &GroupRep) -> Result<CMatrix> {
    rep.require_dim(rho, "state")?;
    QuantumChannel::twirl(rep)?.apply(rho)
}

/// Evolves an invariant state under a Hamiltonian commuting with every
/// T(g) and checks that invariance survives at each sampled time.
pub fn unitary_consistency_check(
    rho0: &CMatrix,
    h: &CMatrix,
    t_samples: &[f64],
    rep: &GroupRep,
) -> Result<Report> {
    rep.require_dim(rho0, "initial state")?;
    rep.require_dim(h, "Hamiltonian")?;
    if rep.has_antiunitary() {
        return Err(CptError::Precondition(
            "the consistency check needs a unitary representation".into(),
        ));
    }
    for e in &rep.elements {
        let c = linalg::max_abs(&linalg::commutator(&e.core, h));
        if c > SPECTRAL_TOL {
            return Err(CptError::Precondition(format!(
                "[T({}), H] = {c:.3e} exceeds {SPECTRAL_TOL:e}",
                e.label
            )));
        }
    }
    let r0 = rep.invariance_residual(rho0)?;
    if r0 > SPECTRAL_TOL {
        return Err(CptError::Precondition(format!(
            "initial state is not G-invariant (residual {r0:.3e})"
        )));
    }

    let mut report = Report::new("unitary-consistency", 0);
    let mut worst: f64 = 0.0;
    for (i, &t) in t_samples.iter().enumerate() {
        let rho_t = linalg::evolve(rho0, h, t)?;
        let r = rep.invariance_residual(&rho_t)?;
        worst = worst.max(r);
        report.check_le(
            format!("invariant at sample {i}"),
            r,
            SPECTRAL_TOL,
            format!("t = {t}"),
        );
    }
    report.check_le(
        "max invariance residual",
        worst,
        SPECTRAL_TOL,
        format!("{} samples, initial residual {r0:e}", t_samples.len()),
    );
    Ok(report)
}

/// Initial condition of the anti-unitary demonstration.
#[derive(Debug, Clone)]
pub enum InitialState {
    Pure(CVector),
    Mixed(CMatrix),
}

impl InitialState {
    pub fn density(&self) -> CMatrix {
        match self {
            InitialState::Pure(psi) => linalg::projector(psi),
            InitialState::Mixed(rho) => rho.clone(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            InitialState::Pure(_) => "pure",
            InitialState::Mixed(_) => "mixed",
        }
    }
}

/// Threshold the invariance residual must exceed for the violation to
/// count as exhibited.
pub const VIOLATION_THRESHOLD: f64 = 0.1;

/// Shows that an anti-unitary symmetry commuting with H does not keep an
/// invariant, non-stationary state invariant under e^{−iHt}.
pub fn antiunitary_inconsistency_demo(
    rep: &GroupRep,
    h: &CMatrix,
    initial: &InitialState,
    t: f64,
) -> Result<Report> {
    rep.require_dim(h, "Hamiltonian")?;
    let rho0 = initial.density();
    rep.require_dim(&rho0, "initial state")?;
    linalg::validate_density(&rho0)?;
    if !rep.has_antiunitary() {
        return Err(CptError::Precondition(
            "representation has no anti-unitary element".into(),
        ));
    }
    for e in &rep.elements {
        // T(iH) = −(iH)T  ⇔  T H T⁻¹ = H for anti-linear T
        let c = linalg::max_abs_diff(&e.conjugate(h), h);
        if c > SPECTRAL_TOL {
            return Err(CptError::Precondition(format!(
                "T({}) does not commute with H (residual {c:.3e})",
                e.label
            )));
        }
    }
    let r0 = rep.invariance_residual(&rho0)?;
    if r0 > SPECTRAL_TOL {
        return Err(CptError::Precondition(format!(
            "initial state is not G-invariant (residual {r0:.3e})"
        )));
    }
    let stationary = linalg::max_abs(&linalg::commutator(h, &rho0));
    if stationary <= SPECTRAL_TOL {
        return Err(CptError::DegenerateDemo(format!(
            "initial state commutes with H ([H, rho0] = {stationary:.1e}); no violation is possible"
        )));
    }

    let kind = initial.kind();
    let bases = rep.conjugation_bases();
    let mut report = Report::new("antiunitary-demo", 0);
    report.check_le(
        format!("{kind} initial state invariant"),
        r0,
        ALGEBRAIC_TOL,
        bases.clone(),
    );
    let at_zero = rep.invariance_residual(&linalg::evolve(&rho0, h, 0.0)?)?;
    report.check_le(format!("{kind} residual at t=0"), at_zero, ALGEBRAIC_TOL, "");
    let rho_t = linalg::evolve(&rho0, h, t)?;
    let r = rep.invariance_residual(&rho_t)?;
    report.check_gt(
        format!("{kind} invariance violated at t"),
        r,
        VIOLATION_THRESHOLD,
        format!("t = {t}; {bases}"),
    );
    Ok(report)
}

/// T = complex conjugation in the computational basis of C², H = σᶻ,
/// ψ₀ = (1, 1)/√2; the mixed variant is 0.9|ψ₀⟩⟨ψ₀| + 0.1·I/2.
pub fn standard_antiunitary_demo(t: f64) -> Result<Report> {
    let rep = GroupRep::z2_antiunitary("T", linalg::identity(2), linalg::identity(2))?;
    let h = linalg::pauli_z();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi0 = CVector::from_vec(vec![linalg::c(s, 0.0), linalg::c(s, 0.0)]);
    let mixed = linalg::projector(&psi0).scale(0.9) + linalg::identity(2).scale(0.05);
    let mut report = antiunitary_inconsistency_demo(&rep, &h, &InitialState::Pure(psi0), t)?;
    report.extend(antiunitary_inconsistency_demo(&rep, &h, &InitialState::Mixed(mixed), t)?);
    Ok(report)
}

/// τ = 1 − |Σ_k c_k²| for the coefficients c = V†ψ in the basis given by
/// the columns of V (the computational basis when `None`).
pub fn tau_measure(psi: &CVector, basis_change: Option<&CMatrix>) -> Result<f64> {
    let coeffs = match basis_change {
        None => psi.clone(),
        Some(v) => {
            if v.shape() != (psi.len(), psi.len()) {
                return Err(CptError::Shape(format!(
                    "basis change is {}x{}, state has {} components",
                    v.nrows(),
                    v.ncols(),
                    psi.len()
                )));
            }
            v.adjoint() * psi
        }
    };
    let s: Complex64 = coeffs.iter().map(|z| z * z).sum();
    Ok((1.0 - s.norm()).clamp(0.0, 1.0))
}

/// Bits per copy, or the tagged infinite value for equal sector weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlignmentRate {
    Finite(f64),
    Infinite,
}

impl AlignmentRate {
    pub fn value(self) -> f64 {
        match self {
            AlignmentRate::Finite(r) => r,
            AlignmentRate::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, AlignmentRate::Infinite)
    }
}

impl fmt::Display for AlignmentRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlignmentRate::Finite(r) => write!(f, "{r}"),
            AlignmentRate::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for AlignmentRate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlignmentRate::Finite(r) => s.serialize_f64(*r),
            AlignmentRate::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for AlignmentRate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(r) => Ok(AlignmentRate::Finite(r)),
            Raw::Text(t) if t == "inf" => Ok(AlignmentRate::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad alignment rate {t:?}"))),
        }
    }
}

/// R = −2 log₂|q0 − q1|, q1 = 1 − q0.
///
/// The smaller of the two weights is formed first, so R(q0) and R(1 − q0)
/// coincide bit-for-bit whenever 1 − q0 is itself computed exactly.
pub fn alignment_rate(q0: f64) -> Result<AlignmentRate> {
    if !(0.0..=1.0).contains(&q0) {
        return Err(CptError::Domain(format!("q0 = {q0} is not a probability")));
    }
    let lo = if q0 <= 0.5 { q0 } else { 1.0 - q0 };
    let gap = 1.0 - 2.0 * lo;
    if gap < 1e-15 {
        return Ok(AlignmentRate::Infinite);
    }
    // + 0.0 turns −0.0 at q0 ∈ {0, 1} into 0.0
    Ok(AlignmentRate::Finite(-2.0 * gap.log2() + 0.0))
}

/// ψ = √q0 |+⟩ + √q1 |−⟩ split along the CPT sectors.
#[derive(Debug, Clone)]
pub struct StandardFormResult {
    pub q0: f64,
    pub q1: f64,
    pub plus_part: CVector,
    pub minus_part: CVector,
    /// Set when the projection vanished and `plus_part` is an arbitrary
    /// unit vector of the sector.
    pub plus_absent: bool,
    pub minus_absent: bool,
}

impl StandardFormResult {
    pub fn part(&self, sector: Sector) -> &CVector {
        match sector {
            Sector::Plus => &self.plus_part,
            Sector::Minus => &self.minus_part,
        }
    }
}

const ABSENT_NORM: f64 = 1e-12;

/// Projects onto the ±1 sectors of e^{−iφ/2}·CPT (CPT² = e^{iφ}) via
/// P±ψ = (ψ ± Aψ)/2.
pub fn standard_form(psi: &CVector, cpt: &CMatrix) -> Result<StandardFormResult> {
    let d = linalg::require_square(cpt, "CPT")?;
    if psi.len() != d {
        return Err(CptError::Shape(format!(
            "state has {} components, CPT acts on C^{d}",
            psi.len()
        )));
    }
    let (phi, res) = proportional_phase(&(cpt * cpt), &linalg::identity(d));
    if res > ALGEBRAIC_TOL {
        return Err(CptError::Structure(format!(
            "CPT^2 is not proportional to the identity (residual {res:.3e})"
        )));
    }
    let a = if phi == 0.0 {
        cpt.clone()
    } else {
        cpt.map(|z| z * linalg::phase(-phi / 2.0))
    };
    let a_psi = &a * psi;
    let plus = (psi + &a_psi).scale(0.5);
    let minus = (psi - &a_psi).scale(0.5);
    let n_plus = linalg::vec_norm(&plus);
    let n_minus = linalg::vec_norm(&minus);
    let mut sectors = None;
    let mut unit = |v: CVector, n: f64, sector: Sector| -> Result<(CVector, bool)> {
        if n > ABSENT_NORM {
            return Ok((v.unscale(n), false));
        }
        if sectors.is_none() {
            sectors = Some(crate::cpt_operators::cpt_eigensectors(cpt)?);
        }
        let dec = sectors.as_ref().expect("sectors just computed");
        let fallback = dec
            .basis(sector)
            .first()
            .cloned()
            .unwrap_or_else(|| CVector::zeros(d));
        Ok((fallback, true))
    };
    let (plus_part, plus_absent) = unit(plus, n_plus, Sector::Plus)?;
    let (minus_part, minus_absent) = unit(minus, n_minus, Sector::Minus)?;
    Ok(StandardFormResult {
        q0: n_plus * n_plus,
        q1: n_minus * n_minus,
        plus_part,
        minus_part,
        plus_absent,
        minus_absent,
    })
}

/// √q0 |plus⟩ + √(1 − q0) |minus⟩
pub fn standard_form_state(q0: f64, plus: &CVector, minus: &CVector) -> Result<CVector> {
    if !(0.0..=1.0).contains(&q0) {
        return Err(CptError::Domain(format!("q0 = {q0} is not a probability")));
    }
    if plus.len() != minus.len() {
        return Err(CptError::Shape("sector vectors differ in length".into()));
    }
    Ok(plus.scale(q0.sqrt()) + minus.scale((1.0 - q0).sqrt()))
}

/// The two-level reference system used for the alignment protocol:
/// CPT = σˣ with sectors |±⟩ = (1, ±1)/√2.
pub fn reference_qubit() -> (CMatrix, CVector, CVector) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CVector::from_vec(vec![linalg::c(s, 0.0), linalg::c(s, 0.0)]);
    let minus = CVector::from_vec(vec![linalg::c(s, 0.0), linalg::c(-s, 0.0)]);
    (linalg::pauli_x(), plus, minus)
}
