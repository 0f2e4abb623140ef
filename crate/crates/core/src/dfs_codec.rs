//! Codes on a single CPT eigensector. CPT acts on every codeword as the
//! same sign, so any superposition of codewords is itself a CPT eigenstate
//! and carries no frameness: Alice and Bob need no shared matter/antimatter
//! convention to exchange it.

use num_complex::Complex64;
use rand::Rng;

use crate::cpt_operators::{cpt_eigensectors, normalized_cpt, Sector};
use crate::error::{CptError, Result};
use crate::linalg::{self, CMatrix, CVector, ALGEBRAIC_TOL, SPECTRAL_TOL};
use crate::report::Report;
use crate::resource_theory::{is_g_covariant, GroupRep, QuantumChannel};
use crate::seeding::{domain, stream_rng};
use crate::spin_spaces::SpinSpace;

#[derive(Debug, Clone)]
pub struct DfsCode {
    pub sector: Sector,
    /// Orthonormal eigenbasis of the sector.
    pub codewords: Vec<CVector>,
    pub logical_dim: usize,
    /// CPT with its projective phase removed, A² = 1.
    pub cpt: CMatrix,
}

impl DfsCode {
    /// log₂ d logical qubits; not rounded to an integer.
    pub fn capacity(&self) -> f64 {
        (self.logical_dim as f64).log2()
    }

    pub fn physical_dim(&self) -> usize {
        self.cpt.nrows()
    }

    /// Projector onto the code space.
    pub fn projector(&self) -> CMatrix {
        let d = self.physical_dim();
        self.codewords
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, c| acc + linalg::projector(c))
    }

    /// {1, A} acting on the physical space.
    pub fn rep(&self) -> Result<GroupRep> {
        GroupRep::z2("CPT", self.cpt.clone())
    }
}

pub fn build_code(space: &SpinSpace, cpt: &CMatrix, sector: Sector) -> Result<DfsCode> {
    if cpt.shape() != (space.dim(), space.dim()) {
        return Err(CptError::Shape(format!(
            "CPT is {}x{}, space has dimension {}",
            cpt.nrows(),
            cpt.ncols(),
            space.dim()
        )));
    }
    let dec = cpt_eigensectors(cpt)?;
    let codewords = dec.basis(sector).to_vec();
    if codewords.is_empty() {
        return Err(CptError::Structure(format!("CPT sector {sector:?} is empty")));
    }
    let a = normalized_cpt(cpt, dec.half_phase);
    for c in &codewords {
        let r = linalg::vec_norm(&(&a * c - c.scale(sector.sign())));
        if r > ALGEBRAIC_TOL {
            return Err(CptError::Structure(format!(
                "codeword is not a CPT eigenvector (residual {r:.3e})"
            )));
        }
    }
    Ok(DfsCode {
        sector,
        logical_dim: codewords.len(),
        codewords,
        cpt: a,
    })
}

/// Σ_j α_j |c_j⟩
pub fn encode(message: &CVector, code: &DfsCode) -> Result<CVector> {
    if message.len() != code.logical_dim {
        return Err(CptError::Validation(format!(
            "message has {} amplitudes, code has logical dimension {}",
            message.len(),
            code.logical_dim
        )));
    }
    let n = linalg::vec_norm(message);
    if (n - 1.0).abs() > SPECTRAL_TOL {
        return Err(CptError::Validation(format!("message has norm {n}, expected 1")));
    }
    Ok(code
        .codewords
        .iter()
        .zip(message.iter())
        .fold(CVector::zeros(code.physical_dim()), |acc, (c, a)| acc + c.map(|z| z * a)))
}

/// (⟨c_j|state⟩ for each j, norm of the part outside the code space)
pub fn decode(state: &CVector, code: &DfsCode) -> Result<(CVector, f64)> {
    if state.len() != code.physical_dim() {
        return Err(CptError::Shape(format!(
            "state has {} components, code lives in C^{}",
            state.len(),
            code.physical_dim()
        )));
    }
    let message = CVector::from_iterator(
        code.logical_dim,
        code.codewords.iter().map(|c| linalg::inner(c, state)),
    );
    let inside = code
        .codewords
        .iter()
        .zip(message.iter())
        .fold(CVector::zeros(code.physical_dim()), |acc, (c, a)| acc + c.map(|z| z * a));
    Ok((message, linalg::vec_norm(&(state - inside))))
}

/// Uniform-in-the-cube complex amplitudes, normalised.
pub fn random_message<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_iterator(
            dim,
            (0..dim).map(|_| linalg::c(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))),
        );
        let n = linalg::vec_norm(&v);
        if n > 1e-6 {
            return v.unscale(n);
        }
    }
}

/// ⟨ψ|𝓔(|ψ⟩⟨ψ|)|ψ⟩ = Σ_k |⟨ψ|K_k|ψ⟩|²
pub fn channel_fidelity(channel: &QuantumChannel, psi: &CVector) -> f64 {
    channel
        .kraus()
        .iter()
        .map(|k| linalg::inner(psi, &(k * psi)).norm_sqr())
        .sum()
}

/// |⟨a|b⟩|² for unit vectors.
pub fn fidelity(a: &CVector, b: &CVector) -> f64 {
    linalg::inner(a, b).norm_sqr()
}

#[derive(Debug, Clone)]
pub enum NoiseModel {
    /// ρ → (ρ + AρA)/2
    Twirl,
    /// ρ → UρU† with U = P₊ + εP₋, ε = ±1 drawn per trial.
    Dephase,
    /// With probability p the state is replaced by the maximally mixed
    /// state of the code space.
    Depolarize(f64),
    Custom(QuantumChannel),
}

impl NoiseModel {
    /// The channel whose covariance is checked. For `Dephase` this is the
    /// average over ε.
    pub fn channel(&self, code: &DfsCode) -> Result<QuantumChannel> {
        let d = code.physical_dim();
        match self {
            NoiseModel::Twirl => QuantumChannel::twirl(&code.rep()?),
            NoiseModel::Dephase => {
                let w = std::f64::consts::FRAC_1_SQRT_2;
                QuantumChannel::new(vec![linalg::identity(d).scale(w), sector_sign_unitary(code, -1.0).scale(w)])
            }
            NoiseModel::Depolarize(p) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(CptError::Domain(format!("depolarizing probability {p} outside [0, 1]")));
                }
                let k = code.logical_dim as f64;
                let mut kraus = vec![linalg::identity(d).scale((1.0 - p).sqrt())];
                for c in &code.codewords {
                    for e in 0..d {
                        let mut op = CMatrix::zeros(d, d);
                        op.set_column(e, &c.scale((p / k).sqrt()));
                        kraus.push(op);
                    }
                }
                QuantumChannel::new(kraus)
            }
            NoiseModel::Custom(ch) => Ok(ch.clone()),
        }
    }

    fn name(&self) -> String {
        match self {
            NoiseModel::Twirl => "twirl".into(),
            NoiseModel::Dephase => "dephase".into(),
            NoiseModel::Depolarize(p) => format!("depolarize({p})"),
            NoiseModel::Custom(_) => "custom".into(),
        }
    }
}

/// P_code + ε·P_other, with P_other the complement of the code space.
fn sector_sign_unitary(code: &DfsCode, eps: f64) -> CMatrix {
    let d = code.physical_dim();
    let p = code.projector();
    &p + (linalg::identity(d) - &p).scale(eps)
}

/// A fixed message or a fresh random one per trial.
#[derive(Debug, Clone)]
pub enum MessageSpec {
    Fixed(CVector),
    Random,
}

/// Decode fidelity statistics of encoded messages sent through covariant
/// noise. Per-trial draws come from the DFS stream, random messages from
/// the message stream.
pub fn covariant_noise_trial(
    code: &DfsCode,
    message: &MessageSpec,
    noise: &NoiseModel,
    trials: u64,
    seed: u64,
) -> Result<Report> {
    if trials == 0 {
        return Err(CptError::Validation("trial count must be positive".into()));
    }
    let rep = code.rep()?;
    let channel = noise.channel(code)?;
    let (covariant, cov_res) = is_g_covariant(&channel, &rep, SPECTRAL_TOL)?;
    if !covariant {
        return Err(CptError::Precondition(format!(
            "noise {} is not CPT-covariant (residual {cov_res:.3e})",
            noise.name()
        )));
    }
    let d = code.logical_dim as f64;
    let mut report = Report::new(format!("dfs noise {}", noise.name()), seed);
    report.check_le("noise is covariant", cov_res, SPECTRAL_TOL, "");

    let mut sum = 0.0;
    let mut variance_of_sum = 0.0;
    let mut min_f: f64 = 1.0;
    let mut worst_exact: f64 = 0.0;
    for i in 0..trials {
        let m = match message {
            MessageSpec::Fixed(m) => m.clone(),
            MessageSpec::Random => random_message(code.logical_dim, &mut stream_rng(seed, domain::MESSAGES, i)),
        };
        let psi = encode(&m, code)?;
        let mut rng = stream_rng(seed, domain::DFS, i);
        let f = match noise {
            NoiseModel::Twirl | NoiseModel::Custom(_) => channel_fidelity(&channel, &psi),
            NoiseModel::Dephase => {
                let eps = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let (decoded, _) = decode(&(sector_sign_unitary(code, eps) * &psi), code)?;
                fidelity(&m, &decoded)
            }
            NoiseModel::Depolarize(p) => {
                let exact = channel_fidelity(&channel, &psi);
                worst_exact = worst_exact.max((exact - ((1.0 - p) + p / d)).abs());
                let f = if rng.gen::<f64>() < 1.0 - p {
                    1.0
                } else {
                    let j = rng.gen_range(0..code.logical_dim);
                    m[j].norm_sqr()
                };
                let fourth: f64 = m.iter().map(|a| a.norm_sqr().powi(2)).sum();
                let mean = (1.0 - p) + p / d;
                variance_of_sum += (1.0 - p) + p * fourth / d - mean * mean;
                f
            }
        };
        sum += f;
        min_f = min_f.min(f);
    }
    let n = trials as f64;
    let mean = sum / n;
    match noise {
        NoiseModel::Depolarize(p) => {
            let closed = (1.0 - p) + p / d;
            let sigma = variance_of_sum.max(0.0).sqrt() / n;
            report.check_le(
                "channel fidelity matches closed form",
                worst_exact,
                ALGEBRAIC_TOL,
                format!("(1 - p) + p/d = {closed}"),
            );
            report.check_le(
                "mean fidelity within 3 sigma",
                (mean - closed).abs(),
                3.0 * sigma,
                format!("mean {mean:.6}, closed form {closed:.6}, stderr {sigma:.3e}, {trials} trials"),
            );
        }
        NoiseModel::Custom(_) => {
            report.check_bool(
                "fidelity recorded",
                true,
                format!("mean {mean:.12}, min {min_f:.12}, {trials} trials"),
            );
        }
        _ => {
            report.check_le(
                "fidelity is 1",
                1.0 - min_f,
                ALGEBRAIC_TOL,
                format!("mean {mean:.15}, {trials} trials"),
            );
        }
    }
    Ok(report)
}

/// Parses `"re,im;re,im;…"` into a vector.
pub fn parse_message(text: &str) -> Result<CVector> {
    let amps: Result<Vec<Complex64>> = text
        .split(';')
        .map(|pair| {
            let (re, im) = pair
                .split_once(',')
                .ok_or_else(|| CptError::Parse(format!("amplitude {pair:?} is not \"re,im\"")))?;
            let re: f64 = re.trim().parse().map_err(|_| CptError::Parse(format!("bad real part {re:?}")))?;
            let im: f64 = im.trim().parse().map_err(|_| CptError::Parse(format!("bad imaginary part {im:?}")))?;
            Ok(linalg::c(re, im))
        })
        .collect();
    Ok(CVector::from_vec(amps?))
}
