//! Basis labels and Bargmann-Wigner state spaces at fixed |p|.
//!
//! A spin-`s` particle is built from `2s` spin-1/2 primitives that share
//! the same charge sign and momentum token. The basis of every space is
//! kept in one canonical order:
//!
//! 1. particle sector (`u > 0`) before antiparticle sector,
//! 2. within a sector, `+p` before `−p`,
//! 3. within that, spin projection descending.
//!
//! With this order the zero-phase CPT operator is exactly the matrix with
//! ones on the anti-diagonal.
//!
//! When explicit embedding is requested, each label also carries a vector
//! in `C⁴ ⊗ (C²)^{⊗2s}`: the first factor picks the (charge sign, momentum
//! token) sector in the order `(+u,+p), (+u,−p), (−u,+p), (−u,−p)`, the
//! remaining factors hold the symmetric Dicke state of the primitives.

pub mod dicke;
pub mod dirac;
pub mod labels;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{CptError, Result};
use crate::linalg::{self, CMatrix, MatrixDoc};

pub use dicke::{chirality_operators, dicke_state, dicke_reduction_report, DickeIndex};
pub use dirac::{gamma_matrices, helicity_residual, massless_bispinor, GammaMatrices};
pub use labels::{BasisLabel, LabelKey, Momentum, Spin};

/// Default cap on `2s` for explicit tensor embeddings.
pub const DEFAULT_MAX_PRIMITIVES: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingMode {
    /// Labels only; works for any spin.
    Combinatorial,
    /// Labels plus explicit vectors, for `2s <= max_primitives`.
    Explicit { max_primitives: u32 },
}

impl EmbeddingMode {
    pub fn explicit() -> Self {
        EmbeddingMode::Explicit {
            max_primitives: DEFAULT_MAX_PRIMITIVES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSpace {
    pub spin: Spin,
    pub massive: bool,
    pub basis: Vec<BasisLabel>,
    /// Column `j` is the embedded state of `basis[j]`.
    pub embedding: Option<CMatrix>,
}

const SECTORS: [(i64, Momentum); 4] = [
    (1, Momentum::Plus),
    (1, Momentum::Minus),
    (-1, Momentum::Plus),
    (-1, Momentum::Minus),
];

fn sector_index(label: &BasisLabel) -> usize {
    let charge = if label.is_particle() { 0 } else { 2 };
    let mom = if label.p == Momentum::Minus { 1 } else { 0 };
    charge + mom
}

impl SpinSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, label: &BasisLabel) -> Option<usize> {
        self.basis.iter().position(|l| l == label)
    }

    pub fn index_of_key(&self, key: LabelKey) -> Option<usize> {
        self.basis.iter().position(|l| l.key() == key)
    }

    /// A space over an arbitrary label set, checked against the label
    /// invariants but not against any closure property.
    pub fn from_labels(spin: Spin, massive: bool, basis: Vec<BasisLabel>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for l in &basis {
            if !seen.insert(l.key()) {
                return Err(CptError::Validation(format!("{l} appears twice in the basis")));
            }
            if l.spin_z2.unsigned_abs() > spin.twice() || (l.spin_z2 - spin.twice() as i32) % 2 != 0 {
                return Err(CptError::Validation(format!(
                    "{l} has a spin projection incompatible with s = {spin}"
                )));
            }
            if l.massive != massive {
                return Err(CptError::Validation(format!(
                    "{l} has the wrong mass flag for this space"
                )));
            }
            if !massive && l.helicity().is_none() {
                return Err(CptError::Validation(format!(
                    "massless label {l} has no definite helicity"
                )));
            }
        }
        Ok(SpinSpace {
            spin,
            massive,
            basis,
            embedding: None,
        })
    }

    /// Canonical labels for the given spin projections (doubled, descending)
    /// in each of the four sectors.
    fn canonical(massive: bool, projections: &[i32], u: Rational64) -> Vec<BasisLabel> {
        SECTORS
            .iter()
            .flat_map(|&(sign, p)| {
                projections
                    .iter()
                    .map(move |&sz| BasisLabel::new(u * Rational64::from_integer(sign), sz, p, massive))
            })
            .collect()
    }

    fn embed(&mut self, max_primitives: u32) -> Result<()> {
        let n = self.spin.primitives();
        if self.spin.twice() > max_primitives {
            return Err(CptError::Capacity(format!(
                "explicit embedding of 2s = {n} primitives exceeds the cap of {max_primitives}"
            )));
        }
        let spin_dim = 1usize << n;
        let mut cols = CMatrix::zeros(4 * spin_dim, self.dim());
        for (j, label) in self.basis.iter().enumerate() {
            let k = (self.spin.twice() as i32 - label.spin_z2) / 2;
            let dicke = dicke_state(n, k as usize)?;
            let offset = sector_index(label) * spin_dim;
            cols.view_mut((offset, j), (spin_dim, 1)).copy_from(&dicke);
        }
        self.embedding = Some(cols);
        Ok(())
    }

    /// Gram matrix of the embedded states, if present.
    pub fn embedding_gram(&self) -> Option<CMatrix> {
        self.embedding.as_ref().map(|e| e.adjoint() * e)
    }
}

/// The eight primitive spin-1/2 states |±u, ±1/2, ±p⟩.
pub fn massive_primitive_basis() -> SpinSpace {
    massive_spin_s_space(Spin::half(), EmbeddingMode::explicit())
        .expect("spin 1/2 is within every cap")
}

/// 4(2s+1) labels of a massive spin-`s` particle/antiparticle at ±p.
pub fn massive_spin_s_space(spin: Spin, mode: EmbeddingMode) -> Result<SpinSpace> {
    let projections: Vec<i32> = (0..=spin.twice())
        .map(|k| spin.twice() as i32 - 2 * k as i32)
        .collect();
    let mut space = SpinSpace {
        spin,
        massive: true,
        basis: SpinSpace::canonical(true, &projections, Rational64::from_integer(1)),
        embedding: None,
    };
    if let EmbeddingMode::Explicit { max_primitives } = mode {
        space.embed(max_primitives)?;
    }
    Ok(space)
}

/// Whether every primitive of `dicke_state(2s, k)` is left in a definite
/// local chirality. In explicit mode this is decided by partial trace, in
/// combinatorial mode from the closed-form single-site weights.
fn locally_chiral(spin: Spin, k: usize, mode: EmbeddingMode) -> Result<bool> {
    let n = spin.primitives();
    match mode {
        EmbeddingMode::Explicit { max_primitives } if spin.twice() <= max_primitives => {
            let rho1 = dicke::dicke_reduced_state(n, k)?;
            Ok(dicke::eigenstate_residual(&dicke::local_chirality(), &rho1) <= linalg::ALGEBRAIC_TOL)
        }
        EmbeddingMode::Explicit { max_primitives } => Err(CptError::Capacity(format!(
            "explicit embedding of 2s = {n} primitives exceeds the cap of {max_primitives}"
        ))),
        EmbeddingMode::Combinatorial => {
            let (up, down) = DickeIndex::new(n, k)?.single_site_weights();
            Ok(up == 0.0 || down == 0.0)
        }
    }
}

/// The eight massless states that keep every primitive's chirality
/// definite: {particle, antiparticle} × {+p, −p} × {s_z = ±s}.
pub fn massless_allowed_states(spin: Spin, mode: EmbeddingMode) -> Result<SpinSpace> {
    let mut projections = Vec::new();
    for k in 0..=spin.primitives() {
        if locally_chiral(spin, k, mode)? {
            projections.push(spin.twice() as i32 - 2 * k as i32);
        }
    }
    let mut space = SpinSpace {
        spin,
        massive: false,
        basis: SpinSpace::canonical(false, &projections, Rational64::from_integer(1)),
        embedding: None,
    };
    if let EmbeddingMode::Explicit { max_primitives } = mode {
        space.embed(max_primitives)?;
    }
    Ok(space)
}

/// E = √(|p|² + m²) in natural units.
pub fn energy(mass: f64, momentum: f64) -> Result<f64> {
    if !(mass >= 0.0) || !(momentum >= 0.0) {
        return Err(CptError::Domain(format!(
            "mass and |p| must be non-negative, got m = {mass}, |p| = {momentum}"
        )));
    }
    Ok(mass.hypot(momentum))
}

/// Text export of a space: spin, mass flag, ordered labels and, when
/// present, the embedding matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSpaceDoc {
    pub s: String,
    pub massive: bool,
    pub labels: Vec<BasisLabel>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub embedding: Option<MatrixDoc>,
}

impl SpinSpaceDoc {
    pub fn from_space(space: &SpinSpace) -> Self {
        SpinSpaceDoc {
            s: space.spin.to_string(),
            massive: space.massive,
            labels: space.basis.clone(),
            embedding: space.embedding.as_ref().map(MatrixDoc::from_matrix),
        }
    }

    pub fn to_space(&self) -> Result<SpinSpace> {
        let spin: Spin = self.s.parse()?;
        let mut space = SpinSpace::from_labels(spin, self.massive, self.labels.clone())?;
        space.embedding = self.embedding.as_ref().map(|d| d.to_matrix()).transpose()?;
        Ok(space)
    }
}
