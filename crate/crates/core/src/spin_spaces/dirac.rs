//! Dirac-representation γ-matrices and the helicity/chirality condition for
//! massless spin-1/2 primitives.

use crate::error::{CptError, Result};
use crate::linalg::{self, CMatrix, CVector, I, ONE, ZERO};

use super::labels::{BasisLabel, Momentum};

/// γ⁰…γ³ in the Dirac representation plus γ⁵ = iγ⁰γ¹γ²γ³.
#[derive(Debug, Clone)]
pub struct GammaMatrices {
    pub gamma: [CMatrix; 4],
    pub gamma5: CMatrix,
}

fn block(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(a);
    m.view_mut((0, 2), (2, 2)).copy_from(b);
    m.view_mut((2, 0), (2, 2)).copy_from(c);
    m.view_mut((2, 2), (2, 2)).copy_from(d);
    m
}

pub fn gamma_matrices() -> GammaMatrices {
    let id = linalg::identity(2);
    let zero = CMatrix::zeros(2, 2);
    let g0 = block(&id, &zero, &zero, &-&id);
    let spatial = |s: CMatrix| block(&zero, &s, &-&s, &zero);
    let g1 = spatial(linalg::pauli_x());
    let g2 = spatial(linalg::pauli_y());
    let g3 = spatial(linalg::pauli_z());
    let gamma5 = (&g0 * &g1 * &g2 * &g3).map(|z| z * I);
    GammaMatrices {
        gamma: [g0, g1, g2, g3],
        gamma5,
    }
}

/// Minkowski metric diag(1, −1, −1, −1).
pub fn metric(mu: usize, nu: usize) -> f64 {
    match (mu, nu) {
        (0, 0) => 1.0,
        (a, b) if a == b => -1.0,
        _ => 0.0,
    }
}

impl GammaMatrices {
    pub fn anticommutator(&self, mu: usize, nu: usize) -> CMatrix {
        &self.gamma[mu] * &self.gamma[nu] + &self.gamma[nu] * &self.gamma[mu]
    }

    /// σ^{αβ} = (i/2)[γ^α, γ^β]
    pub fn sigma(&self, alpha: usize, beta: usize) -> CMatrix {
        linalg::commutator(&self.gamma[alpha], &self.gamma[beta]).map(|z| z * I * 0.5)
    }

    /// Spin operators Σⁱ = diag(σⁱ, σⁱ), i.e. (i/4)εⁱʲᵏ[γʲ, γᵏ].
    pub fn spin(&self, axis: usize) -> CMatrix {
        let (j, k) = match axis {
            1 => (2, 3),
            2 => (3, 1),
            3 => (1, 2),
            _ => panic!("spatial axis must be 1, 2 or 3"),
        };
        linalg::commutator(&self.gamma[j], &self.gamma[k]).map(|z| z * I * 0.5)
    }

    /// Projector ½(1 ± γ⁵); `right = true` selects positive chirality.
    pub fn chirality_projector(&self, right: bool) -> CMatrix {
        let sign = if right { 1.0 } else { -1.0 };
        (linalg::identity(4) + self.gamma5.scale(sign)).scale(0.5)
    }
}

/// Weyl bispinor of a massless spin-1/2 label: spin along z given by the
/// label's projection, chirality equal to its helicity.
pub fn massless_bispinor(label: &BasisLabel) -> Result<CVector> {
    if label.spin_z2.abs() != 1 {
        return Err(CptError::Domain(format!(
            "{label} is not a spin-1/2 primitive label"
        )));
    }
    let h = label.helicity().ok_or_else(|| {
        CptError::Domain(format!("{label} has no defined helicity (p = 0)"))
    })?;
    let chi = if label.spin_z2 > 0 { [ONE, ZERO] } else { [ZERO, ONE] };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let lower = if h > 0 { s } else { -s };
    Ok(CVector::from_vec(vec![
        chi[0] * s,
        chi[1] * s,
        chi[0] * lower,
        chi[1] * lower,
    ]))
}

/// ‖(γ⁵ − Σ·p̂)ψ‖ for a bispinor with momentum along ±z.
pub fn helicity_residual(state: &CVector, p: Momentum) -> Result<f64> {
    if state.len() != 4 {
        return Err(CptError::Shape(format!(
            "bispinor must have 4 components, got {}",
            state.len()
        )));
    }
    let g = gamma_matrices();
    let helicity = match p {
        Momentum::Plus => g.spin(3),
        Momentum::Minus => -g.spin(3),
        Momentum::Zero => {
            return Err(CptError::Domain("helicity undefined at p = 0".into()))
        }
    };
    Ok(linalg::vec_norm(&((&g.gamma5 - helicity) * state)))
}
