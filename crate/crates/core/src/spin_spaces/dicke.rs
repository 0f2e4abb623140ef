//! Symmetric (Dicke) states of `n` two-level primitives and the chirality
//! bookkeeping used to decide which of them survive for massless
//! particles.
//!
//! Register convention: `|↑⟩` is index 0, `|↓⟩` index 1, site 0 is the most
//! significant bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CptError, Result};
use crate::linalg::{self, CMatrix, CVector, ALGEBRAIC_TOL, DEFAULT_DIM_CAP};
use crate::report::Report;

use super::labels::Spin;

/// Dicke state label: `n` primitives, `k` of them lowered. The total spin
/// projection is `M = n/2 − k`, stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DickeIndex {
    pub n: usize,
    pub k: usize,
}

impl DickeIndex {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(CptError::Domain(format!("k = {k} exceeds n = {n}")));
        }
        Ok(DickeIndex { n, k })
    }

    /// 2M = n − 2k
    pub fn m2(self) -> i32 {
        self.n as i32 - 2 * self.k as i32
    }

    /// Single-site reduced weights `((n−k)/n, k/n)` on `|↑⟩`, `|↓⟩`.
    pub fn single_site_weights(self) -> (f64, f64) {
        let n = self.n as f64;
        ((self.n - self.k) as f64 / n, self.k as f64 / n)
    }

    /// A symmetric state is a product state iff all primitives agree.
    pub fn is_product(self) -> bool {
        self.k == 0 || self.k == self.n
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Equal-amplitude superposition of every `n`-bit string with exactly `k`
/// lowered spins.
pub fn dicke_state(n: usize, k: usize) -> Result<CVector> {
    DickeIndex::new(n, k)?;
    if n >= usize::BITS as usize || (1usize << n) > DEFAULT_DIM_CAP {
        return Err(CptError::Capacity(format!(
            "dicke_state with n = {n} exceeds dimension cap {DEFAULT_DIM_CAP}"
        )));
    }
    let dim = 1usize << n;
    let amp = Complex64::new(1.0 / (binomial(n as u64, k as u64) as f64).sqrt(), 0.0);
    Ok(CVector::from_fn(dim, |i, _| {
        if i.count_ones() as usize == k {
            amp
        } else {
            linalg::ZERO
        }
    }))
}

fn embed_site(op: &CMatrix, site: usize, n: usize) -> CMatrix {
    let id = linalg::identity(2);
    let factors: Vec<&CMatrix> = (0..n).map(|i| if i == site { op } else { &id }).collect();
    linalg::tensor_all(factors, DEFAULT_DIM_CAP).expect("caller bounds n")
}

/// Local chirality on the chirality-relevant two-level factor of one
/// primitive: eigenvalue +1/2 on `|↑⟩`, −1/2 on `|↓⟩`.
pub fn local_chirality() -> CMatrix {
    linalg::diag_real(&[0.5, -0.5])
}

/// Local operators γ⁵ᵢ acting on site `i` of `n` primitives and their sum
/// Γ⁵.
pub fn chirality_operators(n: usize) -> Result<(Vec<CMatrix>, CMatrix)> {
    if n == 0 {
        return Err(CptError::Domain("need at least one primitive".into()));
    }
    if (1usize << n.min(usize::BITS as usize - 1)) > DEFAULT_DIM_CAP {
        return Err(CptError::Capacity(format!(
            "chirality operators on {n} sites exceed the dimension cap"
        )));
    }
    let g = local_chirality();
    let locals: Vec<CMatrix> = (0..n).map(|i| embed_site(&g, i, n)).collect();
    let dim = 1usize << n;
    let total = locals
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, m| acc + m);
    Ok((locals, total))
}

/// Operator exchanging sites `a` and `b` of an `n`-site qubit register.
pub fn transposition(n: usize, a: usize, b: usize) -> CMatrix {
    let dim = 1usize << n;
    let bit = |site: usize| 1usize << (n - 1 - site);
    CMatrix::from_fn(dim, dim, |row, col| {
        let ba = (col & bit(a)) != 0;
        let bb = (col & bit(b)) != 0;
        let mut image = col & !(bit(a) | bit(b));
        if ba {
            image |= bit(b);
        }
        if bb {
            image |= bit(a);
        }
        if row == image {
            linalg::ONE
        } else {
            linalg::ZERO
        }
    })
}

/// Reduced state of site 0 of `dicke_state(n, k)`, by explicit partial trace.
pub fn dicke_reduced_state(n: usize, k: usize) -> Result<CMatrix> {
    let psi = dicke_state(n, k)?;
    let dims = vec![2usize; n];
    linalg::partial_trace(&linalg::projector(&psi), &dims, &[0])
}

/// How far `rho` is from lying inside a single eigenspace of `op`:
/// ‖op·ρ − ⟨op⟩ρ‖_max.
pub fn eigenstate_residual(op: &CMatrix, rho: &CMatrix) -> f64 {
    let tr = linalg::trace(rho);
    let mean = linalg::trace(&(op * rho)) / tr;
    linalg::max_abs_diff(&(op * rho), &rho.map(|z| z * mean))
}

/// The reduced-state weights written with binomials in `s` rather than in
/// the primitive count; defined only for integer `s` and `0 <= k <= s`.
pub fn binomial_in_s_weights(spin: Spin, k: usize) -> Option<(f64, f64)> {
    if !spin.is_integer() {
        return None;
    }
    let s = (spin.twice() / 2) as i64;
    let k = k as i64;
    if k > s {
        return None;
    }
    let choose = |n: i64, r: i64| -> f64 {
        if n < 0 || r < 0 || r > n {
            0.0
        } else {
            binomial(n as u64, r as u64) as f64
        }
    };
    let norm = choose(s, k);
    Some((choose(s - 1, s - k - 1) / norm, choose(s - 1, k - 1) / norm))
}

/// Per-`k` verification that only the extreme symmetric states leave every
/// primitive in a definite local chirality.
///
/// For each `k = 0..=2s` the single-site reduced state of `dicke_state(2s, k)`
/// is computed by partial trace and compared with `diag((n−k)/n, k/n)`; its
/// purity and local-chirality definiteness must both hold iff `k ∈ {0, 2s}`;
/// Γ⁵ must act on the state as `M = s − k`. The closed form written with
/// binomials in `s` is evaluated alongside and any disagreement is noted.
pub fn dicke_reduction_report(spin: Spin, max_primitives: u32) -> Result<Report> {
    let n = spin.primitives();
    if spin.twice() > max_primitives {
        return Err(CptError::Capacity(format!(
            "2s = {n} exceeds the explicit cap of {max_primitives} primitives"
        )));
    }
    let mut report = Report::new(format!("dicke-reduction s={spin}"), 0);
    let (_, gamma_total) = chirality_operators(n)?;
    let local = local_chirality();
    for k in 0..=n {
        let idx = DickeIndex::new(n, k)?;
        let psi = dicke_state(n, k)?;
        let rho1 = dicke_reduced_state(n, k)?;
        let (w_up, w_down) = idx.single_site_weights();
        let oracle = linalg::diag_real(&[w_up, w_down]);
        report.check_le(
            format!("k={k} reduced state"),
            linalg::max_abs_diff(&rho1, &oracle),
            ALGEBRAIC_TOL,
            format!("expected diag({w_up:.6}, {w_down:.6})"),
        );

        let purity = linalg::purity(&rho1);
        let is_pure = (purity - 1.0).abs() <= ALGEBRAIC_TOL;
        let chirality_res = eigenstate_residual(&local, &rho1);
        let is_chiral = chirality_res <= ALGEBRAIC_TOL;
        report.check_bool(
            format!("k={k} purity"),
            is_pure == idx.is_product(),
            format!("purity {purity:.12}; pure={is_pure}"),
        );
        report.check_bool(
            format!("k={k} local chirality eigenstate"),
            is_chiral == idx.is_product(),
            format!("residual {chirality_res:.3e}; eigenstate={is_chiral}"),
        );

        let m = idx.m2() as f64 / 2.0;
        let applied = &gamma_total * &psi;
        let target = psi.scale(m);
        let res = applied
            .iter()
            .zip(target.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let alt_m2 = spin.twice() as i64 - 4 * k as i64;
        report.check_le(
            format!("k={k} total chirality"),
            res,
            ALGEBRAIC_TOL,
            format!(
                "Gamma5 eigenvalue M = s - k = {m}; the M = s - 2k labelling would give {}",
                alt_m2 as f64 / 2.0
            ),
        );

        let literal = match binomial_in_s_weights(spin, k) {
            Some((a, b)) if (a - w_up).abs() < 1e-12 && (b - w_down).abs() < 1e-12 => {
                "binomial-in-s closed form agrees".to_string()
            }
            Some((a, b)) => format!(
                "DISCREPANCY: binomial-in-s closed form gives ({a:.6}, {b:.6}); \
                 replacing s by the primitive count 2s reproduces the partial trace"
            ),
            None => "binomial-in-s closed form undefined for this (s, k)".to_string(),
        };
        report.check_bool(format!("k={k} closed-form comparison"), true, literal);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff};

    #[test]
    fn dicke_examples() {
        let s = 0.5f64.sqrt();
        let d21 = dicke_state(2, 1).unwrap();
        let expected = CVector::from_vec(vec![linalg::ZERO, c(s, 0.0), c(s, 0.0), linalg::ZERO]);
        assert!(linalg::vec_norm(&(d21 - expected)) < 1e-15);
        let d40 = dicke_state(4, 0).unwrap();
        assert_eq!(d40[0], linalg::ONE);
        assert_eq!(d40.iter().filter(|z| z.norm() > 0.0).count(), 1);
        // |↓↑↑⟩ = 4, |↑↓↑⟩ = 2, |↑↑↓⟩ = 1
        let d31 = dicke_state(3, 1).unwrap();
        let a = 1.0 / 3f64.sqrt();
        for i in 0..8 {
            let expected = if [1, 2, 4].contains(&i) { a } else { 0.0 };
            assert!((d31[i] - c(expected, 0.0)).norm() < 1e-15);
        }
        assert!(matches!(dicke_state(2, 3), Err(CptError::Domain(_))));
    }

    #[test]
    fn total_chirality_single_site() {
        let (locals, total) = chirality_operators(1).unwrap();
        assert_eq!(locals.len(), 1);
        assert_eq!(total, locals[0]);
    }

    #[test]
    fn total_chirality_commutes_with_transpositions() {
        let (_, total) = chirality_operators(3).unwrap();
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            let t = transposition(3, a, b);
            assert!(max_abs_diff(&(&t * &total), &(&total * &t)) < 1e-15);
        }
    }

    #[test]
    fn dicke_reduction_examples() {
        let r = dicke_reduced_state(2, 1).unwrap();
        assert!(max_abs_diff(&r, &linalg::diag_real(&[0.5, 0.5])) < 1e-15);
        assert!((linalg::purity(&r) - 0.5).abs() < 1e-15);
        assert!(eigenstate_residual(&local_chirality(), &r) > 0.1);

        let r0 = dicke_reduced_state(2, 0).unwrap();
        assert!((linalg::purity(&r0) - 1.0).abs() < 1e-15);
        assert!(eigenstate_residual(&local_chirality(), &r0) < 1e-15);

        let r31 = dicke_reduced_state(3, 1).unwrap();
        assert!(max_abs_diff(&r31, &linalg::diag_real(&[2.0 / 3.0, 1.0 / 3.0])) < 1e-15);
    }

    #[test]
    fn dicke_reduction_report_passes_and_flags_closed_form() {
        for twice in 1..=6 {
            let spin = Spin::from_twice(twice).unwrap();
            let r = dicke_reduction_report(spin, 8).unwrap();
            assert!(r.passed(), "{}", r.to_json());
        }
        let r = dicke_reduction_report(Spin::from_twice(2).unwrap(), 8).unwrap();
        let note = &r.check("k=1 closed-form comparison").unwrap().notes;
        assert!(note.contains("DISCREPANCY"), "{note}");
        assert!(matches!(
            dicke_reduction_report(Spin::from_twice(9).unwrap(), 8),
            Err(CptError::Capacity(_))
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(16, 8), 12870);
    }
}
