//! CPT on momentum-space test functions, with the continuous momentum
//! replaced by a finite symmetric grid.
//!
//! A test function assigns an amplitude to every internal label (sign of
//! u, doubled s_z) at every grid point. The grid CPT acts pointwise:
//! `(CPTφ)(u, s, p) = e^{iθ^CPT(u,s,p)} φ(−u, −s, −p)`. Continuum delta
//! normalisation has no finite counterpart; its content is carried by two
//! exact statements checked here: each shell block {+|p|, −|p|} is unitary,
//! and every block coupling different shells is identically zero.

use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cpt_operators::{build_cpt, PhaseConvention};
use crate::error::{CptError, Result};
use crate::linalg::{self, CMatrix, CVector, ALGEBRAIC_TOL};
use crate::report::Report;
use crate::spin_spaces::{BasisLabel, LabelKey, Momentum, SpinSpace};

pub const DEFAULT_POINTS_PER_SIDE: usize = 16;
pub const DEFAULT_P_MAX: f64 = 4.0;
/// Gaussian width in momentum units; see [`TestFunction::gaussian`].
pub const DEFAULT_WIDTH: f64 = 0.5;
/// |φ| on the two outermost shells must stay below this fraction of the
/// peak amplitude.
pub const DECAY_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    points: Vec<f64>,
    step: f64,
}

impl Default for MomentumGrid {
    /// 32 points, ±0.25 … ±4, origin excluded.
    fn default() -> Self {
        MomentumGrid::symmetric(DEFAULT_POINTS_PER_SIDE, DEFAULT_P_MAX, false)
            .expect("default grid parameters are valid")
    }
}

impl MomentumGrid {
    /// `points_per_side` points on each side of the origin, spaced by
    /// Δ = p_max / points_per_side, plus 0 when `include_zero`.
    pub fn symmetric(points_per_side: usize, p_max: f64, include_zero: bool) -> Result<Self> {
        if points_per_side == 0 || !(p_max.is_finite() && p_max > 0.0) {
            return Err(CptError::Validation(format!(
                "grid needs points_per_side >= 1 and p_max > 0, got {points_per_side} and {p_max}"
            )));
        }
        let step = p_max / points_per_side as f64;
        let positive: Vec<f64> = (1..=points_per_side).map(|k| k as f64 * step).collect();
        let mut points: Vec<f64> = positive.iter().rev().map(|p| -p).collect();
        if include_zero {
            points.push(0.0);
        }
        points.extend(positive);
        Ok(MomentumGrid { points, step })
    }

    /// Arbitrary strictly increasing points; symmetry is not required here
    /// but is checked by every CPT operation.
    pub fn from_points(points: Vec<f64>, step: f64) -> Result<Self> {
        if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
            return Err(CptError::Validation("grid points must be finite and non-empty".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CptError::Validation("grid points must be strictly increasing".into()));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(CptError::Validation(format!("grid step {step} must be positive")));
        }
        Ok(MomentumGrid { points, step })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn p_max(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.abs()))
    }

    pub fn includes_zero(&self) -> bool {
        self.points.contains(&0.0)
    }

    pub fn index_of(&self, p: f64) -> Option<usize> {
        self.points.iter().position(|&q| q == p)
    }

    /// Index of −p for the point at `i`.
    pub fn mirror_index(&self, i: usize) -> Option<usize> {
        self.index_of(-self.points[i])
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|i| self.mirror_index(i).is_some())
    }

    fn require_symmetric(&self) -> Result<()> {
        match (0..self.len()).find(|&i| self.mirror_index(i).is_none()) {
            None => Ok(()),
            Some(i) => Err(CptError::Structure(format!(
                "grid point {} has no mirror partner",
                self.points[i]
            ))),
        }
    }

    pub fn token(&self, i: usize) -> Momentum {
        let p = self.points[i];
        if p > 0.0 {
            Momentum::Plus
        } else if p < 0.0 {
            Momentum::Minus
        } else {
            Momentum::Zero
        }
    }

    /// Distinct |p| values, ascending.
    pub fn shells(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.points.iter().map(|p| p.abs()).collect();
        m.sort_by(f64::total_cmp);
        m.dedup();
        m
    }

    /// Grid indices with |p| equal to `shell`.
    pub fn shell_indices(&self, shell: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.points[i].abs() == shell).collect()
    }
}

/// Internal labels (sign of u, doubled s_z) carried at every grid point,
/// in canonical order: particle first, then s_z descending.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    pub grid: MomentumGrid,
    pub labels: Vec<(i8, i32)>,
}

impl GridLayout {
    pub fn new(grid: MomentumGrid, mut labels: Vec<(i8, i32)>) -> Result<Self> {
        labels.sort_by(|a, b| b.cmp(a));
        labels.dedup();
        for &(u, sz) in &labels {
            if u == 0 {
                return Err(CptError::Validation("label with u = 0".into()));
            }
            if !labels.contains(&(-u, -sz)) {
                return Err(CptError::Closure(format!("({u:+}, {sz:+}/2)")));
            }
        }
        Ok(GridLayout { grid, labels })
    }

    /// Internal labels of a fixed-|p| space placed on `grid`. The origin is
    /// allowed for massive spaces only: massless labels need a helicity.
    pub fn from_space(space: &SpinSpace, grid: MomentumGrid) -> Result<Self> {
        if !space.massive && grid.includes_zero() {
            return Err(CptError::Domain(
                "p = 0 has no helicity; zero-momentum grids are for massive spaces".into(),
            ));
        }
        GridLayout::new(grid, space.basis.iter().map(|l| (l.u_sign(), l.spin_z2)).collect())
    }

    pub fn dim(&self) -> usize {
        self.labels.len() * self.grid.len()
    }

    /// Grid-major: all labels at point 0, then all at point 1, …
    pub fn index(&self, label: usize, point: usize) -> usize {
        point * self.labels.len() + label
    }

    pub fn label_index(&self, u: i8, spin_z2: i32) -> Option<usize> {
        self.labels.iter().position(|&l| l == (u, spin_z2))
    }

    pub fn key(&self, label: usize, point: usize) -> LabelKey {
        let (u, sz) = self.labels[label];
        (u, sz, self.grid.token(point))
    }

    fn partner(&self, label: usize) -> usize {
        let (u, sz) = self.labels[label];
        self.label_index(-u, -sz).expect("layout is closed under CPT")
    }

    fn validate_phases(&self, phases: &PhaseConvention) -> Result<()> {
        let tokens = [Momentum::Plus, Momentum::Minus, Momentum::Zero];
        let labels: Vec<BasisLabel> = self
            .labels
            .iter()
            .flat_map(|&(u, sz)| {
                tokens
                    .iter()
                    .map(move |&t| BasisLabel::new(Rational64::from_integer(u as i64), sz, t, true))
            })
            .collect();
        let r = phases.admissibility_residual(&labels);
        if r > ALGEBRAIC_TOL {
            return Err(CptError::Admissibility(format!(
                "theta_CPT differs between CPT partners by {r:.3e} rad"
            )));
        }
        Ok(())
    }
}

/// Matrix of the grid CPT: column (l, i) carries e^{iθ^CPT(l, p_i)} at row
/// (cpt(l), index of −p_i).
pub fn grid_cpt_matrix(layout: &GridLayout, phases: &PhaseConvention) -> Result<CMatrix> {
    layout.grid.require_symmetric()?;
    layout.validate_phases(phases)?;
    let d = layout.dim();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..layout.grid.len() {
        let mi = layout.grid.mirror_index(i).expect("grid is symmetric");
        for l in 0..layout.labels.len() {
            let theta = phases.theta_cpt(layout.key(l, i));
            m[(layout.index(layout.partner(l), mi), layout.index(l, i))] = linalg::phase(theta);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub layout: GridLayout,
    /// Amplitudes indexed by [`GridLayout::index`].
    pub values: CVector,
}

impl TestFunction {
    pub fn zeros(layout: &GridLayout) -> Self {
        TestFunction {
            values: CVector::zeros(layout.dim()),
            layout: layout.clone(),
        }
    }

    pub fn get(&self, u: i8, spin_z2: i32, point: usize) -> Option<num_complex::Complex64> {
        let l = self.layout.label_index(u, spin_z2)?;
        (point < self.layout.grid.len()).then(|| self.values[self.layout.index(l, point)])
    }

    pub fn set(&mut self, u: i8, spin_z2: i32, point: usize, value: num_complex::Complex64) -> Result<()> {
        let l = self
            .layout
            .label_index(u, spin_z2)
            .ok_or_else(|| CptError::Lookup(format!("label ({u:+}, {spin_z2:+}/2) not in layout")))?;
        if point >= self.layout.grid.len() {
            return Err(CptError::Lookup(format!("grid index {point} out of range")));
        }
        let idx = self.layout.index(l, point);
        self.values[idx] = value;
        Ok(())
    }

    /// ⟨φ|χ⟩ = Σ conj(φ)χ Δ
    pub fn inner(&self, other: &TestFunction) -> Result<num_complex::Complex64> {
        if self.layout != other.layout {
            return Err(CptError::Shape("test functions live on different layouts".into()));
        }
        Ok(linalg::inner(&self.values, &other.values) * self.layout.grid.step())
    }

    pub fn norm(&self) -> f64 {
        (linalg::vec_norm(&self.values).powi(2) * self.layout.grid.step()).sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(CptError::Validation(format!("cannot normalise a function of norm {n}")));
        }
        self.values.unscale_mut(n);
        Ok(self)
    }

    pub fn scaled(&self, a: num_complex::Complex64) -> Self {
        TestFunction {
            layout: self.layout.clone(),
            values: self.values.map(|z| z * a),
        }
    }

    pub fn add(&self, other: &TestFunction) -> Result<Self> {
        if self.layout != other.layout {
            return Err(CptError::Shape("test functions live on different layouts".into()));
        }
        Ok(TestFunction {
            layout: self.layout.clone(),
            values: &self.values + &other.values,
        })
    }

    /// Normalised Gaussian exp(−(p − p0)²/(2w²)) on one internal label.
    pub fn gaussian(layout: &GridLayout, u: i8, spin_z2: i32, p0: f64, width: f64) -> Result<Self> {
        let mut f = TestFunction::zeros(layout);
        for (i, &p) in layout.grid.points().iter().enumerate() {
            let a = (-(p - p0).powi(2) / (2.0 * width * width)).exp();
            f.set(u, spin_z2, i, linalg::c(a, 0.0))?;
        }
        f.normalized()
    }

    /// Random complex weight per label times a Gaussian of the default
    /// width centred uniformly in [−1, 1], normalised.
    pub fn random_wavepacket<R: Rng + ?Sized>(layout: &GridLayout, rng: &mut R) -> Self {
        let p0 = rng.gen_range(-1.0..=1.0);
        let mut f = TestFunction::zeros(layout);
        for l in 0..layout.labels.len() {
            let w = linalg::c(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            for (i, &p) in layout.grid.points().iter().enumerate() {
                let a = (-(p - p0).powi(2) / (2.0 * DEFAULT_WIDTH * DEFAULT_WIDTH)).exp();
                f.values[layout.index(l, i)] = w * a;
            }
        }
        f.normalized().expect("random weights are almost surely non-zero")
    }

    /// max |φ| on the two outermost shells divided by max |φ| overall.
    pub fn decay_ratio(&self) -> f64 {
        let shells = self.layout.grid.shells();
        let outer: Vec<f64> = shells.iter().rev().take(2).copied().collect();
        let mut peak: f64 = 0.0;
        let mut edge: f64 = 0.0;
        for i in 0..self.layout.grid.len() {
            let on_edge = outer.contains(&self.layout.grid.points()[i].abs());
            for l in 0..self.layout.labels.len() {
                let a = self.values[self.layout.index(l, i)].norm();
                peak = peak.max(a);
                if on_edge {
                    edge = edge.max(a);
                }
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }

    pub fn is_rapidly_decreasing(&self) -> bool {
        self.decay_ratio() < DECAY_RATIO
    }

    pub fn to_doc(&self) -> TestFunctionDoc {
        let mut values = Vec::with_capacity(self.layout.dim());
        for i in 0..self.layout.grid.len() {
            for (l, &(u, sz)) in self.layout.labels.iter().enumerate() {
                let z = self.values[self.layout.index(l, i)];
                values.push((u, sz, i, z.re, z.im));
            }
        }
        TestFunctionDoc {
            grid: GridDoc {
                n: self.layout.grid.len(),
                p_max: self.layout.grid.p_max(),
            },
            values,
        }
    }
}

/// Pointwise grid CPT.
pub fn cpt_on_testfn(phi: &TestFunction, phases: &PhaseConvention) -> Result<TestFunction> {
    let layout = &phi.layout;
    layout.grid.require_symmetric()?;
    layout.validate_phases(phases)?;
    let mut out = TestFunction::zeros(layout);
    for i in 0..layout.grid.len() {
        let mi = layout.grid.mirror_index(i).expect("grid is symmetric");
        for l in 0..layout.labels.len() {
            let theta = phases.theta_cpt(layout.key(l, i));
            out.values[layout.index(l, i)] =
                linalg::phase(theta) * phi.values[layout.index(layout.partner(l), mi)];
        }
    }
    Ok(out)
}

/// Block of the grid CPT on the ±`shell_p` points, rows and columns in the
/// canonical order of `space` (its +p labels sit at +shell_p).
pub fn shell_restriction(
    phases: &PhaseConvention,
    space: &SpinSpace,
    grid: &MomentumGrid,
    shell_p: f64,
) -> Result<CMatrix> {
    let layout = GridLayout::from_space(space, grid.clone())?;
    let full = grid_cpt_matrix(&layout, phases)?;
    let idx = shell_layout_indices(&layout, space, shell_p)?;
    Ok(CMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])]))
}

fn shell_layout_indices(layout: &GridLayout, space: &SpinSpace, shell_p: f64) -> Result<Vec<usize>> {
    if !(shell_p > 0.0) {
        return Err(CptError::Lookup(format!(
            "shell |p| = {shell_p} has no ±p pair; fixed-p spaces need |p| > 0"
        )));
    }
    let grid = &layout.grid;
    let (plus, minus) = match (grid.index_of(shell_p), grid.index_of(-shell_p)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(CptError::Lookup(format!(
                "shell |p| = {shell_p} is not on the grid"
            )))
        }
    };
    space
        .basis
        .iter()
        .map(|l| {
            let li = layout
                .label_index(l.u_sign(), l.spin_z2)
                .ok_or_else(|| CptError::Lookup(format!("{l} not in the layout")))?;
            let point = match l.p {
                Momentum::Plus => plus,
                Momentum::Minus => minus,
                Momentum::Zero => {
                    return Err(CptError::Lookup(format!("{l} has no momentum direction")))
                }
            };
            Ok(layout.index(li, point))
        })
        .collect()
}

/// Checks an operator on the grid for exact block structure over shells
/// and unitarity of every shell block. Locates the first offending entry.
pub fn shell_structure_report(op: &CMatrix, layout: &GridLayout) -> Result<Report> {
    let d = layout.dim();
    if op.shape() != (d, d) {
        return Err(CptError::Shape(format!(
            "operator is {}x{}, layout has dimension {d}",
            op.nrows(),
            op.ncols()
        )));
    }
    let grid = &layout.grid;
    let shell_of: Vec<f64> = (0..d)
        .map(|k| grid.points()[k / layout.labels.len()].abs())
        .collect();
    let mut report = Report::new("momentum", 0);

    let mut worst: f64 = 0.0;
    let mut first: Option<(usize, usize)> = None;
    for c in 0..d {
        for r in 0..d {
            if shell_of[r] != shell_of[c] {
                let a = op[(r, c)].norm();
                if a != 0.0 && first.is_none() {
                    first = Some((r, c));
                }
                worst = worst.max(a);
            }
        }
    }
    let where_ = match first {
        None => "all off-shell entries exactly zero".to_string(),
        Some((r, c)) => {
            let n = layout.labels.len();
            let (lr, pr) = (layout.labels[r % n], grid.points()[r / n]);
            let (lc, pc) = (layout.labels[c % n], grid.points()[c / n]);
            format!(
                "first non-zero off-shell entry at row {r} (u{:+}, sz {:+}/2, p {pr}) col {c} (u{:+}, sz {:+}/2, p {pc})",
                lr.0, lr.1, lc.0, lc.1
            )
        }
    };
    report.check_le("no shell mixing", worst, 0.0, where_);

    let mut block_worst: f64 = 0.0;
    for shell in grid.shells() {
        let idx: Vec<usize> = (0..d).filter(|&k| shell_of[k] == shell).collect();
        let block = CMatrix::from_fn(idx.len(), idx.len(), |r, c| op[(idx[r], idx[c])]);
        block_worst = block_worst.max(linalg::unitarity_residual(&block));
    }
    report.check_le(
        "shell blocks unitary",
        block_worst,
        ALGEBRAIC_TOL,
        format!("{} shells", grid.shells().len()),
    );
    Ok(report)
}

/// Builds the grid CPT for `space` on `grid` and checks its shell structure.
pub fn no_shell_mixing_check(
    phases: &PhaseConvention,
    space: &SpinSpace,
    grid: &MomentumGrid,
) -> Result<Report> {
    let layout = GridLayout::from_space(space, grid.clone())?;
    shell_structure_report(&grid_cpt_matrix(&layout, phases)?, &layout)
}

/// Worst entry-wise difference between each shell block and the fixed-p
/// CPT of `space`.
pub fn shell_agreement(phases: &PhaseConvention, space: &SpinSpace, grid: &MomentumGrid) -> Result<f64> {
    let fixed = build_cpt(space, phases)?;
    let mut worst: f64 = 0.0;
    for shell in grid.shells().into_iter().filter(|&s| s > 0.0) {
        let block = shell_restriction(phases, space, grid, shell)?;
        worst = worst.max(linalg::max_abs_diff(&block, &fixed));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDoc {
    pub n: usize,
    pub p_max: f64,
}

/// `{grid: {n, p_max}, values: [(u_sign, spin_z_times_2, grid_index, re, im)]}`.
/// An odd `n` means the origin is included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionDoc {
    pub grid: GridDoc,
    pub values: Vec<(i8, i32, usize, f64, f64)>,
}

impl TestFunctionDoc {
    pub fn to_testfn(&self) -> Result<TestFunction> {
        let n = self.grid.n;
        let grid = MomentumGrid::symmetric(n / 2, self.grid.p_max, n % 2 == 1)?;
        let labels = self.values.iter().map(|v| (v.0, v.1)).collect();
        let layout = GridLayout::new(grid, labels)?;
        let mut f = TestFunction::zeros(&layout);
        let mut seen = std::collections::BTreeSet::new();
        for &(u, sz, i, re, im) in &self.values {
            if !seen.insert((u, sz, i)) {
                return Err(CptError::Validation(format!(
                    "duplicate entry for ({u:+}, {sz:+}/2) at grid index {i}"
                )));
            }
            if i >= n {
                return Err(CptError::Validation(format!("grid index {i} out of range (n = {n})")));
            }
            f.set(u, sz, i, linalg::c(re, im))?;
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("test function serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CptError::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{domain, stream_rng};
    use crate::spin_spaces::{massive_spin_s_space, massless_allowed_states, EmbeddingMode, Spin};

    fn half() -> SpinSpace {
        massive_spin_s_space(Spin::half(), EmbeddingMode::Combinatorial).unwrap()
    }

    #[test]
    fn default_grid_shape() {
        let g = MomentumGrid::default();
        assert_eq!(g.len(), 32);
        assert_eq!(g.step(), 0.25);
        assert_eq!(g.points()[0], -4.0);
        assert_eq!(g.points()[31], 4.0);
        assert!(!g.includes_zero());
        assert!(g.is_symmetric());
        assert_eq!(g.shells().len(), 16);
        let z = MomentumGrid::symmetric(4, 1.0, true).unwrap();
        assert_eq!(z.len(), 9);
        assert_eq!(z.mirror_index(4), Some(4));
        assert!(MomentumGrid::from_points(vec![1.0, 0.5], 0.5).is_err());
    }

    #[test]
    fn zero_momentum_only_for_massive() {
        let grid = MomentumGrid::symmetric(4, 1.0, true).unwrap();
        let ml = massless_allowed_states(Spin::half(), EmbeddingMode::Combinatorial).unwrap();
        assert!(matches!(GridLayout::from_space(&ml, grid.clone()), Err(CptError::Domain(_))));
        assert!(GridLayout::from_space(&half(), grid).is_ok());
    }

    #[test]
    fn point_support_maps_to_partner() {
        let layout = GridLayout::from_space(&half(), MomentumGrid::default()).unwrap();
        let mut f = TestFunction::zeros(&layout);
        let i = layout.grid.index_of(1.5).unwrap();
        f.set(1, 1, i, linalg::ONE).unwrap();
        let g = cpt_on_testfn(&f, &PhaseConvention::zero()).unwrap();
        let mi = layout.grid.index_of(-1.5).unwrap();
        assert_eq!(g.get(-1, -1, mi), Some(linalg::ONE));
        assert_eq!(linalg::vec_norm(&g.values), 1.0);
        assert_eq!(cpt_on_testfn(&g, &PhaseConvention::zero()).unwrap(), f);
    }

    #[test]
    fn gaussian_is_mirrored() {
        let layout = GridLayout::from_space(&half(), MomentumGrid::default()).unwrap();
        let f = TestFunction::gaussian(&layout, 1, 1, 0.75, DEFAULT_WIDTH).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-12);
        assert!(f.is_rapidly_decreasing(), "{}", f.decay_ratio());
        let g = cpt_on_testfn(&f, &PhaseConvention::zero()).unwrap();
        let mirrored = TestFunction::gaussian(&layout, -1, -1, -0.75, DEFAULT_WIDTH).unwrap();
        assert!(linalg::vec_norm(&(&g.values - &mirrored.values)) < 1e-15);
        // width 1 on the default grid does not decay fast enough
        let wide = TestFunction::gaussian(&layout, 1, 1, 0.0, 1.0).unwrap();
        assert!(!wide.is_rapidly_decreasing());
    }

    #[test]
    fn asymmetric_grid_is_rejected() {
        let grid = MomentumGrid::from_points(vec![-1.0, 0.5, 1.0], 0.5).unwrap();
        let layout = GridLayout::from_space(&half(), grid.clone()).unwrap();
        let f = TestFunction::zeros(&layout);
        assert!(matches!(cpt_on_testfn(&f, &PhaseConvention::zero()), Err(CptError::Structure(_))));
        assert!(matches!(
            grid_cpt_matrix(&layout, &PhaseConvention::zero()),
            Err(CptError::Structure(_))
        ));
    }

    #[test]
    fn shell_block_zero_phases_is_anti_diagonal() {
        let grid = MomentumGrid::default();
        let block = shell_restriction(&PhaseConvention::zero(), &half(), &grid, 2.0).unwrap();
        let expected = CMatrix::from_fn(8, 8, |r, c| if r + c == 7 { linalg::ONE } else { linalg::ZERO });
        assert_eq!(block, expected);
        assert!(matches!(
            shell_restriction(&PhaseConvention::zero(), &half(), &grid, 2.1),
            Err(CptError::Lookup(_))
        ));
    }

    #[test]
    fn random_phase_blocks_match_fixed_p() {
        let space = massive_spin_s_space(Spin::from_twice(2).unwrap(), EmbeddingMode::Combinatorial).unwrap();
        let grid = MomentumGrid::default();
        for i in 0..10 {
            let phases = PhaseConvention::random_admissible(&space, &mut stream_rng(1, domain::PHASES, i));
            assert_eq!(shell_agreement(&phases, &space, &grid).unwrap(), 0.0);
            let r = no_shell_mixing_check(&phases, &space, &grid).unwrap();
            assert!(r.passed(), "{}", r.to_json());
        }
    }

    #[test]
    fn matrix_and_pointwise_actions_agree() {
        let space = half();
        let layout = GridLayout::from_space(&space, MomentumGrid::default()).unwrap();
        let phases = PhaseConvention::random_admissible(&space, &mut stream_rng(2, domain::PHASES, 0));
        let m = grid_cpt_matrix(&layout, &phases).unwrap();
        let f = TestFunction::random_wavepacket(&layout, &mut stream_rng(2, domain::MOMENTUM, 0));
        let g = cpt_on_testfn(&f, &phases).unwrap();
        // the two forms read θ^CPT at CPT partners, equal up to rounding of
        // the admissible angles
        let r = linalg::vec_norm(&(&m * &f.values - &g.values));
        assert!(r < ALGEBRAIC_TOL, "{r}");
        let zero = grid_cpt_matrix(&layout, &PhaseConvention::zero()).unwrap();
        let g0 = cpt_on_testfn(&f, &PhaseConvention::zero()).unwrap();
        assert_eq!(&zero * &f.values, g0.values);
    }

    #[test]
    fn corrupted_operator_is_located() {
        let layout = GridLayout::from_space(&half(), MomentumGrid::default()).unwrap();
        let mut m = grid_cpt_matrix(&layout, &PhaseConvention::zero()).unwrap();
        m[(0, 20)] = linalg::c(1e-3, 0.0);
        let r = shell_structure_report(&m, &layout).unwrap();
        let c = r.check("no shell mixing").unwrap();
        assert!(!c.pass);
        assert!(c.notes.contains("row 0") && c.notes.contains("col 20"), "{}", c.notes);
    }

    #[test]
    fn doc_round_trip() {
        let layout = GridLayout::from_space(&half(), MomentumGrid::default()).unwrap();
        let f = TestFunction::random_wavepacket(&layout, &mut stream_rng(3, domain::MOMENTUM, 0));
        let doc = f.to_doc();
        assert_eq!(doc.grid, GridDoc { n: 32, p_max: 4.0 });
        let back = TestFunctionDoc::from_json(&doc.to_json()).unwrap().to_testfn().unwrap();
        assert_eq!(back, f);
    }
}
