use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{CptError, Result};

/// A spin quantum number, stored as the integer `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    /// `2s` must be at least 1: the construction needs one primitive.
    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(CptError::Domain(
                "spin must be positive (2s >= 1 primitives)".into(),
            ));
        }
        Ok(Spin { twice })
    }

    pub fn half() -> Self {
        Spin { twice: 1 }
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    /// Number of spin-1/2 primitives, `2s`.
    pub fn primitives(self) -> usize {
        self.twice as usize
    }

    /// `2s + 1`
    pub fn multiplicity(self) -> usize {
        self.twice as usize + 1
    }

    pub fn as_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }
}

impl FromStr for Spin {
    type Err = CptError;

    /// Accepts `"n"` or `"n/2"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || CptError::Parse(format!("cannot parse spin {s:?}; expected \"n\" or \"n/2\""));
        let twice = match s.split_once('/') {
            Some((num, "2")) => num.trim().parse::<u32>().map_err(|_| bad())?,
            Some(_) => return Err(bad()),
            None => s
                .parse::<u32>()
                .map_err(|_| bad())?
                .checked_mul(2)
                .ok_or_else(bad)?,
        };
        Spin::from_twice(twice)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Direction token of the momentum along the quantisation axis. `Zero`
/// only occurs on momentum grids that include the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Momentum {
    #[serde(rename = "+p")]
    Plus,
    #[serde(rename = "-p")]
    Minus,
    #[serde(rename = "0")]
    Zero,
}

impl Momentum {
    pub fn flipped(self) -> Self {
        match self {
            Momentum::Plus => Momentum::Minus,
            Momentum::Minus => Momentum::Plus,
            Momentum::Zero => Momentum::Zero,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Momentum::Plus => 1,
            Momentum::Minus => -1,
            Momentum::Zero => 0,
        }
    }
}

/// Generalised basis ket |u, s_z, p⟩.
///
/// Only the sign of `u` enters the CPT action; its magnitude is carried
/// along untouched.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub u: Rational64,
    /// Twice the spin projection.
    pub spin_z2: i32,
    pub p: Momentum,
    pub massive: bool,
}

/// Phase conventions are keyed by the sign of `u`, the spin projection and
/// the momentum token.
pub type LabelKey = (i8, i32, Momentum);

impl BasisLabel {
    pub fn new(u: Rational64, spin_z2: i32, p: Momentum, massive: bool) -> Self {
        BasisLabel { u, spin_z2, p, massive }
    }

    pub fn is_particle(&self) -> bool {
        self.u > Rational64::from_integer(0)
    }

    pub fn u_sign(&self) -> i8 {
        if self.u > Rational64::from_integer(0) {
            1
        } else if self.u < Rational64::from_integer(0) {
            -1
        } else {
            0
        }
    }

    pub fn key(&self) -> LabelKey {
        (self.u_sign(), self.spin_z2, self.p)
    }

    /// C: u → −u
    pub fn charge_flipped(&self) -> Self {
        BasisLabel { u: -self.u, ..self.clone() }
    }

    /// PT: (s_z, p) → (−s_z, −p)
    pub fn pt_flipped(&self) -> Self {
        BasisLabel {
            spin_z2: -self.spin_z2,
            p: self.p.flipped(),
            ..self.clone()
        }
    }

    /// CPT: (u, s_z, p) → (−u, −s_z, −p)
    pub fn cpt_flipped(&self) -> Self {
        self.charge_flipped().pt_flipped()
    }

    /// sign(s_z)·sign(p); `None` when either factor vanishes.
    pub fn helicity(&self) -> Option<i32> {
        let h = self.spin_z2.signum() * self.p.sign();
        (h != 0).then_some(h)
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let u = if self.u_sign() >= 0 { "+u" } else { "-u" };
        let sz = if self.spin_z2 % 2 == 0 {
            format!("{:+}", self.spin_z2 / 2)
        } else {
            format!("{:+}/2", self.spin_z2)
        };
        let p = match self.p {
            Momentum::Plus => "+p",
            Momentum::Minus => "-p",
            Momentum::Zero => "0",
        };
        write!(f, "|{u},{sz},{p}>")
    }
}
