//! Atomic levels, transitions and relative-phase labels shared by every module.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Level of the Λ atom. Levels 1 and 2 are the lower pair, 3 the upper level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    One,
    Two,
    Three,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::One, Level::Two, Level::Three];

    /// Zero-based matrix index.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_number(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Level::One),
            2 => Ok(Level::Two),
            3 => Ok(Level::Three),
            _ => Err(Error::LevelOutOfRange(i)),
        }
    }
}

/// A level pair whose phase is studied. `OneTwo` is dipole-forbidden but still
/// carries phase eigenstates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Transition {
    #[serde(rename = "13")]
    OneThree,
    #[serde(rename = "23")]
    TwoThree,
    #[serde(rename = "12")]
    OneTwo,
}

/// How a transition's three phase states are built from the atomic levels.
///
/// The zero-phase state is the `spectator` level; the `±π/2` states are
/// `(|upper⟩ ∓ i|partner⟩)/√2`. The phase exponential
/// `|partner⟩⟨upper| − |upper⟩⟨partner| + |spectator⟩⟨spectator|` maps
/// `upper` to `partner`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Roles {
    pub spectator: Level,
    pub upper: Level,
    pub partner: Level,
}

impl Transition {
    /// Canonical column order.
    pub const ALL: [Transition; 3] = [Transition::OneThree, Transition::TwoThree, Transition::OneTwo];

    pub fn label(self) -> &'static str {
        match self {
            Transition::OneThree => "13",
            Transition::TwoThree => "23",
            Transition::OneTwo => "12",
        }
    }

    pub fn roles(self) -> Roles {
        use Level::*;
        match self {
            Transition::OneThree => Roles { spectator: Two, upper: Three, partner: One },
            Transition::TwoThree => Roles { spectator: One, upper: Three, partner: Two },
            Transition::OneTwo => Roles { spectator: Three, upper: Two, partner: One },
        }
    }

    /// Position in [`Transition::ALL`].
    pub fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Transition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "13" | "31" => Ok(Transition::OneThree),
            "23" | "32" => Ok(Transition::TwoThree),
            "12" | "21" => Ok(Transition::OneTwo),
            other => Err(Error::UnknownTransition(other.to_string())),
        }
    }
}

/// Eigenvalue label of a phase operator, in the fixed order `0, +π/2, −π/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhaseLabel {
    Zero,
    Plus,
    Minus,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 3] = [PhaseLabel::Zero, PhaseLabel::Plus, PhaseLabel::Minus];

    pub fn angle(self) -> f64 {
        match self {
            PhaseLabel::Zero => 0.0,
            PhaseLabel::Plus => FRAC_PI_2,
            PhaseLabel::Minus => -FRAC_PI_2,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            PhaseLabel::Zero => "0",
            PhaseLabel::Plus => "p",
            PhaseLabel::Minus => "m",
        }
    }
}
