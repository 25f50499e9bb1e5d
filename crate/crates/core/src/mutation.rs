//! Deliberately broken variants of the bound formulas.
//!
//! The fuzz harness runs every family once unmodified and once per entry of
//! [`Mutation::CATALOGUE`]. A mutation either strengthens a bound beyond what
//! is true or removes a refinement term, so a verifier with real detection
//! power must report violations (or lost dominance) for each of them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scalar::{Branch, Weight};
use crate::Family;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// The formulas as stated.
    #[default]
    None,
    /// Evaluates the `v > 1/2` formula for `v <= 1/2` and vice versa.
    WrongBranch,
    /// Doubles the Kantorovich exponent `rhat1`.
    StrengthenedExponent,
    /// Drops the `r1` correction term from the refined bounds.
    DroppedR1Term,
    /// Adds the `r1` correction in the upper bounds instead of subtracting it.
    FlippedSubtractionSign,
    /// Exchanges `A #_{1/4} B` and `A #_{3/4} B` in the operator bounds.
    SwappedQuarterMeans,
    /// Evaluates the operator Kantorovich factor at the outer ratio `M'/m'`.
    OuterRatio,
    /// Uses the largest pairwise Kantorovich constant instead of the smallest
    /// in the Hilbert-Schmidt bounds.
    MaxPairKappa,
}

impl Mutation {
    pub const CATALOGUE: [Mutation; 7] = [
        Mutation::WrongBranch,
        Mutation::StrengthenedExponent,
        Mutation::DroppedR1Term,
        Mutation::FlippedSubtractionSign,
        Mutation::SwappedQuarterMeans,
        Mutation::OuterRatio,
        Mutation::MaxPairKappa,
    ];

    /// The family whose fuzz run is expected to expose this mutation.
    pub fn family(self) -> Family {
        match self {
            Mutation::None
            | Mutation::WrongBranch
            | Mutation::StrengthenedExponent
            | Mutation::DroppedR1Term
            | Mutation::FlippedSubtractionSign => Family::Scalar,
            Mutation::SwappedQuarterMeans | Mutation::OuterRatio => Family::Operator,
            Mutation::MaxPairKappa => Family::Hs,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mutation::None => "none",
            Mutation::WrongBranch => "wrong-branch",
            Mutation::StrengthenedExponent => "strengthened-exponent",
            Mutation::DroppedR1Term => "dropped-r1-term",
            Mutation::FlippedSubtractionSign => "flipped-subtraction-sign",
            Mutation::SwappedQuarterMeans => "swapped-quarter-means",
            Mutation::OuterRatio => "outer-ratio",
            Mutation::MaxPairKappa => "max-pair-kappa",
        }
    }

    pub(crate) fn branch(self, weight: &Weight) -> Branch {
        let branch = weight.branch();
        if self == Mutation::WrongBranch {
            branch.other()
        } else {
            branch
        }
    }

    pub(crate) fn kappa_exponent(self, rhat1: f64) -> f64 {
        if self == Mutation::StrengthenedExponent {
            2.0 * rhat1
        } else {
            rhat1
        }
    }

    pub(crate) fn r1(self, r1: f64) -> f64 {
        if self == Mutation::DroppedR1Term {
            0.0
        } else {
            r1
        }
    }

    /// Sign applied to the `r1` term of the upper bounds.
    pub(crate) fn subtraction_sign(self) -> f64 {
        if self == Mutation::FlippedSubtractionSign {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        std::iter::once(Mutation::None)
            .chain(Mutation::CATALOGUE)
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mutation `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in std::iter::once(Mutation::None).chain(Mutation::CATALOGUE) {
            assert_eq!(m.name().parse::<Mutation>().unwrap(), m);
        }
        assert!("bogus".parse::<Mutation>().is_err());
    }

    #[test]
    fn catalogue_covers_every_family() {
        for family in [Family::Scalar, Family::Operator, Family::Hs] {
            assert!(Mutation::CATALOGUE.iter().any(|m| m.family() == family));
        }
        assert!(Mutation::CATALOGUE.len() >= 6);
    }
}
