//! Refined Young and Heinz mean inequalities with a Kantorovich factor, for
//! positive scalars, positive definite matrices in the Loewner order and
//! Hilbert-Schmidt norms, together with a randomized verifier.
//!
//! ```
//! use refined_young::{refined_lower, ScalarPair, Weight};
//!
//! let p = ScalarPair::new(1.0, 16.0).unwrap();
//! let w = Weight::new(0.1).unwrap();
//! let bound = refined_lower(&p, &w);
//! assert!(bound.holds(1e-12));
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub mod error;
pub mod fuzz;
pub mod hs;
pub mod matrix;
pub mod mutation;
pub mod operator;
pub mod scalar;

pub use error::{Error, Result};
pub use fuzz::{
    fuzz_run, gen_sandwich_pair, gen_spd, random_orthogonal, random_sandwich_pair, random_spd,
    tightness_report, CheckKind, CheckSummary, CsvRow, Fingerprint, FuzzConfig, FuzzReport,
    Quantiles, TightnessReport, TightnessRow,
};
pub use hs::{
    hs_chain, hs_difference_bounds, hs_norm, hs_norm_sq, hs_refined_lower, hs_refined_upper,
    kappa_min, HsBoundReport, HsInstance, HsNorms, DEFAULT_HS_TOL,
};
pub use matrix::{
    loewner_leq, sandwich_bounds, weighted_means, GeometricPath, LoewnerVerdict, Orientation,
    SpdMatrix, SpectralSandwich, WeightedMeans, DEFAULT_LOEWNER_TOL,
};
pub use mutation::Mutation;
pub use operator::{
    op_chain, op_heinz_bounds, op_refined_lower, op_refined_upper, ChainReport, OperatorBound,
    OperatorEvaluation, OperatorPair,
};
pub use scalar::{
    heinz_refined, improvement, kantorovich, refined_lower, refined_upper, scalar_baselines,
    scalar_chain, squared_bounds, young_means, BoundPair, Branch, Improvement, ScalarBoundSet,
    ScalarPair, Side, Term, Weight, YoungMeans, DEFAULT_SCALAR_TOL,
};

/// The three settings the inequalities are stated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Scalar,
    Operator,
    Hs,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Scalar, Family::Operator, Family::Hs];

    pub fn name(self) -> &'static str {
        match self {
            Family::Scalar => "scalar",
            Family::Operator => "operator",
            Family::Hs => "hs",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}` (expected scalar, operator or hs)"))
    }
}
