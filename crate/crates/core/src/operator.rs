//! Operator (Loewner-order) versions of the refined Young and Heinz bounds
//! for SPD pairs whose spectra are separated.
//!
//! For `X = A^{-1/2} B A^{-1/2}` every scalar bound evaluated on the spectrum
//! of `X` lifts to a Loewner inequality after congruence with `A^{1/2}`; the
//! Kantorovich factor is evaluated once at `h = M/m`, the smallest ratio the
//! spectral sandwich guarantees.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::matrix::{
    arithmetic_mean, loewner_leq, sandwich_bounds, symmetrize, GeometricPath, LoewnerVerdict,
    SpdMatrix, SpectralSandwich, DEFAULT_LOEWNER_TOL,
};
use crate::mutation::Mutation;
use crate::scalar::{kantorovich_unchecked, Branch, Weight, CHAIN_LABELS};

/// Verdicts for every consecutive pair of an ordered chain of terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub labels: Vec<&'static str>,
    /// Term values: the trace for matrix chains, the value for scalar chains.
    pub values: Vec<f64>,
    /// `verdicts[i]` tests `term[i] <= term[i + 1]`.
    pub verdicts: Vec<LoewnerVerdict>,
    pub all_hold: bool,
    pub worst_min_eig: f64,
}

impl ChainReport {
    pub fn new(labels: &[&'static str], values: Vec<f64>, verdicts: Vec<LoewnerVerdict>) -> Self {
        debug_assert_eq!(labels.len(), verdicts.len() + 1);
        ChainReport {
            labels: labels.to_vec(),
            values,
            all_hold: verdicts.iter().all(|v| v.holds),
            worst_min_eig: verdicts
                .iter()
                .map(|v| v.min_eig)
                .fold(f64::INFINITY, f64::min),
            verdicts,
        }
    }

    pub fn link_name(&self, i: usize) -> String {
        format!("{}<={}", self.labels[i], self.labels[i + 1])
    }
}

/// A Loewner bound `rhs <= lhs` (lower) or `lhs <= rhs` (upper).
#[derive(Debug, Clone)]
pub struct OperatorBound {
    pub lhs: DMatrix<f64>,
    pub rhs: DMatrix<f64>,
    pub verdict: LoewnerVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeinzVerdicts {
    pub lower: LoewnerVerdict,
    pub upper: LoewnerVerdict,
}

/// An SPD pair with separated spectra and the means that do not depend on
/// the weight (`A #_{1/4} B`, `A # B`, `A #_{3/4} B`, `A nabla B`).
#[derive(Debug, Clone)]
pub struct OperatorPair {
    a: SpdMatrix,
    b: SpdMatrix,
    sandwich: SpectralSandwich,
    path: GeometricPath,
    quarter: DMatrix<f64>,
    half: DMatrix<f64>,
    three_quarter: DMatrix<f64>,
    mid_nabla: DMatrix<f64>,
    tol_rel: f64,
}

impl OperatorPair {
    /// Uses the tightest sandwich constants of the two spectra.
    pub fn new(a: SpdMatrix, b: SpdMatrix) -> Result<Self> {
        let sandwich = sandwich_bounds(&a, &b, 0.0)?;
        OperatorPair::with_sandwich(a, b, sandwich)
    }

    /// Uses caller-chosen constants; see [`SpectralSandwich::checked`].
    pub fn with_sandwich(a: SpdMatrix, b: SpdMatrix, sandwich: SpectralSandwich) -> Result<Self> {
        let path = GeometricPath::new(&a, &b)?;
        Ok(OperatorPair {
            quarter: path.sharp(0.25)?,
            half: path.sharp(0.5)?,
            three_quarter: path.sharp(0.75)?,
            mid_nabla: arithmetic_mean(&a, &b, 0.5),
            a,
            b,
            sandwich,
            path,
            tol_rel: DEFAULT_LOEWNER_TOL,
        })
    }

    pub fn with_tolerance(mut self, tol_rel: f64) -> Self {
        self.tol_rel = tol_rel;
        self
    }

    pub fn a(&self) -> &SpdMatrix {
        &self.a
    }

    pub fn b(&self) -> &SpdMatrix {
        &self.b
    }

    pub fn sandwich(&self) -> &SpectralSandwich {
        &self.sandwich
    }

    pub fn tol_rel(&self) -> f64 {
        self.tol_rel
    }

    /// `K(h^{1/4}, 2)` with `h = M/m`.
    pub fn kappa(&self) -> f64 {
        kantorovich_unchecked(self.sandwich.h.sqrt().sqrt())
    }

    fn kappa_for(&self, m: Mutation) -> f64 {
        if m == Mutation::OuterRatio {
            kantorovich_unchecked(self.sandwich.h_prime.sqrt().sqrt())
        } else {
            self.kappa()
        }
    }

    /// Materializes every term needed by the bounds at weight `w`.
    pub fn evaluate(&self, w: &Weight, m: Mutation) -> Result<OperatorEvaluation> {
        let v = w.v;
        let sharp_v = self.path.sharp(v)?;
        let sharp_cv = self.path.sharp(1.0 - v)?;
        let nabla_v = arithmetic_mean(&self.a, &self.b, v);
        let kappa = self.kappa_for(m);
        let e = m.kappa_exponent(w.rhat1);
        let (k_lo, k_hi) = (kappa.powf(e), kappa.powf(-e));
        let r1 = m.r1(w.r1);
        let sign = m.subtraction_sign();

        let gap = &self.mid_nabla - &self.half;
        let (q_a, q_b) = if m == Mutation::SwappedQuarterMeans {
            (&self.three_quarter, &self.quarter)
        } else {
            (&self.quarter, &self.three_quarter)
        };
        // A # B - 2 A #_{1/4} B + A and A # B - 2 A #_{3/4} B + B
        let corr_a = &self.half - q_a * 2.0 + self.a.entries();
        let corr_b = &self.half - q_b * 2.0 + self.b.entries();
        let (lo_coef, lo_corr, hi_coef, hi_corr) = match m.branch(w) {
            Branch::LowerHalf => (v, &corr_a, 1.0 - v, &corr_b),
            Branch::UpperHalf => (1.0 - v, &corr_b, v, &corr_a),
        };
        let lo_gap = &gap * (2.0 * lo_coef);
        let hi_gap = &gap * (2.0 * hi_coef);
        let lo_base = &lo_gap + lo_corr * r1;
        let hi_base = &hi_gap + hi_corr * (sign * r1);
        let n = self.a.dim();
        let terms = [
            DMatrix::zeros(n, n),
            sharp_v.clone(),
            &lo_gap + &sharp_v,
            &lo_base + &sharp_v,
            &lo_base + &sharp_v * k_lo,
            nabla_v,
            &hi_base + &sharp_v * k_hi,
            &hi_base + &sharp_v,
            &hi_gap + &sharp_v,
        ]
        .map(|t| symmetrize(&t));

        let heinz_v = (&sharp_v + &sharp_cv) * 0.5;
        let heinz_quarter = (&self.quarter + &self.three_quarter) * 0.5;
        let corr_h = &self.mid_nabla + &self.half - heinz_quarter * 2.0;
        let heinz_lower = &gap * (2.0 * w.r) + &corr_h * r1 + &heinz_v * k_lo;
        let heinz_upper = &gap * (2.0 * w.big_r) + &corr_h * (sign * r1) + &heinz_v * k_hi;

        Ok(OperatorEvaluation {
            terms,
            heinz_v: symmetrize(&heinz_v),
            heinz_lower: symmetrize(&heinz_lower),
            heinz_upper: symmetrize(&heinz_upper),
            half: self.half.clone(),
            mid_nabla: self.mid_nabla.clone(),
            tol_rel: self.tol_rel,
        })
    }

    pub fn refined_lower(&self, w: &Weight, m: Mutation) -> Result<OperatorBound> {
        self.evaluate(w, m)?.refined_lower()
    }

    pub fn refined_upper(&self, w: &Weight, m: Mutation) -> Result<OperatorBound> {
        self.evaluate(w, m)?.refined_upper()
    }

    pub fn heinz_bounds(&self, w: &Weight, m: Mutation) -> Result<HeinzVerdicts> {
        self.evaluate(w, m)?.heinz_bounds()
    }

    pub fn chain(&self, w: &Weight, m: Mutation) -> Result<ChainReport> {
        self.evaluate(w, m)?.chain()
    }
}

/// All terms of the operator bounds at one weight.
#[derive(Debug, Clone)]
pub struct OperatorEvaluation {
    /// The nine chain terms labelled by [`CHAIN_LABELS`].
    pub terms: [DMatrix<f64>; 9],
    /// `H_v(A, B)`
    pub heinz_v: DMatrix<f64>,
    pub heinz_lower: DMatrix<f64>,
    pub heinz_upper: DMatrix<f64>,
    /// `A # B`
    pub half: DMatrix<f64>,
    /// `A nabla B`
    pub mid_nabla: DMatrix<f64>,
    tol_rel: f64,
}

impl OperatorEvaluation {
    pub fn refined_lower(&self) -> Result<OperatorBound> {
        Ok(OperatorBound {
            lhs: self.terms[5].clone(),
            rhs: self.terms[4].clone(),
            verdict: loewner_leq(&self.terms[4], &self.terms[5], self.tol_rel)?,
        })
    }

    pub fn refined_upper(&self) -> Result<OperatorBound> {
        Ok(OperatorBound {
            lhs: self.terms[5].clone(),
            rhs: self.terms[6].clone(),
            verdict: loewner_leq(&self.terms[5], &self.terms[6], self.tol_rel)?,
        })
    }

    pub fn heinz_bounds(&self) -> Result<HeinzVerdicts> {
        Ok(HeinzVerdicts {
            lower: loewner_leq(&self.heinz_lower, &self.mid_nabla, self.tol_rel)?,
            upper: loewner_leq(&self.mid_nabla, &self.heinz_upper, self.tol_rel)?,
        })
    }

    /// `A # B <= H_v(A, B) <= A nabla B`
    pub fn heinz_between(&self) -> Result<HeinzVerdicts> {
        Ok(HeinzVerdicts {
            lower: loewner_leq(&self.half, &self.heinz_v, self.tol_rel)?,
            upper: loewner_leq(&self.heinz_v, &self.mid_nabla, self.tol_rel)?,
        })
    }

    pub fn chain(&self) -> Result<ChainReport> {
        let verdicts = self
            .terms
            .windows(2)
            .map(|w| loewner_leq(&w[0], &w[1], self.tol_rel))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChainReport::new(
            &CHAIN_LABELS,
            self.terms.iter().map(|t| t.trace()).collect(),
            verdicts,
        ))
    }
}

/// One operator inequality instance: a separated SPD pair and a weight.
#[derive(Debug, Clone)]
pub struct OperatorBoundInstance {
    pub pair: OperatorPair,
    pub weight: Weight,
}

impl OperatorBoundInstance {
    pub fn new(a: SpdMatrix, b: SpdMatrix, weight: Weight) -> Result<Self> {
        Ok(OperatorBoundInstance {
            pair: OperatorPair::new(a, b)?,
            weight,
        })
    }

    pub fn sandwich(&self) -> &SpectralSandwich {
        self.pair.sandwich()
    }

    /// `K(h^{1/4}, 2)`
    pub fn kappa(&self) -> f64 {
        self.pair.kappa()
    }
}

pub fn op_refined_lower(inst: &OperatorBoundInstance) -> Result<OperatorBound> {
    inst.pair.refined_lower(&inst.weight, Mutation::None)
}

pub fn op_refined_upper(inst: &OperatorBoundInstance) -> Result<OperatorBound> {
    inst.pair.refined_upper(&inst.weight, Mutation::None)
}

pub fn op_heinz_bounds(inst: &OperatorBoundInstance) -> Result<HeinzVerdicts> {
    inst.pair.heinz_bounds(&inst.weight, Mutation::None)
}

pub fn op_chain(inst: &OperatorBoundInstance) -> Result<ChainReport> {
    inst.pair.chain(&inst.weight, Mutation::None)
}
