//! Scalar means, the Kantorovich constant, and the refined Young and Heinz
//! bounds together with the older bounds they improve on.
//!
//! Every bound is returned as a [`ScalarBoundSet`]: the quantity being
//! bounded (`lhs`), the named additive terms of the bound, their sum (`rhs`)
//! and a signed slack that is nonnegative exactly when the inequality holds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mutation::Mutation;

/// Relative tolerance for scalar slack comparisons.
pub const DEFAULT_SCALAR_TOL: f64 = 1e-12;

/// `K(t, 2) = (t + 1)^2 / (4t)`.
pub fn kantorovich(t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!(
            "Kantorovich constant needs a finite t > 0, got {t}"
        )));
    }
    Ok(kantorovich_unchecked(t))
}

/// Written as `1 + (t - 1)^2 / (4t)` so that `K >= 1` survives rounding.
pub(crate) fn kantorovich_unchecked(t: f64) -> f64 {
    let d = t - 1.0;
    1.0 + d * d / (4.0 * t)
}

/// Which half of `(0, 1)` the weight falls in. The refined bounds have one
/// formula for `v <= 1/2` and a mirrored one for `v > 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "I")]
    LowerHalf,
    #[serde(rename = "II")]
    UpperHalf,
}

impl Branch {
    pub fn other(self) -> Self {
        match self {
            Branch::LowerHalf => Branch::UpperHalf,
            Branch::UpperHalf => Branch::LowerHalf,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::LowerHalf => "I",
            Branch::UpperHalf => "II",
        }
    }
}

/// A weight `v` in `(0, 1)` with its exponent cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weight {
    pub v: f64,
    /// `min(v, 1 - v)`
    pub r: f64,
    /// `max(v, 1 - v)`
    pub big_r: f64,
    /// `min(2r, 1 - 2r)`
    pub r1: f64,
    /// `min(2 r1, 1 - 2 r1)`
    pub rhat1: f64,
}

impl Weight {
    pub fn new(v: f64) -> Result<Self> {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!(
                "weight must lie in the open interval (0, 1), got {v}"
            )));
        }
        let r = v.min(1.0 - v);
        let big_r = v.max(1.0 - v);
        let r1 = (2.0 * r).min(1.0 - 2.0 * r);
        let rhat1 = (2.0 * r1).min(1.0 - 2.0 * r1);
        Ok(Weight {
            v,
            r,
            big_r,
            r1,
            rhat1,
        })
    }

    pub fn branch(&self) -> Branch {
        if self.v <= 0.5 {
            Branch::LowerHalf
        } else {
            Branch::UpperHalf
        }
    }
}

/// Builds the [`Weight`] of `v`.
pub fn exponents(v: f64) -> Result<Weight> {
    Weight::new(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarPair {
    pub a: f64,
    pub b: f64,
}

impl ScalarPair {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        for (name, x) in [("a", a), ("b", b)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::Domain(format!(
                    "{name} must be a finite positive number, got {x}"
                )));
            }
        }
        Ok(ScalarPair { a, b })
    }

    /// `h = b / a`
    pub fn h(&self) -> f64 {
        self.b / self.a
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        ScalarPair::new(lambda * self.a, lambda * self.b)
    }

    /// `K(h^{1/4}, 2)`, the constant of the refined bounds.
    pub fn kappa_quarter(&self) -> f64 {
        kantorovich_unchecked(self.h().sqrt().sqrt())
    }

    /// `K(h^{1/2}, 2)`, the constant of the older bounds and of the squared
    /// bounds.
    pub fn kappa_half(&self) -> f64 {
        kantorovich_unchecked(self.h().sqrt())
    }
}

/// `a^{1-v} b^v`, evaluated in the log domain.
pub fn weighted_geometric(a: f64, b: f64, v: f64) -> f64 {
    ((1.0 - v) * a.ln() + v * b.ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YoungMeans {
    /// `(1 - v) a + v b`
    pub arith: f64,
    /// `a^{1-v} b^v`
    pub geo: f64,
    /// `(a^v b^{1-v} + a^{1-v} b^v) / 2`
    pub heinz: f64,
}

/// Weighted arithmetic, geometric and Heinz means. Any real `v` is accepted;
/// outside `[0, 1]` the arithmetic mean falls below the geometric one.
pub fn young_means(p: &ScalarPair, v: f64) -> YoungMeans {
    let geo = weighted_geometric(p.a, p.b, v);
    YoungMeans {
        arith: (1.0 - v) * p.a + v * p.b,
        geo,
        heinz: 0.5 * (weighted_geometric(p.a, p.b, 1.0 - v) + geo),
    }
}

/// Direction of a bound: `Lower` means the terms bound `lhs` from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarBoundSet {
    pub name: &'static str,
    pub side: Side,
    pub lhs: f64,
    pub terms: Vec<Term>,
    pub rhs: f64,
    /// `lhs - rhs` for lower bounds, `rhs - lhs` for upper bounds.
    pub slack: f64,
}

impl ScalarBoundSet {
    pub fn new(name: &'static str, side: Side, lhs: f64, terms: Vec<Term>) -> Self {
        let rhs = terms.iter().map(|t| t.value).sum::<f64>();
        let slack = match side {
            Side::Lower => lhs - rhs,
            Side::Upper => rhs - lhs,
        };
        ScalarBoundSet {
            name,
            side,
            lhs,
            terms,
            rhs,
            slack,
        }
    }

    pub fn scale(&self) -> f64 {
        self.lhs.abs().max(self.rhs.abs()).max(1.0)
    }

    pub fn relative_slack(&self) -> f64 {
        self.slack / self.scale()
    }

    pub fn holds(&self, tol_rel: f64) -> bool {
        self.relative_slack() >= -tol_rel
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

fn term(name: &'static str, value: f64) -> Term {
    Term { name, value }
}

/// Square roots shared by the bound formulas.
struct Radicals {
    /// `(sqrt a - sqrt b)^2`
    gap: f64,
    /// `((ab)^{1/4} - sqrt a)^2`
    quarter_a: f64,
    /// `((ab)^{1/4} - sqrt b)^2`
    quarter_b: f64,
}

impl Radicals {
    fn new(a: f64, b: f64) -> Self {
        let sa = a.sqrt();
        let sb = b.sqrt();
        let q = (sa * sb).sqrt();
        Radicals {
            gap: (sa - sb) * (sa - sb),
            quarter_a: (q - sa) * (q - sa),
            quarter_b: (q - sb) * (q - sb),
        }
    }
}

/// Refined lower bound for the weighted arithmetic mean. Uses
/// `v (sqrt a - sqrt b)^2 + r1 ((ab)^{1/4} - sqrt a)^2` for `v <= 1/2` and the
/// mirrored terms otherwise, plus `K(h^{1/4})^{rhat1} a^{1-v} b^v`.
pub fn refined_lower(p: &ScalarPair, w: &Weight) -> ScalarBoundSet {
    refined_lower_with(p, w, p.kappa_quarter(), Mutation::None)
}

/// [`refined_lower`] with an explicit Kantorovich constant (the base, before
/// raising to `rhat1`). Operator bounds share one constant across the whole
/// spectrum, so their scalar shadows need it passed in.
pub fn refined_lower_with(p: &ScalarPair, w: &Weight, kappa: f64, m: Mutation) -> ScalarBoundSet {
    let rad = Radicals::new(p.a, p.b);
    let r1 = m.r1(w.r1);
    let k = kappa.powf(m.kappa_exponent(w.rhat1));
    let geo = weighted_geometric(p.a, p.b, w.v);
    let (coef, quarter) = match m.branch(w) {
        Branch::LowerHalf => (w.v, rad.quarter_a),
        Branch::UpperHalf => (1.0 - w.v, rad.quarter_b),
    };
    ScalarBoundSet::new(
        "refined_lower",
        Side::Lower,
        (1.0 - w.v) * p.a + w.v * p.b,
        vec![
            term("gap", coef * rad.gap),
            term("quarter", r1 * quarter),
            term("kantorovich_geo", k * geo),
        ],
    )
}

/// Refined upper bound, the reverse of [`refined_lower`] with
/// `K(h^{1/4})^{-rhat1}`.
pub fn refined_upper(p: &ScalarPair, w: &Weight) -> ScalarBoundSet {
    refined_upper_with(p, w, p.kappa_quarter(), Mutation::None)
}

pub fn refined_upper_with(p: &ScalarPair, w: &Weight, kappa: f64, m: Mutation) -> ScalarBoundSet {
    let rad = Radicals::new(p.a, p.b);
    let r1 = m.r1(w.r1);
    let k = kappa.powf(-m.kappa_exponent(w.rhat1));
    let geo = weighted_geometric(p.a, p.b, w.v);
    let (coef, quarter) = match m.branch(w) {
        Branch::LowerHalf => (1.0 - w.v, rad.quarter_b),
        Branch::UpperHalf => (w.v, rad.quarter_a),
    };
    ScalarBoundSet::new(
        "refined_upper",
        Side::Upper,
        (1.0 - w.v) * p.a + w.v * p.b,
        vec![
            term("gap", coef * rad.gap),
            term("quarter", m.subtraction_sign() * r1 * quarter),
            term("kantorovich_geo", k * geo),
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundPair {
    pub lower: ScalarBoundSet,
    pub upper: ScalarBoundSet,
}

/// Refined lower and upper bounds for `(a + b)/2` in terms of the Heinz mean.
pub fn heinz_refined(p: &ScalarPair, w: &Weight) -> BoundPair {
    heinz_refined_with(p, w, p.kappa_quarter(), Mutation::None)
}

pub fn heinz_refined_with(p: &ScalarPair, w: &Weight, kappa: f64, m: Mutation) -> BoundPair {
    let rad = Radicals::new(p.a, p.b);
    let r1 = m.r1(w.r1);
    let e = m.kappa_exponent(w.rhat1);
    let heinz = young_means(p, w.v).heinz;
    let quarter = 0.5 * r1 * (rad.quarter_a + rad.quarter_b);
    let mid = 0.5 * (p.a + p.b);
    BoundPair {
        lower: ScalarBoundSet::new(
            "heinz_lower",
            Side::Lower,
            mid,
            vec![
                term("gap", w.r * rad.gap),
                term("quarter", quarter),
                term("kantorovich_heinz", kappa.powf(e) * heinz),
            ],
        ),
        upper: ScalarBoundSet::new(
            "heinz_upper",
            Side::Upper,
            mid,
            vec![
                term("gap", w.big_r * rad.gap),
                term("quarter", m.subtraction_sign() * quarter),
                term("kantorovich_heinz", kappa.powf(-e) * heinz),
            ],
        ),
    }
}

/// Bounds on `((1 - v) a + v b)^2`, obtained from the refined bounds at
/// `(a^2, b^2)`.
pub fn squared_bounds(p: &ScalarPair, w: &Weight) -> BoundPair {
    squared_bounds_with(p, w, p.kappa_half(), Mutation::None)
}

/// [`squared_bounds`] with an explicit constant; `kappa` is `K(h^{1/2})` for
/// a lone pair.
pub fn squared_bounds_with(p: &ScalarPair, w: &Weight, kappa: f64, m: Mutation) -> BoundPair {
    let (a, b, v) = (p.a, p.b, w.v);
    let r1 = m.r1(w.r1);
    let e = m.kappa_exponent(w.rhat1);
    let diff_sq = (a - b) * (a - b);
    let root = (a * b).sqrt();
    let mid_a = (root - a) * (root - a);
    let mid_b = (root - b) * (root - b);
    let geo = weighted_geometric(a, b, v);
    let geo_sq = geo * geo;
    let arith = (1.0 - v) * a + v * b;
    let lhs = arith * arith;

    let (lo_coef, lo_mid) = match m.branch(w) {
        Branch::LowerHalf => (v * v, mid_a),
        Branch::UpperHalf => ((1.0 - v) * (1.0 - v), mid_b),
    };
    let (hi_coef, hi_mid) = match m.branch(w) {
        Branch::LowerHalf => ((1.0 - v) * (1.0 - v), mid_b),
        Branch::UpperHalf => (v * v, mid_a),
    };
    BoundPair {
        lower: ScalarBoundSet::new(
            "squared_lower",
            Side::Lower,
            lhs,
            vec![
                term("difference", lo_coef * diff_sq),
                term("middle", r1 * lo_mid),
                term("kantorovich_geo", kappa.powf(e) * geo_sq),
            ],
        ),
        upper: ScalarBoundSet::new(
            "squared_upper",
            Side::Upper,
            lhs,
            vec![
                term("difference", hi_coef * diff_sq),
                term("middle", m.subtraction_sign() * r1 * hi_mid),
                term("kantorovich_geo", kappa.powf(-e) * geo_sq),
            ],
        ),
    }
}

/// The bounds the refined ones improve on, in this order:
///
/// * `difference_lower` / `difference_upper`: `r` and `R` times
///   `(sqrt a - sqrt b)^2` plus the geometric mean;
/// * `coarse_kantorovich_lower` / `coarse_kantorovich_upper`: the same with the
///   geometric mean scaled by `K(h^{1/2})^{+-r1}`;
/// * `baseline_lower` / `baseline_upper`: the refined bounds without the
///   Kantorovich factor, branch chosen by `v`.
pub fn scalar_baselines(p: &ScalarPair, w: &Weight) -> Vec<ScalarBoundSet> {
    let rad = Radicals::new(p.a, p.b);
    let means = young_means(p, w.v);
    let (arith, geo) = (means.arith, means.geo);
    let k = p.kappa_half();
    let (lo_coef, lo_quarter, hi_coef, hi_quarter) = match w.branch() {
        Branch::LowerHalf => (w.v, rad.quarter_a, 1.0 - w.v, rad.quarter_b),
        Branch::UpperHalf => (1.0 - w.v, rad.quarter_b, w.v, rad.quarter_a),
    };
    vec![
        ScalarBoundSet::new(
            "difference_lower",
            Side::Lower,
            arith,
            vec![term("gap", w.r * rad.gap), term("geo", geo)],
        ),
        ScalarBoundSet::new(
            "difference_upper",
            Side::Upper,
            arith,
            vec![term("gap", w.big_r * rad.gap), term("geo", geo)],
        ),
        ScalarBoundSet::new(
            "coarse_kantorovich_lower",
            Side::Lower,
            arith,
            vec![
                term("gap", w.r * rad.gap),
                term("kantorovich_geo", k.powf(w.r1) * geo),
            ],
        ),
        ScalarBoundSet::new(
            "coarse_kantorovich_upper",
            Side::Upper,
            arith,
            vec![
                term("gap", w.big_r * rad.gap),
                term("kantorovich_geo", k.powf(-w.r1) * geo),
            ],
        ),
        // Same term order as the refined bounds so that the improvement
        // margin is exactly zero whenever rhat1 = 0.
        ScalarBoundSet::new(
            "baseline_lower",
            Side::Lower,
            arith,
            vec![
                term("gap", lo_coef * rad.gap),
                term("quarter", w.r1 * lo_quarter),
                term("geo", geo),
            ],
        ),
        ScalarBoundSet::new(
            "baseline_upper",
            Side::Upper,
            arith,
            vec![
                term("gap", hi_coef * rad.gap),
                term("quarter", -w.r1 * hi_quarter),
                term("geo", geo),
            ],
        ),
    ]
}

/// Improvement of the refined bounds over the baselines: `refined - baseline`
/// for the lower bound and `baseline - refined` for the upper bound. Both are
/// nonnegative when the refinement is real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Improvement {
    pub lower: f64,
    pub upper: f64,
    pub lower_scale: f64,
    pub upper_scale: f64,
}

pub fn improvement(p: &ScalarPair, w: &Weight) -> Improvement {
    improvement_with(p, w, Mutation::None)
}

pub fn improvement_with(p: &ScalarPair, w: &Weight, m: Mutation) -> Improvement {
    let kappa = p.kappa_quarter();
    let lo = refined_lower_with(p, w, kappa, m);
    let hi = refined_upper_with(p, w, kappa, m);
    let base = scalar_baselines(p, w);
    let (blo, bhi) = (&base[4], &base[5]);
    Improvement {
        lower: lo.rhs - blo.rhs,
        upper: bhi.rhs - hi.rhs,
        lower_scale: lo.rhs.abs().max(blo.rhs.abs()).max(1.0),
        upper_scale: hi.rhs.abs().max(bhi.rhs.abs()).max(1.0),
    }
}

/// Labels of the nine-term chain shared by the scalar and operator forms.
pub const CHAIN_LABELS: [&str; 9] = [
    "zero",
    "geometric",
    "gap_lower",
    "baseline_lower",
    "refined_lower",
    "arithmetic",
    "refined_upper",
    "baseline_upper",
    "gap_upper",
];

/// Chain links (index `i` compares term `i` with term `i + 1`) that express
/// the improvement of the Kantorovich-weighted bounds over the baselines.
pub const CHAIN_DOMINANCE_LINKS: [usize; 2] = [3, 6];

/// The nine ordered terms
/// `0 <= g <= g + c gap <= ... <= arith <= ... <= g + C gap`
/// with `g = a^{1-v} b^v`, evaluated with the given constant `kappa`.
pub fn scalar_chain(p: &ScalarPair, w: &Weight, kappa: f64, m: Mutation) -> [f64; 9] {
    let rad = Radicals::new(p.a, p.b);
    let geo = weighted_geometric(p.a, p.b, w.v);
    let sides = |branch| match branch {
        Branch::LowerHalf => (
            w.v * rad.gap,
            rad.quarter_a,
            (1.0 - w.v) * rad.gap,
            rad.quarter_b,
        ),
        Branch::UpperHalf => (
            (1.0 - w.v) * rad.gap,
            rad.quarter_b,
            w.v * rad.gap,
            rad.quarter_a,
        ),
    };
    // Baseline rows stay unmutated so they remain a fixed reference.
    let (lo_gap, lo_quarter, hi_gap, hi_quarter) = sides(w.branch());
    let (m_lo_gap, m_lo_quarter, m_hi_gap, m_hi_quarter) = sides(m.branch(w));
    let r1 = m.r1(w.r1);
    let e = m.kappa_exponent(w.rhat1);
    let sign = m.subtraction_sign();
    [
        0.0,
        geo,
        lo_gap + geo,
        lo_gap + w.r1 * lo_quarter + geo,
        m_lo_gap + r1 * m_lo_quarter + kappa.powf(e) * geo,
        (1.0 - w.v) * p.a + w.v * p.b,
        m_hi_gap + sign * r1 * m_hi_quarter + kappa.powf(-e) * geo,
        hi_gap - w.r1 * hi_quarter + geo,
        hi_gap + geo,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(a: f64, b: f64) -> ScalarPair {
        ScalarPair::new(a, b).unwrap()
    }

    fn w(v: f64) -> Weight {
        Weight::new(v).unwrap()
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
    }

    #[test]
    fn kantorovich_values() {
        assert_eq!(kantorovich(1.0).unwrap(), 1.0);
        assert_eq!(kantorovich(2.0).unwrap(), 1.125);
        assert_eq!(kantorovich(0.5).unwrap(), 1.125);
    }

    #[test]
    fn kantorovich_rejects_bad_input() {
        for t in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(kantorovich(t), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn exponent_cascade_examples() {
        let half = exponents(0.5).unwrap();
        assert_eq!(
            (half.r, half.big_r, half.r1, half.rhat1),
            (0.5, 0.5, 0.0, 0.0)
        );
        let quarter = exponents(0.25).unwrap();
        assert_eq!(
            (quarter.r, quarter.big_r, quarter.r1, quarter.rhat1),
            (0.25, 0.75, 0.5, 0.0)
        );
        let tenth = exponents(0.1).unwrap();
        assert!(close(tenth.r, 0.1, 1e-15));
        assert!(close(tenth.big_r, 0.9, 1e-15));
        assert!(close(tenth.r1, 0.2, 1e-15));
        assert!(close(tenth.rhat1, 0.4, 1e-15));
    }

    #[test]
    fn endpoints_are_rejected() {
        for v in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(Weight::new(v).is_err());
        }
    }

    #[test]
    fn rhat1_vanishes_only_at_quarter_points() {
        for k in 1..1000 {
            let v = k as f64 / 1000.0;
            let zero = w(v).rhat1 == 0.0;
            assert_eq!(zero, [250, 500, 750].contains(&k), "v = {v}");
        }
    }

    #[test]
    fn pair_validation() {
        assert!(ScalarPair::new(0.0, 1.0).is_err());
        assert!(ScalarPair::new(1.0, f64::NAN).is_err());
        assert_eq!(pair(2.0, 8.0).h(), 4.0);
    }

    #[test]
    fn young_means_examples() {
        let eq = young_means(&pair(3.0, 3.0), 0.3);
        assert!(close(eq.arith, 3.0, 1e-15) && close(eq.geo, 3.0, 1e-15));
        assert!(close(eq.heinz, 3.0, 1e-15));

        let m = young_means(&pair(1.0, 16.0), 0.5);
        assert_eq!(m.arith, 8.5);
        assert!(close(m.geo, 4.0, 1e-15) && close(m.heinz, 4.0, 1e-15));

        let rev = young_means(&pair(1.0, 4.0), 2.0);
        assert_eq!(rev.arith, 7.0);
        assert!(close(rev.geo, 16.0, 1e-14));
        assert!(rev.arith <= rev.geo);
    }

    #[test]
    fn baselines_at_equal_pair_have_zero_slack() {
        for v in [0.1, 0.25, 0.5, 0.8] {
            for b in scalar_baselines(&pair(2.0, 2.0), &w(v)) {
                assert!(b.slack.abs() < 1e-14, "{} {}", b.name, b.slack);
            }
        }
    }

    #[test]
    fn baseline_examples() {
        let base = scalar_baselines(&pair(1.0, 16.0), &w(0.1));
        let b = &base[4];
        assert_eq!(b.name, "baseline_lower");
        assert!(close(b.rhs, 2.419_507_910_772_894, 1e-14));
        assert_eq!(b.lhs, 2.5);

        let base = scalar_baselines(&pair(1.0, 16.0), &w(0.25));
        assert!(close(base[0].slack, 0.5, 1e-14));
        for b in &base {
            assert!(b.slack >= 0.0, "{}", b.name);
        }
    }

    #[test]
    fn refined_lower_examples() {
        let eq = refined_lower(&pair(5.0, 5.0), &w(0.3));
        assert!(eq.relative_slack().abs() < 1e-14);

        let q = refined_lower(&pair(1.0, 16.0), &w(0.25));
        assert_eq!(q.term("gap"), Some(2.25));
        assert_eq!(q.term("quarter"), Some(0.5));
        assert!(close(q.rhs, 4.75, 1e-15) && q.lhs == 4.75);

        let t = refined_lower(&pair(1.0, 16.0), &w(0.1));
        assert!(close(t.rhs, 2.483_161_867_222_592, 1e-14));
        assert!(t.slack > 0.0);

        let tq = refined_lower(&pair(1.0, 16.0), &w(0.75));
        assert_eq!(tq.term("gap"), Some(2.25));
        assert_eq!(tq.term("quarter"), Some(2.0));
        assert!(close(tq.rhs, 12.25, 1e-15) && tq.lhs == 12.25);
    }

    #[test]
    fn refined_upper_examples() {
        assert!(
            refined_upper(&pair(7.0, 7.0), &w(0.2))
                .relative_slack()
                .abs()
                < 1e-14
        );

        let h = refined_upper(&pair(1.0, 16.0), &w(0.5));
        assert!(close(h.rhs, 8.5, 1e-15) && h.lhs == 8.5);

        let t = refined_upper(&pair(1.0, 16.0), &w(0.1));
        assert!(close(t.rhs, 8.558_783_348_393_203, 1e-14));
        assert!(close(t.term("quarter").unwrap(), -0.8, 1e-15));
    }

    #[test]
    fn heinz_examples() {
        let hp = heinz_refined(&pair(1.0, 16.0), &w(0.25));
        assert!(close(hp.lower.rhs, 8.5, 1e-15) && hp.lower.lhs == 8.5);
        assert!(close(hp.upper.rhs, 10.5, 1e-15));
        let eq = heinz_refined(&pair(4.0, 4.0), &w(0.37));
        assert!(close(eq.lower.rhs, 4.0, 1e-14) && close(eq.upper.rhs, 4.0, 1e-14));
    }

    #[test]
    fn squared_examples() {
        let s = squared_bounds(&pair(3.0, 3.0), &w(0.4));
        assert!(close(s.lower.rhs, 9.0, 1e-14) && close(s.upper.rhs, 9.0, 1e-14));

        let q = squared_bounds(&pair(1.0, 16.0), &w(0.25));
        assert_eq!(q.lower.lhs, 22.5625);
        assert_eq!(q.lower.term("difference"), Some(14.0625));
        assert_eq!(q.lower.term("middle"), Some(4.5));
        assert!(close(q.lower.rhs, 22.5625, 1e-15));

        let t = squared_bounds(&pair(1.0, 16.0), &w(0.1));
        assert!(close(t.lower.rhs, 6.131_383_018_504_683, 1e-14));
    }

    #[test]
    fn improvement_example_and_midpoint() {
        let imp = improvement(&pair(1.0, 16.0), &w(0.1));
        assert!(close(imp.lower, 0.063_653_956_449_697, 1e-12));
        for (a, b) in [(1.0, 16.0), (1e-5, 3e5), (7.0, 0.25)] {
            for v in [0.25, 0.5, 0.75] {
                let imp = improvement(&pair(a, b), &w(v));
                assert_eq!((imp.lower, imp.upper), (0.0, 0.0), "a={a} b={b} v={v}");
            }
        }
    }

    #[test]
    fn improvement_grows_with_ratio() {
        // a = 1, b = h^2, v = 0.1
        let mut last = 0.0;
        for i in 0..200 {
            let h = 1.0 + 0.5 * i as f64;
            let imp = improvement(&pair(1.0, h * h), &w(0.1)).lower;
            assert!(imp >= last, "h = {h}");
            last = imp;
        }
    }

    #[test]
    fn chain_matches_bound_sets() {
        let p = pair(2.0, 11.0);
        for v in [0.1, 0.3, 0.5, 0.6, 0.9] {
            let wt = w(v);
            let c = scalar_chain(&p, &wt, p.kappa_quarter(), Mutation::None);
            assert!(close(c[4], refined_lower(&p, &wt).rhs, 1e-15));
            assert!(close(c[6], refined_upper(&p, &wt).rhs, 1e-15));
            assert!(c.windows(2).all(|l| l[0] <= l[1] * (1.0 + 1e-14)), "{c:?}");
        }
    }

    #[test]
    fn wrong_branch_is_detectable() {
        let p = pair(1.0, 16.0);
        let b = refined_lower_with(&p, &w(0.8), p.kappa_quarter(), Mutation::WrongBranch);
        assert!(b.slack < 0.0);
    }

    fn positive() -> impl Strategy<Value = f64> {
        (-6.0f64..6.0).prop_map(|e| 10f64.powf(e))
    }

    fn weight() -> impl Strategy<Value = f64> {
        prop_oneof![
            1e-6f64..1.0 - 1e-6,
            prop::sample::select(vec![0.25, 0.5, 0.75])
        ]
    }

    proptest! {
        #[test]
        fn kantorovich_properties(t in 1e-6f64..1e6, s in 1e-6f64..1e6) {
            let k = kantorovich(t).unwrap();
            prop_assert!(k >= 1.0);
            prop_assert!(close(k, kantorovich(1.0 / t).unwrap(), 1e-12));
            let (lo, hi) = (t.max(1.0).min(s.max(1.0)), t.max(1.0).max(s.max(1.0)));
            prop_assert!(kantorovich(lo).unwrap() <= kantorovich(hi).unwrap());
        }

        #[test]
        fn weight_invariants(v in weight()) {
            let wt = w(v);
            prop_assert_eq!(wt.r + wt.big_r, 1.0);
            prop_assert!((0.0..=0.5).contains(&wt.r1));
            prop_assert!((0.0..=0.5).contains(&wt.rhat1));
        }

        #[test]
        fn refined_bounds_hold_and_dominate(a in positive(), b in positive(), v in weight()) {
            let p = pair(a, b);
            let wt = w(v);
            let lo = refined_lower(&p, &wt);
            let hi = refined_upper(&p, &wt);
            prop_assert!(lo.holds(DEFAULT_SCALAR_TOL), "{:?}", lo);
            prop_assert!(hi.holds(DEFAULT_SCALAR_TOL), "{:?}", hi);
            let base = scalar_baselines(&p, &wt);
            for b in &base {
                prop_assert!(b.holds(DEFAULT_SCALAR_TOL), "{:?}", b);
            }
            prop_assert!(lo.rhs >= base[4].rhs * (1.0 - 1e-14));
            prop_assert!(hi.rhs <= base[5].rhs * (1.0 + 1e-14));
            let hz = heinz_refined(&p, &wt);
            prop_assert!(hz.lower.holds(DEFAULT_SCALAR_TOL) && hz.upper.holds(DEFAULT_SCALAR_TOL));
            let sq = squared_bounds(&p, &wt);
            prop_assert!(sq.lower.holds(DEFAULT_SCALAR_TOL) && sq.upper.holds(DEFAULT_SCALAR_TOL));
        }

        #[test]
        fn scale_covariance(a in positive(), b in positive(), v in weight(), lambda in 1e-3f64..1e3) {
            let p = pair(a, b);
            let q = p.scaled(lambda).unwrap();
            let wt = w(v);
            for (x, y) in [
                (refined_lower(&p, &wt), refined_lower(&q, &wt)),
                (refined_upper(&p, &wt), refined_upper(&q, &wt)),
            ] {
                prop_assert!(close(lambda * x.lhs, y.lhs, 1e-12));
                for (s, t) in x.terms.iter().zip(&y.terms) {
                    prop_assert!((lambda * s.value - t.value).abs() <= 1e-12 * y.scale());
                }
                prop_assert!((lambda * x.slack - y.slack).abs() <= 1e-12 * y.scale());
            }
            let (x, y) = (squared_bounds(&p, &wt), squared_bounds(&q, &wt));
            let l2 = lambda * lambda;
            prop_assert!((l2 * x.lower.slack - y.lower.slack).abs() <= 1e-12 * y.lower.scale());
            prop_assert!((l2 * x.upper.slack - y.upper.slack).abs() <= 1e-12 * y.upper.scale());
        }

        #[test]
        fn heinz_symmetry(a in positive(), b in positive(), v in 1e-6f64..1.0) {
            let p = pair(a, b);
            prop_assert!(close(young_means(&p, v).heinz, young_means(&p, 1.0 - v).heinz, 1e-14));
        }

        #[test]
        fn branches_agree_at_midpoint(a in positive(), b in positive()) {
            let p = pair(a, b);
            let wt = w(0.5);
            let k = p.kappa_quarter();
            let m = Mutation::WrongBranch;
            prop_assert_eq!(refined_lower(&p, &wt).rhs, refined_lower_with(&p, &wt, k, m).rhs);
            prop_assert_eq!(refined_upper(&p, &wt).rhs, refined_upper_with(&p, &wt, k, m).rhs);
        }

        #[test]
        fn equality_points(a in positive(), b in positive()) {
            let p = pair(a, b);
            for v in [0.25, 0.5, 0.75] {
                prop_assert!(refined_lower(&p, &w(v)).relative_slack().abs() <= 1e-12);
            }
            prop_assert!(refined_upper(&p, &w(0.5)).relative_slack().abs() <= 1e-12);
        }
    }
}
