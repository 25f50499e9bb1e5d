//! Hilbert-Schmidt (Frobenius) norm forms of the squared Young bounds.
//!
//! With `A = U diag(lambda) U^T`, `B = V diag(nu) V^T` and `Y = U^T X V`, every
//! norm below is a sum over `(i, j)` of a scalar expression in
//! `(lambda_i, nu_j)` weighted by `|y_ij|^2`, so the scalar squared bounds
//! lift entrywise with the Kantorovich constant replaced by its minimum over
//! all eigenvalue pairs.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{scalar_leq, SpdMatrix};
use crate::mutation::Mutation;
use crate::operator::ChainReport;
use crate::scalar::{kantorovich_unchecked, Branch, Side, Term, Weight};

/// Relative tolerance for Hilbert-Schmidt comparisons.
pub const DEFAULT_HS_TOL: f64 = 1e-10;

pub const HS_CHAIN_LABELS: [&str; 9] = [
    "zero",
    "geometric",
    "difference_lower",
    "kantorovich_lower",
    "refined_lower",
    "arithmetic",
    "refined_upper",
    "kantorovich_upper",
    "difference_upper",
];

/// Links of [`HS_CHAIN_LABELS`] that carry the refinement over the plain
/// difference bounds.
pub const HS_DOMINANCE_LINKS: [usize; 4] = [2, 3, 6, 7];

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Squared Frobenius norm.
pub fn hs_norm_sq(m: &DMatrix<f64>) -> f64 {
    compensated_sum(m.iter().map(|x| x * x))
}

pub fn hs_norm(m: &DMatrix<f64>) -> f64 {
    hs_norm_sq(m).sqrt()
}

fn pairwise_kappas<'a>(a: &'a SpdMatrix, b: &'a SpdMatrix) -> impl Iterator<Item = f64> + 'a {
    a.eigenvalues().iter().flat_map(move |&l| {
        b.eigenvalues()
            .iter()
            .map(move |&n| kantorovich_unchecked((l / n).sqrt()))
    })
}

/// `min_{i,j} K((lambda_i / nu_j)^{1/2}, 2)` over the eigenvalues of `A` and `B`.
pub fn kappa_min(a: &SpdMatrix, b: &SpdMatrix) -> f64 {
    pairwise_kappas(a, b).fold(f64::INFINITY, f64::min)
}

fn kappa_max(a: &SpdMatrix, b: &SpdMatrix) -> f64 {
    pairwise_kappas(a, b).fold(1.0, f64::max)
}

/// The eigenvalue ratio `lambda_i / nu_j >= 1` (or its reciprocal) at which
/// [`kappa_min`] is attained.
pub fn kappa_min_ratio(a: &SpdMatrix, b: &SpdMatrix) -> f64 {
    let mut best = (f64::INFINITY, 1.0);
    for &l in a.eigenvalues().iter() {
        for &n in b.eigenvalues().iter() {
            let ratio = if l >= n { l / n } else { n / l };
            let k = kantorovich_unchecked(ratio.sqrt());
            if k < best.0 {
                best = (k, ratio);
            }
        }
    }
    best.1
}

#[derive(Debug, Clone)]
pub struct HsInstance {
    pub a: SpdMatrix,
    pub b: SpdMatrix,
    pub x: DMatrix<f64>,
    pub weight: Weight,
    pub tol_rel: f64,
}

impl HsInstance {
    pub fn new(a: SpdMatrix, b: SpdMatrix, x: DMatrix<f64>, weight: Weight) -> Result<Self> {
        let n = a.dim();
        if b.dim() != n || x.shape() != (n, n) {
            return Err(Error::Shape(format!(
                "A is {n}x{n}, B is {m}x{m}, X is {}x{}",
                x.nrows(),
                x.ncols(),
                m = b.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("X has non-finite entries".into()));
        }
        Ok(HsInstance {
            a,
            b,
            x,
            weight,
            tol_rel: DEFAULT_HS_TOL,
        })
    }

    pub fn with_tolerance(mut self, tol_rel: f64) -> Self {
        self.tol_rel = tol_rel;
        self
    }

    pub fn with_weight(&self, weight: Weight) -> Self {
        HsInstance {
            weight,
            ..self.clone()
        }
    }
}

/// The squared norms entering every bound of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HsNorms {
    /// `|(1 - v) AX + v XB|^2`
    pub arith_sq: f64,
    /// `|AX - XB|^2`
    pub diff_sq: f64,
    /// `|A^{1-v} X B^v|^2`
    pub geo_sq: f64,
    /// `|A^{1/2} X B^{1/2} - AX|^2`
    pub mid_a_sq: f64,
    /// `|A^{1/2} X B^{1/2} - XB|^2`
    pub mid_b_sq: f64,
    /// The Kantorovich constant in use, normally [`kappa_min`].
    pub kappa: f64,
}

impl HsNorms {
    pub fn compute(inst: &HsInstance, m: Mutation) -> Result<Self> {
        let (a, b, x) = (inst.a.entries(), inst.b.entries(), &inst.x);
        let v = inst.weight.v;
        let ax = a * x;
        let xb = x * b;
        let mid = inst.a.pow(0.5)?.entries() * x * inst.b.pow(0.5)?.entries();
        let geo = inst.a.pow(1.0 - v)?.entries() * x * inst.b.pow(v)?.entries();
        let kappa = if m == Mutation::MaxPairKappa {
            kappa_max(&inst.a, &inst.b)
        } else {
            kappa_min(&inst.a, &inst.b)
        };
        Ok(HsNorms {
            arith_sq: hs_norm_sq(&(&ax * (1.0 - v) + &xb * v)),
            diff_sq: hs_norm_sq(&(&ax - &xb)),
            geo_sq: hs_norm_sq(&geo),
            mid_a_sq: hs_norm_sq(&(&mid - &ax)),
            mid_b_sq: hs_norm_sq(&(&mid - &xb)),
            kappa,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HsBoundReport {
    pub name: &'static str,
    pub side: Side,
    /// `|(1 - v) AX + v XB|^2`
    pub lhs_sq: f64,
    pub rhs_terms: Vec<Term>,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub tol_used: f64,
}

impl HsBoundReport {
    fn new(name: &'static str, side: Side, lhs_sq: f64, terms: Vec<Term>, tol_rel: f64) -> Self {
        let rhs = compensated_sum(terms.iter().map(|t| t.value));
        let slack = match side {
            Side::Lower => lhs_sq - rhs,
            Side::Upper => rhs - lhs_sq,
        };
        let tol_used = tol_rel * lhs_sq.abs().max(rhs.abs()).max(1.0);
        HsBoundReport {
            name,
            side,
            lhs_sq,
            rhs_terms: terms,
            rhs,
            slack,
            holds: slack >= -tol_used,
            tol_used,
        }
    }

    pub fn relative_slack(&self) -> f64 {
        self.slack / self.lhs_sq.abs().max(self.rhs.abs()).max(1.0)
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.rhs_terms
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.value)
    }
}

fn term(name: &'static str, value: f64) -> Term {
    Term { name, value }
}

struct Coefficients {
    lo_diff: f64,
    lo_mid: f64,
    hi_diff: f64,
    hi_mid: f64,
    r1: f64,
    k_lo: f64,
    k_hi: f64,
    sign: f64,
}

impl Coefficients {
    fn new(w: &Weight, norms: &HsNorms, m: Mutation) -> Self {
        let v = w.v;
        let e = m.kappa_exponent(w.rhat1);
        let (lo_diff, lo_mid, hi_diff, hi_mid) = match m.branch(w) {
            Branch::LowerHalf => (v * v, norms.mid_a_sq, (1.0 - v) * (1.0 - v), norms.mid_b_sq),
            Branch::UpperHalf => ((1.0 - v) * (1.0 - v), norms.mid_b_sq, v * v, norms.mid_a_sq),
        };
        Coefficients {
            lo_diff,
            lo_mid,
            hi_diff,
            hi_mid,
            r1: m.r1(w.r1),
            k_lo: norms.kappa.powf(e),
            k_hi: norms.kappa.powf(-e),
            sign: m.subtraction_sign(),
        }
    }
}

/// Lower bound on `|(1 - v) AX + v XB|^2`: `v^2 |AX - XB|^2 + r1 |A^{1/2} X B^{1/2} - AX|^2
/// + Kmin^{rhat1} |A^{1-v} X B^v|^2` for `v <= 1/2`, mirrored for `v > 1/2`.
pub fn hs_refined_lower(inst: &HsInstance) -> Result<HsBoundReport> {
    hs_refined_lower_with(
        inst,
        &HsNorms::compute(inst, Mutation::None)?,
        Mutation::None,
    )
}

pub fn hs_refined_lower_with(
    inst: &HsInstance,
    norms: &HsNorms,
    m: Mutation,
) -> Result<HsBoundReport> {
    let c = Coefficients::new(&inst.weight, norms, m);
    Ok(HsBoundReport::new(
        "hs_refined_lower",
        Side::Lower,
        norms.arith_sq,
        vec![
            term("difference", c.lo_diff * norms.diff_sq),
            term("middle", c.r1 * c.lo_mid),
            term("kantorovich_geo", c.k_lo * norms.geo_sq),
        ],
        inst.tol_rel,
    ))
}

/// Upper bound on `|(1 - v) AX + v XB|^2`, the reverse of [`hs_refined_lower`].
pub fn hs_refined_upper(inst: &HsInstance) -> Result<HsBoundReport> {
    hs_refined_upper_with(
        inst,
        &HsNorms::compute(inst, Mutation::None)?,
        Mutation::None,
    )
}

pub fn hs_refined_upper_with(
    inst: &HsInstance,
    norms: &HsNorms,
    m: Mutation,
) -> Result<HsBoundReport> {
    let c = Coefficients::new(&inst.weight, norms, m);
    Ok(HsBoundReport::new(
        "hs_refined_upper",
        Side::Upper,
        norms.arith_sq,
        vec![
            term("difference", c.hi_diff * norms.diff_sq),
            term("middle", c.sign * c.r1 * c.hi_mid),
            term("kantorovich_geo", c.k_hi * norms.geo_sq),
        ],
        inst.tol_rel,
    ))
}

/// The plain bounds `r^2 |AX - XB|^2 <= |(1 - v) AX + v XB|^2 - |A^{1-v} X B^v|^2 <= R^2 |AX - XB|^2`.
pub fn hs_difference_bounds(inst: &HsInstance, norms: &HsNorms) -> [HsBoundReport; 2] {
    let w = &inst.weight;
    [
        HsBoundReport::new(
            "hs_difference_lower",
            Side::Lower,
            norms.arith_sq,
            vec![
                term("difference", w.r * w.r * norms.diff_sq),
                term("geo", norms.geo_sq),
            ],
            inst.tol_rel,
        ),
        HsBoundReport::new(
            "hs_difference_upper",
            Side::Upper,
            norms.arith_sq,
            vec![
                term("difference", w.big_r * w.big_r * norms.diff_sq),
                term("geo", norms.geo_sq),
            ],
            inst.tol_rel,
        ),
    ]
}

/// The nine chain terms labelled by [`HS_CHAIN_LABELS`].
pub fn hs_chain_terms(inst: &HsInstance, norms: &HsNorms, m: Mutation) -> [f64; 9] {
    let c = Coefficients::new(&inst.weight, norms, m);
    let (d, g) = (norms.diff_sq, norms.geo_sq);
    let lo = c.lo_diff * d;
    let hi = c.hi_diff * d;
    [
        0.0,
        g,
        lo + g,
        lo + c.k_lo * g,
        compensated_sum([lo, c.r1 * c.lo_mid, c.k_lo * g]),
        norms.arith_sq,
        compensated_sum([hi, c.sign * c.r1 * c.hi_mid, c.k_hi * g]),
        hi + c.k_hi * g,
        hi + g,
    ]
}

pub fn hs_chain_with(inst: &HsInstance, norms: &HsNorms, m: Mutation) -> ChainReport {
    let terms = hs_chain_terms(inst, norms, m);
    let verdicts = terms
        .windows(2)
        .map(|w| scalar_leq(w[0], w[1], inst.tol_rel))
        .collect();
    ChainReport::new(&HS_CHAIN_LABELS, terms.to_vec(), verdicts)
}

pub fn hs_chain(inst: &HsInstance) -> Result<ChainReport> {
    Ok(hs_chain_with(
        inst,
        &HsNorms::compute(inst, Mutation::None)?,
        Mutation::None,
    ))
}
