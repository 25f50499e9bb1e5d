//! Randomized verification of every bound family.
//!
//! Trials are independent: trial `i` draws from a ChaCha8 stream keyed by
//! `(seed, i)`, so a report is reproducible from its config alone and any
//! single trial can be replayed from a fingerprint.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hs::{
    hs_chain_with, hs_difference_bounds, hs_refined_lower_with, hs_refined_upper_with,
    kappa_min_ratio, HsBoundReport, HsInstance, HsNorms, HS_CHAIN_LABELS, HS_DOMINANCE_LINKS,
};
use crate::matrix::{scalar_leq, LoewnerVerdict, SpdMatrix};
use crate::mutation::Mutation;
use crate::operator::{ChainReport, OperatorPair};
use crate::scalar::{
    heinz_refined_with, refined_lower_with, refined_upper_with, scalar_baselines, scalar_chain,
    squared_bounds_with, young_means, ScalarBoundSet, ScalarPair, Weight, CHAIN_DOMINANCE_LINKS,
    CHAIN_LABELS,
};
use crate::Family;

pub const REPORT_SCHEMA: u32 = 1;

const CHUNK: u64 = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzConfig {
    pub family: Family,
    pub trials: u64,
    /// Matrix dimensions, cycled over trials. Ignored for scalars.
    pub dims: Vec<usize>,
    /// Eigenvalues (or scalars) are drawn log-uniformly from this range.
    pub spectrum_range: (f64, f64),
    /// Relative gap `M/m - 1` between the two spectra of an operator pair.
    pub sandwich_gap: f64,
    /// Weights evaluated in every trial.
    pub v_grid: Vec<f64>,
    /// Additional uniformly drawn weights per trial.
    pub v_random: usize,
    pub seed: u64,
    pub tol_rel: f64,
    /// Tolerance for the refined-versus-baseline margins.
    pub dominance_tol: f64,
    #[serde(default)]
    pub mutation: Mutation,
}

impl FuzzConfig {
    pub fn scalar() -> Self {
        FuzzConfig {
            family: Family::Scalar,
            trials: 100_000,
            dims: vec![1],
            spectrum_range: (1e-6, 1e6),
            sandwich_gap: 0.0,
            v_grid: vec![0.25, 0.5, 0.75],
            v_random: 1,
            seed: 0,
            tol_rel: 1e-12,
            dominance_tol: 1e-14,
            mutation: Mutation::None,
        }
    }

    pub fn operator() -> Self {
        FuzzConfig {
            family: Family::Operator,
            trials: 1500,
            dims: vec![2, 4, 8],
            spectrum_range: (1e-2, 1e2),
            sandwich_gap: 0.1,
            v_grid: (1..20).map(|k| k as f64 / 20.0).collect(),
            v_random: 2,
            seed: 0,
            tol_rel: 1e-8,
            dominance_tol: 1e-8,
            mutation: Mutation::None,
        }
    }

    pub fn hs() -> Self {
        FuzzConfig {
            family: Family::Hs,
            sandwich_gap: 0.0,
            tol_rel: 1e-10,
            dominance_tol: 1e-10,
            ..FuzzConfig::operator()
        }
    }

    pub fn for_family(family: Family) -> Self {
        match family {
            Family::Scalar => FuzzConfig::scalar(),
            Family::Operator => FuzzConfig::operator(),
            Family::Hs => FuzzConfig::hs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.spectrum_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::Domain(format!(
                "spectrum range [{lo}, {hi}] must satisfy 0 < lo <= hi"
            )));
        }
        if self.family != Family::Scalar && (self.dims.is_empty() || self.dims.contains(&0)) {
            return Err(Error::Domain(
                "dims must be a nonempty list of positive sizes".into(),
            ));
        }
        if self.family == Family::Operator {
            if !(self.sandwich_gap > 0.0 && self.sandwich_gap.is_finite()) {
                return Err(Error::Domain("sandwich gap must be positive".into()));
            }
            if hi / lo <= 1.0 + self.sandwich_gap {
                return Err(Error::Domain(format!(
                    "spectrum range [{lo}, {hi}] is too narrow for gap {}",
                    self.sandwich_gap
                )));
            }
        }
        if let Some(v) = self.v_grid.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::Domain(format!("grid weight {v} is outside (0, 1)")));
        }
        if self.v_grid.is_empty() && self.v_random == 0 {
            return Err(Error::Domain("no weights to evaluate".into()));
        }
        for (name, t) in [("tol", self.tol_rel), ("dominance tol", self.dominance_tol)] {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("{name} must be finite and >= 0")));
            }
        }
        if self.mutation != Mutation::None && self.mutation.family() != self.family {
            return Err(Error::Domain(format!(
                "mutation {} belongs to the {} family",
                self.mutation,
                self.mutation.family()
            )));
        }
        Ok(())
    }
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.random_range(lo.ln()..hi.ln()).exp().clamp(lo, hi)
}

fn random_weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            return v;
        }
    }
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// SPD matrix with eigenvalues log-uniform in `range` and a random eigenbasis.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, range: (f64, f64)) -> Result<SpdMatrix> {
    let values: Vec<f64> = (0..n).map(|_| log_uniform(rng, range.0, range.1)).collect();
    SpdMatrix::from_spectrum(&values, &random_orthogonal(rng, n))
}

pub fn gen_spd(n: usize, range: (f64, f64), seed: u64) -> Result<SpdMatrix> {
    if n == 0 || !(range.0 > 0.0 && range.0 <= range.1) {
        return Err(Error::Domain("need n >= 1 and 0 < lo <= hi".into()));
    }
    random_spd(&mut trial_rng(seed, 0), n, range)
}

/// A pair with one spectrum in `[lo, m]` and the other in `[m(1 + gap), hi]`.
/// Which of the two is the lower one is random.
pub fn random_sandwich_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    range: (f64, f64),
    gap: f64,
) -> Result<(SpdMatrix, SpdMatrix)> {
    let (lo, hi) = range;
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::Domain(format!(
            "sandwich gap must be positive, got {gap}"
        )));
    }
    if !(lo > 0.0 && hi / lo > 1.0 + gap) {
        return Err(Error::Domain(format!(
            "range [{lo}, {hi}] cannot hold two spectra separated by gap {gap}"
        )));
    }
    let m = log_uniform(rng, lo, hi / (1.0 + gap));
    let big_m = m * (1.0 + gap);
    let low = random_spd(rng, n, (lo, m))?;
    let high = random_spd(rng, n, (big_m, hi))?;
    if rng.random::<bool>() {
        Ok((high, low))
    } else {
        Ok((low, high))
    }
}

pub fn gen_sandwich_pair(n: usize, gap: f64, seed: u64) -> Result<(SpdMatrix, SpdMatrix)> {
    if n == 0 {
        return Err(Error::Domain("need n >= 1".into()));
    }
    random_sandwich_pair(
        &mut trial_rng(seed, 0),
        n,
        FuzzConfig::operator().spectrum_range,
        gap,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// One of the refined inequalities.
    Theorem,
    /// A classical inequality the refinements start from.
    Baseline,
    /// A link of the ordered chain of bounds.
    Chain,
    /// Refined bound at least as tight as its baseline.
    Dominance,
}

/// Everything needed to locate and replay one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub check: String,
    pub seed: u64,
    pub trial: u64,
    pub n: usize,
    pub v: f64,
    pub branch: String,
    pub h: f64,
    /// Value (scalar, HS) or trace (operator) of the smaller side.
    pub lhs: f64,
    pub rhs: f64,
    /// Absolute slack; the smallest eigenvalue of the difference for operators.
    pub slack: f64,
    pub relative_slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
    pub max: f64,
}

impl Quantiles {
    fn from_samples(mut s: Vec<f32>) -> Option<Self> {
        if s.is_empty() {
            return None;
        }
        s.sort_by(f32::total_cmp);
        let at = |q: f64| s[((s.len() - 1) as f64 * q).round() as usize] as f64;
        Some(Quantiles {
            min: at(0.0),
            p10: at(0.1),
            p50: at(0.5),
            p90: at(0.9),
            max: at(1.0),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub kind: CheckKind,
    pub evaluations: u64,
    pub violations: u64,
    /// Smallest relative slack seen.
    pub worst: Option<Fingerprint>,
    /// Largest relative slack seen.
    pub best: Option<Fingerprint>,
    /// Exact quantiles of the relative slack over random-weight evaluations.
    pub quantiles: Option<Quantiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub schema: u32,
    pub config: FuzzConfig,
    pub trials_run: u64,
    pub evaluations: u64,
    /// Failed theorem, baseline and chain checks.
    pub violations: u64,
    pub dominance_violations: u64,
    pub worst: Option<Fingerprint>,
    pub checks: Vec<CheckSummary>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.dominance_violations == 0
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// One evaluation, as written to CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub family: Family,
    pub theorem: String,
    pub branch: String,
    pub n: usize,
    pub v: f64,
    pub h: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub seed: u64,
    pub trial: u64,
}

struct Sample {
    lhs: f64,
    rhs: f64,
    slack: f64,
    rel: f64,
}

impl Sample {
    fn bound(b: &ScalarBoundSet) -> Self {
        let (lhs, rhs) = order(b.side == crate::scalar::Side::Lower, b.lhs, b.rhs);
        Sample {
            lhs,
            rhs,
            slack: b.slack,
            rel: b.relative_slack(),
        }
    }

    fn hs(b: &HsBoundReport) -> Self {
        let (lhs, rhs) = order(b.side == crate::scalar::Side::Lower, b.lhs_sq, b.rhs);
        Sample {
            lhs,
            rhs,
            slack: b.slack,
            rel: b.relative_slack(),
        }
    }

    fn verdict(lhs: f64, rhs: f64, v: &LoewnerVerdict) -> Self {
        Sample {
            lhs,
            rhs,
            slack: v.min_eig,
            rel: v.relative(),
        }
    }
}

/// Orders a bound so that `lhs <= rhs` is the claim.
fn order(lower: bool, value: f64, bound: f64) -> (f64, f64) {
    if lower {
        (bound, value)
    } else {
        (value, bound)
    }
}

struct Context {
    trial: u64,
    n: usize,
    v: f64,
    branch: &'static str,
    h: f64,
    sampled: bool,
}

#[derive(Default)]
struct CheckAcc {
    evaluations: u64,
    violations: u64,
    worst: Option<Fingerprint>,
    best: Option<Fingerprint>,
    samples: Vec<f32>,
}

struct Acc<'a> {
    cfg: &'a FuzzConfig,
    checks: &'a [(String, CheckKind)],
    acc: Vec<CheckAcc>,
    rows: Option<Vec<CsvRow>>,
    trials: u64,
}

impl<'a> Acc<'a> {
    fn new(cfg: &'a FuzzConfig, checks: &'a [(String, CheckKind)], rows: bool) -> Self {
        Acc {
            cfg,
            checks,
            acc: checks.iter().map(|_| CheckAcc::default()).collect(),
            rows: rows.then(Vec::new),
            trials: 0,
        }
    }

    fn record(&mut self, idx: usize, ctx: &Context, s: Sample) {
        let (name, kind) = &self.checks[idx];
        let tol = if *kind == CheckKind::Dominance {
            self.cfg.dominance_tol
        } else {
            self.cfg.tol_rel
        };
        let a = &mut self.acc[idx];
        a.evaluations += 1;
        if s.rel.is_nan() || s.rel < -tol {
            a.violations += 1;
        }
        if ctx.sampled {
            a.samples.push(s.rel as f32);
        }
        let fingerprint = || Fingerprint {
            check: name.clone(),
            seed: self.cfg.seed,
            trial: ctx.trial,
            n: ctx.n,
            v: ctx.v,
            branch: ctx.branch.to_string(),
            h: ctx.h,
            lhs: s.lhs,
            rhs: s.rhs,
            slack: s.slack,
            relative_slack: s.rel,
        };
        if a.worst
            .as_ref()
            .is_none_or(|w| s.rel < w.relative_slack || s.rel.is_nan())
        {
            a.worst = Some(fingerprint());
        }
        if a.best.as_ref().is_none_or(|b| s.rel > b.relative_slack) {
            a.best = Some(fingerprint());
        }
        if let Some(rows) = &mut self.rows {
            rows.push(CsvRow {
                family: self.cfg.family,
                theorem: name.clone(),
                branch: ctx.branch.to_string(),
                n: ctx.n,
                v: ctx.v,
                h: ctx.h,
                lhs: s.lhs,
                rhs: s.rhs,
                slack: s.slack,
                seed: self.cfg.seed,
                trial: ctx.trial,
            });
        }
    }

    fn merge(&mut self, other: Acc<'a>) {
        self.trials += other.trials;
        for (a, b) in self.acc.iter_mut().zip(other.acc) {
            a.evaluations += b.evaluations;
            a.violations += b.violations;
            if let Some(w) = b.worst {
                if a.worst
                    .as_ref()
                    .is_none_or(|x| w.relative_slack < x.relative_slack)
                {
                    a.worst = Some(w);
                }
            }
            if let Some(w) = b.best {
                if a.best
                    .as_ref()
                    .is_none_or(|x| w.relative_slack > x.relative_slack)
                {
                    a.best = Some(w);
                }
            }
            a.samples.extend(b.samples);
        }
        if let (Some(rows), Some(more)) = (&mut self.rows, other.rows) {
            rows.extend(more);
        }
    }

    fn finish(self) -> (FuzzReport, Vec<CsvRow>) {
        let mut violations = 0;
        let mut dominance_violations = 0;
        let mut evaluations = 0;
        let mut worst: Option<Fingerprint> = None;
        let checks = self
            .checks
            .iter()
            .zip(self.acc)
            .map(|((name, kind), a)| {
                evaluations += a.evaluations;
                if *kind == CheckKind::Dominance {
                    dominance_violations += a.violations;
                } else {
                    violations += a.violations;
                }
                if let Some(w) = &a.worst {
                    if worst
                        .as_ref()
                        .is_none_or(|x| w.relative_slack < x.relative_slack)
                    {
                        worst = Some(w.clone());
                    }
                }
                CheckSummary {
                    name: name.clone(),
                    kind: *kind,
                    evaluations: a.evaluations,
                    violations: a.violations,
                    worst: a.worst,
                    best: a.best,
                    quantiles: Quantiles::from_samples(a.samples),
                }
            })
            .collect();
        let report = FuzzReport {
            schema: REPORT_SCHEMA,
            config: self.cfg.clone(),
            trials_run: self.trials,
            evaluations,
            violations,
            dominance_violations,
            worst,
            checks,
        };
        (report, self.rows.unwrap_or_default())
    }
}

fn link_kind(i: usize, dominance: &[usize], theorem: &[usize]) -> CheckKind {
    if dominance.contains(&i) {
        CheckKind::Dominance
    } else if theorem.contains(&i) {
        CheckKind::Theorem
    } else {
        CheckKind::Chain
    }
}

fn chain_checks(
    labels: &[&str],
    dominance: &[usize],
    theorem: &[usize],
) -> Vec<(String, CheckKind)> {
    labels
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            (
                format!("chain:{}<={}", w[0], w[1]),
                link_kind(i, dominance, theorem),
            )
        })
        .collect()
}

const SCALAR_BOUNDS: [(&str, CheckKind); 13] = [
    ("refined_lower", CheckKind::Theorem),
    ("refined_upper", CheckKind::Theorem),
    ("squared_lower", CheckKind::Theorem),
    ("squared_upper", CheckKind::Theorem),
    ("heinz_lower", CheckKind::Theorem),
    ("heinz_upper", CheckKind::Theorem),
    ("young", CheckKind::Baseline),
    ("difference_lower", CheckKind::Baseline),
    ("difference_upper", CheckKind::Baseline),
    ("coarse_kantorovich_lower", CheckKind::Baseline),
    ("coarse_kantorovich_upper", CheckKind::Baseline),
    ("baseline_lower", CheckKind::Baseline),
    ("baseline_upper", CheckKind::Baseline),
];

const OPERATOR_EXTRA: [(&str, CheckKind); 4] = [
    ("heinz_lower", CheckKind::Theorem),
    ("heinz_upper", CheckKind::Theorem),
    ("geometric<=heinz", CheckKind::Baseline),
    ("heinz<=arithmetic", CheckKind::Baseline),
];

const HS_BOUNDS: [(&str, CheckKind); 4] = [
    ("hs_refined_lower", CheckKind::Theorem),
    ("hs_refined_upper", CheckKind::Theorem),
    ("hs_difference_lower", CheckKind::Baseline),
    ("hs_difference_upper", CheckKind::Baseline),
];

fn owned(list: &[(&str, CheckKind)]) -> Vec<(String, CheckKind)> {
    list.iter().map(|(n, k)| (n.to_string(), *k)).collect()
}

/// Names and kinds of the checks a family runs, in report order.
pub fn checks_for(family: Family) -> Vec<(String, CheckKind)> {
    match family {
        Family::Scalar => {
            let mut c = owned(&SCALAR_BOUNDS);
            c.extend(chain_checks(&CHAIN_LABELS, &CHAIN_DOMINANCE_LINKS, &[4, 5]));
            c
        }
        Family::Operator => {
            let mut c = chain_checks(&CHAIN_LABELS, &CHAIN_DOMINANCE_LINKS, &[4, 5]);
            c.extend(owned(&OPERATOR_EXTRA));
            c
        }
        Family::Hs => {
            let mut c = owned(&HS_BOUNDS);
            c.extend(chain_checks(&HS_CHAIN_LABELS, &HS_DOMINANCE_LINKS, &[4, 5]));
            c
        }
    }
}

fn weights<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig) -> Vec<(f64, bool)> {
    let mut vs: Vec<(f64, bool)> = cfg.v_grid.iter().map(|&v| (v, false)).collect();
    vs.extend((0..cfg.v_random).map(|_| (random_weight(rng), true)));
    vs
}

fn record_chain(acc: &mut Acc, first: usize, ctx: &Context, chain: &ChainReport) {
    for (i, verdict) in chain.verdicts.iter().enumerate() {
        let s = Sample::verdict(chain.values[i], chain.values[i + 1], verdict);
        acc.record(first + i, ctx, s);
    }
}

fn scalar_trial(acc: &mut Acc, rng: &mut ChaCha8Rng, trial: u64) -> Result<()> {
    let cfg = acc.cfg;
    let m = cfg.mutation;
    let (lo, hi) = cfg.spectrum_range;
    let p = ScalarPair::new(log_uniform(rng, lo, hi), log_uniform(rng, lo, hi))?;
    let kq = p.kappa_quarter();
    let kh = p.kappa_half();
    let any_random = cfg.v_random > 0;
    for (v, random) in weights(rng, cfg) {
        let w = Weight::new(v)?;
        let ctx = Context {
            trial,
            n: 1,
            v,
            branch: w.branch().label(),
            h: p.h(),
            sampled: random || !any_random,
        };
        let lower = refined_lower_with(&p, &w, kq, m);
        let upper = refined_upper_with(&p, &w, kq, m);
        let sq = squared_bounds_with(&p, &w, kh, m);
        let heinz = heinz_refined_with(&p, &w, kq, m);
        let means = young_means(&p, v);
        let young = scalar_leq(means.geo, means.arith, cfg.tol_rel);
        let mut i = 0;
        for b in [
            &lower,
            &upper,
            &sq.lower,
            &sq.upper,
            &heinz.lower,
            &heinz.upper,
        ] {
            acc.record(i, &ctx, Sample::bound(b));
            i += 1;
        }
        acc.record(i, &ctx, Sample::verdict(means.geo, means.arith, &young));
        i += 1;
        for b in scalar_baselines(&p, &w) {
            acc.record(i, &ctx, Sample::bound(&b));
            i += 1;
        }
        let terms = scalar_chain(&p, &w, kq, m);
        for (k, pair) in terms.windows(2).enumerate() {
            let verdict = scalar_leq(pair[0], pair[1], 0.0);
            acc.record(i + k, &ctx, Sample::verdict(pair[0], pair[1], &verdict));
        }
    }
    Ok(())
}

fn operator_trial(acc: &mut Acc, rng: &mut ChaCha8Rng, trial: u64) -> Result<()> {
    let cfg = acc.cfg;
    let n = cfg.dims[(trial % cfg.dims.len() as u64) as usize];
    let (a, b) = random_sandwich_pair(rng, n, cfg.spectrum_range, cfg.sandwich_gap)?;
    let pair = OperatorPair::new(a, b)?.with_tolerance(cfg.tol_rel);
    let h = pair.sandwich().h;
    let any_random = cfg.v_random > 0;
    for (v, random) in weights(rng, cfg) {
        let w = Weight::new(v)?;
        let ctx = Context {
            trial,
            n,
            v,
            branch: w.branch().label(),
            h,
            sampled: random || !any_random,
        };
        let ev = pair.evaluate(&w, cfg.mutation)?;
        let chain = ev.chain()?;
        record_chain(acc, 0, &ctx, &chain);
        let k = chain.verdicts.len();
        let heinz = ev.heinz_bounds()?;
        let between = ev.heinz_between()?;
        let nabla = ev.mid_nabla.trace();
        let hv = ev.heinz_v.trace();
        acc.record(
            k,
            &ctx,
            Sample::verdict(ev.heinz_lower.trace(), nabla, &heinz.lower),
        );
        acc.record(
            k + 1,
            &ctx,
            Sample::verdict(nabla, ev.heinz_upper.trace(), &heinz.upper),
        );
        acc.record(
            k + 2,
            &ctx,
            Sample::verdict(ev.half.trace(), hv, &between.lower),
        );
        acc.record(k + 3, &ctx, Sample::verdict(hv, nabla, &between.upper));
    }
    Ok(())
}

fn hs_trial(acc: &mut Acc, rng: &mut ChaCha8Rng, trial: u64) -> Result<()> {
    let cfg = acc.cfg;
    let m = cfg.mutation;
    let n = cfg.dims[(trial % cfg.dims.len() as u64) as usize];
    let a = random_spd(rng, n, cfg.spectrum_range)?;
    let b = random_spd(rng, n, cfg.spectrum_range)?;
    let x = gaussian_matrix(rng, n);
    let h = kappa_min_ratio(&a, &b);
    let base = HsInstance::new(a, b, x, Weight::new(0.5)?)?.with_tolerance(cfg.tol_rel);
    let any_random = cfg.v_random > 0;
    for (v, random) in weights(rng, cfg) {
        let w = Weight::new(v)?;
        let ctx = Context {
            trial,
            n,
            v,
            branch: w.branch().label(),
            h,
            sampled: random || !any_random,
        };
        let inst = base.with_weight(w);
        let norms = HsNorms::compute(&inst, m)?;
        let [dlo, dhi] = hs_difference_bounds(&inst, &norms);
        let bounds = [
            hs_refined_lower_with(&inst, &norms, m)?,
            hs_refined_upper_with(&inst, &norms, m)?,
            dlo,
            dhi,
        ];
        for (i, b) in bounds.iter().enumerate() {
            acc.record(i, &ctx, Sample::hs(b));
        }
        record_chain(acc, bounds.len(), &ctx, &hs_chain_with(&inst, &norms, m));
    }
    Ok(())
}

fn run(cfg: &FuzzConfig, rows: bool) -> Result<(FuzzReport, Vec<CsvRow>)> {
    cfg.validate()?;
    let checks = checks_for(cfg.family);
    let trial_fn = match cfg.family {
        Family::Scalar => scalar_trial,
        Family::Operator => operator_trial,
        Family::Hs => hs_trial,
    };
    let chunks = cfg.trials.div_ceil(CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Acc::new(cfg, &checks, rows);
            for trial in c * CHUNK..((c + 1) * CHUNK).min(cfg.trials) {
                let mut rng = trial_rng(cfg.seed, trial);
                trial_fn(&mut acc, &mut rng, trial).map_err(|e| Error::Trial {
                    seed: cfg.seed,
                    trial,
                    source: Box::new(e),
                })?;
                acc.trials += 1;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = Acc::new(cfg, &checks, rows);
    for part in parts {
        total.merge(part);
    }
    Ok(total.finish())
}

pub fn fuzz_run(cfg: &FuzzConfig) -> Result<FuzzReport> {
    run(cfg, false).map(|(r, _)| r)
}

/// Like [`fuzz_run`], also returning one row per evaluation.
pub fn fuzz_run_with_rows(cfg: &FuzzConfig) -> Result<(FuzzReport, Vec<CsvRow>)> {
    run(cfg, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub check: String,
    pub evaluations: u64,
    pub violations: u64,
    pub quantiles: Option<Quantiles>,
    /// Instance with the largest relative margin over the baseline.
    pub max_improvement: Option<Fingerprint>,
    pub min_improvement: Option<Fingerprint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub schema: u32,
    pub config: FuzzConfig,
    pub rows: Vec<TightnessRow>,
    pub dominance_violations: u64,
}

/// How much the refined bounds gain over their baselines.
pub fn tightness_report(cfg: &FuzzConfig) -> Result<TightnessReport> {
    let report = fuzz_run(cfg)?;
    let rows = report
        .checks
        .iter()
        .filter(|c| c.kind == CheckKind::Dominance)
        .map(|c| TightnessRow {
            check: c.name.clone(),
            evaluations: c.evaluations,
            violations: c.violations,
            quantiles: c.quantiles,
            max_improvement: c.best.clone(),
            min_improvement: c.worst.clone(),
        })
        .collect();
    Ok(TightnessReport {
        schema: REPORT_SCHEMA,
        config: report.config,
        rows,
        dominance_violations: report.dominance_violations,
    })
}
