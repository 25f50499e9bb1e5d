use std::io::{self, Write};
use std::path::Path;

use nalgebra::DMatrix;
use refined_young::hs::{hs_chain_with, hs_refined_lower_with, hs_refined_upper_with};
use refined_young::matrix::Orientation;
use refined_young::scalar::{squared_bounds, young_means};
use refined_young::{
    heinz_refined, hs_difference_bounds, improvement, refined_lower, refined_upper,
    scalar_baselines, ChainReport, FuzzConfig, HsBoundReport, HsInstance, HsNorms, LoewnerVerdict,
    Mutation, OperatorPair, ScalarBoundSet, ScalarPair, SpdMatrix, SpectralSandwich, Weight,
    DEFAULT_SCALAR_TOL,
};

use crate::input::{read_matrix, read_spd};

/// Fixed five-decimal rendering, with negative zero printed as zero.
pub fn fmt5(x: f64) -> String {
    let s = format!("{x:.5}");
    if s == "-0.00000" {
        "0.00000".into()
    } else {
        s
    }
}

struct Out<W: Write> {
    w: W,
    ok: bool,
}

impl<W: Write> Out<W> {
    fn num(&mut self, key: &str, x: f64) -> io::Result<()> {
        writeln!(self.w, "{key}={}", fmt5(x))
    }

    fn text(&mut self, key: &str, x: impl std::fmt::Display) -> io::Result<()> {
        writeln!(self.w, "{key}={x}")
    }

    fn flag(&mut self, key: &str, holds: bool) -> io::Result<()> {
        self.ok &= holds;
        self.text(key, holds)
    }

    fn bound(&mut self, b: &ScalarBoundSet) -> io::Result<()> {
        self.num(&format!("{}.lhs", b.name), b.lhs)?;
        for t in &b.terms {
            self.num(&format!("{}.{}", b.name, t.name), t.value)?;
        }
        self.num(&format!("{}.rhs", b.name), b.rhs)?;
        self.num(&format!("{}.slack", b.name), b.slack)?;
        self.flag(&format!("{}.holds", b.name), b.holds(DEFAULT_SCALAR_TOL))
    }

    fn hs_bound(&mut self, b: &HsBoundReport) -> io::Result<()> {
        self.num(&format!("{}.lhs", b.name), b.lhs_sq)?;
        for t in &b.rhs_terms {
            self.num(&format!("{}.{}", b.name, t.name), t.value)?;
        }
        self.num(&format!("{}.rhs", b.name), b.rhs)?;
        self.num(&format!("{}.slack", b.name), b.slack)?;
        self.flag(&format!("{}.holds", b.name), b.holds)
    }

    fn verdict(&mut self, name: &str, v: &LoewnerVerdict) -> io::Result<()> {
        self.num(&format!("{name}.min_eig"), v.min_eig)?;
        self.flag(&format!("{name}.holds"), v.holds)
    }

    fn chain(&mut self, c: &ChainReport) -> io::Result<()> {
        for (i, v) in c.verdicts.iter().enumerate() {
            self.num(&format!("chain.{}.slack", c.link_name(i)), v.min_eig)?;
        }
        self.flag("chain.all_hold", c.all_hold)
    }

    fn weight(&mut self, w: &Weight) -> io::Result<()> {
        self.num("v", w.v)?;
        self.text("branch", w.branch().label())?;
        self.num("r", w.r)?;
        self.num("big_r", w.big_r)?;
        self.num("r1", w.r1)?;
        self.num("rhat1", w.rhat1)
    }

    fn code(&self) -> i32 {
        if self.ok {
            0
        } else {
            1
        }
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `Some(v)` for an interior weight, `None` for the endpoints 0 and 1 where
/// every bound collapses to an identity.
fn interior(v: f64) -> Result<Option<Weight>, String> {
    if v == 0.0 || v == 1.0 {
        Ok(None)
    } else {
        Weight::new(v).map(Some).map_err(err)
    }
}

pub fn scalar(a: f64, b: f64, v: f64, w: impl Write) -> Result<i32, String> {
    let p = ScalarPair::new(a, b).map_err(err)?;
    let weight = interior(v)?;
    let mut out = Out { w, ok: true };
    let means = young_means(&p, v);
    (|| -> io::Result<()> {
        out.num("a", a)?;
        out.num("b", b)?;
        let Some(w) = weight else {
            out.num("v", v)?;
            out.text("trivial", true)?;
            out.num("arith", means.arith)?;
            out.num("geo", means.geo)?;
            return out.num("slack", means.arith - means.geo);
        };
        out.weight(&w)?;
        out.num("h", p.h())?;
        out.num("kappa_quarter", p.kappa_quarter())?;
        out.num("kappa_half", p.kappa_half())?;
        out.num("arith", means.arith)?;
        out.num("geo", means.geo)?;
        out.num("heinz", means.heinz)?;
        out.bound(&refined_lower(&p, &w))?;
        out.bound(&refined_upper(&p, &w))?;
        let heinz = heinz_refined(&p, &w);
        out.bound(&heinz.lower)?;
        out.bound(&heinz.upper)?;
        let sq = squared_bounds(&p, &w);
        out.bound(&sq.lower)?;
        out.bound(&sq.upper)?;
        for b in scalar_baselines(&p, &w) {
            out.bound(&b)?;
        }
        let imp = improvement(&p, &w);
        out.num("improvement.lower", imp.lower)?;
        out.num("improvement.upper", imp.upper)
    })()
    .map_err(err)?;
    Ok(out.code())
}

fn diag_list(m: &DMatrix<f64>) -> String {
    m.diagonal()
        .iter()
        .map(|x| fmt5(*x))
        .collect::<Vec<_>>()
        .join(",")
}

fn trivial_matrix(
    mut out: Out<impl Write>,
    v: f64,
    a: &SpdMatrix,
    b: &SpdMatrix,
) -> Result<i32, String> {
    let (lhs, rhs) = if v == 0.0 { (a, a) } else { (b, b) };
    (|| -> io::Result<()> {
        out.num("v", v)?;
        out.text("trivial", true)?;
        out.num("lhs_trace", lhs.entries().trace())?;
        out.num("rhs_trace", rhs.entries().trace())
    })()
    .map_err(err)?;
    Ok(0)
}

pub fn operator(
    a_file: &Path,
    b_file: &Path,
    v: f64,
    sandwich: Option<&[f64]>,
    tol: Option<f64>,
    w: impl Write,
) -> Result<i32, String> {
    let a = read_spd(a_file)?;
    let b = read_spd(b_file)?;
    let weight = interior(v)?;
    let out = Out { w, ok: true };
    let pair = match sandwich {
        Some(&[mp, m, big_m, big_mp]) => {
            let s = SpectralSandwich::checked(&a, &b, mp, m, big_m, big_mp).map_err(err)?;
            OperatorPair::with_sandwich(a.clone(), b.clone(), s)
        }
        Some(other) => {
            return Err(format!(
                "--sandwich takes four values m',m,M,M', got {}",
                other.len()
            ))
        }
        None => OperatorPair::new(a.clone(), b.clone()),
    }
    .map_err(err)?
    .with_tolerance(tol.unwrap_or(FuzzConfig::operator().tol_rel));
    let Some(w) = weight else {
        return trivial_matrix(out, v, &a, &b);
    };
    let ev = pair.evaluate(&w, Mutation::None).map_err(err)?;
    let lower = ev.refined_lower().map_err(err)?;
    let upper = ev.refined_upper().map_err(err)?;
    let heinz = ev.heinz_bounds().map_err(err)?;
    let chain = ev.chain().map_err(err)?;
    let s = *pair.sandwich();
    let mut out = out;
    (|| -> io::Result<()> {
        out.text("n", a.dim())?;
        out.weight(&w)?;
        let orientation = match s.orientation {
            Orientation::ABelowB => "a_below_b",
            Orientation::BBelowA => "b_below_a",
        };
        out.text("orientation", orientation)?;
        out.num("m_prime", s.m_prime)?;
        out.num("m", s.m)?;
        out.num("big_m", s.big_m)?;
        out.num("big_m_prime", s.big_m_prime)?;
        out.num("h", s.h)?;
        out.num("h_prime", s.h_prime)?;
        out.num("kappa", pair.kappa())?;
        out.text("kappa_pow", format!("{:.6}", pair.kappa().powf(w.rhat1)))?;
        out.num("refined_lower.lhs_trace", lower.lhs.trace())?;
        out.num("refined_lower.rhs_trace", lower.rhs.trace())?;
        out.text(
            "refined_lower.slack_diag",
            diag_list(&(&lower.lhs - &lower.rhs)),
        )?;
        out.verdict("refined_lower", &lower.verdict)?;
        out.num("refined_upper.lhs_trace", upper.lhs.trace())?;
        out.num("refined_upper.rhs_trace", upper.rhs.trace())?;
        out.text(
            "refined_upper.slack_diag",
            diag_list(&(&upper.rhs - &upper.lhs)),
        )?;
        out.verdict("refined_upper", &upper.verdict)?;
        out.verdict("heinz_lower", &heinz.lower)?;
        out.verdict("heinz_upper", &heinz.upper)?;
        out.chain(&chain)
    })()
    .map_err(err)?;
    Ok(out.code())
}

pub fn hs(
    a_file: &Path,
    b_file: &Path,
    x_file: &Path,
    v: f64,
    tol: Option<f64>,
    w: impl Write,
) -> Result<i32, String> {
    let a = read_spd(a_file)?;
    let b = read_spd(b_file)?;
    let x = read_matrix(x_file)?;
    let weight = interior(v)?;
    let out = Out { w, ok: true };
    let Some(w) = weight else {
        return trivial_matrix(out, v, &a, &b);
    };
    let n = a.dim();
    let inst = HsInstance::new(a, b, x, w)
        .map_err(err)?
        .with_tolerance(tol.unwrap_or(FuzzConfig::hs().tol_rel));
    let norms = HsNorms::compute(&inst, Mutation::None).map_err(err)?;
    let lower = hs_refined_lower_with(&inst, &norms, Mutation::None).map_err(err)?;
    let upper = hs_refined_upper_with(&inst, &norms, Mutation::None).map_err(err)?;
    let [dlo, dhi] = hs_difference_bounds(&inst, &norms);
    let chain = hs_chain_with(&inst, &norms, Mutation::None);
    let mut out = out;
    (|| -> io::Result<()> {
        out.text("n", n)?;
        out.weight(&w)?;
        out.num("kappa_min", norms.kappa)?;
        out.num("arith_sq", norms.arith_sq)?;
        out.num("diff_sq", norms.diff_sq)?;
        out.num("geo_sq", norms.geo_sq)?;
        out.hs_bound(&lower)?;
        out.hs_bound(&upper)?;
        out.hs_bound(&dlo)?;
        out.hs_bound(&dhi)?;
        out.chain(&chain)
    })()
    .map_err(err)?;
    Ok(out.code())
}
