//! Multiprecision reference values for the scalar bounds, computed straight
//! from the formulas at 256 bits without touching the library.

#![allow(dead_code)]

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Mp {
    cc: Consts,
}

pub fn num(x: f64) -> BigFloat {
    BigFloat::from_f64(x, P)
}

fn add(x: &BigFloat, y: &BigFloat) -> BigFloat {
    x.add(y, P, RM)
}

fn sub(x: &BigFloat, y: &BigFloat) -> BigFloat {
    x.sub(y, P, RM)
}

fn mul(x: &BigFloat, y: &BigFloat) -> BigFloat {
    x.mul(y, P, RM)
}

fn sq(x: &BigFloat) -> BigFloat {
    x.mul(x, P, RM)
}

fn sqrt(x: &BigFloat) -> BigFloat {
    x.sqrt(P, RM)
}

/// `(t + 1)^2 / (4t)`
pub fn kantorovich(t: &BigFloat) -> BigFloat {
    sq(&add(t, &num(1.0))).div(&mul(&num(4.0), t), P, RM)
}

impl Mp {
    pub fn new() -> Self {
        Mp {
            cc: Consts::new().expect("constants cache"),
        }
    }

    pub fn decimal(&mut self, x: &BigFloat) -> f64 {
        let s = x
            .format(Radix::Dec, RM, &mut self.cc)
            .expect("decimal format");
        s.parse().unwrap_or_else(|_| panic!("unparsable `{s}`"))
    }

    /// `x^e = exp(e ln x)` for `x > 0`.
    pub fn pow(&mut self, x: &BigFloat, e: &BigFloat) -> BigFloat {
        let l = x.ln(P, RM, &mut self.cc);
        l.mul(e, P, RM).exp(P, RM, &mut self.cc)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScalarOracle {
    pub arith: f64,
    pub geo: f64,
    pub heinz: f64,
    pub refined_lower: f64,
    pub refined_upper: f64,
    pub heinz_lower: f64,
    pub heinz_upper: f64,
    pub squared_lower: f64,
    pub squared_upper: f64,
    pub baseline_lower: f64,
    pub baseline_upper: f64,
    pub improvement_lower: f64,
    pub improvement_upper: f64,
    pub kappa_quarter_pow: f64,
}

/// Exact `min(x, 1 - x)` for the dyadic weights used here, done in f64 like
/// the inputs themselves.
fn small(x: f64) -> f64 {
    x.min(1.0 - x)
}

pub fn scalar(a: f64, b: f64, v: f64) -> ScalarOracle {
    let mut mp = Mp::new();
    let r = small(v);
    let big_r = 1.0 - r;
    let r1 = small(2.0 * r);
    let rhat1 = small(2.0 * r1);
    let lower_half = v <= 0.5;

    let (ba, bb, bv) = (num(a), num(b), num(v));
    let one = num(1.0);
    let w = sub(&one, &bv);
    let sa = sqrt(&ba);
    let sb = sqrt(&bb);
    let q = sqrt(&mul(&sa, &sb));
    let gap = sq(&sub(&sa, &sb));
    let qa = sq(&sub(&q, &sa));
    let qb = sq(&sub(&q, &sb));

    let geo = mul(&mp.pow(&ba, &w), &mp.pow(&bb, &bv));
    let geo_swap = mul(&mp.pow(&ba, &bv), &mp.pow(&bb, &w));
    let heinz = mul(&add(&geo, &geo_swap), &num(0.5));
    let arith = add(&mul(&w, &ba), &mul(&bv, &bb));

    let h = bb.div(&ba, P, RM);
    let h4 = sqrt(&sqrt(&h));
    let k4 = kantorovich(&h4);
    let k2 = kantorovich(&sqrt(&h));
    let e = num(rhat1);
    let ne = num(-rhat1);
    let k4p = mp.pow(&k4, &e);
    let k4m = mp.pow(&k4, &ne);

    let br1 = num(r1);
    let (lo_coef, lo_q, hi_coef, hi_q) = if lower_half {
        (bv.clone(), qa.clone(), w.clone(), qb.clone())
    } else {
        (w.clone(), qb.clone(), bv.clone(), qa.clone())
    };
    let lo_base = add(&mul(&lo_coef, &gap), &mul(&br1, &lo_q));
    let hi_base = sub(&mul(&hi_coef, &gap), &mul(&br1, &hi_q));
    let refined_lower = add(&lo_base, &mul(&k4p, &geo));
    let refined_upper = add(&hi_base, &mul(&k4m, &geo));
    let baseline_lower = add(&lo_base, &geo);
    let baseline_upper = add(&hi_base, &geo);

    let hq = mul(&mul(&br1, &add(&qa, &qb)), &num(0.5));
    let heinz_lower = add(&add(&mul(&num(r), &gap), &hq), &mul(&k4p, &heinz));
    let heinz_upper = add(&sub(&mul(&num(big_r), &gap), &hq), &mul(&k4m, &heinz));

    let diff_sq = sq(&sub(&ba, &bb));
    let root = sqrt(&mul(&ba, &bb));
    let ma = sq(&sub(&root, &ba));
    let mb = sq(&sub(&root, &bb));
    let (slo, smo, shi, smh) = if lower_half {
        (sq(&bv), ma.clone(), sq(&w), mb.clone())
    } else {
        (sq(&w), mb.clone(), sq(&bv), ma.clone())
    };
    let geo_sq = sq(&geo);
    let squared_lower = add(
        &add(&mul(&slo, &diff_sq), &mul(&br1, &smo)),
        &mul(&mp.pow(&k2, &e), &geo_sq),
    );
    let squared_upper = add(
        &sub(&mul(&shi, &diff_sq), &mul(&br1, &smh)),
        &mul(&mp.pow(&k2, &ne), &geo_sq),
    );

    let improvement_lower = sub(&refined_lower, &baseline_lower);
    let improvement_upper = sub(&baseline_upper, &refined_upper);
    ScalarOracle {
        arith: mp.decimal(&arith),
        geo: mp.decimal(&geo),
        heinz: mp.decimal(&heinz),
        refined_lower: mp.decimal(&refined_lower),
        refined_upper: mp.decimal(&refined_upper),
        heinz_lower: mp.decimal(&heinz_lower),
        heinz_upper: mp.decimal(&heinz_upper),
        squared_lower: mp.decimal(&squared_lower),
        squared_upper: mp.decimal(&squared_upper),
        baseline_lower: mp.decimal(&baseline_lower),
        baseline_upper: mp.decimal(&baseline_upper),
        improvement_lower: mp.decimal(&improvement_lower),
        improvement_upper: mp.decimal(&improvement_upper),
        kappa_quarter_pow: mp.decimal(&k4p),
    }
}

/// `K(h^{1/4})^e` in multiprecision.
pub fn kappa_quarter_pow(h: f64, e: f64) -> f64 {
    let mut mp = Mp::new();
    let h4 = sqrt(&sqrt(&num(h)));
    let k = kantorovich(&h4);
    let ee = num(e);
    let p = mp.pow(&k, &ee);
    mp.decimal(&p)
}
