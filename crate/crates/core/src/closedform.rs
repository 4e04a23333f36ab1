//! The iterative closed form for the Hilbert-Kunz function.
//!
//! Variables are processed in the order `P_t, …, P_1, Z_1, …, Z_s, N_1, …, N_r`.
//! `Φ(μ)` counts surviving monomials in the positive and zero variables once
//! the negative variables fix `M_max = μ`. The `∫` vectors lift `Φ` through
//! the negative variables one at a time, indexed by `j = B_r − μ` where
//! `B_r = M_{a_r,n} − p_{a_r}`. The `G` chains count the monomials in the
//! variables processed so far that are not divisible by the matching part of
//! `[1]`; they cover exponents of a negative variable below `N_max`.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Binomial, PrimePower};
use crate::classify::{classify, Classification};
use crate::error::{Error, Result};
use crate::mmax::{mmax_params, MmaxParams};
use crate::num_str;

/// Default limit on the number of `Φ` evaluations.
pub const DEFAULT_CLOSED_CAP: u64 = 10_000_000;

fn big(v: impl Into<BigInt>) -> BigInt {
    v.into()
}

fn pow(q: u64, e: usize) -> BigInt {
    num_traits::pow(big(q), e)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhiTables {
    #[serde(serialize_with = "num_str::ser")]
    pub mu: u64,
    /// Indexed by `q − 1` for `P_q`.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub minc: Vec<u64>,
    #[serde(serialize_with = "num_str::ser_seq")]
    pub s: Vec<i128>,
    #[serde(serialize_with = "num_str::ser_seq")]
    pub d: Vec<i128>,
    #[serde(serialize_with = "num_str::ser_seq")]
    pub h: Vec<i128>,
    /// `A_q, C_q, D_q, D̃_q` at index `q − 1` for `q = 2..=t+1`.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub a_seq: Vec<BigInt>,
    #[serde(serialize_with = "num_str::ser_seq")]
    pub c_seq: Vec<BigInt>,
    #[serde(serialize_with = "num_str::ser_seq")]
    pub d_seq: Vec<BigInt>,
    #[serde(serialize_with = "num_str::ser_seq")]
    pub dtilde_seq: Vec<BigInt>,
    /// `𝔖_{μ,j}` for `j = 0..=s`.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub sigma: Vec<BigInt>,
    #[serde(serialize_with = "num_str::ser")]
    pub phi: BigInt,
}

fn minc(mu: u64, dp: u64, pmin: u64, q: u64) -> u64 {
    let cap = q.saturating_sub(pmin);
    (mu as u128 * dp as u128).min(cap as u128) as u64
}

fn phi_preconditions(mu: u64, cls: &Classification) -> Result<()> {
    if cls.t == 0 {
        return Err(Error::NotApplicable("no positive difference variable".into()));
    }
    if mu == 0 {
        return Err(Error::Domain("M_max must be at least 1".into()));
    }
    Ok(())
}

pub fn phi_tables(mu: u64, cls: &Classification, q: &PrimePower) -> Result<PhiTables> {
    phi_preconditions(mu, cls)?;
    let qq = q.q();
    let t = cls.t;
    let mut tab = PhiTables {
        mu,
        minc: vec![0; t],
        s: vec![0; t],
        d: vec![0; t],
        h: vec![0; t],
        a_seq: vec![BigInt::zero(); t],
        c_seq: vec![BigInt::zero(); t],
        d_seq: vec![BigInt::zero(); t],
        dtilde_seq: vec![BigInt::zero(); t],
        sigma: Vec::with_capacity(cls.s + 1),
        phi: BigInt::zero(),
    };
    let (mut a, mut c, mut d, mut dt) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    for k in (0..t).rev() {
        tab.a_seq[k] = a.clone();
        tab.c_seq[k] = c.clone();
        tab.d_seq[k] = d.clone();
        tab.dtilde_seq[k] = dt.clone();
        let v = &cls.pos[k];
        let mc = minc(mu, v.dp, v.pmin, qq);
        let (qi, pmin, pmax, mci) = (qq as i128, v.pmin as i128, v.pmax as i128, mc as i128);
        let s = (pmax - 1).min(qi - mci - 1);
        let dd = s - pmin + 1;
        let h = (qi - mci - pmax).max(0);
        tab.minc[k] = mc;
        tab.s[k] = s;
        tab.d[k] = dd;
        tab.h[k] = h;

        let mcb = big(mc);
        let pminb = big(v.pmin);
        let next_a = big(qi - pmin) * &a + &pminb * &c;
        let next_d = &mcb * &a + big(qi - pmin - mci) * &d + &pminb * &c;
        let next_dt = if mci < qi - pmin {
            &mcb * &a + big(h) * &dt + big(dd) * &d + &pminb * &c
        } else {
            &mcb * &a + &pminb * &c
        };
        c *= qq;
        a = next_a;
        d = next_d;
        dt = next_dt;
    }
    let mut sigma = dt;
    tab.sigma.push(sigma.clone());
    for j in 1..=cls.s {
        let z = cls.zero[j - 1].zmin;
        sigma = sigma * big(qq as i128 - z as i128) + pow(qq, t + j - 1) * z;
        tab.sigma.push(sigma.clone());
    }
    tab.phi = sigma;
    Ok(tab)
}

pub fn phi_recursive(mu: u64, cls: &Classification, q: &PrimePower) -> Result<BigInt> {
    phi_preconditions(mu, cls)?;
    Ok(phi_fast(mu, cls, q.q()))
}

/// Same recursion as [`phi_tables`] without recording the intermediate rows.
fn phi_fast(mu: u64, cls: &Classification, qq: u64) -> BigInt {
    let (mut a, mut c, mut d, mut dt) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let qi = qq as i128;
    for v in cls.pos.iter().rev() {
        let mci = minc(mu, v.dp, v.pmin, qq) as i128;
        let (pmin, pmax) = (v.pmin as i128, v.pmax as i128);
        let s = (pmax - 1).min(qi - mci - 1);
        let pminb = big(pmin);
        let next_a = big(qi - pmin) * &a + &pminb * &c;
        let next_d = big(mci) * &a + big(qi - pmin - mci) * &d + &pminb * &c;
        let next_dt = if mci < qi - pmin {
            let h = (qi - mci - pmax).max(0);
            big(mci) * &a + big(h) * &dt + big(s - pmin + 1) * &d + &pminb * &c
        } else {
            big(mci) * &a + &pminb * &c
        };
        c *= qq;
        a = next_a;
        d = next_d;
        dt = next_dt;
    }
    let mut sigma = dt;
    for (j, z) in cls.zero.iter().enumerate() {
        sigma = sigma * big(qi - z.zmin as i128) + pow(qq, cls.t + j) * z.zmin;
    }
    sigma
}

/// `p^n − P_{q,max} ≤ Min^c_{P_q} < p^n − P_{q,min}` for every `q`.
pub fn simple_guard(mu: u64, cls: &Classification, q: &PrimePower) -> bool {
    let qq = q.q() as i128;
    cls.pos.iter().all(|v| {
        let mc = minc(mu, v.dp, v.pmin, q.q()) as i128;
        qq - v.pmax as i128 <= mc && mc < qq - v.pmin as i128
    })
}

/// Elementary symmetric polynomials `e_0, …, e_len`.
fn elementary(xs: &[BigInt]) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); xs.len() + 1];
    e[0] = BigInt::one();
    for (i, x) in xs.iter().enumerate() {
        for l in (1..=i + 1).rev() {
            let add = &e[l - 1] * x;
            e[l] += add;
        }
    }
    e
}

/// Non-recursive form of `Φ`, valid under [`simple_guard`].
pub fn phi_closed_simple(mu: u64, cls: &Classification, q: &PrimePower) -> Result<BigInt> {
    phi_preconditions(mu, cls)?;
    if !simple_guard(mu, cls, q) {
        return Err(Error::NotApplicable(format!(
            "M_max = {mu} is outside the simple case"
        )));
    }
    let qq = q.q();
    let t = cls.t;
    let ms: Vec<BigInt> = cls.pos.iter().map(|v| big(mu) * v.dp).collect();
    let ps: Vec<BigInt> = cls.pos.iter().map(|v| big(v.pmin)).collect();
    let mps: Vec<BigInt> = ms.iter().zip(&ps).map(|(m, p)| m + p).collect();
    let (e_mp, e_m, e_p) = (elementary(&mps), elementary(&ms), elementary(&ps));

    let mut s0: BigInt = ms.iter().map(|m| big(qq) - m).product();
    for l in 2..=t {
        let el = &e_mp[l] - &e_m[l] - &e_p[l];
        let term = el * pow(qq, t - l);
        if l % 2 == 0 {
            s0 += term;
        } else {
            s0 -= term;
        }
    }
    let zs: Vec<BigInt> = cls.zero.iter().map(|z| big(z.zmin)).collect();
    let e_z = elementary(&zs);
    let mut phi = s0 * zs.iter().map(|z| big(qq) - z).product::<BigInt>();
    for k in 1..=cls.s {
        let term = &e_z[k] * pow(qq, t + cls.s - k);
        if k % 2 == 1 {
            phi += term;
        } else {
            phi -= term;
        }
    }
    Ok(phi)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GChains {
    /// `G_{P_q}` at index `q` for `q = 0..t`; `G_{P_t} = 0` and `G_{P_0}`
    /// feeds the next block.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub g_p: Vec<BigInt>,
    /// `G_{Z_l}` at index `l − 1`.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub g_z: Vec<BigInt>,
    /// `G_{N_i}` at index `i − 1`.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub g_n: Vec<BigInt>,
}

pub fn g_chain(cls: &Classification, q: &PrimePower) -> Result<GChains> {
    if cls.r == 0 || cls.t == 0 {
        return Err(Error::NotApplicable("the G chains need r ≥ 1 and t ≥ 1".into()));
    }
    let qq = q.q();
    let (r, s, t) = (cls.r, cls.s, cls.t);
    let mut g_p = vec![BigInt::zero(); t + 1];
    for k in (0..t).rev() {
        let pmax = cls.pos[k].pmax;
        g_p[k] = big(qq as i128 - pmax as i128) * &g_p[k + 1] + pow(qq, t - k - 1) * pmax;
    }
    let mut g_z: Vec<BigInt> = Vec::with_capacity(s);
    let mut prev = g_p[0].clone();
    for l in 1..=s {
        if l > 1 {
            let zmax = cls.zero[l - 2].zmax;
            prev = big(qq as i128 - zmax as i128) * &prev + pow(qq, t + l - 2) * zmax;
        }
        g_z.push(prev.clone());
    }
    let mut g_n: Vec<BigInt> = Vec::with_capacity(r);
    let mut g = if s >= 1 {
        let zmax = cls.zero[s - 1].zmax;
        big(qq as i128 - zmax as i128) * &g_z[s - 1] + pow(qq, t + s - 1) * zmax
    } else {
        g_p[0].clone()
    };
    for i in 1..=r {
        if i > 1 {
            let nmin = cls.neg[i - 2].nmin;
            g = big(qq as i128 - nmin as i128) * &g + pow(qq, t + s + i - 2) * nmin;
        }
        g_n.push(g.clone());
    }
    Ok(GChains { g_p, g_z, g_n })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormTables {
    pub g: GChains,
    pub mmax_params: Vec<MmaxParams>,
    /// `D_{a_i,a_r}` at index `i − 1`.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub d_ai_ar: Vec<i128>,
    /// `X̃_{N_i,last}` at index `i − 1`.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub xtilde: Vec<i128>,
    /// `B_r = M_{a_r,n} − p_{a_r}`: the number of `∫` entries.
    #[serde(serialize_with = "num_str::ser")]
    pub top_r: u64,
    /// `∫_j^{(N_r)}` for `j = 0..B_r`, only kept on request.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub integrals: Vec<BigInt>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedForm {
    #[serde(serialize_with = "num_str::ser")]
    pub value: BigUint,
    pub tables: ClosedFormTables,
}

#[derive(Clone, Copy, Debug)]
pub struct ClosedFormOptions {
    pub cap: u64,
    pub keep_integrals: bool,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_CLOSED_CAP,
            keep_integrals: false,
        }
    }
}

/// Why the closed form does not apply to `(f, q)`, if it does not.
pub fn guard(cls: &Classification, q: &PrimePower) -> Result<()> {
    if cls.r == 0 {
        return Err(Error::NotApplicable("no negative difference variable (r = 0)".into()));
    }
    if cls.t == 0 {
        return Err(Error::NotApplicable("no positive difference variable (t = 0)".into()));
    }
    let max_e = cls.max_exponent();
    if q.q() <= max_e {
        return Err(Error::NotApplicable(format!(
            "q = {} does not exceed the largest exponent {max_e}",
            q.q()
        )));
    }
    Ok(())
}

pub fn hk_closed_form(f: &Binomial, q: &PrimePower) -> Result<BigUint> {
    Ok(evaluate(f, q, ClosedFormOptions::default())?.value)
}

/// Lifts `ints` through one negative variable: entry `j` becomes
/// `c(j)·ints[j] + Σ_{J>j} w(J)·ints[J] + tail`, where `c(J)` counts the
/// admissible exponents whose bound is at least `B_r − J` and `w` is its
/// first difference.
fn lift(ints: &[BigInt], pr: &MmaxParams, shift: i128, tail: &BigInt) -> Vec<BigInt> {
    let len = ints.len();
    let c_le = |j: usize| pr.count_upto(j as i128 + shift);
    let mut out = vec![BigInt::zero(); len];
    let mut suffix = BigInt::zero();
    for j in (0..len).rev() {
        out[j] = &ints[j] * c_le(j) + &suffix + tail;
        let w = c_le(j) - if j == 0 { pr.count_upto(shift - 1) } else { c_le(j - 1) };
        suffix += &ints[j] * w;
    }
    out
}

/// Reference O(K·len) version of [`lift`] iterating over every admissible
/// exponent of the variable.
#[cfg(test)]
fn lift_naive(ints: &[BigInt], pr: &MmaxParams, top_r: u64, tail: &BigInt) -> Vec<BigInt> {
    (0..ints.len())
        .map(|j| {
            let mut acc = tail.clone();
            for k in 1..=pr.k_range {
                let bound = pr.bound(k) as i128;
                let jj = (top_r as i128 - bound).max(j as i128) as usize;
                acc += &ints[jj];
            }
            acc
        })
        .collect()
}

pub fn evaluate(f: &Binomial, q: &PrimePower, opts: ClosedFormOptions) -> Result<ClosedForm> {
    f.check_prime_power(q)?;
    let cls = classify(f);
    guard(&cls, q)?;
    let params = mmax_params(&cls, q)?;
    let g = g_chain(&cls, q)?;
    let qq = q.q();
    let (r, s, t) = (cls.r, cls.s, cls.t);
    let top_r = params[r - 1].top();
    if top_r > opts.cap {
        return Err(Error::resource("closed-form Φ evaluations", top_r, opts.cap));
    }

    let mut ints: Vec<BigInt> = (0..top_r)
        .into_par_iter()
        .map(|j| phi_fast(top_r - j, &cls, qq))
        .collect();

    for i in 2..=r {
        let v = &cls.neg[i - 2];
        let pr = &params[i - 2];
        let shift = pr.top() as i128 - top_r as i128;
        let tail = big(v.nmax - v.nmin) * &g.g_n[i - 2] + pow(qq, s + t + i - 2) * v.nmin;
        ints = lift(&ints, pr, shift, &tail);
    }

    let v = &cls.neg[r - 1];
    let pr = &params[r - 1];
    let mut total = pow(qq, s + t + r - 1) * v.nmin + big(v.nmax - v.nmin) * &g.g_n[r - 1];
    for (j, val) in ints.iter().enumerate() {
        let w = pr.count_upto(j as i128) - pr.count_upto(j as i128 - 1);
        if w != 0 {
            total += val * w;
        }
    }
    let value = match total.sign() {
        Sign::Minus => {
            return Err(Error::FormulaDomain(format!(
                "closed form produced a negative value {total}"
            )))
        }
        _ => total.magnitude().clone(),
    };

    let d_ai_ar = params
        .iter()
        .map(|p| 1 + p.e_ai_bi as i128 + p.a as i128 * (p.top() as i128 - top_r as i128))
        .collect();
    let xtilde = params
        .iter()
        .map(|p| top_r as i128 - p.top() as i128 + p.ktilde_last as i128)
        .collect();
    Ok(ClosedForm {
        value,
        tables: ClosedFormTables {
            g,
            mmax_params: params,
            d_ai_ar,
            xtilde,
            top_r,
            integrals: if opts.keep_integrals { ints } else { Vec::new() },
        },
    })
}
