//! Key ideals, convergence and the binomial membership criterion.
//!
//! For a standard monomial `A` the key ideal `A_c` is spanned by the
//! non-standard monomials and every standard monomial lex-greater than `A`.
//! `A` contributes one dimension to the length exactly when it does not lie in
//! `A_c + (f)`. The lex order is taken over the classification's key order
//! (variables sorted by ascending `Δ`).

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;

use crate::algebra::{Binomial, ExponentVector, PrimePower};
use crate::classify::{classify, Classification};
use crate::error::{Error, Result};
use crate::num_str;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    TrailDivides,
    MutationWitness(u64),
    None,
}

impl Serialize for Witness {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(None)?;
        match self {
            Witness::TrailDivides => map.serialize_entry("kind", "trail_divides")?,
            Witness::MutationWitness(m) => {
                map.serialize_entry("kind", "mutation_witness")?;
                map.serialize_entry("m", &m.to_string())?;
            }
            Witness::None => map.serialize_entry("kind", "none")?,
        }
        map.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipResult {
    pub member: bool,
    pub witness: Witness,
    #[serde(serialize_with = "num_str::ser")]
    pub mmax_scanned: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanStep {
    #[serde(serialize_with = "num_str::ser")]
    pub m: u64,
    /// `A[−2]^M[1]^{M−1}`.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub shifted: Vec<u64>,
    /// `A[−2]^M[1]^M`.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub candidate: Vec<u64>,
    pub convergent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipTrace {
    #[serde(serialize_with = "num_str::ser_seq")]
    pub monomial: Vec<u64>,
    pub key_order: Vec<usize>,
    pub lead_divides: bool,
    pub trail_divides: bool,
    pub steps: Vec<ScanStep>,
    pub result: MembershipResult,
}

fn check_standard(a: &[u64], q: u64) -> Result<()> {
    if let Some(&e) = a.iter().find(|&&e| e >= q) {
        return Err(Error::Domain(format!("exponent {e} is not below q = {q}")));
    }
    Ok(())
}

/// Generators `B_1, …, B_m` (those that exist) followed by `x_1^q, …, x_m^q`.
pub fn key_ideal_generators(a: &ExponentVector, q: &PrimePower) -> Result<Vec<ExponentVector>> {
    let q = q.q();
    let alpha = a.as_slice();
    check_standard(alpha, q)?;
    let m = alpha.len();
    let mut gens = Vec::with_capacity(2 * m);
    for i in 0..m {
        if alpha[i] < q - 1 {
            let mut b = vec![0u64; m];
            b[..i].copy_from_slice(&alpha[..i]);
            b[i] = alpha[i] + 1;
            gens.push(ExponentVector::new(b)?);
        }
    }
    for i in 0..m {
        let mut b = vec![0u64; m];
        b[i] = q;
        gens.push(ExponentVector::new(b)?);
    }
    Ok(gens)
}

/// Convergence with `x_1` most significant.
pub fn is_convergent(c: &ExponentVector, a: &ExponentVector, q: &PrimePower) -> Result<bool> {
    let order: Vec<usize> = (0..a.len()).collect();
    is_convergent_in_order(c, a, q, &order)
}

/// Convergence with the lex order scanning `order[0]` first.
pub fn is_convergent_in_order(
    c: &ExponentVector,
    a: &ExponentVector,
    q: &PrimePower,
    order: &[usize],
) -> Result<bool> {
    if c.len() != a.len() || order.len() != a.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: c.len(),
        });
    }
    check_standard(a.as_slice(), q.q())?;
    match convergent_raw(c.as_slice(), a.as_slice(), q.q(), order) {
        Some(v) => Ok(v),
        None => Err(Error::Precondition(
            "C equals A; A never lies in its own key ideal".into(),
        )),
    }
}

/// Membership of `C` in `A_c` decided by divisibility by the generators.
pub fn is_convergent_by_generators(c: &ExponentVector, a: &ExponentVector, q: &PrimePower) -> Result<bool> {
    Ok(key_ideal_generators(a, q)?.iter().any(|g| g.divides(c)))
}

/// `None` when `C = A`.
fn convergent_raw(c: &[u64], a: &[u64], q: u64, order: &[usize]) -> Option<bool> {
    if c.iter().any(|&e| e >= q) {
        return Some(true);
    }
    for &i in order {
        match c[i].cmp(&a[i]) {
            Ordering::Greater => return Some(true),
            Ordering::Less => return Some(false),
            Ordering::Equal => {}
        }
    }
    None
}

/// Precomputed data for repeated membership tests against one `(f, q)`.
#[derive(Clone, Debug)]
pub struct MembershipChecker {
    q: u64,
    lead: Vec<u64>,
    trail: Vec<u64>,
    delta: Vec<i64>,
    order: Vec<usize>,
    cls: Classification,
}

impl MembershipChecker {
    pub fn new(f: &Binomial, q: &PrimePower) -> Result<Self> {
        f.check_prime_power(q)?;
        let cls = classify(f);
        let lead = f.lead().exps.as_slice().to_vec();
        let trail = f.trail().exps.as_slice().to_vec();
        let delta = lead.iter().zip(&trail).map(|(&l, &t)| t as i64 - l as i64).collect();
        Ok(Self {
            q: q.q(),
            lead,
            trail,
            delta,
            order: cls.perm.clone(),
            cls,
        })
    }

    pub fn classification(&self) -> &Classification {
        &self.cls
    }

    pub fn m(&self) -> usize {
        self.lead.len()
    }

    pub fn is_member(&self, a: &[u64]) -> Result<MembershipResult> {
        if a.len() != self.m() {
            return Err(Error::Dimension {
                expected: self.m(),
                found: a.len(),
            });
        }
        check_standard(a, self.q)?;
        Ok(self.scan(a, None, true))
    }

    pub fn trace(&self, a: &[u64]) -> Result<MembershipTrace> {
        self.is_member(a)?;
        let mut steps = Vec::new();
        let result = self.scan(a, Some(&mut steps), true);
        Ok(MembershipTrace {
            monomial: a.to_vec(),
            key_order: self.order.clone(),
            lead_divides: divides(&self.lead, a),
            trail_divides: divides(&self.trail, a),
            steps,
            result,
        })
    }

    /// Largest `M` with `A[−2]^M[1]^{M−1}` nonnegative; 0 unless `[2] | A`.
    pub fn mmax_scanned(&self, a: &[u64]) -> u64 {
        if !divides(&self.lead, a) {
            return 0;
        }
        let mut m = 1u64;
        while self.shifted_nonneg(a, m + 1) {
            m += 1;
        }
        m
    }

    fn shifted_nonneg(&self, a: &[u64], m: u64) -> bool {
        let m = m as i128;
        a.iter().enumerate().all(|(i, &e)| {
            e as i128 - m * self.lead[i] as i128 + (m - 1) * self.trail[i] as i128 >= 0
        })
    }

    /// With `need_mmax` false, `mmax_scanned` of a member is left at 0.
    fn scan(&self, a: &[u64], mut steps: Option<&mut Vec<ScanStep>>, need_mmax: bool) -> MembershipResult {
        if divides(&self.trail, a) {
            return MembershipResult {
                member: true,
                witness: Witness::TrailDivides,
                mmax_scanned: if need_mmax { self.mmax_scanned(a) } else { 0 },
            };
        }
        if !divides(&self.lead, a) {
            return MembershipResult {
                member: false,
                witness: Witness::None,
                mmax_scanned: 0,
            };
        }
        let m_len = a.len();
        let mut shifted: Vec<i128> = (0..m_len)
            .map(|i| a[i] as i128 - self.lead[i] as i128)
            .collect();
        let mut candidate = vec![0u64; m_len];
        let mut m = 1u64;
        let mut found = None;
        loop {
            for i in 0..m_len {
                // shifted + [1] stays below 2^64 since a < q <= 2^62 and exponents < 2^63
                let v = shifted[i] + self.trail[i] as i128;
                candidate[i] = v.min(u64::MAX as i128) as u64;
            }
            let conv = convergent_raw(&candidate, a, self.q, &self.order).unwrap_or(false);
            if let Some(st) = steps.as_deref_mut() {
                st.push(ScanStep {
                    m,
                    shifted: shifted.iter().map(|&v| v as u64).collect(),
                    candidate: candidate.clone(),
                    convergent: conv,
                });
            }
            if conv && found.is_none() {
                found = Some(m);
                if steps.is_none() {
                    break;
                }
            }
            for i in 0..m_len {
                shifted[i] += self.delta[i] as i128;
            }
            // Terminates: the lead is deg-lex larger, so some Δ is negative.
            if shifted.iter().any(|&v| v < 0) {
                break;
            }
            m += 1;
        }
        let mmax = if found.is_some() && steps.is_none() {
            if need_mmax {
                self.mmax_scanned(a)
            } else {
                0
            }
        } else {
            m
        };
        match found {
            Some(w) => MembershipResult {
                member: true,
                witness: Witness::MutationWitness(w),
                mmax_scanned: mmax,
            },
            None => MembershipResult {
                member: false,
                witness: Witness::None,
                mmax_scanned: mmax,
            },
        }
    }
}

fn divides(d: &[u64], a: &[u64]) -> bool {
    d.iter().zip(a).all(|(x, y)| x <= y)
}

pub fn is_member(a: &ExponentVector, f: &Binomial, q: &PrimePower) -> Result<MembershipResult> {
    MembershipChecker::new(f, q)?.is_member(a.as_slice())
}

/// Decodes a row-major node index (`x_1` slowest) into exponents.
pub fn decode_index(mut idx: u64, q: u64, out: &mut [u64]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % q;
        idx /= q;
    }
}

/// `q^m` if it fits in `u64`.
pub fn standard_monomial_count(q: u64, m: usize) -> Option<u64> {
    q.checked_pow(u32::try_from(m).ok()?)
}

/// Number of standard monomials not in `A_c + (f)`; this is the length.
pub fn hk_direct_count(f: &Binomial, q: &PrimePower, cap: u64) -> Result<BigUint> {
    let checker = MembershipChecker::new(f, q)?;
    let m = f.m();
    let total = standard_monomial_count(q.q(), m)
        .filter(|&n| n <= cap)
        .ok_or_else(|| Error::resource("direct count membership tests", format!("{}^{}", q.q(), m), cap))?;
    let qq = q.q();
    const CHUNK: u64 = 1 << 14;
    let chunks = total.div_ceil(CHUNK);
    let count: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut a = vec![0u64; m];
            let mut n = 0u64;
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                decode_index(idx, qq, &mut a);
                if !checker.scan(&a, None, false).member {
                    n += 1;
                }
            }
            n
        })
        .sum();
    Ok(BigUint::from(count))
}
