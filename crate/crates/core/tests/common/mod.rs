#![allow(dead_code)]

use hkb_core::algebra::{normalize, Binomial, ExponentVector, PrimePower, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub f: Binomial,
    pub q: PrimePower,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two random terms with exponents `≤ max_exp`; `None` if they do not form a
/// valid binomial.
pub fn random_binomial<R: Rng>(rng: &mut R, p: u64, m: usize, max_exp: u64) -> Option<Binomial> {
    let term = |rng: &mut R| {
        let exps: Vec<u64> = (0..m).map(|_| rng.gen_range(0..=max_exp)).collect();
        Term::new(rng.gen_range(1..p), ExponentVector::new(exps).unwrap())
    };
    let a = term(rng);
    let b = term(rng);
    normalize(p, a, b).ok()
}

/// Random binomials with `m ∈ {2,3}`, exponents `≤ 4`, `p ∈ {2,3,5}`,
/// `n ∈ {1,2}` and `q^m ≤ 6561`.
pub fn corpus(seed: u64, size: usize) -> Vec<Instance> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let p = *[2u64, 3, 5].choose(&mut rng).unwrap();
        let n = rng.gen_range(1..=2u32);
        let m = rng.gen_range(2..=3usize);
        let q = PrimePower::new(p, n).unwrap();
        if q.q().pow(m as u32) > 6561 {
            continue;
        }
        if let Some(f) = random_binomial(&mut rng, p, m, 4) {
            out.push(Instance { f, q });
        }
    }
    out
}

/// Two-variable binomials with one negative and one zero difference variable.
pub fn zero_difference_binomials(seed: u64, count: usize) -> Vec<Binomial> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = *[2u64, 3, 5, 7].choose(&mut rng).unwrap();
        let hi = rng.gen_range(1..=6u64);
        let lo = rng.gen_range(0..hi);
        let z = rng.gen_range(0..=3u64);
        if lo + z == 0 {
            continue;
        }
        let swap = rng.gen_bool(0.5);
        let ev = |n: u64, zz: u64| {
            ExponentVector::new(if swap { vec![zz, n] } else { vec![n, zz] }).unwrap()
        };
        let a = Term::new(rng.gen_range(1..p), ev(hi, z));
        let b = Term::new(rng.gen_range(1..p), ev(lo, z));
        if let Ok(f) = normalize(p, a, b) {
            out.push(f);
        }
    }
    out
}

/// Two-variable binomials over `p ∈ {3,5,7}` with exponents `≤ 4`.
pub fn two_variable_binomials(seed: u64, count: usize) -> Vec<Binomial> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = *[3u64, 5, 7].choose(&mut rng).unwrap();
        if let Some(f) = random_binomial(&mut rng, p, 2, 4) {
            out.push(f);
        }
    }
    out
}

/// Calls `visit` with every standard monomial of `{0..q-1}^m` in row-major order.
pub fn for_each_standard(q: u64, m: usize, mut visit: impl FnMut(usize, &[u64])) {
    let total = q.pow(m as u32);
    let mut a = vec![0u64; m];
    for idx in 0..total {
        hkb_core::keycheck::decode_index(idx, q, &mut a);
        visit(idx as usize, &a);
    }
}
