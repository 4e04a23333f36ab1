//! Length of `F_p[x]/(x_1^q, …, x_m^q, f)` by a scalar-weighted union-find.
//!
//! Nodes are the standard monomials. Each shift `x^a·f` is a relation among
//! at most two of them: two survivors identify the nodes up to the scalar
//! `−c_1/c_2`, a single survivor is zero. The length is the number of classes
//! that are not forced to zero.

use num_bigint::BigUint;
use serde::Serialize;

use crate::algebra::{Binomial, PrimePower};
use crate::classify::classify;
use crate::error::{Error, Result};
use crate::keycheck::{decode_index, standard_monomial_count};

pub const DEFAULT_ORACLE_CAP: u64 = 1_000_000;

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Union-find where `weight[v]` is the scalar `λ` with `v = λ·parent[v]`.
#[derive(Clone, Debug)]
pub struct RelationGraph {
    p: u64,
    parent: Vec<u32>,
    weight: Vec<u64>,
    rank: Vec<u8>,
    dead: Vec<bool>,
    merges: u64,
    conflicts: u64,
}

impl RelationGraph {
    pub fn new(nodes: usize, p: u64) -> Self {
        Self {
            p,
            parent: (0..nodes as u32).collect(),
            weight: vec![1; nodes],
            rank: vec![0; nodes],
            dead: vec![false; nodes],
            merges: 0,
            conflicts: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Root of `v` and the scalar `λ` with `v = λ·root`.
    pub fn find(&mut self, v: usize) -> (usize, u64) {
        let mut path = Vec::new();
        let mut cur = v;
        while self.parent[cur] as usize != cur {
            path.push(cur);
            cur = self.parent[cur] as usize;
        }
        let root = cur;
        // Walk back from the node nearest the root, accumulating weights.
        let mut acc = 1u64;
        for &node in path.iter().rev() {
            acc = mul_mod(self.weight[node], acc, self.p);
            self.weight[node] = acc;
            self.parent[node] = root as u32;
        }
        (root, if path.is_empty() { 1 } else { self.weight[v] })
    }

    /// Records `u = λ·v`.
    pub fn union(&mut self, u: usize, v: usize, lambda: u64) {
        let (ru, wu) = self.find(u);
        let (rv, wv) = self.find(v);
        if ru == rv {
            if wu != mul_mod(lambda, wv, self.p) {
                // An inconsistent cycle forces the class to zero.
                self.conflicts += 1;
                self.dead[ru] = true;
            }
            return;
        }
        // ru = (λ·wv / wu)·rv
        let ratio = mul_mod(mul_mod(lambda, wv, self.p), inv_mod(wu, self.p), self.p);
        let dead = self.dead[ru] || self.dead[rv];
        self.merges += 1;
        if self.rank[ru] < self.rank[rv] {
            self.parent[ru] = rv as u32;
            self.weight[ru] = ratio;
            self.dead[rv] = dead;
        } else {
            self.parent[rv] = ru as u32;
            self.weight[rv] = inv_mod(ratio, self.p);
            self.dead[ru] = dead;
            if self.rank[ru] == self.rank[rv] {
                self.rank[ru] += 1;
            }
        }
    }

    pub fn kill(&mut self, v: usize) {
        let (r, _) = self.find(v);
        self.dead[r] = true;
    }

    pub fn is_live(&mut self, v: usize) -> bool {
        let (r, _) = self.find(v);
        !self.dead[r]
    }

    pub fn live_classes(&self) -> u64 {
        (0..self.parent.len())
            .filter(|&v| self.parent[v] as usize == v && !self.dead[v])
            .count() as u64
    }

    pub fn merges(&self) -> u64 {
        self.merges
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleStats {
    pub nodes: u64,
    /// Nodes killed directly by a relation with a single survivor.
    pub dead: u64,
    /// Identifications inside classes that survive: live nodes minus live classes.
    pub merges: u64,
    pub live: u64,
    pub conflicts: u64,
}

/// A finished oracle run, with per-node access to classes.
#[derive(Clone, Debug)]
pub struct OracleRun {
    pub graph: RelationGraph,
    pub stats: OracleStats,
    q: u64,
    m: usize,
}

impl OracleRun {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Row-major node index of a standard monomial (`x_1` slowest).
    pub fn index_of(&self, a: &[u64]) -> usize {
        a.iter().fold(0u64, |acc, &e| acc * self.q + e) as usize
    }

    pub fn class_of(&mut self, a: &[u64]) -> usize {
        let i = self.index_of(a);
        self.graph.find(i).0
    }

    pub fn is_live(&mut self, a: &[u64]) -> bool {
        let i = self.index_of(a);
        self.graph.is_live(i)
    }
}

pub fn build(f: &Binomial, q: &PrimePower, cap: u64) -> Result<OracleRun> {
    f.check_prime_power(q)?;
    let m = f.m();
    let qq = q.q();
    let nodes = standard_monomial_count(qq, m)
        .filter(|&n| n <= cap && n <= u32::MAX as u64)
        .ok_or_else(|| Error::resource("oracle nodes", format!("{qq}^{m}"), cap))?;
    let p = f.p();
    let lead = f.lead().exps.as_slice();
    let trail = f.trail().exps.as_slice();
    // lead·c2 + trail·c1 = 0  =>  lead = (−c1/c2)·trail
    let lambda = mul_mod(p - f.trail().coeff, inv_mod(f.lead().coeff, p), p);

    let mut g = RelationGraph::new(nodes as usize, p);
    let mut killed = vec![false; nodes as usize];
    let mut a = vec![0u64; m];
    let mut u = vec![0u64; m];
    let mut v = vec![0u64; m];
    let index = |x: &[u64]| x.iter().fold(0u64, |acc, &e| acc * qq + e) as usize;
    for idx in 0..nodes {
        decode_index(idx, qq, &mut a);
        let mut u_ok = true;
        let mut v_ok = true;
        for i in 0..m {
            let (x, y) = (a[i] as u128 + lead[i] as u128, a[i] as u128 + trail[i] as u128);
            u_ok &= x < qq as u128;
            v_ok &= y < qq as u128;
            u[i] = x.min(u64::MAX as u128) as u64;
            v[i] = y.min(u64::MAX as u128) as u64;
        }
        match (u_ok, v_ok) {
            (true, true) => g.union(index(&u), index(&v), lambda),
            (true, false) => {
                let i = index(&u);
                g.kill(i);
                killed[i] = true;
            }
            (false, true) => {
                let i = index(&v);
                g.kill(i);
                killed[i] = true;
            }
            (false, false) => {}
        }
    }
    let live = g.live_classes();
    let live_nodes = (0..nodes as usize).filter(|&i| g.is_live(i)).count() as u64;
    let stats = OracleStats {
        nodes,
        dead: killed.iter().filter(|&&k| k).count() as u64,
        merges: live_nodes - live,
        live,
        conflicts: g.conflicts(),
    };
    Ok(OracleRun { graph: g, stats, q: qq, m })
}

pub fn hk_oracle(f: &Binomial, q: &PrimePower, cap: u64) -> Result<BigUint> {
    Ok(BigUint::from(build(f, q, cap)?.stats.live))
}

/// Non-members in the key order: a monomial survives iff its class is live
/// and it is the lex-greatest node of the class, scanning the variables in
/// sorted-`Δ` order.
pub fn surviving_representatives(run: &mut OracleRun, f: &Binomial) -> Vec<bool> {
    let order = classify(f).perm;
    let (q, m) = (run.q, run.m);
    let n = run.graph.len();
    let mut best: Vec<Option<usize>> = vec![None; n];
    let mut a = vec![0u64; m];
    let mut b = vec![0u64; m];
    for idx in 0..n {
        let root = run.graph.find(idx).0;
        match best[root] {
            None => best[root] = Some(idx),
            Some(cur) => {
                decode_index(idx as u64, q, &mut a);
                decode_index(cur as u64, q, &mut b);
                if order.iter().map(|&i| a[i]).gt(order.iter().map(|&i| b[i])) {
                    best[root] = Some(idx);
                }
            }
        }
    }
    (0..n)
        .map(|idx| {
            let root = run.graph.find(idx).0;
            !run.graph.dead[root] && best[root] == Some(idx)
        })
        .collect()
}
