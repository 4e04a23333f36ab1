//! The negative / zero / positive split of the variables.
//!
//! With `Δ_i = (exponent of x_i in [1]) − (exponent of x_i in [2])`, variables
//! are stably sorted by ascending `Δ`. In sorted coordinates the negative
//! block is indexed backwards (`N_1` is the last negative position), as is the
//! zero block, while the positive block is indexed forwards.

use serde::Serialize;

use crate::algebra::Binomial;
use crate::num_str;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NegVar {
    /// Original variable index (0-based).
    pub var: usize,
    /// `a_i = −Δ_{N_i}`.
    #[serde(serialize_with = "num_str::ser")]
    pub a: u64,
    /// `b_i = N_{i,min}`.
    #[serde(serialize_with = "num_str::ser")]
    pub b: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub nmax: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub nmin: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroVar {
    pub var: usize,
    #[serde(serialize_with = "num_str::ser")]
    pub zmin: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub zmax: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PosVar {
    pub var: usize,
    /// `Δ_{P_q}`.
    #[serde(serialize_with = "num_str::ser")]
    pub dp: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub pmin: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub pmax: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// Sorted position -> original variable index.
    pub perm: Vec<usize>,
    /// `Δ` in sorted order.
    #[serde(serialize_with = "num_str::ser_seq")]
    pub delta: Vec<i64>,
    pub r: usize,
    pub s: usize,
    pub t: usize,
    /// `neg[i-1]` is `N_i`.
    pub neg: Vec<NegVar>,
    /// `zero[i-1]` is `Z_i`.
    pub zero: Vec<ZeroVar>,
    /// `pos[q-1]` is `P_q`.
    pub pos: Vec<PosVar>,
}

impl Classification {
    pub fn m(&self) -> usize {
        self.perm.len()
    }

    /// Variable order used by the key ideal: sorted position `k` holds the
    /// original variable `key_order()[k]`, `k = 0` most significant.
    pub fn key_order(&self) -> &[usize] {
        &self.perm
    }

    /// Largest exponent appearing in either term.
    pub fn max_exponent(&self) -> u64 {
        let n = self.neg.iter().map(|v| v.nmax);
        let z = self.zero.iter().map(|v| v.zmax);
        let p = self.pos.iter().map(|v| v.pmax);
        n.chain(z).chain(p).max().unwrap_or(0)
    }
}

pub fn classify(f: &Binomial) -> Classification {
    let lead = f.lead().exps.as_slice();
    let trail = f.trail().exps.as_slice();
    let m = f.m();
    let raw: Vec<i64> = (0..m).map(|i| trail[i] as i64 - lead[i] as i64).collect();

    let mut perm: Vec<usize> = (0..m).collect();
    perm.sort_by_key(|&i| (raw[i], i));
    let delta: Vec<i64> = perm.iter().map(|&i| raw[i]).collect();

    let r = delta.iter().filter(|&&d| d < 0).count();
    let s = delta.iter().filter(|&&d| d == 0).count();
    let t = m - r - s;

    let neg = (1..=r)
        .map(|i| {
            let var = perm[r - i];
            NegVar {
                var,
                a: (lead[var] - trail[var]),
                b: trail[var],
                nmax: lead[var],
                nmin: trail[var],
            }
        })
        .collect();
    let zero = (1..=s)
        .map(|i| {
            let var = perm[r + s - i];
            ZeroVar {
                var,
                zmin: lead[var],
                zmax: lead[var],
            }
        })
        .collect();
    let pos = (1..=t)
        .map(|q| {
            let var = perm[r + s + q - 1];
            PosVar {
                var,
                dp: trail[var] - lead[var],
                pmin: lead[var],
                pmax: trail[var],
            }
        })
        .collect();

    Classification {
        perm,
        delta,
        r,
        s,
        t,
        neg,
        zero,
        pos,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_binomial;

    #[test]
    fn cusp() {
        let c = classify(&parse_binomial("x1^3 - x2^2", 5, None).unwrap());
        assert_eq!((c.r, c.s, c.t), (1, 0, 1));
        assert_eq!(c.delta, vec![-3, 2]);
        assert_eq!(
            c.neg,
            vec![NegVar {
                var: 0,
                a: 3,
                b: 0,
                nmax: 3,
                nmin: 0
            }]
        );
        assert_eq!(
            c.pos,
            vec![PosVar {
                var: 1,
                dp: 2,
                pmin: 0,
                pmax: 2
            }]
        );
    }

    #[test]
    fn zero_difference_variable() {
        let c = classify(&parse_binomial("x1^3*x2 - x1*x2", 3, None).unwrap());
        assert_eq!((c.r, c.s, c.t), (1, 1, 0));
        assert_eq!(c.neg[0].a, 2);
        assert_eq!(c.neg[0].b, 1);
        assert_eq!(c.zero[0], ZeroVar { var: 1, zmin: 1, zmax: 1 });
    }

    #[test]
    fn two_negative_variables() {
        let c = classify(&parse_binomial("x1^2*x2 - x1*x3", 5, None).unwrap());
        assert_eq!(c.delta, vec![-1, -1, 1]);
        assert_eq!((c.r, c.s, c.t), (2, 0, 1));
        // N_1 is the last negative position, so x2 after the stable sort.
        assert_eq!(c.neg[0].var, 1);
        assert_eq!(c.neg[1].var, 0);
        assert_eq!(c.pos[0].var, 2);
    }

    #[test]
    fn reversed_indexing_matches_sorted_delta() {
        let c = classify(&parse_binomial("x1^5*x2*x4^3 - x2^2*x3^4*x4^3*x5", 7, None).unwrap());
        assert_eq!(c.r + c.s + c.t, 5);
        for i in 1..=c.r {
            assert_eq!(c.neg[i - 1].a as i64, -c.delta[c.r - i]);
        }
        for q in 1..=c.t {
            assert_eq!(c.pos[q - 1].dp as i64, c.delta[c.r + c.s + q - 1]);
        }
        assert!(c.delta.windows(2).all(|w| w[0] <= w[1]));
    }
}
