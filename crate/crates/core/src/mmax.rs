//! Closed form of `M_max,A` and the per-variable constants behind it.
//!
//! For a negative difference variable `N_i` write `q − 1 = a·M + r` with
//! `0 ≤ r < a`. For `A` divisible by `[2]`, put `k = q − (exponent of N_i)`,
//! so `1 ≤ k ≤ q − N_max`. The bound contributed by `N_i` is
//! `M − p_a − j` where `j` is the bracket of `k`: bracket 0 is
//! `k ≤ 1 + E` and bracket `j ≥ 1` is `1 + E + a(j−1) < k ≤ 1 + E + aj`.
//! `M_max,A` is the minimum of these bounds.

use serde::Serialize;

use crate::algebra::{ExponentVector, PrimePower};
use crate::classify::Classification;
use crate::error::{Error, Result};
use crate::num_str;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MmaxParams {
    /// `i` in `N_i`.
    pub index: usize,
    #[serde(serialize_with = "num_str::ser")]
    pub a: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub b: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub nmax: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub m_ai_n: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub r_ai_n: u64,
    #[serde(serialize_with = "num_str::ser_opt")]
    pub y_ai: Option<u64>,
    #[serde(serialize_with = "num_str::ser_opt")]
    pub q_ai: Option<u64>,
    #[serde(serialize_with = "num_str::ser")]
    pub p_ai: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub e_ai_bi: u64,
    #[serde(serialize_with = "num_str::ser")]
    pub ktilde_last: u64,
    /// Width of the last bracket as displayed; can be `≤ 0` when the first
    /// bracket is already truncated.
    #[serde(serialize_with = "num_str::ser")]
    pub a_prime: i128,
    /// `q − N_max`, the number of admissible `k`.
    #[serde(serialize_with = "num_str::ser")]
    pub k_range: u64,
}

impl MmaxParams {
    /// `M_{a_i,n} − p_{a_i}`: the bound at `k = 1`.
    pub fn top(&self) -> u64 {
        self.m_ai_n - self.p_ai
    }

    pub fn bracket_of(&self, k: u64) -> u64 {
        let first = 1 + self.e_ai_bi;
        if k <= first {
            0
        } else {
            (k - first).div_ceil(self.a)
        }
    }

    /// Number of admissible `k` whose bracket is at most `j`.
    pub fn count_upto(&self, j: i128) -> u64 {
        if j < 0 {
            return 0;
        }
        let reach = 1i128 + self.e_ai_bi as i128 + self.a as i128 * j;
        reach.min(self.k_range as i128) as u64
    }

    /// Bound on `M` imposed by this variable at `k`.
    pub fn bound(&self, k: u64) -> u64 {
        self.top() - self.bracket_of(k)
    }
}

pub fn mmax_params(cls: &Classification, q: &PrimePower) -> Result<Vec<MmaxParams>> {
    if cls.r == 0 {
        return Err(Error::NotApplicable("no negative difference variable".into()));
    }
    let qq = q.q();
    cls.neg
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if qq <= v.nmax {
                return Err(Error::NotApplicable(format!(
                    "q = {qq} does not exceed N_{},max = {}",
                    i + 1,
                    v.nmax
                )));
            }
            let (a, b) = (v.a, v.b);
            let m_ai_n = (qq - 1) / a;
            let r_ai_n = (qq - 1) % a;
            let (y_ai, q_ai, p_ai, e_ai_bi) = if b < a {
                if r_ai_n >= b {
                    (None, None, 0, r_ai_n - b)
                } else {
                    (None, None, 1, r_ai_n + a - b)
                }
            } else {
                let qa = (b - r_ai_n).div_ceil(a);
                let y = a * qa;
                (Some(y), Some(qa), qa, y - (b - r_ai_n))
            };
            let k_range = qq - v.nmax;
            let beta_num = k_range as i128 - 1 - e_ai_bi as i128;
            let ktilde_last = if beta_num <= 0 {
                1
            } else {
                (beta_num as u128).div_ceil(a as u128).max(1) as u64
            };
            let a_prime =
                k_range as i128 - (1 + e_ai_bi as i128 + a as i128 * (ktilde_last as i128 - 1));
            Ok(MmaxParams {
                index: i + 1,
                a,
                b,
                nmax: v.nmax,
                m_ai_n,
                r_ai_n,
                y_ai,
                q_ai,
                p_ai,
                e_ai_bi,
                ktilde_last,
                a_prime,
                k_range,
            })
        })
        .collect()
}

pub fn mmax_closed(
    a: &ExponentVector,
    cls: &Classification,
    params: &[MmaxParams],
    q: &PrimePower,
) -> Result<u64> {
    if a.len() != cls.m() {
        return Err(Error::Dimension {
            expected: cls.m(),
            found: a.len(),
        });
    }
    let lead_divides = cls.neg.iter().all(|v| a.get(v.var) >= v.nmax)
        && cls.zero.iter().all(|v| a.get(v.var) >= v.zmin)
        && cls.pos.iter().all(|v| a.get(v.var) >= v.pmin);
    if !lead_divides {
        return Err(Error::Precondition(format!("[2] does not divide {a}")));
    }
    let qq = q.q();
    if let Some(&e) = a.as_slice().iter().find(|&&e| e >= qq) {
        return Err(Error::Domain(format!("exponent {e} is not below q = {qq}")));
    }
    cls.neg
        .iter()
        .zip(params)
        .map(|(v, pr)| pr.bound(qq - a.get(v.var)))
        .min()
        .ok_or_else(|| Error::NotApplicable("no negative difference variable".into()))
}
