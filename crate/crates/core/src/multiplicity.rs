//! Hilbert-Kunz multiplicity.
//!
//! For two variables the function is known exactly once `q` exceeds every
//! exponent of `f`, and the multiplicity is an integer. For more variables
//! the multiplicity is estimated from exact values `HK(p^n)/p^{nd}`.

use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{Binomial, PrimePower};
use crate::classify::classify;
use crate::engines::{hk, Engine, HkOptions, HkReport};
use crate::error::{Error, Result};
use crate::mmax::mmax_params;
use crate::num_str;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OneDimCase {
    /// A negative and a zero difference variable.
    #[serde(rename = "II")]
    NegZero,
    /// Two negative difference variables.
    #[serde(rename = "NN")]
    NegNeg,
    /// Negative and positive, `a_1 < Δ_{P_1}`.
    #[serde(rename = "I(i)")]
    SlowNeg,
    /// Negative and positive, `a_1 > Δ_{P_1}`.
    #[serde(rename = "I(ii)")]
    FastNeg,
    /// Negative and positive, `a_1 = Δ_{P_1}`.
    #[serde(rename = "I(iii)")]
    Balanced,
}

impl OneDimCase {
    pub fn label(self) -> &'static str {
        match self {
            OneDimCase::NegZero => "II",
            OneDimCase::NegNeg => "NN",
            OneDimCase::SlowNeg => "I(i)",
            OneDimCase::FastNeg => "I(ii)",
            OneDimCase::Balanced => "I(iii)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OneDim {
    pub case: OneDimCase,
    #[serde(serialize_with = "num_str::ser")]
    pub value: BigUint,
    /// The case's displayed closed expression evaluated literally; it can
    /// differ from `value` in subcases I(i) and I(iii) and when
    /// `B·Δ > q − P_max` in I(ii).
    #[serde(serialize_with = "num_str::ser")]
    pub display: BigInt,
    pub display_matches: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OneDimMultiplicity {
    pub case: OneDimCase,
    pub value: u64,
}

fn require_two_vars(f: &Binomial) -> Result<()> {
    if f.m() != 2 {
        return Err(Error::Domain(format!("expected 2 variables, got {}", f.m())));
    }
    Ok(())
}

/// Smallest `n` with `p^n` above every exponent of `f`.
pub fn threshold_n0(f: &Binomial) -> u32 {
    let max_e = f.max_exponent() as u128;
    let mut n = 1u32;
    let mut q = f.p() as u128;
    while q <= max_e {
        q *= f.p() as u128;
        n += 1;
    }
    n
}

fn case_of(f: &Binomial) -> OneDimCase {
    let cls = classify(f);
    match (cls.r, cls.s, cls.t) {
        (1, 1, 0) => OneDimCase::NegZero,
        (2, 0, 0) => OneDimCase::NegNeg,
        (1, 0, 1) => {
            let (a, dp) = (cls.neg[0].a, cls.pos[0].dp);
            match a.cmp(&dp) {
                std::cmp::Ordering::Less => OneDimCase::SlowNeg,
                std::cmp::Ordering::Greater => OneDimCase::FastNeg,
                std::cmp::Ordering::Equal => OneDimCase::Balanced,
            }
        }
        // r ≥ 1 always holds since the lead is deg-lex larger.
        other => unreachable!("classification {other:?} cannot occur for a binomial"),
    }
}

fn mins(f: &Binomial) -> (u64, u64) {
    let (l, t) = (f.lead().exps.as_slice(), f.trail().exps.as_slice());
    (l[0].min(t[0]), l[1].min(t[1]))
}

pub fn hk_multiplicity_1dim(f: &Binomial) -> Result<OneDimMultiplicity> {
    require_two_vars(f)?;
    let case = case_of(f);
    let cls = classify(f);
    let value = match case {
        OneDimCase::NegZero | OneDimCase::NegNeg => {
            let (x, y) = mins(f);
            x + y
        }
        OneDimCase::SlowNeg => cls.pos[0].pmin + cls.neg[0].a + cls.neg[0].b,
        OneDimCase::FastNeg | OneDimCase::Balanced => cls.pos[0].pmax + cls.neg[0].b,
    };
    Ok(OneDimMultiplicity { case, value })
}

/// `Σ_{μ=1}^{k} min(P_max, max(P_min, q − μΔ))`.
fn clipped_sum(k: i128, q: i128, dp: i128, pmin: i128, pmax: i128) -> BigInt {
    if k <= 0 {
        return BigInt::zero();
    }
    let hi_end = Integer::div_floor(&(q - pmax), &dp).clamp(0, k);
    let lo_start = Integer::div_ceil(&(q - pmin), &dp).max(hi_end + 1);
    let mid_end = (lo_start - 1).min(k);
    let mut total = BigInt::from(pmax) * hi_end;
    if mid_end > hi_end {
        let cnt = BigInt::from(mid_end - hi_end);
        let sum_mu = (BigInt::from(mid_end) * (mid_end + 1) - BigInt::from(hi_end) * (hi_end + 1)) / 2;
        total += &cnt * q - sum_mu * dp;
    }
    if k >= lo_start {
        total += BigInt::from(pmin) * (k - lo_start + 1);
    }
    total
}

pub fn hk_1dim(f: &Binomial, q: &PrimePower) -> Result<OneDim> {
    require_two_vars(f)?;
    f.check_prime_power(q)?;
    if q.q() <= f.max_exponent() {
        return Err(Error::Precondition(format!(
            "q = {} must exceed every exponent of f (n ≥ {})",
            q.q(),
            threshold_n0(f)
        )));
    }
    let case = case_of(f);
    let qq = q.q() as i128;
    let qb = BigInt::from(q.q());
    let (value, display) = match case {
        OneDimCase::NegZero | OneDimCase::NegNeg => {
            let (x, y) = mins(f);
            let v = BigInt::from(x + y) * &qb - BigInt::from(x) * y;
            (v.clone(), v)
        }
        _ => {
            let cls = classify(f);
            let params = mmax_params(&cls, q)?;
            let (nv, pv, pr) = (&cls.neg[0], &cls.pos[0], &params[0]);
            let (a, b, nmax, nmin) = (nv.a as i128, nv.b as i128, nv.nmax as i128, nv.nmin as i128);
            let (dp, pmin, pmax) = (pv.dp as i128, pv.pmin as i128, pv.pmax as i128);
            let tail = BigInt::from(nmax - nmin) * pmax + BigInt::from(nmin) * &qb;

            let u = qq - 1 - b;
            let k = u / a;
            let wl = u - a * k + 1;
            let g_k = pmax.min(pmin.max(qq - k * dp));
            let exact = BigInt::from(a) * clipped_sum(k, qq, dp, pmin, pmax) - BigInt::from(a - wl) * g_k + &tail;

            let (e, r, pa) = (pr.e_ai_bi as i128, pr.r_ai_n as i128, pr.p_ai as i128);
            let (kt, ap) = (pr.ktilde_last as i128, pr.a_prime);
            let display = match case {
                OneDimCase::FastNeg => BigInt::from(qq - nmax) * pmax + &tail,
                OneDimCase::SlowNeg => {
                    let num = BigInt::from(qq) * (dp - a) - dp - BigInt::from(r) * dp - BigInt::from(pa) * a * dp
                        + BigInt::from(pmin) * a;
                    let x = num.div_floor(&BigInt::from(a * dp));
                    BigInt::from(1 + e) * pmin + BigInt::from(a * pmin) * &x - a * pmax
                        + BigInt::from(a * pmax) * kt
                        - BigInt::from(a * pmax) * &x
                        + BigInt::from(ap) * pmax
                        + &tail
                }
                _ => {
                    let base = 1 + r + a * pa;
                    let n0 = Integer::div_floor(&(pmin - 1 - r - a * pa), &a).max(1);
                    let n0p = Integer::div_floor(&(pmax - 1 - r - a * pa), &a).max(1);
                    let cnt = (n0p - n0).max(0);
                    let ksum = if cnt > 0 {
                        BigInt::from(n0p) * (n0p + 1) / 2 - BigInt::from(n0) * (n0 + 1) / 2
                    } else {
                        BigInt::zero()
                    };
                    let inner = BigInt::from(cnt) * base + ksum * a;
                    BigInt::from(1 + e) * pmin
                        + BigInt::from(a * pmin) * n0
                        + inner * a
                        + BigInt::from(a * pmax) * (kt - 1 - n0p)
                        + BigInt::from(ap) * pmax
                        + &tail
                }
            };
            (exact, display)
        }
    };
    let value = value
        .to_biguint()
        .ok_or_else(|| Error::FormulaDomain(format!("negative value {value}")))?;
    let display_matches = BigInt::from(value.clone()) == display;
    Ok(OneDim {
        case,
        value,
        display,
        display_matches,
    })
}

/// Exact rational carried as decimal strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rational(pub BigRational);

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: String,
    den: String,
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalRepr {
            num: self.0.numer().to_string(),
            den: self.0.denom().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = RationalRepr::deserialize(d)?;
        let num: BigInt = r.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = r.den.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Rational(BigRational::new(num, den)))
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub n: u32,
    #[serde(serialize_with = "num_str::ser", deserialize_with = "num_str::de")]
    pub q: BigUint,
    #[serde(serialize_with = "num_str::ser", deserialize_with = "num_str::de")]
    pub hk: BigUint,
    pub engine: Engine,
    /// `HK / q^d`.
    pub estimate: Rational,
}

impl Sample {
    /// Sample at `q = p^n` with estimate `HK / q^{m−1}`.
    pub fn from_report(rep: &HkReport) -> Sample {
        let q = BigUint::from(rep.q);
        let qd = num_traits::pow(q.clone(), rep.m - 1);
        Sample {
            n: rep.n,
            estimate: Rational(BigRational::new(BigInt::from(rep.value.clone()), BigInt::from(qd))),
            q,
            hk: rep.value.clone(),
            engine: rep.engine,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactMultiplicity {
    pub case: OneDimCase,
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityReport {
    pub d: usize,
    pub samples: Vec<Sample>,
    /// `(HK_k − HK_{k−1}) / (q_k^d − q_{k−1}^d)` over the last two samples.
    pub limit: Option<Rational>,
    pub exact: Option<ExactMultiplicity>,
    /// `C` in the bound `C / q`.
    pub c: Option<Rational>,
    /// `|estimate_k − estimate_{k−1}|` over the last two samples.
    pub gap: Option<Rational>,
    /// `C / q_{k−1}`.
    pub bound: Option<Rational>,
    pub converged: bool,
    pub incomplete: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct EstimateOptions {
    pub hk: HkOptions,
    /// Overrides the default `C = q_1·|estimate_2 − estimate_1|`.
    pub c: Option<BigRational>,
    /// Adds the exact two-variable multiplicity when `m = 2`.
    pub exact_1dim: bool,
}

pub fn estimate_multiplicity(
    f: &Binomial,
    ns: RangeInclusive<u32>,
    opts: &EstimateOptions,
) -> Result<MultiplicityReport> {
    let d = f.m() - 1;
    let mut samples = Vec::new();
    let mut note = None;
    for n in ns {
        let q = PrimePower::new(f.p(), n)?;
        match hk(f, &q, Engine::Auto, &opts.hk) {
            Ok(rep) => samples.push(Sample::from_report(&rep)),
            Err(e @ Error::Resource { .. }) => {
                note = Some(format!("stopped at n = {n}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let incomplete = note.is_some();

    let qd = |s: &Sample| BigInt::from(num_traits::pow(s.q.clone(), d));
    let limit = match samples.as_slice() {
        [.., prev, last] if d > 0 => Some(Rational(BigRational::new(
            BigInt::from(last.hk.clone()) - BigInt::from(prev.hk.clone()),
            qd(last) - qd(prev),
        ))),
        [.., last] => Some(Rational(BigRational::from(BigInt::from(last.hk.clone())))),
        [] => None,
    };
    let c = opts.c.clone().or_else(|| match samples.as_slice() {
        [s1, s2, ..] => Some((&s2.estimate.0 - &s1.estimate.0).abs() * BigInt::from(s1.q.clone())),
        _ => None,
    });
    let (gap, bound) = match samples.as_slice() {
        [.., prev, last] => (
            Some((&last.estimate.0 - &prev.estimate.0).abs()),
            c.as_ref().map(|c| c / BigInt::from(prev.q.clone())),
        ),
        _ => (None, None),
    };
    let enough = samples.len() >= 3 || (opts.c.is_some() && samples.len() >= 2);
    let converged = enough
        && match (&gap, &bound) {
            (Some(g), Some(b)) => g <= b,
            _ => false,
        };
    let exact = if opts.exact_1dim && f.m() == 2 {
        let m = hk_multiplicity_1dim(f)?;
        Some(ExactMultiplicity {
            case: m.case,
            value: m.value,
        })
    } else {
        None
    };
    Ok(MultiplicityReport {
        d,
        samples,
        limit,
        exact,
        c: c.map(Rational),
        gap: gap.map(Rational),
        bound: bound.map(Rational),
        converged,
        incomplete,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_binomial;

    fn f(poly: &str, p: u64) -> Binomial {
        parse_binomial(poly, p, None).unwrap()
    }

    #[test]
    fn worked_one_dim() {
        let g = f("x1^3 - x2^2", 5);
        let r = hk_1dim(&g, &PrimePower::new(5, 1).unwrap()).unwrap();
        assert_eq!(r.case, OneDimCase::FastNeg);
        assert_eq!(r.value, BigUint::from(10u32));
        assert!(r.display_matches);
        assert_eq!(hk_multiplicity_1dim(&g).unwrap().value, 2);

        let g = f("x1^3*x2 - x1*x2", 3);
        let r = hk_1dim(&g, &PrimePower::new(3, 2).unwrap()).unwrap();
        assert_eq!(r.case, OneDimCase::NegZero);
        assert_eq!(r.value, BigUint::from(17u32));
        assert_eq!(hk_multiplicity_1dim(&g).unwrap().value, 2);

        for (p, n) in [(2, 3), (7, 2)] {
            let g = f("x1 - x2", p);
            let q = PrimePower::new(p, n).unwrap();
            let r = hk_1dim(&g, &q).unwrap();
            assert_eq!(r.case, OneDimCase::Balanced);
            assert_eq!(r.value, BigUint::from(q.q()));
        }
    }

    #[test]
    fn domain_errors() {
        let g = parse_binomial("x1^2 - x3", 5, None).unwrap();
        assert!(matches!(hk_1dim(&g, &PrimePower::new(5, 1).unwrap()), Err(Error::Domain(_))));
        assert!(matches!(hk_multiplicity_1dim(&g), Err(Error::Domain(_))));
        let g = f("x1^3 - x2^2", 2);
        assert!(matches!(hk_1dim(&g, &PrimePower::new(2, 1).unwrap()), Err(Error::Precondition(_))));
        assert_eq!(threshold_n0(&g), 2);
    }

    #[test]
    fn clipped_sum_matches_loop() {
        for q in [5i128, 8, 13, 27] {
            for dp in 1..5 {
                for pmin in 0..3 {
                    let pmax = pmin + dp;
                    if pmax >= q {
                        continue;
                    }
                    for k in 0..(q + 3) {
                        let direct: i128 = (1..=k).map(|mu| pmax.min(pmin.max(q - mu * dp))).sum();
                        assert_eq!(clipped_sum(k, q, dp, pmin, pmax), BigInt::from(direct));
                    }
                }
            }
        }
    }

    #[test]
    fn estimator_on_cusp() {
        let g = f("x1^3 - x2^2", 5);
        let opts = EstimateOptions {
            exact_1dim: true,
            ..Default::default()
        };
        let rep = estimate_multiplicity(&g, 1..=3, &opts).unwrap();
        let hks: Vec<String> = rep.samples.iter().map(|s| s.hk.to_string()).collect();
        assert_eq!(hks, vec!["10", "50", "250"]);
        assert!(rep.samples.iter().all(|s| s.estimate.0 == BigRational::from(BigInt::from(2))));
        assert!(rep.converged);
        assert_eq!(rep.limit.unwrap().0, BigRational::from(BigInt::from(2)));
        assert_eq!(rep.exact.unwrap().value, 2);
    }

    #[test]
    fn estimator_line_and_round_trip() {
        let g = f("x1 - x2", 7);
        let rep = estimate_multiplicity(&g, 1..=3, &EstimateOptions::default()).unwrap();
        assert!(rep.samples.iter().all(|s| s.estimate.0 == BigRational::from(BigInt::from(1))));
        let text = serde_json::to_string(&rep).unwrap();
        let back: MultiplicityReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn estimator_reports_partial_range() {
        let g = f("x1^3*x2 - x1*x2", 3);
        let opts = EstimateOptions {
            hk: HkOptions {
                budgets: crate::engines::Budgets {
                    enum_cap: 1000,
                    oracle_cap: 1000,
                    closed_cap: 1000,
                },
                ..Default::default()
            },
            ..Default::default()
        };
        let rep = estimate_multiplicity(&g, 1..=5, &opts).unwrap();
        assert!(rep.incomplete);
        assert_eq!(rep.samples.len(), 3);
    }
}
