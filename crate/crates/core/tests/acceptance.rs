//! Acceptance suite. Runs as a plain binary so each criterion prints a
//! PASS/FAIL line; exits nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::Rng;

use hkb_core::algebra::{parse_binomial, Binomial, ExponentVector, PrimePower};
use hkb_core::classify::classify;
use hkb_core::closedform::{self, phi_closed_simple, phi_recursive, simple_guard};
use hkb_core::engines::{hk, Budgets, Engine, HkOptions};
use hkb_core::error::Error;
use hkb_core::keycheck::{hk_direct_count, MembershipChecker};
use hkb_core::mmax::{mmax_closed, mmax_params};
use hkb_core::multiplicity::{estimate_multiplicity, hk_1dim, hk_multiplicity_1dim, EstimateOptions};
use hkb_core::oracle::{self, hk_oracle, surviving_representatives};

use common::{corpus, for_each_standard, Instance};

const CORPUS_SEED: u64 = 0x5eed_0001;
const CORPUS_SIZE: usize = 240;
const ZERO_DIFF_SEED: u64 = 0x5eed_0006;
const ZERO_DIFF_COUNT: usize = 20;
const MULT_SEED: u64 = 0x5eed_0007;
const MULT_COUNT: usize = 50;
const INVARIANCE_SEED: u64 = 0x5eed_0008;
const INVARIANCE_COUNT: usize = 50;

const WORKED_TIME_LIMIT: Duration = Duration::from_secs(1);
const AGREEMENT_TIME_LIMIT: Duration = Duration::from_secs(60);
const LARGE_CLOSED_TIME_LIMIT: Duration = Duration::from_secs(1);
/// `|HK(q) − c·q| ≤ K²` with `K` the largest exponent of `f`.
fn asymptotic_bound(f: &Binomial) -> BigInt {
    let k = BigInt::from(f.max_exponent());
    &k * &k
}
/// Largest `q^2` used when checking two-variable closed forms against engines.
const ONE_DIM_MAX_NODES: u64 = 2_000_000;

type Verdict = Result<String, String>;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let f = parse_binomial("x1^3 - x2^2", 5, None).map_err(|e| e.to_string())?;
    let q = PrimePower::new(5, 1).unwrap();
    let opts = HkOptions::default();
    for engine in Engine::CONCRETE {
        let v = hk(&f, &q, engine, &opts).map_err(|e| format!("{engine}: {e}"))?.value;
        ensure(v == big(10), || format!("{engine} gave {v}, expected 10"))?;
    }
    for n in 1..=4 {
        let q = PrimePower::new(5, n).unwrap();
        let r = hk(&f, &q, Engine::Auto, &opts).map_err(|e| e.to_string())?;
        let want = big(2 * 5u64.pow(n));
        ensure(r.value == want, || format!("n={n}: {} != {want}", r.value))?;
    }
    let m = hk_multiplicity_1dim(&f).map_err(|e| e.to_string())?;
    ensure(m.value == 2, || format!("multiplicity {}", m.value))?;
    let est = estimate_multiplicity(&f, 1..=4, &EstimateOptions::default()).map_err(|e| e.to_string())?;
    let two = BigRational::from(BigInt::from(2));
    ensure(est.samples.iter().all(|s| s.estimate.0 == two), || "estimates are not all 2".into())?;
    ensure(est.converged, || "estimator did not converge".into())?;
    let el = start.elapsed();
    ensure(el < WORKED_TIME_LIMIT, || format!("took {el:?}"))?;
    Ok(format!("HK = 10 on all engines, 2·5^n for n = 1..4, multiplicity 2, {el:.2?}"))
}

fn criterion_2(corpus: &[Instance]) -> Verdict {
    let start = Instant::now();
    let budgets = Budgets::default();
    let mut closed_used = 0;
    for (i, inst) in corpus.iter().enumerate() {
        let direct = hk_direct_count(&inst.f, &inst.q, budgets.enum_cap).map_err(|e| e.to_string())?;
        let orc = hk_oracle(&inst.f, &inst.q, budgets.oracle_cap).map_err(|e| e.to_string())?;
        ensure(direct == orc, || {
            format!("#{i} {} q={}: direct {direct} oracle {orc}", inst.f, inst.q.q())
        })?;
        match closedform::hk_closed_form(&inst.f, &inst.q) {
            Ok(v) => {
                closed_used += 1;
                ensure(v == orc, || format!("#{i} {} q={}: closed {v} oracle {orc}", inst.f, inst.q.q()))?;
            }
            Err(Error::NotApplicable(_)) => {}
            Err(e) => return Err(format!("#{i} {} q={}: closed form error {e}", inst.f, inst.q.q())),
        }
    }
    let el = start.elapsed();
    ensure(el < AGREEMENT_TIME_LIMIT, || format!("took {el:?}"))?;
    Ok(format!(
        "{} instances, direct = oracle on all, closed form applied and agreed on {closed_used}, {el:.2?}",
        corpus.len()
    ))
}

fn criterion_3(corpus: &[Instance]) -> Verdict {
    let mut monomials = 0u64;
    for (i, inst) in corpus.iter().enumerate() {
        let mut run = oracle::build(&inst.f, &inst.q, u64::MAX).map_err(|e| e.to_string())?;
        let survivors = surviving_representatives(&mut run, &inst.f);
        let checker = MembershipChecker::new(&inst.f, &inst.q).map_err(|e| e.to_string())?;
        let mut bad = None;
        let mut non_members = 0u64;
        for_each_standard(inst.q.q(), inst.f.m(), |idx, a| {
            monomials += 1;
            let member = checker.is_member(a).unwrap().member;
            if !member {
                non_members += 1;
            }
            if member == survivors[idx] && bad.is_none() {
                bad = Some(a.to_vec());
            }
        });
        if let Some(a) = bad {
            return Err(format!("#{i} {} q={}: verdict differs at {a:?}", inst.f, inst.q.q()));
        }
        ensure(non_members == run.stats.live, || format!("#{i}: count {non_members} vs {}", run.stats.live))?;
    }
    Ok(format!("{monomials} standard monomials, every verdict matches the oracle's class representatives"))
}

fn criterion_4(corpus: &[Instance]) -> Verdict {
    let mut checked = 0u64;
    for (i, inst) in corpus.iter().enumerate() {
        let cls = classify(&inst.f);
        let checker = MembershipChecker::new(&inst.f, &inst.q).map_err(|e| e.to_string())?;
        let params = mmax_params(&cls, &inst.q);
        let lead = inst.f.lead().exps.clone();
        let mut err = None;
        for_each_standard(inst.q.q(), inst.f.m(), |_, a| {
            let av = ExponentVector::new(a.to_vec()).unwrap();
            if err.is_some() || !lead.divides(&av) {
                return;
            }
            checked += 1;
            let scanned = checker.mmax_scanned(a);
            match &params {
                Ok(prs) => match mmax_closed(&av, &cls, prs, &inst.q) {
                    Ok(v) if v == scanned => {}
                    Ok(v) => err = Some(format!("#{i} {} A={av}: closed {v} scan {scanned}", inst.f)),
                    Err(e) => err = Some(format!("#{i} A={av}: {e}")),
                },
                Err(e) => err = Some(format!("#{i} {}: [2] divides {av} but params fail: {e}", inst.f)),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(format!("{checked} monomials divisible by [2], closed M_max = scanned M_max on all"))
}

fn criterion_5(corpus: &[Instance]) -> Verdict {
    let (mut simple, mut refused) = (0u64, 0u64);
    for (i, inst) in corpus.iter().enumerate() {
        let cls = classify(&inst.f);
        if cls.t == 0 {
            continue;
        }
        let checker = MembershipChecker::new(&inst.f, &inst.q).map_err(|e| e.to_string())?;
        let mut mus = BTreeSet::new();
        for_each_standard(inst.q.q(), inst.f.m(), |_, a| {
            let m = checker.mmax_scanned(a);
            if m > 0 {
                mus.insert(m);
            }
        });
        for &mu in &mus {
            let rec = phi_recursive(mu, &cls, &inst.q).map_err(|e| e.to_string())?;
            match phi_closed_simple(mu, &cls, &inst.q) {
                Ok(v) => {
                    simple += 1;
                    ensure(v == rec, || format!("#{i} {} μ={mu}: simple {v} recursive {rec}", inst.f))?;
                }
                Err(Error::NotApplicable(_)) => {
                    refused += 1;
                    ensure(!simple_guard(mu, &cls, &inst.q), || format!("#{i} μ={mu}: refused inside guard"))?;
                }
                Err(e) => return Err(format!("#{i} μ={mu}: {e}")),
            }
        }
    }
    ensure(simple > 0, || "the simple-case guard never held".into())?;
    Ok(format!("{simple} guarded (instance, M_max) pairs agree, {refused} refused as not applicable"))
}

fn criterion_6() -> Verdict {
    let opts = HkOptions::default();
    let mut checks = 0;
    for f in common::zero_difference_binomials(ZERO_DIFF_SEED, ZERO_DIFF_COUNT) {
        let n0 = hkb_core::multiplicity::threshold_n0(&f);
        let (l, t) = (f.lead().exps.as_slice(), f.trail().exps.as_slice());
        let (x1, x2) = (l[0].min(t[0]), l[1].min(t[1]));
        for n in n0..n0 + 3 {
            let q = PrimePower::new(f.p(), n).unwrap();
            if q.q() * q.q() > ONE_DIM_MAX_NODES {
                break;
            }
            let want = BigUint::from((x1 + x2) * q.q() - x1 * x2);
            let engine = hk(&f, &q, Engine::Auto, &opts).map_err(|e| e.to_string())?.value;
            let oracle = hk_oracle(&f, &q, ONE_DIM_MAX_NODES).map_err(|e| e.to_string())?;
            let formula = hk_1dim(&f, &q).map_err(|e| e.to_string())?.value;
            ensure(engine == want && oracle == want && formula == want, || {
                format!("{f} q={}: engine {engine} oracle {oracle} formula {formula} expected {want}", q.q())
            })?;
            checks += 1;
        }
    }
    Ok(format!("{ZERO_DIFF_COUNT} binomials, {checks} (f, n) pairs match (x1,min + x2,min)q − x1,min·x2,min"))
}

fn criterion_7() -> Verdict {
    let opts = EstimateOptions {
        exact_1dim: true,
        ..Default::default()
    };
    let mut cases = BTreeSet::new();
    for f in common::two_variable_binomials(MULT_SEED, MULT_COUNT) {
        let rep = estimate_multiplicity(&f, 1..=3, &opts).map_err(|e| format!("{f}: {e}"))?;
        let exact = rep.exact.clone().unwrap();
        cases.insert(exact.case.label());
        let want = BigRational::from(BigInt::from(exact.value));
        let limit = rep.limit.clone().map(|r| r.0);
        ensure(!rep.incomplete, || format!("{f}: incomplete"))?;
        ensure(rep.converged, || format!("{f} p={}: not converged, gap {:?} bound {:?}", f.p(), rep.gap, rep.bound))?;
        ensure(limit.as_ref() == Some(&want), || {
            format!("{f} p={}: limit {limit:?} vs {} ({})", f.p(), exact.value, exact.case.label())
        })?;
    }
    Ok(format!(
        "{MULT_COUNT} binomials converge by n = 3 to the integer multiplicity; cases {:?}",
        cases
    ))
}

fn criterion_8(corpus: &[Instance]) -> Verdict {
    let mut rng = common::rng(INVARIANCE_SEED);
    let opts = HkOptions::default();
    let sample: Vec<&Instance> = corpus.choose_multiple(&mut rng, INVARIANCE_COUNT).collect();
    for inst in &sample {
        let base = hk(&inst.f, &inst.q, Engine::Auto, &opts).map_err(|e| e.to_string())?.value;
        let mut perm: Vec<usize> = (0..inst.f.m()).collect();
        perm.shuffle(&mut rng);
        let g = inst.f.permuted(&perm).map_err(|e| e.to_string())?;
        let v = hk(&g, &inst.q, Engine::Auto, &opts).map_err(|e| e.to_string())?.value;
        ensure(v == base, || format!("{} relabelled by {perm:?}: {v} vs {base}", inst.f))?;
    }
    for inst in &sample {
        let base = hk_oracle(&inst.f, &inst.q, u64::MAX).map_err(|e| e.to_string())?;
        let p = inst.f.p();
        let (u, w) = (rng.gen_range(1..p), rng.gen_range(1..p));
        let g = inst
            .f
            .with_coefficients(inst.f.lead().coeff * u % p, inst.f.trail().coeff * w % p)
            .map_err(|e| e.to_string())?;
        for engine in Engine::CONCRETE {
            match hk(&g, &inst.q, engine, &opts) {
                Ok(r) => ensure(r.value == base, || format!("{} scaled by ({u},{w}) on {engine}: {} vs {base}", inst.f, r.value))?,
                Err(Error::NotApplicable(_)) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    Ok(format!("{INVARIANCE_COUNT} instances per transform, relabeling and coefficient scaling leave HK unchanged"))
}

fn criterion_9(corpus: &[Instance]) -> Verdict {
    let f = parse_binomial("x1^3 - x2^2", 5, None).unwrap();
    let q = PrimePower::new(5, 8).unwrap();
    let start = Instant::now();
    let v = closedform::hk_closed_form(&f, &q).map_err(|e| e.to_string())?;
    let el = start.elapsed();
    ensure(v == big(781_250), || format!("closed form gave {v}"))?;
    ensure(el < LARGE_CLOSED_TIME_LIMIT, || format!("closed form took {el:?}"))?;
    let over = matches!(
        hk(&f, &q, Engine::Oracle, &HkOptions::default()),
        Err(Error::Resource { .. })
    );
    ensure(over, || "oracle did not refuse q = 5^8".into())?;

    let opts = HkOptions::default();
    let mut worst = BigRational::from(BigInt::from(0));
    let mut count = 0;
    let mut seen = BTreeSet::new();
    for inst in corpus.iter().filter(|i| i.f.m() == 2) {
        if !seen.insert(inst.f.to_string() + &inst.f.p().to_string()) {
            continue;
        }
        let c = BigInt::from(hk_multiplicity_1dim(&inst.f).map_err(|e| e.to_string())?.value);
        let bound = asymptotic_bound(&inst.f);
        for n in 1..=4 {
            let q = PrimePower::new(inst.f.p(), n).unwrap();
            let hkv = BigInt::from(hk(&inst.f, &q, Engine::Auto, &opts).map_err(|e| e.to_string())?.value);
            let dev = (&hkv - &c * BigInt::from(q.q())).abs();
            ensure(dev <= bound, || format!("{} q={}: |HK − c·q| = {dev} > {bound}", inst.f, q.q()))?;
            let ratio = BigRational::new(dev, bound.clone().max(BigInt::from(1)));
            if ratio > worst {
                worst = ratio;
            }
        }
        count += 1;
    }
    Ok(format!(
        "q = 5^8 closed form = 781250 in {el:.2?}, oracle over budget; {count} two-variable binomials satisfy |HK − c·q| ≤ K² for n = 1..4 (worst {worst} of the bound)"
    ))
}

fn main() {
    let corpus = corpus(CORPUS_SEED, CORPUS_SIZE);
    let results: Vec<(&str, Verdict)> = vec![
        ("1 worked instance", criterion_1()),
        ("2 three-way engine agreement", criterion_2(&corpus)),
        ("3 membership criterion", criterion_3(&corpus)),
        ("4 closed M_max", criterion_4(&corpus)),
        ("5 Φ consistency", criterion_5(&corpus)),
        ("6 zero-difference closed form", criterion_6()),
        ("7 integer multiplicity in dimension 1", criterion_7()),
        ("8 invariance", criterion_8(&corpus)),
        ("9 performance separation and asymptotics", criterion_9(&corpus)),
    ];
    let mut failed = 0;
    for (name, verdict) in &results {
        match verdict {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
