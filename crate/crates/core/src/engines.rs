//! Engine selection and the cross-check harness.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{parse_binomial, Binomial, PrimePower};
use crate::classify::{classify, Classification};
use crate::closedform::{self, ClosedFormOptions, ClosedFormTables, DEFAULT_CLOSED_CAP};
use crate::error::{Error, Result};
use crate::mmax::{mmax_params, MmaxParams};
use crate::num_str;
use crate::oracle::{self, OracleStats, DEFAULT_ORACLE_CAP};
use crate::keycheck;

pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Auto,
    Closed,
    Direct,
    Oracle,
}

impl Engine {
    pub const CONCRETE: [Engine; 3] = [Engine::Closed, Engine::Direct, Engine::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Auto => "auto",
            Engine::Closed => "closed",
            Engine::Direct => "direct",
            Engine::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Engine::Auto),
            "closed" => Ok(Engine::Closed),
            "direct" => Ok(Engine::Direct),
            "oracle" => Ok(Engine::Oracle),
            other => Err(Error::Domain(format!("unknown engine {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    /// Membership tests allowed for the direct count.
    pub enum_cap: u64,
    /// Nodes allowed for the oracle.
    pub oracle_cap: u64,
    /// `Φ` evaluations allowed for the closed form.
    pub closed_cap: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            enum_cap: DEFAULT_ENUM_CAP,
            oracle_cap: DEFAULT_ORACLE_CAP,
            closed_cap: DEFAULT_CLOSED_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HkOptions {
    pub budgets: Budgets,
    /// Keep closed-form tables in the report.
    pub verbose: bool,
    /// Record wall-clock time; off by default so reports are reproducible.
    pub timing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HkReport {
    pub poly: String,
    #[serde(serialize_with = "num_str::ser")]
    pub p: u64,
    pub n: u32,
    #[serde(serialize_with = "num_str::ser")]
    pub q: u64,
    pub m: usize,
    #[serde(serialize_with = "num_str::ser")]
    pub value: BigUint,
    pub engine: Engine,
    pub guard_notes: Vec<String>,
    pub classification: Classification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mmax_params: Option<Vec<MmaxParams>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tables: Option<ClosedFormTables>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_stats: Option<OracleStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

struct Outcome {
    value: BigUint,
    tables: Option<ClosedFormTables>,
    stats: Option<OracleStats>,
}

fn run_engine(f: &Binomial, q: &PrimePower, engine: Engine, opts: &HkOptions) -> Result<Outcome> {
    match engine {
        Engine::Closed => {
            let cf = closedform::evaluate(
                f,
                q,
                ClosedFormOptions {
                    cap: opts.budgets.closed_cap,
                    keep_integrals: opts.verbose,
                },
            )?;
            Ok(Outcome {
                value: cf.value,
                tables: opts.verbose.then_some(cf.tables),
                stats: None,
            })
        }
        Engine::Direct => Ok(Outcome {
            value: keycheck::hk_direct_count(f, q, opts.budgets.enum_cap)?,
            tables: None,
            stats: None,
        }),
        Engine::Oracle => {
            let run = oracle::build(f, q, opts.budgets.oracle_cap)?;
            Ok(Outcome {
                value: BigUint::from(run.stats.live),
                tables: None,
                stats: Some(run.stats),
            })
        }
        Engine::Auto => unreachable!("auto is resolved by hk"),
    }
}

/// Errors after which `auto` moves on to the next engine.
fn falls_back(e: &Error) -> bool {
    matches!(
        e,
        Error::NotApplicable(_) | Error::Resource { .. } | Error::FormulaDomain(_)
    )
}

pub fn hk(f: &Binomial, q: &PrimePower, engine: Engine, opts: &HkOptions) -> Result<HkReport> {
    f.check_prime_power(q)?;
    let start = Instant::now();
    let mut notes = Vec::new();
    let (used, outcome) = if engine == Engine::Auto {
        let mut found = None;
        for e in Engine::CONCRETE {
            match run_engine(f, q, e, opts) {
                Ok(out) => {
                    found = Some((e, out));
                    break;
                }
                Err(err) if falls_back(&err) => notes.push(format!("{e} skipped: {err}")),
                Err(err) => return Err(err),
            }
        }
        match found {
            Some(x) => x,
            None => {
                return Err(Error::resource(
                    "any engine",
                    notes.join("; "),
                    format!(
                        "enum_cap={}, oracle_cap={}, closed_cap={}",
                        opts.budgets.enum_cap, opts.budgets.oracle_cap, opts.budgets.closed_cap
                    ),
                ))
            }
        }
    } else {
        (engine, run_engine(f, q, engine, opts)?)
    };
    let cls = classify(f);
    Ok(HkReport {
        poly: f.to_string(),
        p: q.p(),
        n: q.n(),
        q: q.q(),
        m: f.m(),
        value: outcome.value,
        engine: used,
        guard_notes: notes,
        mmax_params: mmax_params(&cls, q).ok(),
        classification: cls,
        tables: outcome.tables,
        oracle_stats: outcome.stats,
        timing: opts.timing.then(|| Timing {
            ms: start.elapsed().as_secs_f64() * 1e3,
        }),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub poly: String,
    pub p: u64,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vars: Option<usize>,
    /// Known value, compared with every engine.
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "expected_value")]
    pub expected: Option<String>,
}

/// Accepts the expected value as a JSON string or number.
fn expected_value<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    use serde::de::Error as _;
    match Option::<serde_json::Value>::deserialize(d)? {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(serde_json::Value::String(s)) => s
            .parse::<BigUint>()
            .map(|v| Some(v.to_string()))
            .map_err(|e| D::Error::custom(format!("expected: {e}"))),
        Some(serde_json::Value::Number(n)) => n
            .as_u64()
            .map(|v| Some(v.to_string()))
            .ok_or_else(|| D::Error::custom("expected must be a nonnegative integer")),
        Some(other) => Err(D::Error::custom(format!("expected must be an integer, got {other}"))),
    }
}

/// One JSON object per line; blank lines are ignored.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Io(format!("corpus line {}: {e}", i + 1)))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub index: usize,
    pub poly: String,
    #[serde(serialize_with = "num_str::ser")]
    pub p: u64,
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    pub values: BTreeMap<Engine, String>,
    pub skipped: BTreeMap<Engine, String>,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
    pub mismatches: usize,
    pub invalid: usize,
}

fn check_one(index: usize, e: &CorpusEntry, budgets: Budgets) -> CheckEntry {
    let mut entry = CheckEntry {
        index,
        poly: e.poly.clone(),
        p: e.p,
        n: e.n,
        expected: e.expected.clone(),
        values: BTreeMap::new(),
        skipped: BTreeMap::new(),
        agree: true,
        error: None,
    };
    let parsed = parse_binomial(&e.poly, e.p, e.vars).and_then(|f| Ok((PrimePower::new(e.p, e.n)?, f)));
    let (q, f) = match parsed {
        Ok(x) => x,
        Err(err) => {
            entry.error = Some(err.to_string());
            return entry;
        }
    };
    let opts = HkOptions {
        budgets,
        ..Default::default()
    };
    for engine in Engine::CONCRETE {
        match run_engine(&f, &q, engine, &opts) {
            Ok(out) => {
                entry.values.insert(engine, out.value.to_string());
            }
            Err(err) => {
                entry.skipped.insert(engine, err.to_string());
            }
        }
    }
    let mut vals = entry.expected.iter().chain(entry.values.values());
    if let Some(first) = vals.next() {
        entry.agree = vals.all(|v| v == first);
    }
    entry
}

/// Runs every applicable engine on each instance. Results are in input order.
pub fn cross_check(corpus: &[CorpusEntry], budgets: Budgets, workers: Option<usize>) -> Result<CheckReport> {
    let work = || -> Vec<CheckEntry> {
        corpus
            .par_iter()
            .enumerate()
            .map(|(i, e)| check_one(i, e, budgets))
            .collect()
    };
    let entries = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(work),
        None => work(),
    };
    let mismatches = entries.iter().filter(|e| e.error.is_none() && !e.agree).count();
    let invalid = entries.iter().filter(|e| e.error.is_some()).count();
    Ok(CheckReport {
        entries,
        mismatches,
        invalid,
    })
}
