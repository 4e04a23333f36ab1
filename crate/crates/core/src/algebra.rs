//! Exponent vectors, terms, binomials and the degree-lexicographic term order.
//!
//! The term order compares total degree first and breaks ties lexicographically
//! with `x_m` the most significant variable (`x_1 ⊴ … ⊴ x_m`). A [`Binomial`]
//! always stores its deg-lex larger term as `lead` (the term `[2]`) and the
//! smaller one as `trail` (the term `[1]`).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num_str;

/// Largest exponent accepted anywhere; keeps signed differences in `i64`.
pub const MAX_EXPONENT: u64 = i64::MAX as u64;

/// Largest `q = p^n` accepted. Leaves headroom for `q`-sized sums in `i128`.
pub const MAX_Q: u64 = 1 << 62;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(Vec<u64>);

impl Serialize for ExponentVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        num_str::ser_seq(&self.0, s)
    }
}

impl ExponentVector {
    pub fn new(exps: Vec<u64>) -> Result<Self> {
        if exps.is_empty() {
            return Err(Error::Domain("exponent vector needs at least one variable".into()));
        }
        if let Some(&e) = exps.iter().find(|&&e| e > MAX_EXPONENT) {
            return Err(Error::Domain(format!("exponent {e} exceeds {MAX_EXPONENT}")));
        }
        Ok(Self(exps))
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0; m.max(1)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u64 {
        self.0[i]
    }

    pub fn degree(&self) -> u128 {
        self.0.iter().map(|&e| e as u128).sum()
    }

    pub fn max_entry(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `self | other` as monomials.
    pub fn divides(&self, other: &ExponentVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Reorders entries so that position `k` holds the old entry `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> ExponentVector {
        ExponentVector(order.iter().map(|&i| self.0[i]).collect())
    }

    fn check_len(&self, other: &ExponentVector) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }
}

impl From<ExponentVector> for Vec<u64> {
    fn from(v: ExponentVector) -> Self {
        v.0
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Degree first, then lexicographic with the last variable most significant.
pub fn deglex_compare(u: &ExponentVector, v: &ExponentVector) -> Result<Ordering> {
    u.check_len(v)?;
    let by_degree = u.degree().cmp(&v.degree());
    if by_degree != Ordering::Equal {
        return Ok(by_degree);
    }
    for (a, b) in u.0.iter().rev().zip(v.0.iter().rev()) {
        match a.cmp(b) {
            Ordering::Equal => continue,
            other => return Ok(other),
        }
    }
    Ok(Ordering::Equal)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while (d as u128) * (d as u128) <= p as u128 {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrimePower {
    #[serde(serialize_with = "num_str::ser")]
    p: u64,
    n: u32,
    #[serde(serialize_with = "num_str::ser")]
    q: u64,
}

impl PrimePower {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::Domain("n must be a positive integer".into()));
        }
        let q = p
            .checked_pow(n)
            .filter(|&q| q <= MAX_Q)
            .ok_or_else(|| Error::Domain(format!("{p}^{n} exceeds {MAX_Q}")))?;
        Ok(Self { p, n, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Term {
    #[serde(serialize_with = "num_str::ser")]
    pub coeff: u64,
    pub exps: ExponentVector,
}

impl Term {
    pub fn new(coeff: u64, exps: ExponentVector) -> Self {
        Self { coeff, exps }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if self.coeff != 1 {
            write!(f, "{}", self.coeff)?;
            first = false;
        }
        for (i, &e) in self.exps.as_slice().iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e != 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            write!(f, "{}", self.coeff)?;
        }
        Ok(())
    }
}

/// `f = lead + trail` over `F_p`, with `lead ≻ trail` in deg-lex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Binomial {
    #[serde(serialize_with = "num_str::ser")]
    p: u64,
    lead: Term,
    trail: Term,
}

impl Binomial {
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Number of variables.
    pub fn m(&self) -> usize {
        self.lead.exps.len()
    }

    /// The term `[2]`.
    pub fn lead(&self) -> &Term {
        &self.lead
    }

    /// The term `[1]`.
    pub fn trail(&self) -> &Term {
        &self.trail
    }

    pub fn max_exponent(&self) -> u64 {
        self.lead.exps.max_entry().max(self.trail.exps.max_entry())
    }

    /// Same monomials with replaced coefficients.
    pub fn with_coefficients(&self, lead_coeff: u64, trail_coeff: u64) -> Result<Binomial> {
        normalize(
            self.p,
            Term::new(lead_coeff, self.lead.exps.clone()),
            Term::new(trail_coeff, self.trail.exps.clone()),
        )
    }

    /// Relabels variables: new variable `k` is old variable `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Binomial> {
        let m = self.m();
        let mut seen = vec![false; m];
        if order.len() != m || order.iter().any(|&i| i >= m || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::Domain(format!("{order:?} is not a permutation of 0..{m}")));
        }
        normalize(
            self.p,
            Term::new(self.lead.coeff, self.lead.exps.permuted(order)),
            Term::new(self.trail.coeff, self.trail.exps.permuted(order)),
        )
    }

    pub(crate) fn check_prime_power(&self, pp: &PrimePower) -> Result<()> {
        if pp.p() != self.p {
            return Err(Error::Domain(format!(
                "binomial is over F_{} but q = {}^{}",
                self.p,
                pp.p(),
                pp.n()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Binomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}", self.lead, self.trail)
    }
}

/// Orders two terms into a [`Binomial`], reducing coefficients mod `p`.
pub fn normalize(p: u64, a: Term, b: Term) -> Result<Binomial> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let a = Term::new(a.coeff % p, a.exps);
    let b = Term::new(b.coeff % p, b.exps);
    if a.coeff == 0 || b.coeff == 0 {
        return Err(Error::ZeroCoefficient { p });
    }
    if a.exps.degree() == 0 || b.exps.degree() == 0 {
        return Err(Error::ConstantTerm);
    }
    let (lead, trail) = match deglex_compare(&a.exps, &b.exps)? {
        Ordering::Greater => (a, b),
        Ordering::Less => (b, a),
        Ordering::Equal => {
            return Err(Error::Degenerate(format!(
                "both terms have exponent vector {}",
                a.exps
            )))
        }
    };
    Ok(Binomial { p, lead, trail })
}

/// Parses a polynomial in the ASCII grammar
/// `poly := term (("+"|"-") term)*`, `term := [int "*"] factor ("*" factor)*`,
/// `factor := var ["^" int]`, `var := "x" int`.
///
/// `vars` overrides the variable count inferred from the highest index.
pub fn parse_binomial(text: &str, p: u64, vars: Option<usize>) -> Result<Binomial> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let raw = Parser::new(text, Some(p)).poly()?;
    let highest = raw
        .iter()
        .flat_map(|(_, _, factors)| factors.keys().copied())
        .max()
        .unwrap_or(0);
    let m = resolve_vars(highest, vars)?;

    let mut combined: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for (negative, coeff, factors) in raw {
        let mut exps = vec![0u64; m];
        for (var, e) in factors {
            exps[var - 1] = e;
        }
        let c = (coeff % p as u128) as u64;
        let c = if negative { (p - c) % p } else { c };
        let slot = combined.entry(exps).or_insert(0);
        *slot = ((*slot as u128 + c as u128) % p as u128) as u64;
    }
    let surviving: Vec<Term> = combined
        .into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|(e, c)| Ok(Term::new(c, ExponentVector::new(e)?)))
        .collect::<Result<_>>()?;
    match surviving.len() {
        2 => {
            let mut it = surviving.into_iter();
            let a = it.next().unwrap();
            let b = it.next().unwrap();
            normalize(p, a, b)
        }
        n if n < 2 => Err(Error::Degenerate(format!(
            "only {n} monomial(s) with nonzero coefficient mod {p} after combining like terms"
        ))),
        n => Err(Error::TermCount { found: n }),
    }
}

/// Parses a single monomial, either `x1^4*x2` or a comma list `4,1`.
pub fn parse_monomial(text: &str, m: usize) -> Result<ExponentVector> {
    let trimmed = text.trim();
    if !trimmed.contains('x') {
        let exps = trimmed
            .split(',')
            .map(|s| {
                s.trim().parse::<u64>().map_err(|_| Error::Syntax {
                    pos: 0,
                    msg: format!("bad exponent {s:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if exps.len() != m {
            return Err(Error::Dimension {
                expected: m,
                found: exps.len(),
            });
        }
        return ExponentVector::new(exps);
    }
    let mut parser = Parser::new(trimmed, None);
    let (negative, coeff, factors) = parser.term()?;
    parser.expect_end()?;
    if negative || coeff != 1 {
        return Err(Error::Syntax {
            pos: 0,
            msg: "a monomial takes no coefficient or sign".into(),
        });
    }
    let mut exps = vec![0u64; m];
    for (var, e) in factors {
        if var > m {
            return Err(Error::Dimension { expected: m, found: var });
        }
        exps[var - 1] = e;
    }
    ExponentVector::new(exps)
}

fn resolve_vars(highest: usize, vars: Option<usize>) -> Result<usize> {
    match vars {
        Some(v) if v < highest => Err(Error::Dimension {
            expected: v,
            found: highest,
        }),
        Some(0) => Err(Error::Domain("--vars must be at least 1".into())),
        Some(v) => Ok(v),
        None if highest == 0 => Err(Error::ConstantTerm),
        None => Ok(highest),
    }
}

/// (negative sign, coefficient, var index (1-based) -> exponent)
type RawTerm = (bool, u128, BTreeMap<usize, u64>);

struct Parser {
    chars: Vec<(usize, u8)>,
    at: usize,
    modulus: Option<u64>,
}

impl Parser {
    fn new(text: &str, modulus: Option<u64>) -> Self {
        let chars = text
            .bytes()
            .enumerate()
            .filter(|(_, b)| !b.is_ascii_whitespace())
            .collect();
        Self {
            chars,
            at: 0,
            modulus,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.chars.get(self.at).map(|&(_, b)| b)
    }

    fn pos(&self) -> usize {
        self.chars
            .get(self.at)
            .map(|&(i, _)| i)
            .unwrap_or_else(|| self.chars.last().map_or(0, |&(i, _)| i + 1))
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect_end(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(b) => self.error(format!("unexpected {:?}", b as char)),
        }
    }

    fn digits(&mut self) -> Result<&[(usize, u8)]> {
        let start = self.at;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.at += 1;
        }
        if start == self.at {
            return self.error("expected an integer");
        }
        Ok(&self.chars[start..self.at])
    }

    fn small_int(&mut self) -> Result<u64> {
        let pos = self.pos();
        let mut v: u64 = 0;
        for &(_, d) in self.digits()? {
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add((d - b'0') as u64))
                .ok_or(Error::Syntax {
                    pos,
                    msg: "integer too large".into(),
                })?;
        }
        Ok(v)
    }

    /// Coefficients of any length are reduced digit by digit when a modulus is set.
    fn coefficient(&mut self) -> Result<u128> {
        let pos = self.pos();
        let modulus = self.modulus;
        let mut v: u128 = 0;
        for &(_, d) in self.digits()? {
            let d = (d - b'0') as u128;
            v = match modulus {
                Some(p) => (v * 10 + d) % p as u128,
                None => v.checked_mul(10).and_then(|v| v.checked_add(d)).ok_or(Error::Syntax {
                    pos,
                    msg: "coefficient too large".into(),
                })?,
            };
        }
        Ok(v)
    }

    fn poly(&mut self) -> Result<Vec<RawTerm>> {
        if self.chars.is_empty() {
            return self.error("empty polynomial");
        }
        let mut terms = vec![self.term()?];
        while let Some(b) = self.peek() {
            match b {
                b'+' | b'-' => terms.push(self.term()?),
                _ => return self.error(format!("unexpected {:?}", b as char)),
            }
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<RawTerm> {
        let mut negative = false;
        match self.peek() {
            Some(b'+') => self.at += 1,
            Some(b'-') => {
                negative = true;
                self.at += 1;
            }
            _ => {}
        }
        let mut coeff: u128 = 1;
        let mut factors = BTreeMap::new();
        if matches!(self.peek(), Some(b'0'..=b'9')) {
            coeff = self.coefficient()?;
            if self.peek() != Some(b'*') {
                // bare constant term
                return Ok((negative, coeff, factors));
            }
            self.at += 1;
        }
        loop {
            let (var, e) = self.factor()?;
            *factors.entry(var).or_insert(0u64) = factors
                .get(&var)
                .copied()
                .unwrap_or(0)
                .checked_add(e)
                .ok_or(Error::Syntax {
                    pos: self.pos(),
                    msg: "exponent too large".into(),
                })?;
            if self.peek() == Some(b'*') {
                self.at += 1;
            } else {
                break;
            }
        }
        Ok((negative, coeff, factors))
    }

    fn factor(&mut self) -> Result<(usize, u64)> {
        if self.peek() != Some(b'x') {
            return self.error("expected a variable x<k>");
        }
        self.at += 1;
        let idx = self.small_int()?;
        if idx == 0 {
            return self.error("variables are 1-indexed");
        }
        let e = if self.peek() == Some(b'^') {
            self.at += 1;
            self.small_int()?
        } else {
            1
        };
        Ok((idx as usize, e))
    }
}
