//! Exhaustive certification of the polygon inequality
//!
//! ```text
//! d(x, y) <= s * [d(x, u1) + d(u1, u2) + ... + d(uv, y)]
//! ```
//!
//! for every unordered pair `x != y` and every ordered tuple of `v` pairwise
//! distinct intermediates avoiding both endpoints.
//!
//! Pairs are enumerated lexicographically by index and tuples lexicographically
//! within a pair. Work is split across endpoint pairs with rayon; the witness
//! is always the first violation in that sequential order, so results do not
//! depend on the thread count. Subtrees whose partial chain already rules out
//! a violation (or an improvement, for [`min_s`]) are skipped but still
//! counted in `tuples_checked`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::{ser, Scalar};
use crate::space::{FiniteSpace, MetricClass, PointId};

/// Default cap on `n^(v+2)`.
pub const DEFAULT_TUPLE_BUDGET: u128 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("v must be at least 1")]
    ZeroV,
    #[error("s = {0} is below 1")]
    SmallS(String),
    #[error("instance needs {required} tuples (n^(v+2)), budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
    Vacuous,
}

impl Verdict {
    /// Vacuous truth counts as holding.
    pub fn holds(self) -> bool {
        !matches!(self, Verdict::Refuted)
    }
}

/// A concrete chain `x, u1, ..., uv, y` with `d(x,y) > s * chain length`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ViolationReport<S> {
    pub endpoints: (PointId, PointId),
    pub chain: Vec<PointId>,
    pub endpoint_labels: (String, String),
    pub chain_labels: Vec<String>,
    #[serde(serialize_with = "ser::display")]
    pub lhs: S,
    #[serde(serialize_with = "ser::display")]
    pub rhs: S,
}

impl<S: Scalar> ViolationReport<S> {
    fn new(space: &FiniteSpace<S>, x: PointId, y: PointId, chain: Vec<PointId>, rhs: S) -> Self {
        Self {
            endpoints: (x, y),
            endpoint_labels: (space.label(x).to_owned(), space.label(y).to_owned()),
            chain_labels: chain.iter().map(|&u| space.label(u).to_owned()).collect(),
            chain,
            lhs: space.d(x, y).clone(),
            rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct CertificationResult<S> {
    pub verdict: Verdict,
    pub witness: Option<ViolationReport<S>>,
    /// Tuples covered up to and including the witness, or all of them.
    pub tuples_checked: u128,
    pub points: usize,
    pub v: usize,
    #[serde(serialize_with = "ser::display")]
    pub s: S,
}

/// Least admissible `s` for a given `v`, with the chain attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct MinSReport<S> {
    #[serde(serialize_with = "ser::display")]
    pub value: S,
    /// Largest `d(x,y) / chain length` over all chains; `None` when vacuous.
    #[serde(serialize_with = "ser::display_opt")]
    pub max_ratio: Option<S>,
    /// First chain (in enumeration order) attaining `max_ratio`.
    pub argmax: Option<(PointId, PointId, Vec<PointId>)>,
    pub points: usize,
    pub v: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub tuple_budget: u128,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tuple_budget: DEFAULT_TUPLE_BUDGET }
    }
}

/// `m (m-1) ... (m-k+1)`, saturating.
pub fn falling_factorial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((m - i) as u128))
}

/// Number of (unordered pair, ordered tuple) combinations for `n` points.
pub fn tuple_count(n: usize, v: usize) -> u128 {
    if n < v + 2 {
        return 0;
    }
    (n as u128 * (n as u128 - 1) / 2).saturating_mul(falling_factorial(n - 2, v))
}

fn check_budget(n: usize, v: usize, budget: u128) -> Result<(), VerifyError> {
    let required = (n as u128).saturating_pow((v + 2).min(u32::MAX as usize) as u32);
    if required > budget {
        return Err(VerifyError::BudgetExceeded { required, budget });
    }
    Ok(())
}

fn pairs(n: usize) -> Vec<(PointId, PointId)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (PointId(i), PointId(j))))
        .collect()
}

/// Depth-first walk over ordered intermediate tuples for one endpoint pair.
struct ChainSearch<'a, S> {
    space: &'a FiniteSpace<S>,
    v: usize,
    end: PointId,
    used: Vec<bool>,
    chain: Vec<PointId>,
    /// Points still available at the root (`n - 2`).
    pool: usize,
}

impl<'a, S: Scalar> ChainSearch<'a, S> {
    fn new(space: &'a FiniteSpace<S>, v: usize, x: PointId, y: PointId) -> Self {
        let mut used = vec![false; space.len()];
        used[x.0] = true;
        used[y.0] = true;
        Self { space, v, end: y, used, chain: Vec::with_capacity(v), pool: space.len() - 2 }
    }

    /// Finds the first tuple whose chain length is strictly below `threshold`.
    fn first_below(&mut self, last: PointId, partial: &S, threshold: &S, checked: &mut u128) -> bool {
        let depth = self.chain.len();
        if depth == self.v {
            *checked += 1;
            let total = partial.clone() + self.space.d(last, self.end).clone();
            return total < *threshold;
        }
        let subtree = falling_factorial(self.pool - depth - 1, self.v - depth - 1);
        for u in 0..self.space.len() {
            if self.used[u] {
                continue;
            }
            let u = PointId(u);
            let next = partial.clone() + self.space.d(last, u).clone();
            if next >= *threshold {
                *checked += subtree;
                continue;
            }
            self.used[u.0] = true;
            self.chain.push(u);
            if self.first_below(u, &next, threshold, checked) {
                return true;
            }
            self.chain.pop();
            self.used[u.0] = false;
        }
        false
    }

    /// Shortest chain length, keeping the first tuple that attains it.
    fn shortest(&mut self, last: PointId, partial: &S, best: &mut Option<(S, Vec<PointId>)>) {
        let depth = self.chain.len();
        if depth == self.v {
            let total = partial.clone() + self.space.d(last, self.end).clone();
            if best.as_ref().is_none_or(|(b, _)| total < *b) {
                *best = Some((total, self.chain.clone()));
            }
            return;
        }
        for u in 0..self.space.len() {
            if self.used[u] {
                continue;
            }
            let u = PointId(u);
            let next = partial.clone() + self.space.d(last, u).clone();
            if best.as_ref().is_some_and(|(b, _)| next >= *b) {
                continue;
            }
            self.used[u.0] = true;
            self.chain.push(u);
            self.shortest(u, &next, best);
            self.chain.pop();
            self.used[u.0] = false;
        }
    }
}

fn check_args<S: Scalar>(v: usize, s: &S) -> Result<(), VerifyError> {
    if v == 0 {
        return Err(VerifyError::ZeroV);
    }
    if *s < S::one() {
        return Err(VerifyError::SmallS(s.to_string()));
    }
    Ok(())
}

pub fn verify_polygon<S: Scalar>(
    space: &FiniteSpace<S>,
    v: usize,
    s: &S,
) -> Result<CertificationResult<S>, VerifyError> {
    verify_polygon_with(space, v, s, &VerifyOptions::default())
}

pub fn verify_polygon_with<S: Scalar>(
    space: &FiniteSpace<S>,
    v: usize,
    s: &S,
    opts: &VerifyOptions,
) -> Result<CertificationResult<S>, VerifyError> {
    check_args(v, s)?;
    let n = space.len();
    let mut result = CertificationResult {
        verdict: Verdict::Vacuous,
        witness: None,
        tuples_checked: 0,
        points: n,
        v,
        s: s.clone(),
    };
    if n < v + 2 {
        return Ok(result);
    }
    check_budget(n, v, opts.tuple_budget)?;

    let per_pair = falling_factorial(n - 2, v);
    let pairs = pairs(n);
    let found = pairs.par_iter().enumerate().find_map_first(|(rank, &(x, y))| {
        let threshold = space.d(x, y).clone() / s.clone();
        let mut search = ChainSearch::new(space, v, x, y);
        let mut checked = 0u128;
        search
            .first_below(x, &S::zero(), &threshold, &mut checked)
            .then_some((rank, x, y, search.chain, checked))
    });

    match found {
        Some((rank, x, y, chain, checked)) => {
            let length = chain_length(space, x, y, &chain);
            result.verdict = Verdict::Refuted;
            result.tuples_checked = rank as u128 * per_pair + checked;
            result.witness = Some(ViolationReport::new(space, x, y, chain, s.clone() * length));
        }
        None => {
            result.verdict = Verdict::Certified;
            result.tuples_checked = tuple_count(n, v);
        }
    }
    Ok(result)
}

/// `d(x,u1) + ... + d(uv,y)`.
pub fn chain_length<S: Scalar>(space: &FiniteSpace<S>, x: PointId, y: PointId, chain: &[PointId]) -> S {
    let mut total = S::zero();
    let mut last = x;
    for &u in chain {
        total = total + space.d(last, u).clone();
        last = u;
    }
    total + space.d(last, y).clone()
}

pub fn min_s<S: Scalar>(space: &FiniteSpace<S>, v: usize) -> Result<S, VerifyError> {
    min_s_report(space, v, &VerifyOptions::default()).map(|r| r.value)
}

/// Computes `max(1, max d(x,y) / chain length)` over every pair and tuple.
pub fn min_s_report<S: Scalar>(
    space: &FiniteSpace<S>,
    v: usize,
    opts: &VerifyOptions,
) -> Result<MinSReport<S>, VerifyError> {
    check_args(v, &S::one())?;
    let n = space.len();
    let mut report = MinSReport { value: S::one(), max_ratio: None, argmax: None, points: n, v };
    if n < v + 2 {
        return Ok(report);
    }
    check_budget(n, v, opts.tuple_budget)?;

    let per_pair: Vec<(S, PointId, PointId, Vec<PointId>)> = pairs(n)
        .par_iter()
        .map(|&(x, y)| {
            let mut search = ChainSearch::new(space, v, x, y);
            let mut best = None;
            search.shortest(x, &S::zero(), &mut best);
            let (length, chain) = best.expect("pool holds at least v points");
            (space.d(x, y).clone() / length, x, y, chain)
        })
        .collect();

    let mut best: Option<(S, PointId, PointId, Vec<PointId>)> = None;
    for candidate in per_pair {
        if best.as_ref().is_none_or(|b| candidate.0 > b.0) {
            best = Some(candidate);
        }
    }
    let (ratio, x, y, chain) = best.expect("at least one pair");
    report.value = if ratio > S::one() { ratio.clone() } else { S::one() };
    report.max_ratio = Some(ratio);
    report.argmax = Some((x, y, chain));
    Ok(report)
}

/// Settles a claimed class. Vacuous truth certifies.
pub fn certify_class<S: Scalar>(
    space: &FiniteSpace<S>,
    claim: MetricClass<S>,
) -> Result<MetricClass<S>, VerifyError> {
    let result = verify_polygon(space, claim.v, &claim.s)?;
    Ok(claim.settle(result.verdict.holds()))
}
