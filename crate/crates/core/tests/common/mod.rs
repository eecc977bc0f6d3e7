//! Brute-force references shared by the integration tests. These walk every
//! ordered tuple with `itertools::permutations` and never prune, so they share
//! no code path with the verifier.

#![allow(dead_code)]

use bvmetric::{FiniteSpace, PointId, Rational};
use itertools::Itertools;

pub fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn chain_sum(space: &FiniteSpace<Rational>, path: &[usize]) -> Rational {
    path.windows(2)
        .map(|w| *space.d(PointId(w[0]), PointId(w[1])))
        .fold(r(0, 1), |a, b| a + b)
}

/// Every (x, y, tuple) in enumeration order, with its ratio d(x,y) / length.
pub fn all_ratios(space: &FiniteSpace<Rational>, v: usize) -> Vec<(usize, usize, Vec<usize>, Rational)> {
    let n = space.len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let others: Vec<usize> = (0..n).filter(|&k| k != x && k != y).collect();
            for tuple in others.into_iter().permutations(v) {
                let mut path = vec![x];
                path.extend(&tuple);
                path.push(y);
                let ratio = *space.d(PointId(x), PointId(y)) / chain_sum(space, &path);
                out.push((x, y, tuple, ratio));
            }
        }
    }
    out
}

pub fn brute_min_s(space: &FiniteSpace<Rational>, v: usize) -> Rational {
    all_ratios(space, v).into_iter().map(|t| t.3).fold(r(1, 1), |a, b| a.max(b))
}

/// First violating (x, y, tuple) at coefficient s, in enumeration order.
pub fn brute_first_violation(space: &FiniteSpace<Rational>, v: usize, s: Rational) -> Option<(usize, usize, Vec<usize>)> {
    all_ratios(space, v).into_iter().find(|t| t.3 > s).map(|t| (t.0, t.1, t.2))
}
