//! Map-level hypotheses: strict contractivity, the uniform condition (A),
//! its orbitwise form (B), and the orbit bound `d(x, T^m x) <= M`.
//!
//! On a finite carrier the largest admissible δ for a given ε is a minimum of
//! finitely many exact differences, so reports carry that value rather than a
//! yes/no answer.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::picard::orbit_points;
use crate::scalar::{ser, Scalar};
use crate::space::{sort_dedup, FiniteSpace, PointId, SelfMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("epsilon grid is empty")]
    EmptyGrid,
    #[error("epsilon {0} is not positive")]
    NonPositiveEpsilon(String),
    #[error("horizon must be at least {min}, got {got}")]
    Horizon { min: usize, got: usize },
    #[error("orbit of {start} leaves the map's domain after {available} points, {needed} needed")]
    OrbitTooShort { start: String, available: usize, needed: usize },
    #[error("map covers {map} points but space has {space}")]
    SizeMismatch { map: usize, space: usize },
}

fn check_sizes<S: Scalar>(space: &FiniteSpace<S>, map: &SelfMap) -> Result<(), AnalysisError> {
    if map.len() != space.len() {
        return Err(AnalysisError::SizeMismatch { map: map.len(), space: space.len() });
    }
    Ok(())
}

/// A pair with `d(Tx,Ty) >= d(x,y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ContractivityViolation<S> {
    pub x: PointId,
    pub y: PointId,
    pub labels: (String, String),
    #[serde(serialize_with = "ser::display")]
    pub before: S,
    #[serde(serialize_with = "ser::display")]
    pub after: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ContractivityReport<S> {
    pub holds: bool,
    pub pairs_checked: usize,
    pub violations: Vec<ContractivityViolation<S>>,
}

/// Lists every pair `x < y` (by index) in the map's domain with
/// `d(Tx,Ty) >= d(x,y)`.
pub fn check_contractive<S: Scalar>(space: &FiniteSpace<S>, map: &SelfMap) -> ContractivityReport<S> {
    let mut violations = Vec::new();
    let mut pairs_checked = 0;
    let domain: Vec<PointId> = map.domain().filter(|p| space.contains(*p)).collect();
    for (a, &x) in domain.iter().enumerate() {
        for &y in &domain[a + 1..] {
            pairs_checked += 1;
            let (tx, ty) = (map.apply(x).unwrap(), map.apply(y).unwrap());
            let before = space.d(x, y);
            let after = space.d(tx, ty);
            if after >= before {
                violations.push(ContractivityViolation {
                    x,
                    y,
                    labels: (space.label(x).to_owned(), space.label(y).to_owned()),
                    before: before.clone(),
                    after: after.clone(),
                });
            }
        }
    }
    ContractivityReport { holds: violations.is_empty(), pairs_checked, violations }
}

/// Points with `Tx = x`, in index order.
pub fn find_fixed_points(map: &SelfMap) -> Vec<PointId> {
    map.domain().filter(|&x| map.apply(x) == Some(x)).collect()
}

/// Largest admissible δ at one ε.
#[derive(Debug, Clone, PartialEq)]
pub enum Delta<S> {
    /// No pair has an image distance above ε; every δ works.
    Unconstrained,
    /// The supremum of admissible δ; always positive.
    Bounded(S),
    /// Some pair has image distance above ε while its own distance is at
    /// most ε, so no positive δ exists.
    Absent,
}

impl<S: Scalar> Delta<S> {
    pub fn is_admissible(&self) -> bool {
        !matches!(self, Delta::Absent)
    }

    pub fn value(&self) -> Option<&S> {
        match self {
            Delta::Bounded(d) => Some(d),
            _ => None,
        }
    }

    /// `δ >= bound`, treating the unconstrained case as +∞.
    pub fn at_least(&self, bound: &S) -> bool {
        match self {
            Delta::Unconstrained => true,
            Delta::Bounded(d) => d >= bound,
            Delta::Absent => false,
        }
    }
}

/// Serializes as `{"epsilon": "...", "delta": "..."|null, "unconstrained": bool}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint<S> {
    pub epsilon: S,
    pub delta: Delta<S>,
}

impl<S: Scalar> Serialize for GridPoint<S> {
    fn serialize<Z: Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        let mut st = s.serialize_struct("GridPoint", 3)?;
        st.serialize_field("epsilon", &self.epsilon.to_string())?;
        st.serialize_field("delta", &self.delta.value().map(ToString::to_string))?;
        st.serialize_field("unconstrained", &matches!(self.delta, Delta::Unconstrained))?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionScope {
    /// Every pair of points in the map's domain.
    Pairs { points: usize },
    /// Pairs `(i, j)`, `0 <= i < j < horizon`, of iterates of `start`.
    Orbit { start: PointId, start_label: String, horizon: usize },
}

/// A pair showing no positive δ exists at `epsilon`: `before <= epsilon <
/// after`. For orbit scope `first`/`second` are iterate indices `i`, `j`;
/// otherwise point indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ConditionWitness<S> {
    #[serde(serialize_with = "ser::display")]
    pub epsilon: S,
    pub first: usize,
    pub second: usize,
    pub labels: (String, String),
    #[serde(serialize_with = "ser::display")]
    pub before: S,
    #[serde(serialize_with = "ser::display")]
    pub after: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct ConditionReport<S> {
    pub scope: ConditionScope,
    pub grid: Vec<GridPoint<S>>,
    pub holds: bool,
    pub witness: Option<ConditionWitness<S>>,
}

impl<S: Scalar> ConditionReport<S> {
    pub fn epsilon_grid(&self) -> impl Iterator<Item = &S> {
        self.grid.iter().map(|g| &g.epsilon)
    }

    pub fn delta_at(&self, epsilon: &S) -> Option<&Delta<S>> {
        self.grid.iter().find(|g| g.epsilon == *epsilon).map(|g| &g.delta)
    }
}

/// Grid covering the breakpoints of δ(ε): every distinct positive value `r`
/// in `distances`, together with `r * shrink`. Falls back to `{1}` when
/// there is no positive distance.
pub fn default_epsilon_grid<S: Scalar>(distances: &[S], shrink: &S) -> Vec<S> {
    let mut grid: Vec<S> = distances
        .iter()
        .filter(|r| r.is_positive())
        .flat_map(|r| [r.clone(), r.clone() * shrink.clone()])
        .filter(|e| e.is_positive())
        .collect();
    if grid.is_empty() {
        grid.push(S::one());
    }
    sort_dedup(&mut grid);
    grid
}

pub fn default_shrink<S: Scalar>() -> S {
    S::from_fraction(1, 2)
}

fn check_grid<S: Scalar>(grid: &[S]) -> Result<(), AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    if let Some(e) = grid.iter().find(|e| !e.is_positive()) {
        return Err(AnalysisError::NonPositiveEpsilon(e.to_string()));
    }
    Ok(())
}

/// One `(before, after)` pair per examined couple, with identifying indices.
struct Sample<S> {
    first: usize,
    second: usize,
    before: S,
    after: S,
}

fn evaluate_grid<S: Scalar>(
    samples: &[Sample<S>],
    grid: &[S],
    label: impl Fn(usize, usize) -> (String, String),
) -> (Vec<GridPoint<S>>, Option<ConditionWitness<S>>) {
    let mut points = Vec::with_capacity(grid.len());
    let mut witness = None;
    for eps in grid {
        let mut delta = Delta::Unconstrained;
        for sample in samples.iter().filter(|s| s.after > *eps) {
            if sample.before <= *eps {
                if witness.is_none() {
                    let labels = label(sample.first, sample.second);
                    witness = Some(ConditionWitness {
                        epsilon: eps.clone(),
                        first: sample.first,
                        second: sample.second,
                        labels,
                        before: sample.before.clone(),
                        after: sample.after.clone(),
                    });
                }
                delta = Delta::Absent;
                break;
            }
            let gap = sample.before.clone() - eps.clone();
            delta = match delta {
                Delta::Bounded(d) if d <= gap => Delta::Bounded(d),
                _ => Delta::Bounded(gap),
            };
        }
        points.push(GridPoint { epsilon: eps.clone(), delta });
    }
    (points, witness)
}

/// Condition (A): for every ε in the grid, the largest δ such that
/// `d(x,y) < ε + δ` implies `d(Tx,Ty) <= ε` for all pairs in the domain.
pub fn check_condition_a<S: Scalar>(
    space: &FiniteSpace<S>,
    map: &SelfMap,
    epsilon_grid: &[S],
) -> Result<ConditionReport<S>, AnalysisError> {
    check_sizes(space, map)?;
    check_grid(epsilon_grid)?;
    let domain: Vec<PointId> = map.domain().collect();
    let mut samples = Vec::new();
    for (a, &x) in domain.iter().enumerate() {
        for &y in &domain[a + 1..] {
            samples.push(Sample {
                first: x.0,
                second: y.0,
                before: space.d(x, y).clone(),
                after: space.d(map.apply(x).unwrap(), map.apply(y).unwrap()).clone(),
            });
        }
    }
    let (grid, witness) = evaluate_grid(&samples, epsilon_grid, |i, j| {
        (space.label(PointId(i)).to_owned(), space.label(PointId(j)).to_owned())
    });
    Ok(ConditionReport {
        scope: ConditionScope::Pairs { points: domain.len() },
        holds: witness.is_none(),
        grid,
        witness,
    })
}

/// Orbit `x0, T x0, ..., T^horizon x0`, or the reason it cannot be built.
fn orbit_window<S: Scalar>(
    space: &FiniteSpace<S>,
    map: &SelfMap,
    x0: PointId,
    len: usize,
) -> Result<Vec<PointId>, AnalysisError> {
    let orbit = orbit_points(map, x0, len);
    if orbit.len() < len {
        return Err(AnalysisError::OrbitTooShort {
            start: space.label(x0).to_owned(),
            available: orbit.len(),
            needed: len,
        });
    }
    Ok(orbit)
}

/// Distances between the first `len` iterates of `x0`, for building a
/// default grid for [`check_condition_b`].
pub fn orbit_distances<S: Scalar>(
    space: &FiniteSpace<S>,
    map: &SelfMap,
    x0: PointId,
    len: usize,
) -> Vec<S> {
    let orbit = orbit_points(map, x0, len);
    let mut values = Vec::new();
    for (a, &p) in orbit.iter().enumerate() {
        for &q in &orbit[a + 1..] {
            values.push(space.d(p, q).clone());
        }
    }
    sort_dedup(&mut values);
    values
}

/// Condition (B) restricted to iterate pairs `0 <= i < j < horizon` of `x0`:
/// `d(T^i x, T^j x) < ε + δ` implies `d(T^{i+1} x, T^{j+1} x) <= ε`.
///
/// `holds` means no refutation inside the horizon, nothing more.
pub fn check_condition_b<S: Scalar>(
    space: &FiniteSpace<S>,
    map: &SelfMap,
    x0: PointId,
    epsilon_grid: &[S],
    horizon: usize,
) -> Result<ConditionReport<S>, AnalysisError> {
    check_sizes(space, map)?;
    check_grid(epsilon_grid)?;
    if horizon < 2 {
        return Err(AnalysisError::Horizon { min: 2, got: horizon });
    }
    let orbit = orbit_window(space, map, x0, horizon + 1)?;
    let mut samples = Vec::new();
    for i in 0..horizon {
        for j in i + 1..horizon {
            samples.push(Sample {
                first: i,
                second: j,
                before: space.d(orbit[i], orbit[j]).clone(),
                after: space.d(orbit[i + 1], orbit[j + 1]).clone(),
            });
        }
    }
    let (grid, witness) = evaluate_grid(&samples, epsilon_grid, |i, j| {
        (space.label(orbit[i]).to_owned(), space.label(orbit[j]).to_owned())
    });
    Ok(ConditionReport {
        scope: ConditionScope::Orbit {
            start: x0,
            start_label: space.label(x0).to_owned(),
            horizon,
        },
        holds: witness.is_none(),
        grid,
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct BoundReport<S> {
    pub v: usize,
    pub horizon: usize,
    /// `max d(x0, T^m x0)` over the evaluated powers `m`.
    #[serde(serialize_with = "ser::display")]
    pub bound: S,
    /// First power `m = k - v` attaining the bound.
    pub attained_at: usize,
    /// Powers actually evaluated; below `horizon` when a partial map's orbit
    /// leaves its domain.
    pub evaluated: usize,
    pub stopped_by_partial_map: bool,
}

/// Bound on `d(x0, T^{k-v} x0)` for `v <= k < v + horizon`.
pub fn orbit_bound<S: Scalar>(
    space: &FiniteSpace<S>,
    map: &SelfMap,
    x0: PointId,
    v: usize,
    horizon: usize,
) -> Result<BoundReport<S>, AnalysisError> {
    check_sizes(space, map)?;
    if horizon < 1 {
        return Err(AnalysisError::Horizon { min: 1, got: horizon });
    }
    let orbit = orbit_points(map, x0, horizon);
    let mut bound = S::zero();
    let mut attained_at = 0;
    for (m, &p) in orbit.iter().enumerate() {
        let d = space.d(x0, p);
        if *d > bound {
            bound = d.clone();
            attained_at = m;
        }
    }
    Ok(BoundReport {
        v,
        horizon,
        bound,
        attained_at,
        evaluated: orbit.len(),
        stopped_by_partial_map: orbit.len() < horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    fn line(n: usize) -> FiniteSpace<Rational> {
        FiniteSpace::from_fn((0..n).map(|i| i.to_string()).collect(), |i, j| {
            r((i as i128 - j as i128).abs(), 1)
        })
        .unwrap()
    }

    #[test]
    fn identity_violates_everywhere() {
        let space = line(4);
        let rep = check_contractive(&space, &SelfMap::identity(4));
        assert!(!rep.holds);
        assert_eq!(rep.violations.len(), 6);
        assert!(rep.violations.iter().all(|v| v.before == v.after));
        assert_eq!(find_fixed_points(&SelfMap::identity(3)), vec![PointId(0), PointId(1), PointId(2)]);
    }

    #[test]
    fn constant_map_is_contractive_and_unconstrained() {
        let space = line(4);
        let map = SelfMap::constant(PointId(2), 4).unwrap();
        assert!(check_contractive(&space, &map).holds);
        let rep = check_condition_a(&space, &map, &[r(1, 2), r(3, 1)]).unwrap();
        assert!(rep.holds);
        assert!(rep.grid.iter().all(|g| g.delta == Delta::Unconstrained));
        let json = serde_json::to_value(&rep.grid[0]).unwrap();
        assert_eq!(json, serde_json::json!({"epsilon": "1/2", "delta": null, "unconstrained": true}));
    }

    #[test]
    fn delta_is_exact_minimum() {
        // T(i) = i / 2 rounded down on {0, 1, 2, 3, 4}
        let space = line(5);
        let map = SelfMap::from_fn(5, |i| Some(i / 2)).unwrap();
        let rep = check_condition_a(&space, &map, &[r(1, 2)]).unwrap();
        // pairs with d(Tx,Ty) > 1/2: image distance >= 1, smallest source distance 1
        assert_eq!(rep.grid[0].delta, Delta::Bounded(r(1, 2)));
        let rep = check_condition_a(&space, &map, &[r(1, 1)]).unwrap();
        // image distance 2 for (0,4) and (1,4); the latter has before 3
        assert_eq!(rep.grid[0].delta, Delta::Bounded(r(2, 1)));
    }

    #[test]
    fn grid_validation() {
        let space = line(3);
        let map = SelfMap::identity(3);
        assert_eq!(check_condition_a(&space, &map, &[]).unwrap_err(), AnalysisError::EmptyGrid);
        assert!(matches!(
            check_condition_a(&space, &map, &[r(0, 1)]),
            Err(AnalysisError::NonPositiveEpsilon(_))
        ));
        assert!(matches!(
            check_condition_b(&space, &map, PointId(0), &[r(1, 1)], 1),
            Err(AnalysisError::Horizon { min: 2, got: 1 })
        ));
    }

    #[test]
    fn identity_fails_condition_a_at_realized_distances() {
        let space = line(3);
        let rep = check_condition_a(&space, &SelfMap::identity(3), &[r(1, 2), r(1, 1)]).unwrap();
        // ε = 1/2: pairs with d > 1/2 all have d > 1/2 themselves, δ = 1/2
        assert_eq!(rep.grid[0].delta, Delta::Bounded(r(1, 2)));
        // ε = 1: pair (0, 2) has after 2 > 1 but (0,1) has before 1 <= 1 and after 1, fine;
        // (0,2): before 2 > 1, δ = 1
        assert_eq!(rep.grid[1].delta, Delta::Bounded(r(1, 1)));
        assert!(rep.holds);
    }

    #[test]
    fn default_grid_has_values_and_halves() {
        let grid = default_epsilon_grid(&[r(0, 1), r(1, 1), r(2, 1)], &r(1, 2));
        assert_eq!(grid, vec![r(1, 2), r(1, 1), r(2, 1)]);
        assert_eq!(default_epsilon_grid::<Rational>(&[r(0, 1)], &r(1, 2)), vec![r(1, 1)]);
    }

    #[test]
    fn orbit_bound_of_fixed_point_is_zero() {
        let space = line(3);
        let map = SelfMap::constant(PointId(1), 3).unwrap();
        let rep = orbit_bound(&space, &map, PointId(1), 2, 10).unwrap();
        assert_eq!(rep.bound, r(0, 1));
        assert_eq!(rep.evaluated, 10);
        assert!(!rep.stopped_by_partial_map);
    }

    #[test]
    fn condition_b_needs_orbit_inside_domain() {
        let space = line(3);
        let map = SelfMap::partial(vec![Some(PointId(1)), None, None], 3).unwrap();
        let err = check_condition_b(&space, &map, PointId(0), &[r(1, 1)], 3).unwrap_err();
        assert_eq!(err, AnalysisError::OrbitTooShort { start: "0".into(), available: 2, needed: 4 });
    }
}
