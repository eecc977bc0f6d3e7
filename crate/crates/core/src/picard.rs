//! Picard iteration `x_{n+1} = T x_n` with exact cycle detection and the
//! Cauchy, convergence and boundedness diagnostics evaluated on the trace.
//!
//! On a finite carrier every orbit of a total map is eventually periodic.
//! Once the cycle is known, [`OrbitTrace::point_at`] extends the trace
//! indefinitely, so window checks past the recorded points are exact.
//! Nothing here extrapolates a limit: "vanishing" always means "below the
//! given tolerance within the window".

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{ser, Scalar};
use crate::space::{FiniteSpace, PointId, SelfMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PicardError {
    #[error("max_steps must be at least 1")]
    ZeroSteps,
    #[error("max_p must be at least 1")]
    ZeroMaxP,
    #[error("window needs index {needed} but the trace ends at {available} without a cycle")]
    WindowTooShort { needed: usize, available: usize },
    #[error("start point {0} is outside the space")]
    StartOutOfRange(usize),
    #[error("map covers {map} points but space has {space}")]
    SizeMismatch { map: usize, space: usize },
}

/// First `len` iterates `x0, T x0, ...`, shorter if a partial map leaves its
/// domain.
pub fn orbit_points(map: &SelfMap, x0: PointId, len: usize) -> Vec<PointId> {
    let mut out = Vec::with_capacity(len);
    let mut x = Some(x0);
    while let Some(p) = x {
        if out.len() == len {
            break;
        }
        out.push(p);
        x = map.apply(p);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cycle {
    /// First index of the periodic part.
    pub entry: usize,
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct OrbitTrace<S> {
    pub start: PointId,
    /// `x_0, ..., x_L`; when a cycle is found the last entry is the first
    /// repeated point.
    pub points: Vec<PointId>,
    pub labels: Vec<String>,
    /// `d(x_n, x_{n+1})`.
    #[serde(serialize_with = "ser::display_vec")]
    pub step_dist: Vec<S>,
    pub cycle: Option<Cycle>,
    /// The map was undefined at the last point.
    pub escaped: bool,
}

impl<S> OrbitTrace<S> {
    /// `x_n`, extended through the cycle when one is known.
    pub fn point_at(&self, n: usize) -> Option<PointId> {
        if let Some(p) = self.points.get(n) {
            return Some(*p);
        }
        let c = self.cycle?;
        Some(self.points[c.entry + (n - c.entry) % c.period])
    }

    pub fn last_index(&self) -> usize {
        self.points.len() - 1
    }

    pub fn steps(&self) -> usize {
        self.step_dist.len()
    }

    /// The limit point when the orbit ends in a period-1 cycle.
    pub fn fixed_point(&self) -> Option<PointId> {
        self.cycle.filter(|c| c.period == 1).map(|c| self.points[c.entry])
    }

    /// Index at which the orbit first reaches its fixed point.
    pub fn arrival(&self) -> Option<usize> {
        self.cycle.filter(|c| c.period == 1).map(|c| c.entry)
    }

    /// Indices whose points are all distinct and together cover the orbit.
    fn distinct_len(&self) -> usize {
        match self.cycle {
            Some(c) => c.entry + c.period,
            None => self.points.len(),
        }
    }
}

/// Iterates until a point repeats, the map is undefined, or `max_steps`
/// applications have been made.
pub fn picard_iterate<S: Scalar>(
    space: &FiniteSpace<S>,
    map: &SelfMap,
    x0: PointId,
    max_steps: usize,
) -> Result<OrbitTrace<S>, PicardError> {
    if max_steps == 0 {
        return Err(PicardError::ZeroSteps);
    }
    if map.len() != space.len() {
        return Err(PicardError::SizeMismatch { map: map.len(), space: space.len() });
    }
    if !space.contains(x0) {
        return Err(PicardError::StartOutOfRange(x0.0));
    }
    let mut seen: HashMap<PointId, usize> = HashMap::from([(x0, 0)]);
    let mut points = vec![x0];
    let mut step_dist = Vec::new();
    let mut cycle = None;
    let mut escaped = false;
    let mut x = x0;
    for _ in 0..max_steps {
        let Some(next) = map.apply(x) else {
            escaped = true;
            break;
        };
        step_dist.push(space.d(x, next).clone());
        points.push(next);
        if let Some(&entry) = seen.get(&next) {
            cycle = Some(Cycle { entry, period: points.len() - 1 - entry });
            break;
        }
        seen.insert(next, points.len() - 1);
        x = next;
    }
    if cycle.is_none() && map.apply(x).is_none() {
        escaped = true;
    }
    let labels = points.iter().map(|&p| space.label(p).to_owned()).collect();
    Ok(OrbitTrace { start: x0, points, labels, step_dist, cycle, escaped })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct CauchyWitness<S> {
    pub n: usize,
    pub p: usize,
    #[serde(serialize_with = "ser::display")]
    pub value: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct CauchyReport<S> {
    pub is_cauchy_at_tolerance: bool,
    #[serde(serialize_with = "ser::display")]
    pub tolerance: S,
    pub tail_start: usize,
    pub max_p: usize,
    /// First `(n, p)` with `d(x_n, x_{n+p}) >= tolerance`, ordered by `n`
    /// then `p`.
    pub witness: Option<CauchyWitness<S>>,
}

/// Checks `d(x_n, x_{n+p}) < tolerance` for every `n > tail_start` and
/// `1 <= p <= max_p`.
///
/// With a known cycle the trace is eventually periodic, so one period past
/// `max(tail_start + 1, entry)` covers every `n`. Without one, every `n`
/// with `n + p` inside the trace is checked, and the trace must reach at
/// least `tail_start + 1 + max_p`.
pub fn cauchy_check<S: Scalar>(
    space: &FiniteSpace<S>,
    trace: &OrbitTrace<S>,
    tolerance: &S,
    tail_start: usize,
    max_p: usize,
) -> Result<CauchyReport<S>, PicardError> {
    if max_p == 0 {
        return Err(PicardError::ZeroMaxP);
    }
    let first = tail_start + 1;
    let last_n = match trace.cycle {
        Some(c) => first.max(c.entry) + c.period - 1,
        None => {
            let needed = first + max_p;
            if needed > trace.last_index() {
                return Err(PicardError::WindowTooShort { needed, available: trace.last_index() });
            }
            trace.last_index() - 1
        }
    };
    let mut witness = None;
    'outer: for n in first..=last_n {
        let xn = trace.point_at(n).expect("index inside window");
        for p in 1..=max_p {
            let Some(xnp) = trace.point_at(n + p) else { break };
            let d = space.d(xn, xnp);
            if d >= tolerance {
                witness = Some(CauchyWitness { n, p, value: d.clone() });
                break 'outer;
            }
        }
    }
    Ok(CauchyReport {
        is_cauchy_at_tolerance: witness.is_none(),
        tolerance: tolerance.clone(),
        tail_start,
        max_p,
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Convergence {
    pub converged: bool,
    /// Least index from which every `d(x_n, z)` stays below tolerance.
    pub first_index: Option<usize>,
    /// True when the trace has a cycle, so the answer covers the whole orbit
    /// rather than just the recorded window.
    pub exact: bool,
}

/// `d(x_n, z) < tolerance` for all `n` from some index on.
pub fn convergence_check<S: Scalar>(
    space: &FiniteSpace<S>,
    trace: &OrbitTrace<S>,
    z: PointId,
    tolerance: &S,
) -> Convergence {
    let len = trace.distinct_len();
    let mut first_index = None;
    for n in (0..len).rev() {
        if space.d(trace.points[n], z) < tolerance {
            first_index = Some(n);
        } else {
            break;
        }
    }
    // inside a cycle every point recurs, so the tail must cover all of it
    if let (Some(c), Some(i)) = (trace.cycle, first_index) {
        if i > c.entry {
            first_index = None;
        }
    }
    Convergence { converged: first_index.is_some(), first_index, exact: trace.cycle.is_some() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct BoundednessReport<S> {
    /// Always true for a finite window; kept for report symmetry.
    pub bounded: bool,
    #[serde(rename = "M", serialize_with = "ser::display")]
    pub m: S,
    /// True when the window covers the whole orbit.
    pub exact: bool,
}

/// `M = max d(x_n, x_m)` over the trace.
pub fn boundedness_check<S: Scalar>(space: &FiniteSpace<S>, trace: &OrbitTrace<S>) -> BoundednessReport<S> {
    let pts = &trace.points[..trace.distinct_len()];
    let mut m = S::zero();
    for (a, &p) in pts.iter().enumerate() {
        for &q in &pts[a + 1..] {
            if *space.d(p, q) > m {
                m = space.d(p, q).clone();
            }
        }
    }
    BoundednessReport { bounded: true, m, exact: trace.cycle.is_some() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct OrbitDiagnostics<S> {
    #[serde(serialize_with = "ser::display")]
    pub tolerance: S,
    /// `d(x_n, x_{n+1})`.
    #[serde(serialize_with = "ser::display_vec")]
    pub gap1: Vec<S>,
    /// `d(x_n, x_{n+2})`.
    #[serde(serialize_with = "ser::display_vec")]
    pub gap2: Vec<S>,
    pub fixed_point: Option<PointId>,
    /// `s_n = d(x_n, z)` when the orbit ends at a fixed point `z`.
    #[serde(serialize_with = "ser::display_vec")]
    pub s_n: Vec<S>,
    pub gap1_decreasing: bool,
    pub gap1_vanishing: bool,
    pub gap2_decreasing: bool,
    pub gap2_vanishing: bool,
    pub s_n_strictly_decreasing_until_fixed: Option<bool>,
}

/// Strictly decreasing while positive, then identically zero.
pub fn strictly_decreasing_until_zero<S: Scalar>(seq: &[S]) -> bool {
    let k = seq.iter().position(|x| x.is_zero()).unwrap_or(seq.len());
    seq[..k].windows(2).all(|w| w[1] < w[0]) && seq[k..].iter().all(|x| x.is_zero())
}

pub fn orbit_diagnostics<S: Scalar>(
    space: &FiniteSpace<S>,
    trace: &OrbitTrace<S>,
    tolerance: &S,
) -> OrbitDiagnostics<S> {
    let gap1 = trace.step_dist.clone();
    let gap2: Vec<S> = (0..trace.steps())
        .map_while(|n| {
            let far = trace.point_at(n + 2)?;
            Some(space.d(trace.points[n], far).clone())
        })
        .collect();
    let fixed_point = trace.fixed_point();
    let s_n: Vec<S> = match fixed_point {
        Some(z) => trace.points.iter().map(|&p| space.d(p, z).clone()).collect(),
        None => Vec::new(),
    };
    let vanishing = |seq: &[S]| seq.last().is_some_and(|x| x < tolerance);
    OrbitDiagnostics {
        tolerance: tolerance.clone(),
        gap1_decreasing: strictly_decreasing_until_zero(&gap1),
        gap1_vanishing: vanishing(&gap1),
        gap2_decreasing: strictly_decreasing_until_zero(&gap2),
        gap2_vanishing: vanishing(&gap2),
        s_n_strictly_decreasing_until_fixed: fixed_point.map(|_| strictly_decreasing_until_zero(&s_n)),
        gap1,
        gap2,
        fixed_point,
        s_n,
    }
}

/// Writes `n,label,step_dist,dist_to_z` rows for external plotting. The last
/// two columns are empty where undefined.
pub fn write_orbit_csv<S: Scalar, W: Write>(
    space: &FiniteSpace<S>,
    trace: &OrbitTrace<S>,
    z: Option<PointId>,
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "point", "step_dist", "dist_to_z"])?;
    for (n, &p) in trace.points.iter().enumerate() {
        let step = trace.step_dist.get(n).map(ToString::to_string).unwrap_or_default();
        let to_z = z.map(|z| space.d(p, z).to_string()).unwrap_or_default();
        w.write_record([n.to_string(), space.label(p).to_owned(), step, to_z])?;
    }
    w.flush()?;
    Ok(())
}
