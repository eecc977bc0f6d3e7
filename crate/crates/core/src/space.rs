//! Finite spaces with an exact, materialized distance table.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{ser, Scalar};

/// Index of a point inside a [`FiniteSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl PointId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("distance table has {rows} rows but {labels} labels")]
    RowCount { rows: usize, labels: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("d({x}, {y}) = {forward} but d({y}, {x}) = {backward}")]
    Asymmetry { x: String, y: String, forward: String, backward: String },
    #[error("d({x}, {x}) = {value}, expected 0")]
    NonZeroSelfDistance { x: String, value: String },
    #[error("d({x}, {y}) = 0 for distinct points")]
    ZeroDistance { x: String, y: String },
    #[error("d({x}, {y}) = {value} is negative")]
    NegativeDistance { x: String, y: String, value: String },
    #[error("scale factor {0} is not positive")]
    NonPositiveScale(String),
    #[error("map has {len} images for a space of {size} points")]
    MapLength { len: usize, size: usize },
    #[error("image of point {point} is {image}, outside a space of {size} points")]
    ImageOutOfRange { point: usize, image: usize, size: usize },
    #[error("map is undefined at {0:?}")]
    PartialMap(String),
}

impl SpaceError {
    pub fn is_identity_violation(&self) -> bool {
        matches!(self, Self::NonZeroSelfDistance { .. } | Self::ZeroDistance { .. })
    }
}

/// A finite candidate metric space: labelled points and a symmetric table
/// with zero diagonal and positive off-diagonal entries.
///
/// The polygon inequality is deliberately not an invariant; see
/// [`crate::verifier`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace<S> {
    labels: Vec<String>,
    dist: Vec<Vec<S>>,
}

impl<S: Scalar> FiniteSpace<S> {
    /// Validates identity, symmetry and nonnegativity and builds the space.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<S>>) -> Result<Self, SpaceError> {
        let n = labels.len();
        if dist.len() != n {
            return Err(SpaceError::RowCount { rows: dist.len(), labels: n });
        }
        for (row, entries) in dist.iter().enumerate() {
            if entries.len() != n {
                return Err(SpaceError::RaggedRow { row, len: entries.len(), expected: n });
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(n);
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(SpaceError::DuplicateLabel(l.clone()));
            }
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(SpaceError::NonZeroSelfDistance {
                    x: labels[i].clone(),
                    value: dist[i][i].to_string(),
                });
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = &dist[i][j];
                if d.is_negative() {
                    return Err(SpaceError::NegativeDistance {
                        x: labels[i].clone(),
                        y: labels[j].clone(),
                        value: d.to_string(),
                    });
                }
                if j > i && *d != dist[j][i] {
                    return Err(SpaceError::Asymmetry {
                        x: labels[i].clone(),
                        y: labels[j].clone(),
                        forward: d.to_string(),
                        backward: dist[j][i].to_string(),
                    });
                }
                if d.is_zero() {
                    return Err(SpaceError::ZeroDistance {
                        x: labels[i].clone(),
                        y: labels[j].clone(),
                    });
                }
            }
        }
        Ok(Self { labels, dist })
    }

    /// Builds a space by evaluating `d` on every ordered pair of labels.
    pub fn from_fn<F>(labels: Vec<String>, mut d: F) -> Result<Self, SpaceError>
    where
        F: FnMut(usize, usize) -> S,
    {
        let n = labels.len();
        let dist = (0..n).map(|i| (0..n).map(|j| d(i, j)).collect()).collect();
        Self::new(labels, dist)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = PointId> {
        (0..self.len()).map(PointId)
    }

    #[inline]
    pub fn d(&self, x: PointId, y: PointId) -> &S {
        &self.dist[x.0][y.0]
    }

    pub fn row(&self, x: PointId) -> &[S] {
        &self.dist[x.0]
    }

    pub fn label(&self, x: PointId) -> &str {
        &self.labels[x.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table(&self) -> &[Vec<S>] {
        &self.dist
    }

    pub fn find(&self, label: &str) -> Option<PointId> {
        self.labels.iter().position(|l| l == label).map(PointId)
    }

    pub fn contains(&self, x: PointId) -> bool {
        x.0 < self.len()
    }

    /// Distinct positive distance values, ascending.
    pub fn distinct_distances(&self) -> Vec<S> {
        let mut values: Vec<S> = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                values.push(self.dist[i][j].clone());
            }
        }
        sort_dedup(&mut values);
        values
    }

    /// The induced subspace on `points`, in the given order.
    pub fn subspace(&self, points: &[PointId]) -> Result<Self, SpaceError> {
        let labels = points.iter().map(|&p| self.labels[p.0].clone()).collect();
        let dist = points
            .iter()
            .map(|&p| points.iter().map(|&q| self.dist[p.0][q.0].clone()).collect())
            .collect();
        Self::new(labels, dist)
    }

    /// Multiplies every distance by `c > 0`.
    pub fn scale(&self, c: &S) -> Result<Self, SpaceError> {
        if !c.is_positive() {
            return Err(SpaceError::NonPositiveScale(c.to_string()));
        }
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(|d| d.clone() * c.clone()).collect())
            .collect();
        Ok(Self { labels: self.labels.clone(), dist })
    }
}

pub(crate) fn sort_dedup<S: Scalar>(values: &mut Vec<S>) {
    values.sort_by(|a, b| a.partial_cmp(b).expect("scalars are totally ordered"));
    values.dedup();
}

/// Serializable document form: `{"labels": [...], "dist": [["0","1"],...]}`.
#[derive(Debug, Clone, Serialize)]
pub struct SpaceDocument {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<String>>,
}

impl<S: Scalar> From<&FiniteSpace<S>> for SpaceDocument {
    fn from(space: &FiniteSpace<S>) -> Self {
        Self {
            labels: space.labels.clone(),
            dist: space
                .dist
                .iter()
                .map(|row| row.iter().map(ToString::to_string).collect())
                .collect(),
        }
    }
}

/// Constructs a space from labels and a table; see [`FiniteSpace::new`].
pub fn make_space<S: Scalar>(
    labels: Vec<String>,
    dist: Vec<Vec<S>>,
) -> Result<FiniteSpace<S>, SpaceError> {
    FiniteSpace::new(labels, dist)
}

pub fn scale_space<S: Scalar>(space: &FiniteSpace<S>, c: &S) -> Result<FiniteSpace<S>, SpaceError> {
    space.scale(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassStatus {
    Claimed,
    Certified,
    Refuted,
}

/// A pair `(v, s)` together with whether it has been checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct MetricClass<S> {
    pub v: usize,
    #[serde(serialize_with = "ser::display")]
    pub s: S,
    pub status: ClassStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("v must be at least 1")]
    ZeroV,
    #[error("s = {0} is below 1")]
    SmallS(String),
}

impl<S: Scalar> MetricClass<S> {
    pub fn claimed(v: usize, s: S) -> Result<Self, ClassError> {
        if v == 0 {
            return Err(ClassError::ZeroV);
        }
        if s < S::one() {
            return Err(ClassError::SmallS(s.to_string()));
        }
        Ok(Self { v, s, status: ClassStatus::Claimed })
    }

    pub(crate) fn settle(self, certified: bool) -> Self {
        debug_assert_eq!(self.status, ClassStatus::Claimed);
        let status = if certified { ClassStatus::Certified } else { ClassStatus::Refuted };
        Self { status, ..self }
    }
}

/// A self-map given by its image table. Entries are `None` where the map is
/// undefined on a truncation (see [`SelfMap::is_total`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfMap {
    image: Vec<Option<PointId>>,
}

impl SelfMap {
    /// A total map on a space of `size` points.
    pub fn total(image: Vec<PointId>, size: usize) -> Result<Self, SpaceError> {
        Self::partial(image.into_iter().map(Some).collect(), size)
    }

    pub fn partial(image: Vec<Option<PointId>>, size: usize) -> Result<Self, SpaceError> {
        if image.len() != size {
            return Err(SpaceError::MapLength { len: image.len(), size });
        }
        for (point, y) in image.iter().enumerate() {
            if let Some(y) = y {
                if y.0 >= size {
                    return Err(SpaceError::ImageOutOfRange { point, image: y.0, size });
                }
            }
        }
        Ok(Self { image })
    }

    pub fn constant(target: PointId, size: usize) -> Result<Self, SpaceError> {
        Self::total(vec![target; size], size)
    }

    pub fn identity(size: usize) -> Self {
        Self { image: (0..size).map(|i| Some(PointId(i))).collect() }
    }

    pub fn from_fn<F>(size: usize, f: F) -> Result<Self, SpaceError>
    where
        F: FnMut(usize) -> Option<usize>,
    {
        Self::partial((0..size).map(f).map(|y| y.map(PointId)).collect(), size)
    }

    #[inline]
    pub fn apply(&self, x: PointId) -> Option<PointId> {
        self.image[x.0]
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.image.iter().all(Option::is_some)
    }

    pub fn domain(&self) -> impl Iterator<Item = PointId> + '_ {
        self.image
            .iter()
            .enumerate()
            .filter_map(|(i, y)| y.map(|_| PointId(i)))
    }

    pub fn images(&self) -> &[Option<PointId>] {
        &self.image
    }
}
