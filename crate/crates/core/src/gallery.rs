//! Finite truncations of the example spaces and maps, a synthetic witness
//! space for the orbitwise condition, and seeded random instances.
//!
//! Every constructor materializes the full distance table. Truncation sizes
//! are part of the instance and are carried into every report built from it.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::check_contractive;
use crate::scalar::Scalar;
use crate::space::{ClassStatus, FiniteSpace, MetricClass, PointId, SelfMap, SpaceError};
use crate::verifier::{min_s_report, VerifyError, VerifyOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GalleryError {
    #[error("{family} needs size >= {min}, got {got}")]
    Size { family: GalleryName, min: usize, got: usize },
    #[error("random_space needs a seed")]
    MissingSeed,
    #[error("unknown gallery family {0:?}")]
    UnknownFamily(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GalleryName {
    UnionSpace,
    NaturalsSpace,
    ReciprocalSpace,
    UnitSequenceSpace,
    HalvingSpace,
    RandomSpace,
}

impl GalleryName {
    pub const ALL: [GalleryName; 6] = [
        GalleryName::UnionSpace,
        GalleryName::NaturalsSpace,
        GalleryName::ReciprocalSpace,
        GalleryName::UnitSequenceSpace,
        GalleryName::HalvingSpace,
        GalleryName::RandomSpace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GalleryName::UnionSpace => "union_space",
            GalleryName::NaturalsSpace => "naturals_space",
            GalleryName::ReciprocalSpace => "reciprocal_space",
            GalleryName::UnitSequenceSpace => "unit_sequence_space",
            GalleryName::HalvingSpace => "halving_space",
            GalleryName::RandomSpace => "random_space",
        }
    }

    /// Smallest valid size.
    pub fn min_size(self) -> usize {
        match self {
            GalleryName::UnionSpace => 2,
            GalleryName::NaturalsSpace => 30,
            GalleryName::ReciprocalSpace => 4,
            GalleryName::UnitSequenceSpace => 12,
            GalleryName::HalvingSpace => 2,
            GalleryName::RandomSpace => 2,
        }
    }

    /// Truncation size that exercises every published branch of the family.
    pub fn adjudication_size(self) -> usize {
        match self {
            GalleryName::UnionSpace => 12,
            GalleryName::NaturalsSpace => 40,
            GalleryName::ReciprocalSpace => 10,
            GalleryName::UnitSequenceSpace => 25,
            GalleryName::HalvingSpace => 16,
            GalleryName::RandomSpace => 6,
        }
    }
}

impl fmt::Display for GalleryName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GalleryName {
    type Err = GalleryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| GalleryError::UnknownFamily(s.to_owned()))
    }
}

/// `{"gallery": "naturals_space", "n": 40}`; `seed` and `v` only matter for
/// `random_space`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GallerySpec {
    pub gallery: GalleryName,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
}

impl GallerySpec {
    pub fn new(gallery: GalleryName, n: usize) -> Self {
        Self { gallery, n, seed: None, v: None }
    }

    pub fn build<S: Scalar>(&self) -> Result<GalleryInstance<S>, GalleryError> {
        match self.gallery {
            GalleryName::UnionSpace => union_space(self.n),
            GalleryName::NaturalsSpace => naturals_space(self.n),
            GalleryName::ReciprocalSpace => reciprocal_space(self.n),
            GalleryName::UnitSequenceSpace => unit_sequence_space(self.n),
            GalleryName::HalvingSpace => halving_space(self.n),
            GalleryName::RandomSpace => {
                let seed = self.seed.ok_or(GalleryError::MissingSeed)?;
                random_space(self.n, seed, self.v.unwrap_or(1))
            }
        }
    }
}

/// A gallery space with what the source example asserts about it.
#[derive(Debug, Clone)]
pub struct GalleryInstance<S> {
    pub spec: GallerySpec,
    pub space: FiniteSpace<S>,
    pub class: MetricClass<S>,
    pub map: Option<SelfMap>,
    /// The example asserts `d(Tx,Ty) < d(x,y)` for all `x != y`.
    pub claims_contractive: bool,
    /// The example asserts the map has a fixed point.
    pub claims_fixed_point: Option<bool>,
    /// Compactness classification as stated by the example. Not computed.
    pub compactness: &'static str,
    /// Known disagreements between the published formulas and the claims.
    pub errata: Vec<&'static str>,
}

fn size_check(family: GalleryName, got: usize) -> Result<(), GalleryError> {
    let min = family.min_size();
    if got < min {
        return Err(GalleryError::Size { family, min, got });
    }
    Ok(())
}

fn int<S: Scalar>(n: i128) -> S {
    S::from_fraction(n, 1)
}

fn claimed<S: Scalar>(v: usize, s: i128) -> MetricClass<S> {
    MetricClass::claimed(v, int(s)).expect("published constants are valid")
}

/// `X1 = {1/n : 2 <= n <= N}` together with `X2 = {0, 1, 2}`:
///
/// * `|n - m|` between `1/n, 1/m` unless `|n - m|` is 1 or 3, where it is 1/2;
/// * `n` between `1/n` and any point of `X2`;
/// * 5 between distinct points of `X2`.
///
/// Claimed `b_3(2)`. The published formula does not support the claim once
/// `N >= 8`; see `errata`.
pub fn union_space<S: Scalar>(n: usize) -> Result<GalleryInstance<S>, GalleryError> {
    size_check(GalleryName::UnionSpace, n)?;
    let x1 = n - 1;
    let mut labels: Vec<String> = (2..=n).map(|k| format!("1/{k}")).collect();
    labels.extend(["0", "1", "2"].map(String::from));
    let den = |i: usize| (i + 2) as i128;
    let space = FiniteSpace::from_fn(labels, |i, j| {
        if i == j {
            return S::zero();
        }
        match (i < x1, j < x1) {
            (true, true) => {
                let k = (den(i) - den(j)).abs();
                if k == 1 || k == 3 {
                    S::from_fraction(1, 2)
                } else {
                    int(k)
                }
            }
            (true, false) => int(den(i)),
            (false, true) => int(den(j)),
            (false, false) => int(5),
        }
    })?;
    Ok(GalleryInstance {
        spec: GallerySpec::new(GalleryName::UnionSpace, n),
        space,
        class: claimed(3, 2),
        map: None,
        claims_contractive: false,
        claims_fixed_point: None,
        compactness: "stated boundedly compact and not sequentially compact; the accompanying \
                      text states the implication between the two notions in the reverse direction",
        errata: vec![
            "a chain whose consecutive denominators differ by 1 or 3 has legs of 1/2 only \
             while d(1/n, 1/m) = |n - m| grows, so min_s(v=3) is 3 at N=8 and 5 at N=12 \
             (chain 1/2, 1/3, 1/6, 1/9, 1/12), above the claimed s = 2",
        ],
    })
}

/// `{1, ..., N}` with `d = 10|x-y|` when both are below 10, `|x-y|/10` when
/// both are at least 10, and 5 otherwise. `Tx = x + 20` for `x <= 10`, else
/// 10. Claimed `b_2(1000)`.
pub fn naturals_space<S: Scalar>(n: usize) -> Result<GalleryInstance<S>, GalleryError> {
    size_check(GalleryName::NaturalsSpace, n)?;
    let labels = (1..=n).map(|k| k.to_string()).collect();
    let val = |i: usize| (i + 1) as i128;
    let space = FiniteSpace::from_fn(labels, |i, j| {
        let (x, y) = (val(i), val(j));
        if x == y {
            S::zero()
        } else if x < 10 && y < 10 {
            int(10 * (x - y).abs())
        } else if x >= 10 && y >= 10 {
            S::from_fraction((x - y).abs(), 10)
        } else {
            int(5)
        }
    })?;
    // point k sits at index k - 1
    let map = SelfMap::from_fn(n, |i| Some(if val(i) <= 10 { i + 20 } else { 9 }))?;
    Ok(GalleryInstance {
        spec: GallerySpec::new(GalleryName::NaturalsSpace, n),
        space,
        class: claimed(2, 1000),
        map: Some(map),
        claims_contractive: true,
        claims_fixed_point: Some(false),
        compactness: "stated boundedly compact and not sequentially compact",
        errata: vec![
            "the contractivity case x > 10, y <= 10 takes d(x, y) = 5, but for y = 10 the \
             published metric gives d(x, 10) = (x - 10)/10; at (11, 10) the map sends the pair \
             to (10, 30) and the distance grows from 1/10 to 2",
        ],
    })
}

/// `{1/n : 2 <= n <= N}` with `d = |n - m|`, or 1/2 when `|n - m| = 1`;
/// `T = 1/4` everywhere. Claimed `b_3(3)`.
pub fn reciprocal_space<S: Scalar>(n: usize) -> Result<GalleryInstance<S>, GalleryError> {
    size_check(GalleryName::ReciprocalSpace, n)?;
    let labels = (2..=n).map(|k| format!("1/{k}")).collect();
    let space = FiniteSpace::from_fn(labels, |i, j| {
        let k = (i as i128 - j as i128).abs();
        match k {
            0 => S::zero(),
            1 => S::from_fraction(1, 2),
            _ => int(k),
        }
    })?;
    let map = SelfMap::constant(PointId(2), n - 1)?;
    Ok(GalleryInstance {
        spec: GallerySpec::new(GalleryName::ReciprocalSpace, n),
        space,
        class: claimed(3, 3),
        map: Some(map),
        claims_contractive: true,
        claims_fixed_point: Some(true),
        compactness: "stated boundedly compact and not sequentially compact",
        errata: Vec::new(),
    })
}

/// Indicator sequences `e_1, ..., e_N` with `d(e_i, e_j) = 1 + 100/(i+j)`
/// when `i, j <= 10` and `1 + 10/(i+j)` otherwise. The shift `e_i -> e_{i+11}`
/// leaves the truncation for `i > N - 11`, where the map is left undefined
/// rather than wrapped. Claimed `b_2(10)`.
pub fn unit_sequence_space<S: Scalar>(n: usize) -> Result<GalleryInstance<S>, GalleryError> {
    size_check(GalleryName::UnitSequenceSpace, n)?;
    let labels = (1..=n).map(|k| format!("e_{k}")).collect();
    let space = FiniteSpace::from_fn(labels, |a, b| {
        let (i, j) = ((a + 1) as i128, (b + 1) as i128);
        if i == j {
            return S::zero();
        }
        // "either one of i or j > 10" read as "not both <= 10"
        let scale = if i <= 10 && j <= 10 { 100 } else { 10 };
        S::one() + S::from_fraction(scale, i + j)
    })?;
    let map = SelfMap::from_fn(n, |i| (i + 11 < n).then_some(i + 11))?;
    Ok(GalleryInstance {
        spec: GallerySpec::new(GalleryName::UnitSequenceSpace, n),
        space,
        class: claimed(2, 10),
        map: Some(map),
        claims_contractive: true,
        claims_fixed_point: Some(false),
        compactness: "stated complete and not boundedly compact",
        errata: Vec::new(),
    })
}

/// `{1, 1/2, ..., 2^-K, 0}` with `d = |x - y|` and `T x = x / 2`, except
/// `T 2^-K = 0`. A genuine metric, hence `b_v(1)` for every `v`.
///
/// The truncation makes the last pair `(2^-(K-1), 2^-K)` non-strict:
/// both are sent at distance `2^-K` apart.
pub fn halving_space<S: Scalar>(k: usize) -> Result<GalleryInstance<S>, GalleryError> {
    size_check(GalleryName::HalvingSpace, k)?;
    let mut labels: Vec<String> = (0..=k)
        .map(|e| if e == 0 { "1".to_owned() } else { format!("1/{}", 1u128 << e) })
        .collect();
    labels.push("0".to_owned());
    let value = |i: usize| -> S {
        if i > k {
            S::zero()
        } else {
            S::from_fraction(1, 1i128 << i)
        }
    };
    let space = FiniteSpace::from_fn(labels, |i, j| {
        let (x, y) = (value(i), value(j));
        if x > y {
            x - y
        } else {
            y - x
        }
    })?;
    let zero = k + 1;
    let map = SelfMap::from_fn(k + 2, |i| Some(if i >= k { zero } else { i + 1 }))?;
    Ok(GalleryInstance {
        spec: GallerySpec::new(GalleryName::HalvingSpace, k),
        space,
        class: MetricClass { v: 1, s: S::one(), status: ClassStatus::Certified },
        map: Some(map),
        claims_contractive: false,
        claims_fixed_point: Some(true),
        compactness: "finite, hence compact",
        errata: Vec::new(),
    })
}

/// Symmetric table of values `k/10`, `k` uniform in `1..=100`, drawn from a
/// ChaCha8 stream seeded with `seed`; paired with its certified least `s`
/// for `v`.
pub fn random_space<S: Scalar>(n: usize, seed: u64, v: usize) -> Result<GalleryInstance<S>, GalleryError> {
    size_check(GalleryName::RandomSpace, n)?;
    let space = random_table(n, seed)?;
    let min_s = min_s_report(&space, v, &VerifyOptions::default())?;
    Ok(GalleryInstance {
        spec: GallerySpec { gallery: GalleryName::RandomSpace, n, seed: Some(seed), v: Some(v) },
        class: MetricClass { v, s: min_s.value, status: ClassStatus::Certified },
        space,
        map: None,
        claims_contractive: false,
        claims_fixed_point: None,
        compactness: "finite, hence compact",
        errata: Vec::new(),
    })
}

/// The distance table behind [`random_space`], without certification.
pub fn random_table<S: Scalar>(n: usize, seed: u64) -> Result<FiniteSpace<S>, SpaceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let k = rng.gen_range(1..=100);
            raw[i][j] = k;
            raw[j][i] = k;
        }
    }
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    FiniteSpace::from_fn(labels, |i, j| S::from_fraction(raw[i][j], 10))
}

/// Attempts of uniform random maps before falling back to a constant map.
pub const CONTRACTIVE_MAP_ATTEMPTS: usize = 256;

/// A map passing [`check_contractive`], found by rejection sampling of
/// uniform random maps. Falls back to a seeded constant map, which is always
/// contractive when distinct points are at positive distance.
pub fn random_contractive_map<S: Scalar>(space: &FiniteSpace<S>, seed: u64) -> SelfMap {
    let n = space.len();
    if n <= 1 {
        return SelfMap::identity(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..CONTRACTIVE_MAP_ATTEMPTS {
        let image = (0..n).map(|_| PointId(rng.gen_range(0..n))).collect();
        let map = SelfMap::total(image, n).expect("images in range");
        if check_contractive(space, &map).holds {
            return map;
        }
    }
    SelfMap::constant(PointId(rng.gen_range(0..n)), n).expect("target in range")
}
