//! JSON input documents.
//!
//! A space document is either an explicit table
//!
//! ```json
//! {"labels": ["a", "b"], "dist": [["0", "1"], ["1", "0"]], "map": ["b", "b"]}
//! ```
//!
//! or a gallery spec such as `{"gallery": "halving_space", "n": 4}`. The
//! optional `map` is an array of image labels (one per point, `null` where
//! undefined) or an object from label to label. Distances are rational
//! strings; JSON integers are accepted too.

use serde_json::{Map, Value};
use thiserror::Error;

use crate::gallery::{GalleryError, GalleryInstance, GallerySpec};
use crate::scalar::{parse_scalar, ParseScalarError, Scalar};
use crate::space::{FiniteSpace, PointId, SelfMap, SpaceError};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("{pointer}: {source}")]
    Rational { pointer: String, source: ParseScalarError },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> DocumentError {
    DocumentError::Schema { pointer: pointer.into(), message: message.into() }
}

/// A parsed document: the space, an optional map, and the gallery instance
/// when the document named one.
#[derive(Debug, Clone)]
pub struct Loaded<S> {
    pub space: FiniteSpace<S>,
    pub map: Option<SelfMap>,
    pub gallery: Option<GalleryInstance<S>>,
}

pub fn parse_document<S: Scalar>(text: &str) -> Result<Loaded<S>, DocumentError> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Object(obj) = &value else {
        return Err(schema("", "expected an object"));
    };
    if obj.contains_key("gallery") {
        let spec: GallerySpec = serde_json::from_value(value.clone())
            .map_err(|e| schema("", format!("invalid gallery spec: {e}")))?;
        let inst = spec.build::<S>()?;
        return Ok(Loaded { space: inst.space.clone(), map: inst.map.clone(), gallery: Some(inst) });
    }
    let space = space_from_object(obj)?;
    let map = match obj.get("map") {
        Some(m) => Some(map_from_value(m, &space, "/map")?),
        None => None,
    };
    Ok(Loaded { space, map, gallery: None })
}

/// Parses a space document (explicit table or gallery spec).
pub fn parse_space<S: Scalar>(text: &str) -> Result<FiniteSpace<S>, DocumentError> {
    parse_document(text).map(|l| l.space)
}

/// Parses `{"map": ...}` (or a bare array/object) against `space`'s labels.
pub fn parse_map<S: Scalar>(text: &str, space: &FiniteSpace<S>) -> Result<SelfMap, DocumentError> {
    let value: Value = serde_json::from_str(text)?;
    match &value {
        Value::Object(obj) if obj.contains_key("map") => map_from_value(&obj["map"], space, "/map"),
        _ => map_from_value(&value, space, ""),
    }
}

fn space_from_object<S: Scalar>(obj: &Map<String, Value>) -> Result<FiniteSpace<S>, DocumentError> {
    for key in obj.keys() {
        if !matches!(key.as_str(), "labels" | "dist" | "map") {
            return Err(schema(format!("/{key}"), "unknown field"));
        }
    }
    let labels = obj
        .get("labels")
        .ok_or_else(|| schema("/labels", "missing field"))?
        .as_array()
        .ok_or_else(|| schema("/labels", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.as_str()
                .map(str::to_owned)
                .ok_or_else(|| schema(format!("/labels/{i}"), "expected a string"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows = obj
        .get("dist")
        .ok_or_else(|| schema("/dist", "missing field"))?
        .as_array()
        .ok_or_else(|| schema("/dist", "expected an array"))?;
    let mut dist = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| schema(format!("/dist/{i}"), "expected an array"))?;
        let mut out = Vec::with_capacity(row.len());
        for (j, entry) in row.iter().enumerate() {
            let pointer = format!("/dist/{i}/{j}");
            let text = match entry {
                Value::String(s) => s.clone(),
                Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
                _ => return Err(schema(pointer, "expected a rational string")),
            };
            let x = parse_scalar(&text).map_err(|source| DocumentError::Rational { pointer, source })?;
            out.push(x);
        }
        dist.push(out);
    }
    Ok(FiniteSpace::new(labels, dist)?)
}

fn resolve<S: Scalar>(
    space: &FiniteSpace<S>,
    value: &Value,
    pointer: &str,
) -> Result<Option<PointId>, DocumentError> {
    match value {
        Value::Null => Ok(None),
        Value::String(s) => space
            .find(s)
            .map(Some)
            .ok_or_else(|| schema(pointer, format!("unknown label {s:?}"))),
        _ => Err(schema(pointer, "expected a label or null")),
    }
}

fn map_from_value<S: Scalar>(
    value: &Value,
    space: &FiniteSpace<S>,
    base: &str,
) -> Result<SelfMap, DocumentError> {
    let n = space.len();
    let image = match value {
        Value::Array(items) => {
            if items.len() != n {
                return Err(schema(base, format!("expected {n} images, got {}", items.len())));
            }
            items
                .iter()
                .enumerate()
                .map(|(i, v)| resolve(space, v, &format!("{base}/{i}")))
                .collect::<Result<Vec<_>, _>>()?
        }
        Value::Object(entries) => {
            let mut image = vec![None; n];
            for (from, to) in entries {
                let pointer = format!("{base}/{}", from.replace('~', "~0").replace('/', "~1"));
                let x = space
                    .find(from)
                    .ok_or_else(|| schema(pointer.clone(), format!("unknown label {from:?}")))?;
                image[x.0] = resolve(space, to, &pointer)?;
            }
            image
        }
        _ => return Err(schema(base, "expected an array or object")),
    };
    Ok(SelfMap::partial(image, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn explicit_two_point_space() {
        let s: FiniteSpace<Rational> =
            parse_space(r#"{"labels":["a","b"],"dist":[["0","1"],["1","0"]]}"#).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(*s.d(PointId(0), PointId(1)), Rational::new(1, 1));
    }

    #[test]
    fn gallery_document() {
        let s: FiniteSpace<Rational> = parse_space(r#"{"gallery":"halving_space","n":4}"#).unwrap();
        assert_eq!(s.labels(), &["1", "1/2", "1/4", "1/8", "1/16", "0"]);
    }

    #[test]
    fn zero_denominator_has_pointer() {
        let err = parse_space::<Rational>(r#"{"labels":["a","b"],"dist":[["0","1/0"],["1","0"]]}"#)
            .unwrap_err();
        match err {
            DocumentError::Rational { pointer, source } => {
                assert_eq!(pointer, "/dist/0/1");
                assert!(matches!(source, ParseScalarError::ZeroDenominator(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors_have_pointers() {
        let err = parse_space::<Rational>(r#"{"labels":["a", 3],"dist":[]}"#).unwrap_err();
        assert!(matches!(err, DocumentError::Schema { ref pointer, .. } if pointer == "/labels/1"));
        let err = parse_space::<Rational>(r#"{"labels":[]}"#).unwrap_err();
        assert!(matches!(err, DocumentError::Schema { ref pointer, .. } if pointer == "/dist"));
        let err = parse_space::<Rational>(r#"{"labels":[],"dist":[],"extra":1}"#).unwrap_err();
        assert!(matches!(err, DocumentError::Schema { ref pointer, .. } if pointer == "/extra"));
        assert!(matches!(parse_space::<Rational>("[1"), Err(DocumentError::Json(_))));
    }

    #[test]
    fn maps_by_array_and_object() {
        let doc = r#"{"labels":["a","b","c"],
                      "dist":[["0","1","2"],["1","0","1"],["2","1","0"]],
                      "map":["b","b",null]}"#;
        let loaded = parse_document::<Rational>(doc).unwrap();
        let map = loaded.map.unwrap();
        assert_eq!(map.apply(PointId(0)), Some(PointId(1)));
        assert_eq!(map.apply(PointId(2)), None);

        let map = parse_map(r#"{"map":{"a":"c","b":"c","c":"c"}}"#, &loaded.space).unwrap();
        assert!(map.is_total());
        let err = parse_map(r#"["a","zz","a"]"#, &loaded.space).unwrap_err();
        assert!(matches!(err, DocumentError::Schema { ref pointer, .. } if pointer == "/1"));
    }

    #[test]
    fn decimal_and_integer_entries() {
        let s: FiniteSpace<Rational> =
            parse_space(r#"{"labels":["a","b"],"dist":[[0,"0.25"],["1/4",0]]}"#).unwrap();
        assert_eq!(*s.d(PointId(1), PointId(0)), Rational::new(1, 4));
    }
}
