//! Body spec files and inline shorthand.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ConvexBody, DirectionGrid};
use crate::error::{input, GzError, Result};

/// JSON body description, tagged by `"type"`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BodySpec {
    pub dim: usize,
    #[serde(flatten)]
    pub shape: ShapeSpec,
    /// Declared symmetry; checked against the data when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ShapeSpec {
    Hpolytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
    Supportgrid {
        values: Vec<f64>,
        /// Seed of the random grid used in dimension four and up.
        #[serde(default)]
        seed: Option<u64>,
    },
    Ball {
        radius: f64,
    },
    Box {
        half_widths: Vec<f64>,
    },
    Ellipsoid {
        semi_axes: Vec<f64>,
    },
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        let dim = self.dim;
        let check_len = |what: &str, len: usize| {
            if len != dim {
                input(format!("{what} has length {len}, expected dim = {dim}"))
            } else {
                Ok(())
            }
        };
        let body = match &self.shape {
            ShapeSpec::Ball { radius } => ConvexBody::ball(dim, *radius)?,
            ShapeSpec::Box { half_widths } => {
                check_len("half_widths", half_widths.len())?;
                ConvexBody::cuboid(half_widths)?
            }
            ShapeSpec::Ellipsoid { semi_axes } => {
                check_len("semi_axes", semi_axes.len())?;
                ConvexBody::ellipsoid(semi_axes)?
            }
            ShapeSpec::Hpolytope { normals, offsets } => {
                if normals.len() != offsets.len() {
                    return input(format!("{} normals but {} offsets", normals.len(), offsets.len()));
                }
                for (i, a) in normals.iter().enumerate() {
                    if a.len() != dim {
                        return input(format!("normals[{i}] has length {}, expected dim = {dim}", a.len()));
                    }
                }
                ConvexBody::hpolytope(dim, normals, offsets)?
            }
            ShapeSpec::Supportgrid { values, seed } => {
                let grid = match dim {
                    0 => return input("dim must be at least 1"),
                    1 => DirectionGrid::interval(),
                    2 => DirectionGrid::circle(values.len())?,
                    3 => DirectionGrid::fibonacci_sphere(values.len())?,
                    _ => DirectionGrid::random(dim, values.len(), seed.unwrap_or(0))?,
                };
                ConvexBody::support_grid(Arc::new(grid), values.clone())?
            }
        };
        if let Some(declared) = self.symmetric {
            if declared && !body.is_symmetric() {
                return input("spec declares \"symmetric\": true but the body is not centrally symmetric");
            }
        }
        Ok(body)
    }
}

/// Parses a JSON body spec, reporting the line and column of malformed input.
pub fn parse_body_json(text: &str) -> Result<ConvexBody> {
    let spec: BodySpec = serde_json::from_str(text)
        .map_err(|e| GzError::Input(format!("body spec, line {} column {}: {e}", e.line(), e.column())))?;
    spec.build()
}

fn numbers(args: &str) -> Result<Vec<f64>> {
    args.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| GzError::Input(format!("cannot parse {s:?} as a number")))
        })
        .collect()
}

fn exactly<const N: usize>(name: &str, v: Vec<f64>) -> Result<[f64; N]> {
    v.try_into()
        .map_err(|v: Vec<f64>| GzError::Input(format!("{name} takes {N} argument(s), got {}", v.len())))
}

/// Inline shorthand: `ball:r`, `box:a,b,...`, `ellipse:a,b`, `interval:l,r`
/// (the interval `[-l, r]`), `square`, `square:a`, `smoothed-square:eps`.
pub fn parse_shorthand(text: &str, dim: usize) -> Result<ConvexBody> {
    let (name, args) = match text.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a)),
        None => (text.trim(), None),
    };
    let args = args.map(numbers).transpose()?;
    let need_dim = |want: usize| {
        if dim != want {
            input(format!("{name} is a {want}-dimensional body, but dim = {dim}"))
        } else {
            Ok(())
        }
    };
    match (name, args) {
        ("ball", Some(a)) => ConvexBody::ball(dim, exactly::<1>(name, a)?[0]),
        ("box", Some(a)) => {
            let w = if a.len() == 1 { vec![a[0]; dim] } else { a };
            if w.len() != dim {
                return input(format!("box has {} half-widths, but dim = {dim}", w.len()));
            }
            ConvexBody::cuboid(&w)
        }
        ("ellipse" | "ellipsoid", Some(a)) => {
            if a.len() != dim {
                return input(format!("ellipsoid has {} semi-axes, but dim = {dim}", a.len()));
            }
            ConvexBody::ellipsoid(&a)
        }
        ("interval", Some(a)) => {
            need_dim(1)?;
            let [l, r] = exactly::<2>(name, a)?;
            ConvexBody::interval(l, r)
        }
        ("square", None) => {
            need_dim(2)?;
            ConvexBody::square(1.0)
        }
        ("square", Some(a)) => {
            need_dim(2)?;
            ConvexBody::square(exactly::<1>(name, a)?[0])
        }
        ("smoothed-square", Some(a)) => {
            need_dim(2)?;
            ConvexBody::smoothed_square(1.0, exactly::<1>(name, a)?[0])
        }
        _ => input(format!(
            "unknown body {text:?}; expected ball:r, box:a,b, ellipse:a,b, interval:l,r, square or smoothed-square:eps"
        )),
    }
}

/// Reads `text` as a JSON spec file path if it names an existing file,
/// otherwise as shorthand.
pub fn parse_body(text: &str, dim: usize) -> Result<ConvexBody> {
    let path = std::path::Path::new(text);
    if text.ends_with(".json") || path.is_file() {
        let content = std::fs::read_to_string(path)
            .map_err(|e| GzError::Input(format!("cannot read body spec {text}: {e}")))?;
        let body = parse_body_json(&content)?;
        if body.dim() != dim {
            return input(format!("body spec {text} has dim {}, expected {dim}", body.dim()));
        }
        return Ok(body);
    }
    parse_shorthand(text, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_bodies() {
        assert_eq!(parse_shorthand("ball:2", 2).unwrap(), ConvexBody::ball(2, 2.0).unwrap());
        assert_eq!(parse_shorthand("box:1,3", 2).unwrap(), ConvexBody::cuboid(&[1.0, 3.0]).unwrap());
        assert_eq!(parse_shorthand("box:1", 3).unwrap(), ConvexBody::cuboid(&[1.0; 3]).unwrap());
        assert!(parse_shorthand("square", 2).unwrap().contains(&[1.0, -1.0]));
        assert!(parse_shorthand("smoothed-square:0.1", 2).unwrap().as_support_grid().is_some());
        assert!(parse_shorthand("square", 3).is_err());
        assert!(parse_shorthand("ball:x", 2).is_err());
        assert!(parse_shorthand("blob:1", 2).is_err());
        assert!(parse_shorthand("ball:1,2", 2).is_err());
    }

    #[test]
    fn json_spec_normalizes_normals() {
        let body = parse_body_json(
            r#"{"dim": 2, "type": "hpolytope", "normals": [[2,0],[0,3],[-1,0],[0,-1]],
                "offsets": [2, 3, 1, 1], "symmetric": true}"#,
        )
        .unwrap();
        assert!(body.contains(&[1.0, 1.0]));
        assert!(!body.contains(&[1.01, 0.0]));
    }

    #[test]
    fn json_errors_carry_position() {
        let err = parse_body_json("{\"dim\": 2,\n \"type\": \"ball\", \"radius\": }").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_body_json(r#"{"dim": 2, "type": "box", "half_widths": [1]}"#).unwrap_err();
        assert!(err.to_string().contains("half_widths"), "{err}");
    }

    #[test]
    fn declared_symmetry_is_checked() {
        let err = parse_body_json(
            r#"{"dim": 1, "type": "supportgrid", "values": [1, 2], "symmetric": true}"#,
        );
        assert!(err.is_err());
        let ok = parse_body_json(r#"{"dim": 1, "type": "supportgrid", "values": [2, 2], "symmetric": true}"#);
        assert!(ok.unwrap().is_symmetric());
    }
}
