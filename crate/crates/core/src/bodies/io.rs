//! JSON body specifications.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ConvexBody, Ellipsoid, Polytope};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    Ellipsoid {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Polytope { vertices } => {
                let n = vertices
                    .first()
                    .map(Vec::len)
                    .ok_or_else(|| Error::InvalidInput("polytope has no vertices".into()))?;
                if let Some((i, v)) = vertices.iter().enumerate().find(|(_, v)| v.len() != n) {
                    return Err(Error::InvalidInput(format!(
                        "vertex {i} has {} coordinates, expected {n}",
                        v.len()
                    )));
                }
                Ok(Polytope::from_vertices(vertices.clone())?.into())
            }
            BodySpec::Ellipsoid { q } => {
                let n = q.len();
                if let Some((i, r)) = q.iter().enumerate().find(|(_, r)| r.len() != n) {
                    return Err(Error::InvalidInput(format!(
                        "row {i} of Q has {} entries, expected {n}",
                        r.len()
                    )));
                }
                let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
                Ok(Ellipsoid::new(m)?.into())
            }
        }
    }

    pub fn from_body(body: &ConvexBody) -> Result<Self> {
        match body {
            ConvexBody::Polytope(p) => Ok(BodySpec::Polytope {
                vertices: p.vertices().to_vec(),
            }),
            ConvexBody::Ellipsoid(e) => {
                let m = e.matrix();
                Ok(BodySpec::Ellipsoid {
                    q: (0..m.nrows())
                        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                        .collect(),
                })
            }
            ConvexBody::Oracle(_) => Err(Error::Unsupported(
                "support-function oracles have no file representation".into(),
            )),
        }
    }
}

pub fn parse_body_str(text: &str, origin: &str) -> Result<ConvexBody> {
    let spec: BodySpec = serde_json::from_str(text)
        .map_err(|e| Error::parse(origin, error_line(text, &e), e.to_string()))?;
    spec.build().map_err(|e| match e {
        Error::InvalidInput(msg) | Error::Degenerate(msg) => Error::parse(origin, 0, msg),
        other => other,
    })
}

/// serde reports no position for errors inside tagged enums; fall back to
/// the first line mentioning the offending field.
fn error_line(text: &str, err: &serde_json::Error) -> usize {
    if err.line() > 0 {
        return err.line();
    }
    let msg = err.to_string();
    let field = msg.split('`').nth(1);
    field
        .and_then(|f| {
            let quoted = format!("\"{f}\"");
            text.lines()
                .position(|l| l.contains(&quoted))
                .map(|i| i + 1)
        })
        .unwrap_or(1)
}

pub fn parse_body(path: &Path) -> Result<ConvexBody> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_body_str(&text, &path.display().to_string())
}

pub fn body_to_json(body: &ConvexBody) -> Result<String> {
    let spec = BodySpec::from_body(body)?;
    Ok(serde_json::to_string_pretty(&spec).expect("body specs serialize"))
}
