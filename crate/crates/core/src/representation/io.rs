use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CsRep, EnvelopeRep, InnerSet, TouchingRep};
use crate::geometry::{BoxNd, Rational};
use crate::graph::{Clique, Graph};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParseMode {
    /// Unknown fields are errors.
    #[default]
    Strict,
    /// Unknown fields are returned as warnings.
    Lax,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("{message} (at `{path}`, line {line}, column {column})")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown fields: {}", .0.join(", "))]
    UnknownFields(Vec<String>),
}

/// Parses JSON into `T`, reporting the failing field path and position.
/// Unknown fields are rejected in strict mode and returned as warnings in
/// lax mode.
pub fn from_json_str<T: DeserializeOwned>(
    text: &str,
    mode: ParseMode,
) -> Result<(T, Vec<String>), CertificateError> {
    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let value = {
        let mut record = |path: serde_ignored::Path| unknown.push(path.to_string());
        let ignoring = serde_ignored::Deserializer::new(&mut de, &mut record);
        serde_path_to_error::deserialize(ignoring)
    };
    let value: T = value.map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CertificateError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| CertificateError::Parse {
        path: ".".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if mode == ParseMode::Strict && !unknown.is_empty() {
        return Err(CertificateError::UnknownFields(unknown));
    }
    Ok((value, unknown))
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("certificates serialize infallibly")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    Touching,
    CliqueSum,
    Envelope,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Touching(TouchingRep),
    CliqueSum(CsRep),
    Envelope(EnvelopeRep),
}

impl Certificate {
    pub fn kind(&self) -> CertificateKind {
        match self {
            Certificate::Touching(_) => CertificateKind::Touching,
            Certificate::CliqueSum(_) => CertificateKind::CliqueSum,
            Certificate::Envelope(_) => CertificateKind::Envelope,
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            Certificate::Touching(r) => to_json_string(r),
            Certificate::CliqueSum(c) => to_json_string(c),
            Certificate::Envelope(e) => to_json_string(e),
        }
    }
}

/// Reads any certificate, recognizing clique-sum certificates by their
/// `clique_points` key and envelopes by their `order` key.
pub fn read_certificate(
    text: &str,
    mode: ParseMode,
) -> Result<(Certificate, Vec<String>), CertificateError> {
    let probe: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CertificateError::Parse {
            path: ".".into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let has = |k: &str| probe.get(k).is_some();
    if has("clique_points") {
        read_cs_rep(text, mode).map(|(c, w)| (Certificate::CliqueSum(c), w))
    } else if has("order") {
        read_envelope_rep(text, mode).map(|(e, w)| (Certificate::Envelope(e), w))
    } else {
        read_touching_rep(text, mode).map(|(r, w)| (Certificate::Touching(r), w))
    }
}

pub fn read_touching_rep(
    text: &str,
    mode: ParseMode,
) -> Result<(TouchingRep, Vec<String>), CertificateError> {
    from_json_str(text, mode)
}

pub fn read_cs_rep(text: &str, mode: ParseMode) -> Result<(CsRep, Vec<String>), CertificateError> {
    from_json_str(text, mode)
}

pub fn read_envelope_rep(
    text: &str,
    mode: ParseMode,
) -> Result<(EnvelopeRep, Vec<String>), CertificateError> {
    from_json_str(text, mode)
}

fn per_vertex<T>(n: usize, map: BTreeMap<usize, T>, what: &str) -> Result<Vec<T>, String> {
    if map.len() != n || map.keys().enumerate().any(|(i, &k)| i != k) {
        return Err(format!(
            "{what} must be given for exactly the vertices 0..{n}"
        ));
    }
    Ok(map.into_values().collect())
}

fn indexed<T: Clone>(items: &[T]) -> BTreeMap<usize, T> {
    items.iter().cloned().enumerate().collect()
}

#[derive(Serialize, Deserialize)]
struct TouchingRepFile {
    graph: Graph,
    dim: usize,
    boxes: BTreeMap<usize, BoxNd>,
}

impl TryFrom<TouchingRepFile> for TouchingRep {
    type Error = String;
    fn try_from(f: TouchingRepFile) -> Result<Self, String> {
        let boxes = per_vertex(f.graph.n(), f.boxes, "boxes")?;
        TouchingRep::new(f.graph, f.dim, boxes).map_err(|e| e.to_string())
    }
}

impl From<TouchingRep> for TouchingRepFile {
    fn from(r: TouchingRep) -> Self {
        TouchingRepFile {
            boxes: indexed(&r.boxes),
            graph: r.graph,
            dim: r.dim,
        }
    }
}

impl Serialize for TouchingRep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TouchingRepFile::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TouchingRep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        TouchingRepFile::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CliquePoint {
    clique: Clique,
    point: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct CsRepFile {
    graph: Graph,
    dim: usize,
    boxes: BTreeMap<usize, BoxNd>,
    root: Clique,
    root_dims: BTreeMap<usize, usize>,
    epsilon: Rational,
    clique_points: Vec<CliquePoint>,
}

impl Serialize for CsRep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CsRepFile {
            graph: self.base.graph.clone(),
            dim: self.base.dim,
            boxes: indexed(&self.base.boxes),
            root: self.root.clone(),
            root_dims: self.root_dims.clone(),
            epsilon: self.epsilon.clone(),
            clique_points: self
                .clique_points
                .iter()
                .map(|(c, p)| CliquePoint {
                    clique: c.clone(),
                    point: p.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CsRep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let f = CsRepFile::deserialize(d)?;
        let base = TouchingRep::try_from(TouchingRepFile {
            graph: f.graph,
            dim: f.dim,
            boxes: f.boxes,
        })
        .map_err(D::Error::custom)?;
        let mut clique_points = BTreeMap::new();
        for cp in f.clique_points {
            if clique_points.insert(cp.clique.clone(), cp.point).is_some() {
                return Err(D::Error::custom(format!(
                    "clique {:?} listed twice",
                    cp.clique
                )));
            }
        }
        Ok(CsRep {
            base,
            root: f.root,
            root_dims: f.root_dims,
            clique_points,
            epsilon: f.epsilon,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct EnvelopeRepFile {
    graph: Graph,
    dim: usize,
    order: Vec<usize>,
    inner: BTreeMap<usize, InnerSet>,
    outer: BTreeMap<usize, BoxNd>,
    s: u64,
    t: u64,
}

impl Serialize for EnvelopeRep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        EnvelopeRepFile {
            graph: self.graph.clone(),
            dim: self.dim,
            order: self.order.clone(),
            inner: indexed(&self.inner),
            outer: indexed(&self.outer),
            s: self.s,
            t: self.t,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EnvelopeRep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let f = EnvelopeRepFile::deserialize(d)?;
        let n = f.graph.n();
        Ok(EnvelopeRep {
            inner: per_vertex(n, f.inner, "inner sets").map_err(D::Error::custom)?,
            outer: per_vertex(n, f.outer, "outer boxes").map_err(D::Error::custom)?,
            graph: f.graph,
            dim: f.dim,
            order: f.order,
            s: f.s,
            t: f.t,
        })
    }
}
