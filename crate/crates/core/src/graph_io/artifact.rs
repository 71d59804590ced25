//! Versioned JSON container for preprocessing output.
//!
//! Layout (`version` 1):
//!
//! ```json
//! {
//!   "version": 1,
//!   "fingerprint": "<sha256 hex of graph, delta, eps, algorithm version>",
//!   "delta": 0.02,
//!   "eps": { "e1": 0.01, "e2": 0.01 },
//!   "lines": [ { "a": .., "b": .. }, .. ],
//!   "clusters": [ { "id": 0, "line": {..}, "vertices": [..], "boundary": [..] }, .. ],
//!   "super_edges": [ { "cluster": 0, "from": 3, "to": 9,
//!                      "cost": { "c1": .., "c2": .. }, "apex": { .. },
//!                      "path": [edge ids] | null }, .. ]
//! }
//! ```
//!
//! Only non-trivial clusters are stored; trivial ones are implied.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BiGraph, GraphError};
use crate::cost::{Eps, Line2D, VertexId};
use crate::icca::SuperEdge;

pub const ARTIFACT_VERSION: u32 = 1;

/// Bumped whenever preprocessing output for identical inputs may change.
const ALGORITHM_VERSION: &str = "corrpath-preproc-1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub id: u32,
    pub line: Line2D,
    pub vertices: Vec<VertexId>,
    pub boundary: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocArtifact {
    pub version: u32,
    pub fingerprint: String,
    pub delta: f64,
    pub eps: Eps,
    pub lines: Vec<Line2D>,
    pub clusters: Vec<ClusterRecord>,
    pub super_edges: Vec<SuperEdge>,
}

impl PreprocArtifact {
    pub fn empty(fingerprint: String, delta: f64, eps: Eps) -> Self {
        PreprocArtifact {
            version: ARTIFACT_VERSION,
            fingerprint,
            delta,
            eps,
            lines: Vec::new(),
            clusters: Vec::new(),
            super_edges: Vec::new(),
        }
    }

    /// Checks super-edge bounds, cluster disjointness and id references.
    pub fn validate(&self) -> Result<(), GraphError> {
        let bad = |msg: String| Err(GraphError::ArtifactInvariant(msg));
        let mut seen = HashSet::new();
        for (i, c) in self.clusters.iter().enumerate() {
            if c.id as usize != i {
                return bad(format!("cluster {i} has id {}", c.id));
            }
            for v in &c.vertices {
                if !seen.insert(*v) {
                    return bad(format!("vertex {v} belongs to more than one cluster"));
                }
            }
        }
        for (k, se) in self.super_edges.iter().enumerate() {
            if se.cluster as usize >= self.clusters.len() {
                return bad(format!("super-edge {k} references missing cluster {}", se.cluster));
            }
            if !se.apex.le(se.cost) {
                return bad(format!("super-edge {k}: apex {} exceeds cost {}", se.apex, se.cost));
            }
            if !se.is_eps_bounded(self.eps) {
                return bad(format!(
                    "super-edge {k}: cost {} not within {} of apex {}",
                    se.cost, self.eps, se.apex
                ));
            }
        }
        Ok(())
    }
}

/// Identifies the graph and parameters an artifact was built from.
pub fn fingerprint(g: &BiGraph, delta: f64, eps: Eps) -> String {
    let mut h = Sha256::new();
    h.update(ALGORITHM_VERSION.as_bytes());
    h.update((g.vertex_count() as u64).to_le_bytes());
    h.update((g.edge_count() as u64).to_le_bytes());
    for e in g.edges() {
        h.update(e.source.0.to_le_bytes());
        h.update(e.target.0.to_le_bytes());
        h.update(e.cost.c1.to_bits().to_le_bytes());
        h.update(e.cost.c2.to_bits().to_le_bytes());
    }
    h.update(delta.to_bits().to_le_bytes());
    h.update(eps.e1.to_bits().to_le_bytes());
    h.update(eps.e2.to_bits().to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn save_artifact<W: Write>(a: &PreprocArtifact, mut w: W) -> Result<(), GraphError> {
    a.validate()?;
    serde_json::to_writer(&mut w, a)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_artifact<R: Read>(r: R) -> Result<PreprocArtifact, GraphError> {
    let value: serde_json::Value = serde_json::from_reader(r)?;
    let version = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if version != ARTIFACT_VERSION {
        return Err(GraphError::ArtifactVersion {
            found: version,
            expected: ARTIFACT_VERSION,
        });
    }
    let a: PreprocArtifact = serde_json::from_value(value)?;
    a.validate()?;
    Ok(a)
}
