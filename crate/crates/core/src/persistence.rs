//! Minimal persistence: a minimally rigid underlying graph and no vertex
//! with out-degree above two.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{dof_of_out_degree, DirectedGraph, VertexId};
use crate::rigidity::{analyze_rigidity, RigidityVerdict};

/// Degrees of freedom per vertex.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct DofAllocation(pub BTreeMap<VertexId, u8>);

impl DofAllocation {
    pub fn total(&self) -> u32 {
        self.0.values().map(|&d| d as u32).sum()
    }

    pub fn get(&self, v: VertexId) -> u8 {
        self.0.get(&v).copied().unwrap_or(0)
    }
}

impl<const N: usize> From<[(VertexId, u8); N]> for DofAllocation {
    fn from(pairs: [(VertexId, u8); N]) -> Self {
        DofAllocation(pairs.into_iter().collect())
    }
}

pub fn dof_allocation(g: &DirectedGraph) -> DofAllocation {
    DofAllocation(
        g.vertices()
            .map(|v| (v, dof_of_out_degree(g.out_degree(v).expect("own vertex"))))
            .collect(),
    )
}

/// Why a graph fails minimal persistence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Violation {
    /// A vertex keeps more than two distance constraints.
    #[serde(rename_all = "camelCase")]
    OutDegree { vertex: VertexId, out_degree: usize },
    /// Both `(u, v)` and `(v, u)` are present.
    AntiParallel { from: VertexId, to: VertexId },
    /// The listed edges overbrace the vertices they span.
    Overbraced { edges: Vec<(VertexId, VertexId)> },
    /// Too few independent edges to be rigid.
    #[serde(rename_all = "camelCase")]
    Flexible { rank: usize, required: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::OutDegree { vertex, out_degree } => {
                write!(f, "vertex {vertex} has out-degree {out_degree} > 2")
            }
            Violation::AntiParallel { from, to } => {
                write!(f, "anti-parallel edges between {from} and {to}")
            }
            Violation::Overbraced { edges } => {
                write!(f, "edges {edges:?} violate the Laman count")
            }
            Violation::Flexible { rank, required } => {
                write!(f, "rigidity rank {rank} below required {required}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PersistenceReport {
    #[serde(serialize_with = "verdict_json")]
    pub rigidity: RigidityVerdict,
    pub max_out_degree: usize,
    pub is_minimally_persistent: bool,
    pub dof: DofAllocation,
    pub violation: Option<Violation>,
}

fn verdict_json<S: serde::Serializer>(
    v: &RigidityVerdict,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("RigidityVerdict", 3)?;
    st.serialize_field("rank", &v.rank)?;
    st.serialize_field("isRigid", &v.is_rigid)?;
    st.serialize_field("isMinimallyRigid", &v.is_minimally_rigid)?;
    st.end()
}

pub fn check_min_persistent(g: &DirectedGraph) -> Result<PersistenceReport> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::TooFewVertices(n));
    }
    let analysis = analyze_rigidity(&g.underlying())?;
    let max_out_degree = g.max_out_degree();
    let anti = g.anti_parallel_pairs();

    let violation = if let Some(vertex) = g.vertices().find(|&v| g.out_degree(v).unwrap() > 2) {
        Some(Violation::OutDegree {
            vertex,
            out_degree: g.out_degree(vertex)?,
        })
    } else if let Some(&(from, to)) = anti.first() {
        Some(Violation::AntiParallel { from, to })
    } else if let Some(((u, v), block)) = analysis.first_dependent {
        Some(Violation::Overbraced {
            edges: overbraced_edges(g, (u, v), &block),
        })
    } else if !analysis.verdict.is_rigid {
        Some(Violation::Flexible {
            rank: analysis.verdict.rank,
            required: 2 * n - 3,
        })
    } else {
        None
    };

    Ok(PersistenceReport {
        rigidity: analysis.verdict,
        max_out_degree,
        is_minimally_persistent: violation.is_none(),
        dof: dof_allocation(g),
        violation,
    })
}

/// Edges of `g` inside the rigid block, which already hold the rejected pair.
fn overbraced_edges(
    g: &DirectedGraph,
    rejected: (VertexId, VertexId),
    block: &BTreeSet<VertexId>,
) -> Vec<(VertexId, VertexId)> {
    let mut edges: Vec<_> = g
        .underlying()
        .edges()
        .filter(|(a, b)| block.contains(a) && block.contains(b))
        .collect();
    if !edges.contains(&rejected) {
        edges.push(rejected);
        edges.sort_unstable();
    }
    edges
}

pub fn is_min_persistent(g: &DirectedGraph) -> bool {
    check_min_persistent(g).is_ok_and(|r| r.is_minimally_persistent)
}

/// Fails with the first violation when `g` is not minimally persistent.
pub fn require_min_persistent(g: &DirectedGraph) -> Result<()> {
    let report =
        check_min_persistent(g).map_err(|e| Error::NotMinimallyPersistent(e.to_string()))?;
    match report.violation {
        None => Ok(()),
        Some(v) => Err(Error::NotMinimallyPersistent(v.to_string())),
    }
}
