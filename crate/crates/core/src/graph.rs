//! Directed graphs with stable integer vertex ids, degree and
//! degree-of-freedom accounting, and the direction-erased view.
//!
//! Vertices carry the out-degree convention used throughout the crate:
//! an edge `(i, j)` means `i` keeps its distance to `j`, so it counts
//! towards the out-degree of `i`. A vertex has `max(0, 2 - out)` degrees
//! of freedom.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;

/// A simple directed graph: no self-loops and at most one edge per
/// ordered pair. Anti-parallel pairs are representable; the rigidity and
/// persistence checks reject them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct DirectedGraph {
    out: BTreeMap<VertexId, BTreeSet<VertexId>>,
    inc: BTreeMap<VertexId, BTreeSet<VertexId>>,
    edge_count: usize,
}

impl DirectedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from an explicit vertex set and edge list.
    pub fn from_parts(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let mut g = Self::new();
        for v in vertices {
            g.add_vertex(v)?;
        }
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Builds a graph whose vertex set is exactly the set of edge endpoints.
    pub fn from_edges(edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let mut g = Self::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            g.ensure_vertex(u);
            g.ensure_vertex(v);
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    fn ensure_vertex(&mut self, v: VertexId) {
        self.out.entry(v).or_default();
        self.inc.entry(v).or_default();
    }

    pub fn add_vertex(&mut self, v: VertexId) -> Result<()> {
        if self.out.contains_key(&v) {
            return Err(Error::VertexExists(v));
        }
        self.ensure_vertex(v);
        Ok(())
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        self.require(u)?;
        self.require(v)?;
        if !self.out.get_mut(&u).expect("checked").insert(v) {
            return Err(Error::DuplicateEdge(u, v));
        }
        self.inc.get_mut(&v).expect("checked").insert(u);
        self.edge_count += 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        let removed = self.out.get_mut(&u).is_some_and(|s| s.remove(&v));
        if !removed {
            return Err(Error::MissingEdge(u, v));
        }
        self.inc.get_mut(&v).expect("endpoint").remove(&u);
        self.edge_count -= 1;
        Ok(())
    }

    /// Removes a vertex together with all incident edges.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<()> {
        let outs = self.out.remove(&v).ok_or(Error::UnknownVertex(v))?;
        let ins = self.inc.remove(&v).expect("paired maps");
        for w in &outs {
            self.inc.get_mut(w).expect("endpoint").remove(&v);
        }
        for w in &ins {
            self.out.get_mut(w).expect("endpoint").remove(&v);
        }
        self.edge_count -= outs.len() + ins.len();
        Ok(())
    }

    /// Replaces the edge `(u, v)` by `(v, u)`.
    pub fn reverse_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        if self.has_edge(v, u) {
            return Err(Error::DuplicateEdge(v, u));
        }
        self.remove_edge(u, v)?;
        self.add_edge(v, u)
    }

    pub(crate) fn require(&self, v: VertexId) -> Result<()> {
        if self.out.contains_key(&v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.out.contains_key(&v)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.out.get(&u).is_some_and(|s| s.contains(&v))
    }

    /// True if the two vertices are joined in either direction.
    pub fn adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.has_edge(u, v) || self.has_edge(v, u)
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Vertices in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.out.keys().copied()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.out
            .iter()
            .flat_map(|(&u, outs)| outs.iter().map(move |&v| (u, v)))
    }

    /// Out-neighbors in ascending order.
    pub fn out_neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.out.get(&v).into_iter().flatten().copied()
    }

    /// In-neighbors in ascending order.
    pub fn in_neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.inc.get(&v).into_iter().flatten().copied()
    }

    /// `(in_degree, out_degree)` of `v`.
    pub fn degrees(&self, v: VertexId) -> Result<(usize, usize)> {
        match (self.inc.get(&v), self.out.get(&v)) {
            (Some(i), Some(o)) => Ok((i.len(), o.len())),
            _ => Err(Error::UnknownVertex(v)),
        }
    }

    pub fn out_degree(&self, v: VertexId) -> Result<usize> {
        self.degrees(v).map(|(_, o)| o)
    }

    pub fn in_degree(&self, v: VertexId) -> Result<usize> {
        self.degrees(v).map(|(i, _)| i)
    }

    /// Degrees of freedom of `v`: `max(0, 2 - out_degree)`.
    pub fn dof(&self, v: VertexId) -> Result<u8> {
        self.out_degree(v).map(dof_of_out_degree)
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Smallest id larger than every present id (1 for the empty graph).
    pub fn next_vertex_id(&self) -> VertexId {
        self.out.keys().next_back().map_or(1, |&m| m + 1)
    }

    /// Anti-parallel pairs `(u, v)` with `u < v` where both directions are present.
    pub fn anti_parallel_pairs(&self) -> Vec<(VertexId, VertexId)> {
        self.edges()
            .filter(|&(u, v)| u < v && self.has_edge(v, u))
            .collect()
    }

    /// Shortest directed path from `from` to `to` following edge
    /// directions; breadth-first with smallest-id neighbors explored first.
    /// `from == to` yields the trivial path `[from]`.
    pub fn directed_path(&self, from: VertexId, to: VertexId) -> Result<Option<Vec<VertexId>>> {
        self.directed_path_avoiding(from, to, &BTreeSet::new())
    }

    pub(crate) fn directed_path_avoiding(
        &self,
        from: VertexId,
        to: VertexId,
        avoid: &BTreeSet<VertexId>,
    ) -> Result<Option<Vec<VertexId>>> {
        self.require(from)?;
        self.require(to)?;
        if from == to {
            return Ok(Some(vec![from]));
        }
        let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(u) = queue.pop_front() {
            for w in self.out_neighbors(u) {
                if avoid.contains(&w) || !seen.insert(w) {
                    continue;
                }
                parent.insert(w, u);
                if w == to {
                    let mut path = vec![to];
                    let mut cur = to;
                    while let Some(&p) = parent.get(&cur) {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return Ok(Some(path));
                }
                queue.push_back(w);
            }
        }
        Ok(None)
    }

    /// All vertices reachable from `from` along directed edges, `from` included.
    pub fn reachable_from(&self, from: VertexId) -> Result<BTreeSet<VertexId>> {
        self.require(from)?;
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            for w in self.out_neighbors(u) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        Ok(seen)
    }

    pub fn underlying(&self) -> UndirectedView {
        UndirectedView {
            vertices: self.vertices().collect(),
            edges: self.edges().map(|(u, v)| ordered(u, v)).collect(),
        }
    }

    /// Copy of the graph without `v` and its incident edges.
    pub fn without_vertex(&self, v: VertexId) -> Result<Self> {
        let mut g = self.clone();
        g.remove_vertex(v)?;
        Ok(g)
    }

    /// Applies an injective relabeling; ids absent from `map` stay put.
    pub fn relabel(&self, map: &BTreeMap<VertexId, VertexId>) -> Result<Self> {
        let f = |v: VertexId| map.get(&v).copied().unwrap_or(v);
        Self::from_parts(
            self.vertices().map(f),
            self.edges().map(|(u, v)| (f(u), f(v))),
        )
    }
}

/// Identical vertex sets and identical directed edge sets.
pub fn labeled_equal(a: &DirectedGraph, b: &DirectedGraph) -> bool {
    a == b
}

pub(crate) fn dof_of_out_degree(out: usize) -> u8 {
    2usize.saturating_sub(out) as u8
}

pub(crate) fn ordered(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Direction-erased view of a graph. Edges are stored as `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct UndirectedView {
    vertices: BTreeSet<VertexId>,
    edges: BTreeSet<(VertexId, VertexId)>,
}

impl UndirectedView {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let vertices: BTreeSet<_> = vertices.into_iter().collect();
        let mut view = Self {
            vertices,
            edges: BTreeSet::new(),
        };
        for (u, v) in edges {
            view.add_edge(u, v)?;
        }
        Ok(view)
    }

    pub fn from_edges(edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let edges: Vec<_> = edges.into_iter().collect();
        let vertices = edges.iter().flat_map(|&(u, v)| [u, v]);
        Self::new(vertices.collect::<Vec<_>>(), edges)
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        for w in [u, v] {
            if !self.vertices.contains(&w) {
                return Err(Error::UnknownVertex(w));
            }
        }
        if !self.edges.insert(ordered(u, v)) {
            return Err(Error::DuplicateEdge(u, v));
        }
        Ok(())
    }

    pub fn remove_vertex(&mut self, v: VertexId) -> Result<()> {
        if !self.vertices.remove(&v) {
            return Err(Error::UnknownVertex(v));
        }
        self.edges.retain(|&(a, b)| a != v && b != v);
        Ok(())
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn contains_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edges.contains(&ordered(u, v))
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut ns: Vec<_> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| match (a == v, b == v) {
                (true, _) => Some(b),
                (_, true) => Some(a),
                _ => None,
            })
            .collect();
        ns.sort_unstable();
        ns
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<VertexId>,
    edges: Vec<[VertexId; 2]>,
}

impl Serialize for DirectedGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson {
            vertices: self.vertices().collect(),
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DirectedGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphJson::deserialize(d)?;
        DirectedGraph::from_parts(raw.vertices, raw.edges.into_iter().map(|[u, v]| (u, v)))
            .map_err(serde::de::Error::custom)
    }
}
