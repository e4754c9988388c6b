//! Persistence-preserving graph operations.
//!
//! Forward operations grow a minimally persistent graph by one vertex
//! (standard and atypical vertex addition and edge splitting), reverse
//! operations remove one, and edge/path/cycle reversals move degrees of
//! freedom around without touching the underlying undirected graph. Every
//! operation refuses inputs that are not minimally persistent.
//!
//! Path and cycle reversals are macros: [`lower`] expands them into
//! elementary edge reversals ordered so that every intermediate graph stays
//! minimally persistent.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, VertexId};
use crate::persistence::require_min_persistent;
use crate::rigidity::defines_implicit_edge;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", content = "args")]
pub enum Operation {
    /// Add `new` with edges `(new, j)` and `(new, k)`.
    StdVertexAdd {
        new: VertexId,
        j: VertexId,
        k: VertexId,
    },
    /// Replace `(j, k)` by `(j, new)`, `(new, k)` and add `(new, l)`.
    StdEdgeSplit {
        new: VertexId,
        j: VertexId,
        k: VertexId,
        l: VertexId,
    },
    /// Replace `(i, j)` by `(j, i)`.
    EdgeReversal {
        i: VertexId,
        j: VertexId,
    },
    /// Reverse every edge of a directed path; a closed path is a cycle.
    PathReversal {
        path: Vec<VertexId>,
    },
    /// Reverse every edge of the directed cycle `c0 -> c1 -> ... -> c0`.
    CycleReversal {
        cycle: Vec<VertexId>,
    },
    /// Add `new` with edges `(j, new)` and `(new, k)`.
    AtypVertexAdd {
        new: VertexId,
        j: VertexId,
        k: VertexId,
    },
    /// Remove `(k, l)`, add `new` with `(j, new)`, `(new, k)`, `(new, l)` and
    /// reverse the directed path `j -> ... -> k`.
    AtypEdgeSplit {
        new: VertexId,
        j: VertexId,
        k: VertexId,
        l: VertexId,
        path: Vec<VertexId>,
    },
    RevStdVertexAdd {
        i: VertexId,
    },
    RevStdEdgeSplit {
        i: VertexId,
        #[serde(rename = "addPair")]
        add_pair: (VertexId, VertexId),
    },
    RevAtypVertexAdd {
        i: VertexId,
    },
    /// Remove `i`, reverse `path` (from `k` to the in-neighbor `j` of `i`)
    /// and add `add_pair = (k, l)`.
    RevAtypEdgeSplit {
        i: VertexId,
        path: Vec<VertexId>,
        #[serde(rename = "addPair")]
        add_pair: (VertexId, VertexId),
    },
}

impl Operation {
    pub fn kind(&self) -> &'static str {
        match self {
            Operation::StdVertexAdd { .. } => "StdVertexAdd",
            Operation::StdEdgeSplit { .. } => "StdEdgeSplit",
            Operation::EdgeReversal { .. } => "EdgeReversal",
            Operation::PathReversal { .. } => "PathReversal",
            Operation::CycleReversal { .. } => "CycleReversal",
            Operation::AtypVertexAdd { .. } => "AtypVertexAdd",
            Operation::AtypEdgeSplit { .. } => "AtypEdgeSplit",
            Operation::RevStdVertexAdd { .. } => "RevStdVertexAdd",
            Operation::RevStdEdgeSplit { .. } => "RevStdEdgeSplit",
            Operation::RevAtypVertexAdd { .. } => "RevAtypVertexAdd",
            Operation::RevAtypEdgeSplit { .. } => "RevAtypEdgeSplit",
        }
    }

    pub fn is_reverse(&self) -> bool {
        matches!(
            self,
            Operation::RevStdVertexAdd { .. }
                | Operation::RevStdEdgeSplit { .. }
                | Operation::RevAtypVertexAdd { .. }
                | Operation::RevAtypEdgeSplit { .. }
        )
    }

    /// Operations that add a vertex.
    pub fn is_forward(&self) -> bool {
        matches!(
            self,
            Operation::StdVertexAdd { .. }
                | Operation::StdEdgeSplit { .. }
                | Operation::AtypVertexAdd { .. }
                | Operation::AtypEdgeSplit { .. }
        )
    }

    /// Reversals of edges, paths or cycles.
    pub fn is_reversal(&self) -> bool {
        matches!(
            self,
            Operation::EdgeReversal { .. }
                | Operation::PathReversal { .. }
                | Operation::CycleReversal { .. }
        )
    }

    /// Inverse operation when it is determined by the parameters alone.
    /// Removal operations that do not record the removed vertex's
    /// neighborhood need [`Operation::invert_at`].
    pub fn invert(&self) -> Option<Operation> {
        let rev = |p: &[VertexId]| p.iter().rev().copied().collect::<Vec<_>>();
        Some(match self {
            Operation::StdVertexAdd { new, .. } => Operation::RevStdVertexAdd { i: *new },
            Operation::StdEdgeSplit { new, j, k, .. } => Operation::RevStdEdgeSplit {
                i: *new,
                add_pair: (*j, *k),
            },
            Operation::EdgeReversal { i, j } => Operation::EdgeReversal { i: *j, j: *i },
            Operation::PathReversal { path } => Operation::PathReversal { path: rev(path) },
            Operation::CycleReversal { cycle } => Operation::CycleReversal { cycle: rev(cycle) },
            Operation::AtypVertexAdd { new, .. } => Operation::RevAtypVertexAdd { i: *new },
            Operation::AtypEdgeSplit {
                new, k, l, path, ..
            } => Operation::RevAtypEdgeSplit {
                i: *new,
                path: rev(path),
                add_pair: (*k, *l),
            },
            Operation::RevAtypEdgeSplit { i, path, add_pair } => Operation::AtypEdgeSplit {
                new: *i,
                j: *path.last()?,
                k: add_pair.0,
                l: add_pair.1,
                path: rev(path),
            },
            Operation::RevStdVertexAdd { .. }
            | Operation::RevStdEdgeSplit { .. }
            | Operation::RevAtypVertexAdd { .. } => return None,
        })
    }

    /// Inverse of `self` as applied to `before`, so that
    /// `apply(apply(before, self), inverse) == before`.
    pub fn invert_at(&self, before: &DirectedGraph) -> Result<Operation> {
        if let Some(op) = self.invert() {
            return Ok(op);
        }
        let outs = |i: VertexId| -> Result<Vec<VertexId>> {
            before.require(i)?;
            Ok(before.out_neighbors(i).collect())
        };
        let shape =
            |what: &str| Error::Precondition(format!("{what} has the wrong degree pattern"));
        match *self {
            Operation::RevStdVertexAdd { i } => match outs(i)?[..] {
                [j, k] => Ok(Operation::StdVertexAdd { new: i, j, k }),
                _ => Err(shape("removed vertex")),
            },
            Operation::RevAtypVertexAdd { i } => {
                let ins: Vec<_> = before.in_neighbors(i).collect();
                match (&ins[..], &outs(i)?[..]) {
                    (&[j], &[k]) => Ok(Operation::AtypVertexAdd { new: i, j, k }),
                    _ => Err(shape("removed vertex")),
                }
            }
            Operation::RevStdEdgeSplit {
                i,
                add_pair: (j, x),
            } => {
                let l = outs(i)?
                    .into_iter()
                    .find(|&w| w != x)
                    .ok_or_else(|| shape("split vertex"))?;
                Ok(Operation::StdEdgeSplit { new: i, j, k: x, l })
            }
            _ => unreachable!("handled by invert"),
        }
    }
}

impl Operation {
    /// Same operation with every vertex id passed through `f`.
    pub fn map_vertices(&self, f: impl Fn(VertexId) -> VertexId) -> Operation {
        let p = |path: &[VertexId]| path.iter().map(|&v| f(v)).collect::<Vec<_>>();
        match self {
            Operation::StdVertexAdd { new, j, k } => Operation::StdVertexAdd {
                new: f(*new),
                j: f(*j),
                k: f(*k),
            },
            Operation::StdEdgeSplit { new, j, k, l } => Operation::StdEdgeSplit {
                new: f(*new),
                j: f(*j),
                k: f(*k),
                l: f(*l),
            },
            Operation::EdgeReversal { i, j } => Operation::EdgeReversal { i: f(*i), j: f(*j) },
            Operation::PathReversal { path } => Operation::PathReversal { path: p(path) },
            Operation::CycleReversal { cycle } => Operation::CycleReversal { cycle: p(cycle) },
            Operation::AtypVertexAdd { new, j, k } => Operation::AtypVertexAdd {
                new: f(*new),
                j: f(*j),
                k: f(*k),
            },
            Operation::AtypEdgeSplit { new, j, k, l, path } => Operation::AtypEdgeSplit {
                new: f(*new),
                j: f(*j),
                k: f(*k),
                l: f(*l),
                path: p(path),
            },
            Operation::RevStdVertexAdd { i } => Operation::RevStdVertexAdd { i: f(*i) },
            Operation::RevStdEdgeSplit { i, add_pair } => Operation::RevStdEdgeSplit {
                i: f(*i),
                add_pair: (f(add_pair.0), f(add_pair.1)),
            },
            Operation::RevAtypVertexAdd { i } => Operation::RevAtypVertexAdd { i: f(*i) },
            Operation::RevAtypEdgeSplit { i, path, add_pair } => Operation::RevAtypEdgeSplit {
                i: f(*i),
                path: p(path),
                add_pair: (f(add_pair.0), f(add_pair.1)),
            },
        }
    }
}

impl std::fmt::Display for Operation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let json = serde_json::to_string(self).map_err(|_| std::fmt::Error)?;
        f.write_str(&json)
    }
}

/// Result of applying an operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpOutcome {
    pub graph: DirectedGraph,
    /// Elementary edge reversals performed (macros are lowered).
    pub applied_edge_reversals: usize,
}

impl OpOutcome {
    fn plain(graph: DirectedGraph) -> Self {
        Self {
            graph,
            applied_edge_reversals: 0,
        }
    }
}

fn reject(reason: impl Into<String>) -> Error {
    Error::Precondition(reason.into())
}

fn fresh(g: &DirectedGraph, new: VertexId) -> Result<()> {
    if g.contains_vertex(new) {
        Err(Error::VertexExists(new))
    } else {
        Ok(())
    }
}

fn require_edge(g: &DirectedGraph, u: VertexId, v: VertexId) -> Result<()> {
    if g.has_edge(u, v) {
        Ok(())
    } else {
        Err(Error::MissingEdge(u, v))
    }
}

fn require_dof(g: &DirectedGraph, v: VertexId) -> Result<()> {
    if g.dof(v)? >= 1 {
        Ok(())
    } else {
        Err(reject(format!("vertex {v} has no degree of freedom")))
    }
}

/// Checks that `path` is a simple directed walk in `g`. A closed path
/// (first == last, at least three edges) is accepted when `allow_closed`.
fn require_path(g: &DirectedGraph, path: &[VertexId], allow_closed: bool) -> Result<()> {
    let Some(&first) = path.first() else {
        return Err(reject("empty path"));
    };
    for &v in path {
        g.require(v)?;
    }
    let closed = path.len() > 1 && path.last() == Some(&first);
    let body = if closed {
        &path[..path.len() - 1]
    } else {
        path
    };
    if closed && (!allow_closed || body.len() < 3) {
        return Err(reject(format!("path {path:?} is not simple")));
    }
    let distinct: BTreeSet<_> = body.iter().collect();
    if distinct.len() != body.len() {
        return Err(reject(format!("path {path:?} is not simple")));
    }
    for w in path.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return Err(reject(format!(
                "path {path:?} is broken: edge ({},{}) missing",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn reverse_path_edges(g: &mut DirectedGraph, path: &[VertexId]) -> Result<()> {
    for w in path.windows(2) {
        g.reverse_edge(w[0], w[1])?;
    }
    Ok(())
}

pub fn apply_std_vertex_add(
    g: &DirectedGraph,
    new: VertexId,
    j: VertexId,
    k: VertexId,
) -> Result<DirectedGraph> {
    require_min_persistent(g)?;
    if j == k {
        return Err(reject("vertex addition needs two distinct neighbors"));
    }
    g.require(j)?;
    g.require(k)?;
    fresh(g, new)?;
    let mut out = g.clone();
    out.add_vertex(new)?;
    out.add_edge(new, j)?;
    out.add_edge(new, k)?;
    Ok(out)
}

pub fn apply_std_edge_split(
    g: &DirectedGraph,
    new: VertexId,
    j: VertexId,
    k: VertexId,
    l: VertexId,
) -> Result<DirectedGraph> {
    require_min_persistent(g)?;
    require_edge(g, j, k)?;
    g.require(l)?;
    if l == j || l == k {
        return Err(reject(format!("third neighbor {l} lies on the split edge")));
    }
    fresh(g, new)?;
    let mut out = g.clone();
    out.remove_edge(j, k)?;
    out.add_vertex(new)?;
    out.add_edge(j, new)?;
    out.add_edge(new, k)?;
    out.add_edge(new, l)?;
    Ok(out)
}

pub fn apply_edge_reversal(g: &DirectedGraph, i: VertexId, j: VertexId) -> Result<DirectedGraph> {
    require_min_persistent(g)?;
    require_edge(g, i, j)?;
    require_dof(g, j)?;
    let mut out = g.clone();
    out.reverse_edge(i, j)?;
    Ok(out)
}

/// Edge reversals implementing a path reversal, last edge first.
pub fn lower_path_reversal(
    g: &DirectedGraph,
    path: &[VertexId],
) -> Result<Vec<(VertexId, VertexId)>> {
    require_path(g, path, true)?;
    if path.len() == 1 {
        return Ok(Vec::new());
    }
    require_dof(g, *path.last().expect("non-empty"))?;
    Ok(path.windows(2).rev().map(|w| (w[0], w[1])).collect())
}

fn normalize_cycle(cycle: &[VertexId]) -> Vec<VertexId> {
    let mut c = cycle.to_vec();
    if c.len() > 1 && c.first() == c.last() {
        c.pop();
    }
    c
}

fn require_cycle(g: &DirectedGraph, cycle: &[VertexId]) -> Result<()> {
    if cycle.len() < 3 {
        return Err(reject(format!("{cycle:?} is not a directed cycle")));
    }
    let mut closed = cycle.to_vec();
    closed.push(cycle[0]);
    require_path(g, &closed, true)
}

/// Edge reversals implementing a cycle reversal. If a cycle vertex has a
/// degree of freedom the cycle is reversed as a closed path through it;
/// otherwise a degree of freedom is borrowed from outside the cycle along
/// a path `P`, the cycle is reversed, and `P` is reversed back.
pub fn lower_cycle_reversal(
    g: &DirectedGraph,
    cycle: &[VertexId],
) -> Result<Vec<(VertexId, VertexId)>> {
    require_min_persistent(g)?;
    let cycle = normalize_cycle(cycle);
    require_cycle(g, &cycle)?;
    let closed_through = |start: VertexId| {
        let pos = cycle.iter().position(|&v| v == start).expect("on cycle");
        let mut p: Vec<_> = cycle[pos..].iter().chain(&cycle[..pos]).copied().collect();
        p.push(start);
        p
    };
    let dof_on_cycle = cycle
        .iter()
        .copied()
        .filter(|&v| g.dof(v).unwrap_or(0) >= 1)
        .min();
    if let Some(start) = dof_on_cycle {
        return lower_path_reversal(g, &closed_through(start));
    }

    let on_cycle: BTreeSet<_> = cycle.iter().copied().collect();
    let anchor = *on_cycle.first().expect("non-empty");
    let donor = g
        .vertices()
        .find(|&v| !on_cycle.contains(&v) && g.dof(v).unwrap_or(0) >= 1)
        .ok_or_else(|| reject("no degree of freedom available off the cycle"))?;
    let to_donor = g
        .directed_path(anchor, donor)?
        .ok_or_else(|| reject(format!("no directed path from {anchor} to {donor}")))?;
    let last_on_cycle = to_donor
        .iter()
        .rposition(|v| on_cycle.contains(v))
        .expect("path starts on the cycle");
    let borrow = to_donor[last_on_cycle..].to_vec();
    let entry = borrow[0];

    let mut steps = Vec::new();
    let mut cur = g.clone();
    let mut run = |cur: &mut DirectedGraph, path: &[VertexId]| -> Result<()> {
        for (u, v) in lower_path_reversal(cur, path)? {
            cur.reverse_edge(u, v)?;
            steps.push((u, v));
        }
        Ok(())
    };
    run(&mut cur, &borrow)?;
    run(&mut cur, &closed_through(entry))?;
    let back: Vec<_> = borrow.iter().rev().copied().collect();
    run(&mut cur, &back)?;
    Ok(steps)
}

fn apply_reversals(g: &DirectedGraph, steps: &[(VertexId, VertexId)]) -> Result<OpOutcome> {
    let mut cur = g.clone();
    for &(u, v) in steps {
        cur = apply_edge_reversal(&cur, u, v)?;
    }
    Ok(OpOutcome {
        graph: cur,
        applied_edge_reversals: steps.len(),
    })
}

pub fn apply_path_reversal(g: &DirectedGraph, path: &[VertexId]) -> Result<OpOutcome> {
    require_min_persistent(g)?;
    let steps = lower_path_reversal(g, path)?;
    apply_reversals(g, &steps)
}

pub fn apply_cycle_reversal(g: &DirectedGraph, cycle: &[VertexId]) -> Result<OpOutcome> {
    let steps = lower_cycle_reversal(g, cycle)?;
    apply_reversals(g, &steps)
}

pub fn apply_atyp_vertex_add(
    g: &DirectedGraph,
    new: VertexId,
    j: VertexId,
    k: VertexId,
) -> Result<DirectedGraph> {
    require_min_persistent(g)?;
    if j == k {
        return Err(reject("vertex addition needs two distinct neighbors"));
    }
    g.require(k)?;
    require_dof(g, j)?;
    fresh(g, new)?;
    let mut out = g.clone();
    out.add_vertex(new)?;
    out.add_edge(j, new)?;
    out.add_edge(new, k)?;
    Ok(out)
}

pub fn apply_atyp_edge_split(
    g: &DirectedGraph,
    new: VertexId,
    j: VertexId,
    k: VertexId,
    l: VertexId,
    path: &[VertexId],
) -> Result<DirectedGraph> {
    require_min_persistent(g)?;
    require_edge(g, k, l)?;
    g.require(j)?;
    if j == k || j == l {
        return Err(reject(format!(
            "path origin {j} must differ from the split edge endpoints"
        )));
    }
    require_path(g, path, false)?;
    if path.first() != Some(&j) || path.last() != Some(&k) {
        return Err(reject(format!(
            "path {path:?} does not lead from {j} to {k}"
        )));
    }
    fresh(g, new)?;
    let mut out = g.clone();
    out.remove_edge(k, l)?;
    reverse_path_edges(&mut out, path)?;
    out.add_vertex(new)?;
    out.add_edge(j, new)?;
    out.add_edge(new, k)?;
    out.add_edge(new, l)?;
    Ok(out)
}

/// Atypical edge splitting along the breadth-first path from `j` to `k`.
pub fn apply_atyp_edge_split_default(
    g: &DirectedGraph,
    new: VertexId,
    j: VertexId,
    k: VertexId,
    l: VertexId,
) -> Result<(DirectedGraph, Operation)> {
    let path = g
        .directed_path(j, k)?
        .ok_or_else(|| reject(format!("no directed path from {j} to {k}")))?;
    let graph = apply_atyp_edge_split(g, new, j, k, l, &path)?;
    Ok((graph, Operation::AtypEdgeSplit { new, j, k, l, path }))
}

fn degree_pattern(g: &DirectedGraph, i: VertexId, want: (usize, usize)) -> Result<()> {
    let got = g.degrees(i)?;
    if got == want {
        Ok(())
    } else {
        Err(reject(format!(
            "vertex {i} has (in,out) = {got:?}, expected {want:?}"
        )))
    }
}

/// The pair `(u, v)` may be joined in `h` without overbracing it.
fn require_free_pair(h: &DirectedGraph, u: VertexId, v: VertexId) -> Result<()> {
    if h.adjacent(u, v) {
        return Err(reject(format!("pair ({u},{v}) is an explicit edge")));
    }
    if defines_implicit_edge(&h.underlying(), u, v)? {
        return Err(reject(format!("pair ({u},{v}) is an implicit edge")));
    }
    Ok(())
}

/// Decides whether a reverse operation applies to `g`; the error carries
/// the reason when it does not.
pub fn validate_reverse(g: &DirectedGraph, op: &Operation) -> Result<()> {
    require_min_persistent(g)?;
    if g.vertex_count() < 3 {
        return Err(reject("cannot remove a vertex from a two-vertex graph"));
    }
    match op {
        Operation::RevStdVertexAdd { i } => degree_pattern(g, *i, (0, 2)),
        Operation::RevAtypVertexAdd { i } => degree_pattern(g, *i, (1, 1)),
        Operation::RevStdEdgeSplit {
            i,
            add_pair: (j, x),
        } => {
            degree_pattern(g, *i, (1, 2))?;
            if !g.has_edge(*j, *i) {
                return Err(reject(format!("{j} is not the in-neighbor of {i}")));
            }
            if !g.has_edge(*i, *x) {
                return Err(reject(format!("{x} is not an out-neighbor of {i}")));
            }
            require_free_pair(&g.without_vertex(*i)?, *j, *x)
        }
        Operation::RevAtypEdgeSplit {
            i,
            path,
            add_pair: (k, l),
        } => {
            degree_pattern(g, *i, (1, 2))?;
            let j = g.in_neighbors(*i).next().expect("in-degree 1");
            if k == l || !g.has_edge(*i, *k) || !g.has_edge(*i, *l) {
                return Err(reject(format!(
                    "({k},{l}) are not the out-neighbors of {i}"
                )));
            }
            let h = g.without_vertex(*i)?;
            require_path(&h, path, false)?;
            if path.first() != Some(k) || path.last() != Some(&j) {
                return Err(reject(format!(
                    "path {path:?} does not lead from {k} to {j}"
                )));
            }
            require_free_pair(&h, *k, *l)
        }
        other => Err(reject(format!(
            "{} is not a reverse operation",
            other.kind()
        ))),
    }
}

pub fn apply_reverse(g: &DirectedGraph, op: &Operation) -> Result<DirectedGraph> {
    validate_reverse(g, op)?;
    let mut out = g.clone();
    match op {
        Operation::RevStdVertexAdd { i } | Operation::RevAtypVertexAdd { i } => {
            out.remove_vertex(*i)?;
        }
        Operation::RevStdEdgeSplit {
            i,
            add_pair: (j, x),
        } => {
            out.remove_vertex(*i)?;
            out.add_edge(*j, *x)?;
        }
        Operation::RevAtypEdgeSplit {
            i,
            path,
            add_pair: (k, l),
        } => {
            out.remove_vertex(*i)?;
            reverse_path_edges(&mut out, path)?;
            out.add_edge(*k, *l)?;
        }
        _ => unreachable!("validated"),
    }
    Ok(out)
}

/// First valid reverse standard edge splitting on `i`, trying the
/// smaller out-neighbor first.
pub fn find_rev_std_edge_split(g: &DirectedGraph, i: VertexId) -> Option<Operation> {
    let j = g.in_neighbors(i).next()?;
    g.out_neighbors(i)
        .map(|x| Operation::RevStdEdgeSplit {
            i,
            add_pair: (j, x),
        })
        .find(|op| validate_reverse(g, op).is_ok())
}

/// First valid reverse atypical edge splitting on `i`: the breadth-first
/// path to the in-neighbor is searched from the smaller out-neighbor first.
pub fn find_rev_atyp_edge_split(g: &DirectedGraph, i: VertexId) -> Option<Operation> {
    if g.degrees(i).ok()? != (1, 2) {
        return None;
    }
    let j = g.in_neighbors(i).next()?;
    let outs: Vec<_> = g.out_neighbors(i).collect();
    let h = g.without_vertex(i).ok()?;
    [(outs[0], outs[1]), (outs[1], outs[0])]
        .into_iter()
        .filter_map(|(k, l)| {
            let path = h.directed_path(k, j).ok()??;
            Some(Operation::RevAtypEdgeSplit {
                i,
                path,
                add_pair: (k, l),
            })
        })
        .find(|op| validate_reverse(g, op).is_ok())
}

/// Applies any operation, lowering macros to edge reversals.
pub fn apply(g: &DirectedGraph, op: &Operation) -> Result<OpOutcome> {
    match op {
        Operation::StdVertexAdd { new, j, k } => {
            apply_std_vertex_add(g, *new, *j, *k).map(OpOutcome::plain)
        }
        Operation::StdEdgeSplit { new, j, k, l } => {
            apply_std_edge_split(g, *new, *j, *k, *l).map(OpOutcome::plain)
        }
        Operation::EdgeReversal { i, j } => apply_edge_reversal(g, *i, *j).map(|graph| OpOutcome {
            graph,
            applied_edge_reversals: 1,
        }),
        Operation::PathReversal { path } => apply_path_reversal(g, path),
        Operation::CycleReversal { cycle } => apply_cycle_reversal(g, cycle),
        Operation::AtypVertexAdd { new, j, k } => {
            apply_atyp_vertex_add(g, *new, *j, *k).map(OpOutcome::plain)
        }
        Operation::AtypEdgeSplit { new, j, k, l, path } => {
            apply_atyp_edge_split(g, *new, *j, *k, *l, path).map(OpOutcome::plain)
        }
        reverse => apply_reverse(g, reverse).map(OpOutcome::plain),
    }
}

/// Elementary edge reversals realizing a reversal operation.
pub fn lower(g: &DirectedGraph, op: &Operation) -> Result<Vec<Operation>> {
    let steps = match op {
        Operation::EdgeReversal { i, j } => vec![(*i, *j)],
        Operation::PathReversal { path } => {
            require_min_persistent(g)?;
            lower_path_reversal(g, path)?
        }
        Operation::CycleReversal { cycle } => lower_cycle_reversal(g, cycle)?,
        other => return Err(reject(format!("{} cannot be lowered", other.kind()))),
    };
    Ok(steps
        .into_iter()
        .map(|(i, j)| Operation::EdgeReversal { i, j })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::{dof_allocation, is_min_persistent, DofAllocation};

    fn g(edges: &[(VertexId, VertexId)]) -> DirectedGraph {
        DirectedGraph::from_edges(edges.iter().copied()).unwrap()
    }

    fn seed() -> DirectedGraph {
        g(&[(2, 1)])
    }

    fn triangle() -> DirectedGraph {
        g(&[(2, 1), (3, 1), (3, 2)])
    }

    fn cycle3() -> DirectedGraph {
        g(&[(1, 2), (2, 3), (3, 1)])
    }

    fn split5() -> DirectedGraph {
        g(&[(2, 1), (3, 1), (3, 4), (4, 2), (4, 1)])
    }

    #[test]
    fn std_vertex_add() {
        let out = apply_std_vertex_add(&seed(), 3, 1, 2).unwrap();
        assert_eq!(out, triangle());
        assert_eq!(
            dof_allocation(&out),
            DofAllocation::from([(1, 2), (2, 1), (3, 0)])
        );
        assert!(matches!(
            apply_std_vertex_add(&seed(), 3, 1, 1),
            Err(Error::Precondition(_))
        ));
        assert_eq!(
            apply_std_vertex_add(&seed(), 2, 1, 2),
            Err(Error::VertexExists(2))
        );
        let flexible = g(&[(1, 2), (2, 3)]);
        assert!(matches!(
            apply_std_vertex_add(&flexible, 4, 1, 2),
            Err(Error::NotMinimallyPersistent(_))
        ));
    }

    #[test]
    fn std_edge_split() {
        let out = apply_std_edge_split(&triangle(), 4, 3, 2, 1).unwrap();
        assert_eq!(out, split5());
        assert!(is_min_persistent(&out));
        assert_eq!(out.out_degree(3).unwrap(), 2);
        assert_eq!(
            apply_std_edge_split(&triangle(), 4, 1, 2, 3),
            Err(Error::MissingEdge(1, 2))
        );
        assert!(apply_std_edge_split(&triangle(), 4, 3, 2, 2).is_err());
        assert_eq!(
            apply_std_edge_split(&triangle(), 3, 3, 2, 1),
            Err(Error::VertexExists(3))
        );
    }

    #[test]
    fn edge_reversal() {
        let out = apply_edge_reversal(&triangle(), 2, 1).unwrap();
        assert_eq!(out, g(&[(1, 2), (3, 1), (3, 2)]));
        assert_eq!(out.dof(1).unwrap(), 1);
        assert_eq!(out.dof(2).unwrap(), 2);
        // dof(2) = 1 in the triangle, so this one is allowed
        assert!(apply_edge_reversal(&triangle(), 3, 2).is_ok());
        // 4 already keeps two distances, so it cannot take over (3,4)
        assert_eq!(split5().dof(4).unwrap(), 0);
        assert!(matches!(
            apply_edge_reversal(&split5(), 3, 4),
            Err(Error::Precondition(_))
        ));
        assert_eq!(
            apply_edge_reversal(&triangle(), 1, 2),
            Err(Error::MissingEdge(1, 2))
        );
        let back = apply_edge_reversal(&out, 1, 2).unwrap();
        assert_eq!(back, triangle());
    }

    #[test]
    fn path_reversal() {
        let out = apply_path_reversal(&triangle(), &[3, 2, 1]).unwrap();
        assert_eq!(out.graph, cycle3());
        assert_eq!(out.applied_edge_reversals, 2);
        assert_eq!(
            dof_allocation(&out.graph),
            DofAllocation::from([(1, 1), (2, 1), (3, 1)])
        );
        let id = apply_path_reversal(&triangle(), &[2]).unwrap();
        assert_eq!((id.graph, id.applied_edge_reversals), (triangle(), 0));
        let closed = apply_path_reversal(&cycle3(), &[1, 2, 3, 1]).unwrap();
        assert_eq!(closed.graph, g(&[(2, 1), (3, 2), (1, 3)]));
        assert_eq!(dof_allocation(&closed.graph), dof_allocation(&cycle3()));
        assert!(apply_path_reversal(&triangle(), &[1, 2]).is_err());
        assert!(apply_path_reversal(&triangle(), &[3, 1, 3]).is_err());
        // terminal vertex 4 has no freedom
        assert!(matches!(
            apply_path_reversal(&split5(), &[3, 4]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn path_reversal_order_matters() {
        // 3 has out-degree 2, so reversing (4,3) before (3,1) is illegal
        let h = g(&[(2, 1), (3, 1), (3, 2), (4, 3), (4, 2)]);
        assert!(is_min_persistent(&h));
        let steps = lower_path_reversal(&h, &[4, 3, 1]).unwrap();
        assert_eq!(steps, vec![(3, 1), (4, 3)]);
        assert!(apply_path_reversal(&h, &[4, 3, 1]).is_ok());
        assert!(apply_edge_reversal(&h, 4, 3).is_err());
    }

    #[test]
    fn cycle_reversal() {
        let out = apply_cycle_reversal(&cycle3(), &[1, 2, 3]).unwrap();
        assert_eq!(out.graph, g(&[(2, 1), (3, 2), (1, 3)]));
        assert_eq!(out.applied_edge_reversals, 3);
        let back = apply_cycle_reversal(&out.graph, &[3, 2, 1]).unwrap();
        assert_eq!(back.graph, cycle3());
        assert!(apply_cycle_reversal(&cycle3(), &[1, 3, 2]).is_err());
        assert!(apply_cycle_reversal(&cycle3(), &[1, 2]).is_err());
    }

    #[test]
    fn cycle_reversal_borrows_outside_freedom() {
        // 1->2->3->1 with every cycle vertex at out-degree 2; 4 and 5 hold the freedoms
        let h = g(&[(1, 2), (2, 3), (3, 1), (1, 4), (2, 4), (3, 5), (4, 5)]);
        assert!(is_min_persistent(&h));
        let steps = lower_cycle_reversal(&h, &[1, 2, 3]).unwrap();
        // borrow path [1,4]: 1 + 3 + 1 reversals
        assert_eq!(steps.len(), 3 + 2);
        let out = apply_cycle_reversal(&h, &[1, 2, 3]).unwrap();
        assert_eq!(
            out.graph,
            g(&[(2, 1), (3, 2), (1, 3), (1, 4), (2, 4), (3, 5), (4, 5)])
        );
        assert_eq!(dof_allocation(&out.graph), dof_allocation(&h));
    }

    #[test]
    fn atyp_vertex_add() {
        let out = apply_atyp_vertex_add(&seed(), 3, 1, 2).unwrap();
        assert_eq!(out, g(&[(2, 1), (1, 3), (3, 2)]));
        assert_eq!(
            dof_allocation(&out),
            DofAllocation::from([(1, 1), (2, 1), (3, 1)])
        );
        assert!(matches!(
            apply_atyp_vertex_add(&triangle(), 4, 3, 1),
            Err(Error::Precondition(_))
        ));
        // standard addition then reversal of the edge into j
        let std = apply_std_vertex_add(&seed(), 3, 2, 1).unwrap();
        assert_eq!(apply_edge_reversal(&std, 3, 1).unwrap(), out);
    }

    #[test]
    fn atyp_edge_split() {
        let out = apply_atyp_edge_split(&cycle3(), 4, 2, 3, 1, &[2, 3]).unwrap();
        assert_eq!(out, g(&[(1, 2), (3, 2), (2, 4), (4, 3), (4, 1)]));
        assert_eq!(
            dof_allocation(&out),
            DofAllocation::from([(1, 1), (2, 1), (3, 1), (4, 0)])
        );
        assert!(is_min_persistent(&out));
        assert_eq!(
            apply_atyp_edge_split(&cycle3(), 4, 2, 1, 3, &[2, 3, 1]),
            Err(Error::MissingEdge(1, 3))
        );
        assert!(apply_atyp_edge_split(&cycle3(), 4, 3, 3, 1, &[3]).is_err());
        assert!(apply_atyp_edge_split(&cycle3(), 4, 2, 3, 1, &[2, 1, 3]).is_err());
        let (dflt, op) = apply_atyp_edge_split_default(&cycle3(), 4, 2, 3, 1).unwrap();
        assert_eq!(dflt, out);
        assert_eq!(
            op.invert().unwrap(),
            Operation::RevAtypEdgeSplit {
                i: 4,
                path: vec![3, 2],
                add_pair: (3, 1)
            }
        );
    }

    #[test]
    fn validate_reverse_cases() {
        assert!(validate_reverse(&triangle(), &Operation::RevStdVertexAdd { i: 3 }).is_ok());
        for i in 1..=3 {
            assert!(validate_reverse(&cycle3(), &Operation::RevStdVertexAdd { i }).is_err());
        }
        assert!(validate_reverse(&cycle3(), &Operation::RevAtypVertexAdd { i: 3 }).is_ok());
        let s = split5();
        assert!(validate_reverse(
            &s,
            &Operation::RevStdEdgeSplit {
                i: 4,
                add_pair: (3, 2)
            }
        )
        .is_ok());
        let err = validate_reverse(
            &s,
            &Operation::RevStdEdgeSplit {
                i: 4,
                add_pair: (3, 1),
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("explicit"), "{err}");
        assert!(validate_reverse(&s, &Operation::EdgeReversal { i: 2, j: 1 }).is_err());
        assert!(validate_reverse(&seed(), &Operation::RevAtypVertexAdd { i: 1 }).is_err());
    }

    #[test]
    fn apply_reverse_cases() {
        assert_eq!(
            apply_reverse(&triangle(), &Operation::RevStdVertexAdd { i: 3 }).unwrap(),
            seed()
        );
        assert_eq!(
            apply_reverse(&cycle3(), &Operation::RevAtypVertexAdd { i: 3 }).unwrap(),
            g(&[(1, 2)])
        );
        assert_eq!(
            apply_reverse(
                &split5(),
                &Operation::RevStdEdgeSplit {
                    i: 4,
                    add_pair: (3, 2)
                }
            )
            .unwrap(),
            triangle()
        );
        let atyp = g(&[(1, 2), (3, 2), (2, 4), (4, 3), (4, 1)]);
        let op = find_rev_atyp_edge_split(&atyp, 4).unwrap();
        assert_eq!(
            op,
            Operation::RevAtypEdgeSplit {
                i: 4,
                path: vec![1, 2],
                add_pair: (1, 3)
            }
        );
        assert_eq!(
            apply_reverse(&atyp, &op).unwrap(),
            g(&[(2, 1), (3, 2), (1, 3)])
        );
        let via_k = Operation::RevAtypEdgeSplit {
            i: 4,
            path: vec![3, 2],
            add_pair: (3, 1),
        };
        assert_eq!(apply_reverse(&atyp, &via_k).unwrap(), cycle3());
    }

    #[test]
    fn inversions() {
        assert_eq!(
            Operation::EdgeReversal { i: 1, j: 2 }.invert(),
            Some(Operation::EdgeReversal { i: 2, j: 1 })
        );
        assert_eq!(
            Operation::StdVertexAdd { new: 3, j: 1, k: 2 }.invert(),
            Some(Operation::RevStdVertexAdd { i: 3 })
        );
        assert_eq!(Operation::RevStdVertexAdd { i: 3 }.invert(), None);
        assert_eq!(
            Operation::RevStdVertexAdd { i: 3 }
                .invert_at(&triangle())
                .unwrap(),
            Operation::StdVertexAdd { new: 3, j: 1, k: 2 }
        );
        let rev = Operation::RevStdEdgeSplit {
            i: 4,
            add_pair: (3, 2),
        };
        let fwd = rev.invert_at(&split5()).unwrap();
        assert_eq!(
            fwd,
            Operation::StdEdgeSplit {
                new: 4,
                j: 3,
                k: 2,
                l: 1
            }
        );
        assert_eq!(apply(&triangle(), &fwd).unwrap().graph, split5());
    }

    #[test]
    fn round_trips() {
        let cases: Vec<(DirectedGraph, Operation)> = vec![
            (seed(), Operation::StdVertexAdd { new: 3, j: 1, k: 2 }),
            (
                triangle(),
                Operation::StdEdgeSplit {
                    new: 4,
                    j: 3,
                    k: 2,
                    l: 1,
                },
            ),
            (triangle(), Operation::EdgeReversal { i: 2, j: 1 }),
            (
                triangle(),
                Operation::PathReversal {
                    path: vec![3, 2, 1],
                },
            ),
            (
                cycle3(),
                Operation::CycleReversal {
                    cycle: vec![1, 2, 3],
                },
            ),
            (seed(), Operation::AtypVertexAdd { new: 3, j: 1, k: 2 }),
            (
                cycle3(),
                Operation::AtypEdgeSplit {
                    new: 4,
                    j: 2,
                    k: 3,
                    l: 1,
                    path: vec![2, 3],
                },
            ),
            (triangle(), Operation::RevStdVertexAdd { i: 3 }),
            (cycle3(), Operation::RevAtypVertexAdd { i: 2 }),
            (
                split5(),
                Operation::RevStdEdgeSplit {
                    i: 4,
                    add_pair: (3, 2),
                },
            ),
        ];
        for (before, op) in cases {
            let after = apply(&before, &op).unwrap().graph;
            assert!(is_min_persistent(&after), "{op}");
            let inv = op.invert_at(&before).unwrap();
            assert_eq!(apply(&after, &inv).unwrap().graph, before, "{op}");
        }
    }

    #[test]
    fn operation_json() {
        let op = Operation::RevStdEdgeSplit {
            i: 4,
            add_pair: (3, 2),
        };
        let s = serde_json::to_string(&op).unwrap();
        assert_eq!(
            s,
            r#"{"op":"RevStdEdgeSplit","args":{"i":4,"addPair":[3,2]}}"#
        );
        assert_eq!(serde_json::from_str::<Operation>(&s).unwrap(), op);
        let s = serde_json::to_string(&Operation::StdVertexAdd { new: 3, j: 1, k: 2 }).unwrap();
        assert_eq!(s, r#"{"op":"StdVertexAdd","args":{"new":3,"j":1,"k":2}}"#);
    }

    #[test]
    fn lowering_macros() {
        let steps = lower(
            &triangle(),
            &Operation::PathReversal {
                path: vec![3, 2, 1],
            },
        )
        .unwrap();
        assert_eq!(
            steps,
            vec![
                Operation::EdgeReversal { i: 2, j: 1 },
                Operation::EdgeReversal { i: 3, j: 2 }
            ]
        );
        assert!(lower(&triangle(), &Operation::RevStdVertexAdd { i: 3 }).is_err());
    }
}
