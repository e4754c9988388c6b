//! Planners for construction, decomposition and transformation sequences
//! between minimally persistent graphs.
//!
//! Every planner is deterministic: smallest ids win ties, paths are
//! breadth-first, and vertex removal prefers the `(in, out)` patterns
//! `(0,2)`, then `(1,1)`, then `(1,2)`. Plans record a snapshot after every
//! step and can be replayed independently.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, UndirectedView, VertexId};
use crate::ops::{
    self, apply, apply_reverse, apply_std_edge_split, find_rev_atyp_edge_split,
    find_rev_std_edge_split, Operation,
};
use crate::persistence::{
    check_min_persistent, dof_allocation, require_min_persistent, DofAllocation,
};
use crate::rigidity::{check_rigidity, defines_implicit_edge};

/// An operation sequence together with the graphs it passes through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub initial: DirectedGraph,
    pub steps: Vec<Operation>,
    /// Graph after each step.
    pub snapshots: Vec<DirectedGraph>,
    /// Renaming applied after the last step to obtain the final graph.
    pub relabel: BTreeMap<VertexId, VertexId>,
}

impl Plan {
    pub fn new(initial: DirectedGraph) -> Self {
        Self {
            initial,
            steps: Vec::new(),
            snapshots: Vec::new(),
            relabel: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Graph reached by the steps so far, before any relabeling.
    pub fn current(&self) -> &DirectedGraph {
        self.snapshots.last().unwrap_or(&self.initial)
    }

    /// Graph in force before step `index`.
    pub fn before(&self, index: usize) -> &DirectedGraph {
        match index {
            0 => &self.initial,
            k => &self.snapshots[k - 1],
        }
    }

    pub fn final_graph(&self) -> DirectedGraph {
        if self.relabel.is_empty() {
            self.current().clone()
        } else {
            self.current()
                .relabel(&self.relabel)
                .expect("relabeling is a bijection")
        }
    }

    /// Applies `op` to the current graph and records the result.
    pub fn push(&mut self, op: Operation) -> Result<()> {
        let next = apply(self.current(), &op)?.graph;
        self.steps.push(op);
        self.snapshots.push(next);
        Ok(())
    }

    fn extend(&mut self, other: &Plan) -> Result<()> {
        for op in &other.steps {
            self.push(op.clone())?;
        }
        Ok(())
    }

    /// Re-executes every step from `initial`, checking each intermediate
    /// graph for minimal persistence and against the recorded snapshots.
    /// Returns the final graph.
    pub fn replay(&self) -> Result<DirectedGraph> {
        let mut cur = self.initial.clone();
        for (k, op) in self.steps.iter().enumerate() {
            let diverged = |reason: String| Error::Diverged {
                step: k + 1,
                reason,
            };
            cur = apply(&cur, op).map_err(|e| diverged(e.to_string()))?.graph;
            let report = check_min_persistent(&cur).map_err(|e| diverged(e.to_string()))?;
            if let Some(v) = report.violation {
                return Err(diverged(v.to_string()));
            }
            if let Some(snap) = self.snapshots.get(k) {
                if *snap != cur {
                    return Err(diverged("graph differs from recorded snapshot".into()));
                }
            }
        }
        if self.relabel.is_empty() {
            Ok(cur)
        } else {
            cur.relabel(&self.relabel)
        }
    }

    /// Number of elementary edge reversals the plan performs once macros are
    /// lowered.
    pub fn edge_reversal_count(&self) -> Result<usize> {
        let mut total = 0;
        for (k, op) in self.steps.iter().enumerate() {
            total += apply(self.before(k), op)?.applied_edge_reversals;
        }
        Ok(total)
    }

    /// The plan run backwards: starts at the end graph and undoes every step.
    /// Relabeled plans cannot be inverted.
    pub fn inverted(&self) -> Result<Plan> {
        if !self.relabel.is_empty() {
            return Err(Error::Precondition("cannot invert a relabeled plan".into()));
        }
        let mut out = Plan::new(self.current().clone());
        for k in (0..self.steps.len()).rev() {
            out.push(self.steps[k].invert_at(self.before(k))?)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> PlanJson {
        PlanJson {
            initial: self.initial.clone(),
            steps: self.steps.clone(),
            final_graph: self.final_graph(),
            relabel: self.relabel.iter().map(|(&a, &b)| [a, b]).collect(),
        }
    }

    /// Rebuilds a plan from its serialized form by replaying it; fails if the
    /// replay diverges or does not end at the stated final graph.
    pub fn from_json(json: &PlanJson) -> Result<Plan> {
        let mut plan = Plan::new(json.initial.clone());
        plan.relabel = json.relabel.iter().map(|&[a, b]| (a, b)).collect();
        for (k, op) in json.steps.iter().enumerate() {
            plan.push(op.clone()).map_err(|e| Error::Diverged {
                step: k + 1,
                reason: e.to_string(),
            })?;
        }
        plan.replay()?;
        if plan.final_graph() != json.final_graph {
            return Err(Error::Diverged {
                step: json.steps.len(),
                reason: "final graph does not match".into(),
            });
        }
        Ok(plan)
    }
}

/// Wire form of a plan: `{"initial":..,"steps":[..],"final":..}` with an
/// optional `relabel` list of `[from, to]` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanJson {
    pub initial: DirectedGraph,
    pub steps: Vec<Operation>,
    #[serde(rename = "final")]
    pub final_graph: DirectedGraph,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relabel: Vec<[VertexId; 2]>,
}

/// The `A⁻¹` operation chosen for the next removal, if any applies.
pub fn next_removal(g: &DirectedGraph) -> Option<Operation> {
    let with_pattern = |want: (usize, usize)| {
        g.vertices()
            .filter(move |&v| g.degrees(v).ok() == Some(want))
    };
    if let Some(i) = with_pattern((0, 2)).next() {
        return Some(Operation::RevStdVertexAdd { i });
    }
    if let Some(i) = with_pattern((1, 1)).next() {
        return Some(Operation::RevAtypVertexAdd { i });
    }
    with_pattern((1, 2))
        .find_map(|i| find_rev_std_edge_split(g, i).or_else(|| find_rev_atyp_edge_split(g, i)))
}

/// Reduces `g` to a leader-follower seed with `|V| - 2` reverse operations.
pub fn decompose_a(g: &DirectedGraph) -> Result<Plan> {
    require_min_persistent(g)?;
    let mut plan = Plan::new(g.clone());
    while plan.current().vertex_count() > 2 {
        let op = next_removal(plan.current())
            .ok_or_else(|| Error::Precondition("no reverse operation applies".into()))?;
        plan.push(op)?;
    }
    Ok(plan)
}

/// Builds `target` from a leader-follower seed with forward operations.
pub fn construct_from_seed(target: &DirectedGraph) -> Result<Plan> {
    decompose_a(target)?.inverted()
}

/// Reduces `g` to a seed using edge reversals and reverse standard
/// operations only.
pub fn decompose_t(g: &DirectedGraph) -> Result<Plan> {
    require_min_persistent(g)?;
    let mut plan = Plan::new(g.clone());
    while plan.current().vertex_count() > 2 {
        let cur = plan.current().clone();
        let op = next_removal(&cur)
            .ok_or_else(|| Error::Precondition("no reverse operation applies".into()))?;
        match op {
            Operation::RevAtypVertexAdd { i } => {
                let j = cur.in_neighbors(i).next().expect("in-degree 1");
                plan.push(Operation::EdgeReversal { i: j, j: i })?;
                plan.push(Operation::RevStdVertexAdd { i })?;
            }
            Operation::RevAtypEdgeSplit {
                i,
                ref path,
                add_pair: (k, l),
            } => {
                let j = *path.last().expect("non-empty path");
                let reduced = apply_reverse(&cur, &op)?;
                let standard = apply_std_edge_split(&reduced, i, k, l, j)?;
                plan.extend(&transform_same_underlying(&cur, &standard)?)?;
                plan.push(Operation::RevStdEdgeSplit {
                    i,
                    add_pair: (k, l),
                })?;
            }
            standard => plan.push(standard)?,
        }
    }
    Ok(plan)
}

/// Moves degrees of freedom until the allocation equals `target`, using at
/// most three path reversals.
pub fn reposition_dof(g: &DirectedGraph, target: &DofAllocation) -> Result<Plan> {
    require_min_persistent(g)?;
    let same_vertices = target.0.keys().copied().eq(g.vertices());
    if !same_vertices || target.total() != 3 || target.0.values().any(|&d| d > 2) {
        return Err(Error::Precondition(format!(
            "unrealizable degree-of-freedom allocation {:?}",
            target.0
        )));
    }
    let mut plan = Plan::new(g.clone());
    loop {
        let cur = dof_allocation(plan.current());
        let needy = g.vertices().find(|&v| cur.get(v) < target.get(v));
        let donor = g.vertices().find(|&v| cur.get(v) > target.get(v));
        let (Some(i), Some(j)) = (needy, donor) else {
            break;
        };
        let path = plan
            .current()
            .directed_path(i, j)?
            .ok_or_else(|| Error::Precondition(format!("no directed path from {i} to {j}")))?;
        plan.push(Operation::PathReversal { path })?;
    }
    Ok(plan)
}

fn require_same_underlying(a: &DirectedGraph, b: &DirectedGraph) -> Result<()> {
    if a.underlying() != b.underlying() {
        return Err(Error::Precondition(
            "graphs have different underlying undirected graphs".into(),
        ));
    }
    Ok(())
}

/// Reorients `ga` into `gb` by cycle reversals of mismatched edges. Both
/// graphs must share the underlying graph and the allocation of freedoms.
pub fn align_orientations(ga: &DirectedGraph, gb: &DirectedGraph) -> Result<Plan> {
    require_min_persistent(ga)?;
    require_min_persistent(gb)?;
    require_same_underlying(ga, gb)?;
    if dof_allocation(ga) != dof_allocation(gb) {
        return Err(Error::Precondition(
            "graphs have different degree-of-freedom allocations".into(),
        ));
    }
    let mut plan = Plan::new(ga.clone());
    loop {
        let cur = plan.current().clone();
        let Some((u, v)) = cur.edges().find(|&(u, v)| !gb.has_edge(u, v)) else {
            break;
        };
        let mut walk = vec![u, v];
        let cycle = loop {
            let x = *walk.last().expect("non-empty");
            let next = cur
                .out_neighbors(x)
                .find(|&w| gb.has_edge(w, x))
                .ok_or_else(|| {
                    Error::Precondition(format!("mismatched edges at {x} do not close a cycle"))
                })?;
            if let Some(pos) = walk.iter().position(|&w| w == next) {
                break walk[pos..].to_vec();
            }
            walk.push(next);
        };
        plan.push(Operation::CycleReversal { cycle })?;
    }
    Ok(plan)
}

/// Edge reversals turning `ga` into `gb` (same underlying graph); every
/// intermediate graph is minimally persistent.
pub fn transform_same_underlying(ga: &DirectedGraph, gb: &DirectedGraph) -> Result<Plan> {
    if ga.vertices().ne(gb.vertices()) {
        return Err(Error::Precondition(
            "graphs have different vertex sets".into(),
        ));
    }
    require_same_underlying(ga, gb)?;
    require_min_persistent(ga)?;
    require_min_persistent(gb)?;
    let reposition = reposition_dof(ga, &dof_allocation(gb))?;
    let align = align_orientations(reposition.current(), gb)?;
    let mut plan = Plan::new(ga.clone());
    for macro_plan in [&reposition, &align] {
        for (k, op) in macro_plan.steps.iter().enumerate() {
            for step in ops::lower(macro_plan.before(k), op)? {
                plan.push(step)?;
            }
        }
    }
    Ok(plan)
}

/// Operation family used by [`transform_general`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpSet {
    /// Atypical and standard operations and their inverses.
    A,
    /// Standard operations, their inverses, and edge reversals.
    T,
}

/// Transforms any minimally persistent graph into any other by going
/// through a leader-follower seed. When the two seeds live on different
/// vertex pairs, the construction half is run on renamed vertices and the
/// plan carries the renaming back.
pub fn transform_general(ga: &DirectedGraph, gb: &DirectedGraph, set: OpSet) -> Result<Plan> {
    require_min_persistent(ga)?;
    require_min_persistent(gb)?;
    if ga == gb {
        return Ok(Plan::new(ga.clone()));
    }
    let (mut plan, build) = match set {
        OpSet::A => (decompose_a(ga)?, construct_from_seed(gb)?),
        OpSet::T => (decompose_t(ga)?, decompose_t(gb)?.inverted()?),
    };
    let (x, y) = single_edge(plan.current());
    let (c, d) = single_edge(&build.initial);

    if set == OpSet::T && (c, d) == (y, x) {
        plan.push(Operation::EdgeReversal { i: x, j: y })?;
    }
    let rename = if (c, d) == (x, y) || (set == OpSet::T && (c, d) == (y, x)) {
        BTreeMap::new()
    } else {
        seed_renaming(&build.final_graph(), (c, d), (x, y))
    };
    let f = |v: VertexId| rename.get(&v).copied().unwrap_or(v);
    for op in &build.steps {
        plan.push(op.map_vertices(f))?;
    }
    plan.relabel = rename.iter().map(|(&from, &to)| (to, from)).collect();
    Ok(plan)
}

fn single_edge(seed: &DirectedGraph) -> (VertexId, VertexId) {
    seed.edges().next().expect("seed has one edge")
}

/// Injective renaming of `g`'s vertices sending the seed edge `from` onto
/// `onto`; vertices displaced by the seed take the ids it frees up. Only
/// non-identity entries are returned.
fn seed_renaming(
    g: &DirectedGraph,
    from: (VertexId, VertexId),
    onto: (VertexId, VertexId),
) -> BTreeMap<VertexId, VertexId> {
    let mut map = BTreeMap::from([(from.0, onto.0), (from.1, onto.1)]);
    let targets: BTreeSet<_> = [onto.0, onto.1].into();
    let sources: BTreeSet<_> = [from.0, from.1].into();
    let displaced = g
        .vertices()
        .filter(|v| targets.contains(v) && !sources.contains(v));
    let freed = sources.difference(&targets).copied();
    map.extend(displaced.zip(freed));
    map.retain(|a, b| a != b);
    map
}

/// One vertex removal in an undirected reverse Henneberg sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Removal {
    Degree2 {
        v: VertexId,
        a: VertexId,
        b: VertexId,
    },
    Degree3 {
        v: VertexId,
        neighbors: [VertexId; 3],
        joined: (VertexId, VertexId),
    },
}

fn henneberg_removal(uv: &UndirectedView) -> Result<Option<Removal>> {
    if let Some(v) = uv.vertices().find(|&v| uv.degree(v) == 2) {
        let ns = uv.neighbors(v);
        return Ok(Some(Removal::Degree2 {
            v,
            a: ns[0],
            b: ns[1],
        }));
    }
    for v in uv.vertices().filter(|&v| uv.degree(v) == 3) {
        let ns = uv.neighbors(v);
        let mut rest = uv.clone();
        rest.remove_vertex(v)?;
        for (p, q) in [(ns[0], ns[1]), (ns[0], ns[2]), (ns[1], ns[2])] {
            if !rest.contains_edge(p, q) && !defines_implicit_edge(&rest, p, q)? {
                return Ok(Some(Removal::Degree3 {
                    v,
                    neighbors: [ns[0], ns[1], ns[2]],
                    joined: (p, q),
                }));
            }
        }
    }
    Ok(None)
}

/// Orients a minimally rigid graph as a minimally persistent one by
/// replaying an undirected Henneberg sequence with directed standard
/// operations from a leader-follower seed.
pub fn orient_min_rigid(uv: &UndirectedView) -> Result<(DirectedGraph, Plan)> {
    if !check_rigidity(uv)?.is_minimally_rigid {
        return Err(Error::NotMinimallyRigid);
    }
    let mut cur = uv.clone();
    let mut removals = Vec::new();
    while cur.vertex_count() > 2 {
        let removal = henneberg_removal(&cur)?
            .ok_or_else(|| Error::Precondition("no Henneberg removal applies".into()))?;
        match &removal {
            Removal::Degree2 { v, .. } => cur.remove_vertex(*v)?,
            Removal::Degree3 { v, joined, .. } => {
                cur.remove_vertex(*v)?;
                cur.add_edge(joined.0, joined.1)?;
            }
        }
        removals.push(removal);
    }
    let (leader, follower) = cur.edges().next().expect("K2 remains");
    let mut plan = Plan::new(DirectedGraph::from_edges([(follower, leader)])?);
    for removal in removals.iter().rev() {
        let op = match *removal {
            Removal::Degree2 { v, a, b } => Operation::StdVertexAdd { new: v, j: a, k: b },
            Removal::Degree3 {
                v,
                neighbors,
                joined: (p, q),
            } => {
                let (j, k) = if plan.current().has_edge(p, q) {
                    (p, q)
                } else {
                    (q, p)
                };
                let l = neighbors
                    .into_iter()
                    .find(|&w| w != p && w != q)
                    .expect("three neighbors");
                Operation::StdEdgeSplit { new: v, j, k, l }
            }
        };
        plan.push(op)?;
    }
    Ok((plan.current().clone(), plan))
}
