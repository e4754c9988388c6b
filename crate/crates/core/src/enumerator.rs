//! Exhaustive and random generation of minimally rigid and minimally
//! persistent graphs on labeled vertex sets `{1..n}`.
//!
//! Minimally rigid graphs are grown by forward Henneberg steps. A labeled
//! graph on `{1..n}` always has a removable vertex `v`, so expanding every
//! graph on `{1..n-1}` after shifting its labels past every possible `v`
//! reaches all of them; duplicates are folded with a bitmask set.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, UndirectedView, VertexId};
use crate::ops::{find_rev_std_edge_split, validate_reverse, Operation};
use crate::persistence::{dof_allocation, DofAllocation};
use crate::sequencer::Plan;

pub const MAX_RIGID_N: usize = 7;
pub const MAX_PERSISTENT_N: usize = 6;

fn check_range(what: &'static str, n: usize, max: usize) -> Result<()> {
    if (2..=max).contains(&n) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: n,
            min: 2,
            max,
        })
    }
}

/// Index of the pair `{a, b}` (1-based labels, `a < b`) in a bitmask.
fn pair_bit(a: usize, b: usize) -> u32 {
    debug_assert!(a < b);
    let (a, b) = (a - 1, b - 1);
    1 << (b * (b - 1) / 2 + a)
}

fn mask_edges(mask: u32, n: usize) -> impl Iterator<Item = (usize, usize)> {
    (2..=n)
        .flat_map(|b| (1..b).map(move |a| (a, b)))
        .filter(move |&(a, b)| mask & pair_bit(a, b) != 0)
}

fn mask_to_view(mask: u32, n: usize) -> UndirectedView {
    UndirectedView::new(
        1..=n as VertexId,
        mask_edges(mask, n).map(|(a, b)| (a as VertexId, b as VertexId)),
    )
    .expect("labels in range")
}

/// All Henneberg successors of `mask` (on `{1..m-1}`) on `{1..m}`.
fn expand(mask: u32, m: usize) -> Vec<u32> {
    let mut out = Vec::new();
    for v in 1..=m {
        let shift = |x: usize| if x < v { x } else { x + 1 };
        let edges: Vec<_> = mask_edges(mask, m - 1)
            .map(|(a, b)| (shift(a), shift(b)))
            .collect();
        let base = edges.iter().fold(0, |acc, &(a, b)| acc | pair_bit(a, b));
        let join = |x: usize| {
            if x < v {
                pair_bit(x, v)
            } else {
                pair_bit(v, x)
            }
        };
        let others: Vec<_> = (1..=m).filter(|&x| x != v).collect();
        for (s, &a) in others.iter().enumerate() {
            for &b in &others[s + 1..] {
                out.push(base | join(a) | join(b));
            }
        }
        for &(a, b) in &edges {
            for &c in others.iter().filter(|&&c| c != a && c != b) {
                out.push((base & !pair_bit(a, b)) | join(a) | join(b) | join(c));
            }
        }
    }
    out
}

fn rigid_masks(n: usize) -> Vec<u32> {
    let mut level = vec![pair_bit(1, 2)];
    for m in 3..=n {
        let next: HashSet<u32> = level
            .par_iter()
            .flat_map_iter(|&mask| expand(mask, m))
            .collect();
        level = next.into_iter().collect();
    }
    level.sort_unstable_by_key(|&mask| mask_edges(mask, n).collect::<Vec<_>>());
    level
}

/// Every labeled minimally rigid graph on `{1..n}`, ordered by edge list.
pub fn enumerate_min_rigid(n: usize) -> Result<Vec<UndirectedView>> {
    check_range("vertex count", n, MAX_RIGID_N)?;
    Ok(rigid_masks(n)
        .into_iter()
        .map(|m| mask_to_view(m, n))
        .collect())
}

/// A corpus member stored compactly; vertices are `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub edges: Vec<(VertexId, VertexId)>,
    /// Degrees of freedom of vertex `v` at index `v - 1`.
    pub dof: Vec<u8>,
    /// No reverse standard operation applies.
    pub s_inverse_stuck: bool,
}

impl CorpusEntry {
    pub fn graph(&self) -> DirectedGraph {
        let n = self.dof.len() as VertexId;
        DirectedGraph::from_parts(1..=n, self.edges.iter().copied())
            .expect("corpus graphs are simple")
    }

    pub fn dof_allocation(&self) -> DofAllocation {
        DofAllocation((1..).zip(self.dof.iter().copied()).collect())
    }
}

/// All minimally persistent graphs on `{1..n}` in canonical (edge list) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub n: usize,
    pub rigid_count: usize,
    pub entries: Vec<CorpusEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CorpusHeader {
    n: usize,
    counts: CorpusCounts,
    generator: String,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CorpusCounts {
    min_rigid: usize,
    min_persistent: usize,
    s_inverse_stuck: usize,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn graphs(&self) -> impl Iterator<Item = DirectedGraph> + '_ {
        self.entries.iter().map(CorpusEntry::graph)
    }

    pub fn stuck_count(&self) -> usize {
        self.entries.iter().filter(|e| e.s_inverse_stuck).count()
    }

    /// Header line with counts, then one graph JSON object per line.
    pub fn write_ndjson(&self, mut w: impl Write) -> std::io::Result<()> {
        let header = CorpusHeader {
            n: self.n,
            counts: CorpusCounts {
                min_rigid: self.rigid_count,
                min_persistent: self.len(),
                s_inverse_stuck: self.stuck_count(),
            },
            generator: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).into(),
        };
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for g in self.graphs() {
            serde_json::to_writer(&mut w, &g)?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads a corpus file back, recomputing the per-graph metadata.
    pub fn read_ndjson(r: impl BufRead) -> Result<Corpus> {
        let mut lines = r.lines();
        let parse = |e: &dyn std::fmt::Display| Error::Parse(e.to_string());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty corpus file".into()))?;
        let header: CorpusHeader =
            serde_json::from_str(&header.map_err(|e| parse(&e))?).map_err(|e| parse(&e))?;
        let mut entries = Vec::new();
        for line in lines {
            let line = line.map_err(|e| parse(&e))?;
            if line.trim().is_empty() {
                continue;
            }
            let g: DirectedGraph = serde_json::from_str(&line).map_err(|e| parse(&e))?;
            entries.push(entry_for(&g));
        }
        Ok(Corpus {
            n: header.n,
            rigid_count: header.counts.min_rigid,
            entries,
        })
    }
}

fn entry_for(g: &DirectedGraph) -> CorpusEntry {
    CorpusEntry {
        edges: g.edges().collect(),
        dof: dof_allocation(g).0.values().copied().collect(),
        s_inverse_stuck: is_s_inverse_stuck(g),
    }
}

/// Every orientation with out-degrees at most two of every minimally
/// rigid graph on `{1..n}`.
pub fn enumerate_min_persistent(n: usize) -> Result<Corpus> {
    check_range("vertex count", n, MAX_PERSISTENT_N)?;
    let bases = rigid_masks(n);
    let mut entries: Vec<CorpusEntry> = bases
        .par_iter()
        .flat_map_iter(|&mask| {
            let pairs: Vec<_> = mask_edges(mask, n).collect();
            (0u32..1 << pairs.len()).filter_map(move |flip| {
                let mut out = vec![0u8; n];
                let edges: Vec<_> = pairs
                    .iter()
                    .enumerate()
                    .map(|(k, &(a, b))| if flip >> k & 1 == 1 { (b, a) } else { (a, b) })
                    .collect();
                for &(a, _) in &edges {
                    out[a - 1] += 1;
                }
                if out.iter().any(|&d| d > 2) {
                    return None;
                }
                let edges: Vec<_> = edges
                    .into_iter()
                    .map(|(a, b)| (a as VertexId, b as VertexId))
                    .collect();
                let g = DirectedGraph::from_parts(1..=n as VertexId, edges).expect("simple");
                Some(entry_for(&g))
            })
        })
        .collect();
    entries.par_sort_unstable_by(|a, b| a.edges.cmp(&b.edges));
    Ok(Corpus {
        n,
        rigid_count: bases.len(),
        entries,
    })
}

/// No reverse standard vertex addition or edge splitting applies. Two-vertex
/// seeds are terminal rather than stuck and never qualify.
pub fn is_s_inverse_stuck(g: &DirectedGraph) -> bool {
    if g.vertex_count() < 3 {
        return false;
    }
    let mut patterns = g.vertices().map(|v| (v, g.degrees(v).expect("own vertex")));
    !patterns.any(|(v, d)| d == (0, 2) || (d == (1, 2) && find_rev_std_edge_split(g, v).is_some()))
}

/// Members of the `n`-vertex corpus that no reverse standard operation can
/// reduce.
pub fn find_s_inverse_stuck(n: usize) -> Result<Vec<DirectedGraph>> {
    check_range("vertex count", n, MAX_PERSISTENT_N)?;
    let corpus = enumerate_min_persistent(n)?;
    Ok(corpus
        .entries
        .iter()
        .filter(|e| e.s_inverse_stuck)
        .map(CorpusEntry::graph)
        .collect())
}

/// Fewest edges any valid reverse atypical edge splitting on `g` has to
/// reverse, if one applies.
pub fn min_atypical_reversal(g: &DirectedGraph) -> Option<usize> {
    g.vertices()
        .filter(|&v| g.degrees(v).ok() == Some((1, 2)))
        .flat_map(|i| {
            let outs: Vec<_> = g.out_neighbors(i).collect();
            [(outs[0], outs[1]), (outs[1], outs[0])].map(|pair| (i, pair))
        })
        .filter_map(|(i, (k, l))| {
            let j = g.in_neighbors(i).next()?;
            let path = g.without_vertex(i).ok()?.directed_path(k, j).ok()??;
            let reversed = path.len() - 1;
            let op = Operation::RevAtypEdgeSplit {
                i,
                path,
                add_pair: (k, l),
            };
            validate_reverse(g, &op).ok().map(|_| reversed)
        })
        .min()
}

/// Valid operations of the atypical set (standard and atypical vertex
/// addition and edge splitting) adding vertex `new` to `g`.
pub fn forward_a_candidates(g: &DirectedGraph, new: VertexId) -> Vec<Operation> {
    let vs: Vec<_> = g.vertices().collect();
    let mut ops = Vec::new();
    for (s, &j) in vs.iter().enumerate() {
        for &k in &vs[s + 1..] {
            ops.push(Operation::StdVertexAdd { new, j, k });
        }
    }
    for (j, k) in g.edges() {
        for &l in vs.iter().filter(|&&l| l != j && l != k) {
            ops.push(Operation::StdEdgeSplit { new, j, k, l });
        }
    }
    for &j in vs.iter().filter(|&&j| g.dof(j).unwrap_or(0) >= 1) {
        for &k in vs.iter().filter(|&&k| k != j) {
            ops.push(Operation::AtypVertexAdd { new, j, k });
        }
    }
    for (k, l) in g.edges() {
        for &j in vs.iter().filter(|&&j| j != k && j != l) {
            if let Ok(Some(path)) = g.directed_path(j, k) {
                ops.push(Operation::AtypEdgeSplit { new, j, k, l, path });
            }
        }
    }
    ops
}

/// Valid edge, path and cycle reversals on `g`.
pub fn reversal_candidates(g: &DirectedGraph) -> Vec<Operation> {
    let mut ops = Vec::new();
    for (i, j) in g.edges() {
        if g.dof(j).unwrap_or(0) >= 1 {
            ops.push(Operation::EdgeReversal { i, j });
        }
        // the edge closes a cycle when its head reaches its tail
        if let Ok(Some(mut back)) = g.directed_path(j, i) {
            if back.len() >= 3 {
                back.insert(0, i);
                back.pop();
                ops.push(Operation::CycleReversal { cycle: back });
            }
        }
    }
    let vs: Vec<_> = g.vertices().collect();
    for &i in &vs {
        for &j in vs.iter().filter(|&&j| j != i && g.dof(j).unwrap_or(0) >= 1) {
            if let Ok(Some(path)) = g.directed_path(i, j) {
                if path.len() > 2 {
                    ops.push(Operation::PathReversal { path });
                }
            }
        }
    }
    ops
}

fn leader_follower_seed() -> DirectedGraph {
    DirectedGraph::from_edges([(2, 1)]).expect("seed")
}

/// Graph on `n` vertices built from the seed `{(2,1)}` by `n - 2` forward
/// operations, each drawn uniformly among all valid ones.
pub fn random_min_persistent(n: usize, seed: u64) -> Result<DirectedGraph> {
    if n < 2 {
        return Err(Error::TooFewVertices(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plan = Plan::new(leader_follower_seed());
    while plan.current().vertex_count() < n {
        let new = plan.current().next_vertex_id();
        let ops = forward_a_candidates(plan.current(), new);
        let op = ops
            .choose(&mut rng)
            .expect("a seed always admits a vertex addition");
        plan.push(op.clone())?;
    }
    Ok(plan.current().clone())
}

/// Random plan from the seed mixing forward operations of both sets with
/// edge, path and cycle reversals. Each step first draws an operation kind
/// among those currently applicable, then a uniform instance of it.
pub fn random_mixed_plan(steps: usize, seed: u64) -> Result<Plan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plan = Plan::new(leader_follower_seed());
    for _ in 0..steps {
        let cur = plan.current();
        let mut pool = forward_a_candidates(cur, cur.next_vertex_id());
        pool.extend(reversal_candidates(cur));
        let mut kinds: Vec<_> = pool.iter().map(Operation::kind).collect();
        kinds.sort_unstable();
        kinds.dedup();
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let of_kind: Vec<_> = pool.into_iter().filter(|op| op.kind() == kind).collect();
        let op = of_kind
            .choose(&mut rng)
            .expect("kind drawn from the pool")
            .clone();
        plan.push(op)?;
    }
    Ok(plan)
}
