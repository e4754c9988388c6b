//! Generic minimal rigidity in the plane.
//!
//! [`PebbleState`] runs the (2,3)-pebble game: every vertex starts with two
//! pebbles, an edge is independent iff four pebbles can be gathered on its
//! endpoints, and accepted edges are kept in an internal orientation whose
//! out-degrees account for the spent pebbles. [`oracle_minimally_rigid`]
//! checks the Laman subgraph count by brute force and is only meant for
//! cross-validation on small graphs.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{UndirectedView, VertexId};

/// Largest vertex count accepted by the exhaustive oracle.
pub const ORACLE_MAX_VERTICES: usize = 10;

#[derive(Debug, Clone, Default)]
pub struct PebbleState {
    pebbles: BTreeMap<VertexId, u8>,
    orientation: BTreeMap<VertexId, BTreeSet<VertexId>>,
    accepted: usize,
}

/// Result of one insertion attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Insertion {
    Accepted,
    /// The edge is dependent. `block` spans exactly `2|block| - 3`
    /// accepted edges and contains both endpoints, so adding the edge
    /// overbraces it.
    Rejected {
        block: BTreeSet<VertexId>,
    },
}

impl Insertion {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Insertion::Accepted)
    }
}

impl PebbleState {
    pub fn new(vertices: impl IntoIterator<Item = VertexId>) -> Self {
        let mut s = Self::default();
        for v in vertices {
            s.pebbles.insert(v, 2);
            s.orientation.insert(v, BTreeSet::new());
        }
        s
    }

    /// State holding every independent edge of `uv`, inserted in sorted order.
    pub fn from_view(uv: &UndirectedView) -> Self {
        let mut s = Self::new(uv.vertices());
        for (u, v) in uv.edges() {
            s.try_insert(u, v).expect("view edges name known vertices");
        }
        s
    }

    pub fn accepted(&self) -> usize {
        self.accepted
    }

    pub fn pebbles(&self, v: VertexId) -> Option<u8> {
        self.pebbles.get(&v).copied()
    }

    /// Accepted edges as oriented by the game.
    pub fn oriented_edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.orientation
            .iter()
            .flat_map(|(&u, outs)| outs.iter().map(move |&v| (u, v)))
    }

    /// `pebbles(v) + out(v) = 2` everywhere and the accepted count matches
    /// the pebbles spent.
    pub fn invariants_hold(&self) -> bool {
        let per_vertex = self
            .pebbles
            .iter()
            .all(|(v, &p)| p as usize + self.orientation[v].len() == 2);
        let spent: usize = self.pebbles.values().map(|&p| 2 - p as usize).sum();
        per_vertex && spent == self.accepted
    }

    pub fn try_insert(&mut self, u: VertexId, v: VertexId) -> Result<Insertion> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        for w in [u, v] {
            if !self.pebbles.contains_key(&w) {
                return Err(Error::UnknownVertex(w));
            }
        }
        loop {
            let (pu, pv) = (self.pebbles[&u], self.pebbles[&v]);
            if pu + pv == 4 {
                break;
            }
            if pu < 2 && self.fetch_pebble(u, v) {
                continue;
            }
            if pv < 2 && self.fetch_pebble(v, u) {
                continue;
            }
            let mut block = self.reach(u);
            block.extend(self.reach(v));
            return Ok(Insertion::Rejected { block });
        }
        *self.pebbles.get_mut(&u).expect("known") -= 1;
        self.orientation.get_mut(&u).expect("known").insert(v);
        self.accepted += 1;
        Ok(Insertion::Accepted)
    }

    /// Depth-first search from `start` for a free pebble, never passing
    /// through `start` or `keep`. On success the search path is reversed,
    /// moving one pebble to `start`.
    fn fetch_pebble(&mut self, start: VertexId, keep: VertexId) -> bool {
        let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut seen = BTreeSet::from([start, keep]);
        let mut stack = vec![start];
        let mut found = None;
        'search: while let Some(x) = stack.pop() {
            // push in descending order so the smallest id is explored first
            for &w in self.orientation[&x].iter().rev() {
                if !seen.insert(w) {
                    continue;
                }
                parent.insert(w, x);
                if self.pebbles[&w] > 0 {
                    found = Some(w);
                    break 'search;
                }
                stack.push(w);
            }
        }
        let Some(end) = found else {
            return false;
        };
        *self.pebbles.get_mut(&end).expect("known") -= 1;
        *self.pebbles.get_mut(&start).expect("known") += 1;
        let mut cur = end;
        while let Some(&p) = parent.get(&cur) {
            self.orientation.get_mut(&p).expect("known").remove(&cur);
            self.orientation.get_mut(&cur).expect("known").insert(p);
            cur = p;
        }
        true
    }

    fn reach(&self, from: VertexId) -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            for &w in &self.orientation[&x] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RigidityVerdict {
    pub rank: usize,
    pub is_rigid: bool,
    pub is_minimally_rigid: bool,
}

/// Rigidity verdict plus the first dependent edge met, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidityAnalysis {
    pub verdict: RigidityVerdict,
    pub first_dependent: Option<((VertexId, VertexId), BTreeSet<VertexId>)>,
}

pub fn check_rigidity(uv: &UndirectedView) -> Result<RigidityVerdict> {
    analyze_rigidity(uv).map(|a| a.verdict)
}

pub fn analyze_rigidity(uv: &UndirectedView) -> Result<RigidityAnalysis> {
    analyze_in_order(uv, uv.edges())
}

/// Same as [`analyze_rigidity`] with a caller-chosen insertion order.
pub fn analyze_in_order(
    uv: &UndirectedView,
    order: impl IntoIterator<Item = (VertexId, VertexId)>,
) -> Result<RigidityAnalysis> {
    let n = uv.vertex_count();
    if n < 2 {
        return Err(Error::TooFewVertices(n));
    }
    let mut state = PebbleState::new(uv.vertices());
    let mut first_dependent = None;
    for (u, v) in order {
        if let Insertion::Rejected { block } = state.try_insert(u, v)? {
            first_dependent.get_or_insert(((u, v), block));
        }
    }
    let rank = state.accepted();
    let is_rigid = rank == 2 * n - 3;
    Ok(RigidityAnalysis {
        verdict: RigidityVerdict {
            rank,
            is_rigid,
            is_minimally_rigid: is_rigid && uv.edge_count() == 2 * n - 3,
        },
        first_dependent,
    })
}

/// Whether the unconnected pair `{u, v}` is already forced by `uv`, i.e.
/// joining it would overbrace some subgraph.
pub fn defines_implicit_edge(uv: &UndirectedView, u: VertexId, v: VertexId) -> Result<bool> {
    if u == v {
        return Err(Error::SelfLoop(u));
    }
    if uv.contains_edge(u, v) {
        return Err(Error::Precondition(format!(
            "pair ({u},{v}) is already an explicit edge"
        )));
    }
    let mut state = PebbleState::from_view(uv);
    Ok(!state.try_insert(u, v)?.is_accepted())
}

/// Exhaustive Laman count: `|E| = 2|V| - 3` and every non-empty edge subset
/// `E''` spans at least `(|E''| + 3) / 2` vertices.
pub fn oracle_minimally_rigid(uv: &UndirectedView) -> Result<bool> {
    let n = uv.vertex_count();
    if n > ORACLE_MAX_VERTICES {
        return Err(Error::OutOfRange {
            what: "oracle vertex count",
            value: n,
            min: 0,
            max: ORACLE_MAX_VERTICES,
        });
    }
    if uv.edge_count() as i64 != 2 * n as i64 - 3 {
        return Ok(false);
    }
    Ok(oracle_violation(uv).is_none())
}

/// First edge subset (in bitmask order) breaking the Laman count, if any.
pub fn oracle_violation(uv: &UndirectedView) -> Option<Vec<(VertexId, VertexId)>> {
    let index: BTreeMap<VertexId, u32> = uv.vertices().zip(0..).collect();
    let edges: Vec<_> = uv.edges().collect();
    let masks: Vec<u32> = edges
        .iter()
        .map(|(a, b)| (1 << index[a]) | (1 << index[b]))
        .collect();
    let m = edges.len();
    (1u64..(1u64 << m)).find_map(|subset| {
        let mut span = 0u32;
        for (k, mask) in masks.iter().enumerate() {
            if subset >> k & 1 == 1 {
                span |= mask;
            }
        }
        let count = subset.count_ones() as i64;
        (count > 2 * span.count_ones() as i64 - 3).then(|| {
            (0..m)
                .filter(|k| subset >> k & 1 == 1)
                .map(|k| edges[k])
                .collect()
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(edges: &[(VertexId, VertexId)]) -> UndirectedView {
        UndirectedView::from_edges(edges.iter().copied()).unwrap()
    }

    const TRIANGLE: [(VertexId, VertexId); 3] = [(1, 2), (2, 3), (1, 3)];
    const K4_MINUS_13: [(VertexId, VertexId); 5] = [(1, 2), (1, 4), (2, 3), (2, 4), (3, 4)];

    #[test]
    fn insert_into_empty_pair() {
        let mut s = PebbleState::new([1, 2]);
        assert_eq!(s.try_insert(1, 2).unwrap(), Insertion::Accepted);
        assert!(s.invariants_hold());
        assert_eq!(s.pebbles(1), Some(1));
    }

    #[test]
    fn duplicate_triangle_edge_rejected() {
        let mut s = PebbleState::from_view(&view(&TRIANGLE));
        for (u, v) in TRIANGLE {
            let before = s.accepted();
            assert!(!s.try_insert(v, u).unwrap().is_accepted());
            assert_eq!(s.accepted(), before);
            assert!(s.invariants_hold());
        }
    }

    #[test]
    fn k4_minus_edge_rejects_missing_diagonal() {
        let mut s = PebbleState::from_view(&view(&K4_MINUS_13));
        assert_eq!(s.accepted(), 5);
        match s.try_insert(1, 3).unwrap() {
            Insertion::Rejected { block } => assert_eq!(block, BTreeSet::from([1, 2, 3, 4])),
            Insertion::Accepted => panic!("diagonal of a rigid K4-minus-edge accepted"),
        }
        assert!(s.invariants_hold());
    }

    #[test]
    fn unknown_vertex_is_error() {
        let mut s = PebbleState::new([1, 2]);
        assert_eq!(s.try_insert(1, 3), Err(Error::UnknownVertex(3)));
        assert_eq!(s.try_insert(1, 1), Err(Error::SelfLoop(1)));
    }

    #[test]
    fn verdicts() {
        let t = check_rigidity(&view(&TRIANGLE)).unwrap();
        assert_eq!((t.rank, t.is_rigid, t.is_minimally_rigid), (3, true, true));
        let k4 = view(&[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        let k4 = check_rigidity(&k4).unwrap();
        assert_eq!(
            (k4.rank, k4.is_rigid, k4.is_minimally_rigid),
            (5, true, false)
        );
        let quad = check_rigidity(&view(&[(1, 2), (2, 3), (3, 4), (1, 4)])).unwrap();
        assert_eq!((quad.rank, quad.is_rigid), (4, false));
        let k2 = check_rigidity(&view(&[(1, 2)])).unwrap();
        assert!(k2.is_minimally_rigid);
        let single = UndirectedView::new([1], []).unwrap();
        assert_eq!(check_rigidity(&single), Err(Error::TooFewVertices(1)));
    }

    #[test]
    fn implicit_edges() {
        assert!(defines_implicit_edge(&view(&K4_MINUS_13), 1, 3).unwrap());
        assert!(!defines_implicit_edge(&view(&[(1, 2), (2, 3)]), 1, 3).unwrap());
        // rigid K4-minus-edge on {1,2,3,6} inside a larger graph
        let mut g = view(&[
            (1, 2),
            (1, 3),
            (2, 3),
            (2, 6),
            (3, 6),
            (4, 6),
            (4, 5),
            (5, 6),
        ]);
        assert!(defines_implicit_edge(&g, 1, 6).unwrap());
        assert!(matches!(
            defines_implicit_edge(&g, 1, 2),
            Err(Error::Precondition(_))
        ));
        g.remove_vertex(3).unwrap();
        assert!(!defines_implicit_edge(&g, 1, 6).unwrap());
    }

    #[test]
    fn oracle_examples() {
        assert!(oracle_minimally_rigid(&view(&TRIANGLE)).unwrap());
        let bowtie = view(&[(1, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 5)]);
        assert!(!oracle_minimally_rigid(&bowtie).unwrap());
        assert!(oracle_minimally_rigid(&view(&K4_MINUS_13)).unwrap());
        let big = UndirectedView::new(1..=11, []).unwrap();
        assert!(oracle_minimally_rigid(&big).is_err());
    }

    #[test]
    fn oracle_witness_is_overbraced() {
        // K4 plus a pendant path: 7 edges on 5 vertices, K4 is the violation
        let g = view(&[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4), (4, 5)]);
        let bad = oracle_violation(&g).unwrap();
        let span: BTreeSet<_> = bad.iter().flat_map(|&(a, b)| [a, b]).collect();
        assert!(bad.len() as i64 > 2 * span.len() as i64 - 3);
    }
}
