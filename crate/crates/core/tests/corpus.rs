//! Exhaustive checks over the labeled corpora.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use minper::enumerator::{
    enumerate_min_persistent, enumerate_min_rigid, forward_a_candidates, reversal_candidates,
    Corpus,
};
use minper::graph::{DirectedGraph, UndirectedView, VertexId};
use minper::ops::{
    apply, apply_reverse, find_rev_atyp_edge_split, find_rev_std_edge_split, Operation,
};
use minper::persistence::{dof_allocation, is_min_persistent};
use minper::rigidity::{defines_implicit_edge, oracle_minimally_rigid};
use minper::sequencer::{
    align_orientations, decompose_a, decompose_t, next_removal, reposition_dof,
};

fn corpus(n: usize) -> &'static Corpus {
    static CACHE: OnceLock<Vec<OnceLock<Corpus>>> = OnceLock::new();
    CACHE.get_or_init(|| (0..=6).map(|_| OnceLock::new()).collect())[n]
        .get_or_init(|| enumerate_min_persistent(n).unwrap())
}

fn all_graphs(max_n: usize) -> impl Iterator<Item = DirectedGraph> {
    (2..=max_n).flat_map(|n| corpus(n).graphs())
}

#[test]
fn edge_removal_never_leaves_an_implicit_pair() {
    for n in 2..=6 {
        for uv in enumerate_min_rigid(n).unwrap() {
            for (u, v) in uv.edges() {
                let rest = UndirectedView::new(uv.vertices(), uv.edges().filter(|&e| e != (u, v)))
                    .unwrap();
                assert!(!defines_implicit_edge(&rest, u, v).unwrap());
            }
        }
    }
}

#[test]
fn degree_three_vertices_have_a_free_pair() {
    for n in 4..=6 {
        for uv in enumerate_min_rigid(n).unwrap() {
            for v in uv.vertices().filter(|&v| uv.degree(v) == 3) {
                let nb = uv.neighbors(v);
                let mut rest = uv.clone();
                rest.remove_vertex(v).unwrap();
                let free = [(nb[0], nb[1]), (nb[0], nb[2]), (nb[1], nb[2])]
                    .into_iter()
                    .filter(|&(a, b)| !rest.contains_edge(a, b))
                    .any(|(a, b)| !defines_implicit_edge(&rest, a, b).unwrap());
                assert!(free);
            }
        }
    }
}

#[test]
fn rigid_corpus_is_laman() {
    for n in 2..=6 {
        for uv in enumerate_min_rigid(n).unwrap() {
            assert!(oracle_minimally_rigid(&uv).unwrap());
        }
    }
}

/// Every vertex with out-degree at least one reaches every vertex with
/// out-degree at most one.
#[test]
fn paths_lead_to_free_vertices() {
    for g in all_graphs(6) {
        let free: Vec<_> = g
            .vertices()
            .filter(|&v| g.out_degree(v).unwrap() <= 1)
            .collect();
        for i in g.vertices().filter(|&v| g.out_degree(v).unwrap() >= 1) {
            let reach = g.reachable_from(i).unwrap();
            assert!(
                free.iter().all(|j| reach.contains(j)),
                "{i} in {:?}",
                g.edges().collect::<Vec<_>>()
            );
        }
    }
}

#[test]
fn in1_out2_vertices_are_always_removable() {
    for g in all_graphs(6) {
        for v in g.vertices().filter(|&v| g.degrees(v).unwrap() == (1, 2)) {
            let op = find_rev_std_edge_split(&g, v)
                .or_else(|| find_rev_atyp_edge_split(&g, v))
                .unwrap_or_else(|| panic!("{v} in {:?}", g.edges().collect::<Vec<_>>()));
            assert!(is_min_persistent(&apply_reverse(&g, &op).unwrap()));
        }
    }
}

#[test]
fn decomposition_length_on_six_vertices() {
    for g in corpus(6).graphs() {
        let mut cur = g;
        for _ in 0..4 {
            let op = next_removal(&cur).expect("a removal applies");
            cur = apply_reverse(&cur, &op).unwrap();
        }
        assert_eq!(cur.vertex_count(), 2);
        assert_eq!(cur.edge_count(), 1);
    }
}

#[test]
fn every_operation_preserves_persistence() {
    for g in all_graphs(5) {
        let mut ops = forward_a_candidates(&g, g.next_vertex_id());
        ops.extend(reversal_candidates(&g));
        ops.extend(g.vertices().filter_map(|i| match g.degrees(i).unwrap() {
            (0, 2) => Some(Operation::RevStdVertexAdd { i }),
            (1, 1) => Some(Operation::RevAtypVertexAdd { i }),
            (1, 2) => find_rev_std_edge_split(&g, i),
            _ => None,
        }));
        for op in ops {
            let after = apply(&g, &op).unwrap().graph;
            assert!(
                is_min_persistent(&after),
                "{op} on {:?}",
                g.edges().collect::<Vec<_>>()
            );
            let back = op.invert_at(&g).unwrap();
            assert_eq!(apply(&after, &back).unwrap().graph, g);
        }
    }
}

#[test]
fn both_operation_sets_reduce_every_graph() {
    for g in all_graphs(5) {
        let a = decompose_a(&g).unwrap();
        let t = decompose_t(&g).unwrap();
        assert_eq!(a.len(), g.vertex_count() - 2);
        assert!(t.steps.iter().all(|op| !op.kind().contains("Atyp")));
        assert_eq!(t.replay().unwrap().vertex_count(), 2);
    }
}

#[test]
fn alignment_bound_on_five_vertices() {
    let mut groups: BTreeMap<Vec<(VertexId, VertexId)>, Vec<DirectedGraph>> = BTreeMap::new();
    for g in corpus(5).graphs() {
        groups
            .entry(g.underlying().edges().collect())
            .or_default()
            .push(g);
    }
    for members in groups.values() {
        // fix one target per group and vary the source
        for b in members.iter().step_by(7) {
            for a in members {
                let moved = reposition_dof(a, &dof_allocation(b)).unwrap();
                assert!(moved.len() <= 3);
                let aligned = align_orientations(moved.current(), b).unwrap();
                assert!(aligned.len() <= a.edge_count() / 3);
                assert_eq!(aligned.current(), b);
            }
        }
    }
}
