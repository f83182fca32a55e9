mod common;

use common::{load, word};
use cubulate::ball::{
    build_ball, build_ball_with_core, convexity_check, geodesic_cell_check, margin, share_boundary_check,
};
use cubulate::word_problem::{PseudometricChoice, PseudometricMode};
use std::collections::HashSet;

/// Vertices of the cover of a graph without relators: reduced letter
/// sequences from the base vertex.
fn reduced_count(cx: &cubulate::StaggeredComplex, r: usize) -> usize {
    let n = cx.shape.letter_count();
    let mut frontier: Vec<(usize, Option<usize>)> = vec![(0, None)];
    let mut total = 1;
    for _ in 0..r {
        let mut next = Vec::new();
        for &(at, last) in &frontier {
            for x in 0..n {
                let l = cx.shape.letter_at(x);
                if cx.shape.letter_source(l) != at || last == Some(x ^ 1) {
                    continue;
                }
                next.push((cx.shape.letter_target(l), Some(x)));
            }
        }
        total += next.len();
        frontier = next;
    }
    total
}

#[test]
fn tree_cover_counts() {
    let cx = load("p0");
    for r in 0..=6 {
        let b = build_ball(&cx, r).unwrap();
        assert_eq!(b.vertices.len(), reduced_count(&cx, r), "r={r}");
        assert!(b.cells.is_empty());
        assert_eq!(b.edges.len(), b.vertices.len() - 1);
    }
}

#[test]
fn p1_ball_structure() {
    let cx = load("p1");
    let b0 = build_ball(&cx, 0).unwrap();
    assert_eq!(b0.vertices.len(), 1);
    assert!(b0.edges.is_empty());

    let b = build_ball(&cx, 8).unwrap();
    assert_eq!(margin(&cx), 8);
    assert_eq!(b.core, 0);
    let at_base: Vec<_> = b.cells.iter().filter(|c| c.vertices.contains(&0)).collect();
    assert!(!at_base.is_empty());
    for c in &b.cells {
        assert_eq!(c.len(), 16);
        assert_eq!(c.position_class(5), vec![1, 5, 9, 13]);
    }
    // labels are pairwise distinct group elements
    let labels: HashSet<_> = b.vertices.iter().map(|v| v.label.clone()).collect();
    assert_eq!(labels.len(), b.vertices.len());
    for v in 0..b.vertices.len() {
        assert!(b.degree(v) <= b.degree_bound());
    }
}

#[test]
fn geodesic_to_half_relator() {
    let cx = load("p1");
    let b = build_ball_with_core(&cx, 8).unwrap();
    let w = word(&cx, "(a b)^2");
    let v = b.walk(0, &w.letters()).unwrap();
    let g = b.geodesic(0, v).unwrap();
    assert_eq!(g.len(), 8);
    // (a b)^2 equals (b^-1 a^-1)^2 in the group; both routes are geodesic
    let other = word(&cx, "(b^-1 a^-1)^2");
    assert_eq!(b.walk(0, &other.letters()), Some(v));
    assert!(b.geodesic(0, b.vertices.len() - 1).is_err());
}

#[test]
fn cells_are_recorded_once() {
    let cx = load("p1");
    let b = build_ball(&cx, 12).unwrap();
    let mut seen = HashSet::new();
    for c in &b.cells {
        let mut key: Vec<usize> = c.boundary.iter().map(|o| o.edge).collect();
        key.sort_unstable();
        assert!(seen.insert(key));
    }
    // every edge near the base lies in its full count of cells
    for (e, edge) in b.edges.iter().enumerate() {
        let d = b.vertices[edge.source].depth.max(b.vertices[edge.target].depth);
        if d + margin(&cx) <= b.radius {
            assert_eq!(b.edge_cells[e].len(), b.expected_cells[e]);
        }
    }
}

#[test]
fn p2_squares() {
    let cx = load("p2");
    let b = build_ball(&cx, 4).unwrap();
    assert!(!b.squares.is_empty());
    for sq in &b.squares {
        let ends: Vec<_> = sq.boundary.iter().map(|o| b.edges[o.edge].source).collect();
        assert!(ends.iter().all(|&v| b.vertices[v].factor == 0));
    }
    // x y = y x at the base
    let xy = b.walk(0, &word(&cx, "x y").letters());
    let yx = b.walk(0, &word(&cx, "y x").letters());
    assert_eq!(xy, yx);
}

#[test]
fn geodesics_meet_cells_in_less_than_half() {
    let cx = load("p1");
    let b = build_ball_with_core(&cx, 9).unwrap();
    let rep = geodesic_cell_check(&b, 8);
    assert!(rep.cells_met > 0);
    assert!(rep.full_class_violations.is_empty(), "{:?}", rep.full_class_violations);
    assert!(rep.half_violations.is_empty(), "{:?}", rep.half_violations);
    assert!(rep.max_essential_fraction <= 0.5);
    assert!(share_boundary_check(&b).is_empty());
}

#[test]
fn vertex_spaces_are_convex() {
    let cx = load("p1");
    let b = build_ball_with_core(&cx, 8).unwrap();
    let rep = convexity_check(&b, 8);
    assert!(rep.pairs_checked >= 16);
    assert!(rep.violations.is_empty(), "{:?}", rep.violations);
}

#[test]
fn relative_geodesics() {
    let cx = load("p1");
    let b = build_ball_with_core(&cx, 8).unwrap();
    let v = b.walk(0, &word(&cx, "a^3 b a").letters()).unwrap();
    let zero = PseudometricChoice::uniform(&cx, PseudometricMode::Zero);
    let (len, path) = b.relative_geodesic(0, v, &zero, None).unwrap();
    assert_eq!(len, 2);
    assert_eq!(b.walk(0, &path.letters), Some(v));
    let coned = PseudometricChoice::uniform(&cx, PseudometricMode::Coned);
    let (len, _) = b.relative_geodesic(0, v, &coned, None).unwrap();
    assert_eq!(len, 5);
    let intrinsic = PseudometricChoice::uniform(&cx, PseudometricMode::Intrinsic);
    let (len, _) = b.relative_geodesic(0, v, &intrinsic, None).unwrap();
    assert_eq!(len as usize, b.geodesic(0, v).unwrap().len());
}

#[test]
fn inner_geodesics_stay_in_the_core() {
    let cx = load("p1");
    let b = build_ball_with_core(&cx, 6).unwrap();
    let inner = b.inner_vertices();
    assert!(inner.len() > 1 && inner.len() < b.core_vertices().len());
    for &x in inner.iter().step_by(3) {
        for &y in inner.iter().step_by(5) {
            let g = b.geodesic(x, y).unwrap();
            assert!(g.vertices.iter().all(|&v| b.in_core(v)), "{x} {y}");
        }
    }
}
