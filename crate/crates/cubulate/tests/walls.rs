mod common;

use common::{load, word};
use cubulate::ball::{build_ball, build_ball_with_core, BallComplex};
use cubulate::par::Exec;
use cubulate::walls::{
    carrier_quasiconvexity, check_embedded, check_separates, ladder, linear_separation_fit, separating_wall_count,
    to_dot, trace_wall, wall_adjacency, wall_vertex_space_intersection, Chord, Side, Via, Wall, WallError, WallNode,
    WallPart, WallSystem, WallType,
};
use cubulate::word::Letter;
use std::collections::BTreeSet;
use std::sync::OnceLock;

fn p1() -> &'static (BallComplex, WallSystem) {
    static B: OnceLock<(BallComplex, WallSystem)> = OnceLock::new();
    B.get_or_init(|| {
        let b = build_ball_with_core(&load("p1"), 8).unwrap();
        let s = WallSystem::build(&b);
        (b, s)
    })
}

fn edge_from(b: &BallComplex, v: usize, l: Letter) -> usize {
    b.edge_at(v, b.cx.shape.letter_index(l)).unwrap()
}

#[test]
fn square_rule_and_symmetry() {
    let cx = load("p2");
    let b = build_ball(&cx, 3).unwrap();
    let sq = &b.squares[0];
    let e1 = WallNode { edge: sq.boundary[0].edge, side: Side::Minus };
    let e2 = WallNode { edge: sq.boundary[2].edge, side: Side::Minus };
    assert!(wall_adjacency(&b, e1).iter().any(|&(n, v)| n == e2 && v == Via::Square(0)));
    for e in 0..b.edges.len() {
        for side in [Side::Minus, Side::Plus] {
            let n = WallNode { edge: e, side };
            let adj = wall_adjacency(&b, n);
            assert!(adj.len() <= b.edge_cells[e].len() + b.edge_squares[e].len());
            for (m, _) in adj {
                assert!(wall_adjacency(&b, m).iter().any(|&(k, _)| k == n), "asymmetric at {n:?}");
            }
        }
    }
}

#[test]
fn p0_walls_are_single_edges() {
    let cx = load("p0");
    let b = build_ball(&cx, 4).unwrap();
    let t = edge_from(&b, 0, Letter::Edge { edge: 0, inv: false });
    assert!(wall_adjacency(&b, WallNode { edge: t, side: Side::Plus }).is_empty());
    let w = trace_wall(&b, t, Side::Plus);
    assert_eq!(w.nodes().count(), 2);
    assert_eq!(w.crossing, vec![t]);
    assert_eq!(w.kind, WallType::Graph);
    assert!(w.complete && w.finite);
    assert!(check_embedded(&w).unwrap().ok());
    let sep = check_separates(&b, &w).unwrap();
    assert!(sep.ok());
    // oracle: the far side is every vertex whose label starts with t
    let far = b.vertices.iter().filter(|v| v.label.first() == Some(&Letter::Edge { edge: 0, inv: false })).count();
    assert_eq!(sep.core_components, 2);
    let mut sides = sep.sides;
    sides.sort_unstable();
    let mut expected = [far, b.vertices.len() - far];
    expected.sort_unstable();
    assert_eq!(sides, expected);
    let a = edge_from(&b, 0, Letter::Gen { factor: 0, gen: 0, inv: false });
    let wa = trace_wall(&b, a, Side::Minus);
    assert_eq!(wa.kind, WallType::Hyperplane);
    assert_eq!(wall_vertex_space_intersection(&b, &wa).touched.values().map(Vec::len).sum::<usize>(), 1);

    let sys = WallSystem::build(&b);
    let rep = linear_separation_fit(&b, &sys, Exec::Parallel);
    let fit = rep.fit.unwrap();
    assert!((fit.kappa - 1.0).abs() < 1e-9 && fit.epsilon.abs() < 1e-9, "{fit:?}");
    assert!(rep.points.iter().all(|&(d, c)| d == c));
    assert_eq!(separating_wall_count(&b, &sys, 0, 0).unwrap(), 0);
}

#[test]
fn p1_a_wall_is_a_chord_of_the_base_cell() {
    let (b, _) = p1();
    let cx = &b.cx;
    let a = Letter::Gen { factor: 0, gen: 0, inv: false };
    let e = edge_from(b, 0, a);
    let w = trace_wall(b, e, Side::Plus);
    // oracle: read the relator from the base; the a-letter after one
    // period sits |p| letters further along the same cycle
    let rel: Vec<Letter> = cubulate::word_problem::relator_letters(cx, 0);
    let i = rel.iter().position(|&l| l == a).unwrap();
    let start = b.walk(0, &rel[..i].iter().map(|l| l.inverse()).rev().collect::<Vec<_>>()).unwrap();
    let p = cx.relators[0].period_len(&cx.shape);
    let v = b.walk(start, &rel[..i + p]).unwrap();
    let expected: BTreeSet<usize> = [e, edge_from(b, v, a)].into();
    assert_eq!(w.crossing.iter().copied().collect::<BTreeSet<_>>(), expected);
    assert!(w.finite);
    assert_eq!(w.cell_arcs().len(), 1);
    let arc = w.cell_arcs().into_values().next().unwrap();
    assert_eq!(arc.len(), 1);
    assert_eq!(arc[0].1, (arc[0].0 + 4) % 16);
}

#[test]
fn tracing_is_independent_of_start() {
    let (b, sys) = p1();
    for e in (0..b.edges.len()).filter(|&e| b.in_core(b.edges[e].source)).take(40) {
        let w = trace_wall(b, e, Side::Minus);
        for n in w.nodes().step_by(7).take(5) {
            assert_eq!(trace_wall(b, n.edge, n.side).crossing, w.crossing);
            assert_eq!(sys.wall_of(n), sys.wall_of(WallNode { edge: e, side: Side::Minus }));
        }
    }
}

#[test]
fn cell_chords_follow_position_classes() {
    let (b, sys) = p1();
    let c = b.cells.iter().position(|c| c.vertices.contains(&0)).unwrap();
    let cell = &b.cells[c];
    let mut walls_by_class = vec![BTreeSet::new(); cell.period_len];
    for (i, o) in cell.boundary.iter().enumerate() {
        for side in [Side::Minus, Side::Plus] {
            walls_by_class[i % cell.period_len].insert(sys.wall_of(WallNode { edge: o.edge, side }));
        }
    }
    for (k, class) in walls_by_class.iter().enumerate() {
        for (j, other) in walls_by_class.iter().enumerate() {
            if j != k {
                assert!(class.is_disjoint(other));
            }
        }
        assert_eq!(class.len(), cell.exponent);
    }
}

#[test]
fn checker_rejects_a_repeated_cell() {
    let n = |edge, side| WallNode { edge, side };
    let via = Via::Cell { cell: 0, from: 0, to: 4 };
    let part = WallPart {
        nodes: vec![n(0, Side::Plus), n(1, Side::Minus), n(2, Side::Plus), n(3, Side::Minus)],
        chords: vec![
            Chord { a: n(0, Side::Plus), b: n(1, Side::Minus), via },
            Chord { a: n(2, Side::Plus), b: n(3, Side::Minus), via: Via::Cell { cell: 0, from: 8, to: 12 } },
        ],
    };
    let w = Wall {
        id: 0,
        parts: vec![part],
        crossing: vec![0, 1, 2, 3],
        kind: WallType::Graph,
        complete: true,
        finite: true,
        meets_core: true,
    };
    let rep = check_embedded(&w).unwrap();
    assert_eq!(rep.repeated_cells, vec![0]);
    assert!(!rep.ok());
    let incomplete = Wall { complete: false, ..w };
    assert_eq!(check_embedded(&incomplete), Err(WallError::Incomplete(0)));
}

#[test]
fn p1_complete_walls_embed_and_separate() {
    let (b, sys) = p1();
    let walls = sys.complete_walls();
    assert!(walls.len() > 100);
    for &id in &walls {
        let w = sys.wall(b, id);
        let emb = check_embedded(&w).unwrap();
        assert!(emb.ok(), "wall {id}: {emb:?}");
        let sep = check_separates(b, &w).unwrap();
        assert!(sep.ok(), "wall {id}: {sep:?}");
        assert!(wall_vertex_space_intersection(b, &w).violations.is_empty());
    }
}

#[test]
fn p1_separation_and_quasiconvexity() {
    let (b, sys) = p1();
    let v = b.walk(0, &word(&b.cx, "(a b)^2").letters()).unwrap();
    assert!(separating_wall_count(b, sys, 0, v).unwrap() >= 1);
    let rep = linear_separation_fit(b, sys, Exec::Parallel);
    assert!(rep.ok(), "{:?} {:?}", rep.fit, &rep.failures[..rep.failures.len().min(5)]);
    let qc = carrier_quasiconvexity(b, sys, 8, Exec::Parallel);
    assert!(qc.pairs > 0);
    assert_eq!(qc.bound, Some(16));
    assert!(qc.ok(), "{qc:?}");
}

#[test]
fn p2_wall_follows_a_hyperplane_line() {
    let cx = load("p2");
    let b = build_ball_with_core(&cx, 3).unwrap();
    let x = Letter::Gen { factor: 0, gen: 0, inv: false };
    let e = edge_from(&b, 0, x);
    let w = trace_wall(&b, e, Side::Minus);
    assert_eq!(w.kind, WallType::Hyperplane);
    // oracle: the x-edges at y^k lie on the same hyperplane line
    for k in -3i32..=3 {
        let y = Letter::Gen { factor: 0, gen: 1, inv: k < 0 };
        let v = b.walk(0, &vec![y; k.unsigned_abs() as usize]).unwrap();
        assert!(w.crossing.contains(&edge_from(&b, v, x)), "k={k}");
    }
    assert!(!w.cell_arcs().is_empty());
    let vs = wall_vertex_space_intersection(&b, &w);
    assert!(vs.violations.is_empty());
    assert!(vs.touched.values().all(|h| h.len() == 1));
    let l = ladder(&b, w.parts[0].nodes[0], *w.parts[0].nodes.last().unwrap()).unwrap();
    assert_eq!(l.segment.len(), l.carrier.len() + 1);
    assert!(to_dot(&b, &w).starts_with("graph wall_"));
}
