mod common;

use common::{load, word};
use cubulate::ball::{build_ball_with_core, BallComplex};
use cubulate::dual_cube::{build_dual, DEFAULT_FLIP_MARGIN, npc_link_check, properness_witness, to_dot, DualError, HalfspaceSystem};
use cubulate::par::Exec;
use cubulate::walls::{WallSystem, WallType};
use cubulate::word::Letter;
use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

/// Enough flips for the core-8 dual of P1 to close up.
const P1_MARGIN: usize = 4;

fn p1() -> &'static (BallComplex, WallSystem, HalfspaceSystem) {
    static B: OnceLock<(BallComplex, WallSystem, HalfspaceSystem)> = OnceLock::new();
    B.get_or_init(|| {
        let b = build_ball_with_core(&load("p1"), 8).unwrap();
        let s = WallSystem::build(&b);
        let h = HalfspaceSystem::new(&b, &s, Exec::Parallel).unwrap();
        (b, s, h)
    })
}

#[test]
fn p0_tree_restriction_is_the_tree() {
    let b = build_ball_with_core(&load("p0"), 3).unwrap();
    let sys = WallSystem::build(&b);
    let h = HalfspaceSystem::with_filter(&b, &sys, Exec::Sequential, |w| w.kind == WallType::Graph).unwrap();
    let d = build_dual(&h, 2).unwrap();
    // oracle: a Bass-Serre vertex is a label with its trailing factor letters dropped
    let trees: HashSet<Vec<Letter>> = b
        .core_vertices()
        .iter()
        .map(|&v| {
            let l = &b.vertices[v].label;
            let keep = l.iter().rposition(|x| matches!(x, Letter::Edge { .. })).map_or(0, |i| i + 1);
            l[..keep].to_vec()
        })
        .collect();
    assert_eq!(d.zero_cubes(), trees.len());
    assert_eq!(d.one_cubes(), d.zero_cubes() - 1);
    assert!(d.is_connected());
    assert_eq!(d.max_cube_dim(), 1);
    let link = npc_link_check(&d, &h);
    assert_eq!((link.triangles, link.violations.len()), (0, 0));
    assert!(d.hyperplane_audit(&h).ok());
    // every wall is oriented toward the base at the base
    assert_eq!(h.principal_orientation(0).unwrap().count_ones(..), 0);
}

#[test]
fn adjacent_orientations_differ_on_the_edge_walls() {
    for name in ["p0", "p1"] {
        let b = build_ball_with_core(&load(name), 4).unwrap();
        let sys = WallSystem::build(&b);
        let h = HalfspaceSystem::new(&b, &sys, Exec::Parallel).unwrap();
        for (e, edge) in b.edges.iter().enumerate() {
            if !(b.in_core(edge.source) && b.in_core(edge.target)) {
                continue;
            }
            let ou = h.principal_orientation(edge.source).unwrap();
            let ov = h.principal_orientation(edge.target).unwrap();
            let diff: BTreeSet<usize> = ou.symmetric_difference(&ov).collect();
            let expected: BTreeSet<usize> = sys.walls_at(e).into_iter().filter_map(|w| h.local(w)).collect();
            assert_eq!(diff, expected, "{name} edge {e}");
            assert!(!diff.is_empty());
        }
        assert_eq!(h.principal_orientation(3).unwrap(), h.principal_orientation(3).unwrap());
        assert_eq!(h.principal_orientation(b.core_vertices().len()), Err(DualError::OutsideCore(b.core_vertices().len())));
    }
}

#[test]
fn p2_squares_match_crossing_pairs() {
    let b = build_ball_with_core(&load("p2"), 3).unwrap();
    let sys = WallSystem::build(&b);
    let h = HalfspaceSystem::new(&b, &sys, Exec::Parallel).unwrap();
    for i in 0..h.len() {
        assert!(!h.cross(i, i));
        for j in 0..h.len() {
            assert_eq!(h.cross(i, j), h.cross(j, i));
        }
    }
    let d = build_dual(&h, 2).unwrap();
    assert!(d.is_connected());
    assert!(d.max_cube_dim() >= 2);
    let square_pairs: BTreeSet<(usize, usize)> = d.squares.iter().map(|&(_, i, j)| (i.min(j), i.max(j))).collect();
    // oracle: recount crossings straight from the side function
    let mut crossing = BTreeSet::new();
    for i in 0..h.len() {
        for j in i + 1..h.len() {
            let mut seen = [false; 4];
            for v in 0..h.core {
                seen[(2 * h.side(i, v) + h.side(j, v)) as usize] = true;
            }
            if seen.iter().all(|&s| s) {
                crossing.insert((i, j));
            }
        }
    }
    assert_eq!(crossing.len(), h.crossing_pairs());
    assert_eq!(square_pairs, crossing);
    assert!(npc_link_check(&d, &h).violations.is_empty());
    assert!(d.hyperplane_audit(&h).ok(), "{:?}", d.hyperplane_audit(&h));
}

#[test]
fn p1_dual_is_connected_and_audited() {
    let (b, _, h) = p1();
    let d = build_dual(h, P1_MARGIN).unwrap();
    assert!(d.saturated);
    assert!(d.is_connected());
    let audit = d.hyperplane_audit(h);
    assert!(audit.ok(), "{audit:?}");
    let link = npc_link_check(&d, h);
    assert!(link.violations.is_empty(), "{:?}", &link.violations[..link.violations.len().min(5)]);
    // distinct core vertices get distinct principal 0-cubes
    let principal: HashSet<usize> = d.principal.iter().copied().collect();
    assert_eq!(principal.len(), b.core_vertices().len());
    let s = d.summary(h);
    assert_eq!(s.hyperplanes, h.len());
    assert!(to_dot(&d, h).starts_with("graph dual"));
}

#[test]
fn p1_dual_distance_counts_separating_walls() {
    let (b, sys, h) = p1();
    let d = build_dual(h, P1_MARGIN).unwrap();
    let far = b.walk(0, &word(&b.cx, "(a b)^2").letters()).unwrap();
    let adjacent = b.neighbours(0).next().unwrap().1;
    let mut pairs = vec![(0, 0), (0, adjacent), (0, far)];
    let n = b.core_vertices().len();
    pairs.extend((0..n).step_by(7).flat_map(|x| [(x, (x * 31 + 5) % n), (x, 0)]));
    let rep = properness_witness(&d, h, b, sys, &pairs).unwrap();
    assert_eq!(rep.rows[0].dual_distance, Some(0));
    assert!(rep.rows[1].dual_distance.unwrap() >= 1);
    assert_eq!(rep.rows[2].distance, 8);
    assert!(rep.ok(), "{:?}", &rep.mismatches[..rep.mismatches.len().min(5)]);
    assert!(rep.rows.iter().all(|r| r.differing <= r.separating));
}

#[test]
fn p1_default_margin_truncates() {
    let (b, sys, h) = p1();
    let small = build_dual(h, DEFAULT_FLIP_MARGIN).unwrap();
    let full = build_dual(h, P1_MARGIN).unwrap();
    assert!(small.is_connected());
    assert!(!small.saturated);
    assert!(small.zero_cubes() < full.zero_cubes());
    assert!(small.max_cube_dim() < full.max_cube_dim());
    // truncated geodesics can only be longer
    let pairs: Vec<(usize, usize)> = (0..b.core_vertices().len()).step_by(11).map(|x| (0, x)).collect();
    let rep = properness_witness(&small, h, b, sys, &pairs).unwrap();
    assert!(rep.rows.iter().all(|r| r.dual_distance.unwrap() >= r.differing));
    let principal = |d: &cubulate::dual_cube::DualCubeComplex| d.principal.iter().map(|&p| d.orientations[p].clone()).collect::<Vec<_>>();
    assert_eq!(principal(&small), principal(&full));
}

#[test]
fn pairs_leaving_the_core_are_skipped() {
    let b = build_ball_with_core(&load("p2"), 3).unwrap();
    let sys = WallSystem::build(&b);
    let h = HalfspaceSystem::new(&b, &sys, Exec::Parallel).unwrap();
    let d = build_dual(&h, 2).unwrap();
    let n = b.core_vertices().len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).step_by(3).map(move |y| (x, y))).collect();
    // oracle: a pair is countable iff its ball geodesic stays in the core
    let leaving: Vec<(usize, usize)> = pairs
        .iter()
        .copied()
        .filter(|&(x, y)| b.geodesic(x, y).unwrap().vertices.iter().any(|&v| !b.in_core(v)))
        .collect();
    assert!(!leaving.is_empty());
    let rep = properness_witness(&d, &h, &b, &sys, &pairs).unwrap();
    assert_eq!(rep.skipped, leaving);
    assert_eq!(rep.rows.len() + rep.skipped.len(), pairs.len());
}
