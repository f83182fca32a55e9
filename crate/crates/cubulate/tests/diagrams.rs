mod common;

use common::{load, word};
use cubulate::corpus;
use cubulate::diagrams::{
    auxiliary, classify_cells, detect_cancelable_pair, diagram_from_trace, diagram_from_word, fold_pair, reduce,
    spelling_audit, surrounded_cell, Diagram, DiagramError, FaceLabel,
};
use cubulate::word::Path;
use cubulate::word_problem::{dehn_reduce, relator_letters};
use cubulate::StaggeredComplex;
use proptest::prelude::*;
use std::collections::HashSet;

/// Two copies of the relator cell glued along the letter at position `p`,
/// the second read backwards from the same position.
fn mirror_pair(cx: &StaggeredComplex, p: usize) -> Diagram {
    let mut d = Diagram::relator_cell(cx, 0, 0, false);
    d.disjoint_union(&Diagram::relator_cell(cx, 0, p, true));
    d.glue(cx, d.faces[0].boundary[p], d.faces[1].boundary[0]).unwrap()
}

#[test]
fn single_cell_diagram() {
    let cx = load("p1");
    let d = Diagram::relator_cell(&cx, 0, 0, false);
    assert_eq!(d.area(), 1);
    assert!(d.check_labels(&cx).is_empty());
    assert!(d.is_disk_like());
    assert!(d.rotation_system().is_some());
    assert_eq!(detect_cancelable_pair(&d), None);
    let aux = auxiliary(&d);
    // oracle: one collapsed region between consecutive essential letters
    let essential = relator_letters(&cx, 0).iter().filter(|l| l.is_edge()).count();
    assert_eq!(essential, 8);
    assert_eq!(aux.cells.len(), 1);
    assert_eq!(aux.cells[0].boundary.len(), essential);
    assert_eq!(aux.regions, essential);
    let c = classify_cells(&cx, &d);
    assert!(c[0].exposed && c[0].extreme && c[0].external);
    let rep = spelling_audit(&cx, &d);
    assert_eq!(rep.required, 0);
    assert!(rep.ok());
}

#[test]
fn diagrams_from_short_traces() {
    let cx = load("p1");
    let empty = diagram_from_word(&cx, &Path::empty(0)).unwrap();
    assert_eq!((empty.vertices.len(), empty.edges.len(), empty.area()), (1, 0, 0));
    assert!(auxiliary(&empty).cells.is_empty());

    let rel = word(&cx, "(a b)^4");
    let d = diagram_from_word(&cx, &rel).unwrap();
    assert_eq!(d.area(), 1);
    assert_eq!(d.boundary_letters(), rel.letters());
    assert!(d.check_labels(&cx).is_empty() && d.is_disk_like());

    assert_eq!(diagram_from_word(&cx, &word(&cx, "a b")), Err(DiagramError::NotTrivial));
    let mut trace = dehn_reduce(&cx, &rel).trace;
    trace.events[0].offset += 1;
    assert_eq!(diagram_from_trace(&cx, &trace), Err(DiagramError::TraceMismatch(0)));
}

#[test]
fn mirror_pairs_fold_to_one_cell() {
    let cx = load("p1");
    let d = mirror_pair(&cx, 2);
    assert_eq!(d.area(), 2);
    assert!(d.is_disk_like());
    let pair = detect_cancelable_pair(&d).unwrap();
    let f = fold_pair(&cx, &d, pair).unwrap();
    assert_eq!(f.area(), 1);
    assert!(f.check_labels(&cx).is_empty());
    assert!(f.is_disk_like());
    assert_eq!(f.boundary_path(&cx), d.boundary_path(&cx));
    assert_eq!(detect_cancelable_pair(&f), None);
    let (r, folds) = reduce(&cx, &d).unwrap();
    assert_eq!((r.area(), folds), (1, 1));
}

#[test]
fn forward_neighbours_are_not_cancelable() {
    let cx = load("p1");
    let mut d = Diagram::relator_cell(&cx, 0, 0, false);
    // t at position 0 against t^-1 at position 2 of a forward copy
    d.disjoint_union(&Diagram::relator_cell(&cx, 0, 2, false));
    let d = d.glue(&cx, d.faces[0].boundary[0], d.faces[1].boundary[0]).unwrap();
    assert_eq!(detect_cancelable_pair(&d), None);
    let aux = auxiliary(&d);
    assert_eq!(aux.cells.len(), 2);
    assert_eq!(aux.adjacent_cells().into_iter().collect::<Vec<_>>(), vec![(0, 1)]);
    let regions = |c: usize| -> HashSet<usize> {
        aux.cells[c].boundary.iter().flat_map(|&x| [aux.tail(&d, x), aux.head(&d, x)]).collect()
    };
    assert_eq!(regions(0).intersection(&regions(1)).count(), 2);
    // both cells of a two-cell diagram are extreme
    let classes = classify_cells(&cx, &d);
    assert!(classes.iter().all(|c| c.extreme), "{classes:?}");
    assert!(spelling_audit(&cx, &d).ok());
}

#[test]
fn internal_cell_forces_many_extreme_cells() {
    let cx = load("p1");
    let d = surrounded_cell(&cx, 0).unwrap();
    assert_eq!(d.area(), 9);
    assert!(d.is_disk_like());
    assert!(d.check_labels(&cx).is_empty());
    assert_eq!(detect_cancelable_pair(&d), None);
    let classes = classify_cells(&cx, &d);
    let centre = classes.iter().find(|c| c.face == 0).unwrap();
    assert!(!centre.external && !centre.exposed && !centre.extreme);
    let rep = spelling_audit(&cx, &d);
    assert_eq!(rep.internal, vec![(0, 4)]);
    assert_eq!(rep.required, 8);
    assert!(rep.extreme.len() >= 8, "{rep:?}");
    assert!(rep.ok());
    assert!(d.to_dot(&cx).starts_with("digraph diagram"));
}

#[test]
fn trace_corpus_diagrams_pass_the_audit() {
    for name in ["p1", "p2", "p3"] {
        let cx = load(name);
        let mut multi = 0;
        for (i, w) in corpus::trivial_corpus(&cx, 11, 40, 3, 3).into_iter().enumerate() {
            let red = dehn_reduce(&cx, &w);
            if !red.trivial() {
                continue;
            }
            let d = diagram_from_trace(&cx, &red.trace).unwrap();
            assert_eq!(d.boundary_path(&cx), w, "{name} #{i}");
            assert!(d.check_labels(&cx).is_empty(), "{name} #{i}");
            assert!(d.is_disk_like(), "{name} #{i}: chi {}", d.euler_characteristic());
            assert_eq!(detect_cancelable_pair(&d), None);
            assert!(d.area() <= red.trace.events.len());
            assert_eq!(auxiliary(&d).cells.len(), d.area());
            let rep = spelling_audit(&cx, &d);
            assert!(rep.ok(), "{name} #{i}: {rep:?}");
            if red.trace.events.len() >= 3 {
                multi += 1;
            }
        }
        assert!(multi > 0, "{name}: no trace with three events");
    }
}

#[test]
fn abelian_runs_get_vertex_space_faces() {
    let cx = load("p2");
    // a conjugate of the relator by a commutator-free abelian word
    let w = word(&cx, "y x (x b)^4 x^-1 y^-1");
    let d = diagram_from_word(&cx, &w).unwrap();
    assert_eq!(d.area(), 1);
    assert_eq!(d.boundary_path(&cx), w);
    assert!(d.check_labels(&cx).is_empty());
    // products of conjugates need respelled abelian runs somewhere
    let mut regions = 0;
    for w in corpus::trivial_corpus(&cx, 5, 30, 3, 3) {
        if let Ok(d) = diagram_from_word(&cx, &w) {
            assert!(d.check_labels(&cx).is_empty());
            regions += d.faces.iter().filter(|f| matches!(f.label, FaceLabel::VertexSpace { .. })).count();
        }
    }
    assert!(regions > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn folding_drops_one_cell(p in 0usize..16) {
        let cx = load("p1");
        let d = mirror_pair(&cx, p);
        let pair = detect_cancelable_pair(&d).unwrap();
        let f = fold_pair(&cx, &d, pair).unwrap();
        prop_assert_eq!(f.area() + 1, d.area());
        prop_assert!(f.check_labels(&cx).is_empty());
    }
}
