mod common;

use common::load;
use cubulate::presentation::{compute_exponent, parse_presentation, PresentationError};
use cubulate::word::{ring_letters, Cyclic, Elem, Letter, Link, Path};
use proptest::prelude::*;

const DUMBBELL: &str = "factor A free a\nfactor B free b\nedge t A B\n";

fn a(inv: bool) -> Letter {
    Letter::Gen { factor: 0, gen: 0, inv }
}
fn b(inv: bool) -> Letter {
    Letter::Gen { factor: 1, gen: 0, inv }
}
fn t(inv: bool) -> Letter {
    Letter::Edge { edge: 0, inv }
}

#[test]
fn parses_p1_with_inserted_edges() {
    let cx = parse_presentation(&format!("{DUMBBELL}relator (a b)^4\n")).unwrap();
    assert_eq!(cx.relators.len(), 1);
    let r = &cx.relators[0];
    assert_eq!(r.exponent, 4);
    assert_eq!(r.period_letters(&cx.shape), vec![t(false), b(false), t(true), a(false)]);
    assert_eq!(cx.min_exponent().unwrap().value, 4);
    assert!(!cx.min_exponent().unwrap().below_four);
    assert_eq!(cx.w_x(), 16);
}

#[test]
fn equal_staggering_edges_are_rejected() {
    let err = parse_presentation(&format!("{DUMBBELL}relator (a b)^1\nrelator (a b a b)^1\n")).unwrap_err();
    match err {
        PresentationError::Staggering(v) => assert_eq!(v.len(), 1),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn relator_inside_a_factor_is_rejected() {
    let err = parse_presentation(&format!("{DUMBBELL}relator (a a)^1\n")).unwrap_err();
    assert_eq!(err, PresentationError::ConjugateIntoFactor { line: 4 });
}

#[test]
fn syntax_and_symbol_errors_carry_positions() {
    let err = parse_presentation(&format!("{DUMBBELL}relator (a b^4\n")).unwrap_err();
    assert!(matches!(err, PresentationError::Syntax { line: 4, .. }), "{err:?}");
    let err = parse_presentation(&format!("{DUMBBELL}relator (a c)^4\n")).unwrap_err();
    assert_eq!(err, PresentationError::UnknownSymbol { name: "c".into(), line: 4, col: 12 });
    let err = parse_presentation("factor A free a\nwibble\n").unwrap_err();
    assert!(matches!(err, PresentationError::Syntax { line: 2, col: 1, .. }));
}

#[test]
fn disconnected_graph_is_rejected() {
    let err = parse_presentation("factor A free a\nfactor B free b\n").unwrap_err();
    assert_eq!(err, PresentationError::Disconnected);
}

#[test]
fn cyclic_reduction_examples() {
    let cx = load("p1");
    // a t b t^-1 t b t^-1 collapses the middle backtrack
    let p = Path::from_letters(&cx.shape, 0, &[a(false), t(false), b(false), t(true), t(false), b(false), t(true)]);
    let c = Cyclic::from_path(&cx.shape, &p);
    assert_eq!(c.letters(&cx.shape), vec![t(false), b(false), b(false), t(true), a(false)]);
    // t b t^-1 t b t^-1 is conjugate into B
    let p = Path::from_letters(&cx.shape, 0, &[t(false), b(false), t(true), t(false), b(false), t(true)]);
    assert_eq!(Cyclic::from_path(&cx.shape, &p), Cyclic::Factor { factor: 1, elem: Elem::Free(vec![1, 1]) });
    let p = Path::from_letters(&cx.shape, 0, &[a(false), a(true)]);
    assert_eq!(Cyclic::from_path(&cx.shape, &p), Cyclic::Empty);
    let p2 = load("p2");
    let x = |inv| Letter::Gen { factor: 0, gen: 0, inv };
    let y = |inv| Letter::Gen { factor: 0, gen: 1, inv };
    let p = Path::from_letters(&p2.shape, 0, &[x(false), y(false), x(true)]);
    assert_eq!(Cyclic::from_path(&p2.shape, &p), Cyclic::Factor { factor: 0, elem: Elem::Abelian(vec![0, 1]) });
}

/// Independent period oracle: smallest rotation of the letter string that
/// maps it to itself.
fn letter_period(s: &[Letter]) -> usize {
    (1..=s.len()).find(|&d| s.len().is_multiple_of(d) && (0..s.len()).all(|i| s[i] == s[(i + d) % s.len()])).unwrap()
}

fn ring_of(cx: &cubulate::StaggeredComplex, letters: &[Letter]) -> Vec<Link> {
    let p = Path::from_letters(&cx.shape, 0, letters);
    match Cyclic::from_path(&cx.shape, &p) {
        Cyclic::Ring(r) => r,
        other => panic!("not a ring: {other:?}"),
    }
}

#[test]
fn exponent_examples() {
    let cx = load("p1");
    let p = [a(false), t(false), b(false), t(true)];
    let w: Vec<Letter> = p.iter().cycle().take(16).copied().collect();
    let (per, m) = compute_exponent(&ring_of(&cx, &w));
    assert_eq!((ring_letters(&cx.shape, &per).len(), m), (4, 4));
    let (_, m) = compute_exponent(&ring_of(&cx, &p));
    assert_eq!(m, 1);
    let q = [a(false), t(false), b(false), t(true), a(false), t(false), b(false), b(false), t(true)];
    let w: Vec<Letter> = q.iter().cycle().take(18).copied().collect();
    let ring = ring_of(&cx, &w);
    let (per, m) = compute_exponent(&ring);
    let letters = ring_letters(&cx.shape, &ring);
    let d = letter_period(&letters);
    assert_eq!(m, letters.len() / d);
    assert_eq!(ring_letters(&cx.shape, &per).len(), d);
    assert_eq!(m, 2);
}

#[test]
fn staggering_and_min_exponent() {
    let p3 = load("p3");
    assert!(p3.validate_staggering().is_empty());
    assert_eq!(p3.min_exponent().unwrap().value, 4);
    assert!(load("p1").validate_staggering().is_empty());
    let cx = parse_presentation(&format!("{DUMBBELL}relator (a b)^2\n")).unwrap();
    let m = cx.min_exponent().unwrap();
    assert_eq!((m.value, m.below_four), (2, true));
    assert_eq!(load("p0").min_exponent(), Err(PresentationError::NoRelators));
    // two relators where the second reaches a greater edge
    let text = "factor A free a\nfactor B free b\nfactor C free c\nedge s A B\nedge u B C\n\
                relator (a s b s^-1)^4\nrelator (u c u^-1 b)^4\n";
    assert_eq!(parse_presentation(text).unwrap().validate_staggering(), vec![]);
    let swapped = "factor A free a\nfactor B free b\nfactor C free c\nedge s A B\nedge u B C\norder edges u s\n\
                   relator (a s b s^-1)^4\nrelator (u c u^-1 b)^4\n";
    assert!(matches!(parse_presentation(swapped), Err(PresentationError::Staggering(_))));
}

#[test]
fn serialization_round_trips_corpus_files() {
    for name in ["p0", "p1", "p2", "p3"] {
        let cx = load(name);
        assert_eq!(parse_presentation(&cx.serialize()).unwrap(), cx, "{name}");
    }
}

fn dumbbell_letter() -> impl Strategy<Value = (bool, bool)> {
    (any::<bool>(), any::<bool>())
}

proptest! {
    #[test]
    fn round_trip_random_dumbbell(body in proptest::collection::vec(dumbbell_letter(), 1..10), m in 1usize..6) {
        let word: Vec<String> = body
            .iter()
            .map(|&(is_a, inv)| format!("{}{}", if is_a { "a" } else { "b" }, if inv { "^-1" } else { "" }))
            .collect();
        let text = format!("{DUMBBELL}relator ({})^{m}\n", word.join(" "));
        if let Ok(cx) = parse_presentation(&text) {
            prop_assert_eq!(parse_presentation(&cx.serialize()).unwrap(), cx);
        }
    }

    #[test]
    fn exponent_of_powers(body in proptest::collection::vec(dumbbell_letter(), 1..8), m in 1usize..5) {
        let cx = load("p1");
        let mut letters = Vec::new();
        let mut at = 0;
        for &(is_a, inv) in &body {
            let f = if is_a { 0 } else { 1 };
            if f != at { letters.push(t(at == 1)); at = f; }
            letters.push(Letter::Gen { factor: f, gen: 0, inv });
        }
        if at == 1 { letters.push(t(true)); }
        let p = Path::from_letters(&cx.shape, 0, &letters);
        let Cyclic::Ring(r) = Cyclic::from_path(&cx.shape, &p) else { return Ok(()); };
        let mut power = Vec::new();
        for _ in 0..m { power.extend(r.iter().cloned()); }
        let (per, k) = compute_exponent(&power);
        prop_assert_eq!(r.len() % per.len(), 0);
        prop_assert_eq!(k % m, 0);
        let mut again = Vec::new();
        for _ in 0..k { again.extend(per.iter().cloned()); }
        prop_assert_eq!(again, power);
    }
}
