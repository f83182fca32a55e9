mod common;

use common::{load, word};
use cubulate::corpus;
use cubulate::enumerate::{tube_closes, Oracle};
use cubulate::word::{Cyclic, Letter, Path};
use cubulate::word_problem::{
    area_estimate, bs_length, dehn_reduce, dehn_step, relative_length, replay, Mode, PseudometricChoice,
    PseudometricMode, Solver,
};
use proptest::prelude::*;
use std::sync::OnceLock;

fn p1_oracle() -> &'static Oracle {
    static O: OnceLock<Oracle> = OnceLock::new();
    O.get_or_init(|| Oracle::new(&load("p1"), 18))
}

#[test]
fn normalization_examples() {
    let cx = load("p1");
    assert!(word(&cx, "a b b^-1 a^-1").is_empty());
    assert!(word(&cx, "t t^-1").is_empty());
    let p2 = load("p2");
    let w = word(&p2, "x y x");
    assert_eq!(p2.format_path(&w), "x^2 y");
}

#[test]
fn bass_serre_lengths() {
    let cx = load("p1");
    assert_eq!(bs_length(&word(&cx, "(a t b t^-1)^4")), 8);
    assert_eq!(bs_length(&word(&cx, "a")), 0);
    assert_eq!(bs_length(&word(&cx, "t b t^-1")), 2);
}

#[test]
fn relative_length_examples() {
    let cx = load("p1");
    let w = word(&cx, "a t b t^-1");
    let rl = |m| relative_length(&w, &PseudometricChoice::uniform(&cx, m), None).unwrap();
    assert_eq!(rl(PseudometricMode::Intrinsic), 4);
    assert_eq!(rl(PseudometricMode::Zero), 2);
    assert_eq!(rl(PseudometricMode::Coned), 4);
    assert!(relative_length(&w, &PseudometricChoice::uniform(&cx, PseudometricMode::Horoball), None).is_err());
}

fn rotate_to_base(cx: &cubulate::StaggeredComplex, c: &Cyclic) -> Path {
    match c {
        Cyclic::Factor { factor, elem } => cubulate::presentation::factor_word(cx, *factor, elem),
        _ => Path::from_letters(&cx.shape, 0, &c.letters(&cx.shape)),
    }
}

/// Rotations of a closed letter path that start at the base factor.
fn base_rotations(cx: &cubulate::StaggeredComplex, p: &Path) -> Vec<Path> {
    let letters = p.letters();
    (0..letters.len())
        .filter(|&s| cx.shape.letter_source(letters[s]) == 0)
        .map(|s| {
            let mut rot = letters[s..].to_vec();
            rot.extend_from_slice(&letters[..s]);
            Path::from_letters(&cx.shape, 0, &rot)
        })
        .collect()
}

/// Conjugacy witness independent of the Dehn algorithm: a rotation of `u`
/// equals a rotation of `v`, proved by a closing tube.
fn conjugate_by_tube(cx: &cubulate::StaggeredComplex, u: &Path, v: &Path) -> bool {
    base_rotations(cx, u).iter().any(|ru| {
        base_rotations(cx, v)
            .iter()
            .any(|rv| tube_closes(cx, &ru.concat(&rv.inverse(&cx.shape)).letters(), 9))
    })
}

#[test]
fn dehn_step_examples() {
    let cx = load("p1");
    let full = Cyclic::from_path(&cx.shape, &word(&cx, "(a t b t^-1)^4"));
    let (out, ev) = dehn_step(&cx, &full).unwrap();
    assert!(out.is_empty());
    assert_eq!(ev.edges, 8);

    // (a t b t^-1)^3 a t ends in B; close it with b t^-1 so that five or
    // more of the eight relator edges appear consecutively
    let w = word(&cx, "(a t b t^-1)^3 a t b^2 t^-1");
    let c = Cyclic::from_path(&cx.shape, &w);
    let (out, ev) = dehn_step(&cx, &c).unwrap();
    assert!(out.edge_count() < c.edge_count());
    assert!(2 * ev.edges > 8);
    // oracle: the rewritten word is conjugate to the input
    let out_path = rotate_to_base(&cx, &out);
    let rotated = rotate_to_base(&cx, &c);
    assert!(conjugate_by_tube(&cx, &out_path, &rotated), "{} vs {}", cx.format_path(&out_path), cx.format_path(&rotated));

    let short = Cyclic::from_path(&cx.shape, &word(&cx, "a t b t^-1"));
    assert!(dehn_step(&cx, &short).is_none());
}

#[test]
fn torsion_order_of_ab() {
    let cx = load("p1");
    let solver = Solver::new(&cx);
    let oracle = p1_oracle();
    for k in 1..=6 {
        let w = word(&cx, &format!("(a b)^{k}"));
        let dehn = solver.is_trivial(&w, Mode::Dehn).unwrap();
        let o = oracle.is_trivial(&w).unwrap();
        assert_eq!(dehn, o, "k={k}");
        assert_eq!(dehn, k % 4 == 0, "k={k}");
    }
}

#[test]
fn equality_examples() {
    let cx = load("p1");
    let solver = Solver::new(&cx);
    let u = word(&cx, "a b");
    assert!(solver.are_equal(&u, &u, Mode::Dehn).unwrap());
    let ba = word(&cx, "b a");
    assert!(!solver.are_equal(&u, &ba, Mode::Dehn).unwrap());
    assert!(!p1_oracle().is_trivial(&u.concat(&ba.inverse(&cx.shape))).unwrap());
    let ab5 = word(&cx, "(a b)^5");
    assert!(solver.are_equal(&ab5, &u, Mode::Dehn).unwrap());
    assert!(p1_oracle().is_trivial(&ab5.concat(&u.inverse(&cx.shape))).unwrap());
}

#[test]
fn area_examples() {
    let cx = load("p1");
    assert_eq!(area_estimate(&cx, &word(&cx, "(a b)^4")).unwrap(), 1);
    assert_eq!(area_estimate(&cx, &word(&cx, "")).unwrap(), 0);
    let w = word(&cx, "(a b)^4 a^3 (b a)^4 a^-3");
    let red = dehn_reduce(&cx, &w);
    assert!(red.trivial());
    assert_eq!(replay(&cx, &red.trace).unwrap(), Cyclic::Empty);
    assert_eq!(red.trace.events.len(), 2);
    assert!(area_estimate(&cx, &word(&cx, "a b")).is_err());
}

#[test]
fn single_factor_words_are_nontrivial() {
    for name in ["p1", "p2", "p3"] {
        let cx = load(name);
        let solver = Solver::new(&cx);
        for (_, _, w) in corpus::factor_corpus(&cx, 11, 120, 12) {
            assert!(!w.is_empty());
            assert!(!solver.is_trivial(&w, Mode::Dehn).unwrap(), "{name}: {}", cx.format_path(&w));
        }
    }
}

#[test]
fn factor_words_are_nontrivial_in_the_oracle() {
    let cx = load("p1");
    for (_, _, w) in corpus::factor_corpus(&cx, 3, 40, 6) {
        assert!(!p1_oracle().is_trivial(&w).unwrap(), "{}", cx.format_path(&w));
    }
}

#[test]
fn generated_trivial_words_cross_check() {
    for name in ["p1", "p2", "p3"] {
        let cx = load(name);
        for w in corpus::trivial_corpus(&cx, 5, 60, 3, 6) {
            let red = dehn_reduce(&cx, &w);
            assert!(red.trivial(), "{name}: {}", cx.format_path(&w));
            assert!(tube_closes(&cx, &w.letters(), cx.w_x() / 2 + 1), "{name}: {}", cx.format_path(&w));
            assert_eq!(replay(&cx, &red.trace).unwrap(), Cyclic::Empty);
        }
    }
}

#[test]
fn nontrivial_words_agree_with_the_oracle() {
    let cx = load("p1");
    let oracle = p1_oracle();
    let mut rng = corpus::rng(9);
    let mut decided = 0;
    for _ in 0..300 {
        let len = 2 * (1 + decided % 5);
        let letters = corpus::random_path(&cx, &mut rng, 0, len);
        let mut w = Path::from_letters(&cx.shape, 0, &letters);
        if w.end(&cx.shape) != 0 {
            w.push_edge(0, true);
        }
        let dehn = dehn_reduce(&cx, &w).trivial();
        if let Ok(o) = oracle.is_trivial(&w) {
            assert_eq!(dehn, o, "{}", cx.format_path(&w));
            decided += 1;
        }
    }
    assert!(decided > 200);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dehn_steps_shrink(seed in 0u64..10_000) {
        let cx = load("p1");
        let mut rng = corpus::rng(seed);
        let mut letters = corpus::random_trivial_letters(&cx, &mut rng, 3, 8);
        letters.extend(corpus::random_path(&cx, &mut rng, 0, 3));
        let w = Path::from_letters(&cx.shape, 0, &letters);
        let red = dehn_reduce(&cx, &w);
        let mut prev = Cyclic::from_path(&cx.shape, &w);
        for ev in &red.trace.events {
            prop_assert_eq!(Cyclic::Ring(ev.before.clone()), prev.clone());
            let (next, _) = dehn_step(&cx, &prev).unwrap();
            prop_assert!(next.edge_count() < prev.edge_count());
            prev = next;
        }
        prop_assert_eq!(prev, red.trace.output);
    }

    #[test]
    fn relative_length_modes(seed in 0u64..10_000, len in 0usize..20) {
        let cx = load("p2");
        let mut rng = corpus::rng(seed);
        let letters: Vec<Letter> = corpus::random_path(&cx, &mut rng, 0, len);
        let w = Path::from_letters(&cx.shape, 0, &letters);
        let rl = |m| relative_length(&w, &PseudometricChoice::uniform(&cx, m), None).unwrap();
        prop_assert_eq!(rl(PseudometricMode::Intrinsic) as usize, w.letter_len());
        prop_assert_eq!(rl(PseudometricMode::Zero) as usize, bs_length(&w));
    }
}
