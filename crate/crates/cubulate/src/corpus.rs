//! Seeded random words: single-factor words and products of conjugated
//! relators.

use crate::presentation::{factor_word, StaggeredComplex};
use crate::word::{Elem, Letter, Path};
use crate::word_problem::relator_letters;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Letters valid at a factor, in index order.
fn letters_at(cx: &StaggeredComplex, factor: usize) -> Vec<Letter> {
    (0..cx.shape.letter_count())
        .map(|i| cx.shape.letter_at(i))
        .filter(|&l| cx.shape.letter_source(l) == factor)
        .collect()
}

/// A random edge path of exactly `len` letters from `start` with no
/// immediate backtracking.
pub fn random_path<R: Rng>(cx: &StaggeredComplex, rng: &mut R, start: usize, len: usize) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    let mut at = start;
    while out.len() < len {
        let opts: Vec<Letter> = letters_at(cx, at)
            .into_iter()
            .filter(|&l| out.last().is_none_or(|&p| p.inverse() != l))
            .collect();
        let l = opts[rng.gen_range(0..opts.len())];
        out.push(l);
        at = cx.shape.letter_target(l);
    }
    out
}

/// A nonempty reduced element of `factor` with letter length in `1..=max_len`,
/// conjugated to the base vertex.
pub fn random_factor_word<R: Rng>(cx: &StaggeredComplex, rng: &mut R, factor: usize, max_len: usize) -> Path {
    loop {
        let len = rng.gen_range(1..=max_len);
        let mut elem = cx.shape.identity(factor);
        for _ in 0..len {
            let g = rng.gen_range(0..cx.factors[factor].rank());
            elem = elem.mul(&cx.shape.gen_elem(factor, g, rng.gen_bool(0.5)));
        }
        if !elem.is_identity() {
            return factor_word(cx, factor, &elem);
        }
    }
}

/// `c · r · c^-1` for a random conjugator of at most `max_conj` letters and a
/// random rotation and orientation of a random relator.
pub fn random_conjugated_relator<R: Rng>(cx: &StaggeredComplex, rng: &mut R, max_conj: usize) -> Vec<Letter> {
    loop {
        let len = rng.gen_range(0..=max_conj);
        let c = random_path(cx, rng, 0, len);
        let at = cx.shape.path_end(0, &c).expect("generated path");
        let r = rng.gen_range(0..cx.relators.len());
        let mut rel = relator_letters(cx, r);
        if rng.gen_bool(0.5) {
            rel = rel.iter().rev().map(|l| l.inverse()).collect();
        }
        let starts: Vec<usize> = (0..rel.len()).filter(|&i| cx.shape.letter_source(rel[i]) == at).collect();
        if starts.is_empty() {
            continue;
        }
        let s = starts[rng.gen_range(0..starts.len())];
        let mut out = c.clone();
        out.extend_from_slice(&rel[s..]);
        out.extend_from_slice(&rel[..s]);
        out.extend(c.iter().rev().map(|l| l.inverse()));
        return out;
    }
}

/// A product of `1..=max_factors` conjugated relators, as raw letters.
pub fn random_trivial_letters<R: Rng>(
    cx: &StaggeredComplex,
    rng: &mut R,
    max_factors: usize,
    max_conj: usize,
) -> Vec<Letter> {
    let k = rng.gen_range(1..=max_factors);
    (0..k).flat_map(|_| random_conjugated_relator(cx, rng, max_conj)).collect()
}

/// The seeded corpus of trivial words used by the termination and area
/// checks; empty products are skipped.
pub fn trivial_corpus(cx: &StaggeredComplex, seed: u64, count: usize, max_factors: usize, max_conj: usize) -> Vec<Path> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let letters = random_trivial_letters(cx, &mut rng, max_factors, max_conj);
        let p = Path::from_letters(&cx.shape, 0, &letters);
        if !p.is_empty() {
            out.push(p);
        }
    }
    out
}

/// Seeded nonempty single-factor words, cycling through the factors.
pub fn factor_corpus(cx: &StaggeredComplex, seed: u64, count: usize, max_len: usize) -> Vec<(usize, Elem, Path)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let f = i % cx.factors.len();
            let p = random_factor_word(cx, &mut rng, f, max_len);
            let elem = p
                .syls
                .iter()
                .find_map(|s| match s {
                    crate::word::Syl::Elem { factor, elem } if *factor == f => Some(elem.clone()),
                    _ => None,
                })
                .expect("factor syllable");
            (f, elem, p)
        })
        .collect()
}
