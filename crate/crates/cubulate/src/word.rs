//! Letters, factor elements and reduced edge paths in the graph of spaces.
//!
//! A path is stored as alternating syllables: factor elements in normal
//! form and essential-edge letters. Normal forms are unique for the
//! fundamental groupoid of the graph of spaces without relators, so
//! syllable equality is group equality in the free product.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A single letter of a word: a factor generator or an essential edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    Gen { factor: usize, gen: usize, inv: bool },
    Edge { edge: usize, inv: bool },
}

impl Letter {
    pub fn inverse(self) -> Letter {
        match self {
            Letter::Gen { factor, gen, inv } => Letter::Gen { factor, gen, inv: !inv },
            Letter::Edge { edge, inv } => Letter::Edge { edge, inv: !inv },
        }
    }

    pub fn is_edge(self) -> bool {
        matches!(self, Letter::Edge { .. })
    }

    pub fn is_inverse(self) -> bool {
        match self {
            Letter::Gen { inv, .. } | Letter::Edge { inv, .. } => inv,
        }
    }

    /// The same letter with positive orientation.
    pub fn positive(self) -> Letter {
        if self.is_inverse() {
            self.inverse()
        } else {
            self
        }
    }
}

/// Kind of a vertex space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FactorKind {
    Free,
    Abelian,
}

/// An element of a factor group in normal form.
///
/// Free elements are freely reduced signed generator indices (`g + 1` or
/// `-(g + 1)`); abelian elements are exponent vectors of length `rank`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Elem {
    Free(Vec<i32>),
    Abelian(Vec<i64>),
}

impl Elem {
    pub fn identity(kind: FactorKind, rank: usize) -> Elem {
        match kind {
            FactorKind::Free => Elem::Free(Vec::new()),
            FactorKind::Abelian => Elem::Abelian(vec![0; rank]),
        }
    }

    pub fn generator(kind: FactorKind, rank: usize, gen: usize, inv: bool) -> Elem {
        match kind {
            FactorKind::Free => Elem::Free(vec![if inv { -(gen as i32 + 1) } else { gen as i32 + 1 }]),
            FactorKind::Abelian => {
                let mut v = vec![0; rank];
                v[gen] = if inv { -1 } else { 1 };
                Elem::Abelian(v)
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Elem::Free(v) => v.is_empty(),
            Elem::Abelian(v) => v.iter().all(|&x| x == 0),
        }
    }

    pub fn mul(&self, other: &Elem) -> Elem {
        match (self, other) {
            (Elem::Free(a), Elem::Free(b)) => {
                let mut out = a.clone();
                for &x in b {
                    if out.last() == Some(&-x) {
                        out.pop();
                    } else {
                        out.push(x);
                    }
                }
                Elem::Free(out)
            }
            (Elem::Abelian(a), Elem::Abelian(b)) => {
                Elem::Abelian(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            _ => panic!("multiplying elements of different factor kinds"),
        }
    }

    pub fn inverse(&self) -> Elem {
        match self {
            Elem::Free(a) => Elem::Free(a.iter().rev().map(|x| -x).collect()),
            Elem::Abelian(a) => Elem::Abelian(a.iter().map(|x| -x).collect()),
        }
    }

    /// Letter length: free reduced length or the l1 norm.
    pub fn length(&self) -> u64 {
        match self {
            Elem::Free(a) => a.len() as u64,
            Elem::Abelian(a) => a.iter().map(|x| x.unsigned_abs()).sum(),
        }
    }

    /// Expansion into generator letters. Abelian elements use the
    /// lexicographic staircase: all steps in the first generator, then the
    /// second, and so on.
    pub fn letters(&self, factor: usize) -> Vec<Letter> {
        match self {
            Elem::Free(a) => a
                .iter()
                .map(|&x| Letter::Gen { factor, gen: (x.unsigned_abs() - 1) as usize, inv: x < 0 })
                .collect(),
            Elem::Abelian(a) => {
                let mut out = Vec::new();
                for (gen, &e) in a.iter().enumerate() {
                    for _ in 0..e.unsigned_abs() {
                        out.push(Letter::Gen { factor, gen, inv: e < 0 });
                    }
                }
                out
            }
        }
    }
}

/// A syllable of a reduced path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Syl {
    Edge { edge: usize, inv: bool },
    Elem { factor: usize, elem: Elem },
}

/// Static shape of the graph of spaces needed to interpret letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphShape {
    pub kinds: Vec<FactorKind>,
    pub ranks: Vec<usize>,
    /// (source factor, target factor) for each essential edge.
    pub ends: Vec<(usize, usize)>,
}

impl GraphShape {
    pub fn letter_source(&self, l: Letter) -> usize {
        match l {
            Letter::Gen { factor, .. } => factor,
            Letter::Edge { edge, inv } => {
                let (s, t) = self.ends[edge];
                if inv {
                    t
                } else {
                    s
                }
            }
        }
    }

    pub fn letter_target(&self, l: Letter) -> usize {
        self.letter_source(l.inverse())
    }

    pub fn identity(&self, factor: usize) -> Elem {
        Elem::identity(self.kinds[factor], self.ranks[factor])
    }

    pub fn gen_elem(&self, factor: usize, gen: usize, inv: bool) -> Elem {
        Elem::generator(self.kinds[factor], self.ranks[factor], gen, inv)
    }

    /// Number of distinct letters (both orientations) in the global index.
    pub fn letter_count(&self) -> usize {
        2 * (self.ranks.iter().sum::<usize>() + self.ends.len())
    }

    /// Dense index of a letter: generators first (factor-major), then edges;
    /// the inverse of index `i` is `i ^ 1`.
    pub fn letter_index(&self, l: Letter) -> usize {
        match l {
            Letter::Gen { factor, gen, inv } => {
                let off: usize = self.ranks[..factor].iter().sum();
                2 * (off + gen) + inv as usize
            }
            Letter::Edge { edge, inv } => {
                let off: usize = self.ranks.iter().sum();
                2 * (off + edge) + inv as usize
            }
        }
    }

    pub fn letter_at(&self, index: usize) -> Letter {
        let inv = index & 1 == 1;
        let mut k = index / 2;
        for (factor, &r) in self.ranks.iter().enumerate() {
            if k < r {
                return Letter::Gen { factor, gen: k, inv };
            }
            k -= r;
        }
        Letter::Edge { edge: k, inv }
    }

    /// Checks that `letters` is an edge path starting at `start`; returns the
    /// terminal factor.
    pub fn path_end(&self, start: usize, letters: &[Letter]) -> Result<usize, usize> {
        let mut at = start;
        for (i, &l) in letters.iter().enumerate() {
            if self.letter_source(l) != at {
                return Err(i);
            }
            at = self.letter_target(l);
        }
        Ok(at)
    }
}

/// A reduced edge path: syllables in normal form, no trivial factor
/// syllables, no backtracking `e e^-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Path {
    pub start: usize,
    pub syls: Vec<Syl>,
}

impl Path {
    pub fn empty(start: usize) -> Path {
        Path { start, syls: Vec::new() }
    }

    /// Reduces a letter sequence. The letters must form a valid path.
    pub fn from_letters(shape: &GraphShape, start: usize, letters: &[Letter]) -> Path {
        let mut p = Path::empty(start);
        for &l in letters {
            p.push_letter(shape, l);
        }
        p
    }

    pub fn push_letter(&mut self, shape: &GraphShape, l: Letter) {
        match l {
            Letter::Gen { factor, gen, inv } => {
                self.push_elem(factor, shape.gen_elem(factor, gen, inv));
            }
            Letter::Edge { edge, inv } => self.push_edge(edge, inv),
        }
    }

    pub fn push_edge(&mut self, edge: usize, inv: bool) {
        if let Some(Syl::Edge { edge: e, inv: i }) = self.syls.last() {
            if *e == edge && *i != inv {
                self.syls.pop();
                return;
            }
        }
        self.syls.push(Syl::Edge { edge, inv });
    }

    pub fn push_elem(&mut self, factor: usize, elem: Elem) {
        if elem.is_identity() {
            return;
        }
        if let Some(Syl::Elem { elem: top, .. }) = self.syls.last_mut() {
            let prod = top.mul(&elem);
            if prod.is_identity() {
                self.syls.pop();
                // removing a syllable may expose an edge pair e e^-1
                let n = self.syls.len();
                if n >= 2 {
                    if let (Syl::Edge { edge: a, inv: x }, Syl::Edge { edge: b, inv: y }) =
                        (&self.syls[n - 2], &self.syls[n - 1])
                    {
                        if a == b && x != y {
                            self.syls.truncate(n - 2);
                        }
                    }
                }
            } else {
                *top = prod;
            }
            return;
        }
        self.syls.push(Syl::Elem { factor, elem });
    }

    pub fn push_syl(&mut self, s: &Syl) {
        match s {
            Syl::Edge { edge, inv } => self.push_edge(*edge, *inv),
            Syl::Elem { factor, elem } => self.push_elem(*factor, elem.clone()),
        }
    }

    pub fn concat(&self, other: &Path) -> Path {
        let mut p = self.clone();
        for s in &other.syls {
            p.push_syl(s);
        }
        p
    }

    pub fn end(&self, shape: &GraphShape) -> usize {
        let mut at = self.start;
        for s in &self.syls {
            if let Syl::Edge { edge, inv } = s {
                at = shape.letter_target(Letter::Edge { edge: *edge, inv: *inv });
            }
        }
        at
    }

    pub fn inverse(&self, shape: &GraphShape) -> Path {
        let mut p = Path::empty(self.end(shape));
        for s in self.syls.iter().rev() {
            match s {
                Syl::Edge { edge, inv } => p.push_edge(*edge, !*inv),
                Syl::Elem { factor, elem } => p.push_elem(*factor, elem.inverse()),
            }
        }
        p
    }

    pub fn is_empty(&self) -> bool {
        self.syls.is_empty()
    }

    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for s in &self.syls {
            match s {
                Syl::Edge { edge, inv } => out.push(Letter::Edge { edge: *edge, inv: *inv }),
                Syl::Elem { factor, elem } => out.extend(elem.letters(*factor)),
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.syls.iter().filter(|s| matches!(s, Syl::Edge { .. })).count()
    }

    pub fn letter_len(&self) -> usize {
        self.syls
            .iter()
            .map(|s| match s {
                Syl::Edge { .. } => 1,
                Syl::Elem { elem, .. } => elem.length() as usize,
            })
            .sum()
    }
}

/// One step of a cyclic word: an edge letter followed by the factor element
/// at its target (possibly the identity).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Link {
    pub edge: usize,
    pub inv: bool,
    pub after: Elem,
}

/// A cyclically reduced closed path, up to rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cyclic {
    Empty,
    /// Conjugate into a single factor.
    Factor { factor: usize, elem: Elem },
    /// At least one essential edge; each link's element sits at the target
    /// of its edge, and the last link returns to the source of the first.
    Ring(Vec<Link>),
}

impl Cyclic {
    /// Cyclic reduction of a closed path.
    pub fn from_path(shape: &GraphShape, p: &Path) -> Cyclic {
        let mut syls: std::collections::VecDeque<Syl> = p.syls.iter().cloned().collect();
        loop {
            if syls.len() < 2 {
                break;
            }
            let first = syls.front().unwrap().clone();
            let last = syls.back().unwrap().clone();
            match (&first, &last) {
                (Syl::Elem { factor, elem: a }, Syl::Elem { elem: b, .. }) => {
                    let prod = b.mul(a);
                    let f = *factor;
                    syls.pop_front();
                    syls.pop_back();
                    if !prod.is_identity() {
                        syls.push_back(Syl::Elem { factor: f, elem: prod });
                    }
                }
                (Syl::Edge { edge: a, inv: x }, Syl::Edge { edge: b, inv: y }) if a == b && x != y => {
                    syls.pop_front();
                    syls.pop_back();
                }
                _ => break,
            }
        }
        let syls: Vec<Syl> = syls.into_iter().collect();
        let Some(first_edge) = syls.iter().position(|s| matches!(s, Syl::Edge { .. })) else {
            return match syls.into_iter().next() {
                None => Cyclic::Empty,
                Some(Syl::Elem { factor, elem }) => Cyclic::Factor { factor, elem },
                Some(Syl::Edge { .. }) => unreachable!(),
            };
        };
        let mut rot = syls[first_edge..].to_vec();
        rot.extend_from_slice(&syls[..first_edge]);
        let mut ring = Vec::new();
        for (i, s) in rot.iter().enumerate() {
            if let Syl::Edge { edge, inv } = *s {
                let after = match rot.get(i + 1) {
                    Some(Syl::Elem { elem, .. }) => elem.clone(),
                    _ => shape.identity(shape.letter_target(Letter::Edge { edge, inv })),
                };
                ring.push(Link { edge, inv, after });
            }
        }
        Cyclic::Ring(ring)
    }

    pub fn edge_count(&self) -> usize {
        match self {
            Cyclic::Ring(r) => r.len(),
            _ => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Cyclic::Empty)
    }

    /// Letters of the cyclic word read from link 0.
    pub fn letters(&self, shape: &GraphShape) -> Vec<Letter> {
        match self {
            Cyclic::Empty => Vec::new(),
            Cyclic::Factor { factor, elem } => elem.letters(*factor),
            Cyclic::Ring(r) => ring_letters(shape, r),
        }
    }

    pub fn letter_len(&self) -> usize {
        match self {
            Cyclic::Empty => 0,
            Cyclic::Factor { elem, .. } => elem.length() as usize,
            Cyclic::Ring(r) => r.iter().map(|l| 1 + l.after.length() as usize).sum(),
        }
    }
}

pub fn ring_letters(shape: &GraphShape, r: &[Link]) -> Vec<Letter> {
    let mut out = Vec::new();
    for l in r {
        let e = Letter::Edge { edge: l.edge, inv: l.inv };
        out.push(e);
        out.extend(l.after.letters(shape.letter_target(e)));
    }
    out
}

/// The closed path spelled by a ring, starting at the source of link 0.
pub fn ring_path(shape: &GraphShape, r: &[Link]) -> Path {
    let start = shape.letter_source(Letter::Edge { edge: r[0].edge, inv: r[0].inv });
    Path::from_letters(shape, start, &ring_letters(shape, r))
}

/// The inverse of a ring: read backwards.
pub fn ring_inverse(r: &[Link]) -> Vec<Link> {
    let n = r.len();
    (0..n)
        .map(|k| {
            // link k of the inverse is edge (n-1-k) inverted followed by the
            // inverse of the element preceding it in the original
            let j = n - 1 - k;
            let prev = &r[(j + n - 1) % n];
            Link { edge: r[j].edge, inv: !r[j].inv, after: prev.after.inverse() }
        })
        .collect()
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Gen { factor, gen, inv } => write!(f, "g{factor}.{gen}{}", if *inv { "'" } else { "" }),
            Letter::Edge { edge, inv } => write!(f, "e{edge}{}", if *inv { "'" } else { "" }),
        }
    }
}
