//! Word problem: Dehn's algorithm on cyclic words, cross-checked against a
//! bounded enumeration oracle; Bass-Serre and relative lengths.

use crate::enumerate::{Oracle, OracleError};
use crate::presentation::StaggeredComplex;
use crate::word::{ring_inverse, ring_letters, Cyclic, Elem, Letter, Link, Path, Syl};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordProblemError {
    #[error("oracle inconclusive: {0}")]
    Inconclusive(#[from] OracleError),
    #[error("oracle mode requested but no oracle radius was configured")]
    NoOracle,
    #[error("Dehn algorithm and oracle disagree on {word}: dehn={dehn}, oracle={oracle}; trace has {events} events")]
    Disagreement { word: String, dehn: bool, oracle: bool, events: usize, trace: Box<DehnTrace> },
    #[error("area requested for a word the Dehn algorithm does not reduce to the empty word")]
    NotTrivial,
    #[error("horoball pseudometric requested without a horoball context")]
    NoHoroballContext,
    #[error("paths do not share endpoints")]
    EndpointMismatch,
}

/// How triviality is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Dehn,
    Oracle,
    CrossCheck,
}

/// One relator rewrite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DehnEvent {
    /// The cyclic word before the rewrite.
    pub before: Vec<Link>,
    /// Index of the first matched link in `before`.
    pub start: usize,
    /// Number of matched essential edges.
    pub edges: usize,
    pub relator: usize,
    /// Link offset into the relator ring (or its inverse) where the match begins.
    pub offset: usize,
    /// True when the match is against the inverse relator.
    pub inverse: bool,
    /// Letters that replace the matched span.
    pub replacement: Vec<Letter>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DehnTrace {
    pub input: Path,
    pub events: Vec<DehnEvent>,
    pub output: Cyclic,
}

/// Result of the greedy Dehn loop.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub trace: DehnTrace,
}

impl Reduction {
    pub fn trivial(&self) -> bool {
        self.trace.output.is_empty()
    }
}

/// Freely and abelianly reduces a letter path.
pub fn normalize(cx: &StaggeredComplex, start: usize, letters: &[Letter]) -> Path {
    Path::from_letters(&cx.shape, start, letters)
}

/// Number of essential-edge letters.
pub fn bs_length(w: &Path) -> usize {
    w.edge_count()
}

pub fn cyclic_reduce(cx: &StaggeredComplex, w: &Path) -> Cyclic {
    Cyclic::from_path(&cx.shape, w)
}

/// Relator rings and their inverses, in matching order.
fn relator_rings(cx: &StaggeredComplex) -> Vec<(usize, bool, Vec<Link>)> {
    let mut out = Vec::new();
    for (i, r) in cx.relators.iter().enumerate() {
        let ring = r.ring();
        out.push((i, false, ring.clone()));
        out.push((i, true, ring_inverse(&ring)));
    }
    out
}

/// One greedy rewrite: the match with the largest Bass-Serre reduction,
/// first in (relator, direction, word offset, relator offset) order on ties.
pub fn dehn_step(cx: &StaggeredComplex, w: &Cyclic) -> Option<(Cyclic, DehnEvent)> {
    dehn_step_with(cx, w, &relator_rings(cx))
}

fn dehn_step_with(
    cx: &StaggeredComplex,
    w: &Cyclic,
    rings: &[(usize, bool, Vec<Link>)],
) -> Option<(Cyclic, DehnEvent)> {
    let Cyclic::Ring(word) = w else { return None };
    let n = word.len();
    // (k, ring index, i, j)
    let mut best: Option<(usize, usize, usize, usize)> = None;
    for (ri, (_, _, ring)) in rings.iter().enumerate() {
        let e = ring.len();
        for i in 0..n {
            for j in 0..e {
                let mut k = 0;
                while k < n.min(e) {
                    let (a, b) = (&word[(i + k) % n], &ring[(j + k) % e]);
                    if a.edge != b.edge || a.inv != b.inv {
                        break;
                    }
                    k += 1;
                    if k < n.min(e) && a.after != b.after {
                        break;
                    }
                }
                if 2 * k > e && best.is_none_or(|(bk, _, _, _)| k > bk) {
                    best = Some((k, ri, i, j));
                }
            }
        }
    }
    let (k, ri, i, j) = best?;
    let (relator, inverse, ring) = &rings[ri];
    let e = ring.len();
    // complement C = h_{j+k-1} r_{j+k} h_{j+k} ... r_{j-1} h_{j-1}; we splice in C^-1
    let shape = &cx.shape;
    let first = Letter::Edge { edge: word[i].edge, inv: word[i].inv };
    let start = shape.letter_source(first);
    let mut comp = Path::empty(shape.letter_target(Letter::Edge { edge: ring[(j + k - 1) % e].edge, inv: ring[(j + k - 1) % e].inv }));
    comp.push_elem(comp.start, ring[(j + k - 1) % e].after.clone());
    for s in k..e {
        let l = &ring[(j + s) % e];
        comp.push_edge(l.edge, l.inv);
        let f = shape.letter_target(Letter::Edge { edge: l.edge, inv: l.inv });
        comp.push_elem(f, l.after.clone());
    }
    let replacement = comp.inverse(shape);
    let mut out = Path::empty(start);
    for s in &replacement.syls {
        out.push_syl(s);
    }
    let last = &word[(i + k - 1) % n];
    out.push_elem(shape.letter_target(Letter::Edge { edge: last.edge, inv: last.inv }), last.after.clone());
    for s in k..n {
        let l = &word[(i + s) % n];
        out.push_edge(l.edge, l.inv);
        out.push_elem(shape.letter_target(Letter::Edge { edge: l.edge, inv: l.inv }), l.after.clone());
    }
    let event = DehnEvent {
        before: word.clone(),
        start: i,
        edges: k,
        relator: *relator,
        offset: j,
        inverse: *inverse,
        replacement: replacement.letters(),
    };
    Some((Cyclic::from_path(shape, &out), event))
}

/// Runs the greedy loop to a fixed point.
pub fn dehn_reduce(cx: &StaggeredComplex, w: &Path) -> Reduction {
    let rings = relator_rings(cx);
    let mut cur = Cyclic::from_path(&cx.shape, w);
    let mut events = Vec::new();
    while let Some((next, ev)) = dehn_step_with(cx, &cur, &rings) {
        debug_assert!(next.edge_count() < cur.edge_count());
        events.push(ev);
        cur = next;
    }
    Reduction { trace: DehnTrace { input: w.clone(), events, output: cur } }
}

/// Replays a trace from its input and returns the final cyclic word.
pub fn replay(cx: &StaggeredComplex, trace: &DehnTrace) -> Result<Cyclic, usize> {
    let rings = relator_rings(cx);
    let mut cur = Cyclic::from_path(&cx.shape, &trace.input);
    for (n, ev) in trace.events.iter().enumerate() {
        match (&cur, dehn_step_with(cx, &cur, &rings)) {
            (Cyclic::Ring(r), Some((next, got))) if *r == ev.before && got == *ev => cur = next,
            _ => return Err(n),
        }
    }
    Ok(cur)
}

/// Decides word problems, optionally against a bounded oracle.
pub struct Solver<'a> {
    pub cx: &'a StaggeredComplex,
    oracle: Option<Oracle>,
}

impl<'a> Solver<'a> {
    pub fn new(cx: &'a StaggeredComplex) -> Self {
        Solver { cx, oracle: None }
    }

    /// Enables oracle and cross-check modes with the given enumeration radius.
    pub fn with_oracle(cx: &'a StaggeredComplex, radius: usize) -> Self {
        Solver { cx, oracle: Some(Oracle::new(cx, radius)) }
    }

    pub fn oracle(&self) -> Option<&Oracle> {
        self.oracle.as_ref()
    }

    pub fn is_trivial(&self, w: &Path, mode: Mode) -> Result<bool, WordProblemError> {
        match mode {
            Mode::Dehn => Ok(dehn_reduce(self.cx, w).trivial()),
            Mode::Oracle => {
                let o = self.oracle.as_ref().ok_or(WordProblemError::NoOracle)?;
                Ok(o.is_trivial(w)?)
            }
            Mode::CrossCheck => {
                let o = self.oracle.as_ref().ok_or(WordProblemError::NoOracle)?;
                let red = dehn_reduce(self.cx, w);
                let oracle = o.is_trivial(w)?;
                if oracle != red.trivial() {
                    return Err(WordProblemError::Disagreement {
                        word: self.cx.format_path(w),
                        dehn: red.trivial(),
                        oracle,
                        events: red.trace.events.len(),
                        trace: Box::new(red.trace),
                    });
                }
                Ok(oracle)
            }
        }
    }

    /// Equality of two paths with common endpoints.
    pub fn are_equal(&self, u: &Path, v: &Path, mode: Mode) -> Result<bool, WordProblemError> {
        let shape = &self.cx.shape;
        if u.start != v.start || u.end(shape) != v.end(shape) {
            return Err(WordProblemError::EndpointMismatch);
        }
        let w = u.concat(&v.inverse(shape));
        self.is_trivial(&w, mode)
    }
}

/// Number of relator rewrites the Dehn loop needs to empty `w`.
pub fn area_estimate(cx: &StaggeredComplex, w: &Path) -> Result<usize, WordProblemError> {
    let red = dehn_reduce(cx, w);
    if !red.trivial() {
        return Err(WordProblemError::NotTrivial);
    }
    Ok(red.trace.events.len())
}

/// Per-factor pseudometric on vertex spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PseudometricMode {
    /// The cube-complex metric of the vertex space.
    Intrinsic,
    /// Vertex spaces electrified to points.
    Zero,
    /// Vertex spaces coned off to diameter one.
    Coned,
    /// Distance in a combinatorial horoball over the vertex space.
    Horoball,
}

/// A uniform choice of pseudometric per factor id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudometricChoice {
    pub modes: Vec<PseudometricMode>,
}

impl PseudometricChoice {
    pub fn uniform(cx: &StaggeredComplex, mode: PseudometricMode) -> Self {
        PseudometricChoice { modes: vec![mode; cx.factors.len()] }
    }
}

/// Distances inside vertex spaces that are not intrinsic, such as horoball
/// distances; supplied by the horoball module.
pub trait SyllableMetric {
    /// Distance between the identity and `elem` in the factor's space, or
    /// `None` when out of range of the context.
    fn syllable_distance(&self, factor: usize, elem: &Elem) -> Option<u64>;
}

/// Pseudometric length of a single factor syllable.
pub fn syllable_length(
    mode: PseudometricMode,
    factor: usize,
    elem: &Elem,
    ctx: Option<&dyn SyllableMetric>,
) -> Result<u64, WordProblemError> {
    Ok(match mode {
        PseudometricMode::Intrinsic => elem.length(),
        PseudometricMode::Zero => 0,
        PseudometricMode::Coned => u64::from(!elem.is_identity()),
        PseudometricMode::Horoball => ctx
            .ok_or(WordProblemError::NoHoroballContext)?
            .syllable_distance(factor, elem)
            .ok_or(WordProblemError::NoHoroballContext)?,
    })
}

/// `rl(w)`: edge count plus the pseudometric lengths of the factor syllables.
/// All built-in pseudometrics take integer values.
pub fn relative_length(
    w: &Path,
    pm: &PseudometricChoice,
    ctx: Option<&dyn SyllableMetric>,
) -> Result<u64, WordProblemError> {
    let mut total = 0;
    for s in &w.syls {
        total += match s {
            Syl::Edge { .. } => 1,
            Syl::Elem { factor, elem } => syllable_length(pm.modes[*factor], *factor, elem, ctx)?,
        };
    }
    Ok(total)
}

/// Letters of the relator attaching word `p^m`, as a closed path.
pub fn relator_letters(cx: &StaggeredComplex, relator: usize) -> Vec<Letter> {
    ring_letters(&cx.shape, &cx.relators[relator].ring())
}
