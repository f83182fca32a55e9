//! Staggered presentations: the text format, validation, exponents.

use crate::word::{ring_letters, Cyclic, Elem, FactorKind, GraphShape, Letter, Link, Path};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown symbol `{name}` at line {line}, column {col}")]
    UnknownSymbol { name: String, line: usize, col: usize },
    #[error("word at line {line} is not an edge path (letter {position} starts at the wrong vertex space)")]
    NotAPath { line: usize, position: usize },
    #[error("the graph of spaces is disconnected")]
    Disconnected,
    #[error("staggering violated: {}", fmt_violations(.0))]
    Staggering(Vec<StaggeringViolation>),
    #[error("relator at line {line} is conjugate into a factor")]
    ConjugateIntoFactor { line: usize },
    #[error("the presentation has no relators")]
    NoRelators,
}

fn fmt_violations(v: &[StaggeringViolation]) -> String {
    v.iter()
        .map(|x| format!("relators {} and {} ({})", x.earlier, x.later, x.reason))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaggeringViolation {
    pub earlier: usize,
    pub later: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub id: String,
    pub kind: FactorKind,
    pub gens: Vec<String>,
}

impl FactorSpec {
    pub fn rank(&self) -> usize {
        self.gens.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub source: usize,
    pub target: usize,
}

/// A relator `p^m` with `p` not a proper power.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relator {
    /// The period as a cyclically reduced ring.
    pub period: Vec<Link>,
    pub exponent: usize,
    /// Least and greatest essential edge of the period, as edge ids.
    pub min_edge: usize,
    pub max_edge: usize,
}

impl Relator {
    /// The full attaching ring `p^m`.
    pub fn ring(&self) -> Vec<Link> {
        let mut r = Vec::with_capacity(self.period.len() * self.exponent);
        for _ in 0..self.exponent {
            r.extend(self.period.iter().cloned());
        }
        r
    }

    pub fn period_letters(&self, shape: &GraphShape) -> Vec<Letter> {
        ring_letters(shape, &self.period)
    }

    /// Number of letters in the period, `|p|`.
    pub fn period_len(&self, shape: &GraphShape) -> usize {
        self.period_letters(shape).len()
    }

    /// Number of essential edges on the attaching map.
    pub fn essential_edges(&self) -> usize {
        self.period.len() * self.exponent
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaggeredComplex {
    pub factors: Vec<FactorSpec>,
    pub edges: Vec<EdgeSpec>,
    /// Edge ids listed from least to greatest.
    pub edge_order: Vec<usize>,
    pub relators: Vec<Relator>,
    pub shape: GraphShape,
}

/// `n(X)` with the flag raised when it falls below four.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinExponent {
    pub value: usize,
    pub below_four: bool,
}

impl StaggeredComplex {
    pub fn edge_rank(&self, edge: usize) -> usize {
        self.edge_order.iter().position(|&e| e == edge).expect("edge in order")
    }

    pub fn min_exponent(&self) -> Result<MinExponent, PresentationError> {
        let value = self.relators.iter().map(|r| r.exponent).min().ok_or(PresentationError::NoRelators)?;
        Ok(MinExponent { value, below_four: value < 4 })
    }

    /// Whether the hypothesis `n(X) >= 4` holds.
    pub fn in_hypothesis(&self) -> bool {
        self.min_exponent().map(|m| !m.below_four).unwrap_or(false)
    }

    /// Largest attaching-map letter count over relators.
    pub fn w_x(&self) -> usize {
        self.relators
            .iter()
            .map(|r| r.period_len(&self.shape) * r.exponent)
            .max()
            .unwrap_or(0)
    }

    pub fn is_dumbbell(&self) -> bool {
        self.factors.len() == 2 && self.edges.len() == 1
    }

    pub fn validate_staggering(&self) -> Vec<StaggeringViolation> {
        let mut out = Vec::new();
        for i in 0..self.relators.len() {
            for j in i + 1..self.relators.len() {
                let (a, b) = (&self.relators[i], &self.relators[j]);
                let mut reasons = Vec::new();
                if self.edge_rank(a.max_edge) >= self.edge_rank(b.max_edge) {
                    reasons.push("max edge does not increase");
                }
                if self.edge_rank(a.min_edge) >= self.edge_rank(b.min_edge) {
                    reasons.push("min edge does not increase");
                }
                if !reasons.is_empty() {
                    out.push(StaggeringViolation { earlier: i, later: j, reason: reasons.join(", ") });
                }
            }
        }
        out
    }

    fn symbols(&self) -> HashMap<String, Letter> {
        let mut m = HashMap::new();
        for (f, spec) in self.factors.iter().enumerate() {
            for (g, name) in spec.gens.iter().enumerate() {
                m.insert(name.clone(), Letter::Gen { factor: f, gen: g, inv: false });
            }
        }
        for (e, spec) in self.edges.iter().enumerate() {
            m.insert(spec.id.clone(), Letter::Edge { edge: e, inv: false });
        }
        m
    }

    /// Parses a group word based at the first factor. On a dumbbell, edge
    /// letters may be omitted and are inserted between syllables.
    pub fn parse_word(&self, text: &str) -> Result<Path, PresentationError> {
        let symbols = self.symbols();
        let letters = parse_word_expr(text, 1, 0, &symbols)?;
        let letters = if self.is_dumbbell() && !letters.iter().any(|l| l.is_edge()) {
            insert_dumbbell_edges(&self.shape, &letters, Some(0))
        } else {
            letters
        };
        match self.shape.path_end(0, &letters) {
            Ok(0) => Ok(Path::from_letters(&self.shape, 0, &letters)),
            Ok(_) => Err(PresentationError::NotAPath { line: 1, position: letters.len() }),
            Err(position) => Err(PresentationError::NotAPath { line: 1, position }),
        }
    }

    pub fn letter_name(&self, l: Letter) -> String {
        let (base, inv) = match l {
            Letter::Gen { factor, gen, inv } => (self.factors[factor].gens[gen].clone(), inv),
            Letter::Edge { edge, inv } => (self.edges[edge].id.clone(), inv),
        };
        if inv {
            format!("{base}^-1")
        } else {
            base
        }
    }

    /// Space separated letter names with run-length exponents.
    pub fn format_letters(&self, letters: &[Letter]) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < letters.len() {
            let mut j = i;
            while j < letters.len() && letters[j] == letters[i] {
                j += 1;
            }
            let l = letters[i];
            let base = self.letter_name(l.positive());
            let k = (j - i) as i64 * if l.is_inverse() { -1 } else { 1 };
            parts.push(if k == 1 { base } else { format!("{base}^{k}") });
            i = j;
        }
        parts.join(" ")
    }

    pub fn format_path(&self, p: &Path) -> String {
        self.format_letters(&p.letters())
    }

    /// Canonical text form; parsing it returns an equal complex.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for f in &self.factors {
            let kind = match f.kind {
                FactorKind::Free => "free",
                FactorKind::Abelian => "abelian",
            };
            let _ = writeln!(s, "factor {} {} {}", f.id, kind, f.gens.join(" "));
        }
        for e in &self.edges {
            let _ = writeln!(s, "edge {} {} {}", e.id, self.factors[e.source].id, self.factors[e.target].id);
        }
        if !self.edges.is_empty() {
            let names: Vec<&str> = self.edge_order.iter().map(|&e| self.edges[e].id.as_str()).collect();
            let _ = writeln!(s, "order edges {}", names.join(" "));
        }
        for r in &self.relators {
            let body = self.format_letters(&r.period_letters(&self.shape));
            let _ = writeln!(s, "relator ({})^{}", body, r.exponent);
        }
        s
    }
}

/// Smallest period of a ring under rotation: returns `(p, m)` with the ring
/// equal to `p^m` and `m` maximal.
pub fn compute_exponent(ring: &[Link]) -> (Vec<Link>, usize) {
    let n = ring.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && (0..n).all(|i| ring[i] == ring[(i + d) % n]) {
            return (ring[..d].to_vec(), n / d);
        }
    }
    (ring.to_vec(), 1)
}

/// Inserts the unique essential edge between syllables of different
/// factors. With `base = Some(f)` the result starts and ends at `f`;
/// otherwise it is closed up cyclically.
pub fn insert_dumbbell_edges(shape: &GraphShape, letters: &[Letter], base: Option<usize>) -> Vec<Letter> {
    let (src, _) = shape.ends[0];
    let hop = |from: usize| Letter::Edge { edge: 0, inv: from != src };
    let mut out = Vec::new();
    let Some(first) = letters.first() else { return out };
    let start = base.unwrap_or(shape.letter_source(*first));
    let mut at = start;
    for &l in letters {
        let f = shape.letter_source(l);
        if f != at {
            out.push(hop(at));
            at = f;
        }
        out.push(l);
    }
    if at != start {
        out.push(hop(at));
    }
    out
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col0: usize,
    symbols: &'a HashMap<String, Letter>,
}

impl<'a> Lexer<'a> {
    fn err(&self, msg: impl Into<String>) -> PresentationError {
        PresentationError::Syntax { line: self.line, col: self.col0 + self.pos + 1, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self, depth: usize) -> Result<Vec<Letter>, PresentationError> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None => {
                    if depth > 0 {
                        return Err(self.err("unclosed parenthesis"));
                    }
                    return Ok(out);
                }
                Some(')') => {
                    if depth == 0 {
                        return Err(self.err("unexpected `)`"));
                    }
                    return Ok(out);
                }
                Some('(') => {
                    self.pos += 1;
                    let inner = self.expr(depth + 1)?;
                    if self.peek() != Some(')') {
                        return Err(self.err("expected `)`"));
                    }
                    self.pos += 1;
                    let k = self.exponent()?;
                    out.extend(power(&inner, k));
                }
                Some(c) if c.is_alphabetic() || c == '_' => {
                    let atoms = self.identifier()?;
                    let k = self.exponent()?;
                    // the exponent binds to the last symbol of a juxtaposed run
                    let (last, rest) = atoms.split_last().unwrap();
                    out.extend_from_slice(rest);
                    out.extend(power(&[*last], k));
                }
                Some(c) => return Err(self.err(format!("unexpected character `{c}`"))),
            }
        }
    }

    fn identifier(&mut self) -> Result<Vec<Letter>, PresentationError> {
        let start = self.pos;
        while self.pos < self.chars.len() && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_') {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        // greedy longest-match split of juxtaposed symbols such as `ab`
        let mut out = Vec::new();
        let mut i = 0;
        let cs: Vec<char> = word.chars().collect();
        while i < cs.len() {
            let mut found = None;
            for j in (i + 1..=cs.len()).rev() {
                let cand: String = cs[i..j].iter().collect();
                if let Some(&l) = self.symbols.get(&cand) {
                    found = Some((j, l));
                    break;
                }
            }
            match found {
                Some((j, l)) => {
                    out.push(l);
                    i = j;
                }
                None => {
                    return Err(PresentationError::UnknownSymbol {
                        name: cs[i..].iter().collect(),
                        line: self.line,
                        col: self.col0 + start + i + 1,
                    })
                }
            }
        }
        Ok(out)
    }

    fn exponent(&mut self) -> Result<i64, PresentationError> {
        if self.peek() != Some('^') {
            return Ok(1);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        if self.chars.get(self.pos) == Some(&'-') {
            self.pos += 1;
        }
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<i64>().map_err(|_| self.err("expected an integer exponent"))
    }
}

fn power(w: &[Letter], k: i64) -> Vec<Letter> {
    let base: Vec<Letter> = if k < 0 { w.iter().rev().map(|l| l.inverse()).collect() } else { w.to_vec() };
    let mut out = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
    for _ in 0..k.unsigned_abs() {
        out.extend_from_slice(&base);
    }
    out
}

fn parse_word_expr(
    text: &str,
    line: usize,
    col0: usize,
    symbols: &HashMap<String, Letter>,
) -> Result<Vec<Letter>, PresentationError> {
    let mut lx = Lexer { chars: text.chars().collect(), pos: 0, line, col0, symbols };
    lx.expr(0)
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_') && cs.all(|c| c.is_alphanumeric() || c == '_')
}

/// Parses and validates a presentation.
pub fn parse_presentation(text: &str) -> Result<StaggeredComplex, PresentationError> {
    let mut factors: Vec<FactorSpec> = Vec::new();
    let mut edges: Vec<EdgeSpec> = Vec::new();
    let mut order: Option<(usize, Vec<String>)> = None;
    let mut relator_lines: Vec<(usize, usize, String)> = Vec::new();
    let mut taken: HashMap<String, ()> = HashMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = content.len() - trimmed.len();
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let syntax = |col: usize, msg: &str| PresentationError::Syntax { line, col, msg: msg.to_string() };
        let col_of = |tok_index: usize| -> usize {
            // column of the token, 1-based
            let mut off = indent;
            let mut rest = trimmed;
            for t in toks.iter().take(tok_index) {
                let p = rest.find(t).unwrap();
                off += p + t.len();
                rest = &rest[p + t.len()..];
            }
            off + rest.find(toks.get(tok_index).copied().unwrap_or("")).unwrap_or(0) + 1
        };
        match toks[0] {
            "factor" => {
                if toks.len() < 4 {
                    return Err(syntax(col_of(0), "expected `factor <Id> (free|abelian) <gen>+`"));
                }
                let kind = match toks[2] {
                    "free" => FactorKind::Free,
                    "abelian" => FactorKind::Abelian,
                    _ => return Err(syntax(col_of(2), "factor kind must be `free` or `abelian`")),
                };
                if !is_ident(toks[1]) || factors.iter().any(|f| f.id == toks[1]) {
                    return Err(syntax(col_of(1), "invalid or duplicate factor id"));
                }
                let mut gens = Vec::new();
                for (k, g) in toks[3..].iter().enumerate() {
                    if !is_ident(g) || taken.insert(g.to_string(), ()).is_some() {
                        return Err(syntax(col_of(3 + k), "invalid or duplicate generator name"));
                    }
                    gens.push(g.to_string());
                }
                factors.push(FactorSpec { id: toks[1].to_string(), kind, gens });
            }
            "edge" => {
                if toks.len() != 4 {
                    return Err(syntax(col_of(0), "expected `edge <Id> <FactorId> <FactorId>`"));
                }
                if !is_ident(toks[1]) || taken.insert(toks[1].to_string(), ()).is_some() {
                    return Err(syntax(col_of(1), "invalid or duplicate edge id"));
                }
                let find = |k: usize| {
                    factors.iter().position(|f| f.id == toks[k]).ok_or(PresentationError::UnknownSymbol {
                        name: toks[k].to_string(),
                        line,
                        col: col_of(k),
                    })
                };
                let (source, target) = (find(2)?, find(3)?);
                edges.push(EdgeSpec { id: toks[1].to_string(), source, target });
            }
            "order" => {
                if toks.get(1) != Some(&"edges") {
                    return Err(syntax(col_of(0), "expected `order edges <Id>+`"));
                }
                order = Some((line, toks[2..].iter().map(|s| s.to_string()).collect()));
            }
            "relator" => {
                let start = indent + trimmed.find("relator").unwrap() + "relator".len();
                relator_lines.push((line, start, content[start..].to_string()));
            }
            other => {
                return Err(PresentationError::Syntax { line, col: indent + 1, msg: format!("unknown keyword `{other}`") })
            }
        }
    }

    if factors.is_empty() {
        return Err(PresentationError::Syntax { line: 1, col: 1, msg: "no factors declared".into() });
    }

    let shape = GraphShape {
        kinds: factors.iter().map(|f| f.kind).collect(),
        ranks: factors.iter().map(|f| f.rank()).collect(),
        ends: edges.iter().map(|e| (e.source, e.target)).collect(),
    };

    // connectivity by union-find over edges
    let mut parent: Vec<usize> = (0..factors.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in &edges {
        let (a, b) = (find(&mut parent, e.source), find(&mut parent, e.target));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    if (0..factors.len()).any(|f| find(&mut parent, f) != root) {
        return Err(PresentationError::Disconnected);
    }

    let edge_order = match order {
        None => (0..edges.len()).collect(),
        Some((line, names)) => {
            let mut ids = Vec::new();
            for n in &names {
                let id = edges.iter().position(|e| &e.id == n).ok_or(PresentationError::UnknownSymbol {
                    name: n.clone(),
                    line,
                    col: 1,
                })?;
                if ids.contains(&id) {
                    return Err(PresentationError::Syntax { line, col: 1, msg: format!("edge `{n}` listed twice") });
                }
                ids.push(id);
            }
            if ids.len() != edges.len() {
                return Err(PresentationError::Syntax { line, col: 1, msg: "edge order must list every edge".into() });
            }
            ids
        }
    };

    let mut cx = StaggeredComplex { factors, edges, edge_order, relators: Vec::new(), shape };
    let symbols = cx.symbols();
    for (line, col0, body) in relator_lines {
        let letters = parse_word_expr(&body, line, col0, &symbols)?;
        if letters.is_empty() {
            return Err(PresentationError::Syntax { line, col: col0 + 1, msg: "empty relator".into() });
        }
        let letters = if cx.is_dumbbell() && !letters.iter().any(|l| l.is_edge()) {
            insert_dumbbell_edges(&cx.shape, &letters, None)
        } else {
            letters
        };
        let start = cx.shape.letter_source(letters[0]);
        match cx.shape.path_end(start, &letters) {
            Ok(end) if end == start => {}
            Ok(_) => return Err(PresentationError::NotAPath { line, position: letters.len() }),
            Err(position) => return Err(PresentationError::NotAPath { line, position }),
        }
        let path = Path::from_letters(&cx.shape, start, &letters);
        let ring = match Cyclic::from_path(&cx.shape, &path) {
            Cyclic::Ring(r) => r,
            _ => return Err(PresentationError::ConjugateIntoFactor { line }),
        };
        let (period, exponent) = compute_exponent(&ring);
        let ranks: Vec<usize> = period.iter().map(|l| cx.edge_rank(l.edge)).collect();
        let min_edge = cx.edge_order[*ranks.iter().min().unwrap()];
        let max_edge = cx.edge_order[*ranks.iter().max().unwrap()];
        cx.relators.push(Relator { period, exponent, min_edge, max_edge });
    }
    let violations = cx.validate_staggering();
    if !violations.is_empty() {
        return Err(PresentationError::Staggering(violations));
    }
    Ok(cx)
}

/// Letters of a factor element as a standalone group word, conjugated into
/// position from the base factor along a fixed edge path.
pub fn factor_word(cx: &StaggeredComplex, factor: usize, elem: &Elem) -> Path {
    let route = route_from_base(cx, factor);
    let mut letters = route.clone();
    letters.extend(elem.letters(factor));
    letters.extend(route.iter().rev().map(|l| l.inverse()));
    Path::from_letters(&cx.shape, 0, &letters)
}

/// A shortest edge-letter route from factor 0 to `factor` in the graph.
pub fn route_from_base(cx: &StaggeredComplex, factor: usize) -> Vec<Letter> {
    let n = cx.factors.len();
    let mut prev: Vec<Option<(usize, Letter)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(f) = queue.pop_front() {
        for e in 0..cx.edges.len() {
            for inv in [false, true] {
                let l = Letter::Edge { edge: e, inv };
                if cx.shape.letter_source(l) == f {
                    let g = cx.shape.letter_target(l);
                    if !seen[g] {
                        seen[g] = true;
                        prev[g] = Some((f, l));
                        queue.push_back(g);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut at = factor;
    while let Some((f, l)) = prev[at] {
        out.push(l);
        at = f;
    }
    out.reverse();
    out
}
