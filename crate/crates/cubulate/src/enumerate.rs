//! Bounded enumeration of the Cayley 2-complex of the universal cover.
//!
//! Vertices are defined breadth-first from the base vertex. Before a new
//! vertex is created for `u·x`, every relation cycle through that edge is
//! walked backwards from `u`; if it closes through defined edges the target
//! is deduced instead. After each layer, cycles through changed vertices are
//! scanned and coincidences collapsed with union-find. No rewriting system
//! or Dehn algorithm is involved, so the result is an independent oracle.

use crate::presentation::StaggeredComplex;
use crate::word::{FactorKind, GraphShape, Letter, Path};
use crate::word_problem::relator_letters;
use thiserror::Error;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("word leaves the trusted radius {radius} at letter {position} and its tube does not close")]
    Inconclusive { radius: usize, position: usize },
    #[error("identification of `{left}` with `{right}` was refused by the confirmation check")]
    Refused { left: String, right: String },
}

/// Callback used to confirm each identification the enumeration makes:
/// receives two letter paths from the base vertex that are about to be
/// identified and returns whether they are equal.
pub type Confirm<'a> = dyn Fn(&[Letter], &[Letter]) -> bool + 'a;

/// A finished enumeration with dense vertex ids in shortlex BFS order.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub shape: GraphShape,
    pub letters: usize,
    pub radius: usize,
    /// Factor (vertex space type) of each vertex.
    pub factor: Vec<usize>,
    /// Graph distance from the base vertex.
    pub depth: Vec<usize>,
    /// Shortlex geodesic label: BFS-tree parent and the letter into the vertex.
    pub parent: Vec<Option<(usize, usize)>>,
    /// `table[v * letters + x]` is the target of letter `x` at `v`.
    table: Vec<u32>,
}

impl Enumeration {
    pub fn len(&self) -> usize {
        self.factor.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factor.is_empty()
    }

    pub fn target(&self, v: usize, x: usize) -> Option<usize> {
        let t = self.table[v * self.letters + x];
        (t != NONE).then_some(t as usize)
    }

    pub fn label(&self, v: usize) -> Vec<Letter> {
        let mut out = Vec::new();
        let mut at = v;
        while let Some((p, x)) = self.parent[at] {
            out.push(self.shape.letter_at(x));
            at = p;
        }
        out.reverse();
        out
    }

    /// Follows `letters` from `v`; `None` when an edge is missing.
    pub fn walk(&self, v: usize, letters: &[Letter]) -> Option<usize> {
        let mut at = v;
        for &l in letters {
            at = self.target(at, self.shape.letter_index(l))?;
        }
        Some(at)
    }
}

struct Engine<'c> {
    shape: GraphShape,
    nl: usize,
    valid: Vec<Vec<usize>>,
    /// Every rotation of every relation cycle in both directions, as letter indices.
    rotations: Vec<Vec<usize>>,
    /// Rotations starting with a given letter.
    through: Vec<Vec<usize>>,
    /// Rotations whose first letter leaves a given factor.
    at_factor: Vec<Vec<usize>>,
    factor: Vec<u32>,
    depth: Vec<u32>,
    uf: Vec<u32>,
    tree: Vec<(u32, u32)>,
    table: Vec<u32>,
    expanded: Vec<bool>,
    dirty: Vec<u32>,
    max_depth: u32,
    /// Vertices at depth zero: the base vertex, or a traced word.
    seeds: Vec<u32>,
    confirm: Option<&'c Confirm<'c>>,
}

/// Closed relation cycles of the universal cover as letter sequences.
pub fn relation_cycles(cx: &StaggeredComplex) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    for r in 0..cx.relators.len() {
        out.push(relator_letters(cx, r));
    }
    for (f, spec) in cx.factors.iter().enumerate() {
        if spec.kind == FactorKind::Abelian {
            for i in 0..spec.rank() {
                for j in i + 1..spec.rank() {
                    let g = |gen, inv| Letter::Gen { factor: f, gen, inv };
                    out.push(vec![g(i, false), g(j, false), g(i, true), g(j, true)]);
                }
            }
        }
    }
    out
}

impl<'c> Engine<'c> {
    fn new(cx: &StaggeredComplex, max_depth: usize, confirm: Option<&'c Confirm<'c>>) -> Self {
        let shape = cx.shape.clone();
        let nl = shape.letter_count();
        let mut valid = vec![Vec::new(); cx.factors.len()];
        for x in 0..nl {
            valid[shape.letter_source(shape.letter_at(x))].push(x);
        }
        let mut rotations = Vec::new();
        for cyc in relation_cycles(cx) {
            let idx: Vec<usize> = cyc.iter().map(|&l| shape.letter_index(l)).collect();
            let inv: Vec<usize> = idx.iter().rev().map(|&x| x ^ 1).collect();
            for c in [idx, inv] {
                for s in 0..c.len() {
                    let mut r = c[s..].to_vec();
                    r.extend_from_slice(&c[..s]);
                    if !rotations.contains(&r) {
                        rotations.push(r);
                    }
                }
            }
        }
        let mut through = vec![Vec::new(); nl];
        let mut at_factor = vec![Vec::new(); cx.factors.len()];
        for (i, r) in rotations.iter().enumerate() {
            through[r[0]].push(i);
            at_factor[shape.letter_source(shape.letter_at(r[0]))].push(i);
        }
        let mut e = Engine {
            shape,
            nl,
            valid,
            rotations,
            through,
            at_factor,
            factor: Vec::new(),
            depth: Vec::new(),
            uf: Vec::new(),
            tree: Vec::new(),
            table: Vec::new(),
            expanded: Vec::new(),
            dirty: Vec::new(),
            max_depth: max_depth as u32,
            seeds: vec![0],
            confirm,
        };
        e.new_vertex(0, 0, (NONE, NONE));
        e
    }

    fn new_vertex(&mut self, factor: usize, depth: u32, tree: (u32, u32)) -> u32 {
        let id = self.factor.len() as u32;
        self.factor.push(factor as u32);
        self.depth.push(depth);
        self.uf.push(id);
        self.tree.push(tree);
        self.table.extend(std::iter::repeat_n(NONE, self.nl));
        self.expanded.push(false);
        id
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.uf[v as usize] != v {
            let p = self.uf[v as usize];
            self.uf[v as usize] = self.uf[p as usize];
            v = p;
        }
        v
    }

    fn get(&mut self, v: u32, x: usize) -> u32 {
        let t = self.table[v as usize * self.nl + x];
        if t == NONE {
            NONE
        } else {
            self.find(t)
        }
    }

    fn label(&self, v: u32) -> Vec<Letter> {
        let mut out = Vec::new();
        let mut at = v;
        while self.tree[at as usize].0 != NONE {
            let (p, x) = self.tree[at as usize];
            out.push(self.shape.letter_at(x as usize));
            at = p;
        }
        out.reverse();
        out
    }

    fn check(&self, left: Vec<Letter>, right: Vec<Letter>) -> Result<(), OracleError> {
        if let Some(c) = self.confirm {
            if !c(&left, &right) {
                return Err(OracleError::Refused { left: format!("{left:?}"), right: format!("{right:?}") });
            }
        }
        Ok(())
    }

    /// Records `u·x = w` (both live), queueing any clash.
    fn set_edge(&mut self, u: u32, x: usize, w: u32, queue: &mut Vec<(u32, u32)>) {
        let cur = self.get(u, x);
        if cur == NONE {
            self.table[u as usize * self.nl + x] = w;
        } else if cur != w {
            queue.push((cur, w));
        }
        let back = self.get(w, x ^ 1);
        if back == NONE {
            self.table[w as usize * self.nl + (x ^ 1)] = u;
        } else if back != u {
            queue.push((back, u));
        }
        self.dirty.push(u);
        self.dirty.push(w);
    }

    fn coincide(&mut self, a: u32, b: u32) -> Result<(), OracleError> {
        let mut queue = vec![(a, b)];
        while let Some((a, b)) = queue.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            if self.confirm.is_some() {
                self.check(self.label(a), self.label(b))?;
            }
            let (keep, gone) = if (self.depth[a as usize], a) <= (self.depth[b as usize], b) { (a, b) } else { (b, a) };
            self.uf[gone as usize] = keep;
            self.expanded[keep as usize] &= self.expanded[gone as usize];
            for x in 0..self.nl {
                let y = self.table[gone as usize * self.nl + x];
                if y == NONE {
                    continue;
                }
                let y = self.find(y);
                self.set_edge(keep, x, y, &mut queue);
            }
        }
        Ok(())
    }

    /// Target of `u·x` deduced by closing a relation cycle, if possible.
    fn deduce(&mut self, u: u32, x: usize) -> Option<u32> {
        for k in 0..self.through[x].len() {
            let r = self.through[x][k];
            let len = self.rotations[r].len();
            let mut at = u;
            let mut ok = true;
            for s in (1..len).rev() {
                let y = self.rotations[r][s] ^ 1;
                at = self.get(at, y);
                if at == NONE {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Some(at);
            }
        }
        None
    }

    fn expand(&mut self, u: u32) -> Result<(), OracleError> {
        let f = self.factor[u as usize] as usize;
        for k in 0..self.valid[f].len() {
            let x = self.valid[f][k];
            let u = self.find(u);
            if self.get(u, x) != NONE {
                continue;
            }
            let mut queue = Vec::new();
            match self.deduce(u, x) {
                Some(w) => {
                    if self.confirm.is_some() {
                        let mut lu = self.label(u);
                        lu.push(self.shape.letter_at(x));
                        self.check(lu, self.label(w))?;
                    }
                    self.set_edge(u, x, w, &mut queue);
                }
                None => {
                    let tf = self.shape.letter_target(self.shape.letter_at(x));
                    let w = self.new_vertex(tf, self.depth[u as usize] + 1, (u, x as u32));
                    self.set_edge(u, x, w, &mut queue);
                }
            }
            for (a, b) in queue {
                self.coincide(a, b)?;
            }
        }
        let u = self.find(u);
        self.expanded[u as usize] = true;
        Ok(())
    }

    /// Scans every relation cycle through `v`.
    fn scan(&mut self, v: u32) -> Result<(), OracleError> {
        let f = self.factor[v as usize] as usize;
        for k in 0..self.at_factor[f].len() {
            let v = self.find(v);
            let r = self.at_factor[f][k];
            let len = self.rotations[r].len();
            let mut fwd = v;
            let mut pf = 0;
            while pf < len {
                let t = self.get(fwd, self.rotations[r][pf]);
                if t == NONE {
                    break;
                }
                fwd = t;
                pf += 1;
            }
            if pf == len {
                if fwd != v {
                    self.coincide(fwd, v)?;
                }
                continue;
            }
            let mut bwd = v;
            let mut pb = 0;
            while pf + pb < len {
                let t = self.get(bwd, self.rotations[r][len - 1 - pb] ^ 1);
                if t == NONE {
                    break;
                }
                bwd = t;
                pb += 1;
            }
            if pf + pb == len {
                if fwd != bwd {
                    self.coincide(fwd, bwd)?;
                }
            } else if pf + pb + 1 == len {
                let x = self.rotations[r][pf];
                if self.confirm.is_some() {
                    // both sides of the gap as paths from the base
                    let mut lf = self.label(fwd);
                    lf.push(self.shape.letter_at(x));
                    self.check(lf, self.label(bwd))?;
                }
                let mut queue = Vec::new();
                self.set_edge(fwd, x, bwd, &mut queue);
                for (a, b) in queue {
                    self.coincide(a, b)?;
                }
            }
        }
        Ok(())
    }

    fn drain_dirty(&mut self) -> Result<(), OracleError> {
        while !self.dirty.is_empty() {
            let mut batch = std::mem::take(&mut self.dirty);
            batch.sort_unstable();
            batch.dedup();
            for v in batch {
                let v = self.find(v);
                self.scan(v)?;
            }
        }
        Ok(())
    }

    /// True distances over defined edges among live vertices.
    fn recompute_depths(&mut self) {
        let n = self.factor.len();
        let mut dist = vec![NONE; n];
        let mut queue = std::collections::VecDeque::new();
        for k in 0..self.seeds.len() {
            let s = self.find(self.seeds[k]);
            if dist[s as usize] == NONE {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for x in 0..self.nl {
                let t = self.get(u, x);
                if t != NONE && dist[t as usize] == NONE {
                    dist[t as usize] = dist[u as usize] + 1;
                    queue.push_back(t);
                }
            }
        }
        for v in 0..n {
            if self.uf[v] == v as u32 {
                self.depth[v] = dist[v];
            }
        }
    }

    fn run(&mut self) -> Result<(), OracleError> {
        loop {
            self.recompute_depths();
            let pending = |e: &Engine| {
                (0..e.factor.len())
                    .filter(|&v| e.uf[v] == v as u32 && !e.expanded[v] && e.depth[v] < e.max_depth)
                    .map(|v| e.depth[v])
                    .min()
            };
            let Some(d0) = pending(self) else { break };
            for d in d0..self.max_depth {
                let layer: Vec<u32> = (0..self.factor.len() as u32)
                    .filter(|&v| self.uf[v as usize] == v && self.depth[v as usize] == d && !self.expanded[v as usize])
                    .collect();
                for u in layer {
                    if self.find(u) == u {
                        self.expand(u)?;
                    }
                }
                self.drain_dirty()?;
            }
        }
        Ok(())
    }

    /// Defines the path of `letters` from the base vertex, deducing targets
    /// where possible, and makes its vertices the seeds.
    fn seed_path(&mut self, letters: &[Letter]) -> Result<(), OracleError> {
        let mut at = self.find(0);
        let mut seeds = vec![at];
        for &l in letters {
            let x = self.shape.letter_index(l);
            let mut t = self.get(at, x);
            if t == NONE {
                let mut queue = Vec::new();
                t = match self.deduce(at, x) {
                    Some(w) => w,
                    None => self.new_vertex(self.shape.letter_target(l), 0, (at, x as u32)),
                };
                self.set_edge(at, x, t, &mut queue);
                for (a, b) in queue {
                    self.coincide(a, b)?;
                }
                t = self.find(t);
            }
            at = t;
            seeds.push(at);
        }
        self.seeds = seeds;
        Ok(())
    }

    fn finish(mut self, radius: usize) -> Enumeration {
        // shortlex BFS renumbering of live vertices
        let root = self.find(0);
        let n = self.factor.len();
        let mut id = vec![NONE; n];
        let mut order = vec![root];
        let mut parent = vec![None];
        id[root as usize] = 0;
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for x in 0..self.nl {
                let t = self.get(u, x);
                if t != NONE && id[t as usize] == NONE {
                    id[t as usize] = order.len() as u32;
                    parent.push(Some((id[u as usize] as usize, x)));
                    order.push(t);
                }
            }
        }
        let mut table = vec![NONE; order.len() * self.nl];
        let mut depth = vec![0usize; order.len()];
        for (i, &u) in order.iter().enumerate() {
            if let Some((p, _)) = parent[i] {
                depth[i] = depth[p] + 1;
            }
            for x in 0..self.nl {
                let t = self.get(u, x);
                if t != NONE {
                    table[i * self.nl + x] = id[t as usize];
                }
            }
        }
        Enumeration {
            letters: self.nl,
            radius,
            factor: order.iter().map(|&u| self.factor[u as usize] as usize).collect(),
            depth,
            parent,
            table,
            shape: self.shape,
        }
    }
}

/// Enumerates the ball of the given radius, confirming every identification
/// with `confirm` when supplied.
pub fn enumerate_ball(
    cx: &StaggeredComplex,
    radius: usize,
    confirm: Option<&Confirm<'_>>,
) -> Result<Enumeration, OracleError> {
    let mut e = Engine::new(cx, radius, confirm);
    e.run()?;
    Ok(e.finish(radius))
}

/// Decides whether `letters` is closed by enumerating the `radius`
/// neighbourhood of its trace. A closed trace proves triviality; an open one
/// proves nothing.
pub fn tube_closes(cx: &StaggeredComplex, letters: &[Letter], radius: usize) -> bool {
    let mut e = Engine::new(cx, radius, None);
    e.seed_path(letters).expect("no confirmation hook");
    e.run().expect("no confirmation hook");
    let mut at = e.find(0);
    for &l in letters {
        at = e.get(at, e.shape.letter_index(l));
    }
    at == e.find(0)
}

/// Bounded triviality oracle.
///
/// Words that stay inside the trusted radius are decided exactly against the
/// relator-closed ball. Longer words fall back to a tube enumeration around
/// their trace, which can only prove triviality; otherwise the answer is
/// [`OracleError::Inconclusive`].
#[derive(Clone, Debug)]
pub struct Oracle {
    ball: Enumeration,
    trusted: usize,
    tube: usize,
    cx: StaggeredComplex,
}

impl Oracle {
    /// Builds the relator-closed ball of radius `radius`; vertices within
    /// `radius - ceil(W_X / 2)` of the base are trusted when tracing.
    pub fn new(cx: &StaggeredComplex, radius: usize) -> Self {
        let margin = cx.w_x().div_ceil(2);
        let ball = enumerate_ball(cx, radius, None).expect("no confirmation hook");
        Oracle { ball, trusted: radius.saturating_sub(margin), tube: margin + 1, cx: cx.clone() }
    }

    pub fn radius(&self) -> usize {
        self.trusted
    }

    pub fn ball(&self) -> &Enumeration {
        &self.ball
    }

    /// True iff `w` traces a closed loop at the base vertex.
    pub fn is_trivial(&self, w: &Path) -> Result<bool, OracleError> {
        let letters = w.letters();
        let mut at = 0usize;
        for (i, &l) in letters.iter().enumerate() {
            match self.ball.target(at, self.ball.shape.letter_index(l)) {
                Some(t) if self.ball.depth[t] <= self.trusted => at = t,
                _ => {
                    if tube_closes(&self.cx, &letters, self.tube) {
                        return Ok(true);
                    }
                    return Err(OracleError::Inconclusive { radius: self.trusted, position: i });
                }
            }
        }
        Ok(at == 0)
    }
}
