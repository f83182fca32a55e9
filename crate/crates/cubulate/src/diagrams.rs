//! Van Kampen diagrams over a staggered complex.
//!
//! A diagram is a 2-complex of vertices, edges labelled by positive letters,
//! and faces given by their attaching cycles of darts. Dart `2e` runs along
//! edge `e`, dart `2e + 1` against it. Faces are either relator cells, which
//! record where their boundary sits in the relator, or vertex-space regions
//! whose boundary is trivial in one factor. When every edge has two sides
//! the faces determine a rotation system, which may describe a non-planar
//! surface.

use crate::presentation::StaggeredComplex;
use crate::word::{ring_letters, Cyclic, Elem, Letter, Path};
use crate::word_problem::{dehn_reduce, relator_letters, replay, DehnTrace};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("trace does not replay at event {0}")]
    TraceMismatch(usize),
    #[error("the word does not reduce to the empty word")]
    NotTrivial,
    #[error("darts {0} and {1} carry different letters")]
    LabelMismatch(usize, usize),
}

pub type Dart = usize;

pub fn twin(d: Dart) -> Dart {
    d ^ 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DVertex {
    pub factor: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DEdge {
    pub tail: usize,
    pub head: usize,
    /// Always a positive letter.
    pub letter: Letter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaceLabel {
    /// Dart `t` of the boundary sits at relator letter `base ± t`.
    Relator { relator: usize, base: usize, reversed: bool },
    VertexSpace { factor: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub boundary: Vec<Dart>,
    pub label: FaceLabel,
}

impl Face {
    pub fn is_essential(&self) -> bool {
        matches!(self.label, FaceLabel::Relator { .. })
    }

    /// Relator letter position of boundary dart `t`.
    pub fn position(&self, t: usize) -> Option<usize> {
        let FaceLabel::Relator { base, reversed, .. } = self.label else { return None };
        let l = self.boundary.len();
        Some(if reversed { (base + l - t % l) % l } else { (base + t) % l })
    }

    /// Boundary index of the dart at relator position `p`.
    pub fn index_of(&self, p: usize) -> Option<usize> {
        let FaceLabel::Relator { base, reversed, .. } = self.label else { return None };
        let l = self.boundary.len();
        Some(if reversed { (base + l - p) % l } else { (p + l - base) % l })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub vertices: Vec<DVertex>,
    pub edges: Vec<DEdge>,
    pub faces: Vec<Face>,
    /// Boundary path as darts; empty for a one-vertex diagram.
    pub boundary: Vec<Dart>,
    /// Start of the boundary path.
    pub base: usize,
}

/// Letter offsets of the links of a ring inside its letter sequence.
fn link_offsets(ring: &[crate::word::Link]) -> Vec<usize> {
    let mut out = Vec::with_capacity(ring.len());
    let mut at = 0;
    for l in ring {
        out.push(at);
        at += 1 + l.after.length() as usize;
    }
    out
}

fn inverse_word(letters: &[Letter]) -> Vec<Letter> {
    letters.iter().rev().map(|l| l.inverse()).collect()
}

/// Scratch state for surgery: dead flags and extra dart lists that must be
/// kept in step with identifications.
struct Work<'a> {
    d: Diagram,
    cx: &'a StaggeredComplex,
    dead_e: Vec<bool>,
    dead_v: Vec<bool>,
}

impl<'a> Work<'a> {
    fn new(cx: &'a StaggeredComplex, d: Diagram) -> Self {
        let (ne, nv) = (d.edges.len(), d.vertices.len());
        Work { d, cx, dead_e: vec![false; ne], dead_v: vec![false; nv] }
    }

    fn new_vertex(&mut self, factor: usize) -> usize {
        self.d.vertices.push(DVertex { factor });
        self.dead_v.push(false);
        self.d.vertices.len() - 1
    }

    /// Appends a path spelling `letters` from `s` to `t`.
    fn add_path(&mut self, s: usize, t: usize, letters: &[Letter]) -> Vec<Dart> {
        let mut cur = s;
        let mut out = Vec::with_capacity(letters.len());
        for (i, &l) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() { t } else { self.new_vertex(self.cx.shape.letter_target(l)) };
            let (tail, head) = if l.is_inverse() { (next, cur) } else { (cur, next) };
            self.d.edges.push(DEdge { tail, head, letter: l.positive() });
            self.dead_e.push(false);
            out.push(2 * (self.d.edges.len() - 1) + l.is_inverse() as usize);
            cur = next;
        }
        out
    }

    fn merge_vertex(&mut self, from: usize, into: usize) {
        if from == into {
            return;
        }
        for (e, edge) in self.d.edges.iter_mut().enumerate() {
            if self.dead_e[e] {
                continue;
            }
            if edge.tail == from {
                edge.tail = into;
            }
            if edge.head == from {
                edge.head = into;
            }
        }
        if self.d.base == from {
            self.d.base = into;
        }
        self.dead_v[from] = true;
    }

    /// Makes dart `gone` the same as dart `keep`.
    fn identify(&mut self, keep: Dart, gone: Dart, extra: &mut [&mut Vec<Dart>]) -> Result<(), DiagramError> {
        if keep == gone {
            return Ok(());
        }
        if self.d.letter(keep) != self.d.letter(gone) || keep / 2 == gone / 2 {
            return Err(DiagramError::LabelMismatch(keep, gone));
        }
        let (tk, tg) = (self.d.tail(keep), self.d.tail(gone));
        self.merge_vertex(tg, tk);
        let (hk, hg) = (self.d.head(keep), self.d.head(gone));
        self.merge_vertex(hg, hk);
        let (eg, ek) = (gone / 2, keep / 2);
        let flip = (gone & 1) ^ (keep & 1);
        let remap = |d: &mut Dart| {
            if *d / 2 == eg {
                *d = 2 * ek + ((*d & 1) ^ flip);
            }
        };
        self.d.faces.iter_mut().flat_map(|f| f.boundary.iter_mut()).for_each(remap);
        self.d.boundary.iter_mut().for_each(remap);
        extra.iter_mut().flat_map(|l| l.iter_mut()).for_each(remap);
        self.dead_e[eg] = true;
        Ok(())
    }

    /// Replaces `hole[p..p + k]` (cyclic) by a new path spelling `y`, and
    /// adds the face bounded by the old arc followed by the new path
    /// backwards.
    fn cut(&mut self, hole: &mut Vec<Dart>, p: usize, k: usize, y: &[Letter], label: FaceLabel) {
        let n = hole.len();
        hole.rotate_left(p % n.max(1));
        let arc: Vec<Dart> = hole.drain(..k).collect();
        let s = self.d.tail(arc[0]);
        let t = self.d.head(arc[k - 1]);
        let path = if y.is_empty() {
            self.merge_vertex(t, s);
            Vec::new()
        } else {
            self.add_path(s, t, y)
        };
        let mut face = arc;
        face.extend(path.iter().rev().map(|&d| twin(d)));
        self.d.faces.push(Face { boundary: face, label });
        let rest = std::mem::take(hole);
        *hole = path;
        hole.extend(rest);
    }

    /// Folds one adjacent inverse pair of the hole, if any.
    fn fold_once(&mut self, hole: &mut Vec<Dart>) -> Result<bool, DiagramError> {
        let n = hole.len();
        if n < 2 {
            return Ok(false);
        }
        for p in 0..n {
            let (d1, d2) = (hole[p], hole[(p + 1) % n]);
            if self.d.letter(d2) != self.d.letter(d1).inverse() {
                continue;
            }
            if d2 != twin(d1) {
                self.identify(twin(d1), d2, &mut [&mut *hole])?;
            }
            let q = (p + 1) % n;
            let (a, b) = (p.max(q), p.min(q));
            hole.remove(a);
            hole.remove(b);
            return Ok(true);
        }
        Ok(false)
    }

    /// Respells one non-normal abelian run of the hole, if any.
    fn respell_once(&mut self, hole: &mut Vec<Dart>) -> bool {
        let n = hole.len();
        if n == 0 {
            return false;
        }
        let letters: Vec<Letter> = hole.iter().map(|&d| self.d.letter(d)).collect();
        let anchor = letters.iter().position(|l| l.is_edge());
        let runs: Vec<(usize, usize)> = match anchor {
            None => vec![(0, n)],
            Some(a) => {
                let mut runs = Vec::new();
                let mut i = 0;
                while i < n {
                    let p = (a + i) % n;
                    if letters[p].is_edge() {
                        i += 1;
                        continue;
                    }
                    let mut k = 0;
                    while i + k < n && !letters[(a + i + k) % n].is_edge() {
                        k += 1;
                    }
                    runs.push((p, k));
                    i += k;
                }
                runs
            }
        };
        for (p, k) in runs {
            let run: Vec<Letter> = (0..k).map(|i| letters[(p + i) % n]).collect();
            let Letter::Gen { factor, .. } = run[0] else { continue };
            if self.cx.shape.kinds[factor] != crate::word::FactorKind::Abelian {
                continue;
            }
            let g = run_elem(self.cx, factor, &run);
            let target = g.letters(factor);
            if target != run {
                self.cut(hole, p, k, &target, FaceLabel::VertexSpace { factor });
                return true;
            }
        }
        false
    }

    fn normalize(&mut self, hole: &mut Vec<Dart>) -> Result<(), DiagramError> {
        while self.fold_once(hole)? || self.respell_once(hole) {}
        Ok(())
    }

    /// Drops dead and unreferenced entries and renumbers.
    fn finish(mut self) -> Diagram {
        let mut used = vec![false; self.d.edges.len()];
        for &d in self.d.faces.iter().flat_map(|f| f.boundary.iter()).chain(self.d.boundary.iter()) {
            used[d / 2] = true;
        }
        let mut emap = vec![usize::MAX; self.d.edges.len()];
        let mut vref = vec![false; self.d.vertices.len()];
        vref[self.d.base] = true;
        let mut edges = Vec::new();
        for (e, edge) in self.d.edges.iter().enumerate() {
            if !self.dead_e[e] && used[e] {
                emap[e] = edges.len();
                vref[edge.tail] = true;
                vref[edge.head] = true;
                edges.push(edge.clone());
            }
        }
        let mut vmap = vec![usize::MAX; self.d.vertices.len()];
        let mut vertices = Vec::new();
        for (v, vx) in self.d.vertices.iter().enumerate() {
            if !self.dead_v[v] && vref[v] {
                vmap[v] = vertices.len();
                vertices.push(vx.clone());
            }
        }
        for e in &mut edges {
            e.tail = vmap[e.tail];
            e.head = vmap[e.head];
        }
        let dmap = |d: Dart| 2 * emap[d / 2] + (d & 1);
        for f in &mut self.d.faces {
            f.boundary.iter_mut().for_each(|d| *d = dmap(*d));
        }
        self.d.boundary.iter_mut().for_each(|d| *d = dmap(*d));
        self.d.base = vmap[self.d.base];
        self.d.edges = edges;
        self.d.vertices = vertices;
        self.d
    }
}

fn run_elem(cx: &StaggeredComplex, factor: usize, run: &[Letter]) -> Elem {
    let mut g = cx.shape.identity(factor);
    for &l in run {
        if let Letter::Gen { gen, inv, .. } = l {
            g = g.mul(&cx.shape.gen_elem(factor, gen, inv));
        }
    }
    g
}

impl Diagram {
    /// A single vertex in the given factor.
    pub fn point(factor: usize) -> Diagram {
        Diagram { vertices: vec![DVertex { factor }], edges: Vec::new(), faces: Vec::new(), boundary: Vec::new(), base: 0 }
    }

    /// A circle spelling `letters`, with no faces.
    fn circle(cx: &StaggeredComplex, start: usize, letters: &[Letter]) -> Diagram {
        let mut w = Work::new(cx, Diagram::point(start));
        if !letters.is_empty() {
            w.d.boundary = w.add_path(0, 0, letters);
        }
        w.d
    }

    /// A single relator cell whose boundary dart 0 sits at position `base`.
    pub fn relator_cell(cx: &StaggeredComplex, relator: usize, base: usize, reversed: bool) -> Diagram {
        let r = relator_letters(cx, relator);
        let l = r.len();
        let letters: Vec<Letter> = (0..l)
            .map(|t| if reversed { r[(base + l - t) % l].inverse() } else { r[(base + t) % l] })
            .collect();
        let start = cx.shape.letter_source(letters[0]);
        let mut d = Diagram::circle(cx, start, &letters);
        d.faces.push(Face { boundary: d.boundary.clone(), label: FaceLabel::Relator { relator, base, reversed } });
        d
    }

    pub fn letter(&self, d: Dart) -> Letter {
        let l = self.edges[d / 2].letter;
        if d & 1 == 1 {
            l.inverse()
        } else {
            l
        }
    }

    pub fn tail(&self, d: Dart) -> usize {
        let e = &self.edges[d / 2];
        if d & 1 == 1 {
            e.head
        } else {
            e.tail
        }
    }

    pub fn head(&self, d: Dart) -> usize {
        self.tail(twin(d))
    }

    pub fn boundary_letters(&self) -> Vec<Letter> {
        self.boundary.iter().map(|&d| self.letter(d)).collect()
    }

    pub fn boundary_path(&self, cx: &StaggeredComplex) -> Path {
        Path::from_letters(&cx.shape, self.vertices[self.base].factor, &self.boundary_letters())
    }

    /// Relator cells.
    pub fn essential_cells(&self) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| self.faces[f].is_essential()).collect()
    }

    pub fn area(&self) -> usize {
        self.essential_cells().len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn is_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.tail), find(&mut parent, e.head));
            parent[a] = b;
        }
        let r = find(&mut parent, 0);
        (0..self.vertices.len()).all(|v| find(&mut parent, v) == r)
    }

    /// Connected with Euler characteristic one. Every diagram built here is
    /// collapsible, so this is the simple-connectivity flag.
    pub fn is_disk_like(&self) -> bool {
        self.is_connected() && self.euler_characteristic() == 1
    }

    /// Number of face sides along each edge.
    pub fn edge_sides(&self) -> Vec<usize> {
        let mut sides = vec![0; self.edges.len()];
        for &d in self.faces.iter().flat_map(|f| f.boundary.iter()) {
            sides[d / 2] += 1;
        }
        sides
    }

    /// Edges with fewer than two face sides.
    pub fn boundary_edges(&self) -> Vec<bool> {
        self.edge_sides().into_iter().map(|s| s < 2).collect()
    }

    /// Cyclic order of darts leaving each vertex, when every edge has two
    /// sides counting the boundary path as one.
    pub fn rotation_system(&self) -> Option<Vec<Vec<Dart>>> {
        let mut next: HashMap<Dart, Dart> = HashMap::new();
        let cycles = self.faces.iter().map(|f| &f.boundary).chain(std::iter::once(&self.boundary));
        for (k, c) in cycles.enumerate() {
            let outer = k == self.faces.len();
            for i in 0..c.len() {
                // the outer side runs against the boundary path
                let (d, n) = if outer { (twin(c[(i + 1) % c.len()]), twin(c[i])) } else { (c[i], c[(i + 1) % c.len()]) };
                if next.insert(d, n).is_some() {
                    return None;
                }
            }
        }
        if next.len() != 2 * self.edges.len() {
            return None;
        }
        // sigma(d) = phi(twin(d)) fixes the tail
        let mut rot = vec![Vec::new(); self.vertices.len()];
        let mut seen = HashSet::new();
        for start in 0..2 * self.edges.len() {
            if seen.contains(&start) {
                continue;
            }
            let v = self.tail(start);
            let mut d = start;
            let mut orbit = Vec::new();
            while seen.insert(d) {
                orbit.push(d);
                d = next[&twin(d)];
            }
            if !rot[v].is_empty() {
                return None;
            }
            rot[v] = orbit;
        }
        Some(rot)
    }

    /// Faces whose boundary does not spell their label, and whether the
    /// boundary path is closed.
    pub fn check_labels(&self, cx: &StaggeredComplex) -> Vec<usize> {
        let mut bad = Vec::new();
        for (i, f) in self.faces.iter().enumerate() {
            let closed = f.boundary.iter().enumerate().all(|(t, &d)| self.head(d) == self.tail(f.boundary[(t + 1) % f.boundary.len()]));
            let ok = closed
                && match f.label {
                    FaceLabel::Relator { relator, reversed, .. } => {
                        let r = relator_letters(cx, relator);
                        r.len() == f.boundary.len()
                            && f.boundary.iter().enumerate().all(|(t, &d)| {
                                let want = r[f.position(t).unwrap()];
                                self.letter(d) == if reversed { want.inverse() } else { want }
                            })
                    }
                    FaceLabel::VertexSpace { factor } => {
                        let run: Vec<Letter> = f.boundary.iter().map(|&d| self.letter(d)).collect();
                        run.iter().all(|l| matches!(l, Letter::Gen { factor: g, .. } if *g == factor))
                            && run_elem(cx, factor, &run).is_identity()
                    }
                };
            if !ok {
                bad.push(i);
            }
        }
        bad
    }

    /// Places `other` beside this diagram; returns the dart offset.
    pub fn disjoint_union(&mut self, other: &Diagram) -> usize {
        let (dv, de) = (self.vertices.len(), 2 * self.edges.len());
        self.vertices.extend(other.vertices.iter().cloned());
        self.edges.extend(other.edges.iter().map(|e| DEdge { tail: e.tail + dv, head: e.head + dv, letter: e.letter }));
        self.faces.extend(other.faces.iter().map(|f| Face { boundary: f.boundary.iter().map(|d| d + de).collect(), label: f.label }));
        self.boundary.extend(other.boundary.iter().map(|d| d + de));
        de
    }

    /// Glues dart `b` against dart `a`: afterwards `b` is `twin(a)`. The
    /// boundary is retraced from the faces.
    pub fn glue(&self, cx: &StaggeredComplex, a: Dart, b: Dart) -> Result<Diagram, DiagramError> {
        let mut w = Work::new(cx, self.clone());
        w.identify(twin(a), b, &mut [])?;
        let mut d = w.finish();
        d.boundary = d.trace_boundary();
        if let Some(&first) = d.boundary.first() {
            d.base = d.tail(first);
        }
        Ok(d)
    }

    /// Traces a boundary cycle through the face darts of one-sided edges,
    /// taking the least unused continuation at each vertex.
    pub fn trace_boundary(&self) -> Vec<Dart> {
        let sides = self.edge_sides();
        let mut out_of: HashMap<usize, BTreeSet<Dart>> = HashMap::new();
        for &d in self.faces.iter().flat_map(|f| f.boundary.iter()) {
            if sides[d / 2] == 1 {
                out_of.entry(self.tail(d)).or_default().insert(d);
            }
        }
        let Some(&start) = out_of.values().flat_map(|s| s.iter()).min() else { return Vec::new() };
        let mut path = Vec::new();
        let mut d = start;
        loop {
            out_of.get_mut(&self.tail(d)).unwrap().remove(&d);
            path.push(d);
            let v = self.head(d);
            match out_of.get(&v).and_then(|s| s.iter().next().copied()) {
                Some(n) => d = n,
                None => break,
            }
        }
        path
    }

    /// Graphviz rendering; relator cells are listed as comments.
    pub fn to_dot(&self, cx: &StaggeredComplex) -> String {
        let mut out = String::from("digraph diagram {\n");
        for (v, vx) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{v} [label=\"{}\"];", cx.factors[vx.factor].id);
        }
        let boundary = self.boundary_edges();
        for (e, edge) in self.edges.iter().enumerate() {
            let style = if edge.letter.is_edge() { "bold" } else { "solid" };
            let colour = if boundary[e] { "black" } else { "gray" };
            let _ = writeln!(
                out,
                "  v{} -> v{} [label=\"{}\", style={style}, color={colour}];",
                edge.tail,
                edge.head,
                cx.letter_name(edge.letter)
            );
        }
        for (i, f) in self.faces.iter().enumerate() {
            let _ = writeln!(out, "  // face {i} {:?}: {:?}", f.label, f.boundary);
        }
        out.push_str("}\n");
        out
    }
}

/// Materializes a Dehn trace as a diagram with boundary the trace input and
/// one relator cell per event, then folds cancelable pairs away.
pub fn diagram_from_trace(cx: &StaggeredComplex, t: &DehnTrace) -> Result<Diagram, DiagramError> {
    let out = replay(cx, t).map_err(DiagramError::TraceMismatch)?;
    if !out.is_empty() {
        return Err(DiagramError::NotTrivial);
    }
    let letters = t.input.letters();
    let mut w = Work::new(cx, Diagram::circle(cx, t.input.start, &letters));
    let mut hole = w.d.boundary.clone();
    for (n, ev) in t.events.iter().enumerate() {
        w.normalize(&mut hole)?;
        let have: Vec<Letter> = hole.iter().map(|&d| w.d.letter(d)).collect();
        let want = ring_letters(&cx.shape, &ev.before);
        let rot = (0..have.len().max(1))
            .find(|&r| have.len() == want.len() && (0..want.len()).all(|i| have[(r + i) % have.len()] == want[i]))
            .ok_or(DiagramError::TraceMismatch(n))?;
        let offs = link_offsets(&ev.before);
        let arc_len = {
            let mut len = 0;
            for i in 0..ev.edges {
                let l = &ev.before[(ev.start + i) % ev.before.len()];
                len += 1 + if i + 1 < ev.edges { l.after.length() as usize } else { 0 };
            }
            len
        };
        let p = (rot + offs[ev.start]) % hole.len();

        // the relator spelled from the matched edge, in the cell's own letters
        let r = relator_letters(cx, ev.relator);
        let l = r.len();
        let ring = cx.relators[ev.relator].ring();
        let fwd = link_offsets(&ring);
        let base = if ev.inverse { fwd[ring.len() - 1 - ev.offset] } else { fwd[ev.offset] };
        let face: Vec<Letter> =
            (0..l).map(|t| if ev.inverse { r[(base + l - t) % l].inverse() } else { r[(base + t) % l] }).collect();
        let (face_m, face_c) = face.split_at(arc_len);

        // respell the interior runs of the arc to match the cell
        let mut i = 0;
        while i < arc_len {
            if face_m[i].is_edge() {
                i += 1;
                continue;
            }
            let mut k = 0;
            while i + k < arc_len && !face_m[i + k].is_edge() {
                k += 1;
            }
            let n_h = hole.len();
            let run: Vec<Letter> = (0..k).map(|j| w.d.letter(hole[(p + i + j) % n_h])).collect();
            if run != face_m[i..i + k] {
                let Letter::Gen { factor, .. } = run[0] else { unreachable!() };
                w.cut(&mut hole, p + i, k, &face_m[i..i + k], FaceLabel::VertexSpace { factor });
                // cut rotates the hole to the run start
                hole.rotate_right((p + i) % n_h);
            }
            i += k;
        }
        let label = FaceLabel::Relator { relator: ev.relator, base, reversed: ev.inverse };
        w.cut(&mut hole, p, arc_len, &inverse_word(face_c), label);
    }
    w.normalize(&mut hole)?;
    if !hole.is_empty() {
        return Err(DiagramError::NotTrivial);
    }
    let (d, _) = reduce(cx, &w.finish())?;
    Ok(d)
}

/// Runs the Dehn algorithm and builds the diagram.
pub fn diagram_from_word(cx: &StaggeredComplex, w: &Path) -> Result<Diagram, DiagramError> {
    let red = dehn_reduce(cx, w);
    if !matches!(red.trace.output, Cyclic::Empty) {
        return Err(DiagramError::NotTrivial);
    }
    diagram_from_trace(cx, &red.trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CancelablePair {
    pub alpha: usize,
    pub beta: usize,
    pub edge: usize,
}

/// Two relator cells of the same relator meeting along an edge with
/// opposite orientations at the same relator position.
pub fn detect_cancelable_pair(d: &Diagram) -> Option<CancelablePair> {
    let mut at: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for f in d.essential_cells() {
        for (t, &x) in d.faces[f].boundary.iter().enumerate() {
            at.entry(x / 2).or_default().push((f, t));
        }
    }
    let mut keys: Vec<&usize> = at.keys().collect();
    keys.sort_unstable();
    for &e in keys {
        let occ = &at[&e];
        for (i, &(a, ta)) in occ.iter().enumerate() {
            for &(b, tb) in &occ[i + 1..] {
                let (fa, fb) = (&d.faces[a], &d.faces[b]);
                let (FaceLabel::Relator { relator: ra, reversed: va, .. }, FaceLabel::Relator { relator: rb, reversed: vb, .. }) =
                    (fa.label, fb.label)
                else {
                    continue;
                };
                if a != b
                    && ra == rb
                    && va != vb
                    && fa.boundary[ta] == twin(fb.boundary[tb])
                    && fa.position(ta) == fb.position(tb)
                {
                    return Some(CancelablePair { alpha: a.min(b), beta: a.max(b), edge: e });
                }
            }
        }
    }
    None
}

/// Folds `beta` onto `alpha`, identifying their boundaries position by
/// position, and removes `beta`.
pub fn fold_pair(cx: &StaggeredComplex, d: &Diagram, pair: CancelablePair) -> Result<Diagram, DiagramError> {
    let mut w = Work::new(cx, d.clone());
    let len = w.d.faces[pair.beta].boundary.len();
    for u in 0..len {
        let fb = &w.d.faces[pair.beta];
        let p = fb.position(u).unwrap();
        let gone = fb.boundary[u];
        let fa = &w.d.faces[pair.alpha];
        let keep = twin(fa.boundary[fa.index_of(p).unwrap()]);
        w.identify(keep, gone, &mut [])?;
    }
    w.d.faces.remove(pair.beta);
    Ok(w.finish())
}

/// Folds cancelable pairs until none is left; returns the number of folds.
pub fn reduce(cx: &StaggeredComplex, d: &Diagram) -> Result<(Diagram, usize), DiagramError> {
    let mut cur = d.clone();
    let mut folds = 0;
    while let Some(pair) = detect_cancelable_pair(&cur) {
        cur = fold_pair(cx, &cur, pair)?;
        folds += 1;
    }
    Ok((cur, folds))
}

/// A relator cell with every essential edge glued to a neighbouring copy
/// read forwards, so the centre is internal and no pair is cancelable.
/// `None` when some essential letter has no inverse in the relator.
pub fn surrounded_cell(cx: &StaggeredComplex, relator: usize) -> Option<Diagram> {
    let r = relator_letters(cx, relator);
    let mut d = Diagram::relator_cell(cx, relator, 0, false);
    let essential: Vec<usize> = (0..r.len()).filter(|&t| r[t].is_edge()).collect();
    for &t in &essential {
        let q = (0..r.len()).find(|&q| r[q] == r[t].inverse())?;
        d.disjoint_union(&Diagram::relator_cell(cx, relator, q, false));
    }
    for (k, &t) in essential.iter().enumerate() {
        d = d.glue(cx, d.faces[0].boundary[t], d.faces[k + 1].boundary[0]).ok()?;
    }
    Some(d)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxCell {
    /// Face of the source diagram.
    pub face: usize,
    /// Essential darts of the face, in order.
    pub boundary: Vec<Dart>,
}

/// The diagram with every vertex-space region collapsed to a point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxiliaryDiagram {
    /// Region of each source vertex.
    pub region: Vec<usize>,
    pub regions: usize,
    /// Essential source edges as (tail region, head region, source edge).
    pub edges: Vec<(usize, usize, usize)>,
    pub cells: Vec<AuxCell>,
    /// Essential darts of the source boundary path.
    pub boundary: Vec<Dart>,
    /// Source edges with fewer than two face sides.
    boundary_edge: Vec<bool>,
}

impl AuxiliaryDiagram {
    pub fn tail(&self, d: &Diagram, x: Dart) -> usize {
        self.region[d.tail(x)]
    }

    pub fn head(&self, d: &Diagram, x: Dart) -> usize {
        self.region[d.head(x)]
    }

    pub fn on_boundary(&self, x: Dart) -> bool {
        self.boundary_edge[x / 2]
    }

    /// Pairs of cells sharing an essential edge.
    pub fn adjacent_cells(&self) -> BTreeSet<(usize, usize)> {
        let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, c) in self.cells.iter().enumerate() {
            for &x in &c.boundary {
                by_edge.entry(x / 2).or_default().push(i);
            }
        }
        let mut out = BTreeSet::new();
        for cs in by_edge.values() {
            for (k, &a) in cs.iter().enumerate() {
                for &b in &cs[k + 1..] {
                    if a != b {
                        out.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
        out
    }
}

pub fn auxiliary(d: &Diagram) -> AuxiliaryDiagram {
    let mut parent: Vec<usize> = (0..d.vertices.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in d.edges.iter().filter(|e| !e.letter.is_edge()) {
        let (a, b) = (find(&mut parent, e.tail), find(&mut parent, e.head));
        parent[a] = b;
    }
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let region: Vec<usize> = (0..d.vertices.len())
        .map(|v| {
            let r = find(&mut parent, v);
            let n = ids.len();
            *ids.entry(r).or_insert(n)
        })
        .collect();
    let edges = (0..d.edges.len())
        .filter(|&e| d.edges[e].letter.is_edge())
        .map(|e| (region[d.edges[e].tail], region[d.edges[e].head], e))
        .collect();
    let essential = |x: &Dart| d.edges[*x / 2].letter.is_edge();
    let cells = d
        .essential_cells()
        .into_iter()
        .map(|f| AuxCell { face: f, boundary: d.faces[f].boundary.iter().copied().filter(essential).collect() })
        .collect();
    AuxiliaryDiagram {
        regions: ids.len(),
        region,
        edges,
        cells,
        boundary: d.boundary.iter().copied().filter(essential).collect(),
        boundary_edge: d.boundary_edges(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellClass {
    pub face: usize,
    pub exponent: usize,
    pub external: bool,
    pub exposed: bool,
    pub extreme: bool,
    /// Position class and first boundary index of an extreme arc.
    pub extreme_arc: Option<(usize, usize)>,
}

/// Classifies each relator cell on the auxiliary diagram. Position classes
/// are relator positions modulo the period.
pub fn classify_cells(cx: &StaggeredComplex, d: &Diagram) -> Vec<CellClass> {
    let aux = auxiliary(d);
    // closure of each cell: its edges and regions
    let closure: Vec<(HashSet<usize>, HashSet<usize>)> = aux
        .cells
        .iter()
        .map(|c| {
            let edges = c.boundary.iter().map(|x| x / 2).collect();
            let verts = c.boundary.iter().flat_map(|&x| [aux.tail(d, x), aux.head(d, x)]).collect();
            (edges, verts)
        })
        .collect();
    let mut out = Vec::new();
    for (ci, cell) in aux.cells.iter().enumerate() {
        let f = &d.faces[cell.face];
        let FaceLabel::Relator { relator, .. } = f.label else { continue };
        let rel = &cx.relators[relator];
        let period = rel.period_len(&cx.shape);
        let class_of: Vec<usize> = {
            let mut at = HashMap::new();
            for (t, &x) in f.boundary.iter().enumerate() {
                at.insert(x, f.position(t).unwrap() % period);
            }
            // a dart can occur twice in a folded face; the first position wins
            cell.boundary.iter().map(|x| at[x]).collect()
        };
        let m = cell.boundary.len();
        let external = cell.boundary.iter().any(|&x| aux.on_boundary(x));
        let classes: BTreeSet<usize> = class_of.iter().copied().collect();
        let exposed = classes
            .iter()
            .any(|&c| (0..m).filter(|&i| class_of[i] == c).all(|i| aux.on_boundary(cell.boundary[i])));
        let others = |pick: &dyn Fn(&(HashSet<usize>, HashSet<usize>)) -> bool| {
            closure.iter().enumerate().any(|(j, c)| j != ci && pick(c))
        };
        let mut extreme_arc = None;
        'search: for &c in &classes {
            let members: Vec<usize> = (0..m).filter(|&i| class_of[i] == c).collect();
            for g in 0..members.len() {
                let first = members[(g + 1) % members.len()];
                let last = members[g];
                let span = (last + m - first) % m + 1;
                let arc: Vec<Dart> = (0..span).map(|k| cell.boundary[(first + k) % m]).collect();
                let edge_hit = arc.iter().any(|&x| others(&|cl| cl.0.contains(&(x / 2))));
                let vertex_hit = arc[..span - 1].iter().any(|&x| {
                    let v = aux.head(d, x);
                    others(&|cl| cl.1.contains(&v))
                });
                if !edge_hit && !vertex_hit {
                    extreme_arc = Some((c, first));
                    break 'search;
                }
            }
        }
        out.push(CellClass {
            face: cell.face,
            exponent: rel.exponent,
            external,
            exposed,
            extreme: extreme_arc.is_some(),
            extreme_arc,
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpellingReport {
    pub essential: usize,
    pub extreme: Vec<usize>,
    /// Internal relator cells with their exponents.
    pub internal: Vec<(usize, usize)>,
    pub required: usize,
}

impl SpellingReport {
    pub fn ok(&self) -> bool {
        self.extreme.len() >= self.required
    }
}

/// At least two extreme cells once there are two relator cells, and at
/// least `2n` when some internal cell has exponent `n`.
pub fn spelling_audit(cx: &StaggeredComplex, d: &Diagram) -> SpellingReport {
    let classes = classify_cells(cx, d);
    let extreme: Vec<usize> = classes.iter().filter(|c| c.extreme).map(|c| c.face).collect();
    let internal: Vec<(usize, usize)> = classes.iter().filter(|c| !c.external).map(|c| (c.face, c.exponent)).collect();
    let mut required = if classes.len() >= 2 { 2 } else { 0 };
    if let Some(n) = internal.iter().map(|&(_, n)| n).max() {
        required = required.max(2 * n);
    }
    SpellingReport { essential: classes.len(), extreme, internal, required }
}
