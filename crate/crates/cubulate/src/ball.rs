//! Finite balls of the coned universal cover.
//!
//! Vertices are group elements (paths from the base vertex) with their
//! vertex-space type; edges carry a positive letter and point from `v` to
//! `v·x`. Squares come from free-abelian vertex spaces, essential cells from
//! relators. Every identification made while building is confirmed by the
//! Dehn algorithm.

use crate::enumerate::{enumerate_ball, Enumeration, OracleError};
use crate::presentation::StaggeredComplex;
use crate::word::{FactorKind, Letter, Path};
use crate::word_problem::{relator_letters, Mode, PseudometricChoice, Solver, SyllableMetric};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BallError {
    #[error(transparent)]
    Identification(#[from] OracleError),
    #[error("vertex {0} lies outside the safe core")]
    OutsideCore(usize),
    #[error("no path between {0} and {1} inside the ball")]
    Unreachable(usize, usize),
    #[error("horoball pseudometric needs a horoball context")]
    NoHoroballContext,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Vertex {
    pub label: Vec<Letter>,
    pub factor: usize,
    pub depth: usize,
    /// Vertex-space component id.
    pub component: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    /// Positive letter read from source to target.
    pub letter: Letter,
}

impl Edge {
    pub fn essential(&self) -> bool {
        self.letter.is_edge()
    }
}

/// An edge traversal on a boundary cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub edge: usize,
    /// +1 when traversed along the canonical orientation.
    pub sign: i8,
}

/// A square `e1 f1 e2^-1 f2^-1` of a torus vertex space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Square {
    pub boundary: [Occurrence; 4],
}

/// An essential 2-cell instance: a coset of the cyclic group generated by
/// the relator period.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cell {
    pub relator: usize,
    /// Vertex where occurrence 0 starts; the least of the period starts.
    pub base: usize,
    pub exponent: usize,
    pub period_len: usize,
    pub boundary: Vec<Occurrence>,
    /// `vertices[i]` is where occurrence `i` starts.
    pub vertices: Vec<usize>,
}

impl Cell {
    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    /// The occurrences in the same position as `occ` in every period.
    pub fn position_class(&self, occ: usize) -> Vec<usize> {
        let l = self.len();
        (0..self.exponent).map(|j| (occ % self.period_len + j * self.period_len) % l).collect()
    }
}

#[derive(Clone, Debug)]
pub struct BallComplex {
    pub cx: StaggeredComplex,
    /// Materialized radius.
    pub radius: usize,
    /// Radius of the safe core.
    pub core: usize,
    pub w_x: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub squares: Vec<Square>,
    pub cells: Vec<Cell>,
    enumeration: Enumeration,
    /// Edge id of the edge leaving `v` along letter index `x` (either orientation).
    edge_at: Vec<u32>,
    /// Cells and squares through each edge: (cell id, occurrence index).
    pub edge_cells: Vec<Vec<(usize, usize)>>,
    pub edge_squares: Vec<Vec<(usize, usize)>>,
    /// How many essential cells and squares contain each edge in the full cover.
    pub expected_cells: Vec<usize>,
    pub expected_squares: Vec<usize>,
    resolved_region: OnceLock<Vec<bool>>,
}

const NO_EDGE: u32 = u32::MAX;

/// Safe margin around the core: half the longest attaching map, so every
/// cell touching the core is complete.
pub fn margin(cx: &StaggeredComplex) -> usize {
    cx.w_x().div_ceil(2)
}

/// The ball of radius `r`; its safe core has radius `r - margin`.
pub fn build_ball(cx: &StaggeredComplex, r: usize) -> Result<BallComplex, BallError> {
    build(cx, r, r.saturating_sub(margin(cx)))
}

/// The ball whose safe core has radius `core`.
pub fn build_ball_with_core(cx: &StaggeredComplex, core: usize) -> Result<BallComplex, BallError> {
    build(cx, core + margin(cx), core)
}

fn build(cx: &StaggeredComplex, radius: usize, core: usize) -> Result<BallComplex, BallError> {
    let solver = Solver::new(cx);
    let shape = cx.shape.clone();
    let confirm = move |u: &[Letter], v: &[Letter]| {
        let pu = Path::from_letters(&shape, 0, u);
        let pv = Path::from_letters(&shape, 0, v);
        solver.are_equal(&pu, &pv, Mode::Dehn).unwrap_or(false)
    };
    let en = enumerate_ball(cx, radius, Some(&confirm))?;
    Ok(assemble(cx, en, radius, core))
}

fn assemble(cx: &StaggeredComplex, en: Enumeration, radius: usize, core: usize) -> BallComplex {
    let shape = &cx.shape;
    let n = en.len();
    let nl = en.letters;
    let mut edges = Vec::new();
    let mut edge_at = vec![NO_EDGE; n * nl];
    for v in 0..n {
        for x in (0..nl).step_by(2) {
            if let Some(w) = en.target(v, x) {
                let id = edges.len() as u32;
                edges.push(Edge { source: v, target: w, letter: shape.letter_at(x) });
                edge_at[v * nl + x] = id;
                edge_at[w * nl + (x ^ 1)] = id;
            }
        }
    }

    // vertex-space components
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for e in &edges {
        if !e.essential() {
            let (a, b) = (find(&mut uf, e.source), find(&mut uf, e.target));
            if a != b {
                uf[a.max(b)] = a.min(b);
            }
        }
    }
    let mut comp_id = HashMap::new();
    let mut vertices = Vec::with_capacity(n);
    for v in 0..n {
        let root = find(&mut uf, v);
        let next = comp_id.len();
        let c = *comp_id.entry(root).or_insert(next);
        vertices.push(Vertex { label: en.label(v), factor: en.factor[v], depth: en.depth[v], component: c });
    }

    let occ = |v: usize, x: usize| -> Option<Occurrence> {
        let id = edge_at[v * nl + x];
        (id != NO_EDGE).then_some(Occurrence { edge: id as usize, sign: if x & 1 == 0 { 1 } else { -1 } })
    };

    // squares of torus vertex spaces
    let mut squares = Vec::new();
    for v in 0..n {
        let f = en.factor[v];
        if cx.factors[f].kind != FactorKind::Abelian {
            continue;
        }
        let rank = cx.factors[f].rank();
        for i in 0..rank {
            for j in i + 1..rank {
                let xi = shape.letter_index(Letter::Gen { factor: f, gen: i, inv: false });
                let xj = shape.letter_index(Letter::Gen { factor: f, gen: j, inv: false });
                let (Some(vi), Some(vj)) = (en.target(v, xi), en.target(v, xj)) else { continue };
                let (Some(vij), Some(vji)) = (en.target(vi, xj), en.target(vj, xi)) else { continue };
                debug_assert_eq!(vij, vji);
                squares.push(Square {
                    boundary: [
                        occ(v, xi).unwrap(),
                        occ(vi, xj).unwrap(),
                        Occurrence { edge: occ(vj, xi).unwrap().edge, sign: -1 },
                        Occurrence { edge: occ(v, xj).unwrap().edge, sign: -1 },
                    ],
                });
            }
        }
    }

    // essential cells, one per coset of the period
    let mut cells = Vec::new();
    for (r, rel) in cx.relators.iter().enumerate() {
        let letters = relator_letters(cx, r);
        let plen = rel.period_len(shape);
        let start_factor = shape.letter_source(letters[0]);
        for v in 0..n {
            if en.factor[v] != start_factor {
                continue;
            }
            let mut verts = Vec::with_capacity(letters.len());
            let mut boundary = Vec::with_capacity(letters.len());
            let mut at = v;
            let mut ok = true;
            for &l in &letters {
                let x = shape.letter_index(l);
                match (en.target(at, x), occ(at, x)) {
                    (Some(w), Some(o)) => {
                        verts.push(at);
                        boundary.push(o);
                        at = w;
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok || at != v {
                continue;
            }
            let base = (0..rel.exponent).map(|j| verts[j * plen]).min().unwrap();
            if base != v {
                continue;
            }
            cells.push(Cell { relator: r, base, exponent: rel.exponent, period_len: plen, boundary, vertices: verts });
        }
    }

    let mut edge_cells = vec![Vec::new(); edges.len()];
    for (c, cell) in cells.iter().enumerate() {
        for (i, o) in cell.boundary.iter().enumerate() {
            edge_cells[o.edge].push((c, i));
        }
    }
    let mut edge_squares = vec![Vec::new(); edges.len()];
    for (s, sq) in squares.iter().enumerate() {
        for (i, o) in sq.boundary.iter().enumerate() {
            edge_squares[o.edge].push((s, i));
        }
    }

    // expected incidences in the full cover, by letter
    let mut per_letter_cells = vec![0usize; nl];
    for r in 0..cx.relators.len() {
        let letters = relator_letters(cx, r);
        let plen = cx.relators[r].period_len(shape);
        for &l in &letters[..plen] {
            per_letter_cells[shape.letter_index(l.positive())] += 1;
        }
    }
    let expected_cells = edges.iter().map(|e| per_letter_cells[shape.letter_index(e.letter)]).collect();
    let expected_squares = edges
        .iter()
        .map(|e| match e.letter {
            Letter::Gen { factor, .. } if cx.factors[factor].kind == FactorKind::Abelian => {
                2 * (cx.factors[factor].rank() - 1)
            }
            _ => 0,
        })
        .collect();

    BallComplex {
        cx: cx.clone(),
        radius,
        core,
        w_x: cx.w_x(),
        vertices,
        edges,
        squares,
        cells,
        enumeration: en,
        edge_at,
        edge_cells,
        edge_squares,
        expected_cells,
        expected_squares,
        resolved_region: OnceLock::new(),
    }
}

/// A path in the ball's 1-skeleton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallPath {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub letters: Vec<Letter>,
}

impl BallPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl BallComplex {
    pub fn letters(&self) -> usize {
        self.enumeration.letters
    }

    pub fn in_core(&self, v: usize) -> bool {
        self.vertices[v].depth <= self.core
    }

    /// Every square and essential cell through the edge is present.
    pub fn edge_resolved(&self, e: usize) -> bool {
        self.edge_cells[e].len() == self.expected_cells[e] && self.edge_squares[e].len() == self.expected_squares[e]
    }

    /// Vertices all of whose edges are resolved; contains the safe core.
    pub fn resolved_region(&self) -> &[bool] {
        self.resolved_region.get_or_init(|| {
            (0..self.vertices.len()).map(|v| self.neighbours(v).all(|(_, _, e)| self.edge_resolved(e))).collect()
        })
    }

    pub fn core_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.in_core(v)).collect()
    }

    /// Vertices within half the core radius of the base. Every geodesic
    /// between two of them stays in the core.
    pub fn inner_vertices(&self) -> Vec<usize> {
        let d = self.bfs(0, Some(self.core / 2));
        (0..self.vertices.len()).filter(|&v| d[v] != u32::MAX).collect()
    }

    /// Target of letter index `x` at `v`.
    pub fn step(&self, v: usize, x: usize) -> Option<usize> {
        self.enumeration.target(v, x)
    }

    /// Edge id used by letter index `x` at `v`.
    pub fn edge_at(&self, v: usize, x: usize) -> Option<usize> {
        let id = self.edge_at[v * self.letters() + x];
        (id != NO_EDGE).then_some(id as usize)
    }

    /// Follows a letter path from `v`.
    pub fn walk(&self, v: usize, letters: &[Letter]) -> Option<usize> {
        self.enumeration.walk(v, letters)
    }

    /// Neighbours of `v` as (letter index, vertex, edge).
    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.letters()).filter_map(move |x| Some((x, self.step(v, x)?, self.edge_at(v, x)?)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbours(v).count()
    }

    /// Breadth-first distances from `src`, optionally capped.
    pub fn bfs(&self, src: usize, cap: Option<usize>) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertices.len()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            if cap.is_some_and(|c| dist[u] as usize >= c) {
                continue;
            }
            for (_, w, _) in self.neighbours(u) {
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// A shortest path, choosing the least letter index at each step.
    pub fn geodesic(&self, u: usize, v: usize) -> Result<BallPath, BallError> {
        for x in [u, v] {
            if !self.in_core(x) {
                return Err(BallError::OutsideCore(x));
            }
        }
        let dist = self.bfs(v, None);
        if dist[u] == u32::MAX {
            return Err(BallError::Unreachable(u, v));
        }
        let mut path = BallPath { vertices: vec![u], edges: Vec::new(), letters: Vec::new() };
        let mut at = u;
        while at != v {
            let (x, w, e) = self.neighbours(at).find(|&(_, w, _)| dist[w] + 1 == dist[at]).expect("descent");
            path.vertices.push(w);
            path.edges.push(e);
            path.letters.push(self.cx.shape.letter_at(x));
            at = w;
        }
        Ok(path)
    }

    /// Shortest path for the relative length of a pseudometric choice:
    /// essential edges cost one; a maximal run inside a vertex space costs
    /// the pseudometric distance between its ends.
    pub fn relative_geodesic(
        &self,
        u: usize,
        v: usize,
        pm: &PseudometricChoice,
        ctx: Option<&dyn SyllableMetric>,
    ) -> Result<(u64, BallPath), BallError> {
        for x in [u, v] {
            if !self.in_core(x) {
                return Err(BallError::OutsideCore(x));
            }
        }
        // members of each component for syllable jumps
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, vx) in self.vertices.iter().enumerate() {
            members.entry(vx.component).or_default().push(i);
        }
        // states: (vertex, arrived by essential edge or start) to keep
        // syllables maximal; jumps are only taken from such states
        let n = self.vertices.len();
        let mut dist = vec![[u64::MAX; 2]; n];
        let mut prev: Vec<[Option<(usize, usize, bool)>; 2]> = vec![[None; 2]; n];
        let mut heap = BinaryHeap::new();
        dist[u][0] = 0;
        heap.push(std::cmp::Reverse((0u64, u, 0usize)));
        while let Some(std::cmp::Reverse((d, a, s))) = heap.pop() {
            if d > dist[a][s] {
                continue;
            }
            // essential edges
            for (_, w, e) in self.neighbours(a) {
                if self.edges[e].essential() && d + 1 < dist[w][0] {
                    dist[w][0] = d + 1;
                    prev[w][0] = Some((a, s, false));
                    heap.push(std::cmp::Reverse((d + 1, w, 0)));
                }
            }
            if s == 0 {
                let f = self.vertices[a].factor;
                let comp = self.vertices[a].component;
                let intra = self.component_bfs(a);
                for &w in &members[&comp] {
                    if w == a || !intra.contains_key(&w) {
                        continue;
                    }
                    let elem_path = self.component_path(a, w, &intra);
                    let p = Path::from_letters(&self.cx.shape, f, &elem_path.letters);
                    let cost = match p.syls.first() {
                        None => 0,
                        Some(crate::word::Syl::Elem { factor, elem }) => {
                            crate::word_problem::syllable_length(pm.modes[*factor], *factor, elem, ctx)
                                .map_err(|_| BallError::NoHoroballContext)?
                        }
                        Some(_) => unreachable!(),
                    };
                    if d + cost < dist[w][1] {
                        dist[w][1] = d + cost;
                        prev[w][1] = Some((a, 0, true));
                        heap.push(std::cmp::Reverse((d + cost, w, 1)));
                    }
                }
            }
        }
        let (best, s) = if dist[v][0] <= dist[v][1] { (dist[v][0], 0) } else { (dist[v][1], 1) };
        if best == u64::MAX {
            return Err(BallError::Unreachable(u, v));
        }
        // unwind into an explicit edge path
        let mut hops = Vec::new();
        let (mut at, mut st) = (v, s);
        while let Some((p, ps, jump)) = prev[at][st] {
            hops.push((p, at, jump));
            at = p;
            st = ps;
        }
        hops.reverse();
        let mut path = BallPath { vertices: vec![u], edges: Vec::new(), letters: Vec::new() };
        for (a, b, jump) in hops {
            let seg = if jump {
                let intra = self.component_bfs(a);
                self.component_path(a, b, &intra)
            } else {
                let (x, _, e) = self.neighbours(a).find(|&(_, w, e)| w == b && self.edges[e].essential()).unwrap();
                BallPath { vertices: vec![a, b], edges: vec![e], letters: vec![self.cx.shape.letter_at(x)] }
            };
            path.vertices.extend_from_slice(&seg.vertices[1..]);
            path.edges.extend_from_slice(&seg.edges);
            path.letters.extend_from_slice(&seg.letters);
        }
        Ok((best, path))
    }

    /// BFS distances from `src` using only edges inside its vertex space.
    pub fn component_bfs(&self, src: usize) -> HashMap<usize, u32> {
        let mut dist = HashMap::from([(src, 0u32)]);
        let mut queue = VecDeque::from([src]);
        while let Some(a) = queue.pop_front() {
            let d = dist[&a];
            for (_, w, e) in self.neighbours(a) {
                if !self.edges[e].essential() && !dist.contains_key(&w) {
                    dist.insert(w, d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn component_path(&self, a: usize, b: usize, from_a: &HashMap<usize, u32>) -> BallPath {
        let mut rev = BallPath { vertices: vec![b], edges: Vec::new(), letters: Vec::new() };
        let mut at = b;
        while at != a {
            let (x, w, e) = self
                .neighbours(at)
                .find(|&(_, w, e)| !self.edges[e].essential() && from_a.get(&w).is_some_and(|&d| d + 1 == from_a[&at]))
                .unwrap();
            rev.vertices.push(w);
            rev.edges.push(e);
            rev.letters.push(self.cx.shape.letter_at(x ^ 1));
            at = w;
        }
        rev.vertices.reverse();
        rev.edges.reverse();
        rev.letters.reverse();
        rev
    }

    /// The least-depth vertex of each factor type.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.cx.factors.len())
            .filter_map(|f| (0..self.vertices.len()).filter(|&v| self.vertices[v].factor == f).min_by_key(|&v| (self.vertices[v].depth, v)))
            .collect()
    }

    /// Cell whose base is `v` for relator `r`, if present.
    pub fn cell_index(&self) -> HashMap<(usize, usize), usize> {
        self.cells.iter().enumerate().map(|(i, c)| ((c.relator, c.base), i)).collect()
    }

    /// Number of essential edges on a cell's boundary.
    pub fn cell_essential(&self, c: usize) -> usize {
        self.cells[c].boundary.iter().filter(|o| self.edges[o.edge].essential()).count()
    }

    /// Upper bound on vertex degree from local finiteness.
    pub fn degree_bound(&self) -> usize {
        2 * self.cx.factors.iter().map(|f| f.rank()).sum::<usize>() + 2 * self.cx.edges.len()
    }
}

/// Findings of the geodesic/cell lemma checks.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GeodesicCellReport {
    pub roots: usize,
    pub geodesic_targets: usize,
    pub cells_met: usize,
    /// (cell, class start) pairs where a geodesic covers a whole position class.
    pub full_class_violations: Vec<(usize, usize)>,
    /// (cell, count) where a geodesic carries more than half the essential edges.
    pub half_violations: Vec<(usize, usize)>,
    pub max_essential_fraction: f64,
}

/// Checks every geodesic of length at most `len` starting at a root vertex
/// of each factor type. By the group action this covers every geodesic of
/// that length in the cover. Requires cells met to be complete, which holds
/// when `len + margin <= radius - 1`.
pub fn geodesic_cell_check(b: &BallComplex, len: usize) -> GeodesicCellReport {
    let mut rep = GeodesicCellReport::default();
    let roots = b.roots();
    rep.roots = roots.len();
    let mut met = std::collections::BTreeSet::new();
    for &root in &roots {
        let dist = b.bfs(root, Some(len));
        let mut order: Vec<usize> = (0..b.vertices.len()).filter(|&v| dist[v] != u32::MAX).collect();
        order.sort_by_key(|&v| dist[v]);
        rep.geodesic_targets += order.len();
        // best[v]: per cell, (max essential edges, per class max members)
        let mut best: HashMap<usize, HashMap<usize, (usize, Vec<usize>)>> = HashMap::new();
        best.insert(root, HashMap::new());
        for &a in &order {
            let cur = best.get(&a).cloned().unwrap_or_default();
            for (_, w, e) in b.neighbours(a) {
                if dist[w] != dist[a] + 1 {
                    continue;
                }
                let mut next = cur.clone();
                for &(c, occ) in &b.edge_cells[e] {
                    let cell = &b.cells[c];
                    let entry = next.entry(c).or_insert_with(|| (0, vec![0; cell.period_len]));
                    if b.edges[e].essential() {
                        entry.0 += 1;
                    }
                    entry.1[occ % cell.period_len] += 1;
                }
                let slot = best.entry(w).or_default();
                for (c, (ess, cls)) in next {
                    let s = slot.entry(c).or_insert_with(|| (0, vec![0; cls.len()]));
                    s.0 = s.0.max(ess);
                    for (k, &m) in cls.iter().enumerate() {
                        s.1[k] = s.1[k].max(m);
                    }
                }
            }
        }
        for per in best.values() {
            for (&c, (ess, cls)) in per {
                met.insert(c);
                let total = b.cell_essential(c);
                rep.max_essential_fraction = rep.max_essential_fraction.max(*ess as f64 / total as f64);
                if 2 * ess > total && !rep.half_violations.contains(&(c, *ess)) {
                    rep.half_violations.push((c, *ess));
                }
                for (k, &m) in cls.iter().enumerate() {
                    if m >= b.cells[c].exponent && !rep.full_class_violations.contains(&(c, k)) {
                        rep.full_class_violations.push((c, k));
                    }
                }
            }
        }
    }
    rep.cells_met = met.len();
    rep
}

/// Vertex pairs in one vertex-space component where some geodesic leaves
/// the component.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub pairs_checked: usize,
    pub violations: Vec<(usize, usize)>,
}

/// Every geodesic between two vertices of one vertex space stays in it:
/// checked on the geodesic interval of each pair within `len` of a root.
pub fn convexity_check(b: &BallComplex, len: usize) -> ConvexityReport {
    let mut rep = ConvexityReport::default();
    for root in b.roots() {
        let comp = b.vertices[root].component;
        let from_root = b.bfs(root, Some(len));
        for v in 0..b.vertices.len() {
            if v == root || b.vertices[v].component != comp || from_root[v] == u32::MAX {
                continue;
            }
            rep.pairs_checked += 1;
            let d = from_root[v];
            let from_v = b.bfs(v, Some(d as usize));
            let leaves = (0..b.vertices.len()).any(|x| {
                from_root[x] != u32::MAX
                    && from_v[x] != u32::MAX
                    && from_root[x] + from_v[x] == d
                    && b.vertices[x].component != comp
            });
            if leaves {
                rep.violations.push((root, v));
            }
        }
    }
    rep
}

/// Pairs of distinct cells where one boundary holds two members of a
/// position class of the other.
pub fn share_boundary_check(b: &BallComplex) -> Vec<(usize, usize)> {
    let mut bad = Vec::new();
    for (a, cell) in b.cells.iter().enumerate() {
        // other cells meeting alpha's edges, with alpha's classes they meet
        let mut hits: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, o) in cell.boundary.iter().enumerate() {
            for &(c, _) in &b.edge_cells[o.edge] {
                if c != a {
                    hits.entry(c).or_default().push(i % cell.period_len);
                }
            }
        }
        for (c, mut classes) in hits {
            classes.sort_unstable();
            if classes.windows(2).any(|w| w[0] == w[1]) {
                bad.push((a, c));
            }
        }
    }
    bad.sort_unstable();
    bad
}
