//! Walls of the coned universal cover.
//!
//! Every 1-cell carries two wall nodes, one on each side of its midpoint.
//! Squares join nodes on opposite edges (the doubled midcube), essential
//! cells join the plus side of an occurrence to the minus side of the next
//! occurrence in its position class. Walls are the components of this
//! graph; components crossing exactly the same edges are parallel copies
//! and are merged into one wall.
//!
//! Square side rule: place the square as `[0,1]²` with boundary
//! `e1 f1 e2⁻¹ f2⁻¹`, so `e1` and `e2` are both horizontal. The node of an
//! edge on its own minus side sits at `x = ½ − ε` for positive traversal,
//! and the copy of the midcube through it meets the opposite edge at the
//! same `x`. Translating back through each edge's traversal sign gives
//! `s' = s·(−σ1σ2)`.

use crate::ball::BallComplex;
use crate::fit::{lower_envelope, EnvelopeFit};
use crate::par::{self, Exec};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WallError {
    #[error("wall {0} is not completely traced inside the safe core")]
    Incomplete(usize),
    #[error("vertex {0} lies outside the safe core")]
    OutsideCore(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    fn flip(self) -> Self {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }

    /// The side seen by a traversal with sign `sign`.
    fn along(self, sign: i8) -> Self {
        if sign > 0 {
            self
        } else {
            self.flip()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WallNode {
    pub edge: usize,
    pub side: Side,
}

impl WallNode {
    pub fn index(self) -> usize {
        2 * self.edge + (self.side == Side::Plus) as usize
    }

    pub fn from_index(i: usize) -> Self {
        WallNode { edge: i / 2, side: if i & 1 == 1 { Side::Plus } else { Side::Minus } }
    }
}

/// Where a wall chord runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Via {
    Square(usize),
    Cell { cell: usize, from: usize, to: usize },
}

/// Neighbours of a wall node through squares and essential cells.
pub fn wall_adjacency(b: &BallComplex, n: WallNode) -> Vec<(WallNode, Via)> {
    let mut out = Vec::new();
    for &(s, i) in &b.edge_squares[n.edge] {
        let bd = &b.squares[s].boundary;
        let j = (i + 2) % 4;
        let side = if bd[i].sign * bd[j].sign > 0 { n.side.flip() } else { n.side };
        out.push((WallNode { edge: bd[j].edge, side }, Via::Square(s)));
    }
    for &(c, i) in &b.edge_cells[n.edge] {
        let cell = &b.cells[c];
        let l = cell.len();
        let sign = cell.boundary[i].sign;
        // side relative to this traversal
        if n.side.along(sign) == Side::Plus {
            let j = (i + cell.period_len) % l;
            let o = cell.boundary[j];
            out.push((WallNode { edge: o.edge, side: Side::Minus.along(o.sign) }, Via::Cell { cell: c, from: i, to: j }));
        } else {
            let j = (i + l - cell.period_len) % l;
            let o = cell.boundary[j];
            out.push((WallNode { edge: o.edge, side: Side::Plus.along(o.sign) }, Via::Cell { cell: c, from: j, to: i }));
        }
    }
    out
}

/// All squares and essential cells through the edge are present.
pub fn resolved(b: &BallComplex, edge: usize) -> bool {
    b.edge_resolved(edge)
}

fn touches_core(b: &BallComplex, edge: usize) -> bool {
    let e = &b.edges[edge];
    b.in_core(e.source) || b.in_core(e.target)
}

fn inside_core(b: &BallComplex, edge: usize) -> bool {
    let e = &b.edges[edge];
    b.in_core(e.source) && b.in_core(e.target)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WallType {
    /// Crosses essential edges only.
    Graph,
    /// Meets a vertex space along a hyperplane.
    Hyperplane,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chord {
    pub a: WallNode,
    pub b: WallNode,
    pub via: Via,
}

/// One connected piece of the node graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallPart {
    pub nodes: Vec<WallNode>,
    pub chords: Vec<Chord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    pub id: usize,
    /// Parallel components with equal crossing sets.
    pub parts: Vec<WallPart>,
    /// Edges the wall is dual to, sorted.
    pub crossing: Vec<usize>,
    pub kind: WallType,
    /// Dual to an edge inside the safe core, and every node on an edge
    /// touching the core has all its neighbours.
    pub complete: bool,
    /// No node anywhere is missing neighbours.
    pub finite: bool,
    pub meets_core: bool,
}

impl Wall {
    pub fn nodes(&self) -> impl Iterator<Item = WallNode> + '_ {
        self.parts.iter().flat_map(|p| p.nodes.iter().copied())
    }

    /// Per cell, the chords of each part running through it.
    pub fn cell_arcs(&self) -> BTreeMap<usize, Vec<(usize, usize)>> {
        let mut arcs: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for p in &self.parts {
            for c in &p.chords {
                if let Via::Cell { cell, from, to } = c.via {
                    arcs.entry(cell).or_default().push((from, to));
                }
            }
        }
        arcs
    }
}

fn collect_part(b: &BallComplex, start: WallNode) -> WallPart {
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut nodes = Vec::new();
    let mut chords = Vec::new();
    while let Some(n) = queue.pop_front() {
        nodes.push(n);
        for (m, via) in wall_adjacency(b, n) {
            if n.index() < m.index() || (n == m) {
                chords.push(Chord { a: n, b: m, via });
            }
            if seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    nodes.sort();
    chords.sort_by_key(|c| (c.a, c.b, c.via));
    chords.dedup();
    WallPart { nodes, chords }
}

fn finish_wall(b: &BallComplex, id: usize, parts: Vec<WallPart>) -> Wall {
    let crossing: BTreeSet<usize> = parts.iter().flat_map(|p| p.nodes.iter().map(|n| n.edge)).collect();
    let crossing: Vec<usize> = crossing.into_iter().collect();
    let kind = if crossing.iter().any(|&e| !b.edges[e].essential()) { WallType::Hyperplane } else { WallType::Graph };
    let complete_nodes = crossing.iter().all(|&e| !touches_core(b, e) || resolved(b, e));
    let meets_core = crossing.iter().any(|&e| inside_core(b, e));
    let finite = crossing.iter().all(|&e| resolved(b, e));
    Wall { id, parts, crossing, kind, complete: complete_nodes && meets_core, finite, meets_core }
}

/// Breadth-first closure from one node, merged with the parallel copy on
/// the other side when it crosses the same edges.
pub fn trace_wall(b: &BallComplex, edge: usize, side: Side) -> Wall {
    let part = collect_part(b, WallNode { edge, side });
    let other = WallNode { edge, side: side.flip() };
    let mut parts = vec![part];
    if !parts[0].nodes.contains(&other) {
        let twin = collect_part(b, other);
        let edges = |p: &WallPart| p.nodes.iter().map(|n| n.edge).collect::<BTreeSet<_>>();
        if edges(&twin) == edges(&parts[0]) {
            parts.push(twin);
        }
    }
    parts.sort_by_key(|p| p.nodes[0]);
    finish_wall(b, 0, parts)
}

/// All walls of a ball, indexed for crossing queries.
#[derive(Clone, Debug)]
pub struct WallSystem {
    /// Node index to wall id.
    node_wall: Vec<u32>,
    /// Per wall: component representatives and node count.
    reps: Vec<Vec<WallNode>>,
    sizes: Vec<usize>,
    complete: Vec<bool>,
    meets_core: Vec<bool>,
}

impl WallSystem {
    pub fn build(b: &BallComplex) -> Self {
        let n = 2 * b.edges.len();
        let mut uf: Vec<u32> = (0..n as u32).collect();
        fn find(uf: &mut [u32], mut x: u32) -> u32 {
            while uf[x as usize] != x {
                uf[x as usize] = uf[uf[x as usize] as usize];
                x = uf[x as usize];
            }
            x
        }
        let union = |uf: &mut Vec<u32>, a: usize, c: usize| {
            let (ra, rc) = (find(uf, a as u32), find(uf, c as u32));
            if ra != rc {
                uf[ra.max(rc) as usize] = ra.min(rc);
            }
        };
        for e in 0..b.edges.len() {
            for side in [Side::Minus, Side::Plus] {
                let node = WallNode { edge: e, side };
                for (m, _) in wall_adjacency(b, node) {
                    union(&mut uf, node.index(), m.index());
                }
            }
        }
        // dense component ids
        let mut comp = vec![0u32; n];
        let mut ids: HashMap<u32, u32> = HashMap::new();
        let mut comp_edges: Vec<Vec<usize>> = Vec::new();
        let mut comp_rep = Vec::new();
        for i in 0..n {
            let r = find(&mut uf, i as u32);
            let next = ids.len() as u32;
            let c = *ids.entry(r).or_insert_with(|| {
                comp_edges.push(Vec::new());
                comp_rep.push(WallNode::from_index(i));
                next
            });
            comp[i] = c;
            comp_edges[c as usize].push(i / 2);
        }
        // merge parallel copies: the two components through one edge with
        // identical crossing sets
        let k = comp_edges.len();
        let mut class: Vec<u32> = (0..k as u32).collect();
        let mut checked = HashSet::new();
        for e in 0..b.edges.len() {
            let (c0, c1) = (comp[2 * e], comp[2 * e + 1]);
            if c0 == c1 || !checked.insert((c0.min(c1), c0.max(c1))) {
                continue;
            }
            let (a, d) = (&comp_edges[c0 as usize], &comp_edges[c1 as usize]);
            if a.len() == d.len() {
                let sa: BTreeSet<_> = a.iter().collect();
                let sd: BTreeSet<_> = d.iter().collect();
                if sa == sd {
                    let (lo, hi) = (c0.min(c1), c0.max(c1));
                    class[hi as usize] = class[lo as usize];
                }
            }
        }
        let mut wall_id: HashMap<u32, u32> = HashMap::new();
        let mut reps: Vec<Vec<WallNode>> = Vec::new();
        let mut sizes = Vec::new();
        let mut comp_wall = vec![0u32; k];
        for c in 0..k {
            let next = wall_id.len() as u32;
            let w = *wall_id.entry(class[c]).or_insert_with(|| {
                reps.push(Vec::new());
                sizes.push(0);
                next
            });
            comp_wall[c] = w;
            reps[w as usize].push(comp_rep[c]);
            sizes[w as usize] += comp_edges[c].len();
        }
        let node_wall: Vec<u32> = comp.iter().map(|&c| comp_wall[c as usize]).collect();
        let mut complete = vec![true; reps.len()];
        let mut meets_core = vec![false; reps.len()];
        for e in 0..b.edges.len() {
            if touches_core(b, e) {
                for i in [2 * e, 2 * e + 1] {
                    let w = node_wall[i] as usize;
                    meets_core[w] |= inside_core(b, e);
                    complete[w] &= resolved(b, e);
                }
            }
        }
        for (c, m) in complete.iter_mut().zip(&meets_core) {
            *c &= *m;
        }
        WallSystem { node_wall, reps, sizes, complete, meets_core }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn wall_of(&self, n: WallNode) -> usize {
        self.node_wall[n.index()] as usize
    }

    /// Distinct walls dual to an edge.
    pub fn walls_at(&self, edge: usize) -> Vec<usize> {
        let (a, c) = (self.node_wall[2 * edge] as usize, self.node_wall[2 * edge + 1] as usize);
        if a == c {
            vec![a]
        } else {
            vec![a, c]
        }
    }

    pub fn node_count(&self, w: usize) -> usize {
        self.sizes[w]
    }

    pub fn is_complete(&self, w: usize) -> bool {
        self.complete[w]
    }

    pub fn meets_core(&self, w: usize) -> bool {
        self.meets_core[w]
    }

    /// Ids of complete walls.
    pub fn complete_walls(&self) -> Vec<usize> {
        (0..self.len()).filter(|&w| self.complete[w]).collect()
    }

    pub fn wall(&self, b: &BallComplex, w: usize) -> Wall {
        let mut parts: Vec<WallPart> = self.reps[w].iter().map(|&n| collect_part(b, n)).collect();
        parts.sort_by_key(|p| p.nodes[0]);
        finish_wall(b, w, parts)
    }
}

/// Hyperplane id of each edge: factor edges are joined across squares,
/// essential edges are their own class.
pub fn hyperplanes(b: &BallComplex) -> Vec<usize> {
    let mut uf: Vec<usize> = (0..b.edges.len()).collect();
    fn find(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for sq in &b.squares {
        for i in 0..2 {
            let (x, y) = (find(&mut uf, sq.boundary[i].edge), find(&mut uf, sq.boundary[i + 2].edge));
            if x != y {
                uf[x.max(y)] = x.min(y);
            }
        }
    }
    (0..b.edges.len()).map(|e| find(&mut uf, e)).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub repeated_cells: Vec<usize>,
    pub repeated_squares: Vec<usize>,
    pub repeated_edges: Vec<usize>,
    /// Parts whose contracted hyperplane graph has a cycle.
    pub cyclic_parts: Vec<usize>,
}

impl EmbedReport {
    pub fn ok(&self) -> bool {
        self.repeated_cells.is_empty()
            && self.repeated_squares.is_empty()
            && self.repeated_edges.is_empty()
            && self.cyclic_parts.is_empty()
    }
}

/// Each part meets every cell and square in at most one chord and every
/// edge in at most one node, and is a tree of hyperplanes.
pub fn check_embedded(w: &Wall) -> Result<EmbedReport, WallError> {
    if !w.complete {
        return Err(WallError::Incomplete(w.id));
    }
    let mut rep = EmbedReport::default();
    for (pi, part) in w.parts.iter().enumerate() {
        let mut edges = HashMap::new();
        for n in &part.nodes {
            *edges.entry(n.edge).or_insert(0) += 1;
        }
        rep.repeated_edges.extend(edges.iter().filter(|(_, &c)| c > 1).map(|(&e, _)| e));
        let mut cells = HashMap::new();
        let mut squares = HashMap::new();
        for c in &part.chords {
            match c.via {
                Via::Cell { cell, .. } => *cells.entry(cell).or_insert(0) += 1,
                Via::Square(s) => *squares.entry(s).or_insert(0) += 1,
            }
        }
        rep.repeated_cells.extend(cells.iter().filter(|(_, &c)| c > 1).map(|(&e, _)| e));
        rep.repeated_squares.extend(squares.iter().filter(|(_, &c)| c > 1).map(|(&e, _)| e));
        // contract square chords, then cell chords must form a tree
        let mut key_of: HashMap<WallNode, usize> = HashMap::new();
        let mut uf: Vec<usize> = (0..part.nodes.len()).collect();
        for (i, n) in part.nodes.iter().enumerate() {
            key_of.insert(*n, i);
        }
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for c in &part.chords {
            if let Via::Square(_) = c.via {
                let (x, y) = (find(&mut uf, key_of[&c.a]), find(&mut uf, key_of[&c.b]));
                if x != y {
                    uf[x.max(y)] = x.min(y);
                }
            }
        }
        let contracted: HashSet<usize> = (0..part.nodes.len()).map(|i| find(&mut uf, i)).collect();
        let cell_chords = part.chords.iter().filter(|c| matches!(c.via, Via::Cell { .. })).count();
        if cell_chords + 1 != contracted.len() {
            rep.cyclic_parts.push(pi);
        }
    }
    for v in [&mut rep.repeated_cells, &mut rep.repeated_squares, &mut rep.repeated_edges] {
        v.sort_unstable();
        v.dedup();
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationReport {
    /// Core vertices on each side of the wall.
    pub sides: [usize; 2],
    /// Edges of the resolved region whose endpoint colours disagree with
    /// the wall's crossing parity; a separating wall has none.
    pub inconsistent_edges: usize,
    /// Components of the core's induced subgraph after cutting, for
    /// diagnostics; corners of the core may split off from their side.
    pub core_components: usize,
}

impl SeparationReport {
    pub fn ok(&self) -> bool {
        self.inconsistent_edges == 0 && self.sides[0] > 0 && self.sides[1] > 0
    }
}

/// Colours the resolved region (vertices whose edges are all resolved,
/// which contains the safe core) by crossing parity from the base vertex.
/// Returns the colouring and the number of edges that contradict it.
pub fn wall_sides(b: &BallComplex, w: &Wall) -> (HashMap<usize, u8>, usize) {
    let cut: HashSet<usize> = w.crossing.iter().copied().collect();
    let inside = b.resolved_region();
    let mut colour: HashMap<usize, u8> = HashMap::from([(0, 0)]);
    let mut inconsistent = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for (_, v, e) in b.neighbours(u) {
            if !inside[v] {
                continue;
            }
            let c = colour[&u] ^ cut.contains(&e) as u8;
            match colour.get(&v) {
                None => {
                    colour.insert(v, c);
                    queue.push_back(v);
                }
                Some(&d) if d != c && u < v => inconsistent += 1,
                _ => {}
            }
        }
    }
    (colour, inconsistent)
}

/// The wall separates when its parity colouring is consistent and both
/// colours occur in the core.
pub fn check_separates(b: &BallComplex, w: &Wall) -> Result<SeparationReport, WallError> {
    if !w.complete {
        return Err(WallError::Incomplete(w.id));
    }
    let cut: HashSet<usize> = w.crossing.iter().copied().collect();
    let (colour, inconsistent) = wall_sides(b, w);
    let mut sides = [0; 2];
    for (&v, &c) in &colour {
        if b.in_core(v) {
            sides[c as usize] += 1;
        }
    }
    // raw connectivity of the cut core
    let mut seen: HashSet<usize> = HashSet::new();
    let mut core_components = 0;
    for &s in colour.keys() {
        if !b.in_core(s) || seen.contains(&s) {
            continue;
        }
        core_components += 1;
        seen.insert(s);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for (_, v, e) in b.neighbours(u) {
                if b.in_core(v) && !cut.contains(&e) && seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(SeparationReport { sides, inconsistent_edges: inconsistent, core_components })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSpaceReport {
    /// Vertex-space components met, with the hyperplanes met in each.
    pub touched: BTreeMap<usize, Vec<usize>>,
    pub violations: Vec<usize>,
}

/// The wall meets each vertex-space component in at most one hyperplane.
pub fn wall_vertex_space_intersection(b: &BallComplex, w: &Wall) -> VertexSpaceReport {
    let hp = hyperplanes(b);
    let mut rep = VertexSpaceReport::default();
    for &e in &w.crossing {
        if b.edges[e].essential() {
            continue;
        }
        let comp = b.vertices[b.edges[e].source].component;
        let list = rep.touched.entry(comp).or_default();
        if !list.contains(&hp[e]) {
            list.push(hp[e]);
        }
    }
    rep.violations = rep.touched.iter().filter(|(_, h)| h.len() > 1).map(|(&c, _)| c).collect();
    rep
}

/// Vertices of the smallest subcomplex containing the wall.
pub fn carrier(b: &BallComplex, w: &Wall) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for &e in &w.crossing {
        out.insert(b.edges[e].source);
        out.insert(b.edges[e].target);
    }
    for p in &w.parts {
        for c in &p.chords {
            match c.via {
                Via::Cell { cell, .. } => out.extend(b.cells[cell].vertices.iter().copied()),
                Via::Square(s) => out.extend(b.squares[s].boundary.iter().flat_map(|o| {
                    let e = &b.edges[o.edge];
                    [e.source, e.target]
                })),
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct QcReport {
    pub walls: usize,
    pub pairs: usize,
    pub max_distance: usize,
    /// W_X when the minimal exponent is at least four.
    pub bound: Option<usize>,
    pub warning: Option<String>,
}

impl QcReport {
    pub fn ok(&self) -> bool {
        self.bound.is_none_or(|w| self.max_distance <= w)
    }
}

/// Distance from the carrier to essential-edge vertices of geodesics
/// between carrier vertices.
///
/// Every wall through a root vertex (one per factor type) is checked
/// against every carrier vertex within `len` of the root, over all
/// geodesics between them. Walls are permuted by the group, so this covers
/// every carrier pair at distance at most `len`.
pub fn carrier_quasiconvexity(b: &BallComplex, sys: &WallSystem, len: usize, exec: Exec) -> QcReport {
    let mut rep = QcReport::default();
    match b.cx.min_exponent() {
        Ok(m) if !m.below_four => rep.bound = Some(b.w_x),
        _ => rep.warning = Some("minimal exponent below four: bound not asserted".into()),
    }
    let mut jobs = Vec::new();
    for root in b.roots() {
        let mut walls = BTreeSet::new();
        for (_, _, e) in b.neighbours(root) {
            walls.extend(sys.walls_at(e));
        }
        // every node on a complete cell's edge has a chord in that cell
        for cell in b.cells.iter().filter(|c| c.vertices.contains(&root)) {
            for o in &cell.boundary {
                walls.extend(sys.walls_at(o.edge));
            }
        }
        for w in walls {
            jobs.push((root, w));
        }
    }
    let results = par::map(exec, &jobs, |&(root, w)| {
        let wall = sys.wall(b, w);
        let c = carrier(b, &wall);
        if !c.contains(&root) {
            return (0, 0);
        }
        let to_c = multi_bfs(b, c.iter().copied());
        let from_root = b.bfs(root, Some(len));
        let mut worst = 0;
        let mut pairs = 0;
        for &v in &c {
            let d = from_root[v];
            if v == root || d == u32::MAX {
                continue;
            }
            pairs += 1;
            let from_v = b.bfs(v, Some(d as usize));
            let on = |x: usize| from_root[x] != u32::MAX && from_v[x] != u32::MAX && from_root[x] + from_v[x] == d;
            for x in 0..b.vertices.len() {
                if !on(x) {
                    continue;
                }
                let essential = b.neighbours(x).any(|(_, y, e)| {
                    b.edges[e].essential() && on(y) && from_root[y].abs_diff(from_root[x]) == 1
                });
                if essential {
                    worst = worst.max(to_c[x] as usize);
                }
            }
        }
        (pairs, worst)
    });
    rep.walls = jobs.len();
    for (p, m) in results {
        rep.pairs += p;
        rep.max_distance = rep.max_distance.max(m);
    }
    rep
}

fn multi_bfs(b: &BallComplex, sources: impl Iterator<Item = usize>) -> Vec<u32> {
    let mut dist = vec![u32::MAX; b.vertices.len()];
    let mut queue = VecDeque::new();
    for s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for (_, v, _) in b.neighbours(u) {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Crossing count of each wall along an edge sequence.
fn crossings(sys: &WallSystem, edges: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut at: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &e) in edges.iter().enumerate() {
        for w in sys.walls_at(e) {
            at.entry(w).or_default().push(i);
        }
    }
    at
}

/// Walls crossing the geodesic from `x` to `y` an odd number of times.
pub fn separating_wall_count(b: &BallComplex, sys: &WallSystem, x: usize, y: usize) -> Result<usize, WallError> {
    let g = b.geodesic(x, y).map_err(|_| WallError::OutsideCore(if b.in_core(x) { y } else { x }))?;
    if g.vertices.iter().any(|&v| !b.in_core(v)) {
        return Err(WallError::OutsideCore(*g.vertices.iter().find(|&&v| !b.in_core(v)).unwrap()));
    }
    Ok(crossings(sys, &g.edges).values().filter(|p| p.len() % 2 == 1).count())
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LinsepReport {
    pub pairs: usize,
    /// (distance, separating count) per pair.
    pub points: Vec<(u64, u64)>,
    pub fit: Option<EnvelopeFit>,
    pub edges_checked: usize,
    /// (source, target, edge index) where no single-crossing wall is near.
    pub failures: Vec<(usize, usize, usize)>,
    /// Largest distance from a geodesic edge to the nearest single crossing.
    pub max_gap: usize,
    pub window: usize,
}

impl LinsepReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.fit.is_some_and(|f| f.kappa > 0.0)
    }
}

/// Sweeps a fixed geodesic between every pair of safe-core vertices:
/// records separating-wall counts for the envelope fit and checks that
/// each geodesic edge has a wall crossing the geodesic exactly once within
/// `W_X + 1` edges.
pub fn linear_separation_fit(b: &BallComplex, sys: &WallSystem, exec: Exec) -> LinsepReport {
    let core = b.core_vertices();
    let window = b.w_x + 1;
    let per_source = par::map(exec, &core, |&u| {
        let (dist, parent) = bfs_tree(b, u);
        let mut points = Vec::new();
        let mut failures = Vec::new();
        let mut checked = 0;
        let mut max_gap = 0;
        for &v in &core {
            if v <= u || dist[v] == u32::MAX {
                continue;
            }
            let mut edges = Vec::new();
            let mut at = v;
            while at != u {
                let (p, e) = parent[at];
                edges.push(e);
                at = p;
            }
            edges.reverse();
            let cross = crossings(sys, &edges);
            let singles: Vec<usize> = cross.values().filter(|p| p.len() == 1).map(|p| p[0]).collect();
            let separating = cross.values().filter(|p| p.len() % 2 == 1).count();
            points.push((edges.len() as u64, separating as u64));
            for i in 0..edges.len() {
                checked += 1;
                let gap = singles.iter().map(|&j| j.abs_diff(i)).min().unwrap_or(usize::MAX);
                if gap > window {
                    failures.push((u, v, i));
                } else {
                    max_gap = max_gap.max(gap);
                }
            }
        }
        (points, failures, checked, max_gap)
    });
    let mut rep = LinsepReport { window, ..Default::default() };
    for (points, failures, checked, gap) in per_source {
        rep.pairs += points.len();
        rep.points.extend(points);
        rep.failures.extend(failures);
        rep.edges_checked += checked;
        rep.max_gap = rep.max_gap.max(gap);
    }
    rep.fit = lower_envelope(&rep.points);
    rep
}

/// BFS tree with (parent, edge) links.
fn bfs_tree(b: &BallComplex, src: usize) -> (Vec<u32>, Vec<(usize, usize)>) {
    let n = b.vertices.len();
    let mut dist = vec![u32::MAX; n];
    let mut parent = vec![(usize::MAX, usize::MAX); n];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for (_, v, e) in b.neighbours(u) {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                parent[v] = (u, e);
                queue.push_back(v);
            }
        }
    }
    (dist, parent)
}

/// A wall segment and the cells and squares it passes through.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ladder {
    pub segment: Vec<WallNode>,
    pub carrier: Vec<Via>,
}

/// Shortest segment between two nodes of one part of a wall.
pub fn ladder(b: &BallComplex, from: WallNode, to: WallNode) -> Option<Ladder> {
    let mut prev: HashMap<WallNode, (WallNode, Via)> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = HashSet::from([from]);
    while let Some(n) = queue.pop_front() {
        if n == to {
            break;
        }
        for (m, via) in wall_adjacency(b, n) {
            if seen.insert(m) {
                prev.insert(m, (n, via));
                queue.push_back(m);
            }
        }
    }
    if !seen.contains(&to) {
        return None;
    }
    let mut segment = vec![to];
    let mut carrier = Vec::new();
    let mut at = to;
    while at != from {
        let (p, via) = prev[&at];
        segment.push(p);
        carrier.push(via);
        at = p;
    }
    segment.reverse();
    carrier.reverse();
    Some(Ladder { segment, carrier })
}

/// Graphviz rendering of a wall: nodes are wall nodes, chords through
/// cells are labelled with their relator.
pub fn to_dot(b: &BallComplex, w: &Wall) -> String {
    let mut s = format!("graph wall_{} {{\n", w.id);
    for n in w.nodes() {
        let side = if n.side == Side::Plus { "+" } else { "-" };
        s.push_str(&format!(
            "  n{} [label=\"{}{}\"];\n",
            n.index(),
            b.cx.format_letters(&[b.edges[n.edge].letter]),
            side
        ));
    }
    for p in &w.parts {
        for c in &p.chords {
            let label = match c.via {
                Via::Square(_) => "square".to_string(),
                Via::Cell { cell, .. } => format!("r{}", b.cells[cell].relator),
            };
            s.push_str(&format!("  n{} -- n{} [label=\"{}\"];\n", c.a.index(), c.b.index(), label));
        }
    }
    s.push_str("}\n");
    s
}
