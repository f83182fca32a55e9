//! The cube complex dual to the finite wallspace of a ball.
//!
//! Vertices of the safe core are oriented by the complete walls. Orientations
//! are bitsets over wall indices (bit set = the far side from vertex 0) and
//! consistency is decided from the side combinations that core vertices
//! actually realize.

use crate::ball::BallComplex;
use crate::fit::{lower_envelope, EnvelopeFit};
use crate::par::{self, Exec};
use crate::walls::{separating_wall_count, wall_sides, Wall, WallSystem};
use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualError {
    #[error("wall {0} does not separate the safe core")]
    NotSeparating(usize),
    #[error("wall {wall} leaves core vertex {vertex} uncoloured")]
    Uncoloured { wall: usize, vertex: usize },
    #[error("principal orientation of vertex {0} is inconsistent")]
    Inconsistent(usize),
    #[error("vertex {0} is outside the safe core")]
    OutsideCore(usize),
}

pub type Orientation = FixedBitSet;

#[derive(Clone, Debug)]
pub struct HalfspaceSystem {
    /// Representative wall id per local wall index.
    pub walls: Vec<usize>,
    /// Every wall id inducing the same partition of the core.
    pub classes: Vec<Vec<usize>>,
    /// Number of core vertices; core vertices are `0..core`.
    pub core: usize,
    /// Per wall, the core vertices on side 1.
    far: Vec<FixedBitSet>,
    /// Per wall, the walls it crosses.
    cross: Vec<FixedBitSet>,
    /// `missing[i][2s + t]`: walls `j != i` such that no core vertex has
    /// side `s` for `i` and side `t` for `j`.
    missing: Vec<[FixedBitSet; 4]>,
}

impl HalfspaceSystem {
    /// Uses every complete wall.
    pub fn new(b: &BallComplex, sys: &WallSystem, exec: Exec) -> Result<Self, DualError> {
        Self::with_filter(b, sys, exec, |_| true)
    }

    /// Uses the complete walls accepted by `keep`.
    pub fn with_filter(
        b: &BallComplex,
        sys: &WallSystem,
        exec: Exec,
        keep: impl Fn(&Wall) -> bool + Sync,
    ) -> Result<Self, DualError> {
        let core = b.core_vertices().len();
        let ids = sys.complete_walls();
        let coloured = par::map(exec, &ids, |&id| {
            let w = sys.wall(b, id);
            if !keep(&w) {
                return Ok(None);
            }
            let (colour, inconsistent) = wall_sides(b, &w);
            if inconsistent > 0 {
                return Err(DualError::NotSeparating(id));
            }
            let mut far = FixedBitSet::with_capacity(core);
            for v in 0..core {
                match colour.get(&v) {
                    Some(1) => far.insert(v),
                    Some(_) => {}
                    None => return Err(DualError::Uncoloured { wall: id, vertex: v }),
                }
            }
            if far.count_ones(..) == 0 || far.count_ones(..) == core {
                return Err(DualError::NotSeparating(id));
            }
            Ok(Some((id, far)))
        });
        let mut walls = Vec::new();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut far = Vec::new();
        let mut seen: HashMap<FixedBitSet, usize> = HashMap::new();
        for r in coloured {
            if let Some((id, f)) = r? {
                match seen.get(&f) {
                    Some(&i) => classes[i].push(id),
                    None => {
                        seen.insert(f.clone(), walls.len());
                        walls.push(id);
                        classes.push(vec![id]);
                        far.push(f);
                    }
                }
            }
        }
        let n = walls.len();
        let rows = par::map_range(exec, n, |i| {
            let mut cross = FixedBitSet::with_capacity(n);
            let mut missing: [FixedBitSet; 4] = std::array::from_fn(|_| FixedBitSet::with_capacity(n));
            for j in (0..n).filter(|&j| j != i) {
                let both = far[i].intersection_count(&far[j]);
                let only_i = far[i].difference_count(&far[j]);
                let only_j = far[j].difference_count(&far[i]);
                let neither = core - far[i].union_count(&far[j]);
                let seen = [neither, only_j, only_i, both];
                for (k, &c) in seen.iter().enumerate() {
                    if c == 0 {
                        missing[k].insert(j);
                    }
                }
                if seen.iter().all(|&c| c > 0) {
                    cross.insert(j);
                }
            }
            (cross, missing)
        });
        let (cross, missing) = rows.into_iter().unzip();
        Ok(HalfspaceSystem { walls, classes, core, far, cross, missing })
    }

    pub fn len(&self) -> usize {
        self.walls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walls.is_empty()
    }

    /// Local index of the class containing wall `id`.
    pub fn local(&self, id: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&id))
    }

    /// Side of core vertex `v` with respect to local wall `i`.
    pub fn side(&self, i: usize, v: usize) -> u8 {
        self.far[i].contains(v) as u8
    }

    pub fn cross(&self, i: usize, j: usize) -> bool {
        self.cross[i].contains(j)
    }

    pub fn crossing_pairs(&self) -> usize {
        self.cross.iter().map(|c| c.count_ones(..)).sum::<usize>() / 2
    }

    pub fn principal_orientation(&self, v: usize) -> Result<Orientation, DualError> {
        if v >= self.core {
            return Err(DualError::OutsideCore(v));
        }
        let mut o = FixedBitSet::with_capacity(self.len());
        for i in 0..self.len() {
            o.set(i, self.far[i].contains(v));
        }
        Ok(o)
    }

    /// Checks the rows of `changed` only; pairs not involving them are
    /// assumed consistent already.
    fn rows_consistent(&self, o: &Orientation, changed: impl IntoIterator<Item = usize>) -> bool {
        changed.into_iter().all(|i| {
            let s = 2 * o.contains(i) as usize;
            self.missing[i][s + 1].is_disjoint(o) && self.missing[i][s].is_subset(o)
        })
    }

    /// No two chosen halfspaces are disjoint on the core.
    pub fn consistent(&self, o: &Orientation) -> bool {
        self.rows_consistent(o, 0..self.len())
    }

    /// Flipping wall `i` keeps a consistent orientation consistent.
    pub fn flippable(&self, o: &Orientation, i: usize) -> bool {
        let mut f = o.clone();
        f.toggle(i);
        self.rows_consistent(&f, [i])
    }

    fn flips(&self, o: &Orientation) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.flippable(o, i)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct DualCubeComplex {
    pub flip_margin: usize,
    /// No consistent flip was cut off by the margin, so the complex is the
    /// whole dual of the finite wallspace.
    pub saturated: bool,
    pub orientations: Vec<Orientation>,
    /// Flip distance to the nearest principal orientation.
    pub margin_distance: Vec<usize>,
    /// Principal 0-cube of each core vertex.
    pub principal: Vec<usize>,
    /// (a, b, local wall index) with `a < b`.
    pub edges: Vec<(usize, usize, usize)>,
    /// Filled cubes by dimension; entry `k` counts k-cubes.
    pub cube_counts: Vec<usize>,
    /// Filled squares as (0-cube with both walls on side 0, wall, wall).
    pub squares: Vec<(usize, usize, usize)>,
    index: HashMap<Orientation, usize>,
    adj: Vec<Vec<(usize, usize)>>,
}

fn cliques(h: &HalfspaceSystem, pool: &[usize], out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, from: usize) {
    for k in from..pool.len() {
        let w = pool[k];
        if cur.iter().all(|&u| h.cross(u, w)) {
            cur.push(w);
            out.push(cur.clone());
            cliques(h, pool, out, cur, k + 1);
            cur.pop();
        }
    }
}

pub const DEFAULT_FLIP_MARGIN: usize = 2;

/// Materializes the orientations within `flip_margin` flips of a principal
/// one and fills every cube whose corners are all present.
pub fn build_dual(h: &HalfspaceSystem, flip_margin: usize) -> Result<DualCubeComplex, DualError> {
    let mut index: HashMap<Orientation, usize> = HashMap::new();
    let mut orientations = Vec::new();
    let mut margin_distance = Vec::new();
    let mut principal = Vec::with_capacity(h.core);
    let mut queue = VecDeque::new();
    for v in 0..h.core {
        let o = h.principal_orientation(v)?;
        if !h.consistent(&o) {
            return Err(DualError::Inconsistent(v));
        }
        let id = *index.entry(o.clone()).or_insert_with(|| {
            orientations.push(o);
            margin_distance.push(0);
            queue.push_back(orientations.len() - 1);
            orientations.len() - 1
        });
        principal.push(id);
    }
    let mut flips: Vec<Vec<usize>> = Vec::new();
    let mut saturated = true;
    while let Some(id) = queue.pop_front() {
        let f = h.flips(&orientations[id]);
        if flips.len() <= id {
            flips.resize(id + 1, Vec::new());
        }
        if margin_distance[id] == flip_margin {
            saturated &= f.iter().all(|&i| {
                let mut o = orientations[id].clone();
                o.toggle(i);
                index.contains_key(&o)
            });
        } else {
            for &i in &f {
                let mut o = orientations[id].clone();
                o.toggle(i);
                if !index.contains_key(&o) {
                    index.insert(o.clone(), orientations.len());
                    orientations.push(o);
                    margin_distance.push(margin_distance[id] + 1);
                    queue.push_back(orientations.len() - 1);
                }
            }
        }
        flips[id] = f;
    }
    flips.resize(orientations.len(), Vec::new());

    let mut edges = Vec::new();
    let mut adj = vec![Vec::new(); orientations.len()];
    for (id, f) in flips.iter().enumerate() {
        for &i in f {
            let mut o = orientations[id].clone();
            o.toggle(i);
            if let Some(&t) = index.get(&o) {
                adj[id].push((t, i));
                if id < t {
                    edges.push((id, t, i));
                }
            }
        }
    }

    // cubes keyed by their side-0 corner and wall family
    let mut cubes: HashMap<(usize, Vec<usize>), ()> = HashMap::new();
    let mut squares = Vec::new();
    for (id, f) in flips.iter().enumerate() {
        let mut found = Vec::new();
        cliques(h, f, &mut found, &mut Vec::new(), 0);
        for fam in found.into_iter().filter(|c| c.len() >= 2) {
            let mut low = orientations[id].clone();
            for &i in &fam {
                low.set(i, false);
            }
            let Some(&corner) = index.get(&low) else { continue };
            if cubes.contains_key(&(corner, fam.clone())) {
                continue;
            }
            let filled = (0u32..1 << fam.len()).all(|mask| {
                let mut o = low.clone();
                for (k, &i) in fam.iter().enumerate() {
                    o.set(i, mask >> k & 1 == 1);
                }
                index.contains_key(&o)
            });
            if filled {
                if fam.len() == 2 {
                    squares.push((corner, fam[0], fam[1]));
                }
                cubes.insert((corner, fam), ());
            }
        }
    }
    let mut cube_counts = vec![orientations.len(), edges.len()];
    for (_, fam) in cubes.keys() {
        if cube_counts.len() <= fam.len() {
            cube_counts.resize(fam.len() + 1, 0);
        }
        cube_counts[fam.len()] += 1;
    }
    squares.sort_unstable();
    Ok(DualCubeComplex { flip_margin, saturated, orientations, margin_distance, principal, edges, cube_counts, squares, index, adj })
}

impl DualCubeComplex {
    pub fn zero_cubes(&self) -> usize {
        self.orientations.len()
    }

    pub fn one_cubes(&self) -> usize {
        self.edges.len()
    }

    pub fn max_cube_dim(&self) -> usize {
        self.cube_counts.iter().rposition(|&c| c > 0).unwrap_or(0)
    }

    pub fn id_of(&self, o: &Orientation) -> Option<usize> {
        self.index.get(o).copied()
    }

    /// Neighbours in the 1-skeleton with the wall flipped.
    pub fn neighbours(&self, id: usize) -> &[(usize, usize)] {
        &self.adj[id]
    }

    pub fn distances_from(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.zero_cubes()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.zero_cubes() == 0 || self.distances_from(0).iter().all(|&d| d != usize::MAX)
    }

    /// Hyperplanes as classes of 1-cubes under the opposite-sides relation
    /// of filled squares.
    pub fn hyperplane_audit(&self, h: &HalfspaceSystem) -> HyperplaneAudit {
        let edge_id: HashMap<(usize, usize), usize> =
            self.edges.iter().enumerate().map(|(k, &(a, b, _))| ((a, b), k)).collect();
        let lookup = |a: usize, b: usize| edge_id[&(a.min(b), a.max(b))];
        let mut parent: Vec<usize> = (0..self.edges.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(c, i, j) in &self.squares {
            let base = &self.orientations[c];
            let at = |bits: &[usize]| {
                let mut o = base.clone();
                for &k in bits {
                    o.insert(k);
                }
                self.index[&o]
            };
            let (c_i, c_j, c_ij) = (at(&[i]), at(&[j]), at(&[i, j]));
            for (x, y) in [((c, c_i), (c_j, c_ij)), ((c, c_j), (c_i, c_ij))] {
                let (a, b) = (find(&mut parent, lookup(x.0, x.1)), find(&mut parent, lookup(y.0, y.1)));
                parent[a] = b;
            }
        }
        let mut class_walls: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut wall_classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, &(_, _, w)) in self.edges.iter().enumerate() {
            let r = find(&mut parent, k);
            class_walls.entry(r).or_default().push(w);
            wall_classes.entry(w).or_default().push(r);
        }
        let mixed_classes = class_walls
            .values_mut()
            .filter_map(|ws| {
                ws.sort_unstable();
                ws.dedup();
                (ws.len() > 1).then(|| ws.clone())
            })
            .collect();
        let split_walls = wall_classes
            .iter_mut()
            .filter_map(|(&w, cs)| {
                cs.sort_unstable();
                cs.dedup();
                (cs.len() > 1).then_some(h.walls[w])
            })
            .collect();
        let missing_walls = (0..h.len()).filter(|w| !wall_classes.contains_key(w)).map(|w| h.walls[w]).collect();
        HyperplaneAudit { hyperplanes: class_walls.len(), walls: h.len(), mixed_classes, split_walls, missing_walls }
    }

    pub fn summary(&self, h: &HalfspaceSystem) -> DualSummary {
        DualSummary {
            zero_cubes: self.zero_cubes(),
            one_cubes: self.one_cubes(),
            max_cube_dim: self.max_cube_dim(),
            hyperplanes: self.hyperplane_audit(h).hyperplanes,
            link_violations: npc_link_check(self, h).violations.len(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneAudit {
    pub hyperplanes: usize,
    pub walls: usize,
    /// Classes labelled by more than one wall, as wall indices.
    pub mixed_classes: Vec<Vec<usize>>,
    /// Wall ids whose 1-cubes fall into several classes.
    pub split_walls: Vec<usize>,
    /// Wall ids with no dual 1-cube.
    pub missing_walls: Vec<usize>,
}

impl HyperplaneAudit {
    pub fn ok(&self) -> bool {
        self.hyperplanes == self.walls
            && self.mixed_classes.is_empty()
            && self.split_walls.is_empty()
            && self.missing_walls.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualSummary {
    pub zero_cubes: usize,
    pub one_cubes: usize,
    pub max_cube_dim: usize,
    pub hyperplanes: usize,
    pub link_violations: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkReport {
    pub vertices: usize,
    pub link_edges: usize,
    pub triangles: usize,
    /// (0-cube, wall triple) spanning an empty triangle.
    pub violations: Vec<(usize, [usize; 3])>,
}

/// Flag condition at every 0-cube. Link vertices are the flippable walls;
/// two are adjacent when flipping both stays consistent, and a triangle is
/// filled when flipping all three does.
pub fn npc_link_check(d: &DualCubeComplex, h: &HalfspaceSystem) -> LinkReport {
    let mut rep = LinkReport { vertices: d.zero_cubes(), ..Default::default() };
    for (id, o) in d.orientations.iter().enumerate() {
        let link: Vec<usize> = d.adj[id].iter().map(|&(_, w)| w).collect();
        let flipped = |ws: &[usize]| {
            let mut f = o.clone();
            for &w in ws {
                f.toggle(w);
            }
            h.rows_consistent(&f, ws.iter().copied())
        };
        let mut adjacent = HashMap::new();
        for (a, &i) in link.iter().enumerate() {
            for &j in &link[a + 1..] {
                let e = flipped(&[i, j]);
                rep.link_edges += e as usize;
                adjacent.insert((i, j), e);
            }
        }
        for (a, &i) in link.iter().enumerate() {
            for (b, &j) in link.iter().enumerate().skip(a + 1) {
                if !adjacent[&(i, j)] {
                    continue;
                }
                for &k in &link[b + 1..] {
                    if adjacent[&(i, k)] && adjacent[&(j, k)] {
                        rep.triangles += 1;
                        if !flipped(&[i, j, k]) {
                            rep.violations.push((id, [h.walls[i], h.walls[j], h.walls[k]]));
                        }
                    }
                }
            }
        }
    }
    rep
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProperRow {
    pub x: usize,
    pub y: usize,
    pub distance: u64,
    pub dual_distance: Option<usize>,
    /// Separating walls of the wall system, counted with repetition.
    pub separating: usize,
    /// Partitions on which the principal orientations differ.
    pub differing: usize,
    /// Wall-system walls in the differing partitions.
    pub differing_walls: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ProperReport {
    pub rows: Vec<ProperRow>,
    /// Rows where the dual distance differs from the number of separating
    /// partitions, or those partitions do not account for the separating walls.
    pub mismatches: Vec<ProperRow>,
    /// Pairs whose ball geodesic leaves the safe core, so walls cannot be counted.
    pub skipped: Vec<(usize, usize)>,
    pub fit: Option<EnvelopeFit>,
}

impl ProperReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.fit.is_none_or(|f| f.kappa > 0.0)
    }
}

/// Compares dual distances between principal 0-cubes with separating wall
/// counts along ball geodesics.
pub fn properness_witness(
    d: &DualCubeComplex,
    h: &HalfspaceSystem,
    b: &BallComplex,
    sys: &WallSystem,
    pairs: &[(usize, usize)],
) -> Result<ProperReport, DualError> {
    let mut rows = Vec::with_capacity(pairs.len());
    let mut skipped = Vec::new();
    let mut from: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(x, y) in pairs {
        for v in [x, y] {
            if v >= h.core {
                return Err(DualError::OutsideCore(v));
            }
        }
        let Ok(separating) = separating_wall_count(b, sys, x, y) else {
            skipped.push((x, y));
            continue;
        };
        let (px, py) = (d.principal[x], d.principal[y]);
        let dist = from.entry(px).or_insert_with(|| d.distances_from(px));
        let dual_distance = (dist[py] != usize::MAX).then_some(dist[py]);
        let diff: Vec<usize> = d.orientations[px].symmetric_difference(&d.orientations[py]).collect();
        let differing_walls = diff.iter().map(|&i| h.classes[i].len()).sum();
        let distance = b.geodesic(x, y).map_err(|_| DualError::OutsideCore(y))?.edges.len() as u64;
        rows.push(ProperRow { x, y, distance, dual_distance, separating, differing: diff.len(), differing_walls });
    }
    let mismatches = rows
        .iter()
        .filter(|r| r.dual_distance != Some(r.differing) || r.differing_walls != r.separating)
        .cloned()
        .collect();
    let points: Vec<(u64, u64)> =
        rows.iter().filter(|r| r.x != r.y).filter_map(|r| Some((r.distance, r.dual_distance? as u64))).collect();
    Ok(ProperReport { rows, mismatches, skipped, fit: lower_envelope(&points) })
}

/// Graphviz rendering of the 1-skeleton; principal 0-cubes are boxed.
pub fn to_dot(d: &DualCubeComplex, h: &HalfspaceSystem) -> String {
    let mut out = String::from("graph dual {\n");
    for id in 0..d.zero_cubes() {
        let shape = if d.margin_distance[id] == 0 { "box" } else { "circle" };
        let _ = writeln!(out, "  o{id} [shape={shape}];");
    }
    for &(a, b, w) in &d.edges {
        let _ = writeln!(out, "  o{a} -- o{b} [label=\"{}\"];", h.walls[w]);
    }
    out.push_str("}\n");
    out
}
