//! Combinatorial horoballs and the augmented ball.
//!
//! A horoball over a finite metric base has vertices `(v, j)` for levels
//! `0..=L`, vertical edges between consecutive levels and horizontal edges
//! at level `j` between base points at distance at most `2^j`.

use crate::ball::BallComplex;
use crate::par::{self, Exec};
use crate::presentation::StaggeredComplex;
use crate::word::Elem;
use crate::word_problem::{PseudometricChoice, PseudometricMode, SyllableMetric};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HoroballError {
    #[error("base distances are not a metric at ({0}, {1})")]
    NotMetric(usize, usize),
    #[error("depth {given} is too small; the base needs depth {required}")]
    DepthTooSmall { given: usize, required: usize },
}

const UNREACHED: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct HoroballGraph {
    pub depth: usize,
    base: Vec<Vec<u32>>,
    adj: Vec<Vec<u32>>,
}

/// Depth at which one horizontal edge spans a base of this diameter.
pub fn default_depth(diameter: u32) -> usize {
    if diameter <= 1 {
        1
    } else {
        (32 - (diameter - 1).leading_zeros()) as usize + 1
    }
}

/// Distance matrix of `n` points on a line.
pub fn line_base(n: usize) -> Vec<Vec<u32>> {
    (0..n).map(|i| (0..n).map(|j| i.abs_diff(j) as u32).collect()).collect()
}

/// All-pairs distances of a connected graph by breadth-first search.
pub fn graph_metric(adj: &[Vec<usize>]) -> Vec<Vec<u32>> {
    (0..adj.len()).map(|s| bfs(adj.len(), s, |u| adj[u].iter().map(|&v| v as u32).collect())).collect()
}

fn bfs(n: usize, src: usize, next: impl Fn(usize) -> Vec<u32>) -> Vec<u32> {
    let mut dist = vec![UNREACHED; n];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for v in next(u) {
            if dist[v as usize] == UNREACHED {
                dist[v as usize] = dist[u] + 1;
                queue.push_back(v as usize);
            }
        }
    }
    dist
}

pub fn build_horoball(base: Vec<Vec<u32>>, depth: usize) -> Result<HoroballGraph, HoroballError> {
    let n = base.len();
    for i in 0..n {
        if base[i].len() != n || base[i][i] != 0 {
            return Err(HoroballError::NotMetric(i, i));
        }
        for j in 0..n {
            if base[i][j] != base[j][i] || (i != j && base[i][j] == 0) {
                return Err(HoroballError::NotMetric(i, j));
            }
        }
    }
    let mut adj = vec![Vec::new(); n * (depth + 1)];
    for j in 0..=depth {
        let reach = 1u64 << j.min(63);
        for u in 0..n {
            let id = j * n + u;
            if j < depth {
                adj[id].push(((j + 1) * n + u) as u32);
                adj[(j + 1) * n + u].push(id as u32);
            }
            for v in 0..n {
                if u != v && u64::from(base[u][v]) <= reach {
                    adj[id].push((j * n + v) as u32);
                }
            }
        }
    }
    Ok(HoroballGraph { depth, base, adj })
}

impl HoroballGraph {
    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    pub fn base_distance(&self, u: usize, v: usize) -> u32 {
        self.base[u][v]
    }

    pub fn vertex(&self, v: usize, level: usize) -> usize {
        level * self.base.len() + v
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbours(&self, id: usize) -> &[u32] {
        &self.adj[id]
    }

    /// Horizontal edge at `level` between base points.
    pub fn has_horizontal(&self, u: usize, v: usize, level: usize) -> bool {
        let n = self.base.len();
        self.adj[level * n + u].contains(&((level * n + v) as u32))
    }

    pub fn distances_from(&self, v: usize, level: usize) -> Vec<u32> {
        bfs(self.adj.len(), self.vertex(v, level), |u| self.adj[u].clone())
    }

    /// Shortest-path distance in the graph.
    pub fn horoball_distance(&self, u: (usize, usize), v: (usize, usize)) -> Option<u32> {
        let d = self.distances_from(u.0, u.1)[self.vertex(v.0, v.1)];
        (d != UNREACHED).then_some(d)
    }

    /// Distance by the normal form: rise to an apex level, run
    /// horizontally, descend. Horizontal runs are measured inside a
    /// single level.
    pub fn normal_form_distance(&self, u: (usize, usize), v: (usize, usize)) -> Option<u32> {
        let n = self.base.len();
        (u.1.max(v.1)..=self.depth)
            .filter_map(|k| {
                let reach = 1u64 << k.min(63);
                let level = bfs(n, u.0, |a| {
                    (0..n as u32).filter(|&b| b as usize != a && u64::from(self.base[a][b as usize]) <= reach).collect()
                });
                let h = level[v.0];
                (h != UNREACHED).then(|| (k - u.1) as u32 + (k - v.1) as u32 + h)
            })
            .min()
    }

    /// Largest `|d(x, y) − 2·log2(d_V(x, y) + 1)|` over level-0 pairs.
    pub fn envelope_constant(&self) -> f64 {
        let n = self.base.len();
        let mut c: f64 = 0.0;
        for u in 0..n {
            let d = self.distances_from(u, 0);
            for v in u + 1..n {
                let expected = 2.0 * f64::from(self.base[u][v] + 1).log2();
                c = c.max((f64::from(d[v]) - expected).abs());
            }
        }
        c
    }
}

/// Horoballs over a ball of each factor's Cayley graph, with the tree
/// metric for free factors and the ℓ1 metric for tori.
#[derive(Clone, Debug)]
pub struct FactorHoroballs {
    pub radius: usize,
    elems: Vec<Vec<Elem>>,
    index: Vec<HashMap<Elem, usize>>,
    graphs: Vec<HoroballGraph>,
    /// Distances from the identity in each horoball.
    from_identity: Vec<Vec<u32>>,
}

fn factor_ball(cx: &StaggeredComplex, factor: usize, radius: usize) -> Vec<Elem> {
    let shape = &cx.shape;
    let rank = cx.factors[factor].rank();
    let mut out = vec![shape.identity(factor)];
    let mut seen: std::collections::HashSet<Elem> = out.iter().cloned().collect();
    let mut frontier = out.clone();
    for _ in 0..radius {
        let mut next = Vec::new();
        for e in &frontier {
            for g in 0..rank {
                for inv in [false, true] {
                    let s = shape.gen_elem(factor, g, inv);
                    let m = e.mul(&s);
                    if seen.insert(m.clone()) {
                        next.push(m);
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Horoballs over each factor's Cayley ball of the given radius. `depth`
/// defaults to one more than the log of the ball's diameter.
pub fn factor_horoballs(
    cx: &StaggeredComplex,
    radius: usize,
    depth: Option<usize>,
) -> Result<FactorHoroballs, HoroballError> {
    let mut fh = FactorHoroballs {
        radius,
        elems: Vec::new(),
        index: Vec::new(),
        graphs: Vec::new(),
        from_identity: Vec::new(),
    };
    for f in 0..cx.factors.len() {
        let elems = factor_ball(cx, f, radius);
        let base: Vec<Vec<u32>> = elems
            .iter()
            .map(|a| elems.iter().map(|b| a.inverse().mul(b).length() as u32).collect())
            .collect();
        let diameter = base.iter().flatten().copied().max().unwrap_or(0);
        let required = default_depth(diameter);
        let depth = match depth {
            Some(d) if d < required => return Err(HoroballError::DepthTooSmall { given: d, required }),
            Some(d) => d,
            None => required,
        };
        let g = build_horoball(base, depth)?;
        fh.from_identity.push(g.distances_from(0, 0));
        fh.index.push(elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect());
        fh.elems.push(elems);
        fh.graphs.push(g);
    }
    Ok(fh)
}

impl FactorHoroballs {
    pub fn graph(&self, factor: usize) -> &HoroballGraph {
        &self.graphs[factor]
    }

    pub fn elements(&self, factor: usize) -> &[Elem] {
        &self.elems[factor]
    }
}

impl SyllableMetric for FactorHoroballs {
    fn syllable_distance(&self, factor: usize, elem: &Elem) -> Option<u64> {
        let i = *self.index[factor].get(elem)?;
        Some(u64::from(self.from_identity[factor][i]))
    }
}

/// The horoball pseudometric for relative lengths over a ball: factor
/// horoballs large enough to hold every syllable between safe-core
/// vertices of one vertex space.
pub fn admissible_pseudometric(
    b: &BallComplex,
    depth: Option<usize>,
) -> Result<(PseudometricChoice, FactorHoroballs), HoroballError> {
    let fh = factor_horoballs(&b.cx, 2 * b.core, depth)?;
    Ok((PseudometricChoice::uniform(&b.cx, PseudometricMode::Horoball), fh))
}

/// Ball 1-skeleton restricted to the safe core, with a horoball glued along
/// each vertex-space component.
#[derive(Clone, Debug)]
pub struct AugmentedBall {
    /// Core vertices, in ball ids; augmented ids `0..core.len()` refer to them.
    pub core: Vec<usize>,
    pub depth: usize,
    pub adj: Vec<Vec<u32>>,
}

pub fn augmented_ball(b: &BallComplex, depth: Option<usize>) -> Result<AugmentedBall, HoroballError> {
    let core = b.core_vertices();
    let local: HashMap<usize, usize> = core.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); core.len()];
    for (i, &v) in core.iter().enumerate() {
        for (_, w, _) in b.neighbours(v) {
            if let Some(&j) = local.get(&w) {
                adj[i].push(j as u32);
            }
        }
    }
    let mut comps: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &v) in core.iter().enumerate() {
        comps.entry(b.vertices[v].component).or_default().push(i);
    }
    let mut comp_ids: Vec<usize> = comps.keys().copied().collect();
    comp_ids.sort_unstable();
    let mut used_depth = depth.unwrap_or(1);
    for c in comp_ids {
        let members = &comps[&c];
        if members.len() < 2 {
            continue;
        }
        // intrinsic distances of the component inside the ball
        let base: Vec<Vec<u32>> = members
            .iter()
            .map(|&i| {
                let d = b.component_bfs(core[i]);
                members.iter().map(|&j| d.get(&core[j]).copied().unwrap_or(UNREACHED)).collect()
            })
            .collect();
        if base.iter().flatten().any(|&d| d == UNREACHED) {
            continue;
        }
        let diameter = base.iter().flatten().copied().max().unwrap_or(0);
        let required = default_depth(diameter);
        let l = match depth {
            Some(d) if d < required => return Err(HoroballError::DepthTooSmall { given: d, required }),
            Some(d) => d,
            None => required,
        };
        used_depth = used_depth.max(l);
        let g = build_horoball(base, l)?;
        let n = members.len();
        // level 0 is the component itself; levels above get fresh ids
        let offset = adj.len();
        adj.resize(offset + n * l, Vec::new());
        let id = |k: usize| -> usize {
            if k < n {
                members[k]
            } else {
                offset + k - n
            }
        };
        for k in 0..g.vertex_count() {
            for &m in g.neighbours(k) {
                let (a, c) = (id(k), id(m as usize));
                if (k < n && (m as usize) < n) || a == c {
                    continue;
                }
                adj[a].push(c as u32);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    Ok(AugmentedBall { core, depth: used_depth, adj })
}

impl AugmentedBall {
    pub fn distances_from(&self, v: usize) -> Vec<u32> {
        bfs(self.adj.len(), v, |u| self.adj[u].clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    pub points: usize,
    pub quadruples: u64,
}

/// Largest four-point defect over all quadruples of `points`.
pub fn hyperbolicity_estimate(adj: &[Vec<u32>], points: &[usize], exec: Exec) -> DeltaEstimate {
    let rows = par::map(exec, points, |&p| {
        let d = bfs(adj.len(), p, |u| adj[u].clone());
        points.iter().map(|&q| d[q]).collect::<Vec<u32>>()
    });
    let k = points.len();
    let per_first = par::map_range(exec, k, |a| {
        let mut worst = 0u32;
        let mut count = 0u64;
        for b in a + 1..k {
            for c in b + 1..k {
                for e in c + 1..k {
                    let mut s = [rows[a][b] + rows[c][e], rows[a][c] + rows[b][e], rows[a][e] + rows[b][c]];
                    s.sort_unstable();
                    worst = worst.max(s[2] - s[1]);
                    count += 1;
                }
            }
        }
        (worst, count)
    });
    let worst = per_first.iter().map(|p| p.0).max().unwrap_or(0);
    DeltaEstimate { delta: f64::from(worst) / 2.0, points: k, quadruples: per_first.iter().map(|p| p.1).sum() }
}

/// Seeded sample of `count` distinct vertices of a graph.
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(&mut crate::corpus::rng(seed));
    all.truncate(count);
    all.sort_unstable();
    all
}
