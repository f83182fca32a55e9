//! The property suite run by `check-all`: ten checks over P0, P1 and P2,
//! each with pinned sizes and a single pass/fail outcome.

use anyhow::{Context, Result};
use cubulate::ball::{build_ball_with_core, convexity_check, geodesic_cell_check, share_boundary_check, BallComplex};
use cubulate::diagrams::{diagram_from_trace, spelling_audit, surrounded_cell};
use cubulate::dual_cube::{build_dual, npc_link_check, properness_witness, HalfspaceSystem};
use cubulate::fit::upper_linear_bound;
use cubulate::horoball::{build_horoball, line_base};
use cubulate::par::{self, Exec};
use cubulate::walls::{
    carrier_quasiconvexity, check_embedded, check_separates, linear_separation_fit, wall_vertex_space_intersection,
    WallSystem, WallType,
};
use cubulate::word::{Cyclic, Letter};
use cubulate::word_problem::{dehn_reduce, replay, Mode, Reduction, Solver};
use cubulate::{corpus, Path, StaggeredComplex};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::HashSet;
use std::sync::OnceLock;

/// Sizes of every check. The defaults are the pinned acceptance values.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Safe-core radius of the P1 ball.
    pub radius: usize,
    pub p2_radius: usize,
    pub p0_radius: usize,
    pub oracle_radius: usize,
    pub flip_margin: usize,
    pub factor_words: usize,
    pub trivial_words: usize,
    pub horoball_base: usize,
    pub horoball_depth: usize,
    pub horoball_pairs: usize,
    pub dual_pairs: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 7,
            radius: 8,
            p2_radius: 6,
            p0_radius: 3,
            oracle_radius: 20,
            flip_margin: 4,
            factor_words: 200,
            trivial_words: 500,
            horoball_base: 64,
            horoball_depth: 8,
            horoball_pairs: 100,
            dual_pairs: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub stats: Value,
}

pub const CHECKS: [&str; 10] = [
    "torsion-order",
    "factor-injectivity",
    "dehn-termination",
    "geodesic-cells",
    "wall-theorems",
    "carrier-quasiconvexity",
    "horoball-metric",
    "linear-separation",
    "dual-complex",
    "spelling-audit",
];

pub struct Suite {
    pub p0: StaggeredComplex,
    pub p1: StaggeredComplex,
    pub p2: StaggeredComplex,
    pub config: SuiteConfig,
    pub exec: Exec,
    p1_walls: OnceLock<(BallComplex, WallSystem)>,
    reductions: OnceLock<Vec<(Path, Reduction)>>,
}

impl Suite {
    pub fn new(p0: StaggeredComplex, p1: StaggeredComplex, p2: StaggeredComplex, config: SuiteConfig, exec: Exec) -> Self {
        Suite { p0, p1, p2, config, exec, p1_walls: OnceLock::new(), reductions: OnceLock::new() }
    }

    /// Runs check `id` (1-based). Errors become failed outcomes.
    pub fn run(&self, id: usize) -> Outcome {
        let name = CHECKS[id - 1];
        let res = match id {
            1 => self.torsion_order(),
            2 => self.factor_injectivity(),
            3 => self.dehn_termination(),
            4 => self.geodesic_cells(),
            5 => self.wall_theorems(),
            6 => self.carrier_quasiconvexity(),
            7 => self.horoball_metric(),
            8 => self.linear_separation(),
            9 => self.dual_complex(),
            10 => self.spelling_audit(),
            _ => unreachable!("check ids run from 1 to 10"),
        };
        match res {
            Ok((passed, detail, stats)) => Outcome { id, name, passed, detail, stats },
            Err(e) => Outcome { id, name, passed: false, detail: format!("error: {e:#}"), stats: Value::Null },
        }
    }

    pub fn run_all(&self) -> Vec<Outcome> {
        (1..=CHECKS.len()).map(|id| self.run(id)).collect()
    }

    fn p1_walls(&self) -> Result<&(BallComplex, WallSystem)> {
        if let Some(w) = self.p1_walls.get() {
            return Ok(w);
        }
        let b = build_ball_with_core(&self.p1, self.config.radius).context("P1 ball")?;
        let s = WallSystem::build(&b);
        Ok(self.p1_walls.get_or_init(|| (b, s)))
    }

    fn reductions(&self) -> &[(Path, Reduction)] {
        self.reductions.get_or_init(|| {
            let words = corpus::trivial_corpus(&self.p1, self.config.seed, self.config.trivial_words, 5, 8);
            let reds = par::map(self.exec, &words, |w| dehn_reduce(&self.p1, w));
            words.into_iter().zip(reds).collect()
        })
    }

    fn torsion_order(&self) -> Result<(bool, String, Value)> {
        let cx = &self.p1;
        let solver = Solver::with_oracle(cx, self.config.oracle_radius);
        let mut rows = Vec::new();
        let mut ok = true;
        for k in 1..=4 {
            let w = cx.parse_word(&format!("(a b)^{k}"))?;
            let dehn = solver.is_trivial(&w, Mode::Dehn)?;
            let oracle = solver.is_trivial(&w, Mode::Oracle)?;
            ok &= dehn == oracle && dehn == (k == 4);
            rows.push(json!({ "k": k, "dehn": dehn, "oracle": oracle }));
        }
        let detail = format!("(ab)^k trivial exactly at k=4, oracle radius {}", self.config.oracle_radius);
        Ok((ok, detail, json!({ "rows": rows })))
    }

    fn factor_injectivity(&self) -> Result<(bool, String, Value)> {
        let cx = &self.p1;
        let words = corpus::factor_corpus(cx, self.config.seed, self.config.factor_words, 12);
        let trivial = par::map(self.exec, &words, |(_, _, w)| w.is_empty() || dehn_reduce(cx, w).trivial());
        let bad: Vec<String> = words.iter().zip(&trivial).filter(|p| *p.1).map(|p| cx.format_path(&p.0 .2)).collect();
        let detail = format!("{} of {} single-factor words trivial", bad.len(), words.len());
        Ok((bad.is_empty(), detail, json!({ "words": words.len(), "trivial": bad })))
    }

    fn dehn_termination(&self) -> Result<(bool, String, Value)> {
        let cx = &self.p1;
        let reds = self.reductions();
        let mut failed = 0;
        let mut points = Vec::new();
        for (w, red) in reds {
            if red.trivial() && replay(cx, &red.trace) == Ok(Cyclic::Empty) {
                points.push((w.letter_len() as f64, red.trace.events.len() as f64));
            } else {
                failed += 1;
            }
        }
        let fit = upper_linear_bound(&points);
        let finite = fit.is_some_and(|f| f.slope.is_finite() && f.intercept.is_finite());
        let max_area = points.iter().map(|p| p.1 as usize).max().unwrap_or(0);
        let max_len = points.iter().map(|p| p.0 as usize).max().unwrap_or(0);
        let detail = match fit {
            Some(f) => format!("{failed} of {} failed; area <= {:.3}|w| + {:.3}", reds.len(), f.slope, f.intercept),
            None => format!("{failed} of {} failed; no fit", reds.len()),
        };
        let stats = json!({ "words": reds.len(), "failed": failed, "max_len": max_len, "max_area": max_area, "fit": fit });
        Ok((failed == 0 && finite, detail, stats))
    }

    fn geodesic_cells(&self) -> Result<(bool, String, Value)> {
        let len = self.config.radius;
        // one extra ring so every cell met by a geodesic of length `len` is complete
        let b = build_ball_with_core(&self.p1, len + 1).context("P1 ball")?;
        let geo = geodesic_cell_check(&b, len);
        let conv = convexity_check(&b, len);
        let shared = share_boundary_check(&b);
        let ok = geo.cells_met > 0
            && geo.full_class_violations.is_empty()
            && geo.half_violations.is_empty()
            && geo.max_essential_fraction <= 0.5
            && conv.pairs_checked > 0
            && conv.violations.is_empty()
            && shared.is_empty();
        let detail = format!(
            "{} full-class, {} half, {} convexity violations; max essential fraction {:.3}",
            geo.full_class_violations.len(),
            geo.half_violations.len(),
            conv.violations.len(),
            geo.max_essential_fraction
        );
        Ok((ok, detail, json!({ "geodesics": geo, "convexity": conv, "shared_boundary": shared })))
    }

    fn wall_theorems(&self) -> Result<(bool, String, Value)> {
        let (b1, s1) = self.p1_walls()?;
        let b2 = build_ball_with_core(&self.p2, self.config.p2_radius).context("P2 ball")?;
        let s2 = WallSystem::build(&b2);
        let mut ok = true;
        let mut stats = serde_json::Map::new();
        let mut parts = Vec::new();
        for (name, b, s) in [("p1", b1, s1), ("p2", &b2, &s2)] {
            let walls = s.complete_walls();
            let bad: Vec<usize> = par::map(self.exec, &walls, |&id| {
                let w = s.wall(b, id);
                let emb = check_embedded(&w).map(|r| r.ok()).unwrap_or(false);
                let sep = check_separates(b, &w).map(|r| r.ok()).unwrap_or(false);
                let vs = wall_vertex_space_intersection(b, &w).violations.is_empty();
                (!(emb && sep && vs)).then_some(id)
            })
            .into_iter()
            .flatten()
            .collect();
            ok &= !walls.is_empty() && bad.is_empty();
            parts.push(format!("{name}: {}/{} walls pass", walls.len() - bad.len(), walls.len()));
            stats.insert(name.to_string(), json!({ "complete_walls": walls.len(), "failing": bad }));
        }
        Ok((ok, parts.join(", "), Value::Object(stats)))
    }

    fn carrier_quasiconvexity(&self) -> Result<(bool, String, Value)> {
        let (b, s) = self.p1_walls()?;
        let qc = carrier_quasiconvexity(b, s, self.config.radius, self.exec);
        let bound = qc.bound.unwrap_or(self.p1.w_x());
        let ok = qc.pairs > 0 && qc.max_distance <= bound;
        let detail = format!("max distance {} over {} pairs, bound {bound}", qc.max_distance, qc.pairs);
        Ok((ok, detail, serde_json::to_value(&qc)?))
    }

    fn horoball_metric(&self) -> Result<(bool, String, Value)> {
        let (n, depth) = (self.config.horoball_base, self.config.horoball_depth);
        let g = build_horoball(line_base(n), depth)?;
        let mut rng = corpus::rng(self.config.seed);
        let mut mismatches = Vec::new();
        for _ in 0..self.config.horoball_pairs {
            let u = (rng.gen_range(0..n), rng.gen_range(0..=depth));
            let v = (rng.gen_range(0..n), rng.gen_range(0..=depth));
            let d = g.horoball_distance(u, v);
            if d.is_none() || d != g.normal_form_distance(u, v) {
                mismatches.push((u, v));
            }
        }
        let c = g.envelope_constant();
        let d8 = g.horoball_distance((0, 0), (8.min(n - 1), 0));
        let ok = mismatches.is_empty() && c.is_finite() && d8 == Some(6);
        let detail = format!("{} mismatches; envelope C = {c:.3}; level-0 distance at 8 is {d8:?}", mismatches.len());
        Ok((ok, detail, json!({ "mismatches": mismatches, "envelope": c, "level0_at_8": d8 })))
    }

    fn linear_separation(&self) -> Result<(bool, String, Value)> {
        let (b, s) = self.p1_walls()?;
        let rep = linear_separation_fit(b, s, self.exec);
        let kappa = rep.fit.map(|f| f.kappa);
        let detail = format!(
            "{} of {} edges lack a single crossing within {}; kappa {:?}",
            rep.failures.len(),
            rep.edges_checked,
            rep.window,
            kappa
        );
        let stats = json!({
            "pairs": rep.pairs,
            "edges_checked": rep.edges_checked,
            "window": rep.window,
            "max_gap": rep.max_gap,
            "failures": rep.failures.len(),
            "fit": rep.fit,
        });
        Ok((rep.ok(), detail, stats))
    }

    fn dual_complex(&self) -> Result<(bool, String, Value)> {
        // P0: the graph walls cut out the Bass-Serre tree
        let b0 = build_ball_with_core(&self.p0, self.config.p0_radius)?;
        let s0 = WallSystem::build(&b0);
        let h0 = HalfspaceSystem::with_filter(&b0, &s0, self.exec, |w| w.kind == WallType::Graph)?;
        let d0 = build_dual(&h0, self.config.flip_margin)?;
        let tree: HashSet<Vec<Letter>> = b0
            .core_vertices()
            .iter()
            .map(|&v| {
                let l = &b0.vertices[v].label;
                let keep = l.iter().rposition(|x| x.is_edge()).map_or(0, |i| i + 1);
                l[..keep].to_vec()
            })
            .collect();
        let tree_ok = d0.is_connected()
            && d0.zero_cubes() == tree.len()
            && d0.one_cubes() + 1 == d0.zero_cubes()
            && d0.max_cube_dim() == 1;

        let (b, s) = self.p1_walls()?;
        let h = HalfspaceSystem::new(b, s, self.exec)?;
        let d = build_dual(&h, self.config.flip_margin)?;
        let audit = d.hyperplane_audit(&h);
        let link = npc_link_check(&d, &h);
        let inner = b.inner_vertices();
        let mut rng = corpus::rng(self.config.seed);
        let pairs: Vec<(usize, usize)> = (0..self.config.dual_pairs)
            .map(|_| (inner[rng.gen_range(0..inner.len())], inner[rng.gen_range(0..inner.len())]))
            .collect();
        let proper = properness_witness(&d, &h, b, s, &pairs)?;
        let ok = tree_ok
            && d.saturated
            && d.is_connected()
            && audit.ok()
            && link.violations.is_empty()
            && proper.ok()
            && proper.skipped.is_empty();
        let detail = format!(
            "p0 tree {} ({} vertices); p1 {} 0-cubes, {} hyperplanes, saturated {}, {} link violations, {} distance mismatches",
            if tree_ok { "ok" } else { "wrong" },
            d0.zero_cubes(),
            d.zero_cubes(),
            audit.hyperplanes,
            d.saturated,
            link.violations.len(),
            proper.mismatches.len()
        );
        let stats = json!({
            "p0": { "zero_cubes": d0.zero_cubes(), "one_cubes": d0.one_cubes(), "expected_vertices": tree.len() },
            "p1": {
                "summary": d.summary(&h),
                "complete_walls": h.walls.len(),
                "saturated": d.saturated,
                "audit": audit,
                "link_violations": link.violations.len(),
                "pairs": pairs.len(),
                "pair_pool": inner.len(),
                "skipped": proper.skipped.len(),
                "mismatches": proper.mismatches.len(),
            },
        });
        Ok((ok, detail, stats))
    }

    fn spelling_audit(&self) -> Result<(bool, String, Value)> {
        let cx = &self.p1;
        let mut multi = 0;
        let mut failures = Vec::new();
        for (i, (_, red)) in self.reductions().iter().enumerate() {
            if !red.trivial() {
                continue;
            }
            let d = match diagram_from_trace(cx, &red.trace) {
                Ok(d) => d,
                Err(e) => {
                    failures.push(json!({ "word": i, "error": e.to_string() }));
                    continue;
                }
            };
            if d.area() >= 2 {
                multi += 1;
                let rep = spelling_audit(cx, &d);
                if !rep.ok() || rep.extreme.len() < 2 {
                    failures.push(json!({ "word": i, "extreme": rep.extreme.len() }));
                }
            }
        }
        let d = surrounded_cell(cx, 0).context("no internal-cell instance for relator 0")?;
        let rep = spelling_audit(cx, &d);
        let required = 2 * cx.relators[0].exponent;
        let internal_ok = !rep.internal.is_empty() && rep.extreme.len() >= required && rep.ok();
        let detail = format!(
            "{multi} multi-cell diagrams, {} failures; internal instance has {} extreme cells (need {required})",
            failures.len(),
            rep.extreme.len()
        );
        let stats = json!({ "multi_cell": multi, "failures": failures, "internal": rep });
        Ok((failures.is_empty() && internal_ok, detail, stats))
    }
}
