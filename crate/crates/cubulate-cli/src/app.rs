//! Argument parsing and the subcommands.

use crate::checks::{Suite, SuiteConfig};
use crate::manifest::{Assertion, RunManifest};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cubulate::ball::{build_ball_with_core, convexity_check, geodesic_cell_check};
use cubulate::diagrams::{diagram_from_word, reduce as fold_all, spelling_audit, surrounded_cell};
use cubulate::dual_cube::{build_dual, npc_link_check, properness_witness, to_dot, HalfspaceSystem, DEFAULT_FLIP_MARGIN};
use cubulate::horoball::{build_horoball, line_base};
use cubulate::par::{self, Exec};
use cubulate::walls::{
    self, carrier_quasiconvexity, check_embedded, check_separates, linear_separation_fit,
    wall_vertex_space_intersection, WallSystem,
};
use cubulate::word_problem::{area_estimate, dehn_reduce, replay, Mode, Solver};
use cubulate::word::Cyclic;
use cubulate::{corpus, parse_presentation, StaggeredComplex};
use rand::Rng;
use serde_json::json;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cubulate", version, about = "Experiments on staggered 2-complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a presentation and check staggering and the exponent hypothesis.
    Validate(Common),
    /// Decide whether a word is trivial and estimate its area.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        word: String,
        /// Also decide the word by enumerating a ball of this radius.
        #[arg(long)]
        oracle_radius: Option<usize>,
    },
    /// Build a ball of the cover and run the geodesic checks on it.
    Ball(Common),
    /// Trace the walls of a ball and check them.
    Walls {
        #[command(flatten)]
        common: Common,
        /// Wall exported with `--format dot`.
        #[arg(long, default_value_t = 0)]
        wall: usize,
    },
    /// Compare horoball distances over a line base.
    Horoball {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 64)]
        base_len: usize,
    },
    /// Build the dual cube complex of the walls of a ball.
    Dual(Common),
    /// Build and audit a van Kampen diagram.
    Diagram {
        #[command(flatten)]
        common: Common,
        /// Trivial word to fill; without it the internal-cell instance is used.
        #[arg(long)]
        word: Option<String>,
    },
    /// Run the full property suite. P0 and P2 are read next to the given file.
    CheckAll(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Presentation file.
    #[arg(value_name = "FILE", conflicts_with = "presentation")]
    file: Option<PathBuf>,
    #[arg(short, long, value_name = "FILE")]
    presentation: Option<PathBuf>,
    /// Safe-core radius of the ball.
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Horoball depth.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    flip_margin: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write manifest.json (and a DOT file when available) here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

impl Common {
    fn path(&self) -> Option<&PathBuf> {
        self.file.as_ref().or(self.presentation.as_ref())
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    fn record(&self, m: &mut RunManifest) {
        m.seed = Some(self.seed);
        m.flag("radius", self.radius);
        m.flag("depth", self.depth);
        m.flag("flip_margin", self.flip_margin);
        m.flag("format", format!("{:?}", self.format).to_lowercase());
        m.flag("sequential", self.sequential);
    }
}

/// Input problems map to exit code 1, everything else is reported.
#[derive(Debug)]
struct UsageError(anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(UsageError(e.into()))
}

struct Loaded {
    cx: StaggeredComplex,
    name: String,
    text: String,
    path: PathBuf,
}

fn load(path: &FsPath) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)?;
    let cx = parse_presentation(&text).with_context(|| format!("parsing {}", path.display())).map_err(usage)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Loaded { cx, name, text, path: path.to_path_buf() })
}

fn require(common: &Common) -> Result<Loaded> {
    match common.path() {
        Some(p) => load(p),
        None => Err(usage(anyhow::anyhow!("a presentation file is required"))),
    }
}

/// A finished run: the manifest and an optional DOT rendering.
struct Report {
    manifest: RunManifest,
    dot: Option<String>,
}

/// Parses `argv`, runs the subcommand and writes its artifacts. Returns
/// the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    par::init();
    let started = Instant::now();
    let (common, res) = dispatch(cli.command);
    let report = match res {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return if e.is::<UsageError>() { EXIT_USAGE } else { EXIT_FAIL };
        }
    };
    let _ = writeln!(err, "finished in {:.2?} on {} thread(s)", started.elapsed(), par::current_threads());
    if let Err(e) = emit(&common, &report, out) {
        let _ = writeln!(err, "error: {e:#}");
        return EXIT_USAGE;
    }
    for a in report.manifest.assertions.iter().filter(|a| !a.passed) {
        let _ = writeln!(err, "FAILED {}: {}", a.name, a.detail);
    }
    if report.manifest.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn emit(common: &Common, report: &Report, out: &mut dyn Write) -> Result<()> {
    let json = report.manifest.to_json();
    match common.format {
        Format::Json => out.write_all(json.as_bytes())?,
        Format::Dot => match &report.dot {
            Some(d) => out.write_all(d.as_bytes())?,
            None => bail!(UsageError(anyhow::anyhow!("{} has no DOT output", report.manifest.subcommand))),
        },
    }
    if let Some(dir) = &common.out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("manifest.json"), &json)?;
        if let Some(d) = &report.dot {
            std::fs::write(dir.join(format!("{}.dot", report.manifest.subcommand)), d)?;
        }
    }
    Ok(())
}

fn dispatch(cmd: Command) -> (Common, Result<Report>) {
    match cmd {
        Command::Validate(c) => {
            let r = validate(&c);
            (c, r)
        }
        Command::Reduce { common, word, oracle_radius } => {
            let r = reduce(&common, &word, oracle_radius);
            (common, r)
        }
        Command::Ball(c) => {
            let r = ball(&c);
            (c, r)
        }
        Command::Walls { common, wall } => {
            let r = walls_cmd(&common, wall);
            (common, r)
        }
        Command::Horoball { common, base_len } => {
            let r = horoball(&common, base_len);
            (common, r)
        }
        Command::Dual(c) => {
            let r = dual(&c);
            (c, r)
        }
        Command::Diagram { common, word } => {
            let r = diagram(&common, word.as_deref());
            (common, r)
        }
        Command::CheckAll(c) => {
            let r = check_all(&c);
            (c, r)
        }
    }
}

fn start(sub: &str, common: &Common, l: &Loaded) -> RunManifest {
    let mut m = RunManifest::new(sub).with_presentation(&l.name, &l.text);
    common.record(&mut m);
    m
}

fn validate(c: &Common) -> Result<Report> {
    let l = require(c)?;
    let cx = &l.cx;
    let mut m = start("validate", c, &l);
    let violations = cx.validate_staggering();
    let n = cx.min_exponent().ok();
    m.stat("factors", cx.factors.len());
    m.stat("edges", cx.edges.len());
    m.stat("relators", cx.relators.len());
    m.stat("min_exponent", n.map(|n| n.value));
    m.stat("in_hypothesis", cx.in_hypothesis());
    m.stat("w_x", cx.w_x());
    m.stat("dumbbell", cx.is_dumbbell());
    m.assert(Assertion::new("staggered", violations.is_empty(), format!("{} violations", violations.len())));
    if let Some(n) = n {
        m.assert(Assertion::new("min-exponent", !n.below_four, format!("n(X) = {}", n.value)));
    }
    Ok(Report { manifest: m, dot: None })
}

fn reduce(c: &Common, text: &str, oracle_radius: Option<usize>) -> Result<Report> {
    let l = require(c)?;
    let cx = &l.cx;
    let mut m = start("reduce", c, &l);
    m.flag("word", text);
    m.flag("oracle_radius", oracle_radius);
    let w = cx.parse_word(text).map_err(usage)?;
    let red = dehn_reduce(cx, &w);
    m.stat("word", cx.format_path(&w));
    m.stat("trivial", red.trivial());
    m.stat("events", red.trace.events.len());
    m.stat("area", area_estimate(cx, &w).ok());
    let replayed = replay(cx, &red.trace);
    m.assert(Assertion::new(
        "trace-replays",
        replayed.as_ref() == Ok(&red.trace.output),
        "the recorded rewrites reproduce the residual",
    ));
    if red.trivial() {
        m.assert(Assertion::new("empty-residual", replayed == Ok(Cyclic::Empty), "trivial words reduce to empty"));
    }
    if let Some(r) = oracle_radius {
        let solver = Solver::with_oracle(cx, r);
        let agree = solver.is_trivial(&w, Mode::CrossCheck);
        m.assert(Assertion::new(
            "oracle-agrees",
            agree.is_ok(),
            match &agree {
                Ok(t) => format!("both say trivial = {t}"),
                Err(e) => e.to_string(),
            },
        ));
    }
    Ok(Report { manifest: m, dot: None })
}

fn ball(c: &Common) -> Result<Report> {
    let l = require(c)?;
    let core = c.radius.unwrap_or(4);
    let mut m = start("ball", c, &l);
    let b = build_ball_with_core(&l.cx, core)?;
    m.stat("radius", b.radius);
    m.stat("core_radius", core);
    m.stat("vertices", b.vertices.len());
    m.stat("edges", b.edges.len());
    m.stat("cells", b.cells.len());
    m.stat("core_vertices", b.core_vertices().len());
    // geodesics one shorter than the core meet only complete cells
    let len = core.saturating_sub(1);
    let geo = geodesic_cell_check(&b, len);
    let conv = convexity_check(&b, len);
    m.stat("geodesic_length", len);
    m.stat("max_essential_fraction", geo.max_essential_fraction);
    m.assert(Assertion::new(
        "geodesic-cells",
        geo.full_class_violations.is_empty() && geo.half_violations.is_empty(),
        format!("{} full-class, {} half violations", geo.full_class_violations.len(), geo.half_violations.len()),
    ));
    m.assert(Assertion::new("convexity", conv.violations.is_empty(), format!("{} pairs", conv.pairs_checked)));
    Ok(Report { manifest: m, dot: None })
}

fn walls_cmd(c: &Common, wall: usize) -> Result<Report> {
    let l = require(c)?;
    let core = c.radius.unwrap_or(4);
    let exec = c.exec();
    let mut m = start("walls", c, &l);
    m.flag("wall", wall);
    let b = build_ball_with_core(&l.cx, core)?;
    let sys = WallSystem::build(&b);
    let complete = sys.complete_walls();
    m.stat("walls", sys.len());
    m.stat("complete_walls", complete.len());
    let bad: Vec<usize> = par::map(exec, &complete, |&id| {
        let w = sys.wall(&b, id);
        let ok = check_embedded(&w).is_ok_and(|r| r.ok())
            && check_separates(&b, &w).is_ok_and(|r| r.ok())
            && wall_vertex_space_intersection(&b, &w).violations.is_empty();
        (!ok).then_some(id)
    })
    .into_iter()
    .flatten()
    .collect();
    m.assert(Assertion::new("complete-walls", bad.is_empty(), format!("failing walls {bad:?}")));
    let qc = carrier_quasiconvexity(&b, &sys, core, exec);
    m.stat("qc_max_distance", qc.max_distance);
    m.assert(Assertion::new("carrier-quasiconvexity", qc.ok(), format!("{} <= {:?}", qc.max_distance, qc.bound)));
    let ls = linear_separation_fit(&b, &sys, exec);
    m.stat("linsep_fit", ls.fit);
    m.assert(Assertion::new("linear-separation", ls.ok(), format!("{} failures", ls.failures.len())));
    let dot = (wall < sys.len()).then(|| walls::to_dot(&b, &sys.wall(&b, wall)));
    Ok(Report { manifest: m, dot })
}

fn horoball(c: &Common, n: usize) -> Result<Report> {
    let depth = c.depth.unwrap_or(8);
    let mut m = RunManifest::new("horoball");
    if let Some(p) = c.path() {
        let l = load(p)?;
        m = m.with_presentation(&l.name, &l.text);
    }
    c.record(&mut m);
    m.flag("base_len", n);
    if n == 0 {
        return Err(usage(anyhow::anyhow!("--base-len must be positive")));
    }
    let g = build_horoball(line_base(n), depth)?;
    let mut rng = corpus::rng(c.seed);
    let mut mismatches = 0;
    for _ in 0..100 {
        let u = (rng.gen_range(0..n), rng.gen_range(0..=depth));
        let v = (rng.gen_range(0..n), rng.gen_range(0..=depth));
        if g.horoball_distance(u, v) != g.normal_form_distance(u, v) {
            mismatches += 1;
        }
    }
    let envelope = g.envelope_constant();
    m.stat("vertices", g.vertex_count());
    m.stat("edges", g.edge_count());
    m.stat("envelope", envelope);
    m.assert(Assertion::new("normal-form", mismatches == 0, format!("{mismatches} of 100 pairs differ")));
    m.assert(Assertion::new("envelope-finite", envelope.is_finite(), format!("C = {envelope:.3}")));
    Ok(Report { manifest: m, dot: None })
}

fn dual(c: &Common) -> Result<Report> {
    let l = require(c)?;
    let core = c.radius.unwrap_or(4);
    let margin = c.flip_margin.unwrap_or(DEFAULT_FLIP_MARGIN);
    let mut m = start("dual", c, &l);
    let b = build_ball_with_core(&l.cx, core)?;
    let sys = WallSystem::build(&b);
    let h = HalfspaceSystem::new(&b, &sys, c.exec())?;
    let d = build_dual(&h, margin)?;
    m.stat("summary", d.summary(&h));
    m.stat("saturated", d.saturated);
    let audit = d.hyperplane_audit(&h);
    m.assert(Assertion::new("connected", d.is_connected(), format!("{} 0-cubes", d.zero_cubes())));
    m.assert(Assertion::new("hyperplanes", audit.ok(), format!("{} hyperplanes, {} walls", audit.hyperplanes, audit.walls)));
    let link = npc_link_check(&d, &h);
    m.assert(Assertion::new("npc-links", link.violations.is_empty(), format!("{} violations", link.violations.len())));
    let inner = b.inner_vertices();
    let mut rng = corpus::rng(c.seed);
    let pairs: Vec<(usize, usize)> =
        (0..100).map(|_| (inner[rng.gen_range(0..inner.len())], inner[rng.gen_range(0..inner.len())])).collect();
    let proper = properness_witness(&d, &h, &b, &sys, &pairs)?;
    m.assert(Assertion::new(
        "distance-counts-walls",
        proper.mismatches.is_empty() && proper.skipped.is_empty(),
        format!(
            "{} of {} pairs differ, {} skipped; saturated {}",
            proper.mismatches.len(),
            pairs.len(),
            proper.skipped.len(),
            d.saturated
        ),
    ));
    Ok(Report { manifest: m, dot: Some(to_dot(&d, &h)) })
}

fn diagram(c: &Common, word: Option<&str>) -> Result<Report> {
    let l = require(c)?;
    let cx = &l.cx;
    let mut m = start("diagram", c, &l);
    m.flag("word", word);
    let d = match word {
        Some(t) => {
            let w = cx.parse_word(t).map_err(usage)?;
            diagram_from_word(cx, &w)?
        }
        None => surrounded_cell(cx, 0).context("relator 0 admits no internal-cell instance")?,
    };
    let (d, folds) = fold_all(cx, &d)?;
    let rep = spelling_audit(cx, &d);
    m.stat("area", d.area());
    m.stat("folds", folds);
    m.stat("vertices", d.vertices.len());
    m.stat("edges", d.edges.len());
    m.stat("faces", d.faces.len());
    m.stat("spelling", &rep);
    let bad = d.check_labels(cx);
    m.assert(Assertion::new("labels", bad.is_empty(), format!("{} mislabelled faces", bad.len())));
    m.assert(Assertion::new("disk-like", d.is_disk_like(), format!("euler characteristic {}", d.euler_characteristic())));
    m.assert(Assertion::new(
        "extreme-cells",
        rep.ok(),
        format!("{} extreme, {} required", rep.extreme.len(), rep.required),
    ));
    Ok(Report { manifest: m, dot: Some(d.to_dot(cx)) })
}

fn check_all(c: &Common) -> Result<Report> {
    let l = require(c)?;
    let dir = l.path.parent().unwrap_or(FsPath::new("."));
    let p0 = load(&dir.join("p0.sgc"))?;
    let p2 = load(&dir.join("p2.sgc"))?;
    let mut m = start("check-all", c, &l);
    let defaults = SuiteConfig::default();
    let config = SuiteConfig {
        seed: c.seed,
        radius: c.radius.unwrap_or(defaults.radius),
        horoball_depth: c.depth.unwrap_or(defaults.horoball_depth),
        flip_margin: c.flip_margin.unwrap_or(defaults.flip_margin),
        ..defaults
    };
    m.stat("config", &config);
    m.stat("p0_sha256", crate::manifest::sha256_hex(p0.text.as_bytes()));
    m.stat("p2_sha256", crate::manifest::sha256_hex(p2.text.as_bytes()));
    let suite = Suite::new(p0.cx, l.cx, p2.cx, config, c.exec());
    for o in suite.run_all() {
        m.stat(&format!("{:02}-{}", o.id, o.name), json!({ "detail": o.detail, "stats": o.stats }));
        m.assert(Assertion::new(format!("{:02}-{}", o.id, o.name), o.passed, o.detail));
    }
    Ok(Report { manifest: m, dot: None })
}
