//! `bvmetric` command-line driver.
//!
//! Exit status: 0 when the claim under test holds (or the computation simply
//! completed), 1 when it is refuted and the report carries a witness, 2 on
//! usage, input or budget errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::analysis::{
    check_condition_a, check_condition_b, check_contractive, default_epsilon_grid, find_fixed_points,
    orbit_bound, orbit_distances, AnalysisError, ConditionReport, Delta,
};
use crate::document::{parse_document, parse_map, DocumentError, Loaded};
use crate::gallery::{GalleryError, GalleryName, GallerySpec};
use crate::picard::{
    boundedness_check, convergence_check, orbit_diagnostics, picard_iterate, write_orbit_csv,
    PicardError,
};
use crate::scalar::{parse_scalar, ParseScalarError};
use crate::space::{FiniteSpace, PointId, SelfMap};
use crate::verifier::{
    min_s_report, tuple_count, verify_polygon_with, Verdict, VerifyError, VerifyOptions,
    DEFAULT_TUPLE_BUDGET,
};
use crate::Rational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bvmetric", version, about = "Certify b_v(s)-metric spaces and analyze self-maps exactly")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Space document (explicit table or gallery spec).
    #[arg(long, conflicts_with = "gallery")]
    pub space: Option<PathBuf>,
    /// Gallery family, e.g. naturals_space.
    #[arg(long)]
    pub gallery: Option<String>,
    /// Gallery truncation size.
    #[arg(long, requires = "gallery")]
    pub n: Option<usize>,
    /// Seed for random_space.
    #[arg(long, requires = "gallery")]
    pub seed: Option<u64>,
    /// Map document overriding the one in the input.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Refuse instances with n^(v+2) above this many tuples.
    #[arg(long, default_value_t = DEFAULT_TUPLE_BUDGET)]
    pub budget: u128,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify or refute the polygon inequality for (v, s).
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        s: String,
    },
    /// Least admissible s for a given v.
    MinS {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        v: usize,
    },
    /// Check d(Tx,Ty) < d(x,y) for all distinct x, y.
    Contractive {
        #[command(flatten)]
        input: Input,
    },
    /// Exact largest δ per ε for condition (A).
    ConditionA {
        #[command(flatten)]
        input: Input,
        /// Comma-separated ε values; defaults to every distance and its half.
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<String>,
    },
    /// Condition (B) on the orbit of x0 up to a horizon.
    ConditionB {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        x0: String,
        #[arg(long)]
        horizon: usize,
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<String>,
    },
    /// Picard iteration from x0 with diagnostics.
    Iterate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        x0: String,
        /// Defaults to the number of points, which always reaches a cycle.
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long, default_value = "1/1000000")]
        tolerance: String,
        /// Also write n, d(x_n, x_{n+1}), d(x_n, z) as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// max d(x0, T^(k-v) x0) over the horizon.
    OrbitBound {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        x0: String,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        horizon: usize,
    },
    /// Full battery against a gallery instance's published claims.
    Adjudicate {
        #[command(flatten)]
        input: Input,
    },
    /// Print the materialized space document.
    Export {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error("invalid rational: {0}")]
    Rational(#[from] ParseScalarError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Picard(#[from] PicardError),
}

/// Finished report: exit status plus JSON and text renderings.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: i32,
    pub json: Value,
    pub text: String,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => self.text.clone(),
        }
    }
}

/// Parses arguments, runs, writes the report, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match run(&cli.command) {
        Ok(outcome) => {
            let rendered = outcome.render(cli.format);
            match &cli.output {
                Some(path) => {
                    if let Err(e) = fs::write(path, rendered) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return EXIT_ERROR;
                    }
                }
                None => print!("{rendered}"),
            }
            outcome.status
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

struct Source {
    loaded: Loaded<Rational>,
    description: String,
    budget: u128,
}

impl Source {
    fn space(&self) -> &FiniteSpace<Rational> {
        &self.loaded.space
    }

    fn map(&self) -> Result<&SelfMap, CliError> {
        self.loaded
            .map
            .as_ref()
            .ok_or_else(|| CliError::Usage("input has no map; pass --map".into()))
    }

    fn point(&self, label: &str) -> Result<PointId, CliError> {
        self.space()
            .find(label)
            .ok_or_else(|| CliError::Usage(format!("no point labelled {label:?}")))
    }

    fn scope(&self) -> Value {
        json!({
            "source": self.description,
            "points": self.space().len(),
            "tuple_budget": self.budget.to_string(),
        })
    }

    fn header(&self, title: &str) -> String {
        format!(
            "{title}\n  source: {}\n  points: {}\n  tuple budget: {}\n",
            self.description,
            self.space().len(),
            self.budget
        )
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })
}

fn load(input: &Input) -> Result<Source, CliError> {
    if input.budget == 0 {
        return Err(CliError::Usage("--budget must be positive".into()));
    }
    let (mut loaded, description) = match (&input.space, &input.gallery) {
        (Some(path), None) => (parse_document(&read(path)?)?, path.display().to_string()),
        (None, Some(name)) => {
            let gallery: GalleryName = name.parse()?;
            let n = input.n.unwrap_or_else(|| gallery.adjudication_size());
            let spec = GallerySpec { gallery, n, seed: input.seed, v: None };
            let inst = spec.build::<Rational>()?;
            let description = match input.seed {
                Some(seed) => format!("{gallery}(n={n}, seed={seed})"),
                None => format!("{gallery}(n={n})"),
            };
            (Loaded { space: inst.space.clone(), map: inst.map.clone(), gallery: Some(inst) }, description)
        }
        (None, None) => return Err(CliError::Usage("pass --space FILE or --gallery NAME".into())),
        (Some(_), Some(_)) => unreachable!("clap rejects --space with --gallery"),
    };
    if let Some(path) = &input.map {
        loaded.map = Some(parse_map(&read(path)?, &loaded.space)?);
    }
    Ok(Source { loaded, description, budget: input.budget })
}

fn parse_grid(values: &[String]) -> Result<Vec<Rational>, CliError> {
    values.iter().map(|e| Ok(parse_scalar(e)?)).collect()
}

fn status(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_REFUTED
    }
}

fn delta_text(d: &Delta<Rational>) -> String {
    match d {
        Delta::Unconstrained => "unconstrained".into(),
        Delta::Bounded(v) => v.to_string(),
        Delta::Absent => "none".into(),
    }
}

fn condition_text(src: &Source, title: &str, rep: &ConditionReport<Rational>) -> String {
    let mut t = src.header(title);
    let _ = writeln!(t, "  scope: {}", serde_json::to_string(&rep.scope).unwrap());
    let _ = writeln!(t, "  verdict: {}", if rep.holds { "holds" } else { "refuted" });
    for g in &rep.grid {
        let _ = writeln!(t, "  eps {:>12}  delta {}", g.epsilon.to_string(), delta_text(&g.delta));
    }
    if let Some(w) = &rep.witness {
        let _ = writeln!(
            t,
            "  witness: ({}, {}) [{}, {}] at eps {}: before {} <= eps < after {}",
            w.first, w.second, w.labels.0, w.labels.1, w.epsilon, w.before, w.after
        );
    }
    t
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Verify { input, v, s } => {
            let src = load(input)?;
            let s: Rational = parse_scalar(s)?;
            let opts = VerifyOptions { tuple_budget: src.budget };
            let res = verify_polygon_with(src.space(), *v, &s, &opts)?;
            let mut text = src.header("polygon inequality");
            let _ = writeln!(text, "  v = {v}, s = {s}");
            let _ = writeln!(text, "  verdict: {}", verdict_str(res.verdict));
            let _ = writeln!(text, "  tuples checked: {} of {}", res.tuples_checked, tuple_count(src.space().len(), *v));
            if let Some(w) = &res.witness {
                let _ = writeln!(
                    text,
                    "  witness: d({}, {}) = {} > {} = s * length of chain [{}]",
                    w.endpoint_labels.0,
                    w.endpoint_labels.1,
                    w.lhs,
                    w.rhs,
                    w.chain_labels.join(", ")
                );
            }
            Ok(Outcome {
                status: status(res.verdict.holds()),
                json: json!({"command": "verify", "scope": src.scope(), "result": res}),
                text,
            })
        }
        Command::MinS { input, v } => {
            let src = load(input)?;
            let opts = VerifyOptions { tuple_budget: src.budget };
            let rep = min_s_report(src.space(), *v, &opts)?;
            let mut text = src.header("least admissible s");
            let _ = writeln!(text, "  v = {v}");
            let _ = writeln!(text, "  min_s = {}", rep.value);
            if let Some((x, y, chain)) = &rep.argmax {
                let sp = src.space();
                let labels: Vec<&str> = chain.iter().map(|&u| sp.label(u)).collect();
                let _ = writeln!(
                    text,
                    "  attained by d({}, {}) over chain [{}]",
                    sp.label(*x),
                    sp.label(*y),
                    labels.join(", ")
                );
            }
            Ok(Outcome {
                status: EXIT_OK,
                json: json!({"command": "min-s", "scope": src.scope(), "result": rep}),
                text,
            })
        }
        Command::Contractive { input } => {
            let src = load(input)?;
            let rep = check_contractive(src.space(), src.map()?);
            let errata = src.loaded.gallery.as_ref().is_some_and(|g| g.claims_contractive) && !rep.holds;
            let mut text = src.header("contractivity");
            let _ = writeln!(text, "  verdict: {}", if rep.holds { "holds" } else { "refuted" });
            let _ = writeln!(text, "  pairs checked: {}, violations: {}", rep.pairs_checked, rep.violations.len());
            if let Some(w) = rep.violations.first() {
                let _ = writeln!(
                    text,
                    "  first witness: ({}, {}): d(x,y) = {}, d(Tx,Ty) = {}",
                    w.labels.0, w.labels.1, w.before, w.after
                );
            }
            if errata {
                let _ = writeln!(text, "  errata: published contractivity claim refuted");
            }
            Ok(Outcome {
                status: status(rep.holds),
                json: json!({"command": "contractive", "scope": src.scope(), "errata": errata, "result": rep}),
                text,
            })
        }
        Command::ConditionA { input, epsilon } => {
            let src = load(input)?;
            let grid = if epsilon.is_empty() {
                default_epsilon_grid(&src.space().distinct_distances(), &Rational::new(1, 2))
            } else {
                parse_grid(epsilon)?
            };
            let rep = check_condition_a(src.space(), src.map()?, &grid)?;
            Ok(Outcome {
                status: status(rep.holds),
                text: condition_text(&src, "condition (A)", &rep),
                json: json!({"command": "condition-a", "scope": src.scope(), "result": rep}),
            })
        }
        Command::ConditionB { input, x0, horizon, epsilon } => {
            let src = load(input)?;
            let x0 = src.point(x0)?;
            let map = src.map()?;
            let grid = if epsilon.is_empty() {
                let distances = orbit_distances(src.space(), map, x0, horizon + 1);
                default_epsilon_grid(&distances, &Rational::new(1, 2))
            } else {
                parse_grid(epsilon)?
            };
            let rep = check_condition_b(src.space(), map, x0, &grid, *horizon)?;
            Ok(Outcome {
                status: status(rep.holds),
                text: condition_text(&src, "condition (B)", &rep),
                json: json!({"command": "condition-b", "scope": src.scope(), "result": rep}),
            })
        }
        Command::Iterate { input, x0, max_steps, tolerance, csv } => {
            let src = load(input)?;
            let x0 = src.point(x0)?;
            let tol: Rational = parse_scalar(tolerance)?;
            let steps = max_steps.unwrap_or(src.space().len().max(1));
            let trace = picard_iterate(src.space(), src.map()?, x0, steps)?;
            let diag = orbit_diagnostics(src.space(), &trace, &tol);
            let bounded = boundedness_check(src.space(), &trace);
            let fixed = trace.fixed_point();
            let convergence = fixed.map(|z| convergence_check(src.space(), &trace, z, &tol));
            if let Some(path) = csv {
                let file = fs::File::create(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
                write_orbit_csv(src.space(), &trace, fixed, file)
                    .map_err(|e| CliError::Usage(format!("csv export failed: {e}")))?;
            }
            let mut text = src.header("Picard iteration");
            let _ = writeln!(text, "  start: {}, max steps: {steps}", src.space().label(x0));
            let _ = writeln!(text, "  orbit: {}", trace.labels.join(" -> "));
            match (trace.cycle, fixed) {
                (Some(c), Some(z)) => {
                    let _ = writeln!(text, "  fixed point {} reached at step {}", src.space().label(z), c.entry);
                }
                (Some(c), None) => {
                    let _ = writeln!(text, "  cycle of period {} entered at step {}; no fixed point", c.period, c.entry);
                }
                (None, _) if trace.escaped => {
                    let _ = writeln!(text, "  map undefined after the last point");
                }
                (None, _) => {
                    let _ = writeln!(text, "  no repeat within {steps} steps");
                }
            }
            let _ = writeln!(text, "  bound on pairwise distances: {}", bounded.m);
            let _ = writeln!(
                text,
                "  gap1 decreasing: {}, vanishing below {tol}: {}",
                diag.gap1_decreasing, diag.gap1_vanishing
            );
            Ok(Outcome {
                status: EXIT_OK,
                json: json!({
                    "command": "iterate",
                    "scope": src.scope(),
                    "result": {
                        "trace": trace,
                        "fixed_point": fixed.map(|z| src.space().label(z).to_owned()),
                        "convergence": convergence,
                        "diagnostics": diag,
                        "boundedness": bounded,
                    }
                }),
                text,
            })
        }
        Command::OrbitBound { input, x0, v, horizon } => {
            let src = load(input)?;
            let x0 = src.point(x0)?;
            let rep = orbit_bound(src.space(), src.map()?, x0, *v, *horizon)?;
            let mut text = src.header("orbit bound");
            let _ = writeln!(text, "  start: {}, v = {v}, horizon = {horizon}", src.space().label(x0));
            let _ = writeln!(text, "  bound: {} (attained at power {})", rep.bound, rep.attained_at);
            let _ = writeln!(text, "  powers evaluated: {}{}", rep.evaluated, if rep.stopped_by_partial_map { " (map undefined beyond)" } else { "" });
            Ok(Outcome {
                status: EXIT_OK,
                json: json!({"command": "orbit-bound", "scope": src.scope(), "result": rep}),
                text,
            })
        }
        Command::Adjudicate { input } => adjudicate(&load(input)?),
        Command::Export { input } => {
            let src = load(input)?;
            let doc = crate::space::SpaceDocument::from(src.space());
            let mut json = serde_json::to_value(&doc).expect("document serializes");
            if let Ok(map) = src.map() {
                let images: Vec<Value> = map
                    .images()
                    .iter()
                    .map(|y| y.map_or(Value::Null, |p| Value::String(src.space().label(p).to_owned())))
                    .collect();
                json["map"] = Value::Array(images);
            }
            let text = serde_json::to_string_pretty(&json).expect("document serializes") + "\n";
            Ok(Outcome { status: EXIT_OK, json, text })
        }
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Certified => "certified",
        Verdict::Refuted => "refuted",
        Verdict::Vacuous => "vacuous (certified)",
    }
}

fn adjudicate(src: &Source) -> Result<Outcome, CliError> {
    let inst = src
        .loaded
        .gallery
        .as_ref()
        .ok_or_else(|| CliError::Usage("adjudicate needs a gallery instance".into()))?;
    let space = src.space();
    let opts = VerifyOptions { tuple_budget: src.budget };
    let class = &inst.class;
    let polygon = verify_polygon_with(space, class.v, &class.s, &opts)?;
    let least = min_s_report(space, class.v, &opts)?;

    let mut text = src.header(&format!("adjudication of {}", inst.spec.gallery));
    let mut upheld = polygon.verdict.holds();
    let _ = writeln!(text, "  claimed class: b_{}({})", class.v, class.s);
    let _ = writeln!(text, "  polygon inequality: {}", verdict_str(polygon.verdict));
    let _ = writeln!(text, "  min_s(v={}) = {}", class.v, least.value);
    let _ = writeln!(text, "  compactness (as stated): {}", inst.compactness);

    let mut map_json = Value::Null;
    if let Some(map) = &inst.map {
        let contractive = check_contractive(space, map);
        let contractive_errata = inst.claims_contractive && !contractive.holds;
        let fixed = find_fixed_points(map);
        let fixed_ok = inst.claims_fixed_point.is_none_or(|c| c == !fixed.is_empty());
        upheld &= !contractive_errata && fixed_ok;

        let mut orbits = Vec::new();
        for x in map.domain() {
            let trace = picard_iterate(space, map, x, space.len())?;
            orbits.push(json!({
                "start": space.label(x),
                "cycle": trace.cycle,
                "fixed_point": trace.fixed_point().map(|z| space.label(z).to_owned()),
                "escaped": trace.escaped,
                "steps": trace.steps(),
            }));
        }

        let grid_a = default_epsilon_grid(&space.distinct_distances(), &Rational::new(1, 2));
        let cond_a = check_condition_a(space, map, &grid_a)?;

        let x0 = map.domain().next();
        let cond_b = match x0 {
            Some(x0) => {
                let available = crate::picard::orbit_points(map, x0, space.len() + 1).len();
                let horizon = available.saturating_sub(1).min(space.len());
                if horizon >= 2 {
                    let distances = orbit_distances(space, map, x0, horizon + 1);
                    let grid = default_epsilon_grid(&distances, &Rational::new(1, 2));
                    Some(check_condition_b(space, map, x0, &grid, horizon)?)
                } else {
                    None
                }
            }
            None => None,
        };
        let bound = match x0 {
            Some(x0) => Some(orbit_bound(space, map, x0, class.v, space.len())?),
            None => None,
        };

        let _ = writeln!(
            text,
            "  contractive: {} ({} violations){}",
            contractive.holds,
            contractive.violations.len(),
            if contractive_errata { " -- errata: published claim refuted" } else { "" }
        );
        if let Some(w) = contractive.violations.first() {
            let _ = writeln!(text, "    first witness ({}, {}): {} -> {}", w.labels.0, w.labels.1, w.before, w.after);
        }
        let fixed_labels: Vec<&str> = fixed.iter().map(|&p| space.label(p)).collect();
        let _ = writeln!(text, "  fixed points: [{}]", fixed_labels.join(", "));
        let _ = writeln!(text, "  condition (A) on default grid: {}", if cond_a.holds { "holds" } else { "refuted" });
        if let Some(b) = &cond_b {
            let _ = writeln!(text, "  condition (B) from first point: {}", if b.holds { "holds" } else { "refuted" });
        }
        if let Some(b) = &bound {
            let _ = writeln!(text, "  orbit bound from first point: {}", b.bound);
        }
        map_json = json!({
            "contractivity": contractive,
            "contractivity_errata": contractive_errata,
            "fixed_points": fixed_labels,
            "fixed_point_claim_upheld": fixed_ok,
            "orbits": orbits,
            "condition_a": cond_a,
            "condition_b": cond_b,
            "orbit_bound": bound,
        });
    }
    for e in &inst.errata {
        let _ = writeln!(text, "  note: {e}");
    }
    let _ = writeln!(text, "  overall: {}", if upheld { "claims upheld" } else { "claims refuted" });
    Ok(Outcome {
        status: status(upheld),
        json: json!({
            "command": "adjudicate",
            "scope": src.scope(),
            "result": {
                "gallery": inst.spec,
                "claimed_class": class,
                "polygon": polygon,
                "min_s": least,
                "compactness": inst.compactness,
                "map": map_json,
                "errata_notes": inst.errata,
                "upheld": upheld,
            }
        }),
        text,
    })
}
