//! `sawlab` command-line front end.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use output::{emit, render_json, stamp, Format, Report};
use sawlab::graphs::{self, catalog, GraphError, Model, PeriodicCover, DEFAULT_MAX_VERTICES};
use sawlab::heights::{
    compute_d, compute_r, height_by_name, increase_repair, solution_space, verify_harmonic, verify_height_axioms,
    HeightError, RValue, DEFAULT_REPAIR_BOUND,
};
use sawlab::locality::{iso_radius, locality_scan, Family, LocalityError, ScanConfig, DEFAULT_SEARCH_BUDGET};
use sawlab::presentations::{self, ghf_report, parse_presentation};
use sawlab::presets;
use sawlab::saw::{count_bridges, count_saws, mu_bounds, CountTable, EnumerationConfig, SawError, TableDocument};

#[derive(Parser, Debug)]
#[command(name = "sawlab", version, about = "Self-avoiding walks, bridges and height functions")]
struct Cli {
    /// List models and embedded presets, then exit.
    #[arg(long, global = true)]
    preset_list: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Maximum search-tree nodes expanded during enumeration.
    #[arg(long, global = true, env = "SAWLAB_BUDGET")]
    budget: Option<u64>,
    /// Decimal digits for roots.
    #[arg(long, global = true, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    precision: u64,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Omit the `generated_at` field from JSON artifacts.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficient matrix rank, kernel and group height function of a presentation.
    Ghf {
        /// Embedded presentation preset.
        #[arg(long)]
        model: Option<String>,
        /// Presentation document (JSON).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Self-avoiding walk counts.
    Count {
        #[arg(long)]
        model: String,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Bridge counts for a height function.
    Bridges {
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "default")]
        height: String,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Connective-constant bounds from walk and bridge counts.
    Bounds {
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "default")]
        height: String,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Integer harmonic height function on a periodic graph.
    Harmonic {
        /// Periodic graph document (JSON).
        #[arg(long, visible_alias = "pg")]
        input: Option<PathBuf>,
        /// Embedded periodic-graph preset.
        #[arg(long)]
        model: Option<String>,
        /// Largest coefficient max-norm tried when combining basis solutions.
        #[arg(long, default_value_t = DEFAULT_REPAIR_BOUND)]
        bound: u32,
    },
    /// Check height-function axioms, harmonicity, d and r on a ball.
    Verify {
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "default")]
        height: String,
        #[arg(long, default_value_t = 4)]
        radius: usize,
        /// Search bound for r.
        #[arg(long, default_value_t = 4)]
        bound: usize,
    },
    /// Largest radius with isomorphic rooted balls.
    BallIso {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 6)]
        bound: usize,
    },
    /// Count agreement between the square lattice and a quotient family.
    Locality {
        #[arg(long, default_value = "cylinder")]
        family: String,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Family parameters, comma separated.
        #[arg(long = "m", value_delimiter = ',', default_values_t = vec![4, 5, 6, 7, 8, 9])]
        m_list: Vec<i64>,
    },
    /// List models and embedded presets.
    Presets,
}

enum Failure {
    Input(String),
    Budget(String),
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<HeightError> for Failure {
    fn from(e: HeightError) -> Self {
        match e {
            HeightError::Graph(g) => g.into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<SawError> for Failure {
    fn from(e: SawError) -> Self {
        match e {
            SawError::Graph(g) => g.into(),
            SawError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<LocalityError> for Failure {
    fn from(e: LocalityError) -> Self {
        if e.is_budget() {
            Failure::Budget(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

const VERDICT_NEGATIVE: u8 = 3;

struct Ctx {
    cli: Cli,
}

impl Ctx {
    fn enumeration(&self) -> EnumerationConfig {
        let defaults = EnumerationConfig::default();
        EnumerationConfig {
            threads: self.cli.threads.map(|t| t as usize),
            node_budget: self.cli.budget.unwrap_or(defaults.node_budget),
            ..defaults
        }
    }

    fn precision(&self) -> usize {
        self.cli.precision as usize
    }

    fn write_json(&self, doc: Value) -> Result<(), Failure> {
        let doc = stamp(doc, !self.cli.no_timestamp);
        Ok(emit(self.cli.output.as_deref(), &render_json(&doc))?)
    }

    fn write_report(&self, r: &Report) -> Result<(), Failure> {
        match self.cli.format {
            Format::Json => self.write_json(r.to_json()),
            Format::Csv => Ok(emit(self.cli.output.as_deref(), &r.to_csv())?),
        }
    }

    fn write_table(&self, doc: &TableDocument, kind: &str) -> Result<(), Failure> {
        match self.cli.format {
            Format::Csv => Ok(emit(self.cli.output.as_deref(), &doc.to_csv())?),
            Format::Json => {
                let mut v = doc.to_json();
                v["kind"] = json!(kind);
                self.write_json(v)
            }
        }
    }
}

fn parse_model(name: &str) -> Result<Model, Failure> {
    Ok(Model::parse(name)?)
}

fn default_n_max(model: &Model) -> usize {
    let g = catalog(model);
    match g.degree(&g.root()) {
        0..=3 => 14,
        4 => 12,
        _ => 8,
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn preset_listing() -> Report {
    Report::new()
        .field("models", graphs::MODEL_NAMES.iter().map(|s| s.to_string()).collect::<Vec<_>>())
        .field("presentations", presets::PRESENTATIONS.iter().map(|(n, _)| n.to_string()).collect::<Vec<_>>())
        .field("periodic_graphs", presets::PERIODIC_GRAPHS.iter().map(|(n, _)| n.to_string()).collect::<Vec<_>>())
}

fn cmd_ghf(ctx: &Ctx, model: &Option<String>, input: &Option<PathBuf>) -> Result<u8, Failure> {
    let p = match (model, input) {
        (_, Some(path)) => parse_presentation(&read(path)?).map_err(|e| Failure::Input(e.to_string()))?,
        (Some(name), None) => match presets::presentation_text(name) {
            Some(text) => parse_presentation(text).map_err(|e| Failure::Input(e.to_string()))?,
            None => return Err(Failure::Input(format!("no presentation preset `{name}`"))),
        },
        (None, None) => return Err(Failure::Input("ghf needs --model or --input".into())),
    };
    let r = ghf_report(&p);
    let mut report = Report::new()
        .field("name", r.name.clone().unwrap_or_default())
        .field("generators", r.generators)
        .field("relators", r.relators)
        .field("relator_families", r.relator_families)
        .field("rank", r.rank)
        .field("betti", r.betti)
        .field("exists", r.exists)
        .field("kernel", r.kernel.iter().map(|v| format!("({})", v.join(" "))).collect::<Vec<_>>());
    if let Some(gamma) = &r.gamma {
        let spec = presentations::GroupHeightSpec { gamma: gamma.clone() };
        let wd = presentations::verify_well_defined(&spec, &p, None, 0);
        report = report.field("gamma", gamma.clone()).field("d", r.d).field("well_defined", wd.well_defined);
    } else {
        report = report.field("verdict", "no group height function");
    }
    ctx.write_report(&report)?;
    Ok(if r.exists { 0 } else { VERDICT_NEGATIVE })
}

fn count_with_partial(ctx: &Ctx, result: Result<CountTable, SawError>, kind: &str) -> Result<u8, Failure> {
    match result {
        Ok(t) => {
            ctx.write_table(&TableDocument::from_counts(&t), kind)?;
            Ok(0)
        }
        Err(SawError::BudgetExceeded { budget, partial }) => {
            ctx.write_table(&TableDocument::from_counts(&partial), kind)?;
            Err(Failure::Budget(format!(
                "node budget of {budget} exceeded; partial table complete up to n = {}",
                partial.n_max()
            )))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_count(ctx: &Ctx, model: &str, n_max: Option<usize>) -> Result<u8, Failure> {
    let model = parse_model(model)?;
    let n = n_max.unwrap_or_else(|| default_n_max(&model));
    let g = catalog(&model);
    count_with_partial(ctx, count_saws(g.as_ref(), n, &ctx.enumeration()), "saw")
}

fn cmd_bridges(ctx: &Ctx, model: &str, height: &str, n_max: Option<usize>) -> Result<u8, Failure> {
    let model = parse_model(model)?;
    let n = n_max.unwrap_or_else(|| default_n_max(&model));
    let g = catalog(&model);
    let h = height_by_name(&model, height, n)?;
    count_with_partial(ctx, count_bridges(g.as_ref(), &h, n, &ctx.enumeration()), "bridge")
}

fn cmd_bounds(ctx: &Ctx, model: &str, height: &str, n_max: Option<usize>) -> Result<u8, Failure> {
    let model = parse_model(model)?;
    let n = n_max.unwrap_or_else(|| default_n_max(&model));
    if n == 0 {
        return Err(Failure::Input("bounds need --n-max >= 1".into()));
    }
    let g = catalog(&model);
    let h = height_by_name(&model, height, n)?;
    let cfg = ctx.enumeration();
    let sigma = count_saws(g.as_ref(), n, &cfg)?;
    let bridges = count_bridges(g.as_ref(), &h, n, &cfg)?;
    let report = mu_bounds(&sigma, &bridges, ctx.precision());
    ctx.write_table(&TableDocument::from_bounds(&report), "bounds")?;
    Ok(0)
}

fn cmd_harmonic(ctx: &Ctx, input: &Option<PathBuf>, model: &Option<String>, bound: u32) -> Result<u8, Failure> {
    let (name, pg) = match (input, model) {
        (Some(path), _) => {
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (name, graphs::parse_periodic_graph(&read(path)?)?)
        }
        (None, Some(name)) => match presets::periodic_text(name) {
            Some(text) => (name.clone(), graphs::parse_periodic_graph(text)?),
            None => return Err(Failure::Input(format!("no periodic preset `{name}`"))),
        },
        (None, None) => return Err(Failure::Input("harmonic needs --pg/--input or --model".into())),
    };
    let basis = solution_space(&pg)?;
    let repaired = match increase_repair(&pg, &basis, bound) {
        Ok(r) => r,
        Err(e @ (HeightError::NoHeightFunction | HeightError::SearchExhausted { .. })) => {
            ctx.write_report(&Report::new().field("name", name).field("exists", false).field("verdict", e.to_string()))?;
            return Ok(VERDICT_NEGATIVE);
        }
        Err(e) => return Err(e.into()),
    };
    let h = repaired.height_function(&pg);
    let cover = PeriodicCover::new(&name, pg.clone());
    let axioms = verify_height_axioms(&cover, &h, 4, DEFAULT_MAX_VERTICES)?;
    let harmonic = verify_harmonic(&cover, &h, 4, DEFAULT_MAX_VERTICES)?;
    let export = repaired.export(&pg);
    match ctx.cli.format {
        Format::Json => {
            let mut v = serde_json::to_value(&export).expect("export serializes");
            v["name"] = json!(name);
            v["axioms_radius_4"] = json!(axioms.passed);
            v["harmonic_radius_4"] = json!(harmonic.harmonic);
            ctx.write_json(v)?;
        }
        Format::Csv => {
            let witnesses: Vec<String> = export
                .witnesses
                .iter()
                .map(|w| format!("{}:{}{:?}<{}{:?}", w.orbit, w.lower.orbit, w.lower.shift, w.higher.orbit, w.higher.shift))
                .collect();
            ctx.write_report(
                &Report::new()
                    .field("name", name)
                    .field("exists", true)
                    .field("lambda", export.lambda.clone())
                    .field("offsets", export.offsets.clone())
                    .field("coefficients", export.coefficients.clone())
                    .field("scale", export.scale.clone())
                    .field("integer_lambda", export.integer_lambda.clone())
                    .field("integer_offsets", export.integer_offsets.clone())
                    .field("witnesses", witnesses)
                    .field("axioms_radius_4", axioms.passed)
                    .field("harmonic_radius_4", harmonic.harmonic),
            )?;
        }
    }
    Ok(0)
}

fn cmd_verify(ctx: &Ctx, model: &str, height: &str, radius: usize, bound: usize) -> Result<u8, Failure> {
    let model = parse_model(model)?;
    let g = catalog(&model);
    let h = height_by_name(&model, height, radius + bound + 1)?;
    let axioms = verify_height_axioms(g.as_ref(), &h, radius, DEFAULT_MAX_VERTICES)?;
    let mut report = Report::new()
        .field("model", model.name())
        .field("height", h.name.clone())
        .field("radius", radius)
        .field("axioms", axioms.passed)
        .field("vertices_checked", axioms.vertices_checked);
    if let Some(c) = &axioms.counterexample {
        report = report.field("counterexample", format!("{c:?}"));
        ctx.write_report(&report)?;
        return Ok(VERDICT_NEGATIVE);
    }
    let harmonic = verify_harmonic(g.as_ref(), &h, radius, DEFAULT_MAX_VERTICES)?;
    let d = compute_d(g.as_ref(), &h, radius, DEFAULT_MAX_VERTICES)?;
    let r = match compute_r(g.as_ref(), &h, bound, DEFAULT_MAX_VERTICES)? {
        RValue::Exact(r) => r.to_string(),
        RValue::ExceedsBound(b) => format!(">{b}"),
    };
    report = report
        .field("harmonic", harmonic.harmonic)
        .field("defects", harmonic.distinct_defects().iter().map(|q| q.to_string()).collect::<Vec<_>>())
        .field("d", d)
        .field("r", r);
    ctx.write_report(&report)?;
    Ok(0)
}

fn cmd_ball_iso(ctx: &Ctx, a: &str, b: &str, bound: usize) -> Result<u8, Failure> {
    let (ma, mb) = (parse_model(a)?, parse_model(b)?);
    let (ga, gb) = (catalog(&ma), catalog(&mb));
    let r = iso_radius(ga.as_ref(), gb.as_ref(), bound, DEFAULT_MAX_VERTICES, DEFAULT_SEARCH_BUDGET)?;
    let verdicts: Vec<String> = r.verdicts.iter().map(|(k, ok)| format!("{k}:{ok}")).collect();
    match ctx.cli.format {
        Format::Json => ctx.write_json(json!({
            "a": ma.name(),
            "b": mb.name(),
            "bound": bound,
            "K": r.k.to_string(),
            "verdicts": r.verdicts.iter().map(|(k, ok)| json!({"k": k, "isomorphic": ok})).collect::<Vec<_>>(),
            "witness": r.witness.iter().map(|(x, y)| json!([x, y])).collect::<Vec<_>>(),
        }))?,
        Format::Csv => ctx.write_report(
            &Report::new()
                .field("a", ma.name())
                .field("b", mb.name())
                .field("bound", bound)
                .field("K", r.k.to_string())
                .field("verdicts", verdicts),
        )?,
    }
    Ok(0)
}

fn cmd_locality(ctx: &Ctx, family: &str, n_max: usize, m_list: &[i64]) -> Result<u8, Failure> {
    let family = Family::parse(family)?;
    let cfg = ScanConfig { enumeration: ctx.enumeration(), precision: ctx.precision(), ..ScanConfig::default() };
    let report = locality_scan(family, n_max, m_list, &cfg)?;
    match ctx.cli.format {
        Format::Json => ctx.write_json(serde_json::to_value(&report).expect("report serializes"))?,
        Format::Csv => emit(ctx.cli.output.as_deref(), &report.to_csv())?,
    }
    let discrepancies: usize = report.records.iter().map(|r| r.discrepancies.len()).sum();
    Ok(if discrepancies == 0 { 0 } else { VERDICT_NEGATIVE })
}

fn run(ctx: &Ctx) -> Result<u8, Failure> {
    if ctx.cli.preset_list {
        ctx.write_report(&preset_listing())?;
        return Ok(0);
    }
    let Some(command) = &ctx.cli.command else {
        return Err(Failure::Input("no command given; see --help".into()));
    };
    match command {
        Command::Ghf { model, input } => cmd_ghf(ctx, model, input),
        Command::Count { model, n_max } => cmd_count(ctx, model, *n_max),
        Command::Bridges { model, height, n_max } => cmd_bridges(ctx, model, height, *n_max),
        Command::Bounds { model, height, n_max } => cmd_bounds(ctx, model, height, *n_max),
        Command::Harmonic { input, model, bound } => cmd_harmonic(ctx, input, model, *bound),
        Command::Verify { model, height, radius, bound } => cmd_verify(ctx, model, height, *radius, *bound),
        Command::BallIso { a, b, bound } => cmd_ball_iso(ctx, a, b, *bound),
        Command::Locality { family, n_max, m_list } => cmd_locality(ctx, family, *n_max, m_list),
        Command::Presets => {
            ctx.write_report(&preset_listing())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let ctx = Ctx { cli: Cli::parse() };
    match run(&ctx) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("budget exceeded: {msg}");
            ExitCode::from(4)
        }
    }
}
