//! `ftdim` — finite-type structure and local dimensions of self-similar
//! measures on the line and on the torus.
//!
//! Exit codes: 0 success; 1 run error (bad input, I/O); 2 usage error;
//! 3 truncated diagram; 4 undecided positivity; 5 undecided isolation.
//! Codes 3–5 are a pure function of the result document's flags.

use clap::{Args, Parser, Subcommand, ValueEnum};
use finitetype::model::Mode;
use finitetype::netgen::ClosureCaps;
use ftdim::artifacts::RunArtifacts;
use ftdim::cache::{key_material, run_cached, CacheOutcome};
use ftdim::pipeline::{
    analyze_doc, pisot_doc_from_poly, pisot_doc_from_spec, point_doc, table_doc, AnalyzeOptions,
    CliError,
};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "ftdim",
    version,
    about = "Finite-type structure and local dimensions of self-similar measures",
    long_about = "Builds exact transition diagrams for self-similar measures with a single \
contraction ratio, classifies their loop classes, and certifies bounds on the set of local \
dimensions, on the line or for the quotient measure on the torus."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full pipeline: validate, build the diagram, classify loops, bound dimensions
    Analyze(PipelineArgs),
    /// Dimension analysis with a condensed report (no diagram listings)
    Dims(PipelineArgs),
    /// Emit the reduced transition diagram as DOT
    Diagram(DiagramArgs),
    /// Local dimension at a single point
    Point(PointArgs),
    /// Convolution comparison table: line lower bounds vs torus upper bounds
    CantorTable(TableArgs),
    /// Pisot certification for a spec's 1/rho or an explicit polynomial
    CheckPisot(PisotArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Line,
    Torus,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Line => Mode::Line,
            ModeArg::Torus => Mode::Torus,
        }
    }
}

#[derive(Args)]
struct PipelineArgs {
    /// Measure description file
    spec: PathBuf,
    /// Override the spec's own mode
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Node cap for the diagram closure
    #[arg(long, default_value_t = 20_000)]
    max_nodes: usize,
    /// Depth cap for the diagram closure
    #[arg(long, default_value_t = 400)]
    max_depth: usize,
    /// Cap on attractor membership questions during closure
    #[arg(long, default_value_t = 100_000)]
    max_questions: usize,
    /// Longest simple cycle length enumerated for inner intervals
    #[arg(long, default_value_t = finitetype::dims::DEFAULT_CYCLE_LEN)]
    cycle_len: u32,
    /// Walk depths LO/HI for outer intervals (LO: min column sums, HI: norm maxima)
    #[arg(long, default_value = "20/10")]
    norm_depths: String,
    /// Write report.txt, diagram.dot, CSV files and result.json here
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Result cache directory (defaults to <out-dir>/cache when --out-dir is set)
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Disable the result cache
    #[arg(long)]
    no_cache: bool,
    /// Seed for randomized search strategies.  Every search currently
    /// implemented is exhaustive and deterministic; the value is recorded in
    /// the result document so future randomized strategies stay reproducible.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the machine-readable JSON document instead of the text report
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DiagramArgs {
    /// Measure description file
    spec: PathBuf,
    /// Override the spec's own mode
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Node cap for the diagram closure
    #[arg(long, default_value_t = 20_000)]
    max_nodes: usize,
    /// Depth cap for the diagram closure
    #[arg(long, default_value_t = 400)]
    max_depth: usize,
    /// Cap on attractor membership questions during closure
    #[arg(long, default_value_t = 100_000)]
    max_questions: usize,
    /// Write the DOT file here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PointArgs {
    /// Measure description file
    spec: PathBuf,
    /// The point: a rational like 7/8 or an expression in rho like 1 - rho^2
    #[arg(allow_hyphen_values = true)]
    x: String,
    /// Maximum symbolic descent depth
    #[arg(long, default_value_t = 64)]
    depth: u32,
    /// Override the spec's own mode
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Node cap for the diagram closure
    #[arg(long, default_value_t = 20_000)]
    max_nodes: usize,
    /// Depth cap for the diagram closure
    #[arg(long, default_value_t = 400)]
    max_depth: usize,
    /// Cap on attractor membership questions during closure
    #[arg(long, default_value_t = 100_000)]
    max_questions: usize,
    /// Write report.txt and result.json here
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Result cache directory (defaults to <out-dir>/cache when --out-dir is set)
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Disable the result cache
    #[arg(long)]
    no_cache: bool,
    /// Seed recorded in the result document (current searches are exhaustive)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the machine-readable JSON document instead of the text report
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TableArgs {
    /// Smallest reciprocal contraction d
    #[arg(long, default_value_t = 3)]
    d_min: u32,
    /// Largest reciprocal contraction d
    #[arg(long, default_value_t = 5)]
    d_max: u32,
    /// Smallest convolution count m (defaults to --d-min; rows keep m >= d)
    #[arg(long)]
    m_min: Option<u32>,
    /// Largest convolution count m (defaults to --d-max)
    #[arg(long)]
    m_max: Option<u32>,
    /// Explicit "m,d" pairs separated by semicolons; overrides the ranges
    /// and may include boundary rows with m = d - 1
    #[arg(long)]
    pairs: Option<String>,
    /// Longest word length searched before giving up on a strict verdict
    #[arg(long, default_value_t = 4)]
    depth_cap: u32,
    /// Write the CSV here (in addition to any --out-dir artifacts)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write report.txt, table.csv and result.json here
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Seed recorded in the result document (current searches are exhaustive)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the machine-readable JSON document instead of the text report
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PisotArgs {
    /// Measure description file; checks whether 1/rho is a Pisot number
    spec: Option<PathBuf>,
    /// Integer polynomial coefficients, ascending degree, e.g. "-1 -1 1";
    /// checks the dominant root directly
    #[arg(long, conflicts_with = "spec", allow_hyphen_values = true)]
    poly: Option<String>,
    /// Print the machine-readable JSON document instead of the text report
    #[arg(long)]
    json: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    let _ = std::io::stdout().flush();
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Analyze(a) => pipeline_cmd(a, "analyze"),
        Cmd::Dims(a) => pipeline_cmd(a, "dims"),
        Cmd::Diagram(a) => diagram_cmd(a),
        Cmd::Point(a) => point_cmd(a),
        Cmd::CantorTable(a) => table_cmd(a),
        Cmd::CheckPisot(a) => pisot_cmd(a),
    }
}

/// Reads a spec file, attributing errors to the path.
fn read_spec(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| {
        CliError::Invalid(format!("cannot read {}: {e}", path.display()))
    })
}

/// Attributes a parse/validation error to the spec path.
fn at_path<T>(path: &Path, r: Result<T, CliError>) -> Result<T, CliError> {
    r.map_err(|e| match e {
        CliError::Model(err) => CliError::Spec {
            path: path.display().to_string(),
            err,
        },
        other => other,
    })
}

fn parse_norm_depths(s: &str) -> Result<(u32, u32), CliError> {
    let parts: Vec<&str> = s.split('/').collect();
    let parse_one = |t: &str| -> Result<u32, CliError> {
        t.trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("bad walk depth {t:?} in --norm-depths")))
    };
    match parts.as_slice() {
        [one] => {
            let v = parse_one(one)?;
            Ok((v, v))
        }
        [lo, hi] => Ok((parse_one(lo)?, parse_one(hi)?)),
        _ => Err(CliError::Invalid(format!(
            "--norm-depths expects LO/HI or a single depth, got {s:?}"
        ))),
    }
}

fn mode_repr(mode: Option<ModeArg>) -> &'static str {
    match mode {
        None => "as-spec",
        Some(ModeArg::Line) => "line",
        Some(ModeArg::Torus) => "torus",
    }
}

/// Cache directory for a run: explicit flag, else `<out-dir>/cache`.
fn effective_cache_dir(
    no_cache: bool,
    cache_dir: &Option<PathBuf>,
    out_dir: &Option<PathBuf>,
) -> Option<PathBuf> {
    if no_cache {
        return None;
    }
    cache_dir
        .clone()
        .or_else(|| out_dir.as_ref().map(|d| d.join("cache")))
}

/// Prints the chosen artifact view and writes the bundle if requested.
fn finish(
    artifacts: &RunArtifacts,
    json: bool,
    out_dir: &Option<PathBuf>,
) -> Result<i32, CliError> {
    if json {
        print!("{}", artifacts.result_json);
    } else {
        print!("{}", artifacts.report);
    }
    if let Some(dir) = out_dir {
        artifacts.write_to(dir)?;
        for e in &artifacts.cache_entries {
            let cdir = dir.join("cache");
            fs::create_dir_all(&cdir)?;
            fs::write(cdir.join(&e.name), &e.contents)?;
        }
    }
    Ok(artifacts.exit_code())
}

fn pipeline_cmd(a: PipelineArgs, kind: &str) -> Result<i32, CliError> {
    let text = read_spec(&a.spec)?;
    let (depth_lo, depth_hi) = parse_norm_depths(&a.norm_depths)?;
    let opts = AnalyzeOptions {
        mode: a.mode.map(Mode::from),
        caps: ClosureCaps {
            max_nodes: a.max_nodes,
            max_depth: a.max_depth,
            max_questions: a.max_questions,
        },
        cycle_len: a.cycle_len,
        depth_lo,
        depth_hi,
        seed: a.seed,
    };
    let params_repr = format!(
        "mode={} max_nodes={} max_depth={} max_questions={} cycle_len={} norm_depths={}/{} seed={}",
        mode_repr(a.mode),
        a.max_nodes,
        a.max_depth,
        a.max_questions,
        a.cycle_len,
        depth_lo,
        depth_hi,
        a.seed
    );
    let material = key_material(kind, &text, &params_repr);
    let cdir = effective_cache_dir(a.no_cache, &a.cache_dir, &a.out_dir);
    let CacheOutcome { doc, entries, .. } = at_path(
        &a.spec,
        run_cached(cdir.as_deref(), &material, || analyze_doc(&text, &opts, kind)),
    )?;
    let artifacts = RunArtifacts::from_doc(doc, entries);
    finish(&artifacts, a.json, &a.out_dir)
}

fn diagram_cmd(a: DiagramArgs) -> Result<i32, CliError> {
    let text = read_spec(&a.spec)?;
    let opts = AnalyzeOptions {
        mode: a.mode.map(Mode::from),
        caps: ClosureCaps {
            max_nodes: a.max_nodes,
            max_depth: a.max_depth,
            max_questions: a.max_questions,
        },
        ..AnalyzeOptions::default()
    };
    let doc = at_path(&a.spec, analyze_doc(&text, &opts, "diagram"))?;
    let dot = doc
        .structure
        .as_ref()
        .map(|s| s.dot.clone())
        .unwrap_or_default();
    match &a.out {
        Some(p) => fs::write(p, &dot)?,
        None => print!("{dot}"),
    }
    Ok(ftdim::doc::exit_code(&doc.flags))
}

fn point_cmd(a: PointArgs) -> Result<i32, CliError> {
    let text = read_spec(&a.spec)?;
    let opts = AnalyzeOptions {
        mode: a.mode.map(Mode::from),
        caps: ClosureCaps {
            max_nodes: a.max_nodes,
            max_depth: a.max_depth,
            max_questions: a.max_questions,
        },
        seed: a.seed,
        ..AnalyzeOptions::default()
    };
    let params_repr = format!(
        "mode={} max_nodes={} max_depth={} max_questions={} x={} depth={} seed={}",
        mode_repr(a.mode),
        a.max_nodes,
        a.max_depth,
        a.max_questions,
        a.x,
        a.depth,
        a.seed
    );
    let material = key_material("point", &text, &params_repr);
    let cdir = effective_cache_dir(a.no_cache, &a.cache_dir, &a.out_dir);
    let CacheOutcome { doc, entries, .. } = at_path(
        &a.spec,
        run_cached(cdir.as_deref(), &material, || {
            point_doc(&text, &a.x, a.depth, &opts)
        }),
    )?;
    let artifacts = RunArtifacts::from_doc(doc, entries);
    finish(&artifacts, a.json, &a.out_dir)
}

/// Expands table ranges into (m, d) pairs, grouped by d with m ascending.
fn range_pairs(a: &TableArgs) -> Result<Vec<(u32, u32)>, CliError> {
    if let Some(raw) = &a.pairs {
        let mut out = Vec::new();
        for item in raw.split(';') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (m, d) = item.split_once(',').ok_or_else(|| {
                CliError::Invalid(format!("--pairs items look like m,d; got {item:?}"))
            })?;
            let m: u32 = m.trim().parse().map_err(|_| {
                CliError::Invalid(format!("bad m in --pairs item {item:?}"))
            })?;
            let d: u32 = d.trim().parse().map_err(|_| {
                CliError::Invalid(format!("bad d in --pairs item {item:?}"))
            })?;
            out.push((m, d));
        }
        if out.is_empty() {
            return Err(CliError::Invalid("--pairs produced no rows".into()));
        }
        return Ok(out);
    }
    if a.d_min > a.d_max {
        return Err(CliError::Invalid("--d-min exceeds --d-max".into()));
    }
    let m_min = a.m_min.unwrap_or(a.d_min);
    let m_max = a.m_max.unwrap_or(a.d_max);
    if m_min > m_max {
        return Err(CliError::Invalid("--m-min exceeds --m-max".into()));
    }
    let mut pairs = Vec::new();
    for d in a.d_min..=a.d_max {
        for m in m_min.max(d)..=m_max {
            pairs.push((m, d));
        }
    }
    if pairs.is_empty() {
        return Err(CliError::Invalid(
            "the requested ranges contain no rows with m >= d".into(),
        ));
    }
    Ok(pairs)
}

fn table_cmd(a: TableArgs) -> Result<i32, CliError> {
    let pairs = range_pairs(&a)?;
    let doc = table_doc(&pairs, a.depth_cap, a.seed)?;
    let artifacts = RunArtifacts::from_doc(doc, vec![]);
    if let Some(p) = &a.out {
        if let Some(csv) = &artifacts.table_csv {
            fs::write(p, csv)?;
        }
    }
    finish(&artifacts, a.json, &a.out_dir)
}

fn pisot_cmd(a: PisotArgs) -> Result<i32, CliError> {
    let doc = match (&a.spec, &a.poly) {
        (Some(path), None) => {
            let text = read_spec(path)?;
            at_path(path, pisot_doc_from_spec(&text))?
        }
        (None, Some(poly)) => pisot_doc_from_poly(poly)?,
        _ => {
            return Err(CliError::Invalid(
                "give either a spec file or --poly coefficients".into(),
            ))
        }
    };
    let artifacts = RunArtifacts::from_doc(doc, vec![]);
    finish(&artifacts, a.json, &None)
}
