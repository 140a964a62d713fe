//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 model parse error,
//! 3 model not in the database, 4 assessment undetermined or internal error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::{
    check_conjecture_4_5, edge_regularity_report, heatmap, stats_by, Dimension, ModelClass,
};
use crate::db::{build, Atom, BuildOptions, Database, DbError, Filter};
use crate::enumerate::{enumerate_keyed, EnumerationConfig};
use crate::identifiability::{assess_model, AssessConfig, AssessError, IdStatus, DEFAULT_SEED};
use crate::ioeq::{io_equation, model_coefficient_map, param_names, to_ode_system};
use crate::model::{parse_model, Model, ParamKey};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;
pub const EXIT_ASSESS: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "compartdb", version, about = "Identifiability database for linear compartment models")]
pub struct Cli {
    /// Database directory.
    #[arg(long, global = true)]
    pub db: Option<PathBuf>,
    /// Base seed for random specialization points.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads for assess and build (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Suppress progress and diagnostics other than errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List canonical models with a given number of compartments.
    Generate {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 2)]
        max_inputs: usize,
        /// Output file, `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Assess a model without a database.
    Assess(ModelArgs),
    /// Enumerate and assess every model up to a size, writing the database.
    Build {
        #[arg(long, default_value_t = 3)]
        max_nodes: usize,
    },
    /// Look up a model in the database, in its own labeling.
    Query(ModelArgs),
    /// List database records matching all given conditions.
    Filter(FilterArgs),
    /// Print the ODE system, input-output equations and coefficient map.
    Explain(ModelArgs),
    /// Class counts grouped by a model attribute.
    Stats {
        #[arg(long, value_enum, default_value_t = ByArg::Nodes)]
        by: ByArg,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
    },
    /// Inputs-by-leaks count grid as SVG plus CSV.
    Heatmap {
        #[arg(long, value_enum, default_value_t = ClassArg::All)]
        class: ClassArg,
        /// SVG path; the CSV goes next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for leak-removal counterexamples.
    CheckConjecture {
        #[arg(long, default_value_t = 3)]
        max_nodes: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Re-assess every counterexample from scratch.
        #[arg(long)]
        verify: bool,
    },
    /// Statuses of input-driven edges whose target leads to an output.
    EdgeReport {
        #[arg(long, default_value_t = 3)]
        max_nodes: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Model string, e.g. `graph=[[],[0]];in=[0];out=[0];leak=[0]`.
    #[arg(long)]
    pub model: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct FilterArgs {
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub inputs: Option<usize>,
    #[arg(long)]
    pub leaks: Option<usize>,
    #[arg(long)]
    pub strongly_connected: Option<bool>,
    #[arg(long, value_enum)]
    pub has_status: Option<StatusArg>,
    #[arg(long, value_enum, conflicts_with = "class")]
    pub all_status: Option<StatusArg>,
    #[arg(long, value_enum)]
    pub class: Option<StatusArg>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ByArg {
    Nodes,
    Leaks,
    Inputs,
    LeaksInputs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatusArg {
    Globally,
    Locally,
    Nonidentifiable,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassArg {
    All,
    Globally,
    Locally,
    Nonidentifiable,
}

impl StatusArg {
    fn status(self) -> IdStatus {
        match self {
            StatusArg::Globally => IdStatus::Globally,
            StatusArg::Locally => IdStatus::Locally,
            StatusArg::Nonidentifiable => IdStatus::NonIdentifiable,
        }
    }

    fn class(self) -> ModelClass {
        match self {
            StatusArg::Globally => ModelClass::Identifiable,
            StatusArg::Locally => ModelClass::LocallyIdentifiable,
            StatusArg::Nonidentifiable => ModelClass::NonIdentifiable,
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<AssessError> for Failure {
    fn from(e: AssessError) -> Self {
        let code = match e {
            AssessError::Config(_) => EXIT_USAGE,
            _ => EXIT_ASSESS,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<DbError> for Failure {
    fn from(e: DbError) -> Self {
        let code = match &e {
            DbError::NotFound(_) => EXIT_NOT_FOUND,
            DbError::Model(_) => EXIT_PARSE,
            DbError::Assess(AssessError::Config(_)) => EXIT_USAGE,
            DbError::Assess(_) => EXIT_ASSESS,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Out<'a> = &'a mut (dyn Write + Send);

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(&cli, out, err)) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn config(cli: &Cli) -> AssessConfig {
    AssessConfig {
        seed: cli.seed,
        ..AssessConfig::default()
    }
}

fn db_dir(cli: &Cli) -> Result<&Path, Failure> {
    cli.db
        .as_deref()
        .ok_or_else(|| Failure::usage("this command needs --db DIR"))
}

fn load_db(cli: &Cli) -> Result<Database, Failure> {
    Ok(Database::load(db_dir(cli)?)?)
}

fn parse(s: &str) -> Result<Model, Failure> {
    parse_model(s).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: e.to_string(),
    })
}

fn statuses_json(r: &BTreeMap<ParamKey, IdStatus>) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = r
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v.as_str())))
        .collect();
    serde_json::Value::Object(map)
}

fn print_statuses(
    out: Out,
    m: &Model,
    r: &BTreeMap<ParamKey, IdStatus>,
    format: Format,
) -> Result<(), Failure> {
    match format {
        Format::Json => {
            let v = json!({"model": m.encode(), "params": statuses_json(r)});
            writeln!(out, "{v}")?;
        }
        Format::Text => {
            writeln!(out, "{m}")?;
            for (k, v) in r {
                writeln!(out, "  {k}: {v}")?;
            }
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: Out, err: Out) -> Result<(), Failure> {
    match &cli.command {
        Command::Generate {
            nodes,
            max_inputs,
            out: dest,
        } => {
            let cfg = EnumerationConfig {
                n: *nodes,
                max_inputs: *max_inputs,
                outputs_exactly: 1,
            };
            let models =
                enumerate_keyed(&cfg).map_err(|e| Failure::usage(e.to_string()))?;
            let mut text = String::new();
            for (k, _) in &models {
                text.push_str(k);
                text.push('\n');
            }
            if dest == "-" {
                out.write_all(text.as_bytes())?;
            } else {
                fs::write(dest, text)?;
                if !cli.quiet {
                    writeln!(err, "wrote {} models to {dest}", models.len())?;
                }
            }
        }
        Command::Assess(a) => {
            let m = parse(&a.model)?;
            let r = assess_model(&m, &config(cli))?;
            print_statuses(out, &m, &r, a.format)?;
        }
        Command::Build { max_nodes } => {
            let dir = db_dir(cli)?;
            let opts = BuildOptions::new(*max_nodes, config(cli));
            let quiet = cli.quiet;
            let progress = move |n: usize, done: usize, total: usize| {
                if !quiet {
                    eprintln!("n={n}: {done}/{total}");
                }
            };
            let (db, report) = build(dir, &opts, &progress)?;
            for (key, secs) in &report.hotspots {
                writeln!(err, "hotspot: {key} took {secs:.1} s")?;
            }
            if !cli.quiet {
                writeln!(
                    err,
                    "{} records ({} assessed, {} reused)",
                    db.len(),
                    report.assessed,
                    report.resumed
                )?;
            }
            let counts: BTreeMap<String, usize> =
                db.counts().into_iter().map(|(n, c)| (n.to_string(), c)).collect();
            writeln!(out, "{}", json!({"records": db.len(), "counts": counts}))?;
        }
        Command::Query(a) => {
            let m = parse(&a.model)?;
            let db = load_db(cli)?;
            let r = db.get(&m)?;
            print_statuses(out, &m, &r, a.format)?;
        }
        Command::Filter(f) => {
            let db = load_db(cli)?;
            let mut atoms = Vec::new();
            if let Some(n) = f.nodes {
                atoms.push(Atom::Nodes(n));
            }
            if let Some(k) = f.inputs {
                atoms.push(Atom::Inputs(k));
            }
            if let Some(k) = f.leaks {
                atoms.push(Atom::Leaks(k));
            }
            if let Some(b) = f.strongly_connected {
                atoms.push(Atom::StronglyConnected(b));
            }
            if let Some(s) = f.has_status {
                atoms.push(Atom::HasStatus(s.status()));
            }
            if let Some(s) = f.all_status {
                atoms.push(Atom::AllStatus(s.status()));
            }
            if let Some(c) = f.class {
                atoms.push(Atom::Class(c.class()));
            }
            for (m, r) in db.filter(&Filter::new(atoms)) {
                print_statuses(out, m, r, f.format)?;
            }
        }
        Command::Explain(a) => explain(cli, a, out)?,
        Command::Stats { by, format } => {
            let db = load_db(cli)?;
            let dim = match by {
                ByArg::Nodes => Dimension::Nodes,
                ByArg::Leaks => Dimension::Leaks,
                ByArg::Inputs => Dimension::Inputs,
                ByArg::LeaksInputs => Dimension::LeaksInputs,
            };
            let table = stats_by(&db, dim);
            match format {
                TableFormat::Csv => out.write_all(table.to_csv().as_bytes())?,
                TableFormat::Json => {
                    let rows: Vec<serde_json::Value> = table
                        .rows
                        .iter()
                        .map(|(g, c)| {
                            json!({"group": g, "globally": c[0], "locally": c[1], "nonidentifiable": c[2]})
                        })
                        .collect();
                    writeln!(out, "{}", serde_json::Value::Array(rows))?;
                }
            }
        }
        Command::Heatmap { class, out: svg } => {
            let db = load_db(cli)?;
            let class = match class {
                ClassArg::All => None,
                ClassArg::Globally => Some(ModelClass::Identifiable),
                ClassArg::Locally => Some(ModelClass::LocallyIdentifiable),
                ClassArg::Nonidentifiable => Some(ModelClass::NonIdentifiable),
            };
            let h = heatmap(&db, class);
            fs::write(svg, h.to_svg())?;
            fs::write(svg.with_extension("csv"), h.to_csv())?;
            out.write_all(h.to_csv().as_bytes())?;
        }
        Command::CheckConjecture {
            max_nodes,
            format,
            verify,
        } => {
            let db = load_db(cli)?;
            let cfg = config(cli);
            let found = check_conjecture_4_5(&db, *max_nodes, &cfg)?;
            if *verify {
                for ce in &found {
                    if !ce.verify(&cfg)? {
                        return Err(Failure {
                            code: EXIT_ASSESS,
                            message: format!("counterexample {} failed re-verification", ce.model),
                        });
                    }
                }
            }
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string(&found).expect("json"))?,
                Format::Text => {
                    writeln!(out, "{} counterexample(s)", found.len())?;
                    for ce in &found {
                        write!(out, "{ce}")?;
                    }
                }
            }
        }
        Command::EdgeReport { max_nodes, format } => {
            let db = load_db(cli)?;
            let reports = edge_regularity_report(&db, *max_nodes);
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string(&reports).expect("json"))?,
                Format::Text => {
                    for r in &reports {
                        writeln!(
                            out,
                            "{:?}: {} edges, {} globally, {} locally, {} nonidentifiable",
                            r.reading, r.edges, r.globally, r.locally, r.nonidentifiable
                        )?;
                        for (m, e, s) in &r.exceptions {
                            writeln!(out, "  {m} {e}: {s}")?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn explain(cli: &Cli, a: &ModelArgs, out: Out) -> Result<(), Failure> {
    let m = parse(&a.model)?;
    let ode = to_ode_system(&m);
    let eqs: Vec<_> = m.outputs().into_iter().map(|o| io_equation(&m, o)).collect();
    let cmap = model_coefficient_map(&m);
    let names = param_names(&cmap.params);
    let coeffs: Vec<String> = cmap
        .coefficients
        .iter()
        .map(|c| c.display_with(&names).to_string())
        .collect();
    let statuses = assess_model(&m, &config(cli))?;
    match a.format {
        Format::Json => {
            let v = json!({
                "model": m.encode(),
                "ode": ode.to_string(),
                "io_equations": eqs.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "coefficients": coeffs,
                "params": statuses_json(&statuses),
            });
            writeln!(out, "{v}")?;
        }
        Format::Text => {
            writeln!(out, "model: {m}")?;
            writeln!(out, "\nODE system:")?;
            write!(out, "{ode}")?;
            writeln!(out, "\ninput-output equations:")?;
            for e in &eqs {
                writeln!(out, "{e}")?;
            }
            writeln!(out, "\ncoefficient map:")?;
            for (i, c) in coeffs.iter().enumerate() {
                writeln!(out, "  c{i} = {c}")?;
            }
            writeln!(out, "\nidentifiability:")?;
            for (k, v) in &statuses {
                writeln!(out, "  {k}: {v}")?;
            }
        }
    }
    Ok(())
}
