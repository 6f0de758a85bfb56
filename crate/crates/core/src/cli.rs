//! The `charlab` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::dist::JointCharFunction;
use crate::feq::{is_in_dmk, GroupFunction};
use crate::group::{catalog, FiniteAbelianGroup};
use crate::harness::{
    self, csv_summary, derive_seed, parse_strict, sample_distribution, to_json_string,
    ConfigError, ExperimentConfig, HarnessError, Mode,
};
use crate::homs::CoefficientSystem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_CONFIG: i32 = 65;

#[derive(Parser, Debug)]
#[command(name = "charlab", version, about = "Characteristic functions and linear forms on finite abelian groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Group literal such as Z5 or Z2xZ4
    #[arg(long)]
    group: Option<String>,
    /// Coefficients as inline JSON, e.g. "[[1,1],[1,2]]"
    #[arg(long)]
    alphas: Option<String>,
    /// JSON config file; flags given on the command line win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// theorem1, theorem3, theorem4 or explore-remark2
    #[arg(long)]
    mode: Option<String>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Number of restarts
    #[arg(long, allow_negative_numbers = true)]
    restarts: Option<i64>,
    /// Membership tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Print the normalized config and stop
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check conditions 11 and 12 for a coefficient system
    CheckConditions(Common),
    /// Test membership of a joint characteristic function in D_{m,k}
    TestDmk {
        #[command(flatten)]
        common: Common,
        /// CSV table of the joint characteristic function on Y^m
        #[arg(long)]
        table: Option<PathBuf>,
        /// Number of coordinates of the table (defaults to the rows of --alphas)
        #[arg(long)]
        m: Option<usize>,
        /// Class index k (defaults to m - 1)
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Mass at 0 of the sampled marginals
        #[arg(long, default_value_t = 0.6)]
        floor: f64,
    },
    /// Run a seeded verification experiment
    Verify(RunArgs),
    /// Search for members when condition 11 fails
    Explore(RunArgs),
    /// List abelian groups up to an order, in invariant-factor form
    Catalog {
        #[arg(long)]
        max_order: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn config(errors: &[ConfigError]) -> Self {
        let lines: Vec<String> = errors.iter().map(|e| format!("config error at {e}")).collect();
        Failure::new(EXIT_CONFIG, lines.join("\n"))
    }
}

/// Reads, schema-checks and normalizes a config file.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let text = fs::read_to_string(path).map_err(|e| {
        vec![ConfigError {
            pointer: String::new(),
            message: format!("cannot read {}: {e}", path.display()),
        }]
    })?;
    ExperimentConfig::from_json(&text)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            }
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.message);
            f.code
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string())),
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::CheckConditions(common) => check_conditions(&common, stdout),
        Command::TestDmk {
            common,
            table,
            m,
            k,
            seed,
            tol,
            floor,
        } => test_dmk(&common, table.as_deref(), m, k, seed, tol, floor, stdout),
        Command::Verify(args) => run_experiment(&args, None, stdout),
        Command::Explore(args) => run_experiment(&args, Some(Mode::ExploreRemark2), stdout),
        Command::Catalog {
            max_order,
            format,
            out,
        } => {
            let groups = catalog(max_order as u64);
            let text = match format {
                Format::Json => {
                    let list: Vec<Value> = groups
                        .iter()
                        .map(|g| json!({"order": g.order(), "moduli": g.moduli(), "name": g.to_string()}))
                        .collect();
                    to_json_string(&list, true)
                }
                Format::Csv => {
                    let mut s = String::from("order,group\n");
                    for g in &groups {
                        s.push_str(&format!("{},{g}\n", g.order()));
                    }
                    s
                }
            };
            emit(&out, &text, stdout)?;
            Ok(EXIT_OK)
        }
    }
}

/// Config document from `--config` with inline flags written over it.
fn merged_document(common: &Common, run: Option<&RunArgs>) -> Result<Value, Failure> {
    let mut doc = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::new(EXIT_CONFIG, format!("cannot read {}: {e}", path.display()))
            })?;
            parse_strict(&text).map_err(|e| Failure::config(&[e]))?
        }
        None => Value::Object(Map::new()),
    };
    let Some(obj) = doc.as_object_mut() else {
        return Err(Failure::config(&[ConfigError {
            pointer: String::new(),
            message: "expected an object".into(),
        }]));
    };
    if let Some(g) = &common.group {
        obj.insert("group".into(), Value::String(g.clone()));
    }
    if let Some(a) = &common.alphas {
        let v = parse_strict(a).map_err(|e| {
            Failure::config(&[ConfigError {
                pointer: "/alphas".into(),
                message: e.message,
            }])
        })?;
        obj.insert("alphas".into(), v);
        // m and n follow the inline coefficients
        obj.remove("m");
        obj.remove("n");
    }
    if let Some(run) = run {
        if let Some(mode) = &run.mode {
            obj.insert("mode".into(), Value::String(mode.clone()));
        }
        let mut section = |key: &str, field: &str, v: Value| {
            let entry = obj.entry(key).or_insert_with(|| Value::Object(Map::new()));
            if let Some(o) = entry.as_object_mut() {
                o.insert(field.into(), v);
            }
        };
        if let Some(s) = run.seed {
            section("seeds", "master", json!(s));
        }
        if let Some(r) = run.restarts {
            section("seeds", "restarts", json!(r));
        }
        if let Some(t) = run.tol {
            section("tolerances", "membership", json!(t));
        }
    }
    Ok(doc)
}

fn load_config(common: &Common, run: Option<&RunArgs>) -> Result<ExperimentConfig, Failure> {
    let doc = merged_document(common, run)?;
    ExperimentConfig::from_value(&doc).map_err(|e| Failure::config(&e))
}

fn harness_failure(e: HarnessError) -> Failure {
    let code = match e {
        HarnessError::InvalidArgument(_) => EXIT_CONFIG,
        _ => EXIT_PRECONDITION,
    };
    Failure::new(code, format!("{}: {e}", e.kind()))
}

fn check_conditions(common: &Common, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let config = load_config(common, None)?;
    let system = config
        .system()
        .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    let c11 = system
        .check_condition_11()
        .map_err(|e| Failure::new(EXIT_PRECONDITION, e.to_string()))?;
    let c12 = if system.all_automorphisms() {
        let s = system
            .check_condition_12()
            .map_err(|e| Failure::new(EXIT_PRECONDITION, e.to_string()))?;
        Some(s)
    } else {
        None
    };
    let text = match common.format {
        Format::Json => {
            let mut out = Map::new();
            out.insert("condition11".into(), json!(c11.holds));
            out.insert("condition12".into(), json!(c12.as_ref().map(|s| s.holds)));
            if !c11.holds {
                out.insert("condition11_detail".into(), serde_json::to_value(&c11).expect("json"));
            }
            if let Some(s) = c12.as_ref().filter(|s| !s.holds) {
                out.insert("condition12_detail".into(), serde_json::to_value(s).expect("json"));
            }
            format!("{}\n", to_json_string(&Value::Object(out), false))
        }
        Format::Csv => {
            let c12 = c12.map_or("n/a".to_string(), |s| s.holds.to_string());
            format!("condition,holds\ncondition11,{}\ncondition12,{c12}\n", c11.holds)
        }
    };
    emit(&common.out, &text, stdout)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn test_dmk(
    common: &Common,
    table: Option<&Path>,
    m: Option<usize>,
    k: Option<usize>,
    seed: u64,
    tol: f64,
    floor: f64,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let joint = match table {
        Some(path) => {
            let literal = common
                .group
                .as_deref()
                .ok_or_else(|| Failure::new(EXIT_USAGE, "--table needs --group"))?;
            let base: FiniteAbelianGroup = literal
                .parse()
                .map_err(|e| Failure::new(EXIT_CONFIG, format!("/group: {e}")))?;
            let m = m.ok_or_else(|| Failure::new(EXIT_USAGE, "--table needs --m"))?;
            let power = base
                .power(m)
                .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
            let file = fs::File::open(path)
                .map_err(|e| Failure::new(EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))?;
            let f = GroupFunction::from_csv(&power, file)
                .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display())))?;
            JointCharFunction::new(&base, m, f.values().to_vec())
                .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?
        }
        None => {
            let config = load_config(common, None)?;
            let system: CoefficientSystem = config
                .system()
                .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
            let marginals = (0..system.n())
                .map(|i| sample_distribution(system.group(), derive_seed(seed, i as u64), floor))
                .collect::<Result<Vec<_>, _>>()
                .map_err(harness_failure)?;
            crate::dist::joint_of_linear_forms(&system, &marginals)
                .map_err(|e| Failure::new(EXIT_PRECONDITION, e.to_string()))?
        }
    };
    let k = k.unwrap_or(joint.m().saturating_sub(1));
    let verdict = is_in_dmk(&joint, k, tol).map_err(|e| {
        let code = match e {
            crate::feq::FeqError::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_PRECONDITION,
        };
        Failure::new(code, e.to_string())
    })?;
    let text = match common.format {
        Format::Json => to_json_string(&verdict, true),
        Format::Csv => format!(
            "member,residual\n{},{:.16e}\n",
            verdict.member, verdict.residual
        ),
    };
    emit(&common.out, &text, stdout)?;
    Ok(EXIT_OK)
}

fn run_experiment(args: &RunArgs, force: Option<Mode>, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let mut config = load_config(&args.common, Some(args))?;
    if let Some(mode) = force {
        config.mode = mode;
    }
    if args.dry_run {
        emit(&args.common.out, &to_json_string(&config.to_value(), true), stdout)?;
        return Ok(EXIT_OK);
    }
    match harness::run(&config) {
        Ok(report) => {
            let text = match args.common.format {
                Format::Json => to_json_string(&report, true),
                Format::Csv => csv_summary(&report),
            };
            emit(&args.common.out, &text, stdout)?;
            Ok(report.exit_code())
        }
        Err(e) => {
            let code = harness_failure_code(&e);
            if args.common.format == Format::Json {
                let doc = json!({
                    "mode": config.mode.as_str(),
                    "config": config.to_value(),
                    "error": e.kind(),
                    "message": e.to_string(),
                });
                emit(&args.common.out, &to_json_string(&doc, true), stdout)?;
            }
            Err(Failure::new(code, format!("{}: {e}", e.kind())))
        }
    }
}

fn harness_failure_code(e: &HarnessError) -> i32 {
    match e {
        HarnessError::InvalidArgument(_) => EXIT_CONFIG,
        _ => EXIT_PRECONDITION,
    }
}
