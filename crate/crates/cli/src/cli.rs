//! Subcommands: `gen`, `inspect`, `diagram`, `bench`, `serve`, `cache clear`.
//!
//! Exit status is 0 on success, 1 on a domain error (one line on stderr)
//! and 2 on a usage error.

use std::collections::BTreeMap;
use std::error::Error as StdError;
use std::ffi::OsString;
use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hfv_core::csr_model::{generate_synthetic, validate_dataset, write_dataset, SyntheticSpec};
use hfv_core::csr_parser::{bench_compare, bench_ladder, DatasetDir, DEFAULT_RUNS};
use hfv_core::layout::LayoutKind;
use hfv_core::project_cache::{clear_project, init_project};
use hfv_core::render::render_svg;
use hfv_core::units::{DisplayUnits, TemperatureUnit};
use hfv_core::Error;

use crate::pipeline::{build_view, DiagramRequest};
use crate::session::{Session, DEFAULT_EXPORT_HEIGHT, DEFAULT_EXPORT_WIDTH};

pub const PORT_ENV: &str = "HFV_PORT";
pub const DEFAULT_PORT: u16 = 8080;

type CliResult<T = ()> = Result<T, Box<dyn StdError>>;

#[derive(Debug, Parser)]
#[command(name = "hfv", version, about = "Heat-flow visualizer for block-structured thermal results")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Gen(GenArgs),
    /// Print dataset sizes and the submodel table.
    Inspect(InspectArgs),
    /// Render one timestep to SVG or DiagramSpec JSON.
    Diagram(DiagramArgs),
    /// Time the fast loader against the per-submodel baseline.
    Bench(BenchArgs),
    /// Serve the HTTP JSON API.
    Serve(ServeArgs),
    /// Manage project caches.
    Cache {
        #[command(subcommand)]
        action: CacheCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheCommand {
    /// Delete a project's manifest and cache files.
    Clear { project: PathBuf },
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub submodels: usize,
    #[arg(long)]
    pub nodes_per: usize,
    #[arg(long, default_value_t = 1)]
    pub timesteps: usize,
    /// Linear conductors per node.
    #[arg(long, default_value_t = 1.0)]
    pub linear_density: f64,
    /// Radiative conductors per node.
    #[arg(long, default_value_t = 0.5)]
    pub radiative_density: f64,
    #[arg(long, default_value_t = 250.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 350.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

impl GenArgs {
    pub fn spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            temp_range: (self.t_min, self.t_max),
            ..SyntheticSpec::new(self.submodels, self.nodes_per, self.timesteps, self.seed)
                .with_densities(self.linear_density, self.radiative_density)
        }
    }
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub dataset: PathBuf,
    /// Also read every body and record and report violations.
    #[arg(long)]
    pub validate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TempUnitArg {
    #[value(name = "K", alias = "k")]
    Kelvin,
    #[value(name = "C", alias = "c")]
    Celsius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Svg,
    Json,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub timestep: usize,
    #[arg(long, default_value_t = LayoutKind::Circular)]
    pub layout: LayoutKind,
    /// Comma-separated rectangles to keep (after grouping).
    #[arg(long, value_delimiter = ',')]
    pub include: Option<Vec<String>>,
    /// `NAME=A,B` merges submodels A and B into NAME; repeatable.
    #[arg(long = "group", value_name = "NAME=A,B")]
    pub groups: Vec<String>,
    /// Hide radiative edges below this many watts.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "K")]
    pub temp_unit: TempUnitArg,
    /// Defaults to JSON for `.json` outputs, SVG otherwise.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, default_value_t = DEFAULT_EXPORT_WIDTH)]
    pub width: u32,
    #[arg(long, default_value_t = DEFAULT_EXPORT_HEIGHT)]
    pub height: u32,
    /// Reuse and extend this project cache.
    #[arg(long)]
    pub project: Option<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
}

impl DiagramArgs {
    pub fn request(&self) -> CliResult<DiagramRequest> {
        let mut groups = BTreeMap::new();
        for g in &self.groups {
            let (name, members) = g
                .split_once('=')
                .ok_or_else(|| format!("--group expects NAME=A,B, got `{g}`"))?;
            let members: Vec<String> = members
                .split(',')
                .map(str::trim)
                .filter(|m| !m.is_empty())
                .map(str::to_owned)
                .collect();
            if groups.insert(name.trim().to_owned(), members).is_some() {
                return Err(format!("group `{name}` given twice").into());
            }
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(format!("--threshold must be >= 0, got {}", self.threshold).into());
        }
        Ok(DiagramRequest {
            timestep: self.timestep,
            include: self.include.clone(),
            groups,
            radiant_threshold: self.threshold,
            layout: self.layout,
            seed: self.seed,
            units: DisplayUnits {
                temperature: match self.temp_unit {
                    TempUnitArg::Kelvin => TemperatureUnit::Kelvin,
                    TempUnitArg::Celsius => TemperatureUnit::Celsius,
                },
                ..Default::default()
            },
        })
    }

    fn output_format(&self) -> OutputFormat {
        self.format.unwrap_or_else(|| {
            match self.out.extension().and_then(|e| e.to_str()) {
                Some(ext) if ext.eq_ignore_ascii_case("json") => OutputFormat::Json,
                _ => OutputFormat::Svg,
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// One dataset, or several for a scaling ladder.
    #[arg(required = true)]
    pub datasets: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    pub runs: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    pub dataset: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Overridden by the HFV_PORT environment variable.
    #[arg(long, default_value_t = DEFAULT_PORT)]
    pub port: u16,
    /// Cache requested timesteps in this project directory.
    #[arg(long)]
    pub project: Option<PathBuf>,
}

/// `HFV_PORT` wins over `--port` when set.
pub fn resolve_port(flag: u16, env: Option<&str>) -> CliResult<u16> {
    match env {
        None => Ok(flag),
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{PORT_ENV}=`{v}` is not a valid port").into()),
    }
}

/// Parses `args` and runs the command.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Gen(args) => gen(&args),
        Command::Inspect(args) => inspect(&args),
        Command::Diagram(args) => diagram(&args),
        Command::Bench(args) => bench(&args),
        Command::Serve(args) => serve(&args),
        Command::Cache {
            action: CacheCommand::Clear { project },
        } => {
            clear_project(&project)?;
            println!("cleared {}", project.display());
            Ok(())
        }
    }
}

fn gen(args: &GenArgs) -> CliResult {
    let ds = generate_synthetic(&args.spec())?;
    write_dataset(&ds, &args.out)?;
    let s = ds.sizes();
    println!(
        "wrote {}: {} submodels, {} nodes, {} linear, {} radiative, {} timesteps",
        args.out.display(),
        s.num_submodels,
        s.num_nodes,
        s.num_linear,
        s.num_radiative,
        s.num_timesteps
    );
    Ok(())
}

fn inspect(args: &InspectArgs) -> CliResult {
    let d = DatasetDir::new(&args.dataset);
    let s = d.read_sizes()?;
    let index = d.parse_node_tree_fast()?;
    println!("submodels  {}", s.num_submodels);
    println!("nodes      {}", s.num_nodes);
    println!("linear     {}", s.num_linear);
    println!("radiative  {}", s.num_radiative);
    println!("timesteps  {}", s.num_timesteps);
    println!();
    let width = index.names().map(str::len).max().unwrap_or(4).max(4);
    println!("{:>5}  {:<width$}  {:>10}  {:>10}  {:>10}", "block", "name", "nodes", "first", "end");
    for (k, e) in index.entries().iter().enumerate() {
        println!(
            "{k:>5}  {:<width$}  {:>10}  {:>10}  {:>10}",
            e.name,
            e.range.len(),
            e.range.start,
            e.range.end
        );
    }
    if args.validate {
        let report = validate_dataset(&args.dataset);
        println!();
        if report.is_empty() {
            println!("valid");
        } else {
            for v in &report.violations {
                println!("violation: {v}");
            }
            return Err(format!("{} violation(s)", report.violations.len()).into());
        }
    }
    Ok(())
}

fn diagram(args: &DiagramArgs) -> CliResult {
    let req = args.request()?;
    let d = DatasetDir::new(&args.dataset);
    let sizes = d.read_sizes()?;
    if req.timestep >= sizes.num_timesteps {
        return Err(Error::Bounds {
            what: "timestep",
            detail: format!("{} not below {}", req.timestep, sizes.num_timesteps),
        }
        .into());
    }
    let index = d.parse_node_tree_fast()?;
    let load_row = || -> hfv_core::Result<Vec<f64>> {
        Ok(d
            .load_temperatures(req.timestep..req.timestep + 1, 0..sizes.num_nodes)?
            .values)
    };
    let row = match &args.project {
        Some(project) => {
            let mut handle = init_project(project, &args.dataset).map_err(|e| match e {
                Error::StaleCache { .. } => format!("{e}; run `hfv cache clear {}`", project.display()).into(),
                e => Box::<dyn StdError>::from(e),
            })?;
            match handle.load_cached(req.timestep)? {
                Some(row) => row,
                None => {
                    let row = load_row()?;
                    handle.cache_timestep(req.timestep, &row)?;
                    row
                }
            }
        }
        None => load_row()?,
    };
    let conductors = d.load_conductors()?;
    let spec = build_view(&index, &conductors, &row, &req)?;
    let body = match args.output_format() {
        OutputFormat::Svg => render_svg(&spec, args.width, args.height),
        OutputFormat::Json => serde_json::to_string_pretty(&spec)? + "\n",
    };
    write_output(&args.out, body.as_bytes())
}

fn write_output(path: &Path, bytes: &[u8]) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
    }
    fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn bench(args: &BenchArgs) -> CliResult {
    let report = match args.datasets.as_slice() {
        [one] => bench_compare(one, args.runs)?,
        many => bench_ladder(many, args.runs)?,
    };
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(path) => write_output(path, json.as_bytes()),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn serve(args: &ServeArgs) -> CliResult {
    let port = resolve_port(args.port, std::env::var(PORT_ENV).ok().as_deref())?;
    let session = Arc::new(Session::open(&args.dataset, args.project.as_deref())?);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(crate::server::serve(session, SocketAddr::new(args.host, port)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_port_wins() {
        assert_eq!(resolve_port(8080, None).unwrap(), 8080);
        assert_eq!(resolve_port(8080, Some("9001")).unwrap(), 9001);
        assert!(resolve_port(8080, Some("http")).is_err());
    }

    #[test]
    fn group_flags_parse() {
        let cli = Cli::try_parse_from([
            "hfv", "diagram", "d", "--group", "G=A,B", "--group", "H=C", "--include", "G,H", "--temp-unit", "C",
            "--out", "x.json",
        ])
        .unwrap();
        let Command::Diagram(args) = cli.command else { panic!() };
        let req = args.request().unwrap();
        assert_eq!(req.groups["G"], vec!["A", "B"]);
        assert_eq!(req.include, Some(vec!["G".to_string(), "H".to_string()]));
        assert_eq!(req.units.temperature, TemperatureUnit::Celsius);
        assert_eq!(args.output_format(), OutputFormat::Json);
    }

    #[test]
    fn bad_group_and_threshold() {
        let parse = |extra: &[&str]| {
            let mut argv = vec!["hfv", "diagram", "d", "--out", "x.svg"];
            argv.extend_from_slice(extra);
            let Command::Diagram(args) = Cli::try_parse_from(argv).unwrap().command else { panic!() };
            args.request()
        };
        assert!(parse(&["--group", "nogroup"]).is_err());
        assert!(parse(&["--group", "G=A", "--group", "G=B"]).is_err());
        assert!(parse(&["--threshold=-1"]).is_err());
        assert!(parse(&[]).is_ok());
    }

    #[test]
    fn unknown_layout_is_usage_error() {
        let e = Cli::try_parse_from(["hfv", "diagram", "d", "--layout", "spiral", "--out", "x"]).unwrap_err();
        assert!(e.use_stderr());
    }
}
