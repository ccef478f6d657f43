mod commands;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use cryolink::error::Result;
use cryolink::scenario::{self, OutputFormat, Report, ScenarioConfig};
use cryolink::thermal::Segment;

#[derive(Parser, Debug)]
#[command(name = "cryolink", version, about = "Gaussian simulator for cryogenic and open-air quantum microwave links")]
struct Cli {
    /// Output stem; writes `<stem>.csv` (or `.json`) and `<stem>.summary.txt`.
    /// Without it, records go to stdout and the summary to stderr.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, default_value = "csv")]
    format: String,

    /// Reject unknown config keys.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bose-Einstein occupation over a frequency x temperature grid.
    Occupancy(OccupancyArgs),
    /// Free-space link budget with aperture gains and atmospheric absorption.
    Linkbudget(LinkArgs),
    /// Segmented or continuous waveguide carrying one arm of a squeezed pair.
    Waveguide(WaveguideArgs),
    /// Quantum illumination error exponents.
    Illuminate(IlluminateArgs),
    /// Continuous-variable teleportation through a lossy resource.
    Teleport(TeleportArgs),
    /// Recompute the reference path-loss and absorption table.
    Table1,
    /// Run a TOML scenario.
    Run { config: PathBuf },
    /// Atmospheric attenuation curve from a CSV table.
    Attenuation {
        table: PathBuf,
        #[arg(long)]
        min_ghz: Option<f64>,
        #[arg(long)]
        max_ghz: Option<f64>,
    },
}

#[derive(Args, Debug)]
pub struct OccupancyArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub frequency_hz: Vec<f64>,
    #[arg(long, required = true, num_args = 1..)]
    pub temperature_k: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum AtmosphereArg {
    Bundled,
    None,
    Path(PathBuf),
}

impl FromStr for AtmosphereArg {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "bundled" => AtmosphereArg::Bundled,
            "none" => AtmosphereArg::None,
            p => AtmosphereArg::Path(PathBuf::from(p)),
        })
    }
}

#[derive(Args, Debug)]
pub struct LinkArgs {
    #[arg(long)]
    pub wavelength_m: f64,
    #[arg(long)]
    pub distance_km: f64,
    #[arg(long)]
    pub tx_aperture_m: f64,
    #[arg(long)]
    pub rx_aperture_m: f64,
    /// Absorbing portion of the path; defaults to min(distance, 10 km).
    #[arg(long)]
    pub absorption_path_km: Option<f64>,
    /// `bundled`, `none`, or a CSV path.
    #[arg(long, default_value = "bundled")]
    pub atmosphere: AtmosphereArg,
    #[arg(long, default_value_t = 1.0)]
    pub efficiency_ratio: f64,
    #[arg(long, requires = "load_ohm")]
    pub source_ohm: Option<f64>,
    #[arg(long, requires = "source_ohm")]
    pub load_ohm: Option<f64>,
}

#[derive(Args, Debug)]
pub struct WaveguideArgs {
    #[arg(long)]
    pub frequency_hz: f64,
    /// `LENGTH_KM:DB_PER_KM:TEMPERATURE_K`, repeat for each segment in order.
    #[arg(long, required = true, value_parser = commands::parse_segment)]
    pub segment: Vec<Segment>,
    /// Integrate the line as a continuum instead of composing segments.
    #[arg(long)]
    pub continuous: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub step_tolerance: f64,
    #[arg(long, default_value_t = 1.0)]
    pub squeezing_nepers: f64,
}

#[derive(Args, Debug)]
pub struct IlluminateArgs {
    #[arg(long)]
    pub reflectivity_ratio: f64,
    #[arg(long)]
    pub signal_photons: f64,
    #[arg(long)]
    pub background_photons: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub mode_pairs: u64,
    #[arg(long, default_value = "finite_background", value_parser = ["finite_background", "asymptotic"])]
    pub model: String,
    /// Also compute the Chernoff exponent numerically in the Fock basis.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 80)]
    pub fock_cutoff: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub max_trace_deficit: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Arm {
    /// The sender's half of the pair.
    A,
    /// The receiver's half.
    B,
}

impl Arm {
    pub fn mode(self) -> usize {
        match self {
            Arm::A => 0,
            Arm::B => 1,
        }
    }
}

#[derive(Args, Debug)]
pub struct TeleportArgs {
    #[arg(long)]
    pub squeezing_nepers: f64,
    #[arg(long, default_value_t = 0.0)]
    pub loss_db: f64,
    #[arg(long, default_value_t = 0.0)]
    pub bath_photons: f64,
    /// Which half of the pair crosses the lossy link.
    #[arg(long, value_enum, default_value = "b")]
    pub arm: Arm,
    #[arg(long, default_value_t = 1.0)]
    pub gain_ratio: f64,
}

fn emit(report: &Report, format: OutputFormat, out: Option<&Path>) -> Result<()> {
    let body = report.render(format)?;
    match out {
        Some(stem) => {
            if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let data = stem.with_extension(format.extension());
            let summary = stem.with_extension("summary.txt");
            fs::write(&data, body)?;
            fs::write(&summary, &report.summary)?;
            log::info!("wrote {} and {}", data.display(), summary.display());
        }
        None => {
            print!("{body}");
            eprint!("{}", report.summary);
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let format: OutputFormat = cli.format.parse()?;
    let out = cli.out.as_deref();
    let report = match &cli.command {
        Command::Occupancy(a) => commands::occupancy(a)?,
        Command::Linkbudget(a) => commands::link_budget(a)?,
        Command::Waveguide(a) => commands::waveguide(a)?,
        Command::Illuminate(a) => commands::illuminate(a)?,
        Command::Teleport(a) => commands::teleport(a)?,
        Command::Table1 => {
            let table = scenario::reproduce_table1()?;
            emit(&table.to_report(), format, out)?;
            return table.check();
        }
        Command::Run { config } => {
            let config = ScenarioConfig::load(config, cli.strict)?;
            scenario::run_scenario(&config)?
        }
        Command::Attenuation { table, min_ghz, max_ghz } => commands::attenuation(table, *min_ghz, *max_ghz)?,
    };
    emit(&report, format, out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
