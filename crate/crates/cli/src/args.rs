use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mirrornoise::config::ConfigDocument;
use mirrornoise::mc::AmplitudeModel;
use mirrornoise::Port;

#[derive(Debug, Parser)]
#[command(name = "mirrornoise", version, about = "Vacuum-noise scans and oracle validations for a mirror-terminated beam splitter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic field-variance scan along z at one output port.
    Scan(ScanArgs),
    /// Photocurrent variance at port a1 versus probe position, with the open-port reference.
    ScanPhotocurrent(PhotocurrentArgs),
    /// Monte-Carlo convergence table over the (T, kz) grid.
    McValidate(McArgs),
    /// Truncated Fock-space oracle against the closed moment rules.
    FockValidate(FockArgs),
    /// Steady-state feedback gain sweep.
    Feedback(FeedbackArgs),
    /// Runs every suite with fixed seeds and writes one JSON summary.
    Report(ReportArgs),
}

/// Overrides for the optical configuration; the names match the JSON keys.
#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// JSON config file; explicit flags take precedence over its keys.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long = "T", value_name = "T", allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z2: Option<f64>,
    #[arg(long = "Z1", allow_hyphen_values = true)]
    pub big_z1: Option<f64>,
    #[arg(long = "Z2", allow_hyphen_values = true)]
    pub big_z2: Option<f64>,
    #[arg(long = "alpha_re", allow_hyphen_values = true)]
    pub alpha_re: Option<f64>,
    #[arg(long = "alpha_im", allow_hyphen_values = true)]
    pub alpha_im: Option<f64>,
    #[arg(long = "E_unit", allow_hyphen_values = true)]
    pub e_unit: Option<f64>,
    #[arg(long = "v_b2", allow_hyphen_values = true)]
    pub v_b2: Option<f64>,
    #[arg(long = "v_1sq", allow_hyphen_values = true)]
    pub v_1sq: Option<f64>,
    #[arg(long = "v_2sq", allow_hyphen_values = true)]
    pub v_2sq: Option<f64>,
}

impl ConfigArgs {
    pub fn flags(&self) -> ConfigDocument {
        ConfigDocument {
            t: self.t,
            k: self.k,
            omega: self.omega,
            z1: self.z1,
            z2: self.z2,
            big_z1: self.big_z1,
            big_z2: self.big_z2,
            alpha_re: self.alpha_re,
            alpha_im: self.alpha_im,
            e_unit: self.e_unit,
            v_b2: self.v_b2,
            v_1sq: self.v_1sq,
            v_2sq: self.v_2sq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; data goes to standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_parser = parse_port)]
    pub port: Port,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub z_min: f64,
    /// Defaults to one wavelength past `--z-min`.
    #[arg(long, allow_hyphen_values = true)]
    pub z_max: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PhotocurrentArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub z_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub z_max: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Samples per cell.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(10_000..))]
    pub n: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = AmplitudeArg::Fixed)]
    pub amplitude_model: AmplitudeArg,
    /// Draw the forward and reflected vacuum phases independently (negative control).
    #[arg(long)]
    pub decorrelate_phases: bool,
    /// Also write an MC variance scan along z at port a1 (with a JSON sidecar).
    #[arg(long, value_name = "PATH")]
    pub scan_out: Option<PathBuf>,
    #[arg(long, default_value_t = 33)]
    pub scan_steps: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AmplitudeArg {
    Fixed,
    Gaussian,
}

impl From<AmplitudeArg> for AmplitudeModel {
    fn from(a: AmplitudeArg) -> Self {
        match a {
            AmplitudeArg::Fixed => AmplitudeModel::Fixed,
            AmplitudeArg::Gaussian => AmplitudeModel::Gaussian,
        }
    }
}

#[derive(Debug, Args)]
pub struct FockArgs {
    #[arg(long, default_value_t = 40)]
    pub dim: usize,
    /// Single |alpha| to test instead of the default set {0.5, 1, 2}.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FeedbackArgs {
    /// Comma-separated loop gains.
    #[arg(long, default_value = "0,0.1,1,10,100,1000,1000000", value_parser = parse_gains, allow_hyphen_values = true)]
    pub gains: GainList,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub probe_z1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub out_z2: f64,
    /// Detection efficiency in (0, 1].
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub eta: f64,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Samples per Monte-Carlo cell.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(10_000..))]
    pub n: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

fn parse_port(s: &str) -> Result<Port, String> {
    s.parse()
}

/// Comma-separated list kept as one clap value.
#[derive(Debug, Clone, PartialEq)]
pub struct GainList(pub Vec<f64>);

fn parse_gains(s: &str) -> Result<GainList, String> {
    mirrornoise::parse_float_list(s).map(GainList).map_err(|e| e.to_string())
}
