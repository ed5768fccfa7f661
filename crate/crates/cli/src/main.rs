use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pseudoherm_cli::config::ConfigBuilder;
use pseudoherm_cli::{emit, run, CliError, Command};

#[derive(Parser)]
#[command(name = "pseudoherm", version, about = "Spectra, sweeps, trajectories and invariant checks of the modulated-cavity model")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalues of the Schrödinger operator and the regime
    Spectrum(Common),
    /// Lowest eigenvalues, regime and peak photon number along g or delta
    Sweep(Common),
    /// Photon number, rho-norm, quadrature variances and ground-level phase over time
    Evolve(Common),
    /// Run the invariant suite; exit 1 if a check fails
    Verify(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    G,
    Delta,
}

#[derive(Args)]
struct Common {
    /// Flat key=value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Detuning; sets omega0 = delta + kappa/2
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Effective coupling; sets epsilon = 8 g / kappa
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    sweep_axis: Option<AxisArg>,
    #[arg(long, allow_hyphen_values = true)]
    sweep_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sweep_max: Option<f64>,
    #[arg(long)]
    sweep_steps: Option<usize>,
    #[arg(long)]
    sweep_levels: Option<usize>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Proceed at the exceptional point instead of exiting with code 3
    #[arg(long)]
    allow_ep: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Verify against rho = I (negative control)
    #[arg(long)]
    corrupt_metric: bool,
    /// Build C(t) with the sign of mu flipped (negative control)
    #[arg(long)]
    flip_c_sign: bool,
}

impl Common {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut put = |k: &'static str, x: Option<String>| {
            if let Some(x) = x {
                v.push((k, x));
            }
        };
        put("dim", self.dim.map(|x| x.to_string()));
        put("omega0", self.omega0.map(|x| x.to_string()));
        put("kappa", self.kappa.map(|x| x.to_string()));
        put("epsilon", self.epsilon.map(|x| x.to_string()));
        put("alpha", self.alpha.map(|x| x.to_string()));
        put("beta", self.beta.map(|x| x.to_string()));
        put("delta", self.delta.map(|x| x.to_string()));
        put("g", self.g.map(|x| x.to_string()));
        put("tmax", self.tmax.map(|x| x.to_string()));
        put("dt", self.dt.map(|x| x.to_string()));
        put(
            "sweep_axis",
            self.sweep_axis.map(|a| match a {
                AxisArg::G => "g".into(),
                AxisArg::Delta => "delta".into(),
            }),
        );
        put("sweep_min", self.sweep_min.map(|x| x.to_string()));
        put("sweep_max", self.sweep_max.map(|x| x.to_string()));
        put("sweep_steps", self.sweep_steps.map(|x| x.to_string()));
        put("sweep_levels", self.sweep_levels.map(|x| x.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put(
            "format",
            self.format.map(|f| match f {
                FormatArg::Csv => "csv".into(),
                FormatArg::Json => "json".into(),
            }),
        );
        put("threads", self.threads.map(|x| x.to_string()));
        if self.allow_ep {
            put("allow_ep", Some("true".into()));
        }
        if self.corrupt_metric {
            put("corrupt_metric", Some("true".into()));
        }
        if self.flip_c_sign {
            put("flip_c_sign", Some("true".into()));
        }
        v
    }
}

fn execute(cmd: Command, args: &Common) -> Result<i32, CliError> {
    let mut b = ConfigBuilder::new();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        b.apply_text(&text)?;
    }
    for (k, v) in args.overrides() {
        b.set(k, &v)?;
    }
    let cfg = b.build()?;
    let outcome = run(cmd, &cfg)?;
    emit(&outcome.table, cmd, &cfg)?;
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Cmd::Spectrum(a) => (Command::Spectrum, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Evolve(a) => (Command::Evolve, a),
        Cmd::Verify(a) => (Command::Verify, a),
    };
    match execute(cmd, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("pseudoherm {}: {e}", cmd.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
