use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use uhlmann_cli::{plot_script, run, CliError, Format, Mode, SweepRequest};

#[derive(Parser)]
#[command(
    name = "uhlmann",
    version,
    about = "Uhlmann phase of a depolarized qubit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phase against decoherence efficiency Γ/ω.
    Fig2(Common),
    /// Uhlmann against interferometric phase for the unitary loop.
    Compare(Common),
    /// Closed form against discrete transport and the interferometer.
    Oracle(Common),
    /// Interference fringes and the phase read from them.
    Experiment(Common),
    /// Weak-decoherence log-log slopes.
    Slopes(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Equatorial opening angle in radians.
    #[arg(long)]
    phi: Option<f64>,
    /// Initial Bloch length.
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    gamma_min: Option<f64>,
    #[arg(long)]
    gamma_max: Option<f64>,
    /// Γ/ω for a single run (same as setting both bounds).
    #[arg(long, conflicts_with_all = ["gamma_min", "gamma_max"])]
    gamma: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Samples along the path for discrete transport.
    #[arg(long)]
    steps: Option<usize>,
    /// Phase-shifter settings in the interference scan.
    #[arg(long)]
    delta_samples: Option<usize>,
    #[arg(long)]
    r0_min: Option<f64>,
    #[arg(long)]
    r0_max: Option<f64>,
    #[arg(long)]
    r0_points: Option<usize>,
    #[arg(long)]
    phi_min: Option<f64>,
    #[arg(long)]
    phi_max: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Report angles in degrees.
    #[arg(long)]
    degrees: bool,
    /// Also write a gnuplot script for the data file.
    #[arg(long, requires = "out")]
    plot_script: Option<PathBuf>,
}

impl Common {
    fn request(&self, mode: Mode) -> SweepRequest {
        let mut r = SweepRequest::defaults(mode);
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { r.$field = v; })* };
        }
        set!(
            phi,
            gamma_min,
            gamma_max,
            points,
            steps,
            delta_samples,
            r0_min,
            r0_max,
            r0_points,
            phi_min,
            phi_max
        );
        r.r0 = self.r0.or(r.r0);
        if let Some(g) = self.gamma {
            r.gamma_min = g;
            r.gamma_max = g;
        }
        r
    }
}

fn execute(mode: Mode, opts: &Common) -> Result<bool, CliError> {
    let report = run(&opts.request(mode))?;
    let shown = if opts.degrees {
        report.in_degrees()
    } else {
        report.clone()
    };
    let format = match opts.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    let text = shown.render(format)?;
    match &opts.out {
        Some(path) => {
            std::fs::write(path, &text)?;
            if let Some(script) = &opts.plot_script {
                std::fs::write(script, plot_script(&shown, &path.to_string_lossy()))?;
            }
        }
        None => print!("{text}"),
    }
    if format == Format::Csv {
        for (key, value) in &report.summary {
            eprintln!("{key} = {value:.16e}");
        }
    }
    eprintln!("pass = {}", report.pass);
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let (mode, opts) = match &cli.command {
        Command::Fig2(o) => (Mode::Fig2, o),
        Command::Compare(o) => (Mode::UnitaryCompare, o),
        Command::Oracle(o) => (Mode::OracleCheck, o),
        Command::Experiment(o) => (Mode::Experiment, o),
        Command::Slopes(o) => (Mode::Slopes, o),
    };
    match execute(mode, opts) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
