use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dagreg::config::{Method, RunConfig};
use dagreg::pipeline;

#[derive(Parser)]
#[command(
    name = "dagreg",
    version,
    about = "Sparse multivariate regression with DAG-structured errors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic data bundle.
    Simulate(Flags),
    /// Run a sampler and write chains and estimates.
    Fit(Flags),
    /// Score estimates against a simulated ground truth.
    Evaluate(Flags),
    /// Generate, fit and evaluate several replicates.
    Replicate(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ess,
    Tes,
}

#[derive(Args)]
struct Flags {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    scenario: Option<u8>,
    #[arg(long)]
    setting: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    eta1: Option<f64>,
    #[arg(long)]
    eta2: Option<f64>,
    #[arg(long = "tau1-sq")]
    tau1_sq: Option<f64>,
    #[arg(long = "cap-Rj")]
    cap_rj: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Number of replicates for `replicate`.
    #[arg(long)]
    replicates: Option<usize>,
    /// Replicate index recorded by `evaluate`.
    #[arg(long)]
    replicate: Option<usize>,
    /// Bundle directory with X.csv and Y.csv.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    x: Option<PathBuf>,
    #[arg(long)]
    y: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    estimates: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write human-readable draws.
    #[arg(long)]
    export_csv: bool,
}

impl Flags {
    fn resolve(self) -> dagreg::Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let cli = RunConfig {
            method: self.method.map(|m| match m {
                MethodArg::Ess => Method::Ess,
                MethodArg::Tes => Method::Tes,
            }),
            scenario: self.scenario,
            setting: self.setting,
            seed: self.seed,
            n: self.n,
            p: self.p,
            q: self.q,
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            alpha: self.alpha,
            kappa: self.kappa,
            c1: self.c1,
            eta1: self.eta1,
            eta2: self.eta2,
            tau1_sq: self.tau1_sq,
            cap_rj: self.cap_rj,
            workers: self.workers,
            replicates: self.replicates,
            replicate: self.replicate,
            export_csv: self.export_csv.then_some(true),
            data: self.data,
            x: self.x,
            y: self.y,
            truth: self.truth,
            estimates: self.estimates,
            out: self.out,
            ..Default::default()
        };
        Ok(base.overlay(&cli))
    }
}

fn run(cli: Cli) -> dagreg::Result<()> {
    match cli.command {
        Command::Simulate(flags) => {
            let dir = pipeline::cmd_simulate(&flags.resolve()?)?;
            println!("wrote {}", dir.display());
        }
        Command::Fit(flags) => {
            let s = pipeline::cmd_fit(&flags.resolve()?)?;
            println!(
                "{}: {} draws, {:.3e} s/iteration, outputs in {}",
                s.method,
                s.draws,
                s.secs_per_iteration,
                s.out.display()
            );
        }
        Command::Evaluate(flags) => {
            for r in pipeline::cmd_evaluate(&flags.resolve()?)? {
                let value = r.value.map_or("undefined".into(), |v| format!("{v:.4}"));
                println!("{} {} {}", r.target, r.metric, value);
            }
        }
        Command::Replicate(flags) => {
            let report = pipeline::cmd_replicate(&flags.resolve()?)?;
            for o in report.outcomes.iter().filter(|o| o.error.is_some()) {
                eprintln!(
                    "replicate {} (seed {}) failed: {}",
                    o.replicate,
                    o.seed,
                    o.error.as_deref().unwrap_or("")
                );
            }
            for row in &report.table {
                let mean = row.mean.map_or("undefined".into(), |v| format!("{v:.4}"));
                println!(
                    "{} {} {} {} (n={}, undefined={})",
                    row.method, row.target, row.metric, mean, row.defined, row.undefined
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
