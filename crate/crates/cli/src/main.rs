mod commands;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use resfin::separability::InequalityCaps;
use resfin::{set_degree_cap, Error, DEFAULT_MAX_DEGREE};

use commands::Verdict;
use table::Format;

#[derive(Parser)]
#[command(name = "resfin", version, about = "Residual finiteness computations for free groups")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the table here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for sampled quotients in `verify`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ball sizes ω(n) for n = 0..=max.
    Growth {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        max: usize,
    },
    /// Maximum divisibility over the punctured ball.
    Dmax {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        cap: usize,
        #[arg(long)]
        normal: bool,
    },
    /// Residual girth of the free group.
    Girth {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        cap: usize,
    },
    /// Certified lcm witness for a comma-separated set of words.
    LcmWitness {
        #[arg(long)]
        set: String,
        /// Defaults to the largest generator used, and at least 2.
        #[arg(long)]
        rank: Option<usize>,
        /// Check the certificate against all regular quotients up to this order.
        #[arg(long)]
        verify_cap: Option<usize>,
    },
    /// Witness for {x, …, xⁿ} with its separation report.
    PowerWitness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Non-closing lifts of x^{lcm(1..m)} in covers of the figure eight.
    CoversScan {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        max_degree: usize,
    },
    /// Normal divisibility of the witness for {x, …, x^{lcm(1..n)}}.
    Theorem4 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cap: usize,
    },
    /// Heisenberg girth bounds for radii 1..=n.
    NilpotentGirth {
        #[arg(long)]
        n: usize,
    },
    /// Check inequality 1 (basic) or 2 (girth chain).
    Ineq {
        #[arg(long)]
        which: u8,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        cap: usize,
        #[arg(long, default_value_t = 6)]
        upper_bound_degree: usize,
    },
    /// ψ(n) = log lcm(1..n) for n = 1..=max.
    Pnt {
        #[arg(long)]
        max: u64,
    },
    /// Re-check a serialized certificate.
    Verify {
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long, default_value_t = 6)]
        order: usize,
        /// Random quotients added to the check, drawn from `--seed`.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Resource { .. } | Error::Overflow(_)) => 2,
        Some(Error::Internal(_)) => 3,
        _ => 1,
    }
}

fn apply_env_cap() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("RESFIN_MAX_DEGREE") {
        let cap: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("RESFIN_MAX_DEGREE must be an integer"))?;
        if cap == 0 {
            anyhow::bail!("RESFIN_MAX_DEGREE must be positive");
        }
        set_degree_cap(cap.min(DEFAULT_MAX_DEGREE));
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Verdict> {
    apply_env_cap()?;
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let (table, verdict) = match cli.command {
        Command::Growth { rank, max } => commands::growth(rank, max),
        Command::Dmax { rank, radius, cap, normal } => commands::dmax(rank, radius, cap, normal),
        Command::Girth { rank, radius, cap } => commands::girth(rank, radius, cap),
        Command::LcmWitness { set, rank, verify_cap } => commands::lcm_witness_cmd(&set, rank, verify_cap),
        Command::PowerWitness { n, cap } => commands::power_witness(n, cap),
        Command::CoversScan { m, max_degree } => commands::covers_scan(m, max_degree),
        Command::Theorem4 { n, cap } => commands::theorem4(n, cap),
        Command::NilpotentGirth { n } => commands::nilpotent_girth(n),
        Command::Ineq { which, rank, n, cap, upper_bound_degree } => {
            commands::ineq(which, rank, n, InequalityCaps { order: cap, upper_bound_degree })
        }
        Command::Pnt { max } => commands::pnt(max),
        Command::Verify { certificate, order, samples } => commands::verify(&certificate, order, samples, cli.seed),
    }?;
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(cli.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(cli.format, &mut w)?;
        }
    }
    Ok(verdict)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(v) => ExitCode::from(v.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
