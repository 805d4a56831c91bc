use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polariton_core::sweep::{self, emit, presets, Format, RunOptions, SweepPlan};
use polariton_core::{units, Error};

#[derive(Parser)]
#[command(name = "polariton", version, about = "Stationary states and thermodynamics of driven anharmonic polaritons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file.
    Run {
        config: PathBuf,
        /// Output file; each series goes to `<stem>_<label>.<ext>`. Prints CSV when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
        #[command(flatten)]
        opts: RunFlags,
    },
    /// Run a figure preset.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
        #[command(flatten)]
        opts: RunFlags,
    },
    /// List the figure presets.
    ListPresets,
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct RunFlags {
    /// Worker threads (default: logical cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Phonon truncation m_o for every series.
    #[arg(long)]
    mo: Option<usize>,
    /// Integration horizon in ps.
    #[arg(long)]
    horizon_ps: Option<f64>,
    /// Joint exciton-phonon driving generators.
    #[arg(long)]
    cross_terms: bool,
    /// Add direct-integrator comparison columns.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

fn apply_flags(plan: &mut SweepPlan, flags: &RunFlags) -> polariton_core::Result<()> {
    plan.map_base(|s| {
        if let Some(mo) = flags.mo {
            s.m_o = mo;
        }
        if let Some(ps) = flags.horizon_ps {
            s.t_final = units::ps_to_inv_ev(ps);
        }
        if flags.cross_terms {
            s.cross_terms = true;
        }
    });
    if let Some(mo) = flags.mo {
        for s in &mut plan.series {
            s.max_mo = s.max_mo.max(mo);
        }
    }
    plan.validate()
}

fn execute(plan: &SweepPlan, flags: &RunFlags, format: Format, out: Option<&Path>) -> polariton_core::Result<()> {
    let opts = RunOptions { workers: flags.workers, oracle: flags.oracle };
    let tables = sweep::run_plan(plan, opts)?;
    for t in &tables {
        let failed = t.failures();
        if failed > 0 {
            eprintln!("warning: series `{}`: {failed} of {} points failed", t.label, t.rows.len());
        }
        let unconverged = t.rows.iter().filter(|r| r.record.as_ref().is_some_and(|x| !x.stationary)).count();
        if unconverged > 0 {
            eprintln!("warning: series `{}`: {unconverged} points did not reach stationarity", t.label);
        }
    }
    match out {
        Some(path) => {
            for p in sweep::write_plan_results(plan, &tables, format, path)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for t in &tables {
                let body = match format {
                    Format::Csv => emit::to_csv(t),
                    Format::Json => emit::to_json(t),
                };
                if tables.len() > 1 {
                    let _ = writeln!(stdout, "# series {}", t.label);
                }
                let _ = stdout.write_all(body.as_bytes());
            }
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> polariton_core::Result<()> {
    match cli.command {
        Command::Run { config, out, format, opts } => {
            let mut plan = sweep::load_config(&config)?;
            apply_flags(&mut plan, &opts)?;
            execute(&plan, &opts, format.into(), out.as_deref())
        }
        Command::Preset { name, out, format, opts } => {
            let mut plan = presets::preset(&name)?;
            apply_flags(&mut plan, &opts)?;
            execute(&plan, &opts, format.into(), Some(&out))
        }
        Command::ListPresets => {
            for plan in presets::figure_presets() {
                let points: usize = plan.series.iter().map(|s| s.values.len()).sum();
                println!("{:<7} {:>2} series {:>4} points  {}", plan.name, plan.series.len(), points, plan.notes);
            }
            Ok(())
        }
        Command::Validate { config } => {
            let plan = sweep::load_config(&config)?;
            let points: usize = plan.series.iter().map(|s| s.values.len()).sum();
            println!("ok: {} series, {points} points", plan.series.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code().clamp(1, 255) as u8
}
