use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use wpcn::config::{network_config, KeyValues, NETWORK_KEYS};
use wpcn::experiment::{self, ExperimentSpec};
use wpcn::oracle::GridSpec;
use wpcn::plot::{emit_plot, AxesSpec};
use wpcn::protocol::{self, default_gamma0, Mode, Simulation, StepRule, SUMMARY_HEADER};
use wpcn::{channel, verify, ChannelModel, NetworkConfig};

#[derive(Parser, Debug)]
#[command(name = "wpcn", version, about = "Harvest-then-transmit WPCN simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the online protocol once and write the per-epoch trace.
    Simulate(SimulateArgs),
    /// Sum rate and fairness against circuit power.
    Fig1(SweepArgs),
    /// Sum rate and fairness against the average power budget.
    Fig2(SweepArgs),
    /// Closed form against KKT, grid-search and concavity audits.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, env = "WPCN_SEED")]
    seed: Option<u64>,

    /// Number of fading epochs per run.
    #[arg(long)]
    epochs: Option<u64>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,

    #[arg(long, default_value = "pf")]
    mode: Mode,

    /// Price step; defaults to 0.01 / P_avg.
    #[arg(long)]
    gamma0: Option<f64>,

    #[arg(long, default_value = "scaled")]
    step_rule: StepRule,

    /// Replay fading gains from a CSV written by a previous run.
    #[arg(long)]
    channels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,

    /// Restrict the sweep to one mode.
    #[arg(long)]
    mode: Option<Mode>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, env = "WPCN_SEED", default_value_t = 1)]
    seed: u64,

    /// Grid-search instances.
    #[arg(long, default_value_t = 100)]
    instances: usize,

    /// Transmit-mode epochs for the KKT audit.
    #[arg(long, default_value_t = 1000)]
    kkt_epochs: usize,

    /// Concavity pairs per instance (20 instances).
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
}

fn read_config(path: Option<&Path>) -> anyhow::Result<KeyValues> {
    match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            KeyValues::parse(&text).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(KeyValues::default()),
    }
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let kv = read_config(args.common.config.as_deref())?;
    kv.check_keys(NETWORK_KEYS)?;
    let config: NetworkConfig = network_config(&kv)?;
    let seed = args.common.seed.unwrap_or(1);
    let gamma0 = args.gamma0.unwrap_or_else(|| default_gamma0(&config));

    let trace = match &args.channels {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let mut trace = channel::read_trace_csv(BufReader::new(f), &config)?;
            if let Some(m) = args.common.epochs {
                if m as usize > trace.len() {
                    bail!("--epochs {m} exceeds the {} imported epochs", trace.len());
                }
                trace.truncate(m as usize);
            }
            trace
        }
        None => {
            let m = args.common.epochs.unwrap_or(experiment::DEFAULT_EPOCHS);
            if m == 0 {
                bail!("--epochs must be at least 1");
            }
            ChannelModel::new(seed).trace(&config, m)
        }
    };
    if trace.is_empty() {
        bail!("channel trace is empty");
    }

    let started = Instant::now();
    let mut sim = Simulation::new(&config, args.mode, gamma0, true)?.with_step_rule(args.step_rule);
    for ch in &trace {
        sim.advance(ch)?;
    }
    let result = sim.finish();

    fs::create_dir_all(&args.common.out)?;
    let out = &args.common.out;
    let mut w = create(out, "trace.csv")?;
    protocol::write_trace_csv(&mut w, &result.records, config.num_users())?;
    w.flush()?;
    let mut w = create(out, "channels.csv")?;
    channel::write_trace_csv(&mut w, &trace)?;
    w.flush()?;
    let mut w = create(out, "summary.csv")?;
    writeln!(w, "{SUMMARY_HEADER}")?;
    writeln!(w, "{}", protocol::summary_row(&config, seed, &result))?;
    w.flush()?;

    println!("{SUMMARY_HEADER}");
    println!("{}", protocol::summary_row(&config, seed, &result));
    if result.jain_degenerate {
        eprintln!("note: every user averaged zero rate; jain reported as 0");
    }
    eprintln!(
        "{} epochs in {:.1?}, outputs in {}",
        result.epochs,
        started.elapsed(),
        out.display()
    );
    Ok(())
}

fn sweep(args: SweepArgs, defaults: ExperimentSpec) -> anyhow::Result<()> {
    let kv = read_config(args.common.config.as_deref())?;
    let mut spec = ExperimentSpec::from_key_values(defaults, &kv)?;
    if let Some(seed) = args.common.seed {
        spec.seeds = vec![seed];
    }
    if let Some(m) = args.common.epochs {
        spec.epochs = m;
    }
    if let Some(mode) = args.mode {
        spec.modes = vec![mode];
    }
    spec.validate()?;

    let started = Instant::now();
    let rows = experiment::run_experiment_with(&spec, |row| {
        eprintln!(
            "  p_c={:e} P_avg={} K={} {:<6} sum_rate={:.6} jain={:.4} spend={:.4}",
            row.p_c, row.p_avg, row.k, row.mode, row.sum_rate, row.jain, row.avg_bs_power
        );
    })?;
    let mut csv = Vec::new();
    experiment::write_csv(&mut csv, spec.sweep, &rows)?;
    let csv = String::from_utf8(csv)?;

    fs::create_dir_all(&args.common.out)?;
    let csv_path = args.common.out.join(format!("{}.csv", spec.name));
    fs::write(&csv_path, &csv).with_context(|| format!("writing {}", csv_path.display()))?;
    let header: Vec<&str> = spec.header().split(',').collect();
    let axes = AxesSpec::for_header(&header)?;
    let plot = emit_plot(&csv, &axes)?;
    let svg_path = args.common.out.join(format!("{}.svg", spec.name));
    fs::write(&svg_path, &plot.svg).with_context(|| format!("writing {}", svg_path.display()))?;

    print!("{csv}");
    eprintln!(
        "{} rows in {:.1?}, wrote {} and {}",
        rows.len(),
        started.elapsed(),
        csv_path.display(),
        svg_path.display()
    );
    Ok(())
}

fn oracle(args: OracleArgs) -> anyhow::Result<()> {
    let mut failed = Vec::new();

    let kkt = verify::kkt_suite(&verify::transmit_instances(args.kkt_epochs, args.seed)?)?;
    println!(
        "{} kkt: {} epochs, {} failures, worst residual {:.3e} (tol {:e})",
        verdict(kkt.passed()),
        kkt.checked,
        kkt.failures,
        kkt.worst_residual,
        verify::KKT_TOL
    );
    if !kkt.passed() {
        failed.push("kkt");
    }

    let instances = verify::oracle_instances(args.instances, args.seed)?;
    let grid = verify::oracle_suite(&instances, &GridSpec::default())?;
    println!(
        "{} grid search: {} instances ({} transmitting), worst relative gap {:.3e} (tol {:e}), \
         mismatches {:?}, interior e {:?}",
        verdict(grid.passed()),
        grid.instances,
        grid.transmitting,
        grid.worst_rel_gap,
        verify::ORACLE_REL_TOL,
        grid.mismatches,
        grid.interior
    );
    if !grid.passed() {
        failed.push("grid search");
    }

    let conc = verify::concavity_suite(20, args.pairs, args.seed)?;
    println!(
        "{} concavity: {} pairs on {} instances, {} violations, worst gap {:.3e}",
        verdict(conc.violations == 0),
        conc.pairs,
        conc.instances,
        conc.violations,
        conc.worst_gap
    );
    if conc.violations > 0 {
        failed.push("concavity");
    }

    if !failed.is_empty() {
        bail!("verification failed: {}", failed.join(", "));
    }
    Ok(())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fig1(a) => sweep(a, ExperimentSpec::circuit_power_sweep()),
        Command::Fig2(a) => sweep(a, ExperimentSpec::budget_sweep()),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
