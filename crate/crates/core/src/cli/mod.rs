//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for malformed arguments or configuration,
//! 3 when an enumeration or solver cap is hit, 1 for anything else.

pub mod preset;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::capacity::{self, linear_grid, SweepParameter, Tolerances};
use crate::config::SwitchConfig;
use crate::error::Result;
use crate::matching::enumerate_maximal;
use crate::model::validate;
use crate::output::{self, Provenance};
use crate::scheduler::PolicyKind;
use crate::sim::{self, drift_summary, SimOptions, SimTrace};

use preset::{preset, ExperimentPreset, PresetName};

#[derive(Debug, Parser)]
#[command(name = "qswitch", version, about = "Quantum switch scheduling simulator and capacity analyzer")]
struct Cli {
    /// Append a wall-clock timestamp to output header comments.
    #[arg(long, global = true)]
    stamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the switch and write summary (and optionally trace) CSVs.
    Simulate(SimulateArgs),
    /// Solve the capacity LP and print rho_star and the verdict.
    Capacity(CapacityArgs),
    /// Solve the capacity LP over a grid of one parameter.
    Sweep(SweepArgs),
    /// List the maximal matchings as CSV rows of 0/1 flags.
    Matchings(ConfigArg),
    /// Run one of the reference experiments.
    Preset(PresetArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Switch configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, default_value = "maxweight")]
    policy: PolicyKind,

    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Slots to simulate.
    #[arg(long, default_value_t = preset::DEFAULT_HORIZON)]
    horizon: u64,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArg,

    #[command(flatten)]
    sim: SimArgs,

    /// Comma-separated seeds; overrides --seed and runs them in parallel.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,

    /// Write trace_seed<S>.csv with a row every --stride slots.
    #[arg(long)]
    trace: bool,

    #[arg(long, default_value_t = 1000)]
    stride: u64,

    /// Write drift_seed<S>.csv with this many norm bins.
    #[arg(long)]
    drift_bins: Option<usize>,

    /// Comma-separated initial queue lengths.
    #[arg(long, value_delimiter = ',')]
    initial: Vec<u64>,
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Half-width of the boundary band around rho_star = 1.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,

    /// Simplex zero threshold.
    #[arg(long, default_value_t = 1e-9)]
    pivot_tolerance: f64,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            pivot: self.pivot_tolerance,
            verdict: self.tolerance,
        }
    }
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[command(flatten)]
    config: ConfigArg,

    #[command(flatten)]
    tol: TolArgs,

    /// Also write the optimal mixture as CSV.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArg,

    #[command(flatten)]
    tol: TolArgs,

    /// p (all links), p:J, q (all types), q:I, or scale (rates).
    #[arg(long, default_value = "p")]
    param: SweepParameter,

    #[arg(long)]
    from: f64,

    #[arg(long)]
    to: f64,

    /// Grid points including both ends.
    #[arg(long, default_value_t = 11)]
    steps: usize,

    /// Width to which the rho_star = 1 crossing is bisected.
    #[arg(long, default_value_t = 1e-6)]
    resolution: f64,

    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PresetArgs {
    /// fig2, fig3, fig4 or fig5.
    name: PresetName,

    /// Run only this seed instead of the preset's list.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    horizon: Option<u64>,

    #[arg(long, default_value = "maxweight")]
    policy: PolicyKind,

    /// Output directory; defaults to out/<name>.
    #[arg(long)]
    out: Option<PathBuf>,

    #[command(flatten)]
    tol: TolArgs,
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code after printing any error as one line on stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qswitch: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let stamp = cli.stamp;
    match cli.command {
        Command::Simulate(a) => simulate(a, stamp),
        Command::Capacity(a) => capacity_cmd(a, stamp),
        Command::Sweep(a) => sweep(a, stamp),
        Command::Matchings(a) => matchings(a, stamp),
        Command::Preset(a) => run_preset(a, stamp),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn with_sink(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
        }
    }
    Ok(())
}

fn simulate(a: SimulateArgs, stamp: bool) -> Result<()> {
    let cfg = SwitchConfig::load(&a.config.config)?;
    let topology = cfg.topology()?;
    let arrivals = cfg.arrivals()?;
    validate(&topology, &arrivals)?.into_result()?;
    let seeds = if a.seeds.is_empty() { vec![a.sim.seed] } else { a.seeds.clone() };
    let options = SimOptions {
        initial_queues: (!a.initial.is_empty()).then(|| a.initial.clone()),
        series_stride: a.stride.max(1),
        record_queues: a.trace,
        ..SimOptions::default()
    };
    let traces = sim::run_seeds(&topology, &arrivals, a.sim.policy, a.sim.horizon, &seeds, &options)?;

    let base = |what: &str| {
        let mut p = Provenance::new(format!("simulate {what}"), &cfg)
            .with("policy", a.sim.policy)
            .with("horizon", a.sim.horizon);
        if let Some(init) = &options.initial_queues {
            p = p.with("initial", init.iter().map(u64::to_string).collect::<Vec<_>>().join(";"));
        }
        p.stamp = stamp;
        p
    };
    let seed_list = seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
    let summary_prov = base("summary").with("seeds", &seed_list);
    let summary_path = a.sim.out.as_ref().map(|d| d.join("summary.csv"));
    with_sink(summary_path.as_deref(), |w| output::write_summary(w, &summary_prov, &traces))?;

    if let Some(dir) = &a.sim.out {
        for t in &traces {
            write_run_files(dir, t, &base, a.trace.then_some(a.stride), a.drift_bins)?;
        }
    }
    Ok(())
}

fn write_run_files(
    dir: &Path,
    trace: &SimTrace,
    base: &dyn Fn(&str) -> Provenance,
    stride: Option<u64>,
    drift_bins: Option<usize>,
) -> Result<()> {
    if let Some(stride) = stride {
        let prov = base("trace").with("seed", trace.seed).with("stride", stride);
        let mut w = create(&dir.join(format!("trace_seed{}.csv", trace.seed)))?;
        output::write_trace(&mut w, &prov, trace)?;
        w.flush()?;
    }
    if let Some(bins) = drift_bins {
        let prov = base("drift").with("seed", trace.seed).with("bins", bins);
        let table = drift_summary(trace, bins)?;
        let mut w = create(&dir.join(format!("drift_seed{}.csv", trace.seed)))?;
        output::write_drift(&mut w, &prov, &table)?;
        w.flush()?;
    }
    Ok(())
}

fn capacity_cmd(a: CapacityArgs, stamp: bool) -> Result<()> {
    let cfg = SwitchConfig::load(&a.config.config)?;
    let topology = cfg.topology()?;
    let arrivals = cfg.arrivals()?;
    validate(&topology, &arrivals)?.into_result()?;
    let lp = capacity::build_lp(&topology, arrivals.rates())?;
    let result = capacity::solve(&lp, &a.tol.tolerances())?;
    let mut prov = Provenance::new("capacity", &cfg)
        .with("tolerance", a.tol.tolerance)
        .with("pivot_tolerance", a.tol.pivot_tolerance);
    prov.stamp = stamp;
    with_sink(None, |w| output::write_capacity(w, &prov, &result))?;
    if let Some(path) = &a.witness {
        let prov = Provenance { command: "capacity witness".into(), ..prov };
        with_sink(Some(path), |w| output::write_witness(w, &prov, &result, topology.num_types()))?;
    }
    Ok(())
}

fn sweep(a: SweepArgs, stamp: bool) -> Result<()> {
    let cfg = SwitchConfig::load(&a.config.config)?;
    let topology = cfg.topology()?;
    let arrivals = cfg.arrivals()?;
    let grid = linear_grid(a.from, a.to, a.steps);
    let table = capacity::sweep_scalar(
        &topology,
        arrivals.rates(),
        a.param,
        &grid,
        &a.tol.tolerances(),
        a.resolution,
    )?;
    let mut prov = Provenance::new("sweep", &cfg)
        .with("param", a.param)
        .with("from", a.from)
        .with("to", a.to)
        .with("steps", a.steps)
        .with("tolerance", a.tol.tolerance);
    prov.stamp = stamp;
    with_sink(a.out.as_deref(), |w| output::write_sweep(w, &prov, &table))
}

fn matchings(a: ConfigArg, stamp: bool) -> Result<()> {
    let cfg = SwitchConfig::load(&a.config)?;
    let topology = cfg.topology()?;
    let list = enumerate_maximal(&topology)?;
    let mut prov = Provenance::new("matchings", &cfg);
    prov.stamp = stamp;
    with_sink(None, |w| output::write_matchings(w, &prov, &list, topology.num_types()))
}

/// Trace rows every this many slots in preset outputs.
const PRESET_TRACE_STRIDE: u64 = 1000;
const PRESET_DRIFT_BINS: usize = 20;

fn run_preset(a: PresetArgs, stamp: bool) -> Result<()> {
    let mut p: ExperimentPreset = preset(a.name);
    if let Some(seed) = a.seed {
        p.seeds = vec![seed];
    }
    if let Some(h) = a.horizon {
        p.horizon = h;
    }
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("out").join(a.name.to_string()));
    fs::create_dir_all(&out)?;
    let tol = a.tol.tolerances();
    let command = format!("preset {}", p.name);
    let base = |what: &str| {
        let mut prov = Provenance::new(format!("{command} {what}"), &p.config)
            .with("policy", a.policy)
            .with("horizon", p.horizon);
        prov.stamp = stamp;
        prov
    };

    match &p.grid {
        None => {
            let topology = p.config.topology()?;
            let arrivals = p.config.arrivals()?;
            let options = SimOptions {
                series_stride: PRESET_TRACE_STRIDE,
                record_queues: true,
                ..SimOptions::default()
            };
            let traces = sim::run_seeds(&topology, &arrivals, a.policy, p.horizon, &p.seeds, &options)?;
            let seeds = p.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
            let prov = base("summary").with("seeds", seeds);
            with_sink(Some(&out.join("summary.csv")), |w| output::write_summary(w, &prov, &traces))?;
            for t in &traces {
                write_run_files(&out, t, &base, Some(PRESET_TRACE_STRIDE), Some(PRESET_DRIFT_BINS))?;
            }
            let result = capacity::capacity(&topology, arrivals.rates(), &tol)?;
            let prov = base("capacity").with("tolerance", tol.verdict);
            with_sink(Some(&out.join("capacity.csv")), |w| output::write_capacity(w, &prov, &result))?;
        }
        Some(grid) => {
            let base_topology = p.config.topology()?;
            let arrivals = p.config.arrivals()?;
            let points: Vec<(f64, u64)> = grid
                .iter()
                .flat_map(|&g| p.seeds.iter().map(move |&s| (g, s)))
                .collect();
            let rows: Vec<(f64, u64, SimTrace, capacity::CapacityResult)> = points
                .par_iter()
                .map(|&(gamma, seed)| {
                    let topology = base_topology.with_uniform_link_success(gamma)?;
                    let trace = sim::run(&topology, &arrivals, a.policy, p.horizon, seed, &SimOptions {
                        drift_capacity: 0,
                        series_stride: p.horizon,
                        ..SimOptions::default()
                    })?;
                    let cap = capacity::capacity(&topology, arrivals.rates(), &tol)?;
                    Ok((gamma, seed, trace, cap))
                })
                .collect::<Result<_>>()?;
            let table = capacity::sweep_scalar(
                &base_topology,
                arrivals.rates(),
                SweepParameter::AllLinks,
                grid,
                &tol,
                1e-6,
            )?;
            let prov = base("gamma")
                .with("seeds", p.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(";"))
                .with("param", "p");
            with_sink(Some(&out.join("gamma.csv")), |w| {
                writeln!(w, "{}", prov.comment())?;
                writeln!(w, "gamma,seed,mean_qbar,rho_star,verdict,mean_qbar_2h")?;
                for (gamma, seed, trace, cap) in &rows {
                    writeln!(
                        w,
                        "{gamma},{seed},{},{},{},{}",
                        trace.mean_qbar, cap.rho_star, cap.verdict, trace.mean_qbar_second_half
                    )?;
                }
                match table.crossing {
                    Some(c) => writeln!(w, "# crossing={c}"),
                    None => writeln!(w, "# crossing=none"),
                }
            })?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_arguments_exit_2() {
        assert_eq!(run_cli(["qswitch", "nonsense"]), 2);
        assert_eq!(run_cli(["qswitch", "preset", "fig9"]), 2);
        assert_eq!(run_cli(["qswitch", "simulate", "--config", "x.toml", "--policy", "best"]), 2);
    }

    #[test]
    fn missing_config_exits_2() {
        assert_eq!(run_cli(["qswitch", "matchings", "--config", "/nonexistent/switch.toml"]), 2);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run_cli(["qswitch", "--help"]), 0);
    }
}
