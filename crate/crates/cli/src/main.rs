//! `fluidic`: simulate reaction–transport netlists, validate library
//! gates, synthesize truth tables and sweep design parameters.
//!
//! Exit status: 0 success, 1 truth-table or design-window failure,
//! 2 parse/validation error, 3 numerical stability error.

mod svg;
mod units;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fluidic::harness::{
    design_window, predict_levels, sweep, sweep_csv, sweep_values, verify, SweepParam, TruthTableReport,
    WindowReport, DEFAULT_FLUCTUATION_FLOOR,
};
use fluidic::library::{build_gate_unchecked, GateKind, ModuleParams};
use fluidic::network::Netlist;
use fluidic::solver::{simulate, SolverConfig, Splitting};
use fluidic::synthesis::{synthesize, TruthTable};
use fluidic::trace::Trace;
use fluidic::transport::DispersionModel;
use fluidic::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fluidic", version, about = "Chemical-reaction microfluidic logic: simulation, gates and synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a netlist file and export the probe traces
    Simulate {
        /// Netlist JSON file
        netlist: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build a library gate, simulate it and read its truth table
    Gate {
        #[arg(value_enum)]
        kind: KindArg,
        /// Injected threshold level (the AND half for XOR), e.g. `6mM`
        #[arg(long, value_parser = units::concentration)]
        thl: Option<f64>,
        /// Injected amplification level, e.g. `4mol/m3`
        #[arg(long, value_parser = units::concentration)]
        amp: Option<f64>,
        /// Inlet velocity, e.g. `0.75cm/s`
        #[arg(long, value_parser = units::velocity)]
        velocity: Option<f64>,
        /// Exit non-zero unless the design window and truth table both pass
        #[arg(long)]
        validate: bool,
        /// Write the gate's netlist here
        #[arg(long)]
        netlist: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Minimize a truth table (e.g. `0110`) and map it onto library gates
    Synth {
        /// Output bits in input-lexicographic order, 4, 8 or 16 of them
        table: String,
        /// Write the synthesized netlist here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the result as JSON
        #[arg(long)]
        json: bool,
    },
    /// Sweep one injected level or channel length and record pass/fail
    Sweep {
        /// Netlist JSON file (or use --gate)
        netlist: Option<PathBuf>,
        /// Sweep a default library gate instead of a file
        #[arg(long, value_enum, conflicts_with = "netlist")]
        gate: Option<KindArg>,
        /// `conc:<inlet>:<species>` or `length:<channel>`
        #[arg(long)]
        param: String,
        #[arg(long, value_parser = units::length_or_concentration)]
        from: f64,
        #[arg(long, value_parser = units::length_or_concentration)]
        to: f64,
        #[arg(long, value_parser = units::length_or_concentration)]
        step: f64,
        /// CSV destination; standard output when absent
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    #[value(name = "AND", alias = "and")]
    And,
    #[value(name = "NAND", alias = "nand")]
    Nand,
    #[value(name = "OR", alias = "or")]
    Or,
    #[value(name = "NOR", alias = "nor")]
    Nor,
    #[value(name = "XOR", alias = "xor")]
    Xor,
    #[value(name = "NOT", alias = "not")]
    Not,
}

impl From<KindArg> for GateKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::And => GateKind::And,
            KindArg::Nand => GateKind::Nand,
            KindArg::Or => GateKind::Or,
            KindArg::Nor => GateKind::Nor,
            KindArg::Xor => GateKind::Xor,
            KindArg::Not => GateKind::Not,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DispersionArg {
    Molecular,
    TaylorAris,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplittingArg {
    Lie,
    Strang,
}

#[derive(Args)]
struct SolverArgs {
    /// Simulated time, e.g. `5s`
    #[arg(long, value_parser = units::time)]
    t_end: Option<f64>,
    /// Cell size, e.g. `5um`
    #[arg(long, value_parser = units::length)]
    dx: Option<f64>,
    /// Fixed time step; derived from the stability bound when absent
    #[arg(long, value_parser = units::time)]
    dt: Option<f64>,
    /// Fraction of the stability bound used for the derived step
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long, value_enum, default_value = "taylor-aris")]
    dispersion: DispersionArg,
    #[arg(long, value_enum, default_value = "lie")]
    splitting: SplittingArg,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let defaults = SolverConfig::default();
        SolverConfig {
            dx: self.dx.unwrap_or(defaults.dx),
            dt: self.dt,
            t_end: self.t_end.unwrap_or(defaults.t_end),
            cfl: self.cfl.unwrap_or(defaults.cfl),
            dispersion: match self.dispersion {
                DispersionArg::Molecular => DispersionModel::Molecular,
                DispersionArg::TaylorAris => DispersionModel::TaylorAris,
            },
            splitting: match self.splitting {
                SplittingArg::Lie => Splitting::Lie,
                SplittingArg::Strang => Splitting::Strang,
            },
            ..defaults
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Trace CSV destination; standard output for `simulate` when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG plot of normalized probe concentrations
    #[arg(long)]
    plot: Option<PathBuf>,
    /// JSON run report
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunReport {
    command: String,
    config: SolverConfig,
    netlist: Option<PathBuf>,
    trace_csv: Option<PathBuf>,
    plot_svg: Option<PathBuf>,
    dt: f64,
    steps: usize,
    window: Option<WindowReport>,
    truth_table: Option<TruthTableReport>,
    warnings: Vec<String>,
    wall_clock_s: f64,
}

/// A failed command: exit status plus diagnostic.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Stability { .. } => 3,
            Error::DesignWindow(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn read_netlist(path: &Path) -> Result<Netlist, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    Netlist::from_json(&text).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn write_outputs(trace: &Trace, output: &OutputArgs) -> Result<(), Failure> {
    if let Some(path) = &output.out {
        write(path, &trace.to_csv())?;
    }
    if let Some(path) = &output.plot {
        write(path, &svg::render(trace))?;
    }
    Ok(())
}

fn write_report(report: &RunReport, path: Option<&PathBuf>) -> Result<(), Failure> {
    if let Some(path) = path {
        let text = serde_json::to_string_pretty(report).expect("report serializes");
        write(path, &text)?;
    }
    Ok(())
}

fn cmd_simulate(netlist_path: &Path, solver: &SolverArgs, output: &OutputArgs) -> Result<u8, Failure> {
    let start = Instant::now();
    let netlist = read_netlist(netlist_path)?;
    let config = solver.config();
    let sim = simulate(&netlist, &config)?;
    for w in &sim.audit.warnings {
        eprintln!("warning: {w}");
    }
    if output.out.is_none() {
        print!("{}", sim.trace.to_csv());
    }
    write_outputs(&sim.trace, output)?;
    write_report(
        &RunReport {
            command: "simulate".into(),
            config,
            netlist: Some(netlist_path.to_path_buf()),
            trace_csv: output.out.clone(),
            plot_svg: output.plot.clone(),
            dt: sim.dt,
            steps: sim.steps,
            window: None,
            truth_table: None,
            warnings: sim.audit.warnings,
            wall_clock_s: start.elapsed().as_secs_f64(),
        },
        output.report.as_ref(),
    )?;
    Ok(0)
}

fn gate_params(kind: GateKind, thl: Option<f64>, amp: Option<f64>, velocity: Option<f64>) -> Result<ModuleParams, Failure> {
    let mut params = ModuleParams::default();
    if let Some(thl) = thl {
        match kind {
            GateKind::And | GateKind::Nand | GateKind::Xor => params.c_thl_and = thl,
            GateKind::Or | GateKind::Nor => params.c_thl_or = thl,
            GateKind::Not => {
                return Err(Failure {
                    code: 2,
                    message: "the NOT gate has no threshold stage".into(),
                })
            }
        }
    }
    if let Some(amp) = amp {
        params.c_amp = amp;
    }
    if let Some(v) = velocity {
        params.geometry.velocity = v;
    }
    Ok(params)
}

fn print_window(window: &WindowReport) {
    for c in &window.checks {
        println!(
            "  window {:<10} {:<40} slack {:+.4} {}",
            c.channel,
            c.inequality,
            c.slack,
            if c.pass { "ok" } else { "VIOLATED" }
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_gate(
    kind: GateKind,
    thl: Option<f64>,
    amp: Option<f64>,
    velocity: Option<f64>,
    validate: bool,
    netlist_path: Option<&PathBuf>,
    solver: &SolverArgs,
    output: &OutputArgs,
) -> Result<u8, Failure> {
    let start = Instant::now();
    let params = gate_params(kind, thl, amp, velocity)?;
    let netlist = build_gate_unchecked(kind, &params)?;
    if let Some(path) = netlist_path {
        write(path, &netlist.to_json())?;
    }
    let prediction = predict_levels(&netlist)?;
    let window = design_window(&netlist, &prediction, DEFAULT_FLUCTUATION_FLOOR);
    println!("{kind} gate: {} reactions, {} species", netlist.reaction_count(), netlist.species.len());
    print_window(&window);
    if validate && !window.pass() {
        eprintln!("design window violated: {}", window.violations().join("; "));
        return Ok(1);
    }
    let config = solver.config();
    let run = verify(&netlist, &config, None, None, &|b| kind.eval(b))?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    println!("  latency {:.4} s, threshold {:.4} mol/m³", run.latency, run.report.threshold);
    for line in run.report.to_string().lines() {
        println!("  {line}");
    }
    let bits: String = run.report.bits().iter().map(|b| if *b { '1' } else { '0' }).collect();
    println!("bits {bits} min margin {:.3}", run.report.min_margin());
    write_outputs(&run.trace, output)?;
    let pass = run.report.pass && window.pass();
    write_report(
        &RunReport {
            command: format!("gate {kind}"),
            config,
            netlist: netlist_path.cloned(),
            trace_csv: output.out.clone(),
            plot_svg: output.plot.clone(),
            dt: run.dt,
            steps: run.steps,
            window: Some(window),
            truth_table: Some(run.report),
            warnings: run.warnings,
            wall_clock_s: start.elapsed().as_secs_f64(),
        },
        output.report.as_ref(),
    )?;
    Ok(if validate && !pass { 1 } else { 0 })
}

#[derive(Serialize)]
struct SynthOutput<'a> {
    table: String,
    expression: String,
    metrics: &'a fluidic::synthesis::CircuitMetrics,
    netlist: Option<&'a PathBuf>,
}

fn cmd_synth(table: &str, out: Option<&PathBuf>, json: bool) -> Result<u8, Failure> {
    let table = TruthTable::parse(table)?;
    let s = synthesize(&table, &ModuleParams::default())?;
    if let Some(path) = out {
        write(path, &s.netlist.to_json())?;
    }
    if json {
        let report = SynthOutput {
            table: table.to_string(),
            expression: s.sop.to_string(),
            metrics: &s.metrics,
            netlist: out,
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("serializes"));
    } else {
        let m = &s.metrics;
        println!("table       {table}");
        println!("expression  {}", s.sop);
        println!("channels    {}", m.channels);
        println!("length      {:.6} m", m.total_length);
        println!("species     {}", m.species);
        println!("reactions   {}", m.reactions);
        println!("latency     {:.4} s", m.latency);
        if let Some(path) = out {
            println!("netlist     {}", path.display());
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    netlist_path: Option<&PathBuf>,
    gate: Option<KindArg>,
    param: &str,
    from: f64,
    to: f64,
    step: f64,
    out: Option<&PathBuf>,
    solver: &SolverArgs,
) -> Result<u8, Failure> {
    let netlist = match (netlist_path, gate) {
        (Some(path), _) => read_netlist(path)?,
        (None, Some(kind)) => build_gate_unchecked(kind.into(), &ModuleParams::default())?,
        (None, None) => {
            return Err(Failure {
                code: 2,
                message: "give a netlist file or --gate".into(),
            })
        }
    };
    let param: SweepParam = param.parse()?;
    let values = sweep_values(from, to, step)?;
    // Reject unknown targets before any simulation starts.
    param.apply(&netlist, values.first().copied().unwrap_or(from.max(0.0)))?;
    let points = sweep(&netlist, &param, &values, &solver.config())?;
    let csv = sweep_csv(&points);
    match out {
        Some(path) => write(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Simulate { netlist, solver, output } => cmd_simulate(&netlist, &solver, &output),
        Command::Gate {
            kind,
            thl,
            amp,
            velocity,
            validate,
            netlist,
            solver,
            output,
        } => cmd_gate(kind.into(), thl, amp, velocity, validate, netlist.as_ref(), &solver, &output),
        Command::Synth { table, out, json } => cmd_synth(&table, out.as_ref(), json),
        Command::Sweep {
            netlist,
            gate,
            param,
            from,
            to,
            step,
            out,
            solver,
        } => cmd_sweep(netlist.as_ref(), gate, &param, from, to, step, out.as_ref(), &solver),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
