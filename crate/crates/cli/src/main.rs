mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{error::ErrorKind, ArgAction, Args, Parser, Subcommand};
use serde_json::json;

use args::{
    CircuitArgs, DecayArgs, DeviceArgs, GridArgs, Input, NoiseArgs, SqueezeArgs, SweepArgs,
};
use kerrcat::noise::{self, Channel, NoiseConfig, NoiseKind};
use kerrcat::propagate::PropagationOptions;
use kerrcat::scenarios::{self, Resolved, ScenarioConfig, ScenarioId, SCHEMA_VERSION};
use kerrcat::squeeze::{self, SqueezeSpec};
use kerrcat::synth::{self, DriveSource};
use kerrcat::{circuit, gates, selftest, Error, Result};

/// `println!` that reports write failures instead of panicking.
macro_rules! outln {
    ($($t:tt)*) => {
        writeln!(io::stdout().lock(), $($t)*)?
    };
}

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (build ",
    env!("KERRCAT_BUILD_REV"),
    ")"
);

/// Nonadiabatic geometric gates on Kerr-cat qubits.
///
/// Rates carry explicit units: angular rates as "12.5mhz" (2π×MHz) or
/// "78.54rad/us", decay rates as "0.05/us". Times are in μs.
#[derive(Parser, Debug)]
#[command(name = "kerrcat", version, long_version = LONG_VERSION)]
struct Cli {
    /// Cap on worker threads
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Log more (-v info, -vv debug)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize control pulses and write them as CSV
    Synth {
        #[command(flatten)]
        device: DeviceArgs,
        /// Two-qubit controls for the controlled gate
        #[arg(long)]
        two_qubit: bool,
        /// Output CSV (standard output if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Propagate a single-qubit gate, print its average fidelity and write the trajectory
    Gate {
        #[command(flatten)]
        device: DeviceArgs,
        /// Trajectory CSV
        #[arg(long, default_value = "gate.csv")]
        out: PathBuf,
    },
    /// Propagate the controlled gate on two modes and print its average fidelity
    Cnot {
        #[command(flatten)]
        device: DeviceArgs,
    },
    /// Noisy-control ensemble
    Noise {
        #[command(flatten)]
        device: DeviceArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        /// systematic, awgn or pink
        #[arg(long, default_value = "awgn")]
        kind: String,
        /// Systematic scale errors on Ωx,Ωy,Ωz, e.g. "0,0,0.05"
        #[arg(
            long,
            value_name = "X,Y,Z",
            value_delimiter = ',',
            allow_negative_numbers = true
        )]
        delta: Option<Vec<f64>>,
        /// Channels receiving additive noise
        #[arg(long, value_delimiter = ',')]
        channels: Option<Vec<String>>,
        /// Per-run CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Open-system gate under photon loss and dephasing
    Decoherence {
        #[command(flatten)]
        device: DeviceArgs,
        #[command(flatten)]
        decay: DecayArgs,
        #[arg(long, value_enum, default_value = "plus")]
        input: Input,
        /// Trajectory CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Anti-squeeze, gate, squeeze
    Squeeze {
        #[command(flatten)]
        device: DeviceArgs,
        #[command(flatten)]
        decay: DecayArgs,
        #[command(flatten)]
        squeeze: SqueezeArgs,
        #[arg(long, value_enum, default_value = "plus")]
        input: Input,
        /// Photon-number CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map circuit parameters to gate parameters and print the error budget as JSON
    Circuit {
        #[command(flatten)]
        device: DeviceArgs,
        #[command(flatten)]
        circuit: CircuitArgs,
    },
    /// Run a canned experiment and write its artifacts
    Scenario(ScenarioArgs),
    /// Run the invariant and property suite
    Selftest,
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// JSON config; flags override its entries
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Config schema version
    #[arg(long)]
    schema_version: Option<u32>,
    /// Scenario id
    #[arg(long, required_unless_present = "config")]
    id: Option<String>,
    /// Output directory (default out/<id>)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    device: DeviceArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    decay: DecayArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    squeeze: SqueezeArgs,
    #[command(flatten)]
    circuit: CircuitArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kerrcat: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn broken_pipe(e: &Error) -> bool {
    let mut cur: Option<&(dyn std::error::Error + 'static)> = Some(e);
    while let Some(err) = cur {
        if let Some(io) = err.downcast_ref::<io::Error>() {
            return io.kind() == io::ErrorKind::BrokenPipe;
        }
        cur = err.source();
    }
    false
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Context { source, .. } => exit_code(source),
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::InvalidSpace(_)
        | Error::Io(_)
        | Error::Json(_) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure thread pool: {e}")))?;
    }
    match cli.command {
        Command::Synth {
            device,
            two_qubit,
            out,
        } => {
            let p = resolve(ScenarioId::Fig2Waveforms, |c| device.apply(c))
                .map_err(|e| e.context("synth"))?;
            synth_cmd(&p, two_qubit, out.as_deref()).map_err(|e| e.context("synth"))
        }
        Command::Gate { device, out } => {
            let p = resolve(ScenarioId::Fig3Populations, |c| device.apply(c))
                .map_err(|e| e.context("gate"))?;
            gate_cmd(&p, &out).map_err(|e| e.context("gate"))
        }
        Command::Cnot { device } => {
            let p = resolve(ScenarioId::Fig4Cnot, |c| device.apply(c))
                .map_err(|e| e.context("cnot"))?;
            let spec = p.spec()?;
            let o = gates::controlled_gate(
                &p.device()?,
                &spec,
                DriveSource::Analytic(spec),
                p.steps,
                &opts(),
            )
            .map_err(|e| e.context("cnot"))?;
            outln!(
                "average gate fidelity (controlled {}): {:.6}",
                p.gate,
                o.fidelity
            );
            outln!("infidelity: {:.6e}", o.infidelity());
            Ok(0)
        }
        Command::Noise {
            device,
            noise,
            kind,
            delta,
            channels,
            out,
        } => {
            let p = resolve(ScenarioId::Fig5Noise, |c| {
                device.apply(c)?;
                noise.apply(c);
                Ok(())
            })
            .map_err(|e| e.context("noise"))?;
            noise_cmd(&p, &kind, delta, channels, out.as_deref()).map_err(|e| e.context("noise"))
        }
        Command::Decoherence {
            device,
            decay,
            input,
            out,
        } => {
            let p = resolve(ScenarioId::Fig6Decoherence, |c| {
                device.apply(c)?;
                decay.apply(c)
            })
            .map_err(|e| e.context("decoherence"))?;
            decoherence_cmd(&p, input, out.as_deref()).map_err(|e| e.context("decoherence"))
        }
        Command::Squeeze {
            device,
            decay,
            squeeze,
            input,
            out,
        } => {
            let p = resolve(ScenarioId::SqueezePipeline, |c| {
                device.apply(c)?;
                decay.apply(c)?;
                squeeze.apply(c)
            })
            .map_err(|e| e.context("squeeze"))?;
            squeeze_cmd(&p, input, out.as_deref()).map_err(|e| e.context("squeeze"))
        }
        Command::Circuit { device, circuit } => {
            let p = resolve(ScenarioId::CircuitMap, |c| {
                device.apply(c)?;
                circuit.apply(c)
            })
            .map_err(|e| e.context("circuit"))?;
            circuit_cmd(&p).map_err(|e| e.context("circuit"))
        }
        Command::Scenario(args) => scenario_cmd(&args),
        Command::Selftest => selftest_cmd().map_err(|e| e.context("selftest")),
    }
}

fn opts() -> PropagationOptions {
    PropagationOptions::default()
}

fn resolve(
    id: ScenarioId,
    apply: impl FnOnce(&mut ScenarioConfig) -> Result<()>,
) -> Result<Resolved> {
    let mut c = ScenarioConfig::new(id);
    apply(&mut c)?;
    c.resolve()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(e).context(format!("cannot create {}", path.display())))
}

fn synth_cmd(p: &Resolved, two_qubit: bool, out: Option<&Path>) -> Result<u8> {
    let spec = p.spec()?;
    let dev = p.device()?;
    let frame = dev.frame()?;
    let schedule = if two_qubit {
        synth::two_qubit_controls(&spec, &frame, p.steps)?
    } else {
        synth::single_qubit_controls(&spec, &frame, p.steps)?
    };
    match out {
        Some(path) => {
            schedule.write_csv(create(path)?)?;
            let gap = dev.gap()?;
            outln!("gate: {}", p.gate);
            outln!("samples: {}", schedule.len());
            outln!("peak control: {:.6} rad/us", schedule.peak());
            outln!("gap: {gap:.6} rad/us");
            outln!("gap margin: {:.6}", synth::gap_margin(&schedule, gap));
            outln!("wrote {}", path.display());
        }
        None => {
            // buffered so a closed pipe surfaces as a plain i/o error
            let mut buf = Vec::new();
            schedule.write_csv(&mut buf)?;
            io::stdout().lock().write_all(&buf)?;
        }
    }
    Ok(0)
}

fn gate_cmd(p: &Resolved, out: &Path) -> Result<u8> {
    let spec = p.spec()?;
    let dev = p.device()?;
    let o = gates::single_qubit_gate(&dev, &spec, DriveSource::Analytic(spec), p.steps, &opts())?;
    o.result.write_csv(&dev.frame()?, create(out)?)?;
    outln!("average gate fidelity ({}): {:.6}", p.gate, o.fidelity);
    outln!("infidelity: {:.6e}", o.infidelity());
    outln!("wrote {}", out.display());
    Ok(0)
}

fn noise_cmd(
    p: &Resolved,
    kind: &str,
    delta: Option<Vec<f64>>,
    channels: Option<Vec<String>>,
    out: Option<&Path>,
) -> Result<u8> {
    let kind: NoiseKind = kind.parse().map_err(|e: Error| e.context("--kind"))?;
    let mut config = match kind {
        NoiseKind::Systematic => {
            let d = delta
                .ok_or_else(|| Error::Config("--kind systematic needs --delta x,y,z".into()))?;
            let d: [f64; 3] = d.try_into().map_err(|d: Vec<f64>| {
                Error::Config(format!("--delta takes 3 values, got {}", d.len()))
            })?;
            NoiseConfig::systematic(d)
        }
        _ => {
            if delta.is_some() {
                return Err(Error::Config(
                    "--delta only applies to --kind systematic".into(),
                ));
            }
            NoiseConfig::additive(kind, p.snr_db, p.seed)
        }
    };
    if let Some(cs) = channels {
        config.channels = cs
            .iter()
            .map(|c| c.parse())
            .collect::<Result<Vec<Channel>>>()?;
    }
    // a systematic error is deterministic, so one run says everything
    let runs = if kind == NoiseKind::Systematic {
        1
    } else {
        p.runs
    };
    let spec = p.spec()?;
    let stats = noise::monte_carlo(&p.device()?, &spec, &config, runs, p.steps, &opts())?;
    if let Some(path) = out {
        stats.write_csv(create(path)?)?;
    }
    outln!("runs: {} ({} failed)", stats.runs.len(), stats.failed);
    outln!("mean infidelity: {:.6e}", stats.mean);
    outln!("min infidelity: {:.6e}", stats.min);
    outln!("max infidelity: {:.6e}", stats.max);
    if stats.count == 0 {
        return Err(Error::Integration("every noise run failed".into()));
    }
    Ok(0)
}

fn decoherence_cmd(p: &Resolved, input: Input, out: Option<&Path>) -> Result<u8> {
    let spec = p.spec()?;
    let dev = p.device()?;
    let o = gates::open_gate(
        &dev,
        &spec,
        input.coeffs(),
        p.kappa,
        p.kappa_phi,
        p.steps,
        &opts(),
    )?;
    if let Some(path) = out {
        o.result.write_csv(&dev.frame()?, create(path)?)?;
    }
    outln!("state fidelity: {:.6}", o.fidelity);
    outln!("infidelity: {:.6e}", 1.0 - o.fidelity);
    outln!("subspace population: {:.6}", o.subspace_population);
    outln!("trace drift: {:.3e}", o.result.diagnostics.norm_drift);
    Ok(0)
}

fn squeeze_cmd(p: &Resolved, input: Input, out: Option<&Path>) -> Result<u8> {
    let spec = p.spec()?;
    let sq = SqueezeSpec::new(p.squeeze_r, p.squeeze_eps2)?;
    let r = squeeze::amplified_gate_pipeline(
        &p.device()?,
        &spec,
        &sq,
        input.coeffs(),
        p.kappa,
        p.kappa_phi,
        p.steps,
        &opts(),
    )?;
    if let Some(path) = out {
        r.write_csv(create(path)?)?;
    }
    outln!("squeeze time: {:.6} us", sq.t_s);
    outln!("state fidelity: {:.6}", r.fidelity);
    outln!("final photon number: {:.6}", r.final_photon_number);
    outln!("squeeze tail weight: {:.3e}", r.squeeze_tail_weight);
    Ok(0)
}

fn circuit_cmd(p: &Resolved) -> Result<u8> {
    let cp = p.circuit;
    let ep = circuit::effective_params(&cp)?;
    let inv = circuit::invert(&ep, cp.n_squids)?;
    let m = p.error_max;
    let budget = circuit::error_propagation(&cp, m, m, m)?;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "circuit": cp,
        "effective": ep,
        "inversion": inv,
        "error_max": m,
        "budget": budget,
    });
    outln!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}

fn scenario_cmd(args: &ScenarioArgs) -> Result<u8> {
    let mut c = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::new(ScenarioId::Table1),
    };
    if let Some(id) = &args.id {
        c.id = id.parse().map_err(|e: Error| e.context("--id"))?;
    }
    if let Some(v) = args.schema_version {
        if v != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {v} is not supported (expected {SCHEMA_VERSION})"
            )));
        }
    }
    if let Some(d) = &args.out_dir {
        c.out_dir = Some(d.clone());
    }
    let id = c.id;
    let overrides = |c: &mut ScenarioConfig| -> Result<()> {
        args.device.apply(c)?;
        args.noise.apply(c);
        args.decay.apply(c)?;
        args.grid.apply(c)?;
        args.sweep.apply(c)?;
        args.squeeze.apply(c)?;
        args.circuit.apply(c)
    };
    overrides(&mut c).map_err(|e| e.context(format!("scenario {id}")))?;
    let manifest = scenarios::run_scenario(&c)?;
    for f in &manifest.files {
        outln!("{}  {}", f.sha256, f.path);
    }
    outln!("{}", serde_json::to_string_pretty(&manifest.headline)?);
    Ok(0)
}

fn selftest_cmd() -> Result<u8> {
    let checks = selftest::run_all()?;
    let mut stdout = io::stdout().lock();
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(
            stdout,
            "{tag}  {:<40} {:.3e} < {:.0e}",
            c.name, c.value, c.limit
        )?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(stdout, "{} checks, {} failed", checks.len(), failed)?;
    Ok(if failed == 0 { 0 } else { 2 })
}
