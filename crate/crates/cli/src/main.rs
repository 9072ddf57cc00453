use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use cws_core::code552::{build_code, verify_code, CodeDocument, CodeSpec, CodeReport, N_QUBITS};
use cws_core::error_model::{ErrorSpec, Pauli};
use cws_core::experiment::{run_setting_a, run_setting_b, run_setting_c, uniform_grid, InputStateId, PauliRow, Setting};
use cws_core::nmr_noise::{run_pure_qecc, simulate_spectrum, NmrSystem, NoiseModel};
use cws_core::parallel::Execution;
use cws_core::report::{fmt_real, write_branch_csv, write_setting_a_csv, write_sweep_csv, SweepSummary};
use cws_core::statevec::{MixedState, PureState};

#[derive(Parser)]
#[command(name = "cws552", version, about = "Simulator for the ((5,5,2)) codeword-stabilized code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check orthonormality, erasure correctability and distance.
    Verify {
        #[arg(long)]
        json: bool,
        /// Verify an exported code file instead of the built-in code.
        #[arg(long, value_name = "FILE")]
        code: Option<PathBuf>,
    },
    /// Run a benchmark setting and write per-point CSV plus fitted JSON.
    Sweep(SweepArgs),
    /// Simulate the FID spectrum of one spin.
    Spectrum(SpectrumArgs),
    /// Write the codewords, encoder and decoders as JSON.
    ExportCode {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct SweepArgs {
    /// JSON file with any of the fields below; flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    setting: Option<Setting>,
    /// Number of θ points.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_name = "RAD")]
    theta_max: Option<f64>,
    /// Noise model JSON, or `default` for the built-in dephasing profile.
    #[arg(long, value_name = "FILE")]
    noise: Option<String>,
    /// Recorded in the summary; the simulation itself has no randomness.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SpectrumArgs {
    /// NMR system JSON.
    #[arg(long, value_name = "FILE")]
    system: PathBuf,
    /// Observed spin, 1-based.
    #[arg(long)]
    observe: usize,
    /// Product label such as `0+000`, or `setting-a:LOC:PAULI` for the
    /// decoded five-qubit state after a Pauli error.
    #[arg(long)]
    state: String,
    #[arg(long, default_value_t = 2.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    setting: Option<Setting>,
    grid: Option<usize>,
    theta_max: Option<f64>,
    noise: Option<String>,
    seed: Option<u64>,
    sequential: Option<bool>,
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify { json, code } => cmd_verify(json, code.as_deref()),
        Command::Sweep(args) => cmd_sweep(args).map(|_| true),
        Command::Spectrum(args) => cmd_spectrum(args).map(|_| true),
        Command::ExportCode { out } => cmd_export(&out).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    pass: bool,
    orthonormality_defect: f64,
    encoder_defect: f64,
    decoder_defects: &'a [f64],
    distance: Option<usize>,
    witness: Option<String>,
    erasure: Option<&'a cws_core::code552::ErasureReport>,
}

fn cmd_verify(json: bool, code_path: Option<&Path>) -> Result<bool> {
    let code = match code_path {
        Some(p) => CodeSpec::from_document(&read_json::<CodeDocument>(p)?)?,
        None => build_code()?,
    };
    let report = verify_code(&code);
    let ok = report.all_pass();
    if json {
        let doc = VerifyJson {
            pass: ok,
            orthonormality_defect: report.orthonormality_defect,
            encoder_defect: report.encoder_defect,
            decoder_defects: &report.decoder_defects,
            distance: report.distance.as_ref().map(|d| d.distance),
            witness: report.distance.as_ref().and_then(|d| d.witness.as_ref()).map(|w| w.to_string()),
            erasure: report.erasure.as_ref(),
        };
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        print_report(&report);
    }
    Ok(ok)
}

fn print_report(r: &CodeReport) {
    println!("codeword orthonormality: max defect {:.3e} {}", r.orthonormality_defect, pass(r.orthonormal));
    println!("encoder: max defect {:.3e} {}", r.encoder_defect, pass(r.encoder_ok));
    let worst = r.decoder_defects.iter().copied().fold(0.0, f64::max);
    println!("decoders: max defect {worst:.3e} {}", pass(r.decoders_ok()));
    if let Some(e) = &r.erasure {
        for l in &e.locations {
            println!("  location {}: KL violation {:.3e} {}", l.location, l.max_violation, pass(l.pass));
        }
    }
    match &r.distance {
        Some(d) => {
            if let Some(w) = &d.witness {
                println!("weight-{} witness: {w} (violation {:.3e})", w.weight(), d.witness_violation);
            }
            println!(
                "distance: {}, erasure-correctable at locations 1..{N_QUBITS}: {}",
                d.distance,
                pass(r.all_pass())
            );
        }
        None => println!("distance: unknown, erasure-correctable at locations 1..{N_QUBITS}: FAIL"),
    }
}

fn load_noise(spec: &str) -> Result<NoiseModel> {
    let model = if spec == "default" {
        NoiseModel::default_profile()
    } else {
        read_json::<NoiseModel>(Path::new(spec))?
    };
    model.validate()?;
    Ok(model)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let file = match &args.config {
        Some(p) => read_json::<SweepConfig>(p)?,
        None => SweepConfig::default(),
    };
    let setting = args
        .setting
        .or(file.setting)
        .ok_or_else(|| anyhow!("--setting is required (A, B or C)"))?;
    let out = args.out.or(file.out).ok_or_else(|| anyhow!("--out is required"))?;
    let n = args.grid.or(file.grid).unwrap_or(13);
    let theta_max = args.theta_max.or(file.theta_max).unwrap_or(std::f64::consts::PI);
    if !(theta_max.is_finite() && theta_max > 0.0) {
        bail!("--theta-max must be positive, got {theta_max}");
    }
    let seed = args.seed.or(file.seed);
    let noise = args.noise.or(file.noise).map(|s| load_noise(&s)).transpose()?;
    let exec = if args.sequential || file.sequential.unwrap_or(false) {
        Execution::Sequential
    } else {
        Execution::Parallel
    };

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let code = build_code()?;
    let tag = setting.to_string().to_ascii_lowercase();

    if setting == Setting::A {
        let rows = run_setting_a(&code, noise.as_ref(), exec)?;
        write_setting_a_csv(create(&out.join("setting_a.csv"))?, &rows)?;
        write_branch_csv(create(&out.join("branches_a.csv"))?, &rows)?;
        write_json(&out.join("summary_a.json"), &SettingASummary::new(&rows, noise.is_some(), seed))?;
        return Ok(());
    }

    let grid = uniform_grid(n, theta_max)?;
    let result = match setting {
        Setting::B => run_setting_b(&code, &grid, noise.as_ref(), exec)?,
        _ => run_setting_c(&code, &grid, noise.as_ref(), exec)?,
    };
    write_sweep_csv(create(&out.join(format!("sweep_{tag}.csv")))?, &result)?;
    write_json(
        &out.join(format!("summary_{tag}.json")),
        &SweepSummary::new(&result, noise.is_some(), seed),
    )
}

#[derive(Serialize)]
struct SettingASummary<'a> {
    setting: Setting,
    noisy: bool,
    seed: Option<u64>,
    passed: usize,
    total: usize,
    rows: &'a [PauliRow],
}

impl<'a> SettingASummary<'a> {
    fn new(rows: &'a [PauliRow], noisy: bool, seed: Option<u64>) -> Self {
        Self {
            setting: Setting::A,
            noisy,
            seed,
            passed: rows.iter().filter(|r| r.pass()).count(),
            total: rows.len(),
            rows,
        }
    }
}

fn parse_state(spec: &str) -> Result<MixedState> {
    if let Some(rest) = spec.strip_prefix("setting-a:") {
        let (loc, p) = rest
            .split_once(':')
            .ok_or_else(|| anyhow!("expected setting-a:LOC:PAULI, got {spec}"))?;
        let location: usize = loc.parse().with_context(|| format!("bad location {loc}"))?;
        let pauli: Pauli = p.parse()?;
        let code = build_code()?;
        let out = run_pure_qecc(&code, &InputStateId::K2.register_state(), &ErrorSpec::pauli(location, pauli))?;
        return Ok(out.to_density());
    }
    Ok(PureState::from_label(spec)?.to_density())
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<()> {
    let sys: NmrSystem = read_json(&args.system)?;
    sys.validate()?;
    let state = parse_state(&args.state)?;
    let spectrum = simulate_spectrum(&state, &sys, args.observe, args.t_max, args.dt)?;
    let mut w = create(&args.out)?;
    writeln!(w, "frequency,re,im,magnitude")?;
    for p in &spectrum {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_real(p.frequency),
            fmt_real(p.value.re),
            fmt_real(p.value.im),
            fmt_real(p.magnitude())
        )?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_export(out: &Path) -> Result<()> {
    write_json(out, &build_code()?.to_document())
}
