use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use pepqc::analytics::{n_star_crossings, n_star_fd_approx, n_star_gd_lower};
use pepqc::bench::output::{analytic_rows_to_csv, fmt_float, haar_to_csv, records_to_csv, to_json, write_text};
use pepqc::bench::{
    estimate_once, eigenvalues, run_analytic_sweep, run_empirical_mse, verify_haar, ExperimentConfig, Format,
    HaarConfig, ObservableSource, RequestConfig, SweepConfig, SweepKind,
};
use pepqc::{Budget, CircuitSpec, Component, EstimatorSpec, Family, Topology};

#[derive(Parser, Debug)]
#[command(name = "pepqc", version, about = "Finite-shot derivative estimators for parametrized circuits")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One derivative component with one estimator on one random circuit.
    Estimate(EstimateArgs),
    /// Empirical MSE ensembles.
    MseSweep(MseSweepArgs),
    /// Optimal GD MSE or crossover copy number versus qubit count.
    AnalyticSweep(AnalyticArgs),
    /// Crossover copy numbers for one component.
    Nstar(NstarArgs),
    /// Circuit-average Monte Carlo against the two-design values.
    VerifyHaar(HaarArgs),
    /// Exact spectrum of a Hamiltonian file.
    Eig(EigArgs),
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long = "layers", default_value_t = 5)]
    layers: usize,
    #[arg(long, default_value_t = 4)]
    reps: usize,
    #[arg(long, default_value = "chain")]
    topology: String,
    /// Single Pauli string observable.
    #[arg(long)]
    pauli: Option<String>,
    /// Hamiltonian file observable.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    #[arg(long, default_value = "gradient")]
    component: String,
    #[arg(long, default_value = "ps")]
    estimator: String,
    #[arg(long = "J", default_value_t = 1)]
    order: usize,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated GD coefficients; uniform when absent.
    #[arg(long, value_delimiter = ',')]
    coefficients: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    mu: usize,
    #[arg(long, default_value_t = 1)]
    l: usize,
    #[arg(long)]
    mu2: Option<usize>,
    #[arg(long)]
    l2: Option<usize>,
    /// Total copy budget; exact evaluation when absent.
    #[arg(long = "N_T")]
    n_t: Option<u64>,
}

#[derive(Args, Debug)]
struct MseSweepArgs {
    /// Named scenario used instead of --config.
    #[arg(long)]
    preset: Option<String>,
    /// 500 circuits x 500 trials.
    #[arg(long)]
    full_scale: bool,
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    #[arg(long, default_value = "gd-opt-vs-n")]
    kind: String,
    #[arg(long = "J", value_delimiter = ',', default_value = "1,2,3,4")]
    orders: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    components: Option<Vec<String>>,
    #[arg(long = "N_T", default_value_t = 2000.0)]
    n_t: f64,
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
}

#[derive(Args, Debug)]
struct NstarArgs {
    #[arg(long, default_value = "gradient")]
    component: String,
    #[arg(long)]
    n: usize,
    #[arg(long = "J", default_value_t = 1)]
    order: usize,
}

#[derive(Args, Debug)]
struct HaarArgs {
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args, Debug)]
struct EigArgs {
    /// Hamiltonian file; the bundled water Hamiltonian when absent.
    hamiltonian: Option<PathBuf>,
    /// Print the full spectrum instead of the minimum.
    #[arg(long)]
    all: bool,
}

/// JSON form of the `estimate` inputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimateConfig {
    circuit: CircuitSpec,
    observable: ObservableSource,
    request: RequestConfig,
    estimator: EstimatorSpec,
    #[serde(rename = "N_T", default)]
    n_t: Option<u64>,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize)]
struct EstimateOutput {
    estimator: String,
    component: Component,
    #[serde(rename = "N_T")]
    n_t: Option<u64>,
    value: f64,
    exact_ps: f64,
    seed: u64,
}

#[derive(Serialize)]
struct NstarOutput {
    component: Component,
    n_qubits: usize,
    #[serde(rename = "J")]
    order: usize,
    crossings: Vec<f64>,
    approx: f64,
}

#[derive(Serialize)]
struct EigOutput {
    num_terms: usize,
    n_qubits: usize,
    eigenvalues: Vec<f64>,
}

enum Failure {
    Validation(String),
    Io(String),
}

impl From<pepqc::Error> for Failure {
    fn from(e: pepqc::Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(m)) => {
            eprintln!("I/O error: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let common = cli.common;
    let format: Format = common.format.parse()?;
    if let Some(k) = common.jobs {
        if k == 0 {
            return Err(Failure::Validation("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Validation(e.to_string()))?;
    }
    let text = match cli.command {
        Command::Estimate(a) => estimate_cmd(&common, a, format)?,
        Command::MseSweep(a) => mse_sweep_cmd(&common, a, format)?,
        Command::AnalyticSweep(a) => analytic_cmd(&common, a, format)?,
        Command::Nstar(a) => nstar_cmd(a, format)?,
        Command::VerifyHaar(a) => haar_cmd(&common, a, format)?,
        Command::Eig(a) => eig_cmd(a, format)?,
    };
    match &common.out {
        Some(p) => write_text(p, &text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn read_config(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| Failure::Validation(format!("config: {e}")))
}

fn estimate_cmd(common: &Common, a: EstimateArgs, format: Format) -> CliResult<String> {
    let mut cfg: EstimateConfig = match &common.config {
        Some(p) => parse_json(&read_config(p)?)?,
        None => {
            let component: Component = a.component.parse()?;
            let family: Family = a.estimator.parse()?;
            let observable = match (a.pauli, a.hamiltonian) {
                (Some(_), Some(_)) => return Err(Failure::Validation("give --pauli or --hamiltonian, not both".into())),
                (Some(p), None) => ObservableSource::Pauli(p),
                (None, Some(h)) => ObservableSource::Hamiltonian(h),
                (None, None) => ObservableSource::Pauli(format!("Z{}", "I".repeat(a.n.saturating_sub(1)))),
            };
            let first = pepqc::ParamIndex::new(a.mu, a.l);
            let second = match (a.mu2, a.l2) {
                (Some(m), Some(l)) => Some(pepqc::ParamIndex::new(m, l)),
                (None, None) => None,
                _ => return Err(Failure::Validation("--mu2 and --l2 go together".into())),
            };
            let estimator = match family {
                Family::PS => EstimatorSpec::ps(component),
                Family::FD => EstimatorSpec::fd(component, a.epsilon.unwrap_or(0.5)),
                Family::GD => {
                    let c = a.coefficients.unwrap_or_else(|| vec![1.0 / a.order as f64; a.order]);
                    EstimatorSpec::gd(component, a.epsilon.unwrap_or(0.5), c)
                }
            };
            EstimateConfig {
                circuit: CircuitSpec {
                    n: a.n,
                    layers: a.layers,
                    reps: a.reps,
                    topology: a.topology.parse::<Topology>()?,
                    encoding: None,
                },
                observable,
                request: RequestConfig {
                    component,
                    first,
                    second,
                },
                estimator,
                n_t: a.n_t,
                seed: 0,
            }
        }
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.estimator.validate()?;
    let base = common.config.as_deref().and_then(Path::parent);
    let obs = cfg.observable.load(base)?;
    let circuit = cfg.circuit.build()?;
    let budget = cfg.n_t.map(Budget::Shots).unwrap_or(Budget::Exact);
    let (value, exact_ps) = estimate_once(&circuit, &obs, &cfg.estimator, &cfg.request.request(), budget, cfg.seed)?;
    let row = EstimateOutput {
        estimator: cfg.estimator.label(),
        component: cfg.estimator.component,
        n_t: cfg.n_t,
        value,
        exact_ps,
        seed: cfg.seed,
    };
    Ok(match format {
        Format::Json => to_json(&row)?,
        Format::Csv => format!(
            "estimator,component,N_T,value,exact_ps,seed\n{},{},{},{},{},{}\n",
            row.estimator,
            row.component,
            row.n_t.map(|n| n.to_string()).unwrap_or_default(),
            fmt_float(value),
            fmt_float(exact_ps),
            row.seed
        ),
    })
}

fn mse_sweep_cmd(common: &Common, a: MseSweepArgs, format: Format) -> CliResult<String> {
    let mut cfg = match (&a.preset, &common.config) {
        (Some(_), Some(_)) => return Err(Failure::Validation("give --preset or --config, not both".into())),
        (Some(name), None) => ExperimentConfig::preset(name)?,
        (None, Some(p)) => ExperimentConfig::from_json(&read_config(p)?)?,
        (None, None) => return Err(Failure::Validation("mse-sweep needs --config or --preset".into())),
    };
    if a.full_scale {
        cfg = cfg.full_scale();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let base = common.config.as_deref().and_then(Path::parent);
    let obs = cfg.observable.load(base)?;
    let records = run_empirical_mse(&cfg, &obs)?;
    let text = match format {
        Format::Csv => records_to_csv(&records),
        Format::Json => to_json(&records)?,
    };
    if common.out.is_none() {
        if let Some(p) = &cfg.output {
            write_text(p, &text)?;
            return Ok(String::new());
        }
    }
    Ok(text)
}

fn analytic_cmd(common: &Common, a: AnalyticArgs, format: Format) -> CliResult<String> {
    let cfg: SweepConfig = match &common.config {
        Some(p) => parse_json(&read_config(p)?)?,
        None => SweepConfig {
            kind: a.kind.parse::<SweepKind>()?,
            components: match a.components {
                Some(cs) => cs.iter().map(|c| c.parse()).collect::<pepqc::Result<_>>()?,
                None => Component::ALL.to_vec(),
            },
            orders: a.orders,
            n_t: a.n_t,
            n_min: a.n_min,
            n_max: a.n_max,
            eps_max: std::f64::consts::TAU,
        },
    };
    let rows = run_analytic_sweep(&cfg)?;
    Ok(match format {
        Format::Csv => analytic_rows_to_csv(&rows),
        Format::Json => to_json(&rows)?,
    })
}

fn nstar_cmd(a: NstarArgs, format: Format) -> CliResult<String> {
    let component: Component = a.component.parse()?;
    if a.n == 0 || a.n > 62 {
        return Err(Failure::Validation(format!("--n {} out of range", a.n)));
    }
    let d = 1u64 << a.n;
    let crossings = n_star_crossings(component, d, a.order)?;
    let approx = if a.order == 1 {
        n_star_fd_approx(component, d)?
    } else {
        n_star_gd_lower(component, d, a.order)?
    };
    let row = NstarOutput {
        component,
        n_qubits: a.n,
        order: a.order,
        crossings,
        approx,
    };
    Ok(match format {
        Format::Json => to_json(&row)?,
        Format::Csv => {
            let mut s = String::from("component,n_qubits,J,crossing,approx\n");
            if row.crossings.is_empty() {
                s.push_str(&format!("{},{},{},,{}\n", component, a.n, a.order, fmt_float(approx)));
            }
            for x in &row.crossings {
                s.push_str(&format!("{},{},{},{},{}\n", component, a.n, a.order, fmt_float(*x), fmt_float(approx)));
            }
            s
        }
    })
}

fn haar_cmd(common: &Common, a: HaarArgs, format: Format) -> CliResult<String> {
    let mut cfg = match &common.config {
        Some(p) => HaarConfig::from_json(&read_config(p)?)?,
        None => HaarConfig::default_four_qubit(),
    };
    if let Some(d) = a.draws {
        cfg.draws = d;
    }
    if let Some(r) = a.reps {
        cfg.circuit.reps = r;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let report = verify_haar(&cfg)?;
    Ok(match format {
        Format::Csv => haar_to_csv(&report),
        Format::Json => to_json(&report)?,
    })
}

fn eig_cmd(a: EigArgs, format: Format) -> CliResult<String> {
    let obs = match &a.hamiltonian {
        Some(p) => pepqc::bench::load_hamiltonian(p)?,
        None => ObservableSource::Builtin("water".into()).load(None)?,
    };
    let mut ev = eigenvalues(&obs);
    if !a.all {
        ev.truncate(1);
    }
    let out = EigOutput {
        num_terms: obs.len(),
        n_qubits: obs.num_qubits(),
        eigenvalues: ev,
    };
    Ok(match format {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let mut s = String::from("index,eigenvalue\n");
            for (i, e) in out.eigenvalues.iter().enumerate() {
                s.push_str(&format!("{i},{}\n", fmt_float(*e)));
            }
            s
        }
    })
}
