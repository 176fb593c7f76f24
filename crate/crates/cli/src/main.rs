use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use jumpvar::effective::{eliminate, strip_auxiliary};
use jumpvar::model::{anisotropy_jumps, ferro_pump_jumps, renormalized, DissipativeModel, ModelConfig};
use jumpvar::operator::{basis_ket, ComplexOperator};
use jumpvar::opspec::{format_matrix, format_pauli, parse_problem};
use jumpvar::oracle::{build_liouvillian, steady_states, Topology};
use jumpvar::sweep::{fmt_sig, read_csv, run_sweep, write_csv, SweepConfig};
use jumpvar::variational::{fit_critical, landau_expansion, FitWindow, LandauDirection, OrderParameter};
use jumpvar::Error;

/// Variational steady states of dissipative spin lattices.
#[derive(Parser, Debug)]
#[command(name = "jumpvar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimize the variational norm over a λ grid and write CSV.
    Sweep(SweepArgs),
    /// Locate a transition in a sweep CSV and fit its exponent.
    Fit(FitArgs),
    /// Eliminate auxiliary spins from a problem file.
    Effective(EffectiveArgs),
    /// Exact steady states of a small cluster.
    Oracle(OracleArgs),
    /// Quartic expansion of the norm in an order parameter.
    Landau(LandauArgs),
}

/// Model options shared by the lattice subcommands. Flags override the
/// config file, which overrides the defaults.
#[derive(Args, Debug)]
struct ModelArgs {
    /// Plain-text `key = value` file (lambda, z, bipartite, renormalize, ansatz).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coordination number.
    #[arg(long)]
    z: Option<usize>,
    /// Divide two-site rates by z − 1.
    #[arg(long)]
    renormalize: Option<bool>,
    #[arg(long, value_parser = ["uniform", "bipartite"])]
    ansatz: Option<String>,
}

impl ModelArgs {
    fn resolve(&self) -> anyhow::Result<ModelConfig> {
        let mut cfg = match &self.config {
            Some(path) => ModelConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
            None => ModelConfig::default(),
        };
        if let Some(z) = self.z {
            cfg.z = z;
        }
        if let Some(r) = self.renormalize {
            cfg.renormalize = r;
        }
        if let Some(a) = &self.ansatz {
            cfg.ansatz = a.parse()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    lambda_min: f64,
    #[arg(long)]
    lambda_max: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Skip the refinement around transitions.
    #[arg(long)]
    no_refine: bool,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// CSV written by `sweep`.
    csv: PathBuf,
    #[arg(long, value_parser = ["m", "ms"], default_value = "m")]
    which: String,
    #[arg(long, default_value_t = 0.01)]
    window_min: f64,
    #[arg(long, default_value_t = 0.1)]
    window_max: f64,
    /// Append the JSON record to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EffectiveArgs {
    /// Problem file (see the opspec format).
    problem: PathBuf,
    /// Matrix entries and Pauli coefficients below this are dropped.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Anisotropy rate; overrides the config value.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, value_parser = ["chain", "ring", "complete"], default_value = "chain")]
    topology: String,
    /// Which jump sets to include.
    #[arg(long, value_parser = ["all", "ferro", "anisotropy"], default_value = "all")]
    jumps: String,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// CSV of eigenvalues (re,im).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LandauArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_parser = ["in-plane", "staggered-z"], default_value = "in-plane")]
    direction: String,
    #[arg(long, default_value_t = 0.02)]
    phi_max: f64,
    #[arg(long, default_value_t = 21)]
    samples: usize,
    /// Append the JSON record to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn append_json(path: &Option<PathBuf>, line: &str) -> anyhow::Result<()> {
    if let Some(p) = path {
        let mut f = OpenOptions::new().create(true).append(true).open(p).with_context(|| format!("opening {}", p.display()))?;
        writeln!(f, "{line}")?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> anyhow::Result<()> {
    let model = args.model.resolve()?;
    let mut cfg = SweepConfig::new(args.lambda_min, args.lambda_max, args.step, model.lattice(), model.ansatz);
    cfg.seed = args.seed;
    cfg.jobs = args.jobs;
    cfg.restarts = args.restarts;
    cfg.refine = !args.no_refine;
    let records = run_sweep(&cfg)?;
    match &args.out {
        Some(p) => {
            let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_csv(io::BufWriter::new(f), &records)?;
        }
        None => write_csv(io::stdout().lock(), &records)?,
    }
    let flagged = records.iter().filter(|r| !r.converged).count();
    if flagged > 0 {
        eprintln!("warning: {flagged} of {} points did not converge", records.len());
    }
    Ok(())
}

fn fit(args: FitArgs) -> anyhow::Result<()> {
    let which: OrderParameter = args.which.parse()?;
    let window = FitWindow::new(args.window_min, args.window_max)?;
    let f = fs::File::open(&args.csv).with_context(|| format!("opening {}", args.csv.display()))?;
    let records = read_csv(io::BufReader::new(f)).with_context(|| format!("reading {}", args.csv.display()))?;
    let fit = fit_critical(&records, which, window)?;
    println!("order parameter  {}", fit.which);
    println!("lambda_c         {}", fmt_sig(fit.lambda_c));
    println!("bracket          [{}, {}]", fmt_sig(fit.bracket[0]), fmt_sig(fit.bracket[1]));
    println!("beta             {}", fmt_sig(fit.beta));
    println!("amplitude        {}", fmt_sig(fit.amplitude));
    println!("window           [{}, {}]", fit.window.min, fit.window.max);
    println!("r_squared        {}", fmt_sig(fit.r_squared));
    println!("points           {}", fit.points);
    let json = serde_json::to_string(&fit)?;
    println!("{json}");
    append_json(&args.out, &json)
}

fn effective(args: EffectiveArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.problem).with_context(|| format!("reading {}", args.problem.display()))?;
    let problem = parse_problem(&text).with_context(|| format!("parsing {}", args.problem.display()))?;
    let eff = eliminate(&problem)?;
    let aux = &problem.auxiliary_sites;
    let show = |name: &str, op: &ComplexOperator| -> anyhow::Result<()> {
        let sys = strip_auxiliary(op, aux)?;
        println!("{name} = {}", format_pauli(op, args.tol));
        println!("{name} on the system (auxiliary ↓) = {}", format_pauli(&sys, args.tol));
        println!("{}", format_matrix(&sys));
        Ok(())
    };
    println!("auxiliary sites: {aux:?}");
    show("H_eff", &eff.hamiltonian)?;
    if eff.jumps.iter().all(|c| c.max_abs() <= args.tol) {
        println!("no effective jumps");
    }
    for (k, c) in eff.jumps.iter().enumerate() {
        if c.max_abs() > args.tol {
            show(&format!("c_eff[{k}]"), c)?;
        }
    }
    Ok(())
}

fn select_jumps(model: DissipativeModel, which: &str, lambda: f64) -> anyhow::Result<DissipativeModel> {
    let jumps = match which {
        "ferro" => ferro_pump_jumps(),
        "anisotropy" => anisotropy_jumps(lambda)?,
        _ => return Ok(model),
    };
    Ok(renormalized(DissipativeModel::new(model.lattice, Vec::new(), jumps)))
}

fn basis_label(index: usize, n: usize) -> String {
    (0..n).map(|s| if (index >> (n - 1 - s)) & 1 == 0 { 'u' } else { 'd' }).collect()
}

fn oracle(args: OracleArgs) -> anyhow::Result<()> {
    let cfg = args.model.resolve()?;
    let lambda = args.lambda.unwrap_or(cfg.lambda);
    let topology: Topology = args.topology.parse()?;
    let model = select_jumps(cfg.heisenberg(lambda)?, &args.jumps, lambda)?;
    let l = build_liouvillian(&model, args.n, topology)?;
    let report = steady_states(&l, args.tol)?;
    println!("spins            {}", args.n);
    println!("topology         {topology}");
    println!("bonds            {:?}", l.bonds);
    println!("null dimension   {}", report.null_dimension);
    println!("spectral gap     {}", fmt_sig(report.spectral_gap));
    let dark: Vec<String> = (0..1usize << args.n)
        .filter(|&i| {
            let v = basis_ket(args.n, i);
            let p = ComplexOperator::ket_bra(&v, &v).expect("matching dimensions");
            l.apply(&p).map(|r| r.max_abs() < args.tol).unwrap_or(false)
        })
        .map(|i| basis_label(i, args.n))
        .collect();
    println!("steady basis states  {}", if dark.is_empty() { "none".into() } else { dark.join(" ") });

    let mut ev = report.eigenvalues.clone();
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let mut csv = String::from("re,im\n");
    for e in &ev {
        csv.push_str(&format!("{},{}\n", fmt_sig(e.re), fmt_sig(e.im)));
    }
    match &args.out {
        Some(p) => fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn landau(args: LandauArgs) -> anyhow::Result<()> {
    let cfg = args.model.resolve()?;
    let lambda = args.lambda.unwrap_or(cfg.lambda);
    let direction: LandauDirection = args.direction.parse()?;
    let fit = landau_expansion(&cfg.heisenberg(lambda)?, direction, args.phi_max, args.samples)?;
    println!("lambda     {}", fmt_sig(lambda));
    println!("direction  {}", fit.direction);
    println!("u0         {}", fmt_sig(fit.u0));
    println!("u2         {}", fmt_sig(fit.u2));
    println!("u4         {}", fmt_sig(fit.u4));
    println!("residual   {}", fmt_sig(fit.residual));
    let json = serde_json::json!({
        "lambda": lambda,
        "direction": fit.direction,
        "u0": fit.u0,
        "u2": fit.u2,
        "u4": fit.u4,
        "residual": fit.residual,
        "phi_max": args.phi_max,
        "samples": args.samples,
    })
    .to_string();
    println!("{json}");
    append_json(&args.out, &json)
}

/// 1 usage or config, 2 fit or elimination failure, 3 resource cap.
fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(e) = err.chain().find_map(|c| c.downcast_ref::<Error>()) else {
        return 1;
    };
    match e {
        Error::TooManySpins { .. } | Error::ResourceCap(_) => 3,
        Error::Fit(_)
        | Error::NoTransition
        | Error::GaplessElimination(_)
        | Error::Eigensolver
        | Error::Integrator(_)
        | Error::NotHermitian(_)
        | Error::NonFinite => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Fit(a) => fit(a),
        Command::Effective(a) => effective(a),
        Command::Oracle(a) => oracle(a),
        Command::Landau(a) => landau(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
