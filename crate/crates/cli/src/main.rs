//! `bcjack`: identity checks, expression evaluation and golden-value
//! maintenance from the command line.
//!
//! Exit codes: 0 PASS, 1 FAIL, 2 UNCONVERGED, 3 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bcjack_cli::config::{CheckConfig, Identity};
use bcjack_cli::report::SampleStatus;
use bcjack_cli::{checks, eval, goldens};
use bcjack_core::interp::InterpMethod;
use bcjack_core::qnum::PrecisionContext;

#[derive(Parser)]
#[command(name = "bcjack", version, about = "q-series and BC_n Jackson-integral identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an identity check over sampled parameters and report residuals.
    Check(CheckArgs),
    /// Evaluate a single expression and print the value.
    Eval(EvalArgs),
    /// Regenerate the golden-value battery.
    GoldenUpdate {
        /// Golden file path.
        #[arg(long, default_value = "goldens/goldens.json")]
        goldens: PathBuf,
        /// Production precision for the battery.
        #[arg(long, default_value_t = goldens::GOLDEN_BITS)]
        bits: u32,
    },
    /// Compare the battery against stored golden values.
    GoldenVerify {
        #[arg(long, default_value = "goldens/goldens.json")]
        goldens: PathBuf,
        /// Precision at which the battery is recomputed.
        #[arg(long, default_value_t = 256)]
        bits: u32,
    },
}

#[derive(clap::Args)]
struct CheckArgs {
    /// Identity to verify.
    #[arg(long, value_enum)]
    identity: Option<Identity>,
    /// Declarative configuration file (TOML, same fields as the flags);
    /// flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Working precision in bits.
    #[arg(long)]
    bits: Option<u32>,
    /// Lattice truncation radius for Jackson-integral checks.
    #[arg(long)]
    radius: Option<u32>,
    /// Residual floor override.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Fix the real base q instead of sampling it.
    #[arg(long)]
    q: Option<f64>,
    /// Write the JSON report here.
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Expression kind: theta | e-symbol | schur | interp | jackson.
    kind: String,
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long, default_value_t = 256)]
    bits: u32,
    /// Argument of theta.
    #[arg(long)]
    u: Option<String>,
    /// First argument of the e-symbol.
    #[arg(long)]
    a: Option<String>,
    /// Second argument of the e-symbol.
    #[arg(long)]
    b: Option<String>,
    /// Characters a_1..a_{2s+2} for jackson (list, `;`-separated).
    #[arg(long)]
    chars: Option<String>,
    /// Multi-index (comma-separated parts).
    #[arg(long)]
    lambda: Option<String>,
    /// Evaluation point list (`;`-separated complex numbers `re[,im]`).
    #[arg(long)]
    z: Option<String>,
    /// Base points x (list).
    #[arg(long)]
    x: Option<String>,
    /// Deformation parameter t.
    #[arg(long)]
    t: Option<String>,
    /// Interpolation route: explicit | recursive | triangular.
    #[arg(long, default_value = "explicit")]
    method: String,
    /// Test function for jackson: `one` or `schur:<lambda>`.
    #[arg(long, default_value = "one")]
    phi: Option<String>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 40)]
    radius: u32,
    #[arg(long, default_value_t = 1e-12)]
    shell_stop: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Check(args) => run_check_command(args),
        Command::Eval(args) => run_eval_command(args),
        Command::GoldenUpdate { goldens: path, bits } => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            let file = goldens::update(&path, bits)?;
            println!(
                "wrote {} golden entries at {} bits to {}",
                file.entries.len(),
                bits,
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::GoldenVerify { goldens: path, bits } => {
            let mismatches = goldens::verify(&path, bits)?;
            if mismatches.is_empty() {
                println!("golden verify: PASS ({} bits)", bits);
                Ok(ExitCode::SUCCESS)
            } else {
                for m in &mismatches {
                    println!("golden mismatch: {} relative {:.3e}", m.name, m.relative);
                }
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn run_check_command(args: CheckArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str::<CheckConfig>(&text)?
        }
        None => {
            let identity = args
                .identity
                .ok_or("either --identity or --config is required")?;
            CheckConfig::new(identity)
        }
    };
    if let Some(identity) = args.identity {
        if args.config.is_some() && identity != cfg.identity {
            // flag overrides the file, shapes reset to the identity default
            cfg = CheckConfig::new(identity);
        }
    }
    if let Some(v) = args.s {
        cfg.s = v;
    }
    if let Some(v) = args.n {
        cfg.n = v;
        cfg.radius = if v <= 2 { cfg.radius.min(40) } else { cfg.radius.min(25) };
    }
    if let Some(v) = args.r {
        cfg.r = v;
    }
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.bits {
        cfg.precision_bits = v;
    }
    if let Some(v) = args.radius {
        cfg.radius = v;
    }
    if args.tolerance.is_some() {
        cfg.tolerance = args.tolerance;
    }
    if args.q.is_some() {
        cfg.q = args.q;
    }
    let report = checks::run_check(&cfg)?;
    for s in &report.samples {
        let status = match s.status {
            SampleStatus::Pass => "pass",
            SampleStatus::Fail => "FAIL",
            SampleStatus::Unconverged => "UNCONVERGED",
            SampleStatus::Error => "ERROR",
        };
        match s.residual {
            Some(r) => println!(
                "sample {:3}  q={:.4}  residual {:.3e}  threshold {:.3e}  [{status}]",
                s.index, s.q, r, s.effective_threshold
            ),
            None => println!(
                "sample {:3}  q={:.4}  {status}  {}",
                s.index,
                s.q,
                s.message.as_deref().unwrap_or("")
            ),
        }
    }
    println!(
        "verdict: {:?}  (max residual {:.3e}, {} samples)",
        report.verdict,
        report.max_residual(),
        report.samples.len()
    );
    if let Some(path) = args.json {
        std::fs::write(&path, report.to_json())?;
        println!("report written to {}", path.display());
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn run_eval_command(args: EvalArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let ctx = PrecisionContext::real(args.bits, args.q)?;
    let need = |opt: &Option<String>, name: &str| -> Result<String, String> {
        opt.clone().ok_or_else(|| format!("--{name} is required for this kind"))
    };
    let out = match args.kind.as_str() {
        "theta" => eval::eval_theta(&ctx, &need(&args.u, "u")?)?,
        "e-symbol" => eval::eval_e_symbol(&ctx, &need(&args.a, "a")?, &need(&args.b, "b")?)?,
        "schur" => eval::eval_schur(&ctx, &need(&args.lambda, "lambda")?, &need(&args.z, "z")?)?,
        "interp" => {
            let method = match args.method.as_str() {
                "explicit" => InterpMethod::Explicit,
                "recursive" => InterpMethod::Recursive,
                "triangular" => InterpMethod::Triangular,
                other => return Err(format!("unknown method {other:?}").into()),
            };
            eval::eval_interp(
                &ctx,
                &need(&args.t, "t")?,
                &need(&args.x, "x")?,
                &need(&args.lambda, "lambda")?,
                &need(&args.z, "z")?,
                method,
                args.chars.as_deref(),
            )?
        }
        "jackson" => eval::eval_jackson(
            &ctx,
            args.s.ok_or("--s is required for jackson")?,
            args.n.ok_or("--n is required for jackson")?,
            &need(&args.t, "t")?,
            &need(&args.chars, "chars")?,
            &need(&args.x, "x")?,
            &need(&args.z, "z")?,
            args.phi.as_deref().unwrap_or("one"),
            args.radius,
            args.shell_stop,
        )?,
        other => return Err(format!("unknown expression kind {other:?}").into()),
    };
    println!("re: {}", out.value.0);
    println!("im: {}", out.value.1);
    println!("precision_bits: {}", out.precision_bits);
    for (k, v) in &out.details {
        println!("{k}: {v}");
    }
    Ok(ExitCode::SUCCESS)
}
