use clap::{Args, Parser, Subcommand, ValueEnum};
use maslovkit::io::{self, Command, Format, InputItem, RunConfig, ScalarKind, DEMOS};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "maslovkit", version, about = "Partial signatures, Maslov-type indices and Morse-Sturm index checks")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Arithmetic used for forms and frames.
    #[arg(long, value_enum, default_value_t = ScalarArg::Exact, global = true)]
    scalar: ScalarArg,
    /// Relative rank tolerance for float arithmetic.
    #[arg(long, default_value_t = 1e-9, global = true)]
    tol: f64,
    /// Treat singular values inside the ambiguity band as errors.
    #[arg(long, global = true)]
    strict: bool,
    /// Galerkin basis size per coordinate (checked against twice this size).
    #[arg(long, default_value_t = maslovkit::morse_sturm::DEFAULT_GALERKIN_N, global = true)]
    galerkin_n: usize,
    /// Spectral shift; defaults to sup |R| + 1.
    #[arg(long, global = true)]
    m0: Option<f64>,
    /// Seed for randomized transversals and charts (decimal or 0x hex).
    #[arg(long, env = io::SEED_ENV, value_parser = io::parse_seed, global = true)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json, global = true)]
    format: FormatArg,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0, global = true)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalarArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct Inputs {
    /// Input JSON files; a file holding an array yields one item per element.
    #[arg(long = "input", short = 'i')]
    input: Vec<String>,
    /// Bundled example by name (see `maslovkit demos`).
    #[arg(long)]
    demo: Vec<String>,
    /// Further input files.
    files: Vec<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Partial signatures of a jet, or the spectral flow of a polynomial path.
    Psig(Inputs),
    /// Maslov index of a Lagrangian path relative to L0.
    Maslov(Inputs),
    /// Maslov index of a pair of Lagrangian paths.
    Pair(Inputs),
    /// Kashiwara triple index with its identity ledger.
    Triple(Inputs),
    /// Hörmander four-fold index with its symmetry ledger.
    Hormander(Inputs),
    /// Conley-Zehnder index of a symplectic path.
    Cz(Inputs),
    /// Maslov, Morse and spectral indices of a Morse-Sturm system.
    Geodesic(Inputs),
    /// List the bundled examples, or run all of them.
    Demos {
        #[arg(long)]
        run: bool,
    },
}

fn gather(cmd: Command, inputs: &Inputs) -> Result<(Vec<String>, Vec<InputItem>), String> {
    let mut names = Vec::new();
    let mut items = Vec::new();
    for d in &inputs.demo {
        let demo = io::demo(d).ok_or_else(|| format!("unknown demo {d:?}"))?;
        if demo.command != cmd {
            return Err(format!("demo {d:?} belongs to `{}`", demo.command.name()));
        }
        names.push(format!("demo:{d}"));
        items.extend(demo.items());
    }
    for path in inputs.input.iter().chain(&inputs.files) {
        names.push(path.clone());
        match std::fs::read_to_string(path) {
            Ok(text) => items.extend(io::items_from_text(path, &text)),
            Err(e) => items.push(InputItem { name: path.clone(), value: Err(format!("cannot read {path}: {e}")) }),
        }
    }
    if items.is_empty() {
        return Err("no inputs: pass --input FILE or --demo NAME".into());
    }
    Ok((names, items))
}

fn config(cmd: Command, opts: &Opts) -> RunConfig {
    let mut cfg = RunConfig::new(cmd);
    cfg.scalar = match opts.scalar {
        ScalarArg::Exact => ScalarKind::Exact,
        ScalarArg::Float => ScalarKind::Float,
    };
    cfg.format = match opts.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Text => Format::Text,
    };
    cfg.tol = opts.tol;
    cfg.strict = opts.strict;
    cfg.galerkin_n = opts.galerkin_n;
    cfg.m0 = opts.m0;
    cfg.seed = opts.seed.unwrap_or(io::DEFAULT_SEED);
    cfg.jobs = opts.jobs;
    cfg
}

fn run_demos(opts: &Opts) -> u8 {
    let mut code = 0;
    for d in DEMOS {
        let mut cfg = config(d.command, opts);
        cfg.inputs = vec![format!("demo:{}", d.name)];
        let r = io::run(&cfg, &d.items());
        let summary = r.items.iter().map(|i| i.summary.as_str()).collect::<Vec<_>>().join("; ");
        println!("{:<28} {:<10} {} {}", d.name, d.command.name(), if r.ok { "ok  " } else { "FAIL" }, summary);
        if code == 0 {
            code = r.exit_code;
        }
    }
    code as u8
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match &cli.command {
        Sub::Demos { run: false } => {
            for d in DEMOS {
                println!("{:<28} {:<10} {}", d.name, d.command.name(), d.description);
            }
            return ExitCode::SUCCESS;
        }
        Sub::Demos { run: true } => return ExitCode::from(run_demos(&cli.opts)),
        Sub::Psig(i) => (Command::Psig, i),
        Sub::Maslov(i) => (Command::Maslov, i),
        Sub::Pair(i) => (Command::Pair, i),
        Sub::Triple(i) => (Command::Triple, i),
        Sub::Hormander(i) => (Command::Hormander, i),
        Sub::Cz(i) => (Command::Cz, i),
        Sub::Geodesic(i) => (Command::Geodesic, i),
    };
    let (command, inputs) = cmd;
    let (names, items) = match gather(command, inputs) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut cfg = config(command, &cli.opts);
    cfg.inputs = names;
    let start = Instant::now();
    let report = io::run(&cfg, &items);
    print!("{}", io::render(&report, cfg.format));
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(report.exit_code as u8)
}
