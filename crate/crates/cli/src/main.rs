//! `unsyn`: check, explain and play GR(1) specifications.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use unsyn_core::engine::{self, Diagnosis, EngineConfig, Verdict};
use unsyn_core::report;
use unsyn_core::sat::write_dimacs;
use unsyn_core::spec::{parse_spec, Spec};
use unsyn_server::{router, AppState};

#[derive(Parser)]
#[command(
    name = "unsyn",
    version,
    about = "Explain why a GR(1) specification cannot be synthesized"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the verdict and failure mode.
    Check(Common),
    /// Print the verdict and a minimal set of statements causing it.
    Explain(ExplainArgs),
    /// Serve the interactive game.
    Game(GameArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Report,
}

#[derive(Args)]
struct Common {
    spec: PathBuf,
    #[arg(long, default_value_t = 15)]
    max_depth: u32,
    /// Milliseconds allowed for each solver call.
    #[arg(long, default_value_t = 30_000)]
    budget_ms: u64,
    /// Largest number of explicit states the game solver may enumerate.
    #[arg(long, default_value_t = 1 << 20)]
    state_cap: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    common: Common,
    /// Unrolling depth for livelock cores found through a counterstrategy.
    #[arg(long)]
    livelock_depth: Option<u32>,
    /// Run the iterated realizability checks on all cores.
    #[arg(long)]
    parallel: bool,
    /// Write the CNF behind the core in DIMACS; extra instances go to P.2, P.3, ...
    #[arg(long, value_name = "P")]
    dump_cnf: Option<PathBuf>,
    #[arg(long, value_name = "P")]
    dump_counterstrategy: Option<PathBuf>,
}

#[derive(Args)]
struct GameArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory of static UI files served at `/`.
    #[arg(long)]
    assets: Option<PathBuf>,
}

fn config(c: &Common) -> EngineConfig {
    EngineConfig {
        max_depth: c.max_depth,
        budget_ms: c.budget_ms,
        atom_cap: c.state_cap.max(1).ilog2() as usize,
        ..EngineConfig::default()
    }
}

fn load(path: &Path) -> Result<Spec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let spec = parse_spec(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    for w in &spec.warnings {
        log::warn!("{w}");
    }
    Ok(spec)
}

fn exit_for(d: &Diagnosis) -> ExitCode {
    ExitCode::from(match d.verdict {
        Verdict::Synthesizable => 0,
        Verdict::Unsatisfiable => 2,
        Verdict::Unrealizable => 3,
    })
}

fn goal_text<'a>(spec: &'a Spec, d: &Diagnosis) -> Option<&'a str> {
    d.livelocked_goal
        .and_then(|id| spec.statement(id))
        .map(|s| s.text.as_str())
}

fn print(spec: &Spec, d: &Diagnosis, format: Format, full: bool) {
    let text = match format {
        Format::Report => report::to_json(d) + "\n",
        Format::Text if full => report::explain_text(d, goal_text(spec, d)),
        Format::Text => report::check_text(d, goal_text(spec, d)),
    };
    // a closed pipe (`| head`) is not an error worth reporting
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check(c) => {
            let spec = load(&c.spec)?;
            let d = engine::check(&spec, &config(&c)).map_err(|e| e.to_string())?;
            print(&spec, &d, c.format, false);
            Ok(exit_for(&d))
        }
        Command::Explain(a) => {
            let spec = load(&a.common.spec)?;
            let cfg = EngineConfig {
                livelock_depth: a.livelock_depth,
                parallel: a.parallel,
                ..config(&a.common)
            };
            let (d, art) = engine::explain_with_artifacts(&spec, &cfg).map_err(|e| e.to_string())?;
            if let Some(p) = &a.dump_cnf {
                for (i, (label, cnf)) in art.cnfs.iter().enumerate() {
                    let path = if i == 0 {
                        p.clone()
                    } else {
                        PathBuf::from(format!("{}.{}", p.display(), i + 1))
                    };
                    write(&path, &format!("c {label}\n{}", write_dimacs(cnf)))?;
                }
            }
            if let (Some(p), Some(cs)) = (&a.dump_counterstrategy, &art.counterstrategy) {
                write(p, &cs.dump(&spec))?;
            }
            print(&spec, &d, a.common.format, true);
            Ok(exit_for(&d))
        }
        Command::Game(g) => {
            let spec = load(&g.common.spec)?;
            let cfg = config(&g.common);
            if engine::check(&spec, &cfg).is_ok_and(|d| d.verdict == Verdict::Synthesizable) {
                log::warn!("the specification is synthesizable; sessions run in sandbox mode");
            }
            let state = Arc::new(AppState::new(cfg, g.seed, Some(spec)));
            let app = router(state, g.assets);
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(("127.0.0.1", g.port))
                    .await
                    .map_err(|e| format!("cannot listen on port {}: {e}", g.port))?;
                eprintln!("serving on http://127.0.0.1:{}", g.port);
                unsyn_server::serve(listener, app).await.map_err(|e| e.to_string())
            })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
