use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use corridor_nav::cli::{
    repl, report_from_log, run_scenario, summary_line, write_artifacts, CliError, ProviderKind, ProviderSettings, Scenario,
    EXIT_OK,
};
use corridor_nav::navigator::{NavConfig, Navigator};
use corridor_nav::planning::PromptTemplates;
use corridor_nav::world::EnvironmentMap;

#[derive(Parser)]
#[command(name = "corridor-nav", version, about = "Corridor waypoint navigation harness")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a scenario file or an ad-hoc command list.
    Run {
        /// Built-in scenario name (env_a_tour, ...) or scenario file.
        #[arg(long, conflicts_with = "env")]
        scenario: Option<String>,
        /// Environment for ad-hoc commands given with --command.
        #[arg(long, requires = "commands")]
        env: Option<String>,
        #[arg(long = "command", value_name = "TEXT")]
        commands: Vec<String>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long)]
        continue_on_failure: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Interactive command prompt.
    Repl {
        #[arg(long, default_value = "env_a")]
        env: String,
        #[command(flatten)]
        common: Common,
    },
    /// Rebuild metric reports from a persisted events.jsonl.
    Report {
        #[arg(long)]
        events: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "oracle")]
    provider: ProviderKind,
    #[arg(long, env = "NAV_LLM_URL")]
    llm_url: Option<String>,
    #[arg(long, env = "NAV_LLM_MODEL")]
    model: Option<String>,
    #[arg(long)]
    stub_script: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory with replacement prompt templates.
    #[arg(long)]
    prompt_dir: Option<PathBuf>,
    /// JSON file with navigator configuration overrides.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn settings(&self, scenario_seed: u64) -> ProviderSettings {
        ProviderSettings {
            kind: self.provider,
            llm_url: self.llm_url.clone(),
            model: self.model.clone(),
            stub_script: self.stub_script.clone(),
            seed: self.seed.unwrap_or(scenario_seed),
        }
    }

    fn templates(&self) -> Result<PromptTemplates, CliError> {
        match &self.prompt_dir {
            Some(dir) => PromptTemplates::load_dir(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display()))),
            None => Ok(PromptTemplates::default()),
        }
    }

    fn nav_config(&self) -> Result<NavConfig, CliError> {
        let cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => NavConfig::default(),
        };
        cfg.validate().map_err(CliError::Config)?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Cmd::Run {
            scenario,
            env,
            commands,
            out_dir,
            continue_on_failure,
            common,
        } => {
            let scenario = match (scenario, env) {
                (Some(s), _) => Scenario::resolve(&s)?,
                (None, Some(env)) => Scenario {
                    environment: env,
                    commands,
                    obstacle_script: Vec::new(),
                    seed: 0,
                },
                (None, None) => return Err(CliError::Config("pass --scenario or --env with --command".into())),
            };
            let settings = common.settings(scenario.seed);
            let result = run_scenario(&scenario, &settings, &common.nav_config()?, &common.templates()?, continue_on_failure)?;
            write_artifacts(&result, &out_dir)?;
            for (m, o) in result.metrics.iter().zip(&result.outcomes) {
                println!("{}", summary_line(m));
                if let Some(report) = &o.report {
                    println!("  report: {report}");
                }
            }
            println!("artifacts written to {}", out_dir.display());
            Ok(result.exit_code())
        }
        Cmd::Repl { env, common } => {
            let map = EnvironmentMap::resolve(&env).map_err(|e| CliError::Config(e.to_string()))?;
            let settings = common.settings(0);
            let mut provider = settings.build()?;
            let mut nav = Navigator::new(map, common.nav_config()?, common.templates()?, settings.clock());
            let stdin = io::stdin();
            repl(stdin.lock(), &mut io::stdout(), &mut nav, provider.as_mut())?;
            Ok(EXIT_OK)
        }
        Cmd::Report { events, out_dir } => {
            let log = report_from_log(&events, &out_dir)?;
            for m in log.metrics() {
                println!("{}", summary_line(&m));
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("corridor-nav: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
