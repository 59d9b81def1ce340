use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use monoland::bridge::{serve, ServeOptions, SessionContext};
use monoland::harness::workflow::{self, load_or_fit, Artifacts, ScenarioKind};
use monoland::harness::{HarnessConfig, ReportFormat};
use std::path::PathBuf;
use std::sync::Arc;

/// Monocular-vision UAV landing simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Use this single training seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifact directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Set {
    Static,
    Dynamic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Md,
}

#[derive(Subcommand)]
enum Verb {
    /// Fit the altitude and depth estimators and save them.
    FitEstimators,
    /// Train one landing policy per seed.
    Train,
    /// Evaluate saved policies on a scenario set; writes reports and trajectories.
    Eval {
        #[arg(long, value_enum)]
        scenario: Set,
    },
    /// Render a JSON record file as csv, json or markdown on stdout.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
    },
    /// Serve live sessions over TCP / WebSocket.
    Serve {
        /// Listen address; MONOLAND_BIND overrides the default.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Fly the scripted pilot on the static cases with and without the co-pilot.
    DemoPilot,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(p) => HarnessConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => HarnessConfig::default(),
    };
    let seeds = cli.seed.map(|s| vec![s]).unwrap_or_else(|| cfg.rl.seeds.clone());
    let art = Artifacts::new(&cli.out);

    match cli.verb {
        Verb::FitEstimators => {
            let m = workflow::fit_and_save(&cfg, &art)?;
            println!(
                "estimator: altitude rms {:.3e} m, depth rms {:.3e} m -> {}",
                m.fit_residual_rms,
                m.depth_residual_rms,
                art.estimator().display()
            );
        }
        Verb::Train => {
            let model = Arc::new(load_or_fit(&cfg, &art)?);
            for (seed, _) in workflow::train_and_save(&cfg, &art, model, &seeds)? {
                println!("policy seed {seed} -> {}", art.policy(seed).display());
            }
        }
        Verb::Eval { scenario } => {
            let kind = match scenario {
                Set::Static => ScenarioKind::Static,
                Set::Dynamic => ScenarioKind::Dynamic,
            };
            let model = Arc::new(load_or_fit(&cfg, &art)?);
            for (seed, res) in workflow::eval_and_save(&cfg, &art, model, kind, &seeds)? {
                let wins = res.runs.iter().filter(|r| r.metrics.success).count();
                println!(
                    "{} seed {seed}: {wins}/{} landings -> {}",
                    kind.name(),
                    res.runs.len(),
                    art.report(&format!("eval_{}_seed{seed}", kind.name()), ReportFormat::Csv).display()
                );
            }
        }
        Verb::Report { input, format } => {
            let f = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Json => ReportFormat::Json,
                Format::Md => ReportFormat::Md,
            };
            print!("{}", workflow::convert_report(&input, f)?);
        }
        Verb::Serve { bind } => {
            let mut opts = ServeOptions::default().with_env_overrides()?;
            if let Some(b) = bind {
                opts.bind = b;
            }
            let model = Arc::new(load_or_fit(&cfg, &art)?);
            let policy = Arc::new(workflow::load_policy(&art, seeds[0])?);
            serve(Arc::new(SessionContext { config: cfg, policy, model }), &opts)?;
        }
        Verb::DemoPilot => {
            let model = Arc::new(load_or_fit(&cfg, &art)?);
            let policy = Arc::new(workflow::load_policy(&art, seeds[0])?);
            let s = workflow::demo_pilot(&cfg, &art, policy, model, 0)?;
            println!(
                "mean lateral displacement: assisted {:.2} cm, pilot alone {:.2} cm",
                s.assisted_mean_cm(),
                s.unassisted_mean_cm()
            );
        }
    }
    Ok(())
}
