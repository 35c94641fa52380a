use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use octa_cli::{
    cmd_classify, cmd_evaluate, cmd_features, cmd_phantom, cmd_process, cmd_volume, format_table, DatasetManifest,
    PhantomOptions, RunConfig,
};

#[derive(Parser)]
#[command(name = "octa", version, about = "OCTA neovascular lesion segmentation, biomarkers, volumetry and rule-based classification")]
struct Cli {
    /// Pipeline and classifier settings (TOML or JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for every random choice (splits, phantoms).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment every manifest entry into a PGM mask.
    Process {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the eight intermediate stage images per entry.
        #[arg(long)]
        dump_stages: bool,
    },
    /// Extract areas and vessel density into features.csv.
    Features {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Volume table and STL surface of section stacks.
    Volume {
        #[arg(long)]
        manifest: PathBuf,
        /// Stack group to measure; repeat for several, omit for all.
        #[arg(long = "group")]
        groups: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train and evaluate the rule-based classifiers on a features CSV.
    Classify {
        #[arg(long)]
        features: PathBuf,
        /// Directory with svm.json / dl.json rule sets replacing the built-in ones.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Jaccard and Dice of pipeline masks against annotations.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset with ground truth and a manifest.
    Phantom {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        lesions: usize,
        #[arg(long, default_value_t = 0)]
        healthy: usize,
        /// Sections per visit of a two-visit stack (0: none).
        #[arg(long, default_value_t = 0)]
        sections: usize,
        #[arg(long, default_value_t = 510)]
        size: usize,
    },
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = RunConfig::load_or_default(cli.config.as_deref())?;
    let load = |p: &PathBuf| DatasetManifest::load(p).with_context(|| format!("manifest {}", p.display()));
    let failed = match cli.command {
        Command::Process {
            manifest,
            out,
            dump_stages,
        } => {
            let r = cmd_process(&load(&manifest)?, &cfg, &out, cli.jobs, dump_stages)?;
            println!("processed {} entries, {} failed", r.entries.len(), r.failed);
            r.failed
        }
        Command::Features { manifest, out } => {
            let (rows, r) = cmd_features(&load(&manifest)?, &cfg, &out, cli.jobs)?;
            println!("wrote {} feature rows to {}", rows.len(), out.join("features.csv").display());
            r.failed
        }
        Command::Volume { manifest, groups, out } => {
            let (rows, r) = cmd_volume(&load(&manifest)?, &cfg, &groups, &out, cli.jobs)?;
            print!("{}", format_table(&rows));
            r.failed
        }
        Command::Classify { features, rules, out } => {
            let s = cmd_classify(&features, &cfg, rules.as_deref(), cli.seed, &out)?;
            println!("train {} / test {}, DT train accuracy {:.4}", s.train, s.test, s.dt_train_accuracy);
            if let Some(a) = s.test_accuracy {
                println!(
                    "test accuracy: DT {:.4}  SVM {:.4}  DL {:.4}  ensemble {:.4}",
                    a.dt, a.svm, a.dl, a.ensemble
                );
            }
            0
        }
        Command::Evaluate { manifest, out } => {
            let (e, r) = cmd_evaluate(&load(&manifest)?, &cfg, &out, cli.jobs)?;
            match &e.aggregate {
                Some(a) => println!(
                    "{} images: mean Jaccard {:.4}, mean Dice {:.4}, pooled Jaccard {:.4}, pooled Dice {:.4}",
                    a.images, a.mean_jaccard, a.mean_dice, a.pooled_jaccard, a.pooled_dice
                ),
                None => println!("no annotated entries"),
            }
            r.failed
        }
        Command::Phantom {
            out,
            lesions,
            healthy,
            sections,
            size,
        } => {
            let mut opts = PhantomOptions {
                lesions,
                healthy,
                stack_sections: sections,
                ..Default::default()
            };
            opts.params.size = size;
            let m = cmd_phantom(&out, &opts, cli.seed)?;
            println!("wrote {} phantom images and {}", m.entries.len(), out.join("manifest.json").display());
            0
        }
    };
    Ok(failed == 0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
