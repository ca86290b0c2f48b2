//! `covscreen`: drive the acoustic screening benchmark end to end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use covscreen_cli::pipeline::{self, FoldReport};
use covscreen_cli::{Overrides, PipelineError, RunConfig};
use covscreen_core::corpus::{load_manifest, Manifest};
use covscreen_core::eval::{subgroup_metrics, by_age_threshold, by_gender, ScoreFile};
use covscreen_core::models::ModelKind;
use covscreen_leaderboard::{serve, Leaderboard, Track, TrackTruth};

#[derive(Parser)]
#[command(name = "covscreen", version, about = "Acoustic screening benchmark pipeline")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, PipelineError> {
        RunConfig::resolve(self.config.as_deref(), &self.overrides)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the synthetic corpus with stratified folds.
    Synth {
        /// Output directory for audio/ and manifest.csv.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Resample to 44.1 kHz and run the preprocessing chain.
    Preprocess {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for processed audio/ and manifest.csv.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Extract per-frame features into CSV files (content-hash cached).
    Featurize {
        #[arg(long)]
        manifest: PathBuf,
        /// Feature cache directory.
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Five-fold training with per-fold validation AUC.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Directory fold models are written to.
        #[arg(long)]
        models: PathBuf,
        /// lr, mlp or rf.
        #[arg(long)]
        model: String,
        #[command(flatten)]
        common: Common,
    },
    /// Score the test split with the fold ensemble.
    Score {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        models: PathBuf,
        /// lr, mlp or rf.
        #[arg(long)]
        model: String,
        /// Score file to write.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a score file against manifest labels; prints JSON metrics.
    Eval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// dev, test or all.
        #[arg(long, default_value = "test")]
        split: String,
        /// Also report per-gender and per-age-group metrics.
        #[arg(long)]
        subgroups: bool,
        /// Age split point for the subgroup report.
        #[arg(long, default_value_t = 40)]
        age_threshold: u32,
    },
    /// Min-max calibrate and mean-fuse score files.
    Fuse {
        /// Fused score file to write.
        #[arg(long)]
        out: PathBuf,
        /// Input score files with identical id sets.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Optional manifest to evaluate the fused scores against.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Run the ticketed leaderboard service.
    Serve {
        /// Append-only journal path (replayed on restart).
        #[arg(long)]
        journal: PathBuf,
        /// Manifest holding ground truth: dev split scores the val track,
        /// test split the test track.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Seed for token generation.
        #[arg(long, default_value_t = 42)]
        token_seed: u64,
    },
}

fn parse_kind(s: &str) -> Result<ModelKind, PipelineError> {
    ModelKind::from_str(s).map_err(|reason| PipelineError::Config {
        path: PathBuf::from("--model"),
        line: 0,
        reason,
    })
}

fn manifest_base(manifest_path: &Path) -> PathBuf {
    manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn load(manifest_path: &Path) -> Result<Manifest, PipelineError> {
    Ok(load_manifest(manifest_path)?)
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cmd: Cmd) -> Result<(), PipelineError> {
    match cmd {
        Cmd::Synth { out, common } => {
            let cfg = common.resolve()?;
            let manifest = pipeline::synth_corpus(&cfg, &out)?;
            print_json(&serde_json::json!({
                "out": out,
                "recordings": manifest.len(),
                "positives": manifest
                    .entries
                    .iter()
                    .filter(|e| e.label.is_positive())
                    .count(),
                "dev": manifest.dev_entries().count(),
                "test": manifest.test_entries().count(),
            }));
            Ok(())
        }
        Cmd::Preprocess { manifest, out, common } => {
            let cfg = common.resolve()?;
            let input = load(&manifest)?;
            let base = manifest_base(&manifest);
            let (_, summary) = pipeline::preprocess_corpus(&input, &base, &out, &cfg)?;
            for (id, reason) in &summary.dropped {
                eprintln!("dropped {id}: {reason}");
            }
            print_json(&summary);
            Ok(())
        }
        Cmd::Featurize { manifest, features, common } => {
            let cfg = common.resolve()?;
            let input = load(&manifest)?;
            let base = manifest_base(&manifest);
            let summary = pipeline::featurize_corpus(&input, &base, &features, &cfg.mfcc)?;
            print_json(&summary);
            Ok(())
        }
        Cmd::Train { manifest, features, models, model, common } => {
            let cfg = common.resolve()?;
            let kind = parse_kind(&model)?;
            let input = load(&manifest)?;
            let report: FoldReport = pipeline::run_five_fold(
                &input,
                &features,
                Some(&models),
                kind,
                &cfg.train,
                cfg.k_folds,
            )?;
            print_json(&report);
            Ok(())
        }
        Cmd::Score { manifest, features, models, model, out, common } => {
            let cfg = common.resolve()?;
            let kind = parse_kind(&model)?;
            let input = load(&manifest)?;
            let scores =
                pipeline::run_test_scoring(&input, &features, &models, kind, cfg.k_folds)?;
            scores.write(&out)?;
            eprintln!("wrote {} scores to {}", scores.len(), out.display());
            Ok(())
        }
        Cmd::Eval { scores, manifest, split, subgroups, age_threshold } => {
            let sf = ScoreFile::read(&scores)?;
            let input = load(&manifest)?;
            let report = pipeline::eval_scores(&sf, &input, &split)?;
            if subgroups {
                let by_g = subgroup_metrics(&sf, &input, by_gender)?;
                let by_a = subgroup_metrics(&sf, &input, by_age_threshold(age_threshold))?;
                print_json(&serde_json::json!({
                    "overall": report,
                    "by_gender": by_g,
                    "by_age": by_a,
                }));
            } else {
                print_json(&report);
            }
            Ok(())
        }
        Cmd::Fuse { out, inputs, manifest, split } => {
            let mut files = Vec::with_capacity(inputs.len());
            for path in &inputs {
                files.push(ScoreFile::read(path)?);
            }
            let fused = pipeline::run_fusion(&files)?;
            fused.write(&out)?;
            eprintln!("fused {} systems into {}", files.len(), out.display());
            if let Some(manifest_path) = manifest {
                let input = load(&manifest_path)?;
                let report = pipeline::eval_scores(&fused, &input, &split)?;
                print_json(&report);
            }
            Ok(())
        }
        Cmd::Serve { journal, truth, addr, token_seed } => {
            let manifest = load(&truth)?;
            let truth_val = TrackTruth::from_manifest(&manifest, Track::Val)?;
            let truth_test = TrackTruth::from_manifest(&manifest, Track::Test)?;
            let board = Arc::new(Leaderboard::open(truth_val, truth_test, &journal, token_seed)?);
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_io()
                .build()
                .map_err(|source| PipelineError::Io {
                    path: journal.clone(),
                    source,
                })?;
            let bind_addr = addr.clone();
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&bind_addr).await?;
                // Announce the bound address (flushed) so callers can
                // connect even when an ephemeral port was requested.
                println!("listening on {}", listener.local_addr()?);
                use std::io::Write;
                std::io::stdout().flush()?;
                serve(board, listener).await
            })
            .map_err(|source| PipelineError::Io {
                path: PathBuf::from(addr),
                source,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::FAILURE
        }
    }
}
