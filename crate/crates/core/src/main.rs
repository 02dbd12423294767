use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nfasr::audio::{load_manifest, DatasetManifest, Split};
use nfasr::features::{parse_cache, write_cache, CacheEntry};
use nfasr::harness::{
    compare_precision, evaluate_two_step, prepare, recognize, render_json, render_text, synth_corpus, ClassifierKind,
    ClassifierTrainer, Dataset, FrontendKind, Protocol, Settings, SynthConfig, TrainedModel, MANIFEST_NAME,
};
use nfasr::Error;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

/// Isolated-word command recognition: MFCC features, ANFIS and MLP
/// classifiers, float and fixed-point front-ends.
#[derive(Parser)]
#[command(name = "nfasr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Override file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic synthetic corpus and its manifest.
    SynthCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 24)]
        per_class: usize,
        #[arg(long, default_value_t = 48_000)]
        sample_rate: u32,
        #[arg(long, default_value_t = 0.02)]
        noise: f64,
    },
    /// Extract one compressed feature vector per manifest entry.
    Prepare {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        cache: PathBuf,
        #[arg(long, default_value = "float")]
        frontend: FrontendKind,
        #[command(flatten)]
        common: Common,
    },
    /// Train on the train split and write `<out>/<classifier>.model`.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        cache: PathBuf,
        #[arg(long, default_value = "anfis")]
        classifier: ClassifierKind,
        #[arg(long)]
        out: PathBuf,
        /// MLP initialization seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Two-step swap evaluation; writes report.txt and report.json to --out.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        cache: PathBuf,
        #[arg(long, default_value = "both")]
        classifier: ClassifierKind,
        #[arg(long, default_value = "split-swap")]
        protocol: Protocol,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Classify one WAV file with a trained model.
    Recognize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        wav: PathBuf,
        #[arg(long, default_value = "float")]
        frontend: FrontendKind,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the fixed-point front-end against the float one.
    ComparePrecision {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_DATA
    }
}

fn settings(common: &Common, seed: Option<u64>) -> Result<Settings, Error> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        s.apply_overrides(&text).map_err(|e| e.in_file(path))?;
    }
    if let Some(seed) = seed {
        s.mlp.seed = seed;
    }
    Ok(s)
}

fn write(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::from(e).in_file(parent))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::from(e).in_file(path))
}

fn read_cache(path: &Path) -> Result<Vec<CacheEntry>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_cache(&text).map_err(|e| e.in_file(path))
}

fn dataset(manifest: &Path, cache: &Path, s: &Settings) -> Result<Dataset, Error> {
    let m = load_manifest(manifest, &s.vocabulary)?;
    Dataset::join(&read_cache(cache)?, &m).map_err(|e| e.in_file(cache))
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::SynthCorpus {
            out,
            seed,
            per_class,
            sample_rate,
            noise,
        } => {
            let cfg = SynthConfig {
                seed,
                per_class,
                sample_rate_hz: sample_rate,
                noise_std: noise,
            };
            let m: DatasetManifest = synth_corpus(&out, &cfg)?;
            println!(
                "wrote {} files ({} train / {} test) and {}",
                m.entries.len(),
                m.count(Split::Train),
                m.count(Split::Test),
                out.join(MANIFEST_NAME).display()
            );
            Ok(0)
        }
        Command::Prepare {
            manifest,
            cache,
            frontend,
            common,
        } => {
            let s = settings(&common, None)?;
            let m = load_manifest(&manifest, &s.vocabulary)?;
            let outcome = prepare(&m, &s, frontend);
            write(&cache, &write_cache(&outcome.entries))?;
            for f in &outcome.failures {
                eprintln!("error: {f}");
            }
            println!(
                "{} of {} files -> {}",
                outcome.entries.len(),
                m.entries.len(),
                cache.display()
            );
            Ok(if outcome.failures.is_empty() { 0 } else { EXIT_PARTIAL })
        }
        Command::Train {
            manifest,
            cache,
            classifier,
            out,
            seed,
            common,
        } => {
            let s = settings(&common, seed)?;
            let data = dataset(&manifest, &cache, &s)?;
            let train = data.split(Split::Train);
            for &kind in classifier.expand() {
                let (model, log) = TrainedModel::train_logged(kind, &train, &data.vocabulary, &s)?;
                let path = out.join(format!("{}.model", kind.as_str()));
                write(&path, &model.to_text())?;
                print!("{log}");
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Eval {
            manifest,
            cache,
            classifier,
            protocol,
            out,
            seed,
            common,
        } => {
            let s = settings(&common, seed)?;
            let data = dataset(&manifest, &cache, &s)?;
            let reports = classifier
                .expand()
                .iter()
                .map(|&kind| {
                    let trainer = ClassifierTrainer { kind, settings: &s };
                    Ok(evaluate_two_step(&data, &trainer, protocol)?.report)
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let text = render_text(&reports);
            print!("{text}");
            if let Some(dir) = out {
                write(&dir.join("report.txt"), &text)?;
                write(&dir.join("report.json"), &render_json(&reports))?;
            }
            Ok(0)
        }
        Command::Recognize {
            model,
            wav,
            frontend,
            common,
        } => {
            let s = settings(&common, None)?;
            let text = std::fs::read_to_string(&model).map_err(|e| Error::from(e).in_file(&model))?;
            let m = TrainedModel::from_text(&text).map_err(|e| e.in_file(&model))?;
            let r = recognize(&m, &wav, &s, frontend)?;
            println!("{}", r.label);
            for (label, score) in m.vocabulary().labels().iter().zip(&r.scores) {
                println!("  {label:8} {score:.6}");
            }
            Ok(0)
        }
        Command::ComparePrecision { manifest, out, common } => {
            let s = settings(&common, None)?;
            let m = load_manifest(&manifest, &s.vocabulary)?;
            let report = compare_precision(&m, &s)?;
            print!("{}", report.to_text());
            if let Some(dir) = out {
                write(&dir.join("precision.txt"), &report.to_text())?;
                write(&dir.join("precision.json"), &report.to_json())?;
            }
            Ok(if !report.failures.is_empty() {
                EXIT_PARTIAL
            } else if report.pass {
                0
            } else {
                EXIT_CHECK_FAILED
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
