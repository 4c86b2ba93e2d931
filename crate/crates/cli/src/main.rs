use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use sanitizer_cli::bench::bench_clip;
use sanitizer_cli::demo::{
    attack_reduce_demo, attack_reverse_demo, praka_simulate, SensitivityModel,
};
use sanitizer_cli::pipeline::{convert_clip, sanitize, KeywordSetup, SanitizeManifest};
use sanitizer_cli::{AtStage, Stage, StageError};
use sanitizer_core::audio::{read_wav, write_wav};
use sanitizer_core::keyword::{
    load_safeword_bank, read_substitution_log, restore_transcript, spot_in_clip, SpotterConfig,
};
use sanitizer_core::praka::load_vocabulary;
use sanitizer_core::synth::{vowel, VOWEL_A};
use sanitizer_core::warp::{ConversionConfig, Direction, KindPolicy, ParamGrid, WarpKind};

#[derive(Parser)]
#[command(name = "sanitizer", version, about = "Speech sanitization: keyword substitution and voice conversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spot keywords, splice in safewords, convert the voice.
    Sanitize(SanitizeArgs),
    /// Undo safeword substitutions in a transcript.
    Restore {
        /// Transcript text file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        log: PathBuf,
    },
    /// Enroll every configured keyword into a template store.
    Enroll {
        #[arg(long)]
        keywords: PathBuf,
        /// Template store JSON to write.
        #[arg(long)]
        output: PathBuf,
    },
    /// Print keyword detections as JSON.
    Spot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        keywords: PathBuf,
        #[arg(long)]
        templates: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Voice conversion only.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Per-stage CPU time and realtime coefficients as JSON.
    Bench {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        keywords: PathBuf,
        #[arg(long)]
        safewords: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Simulate PRAKA reporting and aggregation.
    PrakaSimulate {
        /// Vocabulary file, one word per line.
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        users: u64,
        #[arg(long)]
        p: f64,
        /// Comma-separated sensitive-user counts, one per vocabulary word.
        #[arg(long, value_delimiter = ',', conflicts_with = "sensitive_fraction")]
        sensitive_counts: Option<Vec<u64>>,
        /// Same sensitive fraction for every word.
        #[arg(long, default_value_t = 0.1)]
        sensitive_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Reverse and reduce attack demonstrations.
    AttackDemo {
        #[arg(value_enum)]
        mode: AttackMode,
        /// Clip to attack (reverse mode); a synthetic vowel when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0.09)]
        alpha: f64,
        /// Quadratic factor of the compound kind in reduce mode.
        #[arg(long, default_value_t = 0.25)]
        beta: f64,
        #[arg(long, default_value_t = 512)]
        fft_size: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackMode {
    Reverse,
    Reduce,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Bilinear,
    Compound,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Deepen,
    Sharpen,
}

/// Conversion and spotting settings: a JSON file with flat conversion keys
/// and an optional `spotter` object, then flag overrides.
#[derive(Args)]
struct Settings {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    /// Convert silence-delimited segments with independent warps.
    #[arg(long)]
    segmented: bool,
    /// Spotting threshold on the normalized DTW distance.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Default, Serialize, Deserialize)]
struct ConfigFile {
    #[serde(flatten)]
    conversion: ConversionConfig,
    #[serde(default)]
    spotter: SpotterConfig,
}

impl Settings {
    fn resolve(&self) -> Result<(ConversionConfig, SpotterConfig), StageError> {
        let mut file = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).at(Stage::Input)?;
                serde_json::from_str::<ConfigFile>(&text).at(Stage::Input)?
            }
            None => ConfigFile::default(),
        };
        let c = &mut file.conversion;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(p) = self.policy {
            c.policy = match p {
                PolicyArg::Bilinear => KindPolicy::Bilinear,
                PolicyArg::Compound => KindPolicy::Compound,
            };
        }
        if let Some(d) = self.direction {
            c.direction = match d {
                DirectionArg::Deepen => Direction::Deepen,
                DirectionArg::Sharpen => Direction::Sharpen,
            };
        }
        c.segment_randomization |= self.segmented;
        if let Some(t) = self.theta {
            file.spotter.theta = t;
        }
        file.conversion.validate().at(Stage::Input)?;
        file.spotter.validate().at(Stage::Input)?;
        Ok((file.conversion, file.spotter))
    }
}

#[derive(Args)]
struct SanitizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    keywords: PathBuf,
    /// Safeword bank directory containing index.json.
    #[arg(long)]
    safewords: PathBuf,
    /// Substitution log (JSON lines) to write.
    #[arg(long)]
    log: PathBuf,
    /// Template store JSON; read if present, rewritten by --confirm-hits.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Treat every detection as confirmed and fold it into its template.
    #[arg(long, requires = "templates")]
    confirm_hits: bool,
    /// Also report per-stage CPU time.
    #[arg(long)]
    bench: bool,
    #[command(flatten)]
    settings: Settings,
}

fn print_json<T: Serialize>(value: &T) -> Result<(), StageError> {
    println!("{}", serde_json::to_string_pretty(value).at(Stage::Output)?);
    Ok(())
}

fn load_setup(keywords: &Path, templates: Option<&Path>) -> Result<KeywordSetup, StageError> {
    KeywordSetup::load(keywords, templates).at(Stage::Keywords)
}

fn run(cli: Cli) -> Result<(), StageError> {
    match cli.command {
        Command::Sanitize(a) => {
            let (conversion, spotter) = a.settings.resolve()?;
            let manifest = SanitizeManifest {
                input: a.input,
                output: a.output,
                conversion,
                spotter,
                keywords: a.keywords,
                safewords: a.safewords,
                log: a.log,
                templates: a.templates,
                confirm_hits: a.confirm_hits,
                bench: a.bench,
            };
            print_json(&sanitize(&manifest)?)
        }
        Command::Restore { input, log } => {
            let transcript = std::fs::read_to_string(&input).at(Stage::Input)?;
            let records = read_substitution_log(&log).at(Stage::Log)?;
            let restored = restore_transcript(&transcript, &records).at(Stage::Restore)?;
            for w in &restored.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", restored.text);
            Ok(())
        }
        Command::Enroll { keywords, output } => {
            let setup = load_setup(&keywords, None)?;
            let json = serde_json::to_string(&setup.store).at(Stage::Output)?;
            std::fs::write(&output, json).at(Stage::Output)?;
            let labels: Vec<&str> = setup.store.templates().map(|t| t.label.as_str()).collect();
            print_json(&labels)
        }
        Command::Spot {
            input,
            keywords,
            templates,
            settings,
        } => {
            let (_, spotter) = settings.resolve()?;
            let clip = read_wav(&input).at(Stage::Input)?;
            let setup = load_setup(&keywords, templates.as_deref())?;
            let (_, detections) =
                spot_in_clip(&clip, &setup.templates(), &spotter).at(Stage::Spotting)?;
            print_json(&detections)
        }
        Command::Convert {
            input,
            output,
            settings,
        } => {
            let (conversion, _) = settings.resolve()?;
            let clip = read_wav(&input).at(Stage::Input)?;
            let (converted, segments) =
                convert_clip(&clip, &conversion, &mut conversion.rng()).at(Stage::Conversion)?;
            write_wav(&converted, &output).at(Stage::Output)?;
            print_json(&segments)
        }
        Command::Bench {
            input,
            keywords,
            safewords,
            settings,
        } => {
            let (conversion, spotter) = settings.resolve()?;
            let clip = read_wav(&input).at(Stage::Input)?;
            let setup = load_setup(&keywords, None)?;
            let bank = load_safeword_bank(&safewords).at(Stage::Safewords)?;
            let report =
                bench_clip(&clip, &setup, &bank, &conversion, &spotter).at(Stage::Bench)?;
            print_json(&report)
        }
        Command::PrakaSimulate {
            vocab,
            users,
            p,
            sensitive_counts,
            sensitive_fraction,
            seed,
        } => {
            let words = load_vocabulary(&vocab).at(Stage::Input)?;
            let model = match sensitive_counts {
                Some(c) => SensitivityModel::Counts(c),
                None => SensitivityModel::Fraction(sensitive_fraction),
            };
            let out = praka_simulate(&words, &model, users, p, seed).at(Stage::Praka)?;
            print_json(&out)
        }
        Command::AttackDemo {
            mode,
            input,
            alpha,
            beta,
            fft_size,
        } => match mode {
            AttackMode::Reverse => {
                let clip = match input {
                    Some(p) => read_wav(&p).at(Stage::Input)?,
                    None => vowel(120.0, 0.6, 16000, &VOWEL_A),
                };
                print_json(&attack_reverse_demo(&clip, alpha, fft_size).at(Stage::Attack)?)
            }
            AttackMode::Reduce => {
                let kinds = [
                    WarpKind::bilinear(alpha).at(Stage::Attack)?,
                    WarpKind::compound(alpha, beta).at(Stage::Attack)?,
                ];
                let grid = ParamGrid::bilinear(-0.3, 0.3, 1e-3);
                print_json(&attack_reduce_demo(&kinds, &grid).at(Stage::Attack)?)
            }
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
