//! Fixture shared by the CLI tests and the acceptance harness: one keyword
//! ("group therapy") spoken inside a short pseudo-word utterance, and a
//! safeword bank holding "meeting".
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sanitizer_core::audio::{write_wav, AudioClip};
use sanitizer_core::keyword::{enroll_keyword, spot_in_clip, SpotterConfig};
use sanitizer_core::synth::{add_noise, power, PseudoWord};
use tempfile::TempDir;

pub const KEYWORD: &str = "group therapy";
pub const SAFEWORD: &str = "meeting";
pub const RATE: u32 = 16000;
/// Twice the default spotting threshold.
const DISTRACTOR_MARGIN: f64 = 0.05;

pub struct Fixture {
    pub dir: TempDir,
    pub keywords: PathBuf,
    pub safewords: PathBuf,
    pub input: PathBuf,
    /// Where the keyword sits in the input, seconds.
    pub keyword_span: (f64, f64),
}

impl Fixture {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn clip(samples: Vec<f64>) -> AudioClip {
    AudioClip::from_unclamped(samples, RATE).unwrap()
}

fn silence(secs: f64) -> Vec<f64> {
    vec![0.0; (secs * RATE as f64).round() as usize]
}

/// Utterance: two distractors, the keyword at 1.05× tempo, two more
/// distractors; 30 dB SNR.
pub fn build(seed: u64, with_keyword: bool) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keyword = PseudoWord::random(&mut rng);
    let safeword = PseudoWord::random(&mut rng);

    let mut enroll = keyword.render(1.0, RATE, &mut rng);
    let p = power(&enroll);
    add_noise(&mut enroll, p, 30.0, &mut rng);
    let enroll = clip(enroll);
    write_wav(&enroll, &dir.path().join("enroll.wav")).unwrap();

    // random pseudo-words occasionally sound like the keyword; keep only
    // distractors that stay clear of it by a margin
    let template = enroll_keyword(0, KEYWORD, &enroll).unwrap();
    let distinct = SpotterConfig::with_theta(DISTRACTOR_MARGIN);
    let mut distractors = Vec::new();
    while distractors.len() < 4 {
        let d = PseudoWord::random(&mut rng);
        let mut padded = silence(0.1);
        padded.extend(d.render(1.0, RATE, &mut rng));
        padded.extend(silence(0.1));
        let (_, hits) = spot_in_clip(&clip(padded), &[template.clone()], &distinct).unwrap();
        if hits.is_empty() {
            distractors.push(d);
        }
    }
    let keywords = dir.path().join("keywords.json");
    std::fs::write(
        &keywords,
        format!(r#"[{{"label": "{KEYWORD}", "category": "singular-noun", "enrollment_clip": "enroll.wav"}}]"#),
    )
    .unwrap();

    let safewords = dir.path().join("bank");
    std::fs::create_dir(&safewords).unwrap();
    write_wav(&clip(safeword.render(1.0, RATE, &mut rng)), &safewords.join("meeting.wav")).unwrap();
    std::fs::write(
        safewords.join("index.json"),
        format!(r#"[{{"word": "{SAFEWORD}", "category": "singular-noun", "file": "meeting.wav"}}]"#),
    )
    .unwrap();

    let mut s = silence(0.2);
    let mut keyword_span = (0.0, 0.0);
    for (i, d) in distractors.iter().enumerate() {
        if i == 2 && with_keyword {
            let start = s.len() as f64 / RATE as f64;
            s.extend(keyword.render(1.05, RATE, &mut rng));
            keyword_span = (start, s.len() as f64 / RATE as f64);
            s.extend(silence(0.15));
        }
        s.extend(d.render(1.0, RATE, &mut rng));
        s.extend(silence(0.15));
    }
    s.extend(silence(0.05));
    let p = power(&s);
    add_noise(&mut s, p, 30.0, &mut rng);
    let input = dir.path().join("input.wav");
    write_wav(&clip(s), &input).unwrap();
    Fixture {
        dir,
        keywords,
        safewords,
        input,
        keyword_span,
    }
}

pub fn sanitizer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sanitizer"))
        .args(args)
        .output()
        .expect("sanitizer binary runs")
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `sanitize` with the fixture's inputs writing `out.wav`/`log.jsonl` under
/// `tag`.
pub fn run_sanitize(f: &Fixture, tag: &str, extra: &[&str]) -> (Output, PathBuf, PathBuf) {
    let out = f.path(&format!("{tag}.wav"));
    let log = f.path(&format!("{tag}.jsonl"));
    let mut args = vec![
        "sanitize",
        "--input",
        s(&f.input),
        "--output",
        s(&out),
        "--keywords",
        s(&f.keywords),
        "--safewords",
        s(&f.safewords),
        "--log",
        s(&log),
        "--seed",
        "7",
    ];
    args.extend_from_slice(extra);
    (sanitizer(&args), out, log)
}
