mod common;

use common::{build, run_sanitize, s, sanitizer, KEYWORD, SAFEWORD};
use sanitizer_core::audio::read_wav;
use sanitizer_core::keyword::{read_substitution_log, TemplateStore};

fn stdout_json(out: &std::process::Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn sanitize_replaces_one_keyword_and_restores() {
    let f = build(11, true);
    let (out, wav, log) = run_sanitize(&f, "a", &[]);
    let report = stdout_json(&out);
    let records = read_substitution_log(&log).unwrap();
    assert_eq!(records.len(), 1, "{report}");
    assert_eq!(records[0].keyword, KEYWORD);
    assert_eq!(records[0].safeword, SAFEWORD);
    assert!((records[0].start_s - f.keyword_span.0).abs() <= 0.05);
    assert!((records[0].end_s - f.keyword_span.1).abs() <= 0.05);
    assert!(read_wav(&wav).unwrap().len() > 16000);

    let transcript = f.path("transcript.txt");
    std::fs::write(&transcript, format!("I have to attend a {SAFEWORD} tomorrow")).unwrap();
    let restored = sanitizer(&["restore", "--input", s(&transcript), "--log", s(&log)]);
    assert!(restored.status.success());
    assert_eq!(
        String::from_utf8(restored.stdout).unwrap(),
        format!("I have to attend a {KEYWORD} tomorrow")
    );
}

#[test]
fn sanitize_is_byte_reproducible() {
    let f = build(11, true);
    let (a, wav_a, log_a) = run_sanitize(&f, "a", &["--segmented"]);
    let (b, wav_b, log_b) = run_sanitize(&f, "b", &["--segmented"]);
    assert_eq!(stdout_json(&a), stdout_json(&b));
    assert_eq!(std::fs::read(wav_a).unwrap(), std::fs::read(wav_b).unwrap());
    assert_eq!(std::fs::read(log_a).unwrap(), std::fs::read(log_b).unwrap());
}

#[test]
fn clip_without_keywords_is_still_converted() {
    let f = build(11, false);
    let (out, wav, log) = run_sanitize(&f, "a", &[]);
    stdout_json(&out);
    assert!(read_substitution_log(&log).unwrap().is_empty());
    let input = read_wav(&f.input).unwrap();
    let output = read_wav(&wav).unwrap();
    assert_eq!(input.len(), output.len());
    assert_ne!(input, output);
}

#[test]
fn missing_safeword_bank_fails_with_stage_tag() {
    let f = build(11, true);
    let missing = f.path("nowhere");
    let out = sanitizer(&[
        "sanitize",
        "--input",
        s(&f.input),
        "--output",
        s(&f.path("o.wav")),
        "--keywords",
        s(&f.keywords),
        "--safewords",
        s(&missing),
        "--log",
        s(&f.path("o.jsonl")),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[safewords]"), "{err}");
    assert!(!f.path("o.wav").exists());
}

#[test]
fn shared_paths_are_rejected() {
    let f = build(11, true);
    let out = sanitizer(&[
        "sanitize",
        "--input",
        s(&f.input),
        "--output",
        s(&f.input),
        "--keywords",
        s(&f.keywords),
        "--safewords",
        s(&f.safewords),
        "--log",
        s(&f.path("o.jsonl")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[input]"));
}

#[test]
fn confirm_hits_updates_the_store() {
    let f = build(11, true);
    let store = f.path("store.json");
    let (out, _, _) = run_sanitize(&f, "a", &["--templates", s(&store), "--confirm-hits"]);
    stdout_json(&out);
    let saved: TemplateStore = serde_json::from_slice(&std::fs::read(&store).unwrap()).unwrap();
    assert_eq!(saved.get(KEYWORD).unwrap().hit_count, 1);
    run_sanitize(&f, "b", &["--templates", s(&store), "--confirm-hits"]);
    let saved: TemplateStore = serde_json::from_slice(&std::fs::read(&store).unwrap()).unwrap();
    assert_eq!(saved.get(KEYWORD).unwrap().hit_count, 2);
}

#[test]
fn spot_and_enroll_commands() {
    let f = build(11, true);
    let dets = stdout_json(&sanitizer(&[
        "spot",
        "--input",
        s(&f.input),
        "--keywords",
        s(&f.keywords),
    ]));
    assert_eq!(dets.as_array().unwrap().len(), 1);
    assert_eq!(dets[0]["label"], KEYWORD);

    let store = f.path("store.json");
    let labels = stdout_json(&sanitizer(&["enroll", "--keywords", s(&f.keywords), "--output", s(&store)]));
    assert_eq!(labels, serde_json::json!([KEYWORD]));
    assert!(store.exists());
}

#[test]
fn convert_command_policies() {
    let f = build(11, true);
    let out = f.path("c.wav");
    let segs = stdout_json(&sanitizer(&[
        "convert", "--input", s(&f.input), "--output", s(&out), "--policy", "bilinear",
        "--direction", "deepen", "--seed", "3",
    ]));
    assert_eq!(segs[0]["kind"]["kind"], "bilinear", "{segs}");
    let alpha = segs[0]["kind"]["alpha"].as_f64().unwrap();
    assert!((-0.10..=-0.08).contains(&alpha), "{alpha}");
    let bad = sanitizer(&["convert", "--input", s(&f.input), "--output", s(&out), "--policy", "cubic"]);
    assert!(!bad.status.success());
}

#[test]
fn bench_reports_all_stages() {
    let f = build(11, true);
    let r = stdout_json(&sanitizer(&[
        "bench",
        "--input",
        s(&f.input),
        "--keywords",
        s(&f.keywords),
        "--safewords",
        s(&f.safewords),
    ]));
    let d = r["audio_duration_s"].as_f64().unwrap();
    for stage in ["pitch_marking", "other_vc", "keyword_spotting", "substitution", "total"] {
        let cpu = r["cpu_time_s"][stage].as_f64().unwrap();
        let rc = r["realtime_coefficient"][stage].as_f64().unwrap();
        assert!(cpu >= 0.0 && (rc - cpu / d).abs() < 1e-12, "{stage}: {r}");
    }
}

#[test]
fn praka_simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let vocab = dir.path().join("vocab.txt");
    std::fs::write(&vocab, "# words\ntherapy\ndiagnosis\n").unwrap();
    let args = [
        "praka-simulate", "--vocab", s(&vocab), "--users", "10000", "--p", "0.5",
        "--sensitive-counts", "3000,100", "--seed", "5",
    ];
    let a = sanitizer(&args);
    let b = sanitizer(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert_eq!(v[1]["word"], "therapy");
    assert_eq!(v[1]["true_count"], 3000);
    assert!((v[1]["n_hat"].as_f64().unwrap() - 3000.0).abs() < 500.0);
    let bad = sanitizer(&["praka-simulate", "--vocab", s(&vocab), "--users", "10", "--p", "1"]);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("[praka]"));
}

#[test]
fn attack_demo_modes() {
    let rev = stdout_json(&sanitizer(&["attack-demo", "reverse"]));
    assert!(rev["recovery_ratio"].as_f64().unwrap() <= 0.5, "{rev}");
    let red = stdout_json(&sanitizer(&["attack-demo", "reduce", "--alpha", "0.06"]));
    let e = red["entries"].as_array().unwrap();
    assert!(e[1]["residual"].as_f64().unwrap() > 10.0 * e[0]["residual"].as_f64().unwrap().max(1e-4));
}
