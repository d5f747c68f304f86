use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proxemo::checkpoint;
use proxemo::error::exit;
use proxemo_core::gait::{EmotionClass, ViewGroup};
use proxemo_core::model::{build_model, ModelConfig};
use proxemo_core::nn::Target;

fn proxemo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_proxemo")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = proxemo(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    proxemo(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn count(dir: &Path, ext: &str) -> usize {
    fs::read_dir(dir).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == ext)).count()
}

/// An untrained model whose output bias strongly favours one cell.
fn biased_checkpoint(path: &Path, emotion: EmotionClass, view: ViewGroup) {
    let mut net = build_model(&ModelConfig::default().with_input_size(64)).unwrap();
    let names: Vec<String> = net.network().parameters().into_iter().map(|(n, _)| n).collect();
    let idx = names.iter().position(|n| n == "head2.bias").unwrap();
    net.network_mut().parameters_mut()[idx][Target::new(emotion, view).cell()] = 50.0;
    checkpoint::save(path, &net).unwrap();
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    ok(&["synth", "--emotion", "sad", "--seed", "7", "--out", s(&a)]);
    ok(&["synth", "--emotion", "sad", "--seed", "7", "--out", s(&b)]);
    ok(&["synth", "--emotion", "sad", "--seed", "8", "--out", s(&c)]);
    let first = fs::read(a.join("sad_seed7.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("sad_seed7.csv")).unwrap());
    assert_ne!(first, fs::read(c.join("sad_seed8.csv")).unwrap());
}

#[test]
fn augment_writes_288_views_and_embed_writes_images() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src");
    ok(&["synth", "--emotion", "happy", "--seed", "1", "--out", s(&src)]);
    let aug = dir.path().join("aug");
    ok(&["augment", "--input", s(&src.join("happy_seed1.csv")), "--out", s(&aug)]);
    assert_eq!(count(&aug, "csv"), 288);
    let img = dir.path().join("img");
    ok(&["embed", "--input", s(&src), "--out", s(&img), "--size", "32", "--png"]);
    assert_eq!(count(&img, "pxim"), 1);
    assert_eq!(count(&img, "png"), 1);
    let png = dir.path().join("again.png");
    ok(&["plot", "--image", s(&img.join("happy_seed1.pxim")), "--out", s(&png)]);
    assert_eq!(fs::read(&png).unwrap(), fs::read(img.join("happy_seed1.png")).unwrap());
}

#[test]
fn infer_reports_the_table_comfort_for_a_confident_grid() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("m.pxck");
    biased_checkpoint(&ckpt, EmotionClass::Sad, ViewGroup::Front);
    ok(&["synth", "--emotion", "sad", "--seed", "2", "--out", s(dir.path())]);
    let out = ok(&["infer", "--checkpoint", s(&ckpt), "--gait", s(&dir.path().join("sad_seed2.csv"))]);
    assert!(out.contains("emotion: sad"), "{out}");
    assert!(out.contains("view group: front"), "{out}");
    assert!(out.contains("comfort space: 1.1271 m"), "{out}");
}

#[test]
fn train_eval_and_plot_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["synth", "--per-cell", "1", "--seed", "3", "--out", s(&data)]);
    assert_eq!(count(&data, "csv"), 16);
    let ckpt = dir.path().join("m.pxck");
    let out = ok(&["train", "--data", s(&data), "--out", s(&ckpt), "--epochs", "1", "--train-fraction", "1"]);
    assert!(out.contains("epochs 1"), "{out}");
    let history = dir.path().join("m.history.csv");
    assert_eq!(fs::read_to_string(&history).unwrap().lines().count(), 2);
    let report = dir.path().join("report");
    let summary = ok(&["eval", "--checkpoint", s(&ckpt), "--data", s(&data), "--out", s(&report)]);
    assert!(summary.contains("samples: 16"));
    for f in ["metrics.csv", "confusion.csv", "summary.txt"] {
        assert!(report.join(f).exists(), "{f}");
    }
    let svg = dir.path().join("h.svg");
    ok(&["plot", "--history", s(&history), "--out", s(&svg)]);
    assert!(fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn simulate_writes_logs_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let text = ok(&[
        "simulate", "--builtin", "back-approach", "--emotion", "angry", "--mode", "oracle", "--out", s(&out),
        "--dump-step", "5",
    ]);
    assert!(text.contains("outcome goal"), "{text}");
    for f in ["episode.csv", "report.csv", "scan.csv", "grid.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let svg = dir.path().join("ep.svg");
    ok(&["plot", "--episode", s(&out.join("episode.csv")), "--out", s(&svg)]);
    assert!(fs::read_to_string(svg).unwrap().contains("<polyline"));
}

#[test]
fn config_file_supplies_settings_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let out = dir.path().join("out");
    fs::write(&cfg, format!("[synth]\nemotion = \"angry\"\nseed = 4\nout = {:?}\n", s(&out))).unwrap();
    let saved = dir.path().join("effective.toml");
    ok(&["--config", s(&cfg), "--save-config", s(&saved), "synth", "--seed", "9"]);
    assert!(out.join("angry_seed9.csv").exists());
    let effective = fs::read_to_string(&saved).unwrap();
    assert!(effective.contains("seed = 9") && effective.contains("emotion = \"angry\""), "{effective}");
}

#[test]
fn error_kinds_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&["frobnicate"]), exit::USAGE);
    assert_eq!(code(&["infer", "--checkpoint", s(&d.join("none")), "--gait", "x"]), exit::MISSING_FILE);

    let bad_gait = d.join("bad.csv");
    fs::write(&bad_gait, "not a gait\n").unwrap();
    assert_eq!(code(&["augment", "--input", s(&bad_gait), "--out", s(d)]), exit::MALFORMED_FILE);

    assert_eq!(code(&["synth", "--emotion", "bored", "--out", s(d)]), exit::CONFIG);
    assert_eq!(code(&["synth", "--emotion", "sad"]), exit::CONFIG);

    // A config word that disagrees with the stored tensor shapes.
    let ckpt = d.join("m.pxck");
    biased_checkpoint(&ckpt, EmotionClass::Sad, ViewGroup::Front);
    let mut bytes = fs::read(&ckpt).unwrap();
    bytes[16..24].copy_from_slice(&2u64.to_le_bytes());
    let shaped = d.join("shape.pxck");
    fs::write(&shaped, bytes).unwrap();
    ok(&["synth", "--emotion", "sad", "--seed", "0", "--out", s(d)]);
    let gait = d.join("sad_seed0.csv");
    assert_eq!(code(&["infer", "--checkpoint", s(&shaped), "--gait", s(&gait)]), exit::SHAPE);

    let blocker = d.join("file");
    fs::write(&blocker, "").unwrap();
    assert_eq!(code(&["synth", "--emotion", "sad", "--out", s(&blocker.join("sub"))]), exit::WRITE);

    assert_eq!(code(&["embed", "--input", s(&gait), "--out", s(d), "--size", "0"]), exit::PIPELINE);
}
