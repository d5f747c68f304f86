use std::path::Path;

use proptest::prelude::*;
use proxemo::config::{ConfigFile, SimulateSettings, TrainSettings};
use proxemo::error::exit;
use proxemo::{checkpoint, gait_file, image_file, reports, scenario_file, CliError};
use proxemo_core::embedding::{gait_to_image, GaitImage};
use proxemo_core::gait::{synthesize_gait, EmotionClass, ViewGroup};
use proxemo_core::model::{build_model, ModelConfig};
use proxemo_core::navsim::{front_approach, run_episode, PerceptionMode};

fn here() -> &'static Path {
    Path::new("test")
}

#[test]
fn gait_file_round_trip_is_exact() {
    for (i, e) in EmotionClass::ALL.into_iter().enumerate() {
        let mut g = synthesize_gait(e, i as u64, 0.02);
        g.view_group = ViewGroup::ALL[i];
        let text = gait_file::to_string(&g, &[("theta_deg", "35".into())]);
        assert!(text.contains("# theta_deg=35"));
        assert_eq!(gait_file::from_str(&text, here()).unwrap(), g);
        let crlf = text.replace('\n', "\r\n");
        assert_eq!(gait_file::from_str(&crlf, here()).unwrap(), g);
    }
}

#[test]
fn damaged_gait_files_are_malformed() {
    let text = gait_file::to_string(&synthesize_gait(EmotionClass::Sad, 0, 0.0), &[]);
    let short: String = text.lines().take(200).map(|l| format!("{l}\n")).collect();
    let cases = [
        text.replacen("# proxemo-gait", "# something-else", 1),
        text.replacen("# version=1", "# version=9", 1),
        text.replacen("# emotion=sad", "# emotion=bored", 1),
        short,
        text.replacen("0,0,", "0,0,oops", 1),
    ];
    for bad in cases {
        let e = gait_file::from_str(&bad, here()).unwrap_err();
        assert_eq!(e.exit_code(), exit::MALFORMED_FILE, "{e}");
    }
}

#[test]
fn empty_gait_directory_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(gait_file::read_dir(dir.path()), Err(CliError::Malformed { .. })));
}

proptest! {
    #[test]
    fn image_file_round_trip(h in 1usize..6, w in 1usize..6, seed in any::<u64>()) {
        let data: Vec<f64> = (0..3 * h * w).map(|i| ((seed.wrapping_add(i as u64) % 1000) as f64) / 999.0).collect();
        let image = GaitImage::new(h, w, data).unwrap();
        let bytes = image_file::encode(&image);
        prop_assert_eq!(image_file::decode(&bytes, here()).unwrap(), image);
        prop_assert!(image_file::decode(&bytes[..bytes.len() - 1], here()).is_err());
    }

    #[test]
    fn byte_quantisation_stays_in_range(v in -2.0f64..3.0) {
        let b = image_file::to_byte(v);
        if (0.0..=1.0).contains(&v) {
            prop_assert!((b as f64 / 255.0 - v).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }
}

#[test]
fn png_has_signature_and_size() {
    let g = synthesize_gait(EmotionClass::Happy, 3, 0.0);
    let image = gait_to_image(&g.gait, 16).unwrap();
    let png = image_file::encode_png(&image);
    assert_eq!(&png[..8], b"\x89PNG\r\n\x1a\n");
    // IHDR width and height.
    assert_eq!(u32::from_be_bytes(png[16..20].try_into().unwrap()), 16);
    assert_eq!(u32::from_be_bytes(png[20..24].try_into().unwrap()), 16);
}

#[test]
fn checkpoint_round_trip_gives_identical_logits() {
    let net = build_model(&ModelConfig { seed: 5, ..ModelConfig::default().with_input_size(64) }).unwrap();
    let bytes = checkpoint::encode(&net);
    let back = checkpoint::decode(&bytes, here()).unwrap();
    assert_eq!(back.config(), net.config());
    assert_eq!(back.network().parameters(), net.network().parameters());
    assert_eq!(back.network().running_stats(), net.network().running_stats());
    let g = synthesize_gait(EmotionClass::Angry, 1, 0.01);
    let image = gait_to_image(&g.gait, 64).unwrap();
    let a = net.forward(&image).unwrap().to_flat();
    let b = back.forward(&image).unwrap().to_flat();
    assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
}

#[test]
fn damaged_checkpoints_are_reported() {
    let net = build_model(&ModelConfig::default().with_input_size(64)).unwrap();
    let bytes = checkpoint::encode(&net);
    let truncated = checkpoint::decode(&bytes[..bytes.len() / 2], here()).unwrap_err();
    assert_eq!(truncated.exit_code(), exit::MALFORMED_FILE);
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert_eq!(checkpoint::decode(&magic, here()).unwrap_err().exit_code(), exit::MALFORMED_FILE);
}

#[test]
fn config_precedence_is_flag_then_file_then_default() {
    let file = ConfigFile::parse(
        "[train]\nepochs = 7\nlearning_rate = 0.01\n\n[simulate]\nbuiltin = \"front-approach\"\n",
        here(),
    )
    .unwrap();
    let flags = TrainSettings { epochs: Some(3), ..Default::default() };
    let merged = flags.over(file.train.clone().unwrap());
    assert_eq!(merged.epochs, Some(3));
    assert_eq!(merged.learning_rate, Some(0.01));
    assert_eq!(merged.batch_size, None);
    let sim = SimulateSettings::default().over(file.simulate.clone().unwrap());
    assert_eq!(sim.builtin.as_deref(), Some("front-approach"));
    assert_eq!(ConfigFile::parse(&file.to_toml(), here()).unwrap(), file);
}

#[test]
fn unknown_config_keys_are_config_errors() {
    let e = ConfigFile::parse("[train]\nepochz = 7\n", here()).unwrap_err();
    assert_eq!(e.exit_code(), exit::CONFIG);
}

#[test]
fn scenario_file_round_trip() {
    let s = front_approach(EmotionClass::Angry);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    scenario_file::save(&path, &s).unwrap();
    assert_eq!(scenario_file::load(&path).unwrap(), s);
}

#[test]
fn minimal_scenario_uses_defaults() {
    let s = scenario_file::parse("goal = [5.0, 0.0]\n[[pedestrians]]\nemotion = \"sad\"\nstart = [3.0, 0.0]\nheading = 3.14159\n", here())
        .unwrap();
    assert_eq!(s.goal, [5.0, 0.0]);
    assert_eq!(s.pedestrians.len(), 1);
    let bad = scenario_file::parse("goal = [5.0, 0.0]\n[[pedestrians]]\nemotion = \"meh\"\nstart = [3.0, 0.0]\nheading = 0.0\n", here());
    assert_eq!(bad.unwrap_err().exit_code(), exit::CONFIG);
}

#[test]
fn episode_csv_reads_back_for_plotting() {
    let log = run_episode(&front_approach(EmotionClass::Sad), PerceptionMode::Oracle).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("episode.csv");
    std::fs::write(&path, reports::episode_csv(&log)).unwrap();
    let trace = reports::read_episode(&path).unwrap();
    assert_eq!(trace.robot.len(), log.steps.len() + 1);
    assert_eq!(trace.goal(), Some(log.goal));
    assert_eq!(trace.robot_radius(), log.robot_radius);
    let records = &trace.pedestrians[&0];
    assert_eq!(records.len(), log.steps.len());
    assert!(records.iter().all(|r| r.3 == Some(EmotionClass::Sad)));
    let svg = proxemo::plot::episode_svg(&trace, &[]);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}
