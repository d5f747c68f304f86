//! Command-line driver.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use proxemo_core::gait::{generate_augmentation_set, synthesize_gait, EmotionClass, LabeledGait};
use proxemo_core::embedding::{gait_to_image, DEFAULT_INPUT_SIZE};
use proxemo_core::model::{
    evaluate, samples_from_gaits, split_stratified, synthetic_gaits, train, DatasetConfig, ModelConfig,
    TrainConfig,
};
use proxemo_core::navsim::{
    back_approach, clearance_report, empty_corridor, front_approach, raycast_lidar, run_episode, PerceptionMode,
    Scenario, World,
};
use proxemo_core::proxemics::{comfort_space, proxemic_fusion_with};

use crate::config::*;
use crate::error::{exit, write_bytes, CliError, Result};
use crate::{checkpoint, gait_file, image_file, plot, reports, scenario_file};

#[derive(Debug, Parser)]
#[command(name = "proxemo", version, about = "Gait emotion recognition and emotion-aware robot navigation")]
pub struct Cli {
    /// TOML file with one table of settings per subcommand. Flags win over
    /// the file, the file wins over built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write this run's effective settings as a config file.
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write labelled synthetic gait files.
    Synth(SynthSettings),
    /// Expand one gait into its 288 rotated and translated views.
    Augment(AugmentSettings),
    /// Convert gait files to float images (and optionally PNGs).
    Embed(EmbedSettings),
    /// Train a classifier on a directory of gait files.
    Train(TrainSettings),
    /// Score a checkpoint on a directory of gait files.
    Eval(EvalSettings),
    /// Classify one gait file and report its comfort space.
    Infer(InferSettings),
    /// Run a navigation episode.
    Simulate(SimulateSettings),
    /// Draw an episode or training history as SVG, or an image as PNG.
    Plot(PlotSettings),
}

impl Command {
    pub fn stage(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Augment(_) => "augment",
            Command::Embed(_) => "embed",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Infer(_) => "infer",
            Command::Simulate(_) => "simulate",
            Command::Plot(_) => "plot",
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let stage = cli.command.stage();
    match run(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("proxemo {stage}: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut effective = ConfigFile::default();
    macro_rules! resolve {
        ($flags:expr, $section:ident) => {{
            let merged = $flags.over(file.$section.clone().unwrap_or_default());
            effective.$section = Some(merged.clone());
            merged
        }};
    }
    let save = |effective: &ConfigFile| match &cli.save_config {
        Some(p) => effective.save(p),
        None => Ok(()),
    };
    match cli.command {
        Command::Synth(f) => {
            let s = resolve!(f, synth);
            save(&effective)?;
            synth(s)
        }
        Command::Augment(f) => {
            let s = resolve!(f, augment);
            save(&effective)?;
            augment(s)
        }
        Command::Embed(f) => {
            let s = resolve!(f, embed);
            save(&effective)?;
            embed(s)
        }
        Command::Train(f) => {
            let s = resolve!(f, train);
            save(&effective)?;
            train_cmd(s)
        }
        Command::Eval(f) => {
            let s = resolve!(f, eval);
            save(&effective)?;
            eval(s)
        }
        Command::Infer(f) => {
            let s = resolve!(f, infer);
            save(&effective)?;
            infer(s)
        }
        Command::Simulate(f) => {
            let s = resolve!(f, simulate);
            save(&effective)?;
            simulate(s)
        }
        Command::Plot(f) => {
            let s = resolve!(f, plot);
            save(&effective)?;
            plot_cmd(s)
        }
    }
}

fn parse_emotion(name: &str) -> Result<EmotionClass> {
    name.parse().map_err(|_| CliError::Config(format!("unknown emotion '{name}'")))
}

fn synth(s: SynthSettings) -> Result<()> {
    let out = required(s.out, "out")?;
    let noise = s.noise.unwrap_or(0.01);
    let seed = s.seed.unwrap_or(0);
    if let Some(per_cell) = s.per_cell {
        let gaits = synthetic_gaits(&DatasetConfig { per_cell, noise, seed, ..DatasetConfig::default() })?;
        for (i, g) in gaits.iter().enumerate() {
            let name = format!("{}_{}_{:04}.csv", g.emotion, g.view_group, i % per_cell);
            gait_file::write(&out.join(name), g, &[])?;
        }
        println!("wrote {} gaits to {}", gaits.len(), out.display());
        return Ok(());
    }
    let emotion = s.emotion.unwrap_or_else(|| "all".into());
    let emotions = if emotion.eq_ignore_ascii_case("all") {
        EmotionClass::ALL.to_vec()
    } else {
        vec![parse_emotion(&emotion)?]
    };
    let count = s.count.unwrap_or(1);
    for &e in &emotions {
        for k in 0..count as u64 {
            let g = synthesize_gait(e, seed.wrapping_add(k), noise);
            gait_file::write(&out.join(format!("{e}_seed{}.csv", seed.wrapping_add(k))), &g, &[])?;
        }
    }
    println!("wrote {} gaits to {}", emotions.len() * count, out.display());
    Ok(())
}

fn augment(s: AugmentSettings) -> Result<()> {
    let input = required(s.input, "input")?;
    let out = required(s.out, "out")?;
    let source = gait_file::read(&input)?;
    let stem = input.file_stem().and_then(|x| x.to_str()).unwrap_or("gait");
    let set = generate_augmentation_set(&source.gait)?;
    for a in &set {
        let theta = a.params.theta_deg();
        let depth = a.params.translation[2];
        let g = LabeledGait {
            gait: a.gait.clone(),
            emotion: source.emotion,
            view_group: a.view_group,
            source: source.source,
        };
        let name = format!("{stem}_t{theta:03.0}_z{depth:.0}.csv");
        gait_file::write(&out.join(name), &g, &[("theta_deg", theta.to_string()), ("depth_m", depth.to_string())])?;
    }
    println!("wrote {} augmented gaits to {}", set.len(), out.display());
    Ok(())
}

/// Gait files named by `input`: the file itself, or every file in a directory.
fn gait_inputs(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_dir() {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(input)
            .map_err(|source| CliError::Read { path: input.into(), source })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == gait_file::EXTENSION))
            .collect();
        paths.sort();
        Ok(paths)
    } else {
        Ok(vec![input.to_path_buf()])
    }
}

fn embed(s: EmbedSettings) -> Result<()> {
    let input = required(s.input, "input")?;
    let out = required(s.out, "out")?;
    let size = s.size.unwrap_or(DEFAULT_INPUT_SIZE);
    let paths = gait_inputs(&input)?;
    for p in &paths {
        let g = gait_file::read(p)?;
        let image = gait_to_image(&g.gait, size)?;
        let stem = p.file_stem().and_then(|x| x.to_str()).unwrap_or("gait");
        image_file::write(&out.join(format!("{stem}.{}", image_file::EXTENSION)), &image)?;
        if s.png.unwrap_or(false) {
            image_file::write_png(&out.join(format!("{stem}.png")), &image)?;
        }
    }
    println!("embedded {} gaits at {size}x{size} into {}", paths.len(), out.display());
    Ok(())
}

fn train_cmd(s: TrainSettings) -> Result<()> {
    let data = required(s.data, "data")?;
    let out = required(s.out, "out")?;
    let history_path = s.history.unwrap_or_else(|| out.with_extension("history.csv"));
    let defaults = TrainConfig::default();
    let seed = s.seed.unwrap_or(defaults.seed);
    let model = ModelConfig {
        input_size: s.input_size.unwrap_or(64),
        groups: s.groups.unwrap_or(defaults.model.groups),
        seed,
        ..defaults.model
    };
    let mut cfg = TrainConfig {
        model,
        epochs: s.epochs.unwrap_or(15),
        batch_size: s.batch_size.unwrap_or(defaults.batch_size),
        seed,
        train_fraction: s.train_fraction.unwrap_or(defaults.train_fraction),
        stop_at_train_accuracy: s.stop_at,
        recalibrate_batch_norm: s.recalibrate.unwrap_or(defaults.recalibrate_batch_norm),
        ..defaults
    };
    if let Some(lr) = s.learning_rate {
        cfg.optimizer.learning_rate = lr;
    }
    cfg.validate()?;
    let gaits = gait_file::read_dir(&data)?;
    let samples = samples_from_gaits(&gaits, cfg.model.input_size)?;
    let (train_set, held_out) = if cfg.train_fraction < 1.0 {
        split_stratified(samples, cfg.train_fraction, seed)?
    } else {
        (samples, Vec::new())
    };
    let validation = (!held_out.is_empty()).then_some(held_out.as_slice());
    let (net, history) = train(&train_set, validation, &cfg)?;
    checkpoint::save(&out, &net)?;
    write_bytes(&history_path, reports::history_csv(&history).as_bytes())?;
    if let Some(last) = history.epochs.last() {
        print!("epochs {} loss {:.4} train accuracy {:.3}", history.epochs.len(), last.loss, last.train_accuracy);
        if let Some(v) = last.val_accuracy {
            print!(" held-out accuracy {v:.2}%");
        }
        println!();
    }
    if validation.is_some() {
        let report = evaluate(&net, &held_out)?;
        println!("held-out mean accuracy after training {:.2}%", report.mean_accuracy);
    }
    println!("checkpoint {} history {}", out.display(), history_path.display());
    Ok(())
}

fn eval(s: EvalSettings) -> Result<()> {
    let net = checkpoint::load(&required(s.checkpoint, "checkpoint")?)?;
    let gaits = gait_file::read_dir(&required(s.data, "data")?)?;
    let samples = samples_from_gaits(&gaits, net.config().input_size)?;
    let report = evaluate(&net, &samples)?;
    let summary = reports::summary_text(&report);
    if let Some(out) = s.out {
        write_bytes(&out.join("metrics.csv"), reports::metrics_csv(&report).as_bytes())?;
        write_bytes(&out.join("confusion.csv"), reports::confusion_csv(&report).as_bytes())?;
        write_bytes(&out.join("summary.txt"), summary.as_bytes())?;
    }
    print!("{summary}");
    Ok(())
}

fn infer(s: InferSettings) -> Result<()> {
    let net = checkpoint::load(&required(s.checkpoint, "checkpoint")?)?;
    let g = gait_file::read(&required(s.gait, "gait")?)?;
    let grid = net.forward(&gait_to_image(&g.gait, net.config().input_size)?)?;
    let (emotion, view) = grid.argmax();
    println!("emotion: {emotion}");
    println!("view group: {view}");
    println!("confidence: {:.4}", grid.max_prob());
    println!("comfort space: {:.4} m", comfort_space(&grid));
    Ok(())
}

fn builtin_scenario(name: &str, emotion: EmotionClass) -> Result<Scenario> {
    match name {
        "empty" => Ok(empty_corridor()),
        "front-approach" => Ok(front_approach(emotion)),
        "back-approach" => Ok(back_approach(emotion)),
        other => Err(CliError::Config(format!("unknown built-in scenario '{other}'"))),
    }
}

fn simulate(s: SimulateSettings) -> Result<()> {
    let scenario = match (&s.scenario, &s.builtin) {
        (Some(path), None) => scenario_file::load(path)?,
        (None, Some(name)) => {
            let emotion = parse_emotion(s.emotion.as_deref().unwrap_or("neutral"))?;
            builtin_scenario(name, emotion)?
        }
        _ => return Err(CliError::Config("give exactly one of --scenario and --builtin".into())),
    };
    let out = required(s.out, "out")?;
    let mode_name = s.mode.unwrap_or_else(|| "proxemo".into());
    let net = match mode_name.as_str() {
        "proxemo" => Some(checkpoint::load(&required(s.checkpoint, "checkpoint")?)?),
        "oracle" | "no-emotion" => None,
        other => return Err(CliError::Config(format!("unknown mode '{other}'"))),
    };
    let mode = match (&net, mode_name.as_str()) {
        (Some(n), _) => PerceptionMode::ProxEmo(n),
        (None, "oracle") => PerceptionMode::Oracle,
        _ => PerceptionMode::NoEmotion,
    };
    let log = run_episode(&scenario, mode)?;
    let report = clearance_report(&log)?;
    write_bytes(&out.join("episode.csv"), reports::episode_csv(&log).as_bytes())?;
    write_bytes(&out.join("report.csv"), reports::clearance_csv(&report).as_bytes())?;
    if let Some(k) = s.dump_step {
        let step = log
            .steps
            .get(k)
            .ok_or_else(|| CliError::Config(format!("episode has {} steps, cannot dump step {k}", log.steps.len())))?;
        let world = World::from_scenario(&scenario);
        let scan = raycast_lidar(&world, &step.pose, step.time, &scenario.sensor);
        let inflation = |id: Option<usize>| {
            let extra = id
                .and_then(|i| step.pedestrians.iter().find(|p| p.id == i))
                .map_or(0.0, |p| p.inflation);
            scenario.robot.radius + scenario.planner.safety_margin + extra
        };
        let set = proxemic_fusion_with(&scan, inflation, scenario.sensor.max_range, scenario.planner.resolution)?;
        write_bytes(&out.join("scan.csv"), reports::scan_csv(&scan).as_bytes())?;
        write_bytes(&out.join("grid.csv"), reports::grid_csv(set.grid()).as_bytes())?;
    }
    println!("scenario {} mode {} outcome {}", log.scenario, log.mode, report.outcome.name());
    println!("steps {} path length {:.3} m", report.steps, report.path_length);
    if let Some(m) = report.min_clearance {
        println!("min clearance {m:.4} m, comfort violations {}", report.comfort_violations);
    }
    Ok(())
}

fn plot_cmd(s: PlotSettings) -> Result<()> {
    let out = required(s.out, "out")?;
    match (s.episode, s.history, s.image) {
        (Some(ep), None, None) => {
            let trace = reports::read_episode(&ep)?;
            let walls = match &s.scenario {
                Some(p) => scenario_file::load(p)?.obstacles,
                None => Vec::new(),
            };
            write_bytes(&out, plot::episode_svg(&trace, &walls).as_bytes())
        }
        (None, Some(h), None) => write_bytes(&out, plot::history_svg(&reports::read_history(&h)?).as_bytes()),
        (None, None, Some(im)) => image_file::write_png(&out, &image_file::read(&im)?),
        _ => Err(CliError::Config("give exactly one of --episode, --history and --image".into())),
    }
}
