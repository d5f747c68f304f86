//! CSV and text reports.
//!
//! | file          | columns                                                         |
//! |---------------|-----------------------------------------------------------------|
//! | history.csv   | epoch, learning_rate, loss, train_accuracy, val_accuracy        |
//! | metrics.csv   | emotion, view, support, true_positives, predicted, accuracy, precision, recall, f1 |
//! | confusion.csv | `truth`, then one column per predicted `emotion/view` cell      |
//! | episode.csv   | one row per (step, pedestrian); see [`EPISODE_COLUMNS`]         |
//! | report.csv    | metric, value                                                   |
//! | scan.csv      | angle, range, mask, person                                      |
//! | grid.csv      | `# side=.. resolution=.. half_extent=..` then one row of 0/1 per grid row |
//!
//! The episode file starts with `# key=value` lines naming the scenario,
//! mode, outcome, robot radius, goal and final pose.

use std::collections::BTreeMap;
use std::path::Path;

use proxemo_core::gait::{EmotionClass, ViewGroup, N_VIEW_GROUPS};
use proxemo_core::model::{EvalReport, TrainHistory};
use proxemo_core::navsim::{ClearanceReport, EpisodeLog};
use proxemo_core::nn::GRID_CELLS;
use proxemo_core::proxemics::{LidarScan, OccupancyGrid};

use crate::error::{read_text, CliError, Result};

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cell_label(cell: usize) -> String {
    format!("{}/{}", EmotionClass::ALL[cell / N_VIEW_GROUPS], ViewGroup::ALL[cell % N_VIEW_GROUPS])
}

pub fn history_csv(history: &TrainHistory) -> String {
    csv_string(
        &["epoch", "learning_rate", "loss", "train_accuracy", "val_accuracy"],
        history.epochs.iter().map(|e| {
            vec![
                e.epoch.to_string(),
                e.learning_rate.to_string(),
                e.loss.to_string(),
                e.train_accuracy.to_string(),
                opt(e.val_accuracy),
            ]
        }),
    )
}

/// `(epoch, loss, train_accuracy, val_accuracy)`.
pub type HistoryRow = (usize, f64, f64, Option<f64>);

pub fn read_history(path: &Path) -> Result<Vec<HistoryRow>> {
    let text = read_text(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::malformed(path, e.to_string()))?;
        let bad = || CliError::malformed(path, format!("row {} is not a history row", i + 1));
        let num = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok());
        let val = match rec.get(4) {
            Some("") | None => None,
            Some(_) => Some(num(4).ok_or_else(bad)?),
        };
        let epoch = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        out.push((epoch, num(2).ok_or_else(bad)?, num(3).ok_or_else(bad)?, val));
    }
    Ok(out)
}

pub fn metrics_csv(report: &EvalReport) -> String {
    csv_string(
        &["emotion", "view", "support", "true_positives", "predicted", "accuracy", "precision", "recall", "f1"],
        report.cells.iter().map(|c| {
            let acc = (c.support > 0).then(|| c.true_positives as f64 / c.support as f64);
            vec![
                c.emotion.to_string(),
                c.view.to_string(),
                c.support.to_string(),
                c.true_positives.to_string(),
                c.predicted.to_string(),
                opt(acc),
                c.precision.to_string(),
                c.recall.to_string(),
                c.f1.to_string(),
            ]
        }),
    )
}

pub fn confusion_csv(report: &EvalReport) -> String {
    let labels: Vec<String> = (0..GRID_CELLS).map(cell_label).collect();
    let mut header = vec!["truth"];
    header.extend(labels.iter().map(String::as_str));
    csv_string(
        &header,
        report.confusion.iter().enumerate().map(|(t, row)| {
            let mut r = vec![labels[t].clone()];
            r.extend(row.iter().map(|n| n.to_string()));
            r
        }),
    )
}

pub fn summary_text(report: &EvalReport) -> String {
    let mut s = format!("samples: {}\n", report.samples);
    s += &format!("mean accuracy: {:.2}%\n", report.mean_accuracy);
    s += &format!("mean F1: {:.4}\n", report.mean_f1);
    s += &format!("emotion accuracy: {:.2}%\n", 100.0 * report.emotion_accuracy());
    if !report.excluded.is_empty() {
        let cells: Vec<String> = report.excluded.iter().map(|(e, v)| format!("{e}/{v}")).collect();
        s += &format!("cells without samples: {}\n", cells.join(", "));
    }
    s += "\nemotion confusion (rows truth, columns predicted):\n";
    s += &format!("{:>8}", "");
    for e in EmotionClass::ALL {
        s += &format!("{:>8}", e.name());
    }
    s.push('\n');
    for (e, row) in EmotionClass::ALL.iter().zip(report.emotion_confusion()) {
        s += &format!("{:>8}", e.name());
        for n in row {
            s += &format!("{n:>8}");
        }
        s.push('\n');
    }
    s
}

pub const EPISODE_COLUMNS: [&str; 20] = [
    "step", "time", "x", "y", "heading", "v", "omega", "action", "ped", "ped_x", "ped_y", "distance",
    "clearance", "comfort", "inflation", "pred_emotion", "pred_view", "confidence", "visible", "warm",
];

pub fn episode_csv(log: &EpisodeLog) -> String {
    let mut head = format!("# scenario={}\n# mode={}\n# outcome={}\n", log.scenario, log.mode, log.outcome.name());
    head += &format!("# robot_radius={}\n# goal={};{}\n", log.robot_radius, log.goal[0], log.goal[1]);
    let f = log.final_pose;
    head += &format!("# final_pose={};{};{}\n", f.x, f.y, f.heading);
    let mut rows = Vec::new();
    for s in &log.steps {
        let base = vec![
            s.step.to_string(),
            s.time.to_string(),
            s.pose.x.to_string(),
            s.pose.y.to_string(),
            s.pose.heading.to_string(),
            s.v.to_string(),
            s.omega.to_string(),
            s.action.name().to_string(),
        ];
        if s.pedestrians.is_empty() {
            let mut r = base.clone();
            r.resize(EPISODE_COLUMNS.len(), String::new());
            rows.push(r);
        }
        for p in &s.pedestrians {
            let mut r = base.clone();
            let (pe, pv) = p.predicted.map_or((String::new(), String::new()), |(e, v)| (e.to_string(), v.to_string()));
            r.extend([
                p.id.to_string(),
                p.position[0].to_string(),
                p.position[1].to_string(),
                p.distance.to_string(),
                p.clearance.to_string(),
                p.comfort.to_string(),
                p.inflation.to_string(),
                pe,
                pv,
                p.confidence.to_string(),
                u8::from(p.visible).to_string(),
                u8::from(p.warm).to_string(),
            ]);
            rows.push(r);
        }
    }
    head + &csv_string(&EPISODE_COLUMNS, rows)
}

/// `(step, position, comfort, predicted emotion)`.
pub type PedestrianRecord = (usize, [f64; 2], f64, Option<EmotionClass>);

/// What the plotter needs from an episode file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeTrace {
    pub meta: BTreeMap<String, String>,
    pub robot: Vec<[f64; 2]>,
    pub pedestrians: BTreeMap<usize, Vec<PedestrianRecord>>,
}

impl EpisodeTrace {
    pub fn robot_radius(&self) -> f64 {
        self.meta.get("robot_radius").and_then(|v| v.parse().ok()).unwrap_or(0.25)
    }

    pub fn goal(&self) -> Option<[f64; 2]> {
        let (x, y) = self.meta.get("goal")?.split_once(';')?;
        Some([x.parse().ok()?, y.parse().ok()?])
    }
}

pub fn read_episode(path: &Path) -> Result<EpisodeTrace> {
    let text = read_text(path)?;
    let mut trace = EpisodeTrace::default();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix('#') {
            Some(kv) => {
                if let Some((k, v)) = kv.trim().split_once('=') {
                    trace.meta.insert(k.to_string(), v.to_string());
                }
            }
            None => {
                body += line;
                body.push('\n');
            }
        }
    }
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().map_err(|e| CliError::malformed(path, e.to_string()))?.clone();
    if header.iter().ne(EPISODE_COLUMNS) {
        return Err(CliError::malformed(path, "not an episode log"));
    }
    let mut last_step = None;
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::malformed(path, e.to_string()))?;
        let bad = || CliError::malformed(path, format!("row {} has unreadable numbers", i + 1));
        let num = |k: usize| rec[k].parse::<f64>().map_err(|_| bad());
        let step: usize = rec[0].parse().map_err(|_| bad())?;
        if last_step != Some(step) {
            trace.robot.push([num(2)?, num(3)?]);
            last_step = Some(step);
        }
        if !rec[8].is_empty() {
            let id: usize = rec[8].parse().map_err(|_| bad())?;
            let emotion = rec[15].parse().ok();
            trace.pedestrians.entry(id).or_default().push((step, [num(9)?, num(10)?], num(13)?, emotion));
        }
    }
    if let Some((x, y)) = trace.meta.get("final_pose").and_then(|v| {
        let mut it = v.split(';').map(|s| s.parse::<f64>().ok());
        Some((it.next()??, it.next()??))
    }) {
        trace.robot.push([x, y]);
    }
    Ok(trace)
}

pub fn clearance_csv(report: &ClearanceReport) -> String {
    let rows = [
        ("steps", report.steps.to_string()),
        ("outcome", report.outcome.name().to_string()),
        ("min_clearance", opt(report.min_clearance)),
        ("mean_clearance", opt(report.mean_clearance)),
        ("comfort_violations", report.comfort_violations.to_string()),
        ("path_length", report.path_length.to_string()),
        ("max_deviation", report.max_deviation.to_string()),
        ("comfort_actions", report.action_counts[0].to_string()),
        ("safe_actions", report.action_counts[1].to_string()),
        ("stop_actions", report.action_counts[2].to_string()),
    ];
    csv_string(&["metric", "value"], rows.into_iter().map(|(k, v)| vec![k.to_string(), v]))
}

pub fn scan_csv(scan: &LidarScan) -> String {
    let mask = scan.human_mask();
    csv_string(
        &["angle", "range", "mask", "person"],
        (0..scan.len()).map(|i| {
            vec![
                scan.angles()[i].to_string(),
                scan.ranges()[i].to_string(),
                u8::from(mask[i]).to_string(),
                scan.hits()[i].map(|id| id.to_string()).unwrap_or_default(),
            ]
        }),
    )
}

pub fn grid_csv(grid: &OccupancyGrid) -> String {
    let mut s = format!(
        "# side={} resolution={} half_extent={}\n",
        grid.side(),
        grid.resolution(),
        grid.half_extent()
    );
    for row in grid.cells().chunks(grid.side()) {
        let cells: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        s += &cells.join(",");
        s.push('\n');
    }
    s
}
