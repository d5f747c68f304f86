//! Labelled gait files.
//!
//! Plain text: a block of `# key=value` header lines followed by CSV rows
//! `frame,joint,x,y,z` in row-major (frame, joint) order. Coordinates are
//! written in shortest round-trip form, so a write/read cycle is exact.
//!
//! ```text
//! # proxemo-gait
//! # version=1
//! # n_frames=75
//! # n_joints=16
//! # frame_rate=30
//! # emotion=sad
//! # view_group=front
//! # source=synthetic
//! frame,joint,x,y,z
//! 0,0,0.0123,1.0021,-0.0004
//! ...
//! ```
//!
//! Extra header keys (for example `theta_deg` on augmented copies) are kept
//! as metadata and ignored on read.

use std::collections::BTreeMap;
use std::path::Path;

use proxemo_core::gait::{Gait, GaitSource, LabeledGait, Pose, N_FRAMES, N_JOINTS};
use serde::{Deserialize, Serialize};

use crate::error::{read_text, write_bytes, CliError, Result};

pub const MAGIC: &str = "# proxemo-gait";
pub const VERSION: u32 = 1;
pub const EXTENSION: &str = "csv";

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    frame: usize,
    joint: usize,
    x: f64,
    y: f64,
    z: f64,
}

/// Serialise `gait` with optional extra header fields.
pub fn to_string(gait: &LabeledGait, extra: &[(&str, String)]) -> String {
    let mut out = format!("{MAGIC}\n# version={VERSION}\n# n_frames={N_FRAMES}\n# n_joints={N_JOINTS}\n");
    out += &format!("# frame_rate={}\n", gait.gait.frame_rate());
    out += &format!("# emotion={}\n# view_group={}\n", gait.emotion, gait.view_group);
    out += &format!("# source={}\n", gait.source.name());
    for (k, v) in extra {
        out += &format!("# {k}={v}\n");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for (f, pose) in gait.gait.frames().iter().enumerate() {
        for (j, p) in pose.0.iter().enumerate() {
            w.serialize(Row { frame: f, joint: j, x: p[0], y: p[1], z: p[2] })
                .expect("writing to memory");
        }
    }
    let body = w.into_inner().expect("writing to memory");
    out + std::str::from_utf8(&body).expect("csv output is UTF-8")
}

/// Parse a gait file's contents; `path` is only used in messages.
pub fn from_str(text: &str, path: &Path) -> Result<LabeledGait> {
    let bad = |m: String| CliError::malformed(path, m);
    let mut segments = text.split_inclusive('\n');
    let first = segments.next().unwrap_or("");
    if first.trim_end() != MAGIC {
        return Err(bad("missing proxemo-gait header".into()));
    }
    let mut header = BTreeMap::new();
    let mut offset = first.len();
    for segment in segments {
        let Some(kv) = segment.strip_prefix('#') else { break };
        let (k, v) = kv
            .trim()
            .split_once('=')
            .ok_or_else(|| bad(format!("header line '{}' is not key=value", segment.trim_end())))?;
        header.insert(k.trim().to_string(), v.trim().to_string());
        offset += segment.len();
    }
    let field = |k: &str| header.get(k).ok_or_else(|| bad(format!("header lacks '{k}'")));
    let number = |k: &str| -> Result<f64> {
        field(k)?.parse().map_err(|_| bad(format!("header '{k}' is not a number")))
    };
    if number("version")? != VERSION as f64 {
        return Err(bad(format!("unsupported version {}", field("version")?)));
    }
    if number("n_frames")? != N_FRAMES as f64 || number("n_joints")? != N_JOINTS as f64 {
        return Err(bad(format!("expected {N_FRAMES} frames of {N_JOINTS} joints")));
    }
    let frame_rate = number("frame_rate")?;
    let emotion = field("emotion")?.parse().map_err(|e| bad(format!("{e}")))?;
    let view_group = field("view_group")?.parse().map_err(|e| bad(format!("{e}")))?;
    let source: GaitSource = field("source")?.parse().map_err(|e| bad(format!("{e}")))?;

    let body = text.get(offset..).unwrap_or("");
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut frames = vec![Pose::default(); N_FRAMES];
    let mut count = 0;
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
        if i >= N_FRAMES * N_JOINTS || row.frame != i / N_JOINTS || row.joint != i % N_JOINTS {
            return Err(bad(format!("row {} out of (frame, joint) order", i + 1)));
        }
        frames[row.frame].0[row.joint] = [row.x, row.y, row.z];
        count += 1;
    }
    if count != N_FRAMES * N_JOINTS {
        return Err(bad(format!("{count} rows, expected {}", N_FRAMES * N_JOINTS)));
    }
    let gait = Gait::new(frames, frame_rate).map_err(|e| bad(e.to_string()))?;
    Ok(LabeledGait { gait, emotion, view_group, source })
}

pub fn write(path: &Path, gait: &LabeledGait, extra: &[(&str, String)]) -> Result<()> {
    write_bytes(path, to_string(gait, extra).as_bytes())
}

pub fn read(path: &Path) -> Result<LabeledGait> {
    from_str(&read_text(path)?, path)
}

/// Every gait file directly inside `dir`, sorted by file name.
pub fn read_dir(dir: &Path) -> Result<Vec<LabeledGait>> {
    let entries = std::fs::read_dir(dir).map_err(|source| CliError::Read {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == EXTENSION))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::malformed(dir, "no gait files found"));
    }
    paths.iter().map(|p| read(p)).collect()
}
