//! Sample record files, binary or JSON lines.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! header  "MLSTMSMP"  u32 version=1  u32 history_len  u32 future_len
//!         u32 channels  u64 count
//! record  u32 vehicle_id  u32 reserved=0  i64 frame  f64 origin_x  f64 origin_y
//!         u32 lateral  u32 longitudinal  u32 neighbor_mask_bits  u32 reserved=0
//!         history_len * channels f64 (row-major, oldest row first)
//!         future_len * 2 f64
//! ```
//!
//! Lateral codes are 0 keep, 1 left, 2 right; longitudinal 0 normal,
//! 1 brake. Bit `i` of the mask is neighbor slot `i`.

use mlstm_core::maneuvers::{Lateral, Longitudinal, ManeuverLabel};
use mlstm_core::trackstore::{Origin, Sample, FUTURE_LEN, HISTORY_LEN, INPUT_CHANNELS, NUM_NEIGHBORS};
use serde::{Deserialize, Serialize};

use super::ByteReader;
use crate::error::{CliError, Result};

pub const SAMPLE_MAGIC: &[u8; 8] = b"MLSTMSMP";
pub const SAMPLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Binary,
    JsonLines,
}

impl SampleFormat {
    /// `.jsonl` and `.json` mean JSON lines; anything else is binary.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => SampleFormat::JsonLines,
            _ => SampleFormat::Binary,
        }
    }
}

pub fn encode_binary(samples: &[Sample]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(SAMPLE_MAGIC);
    for v in [SAMPLE_VERSION, HISTORY_LEN as u32, FUTURE_LEN as u32, INPUT_CHANNELS as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(samples.len() as u64).to_le_bytes());
    for s in samples {
        out.extend_from_slice(&s.vehicle_id.to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        out.extend_from_slice(&s.origin.frame.to_le_bytes());
        out.extend_from_slice(&s.origin.x.to_le_bytes());
        out.extend_from_slice(&s.origin.y.to_le_bytes());
        let mask = s
            .neighbor_mask
            .iter()
            .enumerate()
            .fold(0u32, |m, (i, &present)| m | (u32::from(present) << i));
        for v in [s.label.lateral.index() as u32, s.label.longitudinal.index() as u32, mask, 0] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for row in &s.history {
            for v in row {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        for p in &s.future {
            out.extend_from_slice(&p[0].to_le_bytes());
            out.extend_from_slice(&p[1].to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<Vec<Sample>> {
    let mut r = ByteReader::new(bytes);
    if r.take(8)? != SAMPLE_MAGIC {
        return Err(CliError::Data("not a sample file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != SAMPLE_VERSION {
        return Err(CliError::Data(format!("unsupported sample file version {version}")));
    }
    let (h, f, c) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    if (h, f, c) != (HISTORY_LEN, FUTURE_LEN, INPUT_CHANNELS) {
        return Err(CliError::Data(format!(
            "sample shape {h}x{c} / {f}x2 does not match {HISTORY_LEN}x{INPUT_CHANNELS} / {FUTURE_LEN}x2"
        )));
    }
    let count = r.u64()? as usize;
    let mut out = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let vehicle_id = r.u32()?;
        r.u32()?;
        let frame = r.i64()?;
        let (x, y) = (r.f64()?, r.f64()?);
        let (lat, lon, mask, _) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
        let label = ManeuverLabel::new(
            Lateral::from_index(lat as usize).ok_or_else(|| CliError::Data(format!("bad lateral code {lat}")))?,
            Longitudinal::from_index(lon as usize).ok_or_else(|| CliError::Data(format!("bad longitudinal code {lon}")))?,
        );
        let mut history = Vec::with_capacity(h);
        for _ in 0..h {
            let mut row = [0.0; INPUT_CHANNELS];
            for v in &mut row {
                *v = r.f64()?;
            }
            history.push(row);
        }
        let mut future = Vec::with_capacity(f);
        for _ in 0..f {
            future.push([r.f64()?, r.f64()?]);
        }
        out.push(Sample {
            vehicle_id,
            history,
            future,
            label,
            neighbor_mask: std::array::from_fn(|i| mask & (1 << i) != 0),
            origin: Origin { x, y, frame },
        });
    }
    if !r.is_done() {
        return Err(CliError::Data("trailing bytes after the last sample".into()));
    }
    Ok(out)
}

/// JSON-lines form of a [`Sample`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub vehicle_id: u32,
    pub frame: i64,
    pub origin: [f64; 2],
    pub lateral: String,
    pub longitudinal: String,
    pub neighbor_mask: [bool; NUM_NEIGHBORS],
    pub history: Vec<[f64; INPUT_CHANNELS]>,
    pub future: Vec<[f64; 2]>,
}

impl From<&Sample> for SampleRecord {
    fn from(s: &Sample) -> Self {
        Self {
            vehicle_id: s.vehicle_id,
            frame: s.origin.frame,
            origin: [s.origin.x, s.origin.y],
            lateral: s.label.lateral.name().into(),
            longitudinal: s.label.longitudinal.name().into(),
            neighbor_mask: s.neighbor_mask,
            history: s.history.clone(),
            future: s.future.clone(),
        }
    }
}

impl TryFrom<SampleRecord> for Sample {
    type Error = CliError;

    fn try_from(r: SampleRecord) -> Result<Self> {
        if r.history.len() != HISTORY_LEN || r.future.len() != FUTURE_LEN {
            return Err(CliError::Data(format!(
                "sample ({}, {}) has {} history and {} future rows",
                r.vehicle_id,
                r.frame,
                r.history.len(),
                r.future.len()
            )));
        }
        let lateral = Lateral::from_name(&r.lateral).ok_or_else(|| CliError::Data(format!("bad lateral `{}`", r.lateral)))?;
        let longitudinal = Longitudinal::from_name(&r.longitudinal)
            .ok_or_else(|| CliError::Data(format!("bad longitudinal `{}`", r.longitudinal)))?;
        Ok(Sample {
            vehicle_id: r.vehicle_id,
            history: r.history,
            future: r.future,
            label: ManeuverLabel::new(lateral, longitudinal),
            neighbor_mask: r.neighbor_mask,
            origin: Origin {
                x: r.origin[0],
                y: r.origin[1],
                frame: r.frame,
            },
        })
    }
}

pub fn encode_jsonl(samples: &[Sample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(&SampleRecord::from(s)).expect("serializable record"));
        out.push('\n');
    }
    out
}

pub fn decode_jsonl(text: &str) -> Result<Vec<Sample>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let rec: SampleRecord = serde_json::from_str(l).map_err(|e| CliError::Data(format!("line {}: {e}", i + 1)))?;
            Sample::try_from(rec)
        })
        .collect()
}

pub fn read_samples(path: &std::path::Path) -> Result<Vec<Sample>> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    match SampleFormat::from_path(path) {
        SampleFormat::Binary => decode_binary(&bytes),
        SampleFormat::JsonLines => {
            let text = String::from_utf8(bytes).map_err(|_| CliError::Data(format!("{}: not UTF-8", path.display())))?;
            decode_jsonl(&text)
        }
    }
    .map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_samples(path: &std::path::Path, samples: &[Sample]) -> Result<()> {
    let bytes = match SampleFormat::from_path(path) {
        SampleFormat::Binary => encode_binary(samples),
        SampleFormat::JsonLines => encode_jsonl(samples).into_bytes(),
    };
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
