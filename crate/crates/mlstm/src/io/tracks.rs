//! Delimited-text trajectory tables.
//!
//! Columns are comma- or whitespace-separated. A first line whose first
//! field is not a number is a header and columns are found by name;
//! otherwise the file is taken to be a raw NGSIM export with the standard
//! 18-column order.

use std::fmt::Write as _;

use mlstm_core::trackstore::{TrackRow, TrackStore};

use crate::error::{CliError, Result};

pub const FEET_TO_METERS: f64 = 0.3048;

/// Column order of the public NGSIM US-101 and I-80 text exports.
pub const NGSIM_COLUMNS: [&str; 18] = [
    "Vehicle_ID",
    "Frame_ID",
    "Total_Frames",
    "Global_Time",
    "Local_X",
    "Local_Y",
    "Global_X",
    "Global_Y",
    "v_Length",
    "v_Width",
    "v_Class",
    "v_Vel",
    "v_Acc",
    "Lane_ID",
    "Preceding",
    "Following",
    "Space_Hdwy",
    "Time_Hdwy",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitMode {
    Feet,
    #[default]
    Meters,
}

impl UnitMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "feet" | "ft" => Some(UnitMode::Feet),
            "meters" | "m" | "metres" => Some(UnitMode::Meters),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnitMode::Feet => "feet",
            UnitMode::Meters => "meters",
        }
    }

    fn factor(self) -> f64 {
        match self {
            UnitMode::Feet => FEET_TO_METERS,
            UnitMode::Meters => 1.0,
        }
    }
}

/// Header names of the five required columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub vehicle: String,
    pub frame: String,
    pub x: String,
    pub y: String,
    pub lane: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            vehicle: "Vehicle_ID".into(),
            frame: "Frame_ID".into(),
            x: "Local_X".into(),
            y: "Local_Y".into(),
            lane: "Lane_ID".into(),
        }
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn is_blank(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Parses a trajectory table into a store tagged `dataset_tag`.
pub fn parse_trajectories(text: &str, columns: &ColumnMap, unit: UnitMode, dataset_tag: &str) -> Result<TrackStore> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !is_blank(l)).peekable();
    let Some(&(_, first)) = lines.peek() else {
        return Ok(TrackStore::from_rows(dataset_tag, [])?);
    };
    let first_fields = split_fields(first);
    let has_header = first_fields.first().is_some_and(|f| f.parse::<f64>().is_err());
    let header: Vec<String> = if has_header {
        lines.next();
        first_fields.iter().map(|s| s.to_string()).collect()
    } else {
        NGSIM_COLUMNS.iter().map(|s| s.to_string()).collect()
    };
    let find = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| CliError::Data(format!("missing column `{name}`")))
    };
    let idx = [
        find(&columns.vehicle)?,
        find(&columns.frame)?,
        find(&columns.x)?,
        find(&columns.y)?,
        find(&columns.lane)?,
    ];
    let needed = idx.iter().max().copied().unwrap_or(0) + 1;
    let k = unit.factor();

    let mut rows = Vec::new();
    for (i, line) in lines {
        let fields = split_fields(line);
        if fields.len() < needed {
            return Err(CliError::Data(format!(
                "line {}: expected at least {needed} fields, found {}",
                i + 1,
                fields.len()
            )));
        }
        let num = |j: usize| -> Result<f64> {
            let v: f64 = fields[idx[j]]
                .parse()
                .map_err(|_| CliError::Data(format!("line {}: `{}` is not a number", i + 1, fields[idx[j]])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Data(format!("line {}: non-finite value", i + 1)))
            }
        };
        let int = |j: usize| -> Result<i64> {
            let v = num(j)?;
            if v.fract() != 0.0 {
                return Err(CliError::Data(format!("line {}: `{}` is not an integer", i + 1, fields[idx[j]])));
            }
            Ok(v as i64)
        };
        rows.push(TrackRow {
            vehicle: u32::try_from(int(0)?)
                .map_err(|_| CliError::Data(format!("line {}: vehicle id out of range", i + 1)))?,
            frame: int(1)?,
            x: num(2)? * k,
            y: num(3)? * k,
            lane: int(4)?,
        });
    }
    Ok(TrackStore::from_rows(dataset_tag, rows)?)
}

/// Writes a store as comma-separated text with a default-named header,
/// coordinates in meters. Values round-trip exactly.
pub fn write_trajectories(store: &TrackStore) -> String {
    let c = ColumnMap::default();
    let mut out = format!("{},{},{},{},{}\n", c.vehicle, c.frame, c.x, c.y, c.lane);
    for track in store.tracks() {
        for p in track.points() {
            let _ = writeln!(out, "{},{},{},{},{}", track.id(), p.frame, p.x, p.y, p.lane);
        }
    }
    out
}
