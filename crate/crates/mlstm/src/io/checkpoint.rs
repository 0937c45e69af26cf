//! Weight checkpoints.
//!
//! ```text
//! file     "MLSTMCKP"  u32 version=1  u32 section_count
//! section  u32 kind (0 trajectory, 1 classifier)  u32 variant code
//!          u64 hidden  u64 embed  u64 history_len  u64 future_len
//!          f64 position_scale  f64 input_scale  u32 entry_count
//! entry    u32 name_len  name (UTF-8)  u64 rows  u64 cols
//!          rows * cols f64 (row-major)
//! ```
//!
//! Everything is little-endian. Variant codes are 0 V-LSTM, 1 S-LSTM,
//! 2 M-LSTM, 3 M-LSTM-GT.

use std::path::Path;

use mlstm_core::model::{ClassifierNet, ManeuverModel, ModelConfig, TrajectoryNet, Variant};
use mlstm_core::nnkernel::{ParamSet, Tensor2};

use super::ByteReader;
use crate::error::{CliError, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"MLSTMCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

const KIND_TRAJECTORY: u32 = 0;
const KIND_CLASSIFIER: u32 = 1;

fn put_section(out: &mut Vec<u8>, kind: u32, config: &ModelConfig, params: &ParamSet) {
    out.extend_from_slice(&kind.to_le_bytes());
    out.extend_from_slice(&config.variant.code().to_le_bytes());
    for v in [config.hidden, config.embed, config.history_len, config.future_len] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.extend_from_slice(&config.position_scale.to_le_bytes());
    out.extend_from_slice(&config.input_scale.to_le_bytes());
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for (name, t) in params.iter() {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(t.cols() as u64).to_le_bytes());
        for v in t.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

pub fn encode_model(model: &ManeuverModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(1 + u32::from(model.classifier.is_some())).to_le_bytes());
    put_section(&mut out, KIND_TRAJECTORY, model.trajectory.config(), model.trajectory.params());
    if let Some(c) = &model.classifier {
        put_section(&mut out, KIND_CLASSIFIER, c.config(), c.params());
    }
    out
}

fn read_section(r: &mut ByteReader<'_>) -> Result<(u32, ModelConfig, ParamSet)> {
    let kind = r.u32()?;
    let code = r.u32()?;
    let variant = Variant::from_code(code).ok_or_else(|| CliError::Data(format!("unknown variant code {code}")))?;
    let mut dims = [0usize; 4];
    for d in &mut dims {
        *d = usize::try_from(r.u64()?).map_err(|_| CliError::Data("dimension overflow".into()))?;
    }
    let config = ModelConfig {
        variant,
        hidden: dims[0],
        embed: dims[1],
        history_len: dims[2],
        future_len: dims[3],
        position_scale: r.f64()?,
        input_scale: r.f64()?,
    };
    let n = r.u32()?;
    let mut params = ParamSet::new();
    for _ in 0..n {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|_| CliError::Data("parameter name is not UTF-8".into()))?
            .to_string();
        let rows = r.u64()? as usize;
        let cols = r.u64()? as usize;
        let count = rows
            .checked_mul(cols)
            .ok_or_else(|| CliError::Data(format!("parameter `{name}` is too large")))?;
        let raw = r.take(count.checked_mul(8).ok_or_else(|| CliError::Data("size overflow".into()))?)?;
        let data: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Numeric(format!("parameter `{name}` holds non-finite weights")));
        }
        let tensor = Tensor2::new(rows, cols, data).map_err(|e| CliError::Data(e.to_string()))?;
        if params.id_of(&name).is_some() {
            return Err(CliError::Data(format!("duplicate parameter `{name}`")));
        }
        params.add(name, tensor);
    }
    Ok((kind, config, params))
}

pub fn decode_model(bytes: &[u8]) -> Result<ManeuverModel> {
    let mut r = ByteReader::new(bytes);
    if r.take(8)? != CHECKPOINT_MAGIC {
        return Err(CliError::Data("not a checkpoint (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(CliError::Data(format!("unsupported checkpoint version {version}")));
    }
    let sections = r.u32()?;
    let mut trajectory = None;
    let mut classifier = None;
    for _ in 0..sections {
        let (kind, config, params) = read_section(&mut r)?;
        match kind {
            KIND_TRAJECTORY if trajectory.is_none() => trajectory = Some(TrajectoryNet::from_params(config, params)?),
            KIND_CLASSIFIER if classifier.is_none() => classifier = Some(ClassifierNet::from_params(config, params)?),
            _ => return Err(CliError::Data(format!("unexpected checkpoint section kind {kind}"))),
        }
    }
    if !r.is_done() {
        return Err(CliError::Data("trailing bytes after the last section".into()));
    }
    let trajectory = trajectory.ok_or_else(|| CliError::Data("checkpoint has no trajectory network".into()))?;
    Ok(ManeuverModel::new(trajectory, classifier))
}

pub fn save_model(path: &Path, model: &ManeuverModel) -> Result<()> {
    std::fs::write(path, encode_model(model)).map_err(|e| CliError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ManeuverModel> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_model(&bytes).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}
