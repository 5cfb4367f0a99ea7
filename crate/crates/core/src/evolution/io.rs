//! Binary checkpoints and trajectory CSV.
//!
//! Checkpoint layout, all little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `CSEMICKP` |
//! | 4 | `u32` format version (1) |
//! | 4 | `u32` grid points `n` |
//! | 4 | `u32` stored reals per point `m` (60) |
//! | 4 | `u32` reduction (0 homogeneous, 1 plane-symmetric) |
//! | 8 | `f64` time |
//! | 8 | `f64` grid spacing |
//! | 8 | `f64` grid origin |
//! | 8 n m | `f64` data, field-major: all points of slot 0, then slot 1, ... |
//!
//! Slots `0..30` are the fields, `30..60` their time derivatives.

use super::evolve::TrajectoryRecord;
use super::monitors::MonitorRecord;
use super::state::{EvolutionState, Fields, PointState, Reduction, FIELD_COUNT, GROUP_NAMES};
use crate::error::{Error, Result};
use std::io::{Read, Write};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"CSEMICKP";
pub const CHECKPOINT_VERSION: u32 = 1;
const SLOTS: usize = 2 * FIELD_COUNT;

pub fn write_checkpoint<W: Write>(out: &mut W, state: &EvolutionState<f64>) -> Result<()> {
    out.write_all(CHECKPOINT_MAGIC)?;
    let reduction = match state.reduction {
        Reduction::Homogeneous => 0u32,
        Reduction::PlaneSymmetric => 1,
    };
    for x in [CHECKPOINT_VERSION, state.len() as u32, SLOTS as u32, reduction] {
        out.write_all(&x.to_le_bytes())?;
    }
    for x in [state.time, state.spacing, state.origin] {
        out.write_all(&x.to_le_bytes())?;
    }
    let flat: Vec<[f64; SLOTS]> = state.points.iter().map(flatten).collect();
    for slot in 0..SLOTS {
        for p in &flat {
            out.write_all(&p[slot].to_le_bytes())?;
        }
    }
    Ok(())
}

fn flatten(p: &PointState<f64>) -> [f64; SLOTS] {
    let mut x = [0.0; SLOTS];
    x[..FIELD_COUNT].copy_from_slice(&p.q.to_flat());
    x[FIELD_COUNT..].copy_from_slice(&p.qdot.to_flat());
    x
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, msg.into()))
}

pub fn read_checkpoint<R: Read>(input: &mut R) -> Result<EvolutionState<f64>> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let mut u = [0u8; 4];
    let mut next_u32 = |input: &mut R| -> Result<u32> {
        input.read_exact(&mut u)?;
        Ok(u32::from_le_bytes(u))
    };
    let version = next_u32(input)?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported checkpoint version {version}")));
    }
    let n = next_u32(input)? as usize;
    let m = next_u32(input)? as usize;
    if m != SLOTS {
        return Err(bad(format!("expected {SLOTS} reals per point, found {m}")));
    }
    let reduction = match next_u32(input)? {
        0 => Reduction::Homogeneous,
        1 => Reduction::PlaneSymmetric,
        r => return Err(bad(format!("unknown reduction code {r}"))),
    };
    let mut f = [0u8; 8];
    let mut next_f64 = |input: &mut R| -> Result<f64> {
        input.read_exact(&mut f)?;
        Ok(f64::from_le_bytes(f))
    };
    let time = next_f64(input)?;
    let spacing = next_f64(input)?;
    let origin = next_f64(input)?;
    let mut flat = vec![[0.0f64; SLOTS]; n];
    for slot in 0..SLOTS {
        for p in flat.iter_mut() {
            p[slot] = next_f64(input)?;
        }
    }
    Ok(EvolutionState {
        time,
        spacing,
        origin,
        reduction,
        points: flat
            .iter()
            .map(|x| PointState {
                q: Fields::from_flat(&x[..FIELD_COUNT]),
                qdot: Fields::from_flat(&x[FIELD_COUNT..]),
            })
            .collect(),
    })
}

/// CSV header of [`trajectory_csv`].
pub fn trajectory_header() -> Vec<String> {
    let mut cols = vec!["time".to_string()];
    for g in GROUP_NAMES {
        cols.push(format!("{g}_norm"));
    }
    for g in GROUP_NAMES {
        cols.push(format!("{g}_dot_norm"));
    }
    cols.extend(MonitorRecord::COLUMNS[1..].iter().map(|s| s.to_string()));
    cols.push("trace_drift".into());
    cols
}

pub fn trajectory_csv(records: &[TrajectoryRecord]) -> String {
    let mut out = trajectory_header().join(",");
    out.push('\n');
    for r in records {
        let mut row = vec![r.monitor.time];
        row.extend_from_slice(&r.field_norms);
        row.extend_from_slice(&r.monitor.values()[1..]);
        row.push(r.trace_drift);
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
