//! Flat binary snapshot layout for caching trajectories between runs.
//!
//! Snapshot record: magic `NSS1`, `u32` n, `f64` length, `f64` time,
//! `u8` flow tag, then the three component arrays as physical samples in
//! row-major order, all little-endian `f64`. A trajectory file is the magic
//! `NST1`, a `u64` record count, and that many snapshot records sharing one
//! tag.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array3;

use crate::error::CoreError;
use crate::field::VectorField;
use crate::grid::Grid3;

use super::{FlowTag, Trajectory};

const SNAP_MAGIC: &[u8; 4] = b"NSS1";
const TRAJ_MAGIC: &[u8; 4] = b"NST1";

/// Writes one snapshot record.
pub fn write_snapshot<W: Write>(
    w: &mut W,
    field: &VectorField,
    time: f64,
    tag: FlowTag,
) -> Result<(), CoreError> {
    if !(time.is_finite() && time >= 0.0) {
        return Err(CoreError::InvalidParameter(format!("bad snapshot time {time}")));
    }
    let grid = field.grid();
    w.write_all(SNAP_MAGIC)?;
    w.write_u32::<LittleEndian>(grid.n() as u32)?;
    w.write_f64::<LittleEndian>(grid.length())?;
    w.write_f64::<LittleEndian>(time)?;
    w.write_u8(tag.to_byte())?;
    let phys = field.to_physical();
    for c in 0..3 {
        for &v in phys.physical()[c].iter() {
            w.write_f64::<LittleEndian>(v)?;
        }
    }
    Ok(())
}

/// Reads one snapshot record back as `(field, time, tag)`.
pub fn read_snapshot<R: Read>(r: &mut R) -> Result<(VectorField, f64, FlowTag), CoreError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAP_MAGIC {
        return Err(CoreError::SnapshotIo("bad snapshot magic".into()));
    }
    let n = r.read_u32::<LittleEndian>()? as usize;
    let length = r.read_f64::<LittleEndian>()?;
    let time = r.read_f64::<LittleEndian>()?;
    let tag = FlowTag::from_byte(r.read_u8()?)?;
    let grid = Grid3::new(n, length)?;
    if !(time.is_finite() && time >= 0.0) {
        return Err(CoreError::SnapshotIo(format!("bad stored time {time}")));
    }
    let mut comps = Vec::with_capacity(3);
    for _ in 0..3 {
        let mut flat = vec![0.0f64; n * n * n];
        r.read_f64_into::<LittleEndian>(&mut flat)?;
        let arr = Array3::from_shape_vec((n, n, n), flat)
            .map_err(|e| CoreError::SnapshotIo(format!("component shape: {e}")))?;
        comps.push(arr);
    }
    let field = VectorField::from_physical(
        &grid,
        comps.try_into().expect("exactly three components were read"),
    )?;
    Ok((field, time, tag))
}

/// Writes a whole trajectory as consecutive snapshot records.
pub fn write_trajectory<W: Write>(w: &mut W, traj: &Trajectory) -> Result<(), CoreError> {
    w.write_all(TRAJ_MAGIC)?;
    w.write_u64::<LittleEndian>(traj.len() as u64)?;
    for (i, snap) in traj.snapshots().iter().enumerate() {
        write_snapshot(w, snap, traj.times()[i], traj.tag())?;
    }
    Ok(())
}

/// Reads a trajectory written by [`write_trajectory`].
pub fn read_trajectory<R: Read>(r: &mut R) -> Result<Trajectory, CoreError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != TRAJ_MAGIC {
        return Err(CoreError::SnapshotIo("bad trajectory magic".into()));
    }
    let count = r.read_u64::<LittleEndian>()? as usize;
    if count == 0 {
        return Err(CoreError::SnapshotIo("empty trajectory record".into()));
    }
    let mut times = Vec::with_capacity(count);
    let mut snaps = Vec::with_capacity(count);
    let mut tag = None;
    for _ in 0..count {
        let (field, time, t) = read_snapshot(r)?;
        match tag {
            None => tag = Some(t),
            Some(prev) if prev != t => {
                return Err(CoreError::SnapshotIo("mixed flow tags in one trajectory".into()))
            }
            _ => {}
        }
        times.push(time);
        snaps.push(field);
    }
    Trajectory::new(tag.expect("count > 0"), times, snaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Representation;
    use crate::C64;
    use std::io::Cursor;

    fn sample_field(grid: &Grid3, amp: f64) -> VectorField {
        let mut f = VectorField::zeros(grid, Representation::Spectral);
        f.set_mode([1, 0, 0], 1, C64::new(0.0, -0.5 * amp));
        f.set_mode([-1, 0, 0], 1, C64::new(0.0, 0.5 * amp));
        f.to_physical()
    }

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let grid = Grid3::new(16, 3.0).unwrap();
        let field = sample_field(&grid, 1.7);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &field, 0.25, FlowTag::Picard(3)).unwrap();
        let (back, time, tag) = read_snapshot(&mut Cursor::new(&buf)).unwrap();
        assert_eq!(time, 0.25);
        assert_eq!(tag, FlowTag::Picard(3));
        assert_eq!(*back.grid(), grid);
        for c in 0..3 {
            let a = field.physical()[c].as_slice().unwrap();
            let b = back.physical()[c].as_slice().unwrap();
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        // writing the read-back field reproduces the byte stream
        let mut buf2 = Vec::new();
        write_snapshot(&mut buf2, &back, time, tag).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn trajectory_round_trip() {
        let grid = Grid3::new(8, 1.0).unwrap();
        let times = vec![0.0, 0.1, 0.3];
        let snaps: Vec<VectorField> =
            [0.5, 0.4, 0.2].iter().map(|&a| sample_field(&grid, a)).collect();
        let traj = Trajectory::new(FlowTag::Heat, times, snaps).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &traj).unwrap();
        let back = read_trajectory(&mut Cursor::new(&buf)).unwrap();
        assert_eq!(back.tag(), FlowTag::Heat);
        assert_eq!(back.times(), traj.times());
        for (a, b) in traj.snapshots().iter().zip(back.snapshots()) {
            let d = a.sub(b).unwrap();
            assert_eq!(d.l2_norm_sq(), 0.0);
        }
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let grid = Grid3::new(8, 1.0).unwrap();
        let field = sample_field(&grid, 1.0);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &field, 0.0, FlowTag::NavierStokes).unwrap();
        buf[0] = b'X';
        assert!(read_snapshot(&mut Cursor::new(&buf)).is_err());
        // truncated payload
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &field, 0.0, FlowTag::NavierStokes).unwrap();
        buf.truncate(buf.len() - 9);
        assert!(read_snapshot(&mut Cursor::new(&buf)).is_err());
        // unknown tag byte (3..16 is unassigned)
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &field, 0.0, FlowTag::NavierStokes).unwrap();
        let tag_pos = 4 + 4 + 8 + 8;
        buf[tag_pos] = 7;
        assert!(read_snapshot(&mut Cursor::new(&buf)).is_err());
    }
}
