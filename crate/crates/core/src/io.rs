//! Binary snapshots and CSV traces.
//!
//! Snapshot layout, little-endian: `b"ZKF1"`, `u32` version (1), `u32 nx`,
//! `u32 ny`, `f64 Lx`, `f64 Ly` (half-lengths), `f64 t`, then `nx·ny` `f64`
//! samples, rows of constant `y` first. A trajectory file is a `u64` count
//! followed by that many snapshots.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, ZkError};
use crate::grid::{Field2D, Grid2D};
use crate::trajectory::Trajectory;
use crate::weights::{sobolev_norm, weighted_l2_with, WeightSpec};

pub const MAGIC: &[u8; 4] = b"ZKF1";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 40;

fn format_err<T>(offset: usize, reason: impl Into<String>) -> Result<T> {
    Err(ZkError::Format {
        offset: offset as u64,
        reason: reason.into(),
    })
}

pub fn encode_snapshot(field: &Field2D, t: f64, out: &mut Vec<u8>) {
    let g = field.grid();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.nx as u32).to_le_bytes());
    out.extend_from_slice(&(g.ny as u32).to_le_bytes());
    out.extend_from_slice(&g.half_length_x.to_le_bytes());
    out.extend_from_slice(&g.half_length_y.to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    for v in field.samples() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return format_err(
                self.pos,
                format!("truncated {what}: need {n} bytes, {} left", self.bytes.len() - self.pos),
            );
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn snapshot(&mut self) -> Result<(Field2D, f64)> {
        let start = self.pos;
        if self.take(4, "magic")? != MAGIC {
            return format_err(start, "bad magic (expected ZKF1)");
        }
        let version = self.u32("version")?;
        if version != FORMAT_VERSION {
            return format_err(start + 4, format!("unsupported format version {version}"));
        }
        let nx = self.u32("nx")? as usize;
        let ny = self.u32("ny")? as usize;
        let lx = self.f64("Lx")?;
        let ly = self.f64("Ly")?;
        let t = self.f64("time")?;
        let grid = match Grid2D::new(nx, ny, lx, ly) {
            Ok(g) => g,
            Err(e) => return format_err(start + 8, format!("bad grid header: {e}")),
        };
        if !t.is_finite() {
            return format_err(start + 32, "non-finite time");
        }
        let payload_at = self.pos;
        let payload = self.take(8 * nx * ny, "sample payload")?;
        let mut samples = Vec::with_capacity(nx * ny);
        for (k, chunk) in payload.chunks_exact(8).enumerate() {
            let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
            if !v.is_finite() {
                return format_err(payload_at + 8 * k, "non-finite sample");
            }
            samples.push(v);
        }
        Ok((Field2D::new(grid, samples)?, t))
    }
}

/// Decodes a single-field snapshot; the buffer must hold exactly one.
pub fn decode_snapshot(bytes: &[u8]) -> Result<(Field2D, f64)> {
    let mut r = Reader { bytes, pos: 0 };
    let (field, t) = r.snapshot()?;
    if r.pos != bytes.len() {
        return format_err(
            r.pos,
            format!("size mismatch: expected {} bytes, file has {}", r.pos, bytes.len()),
        );
    }
    Ok((field, t))
}

pub fn encode_trajectory(traj: &Trajectory) -> Vec<u8> {
    let g = traj.grid();
    let mut out = Vec::with_capacity(8 + traj.len() * (HEADER_LEN + 8 * g.len()));
    out.extend_from_slice(&(traj.len() as u64).to_le_bytes());
    for (t, s) in traj.times().iter().zip(traj.snapshots()) {
        encode_snapshot(s, *t, &mut out);
    }
    out
}

pub fn decode_trajectory(bytes: &[u8]) -> Result<Trajectory> {
    let mut r = Reader { bytes, pos: 0 };
    let count = r.u64("snapshot count")?;
    if count == 0 {
        return format_err(0, "trajectory with no snapshots");
    }
    let mut times = Vec::new();
    let mut snaps: Vec<Field2D> = Vec::new();
    for _ in 0..count {
        let at = r.pos;
        let (f, t) = r.snapshot()?;
        if let Some(first) = snaps.first() {
            if f.grid() != first.grid() {
                return format_err(at + 8, "snapshot grid differs from the first snapshot");
            }
        }
        let ok = match times.last() {
            None => t == 0.0,
            Some(&prev) => t > prev,
        };
        if !ok {
            return format_err(at + 32, format!("snapshot time {t} breaks the 0 = t0 < t1 < ... order"));
        }
        times.push(t);
        snaps.push(f);
    }
    if r.pos != bytes.len() {
        return format_err(r.pos, format!("{} trailing bytes after the last snapshot", bytes.len() - r.pos));
    }
    Trajectory::new(times, snaps)
}

pub fn save_snapshot(field: &Field2D, t: f64, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.grid().len());
    encode_snapshot(field, t, &mut out);
    fs::write(path, out)?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<(Field2D, f64)> {
    decode_snapshot(&fs::read(path)?)
}

pub fn save_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    fs::write(path, encode_trajectory(traj))?;
    Ok(())
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    decode_trajectory(&fs::read(path)?)
}

/// Extra trace columns after `t, l2, mass`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TraceColumn {
    Sobolev(f64),
    Weighted(WeightSpec),
}

impl TraceColumn {
    pub fn label(&self) -> String {
        match self {
            TraceColumn::Sobolev(s) => format!("hs({s})"),
            TraceColumn::Weighted(w) => format!("weighted({})", w.label()),
        }
    }

    fn value(&self, f: &Field2D) -> Result<f64> {
        match self {
            TraceColumn::Sobolev(s) => sobolev_norm(f, *s),
            // Evolved states carry tails above the decay rule; the weighted
            // norm is still well defined on the box.
            TraceColumn::Weighted(w) => {
                let wf = w.sample(*f.grid())?;
                Ok(weighted_l2_with(f, &wf))
            }
        }
    }
}

impl std::str::FromStr for TraceColumn {
    type Err = ZkError;
    /// `hs:<s>` or any weight spec accepted by [`WeightSpec`].
    fn from_str(s: &str) -> Result<Self> {
        if let Some(v) = s.strip_prefix("hs:") {
            return v
                .trim()
                .parse()
                .map(TraceColumn::Sobolev)
                .map_err(|_| ZkError::InvalidInput(format!("bad Sobolev order in `{s}`")));
        }
        Ok(TraceColumn::Weighted(s.parse()?))
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Seventeen significant digits.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// RFC-4180 CSV (CRLF line ends), one row per snapshot.
pub fn trace_csv(traj: &Trajectory, columns: &[TraceColumn]) -> Result<String> {
    let mut header = vec!["t".to_string(), "l2".to_string(), "mass".to_string()];
    header.extend(columns.iter().map(|c| c.label()));
    let mut out = header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(",");
    out.push_str("\r\n");
    for (t, f) in traj.times().iter().zip(traj.snapshots()) {
        let mut row = vec![format_number(*t), format_number(f.l2_norm()), format_number(f.mass())];
        for c in columns {
            row.push(format_number(c.value(f)?));
        }
        out.push_str(&row.join(","));
        out.push_str("\r\n");
    }
    Ok(out)
}

pub fn emit_trace(traj: &Trajectory, columns: &[TraceColumn], path: &Path) -> Result<()> {
    let text = trace_csv(traj, columns)?;
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::gaussian;

    fn field() -> Field2D {
        gaussian(Grid2D::new(8, 10, 4.0, 5.0).unwrap(), 1.0, 0.7, (0.3, -0.2))
    }

    #[test]
    fn snapshot_roundtrip_is_bitwise() {
        let f = field();
        let mut buf = Vec::new();
        encode_snapshot(&f, 0.25, &mut buf);
        assert_eq!(buf.len(), HEADER_LEN + 8 * 80);
        let (g, t) = decode_snapshot(&buf).unwrap();
        assert_eq!(t, 0.25);
        assert!(f.samples().iter().zip(g.samples()).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(f.grid(), g.grid());
    }

    #[test]
    fn format_errors_name_offsets() {
        let mut buf = Vec::new();
        encode_snapshot(&field(), 0.0, &mut buf);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(decode_snapshot(&bad), Err(ZkError::Format { offset: 0, .. })));
        let short = &buf[..buf.len() - 3];
        assert!(matches!(decode_snapshot(short), Err(ZkError::Format { offset: 40, .. })));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(decode_snapshot(&long), Err(ZkError::Format { offset, .. }) if offset as usize == buf.len()));
        let mut ver = buf.clone();
        ver[4] = 2;
        assert!(matches!(decode_snapshot(&ver), Err(ZkError::Format { offset: 4, .. })));
        let mut nan = buf.clone();
        nan[48..56].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode_snapshot(&nan), Err(ZkError::Format { offset: 48, .. })));
    }

    #[test]
    fn trajectory_roundtrip_and_order_check() {
        let f = field();
        let traj = Trajectory::new(vec![0.0, 0.5], vec![f.clone(), f.scale(2.0)]).unwrap();
        let bytes = encode_trajectory(&traj);
        assert_eq!(decode_trajectory(&bytes).unwrap(), traj);
        let mut bad = bytes.clone();
        // Second snapshot's time field.
        let at = 8 + HEADER_LEN + 8 * 80 + 32;
        bad[at..at + 8].copy_from_slice(&0.0f64.to_le_bytes());
        assert!(matches!(decode_trajectory(&bad), Err(ZkError::Format { offset, .. }) if offset as usize == at));
    }

    #[test]
    fn trace_columns() {
        let g = Grid2D::square(32, 8.0).unwrap();
        let z = Trajectory::from_fn(vec![0.0, 1.0], |_| Field2D::zeros(g)).unwrap();
        let cols = [TraceColumn::Sobolev(1.0), "poly:1".parse().unwrap()];
        let csv = trace_csv(&z, &cols).unwrap();
        let lines: Vec<&str> = csv.split("\r\n").collect();
        assert_eq!(lines[0], "t,l2,mass,hs(1),weighted(poly(1))");
        assert_eq!(lines[1], "0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(format_number(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
