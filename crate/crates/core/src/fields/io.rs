//! Field container: `HLDF1\n`, an 8-byte little-endian header length, a JSON header
//! (grid, name, metadata), then every value as little-endian `f64` in time-outer
//! row-major order.

use super::{GridSpec, SpaceTimeField};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};

const MAGIC: &[u8; 6] = b"HLDF1\n";

#[derive(Serialize, Deserialize)]
struct Header {
    grid: GridSpec,
    name: String,
    metadata: BTreeMap<String, String>,
}

pub fn write_binary(field: &SpaceTimeField, mut w: impl Write) -> Result<()> {
    let header = Header {
        grid: field.grid.clone(),
        name: field.name.clone(),
        metadata: field.metadata.clone(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::IoFailure(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<SpaceTimeField> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::FieldData("not a field container (bad magic)".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json).map_err(|e| Error::FieldData(e.to_string()))?;
    header.grid.validate()?;
    let count = header.grid.len();
    let mut raw = vec![0u8; count * 8];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let mut field = SpaceTimeField::new(header.grid, values, header.name)?;
    field.metadata = header.metadata;
    Ok(field)
}

/// CSV with columns `t, x[, y], u`, one row per node.
pub fn write_csv(field: &SpaceTimeField, mut w: impl Write) -> Result<()> {
    let g = &field.grid;
    if g.dim == 1 {
        writeln!(w, "t,x,u")?;
    } else {
        writeln!(w, "t,x,y,u")?;
    }
    for k in 0..g.nt {
        let t = g.time_at(k);
        for s in 0..g.spatial_len() {
            let p = g.node(s);
            let u = field.at(k, s);
            if g.dim == 1 {
                writeln!(w, "{t},{},{u}", p[0])?;
            } else {
                writeln!(w, "{t},{},{},{u}", p[0], p[1])?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_roundtrip_preserves_bits() {
        let g = GridSpec::new(2, vec![[0.0, 1.0], [0.0, 1.0]], 4, [0.0, 1.0], 3).unwrap();
        let f = SpaceTimeField::from_fn(g, "u", |x, t| (x[0] * 3.1).sin() + x[1] / 7.0 + t.exp())
            .unwrap()
            .with_metadata("provenance", "test");
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_binary(&b"nope nope nope"[..]).is_err());
    }

    #[test]
    fn csv_rows() {
        let g = GridSpec::one_d([0.0, 1.0], 3, [0.0, 1.0], 2).unwrap();
        let f = SpaceTimeField::from_fn(g, "u", |x, t| x[0] + t).unwrap();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "t,x,u");
        assert_eq!(lines[6], "1,1,2");
    }
}
