//! Binary field files: `"SP7L"`, version byte, `n`, group tag, then
//! little-endian `f64` entries in (site, direction, component) order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{GaugeField, Group, LatticeSpec};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SP7L";
const VERSION: u8 = 1;

pub fn write_field_to(w: &mut impl Write, a: &GaugeField) -> Result<()> {
    let io = |e: std::io::Error| Error::FieldFormat(e.to_string());
    let spec = a.spec();
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&[VERSION, spec.n as u8, spec.group.tag()]).map_err(io)?;
    for x in a.data() {
        w.write_all(&x.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a field; the lattice spacing is not stored and is supplied by the caller.
pub fn read_field_from(r: &mut impl Read, spacing: f64) -> Result<GaugeField> {
    let mut header = [0u8; 7];
    r.read_exact(&mut header)
        .map_err(|_| Error::FieldFormat("truncated header".into()))?;
    if &header[..4] != MAGIC {
        return Err(Error::FieldFormat("bad magic".into()));
    }
    if header[4] != VERSION {
        return Err(Error::FieldFormat(format!("unsupported version {}", header[4])));
    }
    let spec = LatticeSpec::new(header[5] as usize, spacing, Group::from_tag(header[6])?)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::FieldFormat(e.to_string()))?;
    if bytes.len() != spec.field_len() * 8 {
        return Err(Error::FieldFormat(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            spec.field_len() * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    GaugeField::from_vec(spec, data)
}

pub fn write_field(path: &Path, a: &GaugeField) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::FieldFormat(format!("{}: {e}", path.display())))?;
    write_field_to(&mut BufWriter::new(f), a)
}

pub fn read_field(path: &Path, spacing: f64) -> Result<GaugeField> {
    let f = File::open(path).map_err(|e| Error::FieldFormat(format!("{}: {e}", path.display())))?;
    read_field_from(&mut BufReader::new(f), spacing)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let spec = LatticeSpec::new(2, 1.0, Group::SU2).unwrap();
        let a = GaugeField::random(spec, 11, 0.2);
        let mut buf = Vec::new();
        write_field_to(&mut buf, &a).unwrap();
        assert_eq!(&buf[..7], &[b'S', b'P', b'7', b'L', 1, 2, 1]);
        assert_eq!(buf.len(), 7 + spec.field_len() * 8);
        assert_eq!(read_field_from(&mut buf.as_slice(), 1.0).unwrap(), a);
    }

    #[test]
    fn rejects_corruption() {
        let spec = LatticeSpec::new(2, 1.0, Group::U1).unwrap();
        let mut buf = Vec::new();
        write_field_to(&mut buf, &GaugeField::zeros(spec)).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_field_from(&mut bad.as_slice(), 1.0).is_err());
        let mut bad = buf.clone();
        bad[6] = 9;
        assert!(read_field_from(&mut bad.as_slice(), 1.0).is_err());
        buf.pop();
        assert!(read_field_from(&mut buf.as_slice(), 1.0).is_err());
    }
}
