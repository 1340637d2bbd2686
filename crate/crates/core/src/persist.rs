//! Little-endian binary reader/writer helpers shared by the model and
//! embedding-store file formats.

use std::io::{self, Read, Write};

pub fn write_u8(w: &mut impl Write, v: u8) -> io::Result<()> {
    w.write_all(&[v])
}

pub fn write_u32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn write_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn write_f64(w: &mut impl Write, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

pub fn write_f64_slice(w: &mut impl Write, vs: &[f64]) -> io::Result<()> {
    for &v in vs {
        write_f64(w, v)?;
    }
    Ok(())
}

/// Length-prefixed UTF-8 string.
pub fn write_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    write_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

pub fn read_u8(r: &mut impl Read) -> io::Result<u8> {
    let mut buf = [0u8; 1];
    r.read_exact(&mut buf)?;
    Ok(buf[0])
}

pub fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_f64(r: &mut impl Read) -> io::Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_f64_vec(r: &mut impl Read, len: usize) -> io::Result<Vec<f64>> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(read_f64(r)?);
    }
    Ok(out)
}

/// Counterpart of [`write_str`]; `max_len` guards against nonsense length
/// prefixes in corrupt files.
pub fn read_str(r: &mut impl Read, max_len: usize) -> io::Result<String> {
    let len = read_u32(r)? as usize;
    if len > max_len {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("string length {len} exceeds limit {max_len}"),
        ));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
}

pub fn read_array<const N: usize>(r: &mut impl Read) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn expect_magic(r: &mut impl Read, magic: &[u8]) -> io::Result<bool> {
    let mut buf = vec![0u8; magic.len()];
    r.read_exact(&mut buf)?;
    Ok(buf == magic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn scalar_roundtrips() {
        let mut buf = Vec::new();
        write_u8(&mut buf, 7).unwrap();
        write_u32(&mut buf, 0xDEAD_BEEF).unwrap();
        write_u64(&mut buf, u64::MAX - 1).unwrap();
        write_f64(&mut buf, -0.125).unwrap();
        write_str(&mut buf, "héllo").unwrap();
        let mut r = Cursor::new(buf);
        assert_eq!(read_u8(&mut r).unwrap(), 7);
        assert_eq!(read_u32(&mut r).unwrap(), 0xDEAD_BEEF);
        assert_eq!(read_u64(&mut r).unwrap(), u64::MAX - 1);
        assert_eq!(read_f64(&mut r).unwrap(), -0.125);
        assert_eq!(read_str(&mut r, 1024).unwrap(), "héllo");
    }

    #[test]
    fn f64_bits_survive_exactly() {
        let values = [0.0, -0.0, f64::MIN_POSITIVE, 1.0 / 3.0, f64::MAX];
        let mut buf = Vec::new();
        write_f64_slice(&mut buf, &values).unwrap();
        let got = read_f64_vec(&mut Cursor::new(buf), values.len()).unwrap();
        for (a, b) in values.iter().zip(&got) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_input_errors() {
        let mut buf = Vec::new();
        write_u64(&mut buf, 1).unwrap();
        buf.truncate(3);
        assert!(read_u64(&mut Cursor::new(buf)).is_err());
    }

    #[test]
    fn oversized_string_length_is_rejected() {
        let mut buf = Vec::new();
        write_u32(&mut buf, 1_000_000).unwrap();
        assert!(read_str(&mut Cursor::new(buf), 1024).is_err());
    }
}
