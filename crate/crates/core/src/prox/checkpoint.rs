//! `JEOW0001` weight file: magic, then for each array `u16` name length,
//! name bytes, `u8` rank, `u32` dims, and little-endian f64 data. The
//! array count is implied by the end of the stream.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const WEIGHTS_MAGIC: &[u8; 8] = b"JEOW0001";

#[derive(Clone, Debug, PartialEq)]
pub struct WeightArray {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

pub fn write_weights<W: Write>(out: &mut W, arrays: &[WeightArray]) -> Result<()> {
    out.write_all(WEIGHTS_MAGIC)?;
    for a in arrays {
        let expected: usize = a.dims.iter().product();
        if expected != a.data.len() {
            return Err(Error::Format(format!("array {} has inconsistent dims", a.name)));
        }
        let name = a.name.as_bytes();
        let len = u16::try_from(name.len()).map_err(|_| Error::Format("name too long".into()))?;
        out.write_all(&len.to_le_bytes())?;
        out.write_all(name)?;
        let rank = u8::try_from(a.dims.len()).map_err(|_| Error::Format("rank too large".into()))?;
        out.write_all(&[rank])?;
        for &d in &a.dims {
            let d = u32::try_from(d).map_err(|_| Error::Format("dimension exceeds u32".into()))?;
            out.write_all(&d.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(a.data.len() * 8);
        for v in &a.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

/// Reads arrays until end of stream.
pub fn read_weights<R: Read>(input: &mut R) -> Result<Vec<WeightArray>> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != WEIGHTS_MAGIC {
        return Err(Error::Format("bad weight-file magic".into()));
    }
    let mut arrays = Vec::new();
    loop {
        let mut len = [0u8; 2];
        match input.read(&mut len[..1])? {
            0 => break,
            _ => input.read_exact(&mut len[1..])?,
        }
        let mut name = vec![0u8; u16::from_le_bytes(len) as usize];
        input.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|_| Error::Format("array name is not UTF-8".into()))?;
        let mut rank = [0u8; 1];
        input.read_exact(&mut rank)?;
        let mut dims = Vec::with_capacity(rank[0] as usize);
        for _ in 0..rank[0] {
            let mut d = [0u8; 4];
            input.read_exact(&mut d)?;
            dims.push(u32::from_le_bytes(d) as usize);
        }
        let n: usize = dims.iter().product();
        let mut buf = vec![0u8; n * 8];
        input.read_exact(&mut buf)?;
        let data = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        arrays.push(WeightArray { name, dims, data });
    }
    Ok(arrays)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let arrays = vec![
            WeightArray {
                name: "a.w".into(),
                dims: vec![2, 1, 3, 3],
                data: (0..18).map(f64::from).collect(),
            },
            WeightArray {
                name: "b".into(),
                dims: vec![1],
                data: vec![-0.5],
            },
        ];
        let mut buf = Vec::new();
        write_weights(&mut buf, &arrays).unwrap();
        assert_eq!(&buf[..8], WEIGHTS_MAGIC);
        // first record: name length 3, name, rank 4, 4 dims, 18 f64
        assert_eq!(&buf[8..10], &3u16.to_le_bytes());
        assert_eq!(&buf[10..13], b"a.w");
        assert_eq!(buf[13], 4);
        assert_eq!(buf.len(), 8 + (2 + 3 + 1 + 16 + 144) + (2 + 1 + 1 + 4 + 8));
        assert_eq!(read_weights(&mut buf.as_slice()).unwrap(), arrays);
    }

    #[test]
    fn truncated_file_fails() {
        let arrays = vec![WeightArray {
            name: "x".into(),
            dims: vec![4],
            data: vec![1.0; 4],
        }];
        let mut buf = Vec::new();
        write_weights(&mut buf, &arrays).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_weights(&mut buf.as_slice()).is_err());
    }
}
