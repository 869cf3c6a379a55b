use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::params::{Params, Tensor};
use super::ModelSpec;
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"CSCM";
pub const MODEL_VERSION: u32 = 1;

/// Serializes `magic | version | spec JSON (length-prefixed) | tensors`,
/// each tensor as `rank | dims | f32 values`, all little-endian.
pub fn write_model<W: Write>(params: &Params<f32>, mut w: W) -> std::io::Result<()> {
    w.write_all(MODEL_MAGIC)?;
    w.write_all(&MODEL_VERSION.to_le_bytes())?;
    let spec = serde_json::to_vec(&params.spec)?;
    w.write_all(&(spec.len() as u32).to_le_bytes())?;
    w.write_all(&spec)?;
    for t in &params.tensors {
        w.write_all(&(t.shape.len() as u32).to_le_bytes())?;
        for &d in &t.shape {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(t.len() * 4);
        for &v in &t.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()
}

pub fn save_model(params: &Params<f32>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(params, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Truncated,
        _ => Error::io("<model>", e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Parses a model. The spec stored in the stream determines the shapes.
pub fn read_model<R: Read>(mut r: R) -> Result<Params<f32>> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic).map_err(|_| Error::UnrecognizedFormat)?;
    if &magic != MODEL_MAGIC {
        return Err(Error::UnrecognizedFormat);
    }
    let version = read_u32(&mut r)?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let spec_len = read_u32(&mut r)? as usize;
    let mut spec_bytes = vec![0u8; spec_len];
    read_exact(&mut r, &mut spec_bytes)?;
    let spec: ModelSpec = serde_json::from_slice(&spec_bytes)?;
    spec.validate()?;

    let mut tensors = Vec::new();
    for shape in spec.tensor_shapes() {
        let rank = read_u32(&mut r)? as usize;
        let dims = (0..rank).map(|_| read_u32(&mut r).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        if dims != shape {
            return Err(Error::ShapeMismatch(format!("stored tensor {dims:?}, spec implies {shape:?}")));
        }
        let n: usize = dims.iter().product();
        let mut bytes = vec![0u8; n * 4];
        read_exact(&mut r, &mut bytes)?;
        let data = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        tensors.push(Tensor { shape: dims, data });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io("<model>", e))? != 0 {
        return Err(Error::ShapeMismatch("trailing bytes after the last tensor".into()));
    }
    Ok(Params { spec, tensors })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Params<f32>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Pooling;

    fn spec() -> ModelSpec {
        ModelSpec { input_size: 8, conv_channels: vec![3, 2], pooling: Pooling::Flatten, hidden: 6, dropout: 0.5 }
    }

    fn encode(p: &Params<f32>) -> Vec<u8> {
        let mut buf = Vec::new();
        write_model(p, &mut buf).unwrap();
        buf
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = Params::<f32>::init(&spec(), 11).unwrap();
        let back = read_model(encode(&p).as_slice()).unwrap();
        assert_eq!(back.spec, p.spec);
        for (a, b) in back.tensors.iter().zip(&p.tensors) {
            assert_eq!(a.shape, b.shape);
            assert!(a.data.iter().zip(&b.data).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn header_layout() {
        let p = Params::<f32>::zeros(&spec()).unwrap();
        let buf = encode(&p);
        assert_eq!(&buf[..4], b"CSCM");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        let len = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
        let spec: ModelSpec = serde_json::from_slice(&buf[12..12 + len]).unwrap();
        assert_eq!(spec, p.spec);
        // first tensor header: rank 4, dims 3x3x3x3
        let dims: Vec<u32> = buf[12 + len..12 + len + 20]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(dims, vec![4, 3, 3, 3, 3]);
    }

    #[test]
    fn corrupted_magic() {
        let mut buf = encode(&Params::<f32>::zeros(&spec()).unwrap());
        buf[0] = b'X';
        assert!(matches!(read_model(buf.as_slice()), Err(Error::UnrecognizedFormat)));
        assert!(matches!(read_model(&b"CS"[..]), Err(Error::UnrecognizedFormat)));
    }

    #[test]
    fn truncated_and_wrong_version() {
        let buf = encode(&Params::<f32>::init(&spec(), 1).unwrap());
        assert!(matches!(read_model(&buf[..buf.len() - 3]), Err(Error::Truncated)));
        let mut v2 = buf.clone();
        v2[4] = 2;
        assert!(matches!(read_model(v2.as_slice()), Err(Error::UnsupportedVersion(2))));
        let mut extra = buf;
        extra.push(0);
        assert!(read_model(extra.as_slice()).is_err());
    }

    #[test]
    fn file_carries_its_own_spec() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.cscm");
        let other = ModelSpec { input_size: 16, conv_channels: vec![4], pooling: Pooling::Flatten, hidden: 3, dropout: 0.25 };
        save_model(&Params::<f32>::init(&other, 2).unwrap(), &path).unwrap();
        assert_eq!(load_model(&path).unwrap().spec, other);
    }
}
