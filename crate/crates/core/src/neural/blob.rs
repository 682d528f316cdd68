//! Flat binary encoding of a trained network.
//!
//! ```text
//! magic      4 bytes  "MFNN"
//! version    u8       1
//! kind       u8       0 = ANN, 1 = LSTM, 2 = GRU
//! pinned     u8       GRU gate biases pinned (0 or 1)
//! features   u32
//! lookback   u32
//! horizon    u32
//! widths     u32 count, then count x u32
//! params     u64 count, then count x f64
//! ```
//!
//! Integers and floats are little-endian; parameters follow the flat view order.

use alloc::vec::Vec;

use super::network::Network;
use super::params::Parameters;
use super::{NetworkKind, NetworkSpec, NeuralError};

pub const BLOB_MAGIC: [u8; 4] = *b"MFNN";
const VERSION: u8 = 1;

pub fn to_bytes(network: &Network) -> Vec<u8> {
    let spec = network.spec();
    let flat = network.parameters().as_flat();
    let mut out = Vec::with_capacity(32 + 4 * spec.widths.len() + 8 * flat.len());
    out.extend_from_slice(&BLOB_MAGIC);
    out.push(VERSION);
    out.push(match spec.kind {
        NetworkKind::Ann => 0,
        NetworkKind::Lstm => 1,
        NetworkKind::Gru => 2,
    });
    out.push(spec.pin_gru_gate_biases as u8);
    for v in [spec.features, spec.lookback, spec.horizon, spec.widths.len()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for &w in &spec.widths {
        out.extend_from_slice(&(w as u32).to_le_bytes());
    }
    out.extend_from_slice(&(flat.len() as u64).to_le_bytes());
    for v in flat {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NeuralError> {
        if self.0.len() < n {
            return Err(NeuralError::Blob("truncated"));
        }
        let (head, rest) = self.0.split_at(n);
        self.0 = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, NeuralError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize, NeuralError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn u64(&mut self) -> Result<u64, NeuralError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Network, NeuralError> {
    let mut r = Reader(bytes);
    if r.take(4)? != BLOB_MAGIC {
        return Err(NeuralError::Blob("bad magic"));
    }
    if r.u8()? != VERSION {
        return Err(NeuralError::Blob("unsupported version"));
    }
    let kind = match r.u8()? {
        0 => NetworkKind::Ann,
        1 => NetworkKind::Lstm,
        2 => NetworkKind::Gru,
        _ => return Err(NeuralError::Blob("unknown network kind")),
    };
    let pinned = match r.u8()? {
        0 => false,
        1 => true,
        _ => return Err(NeuralError::Blob("bad pin flag")),
    };
    let (features, lookback, horizon) = (r.u32()?, r.u32()?, r.u32()?);
    let count = r.u32()?;
    if count > r.0.len() / 4 {
        return Err(NeuralError::Blob("truncated"));
    }
    let widths = (0..count).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
    let mut spec = NetworkSpec::with_widths(kind, features, lookback, horizon, widths);
    spec.pin_gru_gate_biases = pinned;
    let n = r.u64()?;
    if n > (r.0.len() / 8) as u64 {
        return Err(NeuralError::Blob("truncated"));
    }
    let values = r.take(n as usize * 8)?.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if !r.0.is_empty() {
        return Err(NeuralError::Blob("trailing bytes"));
    }
    Ok(Network::new(Parameters::from_flat(&spec, values)?))
}
