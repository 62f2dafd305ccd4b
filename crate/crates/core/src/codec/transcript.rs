use serde::{Deserialize, Serialize};

use super::{DecoderOutput, EncoderOutput};
use crate::error::{Error, Result};
use crate::polar::PolarSpec;

/// Bits packed MSB-first into hex; trailing pad bits are zero.
pub fn pack_hex(bits: &[u8]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (u32::from(b & 1) << (3 - i)));
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

pub fn unpack_hex(hex: &str, len: usize) -> Result<Vec<u8>> {
    if hex.len() != len.div_ceil(4) {
        return Err(Error::Parse(format!("hex string of {} digits cannot hold {len} bits", hex.len())));
    }
    let mut out = Vec::with_capacity(len);
    for ch in hex.chars() {
        let v = ch.to_digit(16).ok_or_else(|| Error::Parse(format!("bad hex digit {ch:?}")))?;
        for i in 0..4 {
            out.push(((v >> (3 - i)) & 1) as u8);
        }
    }
    out.truncate(len);
    Ok(out)
}

fn pack_symbols(s: &[usize]) -> Result<String> {
    s.iter()
        .map(|&v| char::from_digit(v as u32, 16).ok_or_else(|| Error::Unsupported("transcripts need alphabets of at most 16 symbols".into())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSizes {
    pub a1: usize,
    pub a1_prime: usize,
    pub a2: usize,
    pub a3: usize,
    pub a3_prime: usize,
    pub a4: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub r_tilde: String,
    pub r_hat: String,
    pub x: String,
    pub y: String,
    pub v: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub n: usize,
    pub k: usize,
    pub sets: SetSizes,
    pub side_message: String,
    pub blocks: Vec<BlockRecord>,
}

impl Transcript {
    pub fn new(spec: &PolarSpec, enc: &EncoderOutput, y: &[Vec<usize>], dec: &DecoderOutput) -> Result<Self> {
        let blocks = (0..enc.x.len())
            .map(|b| {
                Ok(BlockRecord {
                    r_tilde: pack_hex(&enc.r_tilde[b]),
                    r_hat: pack_hex(&dec.r_hat[b]),
                    x: pack_symbols(&enc.x[b])?,
                    y: pack_symbols(&y[b])?,
                    v: pack_symbols(&dec.v[b])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Transcript {
            n: spec.n(),
            k: blocks.len(),
            sets: SetSizes {
                a1: spec.a1.len(),
                a1_prime: spec.a1_prime.len(),
                a2: spec.a2.len(),
                a3: spec.a3.len(),
                a3_prime: spec.a3_prime.len(),
                a4: spec.a4.len(),
            },
            side_message: pack_hex(&enc.side_message),
            blocks,
        })
    }

    pub fn to_text(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let bits = [1, 0, 1, 1, 0, 0, 0, 1, 1];
        let h = pack_hex(&bits);
        assert_eq!(h, "b18");
        assert_eq!(unpack_hex(&h, bits.len()).unwrap(), bits);
        assert!(unpack_hex("b1", 9).is_err());
        assert_eq!(pack_hex(&[]), "");
    }
}
