//! Successive-cancellation posteriors in the probability domain.

use super::transform::log2_exact;
use crate::error::Result;

/// Reusable buffers for one block length.
pub struct ScDecoder {
    m: usize,
    probs: Vec<Vec<[f64; 2]>>,
    bits: Vec<Vec<u8>>,
}

fn normalize(p: [f64; 2]) -> [f64; 2] {
    let s = p[0] + p[1];
    if s > 0.0 && s.is_finite() {
        [p[0] / s, p[1] / s]
    } else {
        [0.5, 0.5]
    }
}

impl ScDecoder {
    pub fn new(n: usize) -> Result<Self> {
        let m = log2_exact(n)? as usize;
        Ok(ScDecoder {
            m,
            probs: (0..=m).map(|l| vec![[0.0; 2]; n >> l]).collect(),
            bits: (0..=m).map(|l| vec![0; n >> l]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        1 << self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Runs SC over `leaves[t] = P(W_t = w, side_t)`. `decide(j, p0)` receives
    /// `P(R_j = 0 | R^{j-1}, side)` and returns the bit fixed for `R_j`.
    /// Returns the codeword `R G_n`.
    pub fn run(&mut self, leaves: &[[f64; 2]], mut decide: impl FnMut(usize, f64) -> u8) -> &[u8] {
        assert_eq!(leaves.len(), self.len(), "leaf count must equal block length");
        for (d, s) in self.probs[0].iter_mut().zip(leaves) {
            *d = normalize(*s);
        }
        self.node(0, 0, &mut decide);
        &self.bits[0]
    }

    fn node(&mut self, level: usize, offset: usize, decide: &mut impl FnMut(usize, f64) -> u8) {
        let size = 1usize << (self.m - level);
        if size == 1 {
            let p = self.probs[level][0];
            self.bits[level][0] = decide(offset, p[0]) & 1;
            return;
        }
        let h = size / 2;
        {
            let (upper, lower) = self.probs.split_at_mut(level + 1);
            let l = &upper[level];
            for t in 0..h {
                let (a, b) = (l[t], l[t + h]);
                lower[0][t] = normalize([a[0] * b[0] + a[1] * b[1], a[1] * b[0] + a[0] * b[1]]);
            }
        }
        self.node(level + 1, offset, decide);
        {
            let (upper, lower) = self.bits.split_at_mut(level + 1);
            upper[level][..h].copy_from_slice(&lower[0][..h]);
        }
        {
            let (upper, lower) = self.probs.split_at_mut(level + 1);
            let l = &upper[level];
            let c = &self.bits[level];
            for t in 0..h {
                let (a, b) = (l[t], l[t + h]);
                let ct = c[t] as usize;
                lower[0][t] = normalize([a[ct] * b[0], a[ct ^ 1] * b[1]]);
            }
        }
        self.node(level + 1, offset + h, decide);
        let (upper, lower) = self.bits.split_at_mut(level + 1);
        for t in 0..h {
            let d = lower[0][t];
            upper[level][t] ^= d;
            upper[level][t + h] = d;
        }
    }
}
