//! Block-chained polar coordination encoder and decoder.

mod transcript;

pub use transcript::{pack_hex, unpack_hex, Transcript};

use crate::error::{Error, Result};
use crate::polar::{LeafTable, PolarSpec, ScDecoder, Side};
use crate::rng::{Purpose, Stream};
use crate::target::CoordinationTarget;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    /// `A'1`: common randomness reused in every block.
    Reused(usize),
    /// `A1 \ A'1`: fresh common randomness per block.
    Fresh(usize),
    /// `A'3`: carries the padded `A3` bits of the previous block.
    Chained(usize),
    /// Remaining `A2`: local uniform bits.
    Local,
    /// `A3`, with its slot in the chained payload.
    Carried(usize),
    /// `A4`.
    Free,
}

#[derive(Debug, Clone)]
struct Layout {
    roles: Vec<Role>,
    reused: usize,
    fresh: usize,
    carried: usize,
}

impl Layout {
    fn new(spec: &PolarSpec) -> Self {
        let n = spec.n();
        let mut roles = vec![Role::Free; n];
        for &j in &spec.a2 {
            roles[j] = Role::Local;
        }
        let (mut reused, mut fresh) = (0, 0);
        for &j in &spec.a1 {
            if spec.a1_prime.binary_search(&j).is_ok() {
                roles[j] = Role::Reused(reused);
                reused += 1;
            } else {
                roles[j] = Role::Fresh(fresh);
                fresh += 1;
            }
        }
        for (p, &j) in spec.a3_prime.iter().enumerate() {
            roles[j] = Role::Chained(p);
        }
        for (p, &j) in spec.a3.iter().enumerate() {
            roles[j] = Role::Carried(p);
        }
        Layout {
            roles,
            reused,
            fresh,
            carried: spec.a3.len(),
        }
    }
}

/// Common randomness shared by encoder and decoder for a chain of `k` blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedRandomness {
    /// `C'`, filling `A'1` in every block.
    pub reused: Vec<u8>,
    /// `C_1..C_k` for `A1 \ A'1`.
    pub fresh: Vec<Vec<u8>>,
    /// One-time pads for the `k - 1` chained payloads.
    pub pads: Vec<Vec<u8>>,
}

impl SharedRandomness {
    pub fn generate(spec: &PolarSpec, k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("chain needs at least one block"));
        }
        let layout = Layout::new(spec);
        let draw = |block: u64, len: usize| {
            let mut s = Stream::new(seed, Purpose::CommonRandomness, block);
            (0..len).map(|p| s.at(p as u64).bit()).collect::<Vec<u8>>()
        };
        Ok(SharedRandomness {
            reused: draw(0, layout.reused),
            fresh: (0..k).map(|b| draw(1 + b as u64, layout.fresh)).collect(),
            pads: (0..k - 1).map(|b| draw(1 + (k + b) as u64, layout.carried)).collect(),
        })
    }

    pub fn blocks(&self) -> usize {
        self.fresh.len()
    }

    pub fn total_bits(&self) -> usize {
        self.reused.len() + self.fresh.iter().map(Vec::len).sum::<usize>() + self.pads.iter().map(Vec::len).sum::<usize>()
    }

    fn check(&self, layout: &Layout, k: usize) -> Result<()> {
        let ok = self.fresh.len() == k
            && self.pads.len() + 1 == k
            && self.reused.len() == layout.reused
            && self.fresh.iter().all(|c| c.len() == layout.fresh)
            && self.pads.iter().all(|c| c.len() == layout.carried);
        if ok {
            Ok(())
        } else {
            Err(Error::PoolMismatch(format!(
                "expected {k} blocks with |A'1|={}, |A1\\A'1|={}, |A3|={}",
                layout.reused, layout.fresh, layout.carried
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput {
    pub r_tilde: Vec<Vec<u8>>,
    pub w_tilde: Vec<Vec<u8>>,
    pub x: Vec<Vec<usize>>,
    /// `R_k[A3]`, sent over the error-free side link.
    pub side_message: Vec<u8>,
    /// Uniform bits spent on `A2 \ A'3`.
    pub local_bits: usize,
    /// Uniform variates spent on randomized rounding in `A3 u A4`.
    pub rounding_draws: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderOutput {
    pub r_hat: Vec<Vec<u8>>,
    pub w_hat: Vec<Vec<u8>>,
    pub v: Vec<Vec<usize>>,
}

fn check_blocks(what: &str, blocks: &[Vec<usize>], n: usize, k: usize, alphabet: usize) -> Result<()> {
    if blocks.len() != k {
        return Err(Error::structural(format!("expected {k} {what} blocks, got {}", blocks.len())));
    }
    for b in blocks {
        if b.len() != n {
            return Err(Error::structural(format!("{what} block has length {}, expected {n}", b.len())));
        }
        if b.iter().any(|&s| s >= alphabet) {
            return Err(Error::structural(format!("{what} symbol outside alphabet of size {alphabet}")));
        }
    }
    Ok(())
}

/// Runs the encoder over `u.len()` blocks.
pub fn encode_chain(
    target: &CoordinationTarget,
    spec: &PolarSpec,
    shared: &SharedRandomness,
    u: &[Vec<usize>],
    seed: u64,
) -> Result<EncoderOutput> {
    let n = spec.n();
    let k = u.len();
    let layout = Layout::new(spec);
    shared.check(&layout, k)?;
    check_blocks("source", u, n, k, target.u_size())?;
    let table = LeafTable::new(target, Side::U)?;
    let mut dec = ScDecoder::new(n)?;
    let mut out = EncoderOutput {
        r_tilde: Vec::with_capacity(k),
        w_tilde: Vec::with_capacity(k),
        x: Vec::with_capacity(k),
        side_message: Vec::new(),
        local_bits: 0,
        rounding_draws: 0,
    };
    let mut leaves = vec![[0.0; 2]; n];
    let mut prev_carried = vec![0u8; layout.carried];
    for (b, ub) in u.iter().enumerate() {
        for (l, &s) in leaves.iter_mut().zip(ub) {
            *l = table.leaf_u(s);
        }
        let mut local = Stream::new(seed, Purpose::LocalFill, b as u64);
        let mut rounding = Stream::new(seed, Purpose::Rounding, b as u64);
        let mut r = vec![0u8; n];
        let mut carried = vec![0u8; layout.carried];
        let (mut local_bits, mut draws) = (0, 0);
        let w = dec
            .run(&leaves, |j, p0| {
                let bit = match layout.roles[j] {
                    Role::Reused(p) => shared.reused[p],
                    Role::Fresh(p) => shared.fresh[b][p],
                    Role::Chained(p) if b > 0 => prev_carried[p] ^ shared.pads[b - 1][p],
                    Role::Chained(_) | Role::Local => {
                        local_bits += 1;
                        local.at(j as u64).bit()
                    }
                    Role::Carried(_) | Role::Free => {
                        draws += 1;
                        (rounding.at(j as u64).uniform() >= p0) as u8
                    }
                };
                if let Role::Carried(p) = layout.roles[j] {
                    carried[p] = bit;
                }
                r[j] = bit;
                bit
            })
            .to_vec();
        let mut synth = Stream::new(seed, Purpose::SignalSynthesis, b as u64);
        let x: Vec<usize> = ub
            .iter()
            .zip(&w)
            .enumerate()
            .map(|(t, (&us, &ws))| synth.at(t as u64).categorical(target.p_x_given_uw(us, ws as usize)))
            .collect();
        out.local_bits += local_bits;
        out.rounding_draws += draws;
        out.r_tilde.push(r);
        out.w_tilde.push(w);
        out.x.push(x);
        prev_carried = carried;
    }
    out.side_message = prev_carried;
    Ok(out)
}

/// `V_t ~ P(V | w_t, y_t)` for one block.
pub fn synthesize_actions(target: &CoordinationTarget, w: &[u8], y: &[usize], seed: u64, block: u64) -> Vec<usize> {
    let mut s = Stream::new(seed, Purpose::ActionSynthesis, block);
    w.iter()
        .zip(y)
        .enumerate()
        .map(|(t, (&ws, &ys))| s.at(t as u64).categorical(target.p_v_given_wy(ws as usize, ys)))
        .collect()
}

/// Runs the decoder backwards over the `y.len()` blocks.
pub fn decode_chain(
    target: &CoordinationTarget,
    spec: &PolarSpec,
    shared: &SharedRandomness,
    y: &[Vec<usize>],
    side_message: &[u8],
    seed: u64,
) -> Result<DecoderOutput> {
    let n = spec.n();
    let k = y.len();
    let layout = Layout::new(spec);
    shared.check(&layout, k)?;
    check_blocks("channel output", y, n, k, target.sizes()[3])?;
    if side_message.len() != layout.carried {
        return Err(Error::MissingSideMessage);
    }
    let table = LeafTable::new(target, Side::Y)?;
    let mut dec = ScDecoder::new(n)?;
    let mut leaves = vec![[0.0; 2]; n];
    let mut r_hat = vec![Vec::new(); k];
    let mut w_hat = vec![Vec::new(); k];
    let mut v = vec![Vec::new(); k];
    for b in (0..k).rev() {
        for (l, &s) in leaves.iter_mut().zip(&y[b]) {
            *l = table.leaf_y(s);
        }
        let next: Option<&Vec<u8>> = (b + 1 < k).then(|| &r_hat[b + 1]);
        let mut r = vec![0u8; n];
        let w = dec
            .run(&leaves, |j, p0| {
                let bit = match layout.roles[j] {
                    Role::Reused(p) => shared.reused[p],
                    Role::Fresh(p) => shared.fresh[b][p],
                    Role::Carried(p) => match next {
                        None => side_message[p],
                        Some(rn) => rn[spec.a3_prime[p]] ^ shared.pads[b][p],
                    },
                    Role::Chained(_) | Role::Local | Role::Free => (p0 < 0.5) as u8,
                };
                r[j] = bit;
                bit
            })
            .to_vec();
        v[b] = synthesize_actions(target, &w, &y[b], seed, b as u64);
        r_hat[b] = r;
        w_hat[b] = w;
    }
    Ok(DecoderOutput { r_hat, w_hat, v })
}

/// Common-randomness bits per source symbol over a chain of `k` blocks.
pub fn common_randomness_rate(spec: &PolarSpec, k: usize) -> f64 {
    let (a1, a1p, a3) = (spec.a1.len() as f64, spec.a1_prime.len() as f64, spec.a3.len() as f64);
    let k = k as f64;
    (k * a1 - (k - 1.0) * a1p + (k - 1.0) * a3) / (k * spec.n() as f64)
}

/// Side-link bits per source symbol over a chain of `k` blocks.
pub fn side_channel_rate(spec: &PolarSpec, k: usize) -> f64 {
    spec.a3.len() as f64 / (k as f64 * spec.n() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::{partition, ConstructionConfig};

    fn toy_spec() -> PolarSpec {
        // Sets chosen by hand: A1={0,1}, A'1={1}, A2={2,3}, A3={4}, A4 rest.
        let n = 8;
        let h_u = vec![1.0, 1.0, 1.0, 0.99, 0.1, 0.0, 0.0, 0.0];
        let h_y = vec![0.9, 0.9, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0];
        let h_full = vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        partition(ConstructionConfig::new(n), 0.05, 0.05, [vec![0.5; n], h_u, h_y, h_full]).unwrap()
    }

    #[test]
    fn rate_formulas() {
        let s = toy_spec();
        assert_eq!((s.a1.len(), s.a1_prime.len(), s.a3.len()), (2, 1, 1));
        assert!((common_randomness_rate(&s, 1) - 2.0 / 8.0).abs() < 1e-15);
        assert!((common_randomness_rate(&s, 5) - (10.0 - 4.0 + 4.0) / 40.0).abs() < 1e-15);
        assert!((side_channel_rate(&s, 8) - 1.0 / 64.0).abs() < 1e-15);
        assert!((side_channel_rate(&s, 4) - 2.0 * side_channel_rate(&s, 8)).abs() < 1e-15);
    }

    #[test]
    fn pool_sizes_follow_layout() {
        let s = toy_spec();
        let shared = SharedRandomness::generate(&s, 3, 9).unwrap();
        assert_eq!(shared.reused.len(), 1);
        assert_eq!(shared.fresh.len(), 3);
        assert_eq!(shared.pads.len(), 2);
        assert_eq!(shared.total_bits() as f64, common_randomness_rate(&s, 3) * 3.0 * 8.0);
    }

    #[test]
    fn mismatched_pools_and_side_message() {
        let s = toy_spec();
        let t = CoordinationTarget::bsc_cascade(0.3, 0.1).unwrap();
        let shared = SharedRandomness::generate(&s, 2, 9).unwrap();
        let u = vec![vec![0; 8]; 3];
        assert_eq!(encode_chain(&t, &s, &shared, &u, 1).unwrap_err().kind(), "pool-mismatch");
        let y = vec![vec![0; 8]; 2];
        assert_eq!(decode_chain(&t, &s, &shared, &y, &[], 1).unwrap_err().kind(), "missing-side-message");
    }

    #[test]
    fn shared_bits_agree_and_pads_invert() {
        let s = toy_spec();
        let t = CoordinationTarget::bsc_cascade(0.3, 0.0).unwrap();
        let k = 4;
        let shared = SharedRandomness::generate(&s, k, 5).unwrap();
        let u: Vec<Vec<usize>> = (0..k).map(|b| (0..8).map(|t| (b + t) % 2).collect()).collect();
        let enc = encode_chain(&t, &s, &shared, &u, 11).unwrap();
        // Noiseless channel: Y = X = W.
        let dec = decode_chain(&t, &s, &shared, &enc.x, &enc.side_message, 12).unwrap();
        for b in 0..k {
            for &j in &s.a1 {
                assert_eq!(dec.r_hat[b][j], enc.r_tilde[b][j]);
            }
            if dec.w_hat[b] == enc.w_tilde[b] {
                for &j in &s.a3 {
                    assert_eq!(dec.r_hat[b][j], enc.r_tilde[b][j]);
                }
            }
        }
        assert_eq!(dec.w_hat, enc.w_tilde);
    }
}
