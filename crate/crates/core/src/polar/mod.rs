//! Polar transform, successive-cancellation posteriors, entropy estimation
//! and the index partition used by the coordination code.

mod sc;
mod transform;

pub use sc::ScDecoder;
pub use transform::{polar_encode, polar_transform};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{chunks, Execution};
use crate::rng::{Purpose, Stream};
use crate::target::{CoordinationTarget, Letter, U, V, W, X, Y};

/// Largest per-index contribution in bits when a posterior is numerically zero.
pub const SURPRISE_CLAMP: f64 = 40.0;
const SAMPLE_CHUNK: usize = 16;

/// Observation available to the SC decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    None,
    U,
    Y,
    UXYV,
}

/// `P(W = w, side = s)` for every side value `s`.
#[derive(Debug, Clone)]
pub struct LeafTable {
    side: Side,
    sizes: [usize; 5],
    table: Vec<[f64; 2]>,
}

impl LeafTable {
    pub fn new(target: &CoordinationTarget, side: Side) -> Result<Self> {
        if target.w_size() != 2 {
            return Err(Error::Unsupported(format!(
                "polar construction needs a binary auxiliary, got |W| = {}",
                target.w_size()
            )));
        }
        let axes: &[&str] = match side {
            Side::None => &[],
            Side::U => &[U],
            Side::Y => &[Y],
            Side::UXYV => &[U, X, Y, V],
        };
        let mut names = axes.to_vec();
        names.push(W);
        let m = target.joint().marginal(&names)?;
        let table = m.pmf().chunks(2).map(|c| [c[0], c[1]]).collect();
        Ok(LeafTable {
            side,
            sizes: target.sizes(),
            table,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    fn index(&self, l: &Letter) -> usize {
        let [_, _, nx, ny, nv] = self.sizes;
        match self.side {
            Side::None => 0,
            Side::U => l.u,
            Side::Y => l.y,
            Side::UXYV => ((l.u * nx + l.x) * ny + l.y) * nv + l.v,
        }
    }

    pub fn leaf(&self, l: &Letter) -> [f64; 2] {
        self.table[self.index(l)]
    }

    pub fn leaf_u(&self, u: usize) -> [f64; 2] {
        debug_assert_eq!(self.side, Side::U);
        self.table[u]
    }

    pub fn leaf_y(&self, y: usize) -> [f64; 2] {
        debug_assert_eq!(self.side, Side::Y);
        self.table[y]
    }
}

/// Monte Carlo estimates of `H(R_j | R^{j-1}, side^n)` for `R = W^n G_n`.
pub fn estimate_entropies(
    target: &CoordinationTarget,
    side: Side,
    n: usize,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<f64>> {
    if samples == 0 {
        return Err(Error::domain("entropy estimation needs at least one sample"));
    }
    ScDecoder::new(n)?;
    let table = LeafTable::new(target, side)?;
    let ranges = chunks(samples, SAMPLE_CHUNK);
    let partial = crate::par::map_indexed(exec, ranges.len(), |c| {
        let mut dec = ScDecoder::new(n).expect("checked above");
        let mut acc = vec![0.0; n];
        let mut leaves = vec![[0.0; 2]; n];
        let mut w = vec![0u8; n];
        for s in ranges[c].clone() {
            let mut stream = Stream::new(seed, Purpose::Construction, s as u64);
            for t in 0..n {
                let l = target.sample_letter(stream.at(t as u64));
                leaves[t] = table.leaf(&l);
                w[t] = l.w as u8;
            }
            polar_transform(&mut w).expect("power of two");
            dec.run(&leaves, |j, p0| {
                let bit = w[j];
                let p = if bit == 0 { p0 } else { 1.0 - p0 };
                acc[j] += if p > 0.0 { (-p.log2()).min(SURPRISE_CLAMP) } else { SURPRISE_CLAMP };
                bit
            });
        }
        acc
    });
    let mut total = vec![0.0; n];
    for p in partial {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total.iter_mut().for_each(|t| *t /= samples as f64);
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule")]
pub enum Threshold {
    /// Fixed `delta`.
    Constant { delta: f64 },
    /// `delta_n = 2^{-n^beta}`.
    Schedule { beta: f64 },
}

impl Threshold {
    pub fn delta(self, n: usize) -> Result<f64> {
        let d = match self {
            Threshold::Constant { delta } => delta,
            Threshold::Schedule { beta } => {
                if !(0.0..0.5).contains(&beta) {
                    return Err(Error::domain(format!("schedule exponent {beta} outside [0, 1/2)")));
                }
                (-(n as f64).powf(beta)).exp2()
            }
        };
        if !(d > 0.0 && d < 0.5) {
            return Err(Error::domain(format!("threshold {d} outside (0, 1/2)")));
        }
        Ok(d)
    }
}

/// Thresholds for the almost-uniform sets `V` and the high-entropy sets `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub v_set: Threshold,
    pub h_set: Threshold,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            v_set: Threshold::Constant { delta: 0.05 },
            h_set: Threshold::Constant { delta: 0.05 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionConfig {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
}

impl ConstructionConfig {
    pub fn new(n: usize) -> Self {
        ConstructionConfig {
            n,
            samples: 2000,
            seed: 0,
            thresholds: Thresholds::default(),
        }
    }
}

/// Index partition of `[n]` and the entropy estimates it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarSpec {
    pub config: ConstructionConfig,
    pub delta_v: f64,
    pub delta_h: f64,
    /// `V_{W|U}`.
    pub v_u: Vec<usize>,
    /// `H_{W|Y}`.
    pub h_set_y: Vec<usize>,
    pub a1: Vec<usize>,
    pub a2: Vec<usize>,
    pub a3: Vec<usize>,
    pub a4: Vec<usize>,
    /// Part of `A1` that is almost uniform given `(U, X, Y, V)`; reused across blocks.
    pub a1_prime: Vec<usize>,
    /// `|A3|` indices of `A2` that carry the chained bits.
    pub a3_prime: Vec<usize>,
    /// Entropy estimates with side `None`, `U`, `Y` and `UXYV`.
    pub h_none: Vec<f64>,
    pub h_u: Vec<f64>,
    pub h_y: Vec<f64>,
    pub h_full: Vec<f64>,
}

impl PolarSpec {
    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn to_text(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let spec: PolarSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the partition invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        ScDecoder::new(n)?;
        let mut owner = vec![0u8; n];
        for (k, set) in [&self.a1, &self.a2, &self.a3, &self.a4].into_iter().enumerate() {
            for &j in set {
                if j >= n || owner[j] != 0 {
                    return Err(Error::structural(format!("index {j} is out of range or in two sets")));
                }
                owner[j] = k as u8 + 1;
            }
        }
        if owner.contains(&0) {
            return Err(Error::structural("sets do not cover the block"));
        }
        if self.a1_prime.iter().any(|&j| owner.get(j) != Some(&1)) {
            return Err(Error::structural("A'1 must lie inside A1"));
        }
        if self.a3_prime.iter().any(|&j| owner.get(j) != Some(&2)) || self.a3_prime.len() != self.a3.len() {
            return Err(Error::structural("A'3 must be |A3| indices of A2"));
        }
        for v in [&self.h_none, &self.h_u, &self.h_y, &self.h_full] {
            if v.len() != n {
                return Err(Error::structural("entropy vectors must have length n"));
            }
        }
        Ok(())
    }

    pub fn membership(&self) -> Vec<u8> {
        let mut owner = vec![0u8; self.n()];
        for (k, set) in [&self.a1, &self.a2, &self.a3, &self.a4].into_iter().enumerate() {
            for &j in set {
                owner[j] = k as u8 + 1;
            }
        }
        owner
    }
}

pub fn build_sets(target: &CoordinationTarget, cfg: &ConstructionConfig, exec: Execution) -> Result<PolarSpec> {
    let n = cfg.n;
    let delta_v = cfg.thresholds.v_set.delta(n)?;
    let delta_h = cfg.thresholds.h_set.delta(n)?;
    let est = |side| estimate_entropies(target, side, n, cfg.samples, cfg.seed, exec);
    let entropies = [est(Side::None)?, est(Side::U)?, est(Side::Y)?, est(Side::UXYV)?];
    partition(cfg.clone(), delta_v, delta_h, entropies)
}

/// Builds the partition from given entropy estimates.
pub fn partition(
    config: ConstructionConfig,
    delta_v: f64,
    delta_h: f64,
    entropies: [Vec<f64>; 4],
) -> Result<PolarSpec> {
    let n = config.n;
    let [h_none, h_u, h_y, h_full] = entropies;
    if h_u.len() != n || h_y.len() != n || h_full.len() != n {
        return Err(Error::structural("entropy vectors must have length n"));
    }
    let in_v = |h: f64| h > 1.0 - delta_v;
    let in_h = |h: f64| h > delta_h;
    let v_u: Vec<usize> = (0..n).filter(|&j| in_v(h_u[j])).collect();
    let h_set_y: Vec<usize> = (0..n).filter(|&j| in_h(h_y[j])).collect();
    let (mut a1, mut a2, mut a3, mut a4) = (vec![], vec![], vec![], vec![]);
    for j in 0..n {
        match (in_v(h_u[j]), in_h(h_y[j])) {
            (true, true) => a1.push(j),
            (true, false) => a2.push(j),
            (false, true) => a3.push(j),
            (false, false) => a4.push(j),
        }
    }
    if a3.len() > a2.len() {
        return Err(Error::ChainingInfeasible {
            a2: a2.len(),
            a3: a3.len(),
        });
    }
    let a1_prime: Vec<usize> = a1.iter().copied().filter(|&j| in_v(h_full[j])).collect();
    let mut ranked = a2.clone();
    ranked.sort_by(|&a, &b| h_u[b].total_cmp(&h_u[a]).then(a.cmp(&b)));
    let mut a3_prime: Vec<usize> = ranked[..a3.len()].to_vec();
    a3_prime.sort_unstable();
    let spec = PolarSpec {
        config,
        delta_v,
        delta_h,
        v_u,
        h_set_y,
        a1,
        a2,
        a3,
        a4,
        a1_prime,
        a3_prime,
        h_none,
        h_u,
        h_y,
        h_full,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_binary_auxiliary() {
        let base = CoordinationTarget::bsc_cascade(0.3, 0.1).unwrap();
        let t = CoordinationTarget::constant_auxiliary(
            crate::prob::FiniteDist::bernoulli(U, 0.5).unwrap(),
            &crate::prob::Kernel::bsc(U, X, 0.0).unwrap(),
            base.channel().clone(),
            &crate::prob::Kernel::bsc(Y, V, 0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(LeafTable::new(&t, Side::U).unwrap_err().kind(), "unsupported");
    }

    #[test]
    fn schedule_threshold() {
        let d = Threshold::Schedule { beta: 0.25 }.delta(4096).unwrap();
        assert!((d - 2f64.powf(-8.0)).abs() < 1e-15);
        assert!(Threshold::Constant { delta: 0.7 }.delta(8).is_err());
    }

    #[test]
    fn infeasible_chaining_is_reported() {
        let cfg = ConstructionConfig::new(4);
        let err = partition(cfg, 0.05, 0.05, [vec![0.5; 4], vec![0.0; 4], vec![0.5; 4], vec![0.0; 4]]).unwrap_err();
        assert!(matches!(err, Error::ChainingInfeasible { a2: 0, a3: 4 }));
    }

    #[test]
    fn total_entropy_is_preserved() {
        // Chain rule: the sum over j equals n H(W | side).
        let t = CoordinationTarget::bsc_cascade(0.3, 0.1).unwrap();
        let h = estimate_entropies(&t, Side::U, 64, 400, 1, Execution::Sequential).unwrap();
        let total: f64 = h.iter().sum::<f64>() / 64.0;
        assert!((total - crate::prob::binary_entropy(0.3).unwrap()).abs() < 0.02, "{total}");
    }
}
