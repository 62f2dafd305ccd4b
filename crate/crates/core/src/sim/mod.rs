//! End-to-end experiments: source, encoder, channel, decoder and the
//! statistics used as finite-length proxies for coordination quality.

use serde::{Deserialize, Serialize};

use crate::codec::{common_randomness_rate, decode_chain, encode_chain, side_channel_rate, synthesize_actions, SharedRandomness};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::polar::{build_sets, ConstructionConfig, PolarSpec, Thresholds};
use crate::prob::{tv_slices, Kernel};
use crate::regions::{check_membership, RegionKind, RegionPoint};
use crate::rng::{Purpose, Stream};
use crate::target::{CoordinationTarget, U, W};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n_list: Vec<usize>,
    pub k: usize,
    pub seeds: Vec<u64>,
    pub samples: usize,
    pub construction_seed: u64,
    pub thresholds: Thresholds,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.seeds.is_empty() {
            return Err(Error::domain("plan needs at least one block length and one seed"));
        }
        if let Some(n) = self.n_list.iter().find(|n| !n.is_power_of_two()) {
            return Err(Error::domain(format!("block length {n} is not a power of two")));
        }
        if self.k == 0 {
            return Err(Error::domain("chain needs at least one block"));
        }
        let mut s = self.seeds.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != self.seeds.len() {
            return Err(Error::domain("seeds must be distinct"));
        }
        Ok(())
    }

    pub fn to_text(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let plan: ExperimentPlan = toml::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn construction(&self, n: usize) -> ConstructionConfig {
        ConstructionConfig {
            n,
            samples: self.samples,
            seed: self.construction_seed,
            thresholds: self.thresholds,
        }
    }
}

/// Memoryless channel: `y_t ~ kernel(x_t)` from position-addressed draws.
pub fn sample_channel(kernel: &Kernel, x: &[usize], seed: u64, block: u64) -> Result<Vec<usize>> {
    if x.iter().any(|&s| s >= kernel.num_rows()) {
        return Err(Error::structural("channel input outside the kernel's alphabet"));
    }
    let mut s = Stream::new(seed, Purpose::Channel, block);
    Ok(x.iter().enumerate().map(|(t, &xs)| s.at(t as u64).categorical(kernel.row(xs))).collect())
}

pub fn sample_source(target: &CoordinationTarget, n: usize, seed: u64, block: u64) -> Vec<usize> {
    let mut s = Stream::new(seed, Purpose::Source, block);
    (0..n).map(|t| s.at(t as u64).categorical(target.p_u())).collect()
}

/// Statistics of one `(n, seed)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStats {
    pub n: usize,
    pub seed: u64,
    pub block_errors: Vec<bool>,
    pub block_error_rate: f64,
    /// Empirical `(U, X, Y, V)` histogram against the target.
    pub per_letter_tv: f64,
    /// Same statistic with `V` synthesized from the encoder's `W`.
    pub counterfactual_tv: f64,
    /// Empirical `(U, W)` histogram on the encoder side against the target.
    pub encoder_tv: f64,
    /// Two-letter dependence between positions `t` and `t + 1` of a block.
    pub adjacent_tv: f64,
    /// Two-letter dependence across consecutive blocks; `None` when `k = 1`.
    pub cross_block_tv: Option<f64>,
    pub cr_rate: f64,
    pub side_rate: f64,
    pub local_bits: usize,
    pub rounding_draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NSummary {
    pub n: usize,
    pub cr_rate_formula: f64,
    pub side_rate_formula: f64,
    pub median_block_error_rate: f64,
    pub median_per_letter_tv: f64,
    pub median_encoder_tv: f64,
    pub median_adjacent_tv: f64,
    pub median_cross_block_tv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub k: usize,
    pub cells: Vec<CellStats>,
    pub summaries: Vec<NSummary>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        f64::NAN
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    fn new(cells: usize) -> Self {
        Histogram {
            counts: vec![0; cells],
            total: 0,
        }
    }

    fn add(&mut self, i: usize) {
        self.counts[i] += 1;
        self.total += 1;
    }

    fn pmf(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    fn tv_to(&self, target: &[f64]) -> f64 {
        tv_slices(&self.pmf(), target)
    }

    /// TV between a pair histogram over `m x m` cells and the product of its marginals.
    fn dependence(&self, m: usize) -> f64 {
        let p = self.pmf();
        let mut a = vec![0.0; m];
        let mut b = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                a[i] += p[i * m + j];
                b[j] += p[i * m + j];
            }
        }
        let prod: Vec<f64> = (0..m * m).map(|c| a[c / m] * b[c % m]).collect();
        tv_slices(&p, &prod)
    }
}

/// Runs one chain of `k` blocks with all randomness derived from `seed`.
pub fn run_cell(target: &CoordinationTarget, spec: &PolarSpec, k: usize, seed: u64) -> Result<CellStats> {
    let n = spec.n();
    let [_, nw, nx, ny, nv] = target.sizes();
    let u: Vec<Vec<usize>> = (0..k).map(|b| sample_source(target, n, seed, b as u64)).collect();
    let shared = SharedRandomness::generate(spec, k, seed)?;
    let enc = encode_chain(target, spec, &shared, &u, seed)?;
    let y: Vec<Vec<usize>> = enc
        .x
        .iter()
        .enumerate()
        .map(|(b, xb)| sample_channel(target.channel(), xb, seed, b as u64))
        .collect::<Result<_>>()?;
    let dec = decode_chain(target, spec, &shared, &y, &enc.side_message, seed)?;

    let letter = |b: usize, t: usize, v: &[Vec<usize>]| ((u[b][t] * nx + enc.x[b][t]) * ny + y[b][t]) * nv + v[b][t];
    let cells = target.u_size() * nx * ny * nv;
    let observed = target.observables();
    let uw = target.joint().marginal(&[U, W])?;
    let counterfactual_v: Vec<Vec<usize>> =
        (0..k).map(|b| synthesize_actions(target, &enc.w_tilde[b], &y[b], seed, b as u64)).collect();

    let mut per_letter = Histogram::new(cells);
    let mut counterfactual = Histogram::new(cells);
    let mut encoder = Histogram::new(target.u_size() * nw);
    let mut adjacent = Histogram::new(cells * cells);
    let mut cross = Histogram::new(cells * cells);
    for b in 0..k {
        let mut pairs = Stream::new(seed, Purpose::PositionPairs, b as u64);
        for t in 0..n {
            let l = letter(b, t, &dec.v);
            per_letter.add(l);
            counterfactual.add(letter(b, t, &counterfactual_v));
            encoder.add(u[b][t] * nw + enc.w_tilde[b][t] as usize);
            if t + 1 < n {
                adjacent.add(l * cells + letter(b, t + 1, &dec.v));
            }
            if b + 1 < k {
                let t2 = pairs.at(t as u64).below(n);
                cross.add(l * cells + letter(b + 1, t2, &dec.v));
            }
        }
    }
    let block_errors: Vec<bool> = (0..k).map(|b| dec.w_hat[b] != enc.w_tilde[b]).collect();
    Ok(CellStats {
        n,
        seed,
        block_error_rate: block_errors.iter().filter(|&&e| e).count() as f64 / k as f64,
        block_errors,
        per_letter_tv: per_letter.tv_to(observed.pmf()),
        counterfactual_tv: counterfactual.tv_to(observed.pmf()),
        encoder_tv: encoder.tv_to(uw.pmf()),
        adjacent_tv: adjacent.dependence(cells),
        cross_block_tv: (k > 1).then(|| cross.dependence(cells)),
        cr_rate: shared.total_bits() as f64 / (k * n) as f64,
        side_rate: enc.side_message.len() as f64 / (k * n) as f64,
        local_bits: enc.local_bits,
        rounding_draws: enc.rounding_draws,
    })
}

/// Rejects targets outside the polar scheme's region.
pub fn check_target(target: &CoordinationTarget) -> Result<()> {
    let v = check_membership(
        RegionKind::InnerNoState,
        &RegionPoint {
            joint: target.joint(),
            r: 0.0,
            r0: f64::MAX,
        },
    )?;
    if v.member {
        Ok(())
    } else {
        Err(Error::TargetRejected(format!("violates {}", v.violations.join(", "))))
    }
}

fn summarize(n: usize, spec: &PolarSpec, k: usize, cells: &[CellStats]) -> NSummary {
    let pick = |f: &dyn Fn(&CellStats) -> f64| median(&cells.iter().map(f).collect::<Vec<_>>());
    NSummary {
        n,
        cr_rate_formula: common_randomness_rate(spec, k),
        side_rate_formula: side_channel_rate(spec, k),
        median_block_error_rate: pick(&|c| c.block_error_rate),
        median_per_letter_tv: pick(&|c| c.per_letter_tv),
        median_encoder_tv: pick(&|c| c.encoder_tv),
        median_adjacent_tv: pick(&|c| c.adjacent_tv),
        median_cross_block_tv: (k > 1).then(|| pick(&|c| c.cross_block_tv.unwrap_or(f64::NAN))),
    }
}

/// Runs the plan with specs built from scratch.
pub fn run_experiment(target: &CoordinationTarget, plan: &ExperimentPlan, exec: Execution) -> Result<StatsReport> {
    plan.validate()?;
    let specs = plan
        .n_list
        .iter()
        .map(|&n| build_sets(target, &plan.construction(n), exec))
        .collect::<Result<Vec<_>>>()?;
    run_with_specs(target, plan, &specs, exec)
}

/// Runs the plan with pre-built specs, one per entry of `plan.n_list`.
pub fn run_with_specs(target: &CoordinationTarget, plan: &ExperimentPlan, specs: &[PolarSpec], exec: Execution) -> Result<StatsReport> {
    plan.validate()?;
    check_target(target)?;
    if specs.len() != plan.n_list.len() || specs.iter().zip(&plan.n_list).any(|(s, &n)| s.n() != n) {
        return Err(Error::structural("one spec per block length is required"));
    }
    let grid: Vec<(usize, u64)> = (0..specs.len()).flat_map(|i| plan.seeds.iter().map(move |&s| (i, s))).collect();
    let cells = map_indexed(exec, grid.len(), |g| {
        let (i, seed) = grid[g];
        run_cell(target, &specs[i], plan.k, seed)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let summaries = specs
        .iter()
        .map(|s| {
            let mine: Vec<CellStats> = cells.iter().filter(|c| c.n == s.n()).cloned().collect();
            summarize(s.n(), s, plan.k, &mine)
        })
        .collect();
    Ok(StatsReport {
        k: plan.k,
        cells,
        summaries,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.15e}")).unwrap_or_default()
}

impl StatsReport {
    /// One row per `(n, seed)` cell.
    pub fn cells_csv(&self) -> String {
        let mut out = String::from(
            "n,seed,block_error_rate,per_letter_tv,counterfactual_tv,encoder_tv,adjacent_tv,cross_block_tv,cr_rate,side_rate,local_bits,rounding_draws\n",
        );
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{},{:.15e},{:.15e},{},{}\n",
                c.n,
                c.seed,
                c.block_error_rate,
                c.per_letter_tv,
                c.counterfactual_tv,
                c.encoder_tv,
                c.adjacent_tv,
                opt(c.cross_block_tv),
                c.cr_rate,
                c.side_rate,
                c.local_bits,
                c.rounding_draws
            ));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "n,k,cr_rate,side_rate,median_block_error_rate,median_per_letter_tv,median_encoder_tv,median_adjacent_tv,median_cross_block_tv\n",
        );
        for s in &self.summaries {
            out.push_str(&format!(
                "{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{}\n",
                s.n,
                self.k,
                s.cr_rate_formula,
                s.side_rate_formula,
                s.median_block_error_rate,
                s.median_per_letter_tv,
                s.median_encoder_tv,
                s.median_adjacent_tv,
                opt(s.median_cross_block_tv)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::{X, Y};

    #[test]
    fn identity_channel_copies_input() {
        let k = Kernel::bsc(X, Y, 0.0).unwrap();
        let x: Vec<usize> = (0..100).map(|i| i % 2).collect();
        assert_eq!(sample_channel(&k, &x, 3, 0).unwrap(), x);
    }

    #[test]
    fn plan_validation() {
        let mut plan = ExperimentPlan {
            n_list: vec![16, 32],
            k: 2,
            seeds: vec![1, 2],
            samples: 10,
            construction_seed: 0,
            thresholds: Thresholds::default(),
        };
        assert!(plan.validate().is_ok());
        let text = plan.to_text().unwrap();
        assert_eq!(ExperimentPlan::from_text(&text).unwrap(), plan);
        plan.seeds = vec![1, 1];
        assert!(plan.validate().is_err());
        plan.seeds = vec![1];
        plan.n_list = vec![12];
        assert!(plan.validate().is_err());
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
