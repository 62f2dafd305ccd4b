//! Exact evaluation of the random-binning coordination scheme at tiny block
//! lengths: every source, auxiliary, channel and action sequence is
//! enumerated, so the induced distribution is computed without sampling.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::prob::{csiszar_upper_bound, entropy_of_pmf, Alphabet, FiniteDist};
use crate::rng::{Purpose, Stream};
use crate::target::{CoordinationTarget, U, V, W, X, Y};

pub const MAX_BLOCK: usize = 10;
/// Default cap on `|U|^n |Y|^n |W|^n (|X||V|)^n`.
pub const DEFAULT_BUDGET: u128 = 1 << 32;
/// Induced distributions are kept in the result up to this many cells.
const KEEP_INDUCED_CELLS: usize = 1 << 16;

fn bins_for(n: usize, rate: f64) -> Result<usize> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!("rate {rate} must be finite and non-negative")));
    }
    let bits = (n as f64 * rate - 1e-12).ceil().max(0.0) as u32;
    if bits > 40 {
        return Err(Error::domain(format!("{bits} binning bits are too many to enumerate")));
    }
    Ok(1usize << bits)
}

/// Sequences of length `n` over `size` symbols, indexed with position 0 most
/// significant so that index order is lexicographic order.
fn digits(mut idx: usize, size: usize, n: usize, out: &mut [usize]) {
    for t in (0..n).rev() {
        out[t] = idx % size;
        idx /= size;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinningCode {
    pub n: usize,
    pub w_size: usize,
    pub bins_c: usize,
    pub bins_f: usize,
    pub phi1: Vec<u32>,
    pub phi2: Vec<u32>,
    pub seed: u64,
}

impl BinningCode {
    /// Independent uniform bin indices for every sequence in `W^n`.
    pub fn random(w_size: usize, n: usize, r0: f64, r_tilde: f64, seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_BLOCK {
            return Err(Error::domain(format!("block length {n} outside [1, {MAX_BLOCK}]")));
        }
        let bins_c = bins_for(n, r0)?;
        let bins_f = bins_for(n, r_tilde)?;
        let count = w_size.pow(n as u32);
        let draw = |block: u64, bins: usize| {
            let mut s = Stream::new(seed, Purpose::Binning, block);
            (0..count).map(|w| s.at(w as u64).below(bins) as u32).collect::<Vec<u32>>()
        };
        Ok(BinningCode {
            n,
            w_size,
            bins_c,
            bins_f,
            phi1: draw(0, bins_c),
            phi2: draw(1, bins_f),
            seed,
        })
    }

    pub fn num_bins(&self) -> usize {
        self.bins_c * self.bins_f
    }

    /// Joint bin index `c * |F| + f`.
    pub fn bin(&self, w: usize) -> usize {
        self.phi1[w] as usize * self.bins_f + self.phi2[w] as usize
    }
}

/// MAP Slepian-Wolf decoder tables for one code.
pub struct SwDecoder {
    /// Non-empty bins in increasing order.
    bins: Vec<usize>,
    /// `best[y * bins.len() + rank]`.
    best: Vec<u32>,
}

impl SwDecoder {
    /// `p_wy[w * |Y| + y]` is the single-letter joint of `(W, Y)`.
    pub fn new(code: &BinningCode, p_wy: &[f64], y_size: usize) -> Self {
        let n = code.n;
        let nw_seq = code.w_size.pow(n as u32);
        let ny_seq = y_size.pow(n as u32);
        let mut bins: Vec<usize> = (0..nw_seq).map(|w| code.bin(w)).collect();
        bins.sort_unstable();
        bins.dedup();
        let mut best = vec![u32::MAX; ny_seq * bins.len()];
        let mut score = vec![f64::NEG_INFINITY; ny_seq * bins.len()];
        let mut wd = vec![0; n];
        let mut yd = vec![0; n];
        for w in 0..nw_seq {
            digits(w, code.w_size, n, &mut wd);
            let rank = bins.binary_search(&code.bin(w)).expect("bin listed");
            for y in 0..ny_seq {
                digits(y, y_size, n, &mut yd);
                let p: f64 = (0..n).map(|t| p_wy[wd[t] * y_size + yd[t]]).product();
                let slot = y * bins.len() + rank;
                // Strict comparison keeps the lexicographically smallest maximiser.
                if best[slot] == u32::MAX || p > score[slot] {
                    best[slot] = w as u32;
                    score[slot] = p;
                }
            }
        }
        SwDecoder { bins, best }
    }

    /// Decoded sequence and whether the bin intersection was empty.
    pub fn decode(&self, bin: usize, y: usize) -> (usize, bool) {
        match self.bins.binary_search(&bin) {
            Ok(rank) => (self.best[y * self.bins.len() + rank] as usize, false),
            Err(_) => (0, true),
        }
    }
}

/// `argmax P(w^n | y^n)` over `w^n` with `phi(w^n) = bin`.
pub fn sw_decode(code: &BinningCode, target: &CoordinationTarget, bin: usize, y: &[usize]) -> Result<(Vec<usize>, bool)> {
    let ny = target.sizes()[3];
    if y.len() != code.n || y.iter().any(|&s| s >= ny) {
        return Err(Error::structural("observation does not match the code"));
    }
    let p_wy = target.joint().marginal(&[W, Y])?;
    let dec = SwDecoder::new(code, p_wy.pmf(), ny);
    let yi = y.iter().fold(0, |acc, &s| acc * ny + s);
    let (w, empty) = dec.decode(bin, yi);
    let mut out = vec![0; code.n];
    digits(w, code.w_size, code.n, &mut out);
    Ok((out, empty))
}

#[derive(Debug, Clone, Serialize)]
pub struct Secrecy {
    /// `I(U^n V^n ; Y^n)` in bits.
    pub mutual_information: f64,
    /// `TV(P_{U^n V^n Y^n}, P_{U^n V^n} P_{Y^n})`.
    pub tv_independence: f64,
    /// Csiszar bound at `tv_independence` with `|A| = |U V|^n`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactResult {
    pub seed: u64,
    pub n: usize,
    pub r0: f64,
    pub r_tilde: f64,
    /// TV between the induced law of `(U,X,Y,V)^n` and the i.i.d. target.
    pub tv: f64,
    /// Same with the decoder handed the true `W^n`.
    pub genie_tv: f64,
    /// Slepian-Wolf error under the ideal binning law: `W^n` drawn from
    /// the target given `U^n`, then binned and decoded from `Y^n`.
    pub sw_error_prob: f64,
    /// `P(Ŵ^n != W^n)` under the scheme itself, fallback included.
    pub mismatch_prob: f64,
    /// Probability that the decoder faced an empty bin.
    pub empty_bin_prob: f64,
    /// Probability that the encoder fell back to the unbinned law.
    pub fallback_prob: f64,
    pub total_mass: f64,
    pub secrecy: Option<Secrecy>,
    #[serde(skip)]
    pub induced: Option<FiniteDist>,
}

#[derive(Debug, Clone)]
pub struct ExactConfig {
    pub n: usize,
    pub r0: f64,
    pub r_tilde: f64,
    pub seeds: Vec<u64>,
    pub budget: u128,
    pub secrecy: bool,
    pub exec: Execution,
}

impl ExactConfig {
    pub fn new(n: usize, r0: f64, r_tilde: f64, seeds: Vec<u64>) -> Self {
        ExactConfig {
            n,
            r0,
            r_tilde,
            seeds,
            budget: DEFAULT_BUDGET,
            secrecy: false,
            exec: Execution::default(),
        }
    }
}

pub fn required_budget(target: &CoordinationTarget, n: usize) -> u128 {
    let [nu, nw, nx, ny, nv] = target.sizes();
    [nu, ny, nw, nx * nv].iter().map(|&s| (s as u128).saturating_pow(n as u32)).fold(1u128, |a, b| a.saturating_mul(b))
}

/// Sum over entries `(letters, coef)` of `coef * (M(l_0) (x) M(l_1) (x) ...)`,
/// sharing common prefixes. `entries` must be sorted by `letters`.
fn kron_sum<'a>(entries: &[(Vec<u16>, f64)], depth: usize, mats: &dyn Fn(usize, u16) -> &'a [f64], cell: usize, out: &mut [f64]) {
    let n = entries[0].0.len();
    if depth == n {
        out[0] += entries.iter().map(|e| e.1).sum::<f64>();
        return;
    }
    let sub_len = out.len() / cell;
    let mut sub = vec![0.0; sub_len];
    let mut start = 0;
    while start < entries.len() {
        let letter = entries[start].0[depth];
        let mut end = start;
        while end < entries.len() && entries[end].0[depth] == letter {
            end += 1;
        }
        sub.iter_mut().for_each(|s| *s = 0.0);
        kron_sum(&entries[start..end], depth + 1, mats, cell, &mut sub);
        let m = mats(depth, letter);
        for (i, &mv) in m.iter().enumerate() {
            if mv != 0.0 {
                for (o, &s) in out[i * sub_len..(i + 1) * sub_len].iter_mut().zip(&sub) {
                    *o += mv * s;
                }
            }
        }
        start = end;
    }
}

/// Compensated summation.
#[derive(Default, Clone, Copy)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(self) -> f64 {
        self.s + self.c
    }
}

fn kron_product(mats: &[&[f64]]) -> Vec<f64> {
    let mut out = vec![1.0];
    for m in mats {
        let mut next = Vec::with_capacity(out.len() * m.len());
        for &a in &out {
            next.extend(m.iter().map(|&b| a * b));
        }
        out = next;
    }
    out
}

/// Exact evaluation for one binning seed.
pub fn evaluate_seed(target: &CoordinationTarget, cfg: &ExactConfig, seed: u64) -> Result<ExactResult> {
    let n = cfg.n;
    let [nu, nw, nx, ny, nv] = target.sizes();
    let code = BinningCode::random(nw, n, cfg.r0, cfg.r_tilde, seed)?;
    let joint = target.joint();
    let p_wy = joint.marginal(&[W, Y])?;
    let p_uxyv = joint.marginal(&[U, X, Y, V])?;
    let sw = SwDecoder::new(&code, p_wy.pmf(), ny);
    let (nu_seq, nw_seq, ny_seq) = (nu.pow(n as u32), nw.pow(n as u32), ny.pow(n as u32));
    let cell = nx * nv;
    let inner = cell.pow(n as u32);
    let big_b = code.num_bins() as f64;

    // m_tab[(u, w, y, w_hat)][x |V| + v] = P(x|u,w) P(y|x) P(v|w_hat,y)
    let mut m_tab = vec![0.0; nu * nw * ny * nw * cell];
    for u in 0..nu {
        for w in 0..nw {
            for y in 0..ny {
                for wh in 0..nw {
                    let base = (((u * nw + w) * ny + y) * nw + wh) * cell;
                    for x in 0..nx {
                        for v in 0..nv {
                            m_tab[base + x * nv + v] =
                                target.p_x_given_uw(u, w)[x] * target.p_y_given_x(x)[y] * target.p_v_given_wy(wh, y)[v];
                        }
                    }
                }
            }
        }
    }
    let q_y = |u: usize, w: usize, y: usize| (0..nx).map(|x| target.p_x_given_uw(u, w)[x] * target.p_y_given_x(x)[y]).sum::<f64>();
    let letter = |w: usize, wh: usize| (w * nw + wh) as u16;

    let uv_seq = (nu * nv).pow(n as u32);
    let mut p_uvy = if cfg.secrecy { vec![0.0; uv_seq * ny_seq] } else { Vec::new() };
    let keep = nu_seq * ny_seq * inner <= KEEP_INDUCED_CELLS;
    let mut induced = if keep { vec![0.0; nu_seq * ny_seq * inner] } else { Vec::new() };

    let (mut tv2, mut genie2, mut total) = (Sum::default(), Sum::default(), Sum::default());
    let (mut sw_err, mut mismatch, mut empty_p, mut fallback_p) = (0.0, 0.0, 0.0, 0.0);
    let (mut ud, mut wd, mut yd, mut hd) = (vec![0; n], vec![0; n], vec![0; n], vec![0; n]);
    let mut xvd = vec![0; n];
    for u in 0..nu_seq {
        digits(u, nu, n, &mut ud);
        let pu: f64 = ud.iter().map(|&s| target.p_u()[s]).product();
        if pu == 0.0 {
            continue;
        }
        let pw: Vec<f64> = (0..nw_seq)
            .map(|w| {
                digits(w, nw, n, &mut wd);
                (0..n).map(|t| target.p_w_given_u(ud[t])[wd[t]]).product()
            })
            .collect();
        let mut bin_mass: BTreeMap<usize, f64> = BTreeMap::new();
        for (w, &p) in pw.iter().enumerate() {
            *bin_mass.entry(code.bin(w)).or_insert(0.0) += p;
        }
        // Bins with no mass given u send the encoder to the unbinned law.
        let dead_bins: Vec<usize> = bin_mass.iter().filter(|(_, &m)| m == 0.0).map(|(&b, _)| b).collect();
        let empty_bins = big_b - bin_mass.len() as f64;
        let fallback_weight = (dead_bins.len() as f64 + empty_bins) / big_b;
        fallback_p += pu * fallback_weight;

        for y in 0..ny_seq {
            digits(y, ny, n, &mut yd);
            let mut entries: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
            let mut genie: Vec<(Vec<u16>, f64)> = Vec::new();
            for w in 0..nw_seq {
                if pw[w] == 0.0 {
                    continue;
                }
                digits(w, nw, n, &mut wd);
                let pyw: f64 = (0..n).map(|t| q_y(ud[t], wd[t], yd[t])).product();
                let b = code.bin(w);
                let own = pw[w] / (big_b * bin_mass[&b]);
                let mut options: Vec<(usize, f64, bool)> = Vec::with_capacity(1 + dead_bins.len());
                let (wh, flagged) = sw.decode(b, y);
                if wh != w {
                    sw_err += pu * pw[w] * pyw;
                }
                options.push((wh, own, flagged));
                for &db in &dead_bins {
                    let (wh, flagged) = sw.decode(db, y);
                    options.push((wh, pw[w] / big_b, flagged));
                }
                if empty_bins > 0.0 {
                    options.push((0, pw[w] * empty_bins / big_b, true));
                }
                let mut enc_total = 0.0;
                for (wh, coef, flagged) in options {
                    let coef = pu * coef;
                    enc_total += coef;
                    digits(wh, nw, n, &mut hd);
                    let key: Vec<u16> = (0..n).map(|t| letter(wd[t], hd[t])).collect();
                    *entries.entry(key).or_insert(0.0) += coef;
                    if wh != w {
                        mismatch += coef * pyw;
                    }
                    if flagged {
                        empty_p += coef * pyw;
                    }
                }
                genie.push(((0..n).map(|t| letter(wd[t], wd[t])).collect(), enc_total));
            }
            let mats = |t: usize, l: u16| -> &[f64] {
                let (w, wh) = (l as usize / nw, l as usize % nw);
                let base = (((ud[t] * nw + w) * ny + yd[t]) * nw + wh) * cell;
                &m_tab[base..base + cell]
            };
            let mut t_ind = vec![0.0; inner];
            let mut t_gen = vec![0.0; inner];
            if !genie.is_empty() {
                let list: Vec<(Vec<u16>, f64)> = entries.into_iter().collect();
                kron_sum(&list, 0, &mats, cell, &mut t_ind);
                // Keys are generated in increasing w order and are distinct.
                kron_sum(&genie, 0, &mats, cell, &mut t_gen);
            }
            let letters: Vec<Vec<f64>> = (0..n)
                .map(|t| {
                    (0..cell)
                        .map(|xv| p_uxyv.pmf()[((ud[t] * nx + xv / nv) * ny + yd[t]) * nv + xv % nv])
                        .collect()
                })
                .collect();
            let refs: Vec<&[f64]> = letters.iter().map(Vec::as_slice).collect();
            let t_tgt = kron_product(&refs);
            let (mut a, mut g, mut m) = (0.0, 0.0, 0.0);
            for i in 0..inner {
                a += (t_ind[i] - t_tgt[i]).abs();
                g += (t_gen[i] - t_tgt[i]).abs();
                m += t_ind[i];
            }
            tv2.add(a);
            genie2.add(g);
            total.add(m);
            if cfg.secrecy {
                for (i, &p) in t_ind.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    digits(i, cell, n, &mut xvd);
                    let uv = (0..n).fold(0, |acc, t| acc * (nu * nv) + ud[t] * nv + xvd[t] % nv);
                    p_uvy[uv * ny_seq + y] += p;
                }
            }
            if keep {
                let base = (u * ny_seq + y) * inner;
                induced[base..base + inner].copy_from_slice(&t_ind);
            }
        }
    }

    let secrecy = cfg.secrecy.then(|| secrecy_of(&p_uvy, uv_seq, ny_seq));
    let induced = if keep {
        Some(induced_dist(&induced, n, [nu, nx, ny, nv])?)
    } else {
        None
    };
    Ok(ExactResult {
        seed,
        n,
        r0: cfg.r0,
        r_tilde: cfg.r_tilde,
        tv: 0.5 * tv2.value(),
        genie_tv: 0.5 * genie2.value(),
        sw_error_prob: sw_err,
        mismatch_prob: mismatch,
        empty_bin_prob: empty_p,
        fallback_prob: fallback_p,
        total_mass: total.value(),
        secrecy,
        induced,
    })
}

fn secrecy_of(p_uvy: &[f64], uv_seq: usize, ny_seq: usize) -> Secrecy {
    let mut p_uv = vec![0.0; uv_seq];
    let mut p_y = vec![0.0; ny_seq];
    for a in 0..uv_seq {
        for y in 0..ny_seq {
            p_uv[a] += p_uvy[a * ny_seq + y];
            p_y[y] += p_uvy[a * ny_seq + y];
        }
    }
    let mi = (entropy_of_pmf(&p_uv) + entropy_of_pmf(&p_y) - entropy_of_pmf(p_uvy)).max(0.0);
    let mut tv = 0.0;
    for a in 0..uv_seq {
        for y in 0..ny_seq {
            tv += (p_uvy[a * ny_seq + y] - p_uv[a] * p_y[y]).abs();
        }
    }
    let tv = 0.5 * tv;
    let bound = csiszar_upper_bound(tv, uv_seq);
    Secrecy {
        mutual_information: mi,
        tv_independence: tv,
        bound,
        holds: mi <= bound + 1e-12,
    }
}

/// Reorders the `(u^n, y^n, (x v)^n)` layout into per-letter axes
/// `U1 X1 Y1 V1 U2 ...`.
fn induced_dist(flat: &[f64], n: usize, sizes: [usize; 4]) -> Result<FiniteDist> {
    let [nu, nx, ny, nv] = sizes;
    let mut axes = Vec::with_capacity(4 * n);
    for t in 1..=n {
        for (name, s) in [(U, nu), (X, nx), (Y, ny), (V, nv)] {
            axes.push(Alphabet::new(format!("{name}{t}"), s)?);
        }
    }
    let (nu_seq, ny_seq, inner) = (nu.pow(n as u32), ny.pow(n as u32), (nx * nv).pow(n as u32));
    let mut pmf = vec![0.0; flat.len()];
    let (mut ud, mut yd, mut xvd) = (vec![0; n], vec![0; n], vec![0; n]);
    for u in 0..nu_seq {
        digits(u, nu, n, &mut ud);
        for y in 0..ny_seq {
            digits(y, ny, n, &mut yd);
            for i in 0..inner {
                digits(i, nx * nv, n, &mut xvd);
                let idx = (0..n).fold(0, |acc, t| (((acc * nu + ud[t]) * nx + xvd[t] / nv) * ny + yd[t]) * nv + xvd[t] % nv);
                pmf[idx] = flat[(u * ny_seq + y) * inner + i];
            }
        }
    }
    Ok(FiniteDist::from_parts_unchecked(axes, pmf))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub per_seed: Vec<ExactResult>,
    /// Index into `per_seed` of the smallest TV.
    pub best: usize,
}

impl ScanResult {
    pub fn best(&self) -> &ExactResult {
        &self.per_seed[self.best]
    }

    /// `seed,n,r0,r_tilde,tv,sw_error,secrecy_mi` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,n,r0,r_tilde,tv,sw_error,secrecy_mi\n");
        for r in &self.per_seed {
            out.push_str(&format!(
                "{},{},{:.15e},{:.15e},{:.15e},{:.15e},{}\n",
                r.seed,
                r.n,
                r.r0,
                r.r_tilde,
                r.tv,
                r.sw_error_prob,
                r.secrecy.as_ref().map(|s| format!("{:.15e}", s.mutual_information)).unwrap_or_default()
            ));
        }
        out
    }
}

/// Evaluates every seed and reports the one with the smallest TV.
pub fn run_exact(target: &CoordinationTarget, cfg: &ExactConfig) -> Result<ScanResult> {
    if cfg.seeds.is_empty() {
        return Err(Error::domain("scan needs at least one seed"));
    }
    let required = required_budget(target, cfg.n);
    if required > cfg.budget {
        return Err(Error::BudgetExceeded {
            required,
            budget: cfg.budget,
        });
    }
    if cfg.n == 0 || cfg.n > MAX_BLOCK {
        return Err(Error::domain(format!("block length {} outside [1, {MAX_BLOCK}]", cfg.n)));
    }
    let per_seed = map_indexed(cfg.exec, cfg.seeds.len(), |i| evaluate_seed(target, cfg, cfg.seeds[i]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let best = (0..per_seed.len())
        .min_by(|&a, &b| per_seed[a].tv.total_cmp(&per_seed[b].tv).then(a.cmp(&b)))
        .expect("non-empty");
    Ok(ScanResult { per_seed, best })
}

/// [`run_exact`] with secrecy on a target whose `(U, V)` is independent of `(X, Y)`.
pub fn secrecy_scan(target: &CoordinationTarget, cfg: &ExactConfig) -> Result<ScanResult> {
    if !target.is_separable(1e-12) {
        return Err(Error::structural("secrecy scan needs (U, V) independent of (X, Y)"));
    }
    let mut cfg = cfg.clone();
    cfg.secrecy = true;
    run_exact(target, &cfg)
}
