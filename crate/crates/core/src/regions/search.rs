//! Numerical search for the smallest common-randomness rate admitted by a
//! region, for fixed observables.
//!
//! The auxiliaries are parameterised backwards, `q(w | observables)`, so the
//! observable marginal is matched exactly. Markov chains and the information
//! constraint enter as penalties with an increasing weight; each row of `q`
//! moves by exponentiated gradient with backtracking.

use serde::Serialize;

use super::kinds::Rhs;
use super::{check_membership_with_tol, Compiled, RegionKind, RegionPoint, Verdict};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::prob::{Alphabet, FiniteDist};
use crate::rng::{Purpose, Stream};

const MAX_LOG_STEP: f64 = 30.0;
const PENALTY_SCHEDULE: [f64; 6] = [1.0, 10.0, 100.0, 1e3, 1e4, 1e5];

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub kind: RegionKind,
    /// Cardinality of each auxiliary; `None` uses the region's bound.
    pub aux_card: Option<usize>,
    pub restarts: usize,
    /// Iterations per penalty weight.
    pub iters: usize,
    pub seed: u64,
    /// Communication rate, used by [`RegionKind::Cuff`] only.
    pub r: f64,
    /// Feasibility tolerance for Markov chains and the information constraint.
    pub tol: f64,
    pub exec: Execution,
}

impl SearchConfig {
    pub fn new(kind: RegionKind) -> Self {
        SearchConfig {
            kind,
            aux_card: None,
            restarts: 16,
            iters: 400,
            seed: 0,
            r: 0.0,
            tol: 1e-6,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub kind: RegionKind,
    /// Smallest R0 found at a point meeting every constraint within `tol`.
    /// An upper bound on the true minimum; `None` if no restart was feasible.
    pub r0_upper_bound: Option<f64>,
    #[serde(skip)]
    pub joint: Option<FiniteDist>,
    pub aux_card: usize,
    pub max_markov_cmi: f64,
    pub max_info_violation: f64,
    pub feasible_restarts: usize,
    pub restarts: usize,
    pub verdict: Option<Verdict>,
}

struct Problem {
    compiled: Compiled,
    layout_axes: Vec<Alphabet>,
    obs: Vec<f64>,
    cards: Vec<usize>,
    aux_len: usize,
    r: f64,
}

#[derive(Clone, Copy)]
struct Eval {
    f: f64,
    req: f64,
    max_cmi: f64,
    max_info: f64,
}

impl Problem {
    fn joint(&self, q: &[Vec<f64>]) -> Vec<f64> {
        let mut pmf = vec![0.0; self.obs.len() * self.aux_len];
        for (o, &po) in self.obs.iter().enumerate() {
            for a in 0..self.aux_len {
                let mut p = po;
                let mut rest = a;
                for (k, &c) in self.cards.iter().enumerate().rev() {
                    p *= q[k][o * c + rest % c];
                    rest /= c;
                }
                pmf[o * self.aux_len + a] = p;
            }
        }
        pmf
    }

    /// Signed violations `lhs - rhs` of the information constraints.
    fn info_violations(&self, h: &[f64]) -> Vec<f64> {
        let t = &self.compiled.table;
        self.compiled
            .spec
            .constraints
            .iter()
            .filter(|c| !c.involves_r0)
            .map(|c| t.eval(&c.lhs, h, 0.0, self.r) - self.compiled.rhs(&c.rhs, h, 0.0, self.r))
            .collect()
    }

    /// Penalised objective. Chains enter linearly (a CMI is already smooth and
    /// non-negative); information constraints through an augmented Lagrangian
    /// with multipliers `lambda`.
    fn eval(&self, pmf: &[f64], mu: f64, lambda: &[f64]) -> (Eval, Vec<Vec<f64>>) {
        let t = &self.compiled.table;
        let marg = t.marginals(pmf);
        let h = t.entropies(&marg);
        let spec = &self.compiled.spec;
        let req = t.eval(&spec.r0_requirement, &h, 0.0, self.r);
        let mut max_cmi: f64 = 0.0;
        let mut pen = 0.0;
        for c in &spec.chains {
            let v = t.eval(&c.expr, &h, 0.0, self.r).max(0.0);
            max_cmi = max_cmi.max(v);
            pen += v;
        }
        let mut max_info: f64 = 0.0;
        let mut aug = 0.0;
        for (v, &l) in self.info_violations(&h).into_iter().zip(lambda) {
            max_info = max_info.max(v);
            aug += 0.5 * mu * ((v + l / mu).max(0.0).powi(2) - (l / mu).powi(2));
        }
        if !h.iter().all(|x| x.is_finite()) {
            let bad = Eval {
                f: f64::INFINITY,
                req: f64::INFINITY,
                max_cmi: f64::INFINITY,
                max_info: f64::INFINITY,
            };
            return (bad, marg);
        }
        (
            Eval {
                f: req.max(0.0) + mu * pen + aug,
                req,
                max_cmi,
                max_info,
            },
            marg,
        )
    }

    fn cell_gradient(&self, marg: &[Vec<f64>], ev: &Eval, mu: f64, lambda: &[f64]) -> Vec<f64> {
        let t = &self.compiled.table;
        let spec = &self.compiled.spec;
        let h = t.entropies(marg);
        let mut g = vec![0.0; self.obs.len() * self.aux_len];
        if ev.req > 0.0 {
            t.add_gradient(&spec.r0_requirement, marg, 1.0, &mut g);
        }
        for c in &spec.chains {
            t.add_gradient(&c.expr, marg, mu, &mut g);
        }
        let viol = self.info_violations(&h);
        for ((c, v), &l) in spec.constraints.iter().filter(|c| !c.involves_r0).zip(viol).zip(lambda) {
            let weight = mu * (v + l / mu).max(0.0);
            if weight == 0.0 {
                continue;
            }
            let rhs_expr = match &c.rhs {
                Rhs::Expr(e) => e,
                Rhs::Min(v) => v
                    .iter()
                    .min_by(|a, b| t.eval(a, &h, 0.0, self.r).total_cmp(&t.eval(b, &h, 0.0, self.r)))
                    .expect("non-empty min"),
            };
            t.add_gradient(&c.lhs, marg, weight, &mut g);
            t.add_gradient(rhs_expr, marg, -weight, &mut g);
        }
        g
    }

    /// Gradient with respect to each `q_k(w | o)`, divided by `P(o)`.
    fn row_gradients(&self, q: &[Vec<f64>], g: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self.cards.iter().map(|&c| vec![0.0; self.obs.len() * c]).collect();
        let mut digits = vec![0usize; self.cards.len()];
        for o in 0..self.obs.len() {
            for a in 0..self.aux_len {
                let mut rest = a;
                for (k, &c) in self.cards.iter().enumerate().rev() {
                    digits[k] = rest % c;
                    rest /= c;
                }
                let gc = g[o * self.aux_len + a];
                for (k, &c) in self.cards.iter().enumerate() {
                    let mut w = 1.0;
                    for (m, &cm) in self.cards.iter().enumerate() {
                        if m != k {
                            w *= q[m][o * cm + digits[m]];
                        }
                    }
                    out[k][o * c + digits[k]] += w * gc;
                }
            }
        }
        out
    }

    fn step(&self, q: &[Vec<f64>], grads: &[Vec<f64>], eta: f64) -> Vec<Vec<f64>> {
        q.iter()
            .zip(grads)
            .zip(&self.cards)
            .map(|((qk, gk), &c)| {
                let mut out = qk.clone();
                for o in 0..self.obs.len() {
                    let row = &mut out[o * c..(o + 1) * c];
                    let gr = &gk[o * c..(o + 1) * c];
                    let shift = gr.iter().zip(row.iter()).filter(|(_, &p)| p > 0.0).map(|(g, _)| *g).fold(f64::INFINITY, f64::min);
                    if !shift.is_finite() {
                        continue;
                    }
                    // Zeros stay put; exponentiated steps cannot revive them.
                    for (p, g) in row.iter_mut().zip(gr) {
                        if *p > 0.0 {
                            *p *= (-(eta * (g - shift)).min(MAX_LOG_STEP)).exp();
                        }
                    }
                    let s: f64 = row.iter().sum();
                    row.iter_mut().for_each(|p| *p /= s);
                }
                out
            })
            .collect()
    }

    fn run(&self, start: Vec<Vec<f64>>, iters: usize) -> (Vec<Vec<f64>>, Eval) {
        let mut q = start;
        let mut last = None;
        let n_info = self.compiled.spec.constraints.iter().filter(|c| !c.involves_r0).count();
        let mut lambda = vec![0.0; n_info];
        for &mu in &PENALTY_SCHEDULE {
            let mut eta = 1.0;
            let (mut ev, mut marg) = self.eval(&self.joint(&q), mu, &lambda);
            for _ in 0..iters {
                let g = self.cell_gradient(&marg, &ev, mu, &lambda);
                let rows = self.row_gradients(&q, &g);
                let mut accepted = false;
                for _ in 0..40 {
                    let cand = self.step(&q, &rows, eta);
                    let (ev2, marg2) = self.eval(&self.joint(&cand), mu, &lambda);
                    if ev2.f <= ev.f {
                        let gain = ev.f - ev2.f;
                        q = cand;
                        ev = ev2;
                        marg = marg2;
                        eta *= 1.5;
                        accepted = gain > 0.0;
                        break;
                    }
                    eta *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            let h = self.compiled.table.entropies(&marg);
            for (l, v) in lambda.iter_mut().zip(self.info_violations(&h)) {
                *l = (*l + mu * v).max(0.0);
            }
            last = Some(ev);
        }
        (q, last.expect("schedule is non-empty"))
    }
}

/// Minimal R0 over auxiliaries consistent with `observables`.
pub fn search_min_r0(observables: &FiniteDist, cfg: &SearchConfig) -> Result<SearchOutcome> {
    if cfg.restarts == 0 {
        return Err(Error::domain("search needs at least one restart"));
    }
    if !(cfg.r >= 0.0) || !(cfg.tol > 0.0) {
        return Err(Error::domain("rate must be non-negative and tolerance positive"));
    }
    let aux_names: Vec<&str> = if cfg.kind == RegionKind::Separation { vec!["W1", "W2"] } else { vec!["W"] };
    for a in &aux_names {
        if observables.has_axis(a) {
            return Err(Error::structural(format!("observables already contain auxiliary {a}")));
        }
    }
    // Probe with unit auxiliaries to learn the cardinality bound.
    let probe_axes = |card: usize| -> Result<Vec<Alphabet>> {
        let mut axes = observables.axes().to_vec();
        for a in &aux_names {
            axes.push(Alphabet::new(*a, card)?);
        }
        Ok(axes)
    };
    let probe = FiniteDist::from_parts_unchecked(probe_axes(1)?, observables.pmf().to_vec());
    let cap = Compiled::new(cfg.kind, &probe)?.spec.caps[0].1;
    let card = cfg.aux_card.unwrap_or(cap);
    if card == 0 || card > cap {
        return Err(Error::domain(format!("auxiliary cardinality {card} outside [1, {cap}]")));
    }
    let layout_axes = probe_axes(card)?;
    let cards = vec![card; aux_names.len()];
    let aux_len: usize = cards.iter().product();
    let layout = FiniteDist::from_parts_unchecked(
        layout_axes.clone(),
        vec![1.0 / (observables.len() * aux_len) as f64; observables.len() * aux_len],
    );
    let problem = Problem {
        compiled: Compiled::new(cfg.kind, &layout)?,
        layout_axes,
        obs: observables.pmf().to_vec(),
        cards,
        aux_len,
        r: cfg.r,
    };

    let runs = map_indexed(cfg.exec, cfg.restarts, |k| {
        let n_obs = problem.obs.len();
        let start: Vec<Vec<f64>> = if k == 0 {
            problem
                .cards
                .iter()
                .map(|&c| (0..n_obs * c).map(|i| if i % c == 0 { 1.0 } else { 0.0 }).collect())
                .collect()
        } else {
            let mut s = Stream::new(cfg.seed, Purpose::Search, k as u64);
            problem
                .cards
                .iter()
                .map(|&c| {
                    let mut q: Vec<f64> = (0..n_obs * c).map(|_| -(1.0 - s.uniform()).ln()).collect();
                    for row in q.chunks_mut(c) {
                        let t: f64 = row.iter().sum();
                        row.iter_mut().for_each(|p| *p /= t);
                    }
                    q
                })
                .collect()
        };
        problem.run(start, cfg.iters)
    });

    let feasible = |ev: &Eval| ev.max_cmi <= cfg.tol && ev.max_info <= cfg.tol;
    let feasible_restarts = runs.iter().filter(|(_, ev)| feasible(ev)).count();
    let best = runs
        .iter()
        .filter(|(_, ev)| feasible(ev))
        .min_by(|a, b| a.1.req.total_cmp(&b.1.req))
        .or_else(|| runs.iter().min_by(|a, b| (a.1.max_cmi + a.1.max_info).total_cmp(&(b.1.max_cmi + b.1.max_info))))
        .expect("at least one restart");
    let joint = FiniteDist::from_parts_unchecked(problem.layout_axes.clone(), problem.joint(&best.0));
    let ev = best.1;
    let bound = feasible(&ev).then(|| ev.req.max(0.0));
    let verdict = match bound {
        Some(r0) => Some(check_membership_with_tol(
            cfg.kind,
            &RegionPoint {
                joint: joint.clone(),
                r: cfg.r,
                r0,
            },
            cfg.tol,
        )?),
        None => None,
    };
    Ok(SearchOutcome {
        kind: cfg.kind,
        r0_upper_bound: bound,
        joint: Some(joint),
        aux_card: card,
        max_markov_cmi: ev.max_cmi,
        max_info_violation: ev.max_info,
        feasible_restarts,
        restarts: cfg.restarts,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::erasure_cascade_joint;

    fn problem() -> Problem {
        let obs = erasure_cascade_joint(0.75, 0.1, Some(0.3)).unwrap().marginal(&["U", "X", "V"]).unwrap();
        let mut axes = obs.axes().to_vec();
        axes.push(Alphabet::new("W", 3).unwrap());
        let layout = FiniteDist::from_parts_unchecked(axes.clone(), vec![1.0 / 36.0; 36]);
        Problem {
            compiled: Compiled::new(RegionKind::UVotimesX, &layout).unwrap(),
            layout_axes: axes,
            obs: obs.pmf().to_vec(),
            cards: vec![3],
            aux_len: 3,
            r: 0.0,
        }
    }

    #[test]
    fn row_gradient_matches_finite_differences() {
        let p = problem();
        let mut s = Stream::new(1, Purpose::Search, 0);
        let mut q: Vec<f64> = (0..p.obs.len() * 3).map(|_| 0.1 + s.uniform()).collect();
        for row in q.chunks_mut(3) {
            let t: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= t);
        }
        let q = vec![q];
        let mu = 10.0;
        let lambda = [0.3];
        let (ev, marg) = p.eval(&p.joint(&q), mu, &lambda);
        let rows = p.row_gradients(&q, &p.cell_gradient(&marg, &ev, mu, &lambda));
        for o in 0..p.obs.len() {
            if p.obs[o] == 0.0 {
                continue;
            }
            // Move mass between entries 0 and 1 of the row.
            let eps = 1e-6;
            let mut qp = q.clone();
            qp[0][o * 3] += eps;
            qp[0][o * 3 + 1] -= eps;
            let fp = p.eval(&p.joint(&qp), mu, &lambda).0.f;
            let mut qm = q.clone();
            qm[0][o * 3] -= eps;
            qm[0][o * 3 + 1] += eps;
            let fm = p.eval(&p.joint(&qm), mu, &lambda).0.f;
            let fd = (fp - fm) / (2.0 * eps) / p.obs[o];
            let an = rows[0][o * 3] - rows[0][o * 3 + 1];
            assert!((fd - an).abs() < 1e-4 * (1.0 + an.abs()), "row {o}: fd {fd} vs {an}");
        }
    }
}
