//! Erasure cascade `U -> W -> V` and the rate sweep for the uniform binary source.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{h2, Alphabet, FiniteDist};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErasurePoint {
    pub p1: f64,
    pub i_uw: f64,
    pub i_uvw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub p2: f64,
    pub p1: f64,
    pub r: f64,
    pub r0_cuff: f64,
    pub r0_joint: f64,
}

fn check_pe(pe: f64) -> Result<()> {
    if !(0.0..1.0).contains(&pe) {
        return Err(Error::domain(format!("erasure probability {pe} outside [0, 1)")));
    }
    Ok(())
}

/// Cascade of erasure channels with end-to-end erasure `pe`, second stage `p2`.
pub fn erasure_cascade(pe: f64, p2: f64) -> Result<ErasurePoint> {
    check_pe(pe)?;
    let hi = pe.min(0.5);
    if !(0.0..=hi).contains(&p2) {
        return Err(Error::domain(format!("p2 = {p2} outside [0, {hi}]")));
    }
    let p1 = 1.0 - (1.0 - pe) / (1.0 - p2);
    Ok(ErasurePoint {
        p1,
        i_uw: 1.0 - p1,
        i_uvw: h2(pe) + (1.0 - p1) * (1.0 - h2(p2)),
    })
}

/// `P(X = 1)` in `[0, 1/2]` with `h(p) = h`.
pub fn bernoulli_with_entropy(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::domain(format!("binary entropy {h} outside [0, 1]")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Joint over `U, W, [X,] V` with `W, V` ternary (2 = erasure).
/// `x_one` adds an independent `X ~ Bern(x_one)`.
pub fn erasure_cascade_joint(pe: f64, p2: f64, x_one: Option<f64>) -> Result<FiniteDist> {
    let pt = erasure_cascade(pe, p2)?;
    let p1 = pt.p1;
    let mut axes = vec![Alphabet::new("U", 2)?, Alphabet::new("W", 3)?];
    if let Some(q) = x_one {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!("P(X=1) = {q} outside [0, 1]")));
        }
        axes.push(Alphabet::new("X", 2)?);
    }
    axes.push(Alphabet::new("V", 3)?);
    let stage = |from: usize, to: usize, p: f64| {
        if from == 2 {
            if to == 2 {
                1.0
            } else {
                0.0
            }
        } else if to == 2 {
            p
        } else if to == from {
            1.0 - p
        } else {
            0.0
        }
    };
    FiniteDist::from_fn(axes, |i| {
        let (u, w) = (i[0], i[1]);
        let (x_factor, v) = match x_one {
            Some(q) => (if i[2] == 1 { q } else { 1.0 - q }, i[3]),
            None => (1.0, i[2]),
        };
        0.5 * stage(u, w, p1) * x_factor * stage(w, v, p2)
    })
}

/// `steps` evenly spaced values of `p2` over `[0, min(1/2, pe)]`.
pub fn sweep_erasure_frontier(pe: f64, steps: usize) -> Result<Vec<SweepRow>> {
    check_pe(pe)?;
    if steps < 2 {
        return Err(Error::domain("sweep needs at least 2 steps"));
    }
    let hi = pe.min(0.5);
    (0..steps)
        .map(|i| {
            let p2 = if i + 1 == steps { hi } else { hi * i as f64 / (steps - 1) as f64 };
            let pt = erasure_cascade(pe, p2)?;
            Ok(SweepRow {
                p2,
                p1: pt.p1,
                r: pt.i_uw,
                r0_cuff: (pt.i_uvw - pt.i_uw).max(0.0),
                r0_joint: pt.i_uvw,
            })
        })
        .collect()
}

pub fn sweep_to_csv(rows: &[SweepRow], comment: &str) -> String {
    let mut out = String::new();
    for line in comment.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("p2,p1,r,r0_cuff,r0_joint\n");
    for r in rows {
        out.push_str(&format!(
            "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}\n",
            r.p2, r.p1, r.r, r.r0_cuff, r.r0_joint
        ));
    }
    out
}
