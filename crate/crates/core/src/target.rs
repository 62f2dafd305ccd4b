//! Factored coordination targets `P_U P_{W|U} P_{X|UW} P_{Y|X} P_{V|WY}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{Alphabet, FiniteDist, Kernel};
use crate::rng::Stream;

pub const U: &str = "U";
pub const W: &str = "W";
pub const X: &str = "X";
pub const Y: &str = "Y";
pub const V: &str = "V";

/// One letter of the joint process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Letter {
    pub u: usize,
    pub w: usize,
    pub x: usize,
    pub y: usize,
    pub v: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TargetRepr", into = "TargetRepr")]
pub struct CoordinationTarget {
    source: FiniteDist,
    w_given_u: Kernel,
    x_given_uw: Kernel,
    y_given_x: Kernel,
    v_given_wy: Kernel,
}

#[derive(Serialize, Deserialize)]
struct TargetRepr {
    source: FiniteDist,
    w_given_u: Kernel,
    x_given_uw: Kernel,
    y_given_x: Kernel,
    v_given_wy: Kernel,
}

impl TryFrom<TargetRepr> for CoordinationTarget {
    type Error = Error;
    fn try_from(r: TargetRepr) -> Result<Self> {
        CoordinationTarget::new(r.source, r.w_given_u, r.x_given_uw, r.y_given_x, r.v_given_wy)
    }
}

impl From<CoordinationTarget> for TargetRepr {
    fn from(t: CoordinationTarget) -> Self {
        TargetRepr {
            source: t.source,
            w_given_u: t.w_given_u,
            x_given_uw: t.x_given_uw,
            y_given_x: t.y_given_x,
            v_given_wy: t.v_given_wy,
        }
    }
}

fn names(axes: &[Alphabet]) -> Vec<&str> {
    axes.iter().map(|a| a.name.as_str()).collect()
}

fn expect_axes(what: &str, axes: &[Alphabet], expected: &[&str]) -> Result<()> {
    if names(axes) != expected {
        return Err(Error::structural(format!(
            "{what} must be over {expected:?}, found {:?}",
            names(axes)
        )));
    }
    Ok(())
}

impl CoordinationTarget {
    pub fn new(
        source: FiniteDist,
        w_given_u: Kernel,
        x_given_uw: Kernel,
        y_given_x: Kernel,
        v_given_wy: Kernel,
    ) -> Result<Self> {
        expect_axes("source", source.axes(), &[U])?;
        expect_axes("P(W|U) conditioning", w_given_u.from_axes(), &[U])?;
        expect_axes("P(W|U) output", w_given_u.to_axes(), &[W])?;
        expect_axes("P(X|UW) conditioning", x_given_uw.from_axes(), &[U, W])?;
        expect_axes("P(X|UW) output", x_given_uw.to_axes(), &[X])?;
        expect_axes("P(Y|X) conditioning", y_given_x.from_axes(), &[X])?;
        expect_axes("P(Y|X) output", y_given_x.to_axes(), &[Y])?;
        expect_axes("P(V|WY) conditioning", v_given_wy.from_axes(), &[W, Y])?;
        expect_axes("P(V|WY) output", v_given_wy.to_axes(), &[V])?;
        let t = CoordinationTarget {
            source,
            w_given_u,
            x_given_uw,
            y_given_x,
            v_given_wy,
        };
        let same = |a: &Alphabet, b: &Alphabet| a.size == b.size;
        let consistent = same(&t.source.axes()[0], &t.w_given_u.from_axes()[0])
            && same(&t.source.axes()[0], &t.x_given_uw.from_axes()[0])
            && same(&t.w_given_u.to_axes()[0], &t.x_given_uw.from_axes()[1])
            && same(&t.w_given_u.to_axes()[0], &t.v_given_wy.from_axes()[0])
            && same(&t.x_given_uw.to_axes()[0], &t.y_given_x.from_axes()[0])
            && same(&t.y_given_x.to_axes()[0], &t.v_given_wy.from_axes()[1]);
        if !consistent {
            return Err(Error::structural("alphabet sizes disagree between factors"));
        }
        Ok(t)
    }

    /// Sizes of `(U, W, X, Y, V)`.
    pub fn sizes(&self) -> [usize; 5] {
        [
            self.source.len(),
            self.w_given_u.row_len(),
            self.x_given_uw.row_len(),
            self.y_given_x.row_len(),
            self.v_given_wy.row_len(),
        ]
    }

    pub fn u_size(&self) -> usize {
        self.sizes()[0]
    }

    pub fn w_size(&self) -> usize {
        self.sizes()[1]
    }

    pub fn p_u(&self) -> &[f64] {
        self.source.pmf()
    }

    pub fn p_w_given_u(&self, u: usize) -> &[f64] {
        self.w_given_u.row(u)
    }

    pub fn p_x_given_uw(&self, u: usize, w: usize) -> &[f64] {
        self.x_given_uw.row(u * self.w_size() + w)
    }

    pub fn p_y_given_x(&self, x: usize) -> &[f64] {
        self.y_given_x.row(x)
    }

    pub fn p_v_given_wy(&self, w: usize, y: usize) -> &[f64] {
        self.v_given_wy.row(w * self.sizes()[3] + y)
    }

    pub fn channel(&self) -> &Kernel {
        &self.y_given_x
    }

    /// Full joint over `(U, W, X, Y, V)`.
    pub fn joint(&self) -> FiniteDist {
        let [nu, nw, nx, ny, nv] = self.sizes();
        let axes = vec![
            Alphabet { name: U.into(), size: nu },
            Alphabet { name: W.into(), size: nw },
            Alphabet { name: X.into(), size: nx },
            Alphabet { name: Y.into(), size: ny },
            Alphabet { name: V.into(), size: nv },
        ];
        let mut pmf = Vec::with_capacity(nu * nw * nx * ny * nv);
        for u in 0..nu {
            for w in 0..nw {
                for x in 0..nx {
                    for y in 0..ny {
                        for v in 0..nv {
                            pmf.push(
                                self.p_u()[u]
                                    * self.p_w_given_u(u)[w]
                                    * self.p_x_given_uw(u, w)[x]
                                    * self.p_y_given_x(x)[y]
                                    * self.p_v_given_wy(w, y)[v],
                            );
                        }
                    }
                }
            }
        }
        FiniteDist::from_parts_unchecked(axes, pmf)
    }

    /// Joint of the observables `(U, X, Y, V)`.
    pub fn observables(&self) -> FiniteDist {
        self.joint().marginal(&[U, X, Y, V]).expect("axes exist")
    }

    /// Draws one letter of the joint process from a positioned stream.
    pub fn sample_letter(&self, s: &mut Stream) -> Letter {
        let u = s.categorical(self.p_u());
        let w = s.categorical(self.p_w_given_u(u));
        let x = s.categorical(self.p_x_given_uw(u, w));
        let y = s.categorical(self.p_y_given_x(x));
        let v = s.categorical(self.p_v_given_wy(w, y));
        Letter { u, w, x, y, v }
    }

    /// True when `(U, V)` is independent of `(X, Y)` within `tol` bits.
    pub fn is_separable(&self, tol: f64) -> bool {
        crate::prob::mutual_information(&self.joint(), &[U, V], &[X, Y], &[])
            .map(|mi| mi <= tol)
            .unwrap_or(false)
    }

    pub fn to_text(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Binary cascade: `U ~ Bern(1/2)`, `W = U xor Bern(p_wu)`, `X = W`,
    /// `Y = X xor Bern(p_yx)`, `V = Y`.
    pub fn bsc_cascade(p_wu: f64, p_yx: f64) -> Result<Self> {
        let identity = |from: &[&str], to: &str, pick: usize| {
            let from_axes = from.iter().map(|n| Alphabet::new(*n, 2)).collect::<Result<Vec<_>>>()?;
            Kernel::from_fn(from_axes, vec![Alphabet::new(to, 2)?], move |f, t| {
                if t[0] == f[pick] {
                    1.0
                } else {
                    0.0
                }
            })
        };
        CoordinationTarget::new(
            FiniteDist::bernoulli(U, 0.5)?,
            Kernel::bsc(U, W, p_wu)?,
            identity(&[U, W], X, 1)?,
            Kernel::bsc(X, Y, p_yx)?,
            identity(&[W, Y], V, 1)?,
        )
    }

    /// Separable target with `W = (W1, W2)` coded as `2 W1 + W2`: `W1` uniform
    /// drives `X = W1`, `W2 = U xor Bern(p_wu)` drives `V = W2 xor Bern(p_vw)`,
    /// and `Y = X xor Bern(p_yx)`. `(U, V)` is independent of `(X, Y)`.
    pub fn separation(p_wu: f64, p_yx: f64, p_vw: f64) -> Result<Self> {
        let a = |n: &str, s: usize| Alphabet::new(n, s);
        let flip = |same: bool, p: f64| if same { 1.0 - p } else { p };
        CoordinationTarget::new(
            FiniteDist::bernoulli(U, 0.5)?,
            Kernel::from_fn(vec![a(U, 2)?], vec![a(W, 4)?], move |f, t| 0.5 * flip(t[0] % 2 == f[0], p_wu))?,
            Kernel::from_fn(vec![a(U, 2)?, a(W, 4)?], vec![a(X, 2)?], |f, t| if t[0] == f[1] / 2 { 1.0 } else { 0.0 })?,
            Kernel::bsc(X, Y, p_yx)?,
            Kernel::from_fn(vec![a(W, 4)?, a(Y, 2)?], vec![a(V, 2)?], move |f, t| flip(t[0] == f[0] % 2, p_vw))?,
        )
    }

    /// Test target with constant auxiliary: `W = 0`, `X ~ P_{X|U}`, `V ~ P_{V|Y}`.
    pub fn constant_auxiliary(source: FiniteDist, x_given_u: &Kernel, channel: Kernel, v_given_y: &Kernel) -> Result<Self> {
        let nu = source.len();
        let nx = x_given_u.row_len();
        let ny = channel.row_len();
        let nv = v_given_y.row_len();
        let a = |n: &str, s: usize| Alphabet::new(n, s);
        CoordinationTarget::new(
            source,
            Kernel::from_fn(vec![a(U, nu)?], vec![a(W, 1)?], |_, _| 1.0)?,
            Kernel::from_fn(vec![a(U, nu)?, a(W, 1)?], vec![a(X, nx)?], |f, t| x_given_u.row(f[0])[t[0]])?,
            channel,
            Kernel::from_fn(vec![a(W, 1)?, a(Y, ny)?], vec![a(V, nv)?], |f, t| v_given_y.row(f[1])[t[0]])?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{entropy, h2};

    #[test]
    fn bsc_cascade_single_letter_entropies() {
        let t = CoordinationTarget::bsc_cascade(0.3, 0.1).unwrap();
        let j = t.joint();
        assert!((j.total_mass() - 1.0).abs() < 1e-12);
        assert!((entropy(&j, &[W], &[U]).unwrap() - h2(0.3)).abs() < 1e-12);
        assert!((entropy(&j, &[W], &[Y]).unwrap() - h2(0.1)).abs() < 1e-12);
        assert!(entropy(&j, &[W], &[U, X, Y, V]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let t = CoordinationTarget::bsc_cascade(0.3, 0.1).unwrap();
        let s = t.to_text().unwrap();
        assert_eq!(CoordinationTarget::from_text(&s).unwrap(), t);
    }

    #[test]
    fn rejects_misnamed_factor() {
        let t = CoordinationTarget::new(
            FiniteDist::bernoulli(U, 0.5).unwrap(),
            Kernel::bsc(U, "Q", 0.1).unwrap(),
            Kernel::bsc(U, X, 0.1).unwrap(),
            Kernel::bsc(X, Y, 0.1).unwrap(),
            Kernel::bsc(W, V, 0.1).unwrap(),
        );
        assert!(matches!(t, Err(Error::Structural(_))));
    }
}
