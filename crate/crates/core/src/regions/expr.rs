//! Linear combinations of joint entropies evaluated on a fixed joint layout.

use crate::error::Result;
use crate::prob::FiniteDist;

/// `sum coef * H(set) + a * R0 + b * R + constant`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Expr {
    pub terms: Vec<(f64, Vec<String>)>,
    pub r0: f64,
    pub r: f64,
    pub constant: f64,
}

fn owned(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn union(a: &[&str], b: &[&str]) -> Vec<String> {
    let mut out = owned(a);
    for n in b {
        if !a.contains(n) {
            out.push(n.to_string());
        }
    }
    out
}

impl Expr {
    pub fn h(of: &[&str], given: &[&str]) -> Expr {
        let mut e = Expr::default();
        e.terms.push((1.0, union(of, given)));
        e.terms.push((-1.0, owned(given)));
        e
    }

    pub fn mi(a: &[&str], b: &[&str], given: &[&str]) -> Expr {
        let ag = union(a, given);
        let bg = union(b, given);
        let ag_ref: Vec<&str> = ag.iter().map(String::as_str).collect();
        let abg = union(&ag_ref, b);
        let mut e = Expr::default();
        e.terms.push((1.0, ag));
        e.terms.push((1.0, bg));
        e.terms.push((-1.0, abg));
        e.terms.push((-1.0, owned(given)));
        e
    }

    pub fn r0() -> Expr {
        Expr {
            r0: 1.0,
            ..Expr::default()
        }
    }

    pub fn r() -> Expr {
        Expr {
            r: 1.0,
            ..Expr::default()
        }
    }

    pub fn plus(mut self, other: Expr) -> Expr {
        self.terms.extend(other.terms);
        self.r0 += other.r0;
        self.r += other.r;
        self.constant += other.constant;
        self
    }

    pub fn minus(self, other: Expr) -> Expr {
        self.plus(other.scaled(-1.0))
    }

    pub fn scaled(mut self, k: f64) -> Expr {
        for t in &mut self.terms {
            t.0 *= k;
        }
        self.r0 *= k;
        self.r *= k;
        self.constant *= k;
        self
    }

    pub fn sets(&self) -> impl Iterator<Item = &Vec<String>> {
        self.terms.iter().map(|(_, s)| s)
    }
}

/// Marginal-entropy evaluator for a fixed axis layout.
pub(crate) struct EntropyTable {
    keys: Vec<Vec<usize>>,
    maps: Vec<Vec<u32>>,
    sizes: Vec<usize>,
    axis_names: Vec<String>,
}

impl EntropyTable {
    pub fn new<'a>(layout: &FiniteDist, sets: impl Iterator<Item = &'a Vec<String>>) -> Result<Self> {
        let mut table = EntropyTable {
            keys: Vec::new(),
            maps: Vec::new(),
            sizes: Vec::new(),
            axis_names: layout.names().iter().map(|s| s.to_string()).collect(),
        };
        for s in sets {
            table.register(layout, s)?;
        }
        Ok(table)
    }

    fn key(&self, set: &[String]) -> Option<Vec<usize>> {
        let mut k: Vec<usize> = set
            .iter()
            .map(|n| self.axis_names.iter().position(|a| a == n))
            .collect::<Option<Vec<_>>>()?;
        k.sort_unstable();
        k.dedup();
        Some(k)
    }

    fn register(&mut self, layout: &FiniteDist, set: &[String]) -> Result<usize> {
        let names: Vec<&str> = set.iter().map(String::as_str).collect();
        layout.projection(&names)?;
        let key = self.key(set).expect("axes checked above");
        if let Some(i) = self.keys.iter().position(|k| *k == key) {
            return Ok(i);
        }
        let names: Vec<&str> = key.iter().map(|&i| self.axis_names[i].as_str()).collect();
        let map: Vec<u32> = layout.projection(&names)?.into_iter().map(|m| m as u32).collect();
        let size = names.iter().map(|n| layout.axis_size(n).unwrap()).product();
        self.keys.push(key);
        self.maps.push(map);
        self.sizes.push(size);
        Ok(self.keys.len() - 1)
    }

    fn index(&self, set: &[String]) -> usize {
        let key = self.key(set).expect("set registered");
        self.keys.iter().position(|k| *k == key).expect("set registered")
    }

    /// Marginal pmfs of every registered set.
    pub fn marginals(&self, pmf: &[f64]) -> Vec<Vec<f64>> {
        self.maps
            .iter()
            .zip(&self.sizes)
            .map(|(map, &size)| {
                let mut m = vec![0.0; size];
                for (p, &j) in pmf.iter().zip(map) {
                    m[j as usize] += p;
                }
                m
            })
            .collect()
    }

    pub fn entropies(&self, marginals: &[Vec<f64>]) -> Vec<f64> {
        marginals.iter().map(|m| crate::prob::entropy_of_pmf(m)).collect()
    }

    pub fn eval(&self, e: &Expr, entropies: &[f64], r0: f64, r: f64) -> f64 {
        e.terms
            .iter()
            .map(|(c, s)| c * entropies[self.index(s)])
            .sum::<f64>()
            + e.r0 * r0
            + e.r * r
            + e.constant
    }

    /// Adds `scale * dE/dP(cell)` for every cell, dropping the constant
    /// `-1/ln 2` per entropy term (it is constant along the simplex).
    pub fn add_gradient(&self, e: &Expr, marginals: &[Vec<f64>], scale: f64, out: &mut [f64]) {
        for (c, s) in &e.terms {
            let i = self.index(s);
            let map = &self.maps[i];
            let m = &marginals[i];
            let k = scale * c;
            for (o, &j) in out.iter_mut().zip(map) {
                *o -= k * m[j as usize].max(1e-300).log2();
            }
        }
    }
}
