use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on total probability mass.
pub const MASS_TOL: f64 = 1e-12;

/// A named finite alphabet `{0, .., size-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    pub name: String,
    pub size: usize,
}

impl Alphabet {
    pub fn new(name: impl Into<String>, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::domain("alphabet size must be at least 1"));
        }
        Ok(Alphabet {
            name: name.into(),
            size,
        })
    }
}

pub(crate) fn check_axes(axes: &[Alphabet]) -> Result<()> {
    for (i, a) in axes.iter().enumerate() {
        if a.size == 0 {
            return Err(Error::structural(format!("axis {} has size 0", a.name)));
        }
        if axes[..i].iter().any(|b| b.name == a.name) {
            return Err(Error::structural(format!("duplicate axis {}", a.name)));
        }
    }
    Ok(())
}

pub(crate) fn product_size(axes: &[Alphabet]) -> usize {
    axes.iter().map(|a| a.size).product()
}

/// Probability mass function over a product of named alphabets.
///
/// Storage is dense and row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist {
    axes: Vec<Alphabet>,
    pmf: Vec<f64>,
}

impl FiniteDist {
    pub fn new(axes: Vec<Alphabet>, pmf: Vec<f64>) -> Result<Self> {
        check_axes(&axes)?;
        let len = product_size(&axes);
        if pmf.len() != len {
            return Err(Error::structural(format!(
                "pmf has {} entries, product space has {len}",
                pmf.len()
            )));
        }
        if let Some(p) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::domain(format!("invalid probability {p}")));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::domain(format!("pmf sums to {total}, not 1")));
        }
        Ok(FiniteDist { axes, pmf })
    }

    /// Builds a distribution from unnormalised weights.
    pub fn from_weights(axes: Vec<Alphabet>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::domain("weights must have positive finite total"));
        }
        Self::new(axes, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn from_fn(axes: Vec<Alphabet>, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        check_axes(&axes)?;
        let sizes: Vec<usize> = axes.iter().map(|a| a.size).collect();
        let mut idx = vec![0; sizes.len()];
        let len = product_size(&axes);
        let mut pmf = Vec::with_capacity(len);
        for _ in 0..len {
            pmf.push(f(&idx));
            increment(&mut idx, &sizes);
        }
        Self::new(axes, pmf)
    }

    pub fn uniform(axes: Vec<Alphabet>) -> Result<Self> {
        check_axes(&axes)?;
        let len = product_size(&axes);
        Self::new(axes, vec![1.0 / len as f64; len])
    }

    pub fn point_mass(axes: Vec<Alphabet>, at: &[usize]) -> Result<Self> {
        Self::from_fn(axes, |idx| if idx == at { 1.0 } else { 0.0 })
    }

    pub fn bernoulli(name: &str, p_one: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_one) {
            return Err(Error::domain(format!("Bernoulli parameter {p_one}")));
        }
        Self::new(vec![Alphabet::new(name, 2)?], vec![1.0 - p_one, p_one])
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn has_axis(&self, name: &str) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::structural(format!("unknown axis {name}")))
    }

    pub fn axis_size(&self, name: &str) -> Result<usize> {
        Ok(self.axes[self.axis_index(name)?].size)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.size).collect()
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        strides(&self.sizes())
    }

    /// Probability of one point of the product space.
    pub fn prob(&self, idx: &[usize]) -> f64 {
        let flat = idx
            .iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum::<usize>();
        self.pmf[flat]
    }

    pub fn total_mass(&self) -> f64 {
        self.pmf.iter().sum()
    }

    /// Marginal over `names`, with axes in the requested order.
    pub fn marginal(&self, names: &[&str]) -> Result<FiniteDist> {
        let map = self.projection(names)?;
        let axes: Vec<Alphabet> = names
            .iter()
            .map(|n| self.axes[self.axis_index(n).unwrap()].clone())
            .collect();
        let mut pmf = vec![0.0; product_size(&axes)];
        for (p, &m) in self.pmf.iter().zip(&map) {
            pmf[m] += *p;
        }
        Ok(FiniteDist { axes, pmf })
    }

    /// For every flat index of `self`, the flat index of its projection on
    /// `names` (in the given order).
    pub(crate) fn projection(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut positions = Vec::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::structural(format!("axis {n} listed twice")));
            }
            positions.push(self.axis_index(n)?);
        }
        let sizes = self.sizes();
        let sub_sizes: Vec<usize> = positions.iter().map(|&p| sizes[p]).collect();
        let sub_strides = strides(&sub_sizes);
        let mut idx = vec![0; sizes.len()];
        let mut out = Vec::with_capacity(self.len());
        for _ in 0..self.len() {
            out.push(
                positions
                    .iter()
                    .zip(&sub_strides)
                    .map(|(&p, s)| idx[p] * s)
                    .sum(),
            );
            increment(&mut idx, &sizes);
        }
        Ok(out)
    }

    /// Independent product; axis names must be disjoint.
    pub fn product(&self, other: &FiniteDist) -> Result<FiniteDist> {
        let mut axes = self.axes.clone();
        axes.extend(other.axes.iter().cloned());
        check_axes(&axes)?;
        let mut pmf = Vec::with_capacity(self.len() * other.len());
        for p in &self.pmf {
            for q in &other.pmf {
                pmf.push(p * q);
            }
        }
        Ok(FiniteDist { axes, pmf })
    }

    /// Reorders axes to `names`, which must be a permutation of the axes.
    pub fn permute(&self, names: &[&str]) -> Result<FiniteDist> {
        if names.len() != self.axes.len() {
            return Err(Error::structural("permutation must list every axis"));
        }
        self.marginal(names)
    }

    pub fn rename(&self, from: &str, to: &str) -> Result<FiniteDist> {
        let i = self.axis_index(from)?;
        let mut axes = self.axes.clone();
        axes[i].name = to.to_string();
        check_axes(&axes)?;
        Ok(FiniteDist {
            axes,
            pmf: self.pmf.clone(),
        })
    }

    /// Iterates over `(multi-index, probability)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let sizes = self.sizes();
        let mut idx = vec![0; sizes.len()];
        self.pmf.iter().map(move |&p| {
            let cur = idx.clone();
            increment(&mut idx, &sizes);
            (cur, p)
        })
    }

    pub(crate) fn from_parts_unchecked(axes: Vec<Alphabet>, pmf: Vec<f64>) -> Self {
        FiniteDist { axes, pmf }
    }
}

pub(crate) fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut s = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * sizes[i + 1];
    }
    s
}

/// Mixed-radix increment, last digit fastest.
pub(crate) fn increment(idx: &mut [usize], sizes: &[usize]) {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < sizes[i] {
            return;
        }
        idx[i] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ax(name: &str, size: usize) -> Alphabet {
        Alphabet::new(name, size).unwrap()
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(FiniteDist::new(vec![ax("A", 2)], vec![0.5, 0.6]).is_err());
        assert!(FiniteDist::new(vec![ax("A", 2)], vec![1.5, -0.5]).is_err());
        assert!(FiniteDist::new(vec![ax("A", 2)], vec![1.0]).is_err());
    }

    #[test]
    fn rejects_duplicate_axes() {
        let r = FiniteDist::uniform(vec![ax("A", 2), ax("A", 3)]);
        assert!(matches!(r, Err(Error::Structural(_))));
    }

    #[test]
    fn marginal_reorders_axes() {
        let d = FiniteDist::from_weights(
            vec![ax("A", 2), ax("B", 3)],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        )
        .unwrap();
        let b = d.marginal(&["B"]).unwrap();
        assert!((b.pmf()[0] - 5.0 / 21.0).abs() < 1e-15);
        let ba = d.marginal(&["B", "A"]).unwrap();
        assert_eq!(ba.prob(&[2, 1]), d.prob(&[1, 2]));
        assert!(d.marginal(&["C"]).is_err());
        assert!(d.marginal(&["A", "A"]).is_err());
    }

    #[test]
    fn empty_marginal_is_unit_mass() {
        let d = FiniteDist::uniform(vec![ax("A", 3)]).unwrap();
        let m = d.marginal(&[]).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m.pmf()[0] - 1.0).abs() < 1e-15);
    }
}
