//! Structured text (TOML) encoding of distributions and kernels.
//!
//! Axis names and sizes are listed in order; probabilities are row-major
//! with the last axis varying fastest. Floats are written in shortest
//! round-trip form, so decoding reproduces every value bit for bit.

use serde::{Deserialize, Serialize};

use super::dist::{Alphabet, FiniteDist};
use super::kernel::Kernel;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
pub(crate) struct DistRepr {
    axes: Vec<Alphabet>,
    pmf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct KernelRepr {
    from: Vec<Alphabet>,
    to: Vec<Alphabet>,
    rows: Vec<Vec<f64>>,
}

impl From<FiniteDist> for DistRepr {
    fn from(d: FiniteDist) -> Self {
        DistRepr {
            axes: d.axes().to_vec(),
            pmf: d.pmf().to_vec(),
        }
    }
}

impl TryFrom<DistRepr> for FiniteDist {
    type Error = Error;
    fn try_from(r: DistRepr) -> Result<Self> {
        FiniteDist::new(r.axes, r.pmf)
    }
}

impl From<Kernel> for KernelRepr {
    fn from(k: Kernel) -> Self {
        KernelRepr {
            from: k.from_axes().to_vec(),
            to: k.to_axes().to_vec(),
            rows: k.rows().map(|r| r.to_vec()).collect(),
        }
    }
}

impl TryFrom<KernelRepr> for Kernel {
    type Error = Error;
    fn try_from(r: KernelRepr) -> Result<Self> {
        Kernel::new(r.from, r.to, r.rows)
    }
}

impl Serialize for FiniteDist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DistRepr::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteDist {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DistRepr::deserialize(d)?;
        FiniteDist::try_from(r).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Kernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KernelRepr::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Kernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = KernelRepr::deserialize(d)?;
        Kernel::try_from(r).map_err(serde::de::Error::custom)
    }
}

impl FiniteDist {
    pub fn to_text(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

impl Kernel {
    pub fn to_text(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_text_layout() {
        let d = FiniteDist::bernoulli("X", 0.1).unwrap();
        let t = d.to_text().unwrap();
        assert!(t.contains("name = \"X\""), "{t}");
        assert_eq!(FiniteDist::from_text(&t).unwrap(), d);
    }

    #[test]
    fn rejects_invalid_text() {
        let bad = "pmf = [0.5, 0.6]\n[[axes]]\nname = \"X\"\nsize = 2\n";
        assert!(FiniteDist::from_text(bad).is_err());
        assert!(FiniteDist::from_text("not toml at all [").is_err());
    }

    #[test]
    fn kernel_round_trip() {
        let k = Kernel::bsc("X", "Y", 0.1).unwrap();
        assert_eq!(Kernel::from_text(&k.to_text().unwrap()).unwrap(), k);
    }
}
