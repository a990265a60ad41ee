use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Position of a block in the RAN function chain. The chain order is RU, DU, CU.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NfType {
    #[serde(rename = "RU")]
    Ru,
    #[serde(rename = "DU")]
    Du,
    #[serde(rename = "CU")]
    Cu,
}

impl NfType {
    pub const CHAIN: [NfType; 3] = [NfType::Ru, NfType::Du, NfType::Cu];

    pub fn index(self) -> usize {
        match self {
            NfType::Ru => 0,
            NfType::Du => 1,
            NfType::Cu => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NfType::Ru => "RU",
            NfType::Du => "DU",
            NfType::Cu => "CU",
        }
    }
}

impl fmt::Display for NfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NfType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "RU" => Ok(NfType::Ru),
            "DU" => Ok(NfType::Du),
            "CU" => Ok(NfType::Cu),
            other => Err(format!("unknown NF type `{other}`")),
        }
    }
}

/// One value per NF type, indexed by [`NfType::index`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PerNf<T> {
    #[serde(rename = "RU")]
    pub ru: T,
    #[serde(rename = "DU")]
    pub du: T,
    #[serde(rename = "CU")]
    pub cu: T,
}

impl<T> PerNf<T> {
    pub fn new(ru: T, du: T, cu: T) -> Self {
        PerNf { ru, du, cu }
    }

    pub fn get(&self, nf: NfType) -> &T {
        match nf {
            NfType::Ru => &self.ru,
            NfType::Du => &self.du,
            NfType::Cu => &self.cu,
        }
    }

    pub fn get_mut(&mut self, nf: NfType) -> &mut T {
        match nf {
            NfType::Ru => &mut self.ru,
            NfType::Du => &mut self.du,
            NfType::Cu => &mut self.cu,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerNf<U> {
        PerNf::new(f(&self.ru), f(&self.du), f(&self.cu))
    }
}

impl<T: Copy> PerNf<T> {
    pub fn splat(value: T) -> Self {
        PerNf::new(value, value, value)
    }
}

impl<T> std::ops::Index<NfType> for PerNf<T> {
    type Output = T;

    fn index(&self, nf: NfType) -> &T {
        self.get(nf)
    }
}

impl<T> std::ops::IndexMut<NfType> for PerNf<T> {
    fn index_mut(&mut self, nf: NfType) -> &mut T {
        self.get_mut(nf)
    }
}
