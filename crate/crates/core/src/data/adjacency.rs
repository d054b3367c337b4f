use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::autodiff::Array;
use crate::error::{Error, Result};

/// Undirected dependency graph (DG) or directed dependency tree (DT).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Dg,
    Dt,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Dg => "dg",
            Flavor::Dt => "dt",
        })
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dg" => Ok(Flavor::Dg),
            "dt" => Ok(Flavor::Dt),
            _ => Err(Error::Config(format!("unknown adjacency flavor `{s}`"))),
        }
    }
}

/// n×n 0/1 adjacency with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencyMatrix {
    n: usize,
    flavor: Flavor,
    data: Vec<f64>,
}

impl AdjacencyMatrix {
    /// DG links child and head both ways. DT sets only `A[head][child]`, so a
    /// parent row aggregates its children.
    pub fn build(heads: &[Option<usize>], flavor: Flavor) -> Result<Self> {
        let n = heads.len();
        if n == 0 {
            return Err(Error::Shape("adjacency of an empty sentence".into()));
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        for (child, head) in heads.iter().enumerate() {
            let Some(head) = *head else { continue };
            if head >= n {
                return Err(Error::Bounds(format!("head {head} of token {child} in sentence of {n} tokens")));
            }
            data[head * n + child] = 1.0;
            if flavor == Flavor::Dg {
                data[child * n + head] = 1.0;
            }
        }
        Ok(Self { n, flavor, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn nonzeros(&self) -> usize {
        self.data.iter().filter(|&&x| x != 0.0).count()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_array(&self) -> Array {
        Array::new(vec![self.n, self.n], self.data.clone()).expect("n ≥ 1")
    }

    /// Top-left embedding into an `size`×`size` zero matrix.
    pub fn padded(&self, size: usize) -> Array {
        assert!(size >= self.n);
        let mut out = Array::zeros(&[size, size]);
        let d = out.data_mut();
        for i in 0..self.n {
            d[i * size..i * size + self.n].copy_from_slice(&self.data[i * self.n..(i + 1) * self.n]);
        }
        out
    }
}
