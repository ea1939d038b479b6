//! Pearson χ² tests used to check sampler uniformity.

use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::Result;
use crate::lattice::{Region, Vertex};
use crate::rng::Rng;
use crate::spanning::{enumerate_spanning_trees, EdgeSet, WilsonSampler};

pub const DEFAULT_ALPHA: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    fn from_statistic(statistic: f64, dof: usize) -> Self {
        let p_value = if dof == 0 {
            1.0
        } else {
            let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
            dist.sf(statistic)
        };
        ChiSquareTest { statistic, dof, p_value }
    }

    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Goodness of fit of `counts` against the uniform distribution over its
/// cells.
pub fn chi_square_uniform(counts: &[usize]) -> ChiSquareTest {
    let total: usize = counts.iter().sum();
    let k = counts.len();
    if k == 0 || total == 0 {
        return ChiSquareTest::from_statistic(0.0, k.saturating_sub(1));
    }
    let expected = total as f64 / k as f64;
    let statistic = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    ChiSquareTest::from_statistic(statistic, k - 1)
}

/// Homogeneity of two count vectors over the same cells, as a 2×k
/// contingency table. Cells empty in both samples are dropped.
pub fn chi_square_homogeneity(a: &[usize], b: &[usize]) -> ChiSquareTest {
    assert_eq!(a.len(), b.len(), "count vectors must share cells");
    let (na, nb) = (a.iter().sum::<usize>() as f64, b.iter().sum::<usize>() as f64);
    let n = na + nb;
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        for (obs, row) in [(x as f64, na), (y as f64, nb)] {
            let expected = row * col / n;
            if expected > 0.0 {
                statistic += (obs - expected).powi(2) / expected;
            }
        }
    }
    ChiSquareTest::from_statistic(statistic, cells.saturating_sub(1))
}

/// Wilson tree frequencies on a small region, one count per enumerated tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeFrequencies {
    pub trees: Vec<EdgeSet>,
    pub counts: Vec<usize>,
}

impl TreeFrequencies {
    pub fn samples(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.samples() as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    pub fn chi_square(&self) -> ChiSquareTest {
        chi_square_uniform(&self.counts)
    }
}

/// Draws `samples` trees rooted at `root` and tallies them against the
/// enumeration of the region's spanning trees.
pub fn tree_frequencies(region: &Region, root: Vertex, samples: usize, rng: &mut Rng) -> Result<TreeFrequencies> {
    let trees = enumerate_spanning_trees(region)?;
    let slot: HashMap<&EdgeSet, usize> = trees.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut counts = vec![0; trees.len()];
    let mut sampler = WilsonSampler::new(region)?;
    for _ in 0..samples {
        let tree = sampler.sample(root, rng)?;
        counts[slot[&tree.edge_set()]] += 1;
    }
    Ok(TreeFrequencies { trees, counts })
}
