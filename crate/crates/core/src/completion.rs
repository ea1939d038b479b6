//! Sequence orders for postfix completion.
//!
//! Given a mask, a spanning tree of the unmasked region is resampled until its
//! traversal can be continued directly into the masked region: for BFS some
//! deepest vertex must touch the mask, for DFS the last visited vertex must.
//! The masked region then gets its own uniform tree rooted next to that
//! vertex, and the two traversals are concatenated. Unmasked positions thus
//! form a strict prefix of the final order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{manhattan, Lattice, Region, Vertex};
use crate::masking::check_completion_mask;
use crate::rng::Rng;
use crate::spanning::{SpanningTree, WilsonSampler};
use crate::traversal::{bfs_order, deepest, dfs_order, last_dfs_vertex, SequenceOrder};

pub const DEFAULT_MAX_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Traversal {
    Dfs,
    Bfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootStrategy {
    Random,
    Farthest,
}

impl fmt::Display for Traversal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Traversal::Bfs => "bfs",
            Traversal::Dfs => "dfs",
        })
    }
}

impl fmt::Display for RootStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RootStrategy::Random => "random",
            RootStrategy::Farthest => "farthest",
        })
    }
}

impl FromStr for Traversal {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bfs" => Ok(Traversal::Bfs),
            "dfs" => Ok(Traversal::Dfs),
            other => Err(format!("unknown traversal `{other}`")),
        }
    }
}

impl FromStr for RootStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random" => Ok(RootStrategy::Random),
            "farthest" => Ok(RootStrategy::Farthest),
            other => Err(format!("unknown root strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    /// Full-lattice order, present iff accepted.
    pub order: Option<SequenceOrder>,
    /// Combined spanning tree whose traversal is `order`.
    pub tree: Option<SpanningTree>,
    pub trials: usize,
    pub accepted: bool,
}

/// Unmasked corner maximizing the mean Manhattan distance to the boundary,
/// ties to the smallest raster index. With an empty boundary every corner
/// ties.
pub fn farthest_root(lattice: Lattice, mask: &Region) -> Result<Vertex> {
    let boundary = lattice.boundary(mask).map_err(|_| Error::AllCornersMasked)?;
    let border: Vec<Vertex> = boundary.vertices().collect();
    let mut best: Option<(usize, Vertex)> = None;
    for corner in lattice.corners() {
        if mask.contains(corner) {
            continue;
        }
        // |B| is shared, so the sum ranks the same as the mean
        let total: usize = border.iter().map(|&b| manhattan(b, corner)).sum();
        if best.is_none_or(|(t, _)| total > t) {
            best = Some((total, corner));
        }
    }
    best.map(|(_, c)| c).ok_or(Error::AllCornersMasked)
}

/// Whether every masked vertex is strictly deeper than every unmasked one.
pub fn check_postfix_condition(tree: &SpanningTree, mask: &Region) -> bool {
    let depths = tree.depths();
    let mut max_unmasked = None;
    let mut min_masked = None;
    for (i, d) in depths.iter().enumerate() {
        let Some(d) = *d else { continue };
        if mask.contains_index(i) {
            min_masked = Some(min_masked.map_or(d, |m: usize| m.min(d)));
        } else {
            max_unmasked = Some(max_unmasked.map_or(d, |m: usize| m.max(d)));
        }
    }
    match (min_masked, max_unmasked) {
        (Some(lo), Some(hi)) => lo > hi,
        _ => true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletionConfig {
    pub traversal: Traversal,
    pub root: RootStrategy,
    pub max_trials: usize,
}

impl Default for CompletionConfig {
    fn default() -> Self {
        CompletionConfig { traversal: Traversal::Bfs, root: RootStrategy::Farthest, max_trials: DEFAULT_MAX_TRIALS }
    }
}

/// Samples an order with the unmasked region as prefix and the mask as
/// postfix.
pub fn completion_order(lattice: Lattice, mask: &Region, rng: &mut Rng, config: CompletionConfig) -> Result<CompletionResult> {
    debug_assert_eq!(mask.lattice(), lattice);
    check_completion_mask(mask)?;

    let unmasked = mask.complement();
    let boundary = lattice.boundary(mask)?;
    let root = match config.root {
        RootStrategy::Farthest => farthest_root(lattice, mask)?,
        RootStrategy::Random => {
            let free: Vec<Vertex> = lattice.corners().into_iter().filter(|c| !mask.contains(*c)).collect();
            free[rng.below(free.len())]
        }
    };

    let mut sampler = WilsonSampler::new(&unmasked)?;
    for trial in 1..=config.max_trials {
        let tree = sampler.sample(root, rng)?;
        // unmasked vertices after which the mask may be attached
        let anchors: Vec<usize> = match config.traversal {
            Traversal::Bfs => {
                let (_, at_max) = deepest(&tree);
                if !at_max.iter().any(|&v| boundary.contains_index(v)) {
                    continue;
                }
                at_max
            }
            Traversal::Dfs => {
                let last = lattice.index(last_dfs_vertex(&tree));
                if !boundary.contains_index(last) {
                    continue;
                }
                vec![last]
            }
        };

        let candidates: Vec<usize> = mask
            .indices()
            .filter(|&m| lattice.neighbor_indices(m).any(|u| anchors.binary_search(&u).is_ok()))
            .collect();
        let mask_root = candidates[rng.below(candidates.len())];
        let attach = lattice
            .neighbor_indices(mask_root)
            .find(|u| anchors.binary_search(u).is_ok())
            .expect("candidate touches an anchor");
        let mask_tree = WilsonSampler::new(mask)?.sample(lattice.vertex(mask_root), rng)?;

        let order = match config.traversal {
            Traversal::Bfs => bfs_order(&tree).concat(&bfs_order(&mask_tree)),
            Traversal::Dfs => dfs_order(&tree).concat(&dfs_order(&mask_tree)),
        };
        return Ok(CompletionResult {
            order: Some(order),
            tree: Some(tree.graft(attach, &mask_tree)),
            trials: trial,
            accepted: true,
        });
    }
    Ok(CompletionResult { order: None, tree: None, trials: config.max_trials, accepted: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masking::{random_connected_mask, DEFAULT_MAX_ATTEMPTS};

    fn lat(h: usize, w: usize) -> Lattice {
        Lattice::new(h, w).unwrap()
    }

    fn v(r: usize, c: usize) -> Vertex {
        Vertex::new(r, c)
    }

    fn region(l: Lattice, vs: &[(usize, usize)]) -> Region {
        Region::from_vertices(l, vs.iter().copied()).unwrap()
    }

    /// Mean boundary distance per unmasked corner, computed from scratch.
    fn brute_force_farthest(l: Lattice, mask: &Region) -> Vertex {
        let border: Vec<Vertex> = l
            .vertices()
            .filter(|&u| !mask.contains(u) && l.neighbors(u).unwrap().iter().any(|n| mask.contains(*n)))
            .collect();
        let mut best = (-1.0, v(0, 0));
        for c in l.corners() {
            if mask.contains(c) {
                continue;
            }
            let mean = border.iter().map(|&b| manhattan(b, c) as f64).sum::<f64>() / border.len() as f64;
            if mean > best.0 + 1e-12 {
                best = (mean, c);
            }
        }
        best.1
    }

    #[test]
    fn farthest_examples() {
        let l2 = lat(2, 2);
        assert_eq!(farthest_root(l2, &region(l2, &[(1, 1)])).unwrap(), v(0, 0));
        let l4 = lat(4, 4);
        let block = region(l4, &[(2, 2), (2, 3), (3, 2), (3, 3)]);
        assert_eq!(farthest_root(l4, &block).unwrap(), v(0, 0));
        assert_eq!(brute_force_farthest(l4, &block), v(0, 0));
        let l16 = lat(16, 16);
        let centre = region(l16, &[(7, 7), (7, 8), (8, 7)]);
        assert!(l16.corners().contains(&farthest_root(l16, &centre).unwrap()));
    }

    #[test]
    fn farthest_matches_brute_force_on_random_masks() {
        let l = lat(10, 10);
        let mut rng = Rng::new(4);
        for k in 0..450 {
            let ratio = 0.1 + 0.8 * (k % 9) as f64 / 8.0;
            let m = random_connected_mask(l, ratio, &mut rng, DEFAULT_MAX_ATTEMPTS).unwrap();
            assert_eq!(farthest_root(l, m.region()).unwrap(), brute_force_farthest(l, m.region()));
        }
    }

    #[test]
    fn farthest_needs_a_free_corner() {
        let l = lat(3, 3);
        let ring = region(l, &[(0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1), (2, 2)]);
        assert_eq!(farthest_root(l, &ring), Err(Error::AllCornersMasked));
    }

    #[test]
    fn postfix_condition_examples() {
        let l = lat(2, 2);
        let mask = region(l, &[(1, 1)]);
        let good = SpanningTree::from_parents(
            Region::full(l),
            v(0, 0),
            [(v(0, 1), v(0, 0)), (v(1, 0), v(0, 0)), (v(1, 1), v(0, 1))],
        )
        .unwrap();
        assert!(check_postfix_condition(&good, &mask));
        let path = SpanningTree::from_parents(
            Region::full(l),
            v(0, 0),
            [(v(0, 1), v(0, 0)), (v(1, 1), v(0, 1)), (v(1, 0), v(1, 1))],
        )
        .unwrap();
        assert!(!check_postfix_condition(&path, &mask));
        assert!(check_postfix_condition(&path, &Region::empty(l)));
    }

    #[test]
    fn two_by_two_completion() {
        let l = lat(2, 2);
        let mask = region(l, &[(1, 1)]);
        for seed in 0..20 {
            let res = completion_order(l, &mask, &mut Rng::new(seed), CompletionConfig::default()).unwrap();
            assert!(res.accepted);
            assert_eq!(res.trials, 1);
            assert_eq!(res.order.unwrap().vertices().collect::<Vec<_>>(), vec![v(0, 0), v(0, 1), v(1, 0), v(1, 1)]);
        }
    }

    #[test]
    fn precondition_errors() {
        let l = lat(3, 3);
        let cfg = CompletionConfig::default();
        let mut rng = Rng::new(0);
        assert_eq!(completion_order(l, &Region::empty(l), &mut rng, cfg), Err(Error::EmptyMask));
        assert_eq!(completion_order(l, &region(l, &[(0, 1), (2, 1)]), &mut rng, cfg), Err(Error::DisconnectedMask));
        assert_eq!(
            completion_order(l, &region(l, &[(0, 1), (1, 1), (2, 1)]), &mut rng, cfg),
            Err(Error::DisconnectedComplement)
        );
        let ring = region(l, &[(0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1), (2, 2)]);
        assert_eq!(completion_order(l, &ring, &mut rng, cfg), Err(Error::AllCornersMasked));
        assert_eq!(completion_order(l, &Region::full(l), &mut rng, cfg), Err(Error::AllCornersMasked));
    }

    #[test]
    fn exhausted_trials_report_rejection() {
        // On 3x4 with the L-shaped mask below and the root fixed at (0,0),
        // DFS is forced to end far from the mask often; with one trial some
        // seeds must fail.
        let l = lat(3, 4);
        let mask = region(l, &[(2, 3), (1, 3)]);
        let cfg = CompletionConfig { traversal: Traversal::Dfs, root: RootStrategy::Farthest, max_trials: 1 };
        let mut failures = 0;
        for seed in 0..200 {
            let res = completion_order(l, &mask, &mut Rng::new(seed), cfg).unwrap();
            if !res.accepted {
                assert_eq!(res.trials, 1);
                assert!(res.order.is_none() && res.tree.is_none());
                failures += 1;
            }
        }
        assert!(failures > 0);
    }

    fn assert_accepted_result_is_consistent(l: Lattice, mask: &Region, res: &CompletionResult, traversal: Traversal) {
        let order = res.order.as_ref().unwrap();
        let tree = res.tree.as_ref().unwrap();
        assert!(order.is_valid());
        assert_eq!(order.region().len(), l.len());
        let split = l.len() - mask.len();
        assert!(order.indices()[..split].iter().all(|&i| !mask.contains_index(i)));
        assert!(order.indices()[split..].iter().all(|&i| mask.contains_index(i)));
        assert!(tree.is_valid());
        let pos = order.positions();
        for i in 0..l.len() {
            if let Some(p) = tree.parent_index(i) {
                assert!(pos[p] < pos[i]);
            }
        }
        match traversal {
            Traversal::Bfs => {
                assert!(check_postfix_condition(tree, mask));
                assert_eq!(&bfs_order(tree), order);
            }
            Traversal::Dfs => assert_eq!(&dfs_order(tree), order),
        }
        assert!(SequenceOrder::full(l, order.indices()[..split].to_vec()).is_prefix_connected());
    }

    #[test]
    fn accepted_orders_are_consistent_for_all_strategies() {
        let l = lat(8, 8);
        let mut rng = Rng::new(123);
        for k in 0..400 {
            let ratio = [0.1, 0.3, 0.5, 0.7, 0.9][k % 5];
            let m = random_connected_mask(l, ratio, &mut rng, DEFAULT_MAX_ATTEMPTS).unwrap();
            for traversal in [Traversal::Bfs, Traversal::Dfs] {
                for root in [RootStrategy::Random, RootStrategy::Farthest] {
                    let cfg = CompletionConfig { traversal, root, max_trials: 100 };
                    let res = completion_order(l, m.region(), &mut rng, cfg).unwrap();
                    if res.accepted {
                        assert_accepted_result_is_consistent(l, m.region(), &res, traversal);
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_same_result() {
        let l = lat(16, 16);
        let m = random_connected_mask(l, 0.3, &mut Rng::new(1), 100).unwrap();
        let a = completion_order(l, m.region(), &mut Rng::new(9), CompletionConfig::default()).unwrap();
        let b = completion_order(l, m.region(), &mut Rng::new(9), CompletionConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
