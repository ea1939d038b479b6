//! Tree traversals that turn a rooted spanning tree into a sequence order.
//!
//! Children of one parent are always visited in ascending raster index, for
//! both the breadth-first and the depth-first walk.

use std::collections::VecDeque;

use crate::lattice::{Lattice, Region, Vertex};
use crate::spanning::SpanningTree;

/// A visiting order over a declared region of a lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceOrder {
    region: Region,
    indices: Vec<usize>,
}

impl SequenceOrder {
    /// An order over `region`; no validation happens here, see
    /// [`SequenceOrder::is_valid`].
    pub fn new(region: Region, indices: Vec<usize>) -> Self {
        SequenceOrder { region, indices }
    }

    /// An order declared over the whole lattice.
    pub fn full(lattice: Lattice, indices: Vec<usize>) -> Self {
        SequenceOrder { region: Region::full(lattice), indices }
    }

    pub fn lattice(&self) -> Lattice {
        self.region.lattice()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn into_indices(self) -> Vec<usize> {
        self.indices
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        let l = self.lattice();
        self.indices.iter().map(move |&i| l.vertex(i))
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn first(&self) -> Option<Vertex> {
        self.indices.first().map(|&i| self.lattice().vertex(i))
    }

    pub fn last(&self) -> Option<Vertex> {
        self.indices.last().map(|&i| self.lattice().vertex(i))
    }

    /// True iff the indices are a permutation of the declared region.
    pub fn is_valid(&self) -> bool {
        if self.indices.len() != self.region.len() {
            return false;
        }
        let mut seen = vec![false; self.lattice().len()];
        for &i in &self.indices {
            if i >= seen.len() || !self.region.contains_index(i) || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        true
    }

    /// Position of each index in the order, `usize::MAX` if absent.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.lattice().len()];
        for (k, &i) in self.indices.iter().enumerate() {
            if i < pos.len() {
                pos[i] = k;
            }
        }
        pos
    }

    /// Every prefix induces a connected subgraph, i.e. each element after the
    /// first is adjacent to some earlier element.
    pub fn is_prefix_connected(&self) -> bool {
        let l = self.lattice();
        let mut placed = vec![false; l.len()];
        for (k, &i) in self.indices.iter().enumerate() {
            if k > 0 && !l.neighbor_indices(i).any(|j| placed[j]) {
                return false;
            }
            placed[i] = true;
        }
        true
    }

    /// Concatenation of two orders with disjoint regions.
    pub fn concat(&self, tail: &SequenceOrder) -> SequenceOrder {
        let mut region = self.region.clone();
        for i in tail.region.indices() {
            region.insert_index(i);
        }
        let mut indices = self.indices.clone();
        indices.extend_from_slice(&tail.indices);
        SequenceOrder { region, indices }
    }
}

/// Breadth-first order from the root with FIFO queue discipline.
pub fn bfs_order(tree: &SpanningTree) -> SequenceOrder {
    let children = tree.children();
    let mut indices = Vec::with_capacity(tree.len());
    let mut queue = VecDeque::from([tree.root_index()]);
    while let Some(u) = queue.pop_front() {
        indices.push(u);
        queue.extend(children[u].iter().copied());
    }
    SequenceOrder::new(tree.region().clone(), indices)
}

/// Preorder depth-first order.
pub fn dfs_order(tree: &SpanningTree) -> SequenceOrder {
    let children = tree.children();
    let mut indices = Vec::with_capacity(tree.len());
    let mut stack = vec![tree.root_index()];
    while let Some(u) = stack.pop() {
        indices.push(u);
        stack.extend(children[u].iter().rev().copied());
    }
    SequenceOrder::new(tree.region().clone(), indices)
}

/// Raster indices of the deepest vertices, ascending, and their depth.
pub fn deepest(tree: &SpanningTree) -> (usize, Vec<usize>) {
    let depths = tree.depths();
    let max = depths.iter().flatten().copied().max().unwrap_or(0);
    let at_max = depths
        .iter()
        .enumerate()
        .filter_map(|(i, d)| (*d == Some(max)).then_some(i))
        .collect();
    (max, at_max)
}

pub fn max_depth_vertices(tree: &SpanningTree) -> Vec<Vertex> {
    let l = tree.lattice();
    deepest(tree).1.into_iter().map(|i| l.vertex(i)).collect()
}

/// Final vertex of the preorder walk. It is found by always descending into
/// the last child, without materializing the whole order.
pub fn last_dfs_vertex(tree: &SpanningTree) -> Vertex {
    let children = tree.children();
    let mut u = tree.root_index();
    while let Some(&c) = children[u].last() {
        u = c;
    }
    tree.lattice().vertex(u)
}
