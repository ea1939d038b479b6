//! The 4-connected token lattice and vertex subsets of it.
//!
//! Vertices are addressed either as `(row, col)` pairs or by their row-major
//! raster index `row * w + col`. Everything that needs a deterministic order
//! (neighbor lists, region iteration, tie-breaks) uses ascending raster index.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub row: usize,
    pub col: usize,
}

impl Vertex {
    pub const fn new(row: usize, col: usize) -> Self {
        Vertex { row, col }
    }
}

impl From<(usize, usize)> for Vertex {
    fn from((row, col): (usize, usize)) -> Self {
        Vertex { row, col }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Taxicab (L1) distance between two positions.
pub fn manhattan(u: Vertex, v: Vertex) -> usize {
    u.row.abs_diff(v.row) + u.col.abs_diff(v.col)
}

/// An `h x w` grid graph with 4-neighbor edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lattice {
    h: usize,
    w: usize,
}

impl Lattice {
    pub fn new(h: usize, w: usize) -> Result<Self> {
        if h < 2 || w < 2 {
            return Err(Error::InvalidDimension { h, w });
        }
        Ok(Lattice { h, w })
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> usize {
        self.w
    }

    /// Number of vertices, `h * w`.
    pub fn len(&self) -> usize {
        self.h * self.w
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn edge_count(&self) -> usize {
        self.h * (self.w - 1) + (self.h - 1) * self.w
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.row < self.h && v.col < self.w
    }

    pub fn check(&self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::InvalidVertex { vertex: v, h: self.h, w: self.w })
        }
    }

    /// Raster index of an in-bounds vertex.
    pub fn index(&self, v: Vertex) -> usize {
        debug_assert!(self.contains(v));
        v.row * self.w + v.col
    }

    pub fn vertex(&self, index: usize) -> Vertex {
        debug_assert!(index < self.len());
        Vertex { row: index / self.w, col: index % self.w }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.len()).map(|i| self.vertex(i))
    }

    /// The four corners in ascending raster order.
    pub fn corners(&self) -> [Vertex; 4] {
        [
            Vertex::new(0, 0),
            Vertex::new(0, self.w - 1),
            Vertex::new(self.h - 1, 0),
            Vertex::new(self.h - 1, self.w - 1),
        ]
    }

    pub fn corner_indices(&self) -> [usize; 4] {
        self.corners().map(|c| self.index(c))
    }

    /// In-bounds 4-neighbors of `v`, ascending by raster index.
    pub fn neighbors(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.check(v)?;
        Ok(self
            .neighbor_indices(self.index(v))
            .map(|i| self.vertex(i))
            .collect())
    }

    /// Neighbor raster indices of `index`, ascending.
    pub fn neighbor_indices(&self, index: usize) -> NeighborIter {
        let (row, col) = (index / self.w, index % self.w);
        let mut buf = [0usize; 4];
        let mut len = 0;
        if row > 0 {
            buf[len] = index - self.w;
            len += 1;
        }
        if col > 0 {
            buf[len] = index - 1;
            len += 1;
        }
        if col + 1 < self.w {
            buf[len] = index + 1;
            len += 1;
        }
        if row + 1 < self.h {
            buf[len] = index + self.w;
            len += 1;
        }
        NeighborIter { buf, len, pos: 0 }
    }

    /// Every edge once as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |a| {
            self.neighbor_indices(a)
                .filter(move |&b| b > a)
                .map(move |b| (a, b))
        })
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        let (u, v) = (self.vertex(a), self.vertex(b));
        manhattan(u, v) == 1
    }

    /// Whether the subgraph induced by `region` is connected. The empty
    /// region counts as connected.
    pub fn is_connected(&self, region: &Region) -> bool {
        debug_assert_eq!(region.lattice(), *self);
        let Some(start) = region.indices().next() else {
            return true;
        };
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for v in self.neighbor_indices(u) {
                if region.contains_index(v) && !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == region.len()
    }

    /// Unmasked vertices with at least one masked neighbor.
    pub fn boundary(&self, mask: &Region) -> Result<Region> {
        if mask.len() == self.len() {
            return Err(Error::EmptyComplement);
        }
        let mut out = Region::empty(*self);
        for i in mask.indices() {
            for j in self.neighbor_indices(i) {
                if !mask.contains_index(j) {
                    out.insert_index(j);
                }
            }
        }
        Ok(out)
    }
}

/// Up to four neighbor indices without allocating.
#[derive(Debug, Clone)]
pub struct NeighborIter {
    buf: [usize; 4],
    len: usize,
    pos: usize,
}

impl Iterator for NeighborIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.pos < self.len {
            self.pos += 1;
            Some(self.buf[self.pos - 1])
        } else {
            None
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.len - self.pos;
        (n, Some(n))
    }
}

impl ExactSizeIterator for NeighborIter {}

/// A vertex subset of a lattice, stored as a membership bitmap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Region {
    lattice: Lattice,
    members: Vec<bool>,
    len: usize,
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.vertices()).finish()
    }
}

impl Region {
    pub fn empty(lattice: Lattice) -> Self {
        Region { lattice, members: vec![false; lattice.len()], len: 0 }
    }

    pub fn full(lattice: Lattice) -> Self {
        Region { lattice, members: vec![true; lattice.len()], len: lattice.len() }
    }

    pub fn from_vertices<I, V>(lattice: Lattice, vertices: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: Into<Vertex>,
    {
        let mut region = Region::empty(lattice);
        for v in vertices {
            let v = v.into();
            lattice.check(v)?;
            region.insert_index(lattice.index(v));
        }
        Ok(region)
    }

    /// Builds a region from raster indices; out-of-range indices are an error.
    pub fn from_indices<I: IntoIterator<Item = usize>>(lattice: Lattice, indices: I) -> Result<Self> {
        let mut region = Region::empty(lattice);
        for i in indices {
            if i >= lattice.len() {
                return Err(Error::InvalidVertex {
                    vertex: Vertex::new(i / lattice.width(), i % lattice.width()),
                    h: lattice.height(),
                    w: lattice.width(),
                });
            }
            region.insert_index(i);
        }
        Ok(region)
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.lattice.contains(v) && self.members[self.lattice.index(v)]
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.members[index]
    }

    pub fn insert_index(&mut self, index: usize) -> bool {
        let fresh = !self.members[index];
        if fresh {
            self.members[index] = true;
            self.len += 1;
        }
        fresh
    }

    pub fn insert(&mut self, v: Vertex) -> Result<bool> {
        self.lattice.check(v)?;
        Ok(self.insert_index(self.lattice.index(v)))
    }

    pub fn complement(&self) -> Region {
        Region {
            lattice: self.lattice,
            members: self.members.iter().map(|m| !m).collect(),
            len: self.lattice.len() - self.len,
        }
    }

    /// Member raster indices, ascending.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.indices().map(|i| self.lattice.vertex(i))
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }
}
