//! Rooted spanning trees of lattice regions: uniform sampling, brute-force
//! enumeration and exact counting.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Region, Vertex};
use crate::rng::Rng;

const NONE: usize = usize::MAX;

/// Limit for [`enumerate_spanning_trees`].
pub const ENUMERATION_LIMIT: usize = 12;

/// A spanning tree over a region, stored as a parent map keyed by raster
/// index. The root and vertices outside the region have no parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    region: Region,
    root: usize,
    parent: Vec<usize>,
}

impl SpanningTree {
    /// Builds a tree from explicit `(child, parent)` pairs and checks that it
    /// really is a spanning tree of `region` rooted at `root`.
    pub fn from_parents<I, V>(region: Region, root: V, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, V)>,
        V: Into<Vertex>,
    {
        let lattice = region.lattice();
        let root = root.into();
        if !region.contains(root) {
            return Err(Error::InvalidRoot(root));
        }
        let mut parent = vec![NONE; lattice.len()];
        for (child, par) in edges {
            let (child, par) = (child.into(), par.into());
            lattice.check(child)?;
            lattice.check(par)?;
            parent[lattice.index(child)] = lattice.index(par);
        }
        let tree = SpanningTree { region, root: lattice.index(root), parent };
        if tree.is_valid() {
            Ok(tree)
        } else {
            Err(Error::DisconnectedRegion)
        }
    }

    /// Glues `other` beneath `attach` (a vertex of `self`): `other`'s root
    /// becomes a child of `attach`. The regions must be disjoint.
    pub fn graft(&self, attach: usize, other: &SpanningTree) -> SpanningTree {
        debug_assert!(self.region.contains_index(attach));
        let mut region = self.region.clone();
        let mut parent = self.parent.clone();
        for i in other.region.indices() {
            debug_assert!(!self.region.contains_index(i));
            region.insert_index(i);
            parent[i] = other.parent[i];
        }
        parent[other.root] = attach;
        SpanningTree { region, root: self.root, parent }
    }

    pub fn lattice(&self) -> Lattice {
        self.region.lattice()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn root(&self) -> Vertex {
        self.lattice().vertex(self.root)
    }

    pub fn root_index(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.region.len()
    }

    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }

    pub fn parent_index(&self, index: usize) -> Option<usize> {
        match self.parent[index] {
            NONE => None,
            p => Some(p),
        }
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        let l = self.lattice();
        if !self.region.contains(v) {
            return None;
        }
        self.parent_index(l.index(v)).map(|p| l.vertex(p))
    }

    /// Child lists indexed by raster index, each ascending.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.parent.len()];
        for i in self.region.indices() {
            if let Some(p) = self.parent_index(i) {
                children[p].push(i);
            }
        }
        children
    }

    /// Depth of every region vertex (root 0), `None` outside the region.
    pub fn depths(&self) -> Vec<Option<usize>> {
        let children = self.children();
        let mut depth = vec![None; self.parent.len()];
        depth[self.root] = Some(0);
        let mut queue = VecDeque::from([self.root]);
        while let Some(u) = queue.pop_front() {
            let d = depth[u].unwrap_or(0);
            for &c in &children[u] {
                depth[c] = Some(d + 1);
                queue.push_back(c);
            }
        }
        depth
    }

    /// Undirected edge set in canonical form.
    pub fn edge_set(&self) -> EdgeSet {
        let mut edges: Vec<(usize, usize)> = self
            .region
            .indices()
            .filter_map(|i| self.parent_index(i).map(|p| (i.min(p), i.max(p))))
            .collect();
        edges.sort_unstable();
        EdgeSet(edges)
    }

    /// Checks the spanning-tree invariants: `|region| - 1` parent edges, all
    /// of them induced lattice edges, and every vertex reaches the root.
    pub fn is_valid(&self) -> bool {
        let l = self.lattice();
        if !self.region.contains_index(self.root) || self.parent[self.root] != NONE {
            return false;
        }
        let mut edges = 0;
        for i in 0..self.parent.len() {
            let p = self.parent[i];
            if p == NONE {
                continue;
            }
            if !self.region.contains_index(i) || !self.region.contains_index(p) || !l.is_adjacent(i, p) {
                return false;
            }
            edges += 1;
        }
        if edges + 1 != self.region.len() {
            return false;
        }
        self.depths()
            .iter()
            .enumerate()
            .all(|(i, d)| d.is_some() == self.region.contains_index(i))
    }
}

/// Depth of every tree vertex keyed by position.
pub fn depth_map(tree: &SpanningTree) -> std::collections::BTreeMap<Vertex, usize> {
    let l = tree.lattice();
    tree.depths()
        .into_iter()
        .enumerate()
        .filter_map(|(i, d)| d.map(|d| (l.vertex(i), d)))
        .collect()
}

/// Unrooted spanning tree as sorted `(a, b)` raster-index pairs with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSet(pub Vec<(usize, usize)>);

/// Region adjacency prepared once and reused across many Wilson runs.
#[derive(Debug, Clone)]
pub struct WilsonSampler {
    region: Region,
    adjacency: Vec<([usize; 4], u8)>,
    in_tree: Vec<bool>,
    next: Vec<usize>,
}

impl WilsonSampler {
    pub fn new(region: &Region) -> Result<Self> {
        let lattice = region.lattice();
        if region.is_empty() || !lattice.is_connected(region) {
            return Err(Error::DisconnectedRegion);
        }
        let adjacency = (0..lattice.len())
            .map(|i| {
                let mut buf = [NONE; 4];
                let mut n = 0u8;
                if region.contains_index(i) {
                    for j in lattice.neighbor_indices(i) {
                        if region.contains_index(j) {
                            buf[n as usize] = j;
                            n += 1;
                        }
                    }
                }
                (buf, n)
            })
            .collect();
        Ok(WilsonSampler {
            region: region.clone(),
            adjacency,
            in_tree: vec![false; lattice.len()],
            next: vec![NONE; lattice.len()],
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Loop-erased random walks started from each vertex in raster order.
    pub fn sample(&mut self, root: Vertex, rng: &mut Rng) -> Result<SpanningTree> {
        if !self.region.contains(root) {
            return Err(Error::InvalidRoot(root));
        }
        let lattice = self.region.lattice();
        let root = lattice.index(root);
        self.in_tree.fill(false);
        self.in_tree[root] = true;
        let mut parent = vec![NONE; lattice.len()];

        for start in self.region.indices() {
            let mut u = start;
            while !self.in_tree[u] {
                let (nbrs, deg) = self.adjacency[u];
                let v = nbrs[rng.below(deg as usize)];
                // overwriting `next` erases any loop closed at `u`
                self.next[u] = v;
                u = v;
            }
            let mut u = start;
            while !self.in_tree[u] {
                self.in_tree[u] = true;
                parent[u] = self.next[u];
                u = self.next[u];
            }
        }
        Ok(SpanningTree { region: self.region.clone(), root, parent })
    }
}

/// Uniform spanning tree of `region` rooted at `root` (Wilson's algorithm).
pub fn wilson_ust(region: &Region, root: Vertex, rng: &mut Rng) -> Result<SpanningTree> {
    if !region.contains(root) {
        return Err(Error::InvalidRoot(root));
    }
    WilsonSampler::new(region)?.sample(root, rng)
}

/// Every spanning tree of a small region, each once, sorted by edge set.
pub fn enumerate_spanning_trees(region: &Region) -> Result<Vec<EdgeSet>> {
    let n = region.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit { what: "enumeration region", size: n, limit: ENUMERATION_LIMIT });
    }
    if n <= 1 {
        return Ok(vec![EdgeSet(Vec::new())]);
    }
    let lattice = region.lattice();
    let local: Vec<usize> = region.indices().collect();
    let local_of = |g: usize| local.binary_search(&g).expect("member");
    let edges: Vec<(usize, usize)> = lattice
        .edges()
        .filter(|&(a, b)| region.contains_index(a) && region.contains_index(b))
        .collect();

    fn find(dsu: &[usize], mut x: usize) -> usize {
        while dsu[x] != x {
            x = dsu[x];
        }
        x
    }

    struct Search<'a> {
        edges: &'a [(usize, usize)],
        ends: Vec<(usize, usize)>,
        need: usize,
        chosen: Vec<(usize, usize)>,
        out: Vec<EdgeSet>,
    }

    fn extend(s: &mut Search<'_>, from: usize, dsu: &[usize]) {
        if s.chosen.len() == s.need {
            s.out.push(EdgeSet(s.chosen.clone()));
            return;
        }
        let remaining = s.need - s.chosen.len();
        for k in from..s.edges.len() {
            if s.edges.len() - k < remaining {
                break;
            }
            let (a, b) = s.ends[k];
            let (ra, rb) = (find(dsu, a), find(dsu, b));
            if ra == rb {
                continue;
            }
            let mut next = dsu.to_vec();
            next[ra] = rb;
            s.chosen.push(s.edges[k]);
            extend(s, k + 1, &next);
            s.chosen.pop();
        }
    }

    let ends = edges.iter().map(|&(a, b)| (local_of(a), local_of(b))).collect();
    let mut search = Search { edges: &edges, ends, need: n - 1, chosen: Vec::new(), out: Vec::new() };
    let dsu: Vec<usize> = (0..n).collect();
    extend(&mut search, 0, &dsu);
    Ok(search.out)
}

/// Reduced Laplacian of the induced subgraph: the last region vertex is
/// dropped.
fn reduced_laplacian(region: &Region) -> Vec<Vec<i64>> {
    let lattice = region.lattice();
    let local: Vec<usize> = region.indices().collect();
    let m = local.len().saturating_sub(1);
    let mut lap = vec![vec![0i64; m]; m];
    for (r, &g) in local.iter().enumerate().take(m) {
        for nb in lattice.neighbor_indices(g) {
            if !region.contains_index(nb) {
                continue;
            }
            lap[r][r] += 1;
            let c = local.binary_search(&nb).expect("member");
            if c < m {
                lap[r][c] = -1;
            }
        }
    }
    lap
}

/// Exact spanning-tree count by fraction-free (Bareiss) elimination on a
/// Laplacian cofactor. Disconnected or empty regions have zero trees.
pub fn count_spanning_trees(region: &Region) -> BigUint {
    if region.is_empty() || !region.lattice().is_connected(region) {
        return BigUint::zero();
    }
    let lap = reduced_laplacian(region);
    let m = lap.len();
    if m == 0 {
        return BigUint::one();
    }
    let mut a: Vec<Vec<BigInt>> = lap
        .into_iter()
        .map(|row| row.into_iter().map(BigInt::from).collect())
        .collect();
    let mut prev = BigInt::one();
    for k in 0..m - 1 {
        // leading minors of a connected graph's reduced Laplacian are positive
        let pivot = a[k][k].clone();
        debug_assert!(pivot.is_positive());
        let (top, bottom) = a.split_at_mut(k + 1);
        let row_k = &top[k];
        for row in bottom.iter_mut() {
            let lead = std::mem::take(&mut row[k]);
            for j in k + 1..m {
                let mut value = if row[j].is_zero() { BigInt::zero() } else { &pivot * &row[j] };
                if !lead.is_zero() && !row_k[j].is_zero() {
                    value -= &lead * &row_k[j];
                }
                if !value.is_zero() {
                    value /= &prev;
                }
                row[j] = value;
            }
        }
        prev = pivot;
    }
    a[m - 1][m - 1].magnitude().clone()
}

/// Natural log of the spanning-tree count via a floating Cholesky
/// log-determinant of the reduced Laplacian.
pub fn log_count_float(region: &Region) -> Option<f64> {
    if region.is_empty() || !region.lattice().is_connected(region) {
        return None;
    }
    let lap = reduced_laplacian(region);
    let m = lap.len();
    if m == 0 {
        return Some(0.0);
    }
    let mat = DMatrix::from_fn(m, m, |r, c| lap[r][c] as f64);
    let chol = mat.cholesky()?;
    Some(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Natural log of an arbitrary-size unsigned integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Largest square side accepted by [`log_count_per_vertex`].
pub const MAX_SQUARE_SIDE: usize = 16;
/// Sides up to this value use the exact count.
pub const EXACT_SQUARE_SIDE: usize = 6;

/// `ln(#spanning trees of the n x n lattice) / n^2`.
pub fn log_count_per_vertex(n: usize) -> Result<f64> {
    if !(2..=MAX_SQUARE_SIDE).contains(&n) {
        return Err(Error::SizeLimit { what: "square side", size: n, limit: MAX_SQUARE_SIDE });
    }
    let lattice = Lattice::new(n, n)?;
    let full = Region::full(lattice);
    let ln_count = if n <= EXACT_SQUARE_SIDE {
        ln_biguint(&count_spanning_trees(&full))
    } else {
        log_count_float(&full).expect("lattice is connected")
    };
    Ok(ln_count / (n * n) as f64)
}
