//! Random connected inpainting masks and the `STAR-MASK v1` file.
//!
//! A mask is grown from a uniformly chosen vertex by repeatedly absorbing a
//! uniformly chosen vertex of its outer boundary. Whole constructions are
//! retried until the unmasked part is connected and keeps at least one
//! lattice corner.
//!
//! ```text
//! STAR-MASK v1
//! <h> <w>
//! <ratio>
//! <|mask| space-separated raster indices>
//! ```

use std::io::{Read, Write};

use crate::error::{Error, FormatError, Result};
use crate::lattice::{Lattice, Region};
use crate::orders::{check_header, parse_dims, parse_indices, split_lines};
use crate::rng::Rng;

pub const MASK_MAGIC: &str = "STAR-MASK";
pub const DEFAULT_MAX_ATTEMPTS: usize = 1_000_000;

/// Number of masked vertices for `ratio` on `n` vertices: the first size at
/// which the growth loop `|mask| < ratio * n` stops.
pub fn target_size(ratio: f64, n: usize) -> usize {
    (ratio * n as f64).ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    region: Region,
    ratio: f64,
}

impl Mask {
    /// Wraps a region after checking every mask invariant.
    pub fn new(region: Region, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidRatio(ratio));
        }
        let lattice = region.lattice();
        if region.is_empty() {
            return Err(Error::EmptyMask);
        }
        let expected = target_size(ratio, lattice.len());
        if region.len() != expected {
            return Err(Error::MaskSizeMismatch { expected, actual: region.len() });
        }
        check_completion_mask(&region)?;
        Ok(Mask { region, ratio })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn lattice(&self) -> Lattice {
        self.region.lattice()
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn len(&self) -> usize {
        self.region.len()
    }

    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }
}

/// Structural requirements shared by masks and completion inputs: non-empty,
/// connected, connected non-empty complement, some corner left unmasked.
pub fn check_completion_mask(mask: &Region) -> Result<()> {
    let lattice = mask.lattice();
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    if lattice.corner_indices().iter().all(|&c| mask.contains_index(c)) {
        return Err(Error::AllCornersMasked);
    }
    if !lattice.is_connected(mask) {
        return Err(Error::DisconnectedMask);
    }
    if !lattice.is_connected(&mask.complement()) {
        return Err(Error::DisconnectedComplement);
    }
    Ok(())
}

/// How the growth loop picks the next vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrowthRule {
    /// Any outer-boundary vertex; the finished mask is checked and the whole
    /// construction restarts on failure.
    #[default]
    Restart,
    /// Only outer-boundary vertices whose absorption keeps the unmasked part
    /// connected and leaves a corner free.
    Guarded,
}

/// Articulation points of the subgraph induced by `region`, as a bitmap.
fn cut_vertices(lattice: Lattice, region: &Region) -> Vec<bool> {
    let n = lattice.len();
    let mut cut = vec![false; n];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    for start in region.indices() {
        if disc[start] != usize::MAX {
            continue;
        }
        disc[start] = timer;
        low[start] = timer;
        timer += 1;
        let mut root_children = 0;
        // (vertex, parent, neighbor iterator)
        let mut stack = vec![(start, usize::MAX, lattice.neighbor_indices(start))];
        while let Some(top) = stack.last_mut() {
            let (u, parent) = (top.0, top.1);
            match top.2.next() {
                Some(v) if region.contains_index(v) => {
                    if disc[v] == usize::MAX {
                        disc[v] = timer;
                        low[v] = timer;
                        timer += 1;
                        if u == start {
                            root_children += 1;
                        }
                        stack.push((v, u, lattice.neighbor_indices(v)));
                    } else if v != parent {
                        low[u] = low[u].min(disc[v]);
                    }
                }
                Some(_) => {}
                None => {
                    stack.pop();
                    if parent != usize::MAX {
                        low[parent] = low[parent].min(low[u]);
                        if parent != start && low[u] >= disc[parent] {
                            cut[parent] = true;
                        }
                    }
                }
            }
        }
        cut[start] = root_children > 1;
    }
    cut
}

/// Guarded growth pass; `None` if it gets stuck before reaching `size`.
fn grow_guarded(lattice: Lattice, size: usize, rng: &mut Rng) -> Option<Region> {
    let corners = lattice.corner_indices();
    let mut mask = Region::empty(lattice);
    let start = rng.below(lattice.len());
    mask.insert_index(start);
    let mut unmasked = mask.complement();
    if !lattice.is_connected(&unmasked) {
        return None;
    }
    while mask.len() < size {
        let cut = cut_vertices(lattice, &unmasked);
        let free_corners = corners.iter().filter(|&&c| !mask.contains_index(c)).count();
        let candidates: Vec<usize> = unmasked
            .indices()
            .filter(|&u| lattice.neighbor_indices(u).any(|m| mask.contains_index(m)))
            .filter(|&u| !cut[u])
            .filter(|&u| free_corners > 1 || !corners.contains(&u))
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let v = candidates[rng.below(candidates.len())];
        mask.insert_index(v);
        unmasked = mask.complement();
    }
    Some(mask)
}

/// Scratch space for the restart rule, reused across attempts.
struct Grower {
    lattice: Lattice,
    /// Neighbors padded to four with a sentinel vertex that is always masked.
    adjacency: Vec<[u32; 4]>,
    is_corner: Vec<bool>,
    /// `FREE`, `MASKED`, or the vertex's slot in `frontier`.
    state: Vec<u32>,
    /// Outer boundary as an unordered set with O(1) insert and removal.
    frontier: Vec<u32>,
    frontier_len: usize,
    seen: Vec<bool>,
    stack: Vec<u32>,
}

impl Grower {
    const FREE: u32 = u32::MAX;
    const MASKED: u32 = u32::MAX - 1;

    fn new(lattice: Lattice) -> Self {
        let n = lattice.len();
        let adjacency = (0..n)
            .map(|i| {
                let mut buf = [n as u32; 4];
                for (slot, u) in buf.iter_mut().zip(lattice.neighbor_indices(i)) {
                    *slot = u as u32;
                }
                buf
            })
            .collect();
        let mut is_corner = vec![false; n];
        for &c in lattice.corner_indices().iter() {
            is_corner[c] = true;
        }
        Grower {
            lattice,
            adjacency,
            is_corner,
            state: vec![Self::FREE; n + 1],
            frontier: vec![0; n],
            frontier_len: 0,
            seen: vec![false; n + 1],
            stack: Vec::with_capacity(n),
        }
    }

    #[inline]
    fn absorb(&mut self, v: usize) {
        let s = self.state[v];
        if s != Self::FREE {
            self.frontier_len -= 1;
            let last = self.frontier[self.frontier_len];
            self.frontier[s as usize] = last;
            self.state[last as usize] = s;
        }
        self.state[v] = Self::MASKED;
        for u in self.adjacency[v] {
            let u = u as usize;
            if self.state[u] == Self::FREE {
                self.state[u] = self.frontier_len as u32;
                self.frontier[self.frontier_len] = u as u32;
                self.frontier_len += 1;
            }
        }
    }

    /// One growth pass. Gives up early once every corner is masked, since
    /// such a pass can never be accepted.
    fn attempt(&mut self, size: usize, rng: &mut Rng) -> bool {
        let n = self.lattice.len();
        self.state.fill(Self::FREE);
        self.state[n] = Self::MASKED;
        self.frontier_len = 0;
        let mut masked_corners = 0;
        let mut v = rng.below(n);
        for step in 0.. {
            if self.is_corner[v] {
                masked_corners += 1;
                if masked_corners == 4 {
                    return false;
                }
            }
            self.absorb(v);
            if step + 1 >= size {
                break;
            }
            v = self.frontier[rng.below(self.frontier_len)] as usize;
        }
        self.complement_connected(size)
    }

    fn complement_connected(&mut self, size: usize) -> bool {
        let n = self.lattice.len();
        let Some(start) = (0..n).find(|&i| self.state[i] != Self::MASKED) else {
            return false;
        };
        self.seen.fill(false);
        self.seen[start] = true;
        self.stack.clear();
        self.stack.push(start as u32);
        let mut reached = 1;
        while let Some(u) = self.stack.pop() {
            for x in self.adjacency[u as usize] {
                let x = x as usize;
                if self.state[x] != Self::MASKED && !self.seen[x] {
                    self.seen[x] = true;
                    reached += 1;
                    self.stack.push(x as u32);
                }
            }
        }
        reached == n - size
    }

    fn region(&self) -> Region {
        Region::from_indices(self.lattice, (0..self.lattice.len()).filter(|&i| self.state[i] == Self::MASKED))
            .expect("indices in range")
    }
}

pub fn random_connected_mask(lattice: Lattice, ratio: f64, rng: &mut Rng, max_attempts: usize) -> Result<Mask> {
    random_connected_mask_with(lattice, ratio, rng, max_attempts, GrowthRule::default())
}

pub fn random_connected_mask_with(
    lattice: Lattice,
    ratio: f64,
    rng: &mut Rng,
    max_attempts: usize,
    rule: GrowthRule,
) -> Result<Mask> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidRatio(ratio));
    }
    let n = lattice.len();
    let size = target_size(ratio, n);
    if size + 4 > n {
        return Err(Error::MaskTooLarge { ratio, size, max: n - 4 });
    }
    match rule {
        GrowthRule::Restart => {
            let mut grower = Grower::new(lattice);
            for _ in 0..max_attempts {
                if grower.attempt(size, rng) {
                    return Ok(Mask { region: grower.region(), ratio });
                }
            }
        }
        GrowthRule::Guarded => {
            for _ in 0..max_attempts {
                if let Some(region) = grow_guarded(lattice, size, rng) {
                    return Ok(Mask { region, ratio });
                }
            }
        }
    }
    Err(Error::MaskGenerationFailed { attempts: max_attempts })
}

pub fn format_mask(mask: &Mask) -> String {
    let l = mask.lattice();
    let body: Vec<String> = mask.region.indices().map(|i| i.to_string()).collect();
    format!("{MASK_MAGIC} v1\n{} {}\n{}\n{}\n", l.height(), l.width(), mask.ratio, body.join(" "))
}

pub fn write_mask<W: Write>(mask: &Mask, mut out: W) -> std::io::Result<()> {
    out.write_all(format_mask(mask).as_bytes())
}

pub fn read_mask<R: Read>(mut input: R) -> Result<Mask> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(FormatError::from)?;
    parse_mask(&text)
}

pub fn parse_mask(text: &str) -> Result<Mask> {
    let lines = split_lines(text);
    let mut it = lines.iter().copied();
    check_header(it.next(), MASK_MAGIC)?;
    let lattice = parse_dims(it.next())?;
    let ratio_line = it.next().unwrap_or("");
    let ratio: f64 = ratio_line
        .parse()
        .map_err(|_| FormatError::BadRatio(ratio_line.to_string()))?;
    let indices = parse_indices(it.next())?;
    if it.next().is_some() {
        return Err(FormatError::TrailingContent.into());
    }
    let n = lattice.len();
    let mut region = Region::empty(lattice);
    for i in indices {
        if i >= n {
            return Err(FormatError::IndexOutOfRange { index: i, n }.into());
        }
        if !region.insert_index(i) {
            return Err(FormatError::NotPermutation(i).into());
        }
    }
    Mask::new(region, ratio)
}
