//! Exact conditional entropies on a small binary Gibbs model.
//!
//! The model assigns each assignment `x ∈ {0,1}^N` of a region's sites the
//! weight `exp(J · #agreeing edges + Σ bias_v x_v)`. With at most 16 sites
//! the joint table is materialized, so every conditional entropy is an
//! exact sum. Profiles average these exact entropies over sampled orders
//! and over contexts drawn from the model itself.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{manhattan, Lattice, Region, Vertex};
use crate::orders::{random_permutation_order, OrderKind};
use crate::rng::Rng;

pub const MAX_SITES: usize = 16;
pub const DEFAULT_COUPLING: f64 = 0.6;

/// Site values packed as bits, bit `k` being site `k` in raster order.
pub type State = u32;

#[derive(Debug, Clone)]
pub struct GibbsModel {
    region: Region,
    coupling: f64,
    sites: Vec<usize>,
    site_of: Vec<Option<usize>>,
    joint: Vec<f64>,
    cdf: Vec<f64>,
}

impl GibbsModel {
    /// Zero-bias model over the full lattice.
    pub fn new(lattice: Lattice, coupling: f64) -> Result<Self> {
        Self::with_bias(Region::full(lattice), coupling, &BTreeMap::new())
    }

    pub fn with_bias(region: Region, coupling: f64, bias: &BTreeMap<Vertex, f64>) -> Result<Self> {
        let lattice = region.lattice();
        let n = region.len();
        if n == 0 {
            return Err(Error::InvalidConfig("model needs at least one site".into()));
        }
        if n > MAX_SITES {
            return Err(Error::SizeLimit { what: "Gibbs model site count", size: n, limit: MAX_SITES });
        }
        if !coupling.is_finite() {
            return Err(Error::InvalidConfig(format!("coupling {coupling} is not finite")));
        }
        let sites: Vec<usize> = region.indices().collect();
        let mut site_of = vec![None; lattice.len()];
        for (k, &i) in sites.iter().enumerate() {
            site_of[i] = Some(k);
        }
        let mut h = vec![0.0; n];
        for (&v, &b) in bias {
            lattice.check(v)?;
            let k = site_of[lattice.index(v)].ok_or(Error::NotInModel(v))?;
            h[k] = b;
        }
        let edges: Vec<(usize, usize)> = lattice
            .edges()
            .filter_map(|(a, b)| Some((site_of[a]?, site_of[b]?)))
            .collect();

        let log_weight = |x: State| {
            let agree = edges.iter().filter(|&&(a, b)| (x >> a) & 1 == (x >> b) & 1).count();
            let field: f64 = (0..n).filter(|&k| (x >> k) & 1 == 1).map(|k| h[k]).sum();
            coupling * agree as f64 + field
        };
        let logs: Vec<f64> = (0..1u32 << n).map(log_weight).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|&l| (l - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        let joint: Vec<f64> = weights.iter().map(|w| w / z).collect();
        let mut acc = 0.0;
        let cdf = joint
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(GibbsModel { region, coupling, sites, site_of, joint, cdf })
    }

    pub fn lattice(&self) -> Lattice {
        self.region.lattice()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    /// Site number of a vertex, in raster order among the model's sites.
    pub fn site(&self, v: Vertex) -> Result<usize> {
        let l = self.lattice();
        if !l.contains(v) {
            return Err(Error::NotInModel(v));
        }
        self.site_of[l.index(v)].ok_or(Error::NotInModel(v))
    }

    fn site_of_index(&self, i: usize) -> usize {
        self.site_of[i].expect("index is a model site")
    }

    /// Draws a full assignment from the joint table.
    pub fn sample(&self, rng: &mut Rng) -> State {
        let u = rng.unit_f64() * self.cdf[self.cdf.len() - 1];
        let k = self.cdf.partition_point(|&c| c <= u);
        k.min(self.joint.len() - 1) as State
    }

    pub fn value(&self, state: State, v: Vertex) -> Result<bool> {
        Ok((state >> self.site(v)?) & 1 == 1)
    }

    /// Unnormalized `(P(x_t = 0, x_S = vals), P(x_t = 1, x_S = vals))`, with
    /// `observed` and `vals` as site bitmaps.
    fn joint_with_target(&self, observed: State, vals: State, target: usize) -> (f64, f64) {
        let full: State = ((1u64 << self.sites.len()) - 1) as State;
        let t = 1 << target;
        let free = full & !observed & !t;
        let (mut p0, mut p1) = (0.0, 0.0);
        let mut s = free;
        loop {
            let x = (vals & observed) | s;
            p0 += self.joint[x as usize];
            p1 += self.joint[(x | t) as usize];
            if s == 0 {
                break;
            }
            s = (s - 1) & free;
        }
        (p0, p1)
    }

    fn entropy_sites(&self, observed: State, vals: State, target: usize) -> f64 {
        let (p0, p1) = self.joint_with_target(observed, vals, target);
        binary_entropy(p1 / (p0 + p1))
    }

    fn encode(&self, observed: &[(Vertex, bool)]) -> Result<(State, State)> {
        let (mut mask, mut vals) = (0, 0);
        for &(v, x) in observed {
            let k = self.site(v)?;
            mask |= 1 << k;
            if x {
                vals |= 1 << k;
            }
        }
        Ok((mask, vals))
    }

    /// `[P(x_target = 0 | observed), P(x_target = 1 | observed)]`.
    pub fn conditional(&self, observed: &[(Vertex, bool)], target: Vertex) -> Result<[f64; 2]> {
        let (mask, vals) = self.encode(observed)?;
        let t = self.site(target)?;
        if mask & (1 << t) != 0 {
            return Err(Error::InvalidTarget(target));
        }
        let (p0, p1) = self.joint_with_target(mask, vals, t);
        let z = p0 + p1;
        Ok([p0 / z, p1 / z])
    }

    /// Entropy in bits of `x_target` given the observed values.
    pub fn exact_conditional_entropy(&self, observed: &[(Vertex, bool)], target: Vertex) -> Result<f64> {
        let [_, p1] = self.conditional(observed, target)?;
        Ok(binary_entropy(p1))
    }

    pub fn marginal_entropy(&self, v: Vertex) -> Result<f64> {
        self.exact_conditional_entropy(&[], v)
    }

    /// Entropy of the whole joint table in bits.
    pub fn joint_entropy(&self) -> f64 {
        self.joint.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }

    /// Expected conditional entropy at every step of a fixed order, with
    /// contexts enumerated exhaustively rather than sampled. Summing the
    /// steps recovers the joint entropy.
    pub fn exhaustive_step_entropies(&self, order: &[Vertex]) -> Result<Vec<f64>> {
        let sites: Vec<usize> = order.iter().map(|&v| self.site(v)).collect::<Result<_>>()?;
        let mut observed: State = 0;
        let mut steps = Vec::with_capacity(sites.len());
        for (&t, &v) in sites.iter().zip(order) {
            if observed & (1 << t) != 0 {
                return Err(Error::InvalidTarget(v));
            }
            let mut mean = 0.0;
            let mut vals = observed;
            loop {
                let (p0, p1) = self.joint_with_target(observed, vals, t);
                let z = p0 + p1;
                if z > 0.0 {
                    mean += z * binary_entropy(p1 / z);
                }
                if vals == 0 {
                    break;
                }
                vals = (vals - 1) & observed;
            }
            steps.push(mean);
            observed |= 1 << t;
        }
        Ok(steps)
    }
}

/// Entropy in bits of a coin with bias `p`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileAxis {
    Position,
    Distance,
    Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub key: String,
    pub mean_entropy_bits: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    pub axis: ProfileAxis,
    pub rows: Vec<ProfileRow>,
}

impl EntropyProfile {
    pub fn get(&self, key: &str) -> Option<&ProfileRow> {
        self.rows.iter().find(|r| r.key == key)
    }

    pub fn means(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean_entropy_bits).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(["key", "mean_entropy_bits", "samples"])?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()
    }

    pub fn read_csv<R: Read>(input: R) -> std::result::Result<Self, csv::Error> {
        let rows: Vec<ProfileRow> = csv::Reader::from_reader(input).deserialize().collect::<std::result::Result<_, _>>()?;
        let axis = match rows.first().map(|r| r.key.as_str()) {
            Some(k) if k.starts_with("d:") => ProfileAxis::Distance,
            Some(k) if k.starts_with("step:") => ProfileAxis::Step,
            _ => ProfileAxis::Position,
        };
        Ok(EntropyProfile { axis, rows })
    }
}

/// Per-bucket accumulator; buckets are merged in input order so the
/// floating-point sums do not depend on scheduling.
#[derive(Debug, Clone)]
struct Buckets {
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl Buckets {
    fn new(n: usize) -> Self {
        Buckets { sums: vec![0.0; n], counts: vec![0; n] }
    }

    fn add(&mut self, bucket: usize, value: f64) {
        self.sums[bucket] += value;
        self.counts[bucket] += 1;
    }

    fn merge(mut self, other: &Buckets) -> Self {
        for (k, (&s, &c)) in other.sums.iter().zip(&other.counts).enumerate() {
            self.sums[k] += s;
            self.counts[k] += c;
        }
        self
    }

    fn rows(&self, key: impl Fn(usize) -> String) -> Vec<ProfileRow> {
        (0..self.sums.len())
            .filter(|&k| self.counts[k] > 0)
            .map(|k| ProfileRow {
                key: key(k),
                mean_entropy_bits: self.sums[k] / self.counts[k] as f64,
                samples: self.counts[k],
            })
            .collect()
    }
}

fn run_samples<F>(rng: &mut Rng, samples: usize, buckets: usize, work: F) -> Buckets
where
    F: Fn(&mut Rng, &mut Buckets) + Sync,
{
    let seeds: Vec<u64> = (0..samples).map(|_| rng.next_u64()).collect();
    let parts: Vec<Buckets> = seeds
        .par_iter()
        .map(|&s| {
            let mut b = Buckets::new(buckets);
            work(&mut Rng::new(s), &mut b);
            b
        })
        .collect();
    parts.iter().fold(Buckets::new(buckets), Buckets::merge)
}

fn require_full_lattice(model: &GibbsModel, min_side: usize) -> Result<Lattice> {
    let l = model.lattice();
    if model.region.len() != l.len() {
        return Err(Error::InvalidConfig("profiles need a model over the full lattice".into()));
    }
    if l.height() < min_side || l.width() < min_side {
        return Err(Error::InvalidConfig(format!("profiles need at least a {min_side}x{min_side} lattice")));
    }
    Ok(l)
}

/// Mean entropy of unobserved sites bucketed by Manhattan distance to the
/// nearest observed site. Each sample observes a prefix of an order drawn
/// from `prefix_generator`, with prefix length uniform in `1..N`.
pub fn distance_entropy_profile(
    model: &GibbsModel,
    rng: &mut Rng,
    num_prefixes: usize,
    prefix_generator: OrderKind,
) -> Result<EntropyProfile> {
    let l = require_full_lattice(model, 3)?;
    let n = l.len();
    let max_d = l.height() + l.width() - 2;
    let buckets = run_samples(rng, num_prefixes, max_d + 1, |rng, b| {
        let order = prefix_generator.generate(l, rng);
        let k = 1 + rng.below(n - 1);
        let x = model.sample(rng);
        let (prefix, rest) = order.indices().split_at(k);
        let observed: State = prefix.iter().fold(0, |m, &i| m | 1 << model.site_of_index(i));
        for &i in rest {
            let v = l.vertex(i);
            let d = prefix.iter().map(|&p| manhattan(v, l.vertex(p))).min().expect("non-empty prefix");
            b.add(d, model.entropy_sites(observed, x, model.site_of_index(i)));
        }
    });
    Ok(EntropyProfile { axis: ProfileAxis::Distance, rows: buckets.rows(|d| format!("d:{d}")) })
}

/// Mean entropy of each site at the step where a uniformly random order
/// predicts it.
pub fn position_entropy_map(model: &GibbsModel, rng: &mut Rng, num_orders: usize) -> Result<EntropyProfile> {
    let l = require_full_lattice(model, 3)?;
    let buckets = run_samples(rng, num_orders, l.len(), |rng, b| {
        let order = random_permutation_order(l, rng);
        let x = model.sample(rng);
        let mut observed: State = 0;
        for &i in order.indices() {
            let t = model.site_of_index(i);
            b.add(i, model.entropy_sites(observed, x, t));
            observed |= 1 << t;
        }
    });
    let rows = buckets.rows(|i| {
        let v = l.vertex(i);
        format!("{}:{}", v.row, v.col)
    });
    Ok(EntropyProfile { axis: ProfileAxis::Position, rows })
}

/// Mean entropy at each 1-based step of orders of the given kind.
pub fn sequence_entropy_profile(
    model: &GibbsModel,
    kind: OrderKind,
    rng: &mut Rng,
    num_orders: usize,
) -> Result<EntropyProfile> {
    let l = require_full_lattice(model, 2)?;
    let buckets = run_samples(rng, num_orders, l.len(), |rng, b| {
        let order = kind.generate(l, rng);
        let x = model.sample(rng);
        let mut observed: State = 0;
        for (step, &i) in order.indices().iter().enumerate() {
            let t = model.site_of_index(i);
            b.add(step, model.entropy_sites(observed, x, t));
            observed |= 1 << t;
        }
    });
    Ok(EntropyProfile { axis: ProfileAxis::Step, rows: buckets.rows(|s| format!("step:{}", s + 1)) })
}

/// max − min of the step means from step 2 on.
pub fn step_range(profile: &EntropyProfile) -> f64 {
    let tail = profile.means().into_iter().skip(1);
    let (lo, hi) = tail.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)));
    hi - lo
}
