//! The three order families (raster, random permutation, spanning tree) and
//! the `STAR-ORDER v1` interchange file.
//!
//! ```text
//! STAR-ORDER v1
//! <h> <w>
//! <N space-separated raster indices>
//! ```
//!
//! Lines end in LF. A file always describes a permutation of the full
//! lattice.

use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::FormatError;
use crate::lattice::Lattice;
use crate::rng::Rng;
use crate::spanning::wilson_ust;
use crate::traversal::{bfs_order, SequenceOrder};

pub const ORDER_MAGIC: &str = "STAR-ORDER";
pub const ORDER_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderKind {
    Raster,
    RandomPermutation,
    SpanningTree,
}

impl OrderKind {
    pub const ALL: [OrderKind; 3] = [OrderKind::Raster, OrderKind::RandomPermutation, OrderKind::SpanningTree];

    pub fn generate(self, lattice: Lattice, rng: &mut Rng) -> SequenceOrder {
        match self {
            OrderKind::Raster => raster_order(lattice),
            OrderKind::RandomPermutation => random_permutation_order(lattice, rng),
            OrderKind::SpanningTree => star_train_order(lattice, rng),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OrderKind::Raster => "raster",
            OrderKind::RandomPermutation => "random",
            OrderKind::SpanningTree => "star",
        }
    }
}

impl FromStr for OrderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "raster" => Ok(OrderKind::Raster),
            "random" | "random_permutation" => Ok(OrderKind::RandomPermutation),
            "star" | "spanning_tree" => Ok(OrderKind::SpanningTree),
            other => Err(format!("unknown order kind `{other}`")),
        }
    }
}

pub fn raster_order(lattice: Lattice) -> SequenceOrder {
    SequenceOrder::full(lattice, (0..lattice.len()).collect())
}

pub fn random_permutation_order(lattice: Lattice, rng: &mut Rng) -> SequenceOrder {
    let mut indices: Vec<usize> = (0..lattice.len()).collect();
    rng.shuffle(&mut indices);
    SequenceOrder::full(lattice, indices)
}

/// Training order: uniform random corner, uniform spanning tree rooted there,
/// breadth-first traversal.
pub fn star_train_order(lattice: Lattice, rng: &mut Rng) -> SequenceOrder {
    let corners = lattice.corners();
    let root = corners[rng.below(corners.len())];
    let tree = wilson_ust(&crate::lattice::Region::full(lattice), root, rng).expect("full lattice is connected");
    bfs_order(&tree)
}

pub fn validate_order(order: &SequenceOrder) -> bool {
    order.is_valid()
}

pub fn format_order(order: &SequenceOrder) -> String {
    let l = order.lattice();
    let body: Vec<String> = order.indices().iter().map(usize::to_string).collect();
    format!("{ORDER_MAGIC} {ORDER_VERSION}\n{} {}\n{}\n", l.height(), l.width(), body.join(" "))
}

pub fn write_order<W: Write>(order: &SequenceOrder, mut out: W) -> std::io::Result<()> {
    debug_assert_eq!(order.region().len(), order.lattice().len());
    out.write_all(format_order(order).as_bytes())
}

pub fn read_order<R: Read>(mut input: R) -> Result<SequenceOrder, FormatError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    parse_order(&text)
}

pub(crate) fn check_header(line: Option<&str>, magic: &str) -> Result<(), FormatError> {
    let line = line.ok_or_else(|| FormatError::MalformedHeader("missing header".into()))?;
    match line.split_once(' ') {
        Some((m, ver)) if m == magic => {
            if ver == ORDER_VERSION {
                Ok(())
            } else {
                Err(FormatError::UnsupportedVersion(ver.to_string()))
            }
        }
        _ => Err(FormatError::MalformedHeader(line.to_string())),
    }
}

pub(crate) fn parse_dims(line: Option<&str>) -> Result<Lattice, FormatError> {
    let line = line.ok_or_else(|| FormatError::BadDimensions("missing".into()))?;
    let parts: Vec<&str> = line.split(' ').collect();
    let [h, w] = parts.as_slice() else {
        return Err(FormatError::BadDimensions(line.to_string()));
    };
    let parse = |s: &str| s.parse::<usize>().map_err(|_| FormatError::BadDimensions(line.to_string()));
    Lattice::new(parse(h)?, parse(w)?).map_err(|e| FormatError::BadDimensions(e.to_string()))
}

pub(crate) fn parse_indices(line: Option<&str>) -> Result<Vec<usize>, FormatError> {
    let line = line.unwrap_or("");
    if line.is_empty() {
        return Ok(Vec::new());
    }
    line.split(' ')
        .map(|tok| tok.parse::<usize>().map_err(|_| FormatError::BadIndex(tok.to_string())))
        .collect()
}

/// Splits on LF, tolerating (at most) one trailing newline.
pub(crate) fn split_lines(text: &str) -> Vec<&str> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n').collect()
}

pub fn parse_order(text: &str) -> Result<SequenceOrder, FormatError> {
    let lines = split_lines(text);
    let mut it = lines.iter().copied();
    check_header(it.next(), ORDER_MAGIC)?;
    let lattice = parse_dims(it.next())?;
    let indices = parse_indices(it.next())?;
    if it.next().is_some() {
        return Err(FormatError::TrailingContent);
    }
    let n = lattice.len();
    if indices.len() != n {
        return Err(FormatError::LengthMismatch { expected: n, found: indices.len() });
    }
    let mut seen = vec![false; n];
    for &i in &indices {
        if i >= n {
            return Err(FormatError::IndexOutOfRange { index: i, n });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(FormatError::NotPermutation(i));
        }
    }
    Ok(SequenceOrder::full(lattice, indices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Vertex;
    use std::collections::HashMap;

    fn lat(h: usize, w: usize) -> Lattice {
        Lattice::new(h, w).unwrap()
    }

    #[test]
    fn raster_examples() {
        let r = raster_order(lat(2, 2));
        assert_eq!(r.vertices().collect::<Vec<_>>(), vec![Vertex::new(0, 0), Vertex::new(0, 1), Vertex::new(1, 0), Vertex::new(1, 1)]);
        let big = raster_order(lat(16, 16));
        assert_eq!(big.len(), 256);
        assert_eq!(big.first(), Some(Vertex::new(0, 0)));
        assert_eq!(big.last(), Some(Vertex::new(15, 15)));
        assert!(validate_order(&raster_order(lat(3, 3))));
    }

    #[test]
    fn random_permutations_uniform_on_2x2() {
        let mut rng = Rng::new(8);
        let samples = 24_000;
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..samples {
            let o = random_permutation_order(lat(2, 2), &mut rng);
            assert!(o.is_valid());
            *counts.entry(o.into_indices()).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        for c in counts.values() {
            let f = *c as f64 / samples as f64;
            assert!((f - 1.0 / 24.0).abs() <= 0.005, "{f}");
        }
    }

    #[test]
    fn fixed_seed_reproduces() {
        let a = random_permutation_order(lat(5, 5), &mut Rng::new(42));
        let b = random_permutation_order(lat(5, 5), &mut Rng::new(42));
        assert_eq!(a, b);
        let a = star_train_order(lat(5, 5), &mut Rng::new(42));
        let b = star_train_order(lat(5, 5), &mut Rng::new(42));
        assert_eq!(a, b);
    }

    #[test]
    fn star_orders_start_at_corners_uniformly() {
        let l = lat(4, 4);
        let mut rng = Rng::new(17);
        let mut firsts: HashMap<Vertex, usize> = HashMap::new();
        let samples = 20_000;
        for _ in 0..samples {
            let o = star_train_order(l, &mut rng);
            assert!(o.is_valid() && o.is_prefix_connected());
            *firsts.entry(o.first().unwrap()).or_default() += 1;
        }
        assert_eq!(firsts.len(), 4);
        for c in l.corners() {
            let f = firsts[&c] as f64 / samples as f64;
            assert!((f - 0.25).abs() <= 0.02, "{c}: {f}");
        }
    }

    #[test]
    fn prefix_connectivity_contrast_on_8x8() {
        let l = lat(8, 8);
        let mut rng = Rng::new(2);
        let mut violations = 0;
        let samples = 10_000;
        for _ in 0..samples {
            assert!(star_train_order(l, &mut rng).is_prefix_connected());
            if !random_permutation_order(l, &mut rng).is_prefix_connected() {
                violations += 1;
            }
        }
        assert!(violations as f64 / samples as f64 > 0.99);
    }

    #[test]
    fn file_layout_is_exact() {
        let text = format_order(&raster_order(lat(2, 3)));
        assert_eq!(text, "STAR-ORDER v1\n2 3\n0 1 2 3 4 5\n");
    }

    #[test]
    fn round_trip_all_kinds() {
        let l = lat(6, 7);
        let mut rng = Rng::new(1);
        for kind in OrderKind::ALL {
            let order = kind.generate(l, &mut rng);
            let mut buf = Vec::new();
            write_order(&order, &mut buf).unwrap();
            assert_eq!(read_order(buf.as_slice()).unwrap(), order);
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_order("STAR-ORDER v2\n2 2\n0 1 2 3\n"), Err(FormatError::UnsupportedVersion(_))));
        assert!(matches!(parse_order("STAR-MASK v1\n2 2\n0 1 2 3\n"), Err(FormatError::MalformedHeader(_))));
        assert!(matches!(parse_order("STAR-ORDER v1\n2\n0 1 2 3\n"), Err(FormatError::BadDimensions(_))));
        assert!(matches!(parse_order("STAR-ORDER v1\n1 4\n0 1 2 3\n"), Err(FormatError::BadDimensions(_))));
        assert_eq!(
            parse_order("STAR-ORDER v1\n2 2\n0 1 2\n"),
            Err(FormatError::LengthMismatch { expected: 4, found: 3 })
        );
        assert_eq!(parse_order("STAR-ORDER v1\n2 2\n0 1 1 3\n"), Err(FormatError::NotPermutation(1)));
        assert_eq!(parse_order("STAR-ORDER v1\n2 2\n0 1 2 4\n"), Err(FormatError::IndexOutOfRange { index: 4, n: 4 }));
        assert!(matches!(parse_order("STAR-ORDER v1\n2 2\n0 1 x 3\n"), Err(FormatError::BadIndex(_))));
        assert_eq!(parse_order("STAR-ORDER v1\n2 2\n0 1 2 3\nextra\n"), Err(FormatError::TrailingContent));
    }

    mod props {
        use super::*;
        use proptest::prelude::{any, prop_assert_eq, proptest};

        proptest! {
            #[test]
            fn star_orders_round_trip(seed in any::<u64>(), h in 2usize..10, w in 2usize..10) {
                let order = star_train_order(lat(h, w), &mut Rng::new(seed));
                prop_assert_eq!(parse_order(&format_order(&order)).unwrap(), order);
            }
        }
    }
}
