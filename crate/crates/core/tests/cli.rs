use std::path::Path;
use std::process::{Command, Output};

use star_order::bench::read_stats_csv;
use star_order::entropy::EntropyProfile;
use star_order::masking::read_mask;
use star_order::orders::{parse_order, read_order};
use tempfile::TempDir;

fn star(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_star"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) {
    std::fs::write(dir.path().join(name), text).unwrap();
}

#[test]
fn count_trees_prints_exact_count() {
    let dir = TempDir::new().unwrap();
    let out = star(dir.path(), &["count-trees", "--h", "3", "--w", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("192"));
    assert!(text.contains("ln/N: 0.584166"));
    let big = star(dir.path(), &["count-trees", "--h", "16", "--w", "16"]);
    let lattice = star_order::Lattice::new(16, 16).unwrap();
    let expected = star_order::spanning::count_spanning_trees(&star_order::Region::full(lattice));
    assert_eq!(stdout(&big).lines().next(), Some(expected.to_string().as_str()));
}

#[test]
fn complete_single_masked_corner() {
    let dir = TempDir::new().unwrap();
    write(&dir, "mask.txt", "STAR-MASK v1\n2 2\n0.25\n3\n");
    let out = star(dir.path(), &["complete", "--mask", "mask.txt", "--seed", "7", "--out", "order.txt"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("seed: 7\n"));
    assert!(text.contains("trials: 1\n"));
    let order = read_order(std::fs::File::open(dir.path().join("order.txt")).unwrap()).unwrap();
    assert!(order.is_valid());
    assert_eq!(order.indices(), [0, 1, 2, 3]);
}

#[test]
fn complete_output_keeps_mask_last() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&star(dir.path(), &["mask", "--h", "16", "--w", "16", "--ratio", "0.3", "--seed", "11", "--out", "m.txt"])), 0);
    let mask = read_mask(std::fs::File::open(dir.path().join("m.txt")).unwrap()).unwrap();
    assert_eq!(mask.len(), 77);
    for traversal in ["bfs", "dfs"] {
        let accepted = (0..20).map(|seed| seed.to_string()).find(|seed| {
            let args = ["complete", "--mask", "m.txt", "--seed", seed, "--traversal", traversal, "--max-trials", "1000", "--out", "o.txt"];
            let out = star(dir.path(), &args);
            assert!(matches!(code(&out), 0 | 3), "{traversal}: {}", String::from_utf8_lossy(&out.stderr));
            code(&out) == 0
        });
        assert!(accepted.is_some(), "{traversal}");
        let order = parse_order(&std::fs::read_to_string(dir.path().join("o.txt")).unwrap()).unwrap();
        let (head, tail) = order.indices().split_at(256 - 77);
        assert!(head.iter().all(|&i| !mask.region().contains_index(i)));
        assert!(tail.iter().all(|&i| mask.region().contains_index(i)));
    }
}

#[test]
fn invalid_masks_exit_with_validation_status() {
    let dir = TempDir::new().unwrap();
    write(&dir, "corners.txt", "STAR-MASK v1\n3 3\n0.8\n0 1 2 3 5 6 7 8\n");
    write(&dir, "split.txt", "STAR-MASK v1\n3 3\n0.3\n1 4 7\n");
    write(&dir, "garbage.txt", "STAR-MASK v9\n3 3\n0.3\n1 4 7\n");
    for file in ["corners.txt", "split.txt", "garbage.txt", "missing.txt"] {
        let out = star(dir.path(), &["complete", "--mask", file, "--out", "o.txt"]);
        assert_eq!(code(&out), 2, "{file}");
        assert!(!out.stderr.is_empty());
    }
    assert!(!dir.path().join("o.txt").exists());
}

#[test]
fn invalid_parameters_exit_with_validation_status() {
    let dir = TempDir::new().unwrap();
    let cases: [&[&str]; 7] = [
        &["mask", "--h", "8", "--w", "8", "--ratio", "1.5", "--out", "m.txt"],
        &["order", "--kind", "raster", "--h", "1", "--w", "8", "--out", "o.txt"],
        &["count-trees", "--h", "40", "--w", "40"],
        &["verify-uniformity", "--h", "4", "--w", "4"],
        &["entropy", "--study", "sequence", "--h", "5", "--w", "5", "--out", "e.csv"],
        &["entropy", "--study", "distance", "--h", "2", "--w", "4", "--out", "e.csv"],
        &["bench", "--masks-per-ratio", "0", "--out", "b.csv"],
    ];
    for args in cases {
        assert_eq!(code(&star(dir.path(), args)), 2, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let cases: [&[&str]; 4] = [
        &["transmogrify"],
        &["order", "--h", "4", "--w", "4", "--out", "o.txt"],
        &["order", "--kind", "spiral", "--h", "4", "--w", "4", "--out", "o.txt"],
        &["mask", "--h", "4", "--w", "four", "--ratio", "0.2", "--out", "m.txt"],
    ];
    for args in cases {
        assert_eq!(code(&star(dir.path(), args)), 1, "{args:?}");
    }
    assert_eq!(code(&star(dir.path(), &["--help"])), 0);
}

#[test]
fn exhausted_sampling_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let out = star(dir.path(), &["mask", "--h", "16", "--w", "16", "--ratio", "0.8", "--seed", "1", "--max-attempts", "1", "--out", "m.txt"]);
    assert_eq!(code(&out), 3);

    assert_eq!(code(&star(dir.path(), &["mask", "--h", "16", "--w", "16", "--ratio", "0.1", "--seed", "2", "--out", "m.txt"])), 0);
    let rejected = (0..30).any(|seed| {
        let seed = seed.to_string();
        let args = ["complete", "--mask", "m.txt", "--seed", &seed, "--traversal", "dfs", "--max-trials", "1", "--out", "o.txt"];
        code(&star(dir.path(), &args)) == 3
    });
    assert!(rejected);
}

#[test]
fn order_files_for_every_kind() {
    let dir = TempDir::new().unwrap();
    for kind in ["raster", "random", "star"] {
        let out = star(dir.path(), &["order", "--kind", kind, "--h", "6", "--w", "5", "--seed", "12", "--out", "o.txt"]);
        assert_eq!(code(&out), 0);
        assert!(stdout(&out).starts_with("seed: 12\n"));
        let order = parse_order(&std::fs::read_to_string(dir.path().join("o.txt")).unwrap()).unwrap();
        assert!(order.is_valid());
        assert_eq!(order.len(), 30);
        if kind == "star" {
            assert!(order.is_prefix_connected());
        }
    }
    let raster = std::fs::read_to_string(dir.path().join("o.txt")).unwrap();
    assert!(raster.starts_with("STAR-ORDER v1\n6 5\n"));
}

#[test]
fn verify_uniformity_reports_a_pass() {
    let dir = TempDir::new().unwrap();
    let out = star(dir.path(), &["verify-uniformity", "--h", "2", "--w", "2", "--samples", "20000", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("seed: 3\n"));
    assert!(text.contains("trees: 4\n"));
    assert!(text.contains("dof: 3\n"));
    assert!(text.contains("alpha 0.001: pass"));
}

#[test]
fn bench_and_entropy_write_csv() {
    let dir = TempDir::new().unwrap();
    let out = star(dir.path(), &["bench", "--h", "8", "--w", "8", "--masks-per-ratio", "5", "--seed", "2", "--out", "b.csv"]);
    assert_eq!(code(&out), 0);
    let stats = read_stats_csv(std::fs::File::open(dir.path().join("b.csv")).unwrap()).unwrap();
    assert_eq!(stats.len(), 36);
    assert!(stats.iter().all(|s| s.n_masks == 5));

    for (study, rows) in [("distance", 3), ("position", 9), ("sequence", 9)] {
        let out = star(dir.path(), &["entropy", "--study", study, "--h", "3", "--w", "3", "--orders", "60", "--out", "e.csv"]);
        assert_eq!(code(&out), 0, "{study}");
        let text = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
        assert!(text.starts_with("key,mean_entropy_bits,samples\n"));
        let profile = EntropyProfile::read_csv(text.as_bytes()).unwrap();
        assert!(profile.rows.len() >= rows, "{study}: {}", profile.rows.len());
        assert!(profile.rows.iter().all(|r| (0.0..=1.0).contains(&r.mean_entropy_bits)));
    }
    let flat = star(dir.path(), &["entropy", "--study", "position", "--j", "0", "--h", "3", "--w", "3", "--orders", "10", "--out", "z.csv"]);
    assert_eq!(code(&flat), 0);
    let z = EntropyProfile::read_csv(std::fs::File::open(dir.path().join("z.csv")).unwrap()).unwrap();
    assert!(z.rows.iter().all(|r| r.mean_entropy_bits == 1.0));
}

#[test]
fn bench_csv_does_not_depend_on_workers() {
    let dir = TempDir::new().unwrap();
    let mut files = Vec::new();
    for workers in ["1", "2"] {
        let out = format!("b{workers}.csv");
        let args = ["bench", "--h", "8", "--w", "8", "--masks-per-ratio", "8", "--ratios", "0.2,0.7", "--workers", workers, "--out", &out];
        assert_eq!(code(&star(dir.path(), &args)), 0);
        files.push(std::fs::read(dir.path().join(&out)).unwrap());
    }
    assert_eq!(files[0], files[1]);
}
