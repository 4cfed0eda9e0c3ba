//! Shared helpers for the binary-driven test targets.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lane_coreset::config::PipelineConfig;
use lane_coreset::dataset_io::{write_manifest, Manifest, ManifestEntry};
use lane_coreset::image_metrics::{write_pgm, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lane-coreset"))
}

/// Runs the binary and returns its output without checking the status.
pub fn try_run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

/// Runs the binary, panicking with its stderr on failure; returns stdout.
pub fn run(args: &[&str]) -> String {
    let out = try_run(args);
    assert!(
        out.status.success(),
        "lane-coreset {} failed:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

/// Every file under `dir`, keyed by its relative path.
pub fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub fn noise_image(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::new(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Writes `per_entry` noise images for each of the first `entries` scenes
/// of a projected dataset, plus a manifest grouping scenes in pairs.
pub fn image_manifest(root: &Path, data: &Manifest, entries: usize, per_entry: usize) -> PathBuf {
    let img_dir = root.join("images");
    std::fs::create_dir_all(&img_dir).unwrap();
    let mut out = Vec::new();
    for (i, e) in data.entries.iter().take(entries).enumerate() {
        let mut entry = ManifestEntry::new(e.id.clone(), format!("data/{}", e.lane_file));
        for j in 0..per_entry {
            let name = format!("images/{}_{j}.pgm", e.id);
            write_pgm(&root.join(&name), &noise_image(192, 192, (i * 100 + j) as u64)).unwrap();
            entry.image_files.push(name);
        }
        entry.group_id = format!("group{}", i / 2);
        out.push(entry);
    }
    let path = root.join("images.json");
    write_manifest(&Manifest { config: PipelineConfig::default(), entries: out }, &path).unwrap();
    path
}

/// The whole command chain under `root`; returns the concatenated stdout.
pub fn full_pipeline(root: &Path, threads: usize, scenes: usize) -> String {
    let t = threads.to_string();
    let j = |name: &str| root.join(name);
    let mut log = String::new();
    let sc = scenes.to_string();
    log += &run(&["--threads", &t, "generate-map", "--seed", "11", "--scenes", &sc, "--out", p(&j("map.json"))]);
    log += &run(&["--threads", &t, "project", "--map", p(&j("map.json")), "--seed", "11", "--out", p(&j("data"))]);
    let manifest = j("data/manifest.json");
    log += &run(&["--threads", &t, "embed", "--manifest", p(&manifest), "--out", p(&j("basis.txt"))]);
    for policy in ["to-selected", "to-unselected"] {
        log += &run(&[
            "--threads", &t, "lane-select", "--manifest", p(&manifest), "--basis", p(&j("basis.txt")),
            "--k-lanes", "8", "--policy", policy, "--out", p(&j(&format!("lanes-{policy}"))),
        ]);
    }
    log += &run(&["--threads", &t, "oracle", "--lsim", p(&j("lanes-to-selected/similarity.lsim")), "--invert", "--k", "4"]);
    let data = lane_coreset::dataset_io::read_manifest(&manifest).unwrap();
    let images = image_manifest(root, &data, 3, 4);
    log += &run(&[
        "--threads", &t, "image-select", "--manifest", p(&images), "--k-images", "2",
        "--score-size", "176x176", "--out", p(&j("picked")),
    ]);
    // Output paths are echoed; make the log independent of where it ran.
    log.replace(p(root), "<root>")
}
