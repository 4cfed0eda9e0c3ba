//! The curation pipeline behind the command-line subcommands: project map
//! scenes to lane masks, fit the eigenlane basis, select diverse lane masks,
//! select diverse surrounding images, and check greedy against exhaustive
//! selection.
//!
//! Every stage writes only relative paths and fixed-order data, so its
//! outputs are byte-identical across runs and thread counts.

use std::path::{Component, Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{PipelineConfig, Setting};
use crate::coreset::{
    build_graph, exhaustive_select, greedy_select, objective, write_lsim, GreedyPolicy,
    SelectionResult, SimilarityGraph,
};
use crate::dataset_io::{
    manifest_dir, rasterize_mask, read_lane_file, read_manifest, write_lane_file, write_manifest,
    Manifest, ManifestEntry,
};
use crate::eigenlane::{fit_basis, EigenlaneBasis, LanePool, Rank};
use crate::error::{Error, Result};
use crate::geometry::synthetic::read_map;
use crate::geometry::{extract_lane_mask, LaneMask};
use crate::image_metrics::{load_gray, ms_ssim, resize_for_scoring, write_pgm, GrayImage, SsimParams};
use crate::mask_similarity::{default_kappa, mask_similarity_embedded, EmbeddedMask};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SELECTION_FILE: &str = "selection.json";
pub const LSIM_FILE: &str = "similarity.lsim";
pub const IMAGE_SELECTION_FILE: &str = "image_selection.json";

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with sorted keys and a trailing LF.
pub fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON value serializes");
    s.push('\n');
    s
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    std::fs::write(path, json_text(value)).map_err(|e| Error::io(path, e))
}

fn check_file_stem(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
    if ok {
        Ok(())
    } else {
        Err(Error::data(format!(
            "scene id \"{id}\" cannot be used as a file name"
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectSummary {
    pub scenes: usize,
    pub lanes: usize,
    /// Scenes whose lane mask came out empty.
    pub empty_scenes: Vec<String>,
}

/// Projects every scene of a map file into a lane file and a mask raster,
/// and writes a manifest for them under `out_dir`.
pub fn project(map_path: &Path, out_dir: &Path, cfg: &PipelineConfig) -> Result<ProjectSummary> {
    cfg.validate()?;
    let grid = cfg.grid.to_grid()?;
    let scenes = read_map(map_path)?;
    for s in &scenes {
        check_file_stem(&s.scene_id)?;
        grid.check_height(s.camera.height)
            .map_err(|e| Error::data(format!("scene {}: {e}", s.scene_id)))?;
    }

    let masks: Vec<LaneMask> = scenes
        .par_iter()
        .map(|s| extract_lane_mask(&s.scene_id, &s.lanes, &s.camera, &grid, cfg.max_lanes))
        .collect();

    let lanes_dir = out_dir.join("lanes");
    let masks_dir = out_dir.join("masks");
    create_dir(&lanes_dir)?;
    create_dir(&masks_dir)?;

    let mut entries = Vec::with_capacity(scenes.len());
    for (scene, mask) in scenes.iter().zip(&masks) {
        let lane_rel = format!("lanes/{}.txt", scene.scene_id);
        write_lane_file(mask, &grid, &out_dir.join(&lane_rel))?;
        let raster = rasterize_mask(
            mask,
            &grid,
            scene.camera.width as usize,
            scene.camera.height as usize,
            cfg.line_width,
        );
        write_pgm(&masks_dir.join(format!("{}.pgm", scene.scene_id)), &raster)?;
        entries.push(ManifestEntry::new(scene.scene_id.clone(), lane_rel));
    }
    let manifest = Manifest {
        config: cfg.clone(),
        entries,
    };
    manifest.validate(Some(out_dir))?;
    write_manifest(&manifest, &out_dir.join(MANIFEST_FILE))?;

    Ok(ProjectSummary {
        scenes: scenes.len(),
        lanes: masks.iter().map(LaneMask::len).sum(),
        empty_scenes: masks
            .iter()
            .filter(|m| m.is_empty())
            .map(|m| m.scene_id.clone())
            .collect(),
    })
}

/// A manifest with its lane masks loaded.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub manifest: Manifest,
    pub base: PathBuf,
    pub masks: Vec<LaneMask>,
    /// Label lines skipped as degenerate, over all files.
    pub skipped_lines: usize,
}

pub fn load_dataset(manifest_path: &Path) -> Result<LoadedDataset> {
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_dir(manifest_path);
    manifest.validate(Some(&base))?;
    let grid = manifest.config.grid.to_grid()?;
    let files = manifest
        .entries
        .par_iter()
        .map(|e| read_lane_file(&base.join(&e.lane_file), &grid, &e.id))
        .collect::<Result<Vec<_>>>()?;
    let skipped_lines = files.iter().map(|f| f.skipped).sum();
    Ok(LoadedDataset {
        manifest,
        base,
        masks: files.into_iter().map(|f| f.mask).collect(),
        skipped_lines,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedSummary {
    pub lanes: usize,
    pub samples: usize,
    pub rank: usize,
    pub energy: f64,
}

/// Fits the eigenlane basis over every lane of every mask in the manifest.
pub fn embed(manifest_path: &Path, basis_out: &Path, rank: Rank) -> Result<EmbedSummary> {
    let data = load_dataset(manifest_path)?;
    let pool = LanePool::from_masks(&data.masks)
        .map_err(|e| Error::data(format!("{}: {e}", manifest_path.display())))?;
    let basis = fit_basis(&pool, rank)?;
    basis.write(basis_out)?;
    Ok(EmbedSummary {
        lanes: pool.len(),
        samples: pool.samples(),
        rank: basis.rank(),
        energy: basis.energy_captured(),
    })
}

#[derive(Debug, Clone)]
pub struct LaneSelectOptions {
    pub k_lanes: usize,
    pub kappa: Setting<f64>,
    pub policy: GreedyPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneSelectSummary {
    pub masks: usize,
    pub kappa: f64,
    pub selected: Vec<String>,
    /// Greedy objective on the similarity weights `max_f - f`.
    pub objective: f64,
    pub mean_pairwise_f: f64,
}

/// Mask-to-mask similarity graph (raw `f`) for a loaded dataset.
pub fn mask_graph(data: &LoadedDataset, basis: &EigenlaneBasis, kappa: Setting<f64>) -> Result<(SimilarityGraph, f64)> {
    if let Some(p) = data.masks.iter().find_map(LaneMask::samples) {
        if p != basis.samples() {
            return Err(Error::param(format!(
                "manifest grid has {p} samples, basis has {}",
                basis.samples()
            )));
        }
    }
    let embedded = data
        .masks
        .par_iter()
        .map(|m| EmbeddedMask::new(m, basis))
        .collect::<Result<Vec<_>>>()?;
    let kappa = kappa.fixed().unwrap_or_else(|| default_kappa(&embedded));
    let labels = data.manifest.entries.iter().map(|e| e.id.clone()).collect();
    let graph = build_graph(&embedded, labels, |a, b| mask_similarity_embedded(a, b, kappa))?;
    Ok((graph, kappa))
}

/// Mean of `f` over all pairs inside `subset`.
pub fn mean_pairwise(g: &SimilarityGraph, subset: &[usize]) -> Result<f64> {
    let pairs = subset.len() * subset.len().saturating_sub(1) / 2;
    if pairs == 0 {
        return Ok(0.0);
    }
    Ok(objective(g, subset)? / pairs as f64)
}

fn selection_json(result: &SelectionResult, g: &SimilarityGraph) -> Value {
    json!({
        "indices": result.selected,
        "selected": result.selected.iter().map(|&i| g.labels()[i].clone()).collect::<Vec<_>>(),
        "objective": result.objective,
        "rule": result.rule.to_string(),
    })
}

/// Selects `k_lanes` mutually dissimilar lane masks. Writes the raw `f`
/// matrix and the selection under `out_dir`.
pub fn lane_select(
    manifest_path: &Path,
    basis_path: &Path,
    opts: &LaneSelectOptions,
    out_dir: &Path,
) -> Result<LaneSelectSummary> {
    let data = load_dataset(manifest_path)?;
    let n = data.masks.len();
    if opts.k_lanes < 2 || opts.k_lanes >= n {
        return Err(Error::param(format!(
            "k_lanes = {} must satisfy 2 <= K < N = {n}",
            opts.k_lanes
        )));
    }
    let basis = EigenlaneBasis::read(basis_path)?;
    let (f_graph, kappa) = mask_graph(&data, &basis, opts.kappa)?;
    let weights = f_graph.inverted();
    let result = greedy_select(&weights, opts.k_lanes, opts.policy)?;
    let mean_f = mean_pairwise(&f_graph, &result.selected)?;

    create_dir(out_dir)?;
    write_lsim(&out_dir.join(LSIM_FILE), &f_graph)?;
    let mut config = data.manifest.config.clone();
    config.k_lanes = opts.k_lanes;
    config.kappa = opts.kappa;
    config.policy = opts.policy;
    let mut doc = selection_json(&result, &f_graph);
    doc["config"] = serde_json::to_value(&config).expect("config serializes");
    doc["kappa"] = json!(kappa);
    doc["max_f"] = json!(f_graph.max_weight());
    doc["mean_pairwise_f"] = json!(mean_f);
    doc["weights"] = json!("max_f_minus_f");
    doc["basis_rank"] = json!(basis.rank());
    write_json(&out_dir.join(SELECTION_FILE), &doc)?;

    Ok(LaneSelectSummary {
        masks: n,
        kappa,
        selected: result
            .selected
            .iter()
            .map(|&i| f_graph.labels()[i].clone())
            .collect(),
        objective: result.objective,
        mean_pairwise_f: mean_f,
    })
}

#[derive(Debug, Clone)]
pub struct ImageSelectOptions {
    pub k_images: usize,
    pub policy: GreedyPolicy,
    /// Scoring size; `None` scores images at their native size.
    pub score_size: Option<(usize, usize)>,
    pub ssim: SsimParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSelection {
    pub group_id: String,
    pub candidates: usize,
    pub selected: Vec<String>,
    pub objective: f64,
}

fn load_for_scoring(path: &Path, size: Option<(usize, usize)>) -> Result<GrayImage> {
    let img = load_gray(path)?;
    match size {
        Some((w, h)) => resize_for_scoring(&img, w, h),
        None => Ok(img),
    }
}

/// Path of `target` relative to the directory `from`; both absolute.
fn relative_path(from: &Path, target: &Path) -> String {
    let from: Vec<Component> = from.components().collect();
    let to: Vec<Component> = target.components().collect();
    let common = from.iter().zip(&to).take_while(|(a, b)| a == b).count();
    let mut parts: Vec<String> = vec!["..".to_string(); from.len() - common];
    parts.extend(to[common..].iter().map(|c| c.as_os_str().to_string_lossy().into_owned()));
    parts.join("/")
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| Error::io(path, e))
}

/// Selects `k_images` mutually dissimilar images per group by MS-SSIM and
/// writes a manifest that keeps only the selected images.
pub fn image_select(manifest_path: &Path, opts: &ImageSelectOptions, out_dir: &Path) -> Result<Vec<GroupSelection>> {
    opts.ssim.validate()?;
    if opts.k_images == 0 {
        return Err(Error::param("k_images must be at least 1"));
    }
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_dir(manifest_path);
    manifest.validate(Some(&base))?;

    let groups = manifest.groups();
    for (gid, entries) in &groups {
        let n: usize = entries.iter().map(|e| e.image_files.len()).sum();
        if n < opts.k_images {
            return Err(Error::data(format!(
                "group \"{gid}\" has {n} candidate images, need {}",
                opts.k_images
            )));
        }
    }

    let mut results = Vec::with_capacity(groups.len());
    for (gid, entries) in &groups {
        let files: Vec<String> = entries.iter().flat_map(|e| e.image_files.iter().cloned()).collect();
        let (selected, objective) = if opts.k_images == 1 {
            (vec![0], 0.0)
        } else {
            let images = files
                .par_iter()
                .map(|f| load_for_scoring(&base.join(f), opts.score_size))
                .collect::<Result<Vec<_>>>()?;
            let graph = build_graph(&images, files.clone(), |a, b| {
                ms_ssim(a, b, &opts.ssim)
            })
            .map_err(|e| Error::data(format!("group \"{gid}\": {e}")))?;
            let r = greedy_select(&graph, opts.k_images, opts.policy)?;
            (r.selected, r.objective)
        };
        results.push(GroupSelection {
            group_id: gid.clone(),
            candidates: files.len(),
            selected: selected.iter().map(|&i| files[i].clone()).collect(),
            objective,
        });
    }

    create_dir(out_dir)?;
    let (abs_base, abs_out) = (absolute(&base)?, absolute(out_dir)?);
    let rebase = |f: &str| relative_path(&abs_out, &abs_base.join(f));
    let mut out_manifest = manifest.clone();
    out_manifest.config.k_images = opts.k_images;
    out_manifest.config.policy = opts.policy;
    for entry in &mut out_manifest.entries {
        let group = results
            .iter()
            .find(|g| g.group_id == entry.group_id)
            .expect("every entry belongs to a group");
        entry.image_files.retain(|f| group.selected.contains(f));
        entry.image_files = entry.image_files.iter().map(|f| rebase(f)).collect();
        entry.lane_file = rebase(&entry.lane_file);
    }
    write_manifest(&out_manifest, &out_dir.join(MANIFEST_FILE))?;

    let doc = json!({
        "k_images": opts.k_images,
        "policy": opts.policy.to_string(),
        "score_size": opts.score_size.map(|(w, h)| json!([w, h])),
        "groups": results.iter().map(|g| json!({
            "group_id": g.group_id,
            "candidates": g.candidates,
            "selected": g.selected,
            "objective": g.objective,
        })).collect::<Vec<_>>(),
    });
    write_json(&out_dir.join(IMAGE_SELECTION_FILE), &doc)?;
    Ok(results)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub policy: GreedyPolicy,
    pub greedy: SelectionResult,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub exhaustive: SelectionResult,
    pub rows: Vec<OracleRow>,
}

/// Greedy objective over exhaustive objective; 1 when both are zero.
pub fn objective_ratio(greedy: f64, optimum: f64) -> f64 {
    if optimum == 0.0 {
        if greedy == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        greedy / optimum
    }
}

/// Runs both greedy policies and the exhaustive search on `g`.
pub fn oracle(g: &SimilarityGraph, k: usize) -> Result<OracleReport> {
    let exhaustive = exhaustive_select(g, k)?;
    let rows = [GreedyPolicy::ToSelected, GreedyPolicy::ToUnselected]
        .into_iter()
        .map(|policy| {
            let greedy = greedy_select(g, k, policy)?;
            Ok(OracleRow {
                policy,
                ratio: objective_ratio(greedy.objective, exhaustive.objective),
                greedy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport { exhaustive, rows })
}
