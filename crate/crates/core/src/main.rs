use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lane_coreset::config::{PipelineConfig, Setting};
use lane_coreset::coreset::{read_lsim, GreedyPolicy};
use lane_coreset::eigenlane::{EigenlaneBasis, Rank};
use lane_coreset::geometry::synthetic::{generate_synthetic_map, write_map, MapParams};
use lane_coreset::image_metrics::SsimParams;
use lane_coreset::pipeline::{self, ImageSelectOptions, LaneSelectOptions};

#[derive(Parser)]
#[command(name = "lane-coreset", version, about = "Diversity-aware coreset selection for lane datasets")]
struct Cli {
    /// Worker threads for pairwise scoring (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic HD-map file.
    GenerateMap {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        scenes: usize,
        #[arg(long, default_value_t = 1)]
        lanes_min: usize,
        #[arg(long, default_value_t = 4)]
        lanes_max: usize,
        /// Largest absolute centerline curvature, 1/m.
        #[arg(long)]
        curvature_max: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project map scenes to lane files, mask rasters and a manifest.
    Project {
        #[arg(long)]
        map: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 4)]
        max_lanes: usize,
        #[arg(long, default_value_t = 3)]
        line_width: usize,
        /// Recorded in the manifest for reproducibility.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the eigenlane basis over every lane in a manifest.
    Embed {
        #[arg(long)]
        manifest: PathBuf,
        /// Basis rank or "auto"; defaults to the manifest setting.
        #[arg(long)]
        rank: Option<Setting<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select K diverse lane masks.
    LaneSelect {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        k_lanes: Option<usize>,
        #[arg(long)]
        kappa: Option<Setting<f64>>,
        #[arg(long)]
        policy: Option<GreedyPolicy>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select K diverse surrounding images per lane-mask group.
    ImageSelect {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        k_images: Option<usize>,
        #[arg(long)]
        policy: Option<GreedyPolicy>,
        /// WIDTHxHEIGHT, or "native" to score at the stored size.
        #[arg(long)]
        score_size: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare greedy selection with exhaustive search.
    Oracle {
        /// Similarity matrix file.
        #[arg(long, conflicts_with_all = ["manifest", "basis"])]
        lsim: Option<PathBuf>,
        /// Treat matrix entries as dissimilarities (weights become max - f).
        #[arg(long, requires = "lsim")]
        invert: bool,
        #[arg(long, requires = "basis")]
        manifest: Option<PathBuf>,
        #[arg(long, requires = "manifest")]
        basis: Option<PathBuf>,
        #[arg(long)]
        kappa: Option<Setting<f64>>,
        #[arg(long)]
        k: usize,
    },
    /// Print the default pipeline configuration.
    Defaults,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 128.0)]
    grid_top: f64,
    #[arg(long, default_value_t = 255.0)]
    grid_bottom: f64,
    #[arg(long, default_value_t = 50)]
    samples: usize,
}

fn parse_size(s: &str) -> Result<Option<(usize, usize)>> {
    if s == "native" {
        return Ok(None);
    }
    let (w, h) = s
        .split_once('x')
        .with_context(|| format!("score size '{s}' is not WIDTHxHEIGHT"))?;
    Ok(Some((w.parse()?, h.parse()?)))
}

fn manifest_config(path: &Path) -> Result<PipelineConfig> {
    Ok(lane_coreset::dataset_io::read_manifest(path)?.config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenerateMap {
            seed,
            scenes,
            lanes_min,
            lanes_max,
            curvature_max,
            out,
        } => {
            let mut params = MapParams {
                lane_count: (lanes_min, lanes_max),
                ..MapParams::default()
            };
            if let Some(c) = curvature_max {
                params.curvature = (-c, c);
            }
            let map = generate_synthetic_map(seed, scenes, &params)?;
            write_map(&out, &map)?;
            println!("wrote {} scenes to {}", map.len(), out.display());
        }
        Command::Project {
            map,
            grid,
            max_lanes,
            line_width,
            seed,
            out,
        } => {
            let mut cfg = PipelineConfig {
                max_lanes,
                line_width,
                seed,
                ..PipelineConfig::default()
            };
            cfg.grid.y_top = grid.grid_top;
            cfg.grid.y_bottom = grid.grid_bottom;
            cfg.grid.samples = grid.samples;
            let s = pipeline::project(&map, &out, &cfg)
                .with_context(|| format!("projecting {}", map.display()))?;
            for id in &s.empty_scenes {
                eprintln!("warning: scene {id} has no visible lanes");
            }
            println!("projected {} scenes, {} lanes total", s.scenes, s.lanes);
        }
        Command::Embed {
            manifest,
            rank,
            out,
        } => {
            let rank = match rank {
                Some(Setting::Fixed(r)) => Rank::Fixed(r),
                Some(Setting::Auto(_)) => Rank::Auto,
                None => manifest_config(&manifest)?.rank(),
            };
            let s = pipeline::embed(&manifest, &out, rank)
                .with_context(|| format!("embedding {}", manifest.display()))?;
            println!("L = {} lanes, P = {} samples", s.lanes, s.samples);
            println!("R = {} (energy captured {:.6})", s.rank, s.energy);
        }
        Command::LaneSelect {
            manifest,
            basis,
            k_lanes,
            kappa,
            policy,
            out,
        } => {
            let cfg = manifest_config(&manifest)?;
            let opts = LaneSelectOptions {
                k_lanes: k_lanes.unwrap_or(cfg.k_lanes),
                kappa: kappa.unwrap_or(cfg.kappa),
                policy: policy.unwrap_or(cfg.policy),
            };
            let s = pipeline::lane_select(&manifest, &basis, &opts, &out)
                .with_context(|| format!("selecting lanes from {}", manifest.display()))?;
            println!("masks: {}, kappa: {:.6}, policy: {}", s.masks, s.kappa, opts.policy);
            println!("objective (max_f - f): {:.6}", s.objective);
            println!("mean pairwise f of selection: {:.6}", s.mean_pairwise_f);
            println!("selected: {}", s.selected.join(" "));
        }
        Command::ImageSelect {
            manifest,
            k_images,
            policy,
            score_size,
            out,
        } => {
            let cfg = manifest_config(&manifest)?;
            let score_size = match score_size {
                Some(s) => parse_size(&s)?,
                None => Some((cfg.frame_width as usize, cfg.frame_height as usize)),
            };
            let opts = ImageSelectOptions {
                k_images: k_images.unwrap_or(cfg.k_images),
                policy: policy.unwrap_or(cfg.policy),
                score_size,
                ssim: SsimParams::default(),
            };
            let groups = pipeline::image_select(&manifest, &opts, &out)
                .with_context(|| format!("selecting images from {}", manifest.display()))?;
            for g in &groups {
                println!(
                    "{}: {} of {} images, objective {:.6}",
                    g.group_id,
                    g.selected.len(),
                    g.candidates,
                    g.objective
                );
            }
        }
        Command::Oracle {
            lsim,
            invert,
            manifest,
            basis,
            kappa,
            k,
        } => {
            let graph = match (lsim, manifest, basis) {
                (Some(path), _, _) => {
                    let g = read_lsim(&path)?;
                    if invert {
                        g.inverted()
                    } else {
                        g
                    }
                }
                (None, Some(m), Some(b)) => {
                    let data = pipeline::load_dataset(&m)?;
                    let kappa = kappa.unwrap_or(data.manifest.config.kappa);
                    let basis = EigenlaneBasis::read(&b)?;
                    pipeline::mask_graph(&data, &basis, kappa)?.0.inverted()
                }
                _ => bail!("pass --lsim, or --manifest with --basis"),
            };
            let report = pipeline::oracle(&graph, k)?;
            println!(
                "exhaustive: objective {:.9} selected {:?}",
                report.exhaustive.objective, report.exhaustive.selected
            );
            for row in &report.rows {
                println!(
                    "{}: objective {:.9} ratio {:.9} selected {:?}",
                    row.policy, row.greedy.objective, row.ratio, row.greedy.selected
                );
            }
        }
        Command::Defaults => {
            let v = serde_json::to_value(PipelineConfig::default())?;
            print!("{}", pipeline::json_text(&v));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .expect("thread pool");
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
