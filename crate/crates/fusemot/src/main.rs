use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fusemot::ops::{complementary_degraders, Inputs, NodeKind};
use fusemot::pipeline::{export_outputs, run_graph, Graph, NodeStatus, RunOptions};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "fusemot", version, about = "Multi-tracker 3D fusion and evaluation for platform monitoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run node graphs.
    Pipeline {
        #[command(subcommand)]
        command: PipelineCommand,
    },
    /// Evaluate every combination of the given track files.
    Sweep(SweepArgs),
    /// Fit the ground plane from walkable pixels.
    Calibrate(CalibrateArgs),
    /// Lift 2D tracks to plane-frame 3D boxes.
    Lift(LiftArgs),
    /// Track people on occupancy maps built from depth.
    Track3d(Track3dArgs),
    /// Fuse several 3D track files.
    Fuse(FuseArgs),
    /// Score track files against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic scene with degraded tracker outputs.
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum PipelineCommand {
    Run {
        graph: PathBuf,
        #[arg(long, env = "FUSEMOT_CACHE_DIR")]
        cache_dir: PathBuf,
        /// Copy each node's outputs to `<dir>/<node_id>/`.
        #[arg(long)]
        export: Option<PathBuf>,
        /// Print the run log as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    sources: Vec<String>,
    #[arg(long)]
    gt: String,
    /// CSV path; a JSON copy is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "scene")]
    scene: String,
    /// Plane distance gate in meters.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    detections: String,
    #[arg(long, default_value = "depth")]
    depth: String,
    #[arg(long, default_value = "calibration.json")]
    calibration: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    mask_threshold: Option<u32>,
    #[arg(long)]
    stride: Option<u32>,
    #[arg(long)]
    ransac_iterations: Option<u32>,
    #[arg(long)]
    inlier_threshold: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the plane even when it violates the priors.
    #[arg(long)]
    allow_invalid: bool,
}

#[derive(Args)]
struct LiftArgs {
    #[arg(long)]
    detections: String,
    #[arg(long, default_value = "depth")]
    depth: String,
    #[arg(long, default_value = "calibration.json")]
    calibration: String,
    #[arg(long, default_value = "plane.json")]
    plane: String,
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Track3dArgs {
    #[arg(long, default_value = "depth")]
    depth: String,
    #[arg(long, default_value = "calibration.json")]
    calibration: String,
    #[arg(long, default_value = "plane.json")]
    plane: String,
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    cell_size: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FuseArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    tracks: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    output: Option<String>,
    /// Annotation file with a safety line; adds a violation report.
    #[arg(long)]
    safety_line: Option<String>,
    #[arg(long)]
    iou_threshold: Option<f64>,
    #[arg(long)]
    ioe_threshold: Option<f64>,
    #[arg(long)]
    staleness_limit: Option<u32>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    tracks: Vec<String>,
    #[arg(long)]
    gt: String,
    #[arg(long)]
    out: PathBuf,
    /// Evaluate all non-empty subsets of the tracks.
    #[arg(long)]
    combinations: bool,
    /// `plane` (.trk files) or `image` (MOT files).
    #[arg(long, default_value = "plane")]
    space: String,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    scene: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario JSON; a random platform scene when absent.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    frames: Option<u32>,
    /// JSON array of 3D degrader configurations.
    #[arg(long)]
    degraders: Option<PathBuf>,
    /// JSON array of 2D degrader configurations.
    #[arg(long)]
    degraders_2d: Option<PathBuf>,
    /// Four complementary 3D sources, the last with extra false positives.
    #[arg(long, conflicts_with = "degraders")]
    complementary: bool,
    /// Safety line for annotations.json as `x,y` plane points, e.g. `4,5;-4,5`.
    #[arg(long, value_delimiter = ';', allow_hyphen_values = true)]
    safety_line: Option<Vec<String>>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cwd = std::env::current_dir()?;
    match cli.command {
        Command::Pipeline { command: PipelineCommand::Run { graph, cache_dir, export, json } } => {
            let g = Graph::read(&graph)?;
            let base_dir = graph.parent().map(Path::to_path_buf).filter(|p| !p.as_os_str().is_empty()).unwrap_or(cwd);
            let report = run_graph(&g, &RunOptions { base_dir, cache_dir })?;
            if let Some(dest) = export {
                export_outputs(&report, &dest)?;
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for n in &report.nodes {
                    let status = match n.status {
                        NodeStatus::Hit => "cached",
                        NodeStatus::Executed => "executed",
                    };
                    println!("{:<20} {:<10} {:<9} {}", n.node_id, n.kind.name(), status, n.output.display());
                }
                println!("{} of {} nodes executed", report.executed().len(), report.nodes.len());
            }
        }
        Command::Sweep(a) => {
            let (dir, name) = split_output(&a.out, "csv")?;
            let mut p = params(json!({"tracks": a.sources, "gt": a.gt, "combinations": true, "scene": a.scene, "output": name}));
            put(&mut p, "threshold", a.threshold);
            run(NodeKind::Eval, p, &cwd, &dir)?;
        }
        Command::Calibrate(a) => {
            let mut p = params(json!({"detections": a.detections, "depth": a.depth, "calibration": a.calibration, "require_valid": !a.allow_invalid}));
            put(&mut p, "mask_threshold", a.mask_threshold);
            put(&mut p, "stride", a.stride);
            let mut fit = Map::new();
            put(&mut fit, "ransac_iterations", a.ransac_iterations);
            put(&mut fit, "inlier_threshold", a.inlier_threshold);
            put(&mut fit, "rng_seed", a.seed);
            p.insert("fit".into(), Value::Object(fit));
            run(NodeKind::Calibrate, p, &cwd, &a.out)?;
        }
        Command::Lift(a) => {
            let mut p = params(json!({"detections": a.detections, "depth": a.depth, "calibration": a.calibration, "plane": a.plane}));
            put(&mut p, "source", a.source);
            run(NodeKind::Lift, p, &cwd, &a.out)?;
        }
        Command::Track3d(a) => {
            let mut p = params(json!({"depth": a.depth, "calibration": a.calibration, "plane": a.plane}));
            put(&mut p, "source", a.source);
            if let Some(c) = a.cell_size {
                p.insert("grid".into(), json!({"cell_size": c}));
            }
            run(NodeKind::Track3d, p, &cwd, &a.out)?;
        }
        Command::Fuse(a) => {
            let mut p = params(json!({"tracks": a.tracks}));
            put(&mut p, "output", a.output);
            put(&mut p, "safety_line", a.safety_line);
            let mut fusion = Map::new();
            put(&mut fusion, "iou_threshold", a.iou_threshold);
            put(&mut fusion, "ioe_threshold", a.ioe_threshold);
            put(&mut fusion, "staleness_limit", a.staleness_limit);
            p.insert("fusion".into(), Value::Object(fusion));
            run(NodeKind::Fuse, p, &cwd, &a.out)?;
        }
        Command::Eval(a) => {
            let mut p = params(json!({"tracks": a.tracks, "gt": a.gt, "combinations": a.combinations, "space": a.space}));
            put(&mut p, "threshold", a.threshold);
            put(&mut p, "scene", a.scene);
            run(NodeKind::Eval, p, &cwd, &a.out)?;
        }
        Command::Synth(a) => {
            let mut p = Map::new();
            put(&mut p, "scenario", a.scenario);
            put(&mut p, "seed", a.seed);
            put(&mut p, "agents", a.agents);
            put(&mut p, "frames", a.frames);
            if let Some(path) = a.degraders {
                p.insert("degraders_3d".into(), read_json(&path)?);
            } else if a.complementary {
                p.insert("degraders_3d".into(), serde_json::to_value(complementary_degraders(a.seed.unwrap_or(0)))?);
            }
            if let Some(points) = a.safety_line {
                p.insert("safety_line".into(), serde_json::to_value(parse_points(&points)?)?);
            }
            if let Some(path) = a.degraders_2d {
                p.insert("degraders_2d".into(), read_json(&path)?);
            }
            run(NodeKind::Synth, p, &cwd, &a.out)?;
        }
    }
    Ok(())
}

fn params(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("literal objects"),
    }
}

fn put<T: serde::Serialize>(m: &mut Map<String, Value>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        m.insert(key.to_string(), serde_json::to_value(v).expect("plain values serialize"));
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_points(points: &[String]) -> Result<Vec<[f64; 2]>> {
    points
        .iter()
        .map(|pt| match pt.split(',').map(|c| c.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>() {
            Ok(c) if c.len() == 2 => Ok([c[0], c[1]]),
            _ => bail!("bad point {pt:?}, expected x,y"),
        })
        .collect()
}

fn split_output(path: &Path, ext: &str) -> Result<(PathBuf, String)> {
    if path.extension().is_none_or(|e| e != ext) {
        bail!("{} must end in .{ext}", path.display());
    }
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok((dir, stem))
}

fn run(kind: NodeKind, p: Map<String, Value>, cwd: &Path, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    kind.execute(&p, &Inputs::standalone(cwd), out).with_context(|| format!("{} failed", kind.name()))?;
    Ok(())
}
