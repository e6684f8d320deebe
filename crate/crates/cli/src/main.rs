//! `shapegraph`: ingest digit images, inspect every stage of the graph
//! front end, train feature-class models and evaluate them.

mod overlay;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use shapegraph::features::Model;
use shapegraph::pipeline::data::{load_pool, FrontEnd, Split, DEFAULT_IMAGES, DEFAULT_LABELS};
use shapegraph::pipeline::{evaluate_multi, evaluate_single, recognizer_of, train, MultiSceneConfig, SingleSceneConfig, TrainConfig};
use shapegraph::primitives::{decompose, DecomposeConfig, PrimitiveConfig};
use shapegraph::raster::{compose_scene, load_idx, random_layout, read_pbm, read_pgm, write_gray_pgm, write_pbm, BinaryImage, SceneManifestRecord};
use shapegraph::recognizer::{classify_scene, classify_single, recognize_noisy, Detection, SearchBudget};
use shapegraph::skeleton_graph::split_components;
use shapegraph::thinning::{recurrent_filter, thin, FilterConfig};

use overlay::{Canvas, INK};

#[derive(Parser, Debug)]
#[command(name = "shapegraph", version, about = "Graph-based digit recognition from skeleton primitives")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest chord-distance ratio of a line primitive.
    #[arg(long, global = true)]
    line_threshold: Option<f64>,
    /// Gray level above which a pixel is ink.
    #[arg(long, global = true)]
    binarize_threshold: Option<f32>,
    /// Pixel upscaling applied before thinning.
    #[arg(long, global = true)]
    upscale_factor: Option<usize>,
    /// Largest validation false-alarm rate of a kept class.
    #[arg(long, global = true)]
    fa_ceiling: Option<f64>,
    /// Search nodes per class per component.
    #[arg(long, global = true)]
    budget: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct Data {
    /// IDX image file (gzip accepted).
    #[arg(long, default_value = DEFAULT_IMAGES)]
    images: PathBuf,
    /// IDX label file (gzip accepted).
    #[arg(long, default_value = DEFAULT_LABELS)]
    labels: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct TestSlice {
    /// Test images per digit.
    #[arg(long, default_value_t = 50)]
    per_digit: usize,
    /// Position, among each digit's images, of the first test image.
    #[arg(long, default_value_t = 300)]
    test_start: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump IDX images as PGM files.
    Ingest {
        #[arg(long, default_value = DEFAULT_IMAGES)]
        images: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Only the first N images.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Binarize (PGM input) and thin an image to a one-pixel skeleton (PBM).
    Thin { input: PathBuf, #[arg(long)] out: PathBuf },
    /// Build the simplified graph of an image: JSON plus an optional overlay.
    Simplify {
        input: PathBuf,
        #[arg(long)]
        json: PathBuf,
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Decompose every component of an image into primitives (JSON lines).
    Decompose {
        input: PathBuf,
        /// Covers kept per component.
        #[arg(long, default_value_t = 10)]
        max: usize,
        /// Largest number of primitives in one cover.
        #[arg(long, default_value_t = 8)]
        max_primitives: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a model and write it as JSON.
    Train {
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        out: PathBuf,
        /// Training images per digit (the first ones of each digit).
        #[arg(long, default_value_t = 100)]
        examples_per_digit: usize,
        /// Validation images per digit, following the training slice.
        #[arg(long, default_value_t = 100)]
        validation_per_digit: usize,
        /// Source examples drawn per digit.
        #[arg(long, default_value_t = TrainConfig::default().features_per_digit)]
        features_per_digit: usize,
        /// Also write the training report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Single-digit accuracy with random placement and scale.
    EvaluateSingle {
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        slice: TestSlice,
        /// Classify the binarized digits as they are.
        #[arg(long)]
        centered: bool,
        #[arg(long, default_value_t = 1000)]
        canvas: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Per-digit accuracy in non-overlapping multi-digit scenes.
    EvaluateMulti {
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        slice: TestSlice,
        #[arg(long, default_value_t = 3)]
        digits_per_scene: usize,
        #[arg(long, default_value_t = 2000)]
        canvas: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Detections in one image as JSON lines.
    Recognize {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Treat each connected component as its own object.
        #[arg(long)]
        scene: bool,
        /// Retry on recurrent-filter iterations until something is found.
        #[arg(long, conflicts_with = "scene")]
        denoise: bool,
        /// Write the image with detection boxes as PGM.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Compose non-overlapping multi-digit scenes with a JSON-lines manifest.
    GenScenes {
        #[command(flatten)]
        data: Data,
        #[command(flatten)]
        slice: TestSlice,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        digits_per_scene: usize,
        #[arg(long, default_value_t = 2000)]
        canvas: usize,
        #[arg(long, default_value_t = 84)]
        min_size: usize,
        #[arg(long, default_value_t = 560)]
        max_size: usize,
    },
    /// Write every recurrent-filter iteration as a numbered PBM.
    Denoise {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = FilterConfig::default().kernel)]
        kernel: usize,
        #[arg(long, default_value_t = FilterConfig::default().threshold)]
        threshold: f64,
        #[arg(long, default_value_t = FilterConfig::default().iterations)]
        iterations: usize,
    },
}

/// A bad argument combination or value found after parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

enum Status {
    Done,
    Exhausted,
}

impl Global {
    fn validate(&self) -> Result<()> {
        if let Some(t) = self.line_threshold {
            if !(t > 0.0 && t < 1.0) {
                return Err(usage("--line-threshold must lie in (0, 1)"));
            }
        }
        if let Some(t) = self.binarize_threshold {
            if !(0.0..1.0).contains(&t) {
                return Err(usage("--binarize-threshold must lie in [0, 1)"));
            }
        }
        if self.upscale_factor == Some(0) {
            return Err(usage("--upscale-factor must be at least 1"));
        }
        if let Some(f) = self.fa_ceiling {
            if !(0.0..=1.0).contains(&f) {
                return Err(usage("--fa-ceiling must lie in [0, 1]"));
            }
        }
        if self.budget == Some(0) {
            return Err(usage("--budget must be at least 1"));
        }
        Ok(())
    }

    fn node_limit(&self) -> usize {
        self.budget.unwrap_or(SearchBudget::default().node_limit)
    }

    fn front(&self) -> FrontEnd {
        let d = FrontEnd::default();
        FrontEnd {
            upscale_factor: self.upscale_factor.unwrap_or(d.upscale_factor),
            binarize_threshold: self.binarize_threshold.unwrap_or(d.binarize_threshold),
            ..d
        }
    }

    fn primitives(&self) -> PrimitiveConfig {
        let d = PrimitiveConfig::default();
        PrimitiveConfig {
            line_threshold: self.line_threshold.unwrap_or(d.line_threshold),
            ..d
        }
    }

    /// Loads a model; flags given explicitly override its stored settings.
    fn model(&self, path: &Path) -> Result<Model> {
        let mut m = Model::load(path).with_context(|| format!("loading model {}", path.display()))?;
        if let Some(t) = self.line_threshold {
            m.config.line_threshold = t;
        }
        if let Some(t) = self.binarize_threshold {
            m.config.binarize_threshold = f64::from(t);
        }
        if let Some(f) = self.upscale_factor {
            m.config.upscale_factor = f;
        }
        Ok(m)
    }
}

/// A PBM is used as is; a PGM goes through the front end.
fn load_mask(path: &Path, front: &FrontEnd) -> Result<BinaryImage> {
    let head = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    match head.get(..2) {
        Some(b"P4") => Ok(read_pbm(path)?),
        Some(b"P5") => Ok(front.binary(&read_pgm(path)?)),
        _ => anyhow::bail!("{}: expected a binary PBM (P4) or PGM (P5) file", path.display()),
    }
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut w = writer(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn test_set(data: &Data, slice: &TestSlice) -> Result<Vec<shapegraph::raster::GrayImage>> {
    if slice.per_digit == 0 {
        return Err(usage("--per-digit must be at least 1"));
    }
    let pool = load_pool(&data.images, &data.labels)?;
    let split = Split {
        test_start: slice.test_start,
        ..Split::default()
    };
    Ok(split.test(&pool, slice.per_digit))
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct DetectionLine<'a> {
    label: u8,
    class_id: &'a str,
    coverage: f64,
    bbox: [f64; 4],
    component: usize,
    iteration: Option<usize>,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct ComponentDecomposition<'a> {
    component: usize,
    graph: &'a shapegraph::skeleton_graph::SimplifiedGraph<f64>,
    exhausted: bool,
    decompositions: Vec<shapegraph::primitives::Decomposition<f64>>,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct ManifestLine<'a> {
    scene: &'a str,
    #[serde(flatten)]
    record: SceneManifestRecord,
}

fn run(cli: Cli) -> Result<Status> {
    let g = &cli.global;
    g.validate()?;
    match cli.command {
        Command::Ingest { images, labels, out, limit } => {
            let imgs = load_idx(&images, labels.as_deref())?;
            fs::create_dir_all(&out)?;
            let n = limit.unwrap_or(imgs.len()).min(imgs.len());
            for (i, img) in imgs.iter().take(n).enumerate() {
                let name = match img.label {
                    Some(l) => format!("{i:05}-{l}.pgm"),
                    None => format!("{i:05}.pgm"),
                };
                write_gray_pgm(&out.join(name), img)?;
            }
            eprintln!("wrote {n} images to {}", out.display());
        }
        Command::Thin { input, out } => {
            let mask = load_mask(&input, &g.front())?;
            let skeleton = thin(&mask);
            write_pbm(&out, &skeleton)?;
            eprintln!("{} black pixels thinned to {}", mask.black_count(), skeleton.black_count());
        }
        Command::Simplify { input, json, overlay } => {
            let front = g.front();
            let mask = load_mask(&input, &front)?;
            let graph = front.graph(&mask);
            write_json(&graph, Some(&json))?;
            if let Some(path) = overlay {
                let mut c = Canvas::over(&mask);
                c.graph(&graph);
                c.save(&path)?;
            }
            eprintln!("{} vertices, {} edges", graph.vertices().len(), graph.edges().len());
        }
        Command::Decompose { input, max, max_primitives, out } => {
            if max == 0 || max_primitives == 0 {
                return Err(usage("--max and --max-primitives must be at least 1"));
            }
            let front = g.front();
            let mask = load_mask(&input, &front)?;
            let cfg = DecomposeConfig {
                primitives: g.primitives(),
                max_decompositions: max,
                max_primitives,
                ..DecomposeConfig::default()
            };
            let mut w = writer(out.as_deref())?;
            let components: Vec<_> = split_components(&front.graph(&mask)).into_iter().filter(|c| !c.edges().is_empty()).collect();
            for (k, comp) in components.iter().enumerate() {
                let all: Vec<usize> = (0..comp.edges().len()).collect();
                let r = decompose(comp, &all, &cfg);
                let line = ComponentDecomposition {
                    component: k,
                    graph: comp,
                    exhausted: r.exhausted,
                    decompositions: r.decompositions,
                };
                serde_json::to_writer(&mut w, &line)?;
                writeln!(w)?;
            }
            w.flush()?;
        }
        Command::Train {
            data,
            out,
            examples_per_digit,
            validation_per_digit,
            features_per_digit,
            report,
        } => {
            if examples_per_digit == 0 || validation_per_digit == 0 || features_per_digit == 0 {
                return Err(usage("per-digit counts must be at least 1"));
            }
            let d = TrainConfig::default();
            let cfg = TrainConfig {
                examples_per_digit,
                features_per_digit,
                fa_ceiling: g.fa_ceiling.unwrap_or(d.fa_ceiling),
                seed: g.seed,
                front: g.front(),
                primitives: g.primitives(),
                node_limit: g.node_limit(),
                ..d
            };
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let pool = load_pool(&data.images, &data.labels)?;
            let split = Split {
                train: 0..examples_per_digit,
                validation: examples_per_digit..examples_per_digit + validation_per_digit,
                ..Split::default()
            };
            let (model, rep) = train(&split.train(&pool), &split.validation(&pool), &cfg)?;
            model.save(&out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("{} classes written to {}", model.classes.len(), out.display());
            if let Some(path) = report {
                write_json(&rep, Some(&path))?;
            }
        }
        Command::EvaluateSingle {
            data,
            model,
            slice,
            centered,
            canvas,
            report,
        } => {
            let m = g.model(&model)?;
            let test = test_set(&data, &slice)?;
            let cfg = SingleSceneConfig {
                canvas,
                centered,
                seed: g.seed,
                node_limit: g.node_limit(),
                ..SingleSceneConfig::default()
            };
            let rep = evaluate_single(&m, &test, &cfg)?;
            eprintln!("accuracy {:.3} ({}/{}), {} exhausted searches", rep.accuracy, rep.correct, rep.total, rep.exhausted);
            write_json(&rep, report.as_deref())?;
            if rep.exhausted > 0 {
                return Ok(Status::Exhausted);
            }
        }
        Command::EvaluateMulti {
            data,
            model,
            slice,
            digits_per_scene,
            canvas,
            report,
        } => {
            let m = g.model(&model)?;
            let test = test_set(&data, &slice)?;
            let cfg = MultiSceneConfig {
                digits_per_scene,
                canvas,
                seed: g.seed,
                node_limit: g.node_limit(),
                ..MultiSceneConfig::default()
            };
            let rep = evaluate_multi(&m, &test, &cfg).map_err(|e| match e {
                shapegraph::pipeline::PipelineError::Config(msg) => usage(msg),
                e => e.into(),
            })?;
            eprintln!(
                "in scenes {:.3}, alone {:.3}, {} scenes",
                rep.scenes.accuracy, rep.alone.accuracy, rep.scene_count
            );
            write_json(&rep, report.as_deref())?;
            if rep.scenes.exhausted + rep.alone.exhausted > 0 {
                return Ok(Status::Exhausted);
            }
        }
        Command::Recognize {
            input,
            model,
            scene,
            denoise,
            overlay,
        } => {
            let m = g.model(&model)?;
            let (front, rec) = recognizer_of(&m, g.node_limit());
            let mask = load_mask(&input, &front)?;
            let found: Vec<(Detection, Option<usize>)> = if denoise {
                let o = recognize_noisy(&rec, &mask, FilterConfig::default());
                o.detection.into_iter().map(|d| (d, o.iteration)).collect()
            } else if scene {
                classify_scene(&rec, &mask).detections.into_iter().map(|d| (d, None)).collect()
            } else {
                classify_single(&rec, &mask).1.detections.into_iter().map(|d| (d, None)).collect()
            };
            let mut w = writer(None)?;
            for (d, iteration) in &found {
                let line = DetectionLine {
                    label: d.label,
                    class_id: &d.class_id,
                    coverage: d.coverage,
                    bbox: d.bbox,
                    component: d.component,
                    iteration: *iteration,
                };
                serde_json::to_writer(&mut w, &line)?;
                writeln!(w)?;
            }
            w.flush()?;
            if let Some(path) = overlay {
                let mut c = Canvas::over(&mask);
                let t = (mask.width().max(mask.height()) / 300).max(1) as i64;
                for (d, _) in &found {
                    c.rect(d.bbox, t, INK);
                }
                c.save(&path)?;
            }
        }
        Command::GenScenes {
            data,
            slice,
            out,
            count,
            digits_per_scene,
            canvas,
            min_size,
            max_size,
        } => {
            if digits_per_scene == 0 || min_size == 0 || min_size > max_size || max_size > canvas {
                return Err(usage("need 1 <= --min-size <= --max-size <= --canvas and at least one digit per scene"));
            }
            let test = test_set(&data, &slice)?;
            if digits_per_scene > test.len() {
                return Err(usage("more digits per scene than test images"));
            }
            let front = g.front();
            fs::create_dir_all(&out)?;
            let mut manifest = BufWriter::new(File::create(out.join("manifest.jsonl"))?);
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            for s in 0..count {
                let picks = sample(&mut rng, test.len(), digits_per_scene).into_vec();
                let masks: Vec<BinaryImage> = picks.iter().map(|&i| front.binary(&test[i])).collect();
                let requests: Vec<(usize, usize)> = (0..picks.len()).map(|k| (k, rng.gen_range(min_size..=max_size))).collect();
                let layout = random_layout(&mut rng, &requests, (canvas, canvas), true)?;
                let img = compose_scene(&layout, &masks, (canvas, canvas), true)?;
                let name = format!("scene-{s:04}.pbm");
                write_pbm(&out.join(&name), &img)?;
                for p in &layout {
                    let record = SceneManifestRecord {
                        source_index: picks[p.source_index],
                        size: p.target_size,
                        origin: p.origin,
                        label: test[picks[p.source_index]].label,
                    };
                    serde_json::to_writer(&mut manifest, &ManifestLine { scene: &name, record })?;
                    writeln!(manifest)?;
                }
            }
            manifest.flush()?;
            eprintln!("wrote {count} scenes to {}", out.display());
        }
        Command::Denoise {
            input,
            out,
            kernel,
            threshold,
            iterations,
        } => {
            if kernel < 3 || kernel % 2 == 0 || !(threshold > 0.0 && threshold < 1.0) || iterations == 0 {
                return Err(usage("need an odd --kernel >= 3, --threshold in (0, 1) and --iterations >= 1"));
            }
            let mask = load_mask(&input, &g.front())?;
            fs::create_dir_all(&out)?;
            write_pbm(&out.join("iter-00.pbm"), &mask)?;
            let steps = recurrent_filter(&mask, FilterConfig { kernel, threshold, iterations });
            for (i, img) in steps.iter().enumerate() {
                write_pbm(&out.join(format!("iter-{:02}.pbm", i + 1)), img)?;
            }
            eprintln!("wrote {} iterations to {}", steps.len(), out.display());
        }
    }
    Ok(Status::Done)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Exhausted) => {
            eprintln!("search budget exhausted during evaluation");
            ExitCode::from(3)
        }
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
