use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

use sga_core::augment::{augment_with_encoder, AugmentReport};
use sga_core::curriculum::score_edges;
use sga_core::encoder::{train_encoder, Checkpoint, TrainOutcome};
use sga_core::eval::{
    compute_metrics, predict_signs, run_ablation, run_random_baseline, run_splits, train_final, Arm, ExperimentReport,
    PerturbMode, DEFAULT_PERTURB_RATIOS,
};
use sga_core::io::{self, DatasetFormat, DatasetSource, IngestedDataset, RunConfig, SyntheticSpec};
use sga_core::{Sign, SignedGraph};

const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Balance-aware augmentation and curriculum training for signed link
/// prediction.
#[derive(Parser)]
#[command(name = "sga", version, about)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print node and link counts of a dataset.
    Stats {
        #[command(flatten)]
        run: RunArgs,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Train the stage-one encoder on one split and write the augmented
    /// training graph with its report.
    Augment {
        #[command(flatten)]
        run: RunArgs,
        /// Which run of the split spec to use.
        #[arg(long, default_value_t = 0)]
        run_index: usize,
    },
    /// Train one model on one split and save its checkpoint.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// base, +SA, +TP or +SGA.
        #[arg(long, default_value = "base")]
        arm: Arm,
        #[arg(long, default_value_t = 0)]
        run_index: usize,
    },
    /// Score a saved checkpoint on held-out edges.
    Evaluate {
        /// Directory written by `train`; supplies the defaults below.
        #[arg(long)]
        run_dir: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Graph the model was trained on (canonical CSV).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Held-out edges (canonical CSV).
        #[arg(long)]
        test: Option<PathBuf>,
        /// Where to write metrics.json (defaults to the run directory).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the ablation arms over every seed of the split spec.
    Ablate {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated arms.
        #[arg(long, value_delimiter = ',', default_value = "base,+SA,+TP,+SGA")]
        arms: Vec<Arm>,
    },
    /// Plain training on randomly perturbed training graphs.
    BaselineRandom {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated modes: rand-pos, rand-neg, rand-flip, rand-pos-add,
        /// rand-pos-remove, rand-neg-add, rand-neg-remove or all.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        modes: Vec<String>,
        /// Comma-separated perturbation ratios.
        #[arg(long, value_delimiter = ',')]
        ratios: Vec<f64>,
    },
}

/// Run configuration: an optional JSON file, then flag overrides.
#[derive(Args, Clone, Debug, Default)]
struct RunArgs {
    /// RunConfig JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset file; replaces the configured dataset.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// canonical, bitcoin or snap.
    #[arg(long)]
    format: Option<DatasetFormat>,
    /// Use a synthetic graph with this many nodes.
    #[arg(long)]
    synthetic_nodes: Option<usize>,
    #[arg(long)]
    synthetic_density: Option<f64>,
    #[arg(long)]
    synthetic_positive_ratio: Option<f64>,
    #[arg(long)]
    synthetic_balance: Option<f64>,
    #[arg(long)]
    synthetic_seed: Option<u64>,
    /// Output directory.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Comma-separated run seeds; also sets the number of runs.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Number of runs with seeds 0..N.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long)]
    pacing_epochs: Option<usize>,
    #[arg(long)]
    eps_add: Option<f64>,
    #[arg(long)]
    eps_del: Option<f64>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(path) = &self.dataset {
            cfg.dataset = Some(DatasetSource::File {
                path: path.clone(),
                format: self.format.unwrap_or_default(),
            });
        } else if let (Some(format), Some(DatasetSource::File { format: f, .. })) = (self.format, cfg.dataset.as_mut()) {
            *f = format;
        }
        let synthetic_flags = self.synthetic_nodes.is_some()
            || self.synthetic_density.is_some()
            || self.synthetic_positive_ratio.is_some()
            || self.synthetic_balance.is_some()
            || self.synthetic_seed.is_some();
        if synthetic_flags {
            if self.dataset.is_some() {
                bail!("--dataset and --synthetic-* flags are mutually exclusive");
            }
            let mut spec = match &cfg.dataset {
                Some(DatasetSource::Synthetic { spec }) => spec.clone(),
                _ => SyntheticSpec::default(),
            };
            set(&mut spec.num_nodes, self.synthetic_nodes);
            set(&mut spec.edge_density, self.synthetic_density);
            set(&mut spec.positive_ratio, self.synthetic_positive_ratio);
            set(&mut spec.planted_balance, self.synthetic_balance);
            set(&mut spec.seed, self.synthetic_seed);
            cfg.dataset = Some(DatasetSource::Synthetic { spec });
        }
        set(&mut cfg.output_dir, self.output.clone());
        set(&mut cfg.encoder.epochs, self.epochs);
        set(&mut cfg.encoder.dim, self.dim);
        set(&mut cfg.encoder.layers, self.layers);
        set(&mut cfg.encoder.learning_rate, self.learning_rate);
        set(&mut cfg.split.train_fraction, self.train_fraction);
        if let Some(n) = self.runs {
            cfg.split.num_runs = n;
            cfg.split.seeds = (0..n as u64).collect();
        }
        if let Some(seeds) = &self.seeds {
            cfg.split.num_runs = seeds.len();
            cfg.split.seeds = seeds.clone();
        }
        set(&mut cfg.curriculum.lambda0, self.lambda0);
        set(&mut cfg.curriculum.pacing_epochs, self.pacing_epochs);
        if let Some(e) = self.eps_add {
            cfg.augment.eps_add_pos = e;
            cfg.augment.eps_add_neg = e;
        }
        if let Some(e) = self.eps_del {
            cfg.augment.eps_del_pos = e;
            cfg.augment.eps_del_neg = e;
        }
        cfg.check()?;
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Creates the output directory and writes the config echo.
fn prepare_output(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.json"), cfg.to_json() + "\n")?;
    Ok(dir)
}

fn load_graph(cfg: &RunConfig, out: Option<&Path>) -> Result<(SignedGraph, Option<IngestedDataset>)> {
    let source = cfg.dataset.as_ref().expect("validated config has a dataset");
    let (graph, ingested) = source.load()?;
    if let (Some(dir), Some(d)) = (out, &ingested) {
        d.write_id_map(&dir.join("id_map.csv"))?;
    }
    info!("graph: {} nodes, {} edges", graph.num_nodes(), graph.num_edges());
    Ok((graph, ingested))
}

fn write_report(dir: &Path, command: &str, cfg: &RunConfig, report: &ExperimentReport) -> Result<()> {
    let doc = json!({
        "code_version": CODE_VERSION,
        "command": command,
        "config": cfg,
        "records": report.records,
        "aggregate": report.aggregate,
        "reference": report.reference,
        "paired_vs_reference": report.paired_vs_reference,
    });
    io::write_json(&dir.join("metrics.json"), &doc)?;
    fs::write(dir.join("metrics.csv"), report.to_csv())?;
    Ok(())
}

fn print_aggregate(report: &ExperimentReport) {
    println!("{:<24} {:>16} {:>16} {:>16} {:>16}", "label", "auc", "f1_binary", "f1_micro", "f1_macro");
    for (label, agg) in &report.aggregate {
        let cell = |s: &sga_core::eval::Summary| format!("{:.4} ± {:.4}", s.mean, s.std);
        println!(
            "{:<24} {:>16} {:>16} {:>16} {:>16}",
            label,
            cell(&agg.auc),
            cell(&agg.f1_binary),
            cell(&agg.f1_micro),
            cell(&agg.f1_macro)
        );
    }
}

fn stats(run: &RunArgs, as_json: bool) -> Result<()> {
    let cfg = run.resolve()?;
    let (graph, ingested) = load_graph(&cfg, None)?;
    let stats = match ingested {
        Some(d) => serde_json::to_value(d.stats())?,
        None => {
            let tris = graph.enumerate_triangles();
            json!({
                "nodes": graph.num_nodes(),
                "edges": graph.num_edges(),
                "edges_positive": graph.num_positive(),
                "edges_negative": graph.num_negative(),
                "triangles": tris.len(),
                "balanced_triangles": tris.iter().filter(|t| t.balanced).count(),
            })
        }
    };
    if as_json {
        println!("{}", serde_json::to_string_pretty(&stats)?);
    } else if let Some(map) = stats.as_object() {
        for (k, v) in map {
            println!("{k:<20} {v}");
        }
    }
    Ok(())
}

fn select_split(cfg: &RunConfig, graph: &SignedGraph, index: usize) -> Result<sga_core::eval::RunSplit> {
    if index >= cfg.split.num_runs {
        bail!("run index {index} out of range ({} runs configured)", cfg.split.num_runs);
    }
    Ok(run_splits(graph, &cfg.split)?.swap_remove(index))
}

fn augment(run: &RunArgs, run_index: usize) -> Result<()> {
    let cfg = run.resolve()?;
    let dir = prepare_output(&cfg)?;
    let (graph, _) = load_graph(&cfg, Some(dir))?;
    let split = select_split(&cfg, &graph, run_index)?;
    let n = graph.num_nodes();
    io::write_edges(&dir.join("train_edges.csv"), n, &split.train)?;
    io::write_edges(&dir.join("test_edges.csv"), n, &split.test)?;

    let stage_one = train_encoder(&split.train_graph, &split.train, &cfg.encoder, split.seed)?;
    Checkpoint::new(&stage_one.params, &cfg.encoder, split.seed, n).save(&dir.join("checkpoint.json"))?;
    let aug = augment_with_encoder(
        &split.train_graph,
        &split.train,
        &stage_one,
        &cfg.augment,
        &split.held_out(),
        split.seed,
    )?;
    io::write_edges(&dir.join("augmented_edges.csv"), n, &aug.edges)?;
    let report = AugmentReport::new(&cfg.augment, &aug.candidates, &aug.selection, split.train.len());
    io::write_json(&dir.join("augment_report.json"), &report)?;
    println!(
        "train edges {} -> {} ({} additions, {} deletions accepted, {} rejected)",
        split.train.len(),
        aug.edges.len(),
        report.accepted_additions,
        report.accepted_deletions,
        report.rejected.len()
    );
    println!("wrote {}", dir.display());
    Ok(())
}

fn write_history(path: &Path, outcome: &TrainOutcome) -> Result<()> {
    let mut text = String::from("epoch,loss,edges_used,none_used\n");
    for r in &outcome.history {
        text.push_str(&format!("{},{},{},{}\n", r.epoch, r.loss, r.edges_used, r.none_used));
    }
    fs::write(path, text)?;
    Ok(())
}

fn train(run: &RunArgs, arm: Arm, run_index: usize) -> Result<()> {
    let cfg = run.resolve()?;
    let dir = prepare_output(&cfg)?;
    let (graph, _) = load_graph(&cfg, Some(dir))?;
    let split = select_split(&cfg, &graph, run_index)?;
    let n = graph.num_nodes();
    io::write_edges(&dir.join("train_edges.csv"), n, &split.train)?;
    io::write_edges(&dir.join("test_edges.csv"), n, &split.test)?;

    let (train_graph, edges) = if arm.augments() {
        let stage_one = train_encoder(&split.train_graph, &split.train, &cfg.encoder, split.seed)?;
        let aug = augment_with_encoder(
        &split.train_graph,
        &split.train,
        &stage_one,
        &cfg.augment,
        &split.held_out(),
        split.seed,
    )?;
        let report = AugmentReport::new(&cfg.augment, &aug.candidates, &aug.selection, split.train.len());
        io::write_json(&dir.join("augment_report.json"), &report)?;
        (aug.selection.augmented, aug.edges)
    } else {
        (split.train_graph.clone(), split.train.clone())
    };
    io::write_edges(&dir.join("train_graph.csv"), n, &edges)?;
    if arm.uses_curriculum() {
        let table = score_edges(&train_graph, &edges)?;
        let mut text = String::from("u,v,sign,score\n");
        for s in table.entries() {
            let sign = if s.edge.sign == Sign::Positive { '+' } else { '-' };
            text.push_str(&format!("{},{},{sign},{}\n", s.edge.u, s.edge.v, s.score));
        }
        fs::write(dir.join("difficulty.csv"), text)?;
    }

    let outcome = train_final(&train_graph, &edges, arm, &cfg.experiment(), split.seed)?;
    Checkpoint::new(&outcome.params, &cfg.encoder, split.seed, n).save(&dir.join("checkpoint.json"))?;
    write_history(&dir.join("history.csv"), &outcome)?;

    let preds = predict_signs(&outcome.embeddings.z, &outcome.params.theta, &split.test)?;
    let truths: Vec<Sign> = split.test.iter().map(|e| e.sign).collect();
    let metrics = compute_metrics(&preds, &truths)?;
    let doc = json!({
        "code_version": CODE_VERSION,
        "command": "train",
        "arm": arm.label(),
        "run": run_index,
        "seed": split.seed,
        "train_edges": edges.len(),
        "test_edges": split.test.len(),
        "final_loss": outcome.history.last().map(|r| r.loss),
        "metrics": metrics,
        "config": cfg,
    });
    io::write_json(&dir.join("metrics.json"), &doc)?;
    println!("{arm} seed {}: {}", split.seed, serde_json::to_string(&metrics)?);
    println!("wrote {}", dir.display());
    Ok(())
}

fn evaluate(
    run_dir: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    graph: Option<PathBuf>,
    test: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<()> {
    let pick = |explicit: Option<PathBuf>, name: &str| -> Result<PathBuf> {
        match (explicit, &run_dir) {
            (Some(p), _) => Ok(p),
            (None, Some(d)) => Ok(d.join(name)),
            (None, None) => bail!("--{} or --run-dir is required", name.trim_end_matches(".json").trim_end_matches(".csv")),
        }
    };
    let checkpoint = pick(checkpoint, "checkpoint.json")?;
    let graph_path = pick(graph, "train_graph.csv")?;
    let test_path = pick(test, "test_edges.csv")?;
    let mut missing = Vec::new();
    for p in [&checkpoint, &graph_path, &test_path] {
        if !p.is_file() {
            missing.push(format!("{} does not exist", p.display()));
        }
    }
    if !missing.is_empty() {
        bail!("{}", missing.join("; "));
    }

    let ckpt = Checkpoint::load(&checkpoint)?;
    let (num_nodes, edges) = io::read_edges(&graph_path)?;
    let g = SignedGraph::from_samples(num_nodes.max(ckpt.num_nodes), &edges)?;
    let (_, test) = io::read_edges(&test_path)?;
    let state = ckpt.embed(&g)?;
    let params = ckpt.params()?;
    let preds = predict_signs(&state.z, &params.theta, &test)?;
    let truths: Vec<Sign> = test.iter().map(|e| e.sign).collect();
    let metrics = compute_metrics(&preds, &truths)?;
    let out = output.or(run_dir).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    let doc = json!({
        "code_version": CODE_VERSION,
        "command": "evaluate",
        "checkpoint": checkpoint,
        "graph": graph_path,
        "test": test_path,
        "test_edges": test.len(),
        "metrics": metrics,
    });
    io::write_json(&out.join("eval_metrics.json"), &doc)?;
    println!("{}", serde_json::to_string(&metrics)?);
    Ok(())
}

fn ablate(run: &RunArgs, arms: &[Arm]) -> Result<()> {
    let cfg = run.resolve()?;
    if arms.is_empty() {
        bail!("no arms given");
    }
    let dir = prepare_output(&cfg)?;
    let (graph, _) = load_graph(&cfg, Some(dir))?;
    let report = run_ablation(&graph, arms, &cfg.experiment())?;
    write_report(dir, "ablate", &cfg, &report)?;
    print_aggregate(&report);
    println!("wrote {}", dir.display());
    Ok(())
}

fn baseline_random(run: &RunArgs, modes: &[String], ratios: &[f64]) -> Result<()> {
    let mut parsed = Vec::new();
    for m in modes {
        for mode in PerturbMode::parse_group(m)? {
            if !parsed.contains(&mode) {
                parsed.push(mode);
            }
        }
    }
    let ratios = if ratios.is_empty() { DEFAULT_PERTURB_RATIOS.to_vec() } else { ratios.to_vec() };
    let cfg = run.resolve()?;
    let dir = prepare_output(&cfg)?;
    let (graph, _) = load_graph(&cfg, Some(dir))?;
    let report = run_random_baseline(&graph, &parsed, &ratios, &cfg.experiment())?;
    write_report(dir, "baseline-random", &cfg, &report)?;
    print_aggregate(&report);
    println!("wrote {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Stats { run, json } => stats(&run, json),
        Command::Augment { run, run_index } => augment(&run, run_index),
        Command::Train { run, arm, run_index } => train(&run, arm, run_index),
        Command::Evaluate {
            run_dir,
            checkpoint,
            graph,
            test,
            output,
        } => evaluate(run_dir, checkpoint, graph, test, output),
        Command::Ablate { run, arms } => ablate(&run, &arms),
        Command::BaselineRandom { run, modes, ratios } => baseline_random(&run, &modes, &ratios),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
