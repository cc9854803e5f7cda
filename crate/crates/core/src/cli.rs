//! Command-line front end. Every command writes its outputs plus a
//! `resolved_config.json` holding the full argument set into `--out`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::json;

use crate::clustering::{self, geometric_grid, louvain_optimize, QualityConfig, ScanConfig, SpectralInput};
use crate::embedding;
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Graph};
use crate::io;
use crate::lif::{self, LifParams, RecoveryConfig};
use crate::linsys::{Dynamics, LinearSystem, TimeMode, Weighting};
use crate::similarity::{self, SimilarityMatrix};

#[derive(Parser, Debug)]
#[command(name = "dynembed", version, about = "Dynamical similarity, embedding and clustering of networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Similarity Ψ and squared distances D² between nodes.
    Similarity(SimilarityArgs),
    /// Spectral coordinates of Ψ.
    Embed(EmbedArgs),
    /// Order nodes by one embedding coordinate.
    Rank(RankArgs),
    /// Partition nodes, spectrally or with Louvain on the centered Ψ.
    Cluster(ClusterArgs),
    /// Louvain ensembles over a geometric time grid.
    Scan(ScanArgs),
    /// Generate an assembly network weight matrix.
    LifGen(LifGenArgs),
    /// Simulate the integrate-and-fire network on a weight matrix.
    LifSim(LifSimArgs),
    /// Check that the rate model of generated networks clusters into the planted assemblies.
    LifValidate(LifValidateArgs),
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct GraphArgs {
    /// Tab-separated edge list: source, target, weight.
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long, value_enum, default_value_t = Dynamics::Diffusion)]
    pub dynamics: Dynamics,
    /// Treat edges as directed.
    #[arg(long)]
    pub directed: bool,
    /// Teleportation rate for diffusion/rw dynamics (0.15 if given without a value).
    #[arg(long, num_args = 0..=1, default_missing_value = "0.15")]
    pub teleport: Option<f64>,
}

#[derive(Args, Debug, Serialize, Clone, Default)]
pub struct TimeArgs {
    /// Evaluate Ψ(t) at a single time.
    #[arg(long, conflicts_with = "interval")]
    pub t: Option<f64>,
    /// Integrate Ψ over [0, X] (summed over 0..=X for discrete dynamics).
    #[arg(long)]
    pub interval: Option<f64>,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct CenterArgs {
    /// Project out the uniform direction: 𝒲 = I − α·11ᵀ/n.
    #[arg(long)]
    pub center: bool,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SimilarityArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub center: CenterArgs,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub center: CenterArgs,
    /// Number of coordinates kept (all if omitted).
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct RankArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub center: CenterArgs,
    /// 1-based coordinate to rank by.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// CSV of node_id,rank (1 = top) to correlate against.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// k-means on eigenvectors (of −𝒜, or of Ψ when --t/--interval is given).
    #[arg(long, conflicts_with = "louvain", requires_all = ["c", "k"])]
    pub spectral: bool,
    /// Louvain on the centered similarity at --t.
    #[arg(long, requires = "t")]
    pub louvain: bool,
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 0.01)]
    pub tmin: f64,
    #[arg(long, default_value_t = 100.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 30)]
    pub npoints: usize,
    /// Louvain runs per time point.
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub vi_threshold: f64,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct LifGenArgs {
    /// JSON parameter file; missing fields take default values.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct LifSimArgs {
    /// Weight matrix CSV, W[i,j] = synapse j → i.
    #[arg(long)]
    pub wn: PathBuf,
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Simulated time in ms.
    #[arg(long, default_value_t = 1000.0)]
    pub duration: f64,
    /// Bin width in ms for per-assembly rates.
    #[arg(long, default_value_t = 10.0)]
    pub window: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct LifValidateArgs {
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// First network seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of networks to generate.
    #[arg(long, default_value_t = 1)]
    pub networks: u64,
    #[arg(long, default_value_t = 0.05)]
    pub tmin: f64,
    #[arg(long, default_value_t = 51.2)]
    pub tmax: f64,
    #[arg(long, default_value_t = 21)]
    pub npoints: usize,
    /// Louvain runs per time point.
    #[arg(long, default_value_t = 4)]
    pub seeds: usize,
    #[arg(short, long)]
    pub out: PathBuf,
}

fn load_graph(args: &GraphArgs) -> Result<Graph> {
    let f = fs::File::open(&args.edges).map_err(|e| Error::invalid(format!("cannot open {}: {e}", args.edges.display())))?;
    load_edge_list(std::io::BufReader::new(f), args.directed)
}

fn load_params(path: &Option<PathBuf>) -> Result<LifParams> {
    let p = match path {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => LifParams::default(),
    };
    p.validate()?;
    Ok(p)
}

fn prepare_out(dir: &Path, command: &Command) -> Result<()> {
    fs::create_dir_all(dir)?;
    io::write_json(&dir.join("resolved_config.json"), command)
}

fn uniform(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0 / (n as f64).sqrt())
}

/// Ψ at a point or integrated, with optional centering. `default_interval`
/// is used when neither --t nor --interval was given.
fn compute_similarity(g: &Graph, ga: &GraphArgs, time: &TimeArgs, center: &CenterArgs, default_interval: Option<f64>) -> Result<SimilarityMatrix> {
    let mut sys = LinearSystem::from_graph(g, ga.dynamics, ga.teleport)?;
    if center.center {
        sys = sys.with_weighting(Weighting::projector(uniform(g.n()), center.alpha)?)?;
    }
    match (time.t, time.interval.or(default_interval)) {
        (Some(t), _) => similarity::similarity_at(&sys, t),
        (None, Some(t)) if sys.mode() == TimeMode::Discrete => {
            if t.fract() != 0.0 || t < 0.0 {
                return Err(Error::invalid(format!("discrete interval {t} must be a nonnegative integer")));
            }
            similarity::summed_similarity(&sys, t as u64)
        }
        (None, Some(t)) => similarity::integrated_similarity(&sys, t),
        (None, None) => Err(Error::invalid("give --t or --interval")),
    }
}

fn sidecar(psi: &SimilarityMatrix, ga: &GraphArgs) -> serde_json::Value {
    json!({
        "t_spec": psi.t_spec,
        "dynamics": ga.dynamics,
        "teleport": ga.teleport,
        "weighting": psi.weighting,
        "centering": psi.centering.as_ref().map(|c| json!({"alpha": c.alpha, "nu": "uniform"})),
    })
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Similarity(a) => {
            prepare_out(&a.out, &cli.command)?;
            let g = load_graph(&a.graph)?;
            let psi = compute_similarity(&g, &a.graph, &a.time, &a.center, None)?;
            let d2 = similarity::distance_squared(&psi)?;
            io::write_matrix_csv(&a.out.join("psi.csv"), g.node_ids(), &psi.values)?;
            io::write_matrix_csv(&a.out.join("dsq.csv"), g.node_ids(), &d2.values)?;
            io::write_json(&a.out.join("similarity.json"), &sidecar(&psi, &a.graph))
        }
        Command::Embed(a) => {
            prepare_out(&a.out, &cli.command)?;
            let g = load_graph(&a.graph)?;
            let psi = compute_similarity(&g, &a.graph, &a.time, &a.center, Some(1.0))?;
            let dec = embedding::decompose(&psi)?;
            let emb = embedding::embed(&dec, a.c.unwrap_or(g.n()))?;
            let cols: Vec<String> = (1..=emb.c).map(|k| format!("phi_{k}")).collect();
            io::write_labelled_csv(&a.out.join("embedding.csv"), g.node_ids(), &cols, &emb.coords)?;
            let mut meta = sidecar(&psi, &a.graph);
            meta["c"] = json!(emb.c);
            meta["truncation_error"] = json!(emb.truncation_error);
            meta["sign_convention"] = json!("largest-magnitude entry of each eigenvector is positive");
            meta["eigenvalues"] = json!(dec.eigenvalues.as_slice());
            meta["degenerate"] = json!(dec.degenerate);
            io::write_json(&a.out.join("embedding.json"), &meta)
        }
        Command::Rank(a) => {
            prepare_out(&a.out, &cli.command)?;
            let g = load_graph(&a.graph)?;
            let psi = compute_similarity(&g, &a.graph, &a.time, &a.center, Some(1.0))?;
            if a.dim == 0 {
                return Err(Error::invalid("--dim is 1-based"));
            }
            let emb = embedding::embed(&embedding::decompose(&psi)?, a.dim.min(g.n()).max(1))?;
            let ranked = embedding::rank_by_coordinate(&emb, a.dim - 1, g.node_ids())?;
            let mut csv = String::from("rank,node_id,score\n");
            for (r, x) in ranked.iter().enumerate() {
                csv.push_str(&format!("{},{},{}\n", r + 1, x.node_id, x.score));
            }
            fs::write(a.out.join("ranking.csv"), csv)?;
            let mut meta = sidecar(&psi, &a.graph);
            meta["dim"] = json!(a.dim);
            if let Some(path) = &a.reference {
                meta["spearman"] = json!(spearman_vs_reference(&ranked, &io::read_scores_csv(path)?)?);
            }
            io::write_json(&a.out.join("ranking.json"), &meta)
        }
        Command::Cluster(a) => {
            prepare_out(&a.out, &cli.command)?;
            let g = load_graph(&a.graph)?;
            let (partition, quality) = if a.spectral {
                let (c, k) = (a.c.unwrap_or(2), a.k.unwrap_or(2));
                let p = if a.time.t.is_some() || a.time.interval.is_some() {
                    let psi = compute_similarity(&g, &a.graph, &a.time, &CenterArgs { center: false, alpha: a.alpha }, None)?;
                    clustering::spectral_partition(&psi.values, SpectralInput::Similarity, c, k, a.seed)?
                } else {
                    let op = -a.graph.dynamics.operator(&g, a.graph.teleport)?;
                    if a.graph.dynamics == Dynamics::Discrete {
                        return Err(Error::invalid("spectral clustering of discrete dynamics needs --t or --interval"));
                    }
                    let sym = crate::linalg::symmetrize(&op);
                    clustering::spectral_partition(&sym, SpectralInput::Laplacian, c, k, a.seed)?
                };
                (p, None)
            } else if a.louvain {
                let center = CenterArgs { center: true, alpha: a.alpha };
                let psi = compute_similarity(&g, &a.graph, &a.time, &center, None)?;
                let q = QualityConfig::from_similarity(&psi);
                let p = louvain_optimize(&q, a.seed)?;
                let score = q.score(&p);
                (p, Some(score))
            } else {
                return Err(Error::invalid("choose --spectral or --louvain"));
            };
            io::write_partition_csv(&a.out.join("partition.csv"), g.node_ids(), &partition)?;
            io::write_json(&a.out.join("cluster.json"), &json!({"k": partition.k(), "quality": quality, "sizes": partition.sizes()}))
        }
        Command::Scan(a) => {
            prepare_out(&a.out, &cli.command)?;
            let g = load_graph(&a.graph)?;
            let sys = LinearSystem::from_graph(&g, a.graph.dynamics, a.graph.teleport)?;
            let times = geometric_grid(a.tmin, a.tmax, a.npoints)?;
            let cfg = ScanConfig {
                seeds: a.seeds,
                base_seed: a.seed,
                vi_threshold: a.vi_threshold,
                ..ScanConfig::default()
            };
            let r = clustering::time_scan(&sys, &times, &uniform(g.n()), a.alpha, &cfg)?;
            io::write_json(&a.out.join("scan.json"), &r.summary())?;
            let tcols: Vec<String> = times.iter().map(|t| t.to_string()).collect();
            io::write_plain_csv(&a.out.join("vi.csv"), &tcols, &r.vi_matrix)?;
            let labels = DMatrix::from_fn(g.n(), times.len(), |i, k| r.best[k].label(i) as f64);
            io::write_labelled_csv(&a.out.join("partitions.csv"), g.node_ids(), &tcols, &labels)
        }
        Command::LifGen(a) => {
            prepare_out(&a.out, &cli.command)?;
            let p = load_params(&a.params)?;
            let (w, planted) = lif::generate_assembly_network(&p, a.seed)?;
            let ids: Vec<String> = (0..p.n()).map(|i| i.to_string()).collect();
            io::write_matrix_csv(&a.out.join("W_N.csv"), &ids, &w)?;
            io::write_partition_csv(&a.out.join("planted.csv"), &ids, &planted)?;
            io::write_json(&a.out.join("params.json"), &p)
        }
        Command::LifSim(a) => {
            prepare_out(&a.out, &cli.command)?;
            let p = load_params(&a.params)?;
            let (_, w) = io::read_matrix_csv(&a.wn)?;
            let spikes = lif::simulate_lif(&w, &p, a.duration, a.seed)?;
            io::write_spikes_csv(&a.out.join("spikes.csv"), &spikes.events)?;
            let act = lif::assembly_coactivation(&spikes, &p.planted(), a.window)?;
            let ids: Vec<String> = (0..act.nrows()).map(|k| k.to_string()).collect();
            let cols: Vec<String> = (0..act.ncols()).map(|b| (b as f64 * a.window).to_string()).collect();
            io::write_labelled_csv(&a.out.join("coactivation.csv"), &ids, &cols, &act)
        }
        Command::LifValidate(a) => {
            prepare_out(&a.out, &cli.command)?;
            let p = load_params(&a.params)?;
            let cfg = RecoveryConfig {
                times: geometric_grid(a.tmin, a.tmax, a.npoints)?,
                scan: ScanConfig {
                    seeds: a.seeds,
                    ..ScanConfig::default()
                },
                ..RecoveryConfig::default()
            };
            let reports = (a.seed..a.seed + a.networks)
                .map(|s| lif::validate_recovery(&p, s, &cfg))
                .collect::<Result<Vec<_>>>()?;
            let passed = reports.iter().filter(|r| r.passed()).count();
            io::write_json(&a.out.join("validation.json"), &json!({"passed": passed, "networks": reports.len(), "reports": reports}))
        }
    }
}

/// Spearman correlation between the computed order and a reference rank
/// (1 = top). Nodes missing from either side are ignored.
fn spearman_vs_reference(ranked: &[embedding::RankedNode], reference: &[(String, f64)]) -> Result<f64> {
    let pos: std::collections::HashMap<&str, usize> = ranked.iter().enumerate().map(|(r, x)| (x.node_id.as_str(), r + 1)).collect();
    let (mut ours, mut theirs) = (Vec::new(), Vec::new());
    for (id, r) in reference {
        if let Some(&p) = pos.get(id.as_str()) {
            ours.push(p as f64);
            theirs.push(*r);
        }
    }
    embedding::spearman(&ours, &theirs)
}

/// Cap the worker pool from DYNEMBED_THREADS when set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DYNEMBED_THREADS") {
        let n: usize = v.parse().map_err(|_| Error::invalid(format!("DYNEMBED_THREADS={v:?} is not a number")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}
