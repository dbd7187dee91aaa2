//! Command-line front end: generate planted instances, run spectral
//! clustering, evaluate against ground truth, verify the structure bounds,
//! build similarity graphs, and sweep experiment grids.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use metaclust::clustering::Clustering;
use metaclust::eigen::EigenOptions;
use metaclust::generators::{sbm_meta, MetaTemplate};
use metaclust::graph::{read_edge_list, write_edge_list, WeightedGraph};
use metaclust::kmeans::KMeansOptions;
use metaclust::metrics::{accuracy, pair_indices, symdiff_volume};
use metaclust::pipeline::{spectral_cluster_with, spectral_embed_with, TrivialEigenvector};
use metaclust::similarity::{gaussian_graph, knn_graph, FeatureTable, KnnWeighting};
use metaclust::sweep::{run_sweep, ExperimentConfig};
use metaclust::theory::{
    center_geometry_report, cost_identity_report, interlacing_report,
    misclassification_bound_check, verify_structure_theorem_k, verify_structure_theorem_meta,
    MisclassificationOptions, TheoryReport,
};

/// Exit code for a verify run that found violated statements (distinct
/// from I/O and usage failures).
const EXIT_VIOLATED: u8 = 3;

#[derive(Parser)]
#[command(name = "metaclust", version, about = "Spectral clustering toolkit with meta-graph analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-partition instance following a template pattern.
    Generate(GenerateArgs),
    /// Cluster a graph with l eigenvectors into k clusters.
    Cluster(ClusterArgs),
    /// Score an output labels file against ground truth.
    Eval(EvalArgs),
    /// Verify the structure bounds on a graph with a known partition.
    Verify(VerifyArgs),
    /// Run an experiment grid from a JSON config, writing results CSV.
    Sweep(SweepArgs),
    /// Dump the n x l spectral embedding as CSV.
    Embed(EmbedArgs),
    /// Build a similarity graph from a feature CSV.
    Similarity(SimilarityArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Template pattern: cycle:K, path:K, complete:K or grid:RxC.
    #[arg(long)]
    template: String,
    #[arg(long)]
    n_per_cluster: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output edge-list file.
    #[arg(long)]
    out_graph: PathBuf,
    /// Output ground-truth labels file.
    #[arg(long)]
    out_labels: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    /// Number of eigenvectors (defaults to k).
    #[arg(long)]
    l: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Drop the constant eigenvector from the embedding.
    #[arg(long)]
    drop_trivial_eigenvector: bool,
    /// Use unit weights in k-means instead of vertex degrees.
    #[arg(long)]
    unweighted: bool,
    /// Output labels file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Output labels file to score.
    #[arg(long)]
    labels: PathBuf,
    /// Ground-truth labels file.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    /// Seed recorded in the CSV row (metadata only).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Eigenvector count recorded in the CSV row (metadata only).
    #[arg(long, default_value_t = 0)]
    l: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Ground-truth labels file.
    #[arg(long)]
    labels: PathBuf,
    /// Number of eigenvectors for the meta-regime checks (defaults to k).
    #[arg(long)]
    l: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also cluster and check the misclassified-volume bound.
    #[arg(long)]
    check_output: bool,
    #[arg(long, default_value_t = 50)]
    apt_restarts: usize,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config JSON (schema 1).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    l: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    drop_trivial_eigenvector: bool,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SimilarityMode {
    Gaussian,
    Knn,
}

#[derive(Args)]
struct SimilarityArgs {
    /// Feature CSV (header `f1,...,fd[,label]`).
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_enum)]
    mode: SimilarityMode,
    /// Gaussian kernel width.
    #[arg(long, default_value_t = 20.0)]
    sigma: f64,
    /// Drop kernel weights at or below this floor (gaussian mode).
    #[arg(long, default_value_t = 0.0)]
    floor: f64,
    /// Neighbour count (knn mode).
    #[arg(long, default_value_t = 3)]
    neighbours: usize,
    /// Weight knn edges by the Gaussian kernel instead of unit weights.
    #[arg(long)]
    kernel_weights: bool,
    /// Output edge-list file.
    #[arg(long)]
    out: PathBuf,
    /// Optional labels output when the CSV has a label column.
    #[arg(long)]
    out_labels: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Embed(args) => cmd_embed(args),
        Command::Similarity(args) => cmd_similarity(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    let template = parse_template(&args.template)?;
    let instance = sbm_meta(&template, args.n_per_cluster, args.p, args.q, args.seed)
        .context("generation failed")?;
    write_graph(&instance.graph, &args.out_graph)?;
    write_labels(&instance.ground_truth, &args.out_labels)?;
    println!(
        "generated {} with {} vertices, {} edges ({} repaired) -> {}, {}",
        template.name(),
        instance.graph.n(),
        instance.graph.edge_count(),
        instance.repaired_vertices.len(),
        args.out_graph.display(),
        args.out_labels.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_cluster(args: ClusterArgs) -> Result<ExitCode> {
    let graph = read_graph(&args.graph)?;
    let l = args.l.unwrap_or(args.k);
    let trivial = if args.drop_trivial_eigenvector {
        TrivialEigenvector::Drop
    } else {
        TrivialEigenvector::Keep
    };
    let clustering = spectral_cluster_with(
        &graph,
        args.k,
        l,
        &KMeansOptions { restarts: args.restarts, ..KMeansOptions::default() },
        args.seed,
        trivial,
        &EigenOptions::default(),
        !args.unweighted,
    )
    .context("spectral clustering failed")?;
    write_labels(&clustering, &args.out)?;
    println!(
        "clustered {} vertices into {} clusters with l = {} -> {}",
        graph.n(),
        args.k,
        l,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode> {
    let graph = read_graph(&args.graph)?;
    let output = read_labels(&args.labels)?;
    let truth = read_labels(&args.truth)?;
    let acc = accuracy(&output, &truth)?;
    let idx = pair_indices(&output, &truth)?;
    let sd = symdiff_volume(&output, &truth, &graph)?;
    let mut csv = String::from("seed,k,l,accuracy,rand,ari,nmi,symdiff_volume\n");
    csv.push_str(&format!(
        "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
        args.seed,
        truth.k(),
        args.l,
        acc.value,
        idx.rand,
        idx.ari,
        idx.nmi,
        sd
    ));
    if !acc.equal_size_ground_truth {
        eprintln!("note: ground-truth clusters are not equal-sized; accuracy normalises by total vertex count");
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let graph = read_graph(&args.graph)?;
    let truth = read_labels(&args.labels)?;
    let k = truth.k();
    let l = args.l.unwrap_or(k);

    let mut combined = if l == k {
        let mut report = verify_structure_theorem_k(&graph, &truth, args.seed)?;
        report.absorb("meta", verify_structure_theorem_meta(&graph, &truth, l, args.seed)?);
        report
    } else {
        verify_structure_theorem_meta(&graph, &truth, l, args.seed)?
    };
    combined.absorb("interlacing", interlacing_report(&graph, &truth, args.seed)?);
    combined.absorb("centers", center_geometry_report(&graph, &truth, l, args.seed)?);

    combined.absorb("cost", cost_identity_report(&graph, &truth, l, args.seed)?);

    if args.check_output {
        let output = spectral_cluster_with(
            &graph,
            k,
            l,
            &KMeansOptions::default(),
            args.seed,
            TrivialEigenvector::Keep,
            &EigenOptions::default(),
            true,
        )?;
        let check = misclassification_bound_check(
            &graph,
            &truth,
            &output,
            l,
            args.seed,
            &MisclassificationOptions { apt_restarts: args.apt_restarts },
        )?;
        let mis_report = TheoryReport { meta: combined.meta, statements: check.statements };
        combined.absorb("output", mis_report);
    }

    emit(args.out.as_deref(), &combined.to_json())?;
    if combined.all_ok() {
        Ok(ExitCode::SUCCESS)
    } else {
        for s in combined.violated() {
            eprintln!("violated: {} (lhs {:.6e}, bound {:.6e})", s.id, s.lhs, s.bound);
        }
        Ok(ExitCode::from(EXIT_VIOLATED))
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let mut text = String::new();
    File::open(&args.config)
        .with_context(|| format!("opening {}", args.config.display()))?
        .read_to_string(&mut text)?;
    let config = ExperimentConfig::from_json(&text)?;
    let results = run_sweep(&config)?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let csv = results.to_csv(Some(&format!("metaclust sweep, unix time {stamp}")));
    let mut out = BufWriter::new(
        File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?,
    );
    out.write_all(csv.as_bytes())?;
    println!(
        "swept {} cells x {} trials -> {}",
        config.ratios.len() * config.l_values.len(),
        config.trials,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_embed(args: EmbedArgs) -> Result<ExitCode> {
    let graph = read_graph(&args.graph)?;
    let trivial = if args.drop_trivial_eigenvector {
        TrivialEigenvector::Drop
    } else {
        TrivialEigenvector::Keep
    };
    let embedding =
        spectral_embed_with(&graph, args.l, args.seed, trivial, &EigenOptions::default())?;
    let mut csv = String::new();
    let header: Vec<String> = (1..=embedding.dim()).map(|j| format!("f{j}")).collect();
    csv.push_str(&header.join(","));
    csv.push('\n');
    for u in 0..embedding.n() {
        let row: Vec<String> = embedding.point(u).iter().map(|x| format!("{x:.12e}")).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_similarity(args: SimilarityArgs) -> Result<ExitCode> {
    let file = File::open(&args.features)
        .with_context(|| format!("opening {}", args.features.display()))?;
    let table = FeatureTable::read_csv(BufReader::new(file))?;
    let graph = match args.mode {
        SimilarityMode::Gaussian => gaussian_graph(&table, args.sigma, args.floor)?,
        SimilarityMode::Knn => {
            let weighting = if args.kernel_weights {
                KnnWeighting::Gaussian(args.sigma)
            } else {
                KnnWeighting::Unit
            };
            knn_graph(&table, args.neighbours, weighting)?
        }
    };
    write_graph(&graph, &args.out)?;
    if let Some(path) = &args.out_labels {
        match table.labels() {
            Some(labels) => {
                let clustering = Clustering::from_labels(labels.to_vec())
                    .context("label column does not form a valid clustering")?;
                write_labels(&clustering, path)?;
            }
            None => bail!("--out-labels given but the feature CSV has no label column"),
        }
    }
    println!(
        "similarity graph on {} vertices with {} edges -> {}",
        graph.n(),
        graph.edge_count(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_template(text: &str) -> Result<MetaTemplate> {
    let (kind, params) = text
        .split_once(':')
        .with_context(|| format!("template `{text}` must look like cycle:10 or grid:4x4"))?;
    let template = match kind {
        "cycle" => MetaTemplate::cycle(params.parse().context("cycle size")?)?,
        "path" => MetaTemplate::path(params.parse().context("path size")?)?,
        "complete" => MetaTemplate::complete(params.parse().context("clique size")?)?,
        "grid" => {
            let (rows, cols) = params
                .split_once('x')
                .with_context(|| format!("grid params `{params}` must look like 4x4"))?;
            MetaTemplate::grid(rows.parse().context("grid rows")?, cols.parse().context("grid cols")?)?
        }
        other => bail!("unknown template kind `{other}`"),
    };
    Ok(template)
}

fn read_graph(path: &Path) -> Result<WeightedGraph> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_edge_list(BufReader::new(file))?)
}

fn write_graph(graph: &WeightedGraph, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_edge_list(graph, BufWriter::new(file))?;
    Ok(())
}

fn read_labels(path: &Path) -> Result<Clustering> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Clustering::read_labels(BufReader::new(file))?)
}

fn write_labels(clustering: &Clustering, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    clustering.write_labels(BufWriter::new(file))?;
    Ok(())
}

fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(path) => {
            let mut file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            file.write_all(content.as_bytes())?;
        }
        None => print!("{content}"),
    }
    Ok(())
}
