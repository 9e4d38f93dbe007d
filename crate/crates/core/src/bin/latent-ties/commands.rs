use std::collections::{BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use latent_ties::eval::{self, EvalError, NormalizationProfile};
use latent_ties::features::{self, Feature, FeatureRow, LabeledExample};
use latent_ties::graph::{self, InferredGraph, ThresholdRule};
use latent_ties::infer::{self, InferError, Selection};
use latent_ties::labels::LabelSet;
use latent_ties::stats::logistic::fit_logistic;
use latent_ties::stats::roc::{roc_auc, write_roc};
use latent_ties::stats::tree::{fit_tree_with_report, TreeConfig};
use latent_ties::store::{EventStore, PlayerId, RecordFormat};
use latent_ties::synth::{self, World, WorldConfig};

use crate::manifest::RunManifest;
use crate::{CliError, Common, Rule};

const DEFAULT_NORM_SAMPLE: usize = 200;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// World config file of `key = value` lines; --agents and --days override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    days: Option<u32>,
    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Csv,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Event log to read.
    log: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    /// Label file to validate and copy alongside the log.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Event log, or a directory holding `events.tsv`.
    #[arg(long)]
    store: PathBuf,
    /// Label file whose raters are the focal players. Defaults to
    /// `labels.tsv` next to the log.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Use every player as a focal player instead of the raters.
    #[arg(long)]
    all_players: bool,
    /// Output feature dump.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelInputs {
    /// Feature dump written by `features`.
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Event log used to build the normalization profile. Without it,
    /// features are used unscaled.
    #[arg(long)]
    store: Option<PathBuf>,
    /// Players sampled for the normalization profile.
    #[arg(long, default_value_t = DEFAULT_NORM_SAMPLE)]
    norm_sample: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    inputs: ModelInputs,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    inputs: ModelInputs,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Event log, needed for each rater's game count.
    #[arg(long)]
    store: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    store: PathBuf,
    /// Survey labels. Defaults to `labels.tsv` next to the log.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GraphstatsArgs {
    /// Edge list written by `infer`.
    #[arg(long)]
    edges: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    days: Option<u32>,
    #[arg(short, long)]
    out: PathBuf,
}

// ---- helpers

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::input(dir, e))
}

/// Render with `f`, write to `path`, and record the checksum.
fn emit<F>(m: &mut RunManifest, path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut Vec<u8>) -> io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::input(path, e))?;
    fs::write(path, &buf).map_err(|e| CliError::input(path, e))?;
    m.output(path, &buf);
    Ok(())
}

fn events_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("events.tsv")
    } else {
        p.to_path_buf()
    }
}

fn sibling_labels(store: &Path) -> PathBuf {
    let events = events_path(store);
    events.parent().unwrap_or(Path::new(".")).join("labels.tsv")
}

fn load_store(path: &Path, common: &Common, m: &mut RunManifest) -> Result<EventStore, CliError> {
    let path = events_path(path);
    m.input(&path)?;
    EventStore::ingest(&path, RecordFormat::Tsv, common.bin_seconds).map_err(|e| CliError::input(&path, e))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::input(path, e))
}

fn load_labels(path: &Path, m: &mut RunManifest) -> Result<LabelSet, CliError> {
    m.input(path)?;
    LabelSet::read(open(path)?).map_err(|e| CliError::input(path, e))
}

fn load_rows(path: &Path, m: &mut RunManifest) -> Result<Vec<FeatureRow>, CliError> {
    m.input(path)?;
    features::read_dump(open(path)?).map_err(|e| CliError::input(path, e))
}

fn eval_err(e: EvalError) -> CliError {
    match e {
        EvalError::Store(_) | EvalError::Feature(_) => CliError::Usage(e.to_string()),
        other => CliError::numeric(other),
    }
}

fn infer_err(e: InferError) -> CliError {
    match e {
        InferError::Store(_) | InferError::Temporal(_) => CliError::Usage(e.to_string()),
        other => CliError::numeric(other),
    }
}

fn world_config(config: Option<&Path>, agents: Option<usize>, days: Option<u32>, seed: u64) -> Result<WorldConfig, CliError> {
    let mut c = match config {
        Some(p) => WorldConfig::read(open(p)?).map_err(|e| CliError::input(p, e))?,
        None => WorldConfig::default(),
    };
    if let Some(a) = agents {
        c.agents = a;
    }
    if let Some(d) = days {
        c.days = d;
    }
    c.seed = seed;
    c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(c)
}

/// Labeled examples, scaled by a profile built from `store` when given.
fn model_examples(
    inputs: &ModelInputs,
    common: &Common,
    m: &mut RunManifest,
) -> Result<(Vec<LabeledExample>, NormalizationProfile), CliError> {
    let rows = load_rows(&inputs.features, m)?;
    let labels = load_labels(&inputs.labels, m)?;
    let examples = features::label_rows(&rows, &labels);
    let profile = match &inputs.store {
        Some(s) => {
            let store = load_store(s, common, m)?;
            let n = inputs.norm_sample.min(store.players().len());
            m.set("norm_sample", n);
            eval::build_normalization(&store, n, common.seed, &common.autocorr()).map_err(eval_err)?
        }
        None => NormalizationProfile::identity(),
    };
    Ok((profile.apply_all(&examples), profile))
}

// ---- subcommands

pub fn synth(args: &SynthArgs, common: &Common) -> Result<(), CliError> {
    run_synth(args.config.as_deref(), args.agents, args.days, &args.out, common, None).map(|_| ())
}

fn run_synth(
    config: Option<&Path>,
    agents: Option<usize>,
    days: Option<u32>,
    out: &Path,
    common: &Common,
    root: Option<&Path>,
) -> Result<World, CliError> {
    let mut m = manifest("synth", common, root);
    if let Some(p) = config {
        m.input(p)?;
    }
    let cfg = world_config(config, agents, days, common.seed)?;
    for line in cfg.to_text().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            m.set(&format!("world.{k}"), v);
        }
    }
    let world = synth::generate(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let store = world
        .store(common.bin_seconds)
        .map_err(|e| CliError::numeric(format!("generated log failed to load: {e}")))?;
    create_dir(out)?;
    emit(&mut m, &out.join("events.tsv"), |w| store.write_log(w))?;
    emit(&mut m, &out.join("labels.tsv"), |w| world.labels.write(w))?;
    emit(&mut m, &out.join("friends.tsv"), |w| world.truth.write_friends(w))?;
    emit(&mut m, &out.join("ledger.tsv"), |w| world.truth.write_ledger(w))?;
    emit(&mut m, &out.join("world.conf"), |w| {
        use io::Write;
        w.write_all(cfg.to_text().as_bytes())
    })?;
    m.write(&out.join("manifest.json"))?;
    Ok(world)
}

fn manifest(name: &str, common: &Common, root: Option<&Path>) -> RunManifest {
    let m = RunManifest::new(name, common);
    match root {
        Some(r) => m.relative_to(r),
        None => m,
    }
}

pub fn ingest(args: &IngestArgs, common: &Common) -> Result<(), CliError> {
    let mut m = manifest("ingest", common, None);
    m.input(&args.log)?;
    let format = match args.format {
        Format::Tsv => RecordFormat::Tsv,
        Format::Csv => RecordFormat::Csv,
    };
    m.set("format", format!("{:?}", args.format).to_lowercase());
    let store = EventStore::ingest(&args.log, format, common.bin_seconds).map_err(|e| CliError::input(&args.log, e))?;
    create_dir(&args.out)?;
    emit(&mut m, &args.out.join("events.tsv"), |w| store.write_log(w))?;
    if let Some(l) = &args.labels {
        let labels = load_labels(l, &mut m)?;
        emit(&mut m, &args.out.join("labels.tsv"), |w| labels.write(w))?;
    }
    let window = store.window();
    emit(&mut m, &args.out.join("summary.tsv"), |w| {
        use io::Write;
        writeln!(w, "# key\tvalue")?;
        writeln!(w, "events\t{}", store.events().len())?;
        writeln!(w, "games\t{}", store.num_games())?;
        writeln!(w, "players\t{}", store.players().len())?;
        writeln!(w, "window_start\t{}", window.start)?;
        writeln!(w, "window_end\t{}", window.end)?;
        writeln!(w, "bins\t{}", store.total_bins())?;
        writeln!(w, "checksum\t{}", store.checksum())
    })?;
    m.write(&args.out.join("manifest.json"))
}

pub fn features(args: &FeaturesArgs, common: &Common) -> Result<(), CliError> {
    run_features(&args.store, args.labels.as_deref(), args.all_players, &args.out, common, None)
}

fn run_features(
    store_path: &Path,
    labels: Option<&Path>,
    all_players: bool,
    out: &Path,
    common: &Common,
    root: Option<&Path>,
) -> Result<(), CliError> {
    let mut m = manifest("features", common, root);
    let store = load_store(store_path, common, &mut m)?;
    let focal: BTreeSet<PlayerId> = if all_players {
        store.players().iter().copied().collect()
    } else {
        let path = labels.map(Path::to_path_buf).unwrap_or_else(|| sibling_labels(store_path));
        if !path.exists() {
            return Err(CliError::Usage(format!(
                "no label file at {}; pass --labels or --all-players",
                path.display()
            )));
        }
        load_labels(&path, &mut m)?.raters().clone()
    };
    m.set("focal", if all_players { "all" } else { "raters" });
    let rows: Vec<FeatureRow> = features::extract(&store, &focal, &common.autocorr())
        .map_err(|e| CliError::Usage(e.to_string()))?
        .iter()
        .map(FeatureRow::from)
        .collect();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    emit(&mut m, out, |w| features::write_dump(w, &rows))?;
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    m.write(Path::new(&name))
}

fn tree_config(common: &Common) -> TreeConfig {
    TreeConfig {
        folds: usize::from(common.folds),
        seed: common.seed,
        ..TreeConfig::default()
    }
}

pub fn train(args: &TrainArgs, common: &Common) -> Result<(), CliError> {
    run_train(&args.inputs, &args.out, common, None)
}

fn run_train(inputs: &ModelInputs, out: &Path, common: &Common, root: Option<&Path>) -> Result<(), CliError> {
    let mut m = manifest("train", common, root);
    let (examples, profile) = model_examples(inputs, common, &mut m)?;
    create_dir(&out.join("logistic"))?;
    emit(&mut m, &out.join("normalization.tsv"), |w| write_profile(w, &profile))?;
    for f in Feature::ALL {
        let model = fit_logistic(&examples, f).map_err(|e| CliError::numeric(format!("{f}: {e}")))?;
        emit(&mut m, &out.join("logistic").join(format!("{f}.txt")), |w| model.write(w, f))?;
    }
    let (tree, report) = fit_tree_with_report(&examples, &tree_config(common)).map_err(CliError::numeric)?;
    emit(&mut m, &out.join("tree.txt"), |w| tree.write(w))?;
    emit(&mut m, &out.join("tree_cv.tsv"), |w| {
        use io::Write;
        writeln!(w, "# alpha\tcv_error\tse\tchosen")?;
        for i in 0..report.alphas.len() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                report.alphas[i],
                report.errors[i],
                report.std_errors[i],
                u8::from(i == report.chosen)
            )?;
        }
        Ok(())
    })?;
    m.write(&out.join("manifest.json"))
}

fn write_profile(w: &mut Vec<u8>, p: &NormalizationProfile) -> io::Result<()> {
    use io::Write;
    writeln!(w, "# feature\tdivisor\tsampled_players={}\tsampled_pairs={}", p.sampled_players, p.sampled_pairs)?;
    for f in Feature::ALL {
        writeln!(w, "{f}\t{}", p.divisor(f))?;
    }
    Ok(())
}

pub fn eval(args: &EvalArgs, common: &Common) -> Result<(), CliError> {
    run_eval(&args.inputs, &args.out, common, None)
}

fn run_eval(inputs: &ModelInputs, out: &Path, common: &Common, root: Option<&Path>) -> Result<(), CliError> {
    let mut m = manifest("eval", common, root);
    let (examples, _) = model_examples(inputs, common, &mut m)?;
    let table = eval::feature_table(&examples, common.seed).map_err(eval_err)?;
    create_dir(&out.join("roc"))?;
    emit(&mut m, &out.join("table.tsv"), |w| eval::write_table(w, &table))?;
    let (_, test) = eval::split_pairs(&examples, common.seed).map_err(eval_err)?;
    for row in &table {
        let sign = if row.model.coefficient < 0.0 { -1.0 } else { 1.0 };
        let scored: Vec<(f64, bool)> = test.iter().map(|e| (sign * e.features.get(row.feature), e.friend)).collect();
        let curve = roc_auc(&scored).map_err(CliError::numeric)?;
        emit(&mut m, &out.join("roc").join(format!("{}.tsv", row.feature)), |w| write_roc(w, &curve))?;
    }
    let trees = eval::compare_feature_sets(&examples, &eval::default_feature_sets(), &tree_config(common), common.seed)
        .map_err(eval_err)?;
    emit(&mut m, &out.join("trees.tsv"), |w| eval::write_tree_comparison(w, &trees))?;
    m.write(&out.join("manifest.json"))
}

pub fn robustness(args: &RobustnessArgs, common: &Common) -> Result<(), CliError> {
    run_robustness(&args.features, &args.labels, &args.store, &args.out, common, None)
}

fn run_robustness(
    features_path: &Path,
    labels_path: &Path,
    store_path: &Path,
    out: &Path,
    common: &Common,
    root: Option<&Path>,
) -> Result<(), CliError> {
    let mut m = manifest("robustness", common, root);
    let rows = load_rows(features_path, &mut m)?;
    let labels = load_labels(labels_path, &mut m)?;
    let store = load_store(store_path, common, &mut m)?;
    let examples = features::label_rows(&rows, &labels);
    let mut n_x = HashMap::new();
    for &p in store.players() {
        n_x.insert(p, store.games_played(p).map_err(|e| CliError::Usage(e.to_string()))? as u64);
    }
    let points = eval::robustness_study(
        &examples,
        &n_x,
        &Feature::ALL,
        usize::from(common.permutations),
        common.seed,
    )
    .map_err(eval_err)?;
    let ccdf = eval::activity_ccdf(&store).map_err(eval_err)?;
    create_dir(out)?;
    emit(&mut m, &out.join("robustness.tsv"), |w| eval::write_robustness(w, &points))?;
    emit(&mut m, &out.join("activity_ccdf.tsv"), |w| eval::write_activity_ccdf(w, &ccdf))?;
    m.write(&out.join("manifest.json"))
}

pub fn infer(args: &InferArgs, common: &Common) -> Result<(), CliError> {
    run_infer(&args.store, args.labels.as_deref(), &args.out, common, None).map(|_| ())
}

fn run_infer(
    store_path: &Path,
    labels: Option<&Path>,
    out: &Path,
    common: &Common,
    root: Option<&Path>,
) -> Result<InferredGraph, CliError> {
    let mut m = manifest("infer", common, root);
    let store = load_store(store_path, common, &mut m)?;
    let labels_path = labels.map(Path::to_path_buf).unwrap_or_else(|| sibling_labels(store_path));
    let labels = load_labels(&labels_path, &mut m)?;
    let cfg = common.autocorr();

    let scores = infer::score_raters(&store, labels.raters(), &cfg).map_err(infer_err)?;
    let survey = infer::survey_distribution(&labels).map_err(infer_err)?;
    let candidates = infer::candidate_thresholds(scores.all_scores(), infer::MAX_CANDIDATES);
    let under = infer::threshold_undersampled(&survey, &candidates, &scores, common.epsilon_kl);
    let over = infer::threshold_oversampled(survey.max_degree(), &candidates, &scores);
    let chosen: Selection = match common.threshold_rule {
        Rule::Under => under.as_ref().map_err(|e| CliError::numeric(e)).copied()?,
        Rule::Over => over.as_ref().map_err(|e| CliError::numeric(e)).copied()?,
    };
    let rule: ThresholdRule = common.threshold_rule.threshold_rule();

    let population = infer::score_population(&store, &cfg).map_err(infer_err)?;
    let g = infer::materialize(&population, chosen.threshold, rule);
    let stats = population
        .iter()
        .map(|p| p.ac)
        .fold(None, |acc: Option<(u64, u64)>, v| Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v)))))
        .map(|(lo, hi)| (lo as f64, hi as f64, population.len()));

    create_dir(out)?;
    emit(&mut m, &out.join("edges.tsv"), |w| graph::write_edges(w, &g, stats))?;
    emit(&mut m, &out.join("thresholds.tsv"), |w| {
        use io::Write;
        writeln!(w, "# rule\tthreshold\tkl\tmax_degree\tchosen")?;
        for (name, sel) in [("under", &under), ("over", &over)] {
            let picked = u8::from(name == rule.name());
            match sel {
                Ok(s) => {
                    // The oversampled rule ignores the survey shape; report its KL anyway.
                    let kl = infer::DegreeDistribution::from_degrees(&scores.degrees_at(s.threshold))
                        .map_or(f64::NAN, |q| infer::kl_divergence_smoothed(&survey, &q, common.epsilon_kl));
                    writeln!(w, "{name}\t{}\t{kl}\t{}\t{picked}", s.threshold, s.max_degree)?
                }
                Err(e) => writeln!(w, "# {name}\tunavailable: {e}")?,
            }
        }
        Ok(())
    })?;
    let survey_degrees: Vec<usize> = labels.friend_counts().into_values().collect();
    emit(&mut m, &out.join("survey_degrees.tsv"), |w| infer::write_degree_counts(w, &survey_degrees))?;
    let rater_degrees = scores.degrees_at(chosen.threshold);
    emit(&mut m, &out.join("rater_degrees.tsv"), |w| infer::write_degree_counts(w, &rater_degrees))?;
    m.write(&out.join("manifest.json"))?;
    Ok(g)
}

pub fn graphstats(args: &GraphstatsArgs, common: &Common) -> Result<(), CliError> {
    run_graphstats(&args.edges, &args.out, common, None)
}

fn run_graphstats(edges: &Path, out: &Path, common: &Common, root: Option<&Path>) -> Result<(), CliError> {
    let mut m = manifest("graphstats", common, root);
    m.input(edges)?;
    let g = graph::read_edges(open(edges)?).map_err(|e| CliError::input(edges, e))?;
    let s = g.summarize();
    create_dir(out)?;
    emit(&mut m, &out.join("degree_ccdf.tsv"), |w| graph::write_degree_ccdf(w, &s))?;
    emit(&mut m, &out.join("clustering_by_degree.tsv"), |w| graph::write_clustering_by_degree(w, &s))?;
    emit(&mut m, &out.join("clustering_histogram.tsv"), |w| graph::write_clustering_histogram(w, &s))?;
    emit(&mut m, &out.join("component_sizes.tsv"), |w| graph::write_component_sizes(w, &s))?;
    emit(&mut m, &out.join("summary.tsv"), |w| {
        use io::Write;
        writeln!(w, "# key\tvalue\tisolated nodes excluded")?;
        writeln!(w, "nodes\t{}", s.nodes)?;
        writeln!(w, "edges\t{}", s.edges)?;
        writeln!(w, "components\t{}", s.component_count)?;
        writeln!(w, "largest_component\t{}", s.largest_component)?;
        writeln!(w, "median_degree\t{}", s.median_degree)?;
        writeln!(w, "mean_degree\t{}", s.mean_degree)?;
        writeln!(w, "max_degree\t{}", s.max_degree)
    })?;
    m.write(&out.join("manifest.json"))
}

pub fn pipeline(args: &PipelineArgs, common: &Common) -> Result<(), CliError> {
    let root = args.out.as_path();
    create_dir(root)?;
    let world_dir = root.join("world");
    let events = world_dir.join("events.tsv");
    let labels = world_dir.join("labels.tsv");
    let feats = root.join("features.tsv");
    let r = Some(root);

    let world = run_synth(args.config.as_deref(), args.agents, args.days, &world_dir, common, r)?;
    run_features(&events, Some(&labels), false, &feats, common, r)?;
    let inputs = ModelInputs {
        features: feats.clone(),
        labels: labels.clone(),
        store: Some(events.clone()),
        norm_sample: DEFAULT_NORM_SAMPLE,
    };
    run_train(&inputs, &root.join("train"), common, r)?;
    run_eval(&inputs, &root.join("eval"), common, r)?;
    run_robustness(&feats, &labels, &events, &root.join("robustness"), common, r)?;
    let g = run_infer(&events, Some(&labels), &root.join("infer"), common, r)?;
    run_graphstats(&root.join("infer").join("edges.tsv"), &root.join("graph"), common, r)?;

    // Recovery of the planted graph among pairs that met in 3+ separate sessions.
    let mut m = manifest("pipeline", common, r);
    let universe = world.truth.pairs_with_sessions(3);
    let score = infer::edge_f1(&g.edges(), &world.truth.friendships, Some(&universe));
    emit(&mut m, &root.join("recovery.tsv"), |w| {
        use io::Write;
        writeln!(w, "# min_sessions\ttp\tfp\tfn\tprecision\trecall\tf1")?;
        writeln!(
            w,
            "3\t{}\t{}\t{}\t{}\t{}\t{}",
            score.true_positives, score.false_positives, score.false_negatives, score.precision, score.recall, score.f1
        )
    })?;
    for step in ["world", "train", "eval", "robustness", "infer", "graph"] {
        m.input(&root.join(step).join("manifest.json"))?;
    }
    let mut name = feats.into_os_string();
    name.push(".manifest.json");
    m.input(Path::new(&name))?;
    m.write(&root.join("manifest.json"))
}
