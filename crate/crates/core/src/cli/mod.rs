//! Command-line surface: the run configuration document, world bundles,
//! manifests and the subcommands behind the `navworld` binary.
//!
//! Exit codes: 0 ok, 2 config error, 3 generation contradiction, 4 IO or
//! malformed input file, 5 invariant violation during rollout, 6 all-zero
//! curriculum fitness beyond the re-seed budget.

mod config;

pub use config::{CurriculumConfig, Layout, RunConfig, WorldConfig, SCHEMA_VERSION};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::episode::{
    proxy_traversal_scores, rollout_batch, EpisodeRun, ReplayRecord, RolloutError, World, WorldBuildError,
};
use crate::eval::{bucket_table, EpisodeSummary, MetricsReport};
use crate::navgraph::{build_nav_graph, shortest_path, NavGraph};
use crate::terrain::{CurriculumRecord, HeightField, TerrainError};
use crate::worldgen::{presets, validate_adjacency, wfc_generate_with, TileCatalog, TileMap, WorldgenError};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONTRADICTION: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;
pub const EXIT_ALL_ZERO_FITNESS: i32 = 6;

/// Error carrying its process exit code; printed to stderr as JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, kind: "config", message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { code: EXIT_IO, kind: "io", message: message.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} error: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<WorldgenError> for CliError {
    fn from(e: WorldgenError) -> Self {
        match e {
            WorldgenError::ContradictionAfterRetries(_) => {
                CliError { code: EXIT_CONTRADICTION, kind: "contradiction", message: e.to_string() }
            }
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<WorldBuildError> for CliError {
    fn from(e: WorldBuildError) -> Self {
        CliError::config(e.to_string())
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(format!("{}: {e}", path.display()))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Record of what a subcommand produced: tool version, resolved config and its
/// hash, the seed, input hashes and a sha256 per output file. No timestamps, so
/// equal inputs give a byte-identical manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub config: RunConfig,
    pub inputs: BTreeMap<String, String>,
    pub files: BTreeMap<String, String>,
}

/// Collects output files under one directory together with their hashes.
struct OutDir {
    root: PathBuf,
    files: BTreeMap<String, String>,
}

impl OutDir {
    fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(OutDir { root: root.to_path_buf(), files: BTreeMap::new() })
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.files.insert(rel.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Hash files some other writer already put under the root.
    fn track(&mut self, rel: &str) -> Result<(), CliError> {
        let path = self.root.join(rel);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        self.files.insert(rel.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    fn finish(self, command: &str, cfg: &RunConfig, inputs: BTreeMap<String, String>) -> Result<Manifest, CliError> {
        let config_json = serde_json::to_string(cfg).expect("config serialises");
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: cfg.seed,
            config_sha256: sha256_hex(config_json.as_bytes()),
            config: cfg.clone(),
            inputs,
            files: self.files,
        };
        let path = self.root.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        fs::write(&path, text + "\n").map_err(io_err(&path))?;
        Ok(manifest)
    }
}

/// A generated world as stored on disk.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub map: TileMap,
    pub catalog: TileCatalog,
    pub world: World,
}

pub const TILEMAP_FILE: &str = "tilemap.json";
pub const CATALOG_FILE: &str = "catalog.json";
pub const HEIGHTFIELD_BASE: &str = "heightfield";
pub const GRAPH_FILE: &str = "graph.json";

/// Build the world described by `cfg`; relative catalog paths resolve against `base`.
pub fn build_world(cfg: &RunConfig, base: &Path) -> Result<Bundle, CliError> {
    let w = &cfg.world;
    let (map, catalog) = match w.layout {
        Layout::Wfc => {
            let catalog = w.load_catalog(base)?;
            let map = wfc_generate_with(&catalog, w.width, w.height, cfg.seed, &w.wfc_options())?;
            (map, catalog)
        }
        Layout::Corridor => presets::straight_corridor(w.width, cfg.seed),
    };
    let map = map.with_tile_size(w.tile_size);
    let violations = validate_adjacency(&map, &catalog)?;
    if !violations.is_empty() {
        return Err(CliError {
            code: EXIT_CONTRADICTION,
            kind: "contradiction",
            message: format!("{} adjacency violations in generated map", violations.len()),
        });
    }
    let world = World::build(&map, &catalog, &cfg.terrain, w.resolution)?;
    Ok(Bundle { map, catalog, world })
}

pub fn write_bundle(bundle: &Bundle, cfg: &RunConfig, out: &Path) -> Result<Manifest, CliError> {
    let mut dir = OutDir::create(out)?;
    dir.write(TILEMAP_FILE, serde_json::to_string_pretty(&bundle.map).expect("map serialises").as_bytes())?;
    dir.write(CATALOG_FILE, bundle.catalog.to_json().as_bytes())?;
    let field = &bundle.world.field;
    field.write(&out.join(HEIGHTFIELD_BASE)).map_err(|e| CliError::io(e.to_string()))?;
    for ext in ["f32", "friction.f32", "json"] {
        dir.track(&format!("{HEIGHTFIELD_BASE}.{ext}"))?;
    }
    dir.write(GRAPH_FILE, bundle.world.graph.to_json().as_bytes())?;
    dir.finish("generate", cfg, BTreeMap::new())
}

/// Load and validate a bundle: the map must satisfy its catalog and the stored
/// graph must equal the one rebuilt from map, catalog and field.
pub fn read_bundle(dir: &Path) -> Result<Bundle, CliError> {
    let read = |rel: &str| {
        let p = dir.join(rel);
        fs::read_to_string(&p).map_err(io_err(&p))
    };
    let bad = |what: &str, e: String| CliError::io(format!("{}: invalid {what}: {e}", dir.display()));
    let map: TileMap = serde_json::from_str(&read(TILEMAP_FILE)?).map_err(|e| bad("tile map", e.to_string()))?;
    let catalog = TileCatalog::from_json(&read(CATALOG_FILE)?).map_err(|e| bad("catalog", e.to_string()))?;
    let field = HeightField::read(&dir.join(HEIGHTFIELD_BASE)).map_err(|e| match e {
        TerrainError::Io(e) => CliError::io(e.to_string()),
        e => bad("height field", e.to_string()),
    })?;
    let graph = NavGraph::from_json(&read(GRAPH_FILE)?).map_err(|e| bad("graph", e.to_string()))?;
    let violations = validate_adjacency(&map, &catalog).map_err(|e| bad("tile map", e.to_string()))?;
    if !violations.is_empty() {
        return Err(bad("tile map", format!("{} adjacency violations", violations.len())));
    }
    let mut rebuilt = build_nav_graph(&map, &catalog).map_err(|e| bad("graph", e.to_string()))?;
    rebuilt.attach_elevations(&field);
    if rebuilt != graph {
        return Err(bad("graph", "does not match the tile map".into()));
    }
    Ok(Bundle { map, catalog, world: World { field, graph } })
}

fn bundle_hash(dir: &Path) -> Result<String, CliError> {
    let p = dir.join("manifest.json");
    Ok(sha256_hex(&fs::read(&p).map_err(io_err(&p))?))
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))
}

fn jsonl<T: Serialize>(items: &[T]) -> String {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it).expect("record serialises"));
        s.push('\n');
    }
    s
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::io(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn replay_file_name(index: usize) -> String {
    format!("replays/episode_{index:05}.jsonl")
}

/// Write metrics.json and buckets.csv for `summaries` into `dir`.
fn write_metrics(dir: &mut OutDir, summaries: &[EpisodeSummary]) -> Result<MetricsReport, CliError> {
    let report = MetricsReport::from_summaries(summaries);
    dir.write("metrics.json", (report.to_json() + "\n").as_bytes())?;
    dir.write("buckets.csv", bucket_table(summaries).as_bytes())?;
    Ok(report)
}

pub fn cmd_generate(cfg: &RunConfig, config_dir: &Path, out: &Path) -> Result<Manifest, CliError> {
    let bundle = build_world(cfg, config_dir)?;
    write_bundle(&bundle, cfg, out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub path: Option<PathSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSummary {
    pub nodes: Vec<usize>,
    pub length: f64,
}

/// Rebuild the bundle's graph, optionally write it and answer a shortest-path query.
pub fn cmd_graph(world: &Path, query: Option<(usize, usize)>, out: Option<&Path>) -> Result<GraphSummary, CliError> {
    let bundle = read_bundle(world)?;
    let graph = &bundle.world.graph;
    if let Some(out) = out {
        fs::create_dir_all(out).map_err(io_err(out))?;
        let p = out.join(GRAPH_FILE);
        fs::write(&p, graph.to_json()).map_err(io_err(&p))?;
    }
    let path = match query {
        Some((a, b)) => {
            let p = shortest_path(graph, a, b).map_err(|e| CliError::config(e.to_string()))?;
            Some(PathSummary { nodes: p.nodes, length: p.length })
        }
        None => None,
    };
    Ok(GraphSummary { nodes: graph.nodes().len(), edges: graph.edges().len(), path })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutOutput {
    pub report: MetricsReport,
    pub manifest: Manifest,
}

/// Run `episodes` scripted-policy episodes in `world` on `threads` threads
/// (0 = all cores). Outputs do not depend on the thread count.
pub fn cmd_rollout(cfg: &RunConfig, world: &Path, episodes: usize, threads: usize, out: &Path) -> Result<RolloutOutput, CliError> {
    let bundle = read_bundle(world)?;
    let world_arc = Arc::new(bundle.world);
    let pool = thread_pool(threads)?;
    let runs = pool.install(|| rollout_batch(world_arc, &cfg.episode, &cfg.policy, &cfg.eval, episodes, cfg.seed));
    let mut dir = OutDir::create(out)?;
    let runs: Vec<EpisodeRun> = match runs {
        Ok(r) => r,
        Err(RolloutError::Invariant(v)) => {
            dir.write("diagnostic.json", serde_json::to_string_pretty(&v).expect("diagnostic serialises").as_bytes())?;
            return Err(CliError { code: EXIT_INVARIANT, kind: "invariant", message: RolloutError::Invariant(v).to_string() });
        }
        Err(e) => return Err(CliError::config(e.to_string())),
    };
    let mut summaries = Vec::with_capacity(runs.len());
    for run in runs {
        dir.write(&replay_file_name(run.summary.index), jsonl(&run.records).as_bytes())?;
        summaries.push(run.summary);
    }
    dir.write("episodes.jsonl", jsonl(&summaries).as_bytes())?;
    let report = write_metrics(&mut dir, &summaries)?;
    let inputs = BTreeMap::from([("world_manifest".to_string(), bundle_hash(world)?)]);
    let manifest = dir.finish("rollout", cfg, inputs)?;
    Ok(RolloutOutput { report, manifest })
}

/// Recompute metrics.json and buckets.csv from a rollout's episodes.jsonl.
pub fn cmd_eval(run: &Path, out: &Path) -> Result<MetricsReport, CliError> {
    let summaries: Vec<EpisodeSummary> = parse_jsonl(&run.join("episodes.jsonl"))?;
    let mut dir = OutDir::create(out)?;
    write_metrics(&mut dir, &summaries)
}

pub const REPLAY_CSV_HEADER: &str =
    "t,x,y,z,yaw,a_vx,a_vy,a_wz,wp1_x,wp1_y,wp2_x,wp2_y,goal_x,goal_y,r_high,r_low,done,reason";

pub fn replay_to_csv(records: &[ReplayRecord]) -> String {
    let mut s = String::from(REPLAY_CSV_HEADER);
    s.push('\n');
    for r in records {
        let reason = r.reason.map(|x| format!("{x:?}")).unwrap_or_default();
        let p = &r.pose;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            p.x,
            p.y,
            p.z,
            p.yaw,
            r.action[0],
            r.action[1],
            r.action[2],
            r.wp1.x,
            r.wp1.y,
            r.wp2.x,
            r.wp2.y,
            r.goal.x,
            r.goal.y,
            r.reward.r_high,
            r.reward.r_low,
            r.done,
            reason
        );
    }
    s
}

pub fn cmd_replay_export(replay: &Path) -> Result<String, CliError> {
    let records: Vec<ReplayRecord> = parse_jsonl(replay)?;
    Ok(replay_to_csv(&records))
}

/// Run the minimal-criterion filter, scoring parameter sets with proxy trials.
pub fn cmd_filter_terrain(cfg: &RunConfig, generations: usize, threads: usize, out: &Path) -> Result<Vec<CurriculumRecord>, CliError> {
    if generations == 0 {
        return Err(CliError::config("generations must be at least 1"));
    }
    let c = &cfg.curriculum;
    let proxy = cfg.episode.proxy;
    let ll_dt = cfg.episode.ll_dt;
    let evaluate = |p: &crate::terrain::TerrainParams, seed: u64| {
        proxy_traversal_scores(p, c.trials, seed, &proxy, ll_dt).unwrap_or_else(|_| vec![0.0; c.trials])
    };
    let mut log = String::new();
    let pool = thread_pool(threads)?;
    let result = pool.install(|| c.search.run(generations, cfg.seed, evaluate, |gen| log.push_str(&jsonl(gen))));
    let mut dir = OutDir::create(out)?;
    dir.write("curriculum.jsonl", log.as_bytes())?;
    let records = match result {
        Ok(r) => r,
        Err(TerrainError::AllZeroFitness) => {
            dir.finish("filter-terrain", cfg, BTreeMap::new())?;
            return Err(CliError {
                code: EXIT_ALL_ZERO_FITNESS,
                kind: "all_zero_fitness",
                message: format!("no parameter set met the minimal criterion after {} re-seeds", c.search.reseed_budget),
            });
        }
        Err(e) => return Err(CliError::config(e.to_string())),
    };
    let population = serde_json::json!({
        "generation": generations - 1,
        "size": records.len(),
        "positive_fitness": records.iter().filter(|r| r.fitness > 0.0).count(),
        "params": records.iter().map(|r| r.params).collect::<Vec<_>>(),
    });
    dir.write("population.json", (serde_json::to_string_pretty(&population).expect("summary serialises") + "\n").as_bytes())?;
    dir.finish("filter-terrain", cfg, BTreeMap::new())?;
    Ok(records)
}

#[derive(Debug, Parser)]
#[command(name = "navworld", version, about = "Procedural navigation worlds, scripted rollouts and metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Run configuration (JSON). Defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    #[arg(long, env = "NAVWORLD_OUT")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ThreadArgs {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, env = "NAVWORLD_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a world bundle (tile map, catalog, height field, graph).
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Summarize a bundle's navigation graph, optionally with a shortest-path query.
    Graph {
        #[arg(long)]
        world: PathBuf,
        #[arg(long)]
        from: Option<usize>,
        #[arg(long, requires = "from")]
        to: Option<usize>,
        /// Directory to write graph.json into.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run scripted-policy episodes in a bundle and write replays and metrics.
    Rollout {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        world: PathBuf,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[command(flatten)]
        threads: ThreadArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Evolve terrain parameters under the minimal criterion.
    FilterTerrain {
        #[command(flatten)]
        config: ConfigArgs,
        /// Defaults to the config's curriculum.generations.
        #[arg(long)]
        generations: Option<usize>,
        #[command(flatten)]
        threads: ThreadArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Recompute metrics from a rollout directory.
    Eval {
        #[arg(long)]
        run: PathBuf,
        /// Defaults to the rollout directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a replay log to CSV (stdout unless --out is given).
    ReplayExport {
        #[arg(long)]
        replay: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve_config(args: &ConfigArgs) -> Result<(RunConfig, PathBuf), CliError> {
    let (mut cfg, base) = match &args.config {
        Some(p) => (RunConfig::load(p)?, p.parent().map(Path::to_path_buf).unwrap_or_default()),
        None => (RunConfig::default(), PathBuf::from(".")),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok((cfg, base))
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string(v).expect("output serialises"));
}

/// Execute a parsed command line; the result's error code is the exit status.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { config, out } => {
            let (cfg, base) = resolve_config(&config)?;
            let m = cmd_generate(&cfg, &base, &out.out)?;
            print_json(&serde_json::json!({ "out": out.out, "files": m.files.len(), "seed": m.seed }));
        }
        Command::Graph { world, from, to, out } => {
            let query = from.zip(to);
            print_json(&cmd_graph(&world, query, out.as_deref())?);
        }
        Command::Rollout { config, world, episodes, threads, out } => {
            let (cfg, _) = resolve_config(&config)?;
            let r = cmd_rollout(&cfg, &world, episodes, threads.threads, &out.out)?;
            print_json(&r.report);
        }
        Command::FilterTerrain { config, generations, threads, out } => {
            let (cfg, _) = resolve_config(&config)?;
            let g = generations.unwrap_or(cfg.curriculum.generations);
            let records = cmd_filter_terrain(&cfg, g, threads.threads, &out.out)?;
            let positive = records.iter().filter(|r| r.fitness > 0.0).count();
            print_json(&serde_json::json!({ "generations": g, "population": records.len(), "positive_fitness": positive }));
        }
        Command::Eval { run, out } => {
            let out = out.unwrap_or_else(|| run.clone());
            print_json(&cmd_eval(&run, &out)?);
        }
        Command::ReplayExport { replay, out } => {
            let csv = cmd_replay_export(&replay)?;
            match out {
                Some(p) => fs::write(&p, csv).map_err(io_err(&p))?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

/// Entry point for the binary: parse arguments, run, report errors as JSON on
/// stderr and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.code
        }
    }
}
