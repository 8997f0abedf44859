use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use psynet::bootstrap::{
    case_dropping_boot, check_alpha, cs_coefficients, default_drop_levels, difference_matrix, difference_test,
    edge_ci, node_dropping_boot, nonparametric_boot, parametric_boot, BootstrapKind, Element, Statistic, SubsetKind,
};
use psynet::centrality::centrality_table;
use psynet::ggm::estimate_network;
use psynet::ingest::{load_table, LoadOptions};
use psynet::io::{self, write_file, NetworkFile};
use psynet::seed::derive_seed;
use psynet::simgen::{run_study, SimulationConfig};
use psynet::{Dataset, Network};

use crate::manifest::RunManifest;
use crate::{
    plot, BootstrapArgs, CentralityArgs, Cli, Command, DifftestArgs, EstArgs, EstimateArgs, Format, GlobalArgs,
    PlotArgs, SimulateArgs, StabilityArgs,
};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_FAILURE: u8 = 3;

/// Share of failed replications above which `simulate` reports failure.
const MAX_SIMULATION_FAILURE_RATE: f64 = 0.10;

/// An error that carries its own exit code.
#[derive(Debug)]
pub struct Exit {
    code: u8,
    message: String,
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    Exit {
        code: EXIT_USAGE,
        message: message.into(),
    }
    .into()
}

fn classify(e: &psynet::Error) -> u8 {
    use psynet::Error::*;
    match e {
        FileNotFound(_) | Io { .. } | Csv(_) | Json(_) | RaggedRow { .. } | NoColumns | NonNumeric { .. }
        | DegenerateColumn(_) | InvalidData(_) | ConstantInput | InvalidCorrelation(_) | DegenerateTable(_) => {
            EXIT_DATA
        }
        InvalidArgument(_) | AlphaBelowFloor { .. } | UnknownElement(_) | NodeOutOfRange { .. }
        | TooFewRetained { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(x) = cause.downcast_ref::<Exit>() {
            return x.code;
        }
        if let Some(pe) = cause.downcast_ref::<psynet::Error>() {
            return classify(pe);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_DATA;
        }
    }
    EXIT_FAILURE
}

fn generated_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos() as u64);
    // keep it JSON-safe for tools that read numbers as doubles
    derive_seed(nanos, &[std::process::id() as u64]) >> 11
}

/// Shared state of one invocation.
struct Ctx {
    global: GlobalArgs,
    seed: u64,
    manifest: RunManifest,
    outputs: Vec<PathBuf>,
}

impl Ctx {
    fn dir(&self) -> &Path {
        &self.global.output_dir
    }

    fn out(&self, name: &str) -> PathBuf {
        self.global.output_dir.join(name)
    }

    fn wrote(&mut self, paths: impl IntoIterator<Item = PathBuf>) {
        self.outputs.extend(paths);
    }

    fn warn(&mut self, w: String) {
        eprintln!("warning: {w}");
        self.manifest.warnings.push(w);
    }

    fn finish(mut self) -> Result<()> {
        let dir = self.global.output_dir.clone();
        self.manifest.add_outputs(&dir, &self.outputs);
        self.manifest.write(&dir)?;
        Ok(())
    }

    fn load_dataset(&mut self, est: &EstArgs) -> Result<Dataset> {
        let input = self
            .global
            .input
            .clone()
            .ok_or_else(|| usage("--input is required for this command"))?;
        let ds = load_table(&input, &LoadOptions::default())?;
        self.manifest.add_input(&input)?;
        Ok(ds.with_missing_policy(est.missing_policy()))
    }
}

fn options_map(global: &GlobalArgs, args: &impl Serialize, seed: u64) -> Result<serde_json::Map<String, Value>> {
    let mut map = serde_json::Map::new();
    for v in [serde_json::to_value(global)?, serde_json::to_value(args)?] {
        if let Value::Object(o) = v {
            map.extend(o);
        }
    }
    map.remove("config");
    map.insert("seed".into(), Value::from(seed));
    Ok(map)
}

pub fn run(cli: Cli) -> Result<()> {
    let global = cli.global;
    let (seed, generated) = match global.seed {
        Some(s) => (s, false),
        None => (generated_seed(), true),
    };
    let (name, options) = match &cli.command {
        Command::Estimate(a) => ("estimate", options_map(&global, a, seed)?),
        Command::Centrality(a) => ("centrality", options_map(&global, a, seed)?),
        Command::Bootstrap(a) => ("bootstrap", options_map(&global, a, seed)?),
        Command::Stability(a) => ("stability", options_map(&global, a, seed)?),
        Command::Difftest(a) => ("difftest", options_map(&global, a, seed)?),
        Command::Simulate(a) => ("simulate", options_map(&global, a, seed)?),
        Command::Plot(a) => ("plot", options_map(&global, a, seed)?),
    };
    std::fs::create_dir_all(&global.output_dir)
        .with_context(|| format!("creating {}", global.output_dir.display()))?;
    let mut ctx = Ctx {
        manifest: RunManifest::new(name, options, Some(seed), generated),
        global,
        seed,
        outputs: Vec::new(),
    };
    match cli.command {
        Command::Estimate(a) => estimate(&mut ctx, &a)?,
        Command::Centrality(a) => centrality(&mut ctx, &a)?,
        Command::Bootstrap(a) => bootstrap(&mut ctx, &a)?,
        Command::Stability(a) => stability(&mut ctx, &a)?,
        Command::Difftest(a) => difftest(&mut ctx, &a)?,
        Command::Simulate(a) => return simulate(ctx, &a),
        Command::Plot(a) => return plot_cmd(ctx, &a),
    }
    ctx.finish()
}

/// Print rows to stdout as CSV or as a JSON array of objects.
fn report(format: Format, header: &[&str], rows: &[Vec<String>]) {
    match format {
        Format::Csv => {
            println!("{}", header.join(","));
            for r in rows {
                println!("{}", r.join(","));
            }
        }
        Format::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let obj: serde_json::Map<String, Value> = header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| {
                            let val = v
                                .parse::<f64>()
                                .ok()
                                .and_then(|x| serde_json::Number::from_f64(x).map(Value::Number))
                                .unwrap_or_else(|| Value::String(v.clone()));
                            (h.to_string(), val)
                        })
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&arr).unwrap_or_default());
        }
    }
}

fn write_network_files(ctx: &mut Ctx, network: &Network) -> Result<()> {
    let (edges, weights, json) = (ctx.out("edges.csv"), ctx.out("weights.csv"), ctx.out("network.json"));
    write_file(&edges, |w| io::write_edge_list(w, network))?;
    write_file(&weights, |w| io::write_matrix_csv(w, network.labels(), network.weights()))?;
    io::write_json(&json, &NetworkFile::from_network(network))?;
    ctx.wrote([edges, weights, json]);
    Ok(())
}

fn write_centrality(ctx: &mut Ctx, network: &Network, draw: bool) -> Result<()> {
    let table = centrality_table(network);
    let path = ctx.out("centrality.csv");
    write_file(&path, |w| io::write_centrality_csv(w, &table))?;
    ctx.wrote([path]);
    if draw {
        let svg = plot::centrality(ctx.dir(), ctx.dir())?;
        ctx.wrote([svg]);
    }
    let rows: Vec<Vec<String>> = (0..table.labels.len())
        .map(|k| {
            vec![
                table.labels[k].clone(),
                io::fmt_num(table.strength[k]),
                io::fmt_num(table.closeness[k]),
                io::fmt_num(table.betweenness[k]),
            ]
        })
        .collect();
    report(ctx.global.format, &["node", "strength", "closeness", "betweenness"], &rows);
    Ok(())
}

fn estimate(ctx: &mut Ctx, a: &EstimateArgs) -> Result<()> {
    let ds = ctx.load_dataset(&a.est)?;
    let est = estimate_network(&ds, &a.est.options())?;
    for w in &est.warnings {
        ctx.warn(w.clone());
    }
    let cor = ctx.out("correlation.csv");
    write_file(&cor, |w| io::write_correlation_csv(w, &est.correlation))?;
    ctx.wrote([cor]);
    write_network_files(ctx, &est.network)?;
    if let Some(path) = &est.path {
        let file = ctx.out("path.csv");
        let mut text = String::from("lambda,ebic,edges,selected\n");
        for k in 0..path.lambdas.len() {
            text += &format!(
                "{},{},{},{}\n",
                io::fmt_num(path.lambdas[k]),
                io::fmt_num(path.ebic_values[k]),
                path.edge_counts[k],
                u8::from(k == path.selected_index)
            );
        }
        std::fs::write(&file, text).with_context(|| format!("writing {}", file.display()))?;
        ctx.wrote([file]);
    }
    if !a.no_plot {
        let svg = plot::network(ctx.dir(), ctx.dir(), ctx.seed)?;
        ctx.wrote([svg]);
    }
    eprintln!(
        "{} nodes, {} edges{}",
        est.network.p(),
        est.network.edge_count(),
        est.selected_lambda.map_or(String::new(), |l| format!(", lambda = {l}"))
    );
    write_centrality(ctx, &est.network, !a.no_plot)
}

fn load_network(path: &Path) -> Result<Network> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let f: NetworkFile = io::read_json(path)?;
        Ok(f.to_network()?)
    } else {
        let (labels, w) = io::read_matrix_csv(path)?;
        Ok(Network::new(w, labels)?)
    }
}

fn centrality(ctx: &mut Ctx, a: &CentralityArgs) -> Result<()> {
    let network = match &a.network {
        Some(p) => {
            let n = load_network(p)?;
            ctx.manifest.add_input(p)?;
            n
        }
        None => {
            let ds = ctx.load_dataset(&a.est)?;
            let est = estimate_network(&ds, &a.est.options())?;
            for w in &est.warnings {
                ctx.warn(w.clone());
            }
            est.network
        }
    };
    write_centrality(ctx, &network, !a.no_plot)
}

fn bootstrap(ctx: &mut Ctx, a: &BootstrapArgs) -> Result<()> {
    check_alpha(a.alpha, a.n_boots)?;
    let ds = ctx.load_dataset(&a.est)?;
    let opts = a.est.options();
    let workers = ctx.global.workers;
    let result = match a.kind {
        BootstrapKind::Nonparametric => nonparametric_boot(&ds, &opts, a.n_boots, ctx.seed, workers)?,
        BootstrapKind::Parametric => {
            let net = estimate_network(&ds, &opts)?.network;
            parametric_boot(&net, ds.n(), &opts, a.n_boots, ctx.seed, workers)?
        }
    };
    ctx.manifest.shrinkage_warning = Some(result.shrinkage_warning);
    if result.shrinkage_warning {
        ctx.warn("parametric bootstrap from a regularized network: intervals are biased toward zero".into());
    }
    let failures = result.failures();
    if !failures.is_empty() {
        ctx.warn(format!("{} of {} replicates failed", failures.len(), result.n_boots));
    }
    let saved = io::save_bootstrap(ctx.dir(), &result)?;
    ctx.wrote(saved);

    let cis = edge_ci(&result, a.alpha)?;
    let ci_path = ctx.out("edge_ci.csv");
    write_file(&ci_path, |w| io::write_edge_ci_csv(w, result.labels(), &cis))?;
    ctx.wrote([ci_path]);
    for stat in [Statistic::Edge, Statistic::Strength] {
        let m = difference_matrix(&result, stat, a.alpha, true)?;
        let path = ctx.out(&format!("diff_{}.csv", stat.name()));
        write_file(&path, |w| io::write_difference_matrix_csv(w, &m))?;
        ctx.wrote([path]);
    }
    if !a.no_plot {
        let dir = ctx.dir().to_path_buf();
        let mut svgs = vec![plot::edge_ci(&dir, &dir)?];
        for stat in ["edge", "strength"] {
            svgs.push(plot::difference(&dir, &dir, stat)?);
        }
        ctx.wrote(svgs);
    }
    eprintln!("{} of {} replicates succeeded", result.n_successful(), result.n_boots);
    let rows: Vec<Vec<String>> = cis
        .iter()
        .map(|c| {
            vec![
                psynet::bootstrap::Element::edge(c.i, c.j).label(result.labels()),
                io::fmt_num(c.sample),
                io::fmt_num(c.lower),
                io::fmt_num(c.upper),
            ]
        })
        .collect();
    report(ctx.global.format, &["edge", "sample", "lower", "upper"], &rows);
    Ok(())
}

/// A single whole number `k >= 2` means `k` levels evenly spaced over
/// [0.1, 0.75]; anything else is taken as the list of proportions.
fn resolve_drop_levels(v: &[f64]) -> Result<Vec<f64>> {
    if let [k] = v {
        if *k >= 1.0 {
            if k.fract() != 0.0 || *k < 2.0 {
                return Err(usage(format!("--drop-levels {k}: need a count of at least 2 or proportions in [0, 1)")));
            }
            let k = *k as usize;
            if k == 10 {
                return Ok(default_drop_levels());
            }
            return Ok((0..k).map(|i| 0.1 + 0.65 * i as f64 / (k - 1) as f64).collect());
        }
    }
    Ok(v.to_vec())
}

/// Interpretation against the usual 0.25 / 0.5 guidance.
pub fn cs_guidance(cs: f64) -> &'static str {
    if cs < 0.25 {
        "below 0.25: too unstable to interpret"
    } else if cs < 0.5 {
        "at least 0.25 but below the preferred 0.5"
    } else {
        "at least 0.5: stable"
    }
}

fn stability(ctx: &mut Ctx, a: &StabilityArgs) -> Result<()> {
    let levels = resolve_drop_levels(&a.drop_levels)?;
    let ds = ctx.load_dataset(&a.est)?;
    let opts = a.est.options();
    let workers = ctx.global.workers;
    let result = match a.kind {
        SubsetKind::Case => case_dropping_boot(&ds, &opts, &levels, a.n_boots, ctx.seed, workers)?,
        SubsetKind::Node => node_dropping_boot(&ds, &opts, &levels, a.n_boots, ctx.seed, workers)?,
    };
    if result.n_failed() > 0 {
        ctx.warn(format!("{} subset replicates failed", result.n_failed()));
    }
    let subset = ctx.out("subset.csv");
    write_file(&subset, |w| io::write_subset_csv(w, &result))?;
    let cs = cs_coefficients(&result, a.cor_threshold, a.probability);
    let cs_path = ctx.out("cs.csv");
    write_file(&cs_path, |w| io::write_cs_csv(w, &cs))?;
    ctx.wrote([subset, cs_path]);
    if !a.no_plot {
        let svg = plot::stability(ctx.dir(), ctx.dir())?;
        ctx.wrote([svg]);
    }
    let rows: Vec<Vec<String>> = cs
        .iter()
        .map(|c| vec![c.index.name().to_owned(), io::fmt_num(c.value), cs_guidance(c.value).to_owned()])
        .collect();
    report(ctx.global.format, &["index", "cs", "guidance"], &rows);
    Ok(())
}

fn difftest(ctx: &mut Ctx, a: &DifftestArgs) -> Result<()> {
    let result = io::load_bootstrap(&a.run_dir)?;
    for f in [io::BOOTSTRAP_META, io::BOOTSTRAP_REPLICATES] {
        ctx.manifest.add_input(&a.run_dir.join(f))?;
    }
    let ea = Element::parse(&a.a, a.stat, result.labels())?;
    let eb = Element::parse(&a.b, a.stat, result.labels())?;
    let t = difference_test(&result, ea, eb, a.stat, a.alpha)?;
    let path = ctx.out("difftest.json");
    io::write_json(&path, &t)?;
    ctx.wrote([path]);
    let verdict = if t.significant { "significant" } else { "not significant" };
    report(
        ctx.global.format,
        &["statistic", "a", "b", "alpha", "lower", "upper", "verdict"],
        &[vec![
            t.statistic.name().to_owned(),
            t.element_a.clone(),
            t.element_b.clone(),
            io::fmt_num(t.alpha),
            io::fmt_num(t.ci_lower),
            io::fmt_num(t.ci_upper),
            verdict.to_owned(),
        ]],
    );
    Ok(())
}

fn simulate(mut ctx: Ctx, a: &SimulateArgs) -> Result<()> {
    let mut cfg = SimulationConfig::for_study(a.study);
    if let Some(v) = a.reps {
        cfg.replications = v;
    }
    if let Some(v) = a.n_boots {
        cfg.n_boots = v;
    }
    if let Some(v) = &a.sample_sizes {
        cfg.sample_sizes = v.clone();
    }
    if let Some(v) = &a.rewiring {
        cfg.rewiring = v.clone();
    }
    if let Some(v) = a.nodes {
        cfg.p = v;
    }
    if let Some(v) = a.edge_weight {
        cfg.edge_weight = v;
    }
    if let Some(v) = a.negative_proportion {
        cfg.negative_proportion = v;
    }
    if let Some(v) = a.ordinal_levels {
        cfg.ordinal_levels = v;
    }
    if let Some(v) = &a.drop_levels {
        cfg.drop_levels = resolve_drop_levels(v)?;
    }
    if let Some(v) = &a.alphas {
        cfg.alphas = v.clone();
    }
    if let Some(v) = a.cor_threshold {
        cfg.cor_threshold = v;
    }
    if let Some(v) = a.probability {
        cfg.probability = v;
    }
    cfg.base_seed = ctx.seed;
    cfg.estimation = a.est.options();

    let result = run_study(&cfg, a.study, ctx.global.workers)?;
    let csv = ctx.out("simulation.csv");
    write_file(&csv, |w| io::write_simulation_csv(w, &result))?;
    let summary = ctx.out("summary.json");
    io::write_simulation_summary(&summary, &result)?;
    ctx.wrote([csv, summary]);
    if !a.no_plot {
        let svg = plot::simulation(ctx.dir(), ctx.dir())?;
        ctx.wrote([svg]);
    }
    let rows: Vec<Vec<String>> = result
        .summaries
        .iter()
        .map(|s| {
            vec![
                io::fmt_num(s.rewiring),
                s.n.to_string(),
                s.metric.clone(),
                s.alpha.map(io::fmt_num).unwrap_or_default(),
                s.count.to_string(),
                io::fmt_num(s.mean),
                io::fmt_num(s.se),
            ]
        })
        .collect();
    report(ctx.global.format, &["rewiring", "n", "metric", "alpha", "count", "mean", "se"], &rows);

    let rate = result.failure_rate();
    if rate > 0.0 {
        ctx.warn(format!("{} of {} replications failed", result.failures.len(), result.n_jobs));
    }
    ctx.finish()?;
    if rate > MAX_SIMULATION_FAILURE_RATE {
        return Err(Exit {
            code: EXIT_FAILURE,
            message: format!(
                "{:.1}% of replications failed (limit {:.0}%)",
                100.0 * rate,
                100.0 * MAX_SIMULATION_FAILURE_RATE
            ),
        }
        .into());
    }
    Ok(())
}

fn plot_cmd(mut ctx: Ctx, a: &PlotArgs) -> Result<()> {
    let src = a.run_dir.clone().unwrap_or_else(|| ctx.global.output_dir.clone());
    // the layout seed of the original run, when there is one
    let seed = io::read_json::<Value>(&src.join(crate::manifest::FILE_NAME))
        .ok()
        .and_then(|m| m.get("base_seed").and_then(Value::as_u64))
        .filter(|_| ctx.global.seed.is_none())
        .unwrap_or(ctx.seed);
    let dst = ctx.global.output_dir.clone();
    let written = plot::all(&src, &dst, seed)?;
    if written.is_empty() {
        return Err(Exit {
            code: EXIT_DATA,
            message: format!("no plottable CSV files in {}", src.display()),
        }
        .into());
    }
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    if same_dir(&src, &dst) {
        // redrawing in place; the run's own manifest stays authoritative
        return Ok(());
    }
    ctx.wrote(written);
    ctx.finish()
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}
