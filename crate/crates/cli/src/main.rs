use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use cogame::bench::{
    gap_report, oracle_check, parse_methods, parse_tsplib, run_bench, runtime_scaling, scaling_csv,
    solve, write_bench, BenchInstance, BenchOptions, CheckSizes, Method, BUNDLED,
};
use cogame::env::{rollout, EnvOptions, Environment, Instance, Mode, Problem};
use cogame::graph::{EuclideanInstance, GraphKind, WeightedGraph};
use cogame::nn::{load_checkpoint, PolicyConfig, PolicyParameters};
use cogame::rng::derive_seed;
use cogame::train::{make_instance, oracle_cost, train_with_progress, write_atomic, TrainConfig};

/// Graph combinatorial optimization with learned policies and classical baselines.
#[derive(Parser)]
#[command(name = "cogame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random instances to files.
    Generate(GenerateArgs),
    /// Train a policy with REINFORCE.
    Train(TrainArgs),
    /// Solve one instance file with a checkpoint or a classical method.
    Solve(SolveArgs),
    /// Run methods over an instance set and report optimality gaps.
    Bench(BenchArgs),
    /// Measure per-instance decode time against instance size.
    Scaling(ScalingArgs),
    /// Cross-check the exact oracles against each other.
    OracleCheck(OracleCheckArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// mst, ssp, tsp or vrp.
    #[arg(long, default_value = "tsp")]
    problem: Problem,
    /// Random graph family for mst/ssp, e.g. `rr:d=4` or `er:p=0.2`.
    #[arg(long, default_value = "rr:d=4")]
    kind: GraphKind,
    #[arg(long, default_value_t = 10)]
    nodes: usize,
    #[arg(long, default_value_t = 2)]
    vehicles: usize,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// TOML training configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem for the default configuration when no config file is given.
    #[arg(long)]
    problem: Option<Problem>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Output directory for metrics.csv and checkpoints.
    #[arg(long, default_value = "run")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file: `.graph`, `.pts` or TSPLIB `.tsp`.
    #[arg(long)]
    instance: PathBuf,
    /// Problem; inferred from the file when omitted.
    #[arg(long)]
    problem: Option<Problem>,
    #[arg(long, default_value_t = 2)]
    vehicles: usize,
    /// Policy checkpoint (required for the policy method).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value = "policy")]
    method: Method,
    /// Sample actions instead of decoding greedily.
    #[arg(long)]
    sample: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the step-by-step trajectory as NDJSON.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated methods.
    #[arg(long, default_value = "held_karp,two_opt,farthest,nearest")]
    methods: String,
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// TSPLIB instances instead of random ones: bundled names or file paths,
    /// comma-separated, or `bundled` for all shipped instances.
    #[arg(long)]
    tsplib: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Method seeds per instance.
    #[arg(long, default_value_t = 1)]
    repeats: u64,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Results CSV; timings and gap summary are written next to it.
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long, default_value = "policy,two_opt")]
    methods: String,
    #[arg(long, default_value = "tsp")]
    problem: Problem,
    /// Comma-separated instance sizes.
    #[arg(long, default_value = "250,500,1000", value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Timed instances per size (one more is solved first as warm-up).
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Policy checkpoint; an untrained default policy is timed without one.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value = "scaling.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    graphs_per_kind: usize,
    #[arg(long, default_value_t = 500)]
    digraphs: usize,
    #[arg(long, default_value_t = 50)]
    tours: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Solve(a) => solve_file(a),
        Command::Bench(a) => bench(a),
        Command::Scaling(a) => scaling(a),
        Command::OracleCheck(a) => check(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn generate(a: GenerateArgs) -> Result<ExitCode> {
    fs::create_dir_all(&a.out)?;
    let i = &a.instance;
    for k in 0..a.count {
        let inst = make_instance(
            i.problem,
            i.kind,
            i.nodes,
            i.vehicles,
            derive_seed(a.seed, &[4, k as u64]),
        )?;
        let (ext, text) = match &inst {
            Instance::Mst(g) | Instance::Ssp { graph: g, .. } => ("graph", g.to_text()),
            Instance::Tsp(c) | Instance::Vrp { cities: c, .. } => ("pts", c.to_text()),
        };
        let path = a
            .out
            .join(format!("{}-n{}-{k:04}.{ext}", i.problem, i.nodes));
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "wrote {} {} instances to {}",
        a.count,
        i.problem,
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn train(a: TrainArgs) -> Result<ExitCode> {
    let mut cfg = match &a.config {
        Some(p) => TrainConfig::from_toml(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => TrainConfig::for_problem(a.problem.unwrap_or(Problem::Mst)),
    };
    if let Some(p) = a.problem {
        if a.config.is_some() && p != cfg.problem {
            bail!(
                "--problem {p} conflicts with the config's problem {}",
                cfg.problem
            );
        }
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    cfg.validate()?;
    println!(
        "training {} on n={} for {} epochs, output in {}",
        cfg.problem,
        cfg.nodes,
        cfg.epochs,
        a.out.display()
    );
    let report = train_with_progress(&cfg, Some(&a.out), |m| {
        println!(
            "epoch {:>4}  reward {:>10.5}  gap {:>7.4}  median gap {:>7.4}  loss {:>10.4}  lr {:.0e}/{:.0e}",
            m.epoch, m.mean_reward, m.mean_gap, m.median_gap, m.loss, m.lr_enc, m.lr_dec
        );
    })?;
    println!("best epoch {}", report.best_epoch);
    Ok(ExitCode::SUCCESS)
}

fn read_instance(path: &Path, problem: Option<Problem>, vehicles: usize) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let euclid = |c: EuclideanInstance| match problem {
        Some(Problem::Vrp) => Ok(Instance::Vrp {
            cities: c,
            vehicles,
        }),
        None | Some(Problem::Tsp) => Ok(Instance::Tsp(c)),
        Some(p) => bail!("{} holds cities, not a graph for {p}", path.display()),
    };
    match ext {
        "tsp" => euclid(parse_tsplib(&text)?.to_instance()),
        "pts" => euclid(EuclideanInstance::from_text(&text)?),
        "graph" => {
            let g = WeightedGraph::from_text(&text)?;
            match (problem, g.is_directed()) {
                (None | Some(Problem::Ssp), true) => Ok(Instance::Ssp {
                    graph: g,
                    source: 0,
                }),
                (None | Some(Problem::Mst), false) => Ok(Instance::Mst(g)),
                (Some(p), _) => bail!("{} does not fit {p}", path.display()),
            }
        }
        other => bail!("unknown instance extension `.{other}` (expected .graph, .pts or .tsp)"),
    }
}

/// Parameters and environment options stored in a checkpoint.
fn read_checkpoint(path: &Path) -> Result<(PolicyParameters, EnvOptions)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let (params, extra) = load_checkpoint(&bytes)?;
    let env = if extra.is_empty() {
        EnvOptions::default()
    } else {
        TrainConfig::from_toml(&extra)?.env
    };
    Ok((params, env))
}

fn solve_file(a: SolveArgs) -> Result<ExitCode> {
    let inst = read_instance(&a.instance, a.problem, a.vehicles)?;
    let optimum = oracle_cost(&inst).ok();
    let value = if a.method == Method::Policy {
        let path = a
            .checkpoint
            .as_deref()
            .context("the policy method needs --checkpoint")?;
        let (params, env_opts) = read_checkpoint(path)?;
        let env = Environment::new(inst, env_opts)?;
        let mode = if a.sample { Mode::Sample } else { Mode::Greedy };
        let t = rollout(&env, &params, mode, a.seed)?;
        if let Some(p) = &a.trajectory {
            write_atomic(p, t.to_ndjson().as_bytes())?;
        }
        println!("solution: {:?}", t.solution);
        println!("valid: {}", t.valid);
        t.cost()
    } else {
        solve(a.method, &inst, a.seed, None, EnvOptions::default())?.value
    };
    println!("value: {value}");
    if let Some(o) = optimum {
        println!("optimum: {o}\ngap: {:.6}", value / o);
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(a: BenchArgs) -> Result<ExitCode> {
    let methods = parse_methods(&a.methods)?;
    let instances = match &a.tsplib {
        Some(list) => {
            let names: Vec<String> = if list == "bundled" {
                BUNDLED.iter().map(|(n, _, _)| n.to_string()).collect()
            } else {
                list.split(',').map(|s| s.trim().to_string()).collect()
            };
            names
                .iter()
                .map(|name| {
                    let text = match BUNDLED.iter().find(|(n, _, _)| n == name) {
                        Some((_, tsp, _)) => tsp.to_string(),
                        None => {
                            fs::read_to_string(name).with_context(|| format!("reading {name}"))?
                        }
                    };
                    Ok(BenchInstance::from_tsplib(&parse_tsplib(&text)?))
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => {
            let i = &a.instance;
            BenchInstance::generated(i.problem, i.kind, i.nodes, i.vehicles, a.count, a.seed)?
        }
    };
    let mut options = BenchOptions::default();
    if let Some(p) = &a.checkpoint {
        let (params, env) = read_checkpoint(p)?;
        options = BenchOptions {
            policy: Some(params),
            env,
        };
    }
    let seeds: Vec<u64> = (0..a.repeats).map(|r| a.seed + r).collect();
    let records = run_bench(&methods, &instances, &seeds, &options);
    write_bench(&records, &a.out)?;
    let report = gap_report(&records);
    let stem = a
        .out
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("bench");
    write_atomic(
        &a.out.with_file_name(format!("{stem}.gaps.csv")),
        report.to_csv().as_bytes(),
    )?;
    print!("{}", report.to_text());
    for r in records.iter().filter(|r| r.error.is_some()).take(5) {
        eprintln!(
            "{} on {}: {}",
            r.method,
            r.instance,
            r.error.as_deref().unwrap_or_default()
        );
    }
    println!("{} records written to {}", records.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn scaling(a: ScalingArgs) -> Result<ExitCode> {
    let methods = parse_methods(&a.methods)?;
    let mut options = BenchOptions::default();
    if methods.contains(&Method::Policy) {
        options = match &a.checkpoint {
            Some(p) => {
                let (params, env) = read_checkpoint(p)?;
                BenchOptions {
                    policy: Some(params),
                    env,
                }
            }
            None => {
                let cfg = PolicyConfig {
                    input_dim: a.problem.input_dim(),
                    ..Default::default()
                };
                BenchOptions {
                    policy: Some(PolicyParameters::init(cfg, a.seed)?),
                    env: EnvOptions::default(),
                }
            }
        };
    }
    let mut rows = Vec::new();
    for m in methods {
        let r = runtime_scaling(m, a.problem, &a.sizes, a.repeats, a.seed, &options)?;
        for row in &r {
            println!(
                "{:<10} n={:<6} median {:>10.3} ms  (q1 {:.3}, q3 {:.3})",
                m, row.n, row.median_ms, row.q1_ms, row.q3_ms
            );
        }
        rows.extend(r);
    }
    write_atomic(&a.out, scaling_csv(&rows).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn check(a: OracleCheckArgs) -> Result<ExitCode> {
    let sizes = CheckSizes {
        graphs_per_kind: a.graphs_per_kind,
        digraphs: a.digraphs,
        tours: a.tours,
    };
    let results = oracle_check(a.seed, sizes)?;
    let mut ok = true;
    for r in &results {
        ok &= r.passed();
        println!(
            "{} {:<32} cases {:>5}  mismatches {:>3}  max |diff| {:.3e}",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.cases,
            r.mismatches,
            r.max_abs_diff
        );
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
