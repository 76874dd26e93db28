//! REINFORCE training: sampled rollouts, a reward baseline, Adam with
//! separate encoder/decoder learning rates, a reduce-on-plateau schedule,
//! validation against exact solvers and checkpointing.

mod adam;
mod eval;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{
    rollout, rollout_on_tape, EnvOptions, Environment, Instance, Mode, Problem, Trajectory,
};
use crate::error::{Error, Result};
use crate::graph::{generate_euclidean, generate_random_digraph, generate_random_graph, GraphKind};
use crate::nn::{gradients, save_checkpoint, PolicyConfig, PolicyParameters, Tape};
use crate::rng::{derive_seed, stream, Stream};

pub use adam::{optimizer_step, AdamOptions};
pub use eval::{evaluate, gap_stats, oracle_cost, reference_cost, GapStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// Exponential moving average of batch-mean rewards.
    Ema,
    /// Reward of the greedy rollout of the current policy on the same instance.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub problem: Problem,
    /// Random-graph family for MST/SSP; ignored for TSP/VRP.
    pub graph: GraphKind,
    pub nodes: usize,
    /// VRP only.
    pub vehicles: usize,
    pub instances_per_epoch: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub lr_enc: f64,
    pub lr_dec: f64,
    /// Learning rates are divided by this after `patience` stagnant epochs.
    pub lr_decay: f64,
    pub patience: usize,
    /// Relative validation-reward gain that counts as progress.
    pub min_improvement: f64,
    pub baseline: BaselineKind,
    pub ema_decay: f64,
    pub seed: u64,
    /// Epochs between checkpoints; 0 writes only the best and final ones.
    pub checkpoint_every: usize,
    pub validation_size: usize,
    pub adam: AdamOptions,
    pub policy: PolicyConfig,
    pub env: EnvOptions,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            problem: Problem::Mst,
            graph: GraphKind::rr(),
            nodes: 20,
            vehicles: 2,
            instances_per_epoch: 1280,
            batch_size: 32,
            epochs: 30,
            lr_enc: 1e-3,
            lr_dec: 1e-4,
            lr_decay: 10.0,
            patience: 5,
            min_improvement: 1e-4,
            baseline: BaselineKind::Ema,
            ema_decay: 0.95,
            seed: 0,
            checkpoint_every: 5,
            validation_size: 200,
            adam: AdamOptions::default(),
            policy: PolicyConfig::default(),
            env: EnvOptions::default(),
        }
    }
}

impl TrainConfig {
    /// Parses a config; without `policy.input_dim` the problem's feature
    /// width is used.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::format(format!("config: {e}")))?;
        let explicit_dim = table
            .get("policy")
            .and_then(|p| p.get("input_dim"))
            .is_some();
        let mut cfg: TrainConfig = table
            .try_into()
            .map_err(|e| Error::format(format!("config: {e}")))?;
        if !explicit_dim {
            cfg.policy.input_dim = cfg.problem.input_dim();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.lr_enc, self.lr_dec];
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::param(format!(
                "learning rates must be positive, got {rates:?}"
            )));
        }
        if self.batch_size == 0 || self.instances_per_epoch < self.batch_size {
            return Err(Error::param(format!(
                "need batch_size >= 1 and instances_per_epoch >= batch_size, got {} and {}",
                self.batch_size, self.instances_per_epoch
            )));
        }
        if !(self.lr_decay >= 1.0) || !(0.0..1.0).contains(&self.ema_decay) {
            return Err(Error::param(
                "lr_decay must be >= 1 and ema_decay in [0, 1)",
            ));
        }
        if self.nodes < 2 || (self.problem == Problem::Vrp && self.vehicles == 0) {
            return Err(Error::param(format!(
                "invalid size: nodes={}, vehicles={}",
                self.nodes, self.vehicles
            )));
        }
        if self.policy.input_dim != self.problem.input_dim() {
            return Err(Error::param(format!(
                "policy.input_dim is {} but {} uses {}",
                self.policy.input_dim,
                self.problem,
                self.problem.input_dim()
            )));
        }
        self.policy.validate()
    }

    /// Default configuration for a problem with the matching input width.
    pub fn for_problem(problem: Problem) -> Self {
        let mut cfg = TrainConfig {
            problem,
            ..Default::default()
        };
        cfg.policy.input_dim = problem.input_dim();
        if matches!(problem, Problem::Tsp | Problem::Vrp) {
            cfg.nodes = 10;
            cfg.batch_size = 64;
        }
        cfg
    }

    pub fn steps_per_epoch(&self) -> usize {
        self.instances_per_epoch / self.batch_size
    }
}

/// A random instance of `problem`. SSP sources are node 0.
pub fn make_instance(
    problem: Problem,
    kind: GraphKind,
    n: usize,
    vehicles: usize,
    seed: u64,
) -> Result<Instance> {
    Ok(match problem {
        Problem::Mst => Instance::Mst(generate_random_graph(kind, n, seed)?),
        Problem::Ssp => Instance::Ssp {
            graph: generate_random_digraph(kind, n, seed)?,
            source: 0,
        },
        Problem::Tsp => Instance::Tsp(generate_euclidean(n, seed)?),
        Problem::Vrp => Instance::Vrp {
            cities: generate_euclidean(n, seed)?,
            vehicles,
        },
    })
}

/// Seeds of the held-out validation instances for a training seed.
pub fn validation_seeds(cfg: &TrainConfig) -> Vec<u64> {
    (0..cfg.validation_size as u64)
        .map(|i| derive_seed(cfg.seed, &[2, i]))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineState {
    pub kind: BaselineKind,
    /// Moving average; `None` until the first batch completes.
    pub value: Option<f64>,
    /// Per-instance greedy rewards of the current batch.
    pub per_instance: Vec<f64>,
}

impl BaselineState {
    pub fn new(kind: BaselineKind) -> Self {
        BaselineState {
            kind,
            value: None,
            per_instance: Vec::new(),
        }
    }

    /// Baseline of each trajectory in `batch`. Before any batch has
    /// completed the moving average falls back to the batch mean.
    pub fn values(&self, batch: &[Trajectory]) -> Vec<f64> {
        match self.kind {
            BaselineKind::Greedy => self.per_instance.clone(),
            BaselineKind::Ema => {
                let b = self.value.unwrap_or_else(|| {
                    batch.iter().map(|t| t.reward).sum::<f64>() / batch.len() as f64
                });
                vec![b; batch.len()]
            }
        }
    }

    /// Folds a completed batch into the moving average.
    pub fn update(&mut self, batch: &[Trajectory], decay: f64) {
        let mean = batch.iter().map(|t| t.reward).sum::<f64>() / batch.len() as f64;
        self.value = Some(match self.value {
            None => mean,
            Some(v) => decay * v + (1.0 - decay) * mean,
        });
    }
}

/// `L = -(1/B) Σ_i (r_i - b_i) Σ_t log p(a_it)`: the terminal reward is the
/// advantage of every step, and descending `L` raises the probability of
/// better-than-baseline episodes.
pub fn reinforce_loss(batch: &[Trajectory], baseline: &BaselineState) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::param("reinforce_loss on an empty batch"));
    }
    let b = baseline.values(batch);
    if b.len() != batch.len() {
        return Err(Error::param(format!(
            "{} baseline values for {} trajectories",
            b.len(),
            batch.len()
        )));
    }
    let total: f64 = batch
        .iter()
        .zip(&b)
        .map(|(t, b)| -(t.reward - b) * t.log_prob())
        .sum();
    Ok(total / batch.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean greedy validation reward.
    pub mean_reward: f64,
    /// Mean validation gap against the exact (or reference) solver.
    pub mean_gap: f64,
    pub median_gap: f64,
    /// Mean training loss over the epoch's batches.
    pub loss: f64,
    pub lr_enc: f64,
    pub lr_dec: f64,
}

pub const METRICS_HEADER: [&str; 6] = [
    "epoch",
    "mean_reward",
    "mean_gap",
    "loss",
    "lr_enc",
    "lr_dec",
];

pub fn metrics_csv(rows: &[EpochMetrics]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.epoch.to_string(),
            r.mean_reward.to_string(),
            r.mean_gap.to_string(),
            r.loss.to_string(),
            r.lr_enc.to_string(),
            r.lr_dec.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Parameters with the best validation reward (epoch 0 = untrained).
    pub best: PolicyParameters,
    pub best_epoch: usize,
    pub last: PolicyParameters,
    /// One row per epoch, starting with the untrained policy at epoch 0.
    pub history: Vec<EpochMetrics>,
}

struct Validation {
    envs: Vec<Environment>,
    refs: Vec<f64>,
}

impl Validation {
    fn new(cfg: &TrainConfig) -> Result<Self> {
        let envs = validation_seeds(cfg)
            .into_iter()
            .map(|s| {
                Environment::new(
                    make_instance(cfg.problem, cfg.graph, cfg.nodes, cfg.vehicles, s)?,
                    cfg.env,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let refs = envs
            .iter()
            .map(|e| reference_cost(e.instance()).unwrap_or(f64::NAN))
            .collect();
        Ok(Validation { envs, refs })
    }

    /// (mean reward, mean gap, median gap) of greedy rollouts.
    fn score(&self, params: &PolicyParameters) -> Result<(f64, f64, f64)> {
        if self.envs.is_empty() {
            return Ok((f64::NAN, f64::NAN, f64::NAN));
        }
        let rewards = self
            .envs
            .par_iter()
            .map(|e| rollout(e, params, Mode::Greedy, 0).map(|t| t.reward))
            .collect::<Result<Vec<_>>>()?;
        let gaps: Vec<f64> = rewards
            .iter()
            .zip(&self.refs)
            .map(|(r, o)| -r / o)
            .collect();
        let stats = gap_stats(&gaps);
        Ok((
            rewards.iter().sum::<f64>() / rewards.len() as f64,
            stats.mean,
            stats.median,
        ))
    }
}

/// Runs the training loop. With `out_dir`, writes `metrics.csv`, periodic
/// `epoch-NNNN.ckpt`, `best.ckpt` and `last.ckpt` there.
pub fn train(cfg: &TrainConfig, out_dir: Option<&Path>) -> Result<TrainReport> {
    train_with_progress(cfg, out_dir, |_| {})
}

pub fn train_with_progress(
    cfg: &TrainConfig,
    out_dir: Option<&Path>,
    mut progress: impl FnMut(&EpochMetrics),
) -> Result<TrainReport> {
    cfg.validate()?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }
    let cfg_text = cfg.to_toml();
    let save = |p: &PolicyParameters, name: &str| -> Result<()> {
        if let Some(dir) = out_dir {
            write_atomic(&dir.join(name), &save_checkpoint(p, &cfg_text))?;
        }
        Ok(())
    };
    let mut params = initial_parameters(cfg)?;
    let validation = Validation::new(cfg)?;
    let mut baseline = BaselineState::new(cfg.baseline);
    let mut history = Vec::with_capacity(cfg.epochs + 1);

    let (r0, g0, m0) = validation.score(&params)?;
    let row = EpochMetrics {
        epoch: 0,
        mean_reward: r0,
        mean_gap: g0,
        median_gap: m0,
        loss: f64::NAN,
        lr_enc: cfg.lr_enc,
        lr_dec: cfg.lr_dec,
    };
    progress(&row);
    history.push(row);
    let mut best = (r0, 0, params.clone());
    let mut stagnant = 0;

    for epoch in 1..=cfg.epochs {
        let mut losses = Vec::with_capacity(cfg.steps_per_epoch());
        for step in 0..cfg.steps_per_epoch() {
            let loss = train_step(cfg, &mut params, &mut baseline, epoch, step)?;
            losses.push(loss);
        }
        let (reward, gap, median) = validation.score(&params)?;
        let row = EpochMetrics {
            epoch,
            mean_reward: reward,
            mean_gap: gap,
            median_gap: median,
            loss: losses.iter().sum::<f64>() / losses.len() as f64,
            lr_enc: params.adam.lr_enc,
            lr_dec: params.adam.lr_dec,
        };
        progress(&row);
        history.push(row);
        if reward - best.0 > cfg.min_improvement * best.0.abs() {
            best = (reward, epoch, params.clone());
            stagnant = 0;
            save(&params, "best.ckpt")?;
        } else {
            stagnant += 1;
            if stagnant >= cfg.patience {
                params.adam.lr_enc /= cfg.lr_decay;
                params.adam.lr_dec /= cfg.lr_decay;
                stagnant = 0;
            }
        }
        if cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0 {
            save(&params, &format!("epoch-{epoch:04}.ckpt"))?;
        }
        if let Some(dir) = out_dir {
            write_atomic(&dir.join("metrics.csv"), metrics_csv(&history).as_bytes())?;
        }
    }
    save(&params, "last.ckpt")?;
    if best.1 == 0 {
        save(&best.2, "best.ckpt")?;
    }
    if let Some(dir) = out_dir {
        write_atomic(&dir.join("metrics.csv"), metrics_csv(&history).as_bytes())?;
    }
    Ok(TrainReport {
        best: best.2,
        best_epoch: best.1,
        last: params,
        history,
    })
}

/// The untrained policy a run with `cfg` starts from.
pub fn initial_parameters(cfg: &TrainConfig) -> Result<PolicyParameters> {
    let mut params = PolicyParameters::init(cfg.policy, derive_seed(cfg.seed, &[0]))?;
    params.adam.lr_enc = cfg.lr_enc;
    params.adam.lr_dec = cfg.lr_dec;
    Ok(params)
}

/// One batch: sampled rollouts, baseline, loss, gradient and Adam update.
/// Returns the batch loss.
pub fn train_step(
    cfg: &TrainConfig,
    params: &mut PolicyParameters,
    baseline: &mut BaselineState,
    epoch: usize,
    step: usize,
) -> Result<f64> {
    let base = step * cfg.batch_size;
    let shared: &PolicyParameters = params;
    let results = (0..cfg.batch_size)
        .into_par_iter()
        .map(|slot| {
            let idx = [1, epoch as u64, (base + slot) as u64];
            let seed = derive_seed(cfg.seed, &idx);
            let env = Environment::new(
                make_instance(cfg.problem, cfg.graph, cfg.nodes, cfg.vehicles, seed)?,
                cfg.env,
            )?;
            let mut rng = stream(
                derive_seed(cfg.seed, &[3, epoch as u64, (base + slot) as u64]),
                Stream::Rollout,
            );
            let mut tape = Tape::new();
            let (traj, lp) = rollout_on_tape(&env, shared, Mode::Sample, &mut rng, &mut tape)?;
            let grad = gradients(&tape, lp, shared);
            let greedy = match cfg.baseline {
                BaselineKind::Greedy => rollout(&env, shared, Mode::Greedy, 0)?.reward,
                BaselineKind::Ema => f64::NAN,
            };
            Ok((traj, grad, greedy))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut batch = Vec::with_capacity(results.len());
    let mut grads = Vec::with_capacity(results.len());
    baseline.per_instance.clear();
    for (t, g, b) in results {
        batch.push(t);
        grads.push(g);
        baseline.per_instance.push(b);
    }
    let loss = reinforce_loss(&batch, baseline)?;
    let b = baseline.values(&batch);
    let mut total = vec![0.0; params.len()];
    let inv = 1.0 / batch.len() as f64;
    for ((t, g), b) in batch.iter().zip(&grads).zip(&b) {
        let coef = -(t.reward - b) * inv;
        if coef != 0.0 {
            total
                .iter_mut()
                .zip(g)
                .for_each(|(acc, gi)| *acc += coef * gi);
        }
    }
    optimizer_step(params, &total, &cfg.adam)?;
    baseline.update(&batch, cfg.ema_decay);
    Ok(loss)
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    tmp.set_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{replay_on_tape, EdgeMasking, Solution, Step};
    use crate::nn::{Context, Mat};

    fn one_step(reward: f64, log_prob: f64) -> Trajectory {
        Trajectory {
            steps: vec![Step {
                action: 0,
                log_prob,
                candidates: 2,
                digest: 0,
            }],
            reward,
            solution: Solution::Tour(vec![0]),
            valid: true,
        }
    }

    #[test]
    fn loss_examples() {
        let mut b = BaselineState::new(BaselineKind::Ema);
        b.value = Some(0.0);
        let l = reinforce_loss(&[one_step(-1.0, 0.5f64.ln())], &b).unwrap();
        assert!((l - (-std::f64::consts::LN_2)).abs() < 1e-15);
        b.value = Some(-1.0);
        assert_eq!(
            reinforce_loss(&[one_step(-1.0, 0.5f64.ln()), one_step(-1.0, -3.0)], &b).unwrap(),
            0.0
        );
        assert!(matches!(reinforce_loss(&[], &b), Err(Error::Parameter(_))));
    }

    #[test]
    fn ema_baseline_uses_completed_batches() {
        let mut b = BaselineState::new(BaselineKind::Ema);
        let batch = [one_step(-2.0, -1.0), one_step(-4.0, -1.0)];
        assert_eq!(b.values(&batch), vec![-3.0, -3.0]);
        b.update(&batch, 0.95);
        assert_eq!(b.value, Some(-3.0));
        b.update(&[one_step(-1.0, 0.0)], 0.95);
        assert!((b.value.unwrap() - (-3.0 * 0.95 - 0.05)).abs() < 1e-15);
    }

    /// Descending the loss must lower the chosen logit when r < b and raise
    /// it when r > b.
    #[test]
    fn chosen_logit_gradient_opposes_advantage() {
        let q = Mat::from_shape_vec((3, 1), vec![0.2, -0.4, 0.7]).unwrap();
        for (r, b) in [(-1.0, 0.0), (1.0, 0.0), (-0.5, -2.0)] {
            // loss as a function of the chosen key entry k_1, by central differences
            let loss = |k1: f64| {
                let k = Mat::from_shape_vec((3, 1), vec![0.3, k1, -0.1]).unwrap();
                let out =
                    crate::nn::decoder_distribution(&q, &k, Context::Node(0), &[0, 1, 2], 10.0);
                -(r - b) * out.probs[1].ln()
            };
            // the chosen logit increases with k_1 since q_0 > 0, so a descent
            // step moves k_1 in the direction of r - b
            let slope = (loss(0.5 + 1e-6) - loss(0.5 - 1e-6)) / 2e-6;
            assert_eq!(-slope.signum(), (r - b).signum(), "r={r} b={b}");
        }
    }

    /// Σ_a p(a) ∇ log p(a) = ∇ Σ_a p(a) = 0: a constant baseline adds nothing
    /// to the expected gradient.
    #[test]
    fn baseline_term_has_zero_expectation() {
        let cfg = PolicyConfig {
            input_dim: 2,
            hidden: 4,
            heads: 1,
            layers: 1,
            ..Default::default()
        };
        let params = PolicyParameters::init(cfg, 5).unwrap();
        let inst = Instance::Tsp(crate::graph::generate_euclidean(4, 0).unwrap());
        let env = Environment::new(inst, EnvOptions::default()).unwrap();
        let mut expected = vec![0.0; params.len()];
        // after the forced first city, three candidates remain
        for a in 1..4 {
            let mut tape = Tape::new();
            let rest: Vec<usize> = (1..4).filter(|&c| c != a).collect();
            let actions = [vec![0, a], rest].concat();
            let enc =
                crate::nn::encode_on_tape(&mut tape, &params, env.features(), env.attention())
                    .unwrap();
            let (lp, probs) = tape.log_prob(
                enc.queries,
                enc.keys,
                Context::Node(0),
                &[1, 2, 3],
                a - 1,
                cfg.clip,
            );
            let g = gradients(&tape, lp, &params);
            expected
                .iter_mut()
                .zip(&g)
                .for_each(|(e, gi)| *e += probs[a - 1] * gi);
            assert!(replay_on_tape(&env, &params, &actions, &mut Tape::new()).is_ok());
        }
        assert!(expected.iter().all(|e| e.abs() < 1e-12), "{expected:?}");
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut cfg = TrainConfig::for_problem(Problem::Tsp);
        cfg.graph = GraphKind::Sbm {
            blocks: 2,
            p_in: 0.4,
            p_out: 0.1,
        };
        cfg.baseline = BaselineKind::Greedy;
        let text = cfg.to_toml();
        assert_eq!(TrainConfig::from_toml(&text).unwrap(), cfg);
        let partial = TrainConfig::from_toml(
            "problem = \"mst\"\nepochs = 3\n[policy]\ninput_dim = 1\nhidden = 16\n",
        )
        .unwrap();
        assert_eq!(
            (partial.epochs, partial.policy.hidden, partial.policy.heads),
            (3, 16, 8)
        );
        let implied = TrainConfig::from_toml("problem = \"ssp\"\n[env]\nedge_masking = \"cut\"\n").unwrap();
        assert_eq!(implied.policy.input_dim, 1);
        assert_eq!(implied.env.edge_masking, EdgeMasking::Cut);
        assert!(TrainConfig::from_toml("problem = \"mst\"\n[policy]\ninput_dim = 2\n").is_err());
        assert!(TrainConfig::from_toml("problem = \"mst\"\nbogus = 1\n").is_err());
        assert!(TrainConfig::from_toml(
            "problem = \"tsp\"\nlr_enc = 0.0\n[policy]\ninput_dim = 2\n"
        )
        .is_err());
    }

    fn tiny(problem: Problem) -> TrainConfig {
        let mut cfg = TrainConfig::for_problem(problem);
        cfg.nodes = 6;
        cfg.epochs = 2;
        cfg.instances_per_epoch = 8;
        cfg.batch_size = 4;
        cfg.validation_size = 5;
        cfg.policy.hidden = 8;
        cfg.policy.heads = 2;
        cfg.policy.layers = 2;
        cfg
    }

    #[test]
    fn training_is_deterministic_and_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(Problem::Tsp);
        let a = train(&cfg, Some(dir.path())).unwrap();
        let first = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
        let b = train(&cfg, Some(dir.path())).unwrap();
        assert_eq!(
            first,
            fs::read_to_string(dir.path().join("metrics.csv")).unwrap()
        );
        assert_eq!(a.last, b.last);
        assert_eq!(first.lines().next().unwrap(), METRICS_HEADER.join(","));
        assert_eq!(first.lines().count(), 1 + 3);
        let (ckpt, text) =
            crate::nn::load_checkpoint(&fs::read(dir.path().join("last.ckpt")).unwrap()).unwrap();
        assert_eq!(ckpt, a.last);
        assert_eq!(TrainConfig::from_toml(&text).unwrap(), cfg);
        assert!(dir.path().join("best.ckpt").exists());
    }

    #[test]
    fn every_problem_trains() {
        for problem in [Problem::Mst, Problem::Ssp, Problem::Vrp] {
            let mut cfg = tiny(problem);
            cfg.baseline = BaselineKind::Greedy;
            let r = train(&cfg, None).unwrap();
            assert_eq!(r.history.len(), 3);
            r.last.audit().unwrap();
            assert!(
                r.history.iter().all(|h| h.mean_gap >= 1.0 - 1e-12),
                "{problem}: {:?}",
                r.history
            );
        }
    }
}
