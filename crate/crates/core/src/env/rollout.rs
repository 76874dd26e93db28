use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::{Environment, Solution};
use crate::error::{Error, Result};
use crate::nn::{
    argmax, decoder_distribution, encode_on_tape, sample_index, PolicyParameters, Tape, Var,
};
use crate::rng::{stream, Rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Most probable action, lowest id on ties.
    Greedy,
    Sample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub action: usize,
    pub log_prob: f64,
    pub candidates: usize,
    /// Hash of the actions taken before this step.
    pub digest: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub reward: f64,
    pub solution: Solution,
    pub valid: bool,
}

#[derive(Serialize)]
struct StepRecord {
    step: usize,
    action: usize,
    log_prob: f64,
    reward: f64,
}

impl Trajectory {
    pub fn log_prob(&self) -> f64 {
        self.steps.iter().map(|s| s.log_prob).sum()
    }

    pub fn actions(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.action).collect()
    }

    /// Positive objective value (tree weight, path lengths, tour length,
    /// longest route), including any penalty.
    pub fn cost(&self) -> f64 {
        -self.reward
    }

    /// One JSON object per step: step index, action, log-probability and the
    /// step reward (zero except for the terminal step).
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        let last = self.steps.len().saturating_sub(1);
        for (i, s) in self.steps.iter().enumerate() {
            let rec = StepRecord {
                step: i,
                action: s.action,
                log_prob: s.log_prob,
                reward: if i == last { self.reward } else { 0.0 },
            };
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string(&rec).expect("serializable record")
            );
        }
        out
    }
}

/// Wall-clock split of one rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutTiming {
    pub encode: Duration,
    pub decode: Duration,
}

enum Chooser<'a> {
    Greedy,
    Sample(&'a mut Rng),
    Forced(&'a [usize]),
}

struct Outcome {
    trajectory: Trajectory,
    log_prob: Option<Var>,
    timing: RolloutTiming,
}

fn drive(
    env: &Environment,
    params: &PolicyParameters,
    mut chooser: Chooser,
    mut tape: Option<&mut Tape>,
) -> Result<Outcome> {
    let t0 = Instant::now();
    let mut local = Tape::new();
    let recording = tape.is_some();
    let tp: &mut Tape = match tape.as_deref_mut() {
        Some(t) => t,
        None => &mut local,
    };
    let enc = encode_on_tape(tp, params, env.features(), env.attention())?;
    let encode = t0.elapsed();
    let t1 = Instant::now();
    let clip = params.config.clip;
    let mut st = env.reset();
    let mut steps = Vec::new();
    let mut terms = Vec::new();
    while !st.done {
        let cands = env.candidates(&st);
        if cands.is_empty() {
            return Err(Error::Decoding(format!(
                "no candidate action after {} steps",
                st.selected.len()
            )));
        }
        let ctx = env.context(&st);
        let digest = st.digest();
        let (pick, log_prob) = if cands.len() == 1 {
            (0, 0.0)
        } else {
            let out =
                decoder_distribution(tp.value(enc.queries), tp.value(enc.keys), ctx, &cands, clip);
            let pick = match &mut chooser {
                Chooser::Greedy => argmax(&out.probs),
                Chooser::Sample(rng) => sample_index(&out.probs, *rng),
                Chooser::Forced(actions) => {
                    let want = *actions
                        .get(steps.len())
                        .ok_or_else(|| Error::Contract("forced action list too short".into()))?;
                    cands
                        .iter()
                        .position(|&c| c == want)
                        .ok_or_else(|| Error::Contract(format!("forced action {want} is masked")))?
                }
            };
            let lp = out.probs[pick].ln();
            if recording {
                terms.push(tp.push_log_prob(enc.queries, enc.keys, ctx, &cands, pick, clip, out));
            }
            (pick, lp)
        };
        if let Chooser::Forced(actions) = &chooser {
            if actions.get(steps.len()) != Some(&cands[pick]) {
                return Err(Error::Contract(format!(
                    "forced action at step {} is not available",
                    steps.len()
                )));
            }
        }
        steps.push(Step {
            action: cands[pick],
            log_prob,
            candidates: cands.len(),
            digest,
        });
        env.apply(&mut st, cands[pick]);
    }
    let decode = t1.elapsed();
    let solution = env.solution(&st);
    let reward = env.reward(&solution)?;
    let valid = env.is_valid(&solution);
    let log_prob = if recording {
        Some(if terms.is_empty() {
            tp.constant(crate::nn::Mat::zeros((1, 1)))
        } else {
            tp.sum(&terms)
        })
    } else {
        None
    };
    Ok(Outcome {
        trajectory: Trajectory {
            steps,
            reward,
            solution,
            valid,
        },
        log_prob,
        timing: RolloutTiming { encode, decode },
    })
}

/// Plays one episode; sampling draws from the rollout stream of `seed`.
pub fn rollout(
    env: &Environment,
    params: &PolicyParameters,
    mode: Mode,
    seed: u64,
) -> Result<Trajectory> {
    let mut rng = stream(seed, Stream::Rollout);
    rollout_with_rng(env, params, mode, &mut rng)
}

pub fn rollout_with_rng(
    env: &Environment,
    params: &PolicyParameters,
    mode: Mode,
    rng: &mut Rng,
) -> Result<Trajectory> {
    let chooser = match mode {
        Mode::Greedy => Chooser::Greedy,
        Mode::Sample => Chooser::Sample(rng),
    };
    Ok(drive(env, params, chooser, None)?.trajectory)
}

/// Greedy rollout with the encoder and decoder phases timed separately.
pub fn rollout_timed(
    env: &Environment,
    params: &PolicyParameters,
) -> Result<(Trajectory, RolloutTiming)> {
    let out = drive(env, params, Chooser::Greedy, None)?;
    Ok((out.trajectory, out.timing))
}

/// Plays one episode on `tape`; the returned variable is the summed
/// log-probability of the chosen actions.
pub fn rollout_on_tape(
    env: &Environment,
    params: &PolicyParameters,
    mode: Mode,
    rng: &mut Rng,
    tape: &mut Tape,
) -> Result<(Trajectory, Var)> {
    let chooser = match mode {
        Mode::Greedy => Chooser::Greedy,
        Mode::Sample => Chooser::Sample(rng),
    };
    let out = drive(env, params, chooser, Some(tape))?;
    Ok((out.trajectory, out.log_prob.expect("recorded")))
}

/// Re-scores a fixed action sequence under `params` on `tape`.
pub fn replay_on_tape(
    env: &Environment,
    params: &PolicyParameters,
    actions: &[usize],
    tape: &mut Tape,
) -> Result<(Trajectory, Var)> {
    let out = drive(env, params, Chooser::Forced(actions), Some(tape))?;
    if out.trajectory.steps.len() != actions.len() {
        return Err(Error::Contract(format!(
            "replayed {} actions, episode took {}",
            actions.len(),
            out.trajectory.steps.len()
        )));
    }
    Ok((out.trajectory, out.log_prob.expect("recorded")))
}
