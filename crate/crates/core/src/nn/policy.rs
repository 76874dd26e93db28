use std::sync::Arc;

use rand::Rng as _;

use super::params::PolicyParameters;
use super::tape::{decoder_distribution, AttentionNorm, Context, Csr, Mat, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Attention neighborhoods of `g`, arcs treated as undirected.
pub fn attention_graph(g: &WeightedGraph) -> Csr {
    let n = g.node_count();
    let mut rows = vec![Vec::new(); n];
    for e in g.edges() {
        rows[e.u].push(e.v);
        rows[e.v].push(e.u);
    }
    for r in &mut rows {
        r.sort_unstable();
        r.dedup();
    }
    Csr::with_self_loops(&rows)
}

/// Encoder output on a tape: node embeddings plus the decoder's query and
/// key projections of them.
#[derive(Debug, Clone, Copy)]
pub struct Encoded {
    pub embeddings: Var,
    pub queries: Var,
    pub keys: Var,
}

/// Encoder output detached from any tape.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEmbeddings {
    pub values: Mat,
    pub queries: Mat,
    pub keys: Mat,
}

impl NodeEmbeddings {
    pub fn node_count(&self) -> usize {
        self.values.nrows()
    }
}

fn check_input(params: &PolicyParameters, features: &Mat, graph: &Csr) -> Result<()> {
    let cfg = &params.config;
    if features.ncols() != cfg.input_dim {
        return Err(Error::shape(format!(
            "features have {} columns, policy expects {}",
            features.ncols(),
            cfg.input_dim
        )));
    }
    if features.nrows() != graph.node_count() || features.nrows() == 0 {
        return Err(Error::shape(format!(
            "{} feature rows for a graph with {} nodes",
            features.nrows(),
            graph.node_count()
        )));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("node features must be finite"));
    }
    Ok(())
}

/// Stacked attention layers (heads averaged, then bias, layer norm and
/// ReLU), followed by the decoder projections.
pub fn encode_on_tape(
    tape: &mut Tape,
    params: &PolicyParameters,
    features: &Mat,
    graph: &Arc<Csr>,
) -> Result<Encoded> {
    check_input(params, features, graph)?;
    let cfg = &params.config;
    let vals = &params.values;
    let block = |tape: &mut Tape, name: &str| {
        let b = params.layout.block(name);
        tape.param(vals, b.offset, b.rows, b.cols)
    };
    let mut x = tape.constant(features.clone());
    for l in 0..cfg.layers {
        let mut heads = Vec::with_capacity(cfg.heads);
        for h in 0..cfg.heads {
            let theta = block(tape, &format!("enc.{l}.theta.{h}"));
            let z = block(tape, &format!("enc.{l}.z.{h}"));
            let u = tape.matmul(x, theta);
            heads.push(tape.attention(u, z, graph.clone(), cfg.leaky_slope, cfg.attention_norm));
        }
        let mut merged = if heads.len() == 1 {
            heads[0]
        } else {
            tape.mean(&heads)
        };
        if cfg.residual {
            let skip = if l == 0 {
                let w = block(tape, "enc.0.skip");
                tape.matmul(x, w)
            } else {
                x
            };
            merged = tape.add(merged, skip);
        }
        let bias = block(tape, &format!("enc.{l}.bias"));
        let gamma = block(tape, &format!("enc.{l}.ln_gamma"));
        let beta = block(tape, &format!("enc.{l}.ln_beta"));
        let shifted = tape.add_row(merged, bias);
        let normed = tape.layer_norm(shifted, gamma, beta);
        x = tape.relu(normed);
    }
    let phi1 = block(tape, "dec.phi1");
    let phi2 = block(tape, "dec.phi2");
    let queries = tape.matmul(x, phi1);
    let keys = tape.matmul(x, phi2);
    Ok(Encoded {
        embeddings: x,
        queries,
        keys,
    })
}

pub fn encode(
    params: &PolicyParameters,
    features: &Mat,
    graph: &Arc<Csr>,
) -> Result<NodeEmbeddings> {
    let mut tape = Tape::new();
    let enc = encode_on_tape(&mut tape, params, features, graph)?;
    Ok(NodeEmbeddings {
        values: tape.value(enc.embeddings).clone(),
        queries: tape.value(enc.queries).clone(),
        keys: tape.value(enc.keys).clone(),
    })
}

/// One attention head without normalization or activation:
/// `v_i' = Σ_{j ∈ {i} ∪ N(i)} α_ij Θ v_j`.
pub fn gat_layer(
    features: &Mat,
    graph: &Csr,
    theta: &Mat,
    z: &Mat,
    slope: f64,
    norm: AttentionNorm,
) -> Result<Mat> {
    if features.ncols() != theta.nrows()
        || z.dim() != (1, 2 * theta.ncols())
        || features.nrows() != graph.node_count()
    {
        return Err(Error::shape(format!(
            "features {:?}, theta {:?}, z {:?}, graph with {} nodes",
            features.dim(),
            theta.dim(),
            z.dim(),
            graph.node_count()
        )));
    }
    let mut tape = Tape::new();
    let x = tape.constant(features.clone());
    let t = tape.constant(theta.clone());
    let zv = tape.constant(z.clone());
    let u = tape.matmul(x, t);
    let out = tape.attention(u, zv, Arc::new(graph.clone()), slope, norm);
    Ok(tape.value(out).clone())
}

/// Probabilities over all `n` actions; masked entries are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    pub probs: Vec<f64>,
    pub mask: Vec<bool>,
}

impl ActionDistribution {
    /// Most likely action, lowest id on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }

    pub fn sample(&self, rng: &mut impl rand::RngCore) -> usize {
        sample_index(&self.probs, rng)
    }
}

pub(crate) fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Inverse-CDF draw; never returns a zero-probability index.
pub(crate) fn sample_index(probs: &[f64], rng: &mut impl rand::RngCore) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Candidate probabilities under the clipped attention decoder.
pub fn decode_candidates(
    emb: &NodeEmbeddings,
    ctx: Context,
    candidates: &[usize],
    clip: f64,
) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::Decoding("no unmasked candidate".into()));
    }
    if let Context::Node(i) = ctx {
        if i >= emb.node_count() {
            return Err(Error::param(format!("context node {i} out of range")));
        }
    }
    Ok(decoder_distribution(&emb.queries, &emb.keys, ctx, candidates, clip).probs)
}

/// Distribution over every unmasked node given the decoding context.
pub fn decode_step(
    emb: &NodeEmbeddings,
    ctx: Context,
    mask: &[bool],
    params: &PolicyParameters,
) -> Result<ActionDistribution> {
    let n = emb.node_count();
    if mask.len() != n {
        return Err(Error::shape(format!(
            "mask has {} entries for {n} nodes",
            mask.len()
        )));
    }
    let candidates: Vec<usize> = (0..n).filter(|&j| !mask[j]).collect();
    let sparse = decode_candidates(emb, ctx, &candidates, params.config.clip)?;
    let mut probs = vec![0.0; n];
    for (&j, &p) in candidates.iter().zip(&sparse) {
        probs[j] = p;
    }
    Ok(ActionDistribution {
        probs,
        mask: mask.to_vec(),
    })
}

/// Gradient of a recorded scalar with respect to every parameter.
pub fn gradients(tape: &Tape, loss: Var, params: &PolicyParameters) -> Vec<f64> {
    let mut g = vec![0.0; params.len()];
    tape.backward(loss, 1.0, &mut g);
    g
}

#[cfg(test)]
mod tests {
    use ndarray::array;
    use proptest::prelude::*;

    use super::*;
    use crate::graph::{generate_random_graph, GraphKind};
    use crate::nn::PolicyConfig;
    use crate::rng::{stream, Stream};

    fn small(input_dim: usize) -> PolicyConfig {
        PolicyConfig {
            input_dim,
            hidden: 6,
            heads: 2,
            layers: 3,
            ..Default::default()
        }
    }

    fn random_features(n: usize, d: usize, seed: u64) -> Mat {
        let mut rng = stream(seed, Stream::Coordinates);
        Mat::from_shape_fn((n, d), |_| rng.gen::<f64>())
    }

    #[test]
    fn two_node_uniform_attention() {
        let csr = Csr::with_self_loops(&[vec![1], vec![0]]);
        let out = gat_layer(
            &array![[1.0], [0.0]],
            &csr,
            &array![[1.0]],
            &array![[0.0, 0.0]],
            0.2,
            AttentionNorm::WithSelf,
        )
        .unwrap();
        assert_eq!(out, array![[0.5], [0.5]]);
    }

    #[test]
    fn isolated_node_is_projected() {
        let csr = Csr::with_self_loops(&[vec![]]);
        let theta = array![[2.0, -1.0], [0.5, 3.0]];
        let out = gat_layer(
            &array![[1.0, 2.0]],
            &csr,
            &theta,
            &array![[0.3, 0.1, 0.2, 0.9]],
            0.2,
            AttentionNorm::WithSelf,
        )
        .unwrap();
        assert_eq!(out, array![[3.0, 5.0]]);
        assert!(gat_layer(
            &array![[1.0]],
            &csr,
            &theta,
            &array![[0.0; 4]],
            0.2,
            AttentionNorm::WithSelf
        )
        .is_err());
    }

    #[test]
    fn encoder_shapes_and_errors() {
        let p = PolicyParameters::init(small(2), 0).unwrap();
        let csr = Arc::new(Csr::with_self_loops(&[vec![1], vec![0, 2], vec![1]]));
        let emb = encode(&p, &random_features(3, 2, 0), &csr).unwrap();
        assert_eq!(emb.values.dim(), (3, 6));
        assert!(emb.values.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!(matches!(
            encode(&p, &random_features(3, 1, 0), &csr),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            encode(&p, &random_features(4, 2, 0), &csr),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn encoder_is_permutation_equivariant() {
        let g = generate_random_graph(GraphKind::Er { p: 0.4 }, 9, 5).unwrap();
        let csr = attention_graph(&g);
        let x = random_features(9, 2, 1);
        let p = PolicyParameters::init(small(2), 2).unwrap();
        let base = encode(&p, &x, &Arc::new(csr.clone())).unwrap();
        let perm = [3, 7, 0, 8, 1, 6, 2, 5, 4];
        let mut xp = Mat::zeros((9, 2));
        for i in 0..9 {
            xp.row_mut(perm[i]).assign(&x.row(i));
        }
        let moved = encode(&p, &xp, &Arc::new(csr.permuted(&perm))).unwrap();
        for i in 0..9 {
            for (a, b) in base.values.row(i).iter().zip(moved.values.row(perm[i])) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let mask = vec![false; 9];
        let d0 = decode_step(&base, Context::Node(2), &mask, &p).unwrap();
        let d1 = decode_step(&moved, Context::Node(perm[2]), &mask, &p).unwrap();
        for i in 0..9 {
            assert!((d0.probs[i] - d1.probs[perm[i]]).abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_count_ignores_graph_size() {
        let p = PolicyParameters::init(small(1), 0).unwrap();
        for n in [3, 10, 300] {
            let g = generate_random_graph(GraphKind::Rr { d: 2 }, n, 1).unwrap();
            let emb = encode(
                &p,
                &random_features(n, 1, 3),
                &Arc::new(attention_graph(&g)),
            )
            .unwrap();
            assert_eq!(emb.node_count(), n);
        }
        assert_eq!(p.len(), PolicyParameters::init(small(1), 9).unwrap().len());
    }

    #[test]
    fn decode_step_edge_cases() {
        let p = PolicyParameters::init(small(2), 0).unwrap();
        let csr = Arc::new(Csr::with_self_loops(&[vec![1], vec![0]]));
        let emb = encode(&p, &random_features(2, 2, 0), &csr).unwrap();
        let one = decode_step(&emb, Context::Node(0), &[true, false], &p).unwrap();
        assert_eq!(one.probs, vec![0.0, 1.0]);
        assert_eq!(one.argmax(), 1);
        assert!(matches!(
            decode_step(&emb, Context::Mean, &[true, true], &p),
            Err(Error::Decoding(_))
        ));
    }

    proptest! {
        #[test]
        fn distributions_are_normalized(seed in 0u64..1000, mask_bits in 1u32..(1 << 12)) {
            let n = 12;
            let p = PolicyParameters::init(small(2), seed).unwrap();
            let g = generate_random_graph(GraphKind::Rr { d: 3 }, n, seed).unwrap();
            let emb = encode(&p, &random_features(n, 2, seed), &Arc::new(attention_graph(&g))).unwrap();
            // bit set = candidate allowed
            let mask: Vec<bool> = (0..n).map(|i| mask_bits >> i & 1 == 0).collect();
            let dist = decode_step(&emb, Context::Node((seed % 12) as usize), &mask, &p).unwrap();
            let total: f64 = dist.probs.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
            for i in 0..n {
                prop_assert!(dist.probs[i] >= 0.0);
                if mask[i] {
                    prop_assert_eq!(dist.probs[i], 0.0);
                }
            }
        }
    }

    /// Sum of log-probabilities of a fixed action sequence, recomputed from
    /// scratch for finite differences.
    fn episode_log_prob(
        values: &[f64],
        p: &PolicyParameters,
        x: &Mat,
        csr: &Arc<Csr>,
        tape: &mut Tape,
    ) -> Var {
        let mut q = p.clone();
        q.values = values.to_vec();
        let enc = encode_on_tape(tape, &q, x, csr).unwrap();
        let actions = [3, 1, 4, 0, 5];
        let mut terms = Vec::new();
        let mut ctx = Context::Mean;
        let mut left: Vec<usize> = (0..6).collect();
        for &a in &actions {
            let chosen = left.iter().position(|&c| c == a).unwrap();
            let (lp, _) = tape.log_prob(enc.queries, enc.keys, ctx, &left, chosen, q.config.clip);
            terms.push(lp);
            left.remove(chosen);
            ctx = Context::Node(a);
        }
        let s = tape.sum(&terms);
        tape.scale(s, -0.7)
    }

    #[test]
    fn gradients_match_finite_differences() {
        let cfg = PolicyConfig {
            input_dim: 2,
            hidden: 4,
            heads: 2,
            layers: 3,
            clip: 3.0,
            ..Default::default()
        };
        for (norm, residual) in [
            (AttentionNorm::WithSelf, true),
            (AttentionNorm::NeighborsOnly, true),
            (AttentionNorm::WithSelf, false),
        ] {
            let p = PolicyParameters::init(
                PolicyConfig {
                    attention_norm: norm,
                    residual,
                    ..cfg
                },
                11,
            )
            .unwrap();
            let csr = Arc::new(Csr::with_self_loops(&[
                vec![1, 2],
                vec![0, 2, 3],
                vec![0, 1],
                vec![1, 4, 5],
                vec![3],
                vec![3],
            ]));
            let x = random_features(6, 2, 4);
            let mut tape = Tape::new();
            let loss = episode_log_prob(&p.values, &p, &x, &csr, &mut tape);
            let analytic = gradients(&tape, loss, &p);
            let h = 1e-5;
            for i in 0..p.len() {
                let mut v = p.values.clone();
                v[i] += h;
                let mut t1 = Tape::new();
                let up = episode_log_prob(&v, &p, &x, &csr, &mut t1);
                v[i] -= 2.0 * h;
                let mut t2 = Tape::new();
                let down = episode_log_prob(&v, &p, &x, &csr, &mut t2);
                let fd = (t1.scalar(up) - t2.scalar(down)) / (2.0 * h);
                let err = (fd - analytic[i]).abs() / fd.abs().max(analytic[i].abs()).max(1e-5);
                assert!(
                    err <= 1e-4,
                    "{norm:?} residual={residual} param {i}: fd {fd} analytic {}",
                    analytic[i]
                );
            }
        }
    }
}
