//! Reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] records every operation of one forward pass together with the
//! intermediate values its backward rule needs. [`Tape::backward`] walks the
//! record in reverse and accumulates parameter gradients into a flat buffer
//! laid out like [`PolicyParameters::values`](super::PolicyParameters).
//!
//! The operation set is small and specific to the policy network: matrix
//! products, graph attention, layer normalization, ReLU and the decoder's
//! clipped log-probability.

use std::sync::Arc;

use ndarray::{s, Array2, Axis};

pub type Mat = Array2<f64>;

/// Handle to a value on a tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

/// Per-node attention neighborhoods in compressed-row form. Row `i` lists
/// the nodes `i` attends to; when `self_loops` is set it begins with `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    self_loops: bool,
}

impl Csr {
    /// Rows of `{i} ∪ N(i)` (self first) from plain neighbor lists.
    pub fn with_self_loops(neighbors: &[Vec<usize>]) -> Self {
        let mut offsets = Vec::with_capacity(neighbors.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for (i, nb) in neighbors.iter().enumerate() {
            targets.push(i);
            targets.extend(nb.iter().copied().filter(|&j| j != i));
            offsets.push(targets.len());
        }
        Csr {
            offsets,
            targets,
            self_loops: true,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn nnz(&self) -> usize {
        self.targets.len()
    }

    /// Node relabeling: row `perm[i]` of the result is row `i` of `self`
    /// with targets renamed through `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.node_count();
        let mut rows = vec![Vec::new(); n];
        for i in 0..n {
            rows[perm[i]] = self.row(i).iter().skip(1).map(|&j| perm[j]).collect();
        }
        Csr::with_self_loops(&rows)
    }
}

/// Which query row the decoder uses as context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    /// The node selected at the previous step.
    Node(usize),
    /// Mean over all nodes; used before any node has been selected.
    Mean,
}

/// How attention weights are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionNorm {
    /// Softmax over `{i} ∪ N(i)`; coefficients sum to one.
    WithSelf,
    /// Denominator over `N(i)` only, self term still aggregated (falls back
    /// to `WithSelf` for isolated nodes).
    NeighborsOnly,
}

#[derive(Debug)]
enum Op {
    Constant,
    Param {
        offset: usize,
    },
    MatMul(Var, Var),
    /// `a * b^T`
    MatMulBt(Var, Var),
    Attention {
        u: Var,
        z: Var,
        graph: Arc<Csr>,
        slope: f64,
        norm: AttentionNorm,
        pre: Vec<f64>,
        alpha: Vec<f64>,
    },
    Mean(Vec<Var>),
    Add(Var, Var),
    AddRow(Var, Var),
    LayerNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        xhat: Mat,
        inv_std: Vec<f64>,
    },
    Relu(Var),
    LogProb {
        q: Var,
        k: Var,
        ctx: Context,
        candidates: Vec<usize>,
        chosen: usize,
        probs: Vec<f64>,
        tanh: Vec<f64>,
        query: Vec<f64>,
        clip: f64,
        scale: f64,
    },
    Sum(Vec<Var>),
    Scale(Var, f64),
}

struct Node {
    value: Mat,
    op: Op,
}

pub struct Tape {
    nodes: Vec<Node>,
}

pub const LAYER_NORM_EPS: f64 = 1e-5;

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Mat, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Mat {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].value[[0, 0]]
    }

    pub fn constant(&mut self, value: Mat) -> Var {
        self.push(value, Op::Constant)
    }

    /// A `rows x cols` block of the flat parameter vector starting at `offset`.
    pub fn param(&mut self, params: &[f64], offset: usize, rows: usize, cols: usize) -> Var {
        let value =
            Mat::from_shape_vec((rows, cols), params[offset..offset + rows * cols].to_vec())
                .expect("parameter block shape");
        self.push(value, Op::Param { offset })
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).dot(self.value(b));
        self.push(value, Op::MatMul(a, b))
    }

    pub fn matmul_bt(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).dot(&self.value(b).t());
        self.push(value, Op::MatMulBt(a, b))
    }

    /// Graph attention aggregation for one head.
    ///
    /// With `u = X Θ` (one row per node) and `z = [z_src, z_dst]`, the logit
    /// of `i -> j` is `leaky_relu(z_src·u_i + z_dst·u_j)`; logits are
    /// softmax-normalized per row of `graph` and the output row is
    /// `Σ_j α_ij u_j`.
    pub fn attention(
        &mut self,
        u: Var,
        z: Var,
        graph: Arc<Csr>,
        slope: f64,
        norm: AttentionNorm,
    ) -> Var {
        let uval = self.value(u);
        let zval = self.value(z);
        let (n, d) = uval.dim();
        assert_eq!(graph.node_count(), n, "attention graph size");
        let z_src = zval.slice(s![0, ..d]);
        let z_dst = zval.slice(s![0, d..]);
        let src: Vec<f64> = uval.outer_iter().map(|r| r.dot(&z_src)).collect();
        let dst: Vec<f64> = uval.outer_iter().map(|r| r.dot(&z_dst)).collect();
        let mut pre = vec![0.0; graph.nnz()];
        let mut alpha = vec![0.0; graph.nnz()];
        let mut out = Mat::zeros((n, d));
        for i in 0..n {
            let lo = graph.offsets[i];
            let row = graph.row(i);
            let mut peak = f64::NEG_INFINITY;
            for (k, &j) in row.iter().enumerate() {
                let e = src[i] + dst[j];
                pre[lo + k] = e;
                let a = if e > 0.0 { e } else { slope * e };
                alpha[lo + k] = a;
                peak = peak.max(a);
            }
            let skip_self = norm == AttentionNorm::NeighborsOnly && row.len() > 1;
            let mut denom = 0.0;
            for (k, slot) in alpha[lo..lo + row.len()].iter_mut().enumerate() {
                *slot = (*slot - peak).exp();
                if !(skip_self && k == 0) {
                    denom += *slot;
                }
            }
            let mut orow = out.row_mut(i);
            for (k, &j) in row.iter().enumerate() {
                alpha[lo + k] /= denom;
                orow.scaled_add(alpha[lo + k], &uval.row(j));
            }
        }
        self.push(
            out,
            Op::Attention {
                u,
                z,
                graph,
                slope,
                norm,
                pre,
                alpha,
            },
        )
    }

    pub fn mean(&mut self, xs: &[Var]) -> Var {
        let mut acc = self.value(xs[0]).clone();
        for &x in &xs[1..] {
            acc += self.value(x);
        }
        acc /= xs.len() as f64;
        self.push(acc, Op::Mean(xs.to_vec()))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a) + self.value(b);
        self.push(value, Op::Add(a, b))
    }

    /// Adds a `1 x d` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Var {
        let value = self.value(a) + self.value(row);
        self.push(value, Op::AddRow(a, row))
    }

    /// Row-wise layer normalization with learned scale and shift (`1 x d`).
    pub fn layer_norm(&mut self, x: Var, gamma: Var, beta: Var) -> Var {
        let xv = self.value(x);
        let (n, d) = xv.dim();
        let mut xhat = Mat::zeros((n, d));
        let mut inv_std = vec![0.0; n];
        for i in 0..n {
            let row = xv.row(i);
            let mu = row.sum() / d as f64;
            let var = row.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / d as f64;
            let is = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            inv_std[i] = is;
            xhat.row_mut(i).assign(&row.mapv(|v| (v - mu) * is));
        }
        let value = &xhat * self.value(gamma) + self.value(beta);
        self.push(
            value,
            Op::LayerNorm {
                x,
                gamma,
                beta,
                xhat,
                inv_std,
            },
        )
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let value = self.value(x).mapv(|v| v.max(0.0));
        self.push(value, Op::Relu(x))
    }

    /// Log-probability of `candidates[chosen]` under the clipped attention
    /// decoder; returns the `1 x 1` variable and the candidate probabilities.
    pub fn log_prob(
        &mut self,
        q: Var,
        k: Var,
        ctx: Context,
        candidates: &[usize],
        chosen: usize,
        clip: f64,
    ) -> (Var, Vec<f64>) {
        let out = decoder_distribution(self.value(q), self.value(k), ctx, candidates, clip);
        let probs = out.probs.clone();
        (
            self.push_log_prob(q, k, ctx, candidates, chosen, clip, out),
            probs,
        )
    }

    /// As [`Tape::log_prob`] with the distribution already computed from the
    /// current values of `q` and `k`.
    #[allow(clippy::too_many_arguments)]
    pub fn push_log_prob(
        &mut self,
        q: Var,
        k: Var,
        ctx: Context,
        candidates: &[usize],
        chosen: usize,
        clip: f64,
        out: DecoderOutput,
    ) -> Var {
        let lp = out.probs[chosen].ln();
        self.push(
            Mat::from_elem((1, 1), lp),
            Op::LogProb {
                q,
                k,
                ctx,
                candidates: candidates.to_vec(),
                chosen,
                probs: out.probs,
                tanh: out.tanh,
                query: out.query,
                clip,
                scale: out.scale,
            },
        )
    }

    pub fn sum(&mut self, xs: &[Var]) -> Var {
        let total: f64 = xs.iter().map(|&x| self.scalar(x)).sum();
        self.push(Mat::from_elem((1, 1), total), Op::Sum(xs.to_vec()))
    }

    pub fn scale(&mut self, x: Var, factor: f64) -> Var {
        let value = self.value(x) * factor;
        self.push(value, Op::Scale(x, factor))
    }

    /// Back-propagates `seed * d(root)/d(params)` and adds it into `grads`.
    pub fn backward(&self, root: Var, seed: f64, grads: &mut [f64]) {
        let mut adj: Vec<Option<Mat>> = (0..=root.0).map(|_| None).collect();
        adj[root.0] = Some(Mat::from_elem(self.nodes[root.0].value.dim(), seed));
        for idx in (0..=root.0).rev() {
            let Some(g) = adj[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Constant => {}
                Op::Param { offset } => {
                    for (slot, v) in grads[*offset..*offset + g.len()].iter_mut().zip(g.iter()) {
                        *slot += v;
                    }
                }
                Op::MatMul(a, b) => {
                    let da = g.dot(&self.value(*b).t());
                    let db = self.value(*a).t().dot(&g);
                    accumulate(&mut adj, *a, da);
                    accumulate(&mut adj, *b, db);
                }
                Op::MatMulBt(a, b) => {
                    let da = g.dot(self.value(*b));
                    let db = g.t().dot(self.value(*a));
                    accumulate(&mut adj, *a, da);
                    accumulate(&mut adj, *b, db);
                }
                Op::Attention {
                    u,
                    z,
                    graph,
                    slope,
                    norm,
                    pre,
                    alpha,
                } => {
                    let (du, dz) = attention_backward(
                        self.value(*u),
                        self.value(*z),
                        graph,
                        *slope,
                        *norm,
                        pre,
                        alpha,
                        &g,
                    );
                    accumulate(&mut adj, *u, du);
                    accumulate(&mut adj, *z, dz);
                }
                Op::Mean(xs) => {
                    let part = &g / xs.len() as f64;
                    for &x in xs {
                        accumulate(&mut adj, x, part.clone());
                    }
                }
                Op::Add(a, b) => {
                    accumulate(&mut adj, *b, g.clone());
                    accumulate(&mut adj, *a, g);
                }
                Op::AddRow(a, row) => {
                    let drow = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    accumulate(&mut adj, *a, g);
                    accumulate(&mut adj, *row, drow);
                }
                Op::LayerNorm {
                    x,
                    gamma,
                    beta,
                    xhat,
                    inv_std,
                } => {
                    let gam = self.value(*gamma);
                    let dgamma = (&g * xhat).sum_axis(Axis(0)).insert_axis(Axis(0));
                    let dbeta = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    let dxhat = &g * gam;
                    let (n, d) = g.dim();
                    let mut dx = Mat::zeros((n, d));
                    for i in 0..n {
                        let dh = dxhat.row(i);
                        let xh = xhat.row(i);
                        let sum_dh = dh.sum();
                        let sum_dh_xh = dh.dot(&xh);
                        let c = inv_std[i] / d as f64;
                        for j in 0..d {
                            dx[[i, j]] = c * (d as f64 * dh[j] - sum_dh - xh[j] * sum_dh_xh);
                        }
                    }
                    accumulate(&mut adj, *x, dx);
                    accumulate(&mut adj, *gamma, dgamma);
                    accumulate(&mut adj, *beta, dbeta);
                }
                Op::Relu(x) => {
                    let mut dx = g;
                    dx.zip_mut_with(self.value(*x), |d, &v| {
                        if v <= 0.0 {
                            *d = 0.0;
                        }
                    });
                    accumulate(&mut adj, *x, dx);
                }
                Op::LogProb {
                    q,
                    k,
                    ctx,
                    candidates,
                    chosen,
                    probs,
                    tanh,
                    query,
                    clip,
                    scale,
                } => {
                    let up = g[[0, 0]];
                    let kval = self.value(*k);
                    let (n, dh) = kval.dim();
                    let mut dk = Mat::zeros((n, dh));
                    let mut dquery = vec![0.0; dh];
                    for (c, &j) in candidates.iter().enumerate() {
                        let indicator = if c == *chosen { 1.0 } else { 0.0 };
                        let dlogit = up * (indicator - probs[c]);
                        let draw = dlogit * clip * (1.0 - tanh[c] * tanh[c]) * scale;
                        if draw == 0.0 {
                            continue;
                        }
                        let krow = kval.row(j);
                        for t in 0..dh {
                            dquery[t] += draw * krow[t];
                            dk[[j, t]] += draw * query[t];
                        }
                    }
                    let mut dq = Mat::zeros(self.value(*q).dim());
                    match *ctx {
                        Context::Node(i) => {
                            for t in 0..dh {
                                dq[[i, t]] = dquery[t];
                            }
                        }
                        Context::Mean => {
                            let rows = dq.nrows() as f64;
                            for mut row in dq.outer_iter_mut() {
                                for t in 0..dh {
                                    row[t] = dquery[t] / rows;
                                }
                            }
                        }
                    }
                    accumulate(&mut adj, *q, dq);
                    accumulate(&mut adj, *k, dk);
                }
                Op::Sum(xs) => {
                    for &x in xs {
                        accumulate(&mut adj, x, g.clone());
                    }
                }
                Op::Scale(x, factor) => accumulate(&mut adj, *x, g * *factor),
            }
        }
    }
}

fn accumulate(adj: &mut [Option<Mat>], v: Var, g: Mat) {
    match &mut adj[v.0] {
        Some(acc) => *acc += &g,
        slot => *slot = Some(g),
    }
}

#[allow(clippy::too_many_arguments)]
fn attention_backward(
    u: &Mat,
    z: &Mat,
    graph: &Csr,
    slope: f64,
    norm: AttentionNorm,
    pre: &[f64],
    alpha: &[f64],
    g: &Mat,
) -> (Mat, Mat) {
    let (n, d) = u.dim();
    let mut du = Mat::zeros((n, d));
    let mut dsrc = vec![0.0; n];
    let mut ddst = vec![0.0; n];
    let mut dalpha = Vec::new();
    for i in 0..n {
        let lo = graph.offsets[i];
        let row = graph.row(i);
        let gi = g.row(i);
        dalpha.clear();
        for (k, &j) in row.iter().enumerate() {
            du.row_mut(j).scaled_add(alpha[lo + k], &gi);
            dalpha.push(gi.dot(&u.row(j)));
        }
        let skip_self = norm == AttentionNorm::NeighborsOnly && row.len() > 1;
        let weighted: f64 = (0..row.len()).map(|k| alpha[lo + k] * dalpha[k]).sum();
        for (k, &j) in row.iter().enumerate() {
            let in_denominator = !(skip_self && k == 0);
            let da = alpha[lo + k] * (dalpha[k] - if in_denominator { weighted } else { 0.0 });
            let de = if pre[lo + k] > 0.0 { da } else { slope * da };
            dsrc[i] += de;
            ddst[j] += de;
        }
    }
    let z_src = z.slice(s![0, ..d]);
    let z_dst = z.slice(s![0, d..]);
    let mut dz = Mat::zeros((1, 2 * d));
    for i in 0..n {
        let ui = u.row(i);
        let mut dui = du.row_mut(i);
        dui.scaled_add(dsrc[i], &z_src);
        dui.scaled_add(ddst[i], &z_dst);
        dz.slice_mut(s![0, ..d]).scaled_add(dsrc[i], &ui);
        dz.slice_mut(s![0, d..]).scaled_add(ddst[i], &ui);
    }
    (du, dz)
}

/// Clipped attention scores of the decoder for a set of candidates.
pub struct DecoderOutput {
    pub probs: Vec<f64>,
    pub tanh: Vec<f64>,
    pub query: Vec<f64>,
    pub scale: f64,
}

/// `logit_j = clip * tanh(q_ctx · k_j / sqrt(d_h))`, softmax over candidates.
pub fn decoder_distribution(
    q: &Mat,
    k: &Mat,
    ctx: Context,
    candidates: &[usize],
    clip: f64,
) -> DecoderOutput {
    let dh = q.ncols();
    let query: Vec<f64> = match ctx {
        Context::Node(i) => q.row(i).to_vec(),
        Context::Mean => q
            .mean_axis(Axis(0))
            .expect("non-empty query matrix")
            .to_vec(),
    };
    let scale = 1.0 / (dh as f64).sqrt();
    let tanh: Vec<f64> = candidates
        .iter()
        .map(|&j| (k.row(j).iter().zip(&query).map(|(a, b)| a * b).sum::<f64>() * scale).tanh())
        .collect();
    let peak = tanh.iter().fold(f64::NEG_INFINITY, |m, &t| m.max(clip * t));
    let mut probs: Vec<f64> = tanh.iter().map(|&t| (clip * t - peak).exp()).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    DecoderOutput {
        probs,
        tanh,
        query,
        scale,
    }
}
