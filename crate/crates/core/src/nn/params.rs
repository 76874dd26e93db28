use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tape::AttentionNorm;
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Network dimensions and fixed constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    /// Per-node input features: 2 for coordinates, 1 for line-graph weights.
    pub input_dim: usize,
    pub hidden: usize,
    pub heads: usize,
    pub layers: usize,
    /// Decoder logit bound `C`.
    pub clip: f64,
    pub leaky_slope: f64,
    pub attention_norm: AttentionNorm,
    /// Adds each layer's input (projected by `enc.0.skip` in the first
    /// layer) to its attention output before normalization. Without it,
    /// attention over a complete graph gives every node the same embedding.
    pub residual: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            input_dim: 2,
            hidden: 128,
            heads: 8,
            layers: 3,
            clip: 10.0,
            leaky_slope: 0.2,
            attention_norm: AttentionNorm::WithSelf,
            residual: true,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden == 0 || self.heads == 0 || self.layers == 0 {
            return Err(Error::param(format!(
                "all policy dimensions must be positive: {self:?}"
            )));
        }
        if !(self.clip.is_finite() && self.clip > 0.0) || !self.leaky_slope.is_finite() {
            return Err(Error::param(format!("invalid clip or slope: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Encoder,
    Decoder,
}

/// A named `rows x cols` slice of the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
    pub group: Group,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Offsets of every parameter array. Layer `l` holds, per head `h`, the
/// projection `theta` and attention vector `z`, followed by a shared bias
/// and the layer-norm scale and shift. The decoder holds `phi1` and `phi2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub blocks: Vec<Block>,
    pub len: usize,
}

impl Layout {
    pub fn new(cfg: &PolicyConfig) -> Self {
        let mut blocks = Vec::new();
        let mut offset = 0;
        let mut add = |name: String, rows: usize, cols: usize, group: Group| {
            blocks.push(Block {
                name,
                offset,
                rows,
                cols,
                group,
            });
            offset += rows * cols;
        };
        let d = cfg.hidden;
        for l in 0..cfg.layers {
            let d_in = if l == 0 { cfg.input_dim } else { d };
            for h in 0..cfg.heads {
                add(format!("enc.{l}.theta.{h}"), d_in, d, Group::Encoder);
                add(format!("enc.{l}.z.{h}"), 1, 2 * d, Group::Encoder);
            }
            if l == 0 && cfg.residual {
                add("enc.0.skip".into(), d_in, d, Group::Encoder);
            }
            add(format!("enc.{l}.bias"), 1, d, Group::Encoder);
            add(format!("enc.{l}.ln_gamma"), 1, d, Group::Encoder);
            add(format!("enc.{l}.ln_beta"), 1, d, Group::Encoder);
        }
        add("dec.phi1".into(), d, d, Group::Decoder);
        add("dec.phi2".into(), d, d, Group::Decoder);
        Layout {
            blocks,
            len: offset,
        }
    }

    pub fn block(&self, name: &str) -> &Block {
        self.blocks
            .iter()
            .find(|b| b.name == name)
            .unwrap_or_else(|| panic!("no parameter block {name}"))
    }
}

/// Adam moments and the current per-group learning rates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub lr_enc: f64,
    pub lr_dec: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            step: 0,
            lr_enc: 1e-3,
            lr_dec: 1e-4,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParameters {
    pub config: PolicyConfig,
    pub layout: Layout,
    pub values: Vec<f64>,
    pub adam: AdamState,
}

impl PolicyParameters {
    /// Glorot-uniform weights drawn from the parameter stream of `seed`,
    /// layer biases uniform in ±1/sqrt(fan_in), shifts 0 and layer-norm
    /// scales 1. A zero first-layer bias would let layer normalization erase
    /// the magnitude of one-dimensional inputs.
    pub fn init(config: PolicyConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let mut rng = stream(seed, Stream::Parameters);
        let mut values = vec![0.0; layout.len];
        for b in &layout.blocks {
            let slot = &mut values[b.range()];
            if b.name.ends_with("ln_gamma") {
                slot.fill(1.0);
            } else if b.name.ends_with("ln_beta") {
                slot.fill(0.0);
            } else if b.name.ends_with("bias") {
                let layer = b.name.trim_start_matches("enc.").trim_end_matches(".bias");
                let limit =
                    1.0 / (layout.block(&format!("enc.{layer}.theta.0")).rows as f64).sqrt();
                for x in slot.iter_mut() {
                    *x = rng.gen_range(-limit..limit);
                }
            } else {
                let limit = (6.0 / (b.rows + b.cols) as f64).sqrt();
                for x in slot.iter_mut() {
                    *x = rng.gen_range(-limit..limit);
                }
            }
        }
        let adam = AdamState::new(layout.len);
        Ok(PolicyParameters {
            config,
            layout,
            values,
            adam,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks that every array has the size its layout declares and that all
    /// values are finite.
    pub fn audit(&self) -> Result<()> {
        if self.layout != Layout::new(&self.config) {
            return Err(Error::shape(
                "parameter layout does not match the configuration",
            ));
        }
        let n = self.layout.len;
        if self.values.len() != n || self.adam.m.len() != n || self.adam.v.len() != n {
            return Err(Error::shape(format!(
                "expected {n} parameters, got values={} m={} v={}",
                self.values.len(),
                self.adam.m.len(),
                self.adam.v.len()
            )));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Training(format!("parameter {i} is not finite")));
        }
        Ok(())
    }

    pub fn group_of(&self, index: usize) -> Group {
        let b = self
            .layout
            .blocks
            .partition_point(|b| b.offset + b.len() <= index);
        self.layout.blocks[b].group
    }

    /// Serializes parameters and optimizer state.
    pub fn save(&self) -> Vec<u8> {
        save_checkpoint(self, "")
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        load_checkpoint(bytes).map(|(p, _)| p)
    }
}

const MAGIC: &[u8; 8] = b"COGAMEPP";
const VERSION: u32 = 1;

/// Checkpoint layout, all integers and floats little-endian:
///
/// ```text
/// magic "COGAMEPP" | version u32
/// input_dim u32 | hidden u32 | heads u32 | layers u32 | norm u8 | residual u8 | clip f64 | slope f64
/// count u64 | values f64 x count
/// adam_step u64 | lr_enc f64 | lr_dec f64 | m f64 x count | v f64 x count
/// extra_len u64 | extra UTF-8 bytes (the training configuration, may be empty)
/// ```
pub fn save_checkpoint(p: &PolicyParameters, extra: &str) -> Vec<u8> {
    let c = &p.config;
    let mut out = Vec::with_capacity(8 * (3 * p.len() + 16) + extra.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in [c.input_dim, c.hidden, c.heads, c.layers] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.push(match c.attention_norm {
        AttentionNorm::WithSelf => 0,
        AttentionNorm::NeighborsOnly => 1,
    });
    out.push(c.residual as u8);
    out.extend_from_slice(&c.clip.to_le_bytes());
    out.extend_from_slice(&c.leaky_slope.to_le_bytes());
    out.extend_from_slice(&(p.len() as u64).to_le_bytes());
    let floats = |out: &mut Vec<u8>, xs: &[f64]| {
        xs.iter()
            .for_each(|x| out.extend_from_slice(&x.to_le_bytes()))
    };
    floats(&mut out, &p.values);
    out.extend_from_slice(&p.adam.step.to_le_bytes());
    out.extend_from_slice(&p.adam.lr_enc.to_le_bytes());
    out.extend_from_slice(&p.adam.lr_dec.to_le_bytes());
    floats(&mut out, &p.adam.m);
    floats(&mut out, &p.adam.v);
    out.extend_from_slice(&(extra.len() as u64).to_le_bytes());
    out.extend_from_slice(extra.as_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Error::format(format!(
                "checkpoint truncated while reading {what} at byte {}",
                self.pos
            )));
        };
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::format("parameter count overflows"))?,
            what,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Inverse of [`save_checkpoint`]; returns the parameters and the extra text.
pub fn load_checkpoint(bytes: &[u8]) -> Result<(PolicyParameters, String)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(Error::format("not a policy checkpoint (bad magic)"));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::format(format!(
            "unsupported checkpoint version {version}, expected {VERSION}"
        )));
    }
    let input_dim = r.u32("input_dim")? as usize;
    let hidden = r.u32("hidden")? as usize;
    let heads = r.u32("heads")? as usize;
    let layers = r.u32("layers")? as usize;
    let attention_norm = match r.take(1, "attention norm")?[0] {
        0 => AttentionNorm::WithSelf,
        1 => AttentionNorm::NeighborsOnly,
        other => return Err(Error::format(format!("unknown attention norm tag {other}"))),
    };
    let residual = match r.take(1, "residual flag")?[0] {
        0 => false,
        1 => true,
        other => return Err(Error::format(format!("bad residual flag {other}"))),
    };
    let clip = r.f64("clip")?;
    let leaky_slope = r.f64("slope")?;
    let config = PolicyConfig {
        input_dim,
        hidden,
        heads,
        layers,
        clip,
        leaky_slope,
        attention_norm,
        residual,
    };
    config
        .validate()
        .map_err(|e| Error::format(format!("bad dimension header: {e}")))?;
    let layout = Layout::new(&config);
    let count = r.u64("parameter count")? as usize;
    if count != layout.len {
        return Err(Error::format(format!(
            "checkpoint holds {count} parameters, dimensions imply {}",
            layout.len
        )));
    }
    let values = r.f64s(count, "values")?;
    let step = r.u64("adam step")?;
    let lr_enc = r.f64("encoder learning rate")?;
    let lr_dec = r.f64("decoder learning rate")?;
    let m = r.f64s(count, "first moments")?;
    let v = r.f64s(count, "second moments")?;
    let extra_len = r.u64("extra length")? as usize;
    let extra = std::str::from_utf8(r.take(extra_len, "extra")?)
        .map_err(|_| Error::format("embedded configuration is not UTF-8"))?
        .to_string();
    if r.pos != bytes.len() {
        return Err(Error::format(format!(
            "{} trailing bytes after checkpoint",
            bytes.len() - r.pos
        )));
    }
    let params = PolicyParameters {
        config,
        layout,
        values,
        adam: AdamState {
            step,
            lr_enc,
            lr_dec,
            m,
            v,
        },
    };
    Ok((params, extra))
}
