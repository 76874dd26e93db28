//! Graph-attention encoder, clipped attention decoder and the reverse-mode
//! machinery used to train them.

mod params;
mod policy;
pub mod tape;

pub use params::{
    load_checkpoint, save_checkpoint, AdamState, Block, Group, Layout, PolicyConfig,
    PolicyParameters,
};
pub(crate) use policy::{argmax, sample_index};
pub use policy::{
    attention_graph, decode_candidates, decode_step, encode, encode_on_tape, gat_layer, gradients,
    ActionDistribution, Encoded, NodeEmbeddings,
};
pub use tape::{decoder_distribution, AttentionNorm, Context, Csr, DecoderOutput, Mat, Tape, Var};
