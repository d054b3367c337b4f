use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Flavor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    AsgcnDg,
    AsgcnDt,
    Ascnn,
    BilstmAttn,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::AsgcnDg, Variant::AsgcnDt, Variant::Ascnn, Variant::BilstmAttn];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::AsgcnDg => "asgcn-dg",
            Variant::AsgcnDt => "asgcn-dt",
            Variant::Ascnn => "ascnn",
            Variant::BilstmAttn => "bilstm-attn",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL.into_iter().find(|v| v.as_str() == norm).ok_or_else(|| {
            Error::Config(format!("unknown model `{s}` (expected asgcn-dg, asgcn-dt, ascnn or bilstm-attn)"))
        })
    }
}

/// Hyperparameters. Defaults follow the published experimental settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub variant: Variant,
    pub num_layers: usize,
    pub hidden: usize,
    pub embed_dim: usize,
    pub use_position_weights: bool,
    pub use_aspect_mask: bool,
    pub use_gcn: bool,
    pub num_classes: usize,
    pub l2_lambda: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Inverted dropout on word embeddings while training; 0 disables it.
    pub dropout: f64,
    pub freeze_embeddings: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            variant: Variant::AsgcnDg,
            num_layers: 2,
            hidden: 300,
            embed_dim: 300,
            use_position_weights: true,
            use_aspect_mask: true,
            use_gcn: true,
            num_classes: 3,
            l2_lambda: 1e-5,
            learning_rate: 0.001,
            batch_size: 32,
            seed: 1,
            dropout: 0.0,
            freeze_embeddings: false,
        }
    }
}

impl ModelConfig {
    pub fn new(variant: Variant) -> Self {
        Self { variant, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_owned()));
        if self.hidden == 0 || self.embed_dim == 0 {
            return bad("hidden and embedding sizes must be positive");
        }
        if self.num_classes < 2 {
            return bad("at least two classes are required");
        }
        if self.has_graph_layers() && self.num_layers == 0 {
            return bad("num_layers must be at least 1 when GCN layers are enabled");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || self.l2_lambda.is_nan() || self.l2_lambda < 0.0 {
            return bad("learning rate must be positive and L2 coefficient non-negative");
        }
        Ok(())
    }

    /// Whether the model stacks GCN or convolution layers.
    pub fn has_graph_layers(&self) -> bool {
        self.use_gcn && self.variant != Variant::BilstmAttn
    }

    /// Adjacency flavor consumed by forward, if any.
    pub fn flavor(&self) -> Option<Flavor> {
        match self.variant {
            Variant::AsgcnDg if self.use_gcn => Some(Flavor::Dg),
            Variant::AsgcnDt if self.use_gcn => Some(Flavor::Dt),
            _ => None,
        }
    }

    /// Short run label, e.g. `asgcn-dg-L2-nomask`.
    pub fn label(&self) -> String {
        let mut s = self.variant.to_string();
        if self.variant != Variant::BilstmAttn {
            s.push_str(&format!("-L{}", self.num_layers));
        }
        if !self.use_gcn {
            s.push_str("-nogcn");
        }
        if !self.use_position_weights {
            s.push_str("-nopos");
        }
        if !self.use_aspect_mask {
            s.push_str("-nomask");
        }
        s
    }
}
