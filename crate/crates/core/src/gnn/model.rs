use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{relu, Matrix};
use crate::error::{Error, Result};
use crate::header::Header;

/// GNN class, named after the distributed model it corresponds to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Set-broadcasting (GraphSAGE-pool form).
    Sb,
    /// Multiset-broadcasting (GraphSAGE-mean form).
    Mb,
    /// Consistent-port-numbering GNN.
    Vvc,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Sb => "sb",
            ModelKind::Mb => "mb",
            ModelKind::Vvc => "vvc",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One message-passing layer. `bias` is present only for SB layers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weight: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Affine {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.weight.matvec(x);
        for (yi, b) in y.iter_mut().zip(&self.bias) {
            *yi += b;
        }
        y
    }
}

/// Multilayer perceptron with a rectifier between consecutive affine maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub layers: Vec<Affine>,
}

impl Readout {
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let mut x = z.to_vec();
        for (k, layer) in self.layers.iter().enumerate() {
            x = layer.apply(&x);
            if k + 1 < self.layers.len() {
                x.iter_mut().for_each(|v| *v = relu(*v));
            }
        }
        x
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.weight.cols)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.weight.rows)
    }
}

/// Architecture of a [`Model`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub delta: usize,
    /// Width of the node features.
    pub input_dim: usize,
    /// Per-layer output widths. For MB layers this is the width of the
    /// aggregated half; the own embedding is concatenated on top of it.
    pub layer_widths: Vec<usize>,
    /// Readout hidden width; `None` means `max(16, 2 * final embedding width)`.
    pub readout_hidden: Option<usize>,
    /// Number of labels `|Y|`.
    pub labels: usize,
}

impl ModelConfig {
    /// Two message-passing layers over one-hot degree features, binary labels.
    pub fn two_layer(kind: ModelKind, delta: usize, input_dim: usize, width: usize) -> Self {
        Self {
            kind,
            delta,
            input_dim,
            layer_widths: vec![width, width],
            readout_hidden: None,
            labels: 2,
        }
    }

    /// Embedding widths `d_1, ..., d_{L+1}`.
    pub fn embedding_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim];
        for &w in &self.layer_widths {
            let prev = *dims.last().unwrap();
            dims.push(match self.kind {
                ModelKind::Mb => prev + w,
                ModelKind::Sb | ModelKind::Vvc => w,
            });
        }
        dims
    }

    fn layer_shape(&self, d_in: usize, width: usize) -> (usize, usize) {
        match self.kind {
            ModelKind::Vvc => (width, d_in + self.delta * (d_in + 1)),
            ModelKind::Mb | ModelKind::Sb => (width, d_in),
        }
    }

    fn readout_hidden_width(&self) -> usize {
        let last = *self.embedding_dims().last().unwrap();
        self.readout_hidden.unwrap_or_else(|| (2 * last).max(16))
    }
}

/// Layer weights plus readout for one of the three GNN classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kind: ModelKind,
    pub delta: usize,
    pub input_dim: usize,
    pub layers: Vec<Layer>,
    pub readout: Readout,
}

impl Model {
    /// Builds a model with every parameter drawn by `init`.
    pub fn with_init(cfg: &ModelConfig, mut init: impl FnMut() -> f64) -> Result<Self> {
        if cfg.delta == 0 || cfg.input_dim == 0 || cfg.labels == 0 {
            return Err(Error::ShapeError("delta, input_dim and labels must be positive".into()));
        }
        if cfg.layer_widths.contains(&0) {
            return Err(Error::ShapeError("layer widths must be positive".into()));
        }
        let dims = cfg.embedding_dims();
        let layers = cfg
            .layer_widths
            .iter()
            .zip(&dims)
            .map(|(&width, &d_in)| {
                let (rows, cols) = cfg.layer_shape(d_in, width);
                let weight = Matrix::from_fn(rows, cols, |_, _| init());
                let bias = (cfg.kind == ModelKind::Sb).then(|| (0..rows).map(|_| init()).collect());
                Layer { weight, bias }
            })
            .collect();
        let last = *dims.last().unwrap();
        let hidden = cfg.readout_hidden_width();
        let mut affine = |rows: usize, cols: usize| Affine {
            weight: Matrix::from_fn(rows, cols, |_, _| init()),
            bias: (0..rows).map(|_| init()).collect(),
        };
        let readout = Readout {
            layers: vec![affine(hidden, last), affine(cfg.labels, hidden)],
        };
        let model = Self {
            kind: cfg.kind,
            delta: cfg.delta,
            input_dim: cfg.input_dim,
            layers,
            readout,
        };
        model.validate()?;
        Ok(model)
    }

    /// Uniform(-scale, scale) initialization.
    pub fn random(cfg: &ModelConfig, scale: f64, rng: &mut impl Rng) -> Result<Self> {
        Self::with_init(cfg, || rng.gen_range(-scale..scale))
    }

    pub fn zeros(cfg: &ModelConfig) -> Result<Self> {
        Self::with_init(cfg, || 0.0)
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Embedding widths `d_1, ..., d_{L+1}` implied by the weights.
    pub fn embedding_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim];
        for layer in &self.layers {
            let prev = *dims.last().unwrap();
            dims.push(match self.kind {
                ModelKind::Mb => prev + layer.weight.rows,
                ModelKind::Sb | ModelKind::Vvc => layer.weight.rows,
            });
        }
        dims
    }

    pub fn num_labels(&self) -> usize {
        self.readout.output_dim()
    }

    /// Checks that every shape chains.
    pub fn validate(&self) -> Result<()> {
        let shape = |msg: String| Err(Error::ShapeError(msg));
        let mut d = self.input_dim;
        for (l, layer) in self.layers.iter().enumerate() {
            let w = &layer.weight;
            if !w.is_well_formed() {
                return shape(format!("layer {} matrix data length", l + 1));
            }
            let cols = match self.kind {
                ModelKind::Vvc => d + self.delta * (d + 1),
                ModelKind::Mb | ModelKind::Sb => d,
            };
            if w.cols != cols {
                return shape(format!("layer {} expects {} inputs, weight has {}", l + 1, cols, w.cols));
            }
            match (&layer.bias, self.kind) {
                (Some(b), ModelKind::Sb) if b.len() == w.rows => {}
                (None, ModelKind::Mb | ModelKind::Vvc) => {}
                _ => return shape(format!("layer {} bias does not fit kind {}", l + 1, self.kind)),
            }
            d = match self.kind {
                ModelKind::Mb => d + w.rows,
                _ => w.rows,
            };
        }
        if self.readout.layers.is_empty() {
            return shape("readout has no layers".into());
        }
        for (k, a) in self.readout.layers.iter().enumerate() {
            if !a.weight.is_well_formed() || a.bias.len() != a.weight.rows || a.weight.cols != d {
                return shape(format!("readout layer {} has inconsistent shape", k + 1));
            }
            d = a.weight.rows;
        }
        Ok(())
    }

    /// Visits every parameter in a fixed order: layer weights then bias,
    /// followed by readout weights then bias.
    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for layer in &mut self.layers {
            layer.weight.data.iter_mut().for_each(&mut f);
            if let Some(b) = &mut layer.bias {
                b.iter_mut().for_each(&mut f);
            }
        }
        for a in &mut self.readout.layers {
            a.weight.data.iter_mut().for_each(&mut f);
            a.bias.iter_mut().for_each(&mut f);
        }
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.clone().for_each_param_mut(|x| out.push(*x));
        out
    }

    pub fn num_params(&self) -> usize {
        self.params().len()
    }

    pub fn set_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::ShapeError(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                values.len()
            )));
        }
        let mut it = values.iter();
        self.for_each_param_mut(|x| *x = *it.next().unwrap());
        Ok(())
    }

    /// Same shape with every parameter zeroed; used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.for_each_param_mut(|x| *x = 0.0);
        z
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Checkpoint with a provenance header; the weights sit under `model`.
    pub fn to_checkpoint_json(&self, header: &Header) -> Result<String> {
        let file = serde_json::json!({ "header": header, "model": self });
        Ok(serde_json::to_string_pretty(&file)? + "\n")
    }

    /// Accepts a bare model or a checkpoint written by [`Model::to_checkpoint_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        if let Some(inner) = value.get_mut("model") {
            value = inner.take();
        }
        let model: Model = serde_json::from_value(value)?;
        model.validate()?;
        Ok(model)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes_follow_declared_widths() {
        let cfg = ModelConfig::two_layer(ModelKind::Vvc, 3, 3, 8);
        let m = Model::zeros(&cfg).unwrap();
        assert_eq!(m.layers[0].weight.cols, 3 + 3 * 4);
        assert_eq!(m.layers[1].weight.cols, 8 + 3 * 9);
        assert_eq!(m.readout.layers[0].weight.rows, 16);
        assert_eq!(m.num_labels(), 2);

        let mb = Model::zeros(&ModelConfig::two_layer(ModelKind::Mb, 3, 3, 4)).unwrap();
        assert_eq!(mb.embedding_dims(), vec![3, 7, 11]);
        assert_eq!(mb.readout.input_dim(), 11);

        let sb = Model::zeros(&ModelConfig::two_layer(ModelKind::Sb, 3, 3, 4)).unwrap();
        assert!(sb.layers.iter().all(|l| l.bias.as_ref().map(Vec::len) == Some(4)));
    }

    #[test]
    fn rejects_broken_shapes() {
        let mut m = Model::zeros(&ModelConfig::two_layer(ModelKind::Vvc, 3, 3, 4)).unwrap();
        m.layers[1].weight = Matrix::zeros(4, 5);
        assert!(matches!(m.validate(), Err(Error::ShapeError(_))));
        let mut m = Model::zeros(&ModelConfig::two_layer(ModelKind::Mb, 3, 3, 4)).unwrap();
        m.layers[0].bias = Some(vec![0.0; 4]);
        assert!(m.validate().is_err());
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [ModelKind::Sb, ModelKind::Mb, ModelKind::Vvc] {
            let mut m = Model::random(&ModelConfig::two_layer(kind, 4, 4, 5), 1.0, &mut rng).unwrap();
            // Awkward values: subnormals, large exponents, negative zero.
            let mut p = m.params();
            p[0] = 5e-324;
            p[1] = -0.0;
            p[2] = 1.0 / 3.0;
            p[3] = 1.7976931348623157e308;
            m.set_params(&p).unwrap();
            let back = Model::from_json(&m.to_json().unwrap()).unwrap();
            let bits = |m: &Model| m.params().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&m), bits(&back));
            assert_eq!(back.kind, kind);
        }
    }
}
