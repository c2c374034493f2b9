//! Dense networks and the two-tower multiply architecture.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{loss_and_output_grad, Loss, Targets};
use super::matrix::{accumulate_weight_grad, affine, backprop_input, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Softmax,
    Identity,
}

impl Activation {
    fn apply(self, z: &Matrix) -> Matrix {
        let mut a = z.clone();
        match self {
            Activation::Relu => a.data.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Sigmoid => a.data.iter_mut().for_each(|v| *v = sigmoid(*v)),
            Activation::Identity => {}
            Activation::Softmax => {
                for i in 0..a.rows {
                    softmax_in_place(a.row_mut(i));
                }
            }
        }
        a
    }

    /// Multiplies `da` by the activation derivative, expressed through the output `a`.
    fn backprop(self, a: &Matrix, mut da: Matrix) -> Result<Matrix> {
        match self {
            Activation::Relu => da.data.iter_mut().zip(&a.data).for_each(|(d, &o)| {
                if o <= 0.0 {
                    *d = 0.0
                }
            }),
            Activation::Sigmoid => da.data.iter_mut().zip(&a.data).for_each(|(d, &o)| *d *= o * (1.0 - o)),
            Activation::Identity => {}
            Activation::Softmax => {
                for i in 0..a.rows {
                    let p = a.row(i);
                    let d = da.row_mut(i);
                    let s: f64 = d.iter().zip(p).map(|(x, y)| x * y).sum();
                    for (dj, pj) in d.iter_mut().zip(p) {
                        *dj = pj * (*dj - s);
                    }
                }
            }
        }
        Ok(da)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    v.iter_mut().for_each(|x| *x /= sum);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub input: usize,
    pub output: usize,
    pub activation: Activation,
}

impl LayerShape {
    fn n_params(&self) -> usize {
        self.input * self.output + self.output
    }
}

/// Fully connected network. Parameters live in one flat vector, layer by
/// layer, each as an `input x output` weight block followed by the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    pub layers: Vec<LayerShape>,
    pub params: Vec<f64>,
}

/// Activations retained by a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `acts[0]` is the input; `acts[l + 1]` the output of layer `l`.
    pub acts: Vec<Matrix>,
    /// Pre-activation of the last layer.
    pub logits: Matrix,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.acts.last().expect("cache holds the input at least")
    }
}

impl DenseNet {
    /// Glorot-uniform weights and zero biases.
    pub fn new(input: usize, widths: &[(usize, Activation)], rng: &mut ChaCha8Rng) -> Result<Self> {
        if input == 0 || widths.is_empty() || widths.iter().any(|&(w, _)| w == 0) {
            return Err(Error::Shape("layer widths must be positive and at least one layer is required".into()));
        }
        let mut layers = Vec::with_capacity(widths.len());
        let mut params = Vec::new();
        let mut fan_in = input;
        for &(output, activation) in widths {
            let limit = (6.0 / (fan_in + output) as f64).sqrt();
            params.extend((0..fan_in * output).map(|_| rng.random_range(-limit..=limit)));
            params.extend(std::iter::repeat_n(0.0, output));
            layers.push(LayerShape { input: fan_in, output, activation });
            fan_in = output;
        }
        Ok(Self { layers, params })
    }

    /// Network with the given shapes and every parameter zero.
    pub fn zeros(layers: Vec<LayerShape>) -> Result<Self> {
        for pair in layers.windows(2) {
            if pair[0].output != pair[1].input {
                return Err(Error::Shape("adjacent layer widths differ".into()));
            }
        }
        let n = layers.iter().map(LayerShape::n_params).sum();
        Ok(Self { layers, params: vec![0.0; n] })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.output)
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn offsets(&self) -> impl Iterator<Item = (LayerShape, usize)> + '_ {
        self.layers.iter().scan(0, |off, l| {
            let start = *off;
            *off += l.n_params();
            Some((*l, start))
        })
    }

    /// Weight block and bias of layer `l`.
    pub fn layer_params(&self, l: usize) -> (&[f64], &[f64]) {
        let (shape, off) = self.offsets().nth(l).expect("layer index in range");
        let w_end = off + shape.input * shape.output;
        (&self.params[off..w_end], &self.params[w_end..w_end + shape.output])
    }

    pub fn layer_params_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let (shape, off) = self.offsets().nth(l).expect("layer index in range");
        let w_end = off + shape.input * shape.output;
        let (w, rest) = self.params[off..w_end + shape.output].split_at_mut(w_end - off);
        (w, rest)
    }

    pub fn forward_cached(&self, x: &Matrix) -> Result<ForwardCache> {
        if x.cols != self.input_dim() {
            return Err(Error::Shape(format!("network expects {} inputs, got {}", self.input_dim(), x.cols)));
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        let mut z = Matrix::zeros(0, 0);
        for (shape, off) in self.offsets() {
            let w_end = off + shape.input * shape.output;
            affine(acts.last().unwrap(), &self.params[off..w_end], &self.params[w_end..w_end + shape.output], &mut z);
            acts.push(shape.activation.apply(&z));
        }
        if !acts.last().unwrap().is_finite() {
            return Err(Error::Numeric("non-finite network output".into()));
        }
        Ok(ForwardCache { acts, logits: z })
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward_cached(x)?.acts.pop().unwrap())
    }

    /// Backpropagates `dz` (gradient w.r.t. the last layer's pre-activation),
    /// accumulating into `grad` and returning the gradient w.r.t. the input.
    pub fn backward(&self, cache: &ForwardCache, mut dz: Matrix, grad: &mut [f64]) -> Result<Matrix> {
        let layout: Vec<_> = self.offsets().collect();
        for (l, &(shape, off)) in layout.iter().enumerate().rev() {
            let w_end = off + shape.input * shape.output;
            let (gw, gb) = grad[off..w_end + shape.output].split_at_mut(w_end - off);
            accumulate_weight_grad(&cache.acts[l], &dz, gw, gb);
            let da = backprop_input(&dz, &self.params[off..w_end], shape.input);
            if l == 0 {
                return Ok(da);
            }
            dz = layout[l - 1].0.activation.backprop(&cache.acts[l], da)?;
        }
        unreachable!("networks have at least one layer")
    }
}

/// Elementwise product of two tower outputs.
pub fn merge_multiply(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("cannot merge vectors of length {} and {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).collect())
}

fn merge_matrices(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Shape("tower outputs differ in shape".into()));
    }
    Ok(Matrix { rows: a.rows, cols: a.cols, data: merge_multiply(&a.data, &b.data)? })
}

/// Two towers merged by elementwise product, followed by a head network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTowerNet {
    pub tower_a: DenseNet,
    pub tower_b: DenseNet,
    pub head: DenseNet,
}

impl TwoTowerNet {
    pub fn new(tower_a: DenseNet, tower_b: DenseNet, head: DenseNet) -> Result<Self> {
        if tower_a.output_dim() != tower_b.output_dim() || head.input_dim() != tower_a.output_dim() {
            return Err(Error::Shape("tower widths and head input must agree".into()));
        }
        Ok(Self { tower_a, tower_b, head })
    }
}

/// Inputs for one batch: tower A (or the single net) and, for two-tower
/// models, tower B.
#[derive(Debug, Clone, Copy)]
pub struct Inputs<'a> {
    pub a: &'a Matrix,
    pub b: Option<&'a Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    Single(DenseNet),
    TwoTower(TwoTowerNet),
}

/// Gradient container aligned with [`Model::param_slices`].
pub type Grads = Vec<Vec<f64>>;

impl Model {
    pub fn nets(&self) -> Vec<&DenseNet> {
        match self {
            Model::Single(n) => vec![n],
            Model::TwoTower(t) => vec![&t.tower_a, &t.tower_b, &t.head],
        }
    }

    fn nets_mut(&mut self) -> Vec<&mut DenseNet> {
        match self {
            Model::Single(n) => vec![n],
            Model::TwoTower(t) => vec![&mut t.tower_a, &mut t.tower_b, &mut t.head],
        }
    }

    pub fn param_slices(&self) -> Vec<&[f64]> {
        self.nets().into_iter().map(|n| n.params.as_slice()).collect()
    }

    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.nets_mut().into_iter().map(|n| n.params.as_mut_slice()).collect()
    }

    pub fn n_params(&self) -> usize {
        self.nets().iter().map(|n| n.n_params()).sum()
    }

    pub fn zero_grads(&self) -> Grads {
        self.nets().iter().map(|n| vec![0.0; n.n_params()]).collect()
    }

    pub fn head(&self) -> &DenseNet {
        match self {
            Model::Single(n) => n,
            Model::TwoTower(t) => &t.head,
        }
    }

    pub fn is_two_tower(&self) -> bool {
        matches!(self, Model::TwoTower(_))
    }

    /// Input widths: (tower A or single net, tower B).
    pub fn input_dims(&self) -> (usize, Option<usize>) {
        match self {
            Model::Single(n) => (n.input_dim(), None),
            Model::TwoTower(t) => (t.tower_a.input_dim(), Some(t.tower_b.input_dim())),
        }
    }

    fn check_inputs(&self, x: Inputs<'_>) -> Result<()> {
        match (self, x.b) {
            (Model::Single(_), None) => Ok(()),
            (Model::TwoTower(_), Some(b)) if b.rows == x.a.rows => Ok(()),
            (Model::TwoTower(_), Some(_)) => Err(Error::Shape("tower inputs differ in row count".into())),
            (Model::Single(_), Some(_)) => Err(Error::Shape("single network given two inputs".into())),
            (Model::TwoTower(_), None) => Err(Error::Shape("two-tower network needs a second input".into())),
        }
    }

    pub fn forward(&self, x: Inputs<'_>) -> Result<Matrix> {
        self.check_inputs(x)?;
        match self {
            Model::Single(n) => n.forward(x.a),
            Model::TwoTower(t) => {
                let a = t.tower_a.forward(x.a)?;
                let b = t.tower_b.forward(x.b.unwrap())?;
                t.head.forward(&merge_matrices(&a, &b)?)
            }
        }
    }

    /// Mean batch loss and its gradient for every parameter.
    pub fn loss_and_grad(
        &self,
        x: Inputs<'_>,
        targets: &Targets<'_>,
        loss: Loss,
        positive_weight: f64,
    ) -> Result<(f64, Grads)> {
        self.check_inputs(x)?;
        let mut grads = self.zero_grads();
        match self {
            Model::Single(n) => {
                let cache = n.forward_cached(x.a)?;
                let (value, dz) =
                    loss_and_output_grad(loss, n.output_layer_activation(), &cache, targets, positive_weight)?;
                n.backward(&cache, dz, &mut grads[0])?;
                Ok((value, grads))
            }
            Model::TwoTower(t) => {
                let ca = t.tower_a.forward_cached(x.a)?;
                let cb = t.tower_b.forward_cached(x.b.unwrap())?;
                let merged = merge_matrices(ca.output(), cb.output())?;
                let ch = t.head.forward_cached(&merged)?;
                let (value, dz) =
                    loss_and_output_grad(loss, t.head.output_layer_activation(), &ch, targets, positive_weight)?;
                let d_merged = t.head.backward(&ch, dz, &mut grads[2])?;
                let da = merge_matrices(&d_merged, cb.output())?;
                let db = merge_matrices(&d_merged, ca.output())?;
                let dza = t.tower_a.output_layer_activation().backprop(ca.output(), da)?;
                let dzb = t.tower_b.output_layer_activation().backprop(cb.output(), db)?;
                t.tower_a.backward(&ca, dza, &mut grads[0])?;
                t.tower_b.backward(&cb, dzb, &mut grads[1])?;
                Ok((value, grads))
            }
        }
    }

    pub fn loss(&self, x: Inputs<'_>, targets: &Targets<'_>, loss: Loss, positive_weight: f64) -> Result<f64> {
        self.check_inputs(x)?;
        let head = self.head();
        let cache = match self {
            Model::Single(n) => n.forward_cached(x.a)?,
            Model::TwoTower(t) => {
                let a = t.tower_a.forward(x.a)?;
                let b = t.tower_b.forward(x.b.unwrap())?;
                t.head.forward_cached(&merge_matrices(&a, &b)?)?
            }
        };
        Ok(loss_and_output_grad(loss, head.output_layer_activation(), &cache, targets, positive_weight)?.0)
    }
}

impl DenseNet {
    pub fn output_layer_activation(&self) -> Activation {
        self.layers.last().expect("non-empty").activation
    }
}
