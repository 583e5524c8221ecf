use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

/// One affine layer, `y = x W^T + b` over a batch of row vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    /// `out x in`
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            weight: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
        }
    }

    /// Orthogonal init scaled by `gain`, zero bias.
    pub fn orthogonal(inputs: usize, outputs: usize, gain: f64, rng: &mut impl Rng) -> Self {
        Dense {
            weight: orthogonal_matrix(outputs, inputs, rng) * gain,
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }

    fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.weight.t()) + &self.bias
    }
}

/// A `rows x cols` matrix whose rows (or columns, whichever are fewer) are
/// orthonormal. Gram-Schmidt on a Gaussian draw.
fn orthogonal_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    let (long, short) = if rows >= cols { (rows, cols) } else { (cols, rows) };
    // `short` orthonormal vectors of length `long`.
    let mut q = Array2::<f64>::zeros((short, long));
    for i in 0..short {
        loop {
            let mut v: Array1<f64> = (0..long).map(|_| rng.sample(StandardNormal)).collect();
            for j in 0..i {
                let qj = q.row(j);
                let proj = v.dot(&qj);
                v.scaled_add(-proj, &qj);
            }
            let n = v.dot(&v).sqrt();
            if n > 1e-8 {
                q.row_mut(i).assign(&(v / n));
                break;
            }
        }
    }
    if rows >= cols {
        q.t().as_standard_layout().into_owned()
    } else {
        q
    }
}

/// Multilayer perceptron with tanh on every hidden layer and a linear head.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Layer inputs recorded by a forward pass. `inputs[0]` is the network
/// input; `inputs[l]` for `l > 0` is the tanh output feeding layer `l`.
pub struct MlpTrace {
    pub inputs: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

impl Mlp {
    /// Orthogonal init: `hidden_gain` on hidden layers, `head_gain` on the head.
    pub fn init(sizes: &[usize], hidden_gain: f64, head_gain: f64, rng: &mut impl Rng) -> Self {
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|l| {
                let gain = if l + 1 == n { head_gain } else { hidden_gain };
                Dense::orthogonal(sizes[l], sizes[l + 1], gain, rng)
            })
            .collect();
        Mlp { layers }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        Mlp {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Mlp {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.inputs(), l.outputs()))
                .collect(),
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs()];
        s.extend(self.layers.iter().map(Dense::outputs));
        s
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.forward_trace(x).output
    }

    pub fn forward_trace(&self, x: ArrayView2<f64>) -> MlpTrace {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.forward(h.view());
            if l < last {
                z.mapv_inplace(f64::tanh);
            }
            inputs.push(h);
            h = z;
        }
        MlpTrace { inputs, output: h }
    }

    /// Accumulate `dL/dparams` into `grads` given `dL/doutput` for the batch
    /// recorded in `trace`.
    pub fn backward(&self, trace: &MlpTrace, d_out: Array2<f64>, grads: &mut Mlp) {
        let mut delta = d_out;
        for l in (0..self.layers.len()).rev() {
            let input = &trace.inputs[l];
            let g = &mut grads.layers[l];
            g.weight += &delta.t().dot(input);
            g.bias += &delta.sum_axis(Axis(0));
            if l > 0 {
                let mut d_in = delta.dot(&self.layers[l].weight);
                // input = tanh(z) so dtanh/dz = 1 - input^2.
                ndarray::Zip::from(&mut d_in)
                    .and(input)
                    .for_each(|d, &h| *d *= 1.0 - h * h);
                delta = d_in;
            }
        }
    }

    pub fn tensors(&self) -> impl Iterator<Item = &[f64]> {
        self.layers.iter().flat_map(|l| {
            [
                l.weight.as_slice().expect("standard layout"),
                l.bias.as_slice().expect("standard layout"),
            ]
        })
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers.iter_mut().flat_map(|l| {
            [
                l.weight.as_slice_mut().expect("standard layout"),
                l.bias.as_slice_mut().expect("standard layout"),
            ]
        })
    }
}
