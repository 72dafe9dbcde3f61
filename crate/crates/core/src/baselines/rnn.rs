use ndarray::{s, Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::add_outer;

/// One direction of an Elman network: `h_t = tanh(Wx x_t + Wh h_{t-1} + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElmanCell {
    pub wx: Array2<f64>,
    pub wh: Array2<f64>,
    /// Stored as a `hidden x 1` column so the optimiser treats all blocks alike.
    pub b: Array2<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct CellGrads {
    pub wx: Array2<f64>,
    pub wh: Array2<f64>,
    pub b: Array2<f64>,
}

impl ElmanCell {
    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let sx = 1.0 / (input as f64).sqrt();
        let sh = 0.5 / (hidden as f64).sqrt();
        ElmanCell {
            wx: Array2::from_shape_fn((hidden, input), |_| rng.sample::<f64, _>(StandardNormal) * sx),
            wh: Array2::from_shape_fn((hidden, hidden), |_| rng.sample::<f64, _>(StandardNormal) * sh),
            b: Array2::zeros((hidden, 1)),
        }
    }

    pub fn hidden(&self) -> usize {
        self.wh.nrows()
    }

    /// Hidden states `h_1..h_T` in input order.
    fn run<'a>(&self, xs: impl Iterator<Item = &'a Array1<f64>>) -> Vec<Array1<f64>> {
        let mut h = Array1::zeros(self.hidden());
        let bias = self.b.column(0);
        let mut out = Vec::new();
        for x in xs {
            let a = self.wx.dot(x) + self.wh.dot(&h) + bias;
            h = a.mapv(f64::tanh);
            out.push(h.clone());
        }
        out
    }

    fn zero_grads(&self) -> CellGrads {
        CellGrads {
            wx: Array2::zeros(self.wx.raw_dim()),
            wh: Array2::zeros(self.wh.raw_dim()),
            b: Array2::zeros(self.b.raw_dim()),
        }
    }

    /// Backpropagate `d_last` (gradient on the final state) through time.
    fn backprop(&self, xs: &[&Array1<f64>], hs: &[Array1<f64>], d_last: &Array1<f64>, g: &mut CellGrads) {
        let mut dh = d_last.clone();
        let zero = Array1::zeros(self.hidden());
        for t in (0..xs.len()).rev() {
            let da = &dh * &hs[t].mapv(|h| 1.0 - h * h);
            add_outer(&mut g.wx, &da, xs[t]);
            let prev = if t == 0 { &zero } else { &hs[t - 1] };
            add_outer(&mut g.wh, &da, prev);
            g.b.column_mut(0).scaled_add(1.0, &da);
            dh = self.wh.t().dot(&da);
        }
    }
}

/// Bidirectional Elman encoder; the output concatenates the final forward
/// state and the final backward state.
#[derive(Debug, Clone, PartialEq)]
pub struct BiRnn {
    pub forward: ElmanCell,
    pub backward: ElmanCell,
}

pub(crate) struct BiRnnTrace {
    fwd: Vec<Array1<f64>>,
    bwd: Vec<Array1<f64>>,
}

pub(crate) struct BiRnnGrads {
    pub forward: CellGrads,
    pub backward: CellGrads,
}

impl BiRnn {
    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        BiRnn {
            forward: ElmanCell::init(input, hidden, rng),
            backward: ElmanCell::init(input, hidden, rng),
        }
    }

    pub fn output_dim(&self) -> usize {
        2 * self.forward.hidden()
    }

    pub(crate) fn forward_trace(&self, xs: &[Array1<f64>]) -> (Array1<f64>, BiRnnTrace) {
        let fwd = self.forward.run(xs.iter());
        let bwd = self.backward.run(xs.iter().rev());
        let h = self.forward.hidden();
        let mut z = Array1::zeros(2 * h);
        z.slice_mut(s![..h]).assign(fwd.last().expect("non-empty sequence"));
        z.slice_mut(s![h..]).assign(bwd.last().expect("non-empty sequence"));
        (z, BiRnnTrace { fwd, bwd })
    }

    pub fn encode(&self, xs: &[Array1<f64>]) -> Array1<f64> {
        self.forward_trace(xs).0
    }

    pub(crate) fn zero_grads(&self) -> BiRnnGrads {
        BiRnnGrads {
            forward: self.forward.zero_grads(),
            backward: self.backward.zero_grads(),
        }
    }

    pub(crate) fn backprop(&self, xs: &[Array1<f64>], trace: &BiRnnTrace, dz: &Array1<f64>, g: &mut BiRnnGrads) {
        let h = self.forward.hidden();
        let fx: Vec<&Array1<f64>> = xs.iter().collect();
        let bx: Vec<&Array1<f64>> = xs.iter().rev().collect();
        self.forward
            .backprop(&fx, &trace.fwd, &dz.slice(s![..h]).to_owned(), &mut g.forward);
        self.backward
            .backprop(&bx, &trace.bwd, &dz.slice(s![h..]).to_owned(), &mut g.backward);
    }
}
