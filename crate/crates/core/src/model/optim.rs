use ndarray::{Array2, Zip};

/// Adam with the AMSGrad correction: the denominator uses the running
/// maximum of the second-moment estimate. Bias correction as in the common
/// framework implementations.
#[derive(Debug, Clone)]
pub struct AmsGrad {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Array2<f64>,
    v: Array2<f64>,
    v_max: Array2<f64>,
}

impl AmsGrad {
    pub fn new(shape: (usize, usize), lr: f64) -> Self {
        AmsGrad {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
            v_max: Array2::zeros(shape),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn update(&mut self, param: &mut Array2<f64>, grad: &Array2<f64>) {
        assert_eq!(param.dim(), grad.dim());
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let bc1 = 1.0 - b1.powi(self.step as i32);
        let bc2 = 1.0 - b2.powi(self.step as i32);
        let step_size = self.lr / bc1;
        let eps = self.eps;
        Zip::from(param)
            .and(grad)
            .and(&mut self.m)
            .and(&mut self.v)
            .and(&mut self.v_max)
            .for_each(|p, &g, m, v, vm| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *vm = vm.max(*v);
                *p -= step_size * *m / ((*vm / bc2).sqrt() + eps);
            });
    }
}
