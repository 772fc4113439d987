use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Bias-corrected Adam with per-tensor moment buffers.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64, params: &[Tensor]) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: params.iter().map(|t| vec![0.0; t.len()]).collect(),
            v: params.iter().map(|t| vec![0.0; t.len()]).collect(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Updates `params` in place. A non-finite gradient aborts before any
    /// tensor is touched, naming the offending parameter.
    pub fn step(
        &mut self,
        params: &mut [Tensor],
        grads: &[Tensor],
        names: &[String],
    ) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.m.len() {
            return Err(Error::shape("adam", &[params.len()], &[grads.len()]));
        }
        for (i, g) in grads.iter().enumerate() {
            if g.len() != params[i].len() {
                return Err(Error::shape("adam gradient", params[i].shape(), g.shape()));
            }
            if let Some(j) = g.data().iter().position(|x| !x.is_finite()) {
                let name = names.get(i).map_or("?", String::as_str);
                return Err(Error::Numeric(format!(
                    "non-finite gradient {} in parameter {name} at index {j}",
                    g.data()[j]
                )));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(&mut self.v))
        {
            for (((x, &gi), mi), vi) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.iter_mut())
                .zip(v.iter_mut())
            {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * gi;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * gi * gi;
                let mhat = *mi / c1;
                let vhat = *vi / c2;
                *x -= self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
