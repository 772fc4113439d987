use super::{Tape, Tensor, Var};
use crate::error::Result;

/// Outcome of a central-difference comparison.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradCheck {
    /// Max over coordinates of `|analytic − numeric| / max(1, |analytic|)`.
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates whose one-sided differences disagree (a kink within `h`).
    pub skipped: usize,
}

impl GradCheck {
    fn merge(&mut self, other: &GradCheck) {
        self.max_rel_error = self.max_rel_error.max(other.max_rel_error);
        self.checked += other.checked;
        self.skipped += other.skipped;
    }
}

const KINK_TOLERANCE: f64 = 1e-3;

fn eval<F>(f: &F, xs: &[Tensor]) -> Result<f64>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = xs.iter().map(|x| tape.constant(x.clone())).collect();
    let out = f(&mut tape, &vars)?;
    Ok(tape.value(out).item())
}

/// Compares reverse-mode gradients of a scalar function of several tensors
/// against central differences with step `h`. Returns one report per input.
pub fn finite_difference_check_many<F>(f: F, xs: &[Tensor], h: f64) -> Result<Vec<GradCheck>>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = xs.iter().map(|x| tape.param(x.clone())).collect();
    let out = f(&mut tape, &vars)?;
    let f0 = tape.value(out).item();
    let grads = tape.backward(out)?;

    let mut reports = Vec::with_capacity(xs.len());
    let mut probe: Vec<Tensor> = xs.to_vec();
    for (t, &var) in vars.iter().enumerate() {
        let analytic = grads.get(var);
        let mut report = GradCheck::default();
        for i in 0..xs[t].len() {
            let orig = xs[t].data()[i];
            probe[t].data_mut()[i] = orig + h;
            let fp = eval(&f, &probe)?;
            probe[t].data_mut()[i] = orig - h;
            let fm = eval(&f, &probe)?;
            probe[t].data_mut()[i] = orig;

            let central = (fp - fm) / (2.0 * h);
            let forward = (fp - f0) / h;
            let backward = (f0 - fm) / h;
            if (forward - backward).abs() > KINK_TOLERANCE * central.abs().max(1.0) {
                report.skipped += 1;
                continue;
            }
            let a = analytic.data()[i];
            let rel = (a - central).abs() / a.abs().max(1.0);
            report.max_rel_error = report.max_rel_error.max(rel);
            report.checked += 1;
        }
        reports.push(report);
    }
    Ok(reports)
}

/// Single-input form of [`finite_difference_check_many`].
pub fn finite_difference_check<F>(f: F, x: &Tensor, h: f64) -> Result<GradCheck>
where
    F: Fn(&mut Tape, Var) -> Result<Var>,
{
    let reports = finite_difference_check_many(|t, v| f(t, v[0]), std::slice::from_ref(x), h)?;
    let mut total = GradCheck::default();
    for r in &reports {
        total.merge(r);
    }
    Ok(total)
}
