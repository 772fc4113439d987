//! Matrix factorization of the closed-neighborhood adjacency matrix.

use super::table::{EmbedMethod, EmbeddingTable};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq)]
pub struct MfConfig {
    pub dim: usize,
    pub lambda: f64,
    pub epochs: usize,
    pub lr: f64,
    /// Target `y_uu = 1` on the diagonal.
    pub include_diagonal: bool,
}

impl Default for MfConfig {
    fn default() -> Self {
        MfConfig {
            dim: 128,
            lambda: 0.0,
            epochs: 500,
            lr: 0.01,
            include_diagonal: true,
        }
    }
}

/// `Σ_u Σ_v (y_uv − z_uᵀz_v)² + λ Σ_u ‖z_u‖²` with the diagonal target set.
pub fn mf_loss(z: &EmbeddingTable, g: &Graph, lambda: f64) -> Result<f64> {
    mf_loss_with(z, g, lambda, true)
}

/// Literal double sum, `O(|V|²·dim)`.
pub fn mf_loss_with(
    z: &EmbeddingTable,
    g: &Graph,
    lambda: f64,
    include_diagonal: bool,
) -> Result<f64> {
    check_cover(z, g)?;
    let n = g.num_nodes();
    let mut loss = 0.0;
    for u in 0..n {
        for v in 0..n {
            let y = if g.has_edge(u, v) || (include_diagonal && u == v) {
                1.0
            } else {
                0.0
            };
            let r = y - z.dot(u, v);
            loss += r * r;
        }
        loss += lambda * z.dot(u, u);
    }
    Ok(loss)
}

fn check_cover(z: &EmbeddingTable, g: &Graph) -> Result<()> {
    if z.num_nodes() != g.num_nodes() {
        return Err(Error::shape("mf table", &[g.num_nodes()], &[z.num_nodes()]));
    }
    Ok(())
}

/// `Y Z` with `Y` the (closed) adjacency matrix.
fn adj_times(z: &EmbeddingTable, g: &Graph, include_diagonal: bool) -> Vec<f64> {
    let d = z.dim;
    let mut out = vec![0.0; z.data().len()];
    for u in 0..g.num_nodes() {
        let row = &mut out[u * d..(u + 1) * d];
        if include_diagonal {
            row.copy_from_slice(z.row(u));
        }
        for &v in g.neighbors(u) {
            for (o, x) in row.iter_mut().zip(z.row(v)) {
                *o += x;
            }
        }
    }
    out
}

/// `ZᵀZ`, a `dim × dim` Gram matrix.
fn gram(z: &EmbeddingTable) -> Vec<f64> {
    let d = z.dim;
    let mut out = vec![0.0; d * d];
    for u in 0..z.num_nodes() {
        let r = z.row(u);
        for i in 0..d {
            let ri = r[i];
            for j in 0..d {
                out[i * d + j] += ri * r[j];
            }
        }
    }
    out
}

/// Same value as [`mf_loss_with`] in `O((|E| + |V|·dim)·dim)`:
/// `Σ y² − 2 tr(Zᵀ Y Z) + ‖ZᵀZ‖²_F + λ‖Z‖²_F`.
pub fn mf_loss_fast(z: &EmbeddingTable, g: &Graph, lambda: f64, include_diagonal: bool) -> f64 {
    let yz = adj_times(z, g, include_diagonal);
    let nnz = 2 * g.num_edges() + if include_diagonal { g.num_nodes() } else { 0 };
    let cross: f64 = yz.iter().zip(z.data()).map(|(a, b)| a * b).sum();
    let gram_sq: f64 = gram(z).iter().map(|x| x * x).sum();
    let norm_sq: f64 = z.data().iter().map(|x| x * x).sum();
    nnz as f64 - 2.0 * cross + gram_sq + lambda * norm_sq
}

/// Gradient of the data term only: `−4 Y Z + 4 Z (ZᵀZ)`.
pub fn mf_data_gradient(z: &EmbeddingTable, g: &Graph, include_diagonal: bool) -> Vec<f64> {
    let d = z.dim;
    let yz = adj_times(z, g, include_diagonal);
    let gm = gram(z);
    let mut grad = vec![0.0; yz.len()];
    for u in 0..z.num_nodes() {
        let r = z.row(u);
        let out = &mut grad[u * d..(u + 1) * d];
        for j in 0..d {
            let mut acc = 0.0;
            for i in 0..d {
                acc += r[i] * gm[i * d + j];
            }
            out[j] = 4.0 * acc - 4.0 * yz[u * d + j];
        }
    }
    grad
}

/// Full gradient of the regularized loss.
pub fn mf_gradient(z: &EmbeddingTable, g: &Graph, lambda: f64, include_diagonal: bool) -> Vec<f64> {
    let mut grad = mf_data_gradient(z, g, include_diagonal);
    for (gi, x) in grad.iter_mut().zip(z.data()) {
        *gi += 2.0 * lambda * x;
    }
    grad
}

pub fn train_mf(g: &Graph, cfg: &MfConfig, seed: u64) -> Result<EmbeddingTable> {
    train_mf_traced(g, cfg, seed).map(|(t, _)| t)
}

/// Full-batch proximal gradient descent. The data term takes an explicit
/// step and the L2 term is applied in closed form, `z ← z' / (1 + 2·lr·λ)`,
/// which stays stable for any λ. A step that raises the loss is rejected and
/// the rate halved. Returns the lowest-loss table and the loss per epoch.
pub fn train_mf_traced(g: &Graph, cfg: &MfConfig, seed: u64) -> Result<(EmbeddingTable, Vec<f64>)> {
    if cfg.dim == 0 {
        return Err(Error::Config("embedding dim must be at least 1".into()));
    }
    if !(cfg.lambda >= 0.0) {
        return Err(Error::Config(format!(
            "lambda must be non-negative, got {}",
            cfg.lambda
        )));
    }
    if !(cfg.lr > 0.0) {
        return Err(Error::Config(format!(
            "learning rate must be positive, got {}",
            cfg.lr
        )));
    }
    let diag = cfg.include_diagonal;
    let mut z = EmbeddingTable::uniform_init(g.num_nodes(), cfg.dim, EmbedMethod::Mf, seed);
    let mut loss = mf_loss_fast(&z, g, cfg.lambda, diag);
    let mut trace = vec![loss];
    let mut lr = cfg.lr;
    for epoch in 0..cfg.epochs {
        let grad = mf_data_gradient(&z, g, diag);
        loop {
            let shrink = 1.0 / (1.0 + 2.0 * lr * cfg.lambda);
            let mut trial = z.clone();
            for (x, gr) in trial.data_mut().iter_mut().zip(&grad) {
                *x = (*x - lr * gr) * shrink;
            }
            let trial_loss = mf_loss_fast(&trial, g, cfg.lambda, diag);
            if trial_loss <= loss {
                z = trial;
                loss = trial_loss;
                lr = (lr * 1.1).min(cfg.lr);
                break;
            }
            lr *= 0.5;
            if lr < cfg.lr * 1e-12 {
                log::debug!("mf epoch {epoch}: step size collapsed, stopping");
                return finish(z, loss, trace, cfg.lr);
            }
        }
        trace.push(loss);
    }
    finish(z, loss, trace, cfg.lr)
}

fn finish(
    z: EmbeddingTable,
    loss: f64,
    trace: Vec<f64>,
    lr: f64,
) -> Result<(EmbeddingTable, Vec<f64>)> {
    if !loss.is_finite() || !z.is_finite() {
        return Err(Error::Numeric(format!(
            "matrix factorization diverged (loss {loss}); try a smaller learning rate than {lr}"
        )));
    }
    Ok((z, trace))
}
