//! Binary cross-entropy and pairwise margin ranking losses, as plain
//! functions of scores and as tape expressions.

use crate::error::{Error, Result};
use crate::tensor::{stable_sigmoid, stable_softplus, Tape, Tensor, Var};

/// `−Σ_pos log σ(s) − Σ_neg log(1 − σ(s))`, via `softplus(∓s)`.
pub fn bce_loss(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::shape("bce_loss", &[scores.len()], &[labels.len()]));
    }
    Ok(scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| stable_softplus(if y { -s } else { s }))
        .sum())
}

/// `σ(s) − y` per score.
pub fn bce_gradient(scores: &[f64], labels: &[bool]) -> Vec<f64> {
    scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| stable_sigmoid(s) - if y { 1.0 } else { 0.0 })
        .collect()
}

/// Scores of one query's sampled positives and negatives.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryScores {
    pub positives: Vec<f64>,
    pub negatives: Vec<f64>,
}

/// `Σ_q Σ_(w,v) ReLU(s(w,q) − s(v,q) + δ)` over every negative `w` and
/// positive `v` of each query.
pub fn ranking_loss(queries: &[QueryScores], delta: f64) -> f64 {
    queries
        .iter()
        .map(|q| {
            q.negatives
                .iter()
                .flat_map(|&sw| {
                    q.positives
                        .iter()
                        .map(move |&sv| (sw - sv + delta).max(0.0))
                })
                .sum::<f64>()
        })
        .sum()
}

/// BCE over `1×1` score variables.
pub fn bce_loss_tape(tape: &mut Tape, scores: &[Var], labels: &[bool]) -> Result<Var> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(Error::shape(
            "bce_loss_tape",
            &[scores.len()],
            &[labels.len()],
        ));
    }
    let s = tape.concat_rows(scores)?;
    let sign: Vec<f64> = labels.iter().map(|&y| if y { -1.0 } else { 1.0 }).collect();
    let sign = tape.constant(Tensor::matrix(scores.len(), 1, sign)?);
    let z = tape.hadamard(s, sign)?;
    let sp = tape.softplus(z);
    Ok(tape.reduce_sum(sp))
}

/// Hinge over all (negative, positive) pairs of one query. Returns `None`
/// when either side is empty.
pub fn ranking_loss_tape(
    tape: &mut Tape,
    positives: &[Var],
    negatives: &[Var],
    delta: f64,
) -> Result<Option<Var>> {
    if positives.is_empty() || negatives.is_empty() {
        return Ok(None);
    }
    let (p, n) = (positives.len(), negatives.len());
    let pos = tape.concat_rows(positives)?;
    let neg = tape.concat_rows(negatives)?;
    // diff[w][v] = s_w − s_v
    let ones_p = tape.constant(Tensor::matrix(1, p, vec![1.0; p])?);
    let ones_n = tape.constant(Tensor::matrix(n, 1, vec![1.0; n])?);
    let wide_neg = tape.matmul(neg, ones_p)?;
    let pos_t = tape.transpose(pos)?;
    let wide_pos = tape.matmul(ones_n, pos_t)?;
    let diff = tape.sub(wide_neg, wide_pos)?;
    let shifted = tape.add_scalar(diff, delta);
    let hinge = tape.relu(shifted);
    Ok(Some(tape.reduce_sum(hinge)))
}
