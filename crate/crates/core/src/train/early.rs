/// Patience-based stopping on a score that must strictly increase.
#[derive(Clone, Debug, PartialEq)]
pub struct EarlyStopping {
    pub patience: usize,
    best: Option<(usize, f64)>,
    since_improvement: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// New best; keep this epoch's parameters.
    Improved,
    Continue,
    Stop,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: None,
            since_improvement: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, score: f64) -> Verdict {
        match self.best {
            Some((_, b)) if !(score > b) => {
                self.since_improvement += 1;
                if self.since_improvement >= self.patience {
                    Verdict::Stop
                } else {
                    Verdict::Continue
                }
            }
            _ => {
                self.best = Some((epoch, score));
                self.since_improvement = 0;
                Verdict::Improved
            }
        }
    }

    /// `(epoch, score)` of the best observation so far.
    pub fn best(&self) -> Option<(usize, f64)> {
        self.best
    }

    pub fn epochs_since_improvement(&self) -> usize {
        self.since_improvement
    }
}

/// Replays a validation trace (epochs numbered from 1). Returns the epoch
/// after which training stops and the epoch whose checkpoint is kept.
pub fn replay(trace: &[f64], patience: usize) -> (usize, usize) {
    let mut es = EarlyStopping::new(patience);
    for (i, &s) in trace.iter().enumerate() {
        if es.observe(i + 1, s) == Verdict::Stop {
            return (i + 1, es.best().unwrap().0);
        }
    }
    (trace.len(), es.best().map_or(0, |b| b.0))
}
