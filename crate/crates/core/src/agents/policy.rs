use rand::Rng;

use super::Strategy;
use crate::env::{ActionSet, MetaAction, N_ACTIONS};
use crate::error::{Error, Result};

/// Replaces the value of every unsafe action with the state's minimum raw
/// value minus one, so the greedy choice is always safe.
pub fn shaped_q(q_raw: &[f64], safe: &ActionSet) -> Result<[f64; N_ACTIONS]> {
    if safe.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let floor = q_raw.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let mut out = [0.0; N_ACTIONS];
    for (i, o) in out.iter_mut().enumerate() {
        let a = MetaAction::from_index(i).expect("index in range");
        *o = if safe.contains(a) { q_raw[i] } else { floor };
    }
    Ok(out)
}

/// Highest-valued action among `candidates`; ties go to the lower index.
pub fn argmax_among(values: &[f64], candidates: &ActionSet) -> Option<MetaAction> {
    let mut best: Option<(MetaAction, f64)> = None;
    for a in candidates.iter() {
        let v = values[a.index()];
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((a, v));
        }
    }
    best.map(|(a, _)| a)
}

/// Maximum of `values` over `candidates`.
pub fn max_among(values: &[f64], candidates: &ActionSet) -> Option<f64> {
    argmax_among(values, candidates).map(|a| values[a.index()])
}

fn random_among<R: Rng + ?Sized>(candidates: &ActionSet, rng: &mut R) -> Option<MetaAction> {
    let n = candidates.len();
    if n == 0 {
        return None;
    }
    candidates.iter().nth(rng.gen_range(0..n))
}

/// Epsilon-greedy choice. Unmasked strategies choose among admissible
/// actions; masked strategies only among safe ones, and the robust variant
/// ranks its greedy choice by the shaped values.
pub fn select_action<R: Rng + ?Sized>(
    strategy: Strategy,
    q_raw: &[f64],
    admissible: &ActionSet,
    safe: &ActionSet,
    epsilon: f64,
    rng: &mut R,
) -> Result<MetaAction> {
    let candidates = if strategy.is_masked() {
        admissible.intersect(safe)
    } else {
        *admissible
    };
    if candidates.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let explore = epsilon > 0.0 && rng.gen::<f64>() < epsilon;
    let chosen = if explore {
        random_among(&candidates, rng)
    } else if strategy == Strategy::RobustQmask {
        argmax_among(&shaped_q(q_raw, &candidates)?, &candidates)
    } else {
        argmax_among(q_raw, &candidates)
    };
    chosen.ok_or(Error::EmptyCandidateSet)
}
