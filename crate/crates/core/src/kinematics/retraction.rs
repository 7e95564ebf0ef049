//! Stuttering retractions between a fine and a coarse sample trace.
//!
//! A retraction `f` witnesses that `fine[n] == coarse[f(n)]` for every `n`,
//! with `f(0) = 0` and `f(n+1) - f(n) ∈ {0, 1}`: the fine trace is the coarse
//! one with repetitions, so the coarse sampling lost no code.

use std::collections::HashSet;

use crate::encoder::PhaseCode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retraction(Vec<usize>);

impl Retraction {
    /// Checks the stuttering shape without reference to any traces.
    pub fn new(map: Vec<usize>) -> Option<Self> {
        let ok = map.first() == Some(&0) && map.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1);
        ok.then_some(Retraction(map))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn witnesses(&self, fine: &[PhaseCode], coarse: &[PhaseCode]) -> bool {
        self.0.len() == fine.len() && self.0.iter().zip(fine).all(|(&j, c)| coarse.get(j) == Some(c))
    }
}

/// Where the search got stuck: no extension reaches `fine[fine_index]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeLoss {
    pub fine_index: usize,
    pub code: PhaseCode,
}

pub fn find_retraction(fine: &[PhaseCode], coarse: &[PhaseCode]) -> Option<Retraction> {
    search_retraction(fine, coarse).ok()
}

/// Depth-first search over `(n, f(n))` with dead-state memoization.
///
/// Greedy matching is not enough: when `coarse` repeats a code the choice
/// between staying and advancing can only be resolved by looking ahead.
pub fn search_retraction(fine: &[PhaseCode], coarse: &[PhaseCode]) -> Result<Retraction, CodeLoss> {
    let first_loss = CodeLoss { fine_index: 0, code: fine.first().copied().unwrap_or_default() };
    if fine.is_empty() || coarse.is_empty() || fine[0] != coarse[0] {
        return Err(first_loss);
    }
    let mut path = vec![0usize];
    let mut dead: HashSet<(usize, usize)> = HashSet::new();
    let mut deepest = 0;
    while let Some(&j) = path.last() {
        let n = path.len() - 1;
        deepest = deepest.max(n);
        if n + 1 == fine.len() {
            return Ok(Retraction(path));
        }
        let next = [j, j + 1].into_iter().find(|&k| coarse.get(k) == Some(&fine[n + 1]) && !dead.contains(&(n + 1, k)));
        match next {
            Some(k) => path.push(k),
            None => {
                dead.insert((n, j));
                path.pop();
            }
        }
    }
    Err(CodeLoss { fine_index: deepest + 1, code: fine[deepest + 1] })
}
