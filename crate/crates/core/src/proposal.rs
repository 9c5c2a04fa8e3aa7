//! Add/delete Metropolis–Hastings kernel over sorted index subsets.
//!
//! Used both for parent sets `pa_j ⊆ {j+1, …, q−1}` and for coefficient
//! supports `γ_j ⊆ {0, …, p−1}`. A move adds or deletes one element with
//! probability 1/2 each; at a boundary (empty set, or size at the cap) the
//! only feasible move is taken with probability 1. The Hastings ratio uses
//! the exact forward and reverse proposal probabilities.

use std::ops::Range;

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Add(usize),
    Delete(usize),
}

#[derive(Debug, Clone)]
pub struct Proposal {
    pub next: Vec<usize>,
    pub mv: Move,
    /// `log q(current | next) − log q(next | current)`.
    pub log_q_ratio: f64,
}

/// Candidate universe and size cap of a subset chain.
#[derive(Debug, Clone)]
pub struct SubsetSpace {
    pub universe: Range<usize>,
    pub cap: usize,
}

impl SubsetSpace {
    pub fn new(universe: Range<usize>, cap: usize) -> Self {
        let cap = cap.min(universe.len());
        SubsetSpace { universe, cap }
    }

    fn move_probs(&self, size: usize) -> (f64, f64) {
        let can_add = size < self.cap;
        let can_del = size > 0;
        match (can_add, can_del) {
            (true, true) => (0.5, 0.5),
            (true, false) => (1.0, 0.0),
            (false, true) => (0.0, 1.0),
            (false, false) => (0.0, 0.0),
        }
    }

    /// Log-probability of proposing the specific `mv` from a set of `size`.
    fn log_q(&self, size: usize, mv: Move) -> f64 {
        let (p_add, p_del) = self.move_probs(size);
        match mv {
            Move::Add(_) => (p_add / (self.universe.len() - size) as f64).ln(),
            Move::Delete(_) => (p_del / size as f64).ln(),
        }
    }

    /// Draws an add/delete proposal. Returns `None` when no move is feasible.
    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R, current: &[usize]) -> Option<Proposal> {
        let size = current.len();
        let (p_add, p_del) = self.move_probs(size);
        if p_add == 0.0 && p_del == 0.0 {
            return None;
        }
        let add = if p_del == 0.0 {
            true
        } else if p_add == 0.0 {
            false
        } else {
            rng.random::<f64>() < 0.5
        };
        let (next, mv) = if add {
            let k = self.absent_element(rng, current);
            let pos = current.binary_search(&k).unwrap_err();
            let mut next = current.to_vec();
            next.insert(pos, k);
            (next, Move::Add(k))
        } else {
            let pos = rng.random_range(0..size);
            let mut next = current.to_vec();
            let k = next.remove(pos);
            (next, Move::Delete(k))
        };
        let reverse = match mv {
            Move::Add(k) => Move::Delete(k),
            Move::Delete(k) => Move::Add(k),
        };
        let log_q_ratio = self.log_q(next.len(), reverse) - self.log_q(size, mv);
        Some(Proposal { next, mv, log_q_ratio })
    }

    fn absent_element<R: Rng + ?Sized>(&self, rng: &mut R, current: &[usize]) -> usize {
        let m = self.universe.len();
        if 2 * current.len() < m {
            loop {
                let k = rng.random_range(self.universe.clone());
                if current.binary_search(&k).is_err() {
                    return k;
                }
            }
        }
        let mut r = rng.random_range(0..m - current.len());
        for k in self.universe.clone() {
            if current.binary_search(&k).is_err() {
                if r == 0 {
                    return k;
                }
                r -= 1;
            }
        }
        unreachable!("no absent element although size < universe")
    }
}

/// State of one subset chain with its cached log target.
#[derive(Debug, Clone)]
pub struct SubsetChain {
    pub current: Vec<usize>,
    pub log_target: f64,
    pub proposed: u64,
    pub accepted: u64,
}

impl SubsetChain {
    pub fn new(current: Vec<usize>, log_target: f64) -> Self {
        SubsetChain {
            current,
            log_target,
            proposed: 0,
            accepted: 0,
        }
    }

    /// One Metropolis–Hastings step. `target` returns the unnormalized log
    /// density of a subset (`-inf` for excluded subsets).
    pub fn step<R, F>(&mut self, rng: &mut R, space: &SubsetSpace, mut target: F) -> bool
    where
        R: Rng + ?Sized,
        F: FnMut(&[usize]) -> f64,
    {
        let Some(prop) = space.propose(rng, &self.current) else {
            return false;
        };
        self.proposed += 1;
        let new_log = target(&prop.next);
        let accept = if new_log == f64::NEG_INFINITY {
            false
        } else if self.log_target == f64::NEG_INFINITY {
            true
        } else {
            let log_ratio = new_log - self.log_target + prop.log_q_ratio;
            log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
        };
        if accept {
            self.current = prop.next;
            self.log_target = new_log;
            self.accepted += 1;
        }
        accept
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn empty_set_only_adds() {
        let space = SubsetSpace::new(3..7, 4);
        let mut rng = stream(1, 0, 0);
        for _ in 0..50 {
            let prop = space.propose(&mut rng, &[]).unwrap();
            assert!(matches!(prop.mv, Move::Add(k) if (3..7).contains(&k)));
            // q(new|old) = 1/4, q(old|new) = 1/2 · 1/1
            assert!((prop.log_q_ratio - (0.5f64 / 0.25).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn full_set_only_deletes() {
        let space = SubsetSpace::new(0..5, 2);
        let mut rng = stream(2, 0, 0);
        for _ in 0..50 {
            let prop = space.propose(&mut rng, &[1, 3]).unwrap();
            assert!(matches!(prop.mv, Move::Delete(1) | Move::Delete(3)));
        }
    }

    #[test]
    fn no_moves_when_cap_zero() {
        let space = SubsetSpace::new(0..5, 0);
        assert!(space.propose(&mut stream(3, 0, 0), &[]).is_none());
        let space = SubsetSpace::new(4..4, 3);
        assert!(space.propose(&mut stream(3, 0, 0), &[]).is_none());
    }

    #[test]
    fn add_then_delete_restores_state() {
        let space = SubsetSpace::new(0..10, 10);
        let mut rng = stream(4, 0, 0);
        let start = vec![2, 5];
        for _ in 0..100 {
            let prop = space.propose(&mut rng, &start).unwrap();
            if let Move::Add(k) = prop.mv {
                let mut back = prop.next.clone();
                back.retain(|&i| i != k);
                assert_eq!(back, start);
                // forward: 1/2 · 1/8, reverse: 1/2 · 1/3
                assert!((prop.log_q_ratio - (8.0f64 / 3.0).ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_set_absent_draws_are_valid() {
        let space = SubsetSpace::new(0..6, 6);
        let mut rng = stream(5, 0, 0);
        let cur = vec![0, 1, 2, 4, 5];
        for _ in 0..50 {
            let prop = space.propose(&mut rng, &cur).unwrap();
            if let Move::Add(k) = prop.mv {
                assert_eq!(k, 3);
            }
        }
    }
}
