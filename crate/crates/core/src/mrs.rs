//! Search for minimal reconstructing sets: `d² − 1` symplectic matrices
//! whose pairwise differences all have nonzero determinant.
//!
//! Such a set exists for `d ∈ {2, 3, 5, 7, 11}`; existence for larger
//! primes and for prime powers is open, so the search reports its outcome
//! honestly instead of claiming nonexistence.
//!
//! The search is an exact-cover style depth-first backtracker. Pairwise
//! nonsingular differences force the images of the fixed point `(1, 0)` to
//! be pairwise distinct, so a valid set picks exactly one matrix from each
//! of the `d² − 1` "buckets" `{S : S(1,0) = ν}`. Buckets are filled in
//! minimum-remaining-candidates order with full pairwise filtering, the
//! first element is pinned to the identity (any solution can be rotated to
//! contain it), and a node budget bounds the effort.

use std::path::Path;

use crate::error::Result;
use crate::field::FiniteField;
use crate::phase::{
    difference_nonsingular, legal_symplectics, point_index, PhasePoint, SymplecticMatrix,
};

/// Search outcome plus the number of candidate placements explored.
#[derive(Debug, Clone)]
pub struct MrsSearch {
    pub outcome: MrsOutcome,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MrsOutcome {
    Found(Vec<SymplecticMatrix>),
    /// The whole tree was explored without success.
    Exhausted,
    /// The node budget ran out first.
    BudgetExceeded,
}

impl MrsSearch {
    pub fn set(&self) -> Option<&[SymplecticMatrix]> {
        match &self.outcome {
            MrsOutcome::Found(s) => Some(s),
            _ => None,
        }
    }
}

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Verifies the pairwise nonzero-difference-determinant certificate.
pub fn verify(field: &FiniteField, set: &[SymplecticMatrix]) -> bool {
    let d = field.order();
    if set.len() != d * d - 1 {
        return false;
    }
    if set.iter().any(|s| s.det(field) != field.one()) {
        return false;
    }
    for (i, s1) in set.iter().enumerate() {
        for s2 in &set[i + 1..] {
            if !difference_nonsingular(field, s1, s2) {
                return false;
            }
        }
    }
    true
}

struct Searcher<'f> {
    field: &'f FiniteField,
    candidates: Vec<SymplecticMatrix>,
    /// compat[i] is a bitset over candidate indices.
    compat: Vec<Vec<u64>>,
    budget: u64,
    nodes: u64,
}

impl Searcher<'_> {
    fn bit(set: &[u64], i: usize) -> bool {
        set[i / 64] >> (i % 64) & 1 == 1
    }

    fn run(&mut self) -> Option<Vec<SymplecticMatrix>> {
        let field = self.field;
        let d = field.order();
        let target = d * d - 1;
        // bucket id: point_index of S(1,0), which is never the origin
        let e10 = PhasePoint::new(field.one(), field.zero());
        let bucket_of: Vec<usize> = self
            .candidates
            .iter()
            .map(|s| point_index(field, s.apply(field, e10)))
            .collect();
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); d * d];
        for (i, &b) in bucket_of.iter().enumerate() {
            buckets[b].push(i);
        }
        let identity = SymplecticMatrix::identity(field);
        let id_idx = self
            .candidates
            .iter()
            .position(|s| *s == identity)
            .expect("identity is always legal");
        let id_bucket = bucket_of[id_idx];
        let open: Vec<usize> = (0..d * d)
            .filter(|&b| !buckets[b].is_empty() && b != id_bucket)
            .collect();
        debug_assert_eq!(open.len(), target - 1);
        // Live candidate lists per open bucket, pre-filtered by the identity.
        let live: Vec<Vec<usize>> = open
            .iter()
            .map(|&b| {
                buckets[b]
                    .iter()
                    .copied()
                    .filter(|&i| Self::bit(&self.compat[id_idx], i))
                    .collect()
            })
            .collect();
        let mut chosen = vec![id_idx];
        self.dfs(&mut chosen, live).map(|mut set_indices| {
            set_indices.sort_unstable();
            let mut set: Vec<SymplecticMatrix> = set_indices
                .into_iter()
                .map(|i| self.candidates[i])
                .collect();
            set.sort_by_key(|s| s.entries().map(|e| e.index()));
            set
        })
    }

    fn dfs(&mut self, chosen: &mut Vec<usize>, live: Vec<Vec<usize>>) -> Option<Vec<usize>> {
        if live.is_empty() {
            return Some(chosen.clone());
        }
        // minimum-remaining-values bucket; deterministic tie-break on order
        let (pick, _) = live
            .iter()
            .enumerate()
            .min_by_key(|(i, cands)| (cands.len(), *i))?;
        let options = live[pick].clone();
        for cand in options {
            if self.nodes >= self.budget {
                return None;
            }
            self.nodes += 1;
            let mask = &self.compat[cand];
            let mut next: Vec<Vec<usize>> = Vec::with_capacity(live.len() - 1);
            let mut dead = false;
            for (i, lst) in live.iter().enumerate() {
                if i == pick {
                    continue;
                }
                let filtered: Vec<usize> =
                    lst.iter().copied().filter(|&j| Self::bit(mask, j)).collect();
                if filtered.is_empty() {
                    dead = true;
                    break;
                }
                next.push(filtered);
            }
            if dead {
                continue;
            }
            chosen.push(cand);
            if let Some(found) = self.dfs(chosen, next) {
                return Some(found);
            }
            chosen.pop();
        }
        None
    }
}

/// Depth-first search for a minimal reconstructing set; deterministic for a
/// fixed field and budget. The returned set, when found, carries a verified
/// certificate.
pub fn search(field: &FiniteField, budget: u64) -> MrsSearch {
    let candidates = legal_symplectics(field);
    let m = candidates.len();
    let words = m.div_ceil(64);
    let mut compat = vec![vec![0u64; words]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            if difference_nonsingular(field, &candidates[i], &candidates[j]) {
                compat[i][j / 64] |= 1 << (j % 64);
                compat[j][i / 64] |= 1 << (i % 64);
            }
        }
    }
    let mut searcher = Searcher {
        field,
        candidates,
        compat,
        budget,
        nodes: 0,
    };
    match searcher.run() {
        Some(set) => {
            assert!(verify(field, &set), "search returned an invalid set");
            MrsSearch {
                outcome: MrsOutcome::Found(set),
                nodes: searcher.nodes,
            }
        }
        None => MrsSearch {
            outcome: if searcher.nodes >= budget {
                MrsOutcome::BudgetExceeded
            } else {
                MrsOutcome::Exhausted
            },
            nodes: searcher.nodes,
        },
    }
}

/// Like [`search`], but consults and updates a sidecar cache file keyed by
/// `(p, n, modulus)`. Only found sets are cached.
pub fn search_cached(field: &FiniteField, budget: u64, cache_dir: &Path) -> Result<MrsSearch> {
    let name = format!(
        "mrs-v1-p{}-n{}-m{}.json",
        field.characteristic(),
        field.degree(),
        field
            .modulus()
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("_")
    );
    let path = cache_dir.join(name);
    if path.exists() {
        let text = std::fs::read_to_string(&path)?;
        if let Ok(set) = crate::serial::mrs_from_json(field, &serde_json::from_str(&text)?) {
            if verify(field, &set) {
                return Ok(MrsSearch {
                    outcome: MrsOutcome::Found(set),
                    nodes: 0,
                });
            }
        }
        // fall through and redo the search on any cache problem
    }
    let result = search(field, budget);
    if let MrsOutcome::Found(set) = &result.outcome {
        std::fs::create_dir_all(cache_dir)?;
        let json = crate::serial::mrs_to_json(field, set, result.nodes);
        std::fs::write(&path, serde_json::to_string_pretty(&json)?)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_mrs_is_the_legal_set() {
        let f = FiniteField::prime(2).unwrap();
        let result = search(&f, DEFAULT_BUDGET);
        let set = result.set().expect("d=2 set exists");
        assert_eq!(set.len(), 3);
        let mut legal = legal_symplectics(&f);
        legal.sort_by_key(|s| s.entries().map(|e| e.index()));
        assert_eq!(set, legal.as_slice());
    }

    #[test]
    fn d3_mrs_found_and_verified() {
        let f = FiniteField::prime(3).unwrap();
        let result = search(&f, DEFAULT_BUDGET);
        let set = result.set().expect("d=3 set exists");
        assert_eq!(set.len(), 8);
        assert!(verify(&f, set));
    }

    #[test]
    fn d5_mrs_found() {
        let f = FiniteField::prime(5).unwrap();
        let result = search(&f, DEFAULT_BUDGET);
        assert!(verify(&f, result.set().expect("d=5 set exists")));
    }

    #[test]
    fn verify_rejects_bad_sets() {
        let f = FiniteField::prime(3).unwrap();
        let group = legal_symplectics(&f);
        assert!(!verify(&f, &group[..7]));
        let mut set: Vec<SymplecticMatrix> = group[..8].to_vec();
        set[1] = set[0];
        assert!(!verify(&f, &set));
    }

    #[test]
    fn search_is_deterministic() {
        let f = FiniteField::prime(3).unwrap();
        let a = search(&f, DEFAULT_BUDGET);
        let b = search(&f, DEFAULT_BUDGET);
        assert_eq!(a.set(), b.set());
        assert_eq!(a.nodes, b.nodes);
    }
}
