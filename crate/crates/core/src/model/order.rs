use std::collections::BTreeSet;

/// A strict partial order over the value indices of one domain, stored as its
/// transitive closure.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StrictOrder {
    pairs: BTreeSet<(usize, usize)>,
}

impl StrictOrder {
    pub const fn empty() -> Self {
        Self {
            pairs: BTreeSet::new(),
        }
    }

    /// Closes `pairs` transitively. Returns `None` when the closure is not
    /// irreflexive, i.e. the pairs contain a cycle.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Option<Self> {
        let mut closed: BTreeSet<(usize, usize)> = pairs.into_iter().collect();
        loop {
            let mut added = Vec::new();
            for &(a, b) in &closed {
                for &(_, c) in closed.range((b, 0)..=(b, usize::MAX)) {
                    if !closed.contains(&(a, c)) {
                        added.push((a, c));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            closed.extend(added);
        }
        if closed.iter().any(|&(a, b)| a == b) {
            return None;
        }
        Some(Self { pairs: closed })
    }

    /// Builds the chain `ranking[0] > ranking[1] > ...`.
    pub fn total(ranking: &[usize]) -> Self {
        let mut pairs = BTreeSet::new();
        for (i, &a) in ranking.iter().enumerate() {
            for &b in &ranking[i + 1..] {
                pairs.insert((a, b));
            }
        }
        Self { pairs }
    }

    pub fn prefers(&self, better: usize, worse: usize) -> bool {
        self.pairs.contains(&(better, worse))
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// All ordered pairs of the closure, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// The transitive reduction: pairs `a > b` with no `c` such that `a > c > b`.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .copied()
            .filter(|&(a, b)| {
                !self
                    .pairs
                    .range((a, 0)..=(a, usize::MAX))
                    .any(|&(_, c)| c != b && self.pairs.contains(&(c, b)))
            })
            .collect()
    }

    pub fn is_strict_partial_order(&self) -> bool {
        self.pairs
            .iter()
            .all(|&(a, b)| a != b && !self.pairs.contains(&(b, a)))
            && self.pairs.iter().all(|&(a, b)| {
                self.pairs
                    .range((b, 0)..=(b, usize::MAX))
                    .all(|&(_, c)| self.pairs.contains(&(a, c)))
            })
    }
}
