use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::kernel::Marking;
use crate::verdict::CexTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObligationId(usize);

/// A queued claim `⟨state, level⟩`: `↑state` has to be shown unreachable
/// within `level` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub id: ObligationId,
    pub state: Marking,
    pub level: usize,
}

#[derive(Debug, Clone)]
struct Node {
    state: Marking,
    via: Option<(usize, ObligationId)>,
}

/// Priority queue of obligations. Pops the lowest level first, then the
/// lexicographically smallest state, then the earliest push.
///
/// Every obligation ever pushed stays in an arena so that counterexamples
/// can be rebuilt from the `via` links after it leaves the queue.
#[derive(Debug, Clone, Default)]
pub struct ObligationQueue {
    nodes: Vec<Node>,
    heap: BinaryHeap<Reverse<(usize, Marking, u64, ObligationId)>>,
    seq: u64,
}

impl ObligationQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Pushes a fresh obligation. `via` records the transition and parent
    /// obligation it was derived from; `None` marks a candidate.
    pub fn push(
        &mut self,
        state: Marking,
        level: usize,
        via: Option<(usize, ObligationId)>,
    ) -> Obligation {
        let id = ObligationId(self.nodes.len());
        self.nodes.push(Node {
            state: state.clone(),
            via,
        });
        self.enqueue(id, level)
    }

    /// Re-enqueues an existing obligation at a new level, keeping its
    /// provenance.
    pub fn requeue(&mut self, id: ObligationId, level: usize) -> Obligation {
        self.enqueue(id, level)
    }

    fn enqueue(&mut self, id: ObligationId, level: usize) -> Obligation {
        let state = self.nodes[id.0].state.clone();
        self.heap
            .push(Reverse((level, state.clone(), self.seq, id)));
        self.seq += 1;
        Obligation { id, state, level }
    }

    pub fn peek(&self) -> Option<Obligation> {
        self.heap
            .peek()
            .map(|Reverse((level, state, _, id))| Obligation {
                id: *id,
                state: state.clone(),
                level: *level,
            })
    }

    pub fn pop(&mut self) -> Option<Obligation> {
        self.heap
            .pop()
            .map(|Reverse((level, state, _, id))| Obligation { id, state, level })
    }

    pub fn state(&self, id: ObligationId) -> &Marking {
        &self.nodes[id.0].state
    }

    pub fn via(&self, id: ObligationId) -> Option<(usize, ObligationId)> {
        self.nodes[id.0].via
    }

    /// Queued obligations in no particular order.
    pub fn pending(&self) -> impl Iterator<Item = Obligation> + '_ {
        self.heap
            .iter()
            .map(|Reverse((level, state, _, id))| Obligation {
                id: *id,
                state: state.clone(),
                level: *level,
            })
    }

    /// Follows `via` links from `terminal` back to its candidate:
    /// `[(terminal, t_0), …, (b_{k-1}, t_{k-1})]` ending at the candidate.
    pub fn trace(&self, terminal: ObligationId) -> CexTrace {
        let mut steps = Vec::new();
        let mut cur = terminal;
        while let Some((t, parent)) = self.via(cur) {
            debug_assert!(parent < cur, "via links point to earlier obligations");
            steps.push((self.state(cur).clone(), t));
            cur = parent;
        }
        CexTrace::new(steps, self.state(cur).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m<const N: usize>(c: [u32; N]) -> Marking {
        Marking::from(c)
    }

    #[test]
    fn pops_by_level_then_state_then_fifo() {
        let mut q = ObligationQueue::new();
        let a = q.push(m([2, 0]), 2, None);
        let b = q.push(m([1, 1]), 1, None);
        let c = q.push(m([0, 5]), 2, None);
        let d = q.push(m([1, 1]), 1, None);
        let order: Vec<_> = std::iter::from_fn(|| q.pop()).map(|o| o.id).collect();
        assert_eq!(order, vec![b.id, d.id, c.id, a.id]);
    }

    #[test]
    fn trace_follows_via_links() {
        let mut q = ObligationQueue::new();
        let root = q.push(m([0, 2]), 2, None);
        let mid = q.push(m([1, 1]), 1, Some((0, root.id)));
        let leaf = q.push(m([2, 0]), 0, Some((0, mid.id)));
        let tr = q.trace(leaf.id);
        assert_eq!(tr.steps(), &[(m([2, 0]), 0), (m([1, 1]), 0)]);
        assert_eq!(tr.last(), &m([0, 2]));
        assert!(q.trace(root.id).is_empty());
    }

    #[test]
    fn requeue_keeps_provenance() {
        let mut q = ObligationQueue::new();
        let root = q.push(m([0, 2]), 1, None);
        let child = q.push(m([1, 1]), 0, Some((0, root.id)));
        q.pop();
        let again = q.requeue(child.id, 2);
        assert_eq!(again.state, m([1, 1]));
        assert_eq!(q.via(again.id), Some((0, root.id)));
    }
}
