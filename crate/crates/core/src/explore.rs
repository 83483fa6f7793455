//! Bounded forward exploration: the third, enumerative oracle.

use std::collections::{HashSet, VecDeque};

use crate::kernel::{Marking, PetriNet, Tokens};
use crate::regions::UpSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exploration {
    /// Every reachable marking stays within the box.
    Complete(HashSet<Marking>),
    /// Some reachable marking has a place above the box bound.
    OutOfBox,
}

/// Breadth-first search from the initial markings, giving up as soon as a
/// marking leaves `[0, bound]^n`.
pub fn explore(net: &PetriNet, bound: Tokens) -> Exploration {
    let in_box = |m: &Marking| m.counts().iter().all(|&c| c <= bound);
    let mut seen: HashSet<Marking> = HashSet::new();
    let mut queue = VecDeque::new();
    for m0 in net.initial() {
        if !in_box(m0) {
            return Exploration::OutOfBox;
        }
        if seen.insert(m0.clone()) {
            queue.push_back(m0.clone());
        }
    }
    while let Some(m) = queue.pop_front() {
        for t in net.transitions() {
            if !t.is_enabled(&m) {
                continue;
            }
            let Ok(next) = t.fire(&m) else {
                return Exploration::OutOfBox;
            };
            if !in_box(&next) {
                return Exploration::OutOfBox;
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Exploration::Complete(seen)
}

/// Safety verdict from a complete exploration: `Some(true)` when no
/// reachable marking covers a target element.
pub fn enumerated_safe(net: &PetriNet, target: &UpSet, bound: Tokens) -> Option<bool> {
    match explore(net, bound) {
        Exploration::Complete(reach) => Some(!reach.iter().any(|m| target.contains(m))),
        Exploration::OutOfBox => None,
    }
}
