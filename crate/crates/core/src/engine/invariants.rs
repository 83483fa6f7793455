//! Frame and queue invariants, re-checked after every rule application when
//! `EngineConfig::check_invariants` is set.
//!
//! * every initial marking lies in every frame;
//! * `post(R_i) ⊆ R_{i+1}`, finitized: for each blocker `b` effective at
//!   level `i + 1`, every minimal predecessor of `↑b` lies outside `R_i`;
//! * `R_i ⊆ P` for `i < N`;
//! * blocker sets are antichains and no blocker covers one stored at the
//!   same or a higher level;
//! * `F_0` never changes;
//! * queued obligations sit at levels `≤ N` and their `via` chains lead
//!   back to a candidate, each link being a minimal predecessor.

use crate::kernel::{Marking, PetriNet};
use crate::regions::{Frames, Level, UpSet};

use super::{ConflictOutcome, ObligationQueue};

pub(super) fn check(
    fr: &Frames,
    f0_snapshot: &[Marking],
    net: &PetriNet,
    target: &UpSet,
    queue: &ObligationQueue,
) -> Result<(), String> {
    if fr.f0() != f0_snapshot {
        return Err("F_0 was modified".into());
    }
    let n = fr.depth();
    let blockers: Vec<(usize, &Marking)> = fr.blockers().map(|(l, b)| (l.number(n), b)).collect();

    // initial markings in every frame
    for m0 in net.initial() {
        if let Some((l, b)) = blockers.iter().find(|(_, b)| m0.covers(b)) {
            return Err(format!("initial {m0} blocked by {b} at level {l}"));
        }
    }

    // post(R_i) ⊆ R_{i+1}
    for &(l, b) in &blockers {
        let below = l.min(n) - 1;
        for (i, t) in net.transitions().iter().enumerate() {
            let p = t.pred_along(b).map_err(|e| e.to_string())?;
            if fr.in_region(&p, below).map_err(|e| e.to_string())? {
                return Err(format!(
                    "predecessor {p} of blocker {b} (level {l}) along t{i} is in R_{below}"
                ));
            }
        }
    }

    // R_i ⊆ P below the top frame
    if n >= 1 {
        for u in target {
            if fr.in_region(u, n - 1).map_err(|e| e.to_string())? {
                return Err(format!("target {u} is in R_{}", n - 1));
            }
        }
    }

    // subsumption
    for (i, &(li, bi)) in blockers.iter().enumerate() {
        for (j, &(lj, bj)) in blockers.iter().enumerate() {
            if i != j && lj >= li && bi.covers(bj) {
                return Err(format!(
                    "blocker {bi} at level {li} covers {bj} at level {lj}"
                ));
            }
        }
    }

    for ob in queue.pending() {
        if ob.level > n {
            return Err(format!(
                "obligation {} at level {} above N = {n}",
                ob.state, ob.level
            ));
        }
        let mut cur = ob.id;
        while let Some((t, parent)) = queue.via(cur) {
            let expected = net.transitions()[t]
                .pred_along(queue.state(parent))
                .map_err(|e| e.to_string())?;
            if &expected != queue.state(cur) {
                return Err(format!(
                    "obligation {} is not the predecessor of {} along t{t}",
                    queue.state(cur),
                    queue.state(parent)
                ));
            }
            cur = parent;
        }
        let root = queue.state(cur);
        if !target.basis().contains(root) {
            return Err(format!("obligation chain ends at non-target {root}"));
        }
    }
    Ok(())
}

/// A freshly placed blocker excludes the initial markings and its
/// complement is inductive relative to the frame below its level.
pub(super) fn check_blocker_sound(
    out: &ConflictOutcome,
    fr: &Frames,
    net: &PetriNet,
) -> Result<(), String> {
    let b = &out.blocker;
    if fr.f0_blocker(b).is_none() {
        return Err(format!("blocker {b} is initially coverable"));
    }
    let below = out.relative_level.min(fr.depth());
    let floor = match out.placed {
        Level::At(k) => k - 1,
        Level::Infinity => fr.depth(),
    };
    if below < floor {
        return Err(format!(
            "blocker {b} placed at {} above its level {below}",
            out.placed
        ));
    }
    for (i, t) in net.transitions().iter().enumerate() {
        let p = t.pred_along(b).map_err(|e| e.to_string())?;
        if !p.covers(b) && fr.in_region(&p, below).map_err(|e| e.to_string())? {
            return Err(format!(
                "blocker {b}: predecessor {p} along t{i} is in R_{below}"
            ));
        }
    }
    Ok(())
}
