//! Classical backward reachability: saturate `↑target` under predecessors
//! and check whether an initial marking lands inside.

use std::collections::HashMap;

use thiserror::Error;

use crate::certify::{replay_trace, TraceFailure};
use crate::kernel::{minimize, KernelError, Marking, PetriNet};
use crate::regions::UpSet;
use crate::verdict::{CexTrace, Outcome, Stats, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackwardError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("counterexample does not replay: {0}")]
    Trace(#[from] TraceFailure),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackwardState {
    pub current: UpSet,
    pub frontier: Vec<Marking>,
    /// For every marking ever added to the basis: the transition and the
    /// basis marking it was derived from, or `None` for target elements.
    pub links: HashMap<Marking, Option<(usize, Marking)>>,
}

impl BackwardState {
    pub fn new(target: &UpSet) -> Self {
        BackwardState {
            current: target.clone(),
            frontier: target.basis().to_vec(),
            links: target.iter().map(|u| (u.clone(), None)).collect(),
        }
    }

    pub fn is_fixpoint(&self) -> bool {
        self.frontier.is_empty()
    }

    /// Basis element covered by some initial marking.
    pub fn initially_covered<'a>(&'a self, net: &PetriNet) -> Option<&'a Marking> {
        self.current.iter().find(|b| net.initially_covers(b))
    }

    /// Path from `start` to a target element along the recorded links.
    pub fn trace_from(&self, start: &Marking) -> CexTrace {
        let mut steps = Vec::new();
        let mut cur = start.clone();
        while let Some(Some((t, next))) = self.links.get(&cur) {
            steps.push((cur.clone(), *t));
            cur = next.clone();
        }
        CexTrace::new(steps, cur)
    }
}

/// One saturation round: add minimal predecessors of the frontier.
pub fn pre_step(st: &BackwardState, net: &PetriNet) -> Result<BackwardState, KernelError> {
    let mut found = Vec::new();
    let mut origin = HashMap::new();
    for b in &st.frontier {
        for (i, t) in net.transitions().iter().enumerate() {
            let p = t.pred_along(b)?;
            origin.entry(p.clone()).or_insert_with(|| (i, b.clone()));
            found.push(p);
        }
    }
    let current = minimize(st.current.iter().cloned().chain(found));
    let frontier: Vec<Marking> = current
        .iter()
        .filter(|m| !st.current.basis().contains(m))
        .cloned()
        .collect();
    let mut links = st.links.clone();
    for m in &frontier {
        links
            .entry(m.clone())
            .or_insert_with(|| origin.get(m).cloned());
    }
    Ok(BackwardState {
        current,
        frontier,
        links,
    })
}

pub fn backward_check(net: &PetriNet, target: &UpSet) -> Result<Verdict, BackwardError> {
    for u in target {
        net.check_marking(u)?;
    }
    let mut st = BackwardState::new(target);
    let mut stats = Stats::default();
    loop {
        if let Some(b) = st.initially_covered(net) {
            let trace = st.trace_from(b);
            replay_trace(net, target, &trace)?;
            stats.basis_size = st.current.len();
            return Ok(Verdict {
                outcome: Outcome::Unsafe(trace),
                stats,
            });
        }
        if st.is_fixpoint() {
            stats.basis_size = st.current.len();
            return Ok(Verdict {
                outcome: Outcome::Safe(st.current),
                stats,
            });
        }
        st = pre_step(&st, net)?;
        stats.steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::check_certificate;
    use crate::kernel::Transition;

    fn m<const N: usize>(c: [u32; N]) -> Marking {
        Marking::from(c)
    }

    fn net_a() -> PetriNet {
        PetriNet::new(
            vec!["x".into(), "y".into()],
            vec![Transition::new("t1", vec![1, 0], vec![-1, 1]).unwrap()],
            vec![m([1, 0])],
        )
        .unwrap()
    }

    #[test]
    fn pre_step_examples() {
        let net = net_a();
        let st = BackwardState::new(&UpSet::new([m([0, 1])]));
        let next = pre_step(&st, &net).unwrap();
        assert_eq!(next.current.sorted(), vec![m([0, 1]), m([1, 0])]);
        assert_eq!(next.frontier, vec![m([1, 0])]);
        assert_eq!(next.links[&m([1, 0])], Some((0, m([0, 1]))));

        let fix = BackwardState {
            frontier: vec![],
            ..next.clone()
        };
        assert_eq!(pre_step(&fix, &net).unwrap(), fix);

        // (2,0) -> (3,0) is subsumed
        let st = BackwardState {
            current: UpSet::new([m([2, 0]), m([1, 1]), m([0, 2])]),
            frontier: vec![m([2, 0])],
            links: HashMap::new(),
        };
        assert!(pre_step(&st, &net).unwrap().frontier.is_empty());
    }

    #[test]
    fn net_a_unsafe() {
        let net = net_a();
        let target = UpSet::new([m([0, 1])]);
        let v = backward_check(&net, &target).unwrap();
        assert_eq!(v.stats.steps, 1);
        let Outcome::Unsafe(trace) = v.outcome else {
            panic!("expected unsafe")
        };
        assert_eq!(trace.steps(), &[(m([1, 0]), 0)]);
        assert_eq!(trace.last(), &m([0, 1]));
    }

    #[test]
    fn net_a_safe() {
        let net = net_a();
        let target = UpSet::new([m([0, 2])]);
        let v = backward_check(&net, &target).unwrap();
        let Outcome::Safe(basis) = &v.outcome else {
            panic!("expected safe")
        };
        assert_eq!(basis.sorted(), vec![m([0, 2]), m([1, 1]), m([2, 0])]);
        assert_eq!(check_certificate(&net, &target, basis), Ok(()));
    }

    #[test]
    fn target_initially_covered() {
        let net = net_a();
        let target = UpSet::new([m([1, 0])]);
        let v = backward_check(&net, &target).unwrap();
        assert_eq!(v.stats.steps, 0);
        let Outcome::Unsafe(trace) = v.outcome else {
            panic!("expected unsafe")
        };
        assert!(trace.is_empty());
    }

    #[test]
    fn coverage_only_grows() {
        let net = PetriNet::new(
            vec!["x".into(), "y".into()],
            vec![
                Transition::new("a", vec![1, 0], vec![-1, 2]).unwrap(),
                Transition::new("b", vec![0, 3], vec![1, -3]).unwrap(),
            ],
            vec![m([0, 0])],
        )
        .unwrap();
        let mut st = BackwardState::new(&UpSet::new([m([4, 0])]));
        for _ in 0..6 {
            let next = pre_step(&st, &net).unwrap();
            for x in 0..8 {
                for y in 0..8 {
                    let p = m([x, y]);
                    if st.current.contains(&p) {
                        assert!(next.current.contains(&p));
                    }
                }
            }
            st = next;
        }
    }
}
