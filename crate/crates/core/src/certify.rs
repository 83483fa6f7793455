//! Independent checks for both kinds of verdict.
//!
//! Only kernel operations are used here, so a certificate or trace accepted
//! by this module does not depend on the engine that produced it.

use thiserror::Error;

use crate::kernel::{KernelError, Marking, PetriNet};
use crate::regions::UpSet;
use crate::verdict::CexTrace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertFailure {
    #[error("CERT-FAIL dim {0}")]
    Kernel(#[from] KernelError),
    /// An initial marking lies in the upward closure of the basis.
    #[error("CERT-FAIL a initial={initial} blocker={blocker}")]
    Initial { initial: Marking, blocker: Marking },
    /// A target element is not excluded by the basis.
    #[error("CERT-FAIL b target={target}")]
    Property { target: Marking },
    /// The basis is not closed under predecessors.
    #[error("CERT-FAIL c blocker={blocker} t={transition} pred={pred}")]
    Inductive {
        blocker: Marking,
        transition: usize,
        pred: Marking,
    },
}

/// Checks that `Σ \ ↑basis` is an inductive covering set for the query
/// "is some element of `↑target` coverable".
pub fn check_certificate(net: &PetriNet, target: &UpSet, basis: &UpSet) -> Result<(), CertFailure> {
    for m in target.iter().chain(basis.iter()) {
        net.check_marking(m)?;
    }
    for m0 in net.initial() {
        if let Some(b) = basis.iter().find(|b| m0.covers(b)) {
            return Err(CertFailure::Initial {
                initial: m0.clone(),
                blocker: b.clone(),
            });
        }
    }
    if let Some(u) = target.iter().find(|u| !basis.contains(u)) {
        return Err(CertFailure::Property { target: u.clone() });
    }
    for b in basis {
        for (i, t) in net.transitions().iter().enumerate() {
            let pred = t.pred_along(b)?;
            if !basis.contains(&pred) {
                return Err(CertFailure::Inductive {
                    blocker: b.clone(),
                    transition: i,
                    pred,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceFailure {
    #[error("TRACE-FAIL malformed {0}")]
    Malformed(String),
    #[error("TRACE-FAIL 0 no initial marking covers {0}")]
    NoInitialCover(Marking),
    #[error("TRACE-FAIL {step} transition {transition} disabled at {marking}")]
    Disabled {
        step: usize,
        transition: usize,
        marking: Marking,
    },
    #[error("TRACE-FAIL {step} {marking} covers no target element")]
    MissesTarget { step: usize, marking: Marking },
    #[error("TRACE-FAIL {step} {source}")]
    Kernel { step: usize, source: KernelError },
}

/// A concrete firing sequence from an initial marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    /// `markings[0]` is initial, `markings[j + 1]` results from firing
    /// `transitions[j]`.
    pub markings: Vec<Marking>,
    pub transitions: Vec<usize>,
    /// Index into the target basis of the element covered at the end.
    pub covered: usize,
}

impl Run {
    pub fn last(&self) -> &Marking {
        self.markings
            .last()
            .expect("a run has at least one marking")
    }
}

/// Replays `trace` concretely from the first initial marking covering its
/// first state and checks that the final marking covers a target element.
pub fn replay_trace(net: &PetriNet, target: &UpSet, trace: &CexTrace) -> Result<Run, TraceFailure> {
    let n = net.place_count();
    let markings = trace
        .steps()
        .iter()
        .map(|(m, _)| m)
        .chain(std::iter::once(trace.last()))
        .chain(target.iter());
    for m in markings {
        if m.len() != n {
            return Err(TraceFailure::Malformed(format!(
                "marking {m} has {} places, net has {n}",
                m.len()
            )));
        }
    }
    if let Some(t) = trace.transitions().find(|&t| t >= net.transitions().len()) {
        return Err(TraceFailure::Malformed(format!("no transition {t}")));
    }

    let first = trace.first();
    let start = net
        .initial()
        .iter()
        .find(|m0| m0.covers(first))
        .ok_or_else(|| TraceFailure::NoInitialCover(first.clone()))?;

    let mut current = start.clone();
    let mut run = Run {
        markings: vec![current.clone()],
        transitions: Vec::with_capacity(trace.len()),
        covered: 0,
    };
    for (step, t) in trace.transitions().enumerate() {
        let tr = &net.transitions()[t];
        if !tr.is_enabled(&current) {
            return Err(TraceFailure::Disabled {
                step,
                transition: t,
                marking: current,
            });
        }
        current = tr
            .fire(&current)
            .map_err(|source| TraceFailure::Kernel { step, source })?;
        run.transitions.push(t);
        run.markings.push(current.clone());
    }
    match target.iter().position(|u| current.covers(u)) {
        Some(i) => {
            run.covered = i;
            Ok(run)
        }
        None => Err(TraceFailure::MissesTarget {
            step: trace.len(),
            marking: current,
        }),
    }
}
