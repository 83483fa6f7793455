use std::fmt;

use crate::kernel::Marking;
use crate::regions::UpSet;

/// Abstract counterexample: `steps[j] = (b_j, t_j)` followed by `last`.
/// Firing `t_j` from any marking covering `b_j` yields a marking covering
/// `b_{j+1}`; the first marking is covered by an initial marking and `last`
/// by nothing in particular beyond a target element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CexTrace {
    steps: Vec<(Marking, usize)>,
    last: Marking,
}

impl CexTrace {
    pub fn new(steps: Vec<(Marking, usize)>, last: Marking) -> Self {
        CexTrace { steps, last }
    }

    pub fn steps(&self) -> &[(Marking, usize)] {
        &self.steps
    }

    pub fn last(&self) -> &Marking {
        &self.last
    }

    pub fn first(&self) -> &Marking {
        self.steps.first().map_or(&self.last, |(m, _)| m)
    }

    /// Number of firings.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn transitions(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|&(_, t)| t)
    }
}

impl fmt::Display for CexTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (m, t) in &self.steps {
            write!(f, "{m} -t{t}-> ")?;
        }
        write!(f, "{}", self.last)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// The complement of the basis' upward closure is an inductive covering
    /// set.
    Safe(UpSet),
    Unsafe(CexTrace),
}

impl Outcome {
    pub fn is_safe(&self) -> bool {
        matches!(self, Outcome::Safe(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Safe(_) => "safe",
            Outcome::Unsafe(_) => "unsafe",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub frames: usize,
    pub blockers_added: u64,
    pub obligations: u64,
    pub generalization_shrink: u64,
    pub propagated: u64,
    pub steps: u64,
    pub basis_size: usize,
}

impl Stats {
    pub fn lines(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("frames", self.frames as u64),
            ("blockers", self.blockers_added),
            ("obligations", self.obligations),
            ("shrink", self.generalization_shrink),
            ("propagated", self.propagated),
            ("steps", self.steps),
            ("basis", self.basis_size as u64),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: Stats,
}

impl Verdict {
    pub fn is_safe(&self) -> bool {
        self.outcome.is_safe()
    }
}
