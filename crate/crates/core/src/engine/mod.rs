//! Incremental inductive coverability checking.
//!
//! The engine keeps a vector of frames `R_0 ⊆ R_1 ⊆ … ⊆ R_N`, each an
//! over-approximation of the markings reachable in at most `i` steps, and a
//! queue of proof obligations. Obligations are refuted by finding minimal
//! predecessors along each transition ([`decide_step`]) or, when none exist
//! in the previous frame, by blocking a generalization of the obligation
//! ([`conflict_step`]). The rules run on a fixed schedule:
//!
//! 1. while a target element lies in `R_N`, push it as a candidate and drain
//!    the queue, checking for a counterexample on every push;
//! 2. otherwise unfold a new frame and push blockers forward
//!    ([`propagate`]);
//! 3. report safe as soon as some `F_i` with `i < N` is empty.

mod invariants;
mod queue;

use std::fmt;

use thiserror::Error;

use crate::kernel::{KernelError, Marking, PetriNet};
use crate::regions::{Frames, Level, RegionError, UpSet};
use crate::verdict::{CexTrace, Outcome, Stats, Verdict};

pub use queue::{Obligation, ObligationId, ObligationQueue};

pub const DEFAULT_STEP_BUDGET: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("internal invariant violated after {rule}: {detail}")]
    Invariant { rule: Rule, detail: String },
    #[error("step budget of {0} rule applications exhausted")]
    BudgetExhausted(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Initialize,
    Candidate,
    Decide,
    Conflict,
    Induction,
    Unfold,
    Valid,
    ModelSyn,
    ModelSem,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Initialize => "initialize",
            Rule::Candidate => "candidate",
            Rule::Decide => "decide",
            Rule::Conflict => "conflict",
            Rule::Induction => "induction",
            Rule::Unfold => "unfold",
            Rule::Valid => "valid",
            Rule::ModelSyn => "model-syn",
            Rule::ModelSem => "model-sem",
        };
        f.write_str(s)
    }
}

/// One rule application, recorded when event logging is on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub rule: Rule,
    pub state: Option<Marking>,
    pub level: Option<Level>,
    /// `|F_1|, …, |F_N|, |F_∞|` after the rule.
    pub frame_sizes: Vec<usize>,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule)?;
        if let Some(s) = &self.state {
            write!(f, " {s}")?;
        }
        if let Some(l) = &self.level {
            write!(f, " @{l}")?;
        }
        f.write_str(" frames=[")?;
        let (inf, finite) = self.frame_sizes.split_last().unwrap_or((&0, &[]));
        for (i, n) in finite.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "|{inf}]")
    }
}

/// Deliberate engine defects for exercising the differential harness.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Conflict also copies every new blocker into `F_∞`.
    OverBlock,
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Maximum number of rule applications before giving up.
    pub step_budget: u64,
    /// Re-check the frame invariants after every rule application.
    pub check_invariants: bool,
    pub record_events: bool,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            step_budget: DEFAULT_STEP_BUDGET,
            check_invariants: false,
            record_events: false,
            fault: None,
        }
    }
}

/// First target element in `R_N`, scanning in basis order.
pub fn candidate<'a>(fr: &Frames, target: &'a UpSet) -> Option<&'a Marking> {
    let n = fr.depth();
    target
        .iter()
        .find(|a| fr.in_region(a, n).expect("depth is a valid level"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    /// A minimal predecessor in `R_{level-1} \ ↑state` along `transition`.
    Predecessor {
        state: Marking,
        transition: usize,
    },
    NoPredecessor,
}

/// Looks for a predecessor of `↑ob.state` in the frame below it.
pub fn decide_step(ob: &Obligation, fr: &Frames, net: &PetriNet) -> Result<Decision, EngineError> {
    assert!(ob.level >= 1, "level-0 obligations end the search");
    for (i, t) in net.transitions().iter().enumerate() {
        let p = t.pred_along(&ob.state)?;
        if !p.covers(&ob.state) && fr.in_region(&p, ob.level - 1)? {
            return Ok(Decision::Predecessor {
                state: p,
                transition: i,
            });
        }
    }
    Ok(Decision::NoPredecessor)
}

/// The blocker of `p` at the highest level, with `F_0` counting as level 0.
fn strongest_blocker<'f>(fr: &'f Frames, p: &Marking) -> Option<(usize, &'f Marking)> {
    fr.highest_block_level(p)
        .or_else(|| fr.f0_blocker(p).map(|c| (0, c)))
}

fn unblocked(a: &Marking, p: &Marking, t: usize) -> EngineError {
    EngineError::Invariant {
        rule: Rule::Conflict,
        detail: format!("predecessor {p} of {a} along t{t} is not blocked"),
    }
}

/// Highest level `i'` such that `Σ \ ↑a` is inductive relative to `R_{i'}`,
/// given that no predecessor of `↑a` escapes the blockers. A self-blocked
/// predecessor contributes `N + 1`.
pub fn relative_level(a: &Marking, fr: &Frames, net: &PetriNet) -> Result<usize, EngineError> {
    let mut level = fr.depth() + 1;
    for (i, t) in net.transitions().iter().enumerate() {
        let p = t.pred_along(a)?;
        if p.covers(a) {
            continue;
        }
        let (k, _) = strongest_blocker(fr, &p).ok_or_else(|| unblocked(a, &p, i))?;
        level = level.min(k);
    }
    Ok(level)
}

/// Shrinks `a` to some `a' ⪯ a` whose predecessors stay blocked by the same
/// blockers as those of `a` (or by `a'` itself), and which still excludes
/// every initial marking.
pub fn generalize(a: &Marking, fr: &Frames, net: &PetriNet) -> Result<Marking, EngineError> {
    let mut floor = Marking::zero(a.len());
    for (i, t) in net.transitions().iter().enumerate() {
        let p = t.pred_along(a)?;
        if p.covers(a) {
            continue;
        }
        let (_, c) = strongest_blocker(fr, &p).ok_or_else(|| unblocked(a, &p, i))?;
        floor = floor.join(&t.blocking_floor(c));
    }
    if fr.f0_blocker(&floor).is_some() {
        return Ok(floor);
    }
    let c = fr.f0_blocker(a).ok_or_else(|| EngineError::Invariant {
        rule: Rule::Conflict,
        detail: format!("{a} is initially coverable but reached generalization"),
    })?;
    Ok(floor.join(c))
}

/// `Σ \ ↑r` is inductive relative to `R_level`: every predecessor of `↑r`
/// is either inside `↑r` or outside `R_level`.
pub fn is_relatively_inductive(
    r: &Marking,
    level: usize,
    fr: &Frames,
    net: &PetriNet,
) -> Result<bool, EngineError> {
    for t in net.transitions() {
        let p = t.pred_along(r)?;
        if !p.covers(r) && fr.in_region(&p, level)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictOutcome {
    /// `i'`, the level relative to which the blocked set is inductive.
    pub relative_level: usize,
    pub blocker: Marking,
    pub placed: Level,
    pub requeued: Option<Obligation>,
}

/// Blocks a generalization of an obligation that has no predecessor in the
/// frame below it. The obligation must already be removed from `queue`.
pub fn conflict_step(
    ob: &Obligation,
    fr: &mut Frames,
    net: &PetriNet,
    queue: &mut ObligationQueue,
) -> Result<ConflictOutcome, EngineError> {
    let n = fr.depth();
    let rel = relative_level(&ob.state, fr, net)?;
    let blocker = generalize(&ob.state, fr, net)?;
    let placed = if rel < n {
        Level::At(rel + 1)
    } else if rel == n {
        Level::At(n)
    } else {
        Level::Infinity
    };
    fr.add_blocker(blocker.clone(), placed)?;
    let requeued = (rel + 1 < n).then(|| queue.requeue(ob.id, rel + 2));
    Ok(ConflictOutcome {
        relative_level: rel,
        blocker,
        placed,
        requeued,
    })
}

/// Moves `r` from `F_level` to `F_{level+1}` (generalized) if `Σ \ ↑r` is
/// inductive relative to `R_level`. Returns the new blocker when moved.
pub fn propagate_blocker(
    r: &Marking,
    level: usize,
    fr: &mut Frames,
    net: &PetriNet,
) -> Result<Option<Marking>, EngineError> {
    if !is_relatively_inductive(r, level, fr, net)? {
        return Ok(None);
    }
    let g = generalize(r, fr, net)?;
    fr.add_blocker(g.clone(), Level::At(level + 1))?;
    Ok(Some(g))
}

/// One forward pass over `F_1 … F_{N-1}`. Returns the number of blockers
/// pushed to the next level.
pub fn propagate(fr: &mut Frames, net: &PetriNet) -> Result<u64, EngineError> {
    let mut moved = 0;
    for level in 1..fr.depth() {
        let snapshot = fr.level(level)?.to_vec();
        for r in snapshot {
            if !fr.level(level)?.contains(&r) {
                continue;
            }
            if propagate_blocker(&r, level, fr, net)?.is_some() {
                moved += 1;
            }
        }
    }
    Ok(moved)
}

/// Counterexample reaching from the terminal obligation back to its
/// candidate.
pub fn build_trace(queue: &ObligationQueue, terminal: ObligationId) -> CexTrace {
    queue.trace(terminal)
}

/// Checker state for one coverability query.
pub struct Engine<'a> {
    net: &'a PetriNet,
    target: &'a UpSet,
    config: EngineConfig,
    frames: Frames,
    f0_snapshot: Vec<Marking>,
    queue: ObligationQueue,
    stats: Stats,
    events: Vec<Event>,
    closing_rule: Option<Rule>,
}

impl<'a> Engine<'a> {
    pub fn new(
        net: &'a PetriNet,
        target: &'a UpSet,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        for u in target {
            net.check_marking(u)?;
        }
        let frames = Frames::new(net);
        let f0_snapshot = frames.f0().to_vec();
        Ok(Engine {
            net,
            target,
            config,
            frames,
            f0_snapshot,
            queue: ObligationQueue::new(),
            stats: Stats::default(),
            events: Vec::new(),
            closing_rule: None,
        })
    }

    pub fn frames(&self) -> &Frames {
        &self.frames
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// The rule that produced the verdict: `Valid`, `ModelSem` or `ModelSyn`.
    pub fn closing_rule(&self) -> Option<Rule> {
        self.closing_rule
    }

    pub fn run(&mut self) -> Result<Verdict, EngineError> {
        self.applied(Rule::Initialize, None, None)?;
        loop {
            if let Some(a) = candidate(&self.frames, self.target).cloned() {
                let n = self.frames.depth();
                self.applied(Rule::Candidate, Some(&a), Some(Level::At(n)))?;
                if let Some(v) = self.push(a, n, None)? {
                    return Ok(v);
                }
                if let Some(v) = self.drain()? {
                    return Ok(v);
                }
            } else {
                self.frames.unfold();
                self.applied(Rule::Unfold, None, None)?;
                for level in 1..self.frames.depth() {
                    let snapshot = self.frames.level(level)?.to_vec();
                    for r in snapshot {
                        if !self.frames.level(level)?.contains(&r) {
                            continue;
                        }
                        if let Some(g) = propagate_blocker(&r, level, &mut self.frames, self.net)? {
                            self.stats.propagated += 1;
                            self.applied(Rule::Induction, Some(&g), Some(Level::At(level + 1)))?;
                        }
                    }
                }
                if let Some(v) = self.valid()? {
                    return Ok(v);
                }
            }
        }
    }

    fn drain(&mut self) -> Result<Option<Verdict>, EngineError> {
        while let Some(ob) = self.queue.peek() {
            self.stats.obligations += 1;
            if ob.level == 0 {
                return self.unsafe_verdict(Rule::ModelSyn, &ob).map(Some);
            }
            match decide_step(&ob, &self.frames, self.net)? {
                Decision::Predecessor { state, transition } => {
                    self.applied(Rule::Decide, Some(&state), Some(Level::At(ob.level - 1)))?;
                    if let Some(v) = self.push(state, ob.level - 1, Some((transition, ob.id)))? {
                        return Ok(Some(v));
                    }
                }
                Decision::NoPredecessor => {
                    self.queue.pop();
                    let out = conflict_step(&ob, &mut self.frames, self.net, &mut self.queue)?;
                    if self.config.fault == Some(Fault::OverBlock) {
                        self.frames
                            .add_blocker(out.blocker.clone(), Level::Infinity)?;
                    }
                    self.stats.blockers_added += 1;
                    self.stats.generalization_shrink += ob.state.size() - out.blocker.size();
                    if self.config.check_invariants {
                        invariants::check_blocker_sound(&out, &self.frames, self.net).map_err(
                            |detail| EngineError::Invariant {
                                rule: Rule::Conflict,
                                detail,
                            },
                        )?;
                    }
                    self.applied(Rule::Conflict, Some(&out.blocker), Some(out.placed))?;
                    if let Some(v) = self.valid()? {
                        return Ok(Some(v));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Queues an obligation, ending the search if its state is initially
    /// coverable.
    fn push(
        &mut self,
        state: Marking,
        level: usize,
        via: Option<(usize, ObligationId)>,
    ) -> Result<Option<Verdict>, EngineError> {
        let initially_coverable = self.frames.in_region(&state, 0)?;
        let ob = self.queue.push(state, level, via);
        if initially_coverable {
            return self.unsafe_verdict(Rule::ModelSem, &ob).map(Some);
        }
        Ok(None)
    }

    fn unsafe_verdict(&mut self, rule: Rule, ob: &Obligation) -> Result<Verdict, EngineError> {
        self.applied(rule, Some(&ob.state), Some(Level::At(ob.level)))?;
        self.closing_rule = Some(rule);
        Ok(self.verdict(Outcome::Unsafe(build_trace(&self.queue, ob.id))))
    }

    fn valid(&mut self) -> Result<Option<Verdict>, EngineError> {
        let Some(i) = self.frames.first_empty_frame() else {
            return Ok(None);
        };
        let basis = self.frames.certificate_basis(i)?;
        self.applied(Rule::Valid, None, Some(Level::At(i)))?;
        self.closing_rule = Some(Rule::Valid);
        Ok(Some(self.verdict(Outcome::Safe(basis))))
    }

    fn verdict(&mut self, outcome: Outcome) -> Verdict {
        self.stats.frames = self.frames.depth();
        if let Outcome::Safe(b) = &outcome {
            self.stats.basis_size = b.len();
        }
        Verdict {
            outcome,
            stats: self.stats.clone(),
        }
    }

    /// Bookkeeping after a rule application: budget, event log and, when
    /// enabled, the invariant suite.
    fn applied(
        &mut self,
        rule: Rule,
        state: Option<&Marking>,
        level: Option<Level>,
    ) -> Result<(), EngineError> {
        self.stats.steps += 1;
        if self.stats.steps > self.config.step_budget {
            return Err(EngineError::BudgetExhausted(self.config.step_budget));
        }
        if self.config.record_events {
            self.events.push(Event {
                rule,
                state: state.cloned(),
                level,
                frame_sizes: self.frames.sizes(),
            });
        }
        if self.config.check_invariants {
            invariants::check(
                &self.frames,
                &self.f0_snapshot,
                self.net,
                self.target,
                &self.queue,
            )
            .map_err(|detail| EngineError::Invariant { rule, detail })?;
        }
        Ok(())
    }
}

/// Runs the engine with the default configuration.
pub fn check(net: &PetriNet, target: &UpSet) -> Result<Verdict, EngineError> {
    Engine::new(net, target, EngineConfig::default())?.run()
}

pub fn check_with(
    net: &PetriNet,
    target: &UpSet,
    config: EngineConfig,
) -> Result<Verdict, EngineError> {
    Engine::new(net, target, config)?.run()
}

#[cfg(test)]
mod tests;
