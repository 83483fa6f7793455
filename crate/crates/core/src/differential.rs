//! Runs both engines (and optionally enumeration) on one instance and
//! cross-validates every answer.

use crate::backward::{backward_check, BackwardError};
use crate::certify::{check_certificate, replay_trace};
use crate::engine::{check_with, EngineConfig, EngineError, Fault, DEFAULT_STEP_BUDGET};
use crate::explore::enumerated_safe;
use crate::kernel::{PetriNet, Tokens};
use crate::regions::UpSet;
use crate::verdict::{Outcome, Verdict};

#[derive(Debug, Clone)]
pub struct DiffOptions {
    pub check_invariants: bool,
    /// Box bound for the enumerative oracle; `None` disables it.
    pub enum_bound: Option<Tokens>,
    pub step_budget: u64,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for DiffOptions {
    fn default() -> Self {
        DiffOptions {
            check_invariants: true,
            enum_bound: None,
            step_budget: DEFAULT_STEP_BUDGET,
            fault: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InstanceReport {
    pub iic: Result<Verdict, EngineError>,
    pub backward: Result<Verdict, BackwardError>,
    /// `None` when the oracle is off or the reachable set left the box.
    pub enumerated: Option<bool>,
    pub problems: Vec<String>,
}

impl InstanceReport {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn budget_hit(&self) -> bool {
        matches!(self.iic, Err(EngineError::BudgetExhausted(_)))
    }

    pub fn iic_safe(&self) -> Option<bool> {
        self.iic.as_ref().ok().map(Verdict::is_safe)
    }

    pub fn backward_safe(&self) -> Option<bool> {
        self.backward.as_ref().ok().map(Verdict::is_safe)
    }
}

fn validate(name: &str, net: &PetriNet, target: &UpSet, outcome: &Outcome) -> Option<String> {
    match outcome {
        Outcome::Safe(basis) => check_certificate(net, target, basis)
            .err()
            .map(|e| format!("{name}: {e}")),
        Outcome::Unsafe(trace) => replay_trace(net, target, trace)
            .err()
            .map(|e| format!("{name}: {e}")),
    }
}

pub fn compare(net: &PetriNet, target: &UpSet, opts: &DiffOptions) -> InstanceReport {
    let config = EngineConfig {
        step_budget: opts.step_budget,
        check_invariants: opts.check_invariants,
        record_events: false,
        fault: opts.fault,
    };
    let iic = check_with(net, target, config);
    let backward = backward_check(net, target);
    let enumerated = opts
        .enum_bound
        .and_then(|b| enumerated_safe(net, target, b));

    let mut problems = Vec::new();
    match &iic {
        Ok(v) => problems.extend(validate("iic", net, target, &v.outcome)),
        Err(e) => problems.push(format!("iic: {e}")),
    }
    match &backward {
        Ok(v) => problems.extend(validate("backward", net, target, &v.outcome)),
        Err(e) => problems.push(format!("backward: {e}")),
    }
    let verdicts = [
        ("iic", iic.as_ref().ok().map(Verdict::is_safe)),
        ("backward", backward.as_ref().ok().map(Verdict::is_safe)),
        ("enumeration", enumerated),
    ];
    let known: Vec<_> = verdicts
        .iter()
        .filter_map(|(n, v)| v.map(|v| (*n, v)))
        .collect();
    if known.windows(2).any(|w| w[0].1 != w[1].1) {
        let detail: Vec<String> = known
            .iter()
            .map(|(n, safe)| format!("{n}={}", if *safe { "safe" } else { "unsafe" }))
            .collect();
        problems.push(format!("disagreement: {}", detail.join(" ")));
    }
    InstanceReport {
        iic,
        backward,
        enumerated,
        problems,
    }
}
