//! Front end for the checker: `check` runs one or both engines on a `.spec`
//! file, `fuzz` cross-checks them on seeded random instances.
//!
//! Exit codes are the machine contract, see [`exit`].

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use iic_core::backward::backward_check;
use iic_core::certify::{check_certificate, replay_trace};
use iic_core::differential::{compare, DiffOptions, InstanceReport};
use iic_core::engine::{Engine, EngineConfig, EngineError, Fault, DEFAULT_STEP_BUDGET};
use iic_core::gen::{random_instance, Bounds};
use iic_core::mist::{emit_certificate, emit_spec, emit_trace, parse_spec};
use iic_core::{Marking, Outcome, PetriNet, Transition, UpSet, Verdict};

pub mod exit {
    /// Target not coverable.
    pub const SAFE: u8 = 0;
    /// Target coverable.
    pub const UNSAFE: u8 = 1;
    pub const USAGE: u8 = 2;
    /// Step budget exhausted.
    pub const LIMIT: u8 = 3;
    /// Engines disagree or a verdict failed validation.
    pub const FAILURE: u8 = 4;
}

/// Box bound of the enumerative oracle used by `fuzz --enum-oracle`.
pub const ENUM_BOX: u32 = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    #[default]
    Iic,
    Backward,
    Both,
}

#[derive(Debug, Clone)]
pub struct FuzzParams {
    pub count: u64,
    pub seed: u64,
    pub bounds: Bounds,
    pub enum_oracle: bool,
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for FuzzParams {
    fn default() -> Self {
        FuzzParams {
            count: 500,
            seed: 42,
            bounds: Bounds::default(),
            enum_oracle: false,
            jobs: None,
            fault: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub method: Method,
    pub cert: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    /// Log every rule application to stderr.
    pub verbose: bool,
    pub stats: bool,
    /// Validate verdicts before printing them.
    pub verify: bool,
    pub budget: u64,
    pub fuzz: FuzzParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: PathBuf::new(),
            method: Method::Iic,
            cert: None,
            trace: None,
            verbose: false,
            stats: false,
            verify: true,
            budget: DEFAULT_STEP_BUDGET,
            fuzz: FuzzParams::default(),
        }
    }
}

/// Failure that ends a run with an exit code and a message for stderr.
struct Abort(u8, String);

impl From<io::Error> for Abort {
    fn from(e: io::Error) -> Self {
        Abort(exit::USAGE, format!("error: {e}"))
    }
}

fn validate(net: &PetriNet, target: &UpSet, outcome: &Outcome) -> Result<(), String> {
    match outcome {
        Outcome::Safe(b) => check_certificate(net, target, b).map_err(|e| e.to_string()),
        Outcome::Unsafe(t) => replay_trace(net, target, t)
            .map(drop)
            .map_err(|e| e.to_string()),
    }
}

fn artifact(net: &PetriNet, target: &UpSet, outcome: &Outcome) -> String {
    let names = net.places();
    match outcome {
        Outcome::Safe(b) => emit_certificate(b, names),
        Outcome::Unsafe(t) => match replay_trace(net, target, t) {
            Ok(run) => emit_trace(&run, target, names),
            Err(e) => format!("unsafe\n# trace does not replay: {e}"),
        },
    }
}

fn run_iic(
    cfg: &RunConfig,
    net: &PetriNet,
    target: &UpSet,
    err: &mut dyn Write,
) -> Result<Verdict, Abort> {
    let config = EngineConfig {
        step_budget: cfg.budget,
        check_invariants: false,
        record_events: cfg.verbose,
        fault: None,
    };
    let mut engine =
        Engine::new(net, target, config).map_err(|e| Abort(exit::USAGE, format!("error: {e}")))?;
    let res = engine.run();
    for ev in engine.events() {
        writeln!(err, "{ev}")?;
    }
    res.map_err(|e| match e {
        EngineError::BudgetExhausted(_) => Abort(exit::LIMIT, format!("error: {e}")),
        EngineError::Kernel(_) => Abort(exit::USAGE, format!("error: {e}")),
        e => Abort(exit::FAILURE, format!("error: iic: {e}")),
    })
}

fn check_inner(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, Abort> {
    let path = &cfg.input;
    let text = fs::read_to_string(path).map_err(|e| {
        Abort(
            exit::USAGE,
            format!("error: cannot read {}: {e}", path.display()),
        )
    })?;
    let spec = parse_spec(&text)
        .map_err(|e| Abort(exit::USAGE, format!("error: {}:{e}", path.display())))?;
    let (net, target) = (&spec.net, &spec.target);

    let mut verdicts: Vec<(&str, Verdict)> = Vec::new();
    if cfg.method != Method::Backward {
        verdicts.push(("iic", run_iic(cfg, net, target, err)?));
    }
    if cfg.method != Method::Iic {
        let v = backward_check(net, target).map_err(|e| match e {
            iic_core::backward::BackwardError::Kernel(_) => {
                Abort(exit::USAGE, format!("error: {e}"))
            }
            e => Abort(exit::FAILURE, format!("error: backward: {e}")),
        })?;
        verdicts.push(("backward", v));
    }

    if cfg.verify {
        for (name, v) in &verdicts {
            if let Err(e) = validate(net, target, &v.outcome) {
                return Err(Abort(
                    exit::FAILURE,
                    format!("error: {name} verdict failed validation: {e}"),
                ));
            }
        }
    }
    if verdicts
        .windows(2)
        .any(|w| w[0].1.is_safe() != w[1].1.is_safe())
    {
        let mut dump = String::from("error: engines disagree");
        for (name, v) in &verdicts {
            dump.push_str(&format!(
                "\n--- {name}\n{}",
                artifact(net, target, &v.outcome)
            ));
        }
        return Err(Abort(exit::FAILURE, dump));
    }

    let (_, main) = &verdicts[0];
    writeln!(out, "{}", main.outcome.label())?;
    if cfg.stats {
        for (name, v) in &verdicts {
            for (key, value) in v.stats.lines() {
                writeln!(out, "{name} {key} {value}")?;
            }
        }
    }
    match (&main.outcome, &cfg.cert, &cfg.trace) {
        (Outcome::Safe(_), Some(p), _) | (Outcome::Unsafe(_), _, Some(p)) => {
            write_artifact(p, &artifact(net, target, &main.outcome))?;
        }
        (Outcome::Safe(_), None, Some(_)) => writeln!(err, "note: safe verdict, no trace written")?,
        (Outcome::Unsafe(_), Some(_), None) => {
            writeln!(err, "note: unsafe verdict, no certificate written")?
        }
        _ => {}
    }
    Ok(if main.is_safe() {
        exit::SAFE
    } else {
        exit::UNSAFE
    })
}

fn write_artifact(path: &Path, text: &str) -> Result<(), Abort> {
    fs::write(path, format!("{text}\n")).map_err(|e| {
        Abort(
            exit::USAGE,
            format!("error: cannot write {}: {e}", path.display()),
        )
    })
}

/// Checks the `.spec` file at `cfg.input` and prints the verdict.
pub fn run_check(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match check_inner(cfg, out, err) {
        Ok(code) => code,
        Err(Abort(code, msg)) => {
            let _ = writeln!(err, "{msg}");
            code
        }
    }
}

fn rebuild(
    net: &PetriNet,
    transitions: Vec<Transition>,
    initial: Vec<Marking>,
) -> Option<PetriNet> {
    PetriNet::new(net.places().to_vec(), transitions, initial).ok()
}

fn decremented(m: &Marking) -> impl Iterator<Item = Marking> + '_ {
    (0..m.len()).filter(|&j| m[j] > 0).map(move |j| {
        let mut c = m.counts().to_vec();
        c[j] -= 1;
        Marking::new(c)
    })
}

/// One-step simplifications of an instance, roughly largest first.
fn shrink_candidates(net: &PetriNet, target: &UpSet) -> Vec<(PetriNet, UpSet)> {
    let ts = net.transitions();
    let init = net.initial();
    let mut out = Vec::new();
    for i in 0..ts.len() {
        let mut fewer = ts.to_vec();
        fewer.remove(i);
        out.extend(rebuild(net, fewer, init.to_vec()).map(|n| (n, target.clone())));
    }
    if target.len() > 1 {
        for j in 0..target.len() {
            let mut fewer = target.basis().to_vec();
            fewer.remove(j);
            out.push((net.clone(), UpSet::new(fewer)));
        }
    }
    if init.len() > 1 {
        for j in 0..init.len() {
            let mut fewer = init.to_vec();
            fewer.remove(j);
            out.extend(rebuild(net, ts.to_vec(), fewer).map(|n| (n, target.clone())));
        }
    }
    for (j, m0) in init.iter().enumerate() {
        for smaller in decremented(m0) {
            let mut i2 = init.to_vec();
            i2[j] = smaller;
            out.extend(rebuild(net, ts.to_vec(), i2).map(|n| (n, target.clone())));
        }
    }
    for (j, u) in target.iter().enumerate() {
        for smaller in decremented(u) {
            let mut t2 = target.basis().to_vec();
            t2[j] = smaller;
            out.push((net.clone(), UpSet::new(t2)));
        }
    }
    out
}

/// Greedily simplifies a failing instance while `fails` keeps holding.
pub fn minimize_failure(
    net: &PetriNet,
    target: &UpSet,
    fails: impl Fn(&PetriNet, &UpSet) -> bool,
) -> (PetriNet, UpSet) {
    let mut cur = (net.clone(), target.clone());
    'outer: loop {
        for cand in shrink_candidates(&cur.0, &cur.1) {
            if fails(&cand.0, &cand.1) {
                cur = cand;
                continue 'outer;
            }
        }
        return cur;
    }
}

fn diff_options(cfg: &RunConfig) -> DiffOptions {
    DiffOptions {
        check_invariants: true,
        enum_bound: cfg.fuzz.enum_oracle.then_some(ENUM_BOX),
        step_budget: cfg.budget,
        fault: cfg.fuzz.fault,
    }
}

fn fuzz_inner(cfg: &RunConfig, out: &mut dyn Write) -> Result<u8, Abort> {
    let p = &cfg.fuzz;
    let b = &p.bounds;
    if b.places == 0 || b.transitions == 0 || b.weight == 0 || b.tokens == 0 {
        return Err(Abort(
            exit::USAGE,
            "error: fuzz bounds must be positive".into(),
        ));
    }
    let opts = diff_options(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(p.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Abort(exit::USAGE, format!("error: {e}")))?;
    let reports: Vec<(u64, InstanceReport)> = pool.install(|| {
        (0..p.count)
            .into_par_iter()
            .map(|i| {
                let seed = p.seed.wrapping_add(i);
                let (net, target) = random_instance(seed, b);
                (seed, compare(&net, &target, &opts))
            })
            .collect()
    });

    let (mut safe, mut unsafe_, mut enumerated) = (0, 0, 0);
    let mut failures = Vec::new();
    for (seed, r) in &reports {
        match r.iic_safe() {
            Some(true) => safe += 1,
            Some(false) => unsafe_ += 1,
            None => {}
        }
        enumerated += u64::from(r.enumerated.is_some());
        if !r.ok() {
            writeln!(out, "FAIL seed={seed}")?;
            for problem in &r.problems {
                writeln!(out, "  {problem}")?;
            }
            failures.push(*seed);
        }
    }
    if let Some(&seed) = failures.first() {
        let (net, target) = random_instance(seed, b);
        let (net, target) = minimize_failure(&net, &target, |n, t| !compare(n, t, &opts).ok());
        writeln!(out, "reproducer (seed {seed}, minimized):")?;
        writeln!(out, "{}", emit_spec(&net, &target))?;
    }
    writeln!(
        out,
        "fuzz: {} instances from seed {}: {safe} safe, {unsafe_} unsafe, {enumerated} enumerated, {} failures",
        p.count,
        p.seed,
        failures.len()
    )?;
    Ok(if failures.is_empty() {
        exit::SAFE
    } else {
        exit::FAILURE
    })
}

/// Runs both engines on `cfg.fuzz.count` random instances, validating every
/// verdict; exits 4 with a minimized reproducer on the first failure.
pub fn run_fuzz(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match fuzz_inner(cfg, out) {
        Ok(code) => code,
        Err(Abort(code, msg)) => {
            let _ = writeln!(err, "{msg}");
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_net() -> (PetriNet, UpSet) {
        let t = |name: &str| Transition::new(name, vec![1, 0], vec![-1, 1]).unwrap();
        let net = PetriNet::new(
            vec!["x".into(), "y".into()],
            vec![t("a"), t("b"), t("c")],
            vec![Marking::new(vec![3, 0])],
        )
        .unwrap();
        (net, UpSet::new([Marking::new(vec![0, 2])]))
    }

    #[test]
    fn minimizer_reaches_a_local_minimum() {
        let (net, target) = line_net();
        // "fails" whenever covering the target takes at least one firing
        let fails = |n: &PetriNet, t: &UpSet| {
            !n.initial().iter().any(|m0| t.contains(m0))
                && iic_core::explore::enumerated_safe(n, t, 10) == Some(false)
        };
        let (n, t) = minimize_failure(&net, &target, fails);
        assert_eq!(n.transitions().len(), 1);
        assert_eq!(n.initial(), &[Marking::new(vec![1, 0])]);
        assert_eq!(t.basis(), &[Marking::new(vec![0, 1])]);
    }

    #[test]
    fn zero_bounds_are_rejected() {
        let mut cfg = RunConfig::default();
        cfg.fuzz.bounds.places = 0;
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_fuzz(&cfg, &mut out, &mut err), exit::USAGE);
        assert!(String::from_utf8(err).unwrap().contains("positive"));
    }
}
