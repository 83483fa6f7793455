//! Upward-closed sets and the delta-encoded frame vector.
//!
//! Frame `R_k` is the complement of the upward closure of every blocker
//! stored at level `k` or above (including `F_∞`). Level 0 is special: it
//! is blocked only by `F_0`, the minimal basis of the complement of the
//! downward closure of the initial markings, so `R_0 = ↓I`.

use std::fmt;

use thiserror::Error;

use crate::kernel::{minimize, Marking, PetriNet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("level {level} out of range (frame depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("frame {0} is not empty")]
    FrameNotEmpty(usize),
    #[error("blocker {0} is covered by an initial marking")]
    BlocksInitial(Marking),
}

/// An upward-closed set, kept as its minimal basis.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct UpSet {
    basis: Vec<Marking>,
}

impl UpSet {
    /// Wraps markings that are already pairwise incomparable.
    pub(crate) fn from_minimal(basis: Vec<Marking>) -> Self {
        UpSet { basis }
    }

    pub fn new<I: IntoIterator<Item = Marking>>(ms: I) -> Self {
        minimize(ms)
    }

    pub fn basis(&self) -> &[Marking] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Marking> {
        self.basis.iter()
    }

    /// Membership of `m` in the upward closure.
    pub fn contains(&self, m: &Marking) -> bool {
        self.basis.iter().any(|b| m.covers(b))
    }

    /// Basis sorted lexicographically.
    pub fn sorted(&self) -> Vec<Marking> {
        let mut v = self.basis.clone();
        v.sort();
        v
    }

    pub fn into_basis(self) -> Vec<Marking> {
        self.basis
    }
}

impl<'a> IntoIterator for &'a UpSet {
    type Item = &'a Marking;
    type IntoIter = std::slice::Iter<'a, Marking>;

    fn into_iter(self) -> Self::IntoIter {
        self.basis.iter()
    }
}

impl FromIterator<Marking> for UpSet {
    fn from_iter<I: IntoIterator<Item = Marking>>(iter: I) -> Self {
        minimize(iter)
    }
}

impl fmt::Display for UpSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.basis.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

/// Where a blocker is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    At(usize),
    Infinity,
}

impl Level {
    /// Numeric level under frame depth `depth`; `F_∞` reports `depth + 1`.
    pub fn number(self, depth: usize) -> usize {
        match self {
            Level::At(k) => k,
            Level::Infinity => depth + 1,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::At(k) => write!(f, "{k}"),
            Level::Infinity => f.write_str("inf"),
        }
    }
}

/// Delta-encoded frames `(F_0, F_1, …, F_N, F_∞)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frames {
    initial: Vec<Marking>,
    f0: Vec<Marking>,
    // levels[k - 1] holds F_k
    levels: Vec<Vec<Marking>>,
    finf: Vec<Marking>,
}

/// Minimal basis of the complement of `↓I`.
fn complement_of_initial(initial: &[Marking]) -> Vec<Marking> {
    let n = initial.first().map_or(0, Marking::len);
    let mut acc: Option<Vec<Marking>> = None;
    for m0 in initial {
        // Σ \ ↓m0 = ↑{ (m0[j] + 1) e_j }
        let cone: Vec<Marking> = (0..n)
            .map(|j| {
                let mut c = vec![0; n];
                c[j] = m0[j].saturating_add(1);
                Marking::new(c)
            })
            .collect();
        acc = Some(match acc {
            None => cone,
            Some(prev) => {
                // intersection of upward-closed sets: pairwise joins
                let joins = prev
                    .iter()
                    .flat_map(|x| cone.iter().map(move |y| x.join(y)));
                minimize(joins).into_basis()
            }
        });
    }
    acc.unwrap_or_default()
}

impl Frames {
    pub fn new(net: &PetriNet) -> Self {
        Frames {
            initial: net.initial().to_vec(),
            f0: complement_of_initial(net.initial()),
            levels: Vec::new(),
            finf: Vec::new(),
        }
    }

    /// Current frame count `N`.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn f0(&self) -> &[Marking] {
        &self.f0
    }

    pub fn finf(&self) -> &[Marking] {
        &self.finf
    }

    /// Blockers stored exactly at level `k`, for `1 ≤ k ≤ N`.
    pub fn level(&self, k: usize) -> Result<&[Marking], RegionError> {
        self.check_level(k, 1)?;
        Ok(&self.levels[k - 1])
    }

    /// All blockers above level 0 with their stored level.
    pub fn blockers(&self) -> impl Iterator<Item = (Level, &Marking)> {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().map(move |m| (Level::At(i + 1), m)))
            .chain(self.finf.iter().map(|m| (Level::Infinity, m)))
    }

    pub fn blocker_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum::<usize>() + self.finf.len()
    }

    /// Sizes `|F_1|, …, |F_N|, |F_∞|`.
    pub fn sizes(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(Vec::len)
            .chain(std::iter::once(self.finf.len()))
            .collect()
    }

    fn check_level(&self, level: usize, lo: usize) -> Result<(), RegionError> {
        if level < lo || level > self.depth() {
            Err(RegionError::LevelOutOfRange {
                level,
                depth: self.depth(),
            })
        } else {
            Ok(())
        }
    }

    fn blocker_from(&self, a: &Marking, k: usize) -> Option<&Marking> {
        self.levels[k.saturating_sub(1)..]
            .iter()
            .flatten()
            .chain(&self.finf)
            .find(|c| a.covers(c))
    }

    /// Membership `a ∈ R_k`.
    pub fn in_region(&self, a: &Marking, k: usize) -> Result<bool, RegionError> {
        self.check_level(k, 0)?;
        if k == 0 {
            Ok(self.f0_blocker(a).is_none())
        } else {
            Ok(self.blocker_from(a, k).is_none())
        }
    }

    /// Some `F_0` element covered by `a`, i.e. a witness for `a ∉ ↓I`.
    pub fn f0_blocker(&self, a: &Marking) -> Option<&Marking> {
        self.f0.iter().find(|c| a.covers(c))
    }

    /// Highest level in `1..=N+1` (with `N+1` standing for `F_∞`) holding a
    /// blocker covered by `a`, together with that blocker.
    pub fn highest_block_level(&self, a: &Marking) -> Option<(usize, &Marking)> {
        if let Some(c) = self.finf.iter().find(|c| a.covers(c)) {
            return Some((self.depth() + 1, c));
        }
        self.levels
            .iter()
            .enumerate()
            .rev()
            .find_map(|(i, l)| l.iter().find(|c| a.covers(c)).map(|c| (i + 1, c)))
    }

    /// Inserts blocker `a` at `level`, dropping every blocker at that level
    /// or below that `a` subsumes. Returns `false` without change when `a` is
    /// already blocked at `level` or above.
    pub fn add_blocker(&mut self, a: Marking, level: Level) -> Result<bool, RegionError> {
        if let Level::At(k) = level {
            self.check_level(k, 1)?;
        }
        if self.initial.iter().any(|m0| m0.covers(&a)) {
            return Err(RegionError::BlocksInitial(a));
        }
        let k = level.number(self.depth());
        if self.blocker_from(&a, k).is_some() {
            return Ok(false);
        }
        let upto = k.min(self.depth());
        for l in &mut self.levels[..upto] {
            l.retain(|c| !c.covers(&a));
        }
        match level {
            Level::At(k) => self.levels[k - 1].push(a),
            Level::Infinity => {
                self.finf.retain(|c| !c.covers(&a));
                self.finf.push(a);
            }
        }
        Ok(true)
    }

    /// Whether `F_i` is empty, which means `R_i = R_{i+1}`. Requires
    /// `1 ≤ i < N`.
    pub fn frame_empty(&self, i: usize) -> Result<bool, RegionError> {
        if i == 0 || i >= self.depth() {
            return Err(RegionError::LevelOutOfRange {
                level: i,
                depth: self.depth(),
            });
        }
        Ok(self.levels[i - 1].is_empty())
    }

    /// First `i` in `1..N` with an empty `F_i`.
    pub fn first_empty_frame(&self) -> Option<usize> {
        let n = self.depth();
        (1..n).find(|&i| self.levels[i - 1].is_empty())
    }

    pub fn unfold(&mut self) {
        self.levels.push(Vec::new());
    }

    /// Basis `B` with `R_i = Σ \ ↑B`, valid as a certificate once `F_i` is
    /// empty.
    pub fn certificate_basis(&self, i: usize) -> Result<UpSet, RegionError> {
        if !self.frame_empty(i)? {
            return Err(RegionError::FrameNotEmpty(i));
        }
        Ok(minimize(
            self.levels[i - 1..]
                .iter()
                .flatten()
                .chain(&self.finf)
                .cloned(),
        ))
    }

    /// Blockers effective at level `k ≥ 1`, i.e. stored at `k` or above.
    pub fn effective(&self, k: usize) -> impl Iterator<Item = &Marking> {
        self.levels[k.saturating_sub(1).min(self.depth())..]
            .iter()
            .flatten()
            .chain(&self.finf)
    }
}
