//! Petri-net data model and the pointwise order on markings.
//!
//! A transition is kept in guard/delta form: `guard[j]` tokens must be
//! present in place `j` for it to fire and firing adds `delta[j]`.

use std::fmt;

use thiserror::Error;

use crate::regions::UpSet;

/// Token count of a single place.
pub type Tokens = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("dimension mismatch: expected {expected} places, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("token count overflow in place {place}")]
    Overflow { place: usize },
    #[error("transition `{name}`: guard + delta is negative in place {place}")]
    NegativeOutput { name: String, place: usize },
    #[error("a net needs at least one place")]
    NoPlaces,
    #[error("a net needs at least one initial marking")]
    NoInitialMarking,
    #[error("initial marking {0} listed twice")]
    DuplicateInitial(Marking),
}

fn same_len(expected: usize, found: usize) -> Result<(), KernelError> {
    if expected == found {
        Ok(())
    } else {
        Err(KernelError::DimensionMismatch { expected, found })
    }
}

/// One token count per place. Ordered lexicographically by `Ord`; the
/// pointwise order is [`Marking::covers`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(Vec<Tokens>);

impl Marking {
    pub fn new(counts: Vec<Tokens>) -> Self {
        Marking(counts)
    }

    pub fn zero(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn counts(&self) -> &[Tokens] {
        &self.0
    }

    pub fn into_counts(self) -> Vec<Tokens> {
        self.0
    }

    /// Total number of tokens.
    pub fn size(&self) -> u64 {
        self.0.iter().map(|&c| u64::from(c)).sum()
    }

    /// `self ⪰ other` in the pointwise order. Both markings must have the
    /// same length; use [`covers`] when that is not already established.
    pub fn covers(&self, other: &Marking) -> bool {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn join(&self, other: &Marking) -> Marking {
        debug_assert_eq!(self.len(), other.len());
        Marking(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.max(b))
                .collect(),
        )
    }
}

impl From<Vec<Tokens>> for Marking {
    fn from(counts: Vec<Tokens>) -> Self {
        Marking(counts)
    }
}

impl<const N: usize> From<[Tokens; N]> for Marking {
    fn from(counts: [Tokens; N]) -> Self {
        Marking(counts.to_vec())
    }
}

impl std::ops::Index<usize> for Marking {
    type Output = Tokens;

    fn index(&self, place: usize) -> &Tokens {
        &self.0[place]
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    name: String,
    guard: Vec<Tokens>,
    delta: Vec<i64>,
}

impl Transition {
    /// Builds a transition, rejecting a delta that would drive the minimal
    /// enabling marking negative.
    pub fn new(
        name: impl Into<String>,
        guard: Vec<Tokens>,
        delta: Vec<i64>,
    ) -> Result<Self, KernelError> {
        let name = name.into();
        same_len(guard.len(), delta.len())?;
        for (place, (&g, &d)) in guard.iter().zip(&delta).enumerate() {
            if i64::from(g) + d < 0 {
                return Err(KernelError::NegativeOutput { name, place });
            }
        }
        Ok(Transition { name, guard, delta })
    }

    /// Builds a transition from its input and output arc weights.
    pub fn from_arcs(
        name: impl Into<String>,
        input: &[Tokens],
        output: &[Tokens],
    ) -> Result<Self, KernelError> {
        same_len(input.len(), output.len())?;
        let delta = input
            .iter()
            .zip(output)
            .map(|(&i, &o)| i64::from(o) - i64::from(i))
            .collect();
        Transition::new(name, input.to_vec(), delta)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn guard(&self) -> &[Tokens] {
        &self.guard
    }

    pub fn delta(&self) -> &[i64] {
        &self.delta
    }

    pub fn places(&self) -> usize {
        self.guard.len()
    }

    pub fn is_enabled(&self, m: &Marking) -> bool {
        debug_assert_eq!(m.len(), self.places());
        m.0.iter().zip(&self.guard).all(|(a, g)| a >= g)
    }

    /// Successor of `m`; `m` must enable the transition.
    pub fn fire(&self, m: &Marking) -> Result<Marking, KernelError> {
        if !self.is_enabled(m) {
            return Err(KernelError::NotEnabled(self.name.clone()));
        }
        m.0.iter()
            .zip(&self.delta)
            .enumerate()
            .map(|(place, (&a, &d))| {
                Tokens::try_from(i64::from(a) + d).map_err(|_| KernelError::Overflow { place })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Marking)
    }

    /// The ⪯-least marking that enables the transition and whose successor
    /// covers `a`: `max(a - delta, guard)`.
    pub fn pred_along(&self, a: &Marking) -> Result<Marking, KernelError> {
        debug_assert_eq!(a.len(), self.places());
        a.0.iter()
            .zip(&self.delta)
            .zip(&self.guard)
            .enumerate()
            .map(|(place, ((&a, &d), &g))| {
                let need = (i64::from(a) - d).max(i64::from(g));
                Tokens::try_from(need).map_err(|_| KernelError::Overflow { place })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Marking)
    }

    /// Lower bound `a''` such that every `a'` with `a'' ⪯ a' ⪯ a` keeps
    /// `pred_along(a')` above the blocker `c`, given `c ⪯ pred_along(a)`.
    /// Only places where `c` exceeds the guard constrain `a'`.
    pub fn blocking_floor(&self, c: &Marking) -> Marking {
        debug_assert_eq!(c.len(), self.places());
        Marking(
            c.0.iter()
                .zip(&self.guard)
                .zip(&self.delta)
                .map(|((&c, &g), &d)| {
                    if g < c {
                        // c > g >= -d, so the sum is positive
                        (i64::from(c) + d) as Tokens
                    } else {
                        0
                    }
                })
                .collect(),
        )
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: g=(", self.name)?;
        for (i, g) in self.guard.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str(") d=(")?;
        for (i, d) in self.delta.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<Transition>,
    initial: Vec<Marking>,
}

impl PetriNet {
    pub fn new(
        places: Vec<String>,
        transitions: Vec<Transition>,
        initial: Vec<Marking>,
    ) -> Result<Self, KernelError> {
        if places.is_empty() {
            return Err(KernelError::NoPlaces);
        }
        if initial.is_empty() {
            return Err(KernelError::NoInitialMarking);
        }
        let n = places.len();
        for t in &transitions {
            same_len(n, t.places())?;
        }
        for (i, m) in initial.iter().enumerate() {
            same_len(n, m.len())?;
            if initial[..i].contains(m) {
                return Err(KernelError::DuplicateInitial(m.clone()));
            }
        }
        Ok(PetriNet {
            places,
            transitions,
            initial,
        })
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> &[Marking] {
        &self.initial
    }

    pub fn check_marking(&self, m: &Marking) -> Result<(), KernelError> {
        same_len(self.place_count(), m.len())
    }

    /// True if some initial marking covers `m`.
    pub fn initially_covers(&self, m: &Marking) -> bool {
        self.initial.iter().any(|m0| m0.covers(m))
    }
}

pub fn covers(a: &Marking, b: &Marking) -> Result<bool, KernelError> {
    same_len(a.len(), b.len())?;
    Ok(a.covers(b))
}

pub fn enabled(m: &Marking, t: &Transition) -> Result<bool, KernelError> {
    same_len(t.places(), m.len())?;
    Ok(t.is_enabled(m))
}

pub fn fire(m: &Marking, t: &Transition) -> Result<Marking, KernelError> {
    same_len(t.places(), m.len())?;
    t.fire(m)
}

pub fn pred_along(a: &Marking, t: &Transition) -> Result<Marking, KernelError> {
    same_len(t.places(), a.len())?;
    t.pred_along(a)
}

pub fn pointwise_max(a: &Marking, b: &Marking) -> Result<Marking, KernelError> {
    same_len(a.len(), b.len())?;
    Ok(a.join(b))
}

/// Reduces `ms` to its ⪯-minimal elements. Among equal markings the first
/// occurrence is kept.
pub fn minimize<I>(ms: I) -> UpSet
where
    I: IntoIterator<Item = Marking>,
{
    let mut basis: Vec<Marking> = Vec::new();
    for m in ms {
        if basis.iter().any(|b| m.covers(b)) {
            continue;
        }
        basis.retain(|b| !b.covers(&m));
        basis.push(m);
    }
    UpSet::from_minimal(basis)
}
