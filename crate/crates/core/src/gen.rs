//! Seeded random coverability instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::{Marking, PetriNet, Tokens, Transition};
use crate::regions::UpSet;

/// Upper limits for generated instances. All must be at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub places: usize,
    pub transitions: usize,
    /// Largest arc weight.
    pub weight: Tokens,
    /// Largest initial token count per place.
    pub tokens: Tokens,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            places: 6,
            transitions: 6,
            weight: 2,
            tokens: 3,
        }
    }
}

/// Deterministic in `seed` and `bounds`.
pub fn random_instance(seed: u64, bounds: &Bounds) -> (PetriNet, UpSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=bounds.places.max(1));
    let nt = rng.gen_range(1..=bounds.transitions.max(1));
    let w = bounds.weight.max(1);

    let arc = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.4) {
            rng.gen_range(1..=w)
        } else {
            0
        }
    };
    let transitions = (0..nt)
        .map(|i| {
            let input: Vec<Tokens> = (0..n).map(|_| arc(&mut rng)).collect();
            let output: Vec<Tokens> = (0..n).map(|_| arc(&mut rng)).collect();
            Transition::from_arcs(format!("t{i}"), &input, &output)
                .expect("arc weights give a valid transition")
        })
        .collect();

    let marking = |rng: &mut ChaCha8Rng| {
        Marking::new((0..n).map(|_| rng.gen_range(0..=bounds.tokens)).collect())
    };
    let mut initial = vec![marking(&mut rng)];
    if rng.gen_bool(0.15) {
        let second = marking(&mut rng);
        if second != initial[0] {
            initial.push(second);
        }
    }

    let hi = bounds.tokens + 2;
    let targets = (0..rng.gen_range(1..=2))
        .map(|_| {
            let mut c: Vec<Tokens> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        0
                    } else {
                        rng.gen_range(1..=hi)
                    }
                })
                .collect();
            if c.iter().all(|&x| x == 0) {
                let j = rng.gen_range(0..n);
                c[j] = rng.gen_range(1..=hi);
            }
            Marking::new(c)
        })
        .collect::<Vec<_>>();

    let places = (0..n).map(|i| format!("p{i}")).collect();
    let net = PetriNet::new(places, transitions, initial).expect("generated net is well-formed");
    (net, UpSet::new(targets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mist::{emit_spec, parse_spec};

    #[test]
    fn same_seed_same_instance() {
        let b = Bounds::default();
        for seed in [0, 1, 42, u64::MAX] {
            let (n1, t1) = random_instance(seed, &b);
            let (n2, t2) = random_instance(seed, &b);
            assert_eq!(emit_spec(&n1, &t1), emit_spec(&n2, &t2));
        }
    }

    #[test]
    fn smallest_bounds() {
        let b = Bounds {
            places: 1,
            transitions: 1,
            weight: 1,
            tokens: 1,
        };
        for seed in 0..20 {
            let (net, target) = random_instance(seed, &b);
            assert_eq!(net.place_count(), 1);
            assert_eq!(net.transitions().len(), 1);
            assert!(!target.is_empty());
        }
    }

    #[test]
    fn respects_bounds_and_parses_back() {
        let b = Bounds::default();
        for seed in 0..300 {
            let (net, target) = random_instance(seed, &b);
            assert!(net.place_count() <= 6);
            assert!(net.transitions().len() <= 6);
            for t in net.transitions() {
                for (&g, &d) in t.guard().iter().zip(t.delta()) {
                    assert!(g <= 2);
                    assert!(i64::from(g) + d <= 2);
                    assert!(i64::from(g) + d >= 0);
                }
            }
            for m in net.initial() {
                assert!(m.counts().iter().all(|&c| c <= 3));
            }
            assert!((1..=2).contains(&target.len()));
            let spec = parse_spec(&emit_spec(&net, &target)).unwrap();
            assert_eq!(spec.net, net);
            assert_eq!(spec.target, target);
        }
    }
}
