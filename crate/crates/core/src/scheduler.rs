//! Per-slot scheduling: success probabilities and matching selection.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matching::Matching;
use crate::model::Topology;

/// Probability that each type is served this slot if `matching` is used
/// under `link_state`: `q_i` when type `i` is selected and all its links
/// hold a Bell pair, otherwise zero.
pub fn success_vector(
    link_state: &[bool],
    matching: &Matching,
    topology: &Topology,
) -> Result<Vec<f64>> {
    if link_state.len() != topology.num_links() {
        return Err(Error::LengthMismatch {
            what: "link state",
            expected: topology.num_links(),
            got: link_state.len(),
        });
    }
    if matching.len() != topology.num_types() {
        return Err(Error::LengthMismatch {
            what: "matching flags",
            expected: topology.num_types(),
            got: matching.len(),
        });
    }
    Ok((0..topology.num_types())
        .map(|i| success(i, link_state, matching, topology))
        .collect())
}

#[inline]
fn success(i: usize, link_state: &[bool], matching: &Matching, topology: &Topology) -> f64 {
    if matching.selects(i) && topology.links_ready(i, link_state) {
        topology.swap_success()[i]
    } else {
        0.0
    }
}

/// `Σ_i r_i(T, π) Q_i`, summed in type order.
pub fn matching_weight(
    link_state: &[bool],
    queues: &[u64],
    matching: &Matching,
    topology: &Topology,
) -> f64 {
    matching
        .selected()
        .filter(|&i| topology.links_ready(i, link_state))
        .map(|i| topology.swap_success()[i] * queues[i] as f64)
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDecision {
    /// Position of the chosen matching in the candidate list.
    pub index: usize,
    pub chosen: Matching,
    /// Max-Weight objective of every candidate, in candidate order.
    pub weights: Vec<f64>,
}

fn all_weights(
    link_state: &[bool],
    queues: &[u64],
    matchings: &[Matching],
    topology: &Topology,
) -> Vec<f64> {
    matchings
        .iter()
        .map(|m| matching_weight(link_state, queues, m, topology))
        .collect()
}

fn decision(index: usize, matchings: &[Matching], weights: Vec<f64>) -> PolicyDecision {
    PolicyDecision {
        index,
        chosen: matchings[index].clone(),
        weights,
    }
}

/// Max-Weight selection. Among maximizers the smallest matching in
/// [`Matching`]'s order wins, whatever order the candidates are listed in.
///
/// # Panics
///
/// If `matchings` is empty.
pub fn max_weight(
    link_state: &[bool],
    queues: &[u64],
    matchings: &[Matching],
    topology: &Topology,
) -> PolicyDecision {
    assert!(!matchings.is_empty(), "max_weight needs at least one candidate");
    let weights = all_weights(link_state, queues, matchings, topology);
    let mut best = 0;
    for k in 1..matchings.len() {
        if weights[k] > weights[best]
            || (weights[k] == weights[best] && matchings[k] < matchings[best])
        {
            best = k;
        }
    }
    decision(best, matchings, weights)
}

/// Uniform choice among matchings that can serve at least one nonempty
/// queue this slot; uniform over all matchings when none can.
pub fn baseline_random<R: Rng + ?Sized>(
    link_state: &[bool],
    queues: &[u64],
    matchings: &[Matching],
    topology: &Topology,
    rng: &mut R,
) -> PolicyDecision {
    assert!(!matchings.is_empty(), "baseline_random needs at least one candidate");
    let servable: Vec<usize> = (0..matchings.len())
        .filter(|&k| {
            matchings[k]
                .selected()
                .any(|i| queues[i] > 0 && success(i, link_state, &matchings[k], topology) > 0.0)
        })
        .collect();
    let index = if servable.is_empty() {
        rng.random_range(0..matchings.len())
    } else {
        servable[rng.random_range(0..servable.len())]
    };
    decision(index, matchings, all_weights(link_state, queues, matchings, topology))
}

/// Greedy longest-queue-first: visit types by decreasing queue (ties by
/// index), take each one whose links are ready and free, then complete the
/// selection to a maximal matching in index order.
///
/// # Panics
///
/// If the greedy result is missing from `matchings`, which cannot happen
/// when `matchings` is the full maximal set.
pub fn longest_queue_first(
    link_state: &[bool],
    queues: &[u64],
    matchings: &[Matching],
    topology: &Topology,
) -> PolicyDecision {
    let m = topology.num_types();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| queues[b].cmp(&queues[a]).then(a.cmp(&b)));

    let mut used = vec![false; topology.num_links()];
    let mut flags = vec![false; m];
    let take = |i: usize, used: &mut Vec<bool>, flags: &mut Vec<bool>| {
        if topology.type_links(i).iter().all(|&j| !used[j]) {
            flags[i] = true;
            for &j in topology.type_links(i) {
                used[j] = true;
            }
        }
    };
    for &i in &order {
        if queues[i] > 0 && topology.links_ready(i, link_state) {
            take(i, &mut used, &mut flags);
        }
    }
    for i in 0..m {
        take(i, &mut used, &mut flags);
    }

    let target = Matching::new(flags);
    let index = matchings
        .iter()
        .position(|c| *c == target)
        .expect("greedy completion is a maximal matching");
    decision(index, matchings, all_weights(link_state, queues, matchings, topology))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PolicyKind {
    #[default]
    MaxWeight,
    Random,
    LongestQueueFirst,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::MaxWeight => "maxweight",
            PolicyKind::Random => "random",
            PolicyKind::LongestQueueFirst => "lqf",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxweight" => Ok(PolicyKind::MaxWeight),
            "random" => Ok(PolicyKind::Random),
            "lqf" => Ok(PolicyKind::LongestQueueFirst),
            other => Err(Error::Argument(format!(
                "unknown policy `{other}` (expected maxweight, random or lqf)"
            ))),
        }
    }
}

/// A scheduling rule consulted once per slot.
pub trait Policy {
    fn decide(
        &mut self,
        link_state: &[bool],
        queues: &[u64],
        matchings: &[Matching],
        topology: &Topology,
    ) -> PolicyDecision;
}

pub struct MaxWeight;

impl Policy for MaxWeight {
    fn decide(&mut self, t: &[bool], q: &[u64], m: &[Matching], topo: &Topology) -> PolicyDecision {
        max_weight(t, q, m, topo)
    }
}

pub struct LongestQueueFirst;

impl Policy for LongestQueueFirst {
    fn decide(&mut self, t: &[bool], q: &[u64], m: &[Matching], topo: &Topology) -> PolicyDecision {
        longest_queue_first(t, q, m, topo)
    }
}

pub struct RandomMaximal<R> {
    pub rng: R,
}

impl<R: Rng> Policy for RandomMaximal<R> {
    fn decide(&mut self, t: &[bool], q: &[u64], m: &[Matching], topo: &Topology) -> PolicyDecision {
        baseline_random(t, q, m, topo, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::enumerate_maximal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fig1() -> Topology {
        Topology::new(
            vec![0.7, 0.8, 0.6],
            vec![0.9, 0.8, 0.7],
            vec![vec![0, 1], vec![1, 2], vec![0, 1, 2]],
        )
        .unwrap()
    }

    fn m(bits: &[u8]) -> Matching {
        Matching::from_bits(bits)
    }

    #[test]
    fn success_vector_examples() {
        let t = fig1();
        assert_eq!(
            success_vector(&[true, true, false], &m(&[1, 0, 0]), &t).unwrap(),
            vec![0.9, 0.0, 0.0]
        );
        assert_eq!(
            success_vector(&[true, true, false], &m(&[0, 1, 0]), &t).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
        for bits in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
            assert_eq!(
                success_vector(&[false; 3], &m(&bits), &t).unwrap(),
                vec![0.0; 3]
            );
        }
        assert!(success_vector(&[true], &m(&[1, 0, 0]), &t).is_err());
    }

    #[test]
    fn max_weight_examples() {
        let t = fig1();
        let ms = enumerate_maximal(&t).unwrap();
        // Candidates in order: (1,0,0), (0,1,0), (0,0,1).
        let d = max_weight(&[true; 3], &[5, 3, 2], &ms, &t);
        assert_eq!(d.chosen, m(&[1, 0, 0]));
        assert_eq!(d.weights, vec![4.5, 0.8 * 3.0, 0.7 * 2.0]);
        assert_eq!(d.weights[d.index], 4.5);

        let d = max_weight(&[true; 3], &[1, 10, 1], &ms, &t);
        assert_eq!(d.chosen, m(&[0, 1, 0]));
        assert_eq!(d.weights[d.index], 8.0);

        let d = max_weight(&[true; 3], &[0, 0, 0], &ms, &t);
        assert_eq!(d.weights[d.index], 0.0);
        // Smallest of the three tied candidates.
        assert_eq!(d.chosen, m(&[1, 0, 0]));
    }

    #[test]
    fn tie_break_ignores_candidate_order() {
        let t = fig1();
        let mut ms = enumerate_maximal(&t).unwrap();
        ms.reverse();
        let d = max_weight(&[true; 3], &[0, 0, 0], &ms, &t);
        assert_eq!(d.chosen, m(&[1, 0, 0]));
    }

    #[test]
    fn random_singleton() {
        let t = Topology::new(vec![0.5], vec![1.0], vec![vec![0]]).unwrap();
        let ms = enumerate_maximal(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(baseline_random(&[true], &[3], &ms, &t, &mut rng).index, 0);
        }
    }

    #[test]
    fn random_prefers_servable_matchings() {
        let t = fig1();
        let ms = enumerate_maximal(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // Only (1,0,0) selects the one nonempty queue.
        for _ in 0..1_000 {
            let d = baseline_random(&[true; 3], &[5, 0, 0], &ms, &t, &mut rng);
            assert_eq!(d.chosen, m(&[1, 0, 0]));
        }
        // Types 1 and 3 both waiting: (1,0,0) and (0,0,1) split evenly.
        let mut counts = [0usize; 3];
        let n = 20_000;
        for _ in 0..n {
            counts[baseline_random(&[true; 3], &[5, 0, 2], &ms, &t, &mut rng).index] += 1;
        }
        assert_eq!(counts[1], 0);
        for k in [0, 2] {
            let frac = counts[k] as f64 / n as f64;
            assert!((frac - 0.5).abs() < 0.02, "{frac}");
        }
    }

    #[test]
    fn random_fallback_is_uniform() {
        let t = fig1();
        let ms = enumerate_maximal(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts = [0usize; 3];
        let n = 30_000;
        for _ in 0..n {
            counts[baseline_random(&[false; 3], &[5, 5, 5], &ms, &t, &mut rng).index] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn lqf_serves_longest_ready_queue() {
        let t = fig1();
        let ms = enumerate_maximal(&t).unwrap();
        let d = longest_queue_first(&[true, true, false], &[1, 9, 4], &ms, &t);
        // Type 2 is longest but link 3 is down; type 1 is next and ready.
        assert_eq!(d.chosen, m(&[1, 0, 0]));
        let d = longest_queue_first(&[true; 3], &[1, 9, 4], &ms, &t);
        assert_eq!(d.chosen, m(&[0, 1, 0]));
    }

    #[test]
    fn policy_kind_parses() {
        assert_eq!("lqf".parse::<PolicyKind>().unwrap(), PolicyKind::LongestQueueFirst);
        assert!("greedy".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn monotone_selection_in_one_queue() {
        let t = fig1();
        let ms = enumerate_maximal(&t).unwrap();
        for i in 0..3 {
            let mut q = [4u64, 4, 4];
            let mut reached = false;
            for _ in 0..100 {
                q[i] += 1;
                let d = max_weight(&[true; 3], &q, &ms, &t);
                if d.chosen.selects(i) {
                    reached = true;
                } else {
                    assert!(!reached, "selection flipped away from type {i}");
                }
            }
            assert!(reached);
        }
    }
}
