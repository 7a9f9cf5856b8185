#![allow(dead_code)]

use qswitch::matching::Matching;
use qswitch::model::Topology;
use rand::seq::index::sample;
use rand::Rng;

/// All subsets of types, kept if link-disjoint and maximal, in
/// [`Matching`] order.
pub fn brute_force_matchings(topo: &Topology) -> Vec<Matching> {
    let m = topo.num_types();
    let masks: Vec<u64> = (0..m).map(|i| topo.type_mask(i)).collect();
    let mut out = Vec::new();
    for subset in 0u32..(1 << m) {
        let mut used = 0u64;
        let mut feasible = true;
        for (i, &mask) in masks.iter().enumerate() {
            if subset >> i & 1 == 1 {
                if used & mask != 0 {
                    feasible = false;
                    break;
                }
                used |= mask;
            }
        }
        if !feasible {
            continue;
        }
        let maximal = (0..m).all(|i| subset >> i & 1 == 1 || used & masks[i] != 0);
        if maximal {
            out.push(Matching::new((0..m).map(|i| subset >> i & 1 == 1).collect()));
        }
    }
    out.sort();
    out
}

/// Each type draws a nonempty link set of size 1..=min(3, K).
pub fn random_topology<R: Rng>(rng: &mut R, max_links: usize, max_types: usize) -> Topology {
    let k = rng.random_range(1..=max_links);
    let m = rng.random_range(1..=max_types);
    let p: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..=1.0)).collect();
    let q: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..=1.0)).collect();
    let links: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let size = rng.random_range(1..=k.min(3));
            sample(rng, k, size).into_vec()
        })
        .collect();
    Topology::new(p, q, links).expect("generated topology is valid")
}

pub fn fig1_topology() -> Topology {
    Topology::new(
        vec![0.7, 0.8, 0.6],
        vec![0.9, 0.8, 0.7],
        vec![vec![0, 1], vec![1, 2], vec![0, 1, 2]],
    )
    .unwrap()
}
