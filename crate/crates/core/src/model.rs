//! Switch topology, request types and arrival processes.
//!
//! A switch has `K` links, each producing one Bell pair per slot with
//! probability `p_j`, and `M` request types. Type `i` needs Bell pairs on
//! every link of its set `L_i` in the same slot, and the swap that merges
//! them succeeds with probability `q_i`. Indices are 0-based everywhere in
//! the API; human-facing output renders them 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    link_success: Vec<f64>,
    swap_success: Vec<f64>,
    type_links: Vec<Vec<usize>>,
    /// `link_types[j]` is the set of types that need link `j`.
    link_types: Vec<Vec<usize>>,
    user_labels: Option<Vec<String>>,
}

impl Topology {
    /// Builds a topology from per-link generation probabilities, per-type
    /// swap probabilities and per-type link sets.
    ///
    /// Link sets are sorted and deduplicated. Two types with the same link
    /// set and swap probability are accepted (they keep separate queues) but
    /// logged as a warning.
    pub fn new(
        link_success: Vec<f64>,
        swap_success: Vec<f64>,
        type_links: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let num_links = link_success.len();
        if num_links == 0 {
            return Err(Error::Topology("at least one link is required".into()));
        }
        if swap_success.is_empty() {
            return Err(Error::Topology("at least one request type is required".into()));
        }
        if type_links.len() != swap_success.len() {
            return Err(Error::LengthMismatch {
                what: "type link sets",
                expected: swap_success.len(),
                got: type_links.len(),
            });
        }
        for (j, &p) in link_success.iter().enumerate() {
            check_probability(p).map_err(|m| Error::Topology(format!("p[{j}] {m}")))?;
        }
        for (i, &q) in swap_success.iter().enumerate() {
            check_probability(q).map_err(|m| Error::Topology(format!("q[{i}] {m}")))?;
        }

        let mut normalized = Vec::with_capacity(type_links.len());
        for (i, links) in type_links.into_iter().enumerate() {
            if links.is_empty() {
                return Err(Error::Topology(format!("type {i} has an empty link set")));
            }
            if let Some(&bad) = links.iter().find(|&&j| j >= num_links) {
                return Err(Error::Topology(format!(
                    "type {i} references link {bad}, but there are only {num_links} links"
                )));
            }
            let mut links = links;
            links.sort_unstable();
            links.dedup();
            normalized.push(links);
        }

        let mut link_types = vec![Vec::new(); num_links];
        for (i, links) in normalized.iter().enumerate() {
            for &j in links {
                link_types[j].push(i);
            }
        }

        let topology = Topology {
            link_success,
            swap_success,
            type_links: normalized,
            link_types,
            user_labels: None,
        };
        for (a, b) in topology.duplicate_types() {
            log::warn!(
                "request types {} and {} are identical; they are kept as distinct queues",
                a + 1,
                b + 1
            );
        }
        Ok(topology)
    }

    pub fn with_user_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.num_links() {
            return Err(Error::LengthMismatch {
                what: "user labels",
                expected: self.num_links(),
                got: labels.len(),
            });
        }
        self.user_labels = Some(labels);
        Ok(self)
    }

    pub fn num_links(&self) -> usize {
        self.link_success.len()
    }

    pub fn num_types(&self) -> usize {
        self.swap_success.len()
    }

    pub fn link_success(&self) -> &[f64] {
        &self.link_success
    }

    pub fn swap_success(&self) -> &[f64] {
        &self.swap_success
    }

    /// Links required by type `i` (sorted).
    pub fn type_links(&self, i: usize) -> &[usize] {
        &self.type_links[i]
    }

    /// Types that require link `j` (sorted).
    pub fn link_types(&self, j: usize) -> &[usize] {
        &self.link_types[j]
    }

    pub fn user_labels(&self) -> Option<&[String]> {
        self.user_labels.as_deref()
    }

    /// Users sharing the end-to-end state of type `i`. One user hangs off
    /// each link, so this is the label of every link in `L_i`.
    pub fn type_users(&self, i: usize) -> Vec<String> {
        self.type_links[i]
            .iter()
            .map(|&j| match &self.user_labels {
                Some(labels) => labels[j].clone(),
                None => format!("u{}", j + 1),
            })
            .collect()
    }

    /// Pairs `(a, b)`, `a < b`, of types with equal link sets and swap
    /// probabilities.
    pub fn duplicate_types(&self) -> Vec<(usize, usize)> {
        let m = self.num_types();
        let mut pairs = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                if self.type_links[a] == self.type_links[b]
                    && self.swap_success[a] == self.swap_success[b]
                {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }

    /// Bitmask of the links in `L_i`. Only meaningful for `K <= 64`.
    pub fn type_mask(&self, i: usize) -> u64 {
        self.type_links[i].iter().fold(0u64, |m, &j| m | (1 << j))
    }

    /// Whether every link of type `i` holds a Bell pair in `link_state`.
    #[inline]
    pub fn links_ready(&self, i: usize, link_state: &[bool]) -> bool {
        self.type_links[i].iter().all(|&j| link_state[j])
    }

    /// Returns a copy with every link probability replaced by `p`.
    pub fn with_uniform_link_success(&self, p: f64) -> Result<Self> {
        let mut t = self.clone();
        check_probability(p).map_err(|m| Error::Topology(format!("p {m}")))?;
        t.link_success.iter_mut().for_each(|x| *x = p);
        Ok(t)
    }

    pub fn with_link_success(&self, j: usize, p: f64) -> Result<Self> {
        let mut t = self.clone();
        check_probability(p).map_err(|m| Error::Topology(format!("p[{j}] {m}")))?;
        *t.link_success
            .get_mut(j)
            .ok_or_else(|| Error::Topology(format!("no link {j}")))? = p;
        Ok(t)
    }

    pub fn with_swap_success(&self, i: usize, q: f64) -> Result<Self> {
        let mut t = self.clone();
        check_probability(q).map_err(|m| Error::Topology(format!("q[{i}] {m}")))?;
        *t.swap_success
            .get_mut(i)
            .ok_or_else(|| Error::Topology(format!("no type {i}")))? = q;
        Ok(t)
    }

    /// Topology restricted to the given types, in the given order.
    pub fn subset_types(&self, types: &[usize]) -> Result<Self> {
        let q = types.iter().map(|&i| self.swap_success[i]).collect();
        let l = types.iter().map(|&i| self.type_links[i].clone()).collect();
        let t = Topology::new(self.link_success.clone(), q, l)?;
        Ok(Topology {
            user_labels: self.user_labels.clone(),
            ..t
        })
    }
}

fn check_probability(x: f64) -> std::result::Result<(), String> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(format!("= {x} is not a probability in [0, 1]"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalLaw {
    #[default]
    Bernoulli,
    Poisson,
}

impl fmt::Display for ArrivalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArrivalLaw::Bernoulli => "bernoulli",
            ArrivalLaw::Poisson => "poisson",
        })
    }
}

/// Per-type i.i.d. arrival process with mean `rates[i]` requests per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalSpec {
    rates: Vec<f64>,
    law: ArrivalLaw,
}

impl ArrivalSpec {
    pub fn new(rates: Vec<f64>, law: ArrivalLaw) -> Result<Self> {
        for (i, &r) in rates.iter().enumerate() {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::Arrivals(format!(
                    "rate[{i}] = {r} must be finite and nonnegative"
                )));
            }
            if law == ArrivalLaw::Bernoulli && r > 1.0 {
                return Err(Error::Arrivals(format!(
                    "rate[{i}] = {r} exceeds 1, impossible for Bernoulli arrivals"
                )));
            }
        }
        Ok(ArrivalSpec { rates, law })
    }

    pub fn bernoulli(rates: Vec<f64>) -> Result<Self> {
        Self::new(rates, ArrivalLaw::Bernoulli)
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn law(&self) -> ArrivalLaw {
        self.law
    }

    /// Same law with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.rates.iter().map(|r| r * factor).collect(), self.law)
    }
}

/// Outcome of the irreducibility precondition check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// Types with positive demand that no link state and matching can
    /// ever serve.
    pub unservable: Vec<usize>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.unservable.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::Validation(self.unservable))
        }
    }
}

/// Checks that every type with positive demand can be served in some slot.
///
/// Any single type extends to a maximal matching, so a type is servable
/// exactly when its swap probability and all of its link probabilities are
/// positive.
pub fn validate(topology: &Topology, arrivals: &ArrivalSpec) -> Result<ValidationReport> {
    if arrivals.rates().len() != topology.num_types() {
        return Err(Error::LengthMismatch {
            what: "arrival rates",
            expected: topology.num_types(),
            got: arrivals.rates().len(),
        });
    }
    let unservable = (0..topology.num_types())
        .filter(|&i| arrivals.rates()[i] > 0.0)
        .filter(|&i| {
            topology.swap_success()[i] <= 0.0
                || topology
                    .type_links(i)
                    .iter()
                    .any(|&j| topology.link_success()[j] <= 0.0)
        })
        .collect();
    Ok(ValidationReport { unservable })
}
