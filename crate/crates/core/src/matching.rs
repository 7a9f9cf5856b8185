//! Maximal matchings: 0/1 selections of request types in which every link
//! serves at most one selected type and no unselected type can be added.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::Topology;

/// A selection flag per request type.
///
/// Matchings order lexicographically by their selected type indices, so a
/// selected flag sorts before an unselected one at the first difference:
/// `(1,0,0) < (0,1,0) < (0,0,1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching(Vec<bool>);

impl Ord for Matching {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for Matching {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Matching {
    pub fn new(flags: Vec<bool>) -> Self {
        Matching(flags)
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Matching(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn flags(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn selects(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i)
    }

    pub fn bits(&self) -> Vec<u8> {
        self.0.iter().map(|&f| u8::from(f)).collect()
    }
}

impl fmt::Display for Matching {
    /// Comma-separated 0/1 flags.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Per-link constraint: every link is used by at most one selected type.
/// Maximality is not checked.
pub fn is_feasible(flags: &[bool], topology: &Topology) -> Result<bool> {
    check_len(flags, topology)?;
    Ok(feasible_unchecked(flags, topology))
}

fn feasible_unchecked(flags: &[bool], topology: &Topology) -> bool {
    (0..topology.num_links()).all(|j| {
        topology
            .link_types(j)
            .iter()
            .filter(|&&i| flags[i])
            .count()
            <= 1
    })
}

/// Feasible and no unselected type can be switched on.
pub fn is_maximal(flags: &[bool], topology: &Topology) -> Result<bool> {
    check_len(flags, topology)?;
    if !feasible_unchecked(flags, topology) {
        return Ok(false);
    }
    let mut probe = flags.to_vec();
    for r in 0..flags.len() {
        if !flags[r] {
            probe[r] = true;
            let ok = feasible_unchecked(&probe, topology);
            probe[r] = false;
            if ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_len(flags: &[bool], topology: &Topology) -> Result<()> {
    if flags.len() != topology.num_types() {
        return Err(Error::LengthMismatch {
            what: "matching flags",
            expected: topology.num_types(),
            got: flags.len(),
        });
    }
    Ok(())
}

/// Limits on the `2^M` candidate space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    /// Warn when `M` exceeds this.
    pub warn_log2: u32,
    /// Refuse when `M` exceeds this.
    pub cap_log2: u32,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            warn_log2: 20,
            cap_log2: 32,
        }
    }
}

pub fn enumerate_maximal(topology: &Topology) -> Result<Vec<Matching>> {
    enumerate_maximal_with(topology, EnumerationBudget::default())
}

/// All maximal matchings, sorted by [`Matching`]'s order.
///
/// Branches over types in index order (select before skip, which yields
/// the sorted order directly), pruning any branch that would put two
/// types on one link, then filters the leaves for maximality.
pub fn enumerate_maximal_with(
    topology: &Topology,
    budget: EnumerationBudget,
) -> Result<Vec<Matching>> {
    let m = topology.num_types();
    if m as u64 > u64::from(budget.cap_log2) {
        return Err(Error::EnumerationCap {
            types: m,
            cap_log2: budget.cap_log2,
        });
    }
    if m as u64 > u64::from(budget.warn_log2) {
        log::warn!(
            "enumerating matchings over 2^{m} candidates (budget 2^{})",
            budget.warn_log2
        );
    }

    let mut search = Search {
        topology,
        used: vec![false; topology.num_links()],
        flags: vec![false; m],
        out: Vec::new(),
    };
    search.branch(0);
    Ok(search.out)
}

struct Search<'a> {
    topology: &'a Topology,
    used: Vec<bool>,
    flags: Vec<bool>,
    out: Vec<Matching>,
}

impl Search<'_> {
    fn fits(&self, i: usize) -> bool {
        self.topology.type_links(i).iter().all(|&j| !self.used[j])
    }

    fn branch(&mut self, i: usize) {
        if i == self.flags.len() {
            // Every unselected type must collide with a used link.
            let maximal = (0..self.flags.len()).all(|r| self.flags[r] || !self.fits(r));
            if maximal {
                self.out.push(Matching(self.flags.clone()));
            }
            return;
        }

        if self.fits(i) {
            self.flags[i] = true;
            for &j in self.topology.type_links(i) {
                self.used[j] = true;
            }
            self.branch(i + 1);
            for &j in self.topology.type_links(i) {
                self.used[j] = false;
            }
            self.flags[i] = false;
        }

        self.branch(i + 1);
    }
}
