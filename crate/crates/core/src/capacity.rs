//! Capacity-region membership through a linear program.
//!
//! A rate vector `λ` is stabilizable when some per-link-state mixture of
//! matchings serves every type at least at its arrival rate. We maximize
//! the scaling `ρ` such that `ρ·λ` is still served:
//!
//! ```text
//! maximize ρ
//!   Σ_{a≠0} P(a) Σ_π b[a,π] r_i(a,π) ≥ ρ λ_i     for every type i
//!   Σ_π b[a,π] ≤ 1                                for every state a ≠ 0
//!   b ≥ 0,  0 ≤ ρ ≤ RHO_CAP
//! ```
//!
//! The optimum is taken over the closure of the region; `ρ* > 1` certifies
//! that `λ` is an interior point. Link states that cannot serve any type
//! and (state, matching) pairs with zero service are left out of the
//! program, which does not change its optimum.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matching::{enumerate_maximal, Matching};
use crate::model::Topology;
use crate::simplex::{self, Constraint, LinearProgram, LpOutcome, Relation, SimplexOptions};

/// Upper bound on `ρ`; only reached when no type has positive demand.
pub const RHO_CAP: f64 = 1e9;
/// Largest link count accepted by [`build_lp`].
pub const MAX_LP_LINKS: usize = 12;
/// Largest dense tableau (rows × columns) the solver will allocate.
pub const MAX_TABLEAU_CELLS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    /// Bit `j` set when link `j` holds a Bell pair.
    pub mask: u64,
    pub probability: f64,
}

/// One LP column: the weight of matching `matching` under state `state`.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceColumn {
    pub state: usize,
    pub matching: usize,
    /// `r_i(a, π)` for every type.
    pub service: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityLP {
    pub rates: Vec<f64>,
    pub num_links: usize,
    /// Nonzero states able to serve at least one type.
    pub states: Vec<LinkState>,
    pub matchings: Vec<Matching>,
    pub columns: Vec<ServiceColumn>,
    /// `Σ P(a)` over all `2^K` states, including pruned ones.
    pub total_state_probability: f64,
}

/// Probability of link state `mask` when links are independent.
pub fn state_probability(mask: u64, link_success: &[f64]) -> f64 {
    link_success
        .iter()
        .enumerate()
        .map(|(j, &p)| if mask >> j & 1 == 1 { p } else { 1.0 - p })
        .product()
}

pub fn build_lp(topology: &Topology, rates: &[f64]) -> Result<CapacityLP> {
    let k = topology.num_links();
    let m = topology.num_types();
    if rates.len() != m {
        return Err(Error::LengthMismatch {
            what: "arrival rates",
            expected: m,
            got: rates.len(),
        });
    }
    if let Some(r) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(Error::Arrivals(format!("rate {r} must be finite and nonnegative")));
    }
    if k > MAX_LP_LINKS {
        return Err(Error::LpTooLarge {
            links: k,
            cap: MAX_LP_LINKS,
        });
    }

    let matchings = enumerate_maximal(topology)?;
    let masks: Vec<u64> = (0..m).map(|i| topology.type_mask(i)).collect();
    let q = topology.swap_success();

    let mut states = Vec::new();
    let mut columns = Vec::new();
    let mut total = 0.0;
    for mask in 0..(1u64 << k) {
        let prob = state_probability(mask, topology.link_success());
        total += prob;
        if mask == 0 || prob == 0.0 {
            continue;
        }
        let state_index = states.len();
        let mut any = false;
        for (mi, pi) in matchings.iter().enumerate() {
            let service: Vec<f64> = (0..m)
                .map(|i| {
                    if pi.selects(i) && mask & masks[i] == masks[i] {
                        q[i]
                    } else {
                        0.0
                    }
                })
                .collect();
            if service.iter().any(|&r| r > 0.0) {
                any = true;
                columns.push(ServiceColumn {
                    state: state_index,
                    matching: mi,
                    service,
                });
            }
        }
        if any {
            states.push(LinkState {
                mask,
                probability: prob,
            });
        }
    }

    let lp = CapacityLP {
        rates: rates.to_vec(),
        num_links: k,
        states,
        matchings,
        columns,
        total_state_probability: total,
    };
    let cells = (lp.columns.len() + lp.states.len() + 2 * m + 2)
        * (lp.states.len() + m + 1);
    if cells > MAX_TABLEAU_CELLS {
        return Err(Error::LpTooLarge {
            links: k,
            cap: MAX_LP_LINKS,
        });
    }
    Ok(lp)
}

impl CapacityLP {
    pub fn num_types(&self) -> usize {
        self.rates.len()
    }

    /// Index of `ρ` in the variable vector; mixture weights come first.
    pub fn rho_index(&self) -> usize {
        self.columns.len()
    }

    /// Served rate of each type under mixture `b` (one weight per column).
    pub fn service_rates(&self, b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_types()];
        for (col, &w) in self.columns.iter().zip(b) {
            let p = self.states[col.state].probability;
            for (o, &r) in out.iter_mut().zip(&col.service) {
                *o += p * w * r;
            }
        }
        out
    }

    /// Demand rows first (one per type), then one budget row per state,
    /// then the cap on `ρ`.
    pub fn program(&self) -> LinearProgram {
        let n = self.columns.len() + 1;
        let rho = self.rho_index();
        let mut constraints = Vec::with_capacity(self.num_types() + self.states.len() + 1);
        for i in 0..self.num_types() {
            let mut coeffs = vec![0.0; n];
            for (c, col) in self.columns.iter().enumerate() {
                coeffs[c] = self.states[col.state].probability * col.service[i];
            }
            coeffs[rho] = -self.rates[i];
            constraints.push(Constraint {
                coeffs,
                relation: Relation::Ge,
                rhs: 0.0,
            });
        }
        for s in 0..self.states.len() {
            let mut coeffs = vec![0.0; n];
            for (c, col) in self.columns.iter().enumerate() {
                if col.state == s {
                    coeffs[c] = 1.0;
                }
            }
            constraints.push(Constraint {
                coeffs,
                relation: Relation::Le,
                rhs: 1.0,
            });
        }
        let mut coeffs = vec![0.0; n];
        coeffs[rho] = 1.0;
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Le,
            rhs: RHO_CAP,
        });
        let mut objective = vec![0.0; n];
        objective[rho] = 1.0;
        LinearProgram {
            objective,
            constraints,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Zero threshold inside the simplex.
    pub pivot: f64,
    /// Half-width of the band around `ρ* = 1` classified as boundary.
    pub verdict: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pivot: 1e-9,
            verdict: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Interior,
    Boundary,
    Exterior,
}

impl Verdict {
    pub fn classify(rho_star: f64, tolerance: f64) -> Verdict {
        if rho_star > 1.0 + tolerance {
            Verdict::Interior
        } else if rho_star < 1.0 - tolerance {
            Verdict::Exterior
        } else {
            Verdict::Boundary
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Interior => "Interior",
            Verdict::Boundary => "Boundary",
            Verdict::Exterior => "Exterior",
        })
    }
}

/// A positive mixture weight `b[a, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessEntry {
    pub state_mask: u64,
    pub matching: Matching,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub rho_star: f64,
    pub verdict: Verdict,
    /// Weight per LP column, aligned with [`CapacityLP::columns`].
    pub mixture: Vec<f64>,
    /// The nonzero entries of `mixture`, keyed by state and matching.
    pub witness: Vec<WitnessEntry>,
    pub iterations: usize,
}

pub fn solve(lp: &CapacityLP, tolerances: &Tolerances) -> Result<CapacityResult> {
    if !(tolerances.pivot > 0.0 && tolerances.verdict > 0.0) {
        return Err(Error::Argument("tolerances must be positive".into()));
    }
    let program = lp.program();
    let opts = SimplexOptions {
        pivot_tolerance: tolerances.pivot,
        ..SimplexOptions::default()
    };
    let solution = match simplex::solve(&program, &opts)? {
        LpOutcome::Optimal(s) => s,
        // b = 0, ρ = 0 is always feasible and ρ is capped.
        LpOutcome::Infeasible => return Err(Error::LpStatus("infeasible")),
        LpOutcome::Unbounded => return Err(Error::LpStatus("unbounded")),
    };
    let rho_star = solution.x[lp.rho_index()];
    let mixture = solution.x[..lp.rho_index()].to_vec();
    let witness = lp
        .columns
        .iter()
        .zip(&mixture)
        .filter(|(_, &w)| w > 0.0)
        .map(|(col, &w)| WitnessEntry {
            state_mask: lp.states[col.state].mask,
            matching: lp.matchings[col.matching].clone(),
            weight: w,
        })
        .collect();
    Ok(CapacityResult {
        rho_star,
        verdict: Verdict::classify(rho_star, tolerances.verdict),
        mixture,
        witness,
        iterations: solution.iterations,
    })
}

/// Builds and solves in one call.
pub fn capacity(topology: &Topology, rates: &[f64], tolerances: &Tolerances) -> Result<CapacityResult> {
    solve(&build_lp(topology, rates)?, tolerances)
}

/// The scalar a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Every link generation probability set to the value.
    AllLinks,
    Link(usize),
    /// Every swap probability set to the value.
    AllSwaps,
    Swap(usize),
    /// Rates multiplied by the value.
    RateScale,
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    /// `p`, `p:J`, `q`, `q:I` (0-based) or `scale`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Argument(format!("unknown sweep parameter `{s}` (expected p, p:J, q, q:I or scale)"));
        match s.split_once(':') {
            None => match s {
                "p" => Ok(SweepParameter::AllLinks),
                "q" => Ok(SweepParameter::AllSwaps),
                "scale" => Ok(SweepParameter::RateScale),
                _ => Err(bad()),
            },
            Some((kind, idx)) => {
                let idx: usize = idx.parse().map_err(|_| bad())?;
                match kind {
                    "p" => Ok(SweepParameter::Link(idx)),
                    "q" => Ok(SweepParameter::Swap(idx)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepParameter::AllLinks => write!(f, "p"),
            SweepParameter::Link(j) => write!(f, "p:{j}"),
            SweepParameter::AllSwaps => write!(f, "q"),
            SweepParameter::Swap(i) => write!(f, "q:{i}"),
            SweepParameter::RateScale => write!(f, "scale"),
        }
    }
}

/// The instance obtained by setting `parameter` to `value`.
pub fn apply_parameter(
    topology: &Topology,
    rates: &[f64],
    parameter: SweepParameter,
    value: f64,
) -> Result<(Topology, Vec<f64>)> {
    Ok(match parameter {
        SweepParameter::AllLinks => (topology.with_uniform_link_success(value)?, rates.to_vec()),
        SweepParameter::Link(j) => (topology.with_link_success(j, value)?, rates.to_vec()),
        SweepParameter::AllSwaps => {
            let mut t = topology.clone();
            for i in 0..t.num_types() {
                t = t.with_swap_success(i, value)?;
            }
            (t, rates.to_vec())
        }
        SweepParameter::Swap(i) => (topology.with_swap_success(i, value)?, rates.to_vec()),
        SweepParameter::RateScale => {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::Argument(format!("rate scale {value} must be nonnegative")));
            }
            (topology.clone(), rates.iter().map(|r| r * value).collect())
        }
    })
}

#[derive(Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub result: Result<CapacityResult>,
}

#[derive(Debug)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub points: Vec<SweepPoint>,
    /// Parameter value where `ρ*` crosses 1, located by bisection between
    /// the first pair of adjacent grid points that bracket it.
    pub crossing: Option<f64>,
}

/// Solves the LP at every grid value (in parallel) and brackets the
/// `ρ* = 1` crossing to within `resolution`. A failing point is recorded
/// and does not stop the sweep.
pub fn sweep_scalar(
    topology: &Topology,
    rates: &[f64],
    parameter: SweepParameter,
    grid: &[f64],
    tolerances: &Tolerances,
    resolution: f64,
) -> Result<SweepTable> {
    if !(resolution > 0.0) {
        return Err(Error::Argument("crossing resolution must be positive".into()));
    }
    let eval = |v: f64| -> Result<CapacityResult> {
        let (t, r) = apply_parameter(topology, rates, parameter, v)?;
        capacity(&t, &r, tolerances)
    };
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|&value| SweepPoint {
            value,
            result: eval(value),
        })
        .collect();

    let mut crossing = None;
    for w in points.windows(2) {
        let (Ok(a), Ok(b)) = (&w[0].result, &w[1].result) else {
            continue;
        };
        let (fa, fb) = (a.rho_star - 1.0, b.rho_star - 1.0);
        if fa == 0.0 {
            crossing = Some(w[0].value);
            break;
        }
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi) = (w[0].value, w[1].value);
            let lo_sign = fa.signum();
            while (hi - lo).abs() > resolution {
                let mid = 0.5 * (lo + hi);
                let f = eval(mid)?.rho_star - 1.0;
                if f == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if f.signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            crossing = Some(0.5 * (lo + hi));
            break;
        }
    }
    Ok(SweepTable {
        parameter,
        points,
        crossing,
    })
}

/// `n` evenly spaced values from `start` to `end` inclusive.
pub fn linear_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (end - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
