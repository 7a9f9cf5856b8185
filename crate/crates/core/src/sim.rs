//! Discrete-time queue dynamics of the switch.
//!
//! Each slot: links generate Bell pairs, the policy picks a matching from
//! the current queues and link state, every type draws a swap outcome,
//! departures are applied, and only then are the slot's arrivals added.
//!
//! Randomness comes from ChaCha8 streams keyed by one master seed:
//! stream 0 draws arrivals, 1 link generation, 2 swap outcomes, 3 feeds
//! randomized policies and 4 thins the drift reservoir. Swapping the policy
//! leaves the environment's draws untouched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matching::{enumerate_maximal, Matching};
use crate::model::{validate, ArrivalLaw, ArrivalSpec, Topology};
use crate::scheduler::{LongestQueueFirst, MaxWeight, Policy, PolicyKind, RandomMaximal};

pub const STREAM_ARRIVALS: u64 = 0;
pub const STREAM_LINKS: u64 = 1;
pub const STREAM_SWAPS: u64 = 2;
pub const STREAM_POLICY: u64 = 3;
pub const STREAM_THINNING: u64 = 4;

/// The RNG for one stream of the master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchState {
    pub queues: Vec<u64>,
    pub slot: u64,
}

impl SwitchState {
    pub fn empty(num_types: usize) -> Self {
        SwitchState {
            queues: vec![0; num_types],
            slot: 0,
        }
    }
}

/// The exogenous randomness of one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotSample {
    pub link_state: Vec<bool>,
    pub swap_outcomes: Vec<bool>,
    pub arrivals: Vec<u64>,
}

impl SlotSample {
    pub fn zeroed(topology: &Topology) -> Self {
        SlotSample {
            link_state: vec![false; topology.num_links()],
            swap_outcomes: vec![false; topology.num_types()],
            arrivals: vec![0; topology.num_types()],
        }
    }
}

/// Advances the queues by one slot.
///
/// A type departs when it is selected, its queue is nonempty, all its
/// links hold Bell pairs and its swap succeeds. Arrivals are added after
/// departures, so they can only be served from the next slot on.
pub fn step(
    state: &SwitchState,
    sample: &SlotSample,
    chosen: &Matching,
    topology: &Topology,
) -> Result<(SwitchState, Vec<bool>)> {
    let m = topology.num_types();
    for (what, got) in [
        ("queues", state.queues.len()),
        ("swap outcomes", sample.swap_outcomes.len()),
        ("arrivals", sample.arrivals.len()),
        ("matching flags", chosen.len()),
    ] {
        if got != m {
            return Err(Error::LengthMismatch {
                what,
                expected: m,
                got,
            });
        }
    }
    if sample.link_state.len() != topology.num_links() {
        return Err(Error::LengthMismatch {
            what: "link state",
            expected: topology.num_links(),
            got: sample.link_state.len(),
        });
    }
    let mut next = state.clone();
    let mut departures = vec![false; m];
    advance(&mut next, sample, chosen, topology, &mut departures)?;
    Ok((next, departures))
}

#[inline]
fn advance(
    state: &mut SwitchState,
    sample: &SlotSample,
    chosen: &Matching,
    topology: &Topology,
    departures: &mut [bool],
) -> Result<()> {
    for i in 0..departures.len() {
        let served = sample.swap_outcomes[i]
            && chosen.selects(i)
            && state.queues[i] > 0
            && topology.links_ready(i, &sample.link_state);
        departures[i] = served;
        let q = state.queues[i] - u64::from(served);
        state.queues[i] = q
            .checked_add(sample.arrivals[i])
            .filter(|&v| v <= i64::MAX as u64)
            .ok_or(Error::QueueOverflow {
                type_index: i,
                slot: state.slot,
            })?;
    }
    state.slot += 1;
    Ok(())
}

/// Draws slot samples from the three environment streams.
pub struct SlotSampler {
    link_success: Vec<f64>,
    swap_success: Vec<f64>,
    rates: Vec<f64>,
    poisson: Vec<Option<Poisson<f64>>>,
    law: ArrivalLaw,
    arrivals_rng: ChaCha8Rng,
    links_rng: ChaCha8Rng,
    swaps_rng: ChaCha8Rng,
}

impl SlotSampler {
    pub fn new(topology: &Topology, arrivals: &ArrivalSpec, seed: u64) -> Self {
        let poisson = arrivals
            .rates()
            .iter()
            .map(|&r| {
                (arrivals.law() == ArrivalLaw::Poisson && r > 0.0)
                    .then(|| Poisson::new(r).expect("rate validated as finite and positive"))
            })
            .collect();
        SlotSampler {
            link_success: topology.link_success().to_vec(),
            swap_success: topology.swap_success().to_vec(),
            rates: arrivals.rates().to_vec(),
            poisson,
            law: arrivals.law(),
            arrivals_rng: stream_rng(seed, STREAM_ARRIVALS),
            links_rng: stream_rng(seed, STREAM_LINKS),
            swaps_rng: stream_rng(seed, STREAM_SWAPS),
        }
    }

    /// Every entry is drawn every slot, whatever the policy does with it.
    pub fn sample_into(&mut self, sample: &mut SlotSample) {
        for (t, &p) in sample.link_state.iter_mut().zip(&self.link_success) {
            *t = self.links_rng.random::<f64>() < p;
        }
        for (z, &q) in sample.swap_outcomes.iter_mut().zip(&self.swap_success) {
            *z = self.swaps_rng.random::<f64>() < q;
        }
        match self.law {
            ArrivalLaw::Bernoulli => {
                for (a, &r) in sample.arrivals.iter_mut().zip(&self.rates) {
                    *a = u64::from(self.arrivals_rng.random::<f64>() < r);
                }
            }
            ArrivalLaw::Poisson => {
                for (a, dist) in sample.arrivals.iter_mut().zip(&self.poisson) {
                    *a = match dist {
                        Some(d) => d.sample(&mut self.arrivals_rng) as u64,
                        None => 0,
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Starting queues; empty queues when `None`.
    pub initial_queues: Option<Vec<u64>>,
    /// Record `Q̄(n)` (and queue snapshots, if enabled) at every
    /// `series_stride`-th slot.
    pub series_stride: u64,
    pub record_queues: bool,
    /// Take a drift sample every `drift_stride` slots.
    pub drift_stride: u64,
    /// Reservoir size for drift samples.
    pub drift_capacity: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            initial_queues: None,
            series_stride: 1,
            record_queues: false,
            drift_stride: 1,
            drift_capacity: 1_000_000,
        }
    }
}

/// One observation of the Lyapunov function `V(Q) = Σ Q_i²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSample {
    /// `‖Q(n)‖`
    pub norm: f64,
    /// `V(Q(n+1)) - V(Q(n))`
    pub delta_v: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueSnapshot {
    pub slot: u64,
    pub queues: Vec<u64>,
    pub cumulative_departures: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub seed: u64,
    pub horizon: u64,
    pub policy: PolicyKind,
    pub series_stride: u64,
    /// `Q̄(n) = Σ_i Q_i(n) / M` for `n = stride, 2·stride, …, ≤ horizon`.
    pub qbar_series: Vec<f64>,
    pub queue_series: Vec<QueueSnapshot>,
    pub cumulative_departures: Vec<u64>,
    pub cumulative_arrivals: Vec<u64>,
    pub initial_state: SwitchState,
    pub final_state: SwitchState,
    pub drift_samples: Vec<DriftSample>,
    /// Samples offered to the reservoir, kept or not.
    pub drift_samples_seen: u64,
    /// Mean of `Q̄(n)` over `n = 1..=horizon`.
    pub mean_qbar: f64,
    /// Mean of `Q̄(n)` over `n = 1..=horizon/2`.
    pub mean_qbar_first_half: f64,
    /// Mean of `Q̄(n)` over `n = horizon/2+1..=horizon`.
    pub mean_qbar_second_half: f64,
}

impl SimTrace {
    /// Long-run departures per slot for each type.
    pub fn departure_rates(&self) -> Vec<f64> {
        self.cumulative_departures
            .iter()
            .map(|&d| d as f64 / self.horizon as f64)
            .collect()
    }

    /// `Q̄(slot)` if that slot was recorded.
    pub fn qbar_at(&self, slot: u64) -> Option<f64> {
        if slot == 0 || slot % self.series_stride != 0 {
            return None;
        }
        self.qbar_series.get((slot / self.series_stride - 1) as usize).copied()
    }

    /// Empirical `quantile` (in `[0, 1]`) of the visited norms `‖Q(n)‖`.
    pub fn norm_quantile(&self, quantile: f64) -> Option<f64> {
        if self.drift_samples.is_empty() {
            return None;
        }
        let mut norms: Vec<f64> = self.drift_samples.iter().map(|s| s.norm).collect();
        norms.sort_by(f64::total_cmp);
        let k = ((norms.len() - 1) as f64 * quantile.clamp(0.0, 1.0)).round() as usize;
        Some(norms[k])
    }
}

pub fn policy_for(kind: PolicyKind, seed: u64) -> Box<dyn Policy + Send> {
    match kind {
        PolicyKind::MaxWeight => Box::new(MaxWeight),
        PolicyKind::LongestQueueFirst => Box::new(LongestQueueFirst),
        PolicyKind::Random => Box::new(RandomMaximal {
            rng: stream_rng(seed, STREAM_POLICY),
        }),
    }
}

/// Simulates `horizon` slots under the named policy.
pub fn run(
    topology: &Topology,
    arrivals: &ArrivalSpec,
    policy: PolicyKind,
    horizon: u64,
    seed: u64,
    options: &SimOptions,
) -> Result<SimTrace> {
    let mut p = policy_for(policy, seed);
    let mut trace = run_with(topology, arrivals, p.as_mut(), horizon, seed, options)?;
    trace.policy = policy;
    Ok(trace)
}

/// Independent runs, one per seed, executed in parallel. Results keep the
/// order of `seeds`.
pub fn run_seeds(
    topology: &Topology,
    arrivals: &ArrivalSpec,
    policy: PolicyKind,
    horizon: u64,
    seeds: &[u64],
    options: &SimOptions,
) -> Result<Vec<SimTrace>> {
    seeds
        .par_iter()
        .map(|&s| run(topology, arrivals, policy, horizon, s, options))
        .collect()
}

/// Simulates `horizon` slots with a caller-supplied policy.
pub fn run_with(
    topology: &Topology,
    arrivals: &ArrivalSpec,
    policy: &mut dyn Policy,
    horizon: u64,
    seed: u64,
    options: &SimOptions,
) -> Result<SimTrace> {
    validate(topology, arrivals)?.into_result()?;
    if horizon == 0 {
        return Err(Error::Argument("horizon must be at least one slot".into()));
    }
    if options.series_stride == 0 || options.drift_stride == 0 {
        return Err(Error::Argument("strides must be positive".into()));
    }
    let m = topology.num_types();
    let initial = match &options.initial_queues {
        Some(q) if q.len() != m => {
            return Err(Error::LengthMismatch {
                what: "initial queues",
                expected: m,
                got: q.len(),
            })
        }
        Some(q) => SwitchState {
            queues: q.clone(),
            slot: 0,
        },
        None => SwitchState::empty(m),
    };

    let matchings = enumerate_maximal(topology)?;
    let mut sampler = SlotSampler::new(topology, arrivals, seed);
    let mut thinning = stream_rng(seed, STREAM_THINNING);
    let mut sample = SlotSample::zeroed(topology);
    let mut state = initial.clone();
    let mut departures = vec![false; m];

    let stride = options.series_stride;
    let mut qbar_series = Vec::with_capacity((horizon / stride) as usize);
    let mut queue_series = Vec::new();
    let mut cum_dep = vec![0u64; m];
    let mut cum_arr = vec![0u64; m];
    let mut drift_samples = Vec::with_capacity(options.drift_capacity.min(horizon as usize));
    let mut drift_seen = 0u64;
    let half = horizon / 2;
    let mut total_first: u128 = 0;
    let mut total_second: u128 = 0;

    for n in 0..horizon {
        sampler.sample_into(&mut sample);
        let decision = policy.decide(&sample.link_state, &state.queues, &matchings, topology);
        debug_assert!(crate::matching::is_feasible(decision.chosen.flags(), topology).unwrap());

        let before = (n % options.drift_stride == 0).then(|| state.queues.clone());

        advance(&mut state, &sample, &decision.chosen, topology, &mut departures)?;

        for i in 0..m {
            cum_dep[i] += u64::from(departures[i]);
            cum_arr[i] += sample.arrivals[i];
        }
        debug_assert!((0..m).all(|i| cum_dep[i] <= cum_arr[i] + initial.queues[i]));

        if let Some(prev) = before {
            let delta: i128 = prev
                .iter()
                .zip(&state.queues)
                .map(|(&a, &b)| {
                    let (a, b) = (a as i128, b as i128);
                    (b - a) * (b + a)
                })
                .sum();
            let norm_sq: f64 = prev.iter().map(|&q| (q as f64) * (q as f64)).sum();
            let s = DriftSample {
                norm: norm_sq.sqrt(),
                delta_v: delta as f64,
            };
            drift_seen += 1;
            if drift_samples.len() < options.drift_capacity {
                drift_samples.push(s);
            } else if options.drift_capacity > 0 {
                let k = thinning.random_range(0..drift_seen);
                if (k as usize) < options.drift_capacity {
                    drift_samples[k as usize] = s;
                }
            }
        }

        let slot = n + 1;
        let total: u128 = state.queues.iter().map(|&q| q as u128).sum();
        if slot <= half {
            total_first += total;
        } else {
            total_second += total;
        }
        if slot % stride == 0 {
            qbar_series.push(total as f64 / m as f64);
            if options.record_queues {
                queue_series.push(QueueSnapshot {
                    slot,
                    queues: state.queues.clone(),
                    cumulative_departures: cum_dep.clone(),
                });
            }
        }
    }

    let mean = |total: u128, slots: u64| {
        if slots == 0 {
            0.0
        } else {
            total as f64 / (slots as f64 * m as f64)
        }
    };
    Ok(SimTrace {
        seed,
        horizon,
        policy: PolicyKind::MaxWeight,
        series_stride: stride,
        qbar_series,
        queue_series,
        cumulative_departures: cum_dep,
        cumulative_arrivals: cum_arr,
        initial_state: initial,
        final_state: state,
        drift_samples,
        drift_samples_seen: drift_seen,
        mean_qbar: mean(total_first + total_second, horizon),
        mean_qbar_first_half: mean(total_first, half),
        mean_qbar_second_half: mean(total_second, horizon - half),
    })
}

/// Conditional mean drift over one band of `‖Q‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
    /// `None` for an empty bin.
    pub mean_drift: Option<f64>,
}

/// Splits the observed norm range into `bins` equal-width bands and averages
/// `V(Q(n+1)) - V(Q(n))` within each.
pub fn drift_summary(trace: &SimTrace, bins: usize) -> Result<Vec<DriftBin>> {
    if trace.drift_samples.is_empty() {
        return Err(Error::Argument("trace holds no drift samples".into()));
    }
    if bins == 0 {
        return Err(Error::Argument("need at least one bin".into()));
    }
    let (lo, hi) = trace
        .drift_samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.norm), hi.max(s.norm))
        });
    let bins = if hi > lo { bins } else { 1 };
    let width = (hi - lo) / bins as f64;
    let mut sums = vec![0.0f64; bins];
    let mut counts = vec![0u64; bins];
    for s in &trace.drift_samples {
        let k = if width > 0.0 {
            (((s.norm - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        sums[k] += s.delta_v;
        counts[k] += 1;
    }
    Ok((0..bins)
        .map(|k| DriftBin {
            lower: lo + width * k as f64,
            upper: if k + 1 == bins { hi } else { lo + width * (k + 1) as f64 },
            count: counts[k],
            mean_drift: (counts[k] > 0).then(|| sums[k] / counts[k] as f64),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Topology {
        Topology::new(
            vec![0.7, 0.8, 0.6],
            vec![0.9, 0.8, 0.7],
            vec![vec![0, 1], vec![1, 2], vec![0, 1, 2]],
        )
        .unwrap()
    }

    fn sample(t: [u8; 3], z: [u8; 3], a: [u64; 3]) -> SlotSample {
        SlotSample {
            link_state: t.iter().map(|&x| x == 1).collect(),
            swap_outcomes: z.iter().map(|&x| x == 1).collect(),
            arrivals: a.to_vec(),
        }
    }

    fn state(q: [u64; 3]) -> SwitchState {
        SwitchState {
            queues: q.to_vec(),
            slot: 0,
        }
    }

    #[test]
    fn step_serves_then_adds() {
        let (next, d) = step(
            &state([2, 1, 0]),
            &sample([1, 1, 1], [1, 1, 1], [0, 2, 1]),
            &Matching::from_bits(&[1, 0, 0]),
            &fig1(),
        )
        .unwrap();
        assert_eq!(d, vec![true, false, false]);
        assert_eq!(next.queues, vec![1, 3, 1]);
        assert_eq!(next.slot, 1);
    }

    #[test]
    fn step_empty_queue_guard() {
        let (next, d) = step(
            &state([0, 5, 0]),
            &sample([1, 1, 1], [1, 1, 1], [0, 0, 0]),
            &Matching::from_bits(&[1, 0, 0]),
            &fig1(),
        )
        .unwrap();
        assert_eq!(d, vec![false; 3]);
        assert_eq!(next.queues, vec![0, 5, 0]);
    }

    #[test]
    fn step_failed_swap() {
        let (next, d) = step(
            &state([3, 0, 0]),
            &sample([1, 1, 1], [0, 1, 1], [1, 0, 1]),
            &Matching::from_bits(&[1, 0, 0]),
            &fig1(),
        )
        .unwrap();
        assert_eq!(d, vec![false; 3]);
        assert_eq!(next.queues, vec![4, 0, 1]);
    }

    #[test]
    fn step_missing_link() {
        let (_, d) = step(
            &state([3, 0, 0]),
            &sample([1, 0, 1], [1, 1, 1], [0, 0, 0]),
            &Matching::from_bits(&[1, 0, 0]),
            &fig1(),
        )
        .unwrap();
        assert_eq!(d, vec![false; 3]);
    }

    #[test]
    fn step_arrivals_not_served_same_slot() {
        let (next, d) = step(
            &state([0, 0, 0]),
            &sample([1, 1, 1], [1, 1, 1], [1, 1, 1]),
            &Matching::from_bits(&[0, 0, 1]),
            &fig1(),
        )
        .unwrap();
        assert_eq!(d, vec![false; 3]);
        assert_eq!(next.queues, vec![1, 1, 1]);
    }

    #[test]
    fn step_overflow_is_an_error() {
        let err = step(
            &state([i64::MAX as u64, 0, 0]),
            &sample([0, 0, 0], [0, 0, 0], [1, 0, 0]),
            &Matching::from_bits(&[1, 0, 0]),
            &fig1(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::QueueOverflow { type_index: 0, .. }));
    }

    #[test]
    fn step_length_checks() {
        assert!(step(
            &state([0, 0, 0]),
            &sample([1, 1, 1], [1, 1, 1], [0, 0, 0]),
            &Matching::from_bits(&[1, 0]),
            &fig1(),
        )
        .is_err());
    }

    #[test]
    fn zero_rates_stay_empty() {
        let arr = ArrivalSpec::bernoulli(vec![0.0; 3]).unwrap();
        let tr = run(&fig1(), &arr, PolicyKind::MaxWeight, 5_000, 3, &SimOptions::default()).unwrap();
        assert_eq!(tr.mean_qbar, 0.0);
        assert!(tr.qbar_series.iter().all(|&x| x == 0.0));
        assert_eq!(tr.cumulative_departures, vec![0; 3]);
        let bins = drift_summary(&tr, 10).unwrap();
        assert_eq!(bins.len(), 1);
        assert_eq!(bins[0].count, 5_000);
        assert_eq!(bins[0].mean_drift, Some(0.0));
        assert_eq!(bins[0].lower, 0.0);
    }

    #[test]
    fn run_is_deterministic_and_seed_sensitive() {
        let arr = ArrivalSpec::bernoulli(vec![0.2, 0.15, 0.1]).unwrap();
        let o = SimOptions {
            record_queues: true,
            ..SimOptions::default()
        };
        let a = run(&fig1(), &arr, PolicyKind::MaxWeight, 20_000, 11, &o).unwrap();
        let b = run(&fig1(), &arr, PolicyKind::MaxWeight, 20_000, 11, &o).unwrap();
        let c = run(&fig1(), &arr, PolicyKind::MaxWeight, 20_000, 12, &o).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.qbar_series, c.qbar_series);
    }

    #[test]
    fn policies_share_the_environment() {
        // Arrival counts come from their own stream, so they match across policies.
        let arr = ArrivalSpec::bernoulli(vec![0.2, 0.15, 0.1]).unwrap();
        let o = SimOptions::default();
        let a = run(&fig1(), &arr, PolicyKind::MaxWeight, 10_000, 5, &o).unwrap();
        let b = run(&fig1(), &arr, PolicyKind::Random, 10_000, 5, &o).unwrap();
        let c = run(&fig1(), &arr, PolicyKind::LongestQueueFirst, 10_000, 5, &o).unwrap();
        assert_eq!(a.cumulative_arrivals, b.cumulative_arrivals);
        assert_eq!(a.cumulative_arrivals, c.cumulative_arrivals);
    }

    #[test]
    fn conservation_and_nonnegativity() {
        let arr = ArrivalSpec::new(vec![0.3, 0.3, 0.3], ArrivalLaw::Poisson).unwrap();
        let o = SimOptions {
            initial_queues: Some(vec![4, 0, 9]),
            record_queues: true,
            series_stride: 7,
            ..SimOptions::default()
        };
        let tr = run(&fig1(), &arr, PolicyKind::MaxWeight, 30_000, 2, &o).unwrap();
        for i in 0..3 {
            assert_eq!(
                tr.final_state.queues[i] + tr.cumulative_departures[i],
                tr.initial_state.queues[i] + tr.cumulative_arrivals[i]
            );
        }
        for snap in &tr.queue_series {
            assert_eq!(snap.slot % 7, 0);
        }
        assert_eq!(tr.qbar_series.len(), 30_000 / 7);
        assert_eq!(tr.qbar_at(14), Some(tr.qbar_series[1]));
        assert_eq!(tr.qbar_at(15), None);
    }

    #[test]
    fn poisson_mean_matches_rate() {
        let t = Topology::new(vec![1.0], vec![1.0], vec![vec![0]]).unwrap();
        let arr = ArrivalSpec::new(vec![0.6], ArrivalLaw::Poisson).unwrap();
        let tr = run(&t, &arr, PolicyKind::MaxWeight, 200_000, 8, &SimOptions::default()).unwrap();
        let rate = tr.cumulative_arrivals[0] as f64 / 200_000.0;
        assert!((rate - 0.6).abs() < 0.01, "{rate}");
    }

    #[test]
    fn reservoir_keeps_capacity() {
        let arr = ArrivalSpec::bernoulli(vec![0.2, 0.1, 0.1]).unwrap();
        let o = SimOptions {
            drift_capacity: 100,
            ..SimOptions::default()
        };
        let tr = run(&fig1(), &arr, PolicyKind::MaxWeight, 5_000, 1, &o).unwrap();
        assert_eq!(tr.drift_samples.len(), 100);
        assert_eq!(tr.drift_samples_seen, 5_000);
    }

    #[test]
    fn invalid_instance_refused() {
        let t = Topology::new(vec![0.0], vec![1.0], vec![vec![0]]).unwrap();
        let arr = ArrivalSpec::bernoulli(vec![0.1]).unwrap();
        assert!(matches!(
            run(&t, &arr, PolicyKind::MaxWeight, 10, 0, &SimOptions::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn drift_bins_mark_empty_bins_absent() {
        let mut tr = run(
            &fig1(),
            &ArrivalSpec::bernoulli(vec![0.0; 3]).unwrap(),
            PolicyKind::MaxWeight,
            1,
            0,
            &SimOptions::default(),
        )
        .unwrap();
        tr.drift_samples = vec![
            DriftSample { norm: 0.0, delta_v: 1.0 },
            DriftSample { norm: 0.0, delta_v: 3.0 },
            DriftSample { norm: 10.0, delta_v: -5.0 },
        ];
        let bins = drift_summary(&tr, 5).unwrap();
        assert_eq!(bins.len(), 5);
        assert_eq!(bins[0].mean_drift, Some(2.0));
        assert_eq!(bins[2].mean_drift, None);
        assert_eq!(bins[4].mean_drift, Some(-5.0));
        assert_eq!(bins[4].upper, 10.0);
    }
}
