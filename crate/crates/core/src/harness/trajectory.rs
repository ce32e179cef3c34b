//! Monte Carlo trajectories.
//!
//! One trajectory runs the forward query with sampled Pauli flips, undoes the
//! routing without noise, and scores the result by the fidelity of the query
//! registers (address and bus) against the ideal output, with every other
//! qubit traced out. Junk left inside the tree therefore only costs fidelity
//! when it is entangled with the query or leaks back into it, which is the
//! good-branch picture the bounds are built on.

use std::collections::HashMap;

use rand::Rng;
use thiserror::Error;

use crate::branch_state::{Amplitude, BasisWord, BranchError, BranchState, QubitId};
use crate::circuit::{Gate, Schedule};
use crate::noise::{Channel, CycleMode, NoiseModel, PauliKind, SlotSampler};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("noise model covers {found} levels, schedule needs {expected}")]
    Registry { expected: usize, found: usize },
    #[error("query register of {0} qubits does not fit a 64-bit key")]
    QueryTooWide(usize),
    #[error("noiseless run leaves qubit {0} entangled with the query")]
    NotDisentangled(QubitId),
    #[error("superposition over 2^{n} addresses exceeds the cap 2^{cap}")]
    TooManyBranches { n: u32, cap: u32 },
    #[error(transparent)]
    Branch(#[from] BranchError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum AddressMode {
    /// Equal superposition of every address.
    #[default]
    Superposition,
    /// One uniformly drawn basis address per trial. Phase flips only change a
    /// global phase here, so they are invisible.
    Basis,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialResult {
    pub fidelity: f64,
    pub event_count: u32,
}

/// Sampling plan for the qubits of one level that share a per-qubit rate:
/// ordered by first use, with the live count and running slot offset per
/// layer.
#[derive(Clone, Debug)]
struct LevelPlan {
    rate: f64,
    qubits: Vec<QubitId>,
    live: Vec<u32>,
    offsets: Vec<u64>,
    x: SlotSampler,
    z: SlotSampler,
}

#[derive(Clone, Copy, Debug)]
struct Event {
    layer: u32,
    qubit: QubitId,
    kind: PauliKind,
}

pub struct Simulator<'a> {
    schedule: &'a Schedule,
    noise: NoiseModel,
    mode: AddressMode,
    initial: Option<BranchState>,
    ideal: HashMap<u64, Amplitude>,
    garbage: Vec<(QubitId, bool)>,
    query: Vec<QubitId>,
    plans: Vec<LevelPlan>,
    cycles: Vec<u32>,
}

/// Largest depth simulated in superposition unless overridden.
pub const DEFAULT_SUPERPOSITION_CAP: u32 = 10;

impl<'a> Simulator<'a> {
    pub fn new(schedule: &'a Schedule, noise: NoiseModel, mode: AddressMode) -> Result<Self, SimError> {
        Self::with_cap(schedule, noise, mode, DEFAULT_SUPERPOSITION_CAP)
    }

    pub fn with_cap(schedule: &'a Schedule, noise: NoiseModel, mode: AddressMode, cap: u32) -> Result<Self, SimError> {
        let levels = schedule.n() as usize + 1;
        if noise.level_rates.len() < levels {
            return Err(SimError::Registry { expected: levels, found: noise.level_rates.len() });
        }
        let query = schedule.query_qubits();
        if query.len() > 64 {
            return Err(SimError::QueryTooWide(query.len()));
        }
        let reg = schedule.registry();
        let is_query: Vec<bool> = {
            let mut v = vec![false; reg.len()];
            query.iter().for_each(|q| v[q.index()] = true);
            v
        };
        let garbage: Vec<(QubitId, bool)> =
            (0..reg.len()).filter(|&q| !is_query[q]).map(|q| (QubitId::new(q), false)).collect();

        let mut sim = Simulator {
            schedule,
            noise,
            mode,
            initial: None,
            ideal: HashMap::new(),
            garbage,
            query,
            plans: Vec::new(),
            cycles: schedule.layers().iter().map(|l| l.code_cycles).collect(),
        };

        if mode == AddressMode::Superposition {
            if schedule.n() > cap {
                return Err(SimError::TooManyBranches { n: schedule.n(), cap });
            }
            let count = 1usize << schedule.n();
            let amp = Amplitude::new(1.0 / (count as f64).sqrt(), 0.0);
            let entries: Vec<(BasisWord, Amplitude)> = (0..count).map(|a| (schedule.input_word(a), amp)).collect();
            let initial = BranchState::new_superposition(&entries)?;

            let mut out = initial.clone();
            for layer in schedule.layers().iter().chain(schedule.retrieval()) {
                layer.gates.iter().for_each(|g| apply_gate(&mut out, g));
            }
            let full = full_mask(out.branch_count());
            for g in &mut sim.garbage {
                let col = out.column(g.0);
                let ones = col.iter().zip(&full).all(|(c, m)| c == m);
                let zeros = col.iter().all(|&c| c == 0);
                if !(ones || zeros) {
                    return Err(SimError::NotDisentangled(g.0));
                }
                g.1 = ones;
            }
            let keys = sim.query_keys(&out);
            sim.ideal = keys.iter().enumerate().map(|(i, &k)| (k, out.amplitude(i).conj())).collect();
            sim.initial = Some(initial);
        }

        sim.plans = sim.plan_levels();
        Ok(sim)
    }

    pub fn schedule(&self) -> &Schedule {
        self.schedule
    }

    pub fn mode(&self) -> AddressMode {
        self.mode
    }

    fn plan_levels(&self) -> Vec<LevelPlan> {
        let reg = self.schedule.registry();
        let layers = self.schedule.layers();
        let mut first = vec![usize::MAX; reg.len()];
        if self.noise.idle_before_first_use {
            first.iter_mut().for_each(|f| *f = 0);
        } else {
            for (t, layer) in layers.iter().enumerate() {
                for g in &layer.gates {
                    for q in g.support() {
                        first[q.index()] = first[q.index()].min(t);
                    }
                }
            }
        }

        let mut rails: HashMap<u32, u32> = HashMap::new();
        for t in reg.tags() {
            *rails.entry(t.carrier).or_default() += 1;
        }
        let share = |q: QubitId| {
            if self.noise.share_carrier_rate {
                rails[&reg.tag(q).carrier]
            } else {
                1
            }
        };

        let mut plans = Vec::new();
        for level in 0..=self.schedule.n() {
            let mut qubits: Vec<QubitId> = reg.qubits_at(level).filter(|q| first[q.index()] != usize::MAX).collect();
            qubits.sort_by_key(|&q| (share(q), first[q.index()], q.index()));
            for group in qubits.chunk_by(|&a, &b| share(a) == share(b)) {
                let rate = self.noise.rate(level) / share(group[0]) as f64;
                let mut live = Vec::with_capacity(layers.len());
                let mut offsets = vec![0u64];
                let mut j = 0;
                for (t, layer) in layers.iter().enumerate() {
                    while j < group.len() && first[group[j].index()] <= t {
                        j += 1;
                    }
                    live.push(j as u32);
                    offsets.push(offsets[t] + j as u64 * layer.code_cycles as u64);
                }
                let (px, pz) = self.noise.channel.split(rate);
                plans.push(LevelPlan {
                    rate,
                    qubits: group.to_vec(),
                    live,
                    offsets,
                    x: SlotSampler::new(px),
                    z: SlotSampler::new(pz),
                });
            }
        }
        plans
    }

    fn sample_events<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Event> {
        let mut events = Vec::new();
        match self.noise.cycle_mode {
            CycleMode::Rounds => {
                for plan in &self.plans {
                    let total = *plan.offsets.last().unwrap();
                    for (kind, sampler) in [(PauliKind::X, &plan.x), (PauliKind::Z, &plan.z)] {
                        sampler.for_each(rng, total, |pos| {
                            let t = plan.offsets.partition_point(|&o| o <= pos) - 1;
                            let within = pos - plan.offsets[t];
                            let qubit = plan.qubits[(within / self.cycles[t] as u64) as usize];
                            events.push(Event { layer: t as u32, qubit, kind });
                        });
                    }
                }
            }
            CycleMode::Aggregated => {
                for plan in &self.plans {
                    if plan.rate == 0.0 {
                        continue;
                    }
                    for (t, &live) in plan.live.iter().enumerate() {
                        let hit = 1.0 - (1.0 - plan.rate).powi(self.cycles[t] as i32);
                        let mut hits = Vec::new();
                        SlotSampler::new(hit).for_each(rng, live as u64, |i| hits.push(i));
                        for i in hits {
                            let kind = match self.noise.channel {
                                Channel::XOnly => PauliKind::X,
                                Channel::ZOnly => PauliKind::Z,
                                Channel::Symmetric if rng.gen::<bool>() => PauliKind::X,
                                Channel::Symmetric => PauliKind::Z,
                            };
                            events.push(Event { layer: t as u32, qubit: plan.qubits[i as usize], kind });
                        }
                    }
                }
            }
        }
        events.sort_by_key(|e| e.layer);
        events
    }

    pub fn run_trajectory<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialResult {
        let (mut state, address) = match &self.initial {
            Some(s) => (s.clone(), None),
            None => {
                let a = rng.gen_range(0..1usize << self.schedule.n());
                let s = BranchState::new_basis(&self.schedule.input_word(a)).expect("registry is nonempty");
                (s, Some(a))
            }
        };
        let events = self.sample_events(rng);

        let mut e = 0;
        for (t, layer) in self.schedule.layers().iter().enumerate() {
            layer.gates.iter().for_each(|g| apply_gate(&mut state, g));
            while e < events.len() && events[e].layer as usize == t {
                let ev = events[e];
                match ev.kind {
                    PauliKind::X => state.x_unchecked(ev.qubit),
                    PauliKind::Z => state.z_unchecked(ev.qubit),
                }
                e += 1;
            }
        }
        for layer in self.schedule.retrieval() {
            layer.gates.iter().for_each(|g| apply_gate(&mut state, g));
        }

        let fidelity = match address {
            None => self.fidelity(&state),
            Some(a) => {
                let mut want = self.schedule.input_word(a);
                let bus = self.schedule.bus();
                let bit = self.schedule.database().get(a);
                want.set(bus.zero.index(), !bit);
                want.set(bus.one.index(), bit);
                let got = state.word(0);
                let same = self.query.iter().all(|q| got.get(q.index()) == want.get(q.index()));
                if same {
                    1.0
                } else {
                    0.0
                }
            }
        };
        TrialResult { fidelity, event_count: events.len() as u32 }
    }

    fn query_keys(&self, state: &BranchState) -> Vec<u64> {
        let mut keys = vec![0u64; state.branch_count()];
        for (j, &q) in self.query.iter().enumerate() {
            for_each_set(state.column(q), |i| keys[i] |= 1 << j);
        }
        keys
    }

    /// Fidelity of the query registers with the ideal output, garbage traced
    /// out: branches are grouped by their deviation from the ideal garbage and
    /// the overlaps of the groups are added in quadrature.
    fn fidelity(&self, state: &BranchState) -> f64 {
        let keys = self.query_keys(state);
        let full = full_mask(state.branch_count());
        let mut diff_cols: Vec<Vec<u64>> = Vec::new();
        for &(q, ones) in &self.garbage {
            let col = state.column(q);
            if col.iter().zip(&full).any(|(&c, &m)| if ones { c != m } else { c != 0 }) {
                diff_cols.push(col.iter().zip(&full).map(|(&c, &m)| if ones { c ^ m } else { c }).collect());
            }
        }
        let overlap = |i: usize| -> Amplitude {
            self.ideal.get(&keys[i]).map_or(Amplitude::new(0.0, 0.0), |c| c * state.amplitude(i))
        };

        let f = if diff_cols.is_empty() {
            (0..state.branch_count()).map(overlap).sum::<Amplitude>().norm_sqr()
        } else {
            let words = diff_cols.len().div_ceil(64);
            let mut gkeys = vec![0u64; state.branch_count() * words];
            for (j, col) in diff_cols.iter().enumerate() {
                for_each_set(col, |i| gkeys[i * words + j / 64] |= 1 << (j % 64));
            }
            let mut groups: HashMap<&[u64], Amplitude> = HashMap::new();
            for i in 0..state.branch_count() {
                *groups.entry(&gkeys[i * words..(i + 1) * words]).or_default() += overlap(i);
            }
            groups.values().map(|g| g.norm_sqr()).sum()
        };
        f.clamp(0.0, 1.0)
    }
}

fn full_mask(branches: usize) -> Vec<u64> {
    let stride = branches.div_ceil(64);
    let mut m = vec![u64::MAX; stride];
    if !branches.is_multiple_of(64) {
        m[stride - 1] = (1u64 << (branches % 64)) - 1;
    }
    m
}

fn for_each_set(col: &[u64], mut f: impl FnMut(usize)) {
    for (w, &bits) in col.iter().enumerate() {
        let mut b = bits;
        while b != 0 {
            f(w * 64 + b.trailing_zeros() as usize);
            b &= b - 1;
        }
    }
}

/// Applies one gate without operand checks; schedules are validated when
/// they are built.
pub(crate) fn apply_gate(state: &mut BranchState, g: &Gate) {
    match *g {
        Gate::Swap { a, b } => state.swap_unchecked(a, b),
        Gate::CSwap { control, a, b } => state.cswap_unchecked(&[control], a, b),
        Gate::CCSwap { controls, a, b } => state.cswap_unchecked(&controls, a, b),
        Gate::X { target } => state.x_unchecked(target),
        Gate::ClassicalCx { data_bit, target } => {
            if data_bit {
                state.x_unchecked(target)
            }
        }
    }
}

/// Checked gate application for callers holding arbitrary states.
pub fn apply(state: &mut BranchState, g: &Gate) -> Result<(), BranchError> {
    match *g {
        Gate::Swap { a, b } => state.apply_swap(a, b),
        Gate::CSwap { control, a, b } => state.apply_cswap(&[control], a, b),
        Gate::CCSwap { controls, a, b } => state.apply_cswap(&controls, a, b),
        Gate::X { target } => state.apply_x(target),
        Gate::ClassicalCx { data_bit, target } => state.apply_classical_cx(data_bit, target),
    }
}

/// Noiseless classical query: the data bit left in the bus register after
/// the forward pass and retrieval, or `None` if the register is malformed.
pub fn classical_query(schedule: &Schedule, address: usize) -> Option<(usize, bool)> {
    let mut s = BranchState::new_basis(&schedule.input_word(address)).ok()?;
    for layer in schedule.layers().iter().chain(schedule.retrieval()) {
        layer.gates.iter().for_each(|g| apply_gate(&mut s, g));
    }
    schedule.read_query(&s.word(0))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::circuit::{
        build, AddressCarrier, Architecture, BuildOptions, BusRails, Database, Draft, Registry, Role, RouterKind,
    };
    use crate::noise::{CycleCost, DistanceProfile, ProfileKind};

    /// Address bit plus a bus whose rails are swapped once.
    fn one_layer() -> Schedule {
        let mut reg = Registry::default();
        let a = reg.carrier(0, 0, &[Role::Address], false, true)[0];
        let bus = BusRails::from_pair(&reg.carrier(0, 0, &[Role::Bus, Role::Bus], false, true));
        Schedule::assemble(Draft {
            architecture: Architecture::UniformBb,
            router_kind: RouterKind::Qubit,
            n: 1,
            profile: DistanceProfile::new(ProfileKind::Uniform(1), 1).unwrap(),
            cost: CycleCost::default(),
            registry: reg,
            routing: vec![vec![Gate::Swap { a: bus.zero, b: bus.one }]],
            database: Database::zeros(1),
            address: vec![AddressCarrier::Bit(a)],
            bus,
            leaves: vec![bus, bus],
        })
        .unwrap()
    }

    #[test]
    fn noiseless_runs_are_perfect() {
        for arch in Architecture::ALL {
            let opts = if arch.is_heterogeneous() { BuildOptions::hetero() } else { BuildOptions::uniform(3) };
            let s = build(arch, RouterKind::Qutrit, 3, &Database::ones(3), opts).unwrap();
            for mode in [AddressMode::Superposition, AddressMode::Basis] {
                let sim = Simulator::new(&s, NoiseModel::noiseless(3), mode).unwrap();
                let r = sim.run_trajectory(&mut ChaCha8Rng::seed_from_u64(1));
                assert_eq!(r, TrialResult { fidelity: 1.0, event_count: 0 });
            }
        }
    }

    #[test]
    fn certain_bit_flip_is_orthogonal() {
        let s = one_layer();
        assert_eq!(s.layers().len(), 1);
        assert_eq!(s.layers()[0].code_cycles, 1);
        let mut noise = NoiseModel::constant(1.0, 1);
        noise.channel = Channel::XOnly;
        noise.share_carrier_rate = false;
        let sim = Simulator::new(&s, noise, AddressMode::Basis).unwrap();
        let r = sim.run_trajectory(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(r.event_count, 2);
        assert_eq!(r.fidelity, 0.0);
    }

    #[test]
    fn phase_flips_only_show_in_superposition() {
        let s = one_layer();
        let mut noise = NoiseModel::constant(1.0, 1);
        noise.channel = Channel::ZOnly;
        noise.share_carrier_rate = false;
        noise.idle_before_first_use = true;
        let basis = Simulator::new(&s, noise.clone(), AddressMode::Basis).unwrap();
        assert_eq!(basis.run_trajectory(&mut ChaCha8Rng::seed_from_u64(0)).fidelity, 1.0);
        let sup = Simulator::new(&s, noise, AddressMode::Superposition).unwrap();
        let r = sup.run_trajectory(&mut ChaCha8Rng::seed_from_u64(0));
        // Z on the address qubit maps |+⟩ to |−⟩.
        assert_eq!(r.event_count, 3);
        assert!(r.fidelity < 1e-12);
    }

    #[test]
    fn superposition_cap_and_rate_table_are_enforced() {
        let s =
            build(Architecture::BbHetero, RouterKind::Qubit, 4, &Database::zeros(4), BuildOptions::hetero()).unwrap();
        assert_eq!(
            Simulator::with_cap(&s, NoiseModel::noiseless(4), AddressMode::Superposition, 3).err(),
            Some(SimError::TooManyBranches { n: 4, cap: 3 })
        );
        assert!(Simulator::with_cap(&s, NoiseModel::noiseless(4), AddressMode::Basis, 3).is_ok());
        assert_eq!(
            Simulator::new(&s, NoiseModel::noiseless(2), AddressMode::Basis).err(),
            Some(SimError::Registry { expected: 5, found: 3 })
        );
    }

    #[test]
    fn classical_query_matches_lookup() {
        let db = Database::new(2, vec![false, true, true, false]).unwrap();
        let s = build(Architecture::FtHetero, RouterKind::Qubit, 2, &db, BuildOptions::hetero()).unwrap();
        for a in 0..4 {
            assert_eq!(classical_query(&s, a), Some((a, db.get(a))));
        }
    }
}
