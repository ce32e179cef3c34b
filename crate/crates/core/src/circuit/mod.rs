//! Layered query circuits for the four QRAM layouts.
//!
//! A [`Schedule`] is a list of parallel layers (pairwise disjoint gate
//! supports) together with the qubit registry that tags every qubit with its
//! tree level and role. Each layer carries its code-cycle cost: the widest
//! code distance any of its gates touches times the per-distance step cost of
//! that gate.
//!
//! Besides the forward query, every schedule carries the noiseless
//! *retrieval* sequence that routes the data-carrying bus and the address back
//! out of the tree; fidelity is evaluated after it.

mod bucket;
mod dump;
mod fat_tree;
mod layering;
mod walker;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branch_state::{BasisWord, Control, QubitId};
use crate::noise::{CycleCost, DistanceProfile, NoiseError, ProfileKind};

pub use bucket::{build_bb_hetero, build_uniform_bb};
pub use dump::{dump_layers, parse_dump, DumpError};
pub use fat_tree::build_ft_hetero;
pub use walker::{build_walker, park_gates, s_mirror, s_operator, WalkerMode};

/// Largest tree depth the builders accept.
pub const MAX_DEPTH: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("tree depth {0} outside 1..={MAX_DEPTH}")]
    Depth(u32),
    #[error("database has {found} entries, expected {expected}")]
    DatabaseLength { expected: usize, found: usize },
    #[error("{0} requires a uniform distance profile")]
    NeedsUniform(Architecture),
    #[error("level {level} outside 0..={n}")]
    Level { level: u32, n: u32 },
    #[error("invalid layer {layer}: {reason}")]
    InvalidLayer { layer: usize, reason: String },
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Architecture {
    #[serde(rename = "uniform-bb")]
    UniformBb,
    #[serde(rename = "ft-hetero")]
    FtHetero,
    #[serde(rename = "bb-hetero")]
    BbHetero,
    #[serde(rename = "walker")]
    Walker,
}

impl Architecture {
    pub const ALL: [Architecture; 4] =
        [Architecture::UniformBb, Architecture::FtHetero, Architecture::BbHetero, Architecture::Walker];

    pub fn is_heterogeneous(self) -> bool {
        matches!(self, Architecture::FtHetero | Architecture::BbHetero)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::UniformBb => "uniform-bb",
            Architecture::FtHetero => "ft-hetero",
            Architecture::BbHetero => "bb-hetero",
            Architecture::Walker => "walker",
        })
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.to_string() == s.trim())
            .ok_or_else(|| format!("unknown architecture {s:?}"))
    }
}

/// Qubit routers hold one direction bit; qutrit routers add an active bit so
/// an unset router (the wait state) routes nothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RouterKind {
    #[serde(rename = "qubit")]
    Qubit,
    #[serde(rename = "qutrit")]
    Qutrit,
}

impl fmt::Display for RouterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RouterKind::Qubit => "qubit",
            RouterKind::Qutrit => "qutrit",
        })
    }
}

impl FromStr for RouterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "qubit" => Ok(RouterKind::Qubit),
            "qutrit" => Ok(RouterKind::Qutrit),
            other => Err(format!("unknown router kind {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    Swap { a: QubitId, b: QubitId },
    CSwap { control: Control, a: QubitId, b: QubitId },
    CCSwap { controls: [Control; 2], a: QubitId, b: QubitId },
    X { target: QubitId },
    ClassicalCx { data_bit: bool, target: QubitId },
}

impl Gate {
    /// Controlled swap with one or two controls.
    pub fn controlled_swap(controls: &[Control], a: QubitId, b: QubitId) -> Gate {
        match *controls {
            [control] => Gate::CSwap { control, a, b },
            [c0, c1] => Gate::CCSwap { controls: [c0, c1], a, b },
            _ => panic!("controlled swap takes one or two controls"),
        }
    }

    pub fn support(&self) -> impl Iterator<Item = QubitId> {
        let mut ops = [None; 4];
        match *self {
            Gate::Swap { a, b } => {
                ops[0] = Some(a);
                ops[1] = Some(b);
            }
            Gate::CSwap { control, a, b } => {
                ops[0] = Some(control.qubit);
                ops[1] = Some(a);
                ops[2] = Some(b);
            }
            Gate::CCSwap { controls, a, b } => {
                ops[0] = Some(controls[0].qubit);
                ops[1] = Some(controls[1].qubit);
                ops[2] = Some(a);
                ops[3] = Some(b);
            }
            Gate::X { target } | Gate::ClassicalCx { target, .. } => ops[0] = Some(target),
        }
        ops.into_iter().flatten()
    }

    /// Qubits the gate only reads.
    pub fn controls(&self) -> impl Iterator<Item = QubitId> {
        let c = match *self {
            Gate::CSwap { control, .. } => [Some(control.qubit), None],
            Gate::CCSwap { controls, .. } => [Some(controls[0].qubit), Some(controls[1].qubit)],
            _ => [None, None],
        };
        c.into_iter().flatten()
    }

    /// Qubits the gate may change.
    pub fn targets(&self) -> impl Iterator<Item = QubitId> {
        let t = match *self {
            Gate::Swap { a, b } | Gate::CSwap { a, b, .. } | Gate::CCSwap { a, b, .. } => [Some(a), Some(b)],
            Gate::X { target } | Gate::ClassicalCx { target, .. } => [Some(target), None],
        };
        t.into_iter().flatten()
    }

    pub fn is_controlled(&self) -> bool {
        matches!(self, Gate::CSwap { .. } | Gate::CCSwap { .. })
    }

    /// Code cycles this gate takes at distance `d`.
    pub fn cycles(&self, cost: CycleCost, d: u32) -> u32 {
        if self.is_controlled() {
            cost.c * d
        } else {
            cost.s * d
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer {
    pub gates: Vec<Gate>,
    pub code_cycles: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Address,
    Bus,
    RouterDirection,
    RouterActive,
    Walker,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitTag {
    pub level: u32,
    /// Index of the tree node within its level.
    pub node: u32,
    pub role: Role,
    /// Logical carrier; the two qubits of one encoded qutrit share it.
    pub carrier: u32,
    /// False for the external address and bus registers of bucket-brigade
    /// trees, which sit in front of the root.
    pub in_tree: bool,
    /// Part of the query output (address register or bus register).
    pub query: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Registry {
    tags: Vec<QubitTag>,
    carriers: u32,
}

impl Registry {
    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tag(&self, q: QubitId) -> &QubitTag {
        &self.tags[q.index()]
    }

    pub fn tags(&self) -> &[QubitTag] {
        &self.tags
    }

    /// Allocates one logical carrier made of `roles.len()` qubits.
    pub(crate) fn carrier(
        &mut self,
        level: u32,
        node: u32,
        roles: &[Role],
        in_tree: bool,
        query: bool,
    ) -> Vec<QubitId> {
        let carrier = self.carriers;
        self.carriers += 1;
        roles
            .iter()
            .map(|&role| {
                self.tags.push(QubitTag { level, node, role, carrier, in_tree, query });
                QubitId::new(self.tags.len() - 1)
            })
            .collect()
    }

    /// Distinct in-tree logical carriers at `level`.
    pub fn logical_count(&self, level: u32) -> usize {
        self.tags.iter().filter(|t| t.in_tree && t.level == level).map(|t| t.carrier).collect::<HashSet<_>>().len()
    }

    pub fn qubits_at(&self, level: u32) -> impl Iterator<Item = QubitId> + '_ {
        self.tags.iter().enumerate().filter(move |(_, t)| t.level == level).map(|(i, _)| QubitId::new(i))
    }
}

/// One classical bit per leaf.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Database {
    bits: Vec<bool>,
}

impl Database {
    pub fn new(n: u32, bits: Vec<bool>) -> Result<Self, CircuitError> {
        let expected = 1usize << n;
        if bits.len() != expected {
            return Err(CircuitError::DatabaseLength { expected, found: bits.len() });
        }
        Ok(Database { bits })
    }

    pub fn zeros(n: u32) -> Self {
        Database { bits: vec![false; 1 << n] }
    }

    pub fn ones(n: u32) -> Self {
        Database { bits: vec![true; 1 << n] }
    }

    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Self {
        Database { bits: (0..1usize << n).map(|_| rng.gen()).collect() }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, address: usize) -> bool {
        self.bits[address]
    }
}

/// How one address bit is written into the input register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddressCarrier {
    /// Plain qubit holding the bit.
    Bit(QubitId),
    /// Presence qubit plus value qubit; an occupied slot has `present = 1`.
    Flagged { present: QubitId, value: QubitId },
    /// One-hot walker colour: bit 0 is blue, bit 1 is red.
    Colour { red: QubitId, blue: QubitId },
}

impl AddressCarrier {
    pub fn rails(&self) -> Vec<QubitId> {
        match *self {
            AddressCarrier::Bit(v) => vec![v],
            AddressCarrier::Flagged { present, value } => vec![present, value],
            AddressCarrier::Colour { red, blue } => vec![red, blue],
        }
    }

    fn write(&self, word: &mut BasisWord, bit: bool) {
        match *self {
            AddressCarrier::Bit(v) => word.set(v.index(), bit),
            AddressCarrier::Flagged { present, value } => {
                word.set(present.index(), true);
                word.set(value.index(), bit);
            }
            AddressCarrier::Colour { red, blue } => {
                word.set(red.index(), bit);
                word.set(blue.index(), !bit);
            }
        }
    }

    fn read(&self, word: &BasisWord) -> Option<bool> {
        match *self {
            AddressCarrier::Bit(v) => Some(word.get(v.index())),
            AddressCarrier::Flagged { present, value } => word.get(present.index()).then(|| word.get(value.index())),
            AddressCarrier::Colour { red, blue } => match (word.get(red.index()), word.get(blue.index())) {
                (true, false) => Some(true),
                (false, true) => Some(false),
                _ => None,
            },
        }
    }
}

/// Dual-rail bus: `(zero, one)`; exactly one rail is set when occupied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BusRails {
    pub zero: QubitId,
    pub one: QubitId,
}

impl BusRails {
    pub(crate) fn from_pair(q: &[QubitId]) -> Self {
        BusRails { zero: q[0], one: q[1] }
    }

    pub fn rails(&self) -> [QubitId; 2] {
        [self.zero, self.one]
    }

    /// Swapping the rails of an occupied bus flips its value and leaves an
    /// empty one empty, which makes it the leaf data copy.
    pub(crate) fn copy_gate(&self) -> Gate {
        Gate::Swap { a: self.zero, b: self.one }
    }
}

#[derive(Clone, Debug)]
pub struct Schedule {
    architecture: Architecture,
    router_kind: RouterKind,
    n: u32,
    profile: DistanceProfile,
    cost: CycleCost,
    registry: Registry,
    layers: Vec<Layer>,
    retrieval: Vec<Layer>,
    database: Database,
    address: Vec<AddressCarrier>,
    bus: BusRails,
}

/// Everything a builder hands to [`Schedule::assemble`].
pub(crate) struct Draft {
    pub architecture: Architecture,
    pub router_kind: RouterKind,
    pub n: u32,
    pub profile: DistanceProfile,
    pub cost: CycleCost,
    pub registry: Registry,
    pub routing: Vec<Vec<Gate>>,
    pub database: Database,
    pub address: Vec<AddressCarrier>,
    pub bus: BusRails,
    /// Leaf bus per address.
    pub leaves: Vec<BusRails>,
}

impl Schedule {
    pub(crate) fn assemble(d: Draft) -> Result<Schedule, CircuitError> {
        let copy: Vec<Gate> =
            d.leaves.iter().zip(d.database.bits()).filter(|(_, &bit)| bit).map(|(leaf, _)| leaf.copy_gate()).collect();

        let cycles_of = |gates: &[Gate]| -> Result<u32, CircuitError> {
            let mut worst = 0;
            for g in gates {
                let mut dist = 0;
                for q in g.support() {
                    dist = dist.max(d.profile.distance(d.registry.tag(q).level)?);
                }
                worst = worst.max(g.cycles(d.cost, dist));
            }
            Ok(worst.max(1))
        };

        let mut routing = Vec::with_capacity(d.routing.len());
        for gates in d.routing.into_iter().filter(|g| !g.is_empty()) {
            let code_cycles = cycles_of(&gates)?;
            routing.push(Layer { gates, code_cycles });
        }
        let retrieval: Vec<Layer> = routing
            .iter()
            .rev()
            .map(|l| Layer { gates: l.gates.iter().rev().copied().collect(), code_cycles: l.code_cycles })
            .collect();
        let mut layers = routing;
        if !copy.is_empty() {
            let code_cycles = cycles_of(&copy)?;
            layers.push(Layer { gates: copy, code_cycles });
        }

        let schedule = Schedule {
            architecture: d.architecture,
            router_kind: d.router_kind,
            n: d.n,
            profile: d.profile,
            cost: d.cost,
            registry: d.registry,
            layers,
            retrieval,
            database: d.database,
            address: d.address,
            bus: d.bus,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Checks that operands are registered and distinct within a gate, and
    /// that within a layer no qubit is written twice or both read and
    /// written. Several gates may read the same control.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let width = self.registry.len();
        for (i, layer) in self.layers.iter().chain(&self.retrieval).enumerate() {
            let invalid = |reason: String| Err(CircuitError::InvalidLayer { layer: i, reason });
            let mut written = HashSet::new();
            let mut read = HashSet::new();
            for g in &layer.gates {
                let mut own = HashSet::new();
                for q in g.support() {
                    if q.index() >= width {
                        return invalid(format!("{q} not registered"));
                    }
                    if !own.insert(q) {
                        return invalid(format!("{q} repeated within a gate"));
                    }
                }
                for q in g.targets() {
                    if !written.insert(q) || read.contains(&q) {
                        return invalid(format!("{q} used twice"));
                    }
                }
                for q in g.controls() {
                    if written.contains(&q) {
                        return invalid(format!("{q} used twice"));
                    }
                    read.insert(q);
                }
            }
            if layer.code_cycles == 0 {
                return Err(CircuitError::InvalidLayer { layer: i, reason: "zero cost".into() });
            }
        }
        Ok(())
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn router_kind(&self) -> RouterKind {
        self.router_kind
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn profile(&self) -> &DistanceProfile {
        &self.profile
    }

    pub fn cost(&self) -> CycleCost {
        self.cost
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Noiseless inverse of the routing layers (the data copy is not undone).
    pub fn retrieval(&self) -> &[Layer] {
        &self.retrieval
    }

    pub fn database(&self) -> &Database {
        &self.database
    }

    pub fn bus(&self) -> BusRails {
        self.bus
    }

    pub fn address_carriers(&self) -> &[AddressCarrier] {
        &self.address
    }

    /// Query output qubits: address register then bus register.
    pub fn query_qubits(&self) -> Vec<QubitId> {
        let mut q: Vec<QubitId> = self.address.iter().flat_map(|c| c.rails()).collect();
        q.extend(self.bus.rails());
        q
    }

    pub fn total_cycles(&self) -> u64 {
        self.layers.iter().map(|l| l.code_cycles as u64).sum()
    }

    /// Input word for a basis address; bit `k` of the address (most
    /// significant first) steers level `k`.
    pub fn input_word(&self, address: usize) -> BasisWord {
        let mut w = BasisWord::zeros(self.registry.len());
        let n = self.n as usize;
        for (k, c) in self.address.iter().enumerate() {
            c.write(&mut w, (address >> (n - 1 - k)) & 1 == 1);
        }
        w.set(self.bus.zero.index(), true);
        w
    }

    /// Decodes `(address, data)` from the query registers of a word, if they
    /// hold a well-formed query.
    pub fn read_query(&self, word: &BasisWord) -> Option<(usize, bool)> {
        let mut address = 0usize;
        for c in &self.address {
            address = (address << 1) | c.read(word)? as usize;
        }
        match (word.get(self.bus.zero.index()), word.get(self.bus.one.index())) {
            (true, false) => Some((address, false)),
            (false, true) => Some((address, true)),
            _ => None,
        }
    }

    /// Code cycles from the first layer that touches the routers of `level`
    /// (or, for the leaf level, any of its qubits) to the end of the forward
    /// schedule.
    pub fn measured_coherence_cycles(&self, level: u32) -> Result<u64, CircuitError> {
        if level > self.n {
            return Err(CircuitError::Level { level, n: self.n });
        }
        let watched: HashSet<QubitId> = {
            let routers: HashSet<QubitId> = self
                .registry
                .qubits_at(level)
                .filter(|&q| {
                    let t = self.registry.tag(q);
                    t.in_tree && matches!(t.role, Role::RouterDirection | Role::RouterActive)
                })
                .collect();
            if routers.is_empty() {
                self.registry.qubits_at(level).filter(|&q| self.registry.tag(q).in_tree).collect()
            } else {
                routers
            }
        };
        let first = self.layers.iter().position(|l| l.gates.iter().any(|g| g.support().any(|q| watched.contains(&q))));
        Ok(first.map_or(0, |t| self.layers[t..].iter().map(|l| l.code_cycles as u64).sum()))
    }
}

/// Build-time knobs shared by all layouts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub cost: CycleCost,
    pub profile: ProfileKind,
}

impl BuildOptions {
    pub fn hetero() -> Self {
        BuildOptions { cost: CycleCost::default(), profile: ProfileKind::Linear }
    }

    pub fn uniform(d: u32) -> Self {
        BuildOptions { cost: CycleCost::default(), profile: ProfileKind::Uniform(d) }
    }
}

pub(crate) fn check_depth(n: u32) -> Result<(), CircuitError> {
    if !(1..=MAX_DEPTH).contains(&n) {
        return Err(CircuitError::Depth(n));
    }
    Ok(())
}

pub(crate) fn check_database(n: u32, db: &Database) -> Result<(), CircuitError> {
    let expected = 1usize << n;
    if db.bits().len() != expected {
        return Err(CircuitError::DatabaseLength { expected, found: db.bits().len() });
    }
    Ok(())
}

/// Dispatches to the right builder.
pub fn build(
    architecture: Architecture,
    router_kind: RouterKind,
    n: u32,
    database: &Database,
    options: BuildOptions,
) -> Result<Schedule, CircuitError> {
    match architecture {
        Architecture::UniformBb => build_uniform_bb(n, router_kind, database, options),
        Architecture::FtHetero => build_ft_hetero(n, router_kind, database, options),
        Architecture::BbHetero => build_bb_hetero(n, router_kind, database, options),
        Architecture::Walker => build_walker(n, database, options),
    }
}

/// Router operand sets for both encodings.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Router {
    Qubit(QubitId),
    Qutrit { active: QubitId, dir: QubitId },
}

impl Router {
    pub(crate) fn alloc(reg: &mut Registry, kind: RouterKind, level: u32, node: u32) -> Router {
        match kind {
            RouterKind::Qubit => Router::Qubit(reg.carrier(level, node, &[Role::RouterDirection], true, false)[0]),
            RouterKind::Qutrit => {
                let q = reg.carrier(level, node, &[Role::RouterActive, Role::RouterDirection], true, false);
                Router::Qutrit { active: q[0], dir: q[1] }
            }
        }
    }

    pub(crate) fn controls(&self, right: bool) -> Vec<Control> {
        match *self {
            Router::Qubit(r) => vec![Control { qubit: r, polarity: right }],
            Router::Qutrit { active, dir } => vec![Control::on(active), Control { qubit: dir, polarity: right }],
        }
    }

    /// Moves an address carrier into the router.
    pub(crate) fn set_gates(&self, carrier: &AddressCarrier) -> Vec<Gate> {
        match (*self, *carrier) {
            (Router::Qubit(r), AddressCarrier::Bit(v)) => vec![Gate::Swap { a: v, b: r }],
            (Router::Qutrit { active, dir }, AddressCarrier::Flagged { present, value }) => {
                vec![Gate::Swap { a: present, b: active }, Gate::Swap { a: value, b: dir }]
            }
            _ => unreachable!("router and carrier encodings always match"),
        }
    }
}

pub(crate) fn alloc_address(
    reg: &mut Registry,
    kind: RouterKind,
    level: u32,
    node: u32,
    in_tree: bool,
    query: bool,
) -> AddressCarrier {
    match kind {
        RouterKind::Qubit => AddressCarrier::Bit(reg.carrier(level, node, &[Role::Address], in_tree, query)[0]),
        RouterKind::Qutrit => {
            let q = reg.carrier(level, node, &[Role::Address, Role::Address], in_tree, query);
            AddressCarrier::Flagged { present: q[0], value: q[1] }
        }
    }
}

pub(crate) fn alloc_bus(reg: &mut Registry, level: u32, node: u32, in_tree: bool, query: bool) -> BusRails {
    BusRails::from_pair(&reg.carrier(level, node, &[Role::Bus, Role::Bus], in_tree, query))
}
