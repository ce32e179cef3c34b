//! Quantum-walker tree.
//!
//! Every mode is a qutrit `{φ, B, R}` stored one-hot on a red and a blue
//! rail, with φ = both rails clear. A node has a *site* mode, which plays the
//! router, and a *travel* mode that walkers pass through. Address walkers are
//! injected at the root, hop down through already-occupied sites and park in
//! the first empty one with the hop operator Ŝ followed by its colour mirror,
//! which leaves the site holding the opposite colour. A site holding R sends
//! later walkers left; one holding B sends them right. Empty sites route
//! nothing, so the tree is passive until the walkers arrive.

use super::layering::Layering;
use super::{
    alloc_bus, check_database, check_depth, AddressCarrier, Architecture, BuildOptions, BusRails, CircuitError,
    Database, Draft, Gate, Registry, Role, RouterKind, Schedule,
};
use crate::branch_state::{Control, QubitId};
use crate::noise::{DistanceProfile, ProfileKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkerMode {
    pub red: QubitId,
    pub blue: QubitId,
}

impl WalkerMode {
    fn alloc(reg: &mut Registry, level: u32, node: u32, role: Role, in_tree: bool, query: bool) -> Self {
        let q = reg.carrier(level, node, &[role, role], in_tree, query);
        WalkerMode { red: q[0], blue: q[1] }
    }

    fn rails(&self) -> [QubitId; 2] {
        [self.red, self.blue]
    }
}

/// Ŝ exchanging `|φ⟩_x|B⟩_y ↔ |R⟩_x|φ⟩_y` and fixing every other encoded pair.
///
/// On the rails this is a swap of `y.blue` with `x.red`, allowed only while
/// `x.blue` and `y.red` are clear.
pub fn s_operator(x: WalkerMode, y: WalkerMode) -> Gate {
    Gate::CCSwap { controls: [Control::off(x.blue), Control::off(y.red)], a: y.blue, b: x.red }
}

/// Ŝ with the colours exchanged: `|φ⟩_x|R⟩_y ↔ |B⟩_x|φ⟩_y`.
pub fn s_mirror(x: WalkerMode, y: WalkerMode) -> Gate {
    Gate::CCSwap { controls: [Control::off(x.red), Control::off(y.blue)], a: y.red, b: x.blue }
}

/// Moves a walker from travel mode `travel` into the empty `site`, inverting
/// its colour.
pub fn park_gates(site: WalkerMode, travel: WalkerMode) -> [Gate; 2] {
    [s_operator(site, travel), s_mirror(site, travel)]
}

pub fn build_walker(n: u32, database: &Database, options: BuildOptions) -> Result<Schedule, CircuitError> {
    check_depth(n)?;
    check_database(n, database)?;
    if !matches!(options.profile, ProfileKind::Uniform(_)) {
        return Err(CircuitError::NeedsUniform(Architecture::Walker));
    }
    let profile = DistanceProfile::new(options.profile, n)?;

    let mut reg = Registry::default();
    let inputs: Vec<WalkerMode> =
        (0..n).map(|_| WalkerMode::alloc(&mut reg, 0, 0, Role::Walker, false, true)).collect();
    let bus = alloc_bus(&mut reg, 0, 0, false, true);
    let mut sites: Vec<Vec<WalkerMode>> = Vec::new();
    let mut travel: Vec<Vec<WalkerMode>> = Vec::new();
    let mut buses: Vec<Vec<BusRails>> = Vec::new();
    for l in 0..=n {
        let width = 1u32 << l;
        if l < n {
            sites.push(
                (0..width).map(|k| WalkerMode::alloc(&mut reg, l, k, Role::RouterDirection, true, false)).collect(),
            );
            travel.push((0..width).map(|k| WalkerMode::alloc(&mut reg, l, k, Role::Walker, true, false)).collect());
        }
        buses.push((0..width).map(|k| alloc_bus(&mut reg, l, k, true, false)).collect());
    }

    // Û at one level: colour-blind hop of every rail towards the child the
    // site points at.
    let route =
        |lay: &mut Layering, l: usize, from: &dyn Fn(usize) -> Vec<QubitId>, to: &dyn Fn(usize) -> Vec<QubitId>| {
            for (k, site) in sites[l].iter().enumerate() {
                for (right, ctrl) in [(false, site.red), (true, site.blue)] {
                    let group: Vec<Gate> = from(k)
                        .into_iter()
                        .zip(to(2 * k + right as usize))
                        .map(|(a, b)| Gate::CSwap { control: Control::on(ctrl), a, b })
                        .collect();
                    lay.push_group(&group);
                }
            }
        };

    let mut lay = Layering::new(reg.len());
    let n = n as usize;
    for k in 0..n {
        for (a, b) in inputs[k].rails().into_iter().zip(travel[0][0].rails()) {
            lay.push(Gate::Swap { a, b });
        }
        for l in 0..k {
            route(&mut lay, l, &|j| travel[l][j].rails().to_vec(), &|j| travel[l + 1][j].rails().to_vec());
        }
        for (site, t) in sites[k].iter().zip(&travel[k]) {
            lay.extend(park_gates(*site, *t));
        }
    }
    lay.barrier();
    for (a, b) in bus.rails().into_iter().zip(buses[0][0].rails()) {
        lay.push(Gate::Swap { a, b });
    }
    for l in 0..n {
        route(&mut lay, l, &|j| buses[l][j].rails().to_vec(), &|j| buses[l + 1][j].rails().to_vec());
    }
    lay.barrier();

    let address = inputs.iter().map(|m| AddressCarrier::Colour { red: m.red, blue: m.blue }).collect();
    Schedule::assemble(Draft {
        architecture: Architecture::Walker,
        router_kind: RouterKind::Qutrit,
        n: n as u32,
        profile,
        cost: options.cost,
        registry: reg,
        routing: lay.finish(),
        database: database.clone(),
        address,
        bus,
        leaves: buses[n].clone(),
    })
}
