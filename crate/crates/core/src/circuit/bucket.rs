//! Bucket-brigade trees: address bits descend one at a time.
//!
//! Every internal node holds a router, an address wire and a bus wire; the
//! leaves hold only a bus wire. Bit `k` enters through the root's address
//! wire, hops down `k` levels and is swapped into the router at level `k`.
//! The ASAP layering lets bit `k + 1` start descending while bit `k` is still
//! on its way, which is the pipelining that gives linear depth.
//!
//! The uniform tree sends the bus down after the last router is set. The
//! heterogeneous variant lets the bus trail the address bits, hopping one
//! level right after that level's router has been set.

use super::layering::Layering;
use super::{
    alloc_address, alloc_bus, check_database, check_depth, AddressCarrier, Architecture, BuildOptions, BusRails,
    CircuitError, Database, Draft, Gate, Registry, Router, RouterKind, Schedule,
};
use crate::noise::{DistanceProfile, ProfileKind};

struct Tree {
    /// `routers[l][k]`, levels `0..n`.
    routers: Vec<Vec<Router>>,
    /// Address wires, levels `0..n`.
    wires: Vec<Vec<AddressCarrier>>,
    /// Bus wires, levels `0..=n`.
    buses: Vec<Vec<BusRails>>,
}

fn alloc_tree(reg: &mut Registry, n: u32, kind: RouterKind) -> Tree {
    let mut tree = Tree { routers: Vec::new(), wires: Vec::new(), buses: Vec::new() };
    for l in 0..=n {
        let width = 1u32 << l;
        if l < n {
            tree.routers.push((0..width).map(|k| Router::alloc(reg, kind, l, k)).collect());
            tree.wires.push((0..width).map(|k| alloc_address(reg, kind, l, k, true, false)).collect());
        }
        tree.buses.push((0..width).map(|k| alloc_bus(reg, l, k, true, false)).collect());
    }
    tree
}

/// Moves every rail of `from[k]` into the matching rail of child
/// `to[2k + dir]` under the router at `k`.
fn hop(
    lay: &mut Layering,
    routers: &[Router],
    from: &[Vec<crate::branch_state::QubitId>],
    to: &[Vec<crate::branch_state::QubitId>],
) {
    for (k, router) in routers.iter().enumerate() {
        for right in [false, true] {
            let child = &to[2 * k + right as usize];
            let ctrl = router.controls(right);
            let group: Vec<Gate> =
                from[k].iter().zip(child).map(|(&a, &b)| Gate::controlled_swap(&ctrl, a, b)).collect();
            lay.push_group(&group);
        }
    }
}

fn rails_of(c: &[AddressCarrier]) -> Vec<Vec<crate::branch_state::QubitId>> {
    c.iter().map(|c| c.rails()).collect()
}

fn bus_rails(b: &[BusRails]) -> Vec<Vec<crate::branch_state::QubitId>> {
    b.iter().map(|b| b.rails().to_vec()).collect()
}

fn build(
    arch: Architecture,
    n: u32,
    kind: RouterKind,
    database: &Database,
    options: BuildOptions,
) -> Result<Schedule, CircuitError> {
    check_depth(n)?;
    check_database(n, database)?;
    let profile = DistanceProfile::new(options.profile, n)?;

    let mut reg = Registry::default();
    let address: Vec<AddressCarrier> = (0..n).map(|_| alloc_address(&mut reg, kind, 0, 0, false, true)).collect();
    let bus = alloc_bus(&mut reg, 0, 0, false, true);
    let tree = alloc_tree(&mut reg, n, kind);

    let mut lay = Layering::new(reg.len());
    let n = n as usize;
    let bus_hop = |lay: &mut Layering, level: usize| {
        if level == 0 {
            for (a, b) in bus.rails().into_iter().zip(tree.buses[0][0].rails()) {
                lay.push(Gate::Swap { a, b });
            }
        }
        hop(lay, &tree.routers[level], &bus_rails(&tree.buses[level]), &bus_rails(&tree.buses[level + 1]));
    };

    for k in 0..n {
        for (a, b) in address[k].rails().into_iter().zip(tree.wires[0][0].rails()) {
            lay.push(Gate::Swap { a, b });
        }
        for l in 0..k {
            hop(&mut lay, &tree.routers[l], &rails_of(&tree.wires[l]), &rails_of(&tree.wires[l + 1]));
        }
        for (router, wire) in tree.routers[k].iter().zip(&tree.wires[k]) {
            lay.extend(router.set_gates(wire));
        }
        if arch == Architecture::BbHetero {
            bus_hop(&mut lay, k);
        }
    }
    if arch == Architecture::UniformBb {
        lay.barrier();
        for l in 0..n {
            bus_hop(&mut lay, l);
        }
    }
    lay.barrier();

    Schedule::assemble(Draft {
        architecture: arch,
        router_kind: kind,
        n: n as u32,
        profile,
        cost: options.cost,
        registry: reg,
        routing: lay.finish(),
        database: database.clone(),
        address,
        bus,
        leaves: tree.buses[n].clone(),
    })
}

/// Uniform-distance bucket brigade. `options.profile` must be uniform.
pub fn build_uniform_bb(
    n: u32,
    router_kind: RouterKind,
    database: &Database,
    options: BuildOptions,
) -> Result<Schedule, CircuitError> {
    if !matches!(options.profile, ProfileKind::Uniform(_)) {
        return Err(CircuitError::NeedsUniform(Architecture::UniformBb));
    }
    build(Architecture::UniformBb, n, router_kind, database, options)
}

/// Pipelined bucket brigade with distance decreasing towards the leaves.
pub fn build_bb_hetero(
    n: u32,
    router_kind: RouterKind,
    database: &Database,
    options: BuildOptions,
) -> Result<Schedule, CircuitError> {
    build(Architecture::BbHetero, n, router_kind, database, options)
}
