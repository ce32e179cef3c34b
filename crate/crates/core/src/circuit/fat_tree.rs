//! Block routing: the whole remaining address plus the bus travels together.
//!
//! A node at level `i` holds a router, one slot per address bit `i..n` and a
//! bus slot; the root's slots are the query registers themselves. At each
//! level the first slot is swapped into the router and every other slot is
//! routed to the chosen child, one carrier at a time (they all share the
//! router as control). Levels are separated by barriers, so depth is quadratic.

use super::layering::Layering;
use super::{
    alloc_address, alloc_bus, check_database, check_depth, AddressCarrier, Architecture, BuildOptions, BusRails,
    CircuitError, Database, Draft, Gate, Registry, Router, RouterKind, Schedule,
};
use crate::noise::DistanceProfile;

struct Node {
    router: Option<Router>,
    /// Slot for address bit `first_bit + j` at index `j`.
    slots: Vec<AddressCarrier>,
    bus: BusRails,
}

pub fn build_ft_hetero(
    n: u32,
    router_kind: RouterKind,
    database: &Database,
    options: BuildOptions,
) -> Result<Schedule, CircuitError> {
    check_depth(n)?;
    check_database(n, database)?;
    let profile = DistanceProfile::new(options.profile, n)?;

    let mut reg = Registry::default();
    let mut levels: Vec<Vec<Node>> = Vec::new();
    for l in 0..=n {
        let root = l == 0;
        let nodes = (0..1u32 << l)
            .map(|k| {
                let slots = (l..n).map(|_| alloc_address(&mut reg, router_kind, l, k, true, root)).collect();
                let bus = alloc_bus(&mut reg, l, k, true, root);
                let router = (l < n).then(|| Router::alloc(&mut reg, router_kind, l, k));
                Node { router, slots, bus }
            })
            .collect();
        levels.push(nodes);
    }

    let mut lay = Layering::new(reg.len());
    for l in 0..n as usize {
        for node in &levels[l] {
            let router = node.router.expect("internal node");
            lay.extend(router.set_gates(&node.slots[0]));
        }
        for (k, node) in levels[l].iter().enumerate() {
            let router = node.router.expect("internal node");
            // Payload carriers: the remaining address slots, then the bus.
            let mut payload: Vec<(Vec<_>, [Vec<_>; 2])> = Vec::new();
            for j in 1..node.slots.len() {
                let kids = [0, 1].map(|d| levels[l + 1][2 * k + d].slots[j - 1].rails());
                payload.push((node.slots[j].rails(), kids));
            }
            let kids = [0, 1].map(|d| levels[l + 1][2 * k + d].bus.rails().to_vec());
            payload.push((node.bus.rails().to_vec(), kids));

            for (src, dst) in payload {
                for right in [false, true] {
                    let ctrl = router.controls(right);
                    let group: Vec<Gate> = src
                        .iter()
                        .zip(&dst[right as usize])
                        .map(|(&a, &b)| Gate::controlled_swap(&ctrl, a, b))
                        .collect();
                    lay.push_group(&group);
                }
            }
        }
        lay.barrier();
    }

    let root = &levels[0][0];
    let address = root.slots.clone();
    let bus = root.bus;
    let leaves = levels[n as usize].iter().map(|node| node.bus).collect();
    Schedule::assemble(Draft {
        architecture: Architecture::FtHetero,
        router_kind,
        n,
        profile,
        cost: options.cost,
        registry: reg,
        routing: lay.finish(),
        database: database.clone(),
        address,
        bus,
        leaves,
    })
}
