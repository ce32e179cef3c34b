use super::Gate;

/// As-soon-as-possible layering.
///
/// Gates are pushed in program order; each lands in the earliest layer after
/// the last one that used any of its qubits, but never before the current
/// barrier. Reordering only ever swaps gates with disjoint supports, so the
/// circuit's action is that of the program order.
pub(crate) struct Layering {
    layers: Vec<Vec<Gate>>,
    ready: Vec<usize>,
    floor: usize,
}

impl Layering {
    pub(crate) fn new(qubits: usize) -> Self {
        Layering { layers: Vec::new(), ready: vec![0; qubits], floor: 0 }
    }

    pub(crate) fn push(&mut self, gate: Gate) {
        let t = gate.support().map(|q| self.ready[q.index()]).fold(self.floor, usize::max);
        if t == self.layers.len() {
            self.layers.push(Vec::new());
        }
        self.layers[t].push(gate);
        for q in gate.support() {
            self.ready[q.index()] = t + 1;
        }
    }

    /// Places `gates` together in one layer. They must write disjoint qubits
    /// and may share controls; this is one controlled swap of a multi-rail
    /// carrier.
    pub(crate) fn push_group(&mut self, gates: &[Gate]) {
        let t = gates.iter().flat_map(Gate::support).map(|q| self.ready[q.index()]).fold(self.floor, usize::max);
        if t == self.layers.len() {
            self.layers.push(Vec::new());
        }
        self.layers[t].extend_from_slice(gates);
        for q in gates.iter().flat_map(Gate::support) {
            self.ready[q.index()] = t + 1;
        }
    }

    pub(crate) fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) {
        for g in gates {
            self.push(g);
        }
    }

    /// Later gates start strictly after everything pushed so far.
    pub(crate) fn barrier(&mut self) {
        self.floor = self.layers.len();
    }

    pub(crate) fn finish(self) -> Vec<Vec<Gate>> {
        self.layers
    }
}
