//! Independent reference models shared by the integration tests.
//!
//! Nothing in here calls into the branch-state simulator: the dense models
//! index amplitudes by plain integers and re-derive every gate from its
//! definition, so agreement with the library is meaningful.
#![allow(dead_code)]

use hqram::branch_state::QubitId;
use hqram::circuit::{Gate, Schedule};
use num_complex::Complex64;

/// Dense state vector; qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug)]
pub struct Dense {
    pub width: usize,
    pub amps: Vec<Complex64>,
}

impl Dense {
    pub fn basis(width: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << width];
        amps[index] = Complex64::new(1.0, 0.0);
        Dense { width, amps }
    }

    /// Applies a permutation of basis indices.
    fn permute(&mut self, f: impl Fn(usize) -> usize) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            out[f(i)] += *a;
        }
        self.amps = out;
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.permute(|i| swap_bits(i, a, b));
    }

    pub fn cswap(&mut self, controls: &[(usize, bool)], a: usize, b: usize) {
        let c = controls.to_vec();
        self.permute(
            move |i| {
                if c.iter().all(|&(q, pol)| ((i >> q) & 1 == 1) == pol) {
                    swap_bits(i, a, b)
                } else {
                    i
                }
            },
        );
    }

    pub fn x(&mut self, q: usize) {
        self.permute(|i| i ^ (1 << q));
    }

    /// Z as an explicit diagonal matrix-vector product.
    pub fn z(&mut self, q: usize) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i >> q) & 1 == 1 {
                *a = -*a;
            }
        }
    }

    pub fn gate(&mut self, g: &Gate) {
        match *g {
            Gate::Swap { a, b } => self.swap(a.index(), b.index()),
            Gate::CSwap { control, a, b } => {
                self.cswap(&[(control.qubit.index(), control.polarity)], a.index(), b.index())
            }
            Gate::CCSwap { controls, a, b } => self.cswap(
                &[(controls[0].qubit.index(), controls[0].polarity), (controls[1].qubit.index(), controls[1].polarity)],
                a.index(),
                b.index(),
            ),
            Gate::X { target } => self.x(target.index()),
            Gate::ClassicalCx { data_bit, target } => {
                if data_bit {
                    self.x(target.index())
                }
            }
        }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

pub fn swap_bits(i: usize, a: usize, b: usize) -> usize {
    let ba = (i >> a) & 1;
    let bb = (i >> b) & 1;
    if ba == bb {
        i
    } else {
        i ^ (1 << a) ^ (1 << b)
    }
}

/// Direct array lookup: what every correct QRAM query must return.
pub fn lookup(database: &[bool], address: usize) -> bool {
    database[address]
}

/// Exact mean infidelity of a small schedule by density-matrix evolution.
///
/// `qubit_rate` gives each qubit's per-cycle error rate. Every (qubit, layer)
/// pair carries independent bit-flip and phase-flip
/// channels. With `k` rounds of probability `r/2` each, the flip survives iff
/// an odd number of rounds fired, which happens with probability
/// `(1 - (1 - r)^k) / 2`. Averaging over every error configuration is then the
/// same as applying these channels to the density matrix, so the result is
/// the exhaustive enumeration in closed form.
///
/// Qubits only start to decohere at the first layer that touches them. After
/// the noisy forward pass the routing layers are undone without noise and the
/// fidelity is taken on the query registers with everything else traced out.
pub fn exact_mean_infidelity(schedule: &Schedule, qubit_rate: &dyn Fn(QubitId) -> f64) -> f64 {
    let reg = schedule.registry();
    let w = reg.len();
    assert!(w <= 12, "oracle is dense; keep circuits tiny");
    let dim = 1usize << w;
    let n = schedule.n();

    // Uniform superposition over addresses.
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    let amp = 1.0 / ((1usize << n) as f64).sqrt();
    for addr in 0..(1usize << n) {
        let word = schedule.input_word(addr);
        let mut idx = 0usize;
        for q in 0..w {
            if word.get(q) {
                idx |= 1 << q;
            }
        }
        psi[idx] = Complex64::new(amp, 0.0);
    }

    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            rho[i * dim + j] = psi[i] * psi[j].conj();
        }
    }

    // First layer touching each qubit.
    let mut first = vec![usize::MAX; w];
    for (t, layer) in schedule.layers().iter().enumerate() {
        for g in &layer.gates {
            for q in g.support() {
                first[q.index()] = first[q.index()].min(t);
            }
        }
    }

    let perm_of = |g: &Gate| -> Vec<usize> {
        (0..dim)
            .map(|i| {
                let mut d = Dense::basis(w, i);
                d.gate(g);
                d.amps.iter().position(|a| a.norm_sqr() > 0.5).unwrap()
            })
            .collect()
    };
    let apply_perm = |rho: &mut Vec<Complex64>, p: &[usize]| {
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                out[p[i] * dim + p[j]] = rho[i * dim + j];
            }
        }
        *rho = out;
    };

    for (t, layer) in schedule.layers().iter().enumerate() {
        for g in &layer.gates {
            let p = perm_of(g);
            apply_perm(&mut rho, &p);
        }
        let k = layer.code_cycles as i32;
        for q in 0..w {
            if first[q] > t {
                continue;
            }
            let r = qubit_rate(QubitId::new(q));
            let flip = (1.0 - (1.0 - r).powi(k)) / 2.0;
            if flip == 0.0 {
                continue;
            }
            // bit flip
            let m = 1usize << q;
            let mut out = rho.clone();
            for i in 0..dim {
                for j in 0..dim {
                    out[i * dim + j] = rho[i * dim + j] * (1.0 - flip) + rho[(i ^ m) * dim + (j ^ m)] * flip;
                }
            }
            rho = out;
            // phase flip
            for i in 0..dim {
                for j in 0..dim {
                    if ((i >> q) & 1) != ((j >> q) & 1) {
                        rho[i * dim + j] *= 1.0 - 2.0 * flip;
                    }
                }
            }
        }
    }
    for layer in schedule.retrieval() {
        for g in &layer.gates {
            let p = perm_of(g);
            apply_perm(&mut rho, &p);
        }
    }

    // Ideal pure state through the same noiseless path.
    let mut ideal = Dense { width: w, amps: psi };
    for layer in schedule.layers().iter().chain(schedule.retrieval()) {
        for g in &layer.gates {
            ideal.gate(g);
        }
    }

    let query: Vec<usize> = schedule.query_qubits().iter().map(|q| q.index()).collect();
    let qmask: usize = query.iter().map(|&q| 1usize << q).sum();
    // Ideal garbage must be a product state; read it off any supported index.
    let support: Vec<usize> = (0..dim).filter(|&i| ideal.amps[i].norm_sqr() > 1e-12).collect();
    let garbage = support[0] & !qmask;
    assert!(support.iter().all(|&i| i & !qmask == garbage));
    let phi = |i: usize| -> Complex64 { ideal.amps[(i & qmask) | garbage] };

    let mut f = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            if (i & !qmask) != (j & !qmask) {
                continue;
            }
            let r = rho[i * dim + j];
            if r == Complex64::new(0.0, 0.0) {
                continue;
            }
            f += phi(i).conj() * r * phi(j);
        }
    }
    1.0 - f.re
}

/// Per-qubit rates when a carrier spread over `k` qubits splits its level's
/// rate evenly between them.
pub fn shared_rates(schedule: &Schedule, level_rate: &dyn Fn(u32) -> f64) -> Vec<f64> {
    let reg = schedule.registry();
    let tags: Vec<_> = (0..reg.len()).map(|q| reg.tag(QubitId::new(q))).collect();
    tags.iter()
        .map(|t| {
            let k = tags.iter().filter(|u| u.carrier == t.carrier).count();
            level_rate(t.level) / k as f64
        })
        .collect()
}
