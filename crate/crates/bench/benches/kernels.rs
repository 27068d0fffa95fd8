//! Hot paths: circuit synthesis and decomposition, statevector application,
//! sector Hamiltonian assembly and one real-time subspace step.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spinforge::csf::Coupling;
use spinforge::hamiltonian::{load_fixture, SectorHamiltonian};
use spinforge::linalg::matvec;
use spinforge::sim::{apply, StateVector};
use spinforge::studies::closed_shell_state;
use spinforge::subspace::dense_propagator;
use spinforge::synth::{csf_circuit_for, Topology};

fn synthesis(c: &mut Criterion) {
    for topo in Topology::ALL {
        c.bench_function(&format!("csf_circuit N=8 {}", topo.name()), |b| {
            b.iter(|| csf_circuit_for(black_box(8), Coupling::SingletHalves, topo).unwrap())
        });
    }
}

fn simulation(c: &mut Criterion) {
    let circ = csf_circuit_for(8, Coupling::SingletHalves, Topology::All).unwrap();
    let zero = StateVector::zero_state(16);
    c.bench_function("apply csf_circuit N=8 (16 qubits)", |b| b.iter(|| apply(black_box(&circ), &zero).unwrap()));
}

fn hamiltonian(c: &mut Criterion) {
    let fx = load_fixture("n2_1.50").unwrap();
    c.bench_function("sector Hamiltonian n2 (400 determinants)", |b| b.iter(|| SectorHamiltonian::new(black_box(&fx.integrals)).unwrap()));
    let h = SectorHamiltonian::new(&fx.integrals).unwrap();
    let u = dense_propagator(&h.dense, 2.0);
    let v = h.project(&closed_shell_state(6, 6).unwrap());
    c.bench_function("sector propagator step", |b| b.iter(|| matvec(black_box(&u), &v)));
    c.bench_function("sparse Hamiltonian matvec", |b| b.iter(|| matvec(black_box(&h.sparse), &v)));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = synthesis, simulation, hamiltonian
}
criterion_main!(benches);
