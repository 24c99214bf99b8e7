//! Fixtures shared by the benchmarks.

use maurer_core::machine::MachineState;
use maurer_core::sls::pack_data_state;
use maurer_core::thread::sample::{random_spec, SpecShape};
use maurer_core::thread::RecSpec;
use maurer_core::tpfc::{synthesize_lean, synthesize_wide, TransformationTable, Witness};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn table(k: u32, l: u32, seed: u64) -> TransformationTable {
    TransformationTable::random(k, l, &mut ChaCha8Rng::seed_from_u64(seed)).expect("small table")
}

pub fn lean_witness(k: u32, l: u32, seed: u64) -> (TransformationTable, Witness) {
    let t = table(k, l, seed);
    let w = synthesize_lean(&t, false).expect("lean synthesis");
    (t, w)
}

pub fn wide_witness(k: u32, l: u32, seed: u64) -> (TransformationTable, Witness) {
    let t = table(k, l, seed);
    let w = synthesize_wide(&t).expect("wide synthesis");
    (t, w)
}

/// A machine state holding `words` in data memory, every other cell at its
/// minimum.
pub fn data_state(w: &Witness, words: &[u64]) -> MachineState {
    pack_data_state(&w.machine.cells, words).expect("words fit")
}

pub fn specs(n: usize, seed: u64) -> Vec<RecSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = SpecShape::default();
    (0..n).map(|_| random_spec(&mut rng, &shape)).collect()
}
