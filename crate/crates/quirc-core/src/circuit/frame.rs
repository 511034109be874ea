//! Pauli-frame detector sampling.
//!
//! Instead of simulating the state, a Pauli frame (the accumulated error
//! relative to a noiseless run) is propagated through the instruction list.
//! Detector bits are parities of frame-induced measurement flips, so the
//! noiseless reference never needs to be computed explicitly.
//!
//! Shots use counter-based RNG substreams derived from `(seed, shot index)`,
//! which makes parallel evaluation bit-identical to sequential evaluation.
//!
//! Resets clear the observable frame component and randomize the hidden one
//! (`Z` after `R_Z`, `X` after `R_X`): the hidden component is a stabilizer of
//! the freshly reset qubit, so the randomization is a gauge choice that
//! poisons any ill-formed non-deterministic detector without affecting
//! well-formed ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Circuit, CircuitError, Opcode};

/// Per-shot detector and observable bits, packed 64 shots per word column.
///
/// Layout: bit `d` of shot `s` lives in `det_bits[s * det_words + d/64]`.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    pub shots: usize,
    pub detector_count: usize,
    pub observable_count: usize,
    det_words: usize,
    obs_words: usize,
    det_bits: Vec<u64>,
    obs_bits: Vec<u64>,
}

impl SampleMatrix {
    fn new(shots: usize, detector_count: usize, observable_count: usize) -> Self {
        let det_words = detector_count.div_ceil(64).max(1);
        let obs_words = observable_count.div_ceil(64).max(1);
        SampleMatrix {
            shots,
            detector_count,
            observable_count,
            det_words,
            obs_words,
            det_bits: vec![0; det_words * shots],
            obs_bits: vec![0; obs_words * shots],
        }
    }

    #[inline]
    pub fn detector(&self, shot: usize, d: usize) -> bool {
        self.det_bits[shot * self.det_words + (d >> 6)] >> (d & 63) & 1 == 1
    }

    #[inline]
    pub fn observable(&self, shot: usize, o: usize) -> bool {
        self.obs_bits[shot * self.obs_words + (o >> 6)] >> (o & 63) & 1 == 1
    }

    /// Detector words for one shot (little-endian bit packing).
    pub fn detector_words(&self, shot: usize) -> &[u64] {
        &self.det_bits[shot * self.det_words..(shot + 1) * self.det_words]
    }

    /// Indices of fired detectors for one shot.
    pub fn fired_detectors(&self, shot: usize) -> Vec<u32> {
        let mut out = Vec::new();
        for (w, &word) in self.detector_words(shot).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros();
                let d = (w as u32) * 64 + b;
                if (d as usize) < self.detector_count {
                    out.push(d);
                }
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn detector_ones(&self, d: usize) -> usize {
        (0..self.shots).filter(|&s| self.detector(s, d)).count()
    }

    pub fn observable_ones(&self, o: usize) -> usize {
        (0..self.shots).filter(|&s| self.observable(s, o)).count()
    }
}

/// Lowered single-action micro-instruction.
#[derive(Debug, Clone, Copy)]
enum MicroOp {
    Gate1(Opcode, u32),
    Gate2(Opcode, u32, u32),
    Reset(Opcode, u32),
    Measure(Opcode, u32, u32), // opcode, qubit, record index
    Noise1(Opcode, u32, f64),
    Noise2(u32, u32, f64),
}

/// Circuit lowered for fast frame propagation.
struct Compiled {
    n_qubits: usize,
    micro: Vec<MicroOp>,
    measurement_count: usize,
    /// micro index just past the micro ops of instruction `i`.
    micro_end: Vec<usize>,
    /// Reverse index: measurement record -> detectors referencing it.
    det_of_meas: Vec<Vec<u32>>,
    obs_of_meas: Vec<Vec<u32>>,
}

fn compile(c: &Circuit) -> Compiled {
    let mut micro = Vec::with_capacity(c.instructions.len() * 2);
    let mut micro_end = Vec::with_capacity(c.instructions.len());
    let mut rec = 0u32;
    for ins in &c.instructions {
        match ins.opcode {
            Opcode::H | Opcode::S | Opcode::SDag | Opcode::X | Opcode::Y | Opcode::Z => {
                for &q in &ins.targets {
                    micro.push(MicroOp::Gate1(ins.opcode, q));
                }
            }
            Opcode::Cx | Opcode::Cz | Opcode::Swap => {
                for pair in ins.targets.chunks(2) {
                    micro.push(MicroOp::Gate2(ins.opcode, pair[0], pair[1]));
                }
            }
            Opcode::RZ | Opcode::RX => {
                for &q in &ins.targets {
                    micro.push(MicroOp::Reset(ins.opcode, q));
                }
            }
            Opcode::MZ | Opcode::MX | Opcode::MY => {
                for &q in &ins.targets {
                    micro.push(MicroOp::Measure(ins.opcode, q, rec));
                    rec += 1;
                }
            }
            Opcode::XError | Opcode::ZError | Opcode::Depolarize1 => {
                let p = ins.prob.unwrap_or(0.0);
                for &q in &ins.targets {
                    micro.push(MicroOp::Noise1(ins.opcode, q, p));
                }
            }
            Opcode::Depolarize2 => {
                let p = ins.prob.unwrap_or(0.0);
                for pair in ins.targets.chunks(2) {
                    micro.push(MicroOp::Noise2(pair[0], pair[1], p));
                }
            }
        }
        micro_end.push(micro.len());
    }
    let m = rec as usize;
    let mut det_of_meas = vec![Vec::new(); m];
    let mut obs_of_meas = vec![Vec::new(); m];
    for (d, set) in c.detectors.iter().enumerate() {
        for &r in set {
            det_of_meas[r as usize].push(d as u32);
        }
    }
    for (o, set) in c.observables.iter().enumerate() {
        for &r in set {
            obs_of_meas[r as usize].push(o as u32);
        }
    }
    Compiled {
        n_qubits: c.n as usize,
        micro,
        measurement_count: m,
        micro_end,
        det_of_meas,
        obs_of_meas,
    }
}

/// Frame bit field over qubits.
struct Frame {
    x: Vec<u64>,
    z: Vec<u64>,
}

impl Frame {
    fn new(n: usize) -> Self {
        let w = n.div_ceil(64).max(1);
        Frame { x: vec![0; w], z: vec![0; w] }
    }

    fn clear(&mut self) {
        self.x.iter_mut().for_each(|w| *w = 0);
        self.z.iter_mut().for_each(|w| *w = 0);
    }

    #[inline]
    fn x_bit(&self, q: u32) -> bool {
        self.x[(q >> 6) as usize] >> (q & 63) & 1 == 1
    }

    #[inline]
    fn z_bit(&self, q: u32) -> bool {
        self.z[(q >> 6) as usize] >> (q & 63) & 1 == 1
    }

    #[inline]
    fn flip_x(&mut self, q: u32) {
        self.x[(q >> 6) as usize] ^= 1 << (q & 63);
    }

    #[inline]
    fn flip_z(&mut self, q: u32) {
        self.z[(q >> 6) as usize] ^= 1 << (q & 63);
    }

    #[inline]
    fn set_x(&mut self, q: u32, v: bool) {
        let (w, b) = ((q >> 6) as usize, q & 63);
        self.x[w] = (self.x[w] & !(1 << b)) | ((v as u64) << b);
    }

    #[inline]
    fn set_z(&mut self, q: u32, v: bool) {
        let (w, b) = ((q >> 6) as usize, q & 63);
        self.z[w] = (self.z[w] & !(1 << b)) | ((v as u64) << b);
    }

    /// Conjugate the frame through a Clifford gate (signs irrelevant).
    #[inline]
    fn apply_gate1(&mut self, op: Opcode, q: u32) {
        match op {
            Opcode::H => {
                let (x, z) = (self.x_bit(q), self.z_bit(q));
                self.set_x(q, z);
                self.set_z(q, x);
            }
            Opcode::S | Opcode::SDag => {
                if self.x_bit(q) {
                    self.flip_z(q);
                }
            }
            // Pauli gates commute with the frame up to sign.
            _ => {}
        }
    }

    #[inline]
    fn apply_gate2(&mut self, op: Opcode, a: u32, b: u32) {
        match op {
            Opcode::Cx => {
                if self.x_bit(a) {
                    self.flip_x(b);
                }
                if self.z_bit(b) {
                    self.flip_z(a);
                }
            }
            Opcode::Cz => {
                if self.x_bit(a) {
                    self.flip_z(b);
                }
                if self.x_bit(b) {
                    self.flip_z(a);
                }
            }
            Opcode::Swap => {
                let (xa, za) = (self.x_bit(a), self.z_bit(a));
                let (xb, zb) = (self.x_bit(b), self.z_bit(b));
                self.set_x(a, xb);
                self.set_z(a, zb);
                self.set_x(b, xa);
                self.set_z(b, za);
            }
            _ => unreachable!(),
        }
    }

    /// Measurement flip bit for a basis measurement of `q`.
    #[inline]
    fn measure_flip(&self, op: Opcode, q: u32) -> bool {
        match op {
            Opcode::MZ => self.x_bit(q),
            Opcode::MX => self.z_bit(q),
            Opcode::MY => self.x_bit(q) ^ self.z_bit(q),
            _ => unreachable!(),
        }
    }
}

/// Buffered random bits (one u64 refill at a time).
struct BitSource {
    cache: u64,
    left: u8,
}

impl BitSource {
    fn new() -> Self {
        BitSource { cache: 0, left: 0 }
    }

    #[inline]
    fn next(&mut self, rng: &mut ChaCha8Rng) -> bool {
        if self.left == 0 {
            self.cache = rng.gen::<u64>();
            self.left = 64;
        }
        let b = self.cache & 1 == 1;
        self.cache >>= 1;
        self.left -= 1;
        b
    }
}

fn run_one_shot(
    compiled: &Compiled,
    seed: u64,
    shot: u64,
    frame: &mut Frame,
    meas_flips: &mut [u64],
    det_out: &mut [u64],
    obs_out: &mut [u64],
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    let mut bits = BitSource::new();
    frame.clear();
    meas_flips.iter_mut().for_each(|w| *w = 0);
    det_out.iter_mut().for_each(|w| *w = 0);
    obs_out.iter_mut().for_each(|w| *w = 0);

    for op in &compiled.micro {
        match *op {
            MicroOp::Gate1(g, q) => frame.apply_gate1(g, q),
            MicroOp::Gate2(g, a, b) => frame.apply_gate2(g, a, b),
            MicroOp::Reset(kind, q) => match kind {
                Opcode::RZ => {
                    frame.set_x(q, false);
                    frame.set_z(q, bits.next(&mut rng));
                }
                Opcode::RX => {
                    frame.set_z(q, false);
                    frame.set_x(q, bits.next(&mut rng));
                }
                _ => unreachable!(),
            },
            MicroOp::Measure(kind, q, rec) => {
                if frame.measure_flip(kind, q) {
                    meas_flips[(rec >> 6) as usize] ^= 1 << (rec & 63);
                    for &d in &compiled.det_of_meas[rec as usize] {
                        det_out[(d >> 6) as usize] ^= 1 << (d & 63);
                    }
                    for &o in &compiled.obs_of_meas[rec as usize] {
                        obs_out[(o >> 6) as usize] ^= 1 << (o & 63);
                    }
                }
            }
            MicroOp::Noise1(kind, q, p) => {
                if rng.gen::<f64>() < p {
                    match kind {
                        Opcode::XError => frame.flip_x(q),
                        Opcode::ZError => frame.flip_z(q),
                        Opcode::Depolarize1 => {
                            // Uniform over {X, Y, Z}.
                            match rng.gen_range(0u8..3) {
                                0 => frame.flip_x(q),
                                1 => {
                                    frame.flip_x(q);
                                    frame.flip_z(q);
                                }
                                _ => frame.flip_z(q),
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }
            MicroOp::Noise2(a, b, p) => {
                if rng.gen::<f64>() < p {
                    // Uniform over the 15 non-identity two-qubit Paulis,
                    // encoded as (xa, za, xb, zb) bits 1..=15.
                    let code = rng.gen_range(1u8..16);
                    if code & 1 != 0 {
                        frame.flip_x(a);
                    }
                    if code & 2 != 0 {
                        frame.flip_z(a);
                    }
                    if code & 4 != 0 {
                        frame.flip_x(b);
                    }
                    if code & 8 != 0 {
                        frame.flip_z(b);
                    }
                }
            }
        }
    }
}

/// Sample detector and observable bits over `shots` Pauli-frame shots.
///
/// Identical `(circuit, shots, seed)` triples produce identical matrices,
/// independent of thread count.
pub fn frame_sample(c: &Circuit, shots: usize, seed: u64) -> Result<SampleMatrix, CircuitError> {
    c.validate()?;
    let compiled = compile(c);
    let mut out = SampleMatrix::new(shots, c.detectors.len(), c.observables.len());
    let det_words = out.det_words;
    let obs_words = out.obs_words;
    let meas_words = compiled.measurement_count.div_ceil(64).max(1);

    let det_chunks = out.det_bits.par_chunks_mut(det_words);
    let obs_chunks = out.obs_bits.par_chunks_mut(obs_words);
    det_chunks
        .zip(obs_chunks)
        .enumerate()
        .for_each_init(
            || (Frame::new(compiled.n_qubits), vec![0u64; meas_words]),
            |(frame, meas), (shot, (det_out, obs_out))| {
                run_one_shot(&compiled, seed, shot as u64, frame, meas, det_out, obs_out);
            },
        );
    Ok(out)
}

/// Detector/observable flips caused by one deterministic Pauli fault.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultEffect {
    pub detectors: Vec<u32>,
    pub observables: Vec<u32>,
}

/// Deterministic single-fault propagation over a pre-lowered circuit.
///
/// Compiles the circuit once; each call walks only the instructions after
/// the fault site with noise disabled and resets clearing the frame.
pub struct FaultPropagator {
    compiled: Compiled,
}

impl FaultPropagator {
    pub fn new(c: &Circuit) -> Self {
        FaultPropagator { compiled: compile(c) }
    }

    /// Flips caused by a Pauli fault inserted immediately after instruction
    /// `after_instruction`. `fault` lists `(qubit, x_component, z_component)`.
    pub fn effect(&self, after_instruction: usize, fault: &[(u32, bool, bool)]) -> FaultEffect {
        let compiled = &self.compiled;
        let start = compiled.micro_end[after_instruction];
        let mut frame = Frame::new(compiled.n_qubits);
        for &(q, fx, fz) in fault {
            if fx {
                frame.flip_x(q);
            }
            if fz {
                frame.flip_z(q);
            }
        }
        let mut det_acc: Vec<u32> = Vec::new();
        let mut obs_acc: Vec<u32> = Vec::new();
        for op in &compiled.micro[start..] {
            match *op {
                MicroOp::Gate1(g, q) => frame.apply_gate1(g, q),
                MicroOp::Gate2(g, a, b) => frame.apply_gate2(g, a, b),
                MicroOp::Reset(_, q) => {
                    frame.set_x(q, false);
                    frame.set_z(q, false);
                }
                MicroOp::Measure(kind, q, rec) => {
                    if frame.measure_flip(kind, q) {
                        det_acc.extend_from_slice(&compiled.det_of_meas[rec as usize]);
                        obs_acc.extend_from_slice(&compiled.obs_of_meas[rec as usize]);
                    }
                }
                MicroOp::Noise1(..) | MicroOp::Noise2(..) => {}
            }
        }
        FaultEffect {
            detectors: odd_multiplicity(det_acc),
            observables: odd_multiplicity(obs_acc),
        }
    }
}

/// One-shot convenience wrapper around [`FaultPropagator`].
pub fn propagate_fault(
    c: &Circuit,
    after_instruction: usize,
    fault: &[(u32, bool, bool)],
) -> FaultEffect {
    FaultPropagator::new(c).effect(after_instruction, fault)
}

fn odd_multiplicity(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(v[i]);
        }
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_circuit(p: f64) -> Circuit {
        let mut c = Circuit::new(1);
        c.push(Opcode::RZ, vec![0]);
        c.push_noise(Opcode::XError, vec![0], p);
        c.push(Opcode::MZ, vec![0]);
        c.detectors.push(vec![0]);
        c
    }

    #[test]
    fn zero_noise_means_zero_bits() {
        let c = simple_circuit(0.0);
        let m = frame_sample(&c, 1000, 7).unwrap();
        assert_eq!(m.detector_ones(0), 0);
    }

    #[test]
    fn certain_flip_fires_every_shot() {
        let c = simple_circuit(1.0);
        let m = frame_sample(&c, 512, 7).unwrap();
        assert_eq!(m.detector_ones(0), 512);
    }

    #[test]
    fn binomial_frequency_within_three_sigma() {
        let c = simple_circuit(0.1);
        let shots = 100_000;
        let m = frame_sample(&c, shots, 20260810).unwrap();
        let freq = m.detector_ones(0) as f64 / shots as f64;
        let sigma = (0.1f64 * 0.9 / shots as f64).sqrt();
        assert!(
            (freq - 0.1).abs() < 3.0 * sigma,
            "freq {freq} outside 0.1 ± {}",
            3.0 * sigma
        );
    }

    #[test]
    fn seeded_reproducibility_and_seed_sensitivity() {
        let c = simple_circuit(0.3);
        let a = frame_sample(&c, 4096, 11).unwrap();
        let b = frame_sample(&c, 4096, 11).unwrap();
        assert_eq!(a.det_bits, b.det_bits);
        let d = frame_sample(&c, 4096, 12).unwrap();
        assert_ne!(a.det_bits, d.det_bits);
        // Chi-square independence sanity on the 2x2 contingency table.
        let (mut n00, mut n01, mut n10, mut n11) = (0f64, 0f64, 0f64, 0f64);
        for s in 0..4096 {
            match (a.detector(s, 0), d.detector(s, 0)) {
                (false, false) => n00 += 1.0,
                (false, true) => n01 += 1.0,
                (true, false) => n10 += 1.0,
                (true, true) => n11 += 1.0,
            }
        }
        let n = 4096f64;
        let (ra, rd) = ((n10 + n11) / n, (n01 + n11) / n);
        let mut chi2 = 0.0;
        for (obs, pa, pb) in [
            (n00, 1.0 - ra, 1.0 - rd),
            (n01, 1.0 - ra, rd),
            (n10, ra, 1.0 - rd),
            (n11, ra, rd),
        ] {
            let expect = n * pa * pb;
            chi2 += (obs - expect).powi(2) / expect;
        }
        assert!(chi2 < 15.0, "chi-square {chi2} suggests correlated streams");
    }

    #[test]
    fn fault_propagation_through_cx() {
        // X on qubit 0 propagates through CX to both measurements.
        let mut c = Circuit::new(2);
        c.push(Opcode::RZ, vec![0, 1]);
        c.push(Opcode::Cx, vec![0, 1]);
        c.push(Opcode::MZ, vec![0, 1]);
        c.detectors.push(vec![0]);
        c.detectors.push(vec![1]);
        let eff = propagate_fault(&c, 0, &[(0, true, false)]);
        assert_eq!(eff.detectors, vec![0, 1]);
    }
}
