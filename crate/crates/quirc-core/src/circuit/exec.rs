//! Exact tableau-backed circuit execution.
//!
//! Used for the noiseless reference record and for validating the frame
//! sampler against deterministic error insertions. Noise opcodes are skipped
//! (they are sampling-time constructs). X- and Y-basis measurements are
//! implemented as basis-changed Z measurements so that a single measurement
//! code path exists.

use rand_chacha::ChaCha8Rng;

use crate::pauli::{Gate, PauliKind, PauliString};
use crate::tableau::{OutcomeSource, StabilizerTableau};

use super::{Circuit, CircuitError, Opcode};

/// How random measurement outcomes are resolved during tableau execution.
pub enum OutcomeMode<'a> {
    /// Resolve every random outcome to 0 (the reference convention).
    ForceZero,
    /// Draw outcomes from the generator.
    Rng(&'a mut ChaCha8Rng),
}

fn resolve<'m>(mode: &'m mut OutcomeMode<'_>) -> OutcomeSource<'m, ChaCha8Rng> {
    match mode {
        OutcomeMode::ForceZero => OutcomeSource::Forced(false),
        OutcomeMode::Rng(rng) => OutcomeSource::Random(&mut **rng),
    }
}

fn measure_z_path(
    t: &mut StabilizerTableau,
    q: usize,
    mode: &mut OutcomeMode<'_>,
) -> Result<bool, CircuitError> {
    let z = PauliString::single(t.num_qubits(), q, PauliKind::Z);
    let m = t
        .measure_pauli(&z, resolve(mode))
        .expect("Z measurement is always Hermitian");
    Ok(m.outcome)
}

/// Run the circuit on a tableau, returning the full measurement record.
///
/// Resets are implemented as a Z-path measurement followed by a Pauli
/// correction; X/Y measurements conjugate into the Z path and back.
pub fn run_tableau(c: &Circuit, mut mode: OutcomeMode<'_>) -> Result<Vec<bool>, CircuitError> {
    c.validate()?;
    let n = c.n.max(1) as usize;
    let mut t = StabilizerTableau::identity(n).expect("n >= 1");
    let mut record = Vec::with_capacity(c.measurement_count() as usize);
    for ins in &c.instructions {
        match ins.opcode {
            Opcode::H | Opcode::S | Opcode::SDag | Opcode::X | Opcode::Y | Opcode::Z => {
                for &q in &ins.targets {
                    let q = q as usize;
                    let g = match ins.opcode {
                        Opcode::H => Gate::H(q),
                        Opcode::S => Gate::S(q),
                        Opcode::SDag => Gate::SDag(q),
                        Opcode::X => Gate::X(q),
                        Opcode::Y => Gate::Y(q),
                        _ => Gate::Z(q),
                    };
                    t.apply_gate(g).expect("validated");
                }
            }
            Opcode::Cx | Opcode::Cz | Opcode::Swap => {
                for pair in ins.targets.chunks(2) {
                    let (a, b) = (pair[0] as usize, pair[1] as usize);
                    let g = match ins.opcode {
                        Opcode::Cx => Gate::Cx(a, b),
                        Opcode::Cz => Gate::Cz(a, b),
                        _ => Gate::Swap(a, b),
                    };
                    t.apply_gate(g).expect("validated");
                }
            }
            Opcode::RZ => {
                for &q in &ins.targets {
                    let q = q as usize;
                    if measure_z_path(&mut t, q, &mut mode)? {
                        t.apply_gate(Gate::X(q)).expect("validated");
                    }
                }
            }
            Opcode::RX => {
                for &q in &ins.targets {
                    let q = q as usize;
                    t.apply_gate(Gate::H(q)).expect("validated");
                    if measure_z_path(&mut t, q, &mut mode)? {
                        t.apply_gate(Gate::X(q)).expect("validated");
                    }
                    t.apply_gate(Gate::H(q)).expect("validated");
                }
            }
            Opcode::MZ => {
                for &q in &ins.targets {
                    record.push(measure_z_path(&mut t, q as usize, &mut mode)?);
                }
            }
            Opcode::MX => {
                for &q in &ins.targets {
                    let q = q as usize;
                    t.apply_gate(Gate::H(q)).expect("validated");
                    let m = measure_z_path(&mut t, q, &mut mode)?;
                    t.apply_gate(Gate::H(q)).expect("validated");
                    record.push(m);
                }
            }
            Opcode::MY => {
                for &q in &ins.targets {
                    let q = q as usize;
                    // (SH)† = S†·H maps Y to Z; undo with H·S.
                    t.apply_gate(Gate::SDag(q)).expect("validated");
                    t.apply_gate(Gate::H(q)).expect("validated");
                    let m = measure_z_path(&mut t, q, &mut mode)?;
                    t.apply_gate(Gate::H(q)).expect("validated");
                    t.apply_gate(Gate::S(q)).expect("validated");
                    record.push(m);
                }
            }
            Opcode::XError | Opcode::ZError | Opcode::Depolarize1 | Opcode::Depolarize2 => {
                // Noise is a sampling-time construct; the exact executor skips it.
            }
        }
    }
    Ok(record)
}

/// One noiseless measurement record with all random outcomes resolved to 0.
///
/// Against this reference every detector of a well-formed circuit evaluates
/// to parity 0.
pub fn reference_sample(c: &Circuit) -> Result<Vec<bool>, CircuitError> {
    run_tableau(c, OutcomeMode::ForceZero)
}

/// Parity of a record over an index set.
pub fn parity_over(record: &[bool], set: &[u32]) -> bool {
    set.iter().fold(false, |acc, &i| acc ^ record[i as usize])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rz_mz_gives_zero() {
        let mut c = Circuit::new(1);
        c.push(Opcode::RZ, vec![0]);
        c.push(Opcode::MZ, vec![0]);
        assert_eq!(reference_sample(&c).unwrap(), vec![false]);
    }

    #[test]
    fn rx_mx_gives_zero() {
        let mut c = Circuit::new(1);
        c.push(Opcode::RX, vec![0]);
        c.push(Opcode::MX, vec![0]);
        assert_eq!(reference_sample(&c).unwrap(), vec![false]);
    }

    #[test]
    fn deterministic_flips_tracked() {
        // X gate before M_Z flips the record.
        let mut c = Circuit::new(2);
        c.push(Opcode::RZ, vec![0, 1]);
        c.push(Opcode::X, vec![0]);
        c.push(Opcode::MZ, vec![0, 1]);
        assert_eq!(reference_sample(&c).unwrap(), vec![true, false]);
    }

    #[test]
    fn y_measurement_of_y_eigenstate() {
        // S·H|0⟩ = (|0⟩ + i|1⟩)/√2 is the +1 eigenstate of Y.
        let mut c = Circuit::new(1);
        c.push(Opcode::RZ, vec![0]);
        c.push(Opcode::H, vec![0]);
        c.push(Opcode::S, vec![0]);
        c.push(Opcode::MY, vec![0]);
        c.push(Opcode::MY, vec![0]);
        assert_eq!(reference_sample(&c).unwrap(), vec![false, false]);
    }
}
