//! The five-rate inhomogeneous noise model and its insertion pass.
//!
//! Rates:
//! - `p_spam`: X error after Z-basis preparation / before Z-basis
//!   measurement, Z error for the X basis.
//! - `p_local`: depolarizing noise after every local gate (one- or
//!   two-qubit as appropriate).
//! - `p_remote_x`, `p_remote_z`: remote-CX channel, X on the target and Z on
//!   the control of each seam CX. Applied in addition to the local
//!   depolarizing on those gates.
//! - `p_latency`: single-qubit depolarizing burst on a marked qubit set,
//!   once per marked round.

use thiserror::Error;

use super::{Circuit, Instruction, Opcode};

/// The inhomogeneous error-rate set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseParams {
    pub p_spam: f64,
    pub p_local: f64,
    pub p_remote_x: f64,
    pub p_remote_z: f64,
    pub p_latency: f64,
}

impl NoiseParams {
    pub fn zero() -> Self {
        NoiseParams::default()
    }

    pub fn local_only(p_spam: f64, p_local: f64) -> Self {
        NoiseParams { p_spam, p_local, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), NoiseModelError> {
        for (name, v) in [
            ("p_spam", self.p_spam),
            ("p_local", self.p_local),
            ("p_remote_x", self.p_remote_x),
            ("p_remote_z", self.p_remote_z),
            ("p_latency", self.p_latency),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(NoiseModelError::RateOutOfRange { name, value: v });
            }
        }
        Ok(())
    }
}

/// Insert a latency depolarization on `qubits` immediately before the clean
/// circuit's instruction `before_instruction`.
#[derive(Debug, Clone)]
pub struct LatencyMarker {
    pub qubits: Vec<u32>,
    pub before_instruction: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum NoiseModelError {
    #[error("noise rate {name} = {value} outside [0, 1]")]
    RateOutOfRange { name: &'static str, value: f64 },
    #[error("seam marker {index} does not refer to a CX instruction")]
    SeamNotCx { index: usize },
    #[error("marker instruction index {index} out of range ({len} instructions)")]
    MarkerOutOfRange { index: usize, len: usize },
}

/// Insert the noise model into a clean circuit.
///
/// - depolarizing after each local gate (`DEPOLARIZE1` after 1q gates,
///   `DEPOLARIZE2` after each CX/CZ/SWAP pair),
/// - SPAM flips after resets and before measurements, basis-matched,
/// - the remote channel on each seam CX pair (X on target, Z on control),
/// - one `DEPOLARIZE1(p_latency)` per marked qubit at each latency marker.
///
/// Channels with probability zero are omitted, so an all-zero `NoiseParams`
/// returns the circuit unchanged. Detector and observable references are
/// untouched (noise opcodes produce no measurement records).
pub fn append_noise_model(
    c: &Circuit,
    np: &NoiseParams,
    seam_cx_instructions: &[usize],
    latency_sites: &[LatencyMarker],
) -> Result<Circuit, NoiseModelError> {
    np.validate()?;
    for &idx in seam_cx_instructions {
        match c.instructions.get(idx) {
            None => {
                return Err(NoiseModelError::MarkerOutOfRange { index: idx, len: c.instructions.len() })
            }
            Some(ins) if ins.opcode != Opcode::Cx => {
                return Err(NoiseModelError::SeamNotCx { index: idx })
            }
            _ => {}
        }
    }
    for m in latency_sites {
        if m.before_instruction > c.instructions.len() {
            return Err(NoiseModelError::MarkerOutOfRange {
                index: m.before_instruction,
                len: c.instructions.len(),
            });
        }
    }

    let mut out = Circuit::new(c.n);
    out.detectors = c.detectors.clone();
    out.observables = c.observables.clone();

    let push_latency = |out: &mut Circuit, marker: &LatencyMarker| {
        if np.p_latency > 0.0 {
            for &q in &marker.qubits {
                out.push_noise(Opcode::Depolarize1, vec![q], np.p_latency);
            }
        }
    };

    for (idx, ins) in c.instructions.iter().enumerate() {
        for marker in latency_sites.iter().filter(|m| m.before_instruction == idx) {
            push_latency(&mut out, marker);
        }
        let is_seam = seam_cx_instructions.contains(&idx);
        match ins.opcode {
            Opcode::H | Opcode::S | Opcode::SDag | Opcode::X | Opcode::Y | Opcode::Z => {
                out.instructions.push(ins.clone());
                if np.p_local > 0.0 {
                    for &q in &ins.targets {
                        out.push_noise(Opcode::Depolarize1, vec![q], np.p_local);
                    }
                }
            }
            Opcode::Cx | Opcode::Cz | Opcode::Swap => {
                out.instructions.push(ins.clone());
                for pair in ins.targets.chunks(2) {
                    if np.p_local > 0.0 {
                        out.push_noise(Opcode::Depolarize2, pair.to_vec(), np.p_local);
                    }
                    if is_seam {
                        // For CX the pair is (control, target).
                        if np.p_remote_x > 0.0 {
                            out.push_noise(Opcode::XError, vec![pair[1]], np.p_remote_x);
                        }
                        if np.p_remote_z > 0.0 {
                            out.push_noise(Opcode::ZError, vec![pair[0]], np.p_remote_z);
                        }
                    }
                }
            }
            Opcode::RZ => {
                out.instructions.push(ins.clone());
                if np.p_spam > 0.0 {
                    out.push_noise(Opcode::XError, ins.targets.clone(), np.p_spam);
                }
            }
            Opcode::RX => {
                out.instructions.push(ins.clone());
                if np.p_spam > 0.0 {
                    out.push_noise(Opcode::ZError, ins.targets.clone(), np.p_spam);
                }
            }
            Opcode::MZ | Opcode::MY => {
                if np.p_spam > 0.0 {
                    out.push_noise(Opcode::XError, ins.targets.clone(), np.p_spam);
                }
                out.instructions.push(ins.clone());
            }
            Opcode::MX => {
                if np.p_spam > 0.0 {
                    out.push_noise(Opcode::ZError, ins.targets.clone(), np.p_spam);
                }
                out.instructions.push(ins.clone());
            }
            Opcode::XError | Opcode::ZError | Opcode::Depolarize1 | Opcode::Depolarize2 => {
                // Pre-existing channels pass through untouched.
                out.instructions.push(ins.clone());
            }
        }
    }
    for marker in latency_sites
        .iter()
        .filter(|m| m.before_instruction == c.instructions.len())
    {
        push_latency(&mut out, marker);
    }
    Ok(out)
}

/// Count channel instructions of one opcode (test helper).
pub fn count_channels(c: &Circuit, op: Opcode) -> usize {
    c.instructions.iter().filter(|i| i.opcode == op).count()
}

/// All noise instructions with their indexes (test helper).
pub fn noise_instructions(c: &Circuit) -> Vec<(usize, &Instruction)> {
    c.instructions
        .iter()
        .enumerate()
        .filter(|(_, i)| i.opcode.is_noise())
        .collect()
}
