//! Circuit instruction representation with probabilistic noise channels,
//! detectors and logical observables, plus a plain-text serialization.
//!
//! Measurement-record indices are global and append-only: every measurement
//! instruction appends one record per target, in target order, starting at 0.
//! Detectors and observables reference those absolute indices.

mod exec;
mod frame;
pub mod noise;
mod text;

pub use exec::{parity_over, reference_sample, run_tableau, OutcomeMode};
pub use frame::{frame_sample, propagate_fault, FaultEffect, FaultPropagator, SampleMatrix};

use thiserror::Error;

/// Instruction opcodes. Noise opcodes carry a probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    H,
    S,
    SDag,
    X,
    Y,
    Z,
    Cx,
    Cz,
    Swap,
    RZ,
    RX,
    MZ,
    MX,
    MY,
    XError,
    ZError,
    Depolarize1,
    Depolarize2,
}

impl Opcode {
    pub fn is_noise(self) -> bool {
        matches!(
            self,
            Opcode::XError | Opcode::ZError | Opcode::Depolarize1 | Opcode::Depolarize2
        )
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, Opcode::MZ | Opcode::MX | Opcode::MY)
    }

    pub fn is_reset(self) -> bool {
        matches!(self, Opcode::RZ | Opcode::RX)
    }

    /// True if targets are consumed in pairs.
    pub fn is_pairwise(self) -> bool {
        matches!(self, Opcode::Cx | Opcode::Cz | Opcode::Swap | Opcode::Depolarize2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Opcode::H => "H",
            Opcode::S => "S",
            Opcode::SDag => "S_DAG",
            Opcode::X => "X",
            Opcode::Y => "Y",
            Opcode::Z => "Z",
            Opcode::Cx => "CX",
            Opcode::Cz => "CZ",
            Opcode::Swap => "SWAP",
            Opcode::RZ => "R_Z",
            Opcode::RX => "R_X",
            Opcode::MZ => "M_Z",
            Opcode::MX => "M_X",
            Opcode::MY => "M_Y",
            Opcode::XError => "X_ERROR",
            Opcode::ZError => "Z_ERROR",
            Opcode::Depolarize1 => "DEPOLARIZE1",
            Opcode::Depolarize2 => "DEPOLARIZE2",
        }
    }
}

/// One circuit instruction.
#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub opcode: Opcode,
    pub targets: Vec<u32>,
    /// Present exactly for noise opcodes.
    pub prob: Option<f64>,
}

impl Instruction {
    pub fn gate(opcode: Opcode, targets: Vec<u32>) -> Self {
        Instruction { opcode, targets, prob: None }
    }

    pub fn noise(opcode: Opcode, targets: Vec<u32>, prob: f64) -> Self {
        Instruction { opcode, targets, prob: Some(prob) }
    }
}

/// Circuit with detectors (measurement-parity checks) and logical observables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    pub n: u32,
    pub instructions: Vec<Instruction>,
    /// Each detector is a set of measurement-record indices.
    pub detectors: Vec<Vec<u32>>,
    /// Each observable is a set of measurement-record indices.
    pub observables: Vec<Vec<u32>>,
}

/// Validation failure, reported with the first offending location.
#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("instruction {index}: target {target} out of range for {n} qubits")]
    TargetOutOfRange { index: usize, target: u32, n: u32 },
    #[error("instruction {index}: {opcode} requires an even target count (got {got})")]
    PairArity { index: usize, opcode: &'static str, got: usize },
    #[error("instruction {index}: {opcode} pair targets must be distinct")]
    PairDuplicate { index: usize, opcode: &'static str },
    #[error("instruction {index}: {opcode} requires at least one target")]
    NoTargets { index: usize, opcode: &'static str },
    #[error("instruction {index}: probability {prob} outside [0, 1]")]
    BadProbability { index: usize, prob: f64 },
    #[error("instruction {index}: {opcode} must not carry a probability")]
    UnexpectedProbability { index: usize, opcode: &'static str },
    #[error("instruction {index}: {opcode} missing probability")]
    MissingProbability { index: usize, opcode: &'static str },
    #[error("detector {index} references measurement record {record} but only {total} exist")]
    DetectorOutOfRange { index: usize, record: u32, total: u32 },
    #[error("observable {index} references measurement record {record} but only {total} exist")]
    ObservableOutOfRange { index: usize, record: u32, total: u32 },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Circuit {
    pub fn new(n: u32) -> Self {
        Circuit { n, ..Default::default() }
    }

    pub fn push(&mut self, opcode: Opcode, targets: Vec<u32>) -> &mut Self {
        self.instructions.push(Instruction::gate(opcode, targets));
        self
    }

    pub fn push_noise(&mut self, opcode: Opcode, targets: Vec<u32>, prob: f64) -> &mut Self {
        self.instructions.push(Instruction::noise(opcode, targets, prob));
        self
    }

    /// Total number of measurement records produced.
    pub fn measurement_count(&self) -> u32 {
        self.instructions
            .iter()
            .filter(|i| i.opcode.is_measurement())
            .map(|i| i.targets.len() as u32)
            .sum()
    }

    /// Check index ranges, arities, probability bounds and detector /
    /// observable references. Returns the first violation found.
    pub fn validate(&self) -> Result<(), CircuitError> {
        for (index, ins) in self.instructions.iter().enumerate() {
            let name = ins.opcode.name();
            if ins.targets.is_empty() {
                return Err(CircuitError::NoTargets { index, opcode: name });
            }
            for &t in &ins.targets {
                if t >= self.n {
                    return Err(CircuitError::TargetOutOfRange { index, target: t, n: self.n });
                }
            }
            if ins.opcode.is_pairwise() {
                if ins.targets.len() % 2 != 0 {
                    return Err(CircuitError::PairArity {
                        index,
                        opcode: name,
                        got: ins.targets.len(),
                    });
                }
                for pair in ins.targets.chunks(2) {
                    if pair[0] == pair[1] {
                        return Err(CircuitError::PairDuplicate { index, opcode: name });
                    }
                }
            }
            match (ins.opcode.is_noise(), ins.prob) {
                (true, Some(p)) => {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(CircuitError::BadProbability { index, prob: p });
                    }
                }
                (true, None) => {
                    return Err(CircuitError::MissingProbability { index, opcode: name })
                }
                (false, Some(_)) => {
                    return Err(CircuitError::UnexpectedProbability { index, opcode: name })
                }
                (false, None) => {}
            }
        }
        let total = self.measurement_count();
        for (index, det) in self.detectors.iter().enumerate() {
            for &r in det {
                if r >= total {
                    return Err(CircuitError::DetectorOutOfRange { index, record: r, total });
                }
            }
        }
        for (index, obs) in self.observables.iter().enumerate() {
            for &r in obs {
                if r >= total {
                    return Err(CircuitError::ObservableOutOfRange { index, record: r, total });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_circuit_is_valid() {
        assert_eq!(Circuit::new(0).validate(), Ok(()));
    }

    #[test]
    fn detector_reference_checked() {
        let mut c = Circuit::new(1);
        c.push(Opcode::RZ, vec![0]);
        c.push(Opcode::MZ, vec![0]);
        c.push(Opcode::MZ, vec![0]);
        c.push(Opcode::MZ, vec![0]);
        c.detectors.push(vec![5]);
        assert_eq!(
            c.validate(),
            Err(CircuitError::DetectorOutOfRange { index: 0, record: 5, total: 3 })
        );
    }

    #[test]
    fn depolarize2_arity_checked() {
        let mut c = Circuit::new(3);
        c.push_noise(Opcode::Depolarize2, vec![0, 1, 2], 0.1);
        assert_eq!(
            c.validate(),
            Err(CircuitError::PairArity { index: 0, opcode: "DEPOLARIZE2", got: 3 })
        );
    }

    #[test]
    fn probability_bounds_checked() {
        let mut c = Circuit::new(1);
        c.push_noise(Opcode::XError, vec![0], 1.5);
        assert!(matches!(c.validate(), Err(CircuitError::BadProbability { .. })));
    }
}
