//! Pauli strings in a bit-packed symplectic representation.
//!
//! A Pauli operator on `n` qubits is stored as two length-`n` bit vectors
//! (the X and Z components, packed into `u64` words) together with a phase
//! exponent `r` modulo 4. The operator encoded is
//!
//! ```text
//!     i^r · X^{x_0} Z^{z_0} ⊗ X^{x_1} Z^{z_1} ⊗ ...
//! ```
//!
//! where each per-qubit factor multiplies X before Z. In this convention a
//! single-qubit Y is `(x=1, z=1, r=1)` since `Y = i·X·Z`. Hermitian Paulis
//! (the only ones that can be measured) satisfy `r ≡ popcount(x & z) (mod 2)`.
//!
//! The i-exponent convention makes multiplication a pure word operation:
//! moving `Z^b` past `X^c` contributes `(-1)^{|b & c|}`, so
//!
//! ```text
//!     (i^p X^a Z^b)(i^q X^c Z^d) = i^{p + q + 2·|b & c|} X^{a⊕c} Z^{b⊕d}.
//! ```
//!
//! Clifford conjugation updates are equally compact; see [`PauliString::apply_gate`].

use std::fmt;

use thiserror::Error;

/// Errors raised by Pauli and tableau operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count must be at least 1")]
    EmptyRegister,
    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("gate targets must be distinct (got {0} twice)")]
    DuplicateTarget(usize),
    #[error("operand acts on {left} qubits but {right} expected")]
    SizeMismatch { left: usize, right: usize },
    #[error("measurement operator must have phase ±1")]
    NonHermitianMeasurement,
    #[error("dense oracle supports at most {max} qubits (got {n})")]
    OracleTooLarge { n: usize, max: usize },
    #[error("forced measurement outcome has probability zero")]
    ImpossibleOutcome,
}

/// One of the four single-qubit Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliKind {
    I,
    X,
    Y,
    Z,
}

/// Clifford generators understood by the tableau and the dense oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    S(usize),
    SDag(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    /// Qubit indices touched by this gate, second slot unused for 1q gates.
    pub fn targets(self) -> (usize, Option<usize>) {
        match self {
            Gate::H(q) | Gate::S(q) | Gate::SDag(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => {
                (q, None)
            }
            Gate::Cx(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) => (a, Some(b)),
        }
    }

    /// The gate that undoes this one.
    pub fn inverse(self) -> Gate {
        match self {
            Gate::S(q) => Gate::SDag(q),
            Gate::SDag(q) => Gate::S(q),
            other => other,
        }
    }

    pub fn validate(self, n: usize) -> Result<(), PauliError> {
        let (a, b) = self.targets();
        if a >= n {
            return Err(PauliError::IndexOutOfRange { index: a, n });
        }
        if let Some(b) = b {
            if b >= n {
                return Err(PauliError::IndexOutOfRange { index: b, n });
            }
            if a == b {
                return Err(PauliError::DuplicateTarget(a));
            }
        }
        Ok(())
    }
}

#[inline]
fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

#[inline]
fn parity_and(a: &[u64], b: &[u64]) -> u32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    (acc.count_ones() & 1) as u32
}

/// A signed (phase-carrying) Pauli operator on `n` qubits.
#[derive(Clone, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    /// Exponent of i, modulo 4.
    phase: u8,
}

impl PauliString {
    /// The identity operator on `n` qubits.
    pub fn identity(n: usize) -> Self {
        let w = word_count(n);
        PauliString { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    /// A single-qubit Pauli embedded in an `n`-qubit register, with sign +1.
    pub fn single(n: usize, qubit: usize, kind: PauliKind) -> Self {
        assert!(qubit < n, "qubit {qubit} out of range for {n}");
        let mut p = PauliString::identity(n);
        match kind {
            PauliKind::I => {}
            PauliKind::X => p.set_x(qubit, true),
            PauliKind::Z => p.set_z(qubit, true),
            PauliKind::Y => {
                p.set_x(qubit, true);
                p.set_z(qubit, true);
                p.phase = 1; // Y = i·X·Z
            }
        }
        p
    }

    /// Build a +1-sign Pauli from sparse (qubit, kind) pairs.
    pub fn from_sparse(n: usize, terms: &[(usize, PauliKind)]) -> Self {
        let mut p = PauliString::identity(n);
        for &(q, k) in terms {
            assert!(q < n);
            match k {
                PauliKind::I => {}
                PauliKind::X => p.set_x(q, true),
                PauliKind::Z => p.set_z(q, true),
                PauliKind::Y => {
                    p.set_x(q, true);
                    p.set_z(q, true);
                    p.phase = (p.phase + 1) & 3;
                }
            }
        }
        p
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        self.x[q >> 6] >> (q & 63) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        self.z[q >> 6] >> (q & 63) & 1 == 1
    }

    #[inline]
    pub fn set_x(&mut self, q: usize, v: bool) {
        let (w, b) = (q >> 6, q & 63);
        self.x[w] = (self.x[w] & !(1 << b)) | ((v as u64) << b);
    }

    #[inline]
    pub fn set_z(&mut self, q: usize, v: bool) {
        let (w, b) = (q >> 6, q & 63);
        self.z[w] = (self.z[w] & !(1 << b)) | ((v as u64) << b);
    }

    /// Phase exponent `r` with the operator equal to `i^r · X^x Z^z`.
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn kind(&self, q: usize) -> PauliKind {
        match (self.x_bit(q), self.z_bit(q)) {
            (false, false) => PauliKind::I,
            (true, false) => PauliKind::X,
            (false, true) => PauliKind::Z,
            (true, true) => PauliKind::Y,
        }
    }

    pub fn is_identity_bits(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Number of Y factors modulo 4 (each Y contributes one factor of i).
    fn y_count_mod4(&self) -> u8 {
        let total: u32 = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        (total & 3) as u8
    }

    /// Sign of the operator when interpreted as ±(tensor of literal I/X/Y/Z).
    ///
    /// Returns `None` for non-Hermitian phases (±i).
    pub fn hermitian_sign(&self) -> Option<i8> {
        let r = (self.phase + 8 - self.y_count_mod4()) & 3;
        match r {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// Force the overall sign to `sign` (±1), keeping the Pauli content.
    pub fn with_sign(mut self, sign: i8) -> Self {
        let base = self.y_count_mod4();
        self.phase = if sign >= 0 { base } else { (base + 2) & 3 };
        self
    }

    /// Multiply the global phase by (-1).
    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    /// True if this operator commutes with `other`.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        debug_assert_eq!(self.n, other.n);
        parity_and(&self.x, &other.z) == parity_and(&self.z, &other.x)
    }

    /// In-place product `self ← self · rhs` with exact phase tracking.
    pub fn mul_assign_right(&mut self, rhs: &PauliString) {
        debug_assert_eq!(self.n, rhs.n);
        // Z^b of self crosses X^c of rhs.
        let cross = parity_and(&self.z, &rhs.x) as u8;
        self.phase = (self.phase + rhs.phase + 2 * cross) & 3;
        for (a, b) in self.x.iter_mut().zip(&rhs.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&rhs.z) {
            *a ^= b;
        }
    }

    pub fn product(&self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign_right(rhs);
        out
    }

    /// Conjugate by a Clifford gate: `self ← U · self · U†`.
    ///
    /// Update rules in the i-exponent convention (per-qubit bits):
    ///
    /// | gate | bits                                   | phase += |
    /// |------|----------------------------------------|----------|
    /// | H    | swap x,z                               | 2·(x&z)  |
    /// | S    | z ^= x                                 | x        |
    /// | S†   | z ^= x                                 | 3x       |
    /// | X    | —                                      | 2z       |
    /// | Y    | —                                      | 2(x⊕z)   |
    /// | Z    | —                                      | 2x       |
    /// | CX   | x_t ^= x_c; z_c ^= z_t                 | 0        |
    /// | CZ   | z_a ^= x_b; z_b ^= x_a                 | 2(x_a&x_b) |
    /// | SWAP | swap qubits                            | 0        |
    pub fn apply_gate(&mut self, gate: Gate) {
        match gate {
            Gate::H(q) => {
                let (x, z) = (self.x_bit(q), self.z_bit(q));
                if x && z {
                    self.phase = (self.phase + 2) & 3;
                }
                self.set_x(q, z);
                self.set_z(q, x);
            }
            Gate::S(q) => {
                if self.x_bit(q) {
                    self.phase = (self.phase + 1) & 3;
                    self.set_z(q, !self.z_bit(q));
                }
            }
            Gate::SDag(q) => {
                if self.x_bit(q) {
                    self.phase = (self.phase + 3) & 3;
                    self.set_z(q, !self.z_bit(q));
                }
            }
            Gate::X(q) => {
                if self.z_bit(q) {
                    self.phase = (self.phase + 2) & 3;
                }
            }
            Gate::Y(q) => {
                if self.x_bit(q) != self.z_bit(q) {
                    self.phase = (self.phase + 2) & 3;
                }
            }
            Gate::Z(q) => {
                if self.x_bit(q) {
                    self.phase = (self.phase + 2) & 3;
                }
            }
            Gate::Cx(c, t) => {
                if self.x_bit(c) {
                    self.set_x(t, !self.x_bit(t));
                }
                if self.z_bit(t) {
                    self.set_z(c, !self.z_bit(c));
                }
            }
            Gate::Cz(a, b) => {
                let (xa, xb) = (self.x_bit(a), self.x_bit(b));
                if xa && xb {
                    self.phase = (self.phase + 2) & 3;
                }
                if xb {
                    self.set_z(a, !self.z_bit(a));
                }
                if xa {
                    self.set_z(b, !self.z_bit(b));
                }
            }
            Gate::Swap(a, b) => {
                let (xa, za) = (self.x_bit(a), self.z_bit(a));
                let (xb, zb) = (self.x_bit(b), self.z_bit(b));
                self.set_x(a, xb);
                self.set_z(a, zb);
                self.set_x(b, xa);
                self.set_z(b, za);
            }
        }
    }

    /// Iterate over non-identity (qubit, kind) pairs.
    pub fn iter_support(&self) -> impl Iterator<Item = (usize, PauliKind)> + '_ {
        (0..self.n).filter_map(|q| match self.kind(q) {
            PauliKind::I => None,
            k => Some((q, k)),
        })
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hermitian_sign() {
            Some(1) => write!(f, "+")?,
            Some(-1) => write!(f, "-")?,
            _ => write!(f, "i^{} ", self.phase)?,
        }
        for q in 0..self.n {
            let c = match self.kind(q) {
                PauliKind::I => '_',
                PauliKind::X => 'X',
                PauliKind::Y => 'Y',
                PauliKind::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
