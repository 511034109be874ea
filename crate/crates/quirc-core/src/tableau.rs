//! Stabilizer states in the destabilizer/stabilizer tableau representation.
//!
//! A state on `n` qubits is tracked by `2n` sign-carrying Pauli rows: rows
//! `0..n` are destabilizers, rows `n..2n` are stabilizers. Row `i` of the
//! destabilizer block anticommutes with stabilizer row `i` and commutes with
//! every other row; this dual structure is what makes deterministic-outcome
//! detection a simple anticommutation scan.
//!
//! Phases are tracked modulo 4 per row (see [`crate::pauli`]) so that S/S†
//! conjugation and Y-basis measurements stay exact. Measurement of an
//! arbitrary Hermitian Pauli is supported directly; single-qubit X and Y
//! measurements elsewhere in the crate are routed through a basis change into
//! this one code path.

use rand::Rng;

use crate::pauli::{Gate, PauliError, PauliKind, PauliString};

/// How a measurement outcome should be resolved when it is not determined
/// by the state.
pub enum OutcomeSource<'a, R: Rng> {
    /// Draw a fair coin from the supplied generator.
    Random(&'a mut R),
    /// Postselect the branch with this outcome. Applies only when the
    /// measurement is random; deterministic measurements always return
    /// their determined value (check the `deterministic` flag).
    Forced(bool),
}

/// Result of measuring a Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    pub outcome: bool,
    pub deterministic: bool,
}

/// Aaronson–Gottesman style stabilizer tableau.
#[derive(Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    /// `2n` rows: destabilizers then stabilizers.
    rows: Vec<PauliString>,
}

impl StabilizerTableau {
    /// The all-zeros state: stabilizers `Z_i`, destabilizers `X_i`.
    pub fn identity(n: usize) -> Result<Self, PauliError> {
        if n == 0 {
            return Err(PauliError::EmptyRegister);
        }
        let mut rows = Vec::with_capacity(2 * n);
        for i in 0..n {
            rows.push(PauliString::single(n, i, PauliKind::X));
        }
        for i in 0..n {
            rows.push(PauliString::single(n, i, PauliKind::Z));
        }
        Ok(StabilizerTableau { n, rows })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizer(&self, i: usize) -> &PauliString {
        &self.rows[self.n + i]
    }

    pub fn destabilizer(&self, i: usize) -> &PauliString {
        &self.rows[i]
    }

    /// Conjugate every row by the gate.
    pub fn apply_gate(&mut self, gate: Gate) -> Result<(), PauliError> {
        gate.validate(self.n)?;
        for row in &mut self.rows {
            row.apply_gate(gate);
        }
        Ok(())
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) -> Result<(), PauliError> {
        for &g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Apply a Pauli operator as a gate (conjugates rows by it; only signs change).
    pub fn apply_pauli(&mut self, p: &PauliString) {
        debug_assert_eq!(p.len(), self.n);
        for row in &mut self.rows {
            if !row.commutes_with(p) {
                row.negate();
            }
        }
    }

    /// Measure a Hermitian Pauli operator.
    ///
    /// The post-measurement state is stabilized by `(-1)^outcome · p`. When
    /// `p` (up to sign) lies in the stabilizer group the outcome is
    /// deterministic and the state is unchanged.
    pub fn measure_pauli<R: Rng>(
        &mut self,
        p: &PauliString,
        source: OutcomeSource<'_, R>,
    ) -> Result<Measurement, PauliError> {
        if p.len() != self.n {
            return Err(PauliError::SizeMismatch { left: p.len(), right: self.n });
        }
        if p.hermitian_sign().is_none() {
            return Err(PauliError::NonHermitianMeasurement);
        }
        let n = self.n;
        let pivot = (n..2 * n).find(|&r| !self.rows[r].commutes_with(p));
        match pivot {
            Some(pivot) => {
                let outcome = match source {
                    OutcomeSource::Random(rng) => rng.gen::<bool>(),
                    OutcomeSource::Forced(b) => b,
                };
                let pivot_row = self.rows[pivot].clone();
                for i in 0..2 * n {
                    if i != pivot && i != pivot - n && !self.rows[i].commutes_with(p) {
                        self.rows[i].mul_assign_right(&pivot_row);
                    }
                }
                // Old stabilizer becomes the destabilizer of the new one.
                self.rows[pivot - n] = pivot_row;
                let mut new_stab = p.clone();
                if outcome {
                    new_stab.negate();
                }
                self.rows[pivot] = new_stab;
                Ok(Measurement { outcome, deterministic: false })
            }
            None => {
                // p commutes with the whole group: accumulate the stabilizer
                // product that reproduces p's bits and compare signs.
                let mut scratch = PauliString::identity(n);
                for i in 0..n {
                    if !self.rows[i].commutes_with(p) {
                        let stab = self.rows[n + i].clone();
                        scratch.mul_assign_right(&stab);
                    }
                }
                debug_assert!(
                    scratch.x_words() == p.x_words() && scratch.z_words() == p.z_words(),
                    "deterministic measurement reconstruction mismatch"
                );
                let diff = (scratch.phase_exponent() + 8 - p.phase_exponent()) & 3;
                debug_assert!(diff % 2 == 0);
                let outcome = diff == 2;
                Ok(Measurement { outcome, deterministic: true })
            }
        }
    }

    /// True if `p` (with its sign) is in the stabilizer group. Non-destructive.
    pub fn is_stabilized_by(&self, p: &PauliString) -> bool {
        if p.len() != self.n || p.hermitian_sign().is_none() {
            return false;
        }
        let n = self.n;
        if (n..2 * n).any(|r| !self.rows[r].commutes_with(p)) {
            return false;
        }
        let mut scratch = PauliString::identity(n);
        for i in 0..n {
            if !self.rows[i].commutes_with(p) {
                let stab = self.rows[n + i].clone();
                scratch.mul_assign_right(&stab);
            }
        }
        scratch == *p
    }

    /// Verify the symplectic structure: destabilizer `i` anticommutes with
    /// stabilizer `j` exactly when `i == j`, and each block self-commutes.
    pub fn symplectic_ok(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let want_anti = i == j;
                if self.rows[i].commutes_with(&self.rows[n + j]) == want_anti {
                    return false;
                }
                if i < j {
                    if !self.rows[i].commutes_with(&self.rows[j]) {
                        return false;
                    }
                    if !self.rows[n + i].commutes_with(&self.rows[n + j]) {
                        return false;
                    }
                }
            }
        }
        // Rows must carry real signs.
        self.rows.iter().all(|r| r.hermitian_sign().is_some())
    }
}

impl std::fmt::Debug for StabilizerTableau {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Destab")?;
        for i in 0..self.n {
            writeln!(f, "  {}", self.rows[i])?;
        }
        writeln!(f, "Stab")?;
        for i in 0..self.n {
            writeln!(f, "  {}", self.rows[self.n + i])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zop(n: usize, q: usize) -> PauliString {
        PauliString::single(n, q, PauliKind::Z)
    }

    fn xop(n: usize, q: usize) -> PauliString {
        PauliString::single(n, q, PauliKind::X)
    }

    #[test]
    fn identity_rejects_zero_qubits() {
        assert_eq!(StabilizerTableau::identity(0).unwrap_err(), PauliError::EmptyRegister);
    }

    #[test]
    fn fresh_state_is_all_zeros() {
        let mut t = StabilizerTableau::identity(2).unwrap();
        assert!(t.symplectic_ok());
        // stabilizer group {ZI, IZ}
        assert!(t.is_stabilized_by(&zop(2, 0)));
        assert!(t.is_stabilized_by(&zop(2, 1)));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for q in 0..2 {
            let m = t.measure_pauli(&zop(2, q), OutcomeSource::Random(&mut rng)).unwrap();
            assert!(m.deterministic);
            assert!(!m.outcome);
        }
    }

    #[test]
    fn three_qubit_z_measurements_deterministic_zero() {
        let mut t = StabilizerTableau::identity(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for q in 0..3 {
            let m = t.measure_pauli(&zop(3, q), OutcomeSource::Random(&mut rng)).unwrap();
            assert_eq!((m.outcome, m.deterministic), (false, true));
        }
    }

    #[test]
    fn x_measurement_on_zero_is_random_then_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for forced in [false, true] {
            let mut t = StabilizerTableau::identity(1).unwrap();
            let m = t
                .measure_pauli::<ChaCha8Rng>(&xop(1, 0), OutcomeSource::Forced(forced))
                .unwrap();
            assert!(!m.deterministic);
            assert_eq!(m.outcome, forced);
            // Repeating the measurement is now deterministic and identical.
            let m2 = t.measure_pauli(&xop(1, 0), OutcomeSource::Random(&mut rng)).unwrap();
            assert!(m2.deterministic);
            assert_eq!(m2.outcome, forced);
            assert!(t.symplectic_ok());
        }
    }

    #[test]
    fn bell_state_stabilizers() {
        let mut t = StabilizerTableau::identity(2).unwrap();
        t.apply_gate(Gate::H(0)).unwrap();
        t.apply_gate(Gate::Cx(0, 1)).unwrap();
        let xx = PauliString::from_sparse(2, &[(0, PauliKind::X), (1, PauliKind::X)]);
        let zz = PauliString::from_sparse(2, &[(0, PauliKind::Z), (1, PauliKind::Z)]);
        assert!(t.is_stabilized_by(&xx));
        assert!(t.is_stabilized_by(&zz));
        let yy = PauliString::from_sparse(2, &[(0, PauliKind::Y), (1, PauliKind::Y)]);
        // Φ+ satisfies YY = -1: measuring YY is deterministic with outcome 1.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = t.measure_pauli(&yy, OutcomeSource::Random(&mut rng)).unwrap();
        assert!(m.deterministic);
        assert!(m.outcome);
    }

    #[test]
    fn gate_errors() {
        let mut t = StabilizerTableau::identity(2).unwrap();
        assert!(matches!(
            t.apply_gate(Gate::Cx(0, 0)),
            Err(PauliError::DuplicateTarget(0))
        ));
        assert!(matches!(
            t.apply_gate(Gate::H(5)),
            Err(PauliError::IndexOutOfRange { index: 5, n: 2 })
        ));
    }

    #[test]
    fn measurement_rejects_imaginary_phase() {
        let mut t = StabilizerTableau::identity(1).unwrap();
        // i^0·XZ is -iY: not Hermitian.
        let mut bad = PauliString::single(1, 0, PauliKind::X);
        bad.mul_assign_right(&PauliString::single(1, 0, PauliKind::Z));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(
            t.measure_pauli(&bad, OutcomeSource::Random(&mut rng)).unwrap_err(),
            PauliError::NonHermitianMeasurement
        );
    }

    #[test]
    fn random_circuits_preserve_symplectic_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let n = 4;
            let mut t = StabilizerTableau::identity(n).unwrap();
            for _ in 0..40 {
                let g = match rng.gen_range(0..6) {
                    0 => Gate::H(rng.gen_range(0..n)),
                    1 => Gate::S(rng.gen_range(0..n)),
                    2 => Gate::SDag(rng.gen_range(0..n)),
                    3 => {
                        let a = rng.gen_range(0..n);
                        let b = (a + rng.gen_range(1..n)) % n;
                        Gate::Cx(a, b)
                    }
                    4 => {
                        let a = rng.gen_range(0..n);
                        let b = (a + rng.gen_range(1..n)) % n;
                        Gate::Cz(a, b)
                    }
                    _ => Gate::X(rng.gen_range(0..n)),
                };
                t.apply_gate(g).unwrap();
            }
            assert!(t.symplectic_ok());
            // Interleave a measurement and re-check.
            let q = rng.gen_range(0..n);
            let _ = t
                .measure_pauli(&zop(n, q), OutcomeSource::Random(&mut rng))
                .unwrap();
            assert!(t.symplectic_ok());
        }
    }
}
