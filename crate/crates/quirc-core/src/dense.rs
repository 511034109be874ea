//! Exact dense state-vector simulation, used as an independent oracle for
//! validating the tableau and the protocol circuits. Capped at 12 qubits.

use num_complex::Complex64;

use crate::pauli::{Gate, PauliError, PauliString};

pub const MAX_ORACLE_QUBITS: usize = 12;

const EPS: f64 = 1e-12;

/// Dense complex state vector on up to [`MAX_ORACLE_QUBITS`] qubits.
#[derive(Clone, Debug)]
pub struct DenseOracle {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseOracle {
    /// |0…0⟩ on `n` qubits.
    pub fn new(n: usize) -> Result<Self, PauliError> {
        if n == 0 {
            return Err(PauliError::EmptyRegister);
        }
        if n > MAX_ORACLE_QUBITS {
            return Err(PauliError::OracleTooLarge { n, max: MAX_ORACLE_QUBITS });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(DenseOracle { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn apply_gate(&mut self, gate: Gate) -> Result<(), PauliError> {
        gate.validate(self.n)?;
        let i = Complex64::new(0.0, 1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match gate {
            Gate::H(q) => self.apply_1q(q, |a0, a1| (s * (a0 + a1), s * (a0 - a1))),
            Gate::S(q) => self.apply_1q(q, |a0, a1| (a0, i * a1)),
            Gate::SDag(q) => self.apply_1q(q, |a0, a1| (a0, -i * a1)),
            Gate::X(q) => self.apply_1q(q, |a0, a1| (a1, a0)),
            Gate::Y(q) => self.apply_1q(q, |a0, a1| (-i * a1, i * a0)),
            Gate::Z(q) => self.apply_1q(q, |a0, a1| (a0, -a1)),
            Gate::Cx(c, t) => {
                let (mc, mt) = (1usize << c, 1usize << t);
                for k in 0..self.amps.len() {
                    if k & mc != 0 && k & mt == 0 {
                        self.amps.swap(k, k | mt);
                    }
                }
            }
            Gate::Cz(a, b) => {
                let (ma, mb) = (1usize << a, 1usize << b);
                for k in 0..self.amps.len() {
                    if k & ma != 0 && k & mb != 0 {
                        self.amps[k] = -self.amps[k];
                    }
                }
            }
            Gate::Swap(a, b) => {
                let (ma, mb) = (1usize << a, 1usize << b);
                for k in 0..self.amps.len() {
                    if k & ma != 0 && k & mb == 0 {
                        self.amps.swap(k, k ^ ma ^ mb);
                    }
                }
            }
        }
        Ok(())
    }

    fn apply_1q(&mut self, q: usize, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) {
        let m = 1usize << q;
        for k in 0..self.amps.len() {
            if k & m == 0 {
                let (a0, a1) = (self.amps[k], self.amps[k | m]);
                let (b0, b1) = f(a0, a1);
                self.amps[k] = b0;
                self.amps[k | m] = b1;
            }
        }
    }

    /// Apply `p` to the state vector: `ψ ← p·ψ`.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        assert_eq!(p.len(), self.n);
        let mut xmask = 0usize;
        let mut zmask = 0usize;
        for q in 0..self.n {
            if p.x_bit(q) {
                xmask |= 1 << q;
            }
            if p.z_bit(q) {
                zmask |= 1 << q;
            }
        }
        let global = Complex64::new(0.0, 1.0).powu(p.phase_exponent() as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (k, amp) in self.amps.iter().enumerate() {
            // Z part acts first (diagonal), then X flips bits.
            let sign = if ((k & zmask).count_ones() & 1) == 1 { -1.0 } else { 1.0 };
            out[k ^ xmask] = global * sign * amp;
        }
        self.amps = out;
    }

    /// ⟨ψ| p |ψ⟩, exact up to floating point.
    pub fn expectation(&self, p: &PauliString) -> Complex64 {
        let mut phi = self.clone();
        phi.apply_pauli(p);
        self.amps
            .iter()
            .zip(&phi.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Probability that measuring `p` yields outcome 0 (+1 eigenvalue).
    pub fn outcome_probability(&self, p: &PauliString) -> f64 {
        0.5 * (1.0 + self.expectation(p).re)
    }

    /// Project onto the `(-1)^outcome` eigenspace of `p` and renormalize.
    ///
    /// Returns the branch probability. Errors if the branch has probability 0.
    pub fn measure_forced(&mut self, p: &PauliString, outcome: bool) -> Result<f64, PauliError> {
        if p.hermitian_sign().is_none() {
            return Err(PauliError::NonHermitianMeasurement);
        }
        let mut pp = self.clone();
        pp.apply_pauli(p);
        let sign = if outcome { -1.0 } else { 1.0 };
        for (a, b) in self.amps.iter_mut().zip(&pp.amps) {
            *a = 0.5 * (*a + sign * b);
        }
        let norm2: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        if norm2 < EPS {
            return Err(PauliError::ImpossibleOutcome);
        }
        let scale = norm2.sqrt().recip();
        for a in &mut self.amps {
            *a *= scale;
        }
        Ok(norm2)
    }

    /// True if `p` stabilizes the state: `p·ψ == ψ` within tolerance.
    pub fn is_stabilized_by(&self, p: &PauliString) -> bool {
        (self.expectation(p) - Complex64::new(1.0, 0.0)).norm() < 1e-9
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliKind;

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a - Complex64::new(re, im)).norm() < 1e-12
    }

    #[test]
    fn h_on_zero_gives_plus() {
        let mut d = DenseOracle::new(1).unwrap();
        d.apply_gate(Gate::H(0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(d.amplitudes()[0], s, 0.0));
        assert!(close(d.amplitudes()[1], s, 0.0));
    }

    #[test]
    fn cz_on_plus_plus() {
        let mut d = DenseOracle::new(2).unwrap();
        d.apply_gate(Gate::H(0)).unwrap();
        d.apply_gate(Gate::H(1)).unwrap();
        d.apply_gate(Gate::Cz(0, 1)).unwrap();
        let a = d.amplitudes();
        assert!(close(a[0], 0.5, 0.0));
        assert!(close(a[1], 0.5, 0.0));
        assert!(close(a[2], 0.5, 0.0));
        assert!(close(a[3], -0.5, 0.0));
    }

    #[test]
    fn oracle_size_limit() {
        assert!(matches!(
            DenseOracle::new(13),
            Err(PauliError::OracleTooLarge { n: 13, max: 12 })
        ));
    }

    #[test]
    fn forced_measurement_probabilities() {
        let mut d = DenseOracle::new(1).unwrap();
        d.apply_gate(Gate::H(0)).unwrap();
        let z = PauliString::single(1, 0, PauliKind::Z);
        let pr = d.measure_forced(&z, false).unwrap();
        assert!((pr - 0.5).abs() < 1e-12);
        // Now |0⟩: forcing outcome 1 on Z is impossible.
        assert!(matches!(
            d.measure_forced(&z, true),
            Err(PauliError::ImpossibleOutcome)
        ));
    }

    #[test]
    fn pauli_phases_on_states() {
        // Y|0⟩ = i|1⟩
        let mut d = DenseOracle::new(1).unwrap();
        d.apply_pauli(&PauliString::single(1, 0, PauliKind::Y));
        assert!(close(d.amplitudes()[1], 0.0, 1.0));
    }
}
