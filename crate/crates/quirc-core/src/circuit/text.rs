//! Plain-text circuit format: one instruction per line.
//!
//! ```text
//! OPCODE[(prob)] target...
//! DETECTOR rec...
//! OBSERVABLE rec...
//! ```
//!
//! Blank lines and `#` comments are ignored.

use std::fmt;
use std::str::FromStr;

use super::{Circuit, CircuitError, Instruction, Opcode};

const OPCODES: &[Opcode] = &[
    Opcode::H,
    Opcode::S,
    Opcode::SDag,
    Opcode::X,
    Opcode::Y,
    Opcode::Z,
    Opcode::Cx,
    Opcode::Cz,
    Opcode::Swap,
    Opcode::RZ,
    Opcode::RX,
    Opcode::MZ,
    Opcode::MX,
    Opcode::MY,
    Opcode::XError,
    Opcode::ZError,
    Opcode::Depolarize1,
    Opcode::Depolarize2,
];

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# qubits: {}", self.n)?;
        for ins in &self.instructions {
            match ins.prob {
                Some(p) => write!(f, "{}({})", ins.opcode.name(), p)?,
                None => write!(f, "{}", ins.opcode.name())?,
            }
            for t in &ins.targets {
                write!(f, " {t}")?;
            }
            writeln!(f)?;
        }
        for det in &self.detectors {
            write!(f, "DETECTOR")?;
            for r in det {
                write!(f, " {r}")?;
            }
            writeln!(f)?;
        }
        for obs in &self.observables {
            write!(f, "OBSERVABLE")?;
            for r in obs {
                write!(f, " {r}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut c = Circuit::new(0);
        let mut max_target: Option<u32> = None;
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.trim();
            let lineno = lineno + 1;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                // Recover the qubit count header if present.
                if let Some(v) = rest.trim().strip_prefix("qubits:") {
                    if let Ok(n) = v.trim().parse::<u32>() {
                        c.n = c.n.max(n);
                    }
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().expect("non-empty line");
            let parse_targets = |parts: std::str::SplitWhitespace<'_>| -> Result<Vec<u32>, CircuitError> {
                parts
                    .map(|t| {
                        t.parse::<u32>().map_err(|_| CircuitError::Parse {
                            line: lineno,
                            msg: format!("bad index `{t}`"),
                        })
                    })
                    .collect()
            };
            if head == "DETECTOR" {
                c.detectors.push(parse_targets(parts)?);
                continue;
            }
            if head == "OBSERVABLE" {
                c.observables.push(parse_targets(parts)?);
                continue;
            }
            let (name, prob) = match head.find('(') {
                Some(open) => {
                    let close = head.rfind(')').ok_or_else(|| CircuitError::Parse {
                        line: lineno,
                        msg: "missing `)`".into(),
                    })?;
                    let p: f64 =
                        head[open + 1..close].parse().map_err(|_| CircuitError::Parse {
                            line: lineno,
                            msg: format!("bad probability in `{head}`"),
                        })?;
                    (&head[..open], Some(p))
                }
                None => (head, None),
            };
            let opcode = OPCODES
                .iter()
                .copied()
                .find(|o| o.name() == name)
                .ok_or_else(|| CircuitError::Parse {
                    line: lineno,
                    msg: format!("unknown opcode `{name}`"),
                })?;
            let targets = parse_targets(parts)?;
            if let Some(&m) = targets.iter().max() {
                max_target = Some(max_target.map_or(m, |x| x.max(m)));
            }
            c.instructions.push(Instruction { opcode, targets, prob });
        }
        if let Some(m) = max_target {
            c.n = c.n.max(m + 1);
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = Circuit::new(3);
        c.push(Opcode::RZ, vec![0, 1, 2]);
        c.push(Opcode::Cx, vec![0, 1]);
        c.push_noise(Opcode::XError, vec![1], 0.125);
        c.push(Opcode::MZ, vec![0, 1, 2]);
        c.detectors.push(vec![0, 1]);
        c.observables.push(vec![2]);
        let text = c.to_string();
        let back: Circuit = text.parse().unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn parse_reports_line() {
        let err = "H 0\nBOGUS 1\n".parse::<Circuit>().unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
    }
}
