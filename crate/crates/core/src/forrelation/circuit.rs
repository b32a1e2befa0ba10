//! Gate-list circuits over qubit wires, Clifford+T compilation, T-depth,
//! and two independent simulators (in-place statevector and dense unitary).
//!
//! Wire 0 is the most significant bit of a basis index.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::linalg::{c, cr, C64, CMatrix, CVector};

/// Dense unitaries are only built up to this many wires.
pub const MAX_DENSE_WIRES: usize = 11;
/// Statevector simulation limit.
pub const MAX_SIM_WIRES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    X(usize),
    /// Phase gate diag(1, i).
    P(usize),
    Pdg(usize),
    T(usize),
    Tdg(usize),
    Cnot(usize, usize),
    /// Controlled Hadamard (control, target).
    Ch(usize, usize),
    /// Unbound input oracle: diag(v_j) on the listed wires, v supplied by a party.
    Oracle(Party, Vec<usize>),
    /// Bound diagonal ±1 phase on the listed wires, entry j applies signs[j].
    Phase(Vec<usize>, Vec<bool>),
    Measure(usize),
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match self {
            Gate::H(w) | Gate::X(w) | Gate::P(w) | Gate::Pdg(w) | Gate::T(w) | Gate::Tdg(w) | Gate::Measure(w) => vec![*w],
            Gate::Cnot(a, b) | Gate::Ch(a, b) => vec![*a, *b],
            Gate::Oracle(_, ws) | Gate::Phase(ws, _) => ws.clone(),
        }
    }

    pub fn is_t(&self) -> bool {
        matches!(self, Gate::T(_) | Gate::Tdg(_))
    }

    pub fn is_clifford_t(&self) -> bool {
        matches!(
            self,
            Gate::H(_) | Gate::X(_) | Gate::P(_) | Gate::Pdg(_) | Gate::T(_) | Gate::Tdg(_) | Gate::Cnot(..) | Gate::Measure(_)
        )
    }

    fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::X(_) => "X",
            Gate::P(_) => "P",
            Gate::Pdg(_) => "PDG",
            Gate::T(_) => "T",
            Gate::Tdg(_) => "TDG",
            Gate::Cnot(..) => "CNOT",
            Gate::Ch(..) => "CH",
            Gate::Oracle(Party::A, _) => "ORACLE_A",
            Gate::Oracle(Party::B, _) => "ORACLE_B",
            Gate::Phase(..) => "PHASE",
            Gate::Measure(_) => "MEASURE",
        }
    }

    /// 2x2 matrix of a single-wire unitary gate.
    fn single(&self) -> Option<[[C64; 2]; 2]> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = cr(0.0);
        let o = cr(1.0);
        Some(match self {
            Gate::H(_) => [[cr(s), cr(s)], [cr(s), cr(-s)]],
            Gate::X(_) => [[z, o], [o, z]],
            Gate::P(_) => [[o, z], [z, c(0.0, 1.0)]],
            Gate::Pdg(_) => [[o, z], [z, c(0.0, -1.0)]],
            Gate::T(_) => [[o, z], [z, c(s, s)]],
            Gate::Tdg(_) => [[o, z], [z, c(s, -s)]],
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub wire_count: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(wire_count: usize) -> Self {
        Circuit { wire_count, gates: Vec::new() }
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.wire_count != self.wire_count {
            return Err(Error::DimensionMismatch(format!("{} vs {} wires", self.wire_count, other.wire_count)));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Wire indices in range, distinct within a gate, phase tables of the
    /// right length, and nothing acting on a wire after its measurement.
    pub fn validate(&self) -> Result<()> {
        let mut measured = vec![false; self.wire_count];
        for (i, g) in self.gates.iter().enumerate() {
            let ws = g.wires();
            if ws.is_empty() {
                return Err(Error::InvalidArgument(format!("gate {i} acts on no wire")));
            }
            for (k, &w) in ws.iter().enumerate() {
                if w >= self.wire_count {
                    return Err(Error::InvalidArgument(format!("gate {i}: wire {w} out of range")));
                }
                if ws[..k].contains(&w) {
                    return Err(Error::InvalidArgument(format!("gate {i}: repeated wire {w}")));
                }
                if measured[w] {
                    return Err(Error::InvalidArgument(format!("gate {i}: wire {w} already measured")));
                }
            }
            if let Gate::Phase(ws, signs) = g {
                if signs.len() != 1 << ws.len() {
                    return Err(Error::DimensionMismatch(format!("gate {i}: {} signs for {} wires", signs.len(), ws.len())));
                }
            }
            if let Gate::Measure(w) = g {
                measured[*w] = true;
            }
        }
        Ok(())
    }

    /// Replaces the party oracles with bound phases.
    pub fn bind(&self, a: &[bool], b: &[bool]) -> Result<Circuit> {
        let mut out = Circuit::new(self.wire_count);
        for g in &self.gates {
            out.gates.push(match g {
                Gate::Oracle(p, ws) => {
                    let v = if *p == Party::A { a } else { b };
                    if v.len() != 1 << ws.len() {
                        return Err(Error::DimensionMismatch(format!("oracle on {} wires, input of length {}", ws.len(), v.len())));
                    }
                    Gate::Phase(ws.clone(), v.to_vec())
                }
                g => g.clone(),
            });
        }
        Ok(out)
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_t()).count()
    }

    pub fn measured_wires(&self) -> Vec<usize> {
        self.gates.iter().filter_map(|g| if let Gate::Measure(w) = g { Some(*w) } else { None }).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("WIRES {}\n", self.wire_count);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut wires = None;
        let mut gates = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Parse { line: ln + 1, message: m.to_string() };
            let mut tok = line.split_whitespace();
            let name = tok.next().unwrap();
            let rest: Vec<&str> = tok.collect();
            if name == "WIRES" {
                let w = rest.first().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad wire count"))?;
                wires = Some(w);
                continue;
            }
            if name == "PHASE" {
                let (signs, ws) = rest.split_last().ok_or_else(|| err("PHASE needs wires and a sign string"))?;
                let ws = ws.iter().map(|t| t.parse().map_err(|_| err("bad wire"))).collect::<Result<Vec<usize>>>()?;
                let signs = signs
                    .chars()
                    .map(|ch| match ch {
                        '+' => Ok(false),
                        '-' => Ok(true),
                        _ => Err(err("sign string must use + and -")),
                    })
                    .collect::<Result<Vec<bool>>>()?;
                gates.push(Gate::Phase(ws, signs));
                continue;
            }
            let ws = rest.iter().map(|t| t.parse().map_err(|_| err("bad wire"))).collect::<Result<Vec<usize>>>()?;
            let one = |ws: &[usize]| if ws.len() == 1 { Ok(ws[0]) } else { Err(err("expected one wire")) };
            let two = |ws: &[usize]| if ws.len() == 2 { Ok((ws[0], ws[1])) } else { Err(err("expected two wires")) };
            gates.push(match name {
                "H" => Gate::H(one(&ws)?),
                "X" => Gate::X(one(&ws)?),
                "P" => Gate::P(one(&ws)?),
                "PDG" => Gate::Pdg(one(&ws)?),
                "T" => Gate::T(one(&ws)?),
                "TDG" => Gate::Tdg(one(&ws)?),
                "MEASURE" => Gate::Measure(one(&ws)?),
                "CNOT" => {
                    let (a, b) = two(&ws)?;
                    Gate::Cnot(a, b)
                }
                "CH" => {
                    let (a, b) = two(&ws)?;
                    Gate::Ch(a, b)
                }
                "ORACLE_A" => Gate::Oracle(Party::A, ws),
                "ORACLE_B" => Gate::Oracle(Party::B, ws),
                _ => return Err(err(&format!("unknown gate {name}"))),
            });
        }
        let c = Circuit { wire_count: wires.ok_or(Error::Parse { line: 0, message: "missing WIRES line".into() })?, gates };
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for w in self.wires() {
            write!(f, " {w}")?;
        }
        if let Gate::Phase(_, signs) = self {
            let s: String = signs.iter().map(|&b| if b { '-' } else { '+' }).collect();
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

/// Controlled-H as P, H, T, CNOT, T†, H, P† on the target. The control wire
/// only carries the CNOT.
pub fn ch_decomposition(control: usize, target: usize) -> [Gate; 7] {
    [
        Gate::P(target),
        Gate::H(target),
        Gate::T(target),
        Gate::Cnot(control, target),
        Gate::Tdg(target),
        Gate::H(target),
        Gate::Pdg(target),
    ]
}

/// Rewrites every controlled-H; everything else must already be Clifford+T.
pub fn compile_clifford_t(circ: &Circuit) -> Result<Circuit> {
    circ.validate()?;
    let mut out = Circuit::new(circ.wire_count);
    for g in &circ.gates {
        match g {
            Gate::Ch(a, b) => out.gates.extend(ch_decomposition(*a, *b)),
            g if g.is_clifford_t() => out.gates.push(g.clone()),
            g => return Err(Error::Unsupported(format!("gate {} has no Clifford+T rewrite", g.name()))),
        }
    }
    Ok(out)
}

/// Greedy ASAP layering where gates only commute past each other when they
/// share no wire. Each wire carries the number of T layers before it; a
/// gate starts after the latest of its wires and a T gate opens a new layer.
pub fn t_depth(circ: &Circuit) -> Result<usize> {
    circ.validate()?;
    let mut depth = vec![0usize; circ.wire_count];
    for g in &circ.gates {
        if !g.is_clifford_t() {
            return Err(Error::Unsupported(format!("t_depth needs Clifford+T, found {}", g.name())));
        }
        let ws = g.wires();
        let d = ws.iter().map(|&w| depth[w]).max().unwrap_or(0) + g.is_t() as usize;
        for w in ws {
            depth[w] = d;
        }
    }
    Ok(depth.into_iter().max().unwrap_or(0))
}

fn bit(index: usize, wire: usize, n: usize) -> usize {
    (index >> (n - 1 - wire)) & 1
}

fn phase_index(index: usize, ws: &[usize], n: usize) -> usize {
    ws.iter().fold(0, |acc, &w| (acc << 1) | bit(index, w, n))
}

/// In-place statevector update. Measurements are ignored (they are terminal).
pub fn apply_gate(state: &mut [C64], g: &Gate, n: usize) -> Result<()> {
    if state.len() != 1 << n {
        return Err(Error::DimensionMismatch(format!("state of length {} on {n} wires", state.len())));
    }
    if let Some(m) = g.single() {
        let w = g.wires()[0];
        let mask = 1 << (n - 1 - w);
        for i in 0..state.len() {
            if i & mask == 0 {
                let (a, b) = (state[i], state[i | mask]);
                state[i] = m[0][0] * a + m[0][1] * b;
                state[i | mask] = m[1][0] * a + m[1][1] * b;
            }
        }
        return Ok(());
    }
    match g {
        Gate::Cnot(cw, t) | Gate::Ch(cw, t) => {
            let cm = 1 << (n - 1 - cw);
            let tm = 1 << (n - 1 - t);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..state.len() {
                if i & cm != 0 && i & tm == 0 {
                    let (a, b) = (state[i], state[i | tm]);
                    if matches!(g, Gate::Cnot(..)) {
                        state[i] = b;
                        state[i | tm] = a;
                    } else {
                        state[i] = (a + b) * s;
                        state[i | tm] = (a - b) * s;
                    }
                }
            }
        }
        Gate::Phase(ws, signs) => {
            for (i, amp) in state.iter_mut().enumerate() {
                if signs[phase_index(i, ws, n)] {
                    *amp = -*amp;
                }
            }
        }
        Gate::Measure(_) => {}
        Gate::Oracle(..) => return Err(Error::Precondition("oracle gates must be bound before simulation".into())),
        _ => unreachable!(),
    }
    Ok(())
}

/// Final state from |0…0⟩.
pub fn simulate(circ: &Circuit) -> Result<Vec<C64>> {
    circ.validate()?;
    let n = circ.wire_count;
    if n > MAX_SIM_WIRES {
        return Err(Error::BudgetExceeded(format!("{n} wires exceeds {MAX_SIM_WIRES}")));
    }
    let mut state = vec![cr(0.0); 1 << n];
    state[0] = cr(1.0);
    for g in &circ.gates {
        apply_gate(&mut state, g, n)?;
    }
    Ok(state)
}

/// Probability that `wire` reads 0 in the final state.
pub fn zero_probability(state: &[C64], wire: usize, n: usize) -> f64 {
    state.iter().enumerate().filter(|(i, _)| bit(*i, wire, n) == 0).map(|(_, a)| a.norm_sqr()).sum()
}

/// Nonzero entries (row, col, value) of one gate's full matrix, built from
/// its action on each basis state.
fn gate_entries(g: &Gate, n: usize) -> Result<Vec<(usize, usize, C64)>> {
    let d = 1 << n;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut e = Vec::with_capacity(2 * d);
    let two = |c: usize, t: usize, u: [[f64; 2]; 2], e: &mut Vec<(usize, usize, C64)>| {
        let tm = 1 << (n - 1 - t);
        for col in 0..d {
            if bit(col, c, n) == 0 {
                e.push((col, col, cr(1.0)));
                continue;
            }
            let tb = bit(col, t, n);
            for out in 0..2 {
                e.push(((col & !tm) | (out * tm), col, cr(u[out][tb])));
            }
        }
    };
    match g {
        Gate::Cnot(cw, t) => two(*cw, *t, [[0.0, 1.0], [1.0, 0.0]], &mut e),
        Gate::Ch(cw, t) => two(*cw, *t, [[s, s], [s, -s]], &mut e),
        Gate::Phase(ws, signs) => {
            for i in 0..d {
                e.push((i, i, cr(if signs[phase_index(i, ws, n)] { -1.0 } else { 1.0 })));
            }
        }
        Gate::Measure(_) => e.extend((0..d).map(|i| (i, i, cr(1.0)))),
        Gate::Oracle(..) => return Err(Error::Precondition("oracle gates must be bound before simulation".into())),
        g => {
            let u = g.single().unwrap();
            let w = g.wires()[0];
            let wm = 1 << (n - 1 - w);
            for col in 0..d {
                let b = bit(col, w, n);
                for out in 0..2 {
                    e.push(((col & !wm) | (out * wm), col, u[out][b]));
                }
            }
        }
    }
    e.retain(|(_, _, v)| *v != cr(0.0));
    Ok(e)
}

/// Product of all gate matrices, measurements treated as identity.
pub fn dense_unitary(circ: &Circuit) -> Result<CMatrix> {
    circ.validate()?;
    let n = circ.wire_count;
    if n > MAX_DENSE_WIRES {
        return Err(Error::BudgetExceeded(format!("{n} wires exceeds the dense limit {MAX_DENSE_WIRES}")));
    }
    let d = 1 << n;
    let mut u = CMatrix::identity(d, d);
    for g in &circ.gates {
        // (G·U)[r, :] = Σ G[r, k] U[k, :]
        let mut next = CMatrix::zeros(d, d);
        for (r, k, v) in gate_entries(g, n)? {
            for j in 0..d {
                next[(r, j)] += v * u[(k, j)];
            }
        }
        u = next;
    }
    Ok(u)
}

/// Column 0 of the dense unitary as a vector.
pub fn dense_output(circ: &Circuit) -> Result<CVector> {
    Ok(dense_unitary(circ)?.column(0).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::max_abs_diff;

    fn ch_matrix() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = cr(1.0);
        m[(1, 1)] = cr(1.0);
        m[(2, 2)] = cr(s);
        m[(2, 3)] = cr(s);
        m[(3, 2)] = cr(s);
        m[(3, 3)] = cr(-s);
        m
    }

    #[test]
    fn ch_decomposition_is_exact() {
        let mut circ = Circuit::new(2);
        circ.gates.extend(ch_decomposition(0, 1));
        let u = dense_unitary(&circ).unwrap();
        assert!(max_abs_diff(&u, &ch_matrix()) < 1e-12);
        let mut direct = Circuit::new(2);
        direct.push(Gate::Ch(0, 1));
        assert!(max_abs_diff(&dense_unitary(&direct).unwrap(), &ch_matrix()) < 1e-15);
        assert_eq!(t_depth(&circ).unwrap(), 2);
        assert_eq!(compile_clifford_t(&direct).unwrap().gates.len(), 7);
    }

    #[test]
    fn reversed_ch_matches_swapped_wires() {
        let mut a = Circuit::new(2);
        a.gates.extend(ch_decomposition(1, 0));
        let mut b = Circuit::new(2);
        b.push(Gate::Ch(1, 0));
        assert!(max_abs_diff(&dense_unitary(&a).unwrap(), &dense_unitary(&b).unwrap()) < 1e-12);
    }

    #[test]
    fn clifford_only_has_zero_t_depth_and_compiles_unchanged() {
        let mut c = Circuit::new(3);
        c.push(Gate::H(0)).push(Gate::Cnot(0, 2)).push(Gate::P(1)).push(Gate::X(2)).push(Gate::Measure(0));
        assert_eq!(t_depth(&c).unwrap(), 0);
        assert_eq!(compile_clifford_t(&c).unwrap(), c);
    }

    #[test]
    fn t_depth_counts_layers() {
        let mut c = Circuit::new(2);
        c.push(Gate::T(0)).push(Gate::T(1)).push(Gate::Cnot(0, 1)).push(Gate::Tdg(1));
        assert_eq!(t_depth(&c).unwrap(), 2);
        let mut ch = Circuit::new(2);
        ch.push(Gate::Ch(0, 1));
        assert!(t_depth(&ch).is_err());
    }

    #[test]
    fn simulators_agree() {
        let mut c = Circuit::new(3);
        c.push(Gate::H(0))
            .push(Gate::H(2))
            .push(Gate::Ch(0, 1))
            .push(Gate::T(1))
            .push(Gate::Phase(vec![2, 0], vec![false, true, true, false]))
            .push(Gate::Cnot(2, 1))
            .push(Gate::Pdg(0))
            .push(Gate::X(2));
        let sv = simulate(&c).unwrap();
        let dv = dense_output(&c).unwrap();
        for (a, b) in sv.iter().zip(dv.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
        let u = dense_unitary(&c).unwrap();
        let id = CMatrix::identity(8, 8);
        assert!(max_abs_diff(&(u.adjoint() * &u), &id) < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_circuits() {
        let mut c = Circuit::new(2);
        c.push(Gate::H(2));
        assert!(c.validate().is_err());
        let mut c = Circuit::new(2);
        c.push(Gate::Measure(0)).push(Gate::H(0));
        assert!(c.validate().is_err());
        let mut c = Circuit::new(2);
        c.push(Gate::Cnot(1, 1));
        assert!(c.validate().is_err());
        let mut c = Circuit::new(2);
        c.push(Gate::Phase(vec![0], vec![true]));
        assert!(c.validate().is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut c = Circuit::new(4);
        c.push(Gate::H(0))
            .push(Gate::Oracle(Party::A, vec![0, 1]))
            .push(Gate::Phase(vec![2, 3], vec![false, true, true, false]))
            .push(Gate::Ch(0, 3))
            .push(Gate::Tdg(2))
            .push(Gate::Measure(0));
        let t = c.to_text();
        assert!(t.contains("CH 0 3\n") && t.contains("PHASE 2 3 +--+\n"));
        assert_eq!(Circuit::from_text(&t).unwrap(), c);
        assert!(Circuit::from_text("WIRES 2\nFOO 1\n").is_err());
        assert!(Circuit::from_text("H 0\n").is_err());
    }
}
